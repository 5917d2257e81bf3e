use eppa::malg::*;
use eppa::{ExactField, Quadratic};
use proptest::prelude::*;

fn q(s: &str) -> Quadratic {
    Quadratic::parse_scalar(s).unwrap()
}

fn discrete(ms: Vec<Quadratic>) -> Algebra<Quadratic> {
    let names = (0..ms.len()).map(|i| format!("a{i}")).collect();
    Algebra::discrete(CellSpace::new(names, ms).unwrap())
}

/// Positive `u + v·sqrt(2)` with small coefficients.
fn quad() -> impl Strategy<Value = Quadratic> {
    (1i64..=6, 1i64..=6, -3i64..=3, 1i64..=4).prop_filter_map("positive", |(a, b, c, d)| {
        let x = Quadratic::from_ratio(a, b) + Quadratic::from_ratio(c, d) * Quadratic::sqrt(2);
        (x > Quadratic::from_integer(0)).then_some(x)
    })
}

/// Atom measures built from two base values so that equal-measure unions exist.
fn patterned() -> impl Strategy<Value = Vec<Quadratic>> {
    (quad(), quad(), 0usize..5).prop_map(|(x, y, pat)| {
        let raw = match pat {
            0 => vec![x.clone(), y.clone(), x + y],
            1 => vec![x.clone(), x, y],
            2 => vec![x.clone(), y.clone(), x, y],
            3 => vec![x.clone(), y.clone(), x.clone() + y, x],
            _ => vec![x.clone(), y.clone(), y.clone() + y.clone(), x + y],
        };
        let total = raw.iter().cloned().fold(Quadratic::from_integer(0), |a, b| a + b);
        raw.into_iter().map(|m| m / total.clone()).collect()
    })
}

#[test]
fn worked_quadratic_triple() {
    let a = discrete(vec![q("1/4*sqrt(2)"), q("1/4*sqrt(2)"), q("1-1/2*sqrt(2)")]);
    let ext = extend_partial_automorphisms(&a).unwrap();
    assert_eq!(ext.uniform, None);
    let fine = &ext.refinement.fine;
    assert!(good_check(&a, fine).unwrap().good);
    let rep = verify_extension_malg(&a, fine).unwrap();
    assert!(rep.is_ok());
    // the two equal atoms can be swapped with the third fixed
    let swap = PartialAut {
        dom: vec![vec![0], vec![1], vec![2]],
        rng: vec![vec![1], vec![0], vec![2]],
    };
    assert!(extend_partial(&a, fine, &ext.refinement.atom_parent, &swap).unwrap().is_some());
}

#[test]
fn bad_refinement_reports_failure() {
    let a = discrete(vec![q("1/2"), q("1/2")]);
    let b = Algebra::discrete(
        CellSpace::new(
            vec!["a0.0".into(), "a0.1".into(), "a1.0".into(), "a1.1".into()],
            vec![q("1/4"), q("1/4"), q("1/3"), q("1/6")],
        )
        .unwrap(),
    );
    let rep = verify_extension_malg(&a, &b).unwrap();
    let f = rep.failure.expect("swap cannot extend");
    assert_ne!(f.dom_profile, f.rng_profile);
}

#[test]
fn thirds_split_in_halves_are_good() {
    let a = discrete(vec![q("1/3"); 3]);
    let names = ["a0.0", "a0.1", "a1.0", "a1.1", "a2.0", "a2.1"];
    let b = Algebra::discrete(CellSpace::new(names.iter().map(|s| s.to_string()).collect(), vec![q("1/6"); 6]).unwrap());
    assert!(good_check(&a, &b).unwrap().good);
}

#[test]
fn step_example_from_profile() {
    // one atom of measure a against atoms a/3, 2a/3
    let a = discrete(vec![q("1/2"), q("1/6"), q("1/3")]);
    let r = independence_step(&a, &[0], &[1, 2]).unwrap();
    let pieces = |p: usize| {
        let mut v: Vec<Quadratic> = (0..r.fine.n_atoms()).filter(|&i| r.atom_parent[i] == p).map(|i| r.fine.atom_measure(i)).collect();
        v.sort();
        v
    };
    assert_eq!(pieces(0), vec![q("1/6"), q("1/3")]);
    let mut side_b = pieces(1);
    side_b.extend(pieces(2));
    side_b.sort();
    assert_eq!(side_b, vec![q("1/6"), q("1/3")]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quadratic_extensions_verify(ms in patterned()) {
        let a = discrete(ms);
        let ext = extend_partial_automorphisms(&a).unwrap();
        let fine = &ext.refinement.fine;
        prop_assert!(good_check(&a, fine).unwrap().good);
        let rep = verify_extension_malg(&a, fine).unwrap();
        prop_assert!(rep.is_ok(), "{:?}", rep.failure);
        // measure is conserved atom by atom
        for (i, m) in a.atom_measures().iter().enumerate() {
            let sum = (0..fine.n_atoms())
                .filter(|&j| ext.refinement.atom_parent[j] == i)
                .fold(Quadratic::from_integer(0), |s, j| s + fine.atom_measure(j));
            prop_assert_eq!(&sum, m);
        }
    }

    #[test]
    fn automorphism_matrices_are_additive(
        seeds in prop::collection::vec(quad(), 2..5),
        reps in prop::collection::vec(1usize..4, 4),
        perm_seed in any::<u64>(),
        k in 1usize..4,
        owner_seed in any::<u64>(),
    ) {
        // cells come in groups of equal measure so nontrivial permutations exist
        let mut raw = Vec::new();
        for (i, s) in seeds.iter().enumerate() {
            for _ in 0..reps[i % reps.len()] {
                raw.push(s.clone());
            }
        }
        let total = raw.iter().cloned().fold(Quadratic::from_integer(0), |a, b| a + b);
        let ms: Vec<Quadratic> = raw.into_iter().map(|m| m / total.clone()).collect();
        let n = ms.len();
        let cells = CellSpace::new((0..n).map(|i| format!("c{i}")).collect(), ms.clone()).unwrap();
        let k = k.min(n);
        let mut atoms = vec![Vec::new(); k];
        let mut h = owner_seed;
        for c in 0..n {
            let a = if c < k { c } else { (h % k as u64) as usize };
            h = h.rotate_left(7) ^ 0x9e37_79b9_7f4a_7c15;
            atoms[a].push(c);
        }
        let p = Algebra::new(cells, atoms).unwrap();
        // shuffle within each equal-measure class
        let mut g: Vec<usize> = (0..n).collect();
        let mut h = perm_seed;
        for i in (1..n).rev() {
            let j = (h % (i as u64 + 1)) as usize;
            h = h.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            if ms[g[i]] == ms[g[j]] {
                g.swap(i, j);
            }
        }
        let e = matrix_of_automorphism(&p, &g).unwrap();
        prop_assert!(p_additive(&e, &p.atom_measures()));
    }

    #[test]
    fn realized_matrices_match(
        k in 2usize..5,
        flows in prop::collection::vec(0i64..4, 16),
        cycle in 0i64..3,
    ) {
        // atoms of measure 1/k, each with a C-cell of measure 1/(4k)
        let mut names = Vec::new();
        let mut ms = Vec::new();
        let mut atoms = Vec::new();
        let mut c = Vec::new();
        for i in 0..k {
            names.push(format!("a{i}"));
            names.push(format!("c{i}"));
            ms.push(Quadratic::from_ratio(3, 4 * k as i64));
            ms.push(Quadratic::from_ratio(1, 4 * k as i64));
            atoms.push(vec![2 * i, 2 * i + 1]);
            c.push(vec![2 * i + 1]);
        }
        let p = Algebra::new(CellSpace::new(names, ms).unwrap(), atoms).unwrap();
        // balanced transfers: symmetric part plus a cycle, all well inside C
        let unit = Quadratic::from_ratio(1, 64 * (k * k) as i64);
        let mut eps = vec![vec![Quadratic::from_integer(0); k]; k];
        for i in 0..k {
            for j in (i + 1)..k {
                let v = unit.clone() * Quadratic::from_integer(flows[i * 4 + j]);
                eps[i][j] = v.clone();
                eps[j][i] = v;
            }
        }
        for i in 0..k {
            let j = (i + 1) % k;
            eps[i][j] = eps[i][j].clone() + unit.clone() * Quadratic::from_integer(cycle);
        }
        let mu = p.atom_measures();
        let e: Matrix<Quadratic> = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| {
                        if i == j {
                            (0..k).filter(|&l| l != i).fold(Quadratic::from_integer(0), |s, l| s + eps[i][l].clone() + eps[i][l].clone())
                        } else {
                            mu[i].clone() + mu[j].clone() - eps[i][j].clone() - eps[i][j].clone()
                        }
                    })
                    .collect()
            })
            .collect();
        prop_assert!(p_additive(&e, &mu));
        let r = realize_matrix(&p, &c, &e).unwrap();
        check_realization(&r, &e).unwrap();
        prop_assert_eq!(r.eps, eps);
    }
}
