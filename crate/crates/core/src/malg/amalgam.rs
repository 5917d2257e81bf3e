use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::exact::ExactField;

use super::algebra::{Algebra, Carver, CellSpace};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MalgAmalgam<T> {
    pub cells: CellSpace<T>,
    pub cell_parent: Vec<usize>,
    /// Atoms of `A`, `B`, `C` and the independent copy `C'`, over the new cells.
    pub a: Vec<Vec<usize>>,
    pub b: Vec<Vec<usize>>,
    pub c: Vec<Vec<usize>>,
    pub c_prime: Vec<Vec<usize>>,
    /// A-atom containing each B-atom, and each C-atom (also each C'-atom).
    pub b_parent: Vec<usize>,
    pub c_parent: Vec<usize>,
}

/// A-atom containing each atom of `sub`, or an error when `sub` does not
/// refine `a`.
fn parents_in<T: ExactField>(a: &Algebra<T>, sub: &Algebra<T>, what: &str) -> Result<Vec<usize>> {
    let owner = a.atom_of_cell();
    sub.atoms()
        .iter()
        .enumerate()
        .map(|(i, atom)| {
            let p = owner[atom[0]];
            if atom.iter().all(|&x| owner[x] == p) {
                Ok(p)
            } else {
                Err(Error::Precondition(format!("atom {i} of {what} straddles atoms of A")))
            }
        })
        .collect()
}

/// Replaces the trace of `C` on each atom of `A` by a copy independent of
/// `B`: every `B`-atom `b ⊆ a` is cut into pieces `μ(b)μ(c)/μ(a)`, one per
/// `C`-atom `c ⊆ a`, and `c'` collects the pieces labelled `c`.
pub fn independent_amalgam<T: ExactField>(a: &Algebra<T>, b: &Algebra<T>, c: &Algebra<T>) -> Result<MalgAmalgam<T>> {
    if a.cells() != b.cells() || a.cells() != c.cells() {
        return Err(Error::Malformed("the three algebras live on different cell spaces".into()));
    }
    let b_parent = parents_in(a, b, "B")?;
    let c_parent = parents_in(a, c, "C")?;
    let am = a.atom_measures();
    let cm = c.atom_measures();
    let mut used = HashSet::new();
    let mut carver = Carver::new(a.cells(), &mut used);
    // handles[b][c] = piece of b labelled c
    let mut handles: Vec<Vec<Vec<(usize, usize)>>> = Vec::with_capacity(b.n_atoms());
    for (bi, batom) in b.atoms().iter().enumerate() {
        let p = b_parent[bi];
        let mb = b.atom_measure(bi);
        let cs: Vec<usize> = (0..c.n_atoms()).filter(|&ci| c_parent[ci] == p).collect();
        let targets: Vec<T> = cs.iter().map(|&ci| mb.clone() * cm[ci].clone() / am[p].clone()).collect();
        let carved = if cs.len() == 1 {
            vec![batom.iter().map(|&x| carver.keep(x)).collect()]
        } else {
            carver.carve(batom, &targets)?
        };
        let mut row = vec![Vec::new(); c.n_atoms()];
        for (&ci, piece) in cs.iter().zip(carved) {
            row[ci] = piece;
        }
        handles.push(row);
    }
    let (cells, cell_parent, index) = carver.finish()?;
    let lift = |atoms: &[Vec<usize>]| -> Vec<Vec<usize>> {
        atoms
            .iter()
            .map(|atom| {
                let set: HashSet<usize> = atom.iter().copied().collect();
                (0..cells.len()).filter(|x| set.contains(&cell_parent[*x])).collect()
            })
            .collect()
    };
    let c_prime = (0..c.n_atoms())
        .map(|ci| {
            let mut v: Vec<usize> = handles.iter().flat_map(|row| row[ci].iter().map(|h| index[h])).collect();
            v.sort_unstable();
            v
        })
        .collect();
    let out = MalgAmalgam {
        a: lift(a.atoms()),
        b: lift(b.atoms()),
        c: lift(c.atoms()),
        c_prime,
        b_parent,
        c_parent,
        cells,
        cell_parent,
    };
    check_product(&out)?;
    Ok(out)
}

/// `μ(b ∩ c')·μ(a) = μ(b)·μ(c')` inside each A-atom, and `μ(c') = μ(c)`.
pub fn check_product<T: ExactField>(am: &MalgAmalgam<T>) -> Result<()> {
    let cs = &am.cells;
    for (ci, cp) in am.c_prime.iter().enumerate() {
        if cs.measure_of(cp) != cs.measure_of(&am.c[ci]) {
            return Err(Error::Internal(format!("C'-atom {ci} changed measure")));
        }
        let a = &am.a[am.c_parent[ci]];
        if cp.iter().any(|x| !a.contains(x)) {
            return Err(Error::Internal(format!("C'-atom {ci} leaves its A-atom")));
        }
        for (bi, b) in am.b.iter().enumerate() {
            let meet: Vec<usize> = b.iter().copied().filter(|x| cp.contains(x)).collect();
            let lhs = cs.measure_of(&meet) * cs.measure_of(a);
            let rhs = if am.b_parent[bi] == am.c_parent[ci] {
                cs.measure_of(b) * cs.measure_of(cp)
            } else {
                T::zero()
            };
            if lhs != rhs {
                return Err(Error::Internal(format!("B-atom {bi} and C'-atom {ci} are not independent")));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MalgIndependence {
    pub independent: bool,
    /// Atom permutations of `B` and `C'` agreeing on `A` whose union fails.
    pub witness: Option<(Vec<usize>, Vec<usize>)>,
    pub pairs_checked: usize,
}

/// Limit on automorphisms enumerated per side.
pub const MAX_AUTOMORPHISMS: usize = 20_000;

/// Measure-preserving permutations of `measures` mapping each atom into
/// the image of its parent under `sigma`.
fn lifts<T: ExactField>(measures: &[T], parent: &[usize], sigma: &[usize]) -> Result<Vec<Vec<usize>>> {
    let n = measures.len();
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    let mut used = vec![false; n];
    #[allow(clippy::too_many_arguments)]
    fn rec<T: ExactField>(
        measures: &[T],
        parent: &[usize],
        sigma: &[usize],
        cur: &mut Vec<usize>,
        used: &mut [bool],
        out: &mut Vec<Vec<usize>>,
    ) -> Result<()> {
        let i = cur.len();
        if i == measures.len() {
            if out.len() >= MAX_AUTOMORPHISMS {
                return Err(Error::Unsupported(format!("more than {MAX_AUTOMORPHISMS} automorphisms")));
            }
            out.push(cur.clone());
            return Ok(());
        }
        for j in 0..measures.len() {
            if !used[j] && parent[j] == sigma[parent[i]] && measures[j] == measures[i] {
                used[j] = true;
                cur.push(j);
                rec(measures, parent, sigma, cur, used, out)?;
                cur.pop();
                used[j] = false;
            }
        }
        Ok(())
    }
    rec(measures, parent, sigma, &mut cur, &mut used, &mut out)?;
    Ok(out)
}

fn permutations_preserving<T: Ord>(xs: &[T]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    let mut used = vec![false; xs.len()];
    fn rec<T: Ord>(xs: &[T], cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        let i = cur.len();
        if i == xs.len() {
            out.push(cur.clone());
            return;
        }
        for j in 0..xs.len() {
            if !used[j] && xs[j] == xs[i] {
                used[j] = true;
                cur.push(j);
                rec(xs, cur, used, out);
                cur.pop();
                used[j] = false;
            }
        }
    }
    rec(xs, &mut cur, &mut used, &mut out);
    out
}

/// Whether every pair of automorphisms of `B` and `C'` inducing the same
/// automorphism of `A` glues to an automorphism of the algebra they generate,
/// i.e. preserves the measures of all intersections `b ∩ c'`.
pub fn check_malg_independence<T: ExactField>(am: &MalgAmalgam<T>) -> Result<MalgIndependence> {
    let cs = &am.cells;
    let a_m: Vec<T> = am.a.iter().map(|x| cs.measure_of(x)).collect();
    let b_m: Vec<T> = am.b.iter().map(|x| cs.measure_of(x)).collect();
    let c_m: Vec<T> = am.c_prime.iter().map(|x| cs.measure_of(x)).collect();
    let meet: Vec<Vec<T>> = am
        .b
        .iter()
        .map(|b| {
            am.c_prime
                .iter()
                .map(|c| cs.measure_of(&b.iter().copied().filter(|x| c.contains(x)).collect::<Vec<_>>()))
                .collect()
        })
        .collect();
    let mut pairs_checked = 0;
    for sigma in permutations_preserving(&a_m) {
        let fs = lifts(&b_m, &am.b_parent, &sigma)?;
        let gs = lifts(&c_m, &am.c_parent, &sigma)?;
        for f in &fs {
            for g in &gs {
                pairs_checked += 1;
                let ok = (0..b_m.len()).all(|i| (0..c_m.len()).all(|j| meet[i][j] == meet[f[i]][g[j]]));
                if !ok {
                    return Ok(MalgIndependence {
                        independent: false,
                        witness: Some((f.clone(), g.clone())),
                        pairs_checked,
                    });
                }
            }
        }
    }
    Ok(MalgIndependence {
        independent: true,
        witness: None,
        pairs_checked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::Quadratic;

    fn q(s: &str) -> Quadratic {
        Quadratic::parse_scalar(s).unwrap()
    }

    fn quarters() -> CellSpace<Quadratic> {
        CellSpace::new((0..4).map(|i| format!("q{i}")).collect(), vec![q("1/4"); 4]).unwrap()
    }

    #[test]
    fn halves_become_independent() {
        let cs = quarters();
        let a = Algebra::new(cs.clone(), vec![vec![0, 1, 2, 3]]).unwrap();
        let b = Algebra::new(cs.clone(), vec![vec![0, 1], vec![2, 3]]).unwrap();
        // C equal to B: maximally dependent before the amalgam
        let am = independent_amalgam(&a, &b, &b).unwrap();
        for bi in &am.b {
            for cp in &am.c_prime {
                let meet: Vec<usize> = bi.iter().copied().filter(|x| cp.contains(x)).collect();
                assert_eq!(am.cells.measure_of(&meet), q("1/4"));
            }
        }
        let rep = check_malg_independence(&am).unwrap();
        assert!(rep.independent);
        assert_eq!(rep.pairs_checked, 4);
    }

    #[test]
    fn c_inside_a_is_unchanged() {
        let cs = quarters();
        let a = Algebra::new(cs.clone(), vec![vec![0, 1], vec![2, 3]]).unwrap();
        let b = Algebra::discrete(cs.clone());
        let am = independent_amalgam(&a, &b, &a).unwrap();
        assert_eq!(am.c_prime, am.c);
        let am = independent_amalgam(&a, &a, &b).unwrap();
        let measures = |v: &Vec<Vec<usize>>| v.iter().map(|x| am.cells.measure_of(x)).collect::<Vec<_>>();
        assert_eq!(measures(&am.c_prime), measures(&am.c));
    }

    #[test]
    fn dependent_pair_is_caught() {
        let cs = quarters();
        let a = Algebra::new(cs.clone(), vec![vec![0, 1, 2, 3]]).unwrap();
        let b = Algebra::new(cs.clone(), vec![vec![0, 1], vec![2, 3]]).unwrap();
        let am = MalgAmalgam {
            cells: cs,
            cell_parent: vec![0, 1, 2, 3],
            a: a.atoms().to_vec(),
            b: b.atoms().to_vec(),
            c: b.atoms().to_vec(),
            c_prime: b.atoms().to_vec(),
            b_parent: vec![0, 0],
            c_parent: vec![0, 0],
        };
        assert!(check_product(&am).is_err());
        let rep = check_malg_independence(&am).unwrap();
        assert!(!rep.independent);
    }
}
