//! Distance matrices of partitions under automorphisms, and realizing a
//! prescribed matrix by moving small pieces between atoms.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::exact::ExactField;

use super::algebra::{Algebra, Carver, CellSpace};

pub type Matrix<T> = Vec<Vec<T>>;

fn sym_diff<T: ExactField>(cells: &CellSpace<T>, x: &[usize], y: &[usize]) -> T {
    let xs: HashSet<usize> = x.iter().copied().collect();
    let ys: HashSet<usize> = y.iter().copied().collect();
    cells.measure_of(&xs.symmetric_difference(&ys).copied().collect::<Vec<_>>())
}

/// `e_ij = μ(A_i Δ g(A_j))` for a measure-preserving permutation `g` of
/// the cells of `p`.
pub fn matrix_of_automorphism<T: ExactField>(p: &Algebra<T>, g: &[usize]) -> Result<Matrix<T>> {
    let cells = p.cells();
    let n = cells.len();
    if g.len() != n {
        return Err(Error::Malformed(format!("permutation has {} entries for {n} cells", g.len())));
    }
    let mut hit = vec![false; n];
    for &c in g {
        if c >= n || std::mem::replace(&mut hit[c], true) {
            return Err(Error::Malformed("not a permutation of the cells".into()));
        }
    }
    if let Some(c) = (0..n).find(|&c| cells.measure(c) != cells.measure(g[c])) {
        return Err(Error::Precondition(format!(
            "cell {:?} of measure {} is sent to {:?} of measure {}",
            cells.name(c),
            cells.measure(c),
            cells.name(g[c]),
            cells.measure(g[c])
        )));
    }
    let images: Vec<Vec<usize>> = p.atoms().iter().map(|a| a.iter().map(|&c| g[c]).collect()).collect();
    Ok(p.atoms()
        .iter()
        .map(|ai| images.iter().map(|gj| sym_diff(cells, ai, gj)).collect())
        .collect())
}

/// Range constraints plus the two row/column identities.
pub fn p_additive<T: ExactField>(e: &Matrix<T>, measures: &[T]) -> bool {
    let k = measures.len();
    if e.len() != k || e.iter().any(|row| row.len() != k) {
        return false;
    }
    let zero = T::zero();
    for i in 0..k {
        for j in 0..k {
            if e[i][j] < zero || e[i][j] > measures[i].clone() + measures[j].clone() {
                return false;
            }
        }
    }
    (0..k).all(|i| {
        let rows = (0..k)
            .filter(|&j| j != i)
            .fold(T::zero(), |s, j| s + measures[i].clone() + measures[j].clone() - e[i][j].clone());
        let cols = (0..k)
            .filter(|&j| j != i)
            .fold(T::zero(), |s, j| s + measures[i].clone() + measures[j].clone() - e[j][i].clone());
        e[i][i] == rows && e[i][i] == cols
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Realization<T> {
    pub cells: CellSpace<T>,
    /// Input cell containing each new cell.
    pub cell_parent: Vec<usize>,
    /// `A_i`, `C_i` and `B_i` as sets of new cells.
    pub a: Vec<Vec<usize>>,
    pub c: Vec<Vec<usize>>,
    pub b: Vec<Vec<usize>>,
    /// `ε_ij` for `i ≠ j`, zero on the diagonal.
    pub eps: Matrix<T>,
}

/// Finds `B_1, …, B_k` with the type of the atoms of `p`, `μ(B_i Δ A_j) =
/// e_ij`, `B_i ∩ A_j ⊆ C_j` for `i ≠ j` and `A_i ∖ B_i ⊆ C_i`, where each
/// `c[i]` is a set of cells inside atom `i`, all of one measure.
pub fn realize_matrix<T: ExactField>(p: &Algebra<T>, c: &[Vec<usize>], e: &Matrix<T>) -> Result<Realization<T>> {
    let k = p.n_atoms();
    let cells = p.cells();
    if c.len() != k {
        return Err(Error::Malformed(format!("{} subsets for {k} atoms", c.len())));
    }
    let owner = p.atom_of_cell();
    for (i, ci) in c.iter().enumerate() {
        if ci.iter().any(|&x| x >= cells.len() || owner[x] != i) {
            return Err(Error::Precondition(format!("C_{} is not inside atom {}", i + 1, i + 1)));
        }
        if ci.iter().collect::<HashSet<_>>().len() != ci.len() {
            return Err(Error::Malformed(format!("C_{} repeats a cell", i + 1)));
        }
    }
    let mc = cells.measure_of(&c[0]);
    if mc <= T::zero() {
        return Err(Error::Precondition("C_1 has measure zero".into()));
    }
    if let Some(i) = c.iter().position(|ci| cells.measure_of(ci) != mc) {
        return Err(Error::Precondition(format!("C_{} and C_1 differ in measure", i + 1)));
    }
    let measures = p.atom_measures();
    if !p_additive(e, &measures) {
        return Err(Error::Precondition("target matrix is not additive for the partition".into()));
    }
    let bound = mc.clone() + mc.clone();
    if let Some(i) = (0..k).find(|&i| e[i][i] >= bound) {
        return Err(Error::Precondition(format!("e_{0}{0} = {1} is not below 2μ(C) = {bound}", i + 1, e[i][i])));
    }
    let mut eps = vec![vec![T::zero(); k]; k];
    for i in 0..k {
        for j in 0..k {
            if i != j {
                eps[i][j] = (measures[i].clone() + measures[j].clone() - e[i][j].clone()).half();
            }
        }
    }
    let mut used = HashSet::new();
    let mut carver = Carver::new(cells, &mut used);
    // pieces[j][i] = D_ji, carved inside C_i
    let mut pieces: Vec<Vec<Vec<(usize, usize)>>> = vec![vec![Vec::new(); k]; k];
    let mut rest_of_c: Vec<Vec<(usize, usize)>> = vec![Vec::new(); k];
    for i in 0..k {
        let others: Vec<usize> = (0..k).filter(|&j| j != i).collect();
        let moved = others.iter().fold(T::zero(), |s, &j| s + eps[j][i].clone());
        if moved > mc {
            return Err(Error::Precondition(format!(
                "saturation bound: pieces leaving atom {} need {moved} but C_{} has {mc}",
                i + 1,
                i + 1
            )));
        }
        let mut targets: Vec<T> = others.iter().map(|&j| eps[j][i].clone()).collect();
        targets.push(mc.clone() - moved);
        let mut carved = carver.carve(&c[i], &targets)?;
        rest_of_c[i] = carved.pop().unwrap();
        for (&j, piece) in others.iter().zip(carved) {
            pieces[j][i] = piece;
        }
    }
    let mut outside: Vec<Vec<(usize, usize)>> = vec![Vec::new(); k];
    for (i, atom) in p.atoms().iter().enumerate() {
        for &x in atom {
            if !c[i].contains(&x) {
                outside[i].push(carver.keep(x));
            }
        }
    }
    let (new_cells, cell_parent, index) = carver.finish()?;
    let ix = |hs: &[(usize, usize)]| -> Vec<usize> { hs.iter().map(|h| index[h]).collect() };
    let mut a_sets = Vec::with_capacity(k);
    let mut c_sets = Vec::with_capacity(k);
    let mut b_sets = Vec::with_capacity(k);
    for i in 0..k {
        let mut ci = ix(&rest_of_c[i]);
        for j in 0..k {
            ci.extend(ix(&pieces[j][i]));
        }
        ci.sort_unstable();
        let mut ai = ix(&outside[i]);
        ai.extend(&ci);
        ai.sort_unstable();
        let mut bi = ix(&outside[i]);
        bi.extend(ix(&rest_of_c[i]));
        for j in 0..k {
            if j != i {
                bi.extend(ix(&pieces[i][j]));
            }
        }
        bi.sort_unstable();
        a_sets.push(ai);
        c_sets.push(ci);
        b_sets.push(bi);
    }
    let out = Realization {
        cells: new_cells,
        cell_parent,
        a: a_sets,
        c: c_sets,
        b: b_sets,
        eps,
    };
    check_realization(&out, e)?;
    Ok(out)
}

/// Rechecks every promised identity of a realization.
pub fn check_realization<T: ExactField>(r: &Realization<T>, e: &Matrix<T>) -> Result<()> {
    let k = r.a.len();
    let cs = &r.cells;
    let mut seen = HashSet::new();
    for (i, bi) in r.b.iter().enumerate() {
        if bi.iter().any(|x| !seen.insert(*x)) {
            return Err(Error::Internal(format!("B_{} overlaps an earlier B", i + 1)));
        }
        if cs.measure_of(bi) != cs.measure_of(&r.a[i]) {
            return Err(Error::Internal(format!("μ(B_{0}) differs from μ(A_{0})", i + 1)));
        }
        for j in 0..k {
            let got = sym_diff(cs, bi, &r.a[j]);
            if got != e[i][j] {
                return Err(Error::Internal(format!(
                    "μ(B_{} Δ A_{}) = {got}, target {}",
                    i + 1,
                    j + 1,
                    e[i][j]
                )));
            }
            if j != i && bi.iter().any(|x| r.a[j].contains(x) && !r.c[j].contains(x)) {
                return Err(Error::Internal(format!("B_{} ∩ A_{} leaves C_{}", i + 1, j + 1, j + 1)));
            }
        }
        if r.a[i].iter().any(|x| !bi.contains(x) && !r.c[i].contains(x)) {
            return Err(Error::Internal(format!("A_{0} ∖ B_{0} leaves C_{0}", i + 1)));
        }
    }
    if seen.len() != cs.len() {
        return Err(Error::Internal("the B_i do not cover the space".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::Quadratic;

    fn q(s: &str) -> Quadratic {
        Quadratic::parse_scalar(s).unwrap()
    }

    fn m(rows: &[&[&str]]) -> Matrix<Quadratic> {
        rows.iter().map(|r| r.iter().map(|s| q(s)).collect()).collect()
    }

    fn halves_in_eighths() -> Algebra<Quadratic> {
        let cs = CellSpace::new((0..8).map(|i| format!("c{i}")).collect(), vec![q("1/8"); 8]).unwrap();
        Algebra::new(cs, vec![vec![0, 1, 2, 3], vec![4, 5, 6, 7]]).unwrap()
    }

    #[test]
    fn matrices_of_simple_maps() {
        let p = halves_in_eighths();
        let id: Vec<usize> = (0..8).collect();
        assert_eq!(matrix_of_automorphism(&p, &id).unwrap(), m(&[&["0", "1"], &["1", "0"]]));
        let swap: Vec<usize> = (0..8).map(|i| (i + 4) % 8).collect();
        assert_eq!(matrix_of_automorphism(&p, &swap).unwrap(), m(&[&["1", "0"], &["0", "1"]]));
        let mut one = id.clone();
        one.swap(0, 4);
        let e = matrix_of_automorphism(&p, &one).unwrap();
        assert_eq!(e, m(&[&["1/4", "3/4"], &["3/4", "1/4"]]));
        let mu = p.atom_measures();
        assert!(p_additive(&e, &mu));
        let mut bad = e.clone();
        bad[0][1] = bad[0][1].clone() + q("1/100");
        assert!(!p_additive(&bad, &mu));
    }

    #[test]
    fn non_preserving_map_is_rejected() {
        let cs = CellSpace::new(vec!["a".into(), "b".into()], vec![q("1/3"), q("2/3")]).unwrap();
        let p = Algebra::discrete(cs);
        assert!(matches!(matrix_of_automorphism(&p, &[1, 0]), Err(Error::Precondition(_))));
        assert!(matches!(matrix_of_automorphism(&p, &[0, 0]), Err(Error::Malformed(_))));
    }

    fn halves_with_c() -> (Algebra<Quadratic>, Vec<Vec<usize>>) {
        let cs = CellSpace::new(
            vec!["a".into(), "ac".into(), "b".into(), "bc".into()],
            vec![q("3/8"), q("1/8"), q("3/8"), q("1/8")],
        )
        .unwrap();
        (Algebra::new(cs, vec![vec![0, 1], vec![2, 3]]).unwrap(), vec![vec![1], vec![3]])
    }

    #[test]
    fn sixteenth_transfer() {
        let (p, c) = halves_with_c();
        let e = m(&[&["1/8", "7/8"], &["7/8", "1/8"]]);
        let r = realize_matrix(&p, &c, &e).unwrap();
        assert_eq!(r.eps[0][1], q("1/16"));
        assert_eq!(r.eps[1][0], q("1/16"));
        assert_eq!(r.cells.measure_of(&r.b[0]), q("1/2"));
        assert_eq!(sym_diff(&r.cells, &r.b[0], &r.a[0]), q("1/8"));
        // B_1 holds exactly 1/16 of A_2, inside C_2
        let inside: Vec<usize> = r.b[0].iter().copied().filter(|x| r.a[1].contains(x)).collect();
        assert_eq!(r.cells.measure_of(&inside), q("1/16"));
    }

    #[test]
    fn identity_target_moves_nothing() {
        let (p, c) = halves_with_c();
        let r = realize_matrix(&p, &c, &m(&[&["0", "1"], &["1", "0"]])).unwrap();
        assert_eq!(r.b, r.a);
    }

    #[test]
    fn diagonal_at_bound_is_rejected() {
        let (p, c) = halves_with_c();
        let e = m(&[&["1/4", "3/4"], &["3/4", "1/4"]]);
        assert!(matches!(realize_matrix(&p, &c, &e), Err(Error::Precondition(_))));
    }
}
