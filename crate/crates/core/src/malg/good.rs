//! Good extensions: refinements under which equal-measure elements of the
//! coarse algebra are cut into the same multiset of piece measures, so that
//! every partial automorphism of the coarse algebra extends.

use std::collections::{BTreeSet, HashSet};

use num_integer::Integer;
use num_traits::One;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::ExactField;

use super::algebra::{refinement_parents, Algebra, Carver, Refinement};

/// Sorted measures of the fine atoms inside the coarse atoms of `mask`.
fn profile_of<T: ExactField>(fine: &Algebra<T>, parents: &[usize], mask: u64) -> Vec<T> {
    let mut v: Vec<T> = parents
        .iter()
        .enumerate()
        .filter(|(_, &p)| mask >> p & 1 == 1)
        .map(|(i, _)| fine.atom_measure(i))
        .collect();
    v.sort();
    v
}

fn mask_of(atoms: &[usize]) -> u64 {
    atoms.iter().fold(0, |m, &a| m | 1 << a)
}

fn mask_measure<T: ExactField>(measures: &[T], mask: u64) -> T {
    (0..measures.len())
        .filter(|&i| mask >> i & 1 == 1)
        .fold(T::zero(), |a, i| a + measures[i].clone())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoodReport<T> {
    pub good: bool,
    /// Two equal-measure coarse atoms with their differing piece profiles.
    pub witness: Option<(usize, usize, Vec<T>, Vec<T>)>,
}

/// Whether equal-measure atoms of `coarse` are identically partitioned.
pub fn good_check_with<T: ExactField>(coarse: &Algebra<T>, fine: &Algebra<T>, parents: &[usize]) -> GoodReport<T> {
    let k = coarse.n_atoms();
    let measures = coarse.atom_measures();
    let profiles: Vec<Vec<T>> = (0..k).map(|i| profile_of(fine, parents, 1 << i)).collect();
    for i in 0..k {
        for j in (i + 1)..k {
            if measures[i] == measures[j] && profiles[i] != profiles[j] {
                return GoodReport {
                    good: false,
                    witness: Some((i, j, profiles[i].clone(), profiles[j].clone())),
                };
            }
        }
    }
    GoodReport {
        good: true,
        witness: None,
    }
}

/// [`good_check_with`], recovering the refinement from cell names.
pub fn good_check<T: ExactField>(coarse: &Algebra<T>, fine: &Algebra<T>) -> Result<GoodReport<T>> {
    let parents = refinement_parents(coarse, fine)?;
    Ok(good_check_with(coarse, fine, &parents))
}

/// Splits the atoms of `alg` so that the unions `a_side` and `b_side` become
/// identically partitioned: atoms under `a_side` of measure `r` are cut into
/// `r·s/a` for each atom measure `s` under `b_side` (and symmetrically), and
/// atoms elsewhere whose measure occurs on one side are cut by the other
/// side's normalized profile.
pub fn independence_step<T: ExactField>(alg: &Algebra<T>, a_side: &[usize], b_side: &[usize]) -> Result<Refinement<T>> {
    let mut used = HashSet::new();
    independence_step_named(alg, a_side, b_side, &mut used)
}

pub(crate) fn independence_step_named<T: ExactField>(
    alg: &Algebra<T>,
    a_side: &[usize],
    b_side: &[usize],
    used: &mut HashSet<String>,
) -> Result<Refinement<T>> {
    let k = alg.n_atoms();
    if a_side.is_empty() || b_side.is_empty() {
        return Err(Error::Precondition("independence step needs two nonempty sides".into()));
    }
    if a_side.iter().chain(b_side).any(|&i| i >= k) {
        return Err(Error::Malformed("atom index out of range".into()));
    }
    if a_side.iter().any(|i| b_side.contains(i)) {
        return Err(Error::Precondition("the two sides of an independence step must be disjoint".into()));
    }
    let measures = alg.atom_measures();
    let r: Vec<T> = a_side.iter().map(|&i| measures[i].clone()).collect();
    let s: Vec<T> = b_side.iter().map(|&i| measures[i].clone()).collect();
    let a = r.iter().cloned().fold(T::zero(), |x, y| x + y);
    let b = s.iter().cloned().fold(T::zero(), |x, y| x + y);
    if a != b {
        return Err(Error::Precondition(format!("sides have measures {a} and {b}")));
    }
    let r_set: BTreeSet<&T> = r.iter().collect();
    let s_set: BTreeSet<&T> = s.iter().collect();
    if let Some(v) = r_set.intersection(&s_set).next() {
        return Err(Error::Precondition(format!("atom measure {v} occurs on both sides")));
    }
    let scaled = |m: &T, profile: &[T]| -> Vec<T> { profile.iter().map(|p| m.clone() * p.clone() / a.clone()).collect() };
    let mut carver = Carver::new(alg.cells(), used);
    let mut pieces = Vec::new();
    let mut atom_parent = Vec::new();
    for (i, atom) in alg.atoms().iter().enumerate() {
        let m = &measures[i];
        let targets = if a_side.contains(&i) || r_set.contains(m) {
            Some(scaled(m, &s))
        } else if b_side.contains(&i) || s_set.contains(m) {
            Some(scaled(m, &r))
        } else {
            None
        };
        match targets {
            Some(t) if t.len() > 1 => {
                for piece in carver.carve(atom, &t)? {
                    pieces.push(piece);
                    atom_parent.push(i);
                }
            }
            _ => {
                pieces.push(atom.iter().map(|&c| carver.keep(c)).collect());
                atom_parent.push(i);
            }
        }
    }
    let (cells, cell_parent, index) = carver.finish()?;
    let atoms = pieces
        .into_iter()
        .map(|p: Vec<(usize, usize)>| p.iter().map(|h| index[h]).collect())
        .collect();
    let fine = Algebra::new(cells, atoms)?;
    let out = Refinement {
        fine,
        cell_parent,
        atom_parent,
    };
    let report = good_check_with(alg, &out.fine, &out.atom_parent);
    if !report.good {
        return Err(Error::Internal(format!("independence step is not good: {:?}", report.witness)));
    }
    if profile_of(&out.fine, &out.atom_parent, mask_of(a_side)) != profile_of(&out.fine, &out.atom_parent, mask_of(b_side)) {
        return Err(Error::Internal("independence step left the sides differently partitioned".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepRecord {
    /// Coarse atoms forming the two equal-measure elements.
    pub a_elem: Vec<usize>,
    pub b_elem: Vec<usize>,
    /// Atom pairs of equal measure set aside before the step.
    pub shrunk_pairs: usize,
    /// True when the elements were already identically partitioned.
    pub skipped: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MalgExtension<T> {
    pub refinement: Refinement<T>,
    /// `Some(N)` when the uniform `1/N` refinement was used.
    pub uniform: Option<u64>,
    pub steps: Vec<StepRecord>,
}

/// Coarse atom counts above this are refused by the pairwise induction.
pub const MAX_INDUCTION_ATOMS: usize = 12;

fn lcm_of_denominators<T: ExactField>(measures: &[T]) -> Option<u64> {
    let mut n = num_bigint::BigInt::one();
    for m in measures {
        n = n.lcm(m.to_rational()?.denom());
    }
    num_traits::ToPrimitive::to_u64(&n)
}

/// Pairs `(X, Y)` of disjoint nonempty unions of atoms with equal measure,
/// with `X < Y` as bit masks.
fn equal_measure_pairs<T: ExactField>(measures: &[T]) -> Vec<(u64, u64)> {
    let k = measures.len();
    let full = (1u64 << k) - 1;
    let mass: Vec<T> = (0..=full).map(|m| mask_measure(measures, m)).collect();
    let mut out = Vec::new();
    for x in 1..=full {
        let rest = full & !x;
        // submasks of the complement
        let mut y = rest;
        let mut ys = Vec::new();
        while y > 0 {
            if y > x && mass[x as usize] == mass[y as usize] {
                ys.push(y);
            }
            y = (y - 1) & rest;
        }
        ys.sort_unstable();
        out.extend(ys.into_iter().map(|y| (x, y)));
    }
    out
}

fn bits(mask: u64) -> Vec<usize> {
    (0..64).filter(|&i| mask >> i & 1 == 1).collect()
}

/// A refinement `B` of `a` such that every partial automorphism of `a`
/// extends to an automorphism of `B`.
pub fn extend_partial_automorphisms<T: ExactField>(a: &Algebra<T>) -> Result<MalgExtension<T>> {
    let measures = a.atom_measures();
    let mut used: HashSet<String> = a.cells().names().iter().cloned().collect();
    if let Some(n) = lcm_of_denominators(&measures) {
        let unit = T::from_ratio(1, n as i64);
        let mut carver = Carver::new(a.cells(), &mut used);
        let mut pieces = Vec::new();
        let mut atom_parent = Vec::new();
        for (i, atom) in a.atoms().iter().enumerate() {
            let count = (measures[i].to_rational().unwrap() * num_rational::BigRational::from_integer(n.into()))
                .to_integer();
            let count = num_traits::ToPrimitive::to_usize(&count).ok_or_else(|| Error::Unsupported("too many cells".into()))?;
            let targets = vec![unit.clone(); count];
            let carved = if count == 1 {
                vec![atom.iter().map(|&c| carver.keep(c)).collect()]
            } else {
                carver.carve(atom, &targets)?
            };
            for p in carved {
                pieces.push(p);
                atom_parent.push(i);
            }
        }
        let (cells, cell_parent, index) = carver.finish()?;
        let atoms = pieces
            .into_iter()
            .map(|p: Vec<(usize, usize)>| p.iter().map(|h| index[h]).collect())
            .collect();
        let refinement = Refinement {
            fine: Algebra::new(cells, atoms)?,
            cell_parent,
            atom_parent,
        };
        return Ok(MalgExtension {
            refinement,
            uniform: Some(n),
            steps: Vec::new(),
        });
    }
    if a.n_atoms() > MAX_INDUCTION_ATOMS {
        return Err(Error::Unsupported(format!(
            "{} atoms with incommensurable measures exceed the limit of {MAX_INDUCTION_ATOMS}",
            a.n_atoms()
        )));
    }
    let mut current = Refinement::identity(a);
    let mut steps = Vec::new();
    for (x, y) in equal_measure_pairs(&measures) {
        let parents = &current.atom_parent;
        let fine = &current.fine;
        let side = |mask: u64| -> Vec<usize> { (0..fine.n_atoms()).filter(|&i| mask >> parents[i] & 1 == 1).collect() };
        let (mut xs, mut ys) = (side(x), side(y));
        // set aside equal-measure atom pairs; what remains has no common measure
        let before = xs.len();
        let mut k = 0;
        while k < xs.len() {
            let m = fine.atom_measure(xs[k]);
            if let Some(pos) = ys.iter().position(|&j| fine.atom_measure(j) == m) {
                ys.remove(pos);
                xs.remove(k);
            } else {
                k += 1;
            }
        }
        let shrunk_pairs = before - xs.len();
        let record = StepRecord {
            a_elem: bits(x),
            b_elem: bits(y),
            shrunk_pairs,
            skipped: xs.is_empty(),
        };
        if xs.is_empty() != ys.is_empty() {
            return Err(Error::Internal("equal-measure sides lost balance".into()));
        }
        if !xs.is_empty() {
            let next = independence_step_named(&current.fine, &xs, &ys, &mut used)?;
            current = current.then(next);
        }
        steps.push(record);
    }
    let ext = MalgExtension {
        refinement: current,
        uniform: None,
        steps,
    };
    let fine = &ext.refinement.fine;
    let parents = &ext.refinement.atom_parent;
    for (x, y) in equal_measure_pairs(&measures) {
        if profile_of(fine, parents, x) != profile_of(fine, parents, y) {
            return Err(Error::Internal(format!(
                "elements {:?} and {:?} are not identically partitioned",
                bits(x),
                bits(y)
            )));
        }
    }
    Ok(ext)
}

/// All set partitions of `0..k`, as block labels in restricted-growth form.
fn set_partitions(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(k: usize, cur: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for b in 0..=max {
            cur.push(b);
            rec(k, cur, if b == max { max + 1 } else { max }, out);
            cur.pop();
        }
    }
    rec(k, &mut cur, 0, &mut out);
    out
}

fn blocks(labels: &[usize]) -> Vec<u64> {
    let n = labels.iter().max().map_or(0, |m| m + 1);
    let mut out = vec![0u64; n];
    for (a, &b) in labels.iter().enumerate() {
        out[b] |= 1 << a;
    }
    out
}

/// A partial automorphism of a finite algebra: atoms of the domain and
/// range subalgebras (as coarse-atom masks) with `dom[i] ↦ rng[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialAut {
    pub dom: Vec<Vec<usize>>,
    pub rng: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MalgFailure<T> {
    pub partial: PartialAut,
    /// Index of the domain atom whose pieces cannot be matched.
    pub block: usize,
    pub dom_profile: Vec<T>,
    pub rng_profile: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MalgReport<T> {
    pub partial_automorphisms: usize,
    pub failure: Option<MalgFailure<T>>,
}

impl<T> MalgReport<T> {
    pub fn is_ok(&self) -> bool {
        self.failure.is_none()
    }
}

/// Coarse atom counts above this are refused by the exhaustive check.
pub const MAX_VERIFY_ATOMS: usize = 7;

/// Measure-preserving bijections between block lists.
fn block_bijections<T: ExactField>(from: &[T], to: &[T]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    let mut used = vec![false; to.len()];
    fn rec<T: ExactField>(from: &[T], to: &[T], cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        let i = cur.len();
        if i == from.len() {
            out.push(cur.clone());
            return;
        }
        for j in 0..to.len() {
            if !used[j] && from[i] == to[j] {
                used[j] = true;
                cur.push(j);
                rec(from, to, cur, used, out);
                cur.pop();
                used[j] = false;
            }
        }
    }
    rec(from, to, &mut cur, &mut used, &mut out);
    out
}

/// Extends one partial automorphism to a measure-preserving permutation of
/// the fine atoms, or names the block where that is impossible.
fn extend_one<T: ExactField>(
    fine: &Algebra<T>,
    parents: &[usize],
    dom: &[u64],
    rng: &[u64],
) -> std::result::Result<Vec<usize>, usize> {
    let mut perm = vec![usize::MAX; fine.n_atoms()];
    for (b, (&x, &y)) in dom.iter().zip(rng).enumerate() {
        let inside = |mask: u64| -> Vec<usize> {
            let mut v: Vec<usize> = (0..fine.n_atoms()).filter(|&i| mask >> parents[i] & 1 == 1).collect();
            v.sort_by_key(|&i| fine.atom_measure(i));
            v
        };
        let (xs, ys) = (inside(x), inside(y));
        if xs.len() != ys.len() || xs.iter().zip(&ys).any(|(&i, &j)| fine.atom_measure(i) != fine.atom_measure(j)) {
            return Err(b);
        }
        for (i, j) in xs.into_iter().zip(ys) {
            perm[i] = j;
        }
    }
    Ok(perm)
}

/// Exhaustively checks that every partial automorphism of `coarse` extends
/// to an automorphism of `fine`.
pub fn verify_extension_malg_with<T: ExactField>(
    coarse: &Algebra<T>,
    fine: &Algebra<T>,
    parents: &[usize],
) -> Result<MalgReport<T>> {
    let k = coarse.n_atoms();
    if k > MAX_VERIFY_ATOMS {
        return Err(Error::Unsupported(format!(
            "exhaustive check over {k} atoms exceeds the limit of {MAX_VERIFY_ATOMS}"
        )));
    }
    let measures = coarse.atom_measures();
    let partitions: Vec<Vec<u64>> = set_partitions(k).iter().map(|l| blocks(l)).collect();
    let outcomes: Vec<(usize, Option<MalgFailure<T>>)> = partitions
        .par_iter()
        .map(|dom| {
            let dom_m: Vec<T> = dom.iter().map(|&b| mask_measure(&measures, b)).collect();
            let mut count = 0;
            for rng in partitions.iter().filter(|r| r.len() == dom.len()) {
                let rng_m: Vec<T> = rng.iter().map(|&b| mask_measure(&measures, b)).collect();
                for sigma in block_bijections(&dom_m, &rng_m) {
                    count += 1;
                    let image: Vec<u64> = sigma.iter().map(|&j| rng[j]).collect();
                    match extend_one(fine, parents, dom, &image) {
                        Ok(perm) => debug_assert!(perm.iter().all(|&p| p != usize::MAX)),
                        Err(block) => {
                            let failure = MalgFailure {
                                partial: PartialAut {
                                    dom: dom.iter().map(|&m| bits(m)).collect(),
                                    rng: image.iter().map(|&m| bits(m)).collect(),
                                },
                                block,
                                dom_profile: profile_of(fine, parents, dom[block]),
                                rng_profile: profile_of(fine, parents, image[block]),
                            };
                            return (count, Some(failure));
                        }
                    }
                }
            }
            (count, None)
        })
        .collect();
    let mut total = 0;
    for (count, failure) in outcomes {
        total += count;
        if failure.is_some() {
            return Ok(MalgReport {
                partial_automorphisms: total,
                failure,
            });
        }
    }
    Ok(MalgReport {
        partial_automorphisms: total,
        failure: None,
    })
}

/// [`verify_extension_malg_with`], recovering the refinement from cell names.
pub fn verify_extension_malg<T: ExactField>(coarse: &Algebra<T>, fine: &Algebra<T>) -> Result<MalgReport<T>> {
    let parents = refinement_parents(coarse, fine)?;
    verify_extension_malg_with(coarse, fine, &parents)
}

/// Extends a single partial automorphism given by domain and range blocks.
pub fn extend_partial<T: ExactField>(
    coarse: &Algebra<T>,
    fine: &Algebra<T>,
    parents: &[usize],
    partial: &PartialAut,
) -> Result<Option<Vec<usize>>> {
    let k = coarse.n_atoms();
    let check = |bl: &[Vec<usize>]| -> Result<Vec<u64>> {
        let masks: Vec<u64> = bl.iter().map(|b| mask_of(b)).collect();
        let union = masks.iter().fold(0u64, |a, &m| {
            if a & m != 0 {
                u64::MAX
            } else {
                a | m
            }
        });
        if bl.iter().flatten().any(|&i| i >= k) || union != (1u64 << k) - 1 || masks.contains(&0) {
            return Err(Error::Malformed("blocks must partition the atoms".into()));
        }
        Ok(masks)
    };
    let (dom, rng) = (check(&partial.dom)?, check(&partial.rng)?);
    if dom.len() != rng.len() {
        return Err(Error::Malformed("domain and range have different numbers of atoms".into()));
    }
    let measures = coarse.atom_measures();
    if dom.iter().zip(&rng).any(|(&x, &y)| mask_measure(&measures, x) != mask_measure(&measures, y)) {
        return Err(Error::Precondition("partial map does not preserve measure".into()));
    }
    Ok(extend_one(fine, parents, &dom, &rng).ok())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::Quadratic;
    use crate::malg::algebra::CellSpace;

    fn q(s: &str) -> Quadratic {
        Quadratic::parse_scalar(s).unwrap()
    }

    fn alg(ms: &[&str]) -> Algebra<Quadratic> {
        let cs = CellSpace::new((0..ms.len()).map(|i| format!("c{i}")).collect(), ms.iter().map(|s| q(s)).collect()).unwrap();
        Algebra::discrete(cs)
    }

    #[test]
    fn partitions_count() {
        assert_eq!(set_partitions(3).len(), 5);
        assert_eq!(set_partitions(4).len(), 15);
    }

    #[test]
    fn good_examples() {
        let a = alg(&["1/2", "1/2"]);
        assert!(good_check(&a, &a).unwrap().good);
        let b = Algebra::discrete(
            CellSpace::new(
                vec!["c0.0".into(), "c0.1".into(), "c1.0".into(), "c1.1".into()],
                vec![q("1/4"), q("1/4"), q("1/3"), q("1/6")],
            )
            .unwrap(),
        );
        let rep = good_check(&a, &b).unwrap();
        assert!(!rep.good);
        assert_eq!(rep.witness.unwrap().0, 0);
        let rep = verify_extension_malg(&a, &b).unwrap();
        assert!(!rep.is_ok());
    }

    #[test]
    fn uniform_shortcut() {
        let a = alg(&["1/2", "1/4", "1/4"]);
        let ext = extend_partial_automorphisms(&a).unwrap();
        assert_eq!(ext.uniform, Some(4));
        assert_eq!(ext.refinement.fine.n_atoms(), 4);
        assert!(ext.refinement.fine.atom_measures().iter().all(|m| *m == q("1/4")));
        assert!(verify_extension_malg(&a, &ext.refinement.fine).unwrap().is_ok());
    }

    #[test]
    fn vacuous_incommensurable() {
        let a = alg(&["1/2*sqrt(2)", "1-1/2*sqrt(2)"]);
        let ext = extend_partial_automorphisms(&a).unwrap();
        assert_eq!(ext.refinement.fine, a);
    }

    #[test]
    fn step_splits_by_profile() {
        // a-side one atom of 1/3, b-side atoms 1/9, 2/9, one outside atom of 1/3
        let a = alg(&["1/3", "1/9", "2/9", "1/3"]);
        let r = independence_step(&a, &[0], &[1, 2]).unwrap();
        let m = r.fine.atom_measures();
        assert_eq!(r.atom_parent, vec![0, 0, 1, 2, 3, 3]);
        assert_eq!(m, vec![q("1/9"), q("2/9"), q("1/9"), q("2/9"), q("1/9"), q("2/9")]);
        assert!(matches!(independence_step(&a, &[0], &[0]), Err(Error::Precondition(_))));
        assert!(matches!(independence_step(&a, &[0], &[3]), Err(Error::Precondition(_))));
    }

    #[test]
    fn three_atom_quadratic_example() {
        let a = alg(&["1/4*sqrt(2)", "1/4*sqrt(2)", "1-1/2*sqrt(2)"]);
        let ext = extend_partial_automorphisms(&a).unwrap();
        assert!(good_check(&a, &ext.refinement.fine).unwrap().good);
        assert!(verify_extension_malg(&a, &ext.refinement.fine).unwrap().is_ok());
    }

    #[test]
    fn nontrivial_induction() {
        let a = alg(&["1/8*sqrt(2)", "1/2-1/8*sqrt(2)", "1/2"]);
        let ext = extend_partial_automorphisms(&a).unwrap();
        assert!(ext.steps.iter().any(|s| !s.skipped));
        let fine = &ext.refinement.fine;
        assert!(fine.n_atoms() > 3);
        let rep = verify_extension_malg(&a, fine).unwrap();
        assert!(rep.is_ok(), "{rep:?}");
        assert!(rep.partial_automorphisms > 1);
    }

    #[test]
    fn transposition_extends() {
        let a = alg(&["1/3", "1/3", "1/3"]);
        let parents = vec![0, 1, 2];
        let p = PartialAut {
            dom: vec![vec![0], vec![1, 2]],
            rng: vec![vec![1], vec![0, 2]],
        };
        let perm = extend_partial(&a, &a, &parents, &p).unwrap().unwrap();
        assert_eq!(perm, vec![1, 0, 2]);
    }
}
