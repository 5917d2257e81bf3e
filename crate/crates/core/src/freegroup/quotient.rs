//! Finite quotients of `F_n` given by generator images in products of
//! symmetric groups, and the images of orbit sets inside them.

use std::collections::{HashMap, VecDeque};

use super::automaton::OrbitAutomaton;
use super::word::Word;
use crate::error::{Error, Result};

/// A permutation in one-line notation: `p[i]` is the image of `i`.
pub type Perm = Vec<u16>;

/// `p ∘ q`, i.e. apply `q` first.
pub fn compose(p: &[u16], q: &[u16]) -> Perm {
    q.iter().map(|&i| p[i as usize]).collect()
}

pub fn invert(p: &[u16]) -> Perm {
    let mut out = vec![0u16; p.len()];
    for (i, &v) in p.iter().enumerate() {
        out[v as usize] = i as u16;
    }
    out
}

pub fn identity_perm(degree: usize) -> Perm {
    (0..degree as u16).collect()
}

pub fn is_permutation(p: &[u16]) -> bool {
    let mut seen = vec![false; p.len()];
    p.iter().all(|&v| {
        let v = v as usize;
        v < p.len() && !std::mem::replace(&mut seen[v], true)
    })
}

/// A homomorphism `F_n → S_{d_1} × … × S_{d_k}` given by generator images.
///
/// Its kernel is the finite-index normal subgroup `H`; group elements are the
/// cosets `wH`, represented by their images.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteQuotient {
    degrees: Vec<usize>,
    // [generator][factor]
    images: Vec<Vec<Perm>>,
}

impl FiniteQuotient {
    pub fn new(degrees: Vec<usize>, images: Vec<Vec<Perm>>) -> Result<Self> {
        for (g, per_factor) in images.iter().enumerate() {
            if per_factor.len() != degrees.len() {
                return Err(Error::Malformed(format!(
                    "generator {} has {} factor images, expected {}",
                    g + 1,
                    per_factor.len(),
                    degrees.len()
                )));
            }
            for (p, &d) in per_factor.iter().zip(&degrees) {
                if p.len() != d || !is_permutation(p) {
                    return Err(Error::Malformed(format!(
                        "generator {} image {p:?} is not a permutation of degree {d}",
                        g + 1
                    )));
                }
            }
        }
        Ok(FiniteQuotient { degrees, images })
    }

    /// Single symmetric-group factor.
    pub fn symmetric(degree: usize, images: Vec<Perm>) -> Result<Self> {
        Self::new(vec![degree], images.into_iter().map(|p| vec![p]).collect())
    }

    /// The trivial quotient `F_n → 1`.
    pub fn trivial(n_generators: usize) -> Self {
        FiniteQuotient {
            degrees: Vec::new(),
            images: vec![Vec::new(); n_generators],
        }
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn n_generators(&self) -> usize {
        self.images.len()
    }

    /// `[generator][factor]` images.
    pub fn generator_images(&self) -> &[Vec<Perm>] {
        &self.images
    }

    fn flatten(parts: &[Perm]) -> Vec<u16> {
        parts.iter().flatten().copied().collect()
    }

    /// Enumerates the image group, failing if it exceeds `bound` elements.
    pub fn materialize(&self, bound: usize) -> Result<QuotientGroup> {
        QuotientGroup::generate(self, bound)
    }
}

/// Direct product of quotients over the same free group.
///
/// The kernel of the result is the intersection of the factor kernels.
pub fn combine_quotients(quotients: &[FiniteQuotient], n_generators: usize) -> Result<FiniteQuotient> {
    if let Some(q) = quotients.iter().find(|q| q.n_generators() != n_generators) {
        return Err(Error::Precondition(format!(
            "cannot combine a quotient of F_{} with F_{n_generators}",
            q.n_generators()
        )));
    }
    let degrees = quotients.iter().flat_map(|q| q.degrees.iter().copied()).collect();
    let images = (0..n_generators)
        .map(|g| quotients.iter().flat_map(|q| q.images[g].iter().cloned()).collect())
        .collect();
    FiniteQuotient::new(degrees, images)
}

/// Like [`combine_quotients`], also checking the combined order.
pub fn combine_within(
    quotients: &[FiniteQuotient],
    n_generators: usize,
    bound: usize,
) -> Result<(FiniteQuotient, QuotientGroup)> {
    let q = combine_quotients(quotients, n_generators)?;
    let g = q.materialize(bound)?;
    Ok((q, g))
}

/// The image group of a [`FiniteQuotient`], fully enumerated.
///
/// Elements are numbered in breadth-first order from the identity (index 0),
/// expanding by `a_1, a_1⁻¹, a_2, …` on the left.
#[derive(Debug, Clone)]
pub struct QuotientGroup {
    offsets: Vec<usize>,
    elements: Vec<Vec<u16>>,
    index: HashMap<Vec<u16>, usize>,
    // [slot][element] = index of (generator image)·element
    left: Vec<Vec<u32>>,
    inverse: Vec<u32>,
}

impl QuotientGroup {
    fn generate(q: &FiniteQuotient, bound: usize) -> Result<Self> {
        let mut offsets = vec![0];
        for d in &q.degrees {
            offsets.push(offsets.last().unwrap() + d);
        }
        let id: Vec<u16> = q.degrees.iter().flat_map(|&d| 0..d as u16).collect();
        let gens: Vec<Vec<u16>> = q
            .images
            .iter()
            .flat_map(|parts| {
                let inv: Vec<Perm> = parts.iter().map(|p| invert(p)).collect();
                [FiniteQuotient::flatten(parts), FiniteQuotient::flatten(&inv)]
            })
            .collect();
        let mut group = QuotientGroup {
            offsets,
            elements: vec![id.clone()],
            index: HashMap::from([(id, 0)]),
            left: vec![Vec::new(); gens.len()],
            inverse: Vec::new(),
        };
        let mut cursor = 0;
        while cursor < group.elements.len() {
            let x = group.elements[cursor].clone();
            for (slot, g) in gens.iter().enumerate() {
                let y = group.mul_raw(g, &x);
                let next = group.elements.len();
                let j = *group.index.entry(y.clone()).or_insert(next);
                if j == next {
                    if next >= bound {
                        return Err(Error::OrderBudget { limit: bound });
                    }
                    group.elements.push(y);
                }
                group.left[slot].push(j as u32);
            }
            cursor += 1;
        }
        group.inverse = group
            .elements
            .iter()
            .map(|e| group.index[&group.inv_raw(e)] as u32)
            .collect();
        Ok(group)
    }

    fn mul_raw(&self, a: &[u16], b: &[u16]) -> Vec<u16> {
        let mut out = Vec::with_capacity(a.len());
        for w in self.offsets.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            out.extend(b[lo..hi].iter().map(|&i| a[lo + i as usize]));
        }
        out
    }

    fn inv_raw(&self, a: &[u16]) -> Vec<u16> {
        let mut out = Vec::with_capacity(a.len());
        for w in self.offsets.windows(2) {
            out.extend(invert(&a[w[0]..w[1]]));
        }
        out
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub const IDENTITY: usize = 0;

    /// Flattened permutation tuple of element `i`.
    pub fn element(&self, i: usize) -> &[u16] {
        &self.elements[i]
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.index[&self.mul_raw(&self.elements[a], &self.elements[b])]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a] as usize
    }

    /// Image of the generator (or inverse) in `slot`, times `a`.
    pub fn left_slot(&self, slot: usize, a: usize) -> usize {
        self.left[slot][a] as usize
    }

    pub fn n_slots(&self) -> usize {
        self.left.len()
    }

    /// Image of a word: product of letter images, left to right.
    pub fn word_image(&self, w: &Word) -> usize {
        w.letters()
            .iter()
            .rev()
            .fold(Self::IDENTITY, |acc, l| self.left_slot(l.slot(), acc))
    }

    pub fn empty_subset(&self) -> QuotientSubset {
        QuotientSubset::empty(self.order())
    }

    /// Setwise product `S·T`.
    pub fn product(&self, s: &QuotientSubset, t: &QuotientSubset) -> QuotientSubset {
        let mut out = self.empty_subset();
        for a in s.iter() {
            for b in t.iter() {
                out.insert(self.mul(a, b));
            }
        }
        out
    }

    /// `Img(T_x^y)` for every `y`, by breadth-first search over points × group.
    pub fn orbit_images(&self, automaton: &OrbitAutomaton, x: usize) -> Vec<QuotientSubset> {
        let start = {
            let mut s = self.empty_subset();
            s.insert(Self::IDENTITY);
            s
        };
        self.left_closure(automaton, x, &start)
    }

    /// `Img(T_x^y)`.
    pub fn orbit_image(&self, automaton: &OrbitAutomaton, x: usize, y: usize) -> QuotientSubset {
        self.orbit_images(automaton, x).swap_remove(y)
    }

    /// For each `y`: `Img(T_x^y)·start`.
    pub fn left_closure(
        &self,
        automaton: &OrbitAutomaton,
        x: usize,
        start: &QuotientSubset,
    ) -> Vec<QuotientSubset> {
        assert_eq!(automaton.n_slots(), self.n_slots(), "generator count mismatch");
        let mut reached = vec![self.empty_subset(); automaton.n_points()];
        let mut queue = VecDeque::new();
        for q in start.iter() {
            reached[x].insert(q);
            queue.push_back((x, q));
        }
        while let Some((p, q)) = queue.pop_front() {
            for slot in 0..automaton.n_slots() {
                if let Some(r) = automaton.step_slot(p, slot) {
                    let q2 = self.left_slot(slot, q);
                    if reached[r].insert(q2) {
                        queue.push_back((r, q2));
                    }
                }
            }
        }
        reached
    }

    /// `Img(T_{z_1}^{z_1'}) ⋯ Img(T_{z_m}^{z_m'})`, folded from the right.
    pub fn chain_image(&self, automaton: &OrbitAutomaton, pairs: &[(usize, usize)]) -> QuotientSubset {
        let mut acc = self.empty_subset();
        acc.insert(Self::IDENTITY);
        for &(z, z2) in pairs.iter().rev() {
            acc = self.left_closure(automaton, z, &acc).swap_remove(z2);
            if acc.is_empty() {
                break;
            }
        }
        acc
    }

    /// True iff the identity is outside the chain's product image.
    pub fn separates(&self, automaton: &OrbitAutomaton, pairs: &[(usize, usize)]) -> bool {
        !self.chain_image(automaton, pairs).contains(Self::IDENTITY)
    }
}

/// A subset of a materialized [`QuotientGroup`], as a bit set.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuotientSubset {
    bits: Vec<u64>,
    universe: usize,
}

impl QuotientSubset {
    pub fn empty(universe: usize) -> Self {
        QuotientSubset {
            bits: vec![0; universe.div_ceil(64)],
            universe,
        }
    }

    pub fn from_indices(universe: usize, items: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(universe);
        for i in items {
            s.insert(i);
        }
        s
    }

    /// Returns true if `i` was not present.
    pub fn insert(&mut self, i: usize) -> bool {
        let (w, b) = (i / 64, 1u64 << (i % 64));
        let fresh = self.bits[w] & b == 0;
        self.bits[w] |= b;
        fresh
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.universe && self.bits[i / 64] & (1u64 << (i % 64)) != 0
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.universe).filter(move |&i| self.contains(i))
    }

    pub fn is_subset(&self, other: &QuotientSubset) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }
}

impl std::fmt::Debug for QuotientSubset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z3() -> FiniteQuotient {
        FiniteQuotient::symmetric(3, vec![vec![1, 2, 0]]).unwrap()
    }

    fn e1() -> OrbitAutomaton {
        OrbitAutomaton::new(2, &[vec![(0, 1)]]).unwrap()
    }

    #[test]
    fn orbit_image_in_z3() {
        // BFS oracle over 2×3 states by hand: x --a1--> y only
        let g = z3().materialize(100).unwrap();
        assert_eq!(g.order(), 3);
        let a1 = g.left_slot(0, QuotientGroup::IDENTITY);
        let xy = g.orbit_image(&e1(), 0, 1);
        assert_eq!(xy.iter().collect::<Vec<_>>(), vec![a1]);
        let xx = g.orbit_image(&e1(), 0, 0);
        assert_eq!(xx.iter().collect::<Vec<_>>(), vec![QuotientGroup::IDENTITY]);
    }

    #[test]
    fn disconnected_pair_has_empty_image() {
        let a = OrbitAutomaton::new(3, &[vec![(0, 1)]]).unwrap();
        let g = z3().materialize(100).unwrap();
        assert!(g.orbit_image(&a, 0, 2).is_empty());
    }

    #[test]
    fn combine_examples() {
        let z2 = FiniteQuotient::symmetric(2, vec![vec![1, 0]]).unwrap();
        let single = combine_quotients(std::slice::from_ref(&z2), 1).unwrap();
        assert_eq!(single, z2);
        let (_, g) = combine_within(&[z2, z3()], 1, 1000).unwrap();
        assert_eq!(g.order(), 6);
        let (_, g) = combine_within(&[], 1, 1000).unwrap();
        assert_eq!(g.order(), 1);
    }

    #[test]
    fn order_budget() {
        let s3 = FiniteQuotient::symmetric(3, vec![vec![1, 0, 2], vec![1, 2, 0]]).unwrap();
        assert!(matches!(s3.materialize(5), Err(Error::OrderBudget { limit: 5 })));
        assert_eq!(s3.materialize(6).unwrap().order(), 6);
    }

    #[test]
    fn word_images_are_homomorphic() {
        let s3 = FiniteQuotient::symmetric(3, vec![vec![1, 0, 2], vec![1, 2, 0]]).unwrap();
        let g = s3.materialize(10).unwrap();
        let u = crate::freegroup::reduce_word(&[1, 2, -1], 2).unwrap();
        let v = crate::freegroup::reduce_word(&[2, 2, 1], 2).unwrap();
        assert_eq!(g.word_image(&u.product(&v)), g.mul(g.word_image(&u), g.word_image(&v)));
        assert_eq!(g.word_image(&u.inverse()), g.inv(g.word_image(&u)));
    }

    #[test]
    fn rejects_bad_images() {
        assert!(FiniteQuotient::symmetric(3, vec![vec![0, 0, 1]]).is_err());
        assert!(FiniteQuotient::symmetric(2, vec![vec![0, 1, 2]]).is_err());
    }
}
