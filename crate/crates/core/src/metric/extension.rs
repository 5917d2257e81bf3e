//! Extending partial isometries of a finite metric space to isometries of a
//! finite superspace `Y = (X × Q)/≃`, with `Q` a finite quotient of `F_n`.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::ExactField;
use crate::freegroup::{
    benois_trivial, combine_within, search_joint, separate_chain, FiniteQuotient, OrbitAutomaton, QuotientGroup,
    SeparationBudget, Triviality, Word,
};

use super::space::{FiniteMetricSpace, PartialIsometry};

/// Product signatures beyond this many are refused rather than enumerated.
pub const MAX_SIGNATURES: u64 = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Trivial { witness: Vec<Word> },
    Nontrivial,
}

/// A class of pair sequences `(z_1,z_1'),…,(z_m,z_m')` closed under rotation
/// and inverse-reversal, which share triviality and separating quotients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignatureRecord {
    pub pairs: Vec<(usize, usize)>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorRecord {
    pub quotient: FiniteQuotient,
    pub tried_degrees: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub chain_bound: usize,
    /// Chains with `m ≤ M` over all ordered endpoint pairs.
    pub chains_considered: u128,
    pub signatures: Vec<SignatureRecord>,
    /// True when one search separated every nontrivial signature at once.
    pub joint: bool,
    pub factors: Vec<FactorRecord>,
}

#[derive(Debug, Clone)]
pub struct ExtensionResult<T> {
    pub quotient: FiniteQuotient,
    pub group: QuotientGroup,
    /// Least `(point, element)` in each class, sorted.
    pub classes: Vec<(usize, usize)>,
    class_of: Vec<Vec<usize>>,
    // [x][class] = d_Y([x,e], class)
    base_rows: Vec<Vec<T>>,
    pub generator_perms: Vec<Vec<usize>>,
    pub embedding: Vec<usize>,
    pub certificate: Certificate,
}

impl<T: ExactField> ExtensionResult<T> {
    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    /// Class of `[x, q]` for a group element index `q`.
    pub fn class_of(&self, x: usize, q: usize) -> usize {
        self.class_of[x][q]
    }

    pub fn distance(&self, c: usize, d: usize) -> T {
        // left multiplication by Q permutes classes isometrically
        let (x, q) = self.classes[c];
        let (y, r) = self.classes[d];
        let shifted = self.group.mul(self.group.inv(q), r);
        self.base_rows[x][self.class_of[y][shifted]].clone()
    }

    pub fn distance_matrix(&self) -> Vec<Vec<T>> {
        let n = self.n_classes();
        (0..n).map(|c| (0..n).map(|d| self.distance(c, d)).collect()).collect()
    }
}

pub fn automaton_of<T: ExactField>(space: &FiniteMetricSpace<T>, isometries: &[PartialIsometry]) -> OrbitAutomaton {
    let maps: Vec<Vec<(usize, usize)>> = isometries.iter().map(|p| p.pairs().collect()).collect();
    OrbitAutomaton::new(space.len(), &maps).expect("partial isometries are injective")
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        // keep the smaller index as root
        if ra < rb {
            self.parent[rb] = ra;
        } else if rb < ra {
            self.parent[ra] = rb;
        }
    }
}

/// Points `z` with `T_z^z = {e}`: their orbit graph component is a tree.
fn tree_points(automaton: &OrbitAutomaton) -> Vec<bool> {
    let n = automaton.n_points();
    let mut uf = UnionFind::new(n);
    let mut edges = Vec::new();
    for g in 0..automaton.n_generators() {
        for p in 0..n {
            if let Some(r) = automaton.step_slot(p, 2 * g) {
                edges.push((p, r));
                uf.union(p, r);
            }
        }
    }
    let mut vertices = vec![0usize; n];
    let mut edge_count = vec![0usize; n];
    for p in 0..n {
        let r = uf.find(p);
        vertices[r] += 1;
    }
    for (p, _) in edges {
        let r = uf.find(p);
        edge_count[r] += 1;
    }
    (0..n)
        .map(|p| {
            let r = uf.find(p);
            edge_count[r] + 1 == vertices[r]
        })
        .collect()
}

/// Least sequence among rotations and inverse-reversals.
pub fn canonical_signature(pairs: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let m = pairs.len();
    let reversed: Vec<(usize, usize)> = pairs.iter().rev().map(|&(a, b)| (b, a)).collect();
    let mut best = pairs.to_vec();
    for seq in [pairs, reversed.as_slice()] {
        for k in 0..m {
            let rot: Vec<(usize, usize)> = seq[k..].iter().chain(&seq[..k]).copied().collect();
            if rot < best {
                best = rot;
            }
        }
    }
    best
}

fn count_chains(n_points: usize, n_pairs: usize, bound: usize) -> u128 {
    let mut total: u128 = 0;
    let mut power: u128 = 1;
    for _ in 0..bound {
        power = power.saturating_mul(n_pairs as u128);
        total = total.saturating_add(power);
    }
    total.saturating_mul(n_points as u128)
}

/// Canonical signatures of length `1..=bound`, skipping pairs `(z, z)` whose
/// orbit set is `{e}` (they contribute an identity factor).
pub fn product_signatures(automaton: &OrbitAutomaton, bound: usize) -> Result<Vec<Vec<(usize, usize)>>> {
    let tree = tree_points(automaton);
    let pairs: Vec<(usize, usize)> = automaton
        .reachable_pairs()
        .into_iter()
        .filter(|&(z, z2)| !(z == z2 && tree[z]))
        .collect();
    let p = pairs.len() as u64;
    let mut total: u64 = 0;
    let mut power: u64 = 1;
    for _ in 0..bound {
        power = power.saturating_mul(p);
        total = total.saturating_add(power);
    }
    if total > MAX_SIGNATURES {
        return Err(Error::Unsupported(format!(
            "{total} pair sequences up to length {bound} exceed the enumeration limit of {MAX_SIGNATURES}"
        )));
    }
    let mut out = BTreeSet::new();
    let mut frontier: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
    for _ in 0..bound {
        let mut next = Vec::with_capacity(frontier.len() * pairs.len());
        for seq in &frontier {
            for &pr in &pairs {
                let mut s = seq.clone();
                s.push(pr);
                if canonical_signature(&s) == s {
                    out.insert(s.clone());
                }
                next.push(s);
            }
        }
        frontier = next;
    }
    let mut v: Vec<_> = out.into_iter().collect();
    v.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(v)
}

/// Finds `Q` separating every nontrivial signature: one joint search first,
/// then per-signature searches combined by direct product.
fn separating_quotient(
    automaton: &OrbitAutomaton,
    nontrivial: &[Vec<(usize, usize)>],
    budget: SeparationBudget,
) -> Result<(FiniteQuotient, QuotientGroup, bool, Vec<FactorRecord>)> {
    let n = automaton.n_generators();
    if nontrivial.is_empty() {
        let q = FiniteQuotient::trivial(n);
        let g = q.materialize(budget.max_order.max(1))?;
        return Ok((q, g, true, Vec::new()));
    }
    match search_joint(automaton, nontrivial, budget) {
        Ok(sep) => {
            let g = sep.quotient.materialize(budget.max_order)?;
            let rec = FactorRecord {
                quotient: sep.quotient.clone(),
                tried_degrees: sep.tried_degrees,
            };
            return Ok((sep.quotient, g, true, vec![rec]));
        }
        Err(Error::SeparationBudget { .. }) => {}
        Err(e) => return Err(e),
    }
    let mut factors: Vec<FactorRecord> = Vec::new();
    let mut current = FiniteQuotient::trivial(n);
    let mut group = current.materialize(budget.max_order.max(1))?;
    for chain in nontrivial {
        if group.separates(automaton, chain) {
            continue;
        }
        let sep = separate_chain(automaton, chain, budget)?;
        factors.push(FactorRecord {
            quotient: sep.quotient,
            tried_degrees: sep.tried_degrees,
        });
        let qs: Vec<FiniteQuotient> = factors.iter().map(|f| f.quotient.clone()).collect();
        (current, group) = combine_within(&qs, n, budget.max_order)?;
    }
    Ok((current, group, false, factors))
}

fn dijkstra<T: ExactField>(adj: &[Vec<(usize, T)>], source: usize, cap: &T) -> Vec<T> {
    let mut dist: Vec<Option<T>> = vec![None; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = Some(T::zero());
    heap.push(Reverse((T::zero(), source)));
    while let Some(Reverse((d, u))) = heap.pop() {
        if dist[u].as_ref().is_some_and(|best| *best < d) {
            continue;
        }
        if d >= *cap {
            break;
        }
        for (v, w) in &adj[u] {
            let nd = d.clone() + w.clone();
            if dist[*v].as_ref().map_or(true, |best| nd < *best) {
                dist[*v] = Some(nd.clone());
                heap.push(Reverse((nd, *v)));
            }
        }
    }
    dist.into_iter()
        .map(|d| match d {
            Some(d) if d < *cap => d,
            _ => cap.clone(),
        })
        .collect()
}

/// Above this many classes the all-pairs postcondition checks run on an
/// evenly spaced sample of classes.
const FULL_CHECK_CLASSES: usize = 400;

pub fn extend_isometries<T: ExactField>(
    space: &FiniteMetricSpace<T>,
    isometries: &[PartialIsometry],
    budget: SeparationBudget,
) -> Result<ExtensionResult<T>> {
    for (i, phi) in isometries.iter().enumerate() {
        for (a, b) in phi.pairs() {
            if a >= space.len() || b >= space.len() {
                return Err(Error::Malformed(format!("isometry {} leaves the space", i + 1)));
            }
        }
    }
    let automaton = automaton_of(space, isometries);
    let n_points = space.len();
    let bound = space.chain_bound();

    // (1) classify every product signature with m ≤ M
    let sigs = product_signatures(&automaton, bound)?;
    let verdicts: Vec<Verdict> = sigs
        .par_iter()
        .map(|s| match benois_trivial(&automaton, s) {
            Triviality::Trivial { witness } => Verdict::Trivial { witness },
            Triviality::Nontrivial => Verdict::Nontrivial,
        })
        .collect();
    let nontrivial: Vec<Vec<(usize, usize)>> = sigs
        .iter()
        .zip(&verdicts)
        .filter(|(_, v)| **v == Verdict::Nontrivial)
        .map(|(s, _)| s.clone())
        .collect();

    // (2) one quotient separating all of them
    let (quotient, group, joint, factors) = separating_quotient(&automaton, &nontrivial, budget)?;
    let order = group.order();

    // (3) classes of X × Q, generated by (p, q) ~ (φ_j(p), q·g_j⁻¹)
    let mut uf = UnionFind::new(n_points * order);
    let gen_inv: Vec<usize> = (0..automaton.n_generators())
        .map(|j| group.left_slot(2 * j + 1, QuotientGroup::IDENTITY))
        .collect();
    for (j, &gi) in gen_inv.iter().enumerate() {
        for p in 0..n_points {
            if let Some(r) = automaton.step_slot(p, 2 * j) {
                for q in 0..order {
                    uf.union(p * order + q, r * order + group.mul(q, gi));
                }
            }
        }
    }
    // roots are minimal members, so first-seen order is representative order
    let mut class_id: HashMap<usize, usize> = HashMap::new();
    let mut classes = Vec::new();
    let mut class_of = vec![vec![0usize; order]; n_points];
    for p in 0..n_points {
        for q in 0..order {
            let root = uf.find(p * order + q);
            let next = classes.len();
            let id = *class_id.entry(root).or_insert(next);
            if id == next {
                classes.push((p, q));
            }
            class_of[p][q] = id;
        }
    }
    let n_classes = classes.len();

    // (4) class graph and shortest paths capped at Δ
    let mut weights: HashMap<(usize, usize), T> = HashMap::new();
    for q in 0..order {
        for p in 0..n_points {
            for p2 in (p + 1)..n_points {
                let (c, d) = (class_of[p][q], class_of[p2][q]);
                if c == d {
                    continue;
                }
                let key = (c.min(d), c.max(d));
                let w = space.dist(p, p2);
                match weights.get_mut(&key) {
                    Some(cur) if *cur <= *w => {}
                    Some(cur) => *cur = w.clone(),
                    None => {
                        weights.insert(key, w.clone());
                    }
                }
            }
        }
    }
    let mut adj: Vec<Vec<(usize, T)>> = vec![Vec::new(); n_classes];
    let mut edges: Vec<_> = weights.into_iter().collect();
    edges.sort_by(|a, b| a.0.cmp(&b.0));
    for ((c, d), w) in edges {
        adj[c].push((d, w.clone()));
        adj[d].push((c, w));
    }
    let cap = space.diameter().clone();
    let base_rows: Vec<Vec<T>> = (0..n_points)
        .into_par_iter()
        .map(|x| dijkstra(&adj, class_of[x][QuotientGroup::IDENTITY], &cap))
        .collect();

    // (5) extending isometries and the embedding
    let generator_perms: Vec<Vec<usize>> = (0..automaton.n_generators())
        .map(|j| {
            classes
                .iter()
                .map(|&(x, q)| class_of[x][group.left_slot(2 * j, q)])
                .collect()
        })
        .collect();
    let embedding: Vec<usize> = (0..n_points).map(|x| class_of[x][QuotientGroup::IDENTITY]).collect();

    let signatures = sigs
        .into_iter()
        .zip(verdicts)
        .map(|(pairs, verdict)| SignatureRecord { pairs, verdict })
        .collect();
    let pair_count = automaton.reachable_pairs().len();
    let result = ExtensionResult {
        quotient,
        group,
        classes,
        class_of,
        base_rows,
        generator_perms,
        embedding,
        certificate: Certificate {
            chain_bound: bound,
            chains_considered: count_chains(n_points, pair_count, bound),
            signatures,
            joint,
            factors,
        },
    };
    check_postconditions(space, isometries, &result)?;
    Ok(result)
}

fn sample(n: usize) -> Vec<usize> {
    if n <= FULL_CHECK_CLASSES {
        (0..n).collect()
    } else {
        (0..FULL_CHECK_CLASSES).map(|i| i * n / FULL_CHECK_CLASSES).collect()
    }
}

/// Embedding isometric, each permutation an isometry extending its map,
/// and `d_Y` a metric bounded by `Δ`.
pub fn check_postconditions<T: ExactField>(
    space: &FiniteMetricSpace<T>,
    isometries: &[PartialIsometry],
    r: &ExtensionResult<T>,
) -> Result<()> {
    let label = |c: usize| {
        let (x, q) = r.classes[c];
        format!("[{},{}]", space.labels()[x], q)
    };
    let n = space.len();
    for x in 0..n {
        for y in 0..n {
            let dy = r.distance(r.embedding[x], r.embedding[y]);
            if &dy != space.dist(x, y) {
                return Err(Error::Internal(format!(
                    "embedding not isometric at ({}, {}): {} vs {}",
                    space.labels()[x],
                    space.labels()[y],
                    dy,
                    space.dist(x, y)
                )));
            }
        }
    }
    for (j, phi) in isometries.iter().enumerate() {
        for (a, b) in phi.pairs() {
            if r.generator_perms[j][r.embedding[a]] != r.embedding[b] {
                return Err(Error::Internal(format!(
                    "generator {} does not extend its map at {}",
                    j + 1,
                    space.labels()[a]
                )));
            }
        }
    }
    let cs = sample(r.n_classes());
    let cap = space.diameter();
    for &c in &cs {
        for &d in &cs {
            let v = r.distance(c, d);
            if (v.is_zero()) != (c == d) || v != r.distance(d, c) || v > *cap || v < T::zero() {
                return Err(Error::Internal(format!(
                    "d_Y fails an axiom at ({}, {})",
                    label(c),
                    label(d)
                )));
            }
            for perm in &r.generator_perms {
                if r.distance(perm[c], perm[d]) != v {
                    return Err(Error::Internal(format!(
                        "generator permutation not isometric at ({}, {})",
                        label(c),
                        label(d)
                    )));
                }
            }
        }
    }
    // invariance reduces the triangle check to base points [x, e]
    for &x_class in &r.embedding {
        for &d in &cs {
            let xd = r.distance(x_class, d);
            for &e in &cs {
                if r.distance(x_class, e) > xd.clone() + r.distance(d, e) {
                    return Err(Error::Internal(format!(
                        "d_Y triangle fails at ({}, {}, {})",
                        label(x_class),
                        label(d),
                        label(e)
                    )));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_forms() {
        assert_eq!(canonical_signature(&[(1, 0)]), vec![(0, 1)]);
        assert_eq!(canonical_signature(&[(2, 1), (0, 2)]), vec![(0, 2), (2, 1)]);
        assert_eq!(canonical_signature(&[(1, 0), (1, 0)]), vec![(0, 1), (0, 1)]);
    }

    #[test]
    fn tree_detection() {
        let a = OrbitAutomaton::new(3, &[vec![(0, 1)]]).unwrap();
        assert_eq!(tree_points(&a), vec![true, true, true]);
        let b = OrbitAutomaton::new(2, &[vec![(0, 1)], vec![(1, 0)]]).unwrap();
        assert_eq!(tree_points(&b), vec![false, false]);
        let c = OrbitAutomaton::new(2, &[vec![(0, 0)]]).unwrap();
        assert_eq!(tree_points(&c), vec![false, true]);
    }

    #[test]
    fn e1_signatures() {
        let a = OrbitAutomaton::new(2, &[vec![(0, 1)]]).unwrap();
        let s = product_signatures(&a, 2).unwrap();
        assert_eq!(s, vec![vec![(0, 1)], vec![(0, 1), (0, 1)], vec![(0, 1), (1, 0)]]);
    }
}
