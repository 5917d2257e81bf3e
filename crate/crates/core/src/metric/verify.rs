//! Independent recomputation of `d_Y` from chains, plus checks on the
//! certificate and on optimal chains.

use crate::exact::ExactField;
use crate::freegroup::oracle::{factorization_oracle, OracleVerdict};
use std::collections::BTreeSet;

use crate::freegroup::{verify_witness, FiniteQuotient, OrbitAutomaton, QuotientGroup, QuotientSubset};

use super::chain::{chain_distance, Chain};
use super::extension::{automaton_of, product_signatures, Certificate, ExtensionResult, Verdict};
use super::space::{FiniteMetricSpace, PartialIsometry};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch<T> {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    /// Classes `[x, e]` and `[y, w]`.
    pub classes: (usize, usize),
    pub shortest_path: T,
    pub chain_oracle: T,
    pub chain: Option<Chain>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport<T> {
    pub triples_checked: usize,
    pub mismatches: Vec<Mismatch<T>>,
    /// Class structure, metric axioms, embedding and generator checks.
    pub structure_failures: Vec<String>,
    /// Certificate entries that did not check out.
    pub certificate_failures: Vec<String>,
    /// Optimal chains contradicting the shortening arguments.
    pub claim_failures: Vec<String>,
}

impl<T> VerificationReport<T> {
    pub fn is_ok(&self) -> bool {
        self.mismatches.is_empty()
            && self.structure_failures.is_empty()
            && self.certificate_failures.is_empty()
            && self.claim_failures.is_empty()
    }
}

/// The checkable content of an extension, as stored in result files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionData<T> {
    pub quotient: FiniteQuotient,
    pub classes: Vec<(usize, usize)>,
    /// `[x][class] = d_Y([x, e], class)`.
    pub base_rows: Vec<Vec<T>>,
    /// Full `d_Y`, when small enough to store.
    pub full_matrix: Option<Vec<Vec<T>>>,
    pub generator_perms: Vec<Vec<usize>>,
    pub embedding: Vec<usize>,
    pub certificate: Certificate,
}

impl<T: ExactField> ExtensionResult<T> {
    pub fn to_data(&self, include_full: bool) -> ExtensionData<T> {
        let n = self.n_classes();
        ExtensionData {
            quotient: self.quotient.clone(),
            classes: self.classes.clone(),
            base_rows: (0..self.embedding.len())
                .map(|x| (0..n).map(|d| self.distance(self.embedding[x], d)).collect())
                .collect(),
            full_matrix: include_full.then(|| self.distance_matrix()),
            generator_perms: self.generator_perms.clone(),
            embedding: self.embedding.clone(),
            certificate: self.certificate.clone(),
        }
    }
}

/// `[x][q]` class indices straight from the definition of `≃`: `(x, q)`
/// and `(y, q·s⁻¹)` agree for every `s ∈ Img(T_x^y)`. Classes are numbered
/// by least member.
pub fn classes_by_definition(automaton: &OrbitAutomaton, group: &QuotientGroup) -> (Vec<(usize, usize)>, Vec<Vec<usize>>) {
    let n = automaton.n_points();
    let order = group.order();
    let images: Vec<Vec<QuotientSubset>> = (0..n).map(|x| group.orbit_images(automaton, x)).collect();
    let mut class_of = vec![vec![usize::MAX; order]; n];
    let mut reps = Vec::new();
    for x in 0..n {
        for q in 0..order {
            if class_of[x][q] != usize::MAX {
                continue;
            }
            let id = reps.len();
            reps.push((x, q));
            for (y, img) in images[x].iter().enumerate() {
                for s in img.iter() {
                    class_of[y][group.mul(q, group.inv(s))] = id;
                }
            }
        }
    }
    (reps, class_of)
}

/// Best chain found so far for one `(x, w)`, keyed by distance then length.
#[derive(Clone)]
struct Best<T> {
    distance: T,
    chain: Chain,
}

struct Oracle<'a, T> {
    space: &'a FiniteMetricSpace<T>,
    automaton: &'a OrbitAutomaton,
    group: &'a QuotientGroup,
    pairs: Vec<(usize, usize)>,
    cap: T,
    bound: usize,
    // [x][w]
    best: Vec<Vec<Option<Best<T>>>>,
}

impl<'a, T: ExactField> Oracle<'a, T> {
    /// Grows chains ending at `y` leftwards; `suffix` holds pairs `k..m`
    /// and `image` their product image.
    fn grow(&mut self, suffix: &mut Vec<(usize, usize)>, image: &QuotientSubset, partial: T) {
        let first = suffix[0];
        for x in 0..self.space.len() {
            let total = partial.clone() + self.space.dist(x, first.1).clone();
            for w in image.iter() {
                let better = match &self.best[x][w] {
                    None => true,
                    Some(b) => (&total, suffix.len()) < (&b.distance, b.chain.len()),
                };
                if better {
                    self.best[x][w] = Some(Best {
                        distance: total.clone(),
                        chain: Chain::new(x, suffix.clone()),
                    });
                }
            }
        }
        if suffix.len() == self.bound {
            return;
        }
        for i in 0..self.pairs.len() {
            let (z, z2) = self.pairs[i];
            let leg = partial.clone() + self.space.dist(z, first.1).clone();
            if leg >= self.cap {
                continue;
            }
            let next = self.group.left_closure(self.automaton, z, image).swap_remove(z2);
            if next.is_empty() {
                continue;
            }
            suffix.insert(0, (z, z2));
            self.grow(suffix, &next, leg);
            suffix.remove(0);
        }
    }
}

/// Rechecks `result` against the chain characterization of `d_Y([x,e],[y,w])`
/// for every `x, y ∈ X` and `w ∈ Q`. `oracle_depth` bounds the brute-force
/// word search used to cross-check nontrivial signatures.
pub fn verify_extension<T: ExactField>(
    space: &FiniteMetricSpace<T>,
    isometries: &[PartialIsometry],
    result: &ExtensionResult<T>,
    oracle_depth: usize,
) -> VerificationReport<T> {
    verify_data(space, isometries, &result.to_data(false), &result.group, oracle_depth)
}

/// [`verify_extension`] on stored data; `group` must be the materialized
/// `data.quotient`.
pub fn verify_data<T: ExactField>(
    space: &FiniteMetricSpace<T>,
    isometries: &[PartialIsometry],
    data: &ExtensionData<T>,
    group: &QuotientGroup,
    oracle_depth: usize,
) -> VerificationReport<T> {
    let automaton = automaton_of(space, isometries);
    let n = space.len();
    let lbl = |p: usize| space.labels()[p].as_str();
    let mut report = VerificationReport {
        triples_checked: 0,
        mismatches: Vec::new(),
        structure_failures: Vec::new(),
        certificate_failures: Vec::new(),
        claim_failures: Vec::new(),
    };
    if data.quotient.n_generators() != isometries.len() {
        report.structure_failures.push(format!(
            "quotient has {} generators for {} partial isometries",
            data.quotient.n_generators(),
            isometries.len()
        ));
        return report;
    }

    check_certificate(space, &automaton, group, data, oracle_depth, &mut report);

    let (classes, class_of) = classes_by_definition(&automaton, group);
    if classes != data.classes {
        report.structure_failures.push(format!(
            "stored classes differ from the ≃ classes ({} stored, {} recomputed)",
            data.classes.len(),
            classes.len()
        ));
        return report;
    }
    let nc = classes.len();
    if data.base_rows.len() != n || data.base_rows.iter().any(|r| r.len() != nc) {
        report.structure_failures.push("distance rows have the wrong shape".into());
        return report;
    }
    let e = QuotientGroup::IDENTITY;
    // d(C, D) by left invariance from the rows at [x, e]
    let dist = |c: usize, d: usize| -> &T {
        let (x, q) = classes[c];
        let (y, r) = classes[d];
        &data.base_rows[x][class_of[y][group.mul(group.inv(q), r)]]
    };
    for x in 0..n {
        if class_of[x][e] != data.embedding.get(x).copied().unwrap_or(usize::MAX) {
            report
                .structure_failures
                .push(format!("embedding of {} is not [{}, e]", lbl(x), lbl(x)));
        }
    }
    if !report.structure_failures.is_empty() {
        return report;
    }
    if let Some(full) = &data.full_matrix {
        if full.len() != nc || full.iter().any(|r| r.len() != nc) {
            report.structure_failures.push("full distance matrix has the wrong shape".into());
        } else {
            for c in 0..nc {
                for d in 0..nc {
                    if &full[c][d] != dist(c, d) {
                        report.structure_failures.push(format!(
                            "d_Y entry ({c}, {d}) = {} but left invariance gives {}",
                            full[c][d],
                            dist(c, d)
                        ));
                    }
                }
            }
        }
    }
    // metric axioms; invariance lets the first point range over [x, e]
    let cap = space.diameter();
    for x in 0..n {
        let cx = class_of[x][e];
        for d in 0..nc {
            let v = dist(cx, d);
            if v.is_zero() != (cx == d) || v > cap || v != dist(d, cx) {
                report
                    .structure_failures
                    .push(format!("d_Y fails an axiom at classes ({cx}, {d})"));
            }
            for f in 0..nc {
                if dist(cx, f).clone() > v.clone() + dist(d, f).clone() {
                    report
                        .structure_failures
                        .push(format!("d_Y triangle fails at classes ({cx}, {d}, {f})"));
                }
            }
        }
        for y in 0..n {
            if dist(cx, class_of[y][e]) != space.dist(x, y) {
                report
                    .structure_failures
                    .push(format!("embedding not isometric at ({}, {})", lbl(x), lbl(y)));
            }
        }
    }
    if data.generator_perms.len() != isometries.len() {
        report.structure_failures.push("one permutation per generator expected".into());
    }
    for (j, perm) in data.generator_perms.iter().enumerate() {
        let g = group.left_slot(2 * j, e);
        let bijective = perm.len() == nc && {
            let mut seen = vec![false; nc];
            perm.iter().all(|&p| p < nc && !std::mem::replace(&mut seen[p], true))
        };
        if !bijective {
            report
                .structure_failures
                .push(format!("generator {} permutation is not a bijection of the classes", j + 1));
            continue;
        }
        for (c, &(x, q)) in classes.iter().enumerate() {
            if perm[c] != class_of[x][group.mul(g, q)] {
                report
                    .structure_failures
                    .push(format!("generator {} does not act by left multiplication at class {c}", j + 1));
            }
        }
        for x in 0..n {
            let cx = class_of[x][e];
            for d in 0..nc {
                if dist(perm[cx], perm[d]) != dist(cx, d) {
                    report
                        .structure_failures
                        .push(format!("generator {} is not isometric at classes ({cx}, {d})", j + 1));
                }
            }
        }
        if let Some(phi) = isometries.get(j) {
            for (a, b) in phi.pairs() {
                if perm[class_of[a][e]] != class_of[b][e] {
                    report
                        .structure_failures
                        .push(format!("generator {} does not extend its map at {}", j + 1, lbl(a)));
                }
            }
        }
    }
    if !report.structure_failures.is_empty() {
        return report;
    }

    let pairs = automaton.reachable_pairs();
    let cap = space.diameter().clone();
    for y in 0..n {
        let mut oracle = Oracle {
            space,
            automaton: &automaton,
            group,
            pairs: pairs.clone(),
            cap: cap.clone(),
            bound: space.chain_bound(),
            best: vec![vec![None; group.order()]; n],
        };
        let mut unit = group.empty_subset();
        unit.insert(e);
        for &(z, z2) in pairs.iter().filter(|p| p.0 == y) {
            let image = group.left_closure(&automaton, z, &unit).swap_remove(z2);
            let mut suffix = vec![(z, z2)];
            oracle.grow(&mut suffix, &image, T::zero());
        }
        for x in 0..n {
            for w in 0..group.order() {
                report.triples_checked += 1;
                let found = oracle.best[x][w].clone();
                let via_chains = match &found {
                    Some(b) if b.distance < cap => b.distance.clone(),
                    _ => cap.clone(),
                };
                let (c, d) = (class_of[x][e], class_of[y][w]);
                let via_paths = dist(c, d).clone();
                if via_chains != via_paths {
                    report.mismatches.push(Mismatch {
                        x,
                        y,
                        w,
                        classes: (c, d),
                        shortest_path: via_paths,
                        chain_oracle: via_chains,
                        chain: found.as_ref().map(|b| b.chain.clone()),
                    });
                }
                if let Some(b) = found.filter(|b| b.distance < cap) {
                    check_claims(space, &automaton, group, x, y, w, &b.chain, &b.distance, &mut report);
                }
            }
        }
    }
    report
}

fn check_certificate<T: ExactField>(
    space: &FiniteMetricSpace<T>,
    automaton: &OrbitAutomaton,
    group: &QuotientGroup,
    data: &ExtensionData<T>,
    oracle_depth: usize,
    report: &mut VerificationReport<T>,
) {
    let cert = &data.certificate;
    if cert.chain_bound != space.chain_bound() {
        report.certificate_failures.push(format!(
            "certificate uses chain bound {}, the space needs {}",
            cert.chain_bound,
            space.chain_bound()
        ));
    }
    match product_signatures(automaton, space.chain_bound()) {
        Ok(expected) => {
            let stored: BTreeSet<&Vec<(usize, usize)>> = cert.signatures.iter().map(|s| &s.pairs).collect();
            if let Some(missing) = expected.iter().find(|s| !stored.contains(s)) {
                report
                    .certificate_failures
                    .push(format!("certificate omits signature {missing:?}"));
            }
        }
        Err(e) => report.certificate_failures.push(format!("cannot enumerate signatures: {e}")),
    }
    for sig in &cert.signatures {
        match &sig.verdict {
            Verdict::Trivial { witness } => {
                if !verify_witness(automaton, &sig.pairs, witness) {
                    report
                        .certificate_failures
                        .push(format!("bad triviality witness for {:?}", sig.pairs));
                }
            }
            Verdict::Nontrivial => {
                if !group.separates(automaton, &sig.pairs) {
                    report
                        .certificate_failures
                        .push(format!("quotient does not separate {:?}", sig.pairs));
                }
                if let OracleVerdict::Trivial(ws) = factorization_oracle(automaton, &sig.pairs, oracle_depth) {
                    report
                        .certificate_failures
                        .push(format!("{:?} marked nontrivial but {ws:?} trivializes it", sig.pairs));
                }
            }
        }
    }
}

/// A distance-minimal chain of least length admits no shortening.
#[allow(clippy::too_many_arguments)]
fn check_claims<T: ExactField>(
    space: &FiniteMetricSpace<T>,
    automaton: &OrbitAutomaton,
    group: &QuotientGroup,
    x: usize,
    y: usize,
    w: usize,
    chain: &Chain,
    distance: &T,
    report: &mut VerificationReport<T>,
) {
    let lbl = |p: usize| space.labels()[p].as_str();
    if &chain_distance(chain, space) != distance {
        report
            .claim_failures
            .push(format!("recorded distance disagrees for {chain:?}"));
    }
    let m = chain.len();
    for i in 1..m {
        if chain.z(i) == chain.z_prime(i + 1) {
            report.claim_failures.push(format!(
                "optimal chain {}->{} has z_{i} = z_{}'",
                lbl(x),
                lbl(y),
                i + 1
            ));
        }
        if chain.z(i) == chain.z_prime(i) {
            let mut dropped = chain.clone();
            dropped.pairs.remove(i - 1);
            if group.chain_image(automaton, &dropped.pairs).contains(w) {
                report.claim_failures.push(format!(
                    "optimal chain {}->{} has a realization with w_{i} = e",
                    lbl(x),
                    lbl(y)
                ));
            }
        }
    }
    if w == QuotientGroup::IDENTITY && (m != 1 || chain.z(1) != chain.z_prime(1) || distance != space.dist(x, y)) {
        report.claim_failures.push(format!(
            "optimal chain {}->{} in H is {chain:?}, not a single loop",
            lbl(x),
            lbl(y)
        ));
    }
}
