//! Search for finite quotients separating the identity from chain products.
//!
//! Candidates are homomorphisms `F_n → S_d`, for `d = 1, 2, …`, enumerated by
//! generator-image tuples in lexicographic order of one-line notation. A tuple
//! that is not lexicographically least among its simultaneous conjugates is
//! skipped: conjugate tuples define the same kernel, and the least one always
//! comes first, so the first success is unchanged.

use rayon::prelude::*;

use super::automaton::OrbitAutomaton;
use super::benois::benois_trivial;
use super::quotient::{compose, identity_perm, invert, FiniteQuotient, Perm, QuotientGroup};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeparationBudget {
    /// Largest symmetric-group degree tried.
    pub max_degree: usize,
    /// Largest group order accepted, for candidates and combined quotients.
    pub max_order: usize,
}

impl Default for SeparationBudget {
    fn default() -> Self {
        SeparationBudget {
            max_degree: 6,
            max_order: 10_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Separation {
    pub quotient: FiniteQuotient,
    pub tried_degrees: Vec<usize>,
}

/// All permutations of `0..d` in lexicographic order.
pub fn permutations_lex(d: usize) -> Vec<Perm> {
    let mut out = Vec::new();
    let mut p = identity_perm(d);
    loop {
        out.push(p.clone());
        // next permutation
        let Some(i) = (1..d).rev().find(|&i| p[i - 1] < p[i]) else { break };
        let j = (i..d).rev().find(|&j| p[j] > p[i - 1]).unwrap();
        p.swap(i - 1, j);
        p[i..].reverse();
    }
    out
}

fn conjugate(c: &[u16], c_inv: &[u16], p: &[u16]) -> Perm {
    compose(c, &compose(p, c_inv))
}

struct Candidates {
    degree: usize,
    perms: Vec<Perm>,
    conjugators: Vec<(Perm, Perm)>,
    first_ok: Vec<bool>,
    n_generators: usize,
}

impl Candidates {
    fn new(degree: usize, n_generators: usize) -> Self {
        let perms = permutations_lex(degree);
        let conjugators: Vec<(Perm, Perm)> = perms.iter().map(|c| (c.clone(), invert(c))).collect();
        // beyond S_7 the conjugacy filter costs more than it saves
        let filter = degree <= 7;
        let first_ok = perms
            .iter()
            .map(|p| {
                !filter
                    || conjugators
                        .iter()
                        .all(|(c, ci)| conjugate(c, ci, p).as_slice() >= p.as_slice())
            })
            .collect();
        Candidates {
            degree,
            perms,
            conjugators,
            first_ok,
            n_generators,
        }
    }

    fn count(&self) -> u64 {
        (self.perms.len() as u64).pow(self.n_generators as u32)
    }

    fn decode(&self, mut index: u64) -> Vec<usize> {
        let base = self.perms.len() as u64;
        let mut digits = vec![0usize; self.n_generators];
        for slot in digits.iter_mut().rev() {
            *slot = (index % base) as usize;
            index /= base;
        }
        digits
    }

    fn is_canonical(&self, digits: &[usize]) -> bool {
        if digits.is_empty() {
            return true;
        }
        if !self.first_ok[digits[0]] {
            return false;
        }
        if self.degree > 7 {
            return true;
        }
        let tuple: Vec<&Perm> = digits.iter().map(|&i| &self.perms[i]).collect();
        self.conjugators.iter().all(|(c, ci)| {
            for p in &tuple {
                let q = conjugate(c, ci, p);
                match q.as_slice().cmp(p.as_slice()) {
                    std::cmp::Ordering::Less => return false,
                    std::cmp::Ordering::Greater => return true,
                    std::cmp::Ordering::Equal => {}
                }
            }
            true
        })
    }

    fn quotient(&self, digits: &[usize]) -> FiniteQuotient {
        FiniteQuotient::symmetric(self.degree, digits.iter().map(|&i| self.perms[i].clone()).collect())
            .expect("enumerated permutations are valid")
    }
}

fn separates_all(group: &QuotientGroup, automaton: &OrbitAutomaton, chains: &[Vec<(usize, usize)>]) -> bool {
    chains.iter().all(|c| group.separates(automaton, c))
}

/// First candidate, in canonical order, whose kernel misses every chain
/// product. Callers guarantee that every chain is nontrivial.
pub fn search_joint(
    automaton: &OrbitAutomaton,
    chains: &[Vec<(usize, usize)>],
    budget: SeparationBudget,
) -> Result<Separation> {
    let n = automaton.n_generators();
    let mut tried = Vec::new();
    for degree in 1..=budget.max_degree {
        tried.push(degree);
        let cands = Candidates::new(degree, n);
        let found = (0..cands.count())
            .into_par_iter()
            .map(|i| cands.decode(i))
            .filter(|digits| cands.is_canonical(digits))
            .find_first(|digits| {
                cands
                    .quotient(digits)
                    .materialize(budget.max_order)
                    .map(|g| separates_all(&g, automaton, chains))
                    .unwrap_or(false)
            });
        if let Some(digits) = found {
            return Ok(Separation {
                quotient: cands.quotient(&digits),
                tried_degrees: tried,
            });
        }
    }
    Err(Error::SeparationBudget {
        last_degree: budget.max_degree,
    })
}

/// Finds `Q` with `e ∉ Img(T_{z_1}^{z_1'}) ⋯ Img(T_{z_m}^{z_m'})`.
pub fn separate_chain(
    automaton: &OrbitAutomaton,
    pairs: &[(usize, usize)],
    budget: SeparationBudget,
) -> Result<Separation> {
    if benois_trivial(automaton, pairs).is_trivial() {
        return Err(Error::Precondition(
            "cannot separate: identity lies in product".into(),
        ));
    }
    search_joint(automaton, &[pairs.to_vec()], budget)
}
