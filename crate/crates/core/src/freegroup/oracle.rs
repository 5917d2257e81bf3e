//! Bounded brute-force search for trivializing word realizations.
//!
//! Independent of the saturation procedure: it enumerates reduced words
//! letter by letter, so it can only confirm triviality up to a length bound.

use super::automaton::OrbitAutomaton;
use super::word::{product_of, Letter, Word};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleVerdict {
    /// Found a realization with product `e` and total length within bound.
    Trivial(Vec<Word>),
    /// No realization of total length within bound reduces to `e`.
    NotFound,
}

/// Reduced words `w` of length ≤ `max_len` with `w(x) = y`.
pub fn realizing_words(automaton: &OrbitAutomaton, x: usize, y: usize, max_len: usize) -> Vec<Word> {
    // walk from x; each step prepends a letter on the left of the word
    let mut out = Vec::new();
    let mut stack: Vec<(usize, Vec<Letter>)> = vec![(x, Vec::new())];
    while let Some((p, rev_letters)) = stack.pop() {
        if p == y {
            out.push(Word::from_letters(rev_letters.iter().rev().copied()));
        }
        if rev_letters.len() == max_len {
            continue;
        }
        for slot in 0..automaton.n_slots() {
            let l = Letter::from_slot(slot);
            if rev_letters.last() == Some(&l.inverse()) {
                continue;
            }
            if let Some(r) = automaton.step(p, l) {
                let mut next = rev_letters.clone();
                next.push(l);
                stack.push((r, next));
            }
        }
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

/// Looks for `w_i ∈ T_{z_i}^{z_i'}` with `Σ|w_i| ≤ depth` and `w_1⋯w_m = e`.
pub fn factorization_oracle(automaton: &OrbitAutomaton, pairs: &[(usize, usize)], depth: usize) -> OracleVerdict {
    let options: Vec<Vec<Word>> = pairs
        .iter()
        .map(|&(z, z2)| realizing_words(automaton, z, z2, depth))
        .collect();
    let mut chosen: Vec<Word> = Vec::with_capacity(pairs.len());
    if search(&options, depth, &mut chosen) {
        OracleVerdict::Trivial(chosen)
    } else {
        OracleVerdict::NotFound
    }
}

fn search(options: &[Vec<Word>], budget: usize, chosen: &mut Vec<Word>) -> bool {
    let i = chosen.len();
    if i == options.len() {
        return product_of(chosen.iter()).is_identity();
    }
    for w in &options[i] {
        if w.len() > budget {
            break;
        }
        chosen.push(w.clone());
        if search(options, budget - w.len(), chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn e1_oracle() {
        let a = OrbitAutomaton::new(2, &[vec![(0, 1)]]).unwrap();
        assert!(matches!(factorization_oracle(&a, &[(0, 1), (1, 0)], 4), OracleVerdict::Trivial(_)));
        assert_eq!(factorization_oracle(&a, &[(0, 1)], 8), OracleVerdict::NotFound);
        assert_eq!(factorization_oracle(&a, &[(0, 1), (1, 0)], 0), OracleVerdict::NotFound);
    }

    #[test]
    fn words_on_a_cycle() {
        let a = OrbitAutomaton::new(2, &[vec![(0, 1)], vec![(0, 1)]]).unwrap();
        let ws = realizing_words(&a, 0, 0, 2);
        // e, a2⁻¹a1, a1⁻¹a2
        assert_eq!(ws.len(), 3);
        for w in ws {
            assert_eq!(a.apply_word(&w, 0), Some(0));
        }
    }
}
