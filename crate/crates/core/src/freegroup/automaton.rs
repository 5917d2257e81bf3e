use std::collections::VecDeque;

use super::word::{Letter, Word};
use crate::error::{Error, Result};

/// Points of a finite space with labelled edges `x --a_i--> φ_i(x)`.
///
/// Each partial map is injective, so the automaton is deterministic for
/// every letter in both directions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitAutomaton {
    n_points: usize,
    // [slot][point], slot = 2i for a_i and 2i + 1 for a_i⁻¹
    moves: Vec<Vec<Option<usize>>>,
}

impl OrbitAutomaton {
    /// One list of `(from, to)` pairs per generator.
    pub fn new(n_points: usize, maps: &[Vec<(usize, usize)>]) -> Result<Self> {
        let mut moves = Vec::with_capacity(2 * maps.len());
        for (i, map) in maps.iter().enumerate() {
            let mut fwd = vec![None; n_points];
            let mut bwd = vec![None; n_points];
            for &(x, y) in map {
                if x >= n_points || y >= n_points {
                    return Err(Error::Malformed(format!(
                        "map {} mentions a point outside 0..{n_points}",
                        i + 1
                    )));
                }
                if fwd[x].replace(y).is_some() {
                    return Err(Error::Malformed(format!("map {} defined twice at {x}", i + 1)));
                }
                if bwd[y].replace(x).is_some() {
                    return Err(Error::Malformed(format!("map {} is not injective at {y}", i + 1)));
                }
            }
            moves.push(fwd);
            moves.push(bwd);
        }
        Ok(OrbitAutomaton { n_points, moves })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn n_generators(&self) -> usize {
        self.moves.len() / 2
    }

    pub fn n_slots(&self) -> usize {
        self.moves.len()
    }

    /// One step along a letter, `None` outside the partial map's domain.
    pub fn step(&self, x: usize, letter: Letter) -> Option<usize> {
        self.moves[letter.slot()][x]
    }

    pub fn step_slot(&self, x: usize, slot: usize) -> Option<usize> {
        self.moves[slot][x]
    }

    /// `w(x)`, evaluating the rightmost letter first.
    pub fn apply_word(&self, w: &Word, x: usize) -> Option<usize> {
        self.apply_letters(w.letters(), x)
    }

    /// Same as [`Self::apply_word`] for a possibly unreduced sequence.
    pub fn apply_letters(&self, letters: &[Letter], x: usize) -> Option<usize> {
        letters.iter().rev().try_fold(x, |p, &l| self.step(p, l))
    }

    /// Points `y` with `T_x^y` nonempty.
    pub fn reachable_from(&self, x: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n_points];
        seen[x] = true;
        let mut queue = VecDeque::from([x]);
        while let Some(p) = queue.pop_front() {
            for slot in &self.moves {
                if let Some(r) = slot[p] {
                    if !seen[r] {
                        seen[r] = true;
                        queue.push_back(r);
                    }
                }
            }
        }
        seen
    }

    /// All ordered pairs `(z, z')` with `T_z^{z'}` nonempty, lexicographically.
    pub fn reachable_pairs(&self) -> Vec<(usize, usize)> {
        (0..self.n_points)
            .flat_map(|x| {
                let seen = self.reachable_from(x);
                (0..self.n_points)
                    .filter(move |&y| seen[y])
                    .map(move |y| (x, y))
            })
            .collect()
    }

    /// A reduced word `w` with `w(x) = y`, if any.
    pub fn connecting_word(&self, x: usize, y: usize) -> Option<Word> {
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; self.n_points];
        let mut seen = vec![false; self.n_points];
        seen[x] = true;
        let mut queue = VecDeque::from([x]);
        while let Some(p) = queue.pop_front() {
            if p == y {
                break;
            }
            for (slot, m) in self.moves.iter().enumerate() {
                if let Some(r) = m[p] {
                    if !seen[r] {
                        seen[r] = true;
                        parent[r] = Some((p, slot));
                        queue.push_back(r);
                    }
                }
            }
        }
        if !seen[y] {
            return None;
        }
        // letters collected from y back to x are already leftmost-first
        let mut letters = Vec::new();
        let mut cur = y;
        while let Some((p, slot)) = parent[cur] {
            letters.push(Letter::from_slot(slot));
            cur = p;
        }
        Some(Word::from_letters(letters))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freegroup::word::reduce_word;

    fn e1() -> OrbitAutomaton {
        OrbitAutomaton::new(2, &[vec![(0, 1)]]).unwrap()
    }

    #[test]
    fn apply_examples() {
        let a = e1();
        let w = |s: &[i32]| reduce_word(s, 1).unwrap();
        assert_eq!(a.apply_word(&w(&[1]), 0), Some(1));
        assert_eq!(a.apply_word(&w(&[1]), 1), None);
        // unreduced [a1⁻¹, a1] evaluated stepwise: a1 first, then a1⁻¹
        let unreduced = [Letter::inverse_of(0), Letter::generator(0)];
        assert_eq!(a.apply_letters(&unreduced, 0), Some(0));
        assert_eq!(a.apply_letters(&unreduced, 1), None);
        assert_eq!(a.apply_word(&w(&[-1, 1]), 0), Some(0));
        assert_eq!(a.apply_word(&Word::identity(), 1), Some(1));
    }

    #[test]
    fn right_to_left_order() {
        // φ1: 0 ↦ 1, φ2: 1 ↦ 2; a2·a1 sends 0 to 2, a1·a2 is undefined at 0
        let a = OrbitAutomaton::new(3, &[vec![(0, 1)], vec![(1, 2)]]).unwrap();
        let w = |s: &[i32]| reduce_word(s, 2).unwrap();
        assert_eq!(a.apply_word(&w(&[2, 1]), 0), Some(2));
        assert_eq!(a.apply_word(&w(&[1, 2]), 0), None);
    }

    #[test]
    fn rejects_non_injective_maps() {
        assert!(OrbitAutomaton::new(3, &[vec![(0, 2), (1, 2)]]).is_err());
        assert!(OrbitAutomaton::new(2, &[vec![(0, 1), (0, 0)]]).is_err());
        assert!(OrbitAutomaton::new(2, &[vec![(0, 5)]]).is_err());
    }

    #[test]
    fn connecting_words_realize() {
        let a = OrbitAutomaton::new(4, &[vec![(0, 1), (2, 3)], vec![(1, 2)]]).unwrap();
        for (x, y) in a.reachable_pairs() {
            let w = a.connecting_word(x, y).unwrap();
            assert_eq!(a.apply_word(&w, x), Some(y));
        }
        assert_eq!(a.reachable_pairs().len(), 16);
    }
}
