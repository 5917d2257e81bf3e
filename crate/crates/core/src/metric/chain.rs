use crate::exact::ExactField;
use crate::freegroup::{OrbitAutomaton, Word};

use super::space::FiniteMetricSpace;

/// `z_0; (z_1, z_1'), …, (z_m, z_m')`, a chain from `z_0` to `z_m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Chain {
    pub start: usize,
    pub pairs: Vec<(usize, usize)>,
}

impl Chain {
    pub fn new(start: usize, pairs: Vec<(usize, usize)>) -> Self {
        Chain { start, pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// `z_m`, or the start for an empty chain.
    pub fn end(&self) -> usize {
        self.pairs.last().map_or(self.start, |p| p.0)
    }

    /// `z_i` for `0 ≤ i ≤ m`.
    pub fn z(&self, i: usize) -> usize {
        if i == 0 {
            self.start
        } else {
            self.pairs[i - 1].0
        }
    }

    /// `z_i'` for `1 ≤ i ≤ m`.
    pub fn z_prime(&self, i: usize) -> usize {
        self.pairs[i - 1].1
    }

    /// Every pair is joined by some word.
    pub fn is_chain(&self, automaton: &OrbitAutomaton) -> bool {
        self.pairs
            .iter()
            .all(|&(z, z2)| automaton.reachable_from(z)[z2])
    }

    pub fn is_realization(&self, automaton: &OrbitAutomaton, words: &[Word]) -> bool {
        words.len() == self.len()
            && self
                .pairs
                .iter()
                .zip(words)
                .all(|(&(z, z2), w)| automaton.apply_word(w, z) == Some(z2))
    }
}

/// `Σ_{i<m} d(z_i, z_{i+1}')`.
pub fn chain_distance<T: ExactField>(chain: &Chain, space: &FiniteMetricSpace<T>) -> T {
    (0..chain.len()).fold(T::zero(), |acc, i| {
        acc + space.dist(chain.z(i), chain.z_prime(i + 1)).clone()
    })
}

/// Chains from `x` to `y` with `1 ≤ m ≤ bound`, ordered by `m` and then
/// lexicographically by pairs.
pub fn enumerate_chains(automaton: &OrbitAutomaton, x: usize, y: usize, bound: usize) -> ChainIter {
    let pairs = automaton.reachable_pairs();
    let last: Vec<(usize, usize)> = pairs.iter().copied().filter(|p| p.0 == y).collect();
    ChainIter {
        start: x,
        pairs,
        last,
        bound,
        m: 1,
        digits: vec![0],
        done: false,
    }
}

pub struct ChainIter {
    start: usize,
    pairs: Vec<(usize, usize)>,
    last: Vec<(usize, usize)>,
    bound: usize,
    m: usize,
    // odometer over pairs for positions < m-1, over `last` for the final one
    digits: Vec<usize>,
    done: bool,
}

impl ChainIter {
    fn advance(&mut self) {
        let m = self.m;
        for pos in (0..m).rev() {
            let base = if pos == m - 1 { self.last.len() } else { self.pairs.len() };
            self.digits[pos] += 1;
            if self.digits[pos] < base {
                return;
            }
            self.digits[pos] = 0;
        }
        self.m += 1;
        self.digits = vec![0; self.m];
    }
}

impl Iterator for ChainIter {
    type Item = Chain;

    fn next(&mut self) -> Option<Chain> {
        if self.done || self.last.is_empty() || self.m > self.bound {
            self.done = true;
            return None;
        }
        let m = self.m;
        let pairs = (0..m)
            .map(|pos| {
                if pos == m - 1 {
                    self.last[self.digits[pos]]
                } else {
                    self.pairs[self.digits[pos]]
                }
            })
            .collect();
        self.advance();
        Some(Chain::new(self.start, pairs))
    }
}

/// Rewrites `w_i = v_i a`, `w_{i+1} = a⁻¹ v_{i+1}` (1-based `i < m`) to the
/// chain realized by `v_i, v_{i+1}`, keeping the distance and the product.
pub fn cancel_at(
    automaton: &OrbitAutomaton,
    chain: &Chain,
    words: &[Word],
    i: usize,
) -> Option<(Chain, Vec<Word>)> {
    if i == 0 || i >= chain.len() {
        return None;
    }
    let (wi, wj) = (&words[i - 1], &words[i]);
    let a = *wi.letters().last()?;
    if wj.letters().first() != Some(&a.inverse()) {
        return None;
    }
    let vi = Word::from_letters(wi.letters()[..wi.len() - 1].iter().copied());
    let vj = Word::from_letters(wj.letters()[1..].iter().copied());
    let (zi, zi2) = chain.pairs[i - 1];
    let zj = chain.pairs[i].0;
    let yi = automaton.step(zi, a)?;
    let yj2 = automaton.apply_word(&vj, zj)?;
    let mut out = chain.clone();
    out.pairs[i - 1] = (yi, zi2);
    out.pairs[i] = (zj, yj2);
    let mut ws = words.to_vec();
    ws[i - 1] = vi;
    ws[i] = vj;
    Some((out, ws))
}

/// Drops a pair with `w_i = e` for `0 < i < m`.
pub fn drop_trivial(chain: &Chain, words: &[Word]) -> Option<(Chain, Vec<Word>)> {
    let i = (1..chain.len()).find(|&i| words[i - 1].is_identity())?;
    let mut out = chain.clone();
    out.pairs.remove(i - 1);
    let mut ws = words.to_vec();
    ws.remove(i - 1);
    Some((out, ws))
}

/// Merges pairs `i, i+1` when `z_i = z_{i+1}'` for some `0 < i < m`.
pub fn merge_zero_leg(chain: &Chain, words: &[Word]) -> Option<(Chain, Vec<Word>)> {
    let i = (1..chain.len()).find(|&i| chain.z(i) == chain.z_prime(i + 1))?;
    let mut out = chain.clone();
    let merged = (chain.pairs[i].0, chain.pairs[i - 1].1);
    out.pairs.splice(i - 1..=i, [merged]);
    let mut ws = words.to_vec();
    let w = ws[i - 1].product(&ws[i]);
    ws.splice(i - 1..=i, [w]);
    Some((out, ws))
}

/// Applies the three rewrites until none fires. Each step keeps the
/// product and does not increase the distance.
pub fn shorten(automaton: &OrbitAutomaton, chain: &Chain, words: &[Word]) -> (Chain, Vec<Word>) {
    let mut cur = (chain.clone(), words.to_vec());
    loop {
        if let Some(next) = drop_trivial(&cur.0, &cur.1).or_else(|| merge_zero_leg(&cur.0, &cur.1)) {
            cur = next;
            continue;
        }
        let cancelled = (1..cur.0.len()).find_map(|i| cancel_at(automaton, &cur.0, &cur.1, i));
        match cancelled {
            Some(next) => cur = next,
            None => return cur,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freegroup::{product_of, reduce_word};
    use crate::metric::space::validate_space;
    use num_rational::BigRational;
    use num_traits::Zero;

    fn e1() -> (FiniteMetricSpace<BigRational>, OrbitAutomaton) {
        let s = validate_space(
            vec!["x".into(), "y".into()],
            vec![
                vec![BigRational::from_integer(0.into()), BigRational::from_integer(1.into())],
                vec![BigRational::from_integer(1.into()), BigRational::from_integer(0.into())],
            ],
        )
        .unwrap();
        (s, OrbitAutomaton::new(2, &[vec![(0, 1)]]).unwrap())
    }

    #[test]
    fn single_pair_chains() {
        let (s, a) = e1();
        let to_y: Vec<Chain> = enumerate_chains(&a, 0, 1, 1).collect();
        assert!(to_y.contains(&Chain::new(0, vec![(1, 1)])));
        assert_eq!(chain_distance(&Chain::new(0, vec![(1, 1)]), &s), BigRational::from_integer(1.into()));
        let to_x: Vec<Chain> = enumerate_chains(&a, 0, 0, 1).collect();
        assert!(to_x.contains(&Chain::new(0, vec![(0, 0)])));
        assert!(to_x.contains(&Chain::new(0, vec![(0, 1)])));
        assert!(chain_distance(&Chain::new(0, vec![(1, 0)]), &s).is_zero());
        assert_eq!(enumerate_chains(&a, 0, 1, 0).count(), 0);
    }

    #[test]
    fn enumeration_order_and_count() {
        let (_, a) = e1();
        let all: Vec<Chain> = enumerate_chains(&a, 0, 1, 3).collect();
        // 4 reachable pairs, 2 of which start at y
        assert_eq!(all.len(), 2 + 4 * 2 + 16 * 2);
        assert!(all.windows(2).all(|w| (w[0].len(), &w[0].pairs) < (w[1].len(), &w[1].pairs)));
        assert!(all.iter().all(|c| c.end() == 1 && c.is_chain(&a)));
    }

    #[test]
    fn rewrites_keep_product_and_distance() {
        let (s, a) = e1();
        // w_1 = a1, w_2 = a1⁻¹ on (x,y), (y,x)
        let c = Chain::new(1, vec![(0, 1), (1, 0)]);
        let ws = vec![reduce_word(&[1], 1).unwrap(), reduce_word(&[-1], 1).unwrap()];
        assert!(c.is_realization(&a, &ws));
        let (c2, ws2) = cancel_at(&a, &c, &ws, 1).unwrap();
        assert!(c2.is_realization(&a, &ws2));
        assert_eq!(product_of(&ws2), product_of(&ws));
        assert_eq!(chain_distance(&c2, &s), chain_distance(&c, &s));
        let (c3, ws3) = shorten(&a, &c, &ws);
        assert_eq!(c3.len(), 1);
        assert_eq!(c3.pairs[0].0, c3.pairs[0].1);
        assert!(ws3[0].is_identity());
        assert!(chain_distance(&c3, &s) <= chain_distance(&c, &s));
    }
}
