//! Deciding whether `e ∈ T_{z_1}^{z_1'} ⋯ T_{z_m}^{z_m'}` by saturating the
//! concatenated orbit automata with ε-transitions.
//!
//! Component `i` is a copy of the orbit automaton. Reading a word right to
//! left along its letters traces `w_i` from `z_i` to `z_i'`, so the product
//! `w_1 ⋯ w_m` is read component `m` first, with ε-links from `z_i'` in
//! component `i` to `z_{i-1}` in component `i - 1`. An ε-edge `p → q` is added
//! whenever `p --a--> r ⇒ε s --a⁻¹--> q`; at the fixed point, a word reducing
//! to `e` is accepted iff the start reaches the accept state through ε-edges.

use std::collections::{HashMap, VecDeque};

use super::automaton::OrbitAutomaton;
use super::word::{product_of, Letter, Word};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Triviality {
    /// A word realization `w_1, …, w_m` with `w_i(z_i) = z_i'` and product `e`.
    Trivial { witness: Vec<Word> },
    Nontrivial,
}

impl Triviality {
    pub fn is_trivial(&self) -> bool {
        matches!(self, Triviality::Trivial { .. })
    }
}

type State = usize;

#[derive(Debug, Clone)]
enum Provenance {
    Boundary,
    Cancelled {
        open: Letter,
        inner: Vec<(State, State)>,
    },
}

enum Token {
    Letter(Letter),
    Boundary,
}

struct Saturation<'a> {
    automaton: &'a OrbitAutomaton,
    n_components: usize,
    eps: HashMap<(State, State), Provenance>,
    eps_out: Vec<Vec<State>>,
}

impl<'a> Saturation<'a> {
    fn state(&self, component: usize, point: usize) -> State {
        component * self.automaton.n_points() + point
    }

    fn point(&self, s: State) -> usize {
        s % self.automaton.n_points()
    }

    fn component(&self, s: State) -> usize {
        s / self.automaton.n_points()
    }

    fn add(&mut self, from: State, to: State, why: Provenance) -> bool {
        if from == to || self.eps.contains_key(&(from, to)) {
            return false;
        }
        self.eps.insert((from, to), why);
        self.eps_out[from].push(to);
        true
    }

    /// ε-reachable states from `from`, each with the ε-edge path leading there.
    fn closure(&self, from: State) -> HashMap<State, Option<State>> {
        let mut parent = HashMap::from([(from, None)]);
        let mut queue = VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            for &v in &self.eps_out[u] {
                if !parent.contains_key(&v) {
                    parent.insert(v, Some(u));
                    queue.push_back(v);
                }
            }
        }
        parent
    }

    fn path_to(parent: &HashMap<State, Option<State>>, target: State) -> Vec<(State, State)> {
        let mut path = Vec::new();
        let mut cur = target;
        while let Some(Some(prev)) = parent.get(&cur) {
            path.push((*prev, cur));
            cur = *prev;
        }
        path.reverse();
        path
    }

    fn saturate(&mut self) {
        let np = self.automaton.n_points();
        let n_slots = self.automaton.n_slots();
        loop {
            let mut changed = false;
            for c in 0..self.n_components {
                for p in 0..np {
                    for slot in 0..n_slots {
                        let open = Letter::from_slot(slot);
                        let Some(r) = self.automaton.step(p, open) else { continue };
                        let from = self.state(c, p);
                        let parent = self.closure(self.state(c, r));
                        let mut found = Vec::new();
                        for &s in parent.keys() {
                            if let Some(q) = self.automaton.step(self.point(s), open.inverse()) {
                                let to = self.state(self.component(s), q);
                                if to != from && !self.eps.contains_key(&(from, to)) {
                                    found.push((s, to));
                                }
                            }
                        }
                        found.sort_unstable();
                        for (s, to) in found {
                            let inner = Self::path_to(&parent, s);
                            changed |= self.add(from, to, Provenance::Cancelled { open, inner });
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }

    fn expand(&self, edge: (State, State), out: &mut Vec<Token>) {
        match &self.eps[&edge] {
            Provenance::Boundary => out.push(Token::Boundary),
            Provenance::Cancelled { open, inner } => {
                out.push(Token::Letter(*open));
                for &e in inner {
                    self.expand(e, out);
                }
                out.push(Token::Letter(open.inverse()));
            }
        }
    }
}

/// Decides triviality of the chain with pairs `(z_i, z_i')`, returning a
/// word realization with product `e` when one exists.
pub fn benois_trivial(automaton: &OrbitAutomaton, pairs: &[(usize, usize)]) -> Triviality {
    let m = pairs.len();
    if m == 0 {
        return Triviality::Trivial { witness: Vec::new() };
    }
    let np = automaton.n_points();
    let mut sat = Saturation {
        automaton,
        n_components: m,
        eps: HashMap::new(),
        eps_out: vec![Vec::new(); m * np],
    };
    for i in 1..m {
        let from = sat.state(i, pairs[i].1);
        let to = sat.state(i - 1, pairs[i - 1].0);
        // from == to is impossible across distinct components
        sat.add(from, to, Provenance::Boundary);
    }
    sat.saturate();

    let start = sat.state(m - 1, pairs[m - 1].0);
    let accept = sat.state(0, pairs[0].1);
    let parent = sat.closure(start);
    if !parent.contains_key(&accept) {
        return Triviality::Nontrivial;
    }
    let mut tokens = Vec::new();
    for e in Saturation::path_to(&parent, accept) {
        sat.expand(e, &mut tokens);
    }
    // segments in reading order belong to components m-1, …, 0
    let mut segments: Vec<Vec<Letter>> = vec![Vec::new()];
    for t in tokens {
        match t {
            Token::Letter(l) => segments.last_mut().unwrap().push(l),
            Token::Boundary => segments.push(Vec::new()),
        }
    }
    debug_assert_eq!(segments.len(), m);
    let witness = segments
        .into_iter()
        .rev()
        .map(|seg| Word::from_letters(seg.into_iter().rev()))
        .collect();
    Triviality::Trivial { witness }
}

/// Checks a claimed trivializing realization.
pub fn verify_witness(automaton: &OrbitAutomaton, pairs: &[(usize, usize)], witness: &[Word]) -> bool {
    witness.len() == pairs.len()
        && pairs
            .iter()
            .zip(witness)
            .all(|(&(z, z2), w)| automaton.apply_word(w, z) == Some(z2))
        && product_of(witness).is_identity()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e1() -> OrbitAutomaton {
        OrbitAutomaton::new(2, &[vec![(0, 1)]]).unwrap()
    }

    #[test]
    fn back_and_forth_is_trivial() {
        let a = e1();
        let pairs = [(0, 1), (1, 0)];
        let Triviality::Trivial { witness } = benois_trivial(&a, &pairs) else {
            panic!("expected trivial");
        };
        assert!(verify_witness(&a, &pairs, &witness));
        assert_eq!(witness[0].signed(), vec![1]);
        assert_eq!(witness[1].signed(), vec![-1]);
    }

    #[test]
    fn single_step_is_nontrivial() {
        assert_eq!(benois_trivial(&e1(), &[(0, 1)]), Triviality::Nontrivial);
        assert_eq!(benois_trivial(&e1(), &[(0, 1), (0, 1)]), Triviality::Nontrivial);
    }

    #[test]
    fn loop_pair_is_trivial_with_empty_word() {
        let a = e1();
        let t = benois_trivial(&a, &[(0, 0)]);
        assert_eq!(t, Triviality::Trivial { witness: vec![Word::identity()] });
    }

    #[test]
    fn cycle_needs_cancellation_across_components() {
        // φ1: 0 ↦ 1, φ2: 0 ↦ 1 makes T_0^0 = ⟨a2⁻¹a1⟩
        let a = OrbitAutomaton::new(2, &[vec![(0, 1)], vec![(0, 1)]]).unwrap();
        for pairs in [vec![(0, 1), (1, 0)], vec![(0, 0), (0, 0)], vec![(0, 1), (1, 1), (1, 0)]] {
            let Triviality::Trivial { witness } = benois_trivial(&a, &pairs) else {
                panic!("{pairs:?} should be trivial");
            };
            assert!(verify_witness(&a, &pairs, &witness), "{pairs:?}: {witness:?}");
        }
        assert_eq!(benois_trivial(&a, &[(0, 1)]), Triviality::Nontrivial);
    }
}
