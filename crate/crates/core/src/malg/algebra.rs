use std::collections::{BTreeMap, HashMap, HashSet};

use crate::error::{Error, Result};
use crate::exact::ExactField;

/// Named cells with positive measures summing to one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellSpace<T> {
    names: Vec<String>,
    measures: Vec<T>,
}

impl<T: ExactField> CellSpace<T> {
    pub fn new(names: Vec<String>, measures: Vec<T>) -> Result<Self> {
        if names.len() != measures.len() {
            return Err(Error::Malformed("cell names and measures differ in length".into()));
        }
        if names.is_empty() {
            return Err(Error::Malformed("no cells".into()));
        }
        let mut seen = HashSet::new();
        for (n, m) in names.iter().zip(&measures) {
            if !seen.insert(n.as_str()) {
                return Err(Error::Malformed(format!("duplicate cell {n:?}")));
            }
            if *m <= T::zero() {
                return Err(Error::Malformed(format!("cell {n:?} has measure {m}, not positive")));
            }
        }
        let total = measures.iter().cloned().fold(T::zero(), |a, b| a + b);
        if total != T::one() {
            return Err(Error::Malformed(format!("cell measures sum to {total}, not 1")));
        }
        Ok(CellSpace { names, measures })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, c: usize) -> &str {
        &self.names[c]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn measure(&self, c: usize) -> &T {
        &self.measures[c]
    }

    pub fn measures(&self) -> &[T] {
        &self.measures
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn measure_of(&self, cells: &[usize]) -> T {
        cells.iter().fold(T::zero(), |a, &c| a + self.measures[c].clone())
    }
}

/// A finite algebra on a cell space, given by its atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Algebra<T> {
    cells: CellSpace<T>,
    atoms: Vec<Vec<usize>>,
}

impl<T: ExactField> Algebra<T> {
    pub fn new(cells: CellSpace<T>, atoms: Vec<Vec<usize>>) -> Result<Self> {
        let mut owner = vec![None; cells.len()];
        for (i, atom) in atoms.iter().enumerate() {
            if atom.is_empty() {
                return Err(Error::Malformed(format!("atom {i} is empty")));
            }
            for &c in atom {
                if c >= cells.len() {
                    return Err(Error::Malformed(format!("atom {i} names an unknown cell")));
                }
                if owner[c].replace(i).is_some() {
                    return Err(Error::Malformed(format!("cell {:?} lies in two atoms", cells.name(c))));
                }
            }
        }
        if let Some(c) = owner.iter().position(Option::is_none) {
            return Err(Error::Malformed(format!("cell {:?} lies in no atom", cells.name(c))));
        }
        Ok(Algebra { cells, atoms })
    }

    /// Every cell its own atom.
    pub fn discrete(cells: CellSpace<T>) -> Self {
        let atoms = (0..cells.len()).map(|c| vec![c]).collect();
        Algebra { cells, atoms }
    }

    pub fn from_names(cells: CellSpace<T>, atoms: &[Vec<String>]) -> Result<Self> {
        let idx: HashMap<&str, usize> = cells.names().iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let atoms = atoms
            .iter()
            .map(|a| {
                a.iter()
                    .map(|n| idx.get(n.as_str()).copied().ok_or_else(|| Error::Malformed(format!("unknown cell {n:?}"))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(cells, atoms)
    }

    pub fn cells(&self) -> &CellSpace<T> {
        &self.cells
    }

    pub fn atoms(&self) -> &[Vec<usize>] {
        &self.atoms
    }

    pub fn n_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn atom_measure(&self, i: usize) -> T {
        self.cells.measure_of(&self.atoms[i])
    }

    pub fn atom_measures(&self) -> Vec<T> {
        (0..self.n_atoms()).map(|i| self.atom_measure(i)).collect()
    }

    pub fn atom_of_cell(&self) -> Vec<usize> {
        let mut out = vec![0; self.cells.len()];
        for (i, a) in self.atoms.iter().enumerate() {
            for &c in a {
                out[c] = i;
            }
        }
        out
    }
}

/// A refinement with explicit ancestry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Refinement<T> {
    pub fine: Algebra<T>,
    /// Coarse cell containing each fine cell.
    pub cell_parent: Vec<usize>,
    /// Coarse atom containing each fine atom.
    pub atom_parent: Vec<usize>,
}

impl<T: ExactField> Refinement<T> {
    pub fn identity(a: &Algebra<T>) -> Self {
        Refinement {
            fine: a.clone(),
            cell_parent: (0..a.cells().len()).collect(),
            atom_parent: (0..a.n_atoms()).collect(),
        }
    }

    /// `self` followed by `next`, which refines `self.fine`.
    pub fn then(&self, next: Refinement<T>) -> Refinement<T> {
        Refinement {
            cell_parent: next.cell_parent.iter().map(|&p| self.cell_parent[p]).collect(),
            atom_parent: next.atom_parent.iter().map(|&p| self.atom_parent[p]).collect(),
            fine: next.fine,
        }
    }
}

/// Fine-atom to coarse-atom map, recovering cell ancestry from names: a fine
/// cell descends from the coarse cell with the same name or with the longest
/// name `p` such that the fine name starts with `p.`.
pub fn refinement_parents<T: ExactField>(coarse: &Algebra<T>, fine: &Algebra<T>) -> Result<Vec<usize>> {
    let by_name: HashMap<&str, usize> = coarse
        .cells()
        .names()
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let mut cell_parent = Vec::with_capacity(fine.cells().len());
    for name in fine.cells().names() {
        let mut cur = name.as_str();
        let parent = loop {
            if let Some(&i) = by_name.get(cur) {
                break Some(i);
            }
            match cur.rfind('.') {
                Some(k) => cur = &cur[..k],
                None => break None,
            }
        };
        match parent {
            Some(p) => cell_parent.push(p),
            None => return Err(Error::Precondition(format!("cell {name:?} has no ancestor in the coarse algebra"))),
        }
    }
    let mut mass = vec![T::zero(); coarse.cells().len()];
    for (c, &p) in cell_parent.iter().enumerate() {
        mass[p] = mass[p].clone() + fine.cells().measure(c).clone();
    }
    for (p, m) in mass.iter().enumerate() {
        if m != coarse.cells().measure(p) {
            return Err(Error::Precondition(format!(
                "descendants of cell {:?} have measure {m}, expected {}",
                coarse.cells().name(p),
                coarse.cells().measure(p)
            )));
        }
    }
    let coarse_atom = coarse.atom_of_cell();
    fine.atoms()
        .iter()
        .enumerate()
        .map(|(i, atom)| {
            let owners: HashSet<usize> = atom.iter().map(|&c| coarse_atom[cell_parent[c]]).collect();
            if owners.len() == 1 {
                Ok(*owners.iter().next().unwrap())
            } else {
                Err(Error::Precondition(format!("fine atom {i} straddles coarse atoms")))
            }
        })
        .collect()
}

/// Splits cells into fragments and assembles the refined cell space.
pub(crate) struct Carver<'a, T> {
    old: &'a CellSpace<T>,
    used: &'a mut HashSet<String>,
    // per old cell, fragment measures
    plan: Vec<Vec<T>>,
}

impl<'a, T: ExactField> Carver<'a, T> {
    pub(crate) fn new(old: &'a CellSpace<T>, used: &'a mut HashSet<String>) -> Self {
        used.extend(old.names().iter().cloned());
        Carver {
            old,
            used,
            plan: vec![Vec::new(); old.len()],
        }
    }

    /// Cuts the region `cells` (in order) into consecutive pieces of the
    /// given measures; returns `(old cell, fragment)` handles per piece.
    pub(crate) fn carve(&mut self, cells: &[usize], targets: &[T]) -> Result<Vec<Vec<(usize, usize)>>> {
        let total = self.old.measure_of(cells);
        let want = targets.iter().cloned().fold(T::zero(), |a, b| a + b);
        if total != want || targets.iter().any(|t| *t < T::zero()) {
            return Err(Error::Internal(format!("cannot carve {want} out of {total}")));
        }
        let mut out = Vec::with_capacity(targets.len());
        let mut k = 0;
        let mut left = cells.first().map(|&c| self.old.measure(c).clone());
        for t in targets {
            let mut need = t.clone();
            let mut piece = Vec::new();
            while need > T::zero() {
                let avail = left.clone().expect("measures balance");
                let c = cells[k];
                let take = if avail <= need { avail.clone() } else { need.clone() };
                piece.push((c, self.plan[c].len()));
                self.plan[c].push(take.clone());
                need = need - take.clone();
                let rest = avail - take;
                if rest.is_zero() {
                    k += 1;
                    left = cells.get(k).map(|&c| self.old.measure(c).clone());
                } else {
                    left = Some(rest);
                }
            }
            out.push(piece);
        }
        Ok(out)
    }

    /// Leaves a cell whole.
    pub(crate) fn keep(&mut self, c: usize) -> (usize, usize) {
        let k = self.plan[c].len();
        self.plan[c].push(self.old.measure(c).clone());
        (c, k)
    }

    /// New cell space plus the index of every `(old cell, fragment)`.
    pub(crate) fn finish(self) -> Result<(CellSpace<T>, Vec<usize>, BTreeMap<(usize, usize), usize>)> {
        let mut names = Vec::new();
        let mut measures = Vec::new();
        let mut parent = Vec::new();
        let mut index = BTreeMap::new();
        for (c, frags) in self.plan.into_iter().enumerate() {
            if frags.is_empty() {
                return Err(Error::Internal(format!("cell {:?} was dropped", self.old.name(c))));
            }
            let single = frags.len() == 1;
            let mut next_suffix = 0usize;
            for (k, m) in frags.into_iter().enumerate() {
                let name = if single {
                    self.old.name(c).to_string()
                } else {
                    loop {
                        let cand = format!("{}.{}", self.old.name(c), next_suffix);
                        next_suffix += 1;
                        if self.used.insert(cand.clone()) {
                            break cand;
                        }
                    }
                };
                index.insert((c, k), names.len());
                names.push(name);
                measures.push(m);
                parent.push(c);
            }
        }
        Ok((CellSpace::new(names, measures)?, parent, index))
    }
}

/// Multiset of measures, sorted.
pub fn measure_profile<T: ExactField>(space: &CellSpace<T>, groups: impl IntoIterator<Item = Vec<usize>>) -> Vec<T> {
    let mut v: Vec<T> = groups.into_iter().map(|g| space.measure_of(&g)).collect();
    v.sort();
    v
}
