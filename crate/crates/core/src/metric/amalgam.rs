use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::exact::ExactField;

use super::space::{validate_space, FiniteMetricSpace};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Amalgam<T> {
    pub space: FiniteMetricSpace<T>,
    /// Indices in `space` of the points of `B`, in `B`'s order.
    pub b_points: Vec<usize>,
    /// Indices in `space` of the points of `C`, in `C`'s order.
    pub c_points: Vec<usize>,
    /// Indices in `space` of the shared points.
    pub a_points: Vec<usize>,
}

/// Glues `B` and `C` along the points labelled `common`, with cross
/// distances `d(b, c) = min_a d(b, a) + d(a, c)`. Labels of `C ∖ A` that
/// clash with `B` get primes appended.
pub fn amalgamate<T: ExactField>(
    b: &FiniteMetricSpace<T>,
    c: &FiniteMetricSpace<T>,
    common: &[String],
) -> Result<Amalgam<T>> {
    if common.is_empty() {
        return Err(Error::Unsupported("amalgamation over an empty subspace".into()));
    }
    let mut in_b = Vec::new();
    let mut in_c = Vec::new();
    for a in common {
        let (Some(i), Some(j)) = (b.index_of(a), c.index_of(a)) else {
            return Err(Error::Malformed(format!("shared point {a:?} missing from one side")));
        };
        in_b.push(i);
        in_c.push(j);
    }
    for s in 0..common.len() {
        for t in 0..common.len() {
            if b.dist(in_b[s], in_b[t]) != c.dist(in_c[s], in_c[t]) {
                return Err(Error::Malformed(format!(
                    "shared points {:?} and {:?} have different distances in B and C",
                    common[s], common[t]
                )));
            }
        }
    }
    let nb = b.len();
    let mut labels: Vec<String> = b.labels().to_vec();
    let mut taken: HashSet<String> = labels.iter().cloned().collect();
    // position of each C point in D
    let mut c_points = vec![0usize; c.len()];
    for (s, &j) in in_c.iter().enumerate() {
        c_points[j] = in_b[s];
    }
    let mut c_only = Vec::new();
    for j in 0..c.len() {
        if in_c.contains(&j) {
            continue;
        }
        let mut name = c.labels()[j].clone();
        while taken.contains(&name) {
            name.push('\'');
        }
        taken.insert(name.clone());
        c_points[j] = labels.len();
        labels.push(name);
        c_only.push(j);
    }
    let n = labels.len();
    let mut d = vec![vec![T::zero(); n]; n];
    for i in 0..nb {
        for k in 0..nb {
            d[i][k] = b.dist(i, k).clone();
        }
    }
    for &j in &c_only {
        for &k in &c_only {
            d[c_points[j]][c_points[k]] = c.dist(j, k).clone();
        }
        for (s, &ib) in in_b.iter().enumerate() {
            let v = c.dist(j, in_c[s]).clone();
            d[c_points[j]][ib] = v.clone();
            d[ib][c_points[j]] = v;
        }
    }
    for i in 0..nb {
        if in_b.contains(&i) {
            continue;
        }
        for &j in &c_only {
            let v = (0..common.len())
                .map(|s| b.dist(i, in_b[s]).clone() + c.dist(in_c[s], j).clone())
                .min()
                .expect("A is nonempty");
            d[i][c_points[j]] = v.clone();
            d[c_points[j]][i] = v;
        }
    }
    let space = validate_space(labels, d)?;
    Ok(Amalgam {
        space,
        b_points: (0..nb).collect(),
        c_points,
        a_points: in_b,
    })
}

/// Distance-preserving bijections of `set` (indices into `space`) that map
/// `fixed` onto itself. Each is a vector over positions in `set`.
fn self_isometries<T: ExactField>(space: &FiniteMetricSpace<T>, set: &[usize], fixed: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut image: Vec<usize> = Vec::with_capacity(set.len());
    let mut used = vec![false; set.len()];
    fn rec<T: ExactField>(
        space: &FiniteMetricSpace<T>,
        set: &[usize],
        in_fixed: &[bool],
        image: &mut Vec<usize>,
        used: &mut [bool],
        out: &mut Vec<Vec<usize>>,
    ) {
        let k = image.len();
        if k == set.len() {
            out.push(image.iter().map(|&p| set[p]).collect());
            return;
        }
        for cand in 0..set.len() {
            if used[cand] || in_fixed[cand] != in_fixed[k] {
                continue;
            }
            let ok = (0..k).all(|i| space.dist(set[i], set[k]) == space.dist(set[image[i]], set[cand]));
            if ok {
                used[cand] = true;
                image.push(cand);
                rec(space, set, in_fixed, image, used, out);
                image.pop();
                used[cand] = false;
            }
        }
    }
    let in_fixed: Vec<bool> = set.iter().map(|p| fixed.contains(p)).collect();
    rec(space, set, &in_fixed, &mut image, &mut used, &mut out);
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndependenceReport {
    pub independent: bool,
    /// Isometries of `B` and `C` (as images of the listed points) whose
    /// union fails, when one exists.
    pub witness: Option<(Vec<usize>, Vec<usize>)>,
    pub pairs_checked: usize,
}

/// Whether every pair of isometries of `B` and `C` that preserve `A` and
/// agree on it glues to an isometry of `B ∪ C`.
pub fn check_independence<T: ExactField>(
    space: &FiniteMetricSpace<T>,
    b: &[usize],
    c: &[usize],
    a: &[usize],
) -> Result<IndependenceReport> {
    if let Some(p) = a.iter().find(|p| !b.contains(p) || !c.contains(p)) {
        return Err(Error::Precondition(format!(
            "{} lies in A but not in both B and C",
            space.labels().get(*p).map_or("?", |s| s.as_str())
        )));
    }
    if b.iter().chain(c).any(|&p| p >= space.len()) {
        return Err(Error::Malformed("point index out of range".into()));
    }
    let iso_b = self_isometries(space, b, a);
    let iso_c = self_isometries(space, c, a);
    let mut union: Vec<usize> = b.to_vec();
    union.extend(c.iter().filter(|p| !b.contains(p)));
    let mut pairs_checked = 0;
    for f in &iso_b {
        for g in &iso_c {
            let agree_on_a = a.iter().all(|p| {
                let i = b.iter().position(|q| q == p).unwrap();
                let j = c.iter().position(|q| q == p).unwrap();
                f[i] == g[j]
            });
            if !agree_on_a {
                continue;
            }
            pairs_checked += 1;
            if !glues(space, b, c, f, g, &union) {
                return Ok(IndependenceReport {
                    independent: false,
                    witness: Some((f.clone(), g.clone())),
                    pairs_checked,
                });
            }
        }
    }
    Ok(IndependenceReport {
        independent: true,
        witness: None,
        pairs_checked,
    })
}

fn glues<T: ExactField>(
    space: &FiniteMetricSpace<T>,
    b: &[usize],
    c: &[usize],
    f: &[usize],
    g: &[usize],
    union: &[usize],
) -> bool {
    let mut map = Vec::with_capacity(union.len());
    for &p in union {
        let fb = b.iter().position(|&q| q == p).map(|i| f[i]);
        let gc = c.iter().position(|&q| q == p).map(|j| g[j]);
        match (fb, gc) {
            (Some(u), Some(v)) if u != v => return false,
            (Some(u), _) | (None, Some(u)) => map.push(u),
            (None, None) => unreachable!(),
        }
    }
    (0..union.len()).all(|i| {
        (0..union.len()).all(|j| space.dist(union[i], union[j]) == space.dist(map[i], map[j]))
    })
}
