use std::collections::{BTreeMap, HashSet};

use crate::error::{Error, Result};
use crate::exact::ExactField;

/// A finite metric space with exact distances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteMetricSpace<T> {
    labels: Vec<String>,
    d: Vec<Vec<T>>,
    // None for a single point
    delta: Option<T>,
    diameter: T,
    m: usize,
}

/// Checks the metric axioms exactly and caches `δ`, `Δ` and `M`.
pub fn validate_space<T: ExactField>(labels: Vec<String>, d: Vec<Vec<T>>) -> Result<FiniteMetricSpace<T>> {
    let n = labels.len();
    if n == 0 {
        return Err(Error::Malformed("metric space has no points".into()));
    }
    if d.len() != n || d.iter().any(|row| row.len() != n) {
        return Err(Error::Malformed(format!("distance matrix is not {n}x{n}")));
    }
    let mut seen = HashSet::new();
    for l in &labels {
        if !seen.insert(l) {
            return Err(Error::Malformed(format!("duplicate point label {l:?}")));
        }
    }
    for i in 0..n {
        if !d[i][i].is_zero() {
            return Err(Error::Malformed(format!("d({0},{0}) is not zero", labels[i])));
        }
        for j in 0..n {
            if d[i][j] != d[j][i] {
                return Err(Error::Malformed(format!(
                    "d({},{}) != d({},{})",
                    labels[i], labels[j], labels[j], labels[i]
                )));
            }
            if i != j && d[i][j] <= T::zero() {
                return Err(Error::Malformed(format!(
                    "d({},{}) must be positive",
                    labels[i], labels[j]
                )));
            }
        }
    }
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                if d[x][z] > d[x][y].clone() + d[y][z].clone() {
                    return Err(Error::TriangleViolation {
                        x: labels[x].clone(),
                        y: labels[y].clone(),
                        z: labels[z].clone(),
                    });
                }
            }
        }
    }
    let off_diagonal = || (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)));
    let delta = off_diagonal().map(|(i, j)| d[i][j].clone()).min();
    let diameter = off_diagonal().map(|(i, j)| d[i][j].clone()).max().unwrap_or_else(T::zero);
    let m = match &delta {
        None => 1,
        Some(delta) => least_multiple_above(delta, &diameter),
    };
    Ok(FiniteMetricSpace {
        labels,
        d,
        delta,
        diameter,
        m,
    })
}

/// Least `m ≥ 1` with `m·delta > bound`.
fn least_multiple_above<T: ExactField>(delta: &T, bound: &T) -> usize {
    let estimate = (bound.to_f64() / delta.to_f64()).floor();
    let mut m = if estimate.is_finite() && estimate > 2.0 {
        estimate as usize - 1
    } else {
        1
    };
    let times = |k: usize| T::from_integer(k as i64) * delta.clone();
    while m > 1 && times(m - 1) > *bound {
        m -= 1;
    }
    while times(m) <= *bound {
        m += 1;
    }
    m
}

impl<T: ExactField> FiniteMetricSpace<T> {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn dist(&self, x: usize, y: usize) -> &T {
        &self.d[x][y]
    }

    pub fn matrix(&self) -> &[Vec<T>] {
        &self.d
    }

    /// Minimum nonzero distance; `None` stands for `+∞` on a single point.
    pub fn delta(&self) -> Option<&T> {
        self.delta.as_ref()
    }

    pub fn diameter(&self) -> &T {
        &self.diameter
    }

    /// Least integer `M` with `M·δ > Δ`.
    pub fn chain_bound(&self) -> usize {
        self.m
    }

    /// The subspace on `points`, in the given order.
    pub fn subspace(&self, points: &[usize]) -> Result<FiniteMetricSpace<T>> {
        let labels = points.iter().map(|&i| self.labels[i].clone()).collect();
        let d = points
            .iter()
            .map(|&i| points.iter().map(|&j| self.d[i][j].clone()).collect())
            .collect();
        validate_space(labels, d)
    }
}

/// A partial injective map on the points of a space, preserving distances.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PartialIsometry {
    map: BTreeMap<usize, usize>,
}

impl PartialIsometry {
    pub fn new<T: ExactField>(space: &FiniteMetricSpace<T>, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut image = HashSet::new();
        for (x, y) in pairs {
            if x >= space.len() || y >= space.len() {
                return Err(Error::Malformed(format!("point index out of range in ({x}, {y})")));
            }
            if map.insert(x, y).is_some() {
                return Err(Error::Malformed(format!("{} mapped twice", space.labels()[x])));
            }
            if !image.insert(y) {
                return Err(Error::Malformed(format!("{} hit twice", space.labels()[y])));
            }
        }
        for (&a, &fa) in &map {
            for (&b, &fb) in &map {
                if space.dist(a, b) != space.dist(fa, fb) {
                    return Err(Error::Precondition(format!(
                        "map does not preserve d({},{})",
                        space.labels()[a],
                        space.labels()[b]
                    )));
                }
            }
        }
        Ok(PartialIsometry { map })
    }

    pub fn identity_on<T: ExactField>(space: &FiniteMetricSpace<T>, points: &[usize]) -> Result<Self> {
        Self::new(space, points.iter().map(|&x| (x, x)))
    }

    pub fn get(&self, x: usize) -> Option<usize> {
        self.map.get(&x).copied()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.map.iter().map(|(&a, &b)| (a, b))
    }

    pub fn domain_len(&self) -> usize {
        self.map.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn r(s: &str) -> BigRational {
        BigRational::parse_scalar(s).unwrap()
    }

    fn space(labels: &[&str], d: &[&[&str]]) -> Result<FiniteMetricSpace<BigRational>> {
        validate_space(
            labels.iter().map(|s| s.to_string()).collect(),
            d.iter().map(|row| row.iter().map(|s| r(s)).collect()).collect(),
        )
    }

    #[test]
    fn two_points() {
        let s = space(&["x", "y"], &[&["0", "1"], &["1", "0"]]).unwrap();
        assert_eq!(s.delta(), Some(&r("1")));
        assert_eq!(s.diameter(), &r("1"));
        assert_eq!(s.chain_bound(), 2);
    }

    #[test]
    fn three_points() {
        let s = space(
            &["a", "b", "c"],
            &[&["0", "1", "2"], &["1", "0", "3/2"], &["2", "3/2", "0"]],
        )
        .unwrap();
        assert_eq!(s.delta(), Some(&r("1")));
        assert_eq!(s.diameter(), &r("2"));
        assert_eq!(s.chain_bound(), 3);
    }

    #[test]
    fn triangle_violation_names_the_triple() {
        let e = space(&["x", "y", "z"], &[&["0", "3", "1"], &["3", "0", "1"], &["1", "1", "0"]]).unwrap_err();
        assert_eq!(
            e,
            Error::TriangleViolation {
                x: "x".into(),
                y: "z".into(),
                z: "y".into()
            }
        );
    }

    #[test]
    fn single_point_sentinel() {
        let s = space(&["p"], &[&["0"]]).unwrap();
        assert_eq!(s.delta(), None);
        assert_eq!(s.chain_bound(), 1);
    }

    #[test]
    fn bound_with_small_delta() {
        assert_eq!(least_multiple_above(&r("1/7"), &r("3")), 22);
        assert_eq!(least_multiple_above(&r("1/3"), &r("2")), 7);
        assert_eq!(least_multiple_above(&r("2"), &r("2")), 2);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(space(&["x", "x"], &[&["0", "1"], &["1", "0"]]).is_err());
        assert!(space(&["x", "y"], &[&["0", "1"], &["2", "0"]]).is_err());
        assert!(space(&["x", "y"], &[&["0", "0"], &["0", "0"]]).is_err());
        assert!(space(&["x", "y"], &[&["0", "1"]]).is_err());
    }

    #[test]
    fn partial_isometry_checks() {
        let s = space(
            &["a", "b", "c"],
            &[&["0", "1", "2"], &["1", "0", "3/2"], &["2", "3/2", "0"]],
        )
        .unwrap();
        assert!(PartialIsometry::new(&s, [(0, 1), (1, 0)]).is_ok());
        assert!(PartialIsometry::new(&s, [(0, 1), (1, 2)]).is_err());
        assert!(PartialIsometry::new(&s, [(0, 1), (2, 1)]).is_err());
    }
}
