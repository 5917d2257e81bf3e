use crate::error::{Error, Result};
use crate::exact::{shared_discriminant, ExactField};

use super::linalg::{is_zero_vec, mat_vec, rank, scale, sub, Mat, Vector};

/// `K^n` with a positive definite symmetric Gram matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadraticSpace<T> {
    gram: Mat<T>,
    context: Option<u64>,
}

impl<T: ExactField> QuadraticSpace<T> {
    pub fn new(gram: Mat<T>) -> Result<Self> {
        let n = gram.len();
        if n == 0 {
            return Err(Error::Malformed("dimension must be positive".into()));
        }
        if gram.iter().any(|r| r.len() != n) {
            return Err(Error::Malformed("Gram matrix is not square".into()));
        }
        let context = shared_discriminant(gram.iter().flatten())?;
        for i in 0..n {
            for j in 0..i {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::Malformed(format!("Gram matrix is not symmetric at ({i}, {j})")));
                }
            }
        }
        // pivots of symmetric elimination are the ratios of leading minors
        let mut m = gram.clone();
        for k in 0..n {
            if m[k][k] <= T::zero() {
                return Err(Error::Malformed(format!(
                    "Gram matrix is not positive definite (leading minor {} is not positive)",
                    k + 1
                )));
            }
            for i in (k + 1)..n {
                let f = m[i][k].clone() / m[k][k].clone();
                for j in k..n {
                    let v = m[i][j].clone() - f.clone() * m[k][j].clone();
                    m[i][j] = v;
                }
            }
        }
        Ok(QuadraticSpace { gram, context })
    }

    pub fn standard(n: usize) -> Result<Self> {
        Self::new(super::linalg::identity(n))
    }

    pub fn dim(&self) -> usize {
        self.gram.len()
    }

    pub fn gram(&self) -> &Mat<T> {
        &self.gram
    }

    /// Discriminant of the Gram entries, if any is irrational.
    pub fn context(&self) -> Option<u64> {
        self.context
    }

    pub fn inner(&self, u: &[T], v: &[T]) -> T {
        super::linalg::dot(u, &mat_vec(&self.gram, v))
    }

    pub fn norm2(&self, v: &[T]) -> T {
        self.inner(v, v)
    }

    /// `(⟨u_i, u_j⟩)` for a list of vectors.
    pub fn gram_of(&self, vs: &[Vector<T>]) -> Mat<T> {
        vs.iter().map(|u| vs.iter().map(|v| self.inner(u, v)).collect()).collect()
    }

    /// `v` minus its projection onto the span of an orthogonal list.
    pub fn project_out(&self, v: &[T], orth: &[Vector<T>]) -> Vector<T> {
        let mut out = v.to_vec();
        for b in orth {
            let c = self.inner(v, b) / self.norm2(b);
            out = sub(&out, &scale(&c, b));
        }
        out
    }

    /// Extends an orthogonal list by the nonzero projections of `candidates`.
    pub fn extend_orthogonal(&self, orth: &[Vector<T>], candidates: &[Vector<T>]) -> Vec<Vector<T>> {
        let mut all = orth.to_vec();
        for c in candidates {
            let p = self.project_out(c, &all);
            if !is_zero_vec(&p) {
                all.push(p);
            }
        }
        all
    }

    pub fn check_vector(&self, v: &[T]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::Malformed(format!("vector of length {} in dimension {}", v.len(), self.dim())));
        }
        if let (Some(a), Some(b)) = (self.context, shared_discriminant(v)?) {
            if a != b {
                return Err(Error::MixedDiscriminants(a, b));
            }
        }
        Ok(())
    }
}

/// A subspace given by a linearly independent spanning list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subspace<T> {
    basis: Vec<Vector<T>>,
}

impl<T: ExactField> Subspace<T> {
    pub fn new(space: &QuadraticSpace<T>, basis: Vec<Vector<T>>) -> Result<Self> {
        for v in &basis {
            space.check_vector(v)?;
        }
        if rank(&basis) != basis.len() {
            return Err(Error::Rank(format!("{} spanning vectors are linearly dependent", basis.len())));
        }
        Ok(Subspace { basis })
    }

    pub fn zero() -> Self {
        Subspace { basis: Vec::new() }
    }

    pub fn basis(&self) -> &[Vector<T>] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn contains(&self, v: &[T]) -> bool {
        let mut vs = self.basis.clone();
        vs.push(v.to_vec());
        rank(&vs) == self.basis.len()
    }

    pub fn contains_subspace(&self, other: &Subspace<T>) -> bool {
        other.basis.iter().all(|v| self.contains(v))
    }

    /// Orthogonal basis of the same span.
    pub fn orthogonal_basis(&self, space: &QuadraticSpace<T>) -> Vec<Vector<T>> {
        gram_schmidt(space, &self.basis).expect("basis is independent")
    }
}

/// Orthogonalizes an independent list without normalizing: `v_k` minus its
/// projections onto the earlier outputs.
pub fn gram_schmidt<T: ExactField>(space: &QuadraticSpace<T>, vs: &[Vector<T>]) -> Result<Vec<Vector<T>>> {
    let mut out: Vec<Vector<T>> = Vec::with_capacity(vs.len());
    for (k, v) in vs.iter().enumerate() {
        space.check_vector(v)?;
        let p = space.project_out(v, &out);
        if is_zero_vec(&p) {
            return Err(Error::Rank(format!("vector {k} lies in the span of the earlier ones")));
        }
        out.push(p);
    }
    Ok(out)
}

/// A linear isometry from the span of `domain` onto the span of `images`,
/// sending `domain[i]` to `images[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialLinearIsometry<T> {
    domain: Subspace<T>,
    images: Vec<Vector<T>>,
}

impl<T: ExactField> PartialLinearIsometry<T> {
    pub fn new(space: &QuadraticSpace<T>, domain: Subspace<T>, images: Vec<Vector<T>>) -> Result<Self> {
        if images.len() != domain.dim() {
            return Err(Error::Malformed(format!(
                "{} images for a domain of dimension {}",
                images.len(),
                domain.dim()
            )));
        }
        for v in &images {
            space.check_vector(v)?;
        }
        let g0 = space.gram_of(domain.basis());
        let g1 = space.gram_of(&images);
        for i in 0..g0.len() {
            for j in 0..g0.len() {
                if g0[i][j] != g1[i][j] {
                    return Err(Error::Malformed(format!(
                        "map does not preserve the inner product of basis vectors {i} and {j}: {} vs {}",
                        g0[i][j], g1[i][j]
                    )));
                }
            }
        }
        Ok(PartialLinearIsometry { domain, images })
    }

    pub fn domain(&self) -> &Subspace<T> {
        &self.domain
    }

    pub fn images(&self) -> &[Vector<T>] {
        &self.images
    }

    pub fn codomain(&self) -> Subspace<T> {
        // images of an independent list under an isometry stay independent
        Subspace {
            basis: self.images.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::BigRational;

    fn r(s: &str) -> BigRational {
        BigRational::parse_scalar(s).unwrap()
    }

    fn v(xs: &[&str]) -> Vector<BigRational> {
        xs.iter().map(|s| r(s)).collect()
    }

    #[test]
    fn positive_definiteness() {
        assert!(QuadraticSpace::new(vec![v(&["1", "0"]), v(&["0", "1"])]).is_ok());
        assert!(QuadraticSpace::new(vec![v(&["1", "2"]), v(&["2", "1"])]).is_err());
        assert!(QuadraticSpace::new(vec![v(&["1", "0"]), v(&["1", "1"])]).is_err());
        assert!(QuadraticSpace::new(vec![v(&["2", "1"]), v(&["1", "2"])]).is_ok());
    }

    #[test]
    fn gram_schmidt_examples() {
        let s = QuadraticSpace::<BigRational>::standard(3).unwrap();
        let e = vec![v(&["1", "0", "0"]), v(&["0", "1", "0"])];
        assert_eq!(gram_schmidt(&s, &e).unwrap(), e);
        let out = gram_schmidt(&s, &[v(&["1", "1", "0"]), v(&["0", "1", "1"])]).unwrap();
        assert_eq!(out, vec![v(&["1", "1", "0"]), v(&["-1/2", "1/2", "1"])]);
        assert!(matches!(
            gram_schmidt(&s, &[v(&["1", "1", "0"]), v(&["2", "2", "0"])]),
            Err(Error::Rank(_))
        ));
    }

    #[test]
    fn isometry_validation() {
        let s = QuadraticSpace::<BigRational>::standard(3).unwrap();
        let dom = Subspace::new(&s, vec![v(&["1", "1", "0"])]).unwrap();
        assert!(PartialLinearIsometry::new(&s, dom.clone(), vec![v(&["0", "1", "1"])]).is_ok());
        assert!(PartialLinearIsometry::new(&s, dom, vec![v(&["0", "1", "0"])]).is_err());
    }
}
