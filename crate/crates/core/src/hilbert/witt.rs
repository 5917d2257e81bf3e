use crate::error::{Error, Result};
use crate::exact::ExactField;

use super::linalg::{identity, is_zero_vec, mat_mul, mat_vec, scale, sub, transpose, Mat, Vector};
use super::space::{PartialLinearIsometry, QuadraticSpace};

/// `r_w(v) = v − 2⟨v,w⟩/⟨w,w⟩ · w`.
pub fn reflect<T: ExactField>(space: &QuadraticSpace<T>, w: &[T], v: &[T]) -> Vector<T> {
    let c = (space.inner(v, w) + space.inner(v, w)) / space.norm2(w);
    sub(v, &scale(&c, w))
}

/// Matrix of `r_w`; its columns are the images of the unit vectors.
pub fn reflection_matrix<T: ExactField>(space: &QuadraticSpace<T>, w: &[T]) -> Result<Mat<T>> {
    space.check_vector(w)?;
    if is_zero_vec(w) {
        return Err(Error::Precondition("reflection along the zero vector".into()));
    }
    let n = space.dim();
    let cols: Mat<T> = (0..n).map(|i| reflect(space, w, &super::linalg::unit(n, i))).collect();
    Ok(transpose(&cols))
}

/// `MᵀGM = G`.
pub fn preserves_gram<T: ExactField>(space: &QuadraticSpace<T>, m: &Mat<T>) -> bool {
    &mat_mul(&mat_mul(&transpose(m), space.gram()), m) == space.gram()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WittExtension<T> {
    pub matrix: Mat<T>,
    /// Reflection vectors, applied first to last.
    pub reflections: Vec<Vector<T>>,
}

/// Extends `phi` to an isometry of the whole space as a product of at most
/// `dim(domain)` reflections.
pub fn witt_extend<T: ExactField>(space: &QuadraticSpace<T>, phi: &PartialLinearIsometry<T>) -> Result<WittExtension<T>> {
    let n = space.dim();
    let mut m = identity(n);
    let mut reflections = Vec::new();
    for (u, v) in phi.domain().basis().iter().zip(phi.images()) {
        let cur = mat_vec(&m, u);
        if &cur == v {
            continue;
        }
        // ⟨cur,cur⟩ = ⟨v,v⟩ and w ⊥ earlier images, so r_w fixes them
        let w = sub(&cur, v);
        m = mat_mul(&reflection_matrix(space, &w)?, &m);
        reflections.push(w);
    }
    let out = WittExtension { matrix: m, reflections };
    if !preserves_gram(space, &out.matrix) {
        return Err(Error::Internal("extension does not preserve the Gram matrix".into()));
    }
    if phi
        .domain()
        .basis()
        .iter()
        .zip(phi.images())
        .any(|(u, v)| &mat_vec(&out.matrix, u) != v)
    {
        return Err(Error::Internal("extension disagrees with the partial map".into()));
    }
    Ok(out)
}
