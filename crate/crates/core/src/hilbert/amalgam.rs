use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exact::{shared_discriminant, ExactField};

use super::linalg::{add, identity, mat_mul, mat_vec, scale, unit, Mat, Vector};
use super::space::{PartialLinearIsometry, QuadraticSpace, Subspace};
use super::witt::{reflection_matrix, witt_extend};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrthogonalAmalgam<T> {
    /// Copy of `B ⊖ C` orthogonal to `A`.
    pub d: Subspace<T>,
    /// Isometry from `C ⊕ D` (basis `C` then `D`) onto `B` fixing `C`.
    pub witness: PartialLinearIsometry<T>,
}

/// Largest absolute coefficient tried when searching for a vector of a
/// given squared norm.
pub const COEFF_RANGE: i64 = 3;
/// Number of complement directions the search combines.
pub const SEARCH_DIRECTIONS: usize = 6;

fn combos(r: usize) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = vec![Vec::new()];
    for _ in 0..r {
        out = out
            .into_iter()
            .flat_map(|v| {
                (-COEFF_RANGE..=COEFF_RANGE).map(move |c| {
                    let mut w = v.clone();
                    w.push(c);
                    w
                })
            })
            .collect();
    }
    out.retain(|v| v.iter().any(|&c| c != 0));
    out.sort_by_key(|v| (v.iter().map(|c| c.abs()).sum::<i64>(), v.iter().map(|c| (c.abs(), *c < 0)).collect::<Vec<_>>()));
    out
}

/// A vector in the span of the orthogonal list `k` with squared norm
/// `target`, found among small integer combinations rescaled by a square
/// root in the working field.
fn vector_of_norm<T: ExactField>(
    space: &QuadraticSpace<T>,
    k: &[Vector<T>],
    target: &T,
    context: &mut Option<u64>,
) -> Option<(Vector<T>, Vector<T>)> {
    let dirs = &k[..k.len().min(SEARCH_DIRECTIONS)];
    let norms: Vec<T> = dirs.iter().map(|v| space.norm2(v)).collect();
    for cs in combos(dirs.len()) {
        let h2 = cs
            .iter()
            .zip(&norms)
            .fold(T::zero(), |s, (&c, n)| s + T::from_integer(c * c) * n.clone());
        let Some(t) = (target.clone() / h2).sqrt_exact() else {
            continue;
        };
        match (*context, t.discriminant()) {
            (Some(a), Some(b)) if a != b => continue,
            (None, Some(b)) => *context = Some(b),
            _ => {}
        }
        let h = cs
            .iter()
            .zip(dirs)
            .fold(vec![T::zero(); space.dim()], |acc, (&c, v)| add(&acc, &scale(&T::from_integer(c), v)));
        return Some((scale(&t, &h), h));
    }
    None
}

/// Places a copy of `B ⊖ C` orthogonal to `A`.
pub fn orthogonal_amalgam<T: ExactField>(
    space: &QuadraticSpace<T>,
    a: &Subspace<T>,
    b: &Subspace<T>,
    c: &Subspace<T>,
) -> Result<OrthogonalAmalgam<T>> {
    if !a.contains_subspace(c) || !b.contains_subspace(c) {
        return Err(Error::Precondition("C is not contained in both A and B".into()));
    }
    let m = b.dim() - c.dim();
    let needed = a.dim() + m;
    if needed > space.dim() {
        return Err(Error::Capacity {
            needed,
            available: space.dim(),
        });
    }
    let c_orth = c.orthogonal_basis(space);
    let f: Vec<Vector<T>> = space.extend_orthogonal(&c_orth, b.basis())[c.dim()..].to_vec();
    let a_orth = a.orthogonal_basis(space);
    let units: Vec<Vector<T>> = (0..space.dim()).map(|i| unit(space.dim(), i)).collect();
    let mut k: Vec<Vector<T>> = space.extend_orthogonal(&a_orth, &units)[a.dim()..].to_vec();
    let mut context = match space.context() {
        Some(d) => Some(d),
        None => shared_discriminant(a.basis().iter().chain(b.basis()).chain(c.basis()).flatten())?,
    };
    let mut d = Vec::with_capacity(m);
    for fi in &f {
        let target = space.norm2(fi);
        let (di, h) = vector_of_norm(space, &k, &target, &mut context).ok_or_else(|| {
            Error::Unsupported(format!(
                "no vector of squared norm {target} found in the orthogonal complement over the working field"
            ))
        })?;
        k = space.extend_orthogonal(&[h], &k)[1..].to_vec();
        d.push(di);
    }
    let d = Subspace::new(space, d)?;
    let mut dom = c.basis().to_vec();
    dom.extend(d.basis().iter().cloned());
    let mut img = c.basis().to_vec();
    img.extend(f);
    let witness = PartialLinearIsometry::new(space, Subspace::new(space, dom)?, img)
        .map_err(|e| Error::Internal(format!("amalgam witness: {e}")))?;
    if d.basis().iter().any(|x| a.basis().iter().any(|y| !space.inner(x, y).is_zero())) {
        return Err(Error::Internal("D is not orthogonal to A".into()));
    }
    Ok(OrthogonalAmalgam { d, witness })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerpReport {
    /// `A ⊖ C ⊥ B ⊖ C`.
    pub perpendicular: bool,
    /// Indices into the orthogonal bases of `A ⊖ C` and `B ⊖ C` of a
    /// non-orthogonal pair.
    pub witness: Option<(usize, usize)>,
    pub pairs_checked: usize,
    pub failures: Vec<String>,
}

impl PerpReport {
    pub fn independent(&self) -> bool {
        self.perpendicular && self.failures.is_empty()
    }
}

fn random_in<T: ExactField>(rng: &mut ChaCha8Rng, basis: &[Vector<T>], n: usize) -> Option<Vector<T>> {
    if basis.is_empty() {
        return None;
    }
    loop {
        let cs: Vec<i64> = basis.iter().map(|_| rng.gen_range(-2..=2)).collect();
        if cs.iter().all(|&c| c == 0) {
            continue;
        }
        return Some(
            cs.iter()
                .zip(basis)
                .fold(vec![T::zero(); n], |acc, (&c, v)| add(&acc, &scale(&T::from_integer(c), v))),
        );
    }
}

/// Product of up to two random reflections along vectors of `basis`.
fn random_isometry<T: ExactField>(space: &QuadraticSpace<T>, rng: &mut ChaCha8Rng, basis: &[Vector<T>]) -> Result<Mat<T>> {
    let mut m = identity(space.dim());
    for _ in 0..rng.gen_range(0..=2) {
        if let Some(w) = random_in(rng, basis, space.dim()) {
            m = mat_mul(&reflection_matrix(space, &w)?, &m);
        }
    }
    Ok(m)
}

/// Checks `A ⊖ C ⊥ B ⊖ C` and, when it holds, glues `samples` random pairs of
/// automorphisms of `A` and `B` that agree on `C` and extends each union to
/// the whole space.
pub fn check_perp_independence<T: ExactField>(
    space: &QuadraticSpace<T>,
    a: &Subspace<T>,
    b: &Subspace<T>,
    c: &Subspace<T>,
    samples: usize,
    seed: u64,
) -> Result<PerpReport> {
    if !a.contains_subspace(c) || !b.contains_subspace(c) {
        return Err(Error::Precondition("C is not contained in both A and B".into()));
    }
    let c_orth = c.orthogonal_basis(space);
    let ac: Vec<Vector<T>> = space.extend_orthogonal(&c_orth, a.basis())[c.dim()..].to_vec();
    let bc: Vec<Vector<T>> = space.extend_orthogonal(&c_orth, b.basis())[c.dim()..].to_vec();
    let mut report = PerpReport {
        perpendicular: true,
        witness: None,
        pairs_checked: 0,
        failures: Vec::new(),
    };
    'outer: for (i, x) in ac.iter().enumerate() {
        for (j, y) in bc.iter().enumerate() {
            if !space.inner(x, y).is_zero() {
                report.perpendicular = false;
                report.witness = Some((i, j));
                break 'outer;
            }
        }
    }
    if !report.perpendicular {
        return Ok(report);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut basis = c_orth.clone();
    basis.extend(ac.iter().cloned());
    basis.extend(bc.iter().cloned());
    for s in 0..samples {
        let sigma = random_isometry(space, &mut rng, &c_orth)?;
        let f = mat_mul(&sigma, &random_isometry(space, &mut rng, &ac)?);
        let g = mat_mul(&sigma, &random_isometry(space, &mut rng, &bc)?);
        // each side is an automorphism of its subspace, checked through Witt
        for (name, m, sub) in [("A", &f, a), ("B", &g, b)] {
            let imgs: Vec<Vector<T>> = sub.basis().iter().map(|u| mat_vec(m, u)).collect();
            if imgs.iter().any(|v| !sub.contains(v)) {
                report.failures.push(format!("sample {s}: map does not preserve {name}"));
                continue;
            }
            if let Err(e) = PartialLinearIsometry::new(space, sub.clone(), imgs).and_then(|p| witt_extend(space, &p)) {
                report.failures.push(format!("sample {s}: automorphism of {name}: {e}"));
            }
        }
        if c_orth.iter().any(|u| mat_vec(&f, u) != mat_vec(&g, u)) {
            report.failures.push(format!("sample {s}: maps disagree on C"));
            continue;
        }
        let mut imgs: Vec<Vector<T>> = c_orth.iter().chain(&ac).map(|u| mat_vec(&f, u)).collect();
        imgs.extend(bc.iter().map(|u| mat_vec(&g, u)));
        let glued = Subspace::new(space, basis.clone())
            .and_then(|dom| PartialLinearIsometry::new(space, dom, imgs))
            .and_then(|h| witt_extend(space, &h));
        if let Err(e) = glued {
            report.failures.push(format!("sample {s}: union does not extend: {e}"));
        }
        report.pairs_checked += 1;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::BigRational;
    use num_traits::Zero;

    fn v(xs: &[i64]) -> Vector<BigRational> {
        xs.iter().map(|&x| BigRational::from_integer(x.into())).collect()
    }

    fn span(s: &QuadraticSpace<BigRational>, vs: &[&[i64]]) -> Subspace<BigRational> {
        Subspace::new(s, vs.iter().map(|x| v(x)).collect()).unwrap()
    }

    #[test]
    fn forced_orthogonal_direction() {
        let s = QuadraticSpace::standard(3).unwrap();
        let a = span(&s, &[&[1, 0, 0], &[0, 1, 0]]);
        let c = span(&s, &[&[1, 0, 0]]);
        let am = orthogonal_amalgam(&s, &a, &a, &c).unwrap();
        assert_eq!(am.d.dim(), 1);
        let d = &am.d.basis()[0];
        assert!(d[0].is_zero() && d[1].is_zero());
        assert_eq!(s.norm2(d), BigRational::from_integer(1.into()));
        let mut cd = c.basis().to_vec();
        cd.extend(am.d.basis().iter().cloned());
        let cd = Subspace::new(&s, cd).unwrap();
        assert!(check_perp_independence(&s, &a, &cd, &c, 8, 1).unwrap().independent());
    }

    #[test]
    fn c_equal_b_gives_zero() {
        let s = QuadraticSpace::standard(2).unwrap();
        let a = span(&s, &[&[1, 0]]);
        let am = orthogonal_amalgam(&s, &a, &a, &a).unwrap();
        assert_eq!(am.d.dim(), 0);
    }

    #[test]
    fn capacity_error() {
        let s = QuadraticSpace::standard(2).unwrap();
        let a = span(&s, &[&[1, 0], &[0, 1]]);
        let c = span(&s, &[&[1, 0]]);
        assert!(matches!(
            orthogonal_amalgam(&s, &a, &a, &c),
            Err(Error::Capacity { needed: 3, available: 2 })
        ));
    }

    #[test]
    fn perpendicularity() {
        let s = QuadraticSpace::standard(3).unwrap();
        let a = span(&s, &[&[1, 0, 0], &[0, 1, 0]]);
        let b = span(&s, &[&[1, 0, 0], &[0, 0, 1]]);
        let c = span(&s, &[&[1, 0, 0]]);
        let rep = check_perp_independence(&s, &a, &b, &c, 10, 3).unwrap();
        assert!(rep.independent());
        assert_eq!(rep.pairs_checked, 10);
        let rep = check_perp_independence(&s, &a, &a, &c, 10, 3).unwrap();
        assert!(!rep.perpendicular);
    }

    #[test]
    fn irrational_norm_adjoins_a_root() {
        use crate::Quadratic;
        let s = QuadraticSpace::<Quadratic>::new(identity(3)).unwrap();
        let q = |xs: &[i64]| xs.iter().map(|&x| Quadratic::from_integer(x)).collect::<Vec<_>>();
        // B ⊖ C spanned by (0,1,1) of norm 2, only e3 is free
        let a = Subspace::new(&s, vec![q(&[1, 0, 0]), q(&[0, 1, 0])]).unwrap();
        let b = Subspace::new(&s, vec![q(&[1, 0, 0]), q(&[0, 1, 1])]).unwrap();
        let c = Subspace::new(&s, vec![q(&[1, 0, 0])]).unwrap();
        let am = orthogonal_amalgam(&s, &a, &b, &c).unwrap();
        assert_eq!(am.d.basis()[0][2], Quadratic::sqrt(2));
        let sr = QuadraticSpace::<BigRational>::standard(3).unwrap();
        let ar = span(&sr, &[&[1, 0, 0], &[0, 1, 0]]);
        let br = span(&sr, &[&[1, 0, 0], &[0, 1, 1]]);
        let cr = span(&sr, &[&[1, 0, 0]]);
        assert!(matches!(orthogonal_amalgam(&sr, &ar, &br, &cr), Err(Error::Unsupported(_))));
    }
}
