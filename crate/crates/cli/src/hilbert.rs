//! Inner-product instances: Witt extension of a partial isometry and
//! orthogonal amalgams.

use eppa::exact::shared_discriminant;
use eppa::hilbert::linalg::{identity, mat_mul, mat_vec};
use eppa::hilbert::{
    check_perp_independence, orthogonal_amalgam, preserves_gram, reflection_matrix, witt_extend, Mat,
    PartialLinearIsometry, QuadraticSpace, Subspace,
};
use eppa::{Error, ExactField, Result, Scalar};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::instance::{all_scalars, parse_matrix, scalar_text, HilbertPayload, Payload, ScalarText};
use crate::{Checked, Settings};

/// Random automorphism pairs glued per amalgam check.
pub const PERP_SAMPLES: usize = 8;

type Rows = Vec<Vec<String>>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WittJson {
    pub matrix: Rows,
    /// Reflection vectors, applied first to last.
    pub reflections: Rows,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmalgamJson {
    pub d: Rows,
    /// Basis of `C` then `D`, and its images spanning `B`.
    pub witness_domain: Rows,
    pub witness_images: Rows,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HilbertResult {
    pub witt: Option<WittJson>,
    pub amalgam: Option<AmalgamJson>,
}

struct Built {
    space: QuadraticSpace<Scalar>,
    map: Option<PartialLinearIsometry<Scalar>>,
    amalgam: Option<(Subspace<Scalar>, Subspace<Scalar>, Subspace<Scalar>)>,
}

fn vectors(space: &QuadraticSpace<Scalar>, raw: &[Vec<ScalarText>]) -> Result<Vec<Vec<Scalar>>> {
    let vs = parse_matrix(raw)?;
    for v in &vs {
        space.check_vector(v)?;
    }
    Ok(vs)
}

fn build(p: &HilbertPayload) -> Result<Built> {
    let gram = match &p.gram {
        Some(g) => parse_matrix(g)?,
        None => identity(p.dim),
    };
    if gram.len() != p.dim {
        return Err(Error::Malformed(format!("gram has {} rows for dimension {}", gram.len(), p.dim)));
    }
    let space = QuadraticSpace::new(gram)?;
    if p.map.is_none() && p.amalgam.is_none() {
        return Err(Error::Malformed("nothing to do: give a map, an amalgam, or both".into()));
    }
    let map = match &p.map {
        Some(m) => {
            let dom = Subspace::new(&space, vectors(&space, &m.domain)?)?;
            Some(PartialLinearIsometry::new(&space, dom, vectors(&space, &m.images)?)?)
        }
        None => None,
    };
    let amalgam = match &p.amalgam {
        Some(a) => Some((
            Subspace::new(&space, vectors(&space, &a.a)?)?,
            Subspace::new(&space, vectors(&space, &a.b)?)?,
            Subspace::new(&space, vectors(&space, &a.c)?)?,
        )),
        None => None,
    };
    Ok(Built { space, map, amalgam })
}

fn rows_json(m: &[Vec<Scalar>]) -> Rows {
    m.iter().map(|r| r.iter().map(scalar_text).collect()).collect()
}

fn rows_of(m: &Rows) -> Result<Mat<Scalar>> {
    m.iter()
        .map(|r| r.iter().map(|s| Scalar::parse_scalar(s)).collect())
        .collect()
}

pub fn extend(p: &HilbertPayload, settings: &Settings) -> Result<(Value, Checked)> {
    let b = build(p)?;
    let witt = match &b.map {
        Some(phi) => {
            let ext = witt_extend(&b.space, phi)?;
            Some(WittJson {
                matrix: rows_json(&ext.matrix),
                reflections: rows_json(&ext.reflections),
            })
        }
        None => None,
    };
    let amalgam = match &b.amalgam {
        Some((a, bb, c)) => {
            let am = orthogonal_amalgam(&b.space, a, bb, c)?;
            Some(AmalgamJson {
                d: rows_json(am.d.basis()),
                witness_domain: rows_json(am.witness.domain().basis()),
                witness_images: rows_json(am.witness.images()),
            })
        }
        None => None,
    };
    let value = serde_json::to_value(HilbertResult { witt, amalgam }).unwrap();
    let checked = verify(p, &value, settings)?;
    Ok((value, checked))
}

fn same_span(space: &QuadraticSpace<Scalar>, vs: &[Vec<Scalar>], target: &Subspace<Scalar>) -> bool {
    match Subspace::new(space, vs.to_vec()) {
        Ok(s) => s.dim() == target.dim() && target.contains_subspace(&s),
        Err(_) => false,
    }
}

pub fn verify(p: &HilbertPayload, result: &Value, settings: &Settings) -> Result<Checked> {
    let b = build(p)?;
    let space = &b.space;
    let stored: HilbertResult =
        serde_json::from_value(result.clone()).map_err(|e| Error::Malformed(format!("result file: {e}")))?;
    // result scalars may adjoin a root, but only one shared with the instance
    let mut texts: Vec<&String> = Vec::new();
    if let Some(w) = &stored.witt {
        texts.extend(w.matrix.iter().chain(&w.reflections).flatten());
    }
    if let Some(am) = &stored.amalgam {
        texts.extend(am.d.iter().chain(&am.witness_domain).chain(&am.witness_images).flatten());
    }
    let mut all = texts.into_iter().map(|s| Scalar::parse_scalar(s)).collect::<Result<Vec<_>>>()?;
    for s in all_scalars(&Payload::Hilbert(p.clone())) {
        all.push(s.parse()?);
    }
    shared_discriminant(all.iter())?;
    let mut failures = Vec::new();
    let mut summary = serde_json::Map::new();
    match (&b.map, &stored.witt) {
        (Some(phi), Some(w)) => {
            let m = rows_of(&w.matrix)?;
            let n = space.dim();
            if m.len() != n || m.iter().any(|r| r.len() != n) {
                failures.push("Witt matrix has the wrong shape".into());
            } else {
                if !preserves_gram(space, &m) {
                    failures.push("MᵀGM differs from G".into());
                }
                for (i, (u, v)) in phi.domain().basis().iter().zip(phi.images()).enumerate() {
                    if &mat_vec(&m, u) != v {
                        failures.push(format!("M does not send domain vector {i} to its image"));
                    }
                }
                let mut prod = identity(n);
                for (i, r) in rows_of(&w.reflections)?.iter().enumerate() {
                    match reflection_matrix(space, r) {
                        Ok(rm) => {
                            if mat_mul(&rm, &rm) != identity(n) {
                                failures.push(format!("reflection {i} is not an involution"));
                            }
                            prod = mat_mul(&rm, &prod);
                        }
                        Err(e) => failures.push(format!("reflection {i}: {e}")),
                    }
                }
                if prod != m {
                    failures.push("product of the reflections differs from M".into());
                }
            }
            summary.insert("reflections".into(), json!(w.reflections.len()));
        }
        (None, None) => {}
        _ => failures.push("result and instance disagree on the map".into()),
    }
    match (&b.amalgam, &stored.amalgam) {
        (Some((a, bb, c)), Some(am)) => {
            let d = rows_of(&am.d)?;
            let dom = rows_of(&am.witness_domain)?;
            let img = rows_of(&am.witness_images)?;
            if d.len() != bb.dim() - c.dim() {
                failures.push(format!("D has {} vectors, expected dim B - dim C = {}", d.len(), bb.dim() - c.dim()));
            }
            let zero = Scalar::from_integer(0);
            if d.iter().any(|x| a.basis().iter().any(|y| space.inner(x, y) != zero)) {
                failures.push("D is not orthogonal to A".into());
            }
            let mut expected = c.basis().to_vec();
            expected.extend(d.iter().cloned());
            if dom != expected {
                failures.push("witness domain is not the basis of C followed by D".into());
            }
            if img.len() != dom.len() || space.gram_of(&dom) != space.gram_of(&img) {
                failures.push("witness does not preserve the Gram matrix".into());
            }
            if img.get(..c.dim()) != Some(c.basis()) {
                failures.push("witness moves C".into());
            }
            if !same_span(space, &img, bb) {
                failures.push("witness images do not span B".into());
            }
            if failures.is_empty() {
                let cd = Subspace::new(space, dom)?;
                let rep = check_perp_independence(space, a, &cd, c, PERP_SAMPLES, settings.seed)?;
                if let Some((i, j)) = rep.witness {
                    failures.push(format!("A ⊖ C and D are not perpendicular at ({i}, {j})"));
                }
                failures.extend(rep.failures.iter().cloned());
                summary.insert("perp_pairs_checked".into(), json!(rep.pairs_checked));
            }
            summary.insert("d_dim".into(), json!(d.len()));
        }
        (None, None) => {}
        _ => failures.push("result and instance disagree on the amalgam".into()),
    }
    Ok(Checked {
        passed: failures.is_empty(),
        summary: Value::Object(summary),
        failures,
    })
}
