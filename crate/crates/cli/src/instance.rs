//! Instance files: an envelope `{kind, payload, options}` or a bare payload.

use std::collections::BTreeMap;

use eppa::exact::shared_discriminant;
use eppa::{Error, ExactField, Result, Scalar};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Metric,
    Malg,
    Hilbert,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    pub budget_order: Option<usize>,
    pub max_degree: Option<usize>,
    pub oracle_depth: Option<usize>,
    pub seed: Option<u64>,
}

/// Scalars may be written as strings or as JSON integers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarText {
    Int(i64),
    Text(String),
}

impl ScalarText {
    pub fn parse(&self) -> Result<Scalar> {
        match self {
            ScalarText::Int(n) => Ok(<Scalar as ExactField>::from_integer(*n)),
            ScalarText::Text(s) => Scalar::parse_scalar(s),
        }
    }
}

pub fn scalar_text(x: &Scalar) -> String {
    x.to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsometrySpec {
    pub map: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricPayload {
    pub points: Vec<String>,
    pub d: Vec<Vec<ScalarText>>,
    #[serde(default)]
    pub partial_isometries: Vec<IsometrySpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MalgPayload {
    pub cells: BTreeMap<String, ScalarText>,
    /// Defaults to one atom per cell.
    pub atoms: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub domain: Vec<Vec<ScalarText>>,
    pub images: Vec<Vec<ScalarText>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmalgamSpec {
    pub a: Vec<Vec<ScalarText>>,
    pub b: Vec<Vec<ScalarText>>,
    #[serde(default)]
    pub c: Vec<Vec<ScalarText>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HilbertPayload {
    pub dim: usize,
    /// Defaults to the identity.
    pub gram: Option<Vec<Vec<ScalarText>>>,
    pub map: Option<MapSpec>,
    pub amalgam: Option<AmalgamSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    Metric(MetricPayload),
    Malg(MalgPayload),
    Hilbert(HilbertPayload),
}

impl Payload {
    pub fn kind(&self) -> Kind {
        match self {
            Payload::Metric(_) => Kind::Metric,
            Payload::Malg(_) => Kind::Malg,
            Payload::Hilbert(_) => Kind::Hilbert,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub payload: Payload,
    pub options: Options,
    /// sha256 of the kind and the canonical payload JSON.
    pub digest: String,
}

fn infer_kind(v: &Value) -> Option<Kind> {
    let obj = v.as_object()?;
    if obj.contains_key("points") {
        Some(Kind::Metric)
    } else if obj.contains_key("cells") {
        Some(Kind::Malg)
    } else if obj.contains_key("dim") {
        Some(Kind::Hilbert)
    } else {
        None
    }
}

fn schema(e: serde_json::Error) -> Error {
    Error::Malformed(e.to_string())
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let v: Value = serde_json::from_str(text).map_err(schema)?;
    let (kind, payload, options) = match v.get("payload") {
        Some(p) => {
            let obj = v.as_object().unwrap();
            if let Some(k) = obj.keys().find(|k| !matches!(k.as_str(), "kind" | "payload" | "options")) {
                return Err(Error::Malformed(format!("unknown envelope field {k:?}")));
            }
            let kind = match obj.get("kind") {
                Some(k) => serde_json::from_value(k.clone()).map_err(schema)?,
                None => infer_kind(p).ok_or_else(|| Error::Malformed("cannot infer the instance kind".into()))?,
            };
            let options: Options = match obj.get("options") {
                Some(o) => serde_json::from_value(o.clone()).map_err(schema)?,
                None => Options::default(),
            };
            (kind, p.clone(), options)
        }
        None => {
            let kind = infer_kind(&v).ok_or_else(|| Error::Malformed("cannot infer the instance kind".into()))?;
            (kind, v, Options::default())
        }
    };
    let typed = match kind {
        Kind::Metric => Payload::Metric(serde_json::from_value(payload.clone()).map_err(schema)?),
        Kind::Malg => Payload::Malg(serde_json::from_value(payload.clone()).map_err(schema)?),
        Kind::Hilbert => Payload::Hilbert(serde_json::from_value(payload.clone()).map_err(schema)?),
    };
    check_options(&options)?;
    check_discriminants(&typed)?;
    let mut h = Sha256::new();
    h.update(serde_json::to_string(&kind).unwrap());
    h.update(serde_json::to_string(&payload).unwrap());
    Ok(Instance {
        payload: typed,
        options,
        digest: format!("{:x}", h.finalize()),
    })
}

fn check_options(o: &Options) -> Result<()> {
    if o.budget_order == Some(0) {
        return Err(Error::Malformed("budget_order must be positive".into()));
    }
    if let Some(d) = o.max_degree {
        if !(1..=12).contains(&d) {
            return Err(Error::Malformed("max_degree must lie in 1..=12".into()));
        }
    }
    Ok(())
}

pub(crate) fn all_scalars(p: &Payload) -> Vec<&ScalarText> {
    fn rows(m: &[Vec<ScalarText>]) -> impl Iterator<Item = &ScalarText> {
        m.iter().flatten()
    }
    match p {
        Payload::Metric(m) => rows(&m.d).collect(),
        Payload::Malg(m) => m.cells.values().collect(),
        Payload::Hilbert(h) => {
            let mut out: Vec<&ScalarText> = h.gram.iter().flat_map(|g| rows(g)).collect();
            if let Some(m) = &h.map {
                out.extend(rows(&m.domain).chain(rows(&m.images)));
            }
            if let Some(a) = &h.amalgam {
                out.extend(rows(&a.a).chain(rows(&a.b)).chain(rows(&a.c)));
            }
            out
        }
    }
}

/// Every scalar in the file parses and they share one discriminant.
fn check_discriminants(p: &Payload) -> Result<()> {
    let values = all_scalars(p).into_iter().map(|s| s.parse()).collect::<Result<Vec<_>>>()?;
    shared_discriminant(values.iter())?;
    Ok(())
}

pub fn parse_matrix(m: &[Vec<ScalarText>]) -> Result<Vec<Vec<Scalar>>> {
    m.iter().map(|r| r.iter().map(|s| s.parse()).collect()).collect()
}
