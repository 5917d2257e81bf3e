//! Metric instances: extension, result files, verification and oracles.

use std::collections::HashMap;

use eppa::freegroup::oracle::{factorization_oracle, OracleVerdict};
use eppa::freegroup::{FiniteQuotient, Letter, OrbitAutomaton, SeparationBudget, Word};
use eppa::metric::{
    automaton_of, extend_isometries, validate_space, verify_data, Certificate, ExtensionData, FactorRecord,
    FiniteMetricSpace, PartialIsometry, SignatureRecord, Verdict,
};
use eppa::{Error, Result, Scalar};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::instance::{parse_matrix, scalar_text, MetricPayload};
use crate::{Checked, Settings, Status, MAX_LISTED};

/// Results with more classes store only the rows at `[x, e]`.
pub const FULL_MATRIX_LIMIT: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuotientJson {
    pub degrees: Vec<usize>,
    /// `[generator][factor]` images in one-line notation.
    pub images: Vec<Vec<Vec<u16>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignatureJson {
    pub pairs: Vec<(String, String)>,
    pub verdict: String,
    /// Signed letters, `k` for generator `k` and `-k` for its inverse.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<Vec<i32>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorJson {
    pub quotient: QuotientJson,
    pub tried_degrees: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateJson {
    pub chain_bound: usize,
    pub chains_considered: String,
    pub joint: bool,
    pub signatures: Vec<SignatureJson>,
    pub factors: Vec<FactorJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricResult {
    pub quotient: QuotientJson,
    pub group_order: usize,
    /// Least member `(point, element)` of each class.
    pub classes: Vec<(String, usize)>,
    /// `base_rows[x][c] = d_Y([x, e], c)`.
    pub base_rows: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_y: Option<Vec<Vec<String>>>,
    pub generator_perms: Vec<Vec<usize>>,
    pub embedding: Vec<usize>,
    pub certificate: CertificateJson,
}

pub fn build_space(p: &MetricPayload) -> Result<(FiniteMetricSpace<Scalar>, Vec<PartialIsometry>)> {
    let space = validate_space(p.points.clone(), parse_matrix(&p.d)?)?;
    let index = |s: &str| {
        space
            .index_of(s)
            .ok_or_else(|| Error::Malformed(format!("unknown point {s:?}")))
    };
    let mut isos = Vec::with_capacity(p.partial_isometries.len());
    for spec in &p.partial_isometries {
        let pairs = spec
            .map
            .iter()
            .map(|(a, b)| Ok((index(a)?, index(b)?)))
            .collect::<Result<Vec<_>>>()?;
        isos.push(PartialIsometry::new(&space, pairs)?);
    }
    Ok((space, isos))
}

fn quotient_json(q: &FiniteQuotient) -> QuotientJson {
    QuotientJson {
        degrees: q.degrees().to_vec(),
        images: q.generator_images().to_vec(),
    }
}

fn quotient_of(q: &QuotientJson) -> Result<FiniteQuotient> {
    FiniteQuotient::new(q.degrees.clone(), q.images.clone())
}

fn rows_json(m: &[Vec<Scalar>]) -> Vec<Vec<String>> {
    m.iter().map(|r| r.iter().map(scalar_text).collect()).collect()
}

fn rows_of(m: &[Vec<String>]) -> Result<Vec<Vec<Scalar>>> {
    m.iter()
        .map(|r| r.iter().map(|s| <Scalar as eppa::ExactField>::parse_scalar(s)).collect())
        .collect()
}

fn certificate_json(space: &FiniteMetricSpace<Scalar>, c: &Certificate) -> CertificateJson {
    let lbl = |i: usize| space.labels()[i].clone();
    CertificateJson {
        chain_bound: c.chain_bound,
        chains_considered: c.chains_considered.to_string(),
        joint: c.joint,
        signatures: c
            .signatures
            .iter()
            .map(|s| SignatureJson {
                pairs: s.pairs.iter().map(|&(a, b)| (lbl(a), lbl(b))).collect(),
                verdict: match s.verdict {
                    Verdict::Trivial { .. } => "trivial".into(),
                    Verdict::Nontrivial => "nontrivial".into(),
                },
                witness: match &s.verdict {
                    Verdict::Trivial { witness } => Some(witness.iter().map(Word::signed).collect()),
                    Verdict::Nontrivial => None,
                },
            })
            .collect(),
        factors: c
            .factors
            .iter()
            .map(|f| FactorJson {
                quotient: quotient_json(&f.quotient),
                tried_degrees: f.tried_degrees.clone(),
            })
            .collect(),
    }
}

fn certificate_of(space: &FiniteMetricSpace<Scalar>, n_generators: usize, c: &CertificateJson) -> Result<Certificate> {
    let index = |s: &str| {
        space
            .index_of(s)
            .ok_or_else(|| Error::Malformed(format!("certificate names unknown point {s:?}")))
    };
    let mut signatures = Vec::with_capacity(c.signatures.len());
    for s in &c.signatures {
        let pairs = s
            .pairs
            .iter()
            .map(|(a, b)| Ok((index(a)?, index(b)?)))
            .collect::<Result<Vec<_>>>()?;
        let verdict = match (s.verdict.as_str(), &s.witness) {
            ("trivial", Some(ws)) => {
                let witness = ws
                    .iter()
                    .map(|w| {
                        let letters = w
                            .iter()
                            .map(|&l| Letter::from_signed(l, n_generators))
                            .collect::<Result<Vec<_>>>()?;
                        Ok(Word::from_letters(letters))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Verdict::Trivial { witness }
            }
            ("nontrivial", None) => Verdict::Nontrivial,
            (v, _) => return Err(Error::Malformed(format!("bad signature verdict {v:?}"))),
        };
        signatures.push(SignatureRecord { pairs, verdict });
    }
    Ok(Certificate {
        chain_bound: c.chain_bound,
        chains_considered: c
            .chains_considered
            .parse()
            .map_err(|_| Error::Malformed("chains_considered is not an integer".into()))?,
        joint: c.joint,
        signatures,
        factors: c
            .factors
            .iter()
            .map(|f| {
                Ok(FactorRecord {
                    quotient: quotient_of(&f.quotient)?,
                    tried_degrees: f.tried_degrees.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?,
    })
}

fn budget(s: &Settings) -> SeparationBudget {
    SeparationBudget {
        max_degree: s.max_degree,
        max_order: s.budget_order,
    }
}

pub fn extend(p: &MetricPayload, settings: &Settings) -> Result<(Value, Checked)> {
    let (space, isos) = build_space(p)?;
    let r = extend_isometries(&space, &isos, budget(settings))?;
    let data = r.to_data(r.n_classes() <= FULL_MATRIX_LIMIT);
    let out = MetricResult {
        quotient: quotient_json(&data.quotient),
        group_order: r.group.order(),
        classes: data.classes.iter().map(|&(x, q)| (space.labels()[x].clone(), q)).collect(),
        base_rows: rows_json(&data.base_rows),
        d_y: data.full_matrix.as_deref().map(rows_json),
        generator_perms: data.generator_perms.clone(),
        embedding: data.embedding.clone(),
        certificate: certificate_json(&space, &data.certificate),
    };
    let value = serde_json::to_value(&out).unwrap();
    // the self-check reads the serialized form back, as `verify` would
    let checked = verify(p, &value, settings)?;
    Ok((value, checked))
}

pub fn verify(p: &MetricPayload, result: &Value, settings: &Settings) -> Result<Checked> {
    let (space, isos) = build_space(p)?;
    let stored: MetricResult =
        serde_json::from_value(result.clone()).map_err(|e| Error::Malformed(format!("result file: {e}")))?;
    let quotient = quotient_of(&stored.quotient)?;
    if quotient.n_generators() != isos.len() {
        return Err(Error::Malformed("result quotient does not match the number of isometries".into()));
    }
    let group = quotient.materialize(stored.group_order.max(settings.budget_order))?;
    let classes = stored
        .classes
        .iter()
        .map(|(l, q)| {
            space
                .index_of(l)
                .map(|x| (x, *q))
                .ok_or_else(|| Error::Malformed(format!("class names unknown point {l:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let data = ExtensionData {
        certificate: certificate_of(&space, isos.len(), &stored.certificate)?,
        quotient,
        classes,
        base_rows: rows_of(&stored.base_rows)?,
        full_matrix: stored.d_y.as_deref().map(rows_of).transpose()?,
        generator_perms: stored.generator_perms.clone(),
        embedding: stored.embedding.clone(),
    };
    let mut failures = Vec::new();
    if group.order() != stored.group_order {
        failures.push(format!(
            "quotient has order {}, result claims {}",
            group.order(),
            stored.group_order
        ));
    }
    let rep = verify_data(&space, &isos, &data, &group, settings.oracle_depth);
    failures.extend(rep.structure_failures.iter().cloned());
    failures.extend(rep.certificate_failures.iter().cloned());
    let lbl = |i: usize| space.labels()[i].as_str();
    for m in &rep.mismatches {
        failures.push(format!(
            "d_Y([{}, e], [{}, {}]) between classes ({}, {}): stored {}, chain value {}",
            lbl(m.x),
            lbl(m.y),
            m.w,
            m.classes.0,
            m.classes.1,
            m.shortest_path,
            m.chain_oracle
        ));
    }
    failures.extend(rep.claim_failures.iter().cloned());
    Ok(Checked {
        passed: failures.is_empty(),
        summary: json!({
            "classes": data.classes.len(),
            "group_order": group.order(),
            "signatures": data.certificate.signatures.len(),
            "triples_checked": rep.triples_checked,
            "mismatches": rep.mismatches.len(),
        }),
        failures,
    })
}

fn total_len(ws: &[Word]) -> usize {
    ws.iter().map(Word::len).sum()
}

/// One signature judged by the bounded factorization search and the stored
/// quotient: `agree`, `disagree`, or `inconclusive` when the search depth
/// cannot decide it.
fn judge(
    automaton: &OrbitAutomaton,
    group: &eppa::freegroup::QuotientGroup,
    s: &SignatureRecord,
    depth: usize,
) -> (&'static str, &'static str) {
    if depth == 0 {
        return ("skipped", "inconclusive");
    }
    let found = factorization_oracle(automaton, &s.pairs, depth);
    let status = match (&s.verdict, &found) {
        (Verdict::Trivial { .. }, OracleVerdict::Trivial(_)) => "agree",
        // the engine's witness fits the depth, so the search had to find one
        (Verdict::Trivial { witness }, OracleVerdict::NotFound) if total_len(witness) <= depth => "disagree",
        (Verdict::Trivial { .. }, OracleVerdict::NotFound) => "inconclusive",
        (Verdict::Nontrivial, OracleVerdict::Trivial(_)) => "disagree",
        (Verdict::Nontrivial, OracleVerdict::NotFound) if group.separates(automaton, &s.pairs) => "agree",
        (Verdict::Nontrivial, OracleVerdict::NotFound) => "inconclusive",
    };
    let oracle = match found {
        OracleVerdict::Trivial(_) => "trivial",
        OracleVerdict::NotFound => "not-found",
    };
    (oracle, status)
}

pub fn oracle(p: &MetricPayload, settings: &Settings) -> Result<(Status, Value)> {
    let (space, isos) = build_space(p)?;
    let r = extend_isometries(&space, &isos, budget(settings))?;
    let automaton = automaton_of(&space, &isos);
    let depth = settings.oracle_depth;
    let lbl = |i: usize| space.labels()[i].clone();
    let mut counts: HashMap<&str, usize> = HashMap::new();
    let mut entries = Vec::new();
    for s in &r.certificate.signatures {
        let (found, status) = judge(&automaton, &r.group, s, depth);
        *counts.entry(status).or_default() += 1;
        entries.push(json!({
            "pairs": s.pairs.iter().map(|&(a, b)| (lbl(a), lbl(b))).collect::<Vec<_>>(),
            "engine": if matches!(s.verdict, Verdict::Trivial { .. }) { "trivial" } else { "nontrivial" },
            "oracle": found,
            "status": status,
        }));
    }
    let triples = if depth == 0 {
        json!({ "status": "inconclusive" })
    } else {
        let rep = verify_data(&space, &isos, &r.to_data(false), &r.group, depth);
        let status = if rep.mismatches.is_empty() { "agree" } else { "disagree" };
        *counts.entry(status).or_default() += 1;
        json!({
            "status": status,
            "checked": rep.triples_checked,
            "mismatches": rep.mismatches.iter().take(MAX_LISTED).map(|m| json!({
                "x": lbl(m.x),
                "y": lbl(m.y),
                "w": m.w,
                "d_y": scalar_text(&m.shortest_path),
                "chains": scalar_text(&m.chain_oracle),
            })).collect::<Vec<_>>(),
        })
    };
    let disagree = counts.get("disagree").copied().unwrap_or(0);
    let inconclusive = counts.get("inconclusive").copied().unwrap_or(0) + usize::from(depth == 0);
    let status = if disagree > 0 { Status::VerificationFailed } else { Status::Ok };
    Ok((
        status,
        json!({
            "warning": inconclusive > 0,
            "agree": counts.get("agree").copied().unwrap_or(0),
            "disagree": disagree,
            "inconclusive": inconclusive,
            "signatures": entries,
            "triples": triples,
        }),
    ))
}
