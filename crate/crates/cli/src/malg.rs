//! Measure-algebra instances.

use std::collections::BTreeMap;

use eppa::malg::{
    extend_partial_automorphisms, good_check_with, refinement_parents, verify_extension_malg_with, Algebra,
    CellSpace, MAX_VERIFY_ATOMS,
};
use eppa::{Error, ExactField, Result, Scalar};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::instance::{scalar_text, MalgPayload};
use crate::{Checked, Settings};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraJson {
    pub cells: BTreeMap<String, String>,
    pub atoms: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepJson {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub shrunk_pairs: usize,
    pub skipped: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MalgResult {
    /// Common denominator when every atom measure is rational.
    pub uniform: Option<u64>,
    pub refined: AlgebraJson,
    /// Input atom containing each refined atom.
    pub atom_parent: Vec<usize>,
    pub steps: Vec<StepJson>,
}

pub fn build_algebra(p: &MalgPayload) -> Result<Algebra<Scalar>> {
    let names: Vec<String> = p.cells.keys().cloned().collect();
    let measures = p.cells.values().map(|s| s.parse()).collect::<Result<Vec<_>>>()?;
    let cells = CellSpace::new(names.clone(), measures)?;
    match &p.atoms {
        Some(atoms) => Algebra::from_names(cells, atoms),
        None => Ok(Algebra::discrete(cells)),
    }
}

fn algebra_json(a: &Algebra<Scalar>) -> AlgebraJson {
    let cs = a.cells();
    AlgebraJson {
        cells: (0..cs.len()).map(|c| (cs.name(c).to_string(), scalar_text(cs.measure(c)))).collect(),
        atoms: a
            .atoms()
            .iter()
            .map(|atom| atom.iter().map(|&c| cs.name(c).to_string()).collect())
            .collect(),
    }
}

fn algebra_of(j: &AlgebraJson) -> Result<Algebra<Scalar>> {
    let names: Vec<String> = j.cells.keys().cloned().collect();
    let measures = j.cells.values().map(|s| Scalar::parse_scalar(s)).collect::<Result<Vec<_>>>()?;
    Algebra::from_names(CellSpace::new(names, measures)?, &j.atoms)
}

pub fn extend(p: &MalgPayload, settings: &Settings) -> Result<(Value, Checked)> {
    let a = build_algebra(p)?;
    let ext = extend_partial_automorphisms(&a)?;
    let out = MalgResult {
        uniform: ext.uniform,
        refined: algebra_json(&ext.refinement.fine),
        atom_parent: ext.refinement.atom_parent.clone(),
        steps: ext
            .steps
            .iter()
            .map(|s| StepJson {
                a: s.a_elem.clone(),
                b: s.b_elem.clone(),
                shrunk_pairs: s.shrunk_pairs,
                skipped: s.skipped,
            })
            .collect(),
    };
    let value = serde_json::to_value(&out).unwrap();
    let checked = verify(p, &value, settings)?;
    Ok((value, checked))
}

pub fn verify(p: &MalgPayload, result: &Value, _settings: &Settings) -> Result<Checked> {
    let coarse = build_algebra(p)?;
    let stored: MalgResult =
        serde_json::from_value(result.clone()).map_err(|e| Error::Malformed(format!("result file: {e}")))?;
    let fine = algebra_of(&stored.refined)?;
    let mut failures = Vec::new();
    // ancestry comes from cell names; a refinement that loses or moves mass fails here
    let parents = match refinement_parents(&coarse, &fine) {
        Ok(p) => p,
        Err(e) => {
            return Ok(Checked {
                passed: false,
                summary: json!({ "refined_atoms": fine.n_atoms() }),
                failures: vec![format!("not a refinement of the input: {e}")],
            })
        }
    };
    if parents != stored.atom_parent {
        failures.push("stored atom parents differ from the cell ancestry".into());
    }
    let good = good_check_with(&coarse, &fine, &parents);
    if let Some((i, j, pi, pj)) = &good.witness {
        failures.push(format!(
            "atoms {i} and {j} have equal measure but split as [{}] and [{}]",
            list(pi),
            list(pj)
        ));
    }
    let exhaustive = coarse.n_atoms() <= MAX_VERIFY_ATOMS;
    let mut maps = 0;
    if exhaustive {
        let rep = verify_extension_malg_with(&coarse, &fine, &parents)?;
        maps = rep.partial_automorphisms;
        if let Some(f) = &rep.failure {
            failures.push(format!(
                "partial automorphism {:?} -> {:?} does not extend: block {} splits as [{}] against [{}]",
                f.partial.dom,
                f.partial.rng,
                f.block,
                list(&f.dom_profile),
                list(&f.rng_profile)
            ));
        }
    }
    Ok(Checked {
        passed: failures.is_empty(),
        summary: json!({
            "atoms": coarse.n_atoms(),
            "refined_atoms": fine.n_atoms(),
            "good": good.good,
            "exhaustive": exhaustive,
            "partial_automorphisms": maps,
        }),
        failures,
    })
}

fn list(xs: &[Scalar]) -> String {
    xs.iter().map(scalar_text).collect::<Vec<_>>().join(", ")
}
