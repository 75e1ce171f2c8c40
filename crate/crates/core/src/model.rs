//! JSON model files and result records.
//!
//! A model declares the frame of every variable, names one algebra, and
//! lists factors:
//!
//! ```json
//! {
//!   "variables": { "X": ["x1", "x2"], "Y": ["y1", "y2"] },
//!   "algebra": "potential",
//!   "factors": [ { "domain": ["X", "Y"], "values": [1, 0, 2, 4] } ]
//! }
//! ```
//!
//! Potential values are dense and row-major over the factor's `domain` as
//! listed, last variable fastest. Belief factors carry
//! `"focal": [{ "set": [["x1", "y1"], ...], "mass": 0.5 }, ...]`, each
//! configuration listing values in `domain` order. Emitted records always use
//! the canonical (name-sorted) variable order, so they can be read back
//! unchanged.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belief::{MassFunction, Subset};
use crate::frame::{Configuration, Frame, Frames, Variable};
use crate::hypergraph::{VarSet, VariableId};
use crate::potential::Potential;
use crate::valuation::{Factorization, Valuation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algebra {
    Potential,
    Belief,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub variables: BTreeMap<String, Vec<String>>,
    pub algebra: Algebra,
    pub factors: Vec<FactorRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorRecord {
    pub domain: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub focal: Option<Vec<FocalRecord>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FocalRecord {
    pub set: Vec<Vec<String>>,
    pub mass: f64,
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl ToString) -> ModelError {
    ModelError::Invalid {
        field: field.into(),
        message: message.to_string(),
    }
}

/// A validated model in one of the two algebras.
#[derive(Debug, Clone)]
pub enum Model {
    Potential(Factorization<Potential>),
    Belief(Factorization<MassFunction>),
}

impl Model {
    pub fn algebra(&self) -> Algebra {
        match self {
            Model::Potential(_) => Algebra::Potential,
            Model::Belief(_) => Algebra::Belief,
        }
    }
}

pub fn parse_model(text: &str) -> Result<Model, ModelError> {
    let file: ModelFile = serde_json::from_str(text)?;
    file.into_model()
}

impl ModelFile {
    pub fn into_model(self) -> Result<Model, ModelError> {
        let vars = self
            .variables
            .iter()
            .map(|(name, values)| {
                let field = format!("variables.{name}");
                let id = VariableId::new(name.clone()).map_err(|e| invalid(&field, e))?;
                Variable::new(id, values.clone()).map_err(|e| invalid(&field, e))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let frames = Frames::new(vars).map_err(|e| invalid("variables", e))?;
        if self.factors.is_empty() {
            return Err(invalid("factors", "a model needs at least one factor"));
        }
        match self.algebra {
            Algebra::Potential => {
                let factors = self
                    .factors
                    .iter()
                    .enumerate()
                    .map(|(i, r)| potential_from_record(&frames, r, &format!("factors[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                Factorization::from_factors(frames, factors)
                    .map(Model::Potential)
                    .map_err(|e| invalid("factors", e))
            }
            Algebra::Belief => {
                let factors = self
                    .factors
                    .iter()
                    .enumerate()
                    .map(|(i, r)| mass_from_record(&frames, r, &format!("factors[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                Factorization::from_factors(frames, factors)
                    .map(Model::Belief)
                    .map_err(|e| invalid("factors", e))
            }
        }
    }
}

/// The factor's canonical frame and its variables in listed order.
fn listed_layout(
    frames: &Frames,
    domain: &[String],
    field: &str,
) -> Result<(Frame, Vec<Variable>), ModelError> {
    if domain.is_empty() {
        return Err(invalid(format!("{field}.domain"), "domain is empty"));
    }
    let mut listed = Vec::with_capacity(domain.len());
    let mut seen = BTreeSet::new();
    for name in domain {
        let id =
            VariableId::new(name.clone()).map_err(|e| invalid(format!("{field}.domain"), e))?;
        let var = frames.get(&id).ok_or_else(|| {
            invalid(
                format!("{field}.domain"),
                format!("variable {name} is not declared"),
            )
        })?;
        if !seen.insert(id) {
            return Err(invalid(
                format!("{field}.domain"),
                format!("variable {name} listed twice"),
            ));
        }
        listed.push(var.clone());
    }
    let frame = Frame::new(listed.clone()).map_err(|e| invalid(format!("{field}.domain"), e))?;
    Ok((frame, listed))
}

fn listed_index(listed: &[Variable], config: &Configuration) -> usize {
    listed.iter().fold(0, |acc, v| {
        let label = config
            .get(v.id())
            .expect("configuration of the same domain");
        acc * v.cardinality() + v.value_index(label).expect("label from the frame")
    })
}

fn potential_from_record(
    frames: &Frames,
    record: &FactorRecord,
    field: &str,
) -> Result<Potential, ModelError> {
    if record.focal.is_some() {
        return Err(invalid(
            format!("{field}.focal"),
            "belief factor in a potential model",
        ));
    }
    let values = record
        .values
        .as_ref()
        .ok_or_else(|| invalid(format!("{field}.values"), "missing"))?;
    let (frame, listed) = listed_layout(frames, &record.domain, field)?;
    if values.len() != frame.size() {
        return Err(invalid(
            format!("{field}.values"),
            format!("expected {} values, got {}", frame.size(), values.len()),
        ));
    }
    let canonical = (0..frame.size())
        .map(|i| values[listed_index(&listed, &frame.configuration(i))])
        .collect();
    Potential::new(frame, canonical).map_err(|e| invalid(format!("{field}.values"), e))
}

fn mass_from_record(
    frames: &Frames,
    record: &FactorRecord,
    field: &str,
) -> Result<MassFunction, ModelError> {
    if record.values.is_some() {
        return Err(invalid(
            format!("{field}.values"),
            "potential factor in a belief model",
        ));
    }
    let focal = record
        .focal
        .as_ref()
        .ok_or_else(|| invalid(format!("{field}.focal"), "missing"))?;
    let (frame, listed) = listed_layout(frames, &record.domain, field)?;
    let mut sets = Vec::with_capacity(focal.len());
    for (k, fr) in focal.iter().enumerate() {
        let sfield = format!("{field}.focal[{k}].set");
        let mut configs = Vec::with_capacity(fr.set.len());
        for (c, labels) in fr.set.iter().enumerate() {
            if labels.len() != listed.len() {
                return Err(invalid(
                    format!("{sfield}[{c}]"),
                    format!("expected {} values, got {}", listed.len(), labels.len()),
                ));
            }
            let assignment = listed
                .iter()
                .zip(labels)
                .map(|(v, l)| (v.id().clone(), l.clone()))
                .collect();
            configs.push(Configuration::new(assignment));
        }
        let subset =
            Subset::from_configurations(&frame, &configs).map_err(|e| invalid(&sfield, e))?;
        if subset.is_empty() {
            return Err(invalid(sfield, "focal sets must be non-empty"));
        }
        sets.push((subset, fr.mass));
    }
    MassFunction::new(frame, sets).map_err(|e| invalid(format!("{field}.focal"), e))
}

fn names(vars: &VarSet) -> Vec<String> {
    vars.iter().map(|v| v.as_str().to_owned()).collect()
}

/// Serialization of a valuation as a factor record in canonical order.
pub trait Record: Valuation {
    fn to_record(&self) -> FactorRecord;
}

impl Record for Potential {
    fn to_record(&self) -> FactorRecord {
        FactorRecord {
            domain: names(&self.domain()),
            values: Some(self.values().to_vec()),
            focal: None,
        }
    }
}

impl Record for MassFunction {
    fn to_record(&self) -> FactorRecord {
        let focal = self
            .focal_sets()
            .into_iter()
            .map(|(set, mass)| FocalRecord {
                set: set
                    .configurations()
                    .iter()
                    .map(|c| c.values().map(str::to_owned).collect())
                    .collect(),
                mass,
            })
            .collect();
        FactorRecord {
            domain: names(&self.domain()),
            values: None,
            focal: Some(focal),
        }
    }
}

/// Frame declarations in model-file form.
pub fn variables_record(frames: &Frames) -> BTreeMap<String, Vec<String>> {
    frames
        .variables()
        .map(|v| (v.id().as_str().to_owned(), v.values().to_vec()))
        .collect()
}
