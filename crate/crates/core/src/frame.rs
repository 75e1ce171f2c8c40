//! Finite frames of discrete variables, their Cartesian products, and
//! configurations.
//!
//! A [`Frame`] for a set of variables enumerates its configurations in
//! row-major order over the canonical (name-sorted) variable order, with the
//! last variable varying fastest. Dense potential tables and focal-set bit
//! vectors are both indexed by this enumeration.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hypergraph::{fmt_vars, VarSet, VariableId};

/// A variable together with its ordered, non-empty list of value labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    id: VariableId,
    values: Arc<[String]>,
}

impl Variable {
    pub fn new(id: VariableId, values: Vec<String>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain(format!("variable {id} has an empty frame")));
        }
        for (i, v) in values.iter().enumerate() {
            if values[..i].contains(v) {
                return Err(Error::domain(format!("variable {id} repeats value {v:?}")));
            }
        }
        Ok(Variable {
            id,
            values: values.into(),
        })
    }

    pub fn id(&self) -> &VariableId {
        &self.id
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }

    pub fn cardinality(&self) -> usize {
        self.values.len()
    }

    pub fn value_index(&self, label: &str) -> Option<usize> {
        self.values.iter().position(|v| v == label)
    }
}

/// One value per variable of some domain.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Configuration(BTreeMap<VariableId, String>);

impl Configuration {
    pub fn new(assignment: BTreeMap<VariableId, String>) -> Self {
        Configuration(assignment)
    }

    pub fn domain(&self) -> VarSet {
        self.0.keys().cloned().collect()
    }

    pub fn get(&self, var: &VariableId) -> Option<&str> {
        self.0.get(var).map(String::as_str)
    }

    pub fn values(&self) -> impl Iterator<Item = &str> {
        self.0.values().map(String::as_str)
    }

    /// Drops the coordinates outside `target`.
    pub fn project(&self, target: &VarSet) -> Result<Configuration> {
        if target.is_empty() {
            return Err(Error::domain(
                "cannot project a configuration onto no variables",
            ));
        }
        target
            .iter()
            .map(|v| match self.0.get(v) {
                Some(x) => Ok((v.clone(), x.clone())),
                None => Err(Error::domain(format!(
                    "{v} is not assigned by a configuration of {}",
                    fmt_vars(&self.domain())
                ))),
            })
            .collect::<Result<_>>()
            .map(Configuration)
    }
}

/// The product frame of a set of variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    vars: Arc<[Variable]>,
}

impl Frame {
    pub fn new(mut vars: Vec<Variable>) -> Result<Self> {
        vars.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = vars.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(Error::domain(format!("variable {} listed twice", w[0].id)));
        }
        Ok(Frame { vars: vars.into() })
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn domain(&self) -> VarSet {
        self.vars.iter().map(|v| v.id.clone()).collect()
    }

    pub fn contains(&self, id: &VariableId) -> bool {
        self.position(id).is_some()
    }

    fn position(&self, id: &VariableId) -> Option<usize> {
        self.vars.binary_search_by(|v| v.id.cmp(id)).ok()
    }

    /// Number of configurations.
    pub fn size(&self) -> usize {
        self.vars.iter().map(Variable::cardinality).product()
    }

    /// Frame over the union of both domains. Shared variables must carry
    /// identical value lists.
    pub fn union(&self, other: &Frame) -> Result<Frame> {
        let mut merged: BTreeMap<&VariableId, &Variable> =
            self.vars.iter().map(|v| (&v.id, v)).collect();
        for v in other.vars.iter() {
            match merged.get(&v.id) {
                Some(existing) if existing.values != v.values => {
                    return Err(Error::domain(format!(
                        "variable {} has different frames in the two operands",
                        v.id
                    )))
                }
                Some(_) => {}
                None => {
                    merged.insert(&v.id, v);
                }
            }
        }
        Ok(Frame {
            vars: merged.into_values().cloned().collect(),
        })
    }

    /// The sub-frame over `target`, which must be a subset of this domain.
    pub fn restrict(&self, target: &VarSet) -> Result<Frame> {
        let vars = target
            .iter()
            .map(|id| {
                self.position(id)
                    .map(|p| self.vars[p].clone())
                    .ok_or_else(|| {
                        Error::domain(format!(
                            "{} is not a subset of {}",
                            fmt_vars(target),
                            fmt_vars(&self.domain())
                        ))
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Frame { vars: vars.into() })
    }

    /// For every configuration index of `self`, the index of its projection
    /// in `sub`. `sub` must be a sub-frame of `self`.
    pub fn projection_map(&self, sub: &Frame) -> Result<Vec<usize>> {
        let mut sub_strides = vec![0usize; self.vars.len()];
        let mut stride = 1;
        for sv in sub.vars.iter().rev() {
            let p = self
                .position(&sv.id)
                .filter(|&p| self.vars[p].values == sv.values)
                .ok_or_else(|| {
                    Error::domain(format!(
                        "{} is not a sub-frame of {}",
                        fmt_vars(&sub.domain()),
                        fmt_vars(&self.domain())
                    ))
                })?;
            sub_strides[p] = stride;
            stride *= sv.cardinality();
        }
        let cards: Vec<usize> = self.vars.iter().map(Variable::cardinality).collect();
        let size = self.size();
        let mut out = Vec::with_capacity(size);
        let mut digits = vec![0usize; cards.len()];
        let mut j = 0usize;
        for _ in 0..size {
            out.push(j);
            for k in (0..cards.len()).rev() {
                digits[k] += 1;
                j += sub_strides[k];
                if digits[k] < cards[k] {
                    break;
                }
                j -= cards[k] * sub_strides[k];
                digits[k] = 0;
            }
        }
        Ok(out)
    }

    /// The configuration at row-major position `index`.
    pub fn configuration(&self, mut index: usize) -> Configuration {
        assert!(index < self.size(), "configuration index out of range");
        let mut labels = vec![String::new(); self.vars.len()];
        for (k, v) in self.vars.iter().enumerate().rev() {
            labels[k] = v.values[index % v.cardinality()].clone();
            index /= v.cardinality();
        }
        Configuration(
            self.vars
                .iter()
                .zip(labels)
                .map(|(v, l)| (v.id.clone(), l))
                .collect(),
        )
    }

    /// Row-major position of a configuration of exactly this domain.
    pub fn index_of(&self, config: &Configuration) -> Result<usize> {
        if config.0.len() != self.vars.len() {
            return Err(Error::domain(format!(
                "configuration of {} does not match frame of {}",
                fmt_vars(&config.domain()),
                fmt_vars(&self.domain())
            )));
        }
        let mut index = 0;
        for v in self.vars.iter() {
            let label = config
                .get(&v.id)
                .ok_or_else(|| Error::domain(format!("configuration does not assign {}", v.id)))?;
            let x = v
                .value_index(label)
                .ok_or_else(|| Error::domain(format!("{label:?} is not a value of {}", v.id)))?;
            index = index * v.cardinality() + x;
        }
        Ok(index)
    }
}

/// Frames of every variable in a model, keyed by name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Frames {
    vars: BTreeMap<VariableId, Variable>,
}

impl Frames {
    pub fn new(vars: impl IntoIterator<Item = Variable>) -> Result<Self> {
        let mut out = Frames::default();
        for v in vars {
            if out.vars.contains_key(&v.id) {
                return Err(Error::domain(format!("variable {} declared twice", v.id)));
            }
            out.vars.insert(v.id.clone(), v);
        }
        Ok(out)
    }

    pub fn get(&self, id: &VariableId) -> Option<&Variable> {
        self.vars.get(id)
    }

    pub fn variables(&self) -> impl Iterator<Item = &Variable> {
        self.vars.values()
    }

    pub fn frame(&self, domain: &VarSet) -> Result<Frame> {
        domain
            .iter()
            .map(|id| {
                self.vars
                    .get(id)
                    .cloned()
                    .ok_or_else(|| Error::domain(format!("variable {id} is not declared")))
            })
            .collect::<Result<Vec<_>>>()
            .and_then(Frame::new)
    }

    /// True if every variable of `frame` is declared here with the same values.
    pub fn agrees_with(&self, frame: &Frame) -> bool {
        frame
            .variables()
            .iter()
            .all(|v| self.vars.get(&v.id) == Some(v))
    }
}
