//! Probability potentials: dense non-negative tables, combined by pointwise
//! multiplication and marginalized by summing out variables.

use crate::error::{Error, Result};
use crate::frame::{Configuration, Frame};
use crate::hypergraph::{fmt_vars, VarSet};
use crate::valuation::{check_marginal_target, Valuation};

/// A non-negative table over a frame, not identically zero, stored in the
/// frame's row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    frame: Frame,
    values: Vec<f64>,
}

impl Potential {
    pub fn new(frame: Frame, values: Vec<f64>) -> Result<Self> {
        if values.len() != frame.size() {
            return Err(Error::domain(format!(
                "a potential on {} needs {} values, got {}",
                fmt_vars(&frame.domain()),
                frame.size(),
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::domain(format!(
                "potential value {bad} is not a finite non-negative number"
            )));
        }
        if values.iter().all(|v| *v == 0.0) {
            return Err(Error::domain("potential values are all zero"));
        }
        Ok(Potential { frame, values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_at(&self, config: &Configuration) -> Result<f64> {
        Ok(self.values[self.frame.index_of(config)?])
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Scales the table to sum to one.
    pub fn normalize(&self) -> Potential {
        let total = self.total();
        Potential {
            frame: self.frame.clone(),
            values: self.values.iter().map(|v| v / total).collect(),
        }
    }
}

impl Valuation for Potential {
    fn frame(&self) -> &Frame {
        &self.frame
    }

    fn combine(&self, other: &Self) -> Result<Self> {
        let frame = self.frame.union(&other.frame)?;
        let left = frame.projection_map(&self.frame)?;
        let right = frame.projection_map(&other.frame)?;
        let values: Vec<f64> = left
            .iter()
            .zip(&right)
            .map(|(&i, &j)| self.values[i] * other.values[j])
            .collect();
        if values.iter().all(|v| *v == 0.0) {
            return Err(Error::UndefinedCombination(format!(
                "product of potentials on {} and {} is zero everywhere",
                fmt_vars(&self.frame.domain()),
                fmt_vars(&other.frame.domain())
            )));
        }
        Ok(Potential { frame, values })
    }

    fn marginalize(&self, target: &VarSet) -> Result<Self> {
        let domain = self.frame.domain();
        check_marginal_target(&domain, target)?;
        if *target == domain {
            return Ok(self.clone());
        }
        let frame = self.frame.restrict(target)?;
        let map = self.frame.projection_map(&frame)?;
        let mut values = vec![0.0; frame.size()];
        for (&j, v) in map.iter().zip(&self.values) {
            values[j] += v;
        }
        Ok(Potential { frame, values })
    }

    fn identity(frame: &Frame) -> Self {
        Potential {
            frame: frame.clone(),
            values: vec![1.0; frame.size()],
        }
    }

    /// Same frame and every entry within `tol` relative.
    fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.frame == other.frame
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a == b || (a - b).abs() <= tol * a.abs().max(b.abs()))
    }
}
