//! Belief functions, represented by their mass functions: probability
//! distributions over non-empty subsets of a frame.
//!
//! Subsets are bit vectors over the row-major enumeration of the frame.
//! Marginalization projects every focal set and merges equal images;
//! combination is Dempster's rule on vacuously extended focal sets.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::frame::{Configuration, Frame};
use crate::hypergraph::{fmt_vars, VarSet};
use crate::valuation::{check_marginal_target, Valuation};

/// Masses of an ingested mass function must sum to one within this.
pub const MASS_SUM_TOLERANCE: f64 = 1e-9;

/// A subset of a frame, possibly empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subset {
    frame: Frame,
    members: FixedBitSet,
}

impl Subset {
    pub fn new(frame: Frame, members: FixedBitSet) -> Result<Self> {
        if members.len() != frame.size() {
            return Err(Error::domain(format!(
                "subset has {} bits but the frame of {} has {} configurations",
                members.len(),
                fmt_vars(&frame.domain()),
                frame.size()
            )));
        }
        Ok(Subset { frame, members })
    }

    pub fn empty(frame: &Frame) -> Self {
        Subset {
            members: FixedBitSet::with_capacity(frame.size()),
            frame: frame.clone(),
        }
    }

    pub fn full(frame: &Frame) -> Self {
        let mut members = FixedBitSet::with_capacity(frame.size());
        members.insert_range(..);
        Subset {
            frame: frame.clone(),
            members,
        }
    }

    pub fn from_indices(frame: &Frame, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut members = FixedBitSet::with_capacity(frame.size());
        for i in indices {
            if i >= frame.size() {
                return Err(Error::domain(format!(
                    "configuration index {i} out of range"
                )));
            }
            members.insert(i);
        }
        Ok(Subset {
            frame: frame.clone(),
            members,
        })
    }

    pub fn from_configurations<'a>(
        frame: &Frame,
        configs: impl IntoIterator<Item = &'a Configuration>,
    ) -> Result<Self> {
        let indices = configs
            .into_iter()
            .map(|c| frame.index_of(c))
            .collect::<Result<Vec<_>>>()?;
        Subset::from_indices(frame, indices)
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn members(&self) -> &FixedBitSet {
        &self.members
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_clear()
    }

    pub fn len(&self) -> usize {
        self.members.count_ones(..)
    }

    /// Member positions in increasing row-major order.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.ones()
    }

    pub fn configurations(&self) -> Vec<Configuration> {
        self.indices()
            .map(|i| self.frame.configuration(i))
            .collect()
    }

    pub fn is_subset(&self, other: &Subset) -> bool {
        self.frame == other.frame && self.members.is_subset(&other.members)
    }

    /// Image under projection of every member onto `target`.
    pub fn project(&self, target: &VarSet) -> Result<Subset> {
        check_marginal_target(&self.frame.domain(), target)?;
        let frame = self.frame.restrict(target)?;
        let map = self.frame.projection_map(&frame)?;
        Ok(Subset {
            members: project_bits(&self.members, &map, frame.size()),
            frame,
        })
    }

    /// The cylinder over `target`: every configuration whose projection back
    /// onto this subset's domain is a member.
    pub fn vacuous_extension(&self, target: &Frame) -> Result<Subset> {
        let map = target.projection_map(&self.frame)?;
        Ok(Subset {
            members: extend_bits(&self.members, &map),
            frame: target.clone(),
        })
    }
}

/// Orders by member positions, lexicographically.
impl PartialOrd for Subset {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Subset {
    fn cmp(&self, other: &Self) -> Ordering {
        self.indices().cmp(other.indices())
    }
}

fn project_bits(bits: &FixedBitSet, map: &[usize], size: usize) -> FixedBitSet {
    let mut out = FixedBitSet::with_capacity(size);
    for i in bits.ones() {
        out.insert(map[i]);
    }
    out
}

fn extend_bits(bits: &FixedBitSet, map: &[usize]) -> FixedBitSet {
    let mut out = FixedBitSet::with_capacity(map.len());
    for (i, &j) in map.iter().enumerate() {
        if bits.contains(j) {
            out.insert(i);
        }
    }
    out
}

/// A mass function: strictly positive masses on non-empty focal sets,
/// summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct MassFunction {
    frame: Frame,
    masses: BTreeMap<FixedBitSet, f64>,
}

impl MassFunction {
    /// Repeated focal sets have their masses added. Masses are kept as given,
    /// provided they sum to one within [`MASS_SUM_TOLERANCE`].
    pub fn new(frame: Frame, focal: impl IntoIterator<Item = (Subset, f64)>) -> Result<Self> {
        let mut masses: BTreeMap<FixedBitSet, f64> = BTreeMap::new();
        for (set, mass) in focal {
            if set.frame != frame {
                return Err(Error::domain(format!(
                    "focal set on {} in a mass function on {}",
                    fmt_vars(&set.frame.domain()),
                    fmt_vars(&frame.domain())
                )));
            }
            if set.is_empty() {
                return Err(Error::domain("focal sets must be non-empty"));
            }
            if !(mass.is_finite() && mass > 0.0) {
                return Err(Error::domain(format!(
                    "mass {mass} is not a positive number"
                )));
            }
            *masses.entry(set.members).or_insert(0.0) += mass;
        }
        let total: f64 = masses.values().sum();
        if (total - 1.0).abs() > MASS_SUM_TOLERANCE {
            return Err(Error::domain(format!("masses sum to {total}, not 1")));
        }
        Ok(MassFunction { frame, masses })
    }

    /// Focal sets and their masses, in canonical member order.
    pub fn focal_sets(&self) -> Vec<(Subset, f64)> {
        let mut out: Vec<(Subset, f64)> = self
            .masses
            .iter()
            .map(|(bits, m)| {
                (
                    Subset {
                        frame: self.frame.clone(),
                        members: bits.clone(),
                    },
                    *m,
                )
            })
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn mass(&self, set: &Subset) -> f64 {
        if set.frame != self.frame {
            return 0.0;
        }
        self.masses.get(&set.members).copied().unwrap_or(0.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.values().sum()
    }

    /// Degree of belief: total mass of focal sets contained in `set`.
    pub fn belief(&self, set: &Subset) -> Result<f64> {
        if set.frame != self.frame {
            return Err(Error::domain(format!(
                "subset of the frame of {} queried against a belief function on {}",
                fmt_vars(&set.frame.domain()),
                fmt_vars(&self.frame.domain())
            )));
        }
        Ok(self
            .masses
            .iter()
            .filter(|(bits, _)| bits.is_subset(&set.members))
            .map(|(_, m)| m)
            .sum())
    }

    /// Beliefs for a batch of queried subsets.
    pub fn beliefs<'a>(
        &self,
        queries: impl IntoIterator<Item = &'a Subset>,
    ) -> Result<BeliefValues> {
        let values = queries
            .into_iter()
            .map(|q| Ok((q.clone(), self.belief(q)?)))
            .collect::<Result<_>>()?;
        Ok(BeliefValues {
            frame: self.frame.clone(),
            values,
        })
    }
}

/// Degrees of belief for queried subsets of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefValues {
    pub frame: Frame,
    pub values: BTreeMap<Subset, f64>,
}

impl BeliefValues {
    pub fn get(&self, set: &Subset) -> Option<f64> {
        self.values.get(set).copied()
    }
}

impl Valuation for MassFunction {
    fn frame(&self) -> &Frame {
        &self.frame
    }

    /// Dempster's rule.
    fn combine(&self, other: &Self) -> Result<Self> {
        let frame = self.frame.union(&other.frame)?;
        let left_map = frame.projection_map(&self.frame)?;
        let right_map = frame.projection_map(&other.frame)?;
        let left: Vec<(FixedBitSet, f64)> = self
            .masses
            .iter()
            .map(|(b, m)| (extend_bits(b, &left_map), *m))
            .collect();
        let right: Vec<(FixedBitSet, f64)> = other
            .masses
            .iter()
            .map(|(b, m)| (extend_bits(b, &right_map), *m))
            .collect();

        let mut joint: BTreeMap<FixedBitSet, f64> = BTreeMap::new();
        for (a, ma) in &left {
            for (b, mb) in &right {
                let mut both = a.clone();
                both.intersect_with(b);
                if !both.is_clear() {
                    *joint.entry(both).or_insert(0.0) += ma * mb;
                }
            }
        }
        let agreement: f64 = joint.values().sum();
        if agreement <= 0.0 {
            return Err(Error::UndefinedCombination(format!(
                "belief functions on {} and {} are in total conflict",
                fmt_vars(&self.frame.domain()),
                fmt_vars(&other.frame.domain())
            )));
        }
        for m in joint.values_mut() {
            *m /= agreement;
        }
        Ok(MassFunction {
            frame,
            masses: joint,
        })
    }

    fn marginalize(&self, target: &VarSet) -> Result<Self> {
        let domain = self.frame.domain();
        check_marginal_target(&domain, target)?;
        if *target == domain {
            return Ok(self.clone());
        }
        let frame = self.frame.restrict(target)?;
        let map = self.frame.projection_map(&frame)?;
        let mut masses: BTreeMap<FixedBitSet, f64> = BTreeMap::new();
        for (bits, m) in &self.masses {
            *masses
                .entry(project_bits(bits, &map, frame.size()))
                .or_insert(0.0) += m;
        }
        Ok(MassFunction { frame, masses })
    }

    /// The vacuous belief function: all mass on the whole frame.
    fn identity(frame: &Frame) -> Self {
        MassFunction {
            masses: BTreeMap::from([(Subset::full(frame).members, 1.0)]),
            frame: frame.clone(),
        }
    }

    /// Same frame and focal sets, masses within `tol` absolute.
    fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.frame == other.frame
            && self.masses.len() == other.masses.len()
            && self
                .masses
                .iter()
                .zip(&other.masses)
                .all(|((a, ma), (b, mb))| a == b && (ma - mb).abs() <= tol)
    }
}
