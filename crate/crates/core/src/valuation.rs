//! The valuation-algebra interface and factorizations over hypergraphs.

use std::collections::BTreeMap;
use std::fmt::Debug;

use crate::error::{Error, Result};
use crate::frame::{Frame, Frames};
use crate::hypergraph::{fmt_vars, Hyperedge, Hypergraph, VarSet};

/// An object attached to a set of variables that can be combined with other
/// valuations and marginalized to subsets of its domain.
///
/// Implementations must satisfy the axioms checked in [`crate::axioms`]:
/// marginalizing to the full domain is the identity, marginalization is
/// consonant, combination is commutative and associative, and
/// marginalization distributes over combination.
pub trait Valuation: Clone + Debug + Send + Sync {
    fn frame(&self) -> &Frame;

    fn domain(&self) -> VarSet {
        self.frame().domain()
    }

    /// Combination, a valuation on the union of both domains.
    fn combine(&self, other: &Self) -> Result<Self>;

    /// Marginal on `target`, which must be a non-empty subset of the domain.
    fn marginalize(&self, target: &VarSet) -> Result<Self>;

    /// The neutral element of combination on `frame`.
    fn identity(frame: &Frame) -> Self;

    /// Equality up to the algebra's numeric tolerance.
    fn approx_eq(&self, other: &Self, tol: f64) -> bool;
}

/// Checks the preconditions shared by every marginalization.
pub(crate) fn check_marginal_target(domain: &VarSet, target: &VarSet) -> Result<()> {
    if target.is_empty() {
        return Err(Error::domain("cannot marginalize to the empty set"));
    }
    if !target.is_subset(domain) {
        return Err(Error::domain(format!(
            "cannot marginalize a valuation on {} to {}",
            fmt_vars(domain),
            fmt_vars(target)
        )));
    }
    Ok(())
}

/// Left fold of [`Valuation::combine`] in iteration order.
pub fn combine_all<'a, V: Valuation + 'a>(vs: impl IntoIterator<Item = &'a V>) -> Result<V> {
    let mut iter = vs.into_iter();
    let first = iter
        .next()
        .ok_or_else(|| Error::domain("cannot combine an empty list of valuations"))?;
    iter.try_fold(first.clone(), |acc, v| acc.combine(v))
}

/// Valuations attached to the hyperedges of a hypergraph. The joint
/// valuation is the combination of all of them.
#[derive(Debug, Clone)]
pub struct Factorization<V> {
    frames: Frames,
    hypergraph: Hypergraph,
    factors: BTreeMap<Hyperedge, Vec<V>>,
}

impl<V: Valuation> Factorization<V> {
    /// Every key must be a hyperedge of `hypergraph`, every factor's domain a
    /// subset of its key, and at least one factor must be present.
    pub fn new(
        frames: Frames,
        hypergraph: Hypergraph,
        factors: BTreeMap<Hyperedge, Vec<V>>,
    ) -> Result<Self> {
        if factors.values().all(Vec::is_empty) {
            return Err(Error::domain("a factorization needs at least one factor"));
        }
        for (edge, list) in &factors {
            if !hypergraph.contains(edge) {
                return Err(Error::domain(format!(
                    "{edge} is not a hyperedge of {hypergraph}"
                )));
            }
            for f in list {
                if !f.domain().is_subset(edge.vars()) {
                    return Err(Error::domain(format!(
                        "factor on {} does not fit in {edge}",
                        fmt_vars(&f.domain())
                    )));
                }
                if !frames.agrees_with(f.frame()) {
                    return Err(Error::domain(format!(
                        "factor on {} uses frames that differ from the model's",
                        fmt_vars(&f.domain())
                    )));
                }
            }
        }
        frames.frame(&hypergraph.universe())?;
        Ok(Factorization {
            frames,
            hypergraph,
            factors,
        })
    }

    /// One hyperedge per distinct factor domain; each factor sits on its own domain.
    pub fn from_factors(frames: Frames, factors: Vec<V>) -> Result<Self> {
        let mut map: BTreeMap<Hyperedge, Vec<V>> = BTreeMap::new();
        for f in factors {
            map.entry(Hyperedge::new(f.domain())?).or_default().push(f);
        }
        let hypergraph = Hypergraph::new(map.keys().cloned())?;
        Factorization::new(frames, hypergraph, map)
    }

    pub fn frames(&self) -> &Frames {
        &self.frames
    }

    pub fn hypergraph(&self) -> &Hypergraph {
        &self.hypergraph
    }

    pub fn factors_on(&self, edge: &Hyperedge) -> &[V] {
        self.factors.get(edge).map(Vec::as_slice).unwrap_or(&[])
    }

    /// All factors, hyperedges in canonical order.
    pub fn factors(&self) -> impl Iterator<Item = &V> {
        self.factors.values().flatten()
    }

    pub fn factor_count(&self) -> usize {
        self.factors.values().map(Vec::len).sum()
    }

    /// The union of all factor domains.
    pub fn factor_domain(&self) -> VarSet {
        self.factors().flat_map(|f| f.domain()).collect()
    }

    /// Combination of the factors on `edge`, extended to all of `edge`. A
    /// hyperedge without factors gets the identity valuation.
    pub fn local_valuation(&self, edge: &Hyperedge) -> Result<V> {
        let frame = self.frames.frame(edge.vars())?;
        let list = self.factors_on(edge);
        if list.is_empty() {
            return Ok(V::identity(&frame));
        }
        let local = combine_all(list)?;
        if local.domain() == *edge.vars() {
            Ok(local)
        } else {
            local.combine(&V::identity(&frame))
        }
    }

    /// Moves every factor to the first hyperedge of `cover` (canonical
    /// order) that contains its domain.
    pub fn assign_to_cover(&self, cover: &Hypergraph) -> Result<Factorization<V>> {
        if !cover.covers(&self.hypergraph) {
            return Err(Error::domain(format!(
                "{cover} does not cover {}",
                self.hypergraph
            )));
        }
        let mut map: BTreeMap<Hyperedge, Vec<V>> = BTreeMap::new();
        for f in self.factors() {
            let dom = f.domain();
            let dest = cover
                .edges()
                .find(|c| dom.is_subset(c.vars()))
                .expect("a cover contains a superset of every factor domain");
            map.entry(dest.clone()).or_default().push(f.clone());
        }
        Factorization::new(self.frames.clone(), cover.clone(), map)
    }

    /// The factorization restricted to the hyperedges of `part`, which must
    /// be hyperedges of this hypergraph.
    pub fn restrict(&self, part: &Hypergraph) -> Result<Factorization<V>> {
        let map: BTreeMap<Hyperedge, Vec<V>> = part
            .edges()
            .map(|e| {
                if self.hypergraph.contains(e) {
                    Ok((e.clone(), self.factors_on(e).to_vec()))
                } else {
                    Err(Error::domain(format!(
                        "{e} is not a hyperedge of {}",
                        self.hypergraph
                    )))
                }
            })
            .collect::<Result<_>>()?;
        Factorization::new(self.frames.clone(), part.clone(), map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::Variable;
    use crate::hypergraph::{var_set, VariableId};
    use crate::potential::Potential;

    fn frames() -> Frames {
        Frames::new(["X", "Y", "Z"].iter().map(|n| {
            Variable::new(VariableId::new(*n).unwrap(), vec!["0".into(), "1".into()]).unwrap()
        }))
        .unwrap()
    }

    fn pot(f: &Frames, vars: &[&str], values: &[f64]) -> Potential {
        Potential::new(f.frame(&var_set(vars).unwrap()).unwrap(), values.to_vec()).unwrap()
    }

    fn edge(names: &[&str]) -> Hyperedge {
        Hyperedge::from_names(names).unwrap()
    }

    #[test]
    fn combined_domains_are_unions() {
        let f = frames();
        let g = pot(&f, &["X"], &[1.0, 2.0]);
        let h = pot(&f, &["X", "Y"], &[1.0, 2.0, 3.0, 4.0]);
        let k = pot(&f, &["Y"], &[1.0, 2.0]);
        assert_eq!(
            g.combine(&h).unwrap().domain(),
            var_set(["X", "Y"]).unwrap()
        );
        assert_eq!(
            g.combine(&k).unwrap().domain(),
            var_set(["X", "Y"]).unwrap()
        );
    }

    #[test]
    fn combine_all_is_a_left_fold() {
        let f = frames();
        let g = pot(&f, &["X"], &[1.0, 2.0]);
        let h = pot(&f, &["Y"], &[3.0, 5.0]);
        let k = pot(&f, &["Z"], &[7.0, 11.0]);
        assert_eq!(combine_all([&g]).unwrap(), g);
        let folded = combine_all([&g, &h, &k]).unwrap();
        assert_eq!(folded, g.combine(&h).unwrap().combine(&k).unwrap());
        assert!(combine_all::<Potential>([]).is_err());
    }

    #[test]
    fn factorization_checks_placement() {
        let f = frames();
        let hg = Hypergraph::new([edge(&["X"])]).unwrap();
        let misplaced = BTreeMap::from([(edge(&["X"]), vec![pot(&f, &["Y"], &[1.0, 1.0])])]);
        assert!(Factorization::new(f.clone(), hg.clone(), misplaced).is_err());
        let empty = BTreeMap::from([(edge(&["X"]), Vec::<Potential>::new())]);
        assert!(Factorization::new(f, hg, empty).is_err());
    }

    #[test]
    fn assignment_onto_a_single_edge_cover() {
        let f = frames();
        let fac = Factorization::from_factors(
            f.clone(),
            vec![
                pot(&f, &["X", "Y"], &[1.0, 2.0, 3.0, 4.0]),
                pot(&f, &["Y", "Z"], &[1.0, 2.0, 3.0, 4.0]),
                pot(&f, &["X", "Z"], &[1.0, 2.0, 3.0, 4.0]),
            ],
        )
        .unwrap();
        let cover = Hypergraph::new([edge(&["X", "Y", "Z"])]).unwrap();
        let moved = fac.assign_to_cover(&cover).unwrap();
        assert_eq!(moved.factors_on(&edge(&["X", "Y", "Z"])).len(), 3);
        assert_eq!(moved.factor_count(), fac.factor_count());
    }

    #[test]
    fn assignment_uses_first_fit_and_leaves_gaps() {
        let f = frames();
        let fac = Factorization::from_factors(
            f.clone(),
            vec![pot(&f, &["X", "Y"], &[1.0, 2.0, 3.0, 4.0])],
        )
        .unwrap();
        let cover = Hypergraph::new([edge(&["X", "Y"]), edge(&["Y", "Z"])]).unwrap();
        let moved = fac.assign_to_cover(&cover).unwrap();
        assert_eq!(moved.factors_on(&edge(&["X", "Y"])).len(), 1);
        assert!(moved.factors_on(&edge(&["Y", "Z"])).is_empty());
        let local = moved.local_valuation(&edge(&["Y", "Z"])).unwrap();
        assert_eq!(local.values(), &[1.0; 4]);
    }

    #[test]
    fn assignment_rejects_non_covers() {
        let f = frames();
        let fac = Factorization::from_factors(
            f.clone(),
            vec![pot(&f, &["X", "Y"], &[1.0, 2.0, 3.0, 4.0])],
        )
        .unwrap();
        let not_cover = Hypergraph::new([edge(&["X", "Z"])]).unwrap();
        assert!(fac.assign_to_cover(&not_cover).is_err());
    }

    #[test]
    fn local_valuation_is_extended_to_the_whole_edge() {
        let f = frames();
        let g = pot(&f, &["X"], &[2.0, 3.0]);
        let hg = Hypergraph::new([edge(&["X", "Y"])]).unwrap();
        let fac =
            Factorization::new(f, hg, BTreeMap::from([(edge(&["X", "Y"]), vec![g])])).unwrap();
        let local = fac.local_valuation(&edge(&["X", "Y"])).unwrap();
        assert_eq!(local.domain(), var_set(["X", "Y"]).unwrap());
        assert_eq!(local.values(), &[2.0, 2.0, 3.0, 3.0]);
    }
}
