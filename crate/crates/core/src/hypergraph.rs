//! Hypergraphs over named variables, twigs and branches, hypertree
//! recognition by twig deletion, and hypertree covers.
//!
//! Every set in this module iterates in canonical order: variables by name,
//! hyperedges lexicographically by their sorted variable names. All choices
//! between equally valid candidates take the first one in that order, so the
//! results are deterministic.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Name of a variable. Non-empty; compared by name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VariableId(String);

impl VariableId {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::domain("variable names must be non-empty"));
        }
        Ok(VariableId(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl FromStr for VariableId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        VariableId::new(s)
    }
}

impl fmt::Display for VariableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A set of variables in canonical order.
pub type VarSet = BTreeSet<VariableId>;

/// Parses names into a [`VarSet`].
pub fn var_set<S: AsRef<str>>(names: impl IntoIterator<Item = S>) -> Result<VarSet> {
    names
        .into_iter()
        .map(|n| VariableId::new(n.as_ref()))
        .collect()
}

pub(crate) fn fmt_vars(vars: &VarSet) -> String {
    let names: Vec<&str> = vars.iter().map(VariableId::as_str).collect();
    format!("{{{}}}", names.join(","))
}

/// A non-empty set of variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Hyperedge(VarSet);

impl Hyperedge {
    pub fn new(vars: VarSet) -> Result<Self> {
        if vars.is_empty() {
            return Err(Error::domain("hyperedges must be non-empty"));
        }
        Ok(Hyperedge(vars))
    }

    pub fn from_names<S: AsRef<str>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        Hyperedge::new(var_set(names)?)
    }

    pub fn vars(&self) -> &VarSet {
        &self.0
    }

    pub fn into_vars(self) -> VarSet {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, var: &VariableId) -> bool {
        self.0.contains(var)
    }

    pub fn is_subset(&self, other: &Hyperedge) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn intersection(&self, other: &Hyperedge) -> VarSet {
        self.0.intersection(&other.0).cloned().collect()
    }

    pub fn intersects(&self, other: &Hyperedge) -> bool {
        self.0.iter().any(|v| other.0.contains(v))
    }

    pub fn iter(&self) -> impl Iterator<Item = &VariableId> {
        self.0.iter()
    }
}

impl fmt::Display for Hyperedge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&fmt_vars(&self.0))
    }
}

/// A non-empty set of hyperedges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    edges: BTreeSet<Hyperedge>,
}

impl Hypergraph {
    /// Builds a hypergraph; repeated hyperedges collapse into one.
    pub fn new(edges: impl IntoIterator<Item = Hyperedge>) -> Result<Self> {
        let edges: BTreeSet<Hyperedge> = edges.into_iter().collect();
        if edges.is_empty() {
            return Err(Error::domain("a hypergraph needs at least one hyperedge"));
        }
        Ok(Hypergraph { edges })
    }

    pub fn from_names<S: AsRef<str>>(edges: &[&[S]]) -> Result<Self> {
        Hypergraph::new(
            edges
                .iter()
                .map(|e| Hyperedge::from_names(e.iter().map(AsRef::as_ref)))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = &Hyperedge> + Clone {
        self.edges.iter()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, edge: &Hyperedge) -> bool {
        self.edges.contains(edge)
    }

    /// Union of all hyperedges.
    pub fn universe(&self) -> VarSet {
        self.edges.iter().flat_map(|e| e.iter().cloned()).collect()
    }

    /// Size of the largest hyperedge.
    pub fn max_edge_size(&self) -> usize {
        self.edges.iter().map(Hyperedge::len).max().unwrap_or(0)
    }

    /// The hypergraph with `edge` removed, or `None` if nothing would remain.
    pub fn without(&self, edge: &Hyperedge) -> Option<Hypergraph> {
        let mut edges = self.edges.clone();
        edges.remove(edge);
        (!edges.is_empty()).then_some(Hypergraph { edges })
    }

    /// Connected components, where two hyperedges are adjacent when they
    /// share a variable. Components are ordered by their first hyperedge.
    pub fn components(&self) -> Vec<Hypergraph> {
        let edges: Vec<&Hyperedge> = self.edges.iter().collect();
        let mut component = vec![usize::MAX; edges.len()];
        let mut out = Vec::new();
        for start in 0..edges.len() {
            if component[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            component[start] = id;
            let mut stack = vec![start];
            let mut members = BTreeSet::new();
            while let Some(i) = stack.pop() {
                members.insert(edges[i].clone());
                for j in 0..edges.len() {
                    if component[j] == usize::MAX && edges[i].intersects(edges[j]) {
                        component[j] = id;
                        stack.push(j);
                    }
                }
            }
            out.push(Hypergraph { edges: members });
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }

    /// Branches for `twig`: every other hyperedge that meets it and contains
    /// all of its variables shared with the rest of the hypergraph. An empty
    /// result means `twig` is not a twig.
    pub fn is_twig(&self, twig: &Hyperedge) -> Result<BTreeSet<Hyperedge>> {
        if !self.contains(twig) {
            return Err(Error::domain(format!(
                "{twig} is not a hyperedge of the hypergraph"
            )));
        }
        Ok(branches_within(self.edges.iter(), twig)
            .into_iter()
            .cloned()
            .collect())
    }

    /// True iff every hyperedge of `other` is contained in some hyperedge of `self`.
    pub fn covers(&self, other: &Hypergraph) -> bool {
        other.edges().all(|h| self.edges().any(|c| h.is_subset(c)))
    }
}

impl fmt::Display for Hypergraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.edges.iter().map(ToString::to_string).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Branches of `twig` among `edges`, in the iteration order of `edges`.
fn branches_within<'a>(
    edges: impl Iterator<Item = &'a Hyperedge> + Clone,
    twig: &Hyperedge,
) -> Vec<&'a Hyperedge> {
    let shared: VarSet = twig
        .iter()
        .filter(|v| edges.clone().any(|h| h != twig && h.contains(v)))
        .cloned()
        .collect();
    edges
        .filter(|b| *b != twig && b.intersects(twig) && shared.is_subset(b.vars()))
        .collect()
}

/// One step of a construction sequence. Only the first step has no branch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub hyperedge: Hyperedge,
    pub branch: Option<Hyperedge>,
}

/// An ordering of a hypertree's hyperedges in which every hyperedge after the
/// first is a twig of the hyperedges before it, with a branch recorded for it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstructionSequence {
    steps: Vec<Step>,
}

impl ConstructionSequence {
    /// Validates and wraps a list of steps. The error names the first step
    /// (1-based) that fails.
    pub fn new(steps: Vec<Step>) -> Result<Self> {
        let seq = ConstructionSequence { steps };
        seq.verify()?;
        Ok(seq)
    }

    /// Re-checks every step against the twig definition.
    pub fn verify(&self) -> Result<()> {
        let Some(first) = self.steps.first() else {
            return Err(Error::domain("construction sequence is empty"));
        };
        if let Some(b) = &first.branch {
            return Err(Error::domain(format!(
                "step 1: first hyperedge has branch {b}"
            )));
        }
        let mut prefix: BTreeSet<Hyperedge> = BTreeSet::new();
        for (k, step) in self.steps.iter().enumerate() {
            if !prefix.insert(step.hyperedge.clone()) {
                return Err(Error::domain(format!(
                    "step {}: {} appears twice",
                    k + 1,
                    step.hyperedge
                )));
            }
            if k == 0 {
                continue;
            }
            let Some(branch) = &step.branch else {
                return Err(Error::domain(format!("step {}: missing branch", k + 1)));
            };
            if !prefix.contains(branch) {
                return Err(Error::domain(format!(
                    "step {}: branch {branch} is not an earlier hyperedge",
                    k + 1
                )));
            }
            if !branches_within(prefix.iter(), &step.hyperedge).contains(&branch) {
                return Err(Error::domain(format!(
                    "step {}: {} is not a twig with branch {branch}",
                    k + 1,
                    step.hyperedge
                )));
            }
        }
        Ok(())
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn root(&self) -> &Hyperedge {
        &self.steps[0].hyperedge
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn hypergraph(&self) -> Hypergraph {
        Hypergraph {
            edges: self.steps.iter().map(|s| s.hyperedge.clone()).collect(),
        }
    }
}

/// Finds a construction sequence by repeated twig deletion, or `None` if the
/// hypergraph is not a hypertree. When `root` is given the sequence starts
/// with it.
///
/// The twig deleted at each round is the first in canonical order (never the
/// root). In the resulting build order each step's branch is the earliest
/// earlier hyperedge that qualifies.
pub fn construction_sequence(
    graph: &Hypergraph,
    root: Option<&Hyperedge>,
) -> Result<Option<ConstructionSequence>> {
    if let Some(r) = root {
        if !graph.contains(r) {
            return Err(Error::domain(format!(
                "root {r} is not a hyperedge of the hypergraph"
            )));
        }
    }
    let mut remaining = graph.edges.clone();
    let mut deleted = Vec::with_capacity(remaining.len());
    while remaining.len() > 1 {
        let twig = remaining
            .iter()
            .find(|t| Some(*t) != root && !branches_within(remaining.iter(), t).is_empty())
            .cloned();
        match twig {
            Some(t) => {
                remaining.remove(&t);
                deleted.push(t);
            }
            None => return Ok(None),
        }
    }

    let order: Vec<Hyperedge> = remaining
        .into_iter()
        .chain(deleted.into_iter().rev())
        .collect();
    let mut steps = Vec::with_capacity(order.len());
    for (k, edge) in order.iter().enumerate() {
        let branch = if k == 0 {
            None
        } else {
            let found = branches_within(order[..=k].iter(), edge);
            Some(found[0].clone())
        };
        steps.push(Step {
            hyperedge: edge.clone(),
            branch,
        });
    }
    Ok(Some(ConstructionSequence { steps }))
}

/// Builds a hypertree cover by greedy variable elimination.
///
/// Each round eliminates the variable whose neighbourhood (the union of the
/// current hyperedges containing it) is smallest, breaking ties by the number
/// of fill pairs and then by name. Every neighbourhood becomes a cover
/// hyperedge; neighbourhoods contained in another are dropped.
pub fn hypertree_cover(graph: &Hypergraph) -> Result<(Hypergraph, ConstructionSequence)> {
    let components = graph.components();
    if components.len() > 1 {
        let a = components[0].edges().next().expect("non-empty component");
        let b = components[1].edges().next().expect("non-empty component");
        return Err(Error::domain(format!(
            "hypergraph is disconnected: {a} and {b} are not joined by any chain of hyperedges"
        )));
    }

    let mut current: BTreeSet<VarSet> = graph.edges().map(|e| e.vars().clone()).collect();
    let mut remaining = graph.universe();
    let mut emitted: BTreeSet<VarSet> = BTreeSet::new();
    while !remaining.is_empty() {
        let (_, _, var, hood) = remaining
            .iter()
            .map(|v| {
                let hood: VarSet = current
                    .iter()
                    .filter(|e| e.contains(v))
                    .flat_map(|e| e.iter().cloned())
                    .collect();
                let fill = fill_pairs(&current, &hood, v);
                (hood.len(), fill, v.clone(), hood)
            })
            .min_by(|a, b| (a.0, a.1, &a.2).cmp(&(b.0, b.1, &b.2)))
            .expect("remaining is non-empty");
        current.retain(|e| !e.contains(&var));
        let mut rest = hood.clone();
        rest.remove(&var);
        if !rest.is_empty() {
            current.insert(rest);
        }
        remaining.remove(&var);
        emitted.insert(hood);
    }

    let cover: Vec<Hyperedge> = emitted
        .iter()
        .filter(|e| !emitted.iter().any(|o| o != *e && e.is_subset(o)))
        .map(|e| Hyperedge(e.clone()))
        .collect();
    let cover = Hypergraph::new(cover)?;
    let seq = construction_sequence(&cover, None)?
        .ok_or_else(|| Error::domain(format!("elimination produced a non-hypertree {cover}")))?;
    Ok((cover, seq))
}

/// Pairs of `hood - {var}` not already together in some hyperedge.
fn fill_pairs(current: &BTreeSet<VarSet>, hood: &VarSet, var: &VariableId) -> usize {
    let others: Vec<&VariableId> = hood.iter().filter(|v| *v != var).collect();
    let mut count = 0;
    for (i, a) in others.iter().enumerate() {
        for b in &others[i + 1..] {
            if !current.iter().any(|e| e.contains(*a) && e.contains(*b)) {
                count += 1;
            }
        }
    }
    count
}
