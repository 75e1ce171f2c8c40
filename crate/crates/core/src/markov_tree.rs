//! Markov trees: trees whose vertices are hyperedges, where neighbours
//! intersect and every shared variable lies on the whole connecting path.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::hypergraph::{ConstructionSequence, Hyperedge, Hypergraph, VarSet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkovTree {
    vertices: Vec<Hyperedge>,
    /// Unordered edges stored as `(low, high)` vertex indices.
    edges: BTreeSet<(usize, usize)>,
    separators: BTreeMap<(usize, usize), VarSet>,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl MarkovTree {
    /// Assembles a graph over hyperedges without checking the tree or Markov
    /// conditions; see [`MarkovTree::verify_markov_property`].
    pub fn from_parts(
        vertices: Vec<Hyperedge>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::domain("a tree needs at least one vertex"));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= vertices.len() || b >= vertices.len() {
                return Err(Error::domain(format!(
                    "edge ({a}, {b}) refers to a missing vertex"
                )));
            }
            if a == b {
                return Err(Error::domain(format!("self-loop at vertex {a}")));
            }
            set.insert(key(a, b));
        }
        let separators = set
            .iter()
            .map(|&(a, b)| ((a, b), vertices[a].intersection(&vertices[b])))
            .collect();
        Ok(MarkovTree {
            vertices,
            edges: set,
            separators,
        })
    }

    /// Joins each step's hyperedge to its recorded branch.
    pub fn from_construction_sequence(seq: &ConstructionSequence) -> Result<Self> {
        seq.verify()?;
        let vertices: Vec<Hyperedge> = seq.steps().iter().map(|s| s.hyperedge.clone()).collect();
        let index: BTreeMap<&Hyperedge, usize> =
            vertices.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let edges: Vec<(usize, usize)> = seq
            .steps()
            .iter()
            .enumerate()
            .filter_map(|(k, s)| s.branch.as_ref().map(|b| (index[b], k)))
            .collect();
        let tree = MarkovTree::from_parts(vertices, edges)?;
        debug_assert!(tree.verify_markov_property());
        Ok(tree)
    }

    pub fn vertices(&self) -> &[Hyperedge] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &Hyperedge {
        &self.vertices[i]
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index_of(&self, vertex: &Hyperedge) -> Option<usize> {
        self.vertices.iter().position(|v| v == vertex)
    }

    /// Edges as `(low, high)` index pairs.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&key(a, b))
    }

    pub fn separator(&self, a: usize, b: usize) -> Option<&VarSet> {
        self.separators.get(&key(a, b))
    }

    pub fn separators(&self) -> &BTreeMap<(usize, usize), VarSet> {
        &self.separators
    }

    /// Neighbours of `i`, ordered canonically by their hyperedges.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == i {
                    Some(b)
                } else if b == i {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_by(|&x, &y| self.vertices[x].cmp(&self.vertices[y]));
        out
    }

    /// Vertices belonging to exactly one edge.
    pub fn leaves(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.neighbors(i).len() == 1)
            .collect()
    }

    pub fn hypergraph(&self) -> Result<Hypergraph> {
        Hypergraph::new(self.vertices.iter().cloned())
    }

    /// Connected and acyclic.
    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.vertices.len() && self.reachable_from(0).len() == self.len()
    }

    fn reachable_from(&self, start: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            for j in self.neighbors(i) {
                if seen.insert(j) {
                    stack.push(j);
                }
            }
        }
        seen
    }

    /// Checks the Markov-tree conditions: a tree over distinct hyperedges,
    /// adjacent vertices intersect, and the vertices containing any given
    /// variable induce a connected subtree.
    pub fn verify_markov_property(&self) -> bool {
        if !self.is_tree() {
            return false;
        }
        let distinct: BTreeSet<&Hyperedge> = self.vertices.iter().collect();
        if distinct.len() != self.vertices.len() {
            return false;
        }
        if self.separators.values().any(BTreeSet::is_empty) {
            return false;
        }
        let universe: VarSet = self
            .vertices
            .iter()
            .flat_map(|v| v.iter().cloned())
            .collect();
        universe.iter().all(|x| {
            let holders: BTreeSet<usize> = (0..self.len())
                .filter(|&i| self.vertices[i].contains(x))
                .collect();
            let start = *holders.first().expect("variable comes from some vertex");
            let mut seen = BTreeSet::from([start]);
            let mut stack = vec![start];
            while let Some(i) = stack.pop() {
                for j in self.neighbors(i) {
                    if holders.contains(&j) && seen.insert(j) {
                        stack.push(j);
                    }
                }
            }
            seen == holders
        })
    }

    /// Deletes leaf `i`, renumbering the vertices after it.
    pub fn remove_leaf(&self, i: usize) -> Result<MarkovTree> {
        if i >= self.len() || self.neighbors(i).len() != 1 {
            return Err(Error::domain(format!("vertex {i} is not a leaf")));
        }
        let shift = |v: usize| if v > i { v - 1 } else { v };
        let mut vertices = self.vertices.clone();
        vertices.remove(i);
        let edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .filter(|&&(a, b)| a != i && b != i)
            .map(|&(a, b)| (shift(a), shift(b)))
            .collect();
        MarkovTree::from_parts(vertices, edges)
    }
}
