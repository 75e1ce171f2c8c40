//! Computing marginals of a factorized valuation.
//!
//! Three routes are provided: the brute-force definition (combine every
//! factor, then marginalize), twig deletion along a construction sequence
//! for a single hyperedge, and message passing on a Markov tree for all
//! hyperedges at once.
//!
//! Message passing runs two rules until neither applies:
//!
//! 1. once vertex `i` holds messages from every neighbour except `j`, it sends
//!    `j` the combination of its local valuation with those messages,
//!    marginalized to the separator of `i` and `j`;
//! 2. once vertex `i` holds messages from every neighbour, its marginal is
//!    the combination of its local valuation with all of them.
//!
//! Operands are always combined in the same order (local valuation first,
//! then incoming messages by neighbour in canonical hyperedge order), so
//! every admissible firing order produces bitwise identical results.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hypergraph::{ConstructionSequence, Hyperedge, VarSet};
use crate::markov_tree::MarkovTree;
use crate::valuation::{combine_all, Factorization, Valuation};

/// Messages keyed by directed tree edge `(from, to)`. Each message is
/// written at most once.
#[derive(Debug, Clone)]
pub struct MessageStore<V> {
    messages: BTreeMap<(usize, usize), V>,
}

impl<V> Default for MessageStore<V> {
    fn default() -> Self {
        MessageStore {
            messages: BTreeMap::new(),
        }
    }
}

impl<V: Valuation> MessageStore<V> {
    pub fn insert(&mut self, tree: &MarkovTree, from: usize, to: usize, message: V) -> Result<()> {
        if !tree.has_edge(from, to) {
            return Err(Error::domain(format!(
                "no tree edge between vertices {from} and {to}"
            )));
        }
        if self.messages.contains_key(&(from, to)) {
            return Err(Error::domain(format!(
                "message {from} -> {to} already written"
            )));
        }
        self.messages.insert((from, to), message);
        Ok(())
    }

    pub fn get(&self, from: usize, to: usize) -> Option<&V> {
        self.messages.get(&(from, to))
    }

    pub fn contains(&self, from: usize, to: usize) -> bool {
        self.messages.contains_key(&(from, to))
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize), &V)> {
        self.messages.iter()
    }
}

/// Order in which ready rules are fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    /// Oldest ready rule first.
    #[default]
    Fifo,
    /// Newest ready rule first.
    Lifo,
    /// All ready rules at once, computed on the rayon thread pool.
    Parallel,
}

/// One rule firing, as recorded in the trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Firing {
    /// Rule 1: message from `from` to `to` on `domain`.
    Message {
        from: usize,
        to: usize,
        domain: VarSet,
    },
    /// Rule 2: marginal of `vertex` on `domain`.
    Marginal { vertex: usize, domain: VarSet },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Task {
    Message(usize, usize),
    Marginal(usize),
}

/// Result of [`propagate_all`].
#[derive(Debug, Clone)]
pub struct Propagation<V> {
    /// Marginal per tree vertex, indexed like the tree's vertices.
    pub marginals: Vec<V>,
    pub messages: MessageStore<V>,
    pub trace: Vec<Firing>,
}

impl<V> Propagation<V> {
    pub fn by_hyperedge<'a>(&'a self, tree: &'a MarkovTree) -> BTreeMap<&'a Hyperedge, &'a V> {
        tree.vertices().iter().zip(&self.marginals).collect()
    }
}

/// Combines every factor and marginalizes to `target`. Exponential in the
/// number of variables; the reference semantics for the other routes.
///
/// The joint lives on all variables of the hypergraph: those covered by no
/// factor get the identity, as hyperedges without factors do in propagation.
pub fn brute_force_marginal<V: Valuation>(f: &Factorization<V>, target: &VarSet) -> Result<V> {
    let mut joint = combine_all(f.factors())?;
    let universe = f.hypergraph().universe();
    let missing: VarSet = universe.difference(&joint.domain()).cloned().collect();
    if !missing.is_empty() {
        joint = joint.combine(&V::identity(&f.frames().frame(&missing)?))?;
    }
    joint.marginalize(target)
}

/// Marginal on the first hyperedge of `seq` by deleting twigs from the end
/// of the sequence, folding each twig's valuation into its branch.
pub fn collect_marginal<V: Valuation>(
    f: &Factorization<V>,
    seq: &ConstructionSequence,
    target: &Hyperedge,
) -> Result<V> {
    seq.verify()?;
    if seq.root() != target {
        return Err(Error::domain(format!(
            "construction sequence starts at {} instead of {target}",
            seq.root()
        )));
    }
    if seq.hypergraph() != *f.hypergraph() {
        return Err(Error::domain(
            "construction sequence does not match the factorization's hypergraph",
        ));
    }
    let mut working: BTreeMap<Hyperedge, V> = BTreeMap::new();
    for step in seq.steps() {
        let local = f
            .local_valuation(&step.hyperedge)
            .map_err(|e| e.at(format!("local valuation at {}", step.hyperedge)))?;
        working.insert(step.hyperedge.clone(), local);
    }
    for step in seq.steps()[1..].iter().rev() {
        let twig = &step.hyperedge;
        let branch = step
            .branch
            .as_ref()
            .expect("verified: later steps have branches");
        let location = || format!("twig {twig} into branch {branch}");
        let reduced = working
            .remove(twig)
            .expect("each twig is deleted once")
            .marginalize(&twig.intersection(branch))
            .map_err(|e| e.at(location()))?;
        let slot = working.get_mut(branch).expect("branch precedes its twig");
        *slot = slot.combine(&reduced).map_err(|e| e.at(location()))?;
    }
    Ok(working.remove(target).expect("the root is never deleted"))
}

struct Engine<'a, V> {
    tree: &'a MarkovTree,
    neighbors: Vec<Vec<usize>>,
    locals: Vec<V>,
}

impl<V: Valuation> Engine<'_, V> {
    fn compute(&self, task: Task, store: &MessageStore<V>) -> Result<V> {
        match task {
            Task::Message(i, j) => {
                let incoming = self.neighbors[i].iter().filter(|&&k| k != j).map(|&k| {
                    store
                        .get(k, i)
                        .expect("rule fired before its inputs were ready")
                });
                let separator = self.tree.separator(i, j).expect("tree edge");
                combine_all(std::iter::once(&self.locals[i]).chain(incoming))
                    .and_then(|v| v.marginalize(separator))
                    .map_err(|e| {
                        e.at(format!(
                            "message {} -> {}",
                            self.tree.vertex(i),
                            self.tree.vertex(j)
                        ))
                    })
            }
            Task::Marginal(i) => {
                let incoming = self.neighbors[i].iter().map(|&k| {
                    store
                        .get(k, i)
                        .expect("rule fired before its inputs were ready")
                });
                combine_all(std::iter::once(&self.locals[i]).chain(incoming))
                    .map_err(|e| e.at(format!("marginal at {}", self.tree.vertex(i))))
            }
        }
    }

    /// Rules at vertex `i` whose inputs are all present.
    fn ready_at(&self, i: usize, store: &MessageStore<V>) -> Vec<Task> {
        let missing: Vec<usize> = self.neighbors[i]
            .iter()
            .copied()
            .filter(|&k| !store.contains(k, i))
            .collect();
        let mut out = Vec::new();
        match missing.as_slice() {
            [] => {
                out.extend(self.neighbors[i].iter().map(|&j| Task::Message(i, j)));
                out.push(Task::Marginal(i));
            }
            [only] => out.push(Task::Message(i, *only)),
            _ => {}
        }
        out
    }
}

/// Marginals for every vertex of `tree` by message passing.
///
/// The tree's vertices must be exactly the factorization's hyperedges.
/// Vertices without factors use the identity valuation.
pub fn propagate_all<V: Valuation>(
    f: &Factorization<V>,
    tree: &MarkovTree,
    schedule: Schedule,
) -> Result<Propagation<V>> {
    if !tree.verify_markov_property() {
        return Err(Error::domain("the given tree is not a Markov tree"));
    }
    let vertex_set: BTreeSet<&Hyperedge> = tree.vertices().iter().collect();
    let edge_set: BTreeSet<&Hyperedge> = f.hypergraph().edges().collect();
    if vertex_set != edge_set {
        return Err(Error::domain(
            "Markov tree vertices differ from the factorization's hyperedges",
        ));
    }
    let locals = tree
        .vertices()
        .iter()
        .map(|h| {
            f.local_valuation(h)
                .map_err(|e| e.at(format!("local valuation at {h}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let engine = Engine {
        tree,
        neighbors: (0..tree.len()).map(|i| tree.neighbors(i)).collect(),
        locals,
    };

    let mut store = MessageStore::default();
    let mut marginals: Vec<Option<V>> = vec![None; tree.len()];
    let mut trace = Vec::with_capacity(2 * tree.edge_count() + tree.len());
    let mut queued: BTreeSet<Task> = BTreeSet::new();
    let mut queue: VecDeque<Task> = VecDeque::new();
    for i in 0..tree.len() {
        for task in engine.ready_at(i, &store) {
            if queued.insert(task) {
                queue.push_back(task);
            }
        }
    }

    loop {
        let batch: Vec<Task> = match schedule {
            Schedule::Fifo => queue.pop_front().into_iter().collect(),
            Schedule::Lifo => queue.pop_back().into_iter().collect(),
            Schedule::Parallel => queue.drain(..).collect(),
        };
        if batch.is_empty() {
            break;
        }
        let results: Vec<Result<V>> = if schedule == Schedule::Parallel {
            batch
                .par_iter()
                .map(|&t| engine.compute(t, &store))
                .collect()
        } else {
            batch.iter().map(|&t| engine.compute(t, &store)).collect()
        };
        for (task, result) in batch.into_iter().zip(results) {
            let value = result?;
            match task {
                Task::Message(i, j) => {
                    trace.push(Firing::Message {
                        from: i,
                        to: j,
                        domain: value.domain(),
                    });
                    store.insert(tree, i, j, value)?;
                    for next in engine.ready_at(j, &store) {
                        if queued.insert(next) {
                            queue.push_back(next);
                        }
                    }
                }
                Task::Marginal(i) => {
                    trace.push(Firing::Marginal {
                        vertex: i,
                        domain: value.domain(),
                    });
                    marginals[i] = Some(value);
                }
            }
        }
    }

    debug_assert_eq!(store.len(), 2 * tree.edge_count());
    let marginals = marginals
        .into_iter()
        .map(|m| m.expect("every vertex of a tree eventually receives all messages"))
        .collect();
    Ok(Propagation {
        marginals,
        messages: store,
        trace,
    })
}
