//! Random instance generators and independent oracles shared by the
//! integration tests and the acceptance runner.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use locomp::{
    brute_force_marginal, collect_marginal, combine_all, construction_sequence, propagate_all,
    Factorization, Firing, Frame, Frames, Hyperedge, Hypergraph, MarkovTree, MassFunction,
    Potential, Schedule, Subset, Valuation, Variable, VariableId,
};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

pub const NAMES: [&str; 8] = ["A", "B", "C", "D", "E", "F", "G", "H"];

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// Bitmask hypergraphs: variable i is bit i, hyperedges are non-zero masks.

pub fn hypergraph_from_masks(masks: &[u32]) -> Hypergraph {
    Hypergraph::new(masks.iter().map(|&m| edge_from_mask(m))).unwrap()
}

pub fn edge_from_mask(mask: u32) -> Hyperedge {
    Hyperedge::from_names(
        (0..NAMES.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| NAMES[i]),
    )
    .unwrap()
}

pub fn mask_of(edge: &Hyperedge) -> u32 {
    edge.iter()
        .map(|v| 1u32 << NAMES.iter().position(|n| *n == v.as_str()).unwrap())
        .fold(0, |a, b| a | b)
}

/// Indices of the branches of `edges[t]` straight from the definition: an
/// intersecting other hyperedge containing every vertex that `edges[t]`
/// shares with the rest.
pub fn twig_branches(edges: &[u32], t: usize) -> Vec<usize> {
    let others = edges
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != t)
        .fold(0, |acc, (_, &m)| acc | m);
    let shared = edges[t] & others;
    (0..edges.len())
        .filter(|&b| b != t && edges[b] & edges[t] != 0 && shared & !edges[b] == 0)
        .collect()
}

/// Whether some ordering of `edges` makes every hyperedge after the first a
/// twig of those before it. Tries every permutation.
pub fn hypertree_by_enumeration(edges: &[u32]) -> bool {
    let mut order: Vec<usize> = (0..edges.len()).collect();
    permutations(&mut order, 0, &mut |perm| {
        (1..perm.len()).all(|k| {
            let prefix: Vec<u32> = perm[..=k].iter().map(|&i| edges[i]).collect();
            !twig_branches(&prefix, k).is_empty()
        })
    })
}

fn permutations(
    items: &mut [usize],
    start: usize,
    found: &mut dyn FnMut(&[usize]) -> bool,
) -> bool {
    if start == items.len() {
        return found(items);
    }
    for i in start..items.len() {
        items.swap(start, i);
        if permutations(items, start + 1, found) {
            items.swap(start, i);
            return true;
        }
        items.swap(start, i);
    }
    false
}

/// Calls `visit` with every set of `1..=max_edges` distinct non-empty
/// hyperedges over the first `vars` variables, as ascending masks.
pub fn for_each_hypergraph(vars: usize, max_edges: usize, visit: &mut dyn FnMut(&[u32])) {
    fn go(
        next: u32,
        limit: u32,
        max: usize,
        current: &mut Vec<u32>,
        visit: &mut dyn FnMut(&[u32]),
    ) {
        for m in next..limit {
            current.push(m);
            visit(current);
            if current.len() < max {
                go(m + 1, limit, max, current, visit);
            }
            current.pop();
        }
    }
    go(1, 1 << vars, max_edges, &mut Vec::new(), visit);
}

pub fn connected_masks(edges: &[u32]) -> bool {
    let mut reach = edges[0];
    let mut joined = vec![false; edges.len()];
    joined[0] = true;
    loop {
        let mut grew = false;
        for (i, &m) in edges.iter().enumerate() {
            if !joined[i] && m & reach != 0 {
                joined[i] = true;
                reach |= m;
                grew = true;
            }
        }
        if !grew {
            return joined.iter().all(|&j| j);
        }
    }
}

/// A connected hypergraph with up to `max_edges` hyperedges of size 1..=4
/// over `vars` variables.
pub fn random_connected_masks(rng: &mut StdRng, max_edges: usize, vars: usize) -> Vec<u32> {
    loop {
        let n = rng.random_range(1..=max_edges);
        let mut set = BTreeSet::new();
        for _ in 0..n {
            let size = rng.random_range(1..=4.min(vars));
            let mut idx: Vec<usize> = (0..vars).collect();
            idx.shuffle(rng);
            set.insert(idx[..size].iter().fold(0u32, |m, &i| m | 1 << i));
        }
        let masks: Vec<u32> = set.into_iter().collect();
        if connected_masks(&masks) {
            return masks;
        }
    }
}

// ---------------------------------------------------------------------------
// Random hypertrees, built twig by twig.

/// Hyperedges in build order; `parent[k]` is the branch of step `k`.
#[derive(Debug, Clone)]
pub struct GrownTree {
    pub masks: Vec<u32>,
    pub parent: Vec<Option<usize>>,
}

impl GrownTree {
    pub fn edges(&self) -> Vec<Hyperedge> {
        self.masks.iter().map(|&m| edge_from_mask(m)).collect()
    }

    pub fn hypergraph(&self) -> Hypergraph {
        hypergraph_from_masks(&self.masks)
    }

    pub fn markov_tree(&self) -> MarkovTree {
        let edges = self
            .parent
            .iter()
            .enumerate()
            .filter_map(|(k, p)| p.map(|p| (p, k)));
        MarkovTree::from_parts(self.edges(), edges).unwrap()
    }
}

/// Each new hyperedge keeps a non-empty part of an existing one and adds
/// only unused variables, so it is a twig with that branch.
pub fn random_hypertree(
    rng: &mut StdRng,
    max_edges: usize,
    vars: usize,
    max_size: usize,
) -> GrownTree {
    let mut unused: Vec<usize> = (0..vars).collect();
    unused.shuffle(rng);
    let first_size = rng.random_range(1..=max_size.min(vars));
    let first = unused.drain(..first_size).fold(0u32, |m, i| m | 1 << i);
    let mut tree = GrownTree {
        masks: vec![first],
        parent: vec![None],
    };
    let target = rng.random_range(1..=max_edges);
    let mut attempts = 0;
    while tree.masks.len() < target && attempts < 100 {
        attempts += 1;
        let b = rng.random_range(0..tree.masks.len());
        let bits: Vec<usize> = (0..vars).filter(|i| tree.masks[b] >> i & 1 == 1).collect();
        let mut shared = 0u32;
        for &i in &bits {
            if rng.random_bool(0.5) {
                shared |= 1 << i;
            }
        }
        if shared == 0 {
            shared = 1 << bits[rng.random_range(0..bits.len())];
        }
        while shared.count_ones() as usize > max_size {
            shared &= shared - 1;
        }
        let room = (max_size - shared.count_ones() as usize).min(unused.len());
        let fresh = rng.random_range(0..=room);
        let added = unused[..fresh].iter().fold(0u32, |m, &i| m | 1 << i);
        let t = shared | added;
        if tree.masks.contains(&t) {
            continue;
        }
        unused.drain(..fresh);
        tree.masks.push(t);
        tree.parent.push(Some(b));
    }
    tree
}

// ---------------------------------------------------------------------------
// Frames and valuations.

/// Frames for the first `vars` names, each with 2..=`max_card` values
/// (fixed cardinalities when `max_card` is 2).
pub fn random_frames(rng: &mut StdRng, vars: usize, max_card: usize) -> Frames {
    Frames::new((0..vars).map(|i| {
        let card = rng.random_range(2..=max_card.max(2));
        let id = VariableId::new(NAMES[i]).unwrap();
        Variable::new(
            id,
            (0..card)
                .map(|k| format!("{}{k}", NAMES[i].to_lowercase()))
                .collect(),
        )
        .unwrap()
    }))
    .unwrap()
}

pub fn frame_of(frames: &Frames, mask: u32) -> Frame {
    frames.frame(edge_from_mask(mask).vars()).unwrap()
}

pub fn random_potential(rng: &mut StdRng, frame: &Frame, lo: f64, hi: f64) -> Potential {
    let values = (0..frame.size())
        .map(|_| rng.random_range(lo..=hi))
        .collect();
    Potential::new(frame.clone(), values).unwrap()
}

/// A potential with some zero entries, possibly all but one.
pub fn sparse_potential(rng: &mut StdRng, frame: &Frame) -> Potential {
    let mut values: Vec<f64> = (0..frame.size())
        .map(|_| {
            if rng.random_bool(0.4) {
                0.0
            } else {
                rng.random_range(0.1..=2.0)
            }
        })
        .collect();
    if values.iter().all(|&v| v == 0.0) {
        let i = rng.random_range(0..values.len());
        values[i] = 1.0;
    }
    Potential::new(frame.clone(), values).unwrap()
}

pub fn random_subset(rng: &mut StdRng, frame: &Frame, density: f64) -> Subset {
    let mut members: Vec<usize> = (0..frame.size())
        .filter(|_| rng.random_bool(density))
        .collect();
    if members.is_empty() {
        members.push(rng.random_range(0..frame.size()));
    }
    Subset::from_indices(frame, members).unwrap()
}

/// Up to `max_focal` distinct random focal sets with positive masses summing to one.
pub fn random_mass(rng: &mut StdRng, frame: &Frame, max_focal: usize) -> MassFunction {
    let k = rng.random_range(1..=max_focal);
    let mut sets = BTreeSet::new();
    for _ in 0..k {
        let density = rng.random_range(0.3..=0.9);
        let s = if rng.random_bool(0.15) {
            Subset::full(frame)
        } else {
            random_subset(rng, frame, density)
        };
        sets.insert(s);
    }
    let weights: Vec<f64> = sets.iter().map(|_| rng.random_range(0.05..=1.0)).collect();
    let total: f64 = weights.iter().sum();
    MassFunction::new(
        frame.clone(),
        sets.into_iter().zip(weights.into_iter().map(|w| w / total)),
    )
    .unwrap()
}

/// Lets the generic tests draw valuations of either algebra.
pub trait Draw: Valuation + Exact {
    fn draw(rng: &mut StdRng, frame: &Frame) -> Self;
}

impl Draw for Potential {
    fn draw(rng: &mut StdRng, frame: &Frame) -> Self {
        random_potential(rng, frame, 0.1, 2.0)
    }
}

impl Draw for MassFunction {
    fn draw(rng: &mut StdRng, frame: &Frame) -> Self {
        random_mass(rng, frame, 4)
    }
}

/// Bit-for-bit equality.
pub trait Exact {
    fn exact_eq(&self, other: &Self) -> bool;
}

impl Exact for Potential {
    fn exact_eq(&self, other: &Self) -> bool {
        self.domain() == other.domain()
            && self.values().len() == other.values().len()
            && self
                .values()
                .iter()
                .zip(other.values())
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl Exact for MassFunction {
    fn exact_eq(&self, other: &Self) -> bool {
        let (a, b) = (self.focal_sets(), other.focal_sets());
        self.domain() == other.domain()
            && a.len() == b.len()
            && a.iter()
                .zip(&b)
                .all(|((sa, ma), (sb, mb))| sa == sb && ma.to_bits() == mb.to_bits())
    }
}

/// A factorization on a random hypertree. Most hyperedges get one factor on
/// the whole hyperedge; some get none, or an extra factor on a part.
pub fn random_factorization<V: Draw>(
    rng: &mut StdRng,
    tree: &GrownTree,
    frames: &Frames,
) -> Factorization<V> {
    loop {
        let mut map: BTreeMap<Hyperedge, Vec<V>> = BTreeMap::new();
        for &m in &tree.masks {
            let mut list = Vec::new();
            if !rng.random_bool(0.15) {
                list.push(V::draw(rng, &frame_of(frames, m)));
            }
            if rng.random_bool(0.2) {
                let bits: Vec<u32> = (0..32).filter(|i| m >> i & 1 == 1).collect();
                let part = 1 << bits[rng.random_range(0..bits.len())];
                list.push(V::draw(rng, &frame_of(frames, part)));
            }
            map.insert(edge_from_mask(m), list);
        }
        if let Ok(f) = Factorization::new(frames.clone(), tree.hypergraph(), map) {
            return f;
        }
    }
}

// ---------------------------------------------------------------------------
// Checks shared by the integration tests and the acceptance runner. Each
// returns a description of the first disagreement.

pub type Check = Result<(), String>;

/// A random model on a hypertree of at most 6 hyperedges over 8 variables.
pub fn random_model<V: Draw>(seed: u64) -> (Factorization<V>, GrownTree) {
    let mut rng = rng(seed);
    let frames = random_frames(&mut rng, 8, 3);
    let tree = random_hypertree(&mut rng, 6, 8, 4);
    let f = random_factorization(&mut rng, &tree, &frames);
    (f, tree)
}

/// Every vertex marginal from message passing against brute force.
/// Returns whether the model was defined (no total conflict or zero product).
pub fn oracle_equivalence<V: Draw>(
    f: &Factorization<V>,
    tree: &MarkovTree,
    tol: f64,
) -> Result<bool, String> {
    let joint = brute_force_marginal(f, &f.hypergraph().universe());
    match (propagate_all(f, tree, Schedule::Fifo), joint) {
        (Ok(run), Ok(_)) => {
            for (h, m) in run.by_hyperedge(tree) {
                let oracle = brute_force_marginal(f, h.vars()).map_err(|e| e.to_string())?;
                if !m.approx_eq(&oracle, tol) {
                    return Err(format!("marginal on {h}: {m:?} vs {oracle:?}"));
                }
            }
            Ok(true)
        }
        (Err(a), Err(b)) if a.is_undefined_combination() && b.is_undefined_combination() => {
            Ok(false)
        }
        (Ok(_), Err(e)) => Err(format!("propagation succeeded but brute force failed: {e}")),
        (Err(e), Ok(_)) => Err(format!("propagation failed but brute force succeeded: {e}")),
        (Err(a), Err(b)) => Err(format!("unexpected errors: {a}; {b}")),
    }
}

/// Firing counts, leaf-first start, and bitwise agreement of all schedules.
pub fn bookkeeping<V: Draw>(f: &Factorization<V>, tree: &MarkovTree) -> Check {
    let runs: Vec<_> = [Schedule::Fifo, Schedule::Lifo, Schedule::Parallel]
        .into_iter()
        .map(|s| propagate_all(f, tree, s))
        .collect();
    let runs = match runs.into_iter().collect::<Result<Vec<_>, _>>() {
        Ok(r) => r,
        Err(e) if e.is_undefined_combination() => return Ok(()),
        Err(e) => return Err(e.to_string()),
    };
    for run in &runs {
        let rule1 = run
            .trace
            .iter()
            .filter(|t| matches!(t, Firing::Message { .. }))
            .count();
        let rule2 = run.trace.len() - rule1;
        if rule1 != 2 * tree.edge_count() || rule2 != tree.len() {
            return Err(format!(
                "{rule1} messages and {rule2} marginals on {} vertices",
                tree.len()
            ));
        }
        if run.messages.len() != rule1 {
            return Err("message store size differs from the trace".into());
        }
        let leaves = tree.leaves();
        match run.trace.first() {
            Some(Firing::Message { from, .. }) if leaves.contains(from) => {}
            Some(Firing::Marginal { .. }) if tree.len() == 1 => {}
            other => return Err(format!("first firing {other:?} is not at a leaf")),
        }
    }
    let (first, rest) = runs.split_first().unwrap();
    for other in rest {
        for (a, b) in first.marginals.iter().zip(&other.marginals) {
            if !a.exact_eq(b) {
                return Err(format!("schedules disagree: {a:?} vs {b:?}"));
            }
        }
        for (key, m) in first.messages.iter() {
            if !other
                .messages
                .get(key.0, key.1)
                .is_some_and(|o| o.exact_eq(m))
            {
                return Err(format!("message {key:?} differs between schedules"));
            }
        }
    }
    Ok(())
}

/// Twig-deletion collection rooted at each vertex against message passing.
pub fn collect_agrees<V: Draw>(f: &Factorization<V>, tree: &MarkovTree, tol: f64) -> Check {
    let Ok(run) = propagate_all(f, tree, Schedule::Fifo) else {
        return Ok(());
    };
    for (h, m) in run.by_hyperedge(tree) {
        let seq = construction_sequence(f.hypergraph(), Some(h))
            .map_err(|e| e.to_string())?
            .ok_or("hypertree has no rooted sequence")?;
        let c = collect_marginal(f, &seq, h).map_err(|e| e.to_string())?;
        if !c.approx_eq(m, tol) {
            return Err(format!("collect at {h}: {c:?} vs {m:?}"));
        }
    }
    Ok(())
}

/// Deleting the last twig of the grown tree: the remaining local valuations,
/// with the twig's marginal folded into its branch, combine to the joint's
/// marginal on the remaining variables.
pub fn twig_deletion_identity<V: Draw>(
    f: &Factorization<V>,
    tree: &GrownTree,
    tol: f64,
) -> Result<bool, String> {
    let edges = tree.edges();
    let Some(Some(b)) = tree.parent.last().copied() else {
        return Ok(false);
    };
    let (t, branch) = (edges.last().unwrap(), &edges[b]);
    let rest: Vec<&Hyperedge> = edges[..edges.len() - 1].iter().collect();
    let remaining: locomp::VarSet = rest.iter().flat_map(|e| e.iter().cloned()).collect();
    let local = |h: &Hyperedge| f.local_valuation(h);
    let rhs = (|| {
        let reduced = local(t)?.marginalize(&t.intersection(branch))?;
        let folded = local(branch)?.combine(&reduced)?;
        let others = rest
            .iter()
            .filter(|h| **h != branch)
            .map(|h| local(h))
            .collect::<Result<Vec<_>, _>>()?;
        combine_all(std::iter::once(&folded).chain(&others))
    })();
    let lhs = brute_force_marginal(f, &remaining);
    match (lhs, rhs) {
        (Ok(a), Ok(b)) if a.approx_eq(&b, tol) => Ok(true),
        (Ok(a), Ok(b)) => Err(format!("deleting {t} into {branch}: {a:?} vs {b:?}")),
        (Err(a), Err(b)) if a.is_undefined_combination() && b.is_undefined_combination() => {
            Ok(false)
        }
        (a, b) => Err(format!(
            "deleting {t} into {branch}: {:?} vs {:?}",
            a.err(),
            b.err()
        )),
    }
}

/// Leaves of a random Markov tree are twigs with their neighbour as a
/// branch, and the vertex hypergraph is a hypertree.
pub fn leaves_are_twigs(tree: &MarkovTree) -> Check {
    if !tree.verify_markov_property() {
        return Err("generated tree is not a Markov tree".into());
    }
    let graph = tree.hypergraph().map_err(|e| e.to_string())?;
    if construction_sequence(&graph, None)
        .map_err(|e| e.to_string())?
        .is_none()
    {
        return Err(format!("{graph} is not recognized as a hypertree"));
    }
    for leaf in tree.leaves() {
        let h = tree.vertex(leaf);
        let neighbour = tree.vertex(tree.neighbors(leaf)[0]);
        let branches = graph.is_twig(h).map_err(|e| e.to_string())?;
        if !branches.contains(neighbour) {
            return Err(format!(
                "leaf {h} of {graph} is not a twig with branch {neighbour}"
            ));
        }
        if !tree
            .remove_leaf(leaf)
            .map_err(|e| e.to_string())?
            .verify_markov_property()
        {
            return Err(format!("removing leaf {h} broke the Markov property"));
        }
    }
    Ok(())
}
