//! Exact marginals of factorized valuations by local computation on
//! hypertrees.
//!
//! A joint valuation given as a combination of factors on the hyperedges of
//! a hypergraph is marginalized by passing messages along a Markov tree
//! built from a hypertree construction sequence. The engine is generic over
//! the [`Valuation`] trait; [`Potential`] (probability tables) and
//! [`MassFunction`] (belief functions under Dempster's rule) are provided.

pub mod axioms;
pub mod belief;
pub mod cli;
pub mod error;
pub mod frame;
pub mod hypergraph;
pub mod markov_tree;
pub mod model;
pub mod potential;
pub mod propagation;
pub mod valuation;

pub use belief::{MassFunction, Subset};
pub use error::{Error, Result};
pub use frame::{Configuration, Frame, Frames, Variable};
pub use hypergraph::{
    construction_sequence, hypertree_cover, var_set, ConstructionSequence, Hyperedge, Hypergraph,
    Step, VarSet, VariableId,
};
pub use markov_tree::MarkovTree;
pub use potential::Potential;
pub use propagation::{
    brute_force_marginal, collect_marginal, propagate_all, Firing, MessageStore, Propagation,
    Schedule,
};
pub use valuation::{combine_all, Factorization, Valuation};
