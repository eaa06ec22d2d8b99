//! Model checking, witness synthesis, and query solving for branching flow
//! logics over capacitated flow networks.
//!
//! A flow network has one source, a set of target vertices, labeled vertices,
//! and integer edge capacities. Formulas combine CTL*-style path quantifiers
//! with flow propositions (comparisons against the through-flow at a vertex)
//! and flow quantifiers that range over whole flow functions: integral,
//! maximal, or real-valued. The crate provides:
//!
//! - [`network`]: the network data model, JSON format, and validation;
//! - [`maxflow`]: max flow, lower-bounded feasibility, vertex-range flows;
//! - [`lp`]: exact rational feasibility for strict inequality systems;
//! - [`formula`]: syntax, parser, printer, fragment classification, rewrites;
//! - [`semantics`]: evaluation of formulas under a fixed flow;
//! - [`checker`]: the general model checker and witness synthesizer;
//! - [`cbfl`]: the polynomial engine for conjunctive formulas;
//! - [`query`]: strongest-solution queries over values and propositions;
//! - [`oracle`]: brute-force reference implementations for cross-checking.
//!
//! Every nontrivial algorithm in the crate has an oracle counterpart, and the
//! test suite holds them to exact agreement on randomized desk-scale inputs.

pub mod cbfl;
pub mod checker;
pub mod flow;
pub mod formula;
pub mod gen;
pub mod lp;
pub mod maxflow;
pub mod network;
pub mod oracle;
pub mod query;
pub mod report;
pub mod semantics;

#[cfg(test)]
pub(crate) mod fixtures;
