//! Controllability and shortest controllable switching sequences for
//! discrete-time switched linear control systems
//!
//! ```text
//! x_k = A_{i_k} x_{k-1} + B_{i_k} u_k
//! ```
//!
//! where the active mode `i_k ∈ {1..m}` is chosen together with the input.
//! All linear algebra is exact over the rationals.
//!
//! - [`linalg`]: rational matrices and canonical subspaces.
//! - [`system`]: systems, mode sequences, JSON format, feedback regularization.
//! - [`reach`]: `R(π)`, the `V_k` chain and the reachable set.
//! - [`search`]: subspace automaton, shortest controllable sequences, greedy construction.
//! - [`extremal`]: families with known minimal lengths and weight certificates.
//! - [`reduction`]: reduction of equal-image rank-`r` systems to dimension `n − r`.
//! - [`bounds`]: randomized experiments against the known upper bounds.

pub mod bounds;
pub mod error;
pub mod examples;
pub mod extremal;
pub mod linalg;
pub mod reach;
pub mod reduction;
pub mod search;
pub mod system;

pub use error::{Error, Result};
pub use linalg::{parse_rational, rat, rref, Rational, RationalMatrix, Subspace};
pub use reach::{
    concat_identity_check, ge_characterization, is_controllable, reachable_set, reachable_space_of_sequence, v_chain,
    VChain,
};
pub use search::{
    build_automaton, export_dot, greedy_controllable_sequence, shortest_controllable_sequences, SearchResult,
    SearchStatus, SubspaceAutomaton,
};
pub use system::{
    feedback_regularize, load_system, save_system, validate, Mode, ModeSequence, SwitchedSystem, ValidityReport,
};
