//! Vertex-expansion laboratory.
//!
//! The crate has three layers:
//!
//! * **Combinatorics** — finite fields ([`field`]), linear subspace predicates and
//!   their staying probabilities ([`subspace`]), bipartite graphs with generators
//!   and transforms ([`graph`]), and exact brute-force expansion oracles
//!   ([`oracle`]).
//! * **Relaxations** — constraint instances over a subspace predicate, width-bounded
//!   affine closures, pseudo-distributions and their moment matrices, list lifts,
//!   and gap reports ([`lasserre`]).
//! * **Approximation** — the quadratic-form relaxation solved by low-rank projected
//!   ascent ([`sdp`]) and the Gaussian/biased rounding pipeline that returns a
//!   subset of exact target size ([`rounding`]).
//!
//! All probabilities and moments are exact rationals; eigenvalue checks are
//! floating point with explicit tolerances. Every random choice flows from a
//! caller-supplied seed through [`seeding::derive_seed`], so each entry point is
//! deterministic. With the default `parallel` feature the heavy enumerations run
//! on rayon; disabling it compiles sequential equivalents that return identical
//! results.

pub mod bits;
pub mod eig;
pub mod field;
pub mod gf_linalg;
pub mod graph;
pub mod lasserre;
pub mod oracle;
pub mod ratio;
pub mod rounding;
pub mod sdp;
pub mod seeding;
pub mod subspace;

pub use field::{make_field, FieldError, FiniteField};
pub use graph::BipartiteGraph;
pub use oracle::ExpansionWitness;
pub use subspace::{
    best_staying_subset, pairwise_independence_check, quadratic_code, quadratic_code_truncated,
    simplex_code, staying_probability, LinearSubspace, StayingReport,
};
