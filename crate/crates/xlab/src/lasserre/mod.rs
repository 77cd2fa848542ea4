//! Constraint instances, width-bounded affine closures, pseudo-distributions,
//! moment matrices, and gap reports.

pub mod closure;
pub mod csp;
pub mod gap;
pub mod moments;

pub use closure::{affine_closure, AffineClosure, AffineEquation};
pub use csp::{
    expansion_condition_check, gen_csp_instance, instance_from_graph, Constraint, CspError,
    ExpansionCheck, ExpansionThreshold, ListCspInstance,
};
pub use gap::{gap_report, GapConfig, GapReport, GapStatus, MomentsMode, PredicateSpec};
pub use moments::{
    cardinality_matrix, cardinality_scalar_residual, exact_moments, lift_list, list_value,
    moment_matrix, per_constraint_marginal_uniform, pseudo_moments, to_vertex_expansion,
    vertex_sdp_objective, MomentError, MomentMatrix, MomentMode, PseudoDistribution,
};
