//! End-to-end gap reports: instance → closure → moments → lift → complement
//! → feasibility checks → brute-force comparison.
//!
//! A report is CERTIFIED-GAP only when every feasibility check passes, the
//! integral optimum is exhaustive, and the relaxation value sits strictly
//! below it. Partial reports are still emitted when the closure derives a
//! contradiction or the exact-mode system is unsatisfiable.

use crate::lasserre::closure::affine_closure;
use crate::lasserre::csp::{
    expansion_condition_check, gen_csp_instance, ExpansionCheck, ExpansionThreshold,
};
use crate::lasserre::moments::{
    cardinality_matrix, cardinality_scalar_residual, exact_moments, lift_list, list_value,
    moment_matrix, per_constraint_marginal_uniform, pseudo_moments, to_vertex_expansion,
    MomentError,
};
use crate::oracle::{min_neighbor_exact, min_neighbor_sampled, OracleError};
use crate::ratio;
use crate::seeding::{fnv1a, rng_for};
use crate::subspace::{
    best_staying_subset, quadratic_code, quadratic_code_truncated, simplex_code, LinearSubspace,
    SubspaceError,
};
use num_rational::BigRational;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// PSD acceptance: smallest eigenvalue at least this.
pub const PSD_TOLERANCE: f64 = -1e-8;

#[derive(Debug, Error)]
pub enum GapError {
    #[error(transparent)]
    Subspace(#[from] SubspaceError),
    #[error(transparent)]
    Csp(#[from] crate::lasserre::csp::CspError),
    #[error(transparent)]
    Moment(#[from] MomentError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Which predicate family to build, given `q` from the config.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum PredicateSpec {
    Simplex { l: u32 },
    Quadratic { l: u32 },
    QuadraticTruncated { rows: usize },
}

impl PredicateSpec {
    pub fn build(&self, q: u64) -> Result<LinearSubspace, SubspaceError> {
        match *self {
            PredicateSpec::Simplex { l } => simplex_code(q, l),
            PredicateSpec::Quadratic { l } => quadratic_code(q, l),
            PredicateSpec::QuadraticTruncated { rows } => quadratic_code_truncated(q, rows),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentsMode {
    Closure,
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapConfig {
    pub n: usize,
    pub q: u8,
    pub m: usize,
    pub d: usize,
    pub predicate: PredicateSpec,
    pub k: usize,
    pub level: usize,
    pub width: usize,
    pub seed: u64,
    pub planted: bool,
    pub moments: MomentsMode,
    pub expansion_cap: usize,
    /// Cap on exhaustive subsets for the integral optimum; falls back to
    /// sampling (and forfeits certification) beyond it.
    pub subset_cap: u128,
    pub sample_trials: usize,
    pub index_cap: usize,
    pub equation_cap: usize,
}

impl GapConfig {
    pub fn with_defaults(
        n: usize,
        q: u8,
        m: usize,
        d: usize,
        k: usize,
        level: usize,
        width: usize,
        seed: u64,
    ) -> Self {
        GapConfig {
            n,
            q,
            m,
            d,
            predicate: PredicateSpec::Simplex { l: 2 },
            k,
            level,
            width,
            seed,
            planted: false,
            moments: MomentsMode::Closure,
            expansion_cap: 2,
            subset_cap: crate::oracle::DEFAULT_SUBSET_CAP,
            sample_trials: 2000,
            index_cap: crate::lasserre::moments::DEFAULT_INDEX_CAP,
            equation_cap: crate::lasserre::closure::DEFAULT_EQUATION_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalField {
    pub text: String,
    pub value: f64,
}

impl RationalField {
    pub fn of(r: &BigRational) -> Self {
        RationalField { text: ratio::to_string(r), value: ratio::to_f64(r) }
    }

    pub fn parse(&self) -> Option<BigRational> {
        ratio::parse(&self.text)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenReport {
    pub name: String,
    pub dim: usize,
    pub min_eigenvalue: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapStatus {
    Completed,
    ContradictionDerived,
    Unsatisfiable,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GapReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub config: GapConfig,
    pub status: GapStatus,
    /// Best staying subset of the alphabet and its probability.
    pub staying_subset: Vec<u8>,
    pub p0: RationalField,
    pub retained_constraints: usize,
    pub excluded_right_vertices: usize,
    pub expansion: ExpansionCheck,
    pub closure_truncated: bool,
    pub marginals_uniform: usize,
    pub marginal_consistency: bool,
    pub list_value: Option<RationalField>,
    pub psd: Vec<EigenReport>,
    pub cardinality_target: RationalField,
    pub cardinality_scalar_residual: Option<RationalField>,
    pub pseudo_objective: Option<RationalField>,
    pub integral_value: Option<usize>,
    pub integral_exhaustive: bool,
    pub integral_witness: Vec<u32>,
    pub certified_gap: bool,
    pub recomputation_hash: String,
}

impl GapReport {
    /// Hash of the report with the hash field blanked; stored on emission and
    /// checked on load.
    pub fn compute_hash(&self) -> String {
        let mut blank = self.clone();
        blank.recomputation_hash = String::new();
        let bytes = serde_json::to_vec(&blank).expect("report serializes");
        format!("{:016x}", fnv1a(&bytes))
    }

    pub fn verify_hash(&self) -> bool {
        self.compute_hash() == self.recomputation_hash
    }
}

/// Runs the whole pipeline for one configuration.
pub fn gap_report(cfg: &GapConfig) -> Result<GapReport, GapError> {
    let predicate = cfg.predicate.build(u64::from(cfg.q))?;
    let staying = best_staying_subset(&predicate, cfg.k)?;
    let planted_assignment: Option<Vec<u8>> = cfg.planted.then(|| {
        let mut rng = rng_for(cfg.seed, "gap-planted-assignment", 0);
        (0..cfg.n).map(|_| rng.random_range(0..cfg.q)).collect()
    });
    let (graph, inst) = gen_csp_instance(
        cfg.n,
        cfg.q,
        cfg.m,
        cfg.d,
        &predicate,
        cfg.k,
        cfg.seed,
        planted_assignment.as_deref(),
    )?;
    let expansion = expansion_condition_check(&inst, cfg.expansion_cap, ExpansionThreshold::Standard)?;

    // ρN = (q - k)·n: the selected-mass target after complementation.
    let rho_n = ratio::from_int(((cfg.q as usize - cfg.k) * cfg.n) as i64);

    let mut report = GapReport {
        schema_version: 1,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        status: GapStatus::Completed,
        staying_subset: staying.subset.clone(),
        p0: RationalField::of(&staying.probability),
        retained_constraints: inst.constraints.len(),
        excluded_right_vertices: inst.excluded.len(),
        expansion,
        closure_truncated: false,
        marginals_uniform: 0,
        marginal_consistency: false,
        list_value: None,
        psd: Vec::new(),
        cardinality_target: RationalField::of(&rho_n),
        cardinality_scalar_residual: None,
        pseudo_objective: None,
        integral_value: None,
        integral_exhaustive: false,
        integral_witness: Vec::new(),
        certified_gap: false,
        recomputation_hash: String::new(),
    };

    let base = match cfg.moments {
        MomentsMode::Closure => {
            let closure = affine_closure(&inst, cfg.width, cfg.equation_cap);
            report.closure_truncated = closure.truncated;
            if closure.contradiction {
                report.status = GapStatus::ContradictionDerived;
                report.recomputation_hash = report.compute_hash();
                return Ok(report);
            }
            pseudo_moments(&inst, &closure, cfg.level)?
        }
        MomentsMode::Exact => match exact_moments(&inst, cfg.level) {
            Ok(pd) => pd,
            Err(MomentError::Unsatisfiable) => {
                report.status = GapStatus::Unsatisfiable;
                report.recomputation_hash = report.compute_hash();
                return Ok(report);
            }
            Err(e) => return Err(e.into()),
        },
    };

    report.marginals_uniform =
        per_constraint_marginal_uniform(&base, &inst).iter().filter(|&&b| b).count();
    let lifted = lift_list(&base, &staying.subset);
    report.list_value = Some(RationalField::of(&list_value(&lifted, &inst)));
    let comp = to_vertex_expansion(&lifted);
    report.marginal_consistency = comp
        .check_marginal_consistency((2 * cfg.level + 1).min(cfg.n))
        .is_ok();

    report.cardinality_scalar_residual =
        Some(RationalField::of(&cardinality_scalar_residual(&comp, &rho_n)));

    let mm = moment_matrix(&comp, cfg.level, cfg.index_cap)?;
    let mm_eig = mm.min_eigenvalue();
    report.psd.push(EigenReport {
        name: "moment".into(),
        dim: mm.dim(),
        min_eigenvalue: mm_eig,
        passed: mm_eig >= PSD_TOLERANCE,
    });
    let cm = cardinality_matrix(&comp, cfg.level, &rho_n, cfg.index_cap)?;
    let cm_eig = cm.min_eigenvalue();
    report.psd.push(EigenReport {
        name: "cardinality".into(),
        dim: cm.dim(),
        min_eigenvalue: cm_eig,
        passed: cm_eig >= PSD_TOLERANCE,
    });

    let pseudo = crate::lasserre::moments::vertex_sdp_objective(&comp, &graph)?;
    report.pseudo_objective = Some(RationalField::of(&pseudo));

    let subset_size = (cfg.q as usize - cfg.k) * cfg.n;
    let combinations =
        crate::subspace::binomial(graph.n_left() as u128, subset_size as u128);
    let witness = if combinations <= cfg.subset_cap {
        min_neighbor_exact(&graph, subset_size, cfg.subset_cap)?
    } else {
        min_neighbor_sampled(&graph, subset_size, cfg.sample_trials, cfg.seed)?
    };
    report.integral_value = Some(witness.neighbor_count);
    report.integral_exhaustive = witness.exhaustive;
    report.integral_witness = witness.subset;

    let integral = ratio::from_int(witness.neighbor_count as i64);
    report.certified_gap = report.status == GapStatus::Completed
        && report.expansion.passed
        && report.marginal_consistency
        && report.psd.iter().all(|e| e.passed)
        && report
            .cardinality_scalar_residual
            .as_ref()
            .and_then(RationalField::parse)
            .is_some_and(|r| r == ratio::zero())
        && report.integral_exhaustive
        && pseudo < integral;

    report.recomputation_hash = report.compute_hash();
    Ok(report)
}
