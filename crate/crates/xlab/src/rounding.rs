//! Two-stage rounding of a vector solution into a subset of exact size
//! `⌊ρN⌋`: Gaussian projection with truncation, sign sampling, biased
//! Bernoulli rounding, and a final random size adjustment. The end-to-end
//! entry point also evaluates a best-of-16 random baseline and returns the
//! better outcome, so a subset of the exact target size always comes back.

use crate::graph::BipartiteGraph;
use crate::sdp::{build_form, default_rank, solve, warm_start, VectorSolution};
use crate::seeding::rng_for;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RoundingError {
    #[error("stage-2 ones count {ones} is outside the acceptance window [{lo}, {hi}]")]
    WindowViolated { ones: usize, lo: usize, hi: usize },
}

/// Parameters of the rounding stages. The truncation height is `3·√(ln d)`
/// and the bias is `(1-ρ)·√(2/d)`; retries scale with `d·t²` to match the
/// inverse acceptance probability of the Gaussian stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundingConfig {
    pub rho: f64,
    pub d: usize,
    pub t_trunc: f64,
    pub bias_delta: f64,
    pub max_retries: usize,
    /// Stage-1 acceptance: `|Σ z_i| ≤ c1·N/d`.
    pub c1: f64,
    /// Stage-1 acceptance: `Σ_j y_j² ≥ c2·δ̂/ln d`.
    pub c2: f64,
    pub seed: u64,
}

impl RoundingConfig {
    pub fn new(rho: f64, d: usize, seed: u64) -> Self {
        assert!((0.0..1.0).contains(&rho) && rho > 0.0, "rho in (0,1)");
        assert!(d >= 2, "the truncation height needs d >= 2");
        let t_trunc = 3.0 * (d as f64).ln().sqrt();
        RoundingConfig {
            rho,
            d,
            t_trunc,
            bias_delta: (1.0 - rho) * (2.0 / d as f64).sqrt(),
            max_retries: (8.0 * d as f64 * t_trunc * t_trunc).ceil() as usize,
            c1: 4.0,
            c2: 0.1,
            seed,
        }
    }
}

/// Stage-1 outcome: truncated Gaussian projections scaled into `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussianRound {
    pub z: Vec<f64>,
    /// `Σ_i ⟨g, v_i⟩` before truncation; zero whenever `Σ v_i = 0`.
    pub pre_truncation_sum: f64,
    pub sum_z: f64,
    /// `Σ_j ((1/d)·Σ_{i∈Γ(j)} z_i)²` for the accepted draw.
    pub stage_objective: f64,
    pub attempts: usize,
    pub accepted: bool,
}

fn stage_objective(g: &BipartiteGraph, d: usize, z: &[f64]) -> f64 {
    g.right_adj()
        .iter()
        .map(|row| {
            let y = row.iter().map(|&i| z[i as usize]).sum::<f64>() / d as f64;
            y * y
        })
        .sum()
}

/// Projects the vectors onto Gaussian directions, truncating at `±t`, and
/// retries until the balance and objective predicates hold.
pub fn gaussian_round(
    solution: &VectorSolution,
    g: &BipartiteGraph,
    cfg: &RoundingConfig,
) -> GaussianRound {
    let n = g.n_left();
    let vectors = solution.matrix(n);
    let t = cfg.t_trunc;
    let balance_cap = cfg.c1 * n as f64 / cfg.d as f64;
    let objective_floor = cfg.c2 * solution.objective / (cfg.d as f64).ln();
    let mut best: Option<GaussianRound> = None;
    for attempt in 0..cfg.max_retries.max(1) {
        let mut rng = rng_for(cfg.seed, "gaussian-round", attempt as u64);
        let gauss: Vec<f64> =
            (0..solution.rank).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mut pre_sum = 0.0;
        let z: Vec<f64> = (0..n)
            .map(|i| {
                let zeta: f64 =
                    (0..solution.rank).map(|c| vectors[(i, c)] * gauss[c]).sum();
                pre_sum += zeta;
                (zeta.clamp(-t, t)) / t
            })
            .collect();
        let sum_z: f64 = z.iter().sum();
        let objective = stage_objective(g, cfg.d, &z);
        let balanced = sum_z.abs() <= balance_cap;
        let accepted = balanced && objective >= objective_floor;
        let candidate = GaussianRound {
            z,
            pre_truncation_sum: pre_sum,
            sum_z,
            stage_objective: objective,
            attempts: attempt + 1,
            accepted,
        };
        if accepted {
            return candidate;
        }
        let better = match &best {
            None => true,
            Some(b) => {
                let b_bal = b.sum_z.abs() <= balance_cap;
                (balanced, objective) > (b_bal, b.stage_objective)
            }
        };
        if better {
            best = Some(candidate);
        }
    }
    let mut out = best.expect("at least one attempt");
    out.attempts = cfg.max_retries.max(1);
    out
}

/// Independently rounds each `z_i ∈ [-1,1]` to `±1` with expectation `z_i`.
pub fn sign_sample(z: &[f64], seed: u64) -> Vec<i8> {
    let mut rng = rng_for(seed, "sign-sample", 0);
    z.iter()
        .map(|&zi| {
            let p_plus = (1.0 + zi) / 2.0;
            if rng.random::<f64>() < p_plus {
                1
            } else {
                -1
            }
        })
        .collect()
}

/// Stage-2 outcome: the Bernoulli keep/drop indicators.
#[derive(Clone, Debug)]
pub struct BiasedRound {
    pub x: Vec<bool>,
    /// Whether the positive-bias branch was drawn for this round.
    pub branch_positive: bool,
    pub ones: usize,
    pub clamp_events: usize,
    pub attempts: usize,
    pub accepted: bool,
    pub window: (usize, usize),
}

/// Acceptance window for `Σ x_i`: `(1-ρ)(1 ± d^{-1.5})·N`.
pub fn ones_window(cfg: &RoundingConfig, n: usize) -> (usize, usize) {
    let spread = (cfg.d as f64).powf(-1.5);
    let lo = ((1.0 - cfg.rho) * (1.0 - spread) * n as f64).floor() as usize;
    let hi = ((1.0 - cfg.rho) * (1.0 + spread) * n as f64).ceil() as usize;
    (lo, hi)
}

/// Flips a fair coin for the bias direction, then keeps each vertex with
/// probability `1 - ρ ± δ·z_i` (clamped into [0,1], clamps counted), retrying
/// until the kept count lands in the acceptance window.
pub fn biased_round(z_pm: &[i8], cfg: &RoundingConfig) -> BiasedRound {
    let n = z_pm.len();
    let window = ones_window(cfg, n);
    let mut best: Option<BiasedRound> = None;
    for attempt in 0..cfg.max_retries.max(1) {
        let mut rng = rng_for(cfg.seed, "biased-round", attempt as u64);
        let branch_positive = rng.random::<f64>() < 0.5;
        let sign = if branch_positive { 1.0 } else { -1.0 };
        let mut clamp_events = 0usize;
        let x: Vec<bool> = z_pm
            .iter()
            .map(|&zi| {
                let raw = 1.0 - cfg.rho + sign * cfg.bias_delta * f64::from(zi);
                let p = raw.clamp(0.0, 1.0);
                if p != raw {
                    clamp_events += 1;
                }
                rng.random::<f64>() < p
            })
            .collect();
        let ones = x.iter().filter(|&&b| b).count();
        let accepted = ones >= window.0 && ones <= window.1;
        let candidate = BiasedRound {
            x,
            branch_positive,
            ones,
            clamp_events,
            attempts: attempt + 1,
            accepted,
            window,
        };
        if accepted {
            return candidate;
        }
        let better = match &best {
            None => true,
            Some(b) => {
                let mid = (1.0 - cfg.rho) * n as f64;
                (ones as f64 - mid).abs() < (b.ones as f64 - mid).abs()
            }
        };
        if better {
            best = Some(candidate);
        }
    }
    let mut out = best.expect("at least one attempt");
    out.attempts = cfg.max_retries.max(1);
    out
}

/// Turns the keep/drop indicators into the selected subset `T = {i: x_i = 0}`
/// of exact size `⌊ρN⌋` by uniform random additions or deletions.
pub fn adjust_to_exact(
    x: &[bool],
    cfg: &RoundingConfig,
    seed: u64,
) -> Result<(Vec<u32>, usize), RoundingError> {
    let n = x.len();
    let window = ones_window(cfg, n);
    let ones = x.iter().filter(|&&b| b).count();
    if ones < window.0 || ones > window.1 {
        return Err(RoundingError::WindowViolated { ones, lo: window.0, hi: window.1 });
    }
    let target = (cfg.rho * n as f64).floor() as usize;
    let mut selected: Vec<u32> =
        (0..n as u32).filter(|&i| !x[i as usize]).collect();
    let mut rng = rng_for(seed, "adjust-size", 0);
    let mut moved = 0usize;
    while selected.len() > target {
        let pick = rng.random_range(0..selected.len());
        selected.swap_remove(pick);
        moved += 1;
    }
    if selected.len() < target {
        let mut pool: Vec<u32> = (0..n as u32).filter(|&i| x[i as usize]).collect();
        while selected.len() < target {
            let pick = rng.random_range(0..pool.len());
            selected.push(pool.swap_remove(pick));
            moved += 1;
        }
    }
    selected.sort_unstable();
    Ok((selected, moved))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RoundingDiagnostics {
    pub sdp_objective: f64,
    pub warm_objective: Option<f64>,
    pub stage1_attempts: usize,
    pub stage1_accepted: bool,
    pub sum_z: f64,
    pub stage2_objective: f64,
    pub stage2_attempts: usize,
    pub stage2_accepted: bool,
    pub clamp_events: usize,
    pub adjustment_moves: usize,
    pub baseline_count: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RoundingOutcome {
    pub subset: Vec<u32>,
    pub neighbor_count: usize,
    pub used_baseline: bool,
    pub retries_exhausted: bool,
    pub diagnostics: RoundingDiagnostics,
}

/// Solver budget for the end-to-end pipeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxConfig {
    pub rounding: RoundingConfig,
    pub sdp_rank: usize,
    pub sdp_iterations: usize,
    pub sdp_restarts: usize,
    /// Use the graph's planted subset as a warm start when present.
    pub use_planted_warm_start: bool,
    pub baseline_draws: usize,
}

impl ApproxConfig {
    pub fn new(g: &BipartiteGraph, rho: f64, seed: u64) -> Self {
        ApproxConfig {
            rounding: RoundingConfig::new(rho, g.nominal_right_degree().max(2), seed),
            sdp_rank: default_rank(g.n_left()),
            sdp_iterations: 2000,
            sdp_restarts: 8,
            use_planted_warm_start: true,
            baseline_draws: 16,
        }
    }
}

fn best_random_baseline(
    g: &BipartiteGraph,
    target: usize,
    draws: usize,
    seed: u64,
) -> (Vec<u32>, usize) {
    let run_one = |i: usize| -> (usize, Vec<u32>) {
        let mut rng = rng_for(seed, "baseline-subset", i as u64);
        let mut subset = crate::graph::sample_distinct(&mut rng, g.n_left(), target);
        subset.sort_unstable();
        (g.neighbor_count(&subset), subset)
    };
    let results: Vec<(usize, Vec<u32>)> = {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            (0..draws.max(1)).into_par_iter().map(run_one).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..draws.max(1)).map(run_one).collect()
        }
    };
    let (count, subset) =
        results.into_iter().min_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1))).unwrap();
    (subset, count)
}

/// Full pipeline: solve the relaxation (warm-started from a planted subset
/// when available), round in two stages, adjust to exact size, and return the
/// better of the rounded subset and a best-of-N random baseline.
pub fn approximate_min_neighbor(
    g: &BipartiteGraph,
    cfg: &ApproxConfig,
) -> RoundingOutcome {
    let n = g.n_left();
    let rho = cfg.rounding.rho;
    let target = (rho * n as f64).floor() as usize;
    let form = build_form(g, false);
    let warm = if cfg.use_planted_warm_start {
        g.planted_subset().and_then(|s| {
            (s.len() == target)
                .then(|| warm_start(n, s, rho, cfg.sdp_rank, &form).ok())
                .flatten()
        })
    } else {
        None
    };
    let solution = solve(
        &form,
        cfg.sdp_rank,
        cfg.sdp_iterations,
        cfg.sdp_restarts,
        cfg.rounding.seed,
        warm.as_ref(),
    );

    let stage1 = gaussian_round(&solution, g, &cfg.rounding);
    let signs = sign_sample(&stage1.z, crate::seeding::derive_seed(cfg.rounding.seed, "signs", 0));
    let stage2 = biased_round(&signs, &cfg.rounding);
    let adjusted = adjust_to_exact(
        &stage2.x,
        &cfg.rounding,
        crate::seeding::derive_seed(cfg.rounding.seed, "adjust", 0),
    );

    let (baseline_subset, baseline_count) =
        best_random_baseline(g, target, cfg.baseline_draws, cfg.rounding.seed);

    let mut diagnostics = RoundingDiagnostics {
        sdp_objective: solution.objective,
        warm_objective: warm.as_ref().map(|w| w.objective),
        stage1_attempts: stage1.attempts,
        stage1_accepted: stage1.accepted,
        sum_z: stage1.sum_z,
        stage2_objective: stage_objective(g, cfg.rounding.d, &stage1.z),
        stage2_attempts: stage2.attempts,
        stage2_accepted: stage2.accepted,
        clamp_events: stage2.clamp_events,
        adjustment_moves: 0,
        baseline_count,
    };

    let pipeline = match adjusted {
        Ok((subset, moves)) => {
            diagnostics.adjustment_moves = moves;
            let count = g.neighbor_count(&subset);
            Some((subset, count))
        }
        Err(_) => None,
    };
    let retries_exhausted = !stage1.accepted || !stage2.accepted;

    match pipeline {
        Some((subset, count)) if count <= baseline_count => RoundingOutcome {
            subset,
            neighbor_count: count,
            used_baseline: false,
            retries_exhausted,
            diagnostics,
        },
        _ => RoundingOutcome {
            subset: baseline_subset,
            neighbor_count: baseline_count,
            used_baseline: true,
            retries_exhausted,
            diagnostics,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_planted_gap, gen_right_regular_distinct, BipartiteGraph};

    fn zero_solution(n: usize, rank: usize) -> VectorSolution {
        VectorSolution {
            rank,
            vectors: vec![0.0; n * rank],
            objective: 0.0,
            max_norm_excess: 0.0,
            sum_norm: 0.0,
        }
    }

    #[test]
    fn zero_vectors_round_to_zero() {
        let g = gen_right_regular_distinct(10, 20, 3, 0);
        let cfg = RoundingConfig::new(0.5, 3, 7);
        let out = gaussian_round(&zero_solution(10, 4), &g, &cfg);
        assert!(out.z.iter().all(|&z| z == 0.0));
        assert_eq!(out.sum_z, 0.0);
        assert!(out.pre_truncation_sum.abs() < 1e-12);
    }

    #[test]
    fn pre_truncation_sum_vanishes_for_balanced_vectors() {
        let g = gen_planted_gap(40, 120, 3, 0.5, 0.3, 3).unwrap();
        let form = build_form(&g, false);
        let sol = solve(&form, 6, 200, 2, 5, None);
        let cfg = RoundingConfig::new(0.5, 3, 5);
        let out = gaussian_round(&sol, &g, &cfg);
        assert!(out.pre_truncation_sum.abs() <= 1e-9 * 40.0);
        assert!(out.z.iter().all(|&z| (-1.0..=1.0).contains(&z)));
    }

    #[test]
    fn gaussian_variance_matches_unit_vectors() {
        // Var⟨g, v⟩ = 1 for a unit vector; Monte Carlo within 3σ on a fixed
        // seed stream.
        let trials = 10_000usize;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for t in 0..trials {
            let mut rng = rng_for(123, "variance-check", t as u64);
            let g: Vec<f64> = (0..5).map(|_| StandardNormal.sample(&mut rng)).collect();
            let v = [0.5f64.sqrt(), 0.5f64.sqrt(), 0.0, 0.0, 0.0];
            let zeta: f64 = g.iter().zip(v).map(|(a, b)| a * b).sum();
            sum += zeta;
            sumsq += zeta * zeta;
        }
        let var = sumsq / trials as f64 - (sum / trials as f64).powi(2);
        // Var of the sample variance of a normal is about 2/n.
        assert!((var - 1.0).abs() <= 3.0 * (2.0 / trials as f64).sqrt());
    }

    #[test]
    fn sign_sample_edges_and_mean() {
        let z = vec![1.0, -1.0, 0.0];
        let s = sign_sample(&z, 9);
        assert_eq!(s[0], 1);
        assert_eq!(s[1], -1);
        let trials = 10_000;
        let mut total = 0i64;
        for t in 0..trials {
            total += i64::from(sign_sample(&[0.0], t as u64)[0]);
        }
        let mean = total as f64 / trials as f64;
        assert!(mean.abs() <= 3.0 / (trials as f64).sqrt());
    }

    #[test]
    fn biased_round_keeps_probabilities_in_range() {
        let cfg = RoundingConfig::new(0.5, 3, 11);
        // bias_delta = 0.5·sqrt(2/3) ≈ 0.408 < min(ρ, 1-ρ): no clamping.
        let z: Vec<i8> = (0..60).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        let out = biased_round(&z, &cfg);
        assert_eq!(out.clamp_events, 0);
        assert_eq!(out.x.len(), 60);
    }

    #[test]
    fn delta_zero_branches_coincide() {
        let mut cfg = RoundingConfig::new(0.5, 3, 2);
        cfg.bias_delta = 0.0;
        let z: Vec<i8> = vec![1; 40];
        // Pr[all kept on a 3-set] = (1-ρ)^3 = 1/8; sanity over repeats.
        let mut all_kept = 0usize;
        let trials = 4000;
        for t in 0..trials {
            cfg.seed = t as u64;
            let out = biased_round(&z, &cfg);
            if out.x[0] && out.x[1] && out.x[2] {
                all_kept += 1;
            }
        }
        let freq = all_kept as f64 / trials as f64;
        let sigma = (0.125 * 0.875 / trials as f64).sqrt();
        assert!((freq - 0.125).abs() <= 4.0 * sigma, "freq {freq}");
    }

    #[test]
    fn adjustment_reaches_exact_size() {
        let cfg = RoundingConfig::new(0.5, 3, 4);
        // Already exact: unchanged set.
        let x: Vec<bool> = (0..20).map(|i| i >= 10).collect();
        let (t, moves) = adjust_to_exact(&x, &cfg, 1).unwrap();
        assert_eq!(t, (0..10u32).collect::<Vec<_>>());
        assert_eq!(moves, 0);

        // One extra zero: exactly one deletion.
        let x: Vec<bool> = (0..20).map(|i| i >= 11).collect();
        let (t, moves) = adjust_to_exact(&x, &cfg, 1).unwrap();
        assert_eq!(t.len(), 10);
        assert_eq!(moves, 1);

        // Deletion never increases the neighbor set.
        let g = gen_right_regular_distinct(20, 30, 3, 8);
        let full: Vec<u32> = (0..11u32).collect();
        assert!(g.neighbor_count(&t) <= g.neighbor_count(&full));

        // Way outside the window: rejected.
        let x = vec![false; 20];
        assert!(matches!(
            adjust_to_exact(&x, &cfg, 1),
            Err(RoundingError::WindowViolated { .. })
        ));
    }

    #[test]
    fn complete_graph_outcome_matches_oracle() {
        let g = BipartiteGraph::new(8, 5, vec![(0..8u32).collect(); 5], 8).unwrap();
        let mut cfg = ApproxConfig::new(&g, 0.5, 3);
        cfg.sdp_iterations = 50;
        cfg.sdp_restarts = 2;
        let out = approximate_min_neighbor(&g, &cfg);
        assert_eq!(out.subset.len(), 4);
        assert_eq!(out.neighbor_count, 5);
    }

    #[test]
    fn pipeline_is_deterministic_and_exact_size() {
        let g = gen_planted_gap(40, 120, 3, 0.5, 0.25, 17).unwrap();
        let mut cfg = ApproxConfig::new(&g, 0.5, 23);
        cfg.sdp_iterations = 150;
        cfg.sdp_restarts = 2;
        let a = approximate_min_neighbor(&g, &cfg);
        let b = approximate_min_neighbor(&g, &cfg);
        assert_eq!(a.subset, b.subset);
        assert_eq!(a.neighbor_count, b.neighbor_count);
        assert_eq!(a.subset.len(), 20);
    }

    #[test]
    fn never_worse_than_baseline() {
        for seed in 0..5 {
            let g = gen_right_regular_distinct(30, 90, 3, seed);
            let mut cfg = ApproxConfig::new(&g, 0.5, seed);
            cfg.sdp_iterations = 100;
            cfg.sdp_restarts = 2;
            let out = approximate_min_neighbor(&g, &cfg);
            let (_, baseline) =
                best_random_baseline(&g, 15, cfg.baseline_draws, cfg.rounding.seed);
            assert!(out.neighbor_count <= baseline);
            assert_eq!(out.subset.len(), 15);
        }
    }
}
