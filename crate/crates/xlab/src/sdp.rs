//! The quadratic-form relaxation: maximize `Σ_j ‖(1/d)·Σ_{i∈Γ(j)} v_i‖²`
//! over vectors in the unit ball summing to zero, solved by low-rank
//! projected gradient ascent with restarts.
//!
//! The solver is a desk-scale stand-in for an SDP oracle: the rounding stage
//! only needs a good feasible point, not the optimum. Restarts run
//! concurrently with derived seeds; the winner is picked deterministically by
//! `(objective, restart index)`.

use crate::graph::BipartiteGraph;
use crate::seeding::rng_for;
use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SdpError {
    #[error("subset size {got} does not match ⌊ρN⌋ = {want}")]
    BadSize { got: usize, want: usize },
}

/// `A = (1/d²)·Σ_j χ_{Γ(j)} χ_{Γ(j)}ᵀ` plus the constraint groups needed to
/// evaluate the objective per right vertex.
pub struct QuadraticForm {
    pub matrix: DMatrix<f64>,
    groups: Vec<Vec<u32>>,
    scale: f64,
    n: usize,
}

/// Builds the form from a graph. `per_vertex_scaling` divides each group by
/// its actual degree instead of the graph's nominal `d`.
pub fn build_form(g: &BipartiteGraph, per_vertex_scaling: bool) -> QuadraticForm {
    let n = g.n_left();
    let d = g.nominal_right_degree().max(1) as f64;
    let mut matrix = DMatrix::<f64>::zeros(n, n);
    for row in g.right_adj() {
        let scale = if per_vertex_scaling { row.len().max(1) as f64 } else { d };
        let w = 1.0 / (scale * scale);
        for &a in row {
            for &b in row {
                matrix[(a as usize, b as usize)] += w;
            }
        }
    }
    QuadraticForm {
        matrix,
        groups: g.right_adj().to_vec(),
        scale: if per_vertex_scaling { -1.0 } else { d },
        n,
    }
}

impl QuadraticForm {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `⟨A, V Vᵀ⟩` evaluated through the matrix contraction.
    pub fn objective_form(&self, vectors: &DMatrix<f64>) -> f64 {
        (vectors.transpose() * &self.matrix * vectors).trace()
    }

    /// The same objective evaluated per right vertex.
    pub fn objective_groups(&self, vectors: &DMatrix<f64>) -> f64 {
        let r = vectors.ncols();
        let mut total = 0.0;
        let mut acc = vec![0.0; r];
        for group in &self.groups {
            acc.fill(0.0);
            for &i in group {
                for (c, a) in acc.iter_mut().enumerate() {
                    *a += vectors[(i as usize, c)];
                }
            }
            let scale = if self.scale < 0.0 { group.len().max(1) as f64 } else { self.scale };
            total += acc.iter().map(|x| x * x).sum::<f64>() / (scale * scale);
        }
        total
    }
}

/// Feasible point of the relaxation: rows are the vectors.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VectorSolution {
    pub rank: usize,
    /// Row-major `n × rank` entries.
    pub vectors: Vec<f64>,
    pub objective: f64,
    /// `max_i (‖v_i‖² - 1)` clamped below at 0.
    pub max_norm_excess: f64,
    /// `‖Σ_i v_i‖`.
    pub sum_norm: f64,
}

impl VectorSolution {
    pub fn matrix(&self, n: usize) -> DMatrix<f64> {
        DMatrix::from_row_slice(n, self.rank, &self.vectors)
    }

    fn from_matrix(v: &DMatrix<f64>, objective: f64) -> Self {
        let max_norm_excess = (0..v.nrows())
            .map(|i| v.row(i).norm_squared() - 1.0)
            .fold(0.0f64, f64::max)
            .max(0.0);
        let sum_norm = v.row_sum().norm();
        VectorSolution {
            rank: v.ncols(),
            vectors: v.transpose().as_slice().iter().copied().collect::<Vec<_>>(),
            objective,
            max_norm_excess,
            sum_norm,
        }
    }
}

/// Default factorization rank.
pub fn default_rank(n: usize) -> usize {
    (((2 * n) as f64).sqrt().ceil() as usize + 1).min(n.max(2))
}

/// The explicit rank-1 feasible start from a candidate subset: constant
/// vectors on and off the subset, balanced to sum to zero.
pub fn warm_start(
    n: usize,
    subset: &[u32],
    rho: f64,
    rank: usize,
    form: &QuadraticForm,
) -> Result<VectorSolution, SdpError> {
    let want = (rho * n as f64).floor() as usize;
    if subset.len() != want {
        return Err(SdpError::BadSize { got: subset.len(), want });
    }
    let (on_value, off_value) = if rho >= 0.5 {
        (-(1.0 - rho) / rho, 1.0)
    } else {
        (-1.0, rho / (1.0 - rho))
    };
    let mut v = DMatrix::<f64>::zeros(n, rank.max(1));
    let mut inside = vec![false; n];
    for &i in subset {
        inside[i as usize] = true;
    }
    for i in 0..n {
        v[(i, 0)] = if inside[i] { on_value } else { off_value };
    }
    // Exact re-centering removes the floor(ρN) imbalance.
    recenter(&mut v);
    clip_norms(&mut v);
    let objective = form.objective_groups(&v);
    Ok(VectorSolution::from_matrix(&v, objective))
}

fn recenter(v: &mut DMatrix<f64>) {
    let mean = v.row_sum() / v.nrows() as f64;
    for i in 0..v.nrows() {
        for c in 0..v.ncols() {
            v[(i, c)] -= mean[c];
        }
    }
}

fn clip_norms(v: &mut DMatrix<f64>) {
    for i in 0..v.nrows() {
        let norm = v.row(i).norm();
        if norm > 1.0 {
            let s = 1.0 / norm;
            for c in 0..v.ncols() {
                v[(i, c)] *= s;
            }
        }
    }
}

/// Alternating projection toward the intersection of sum-zero and unit-ball
/// constraints; the intersection has no closed-form projection.
fn project(v: &mut DMatrix<f64>, rounds: usize) {
    for _ in 0..rounds {
        recenter(v);
        let worst = (0..v.nrows()).map(|i| v.row(i).norm()).fold(0.0f64, f64::max);
        if worst <= 1.0 + 1e-13 {
            break;
        }
        clip_norms(v);
    }
}

/// Finalization: exact centering, then a uniform rescale if any norm still
/// exceeds one (preserves the zero sum).
fn finalize(v: &mut DMatrix<f64>) {
    project(v, 50);
    recenter(v);
    let worst = (0..v.nrows()).map(|i| v.row(i).norm()).fold(0.0f64, f64::max);
    if worst > 1.0 {
        *v /= worst;
    }
}

fn ascend(form: &QuadraticForm, v: &mut DMatrix<f64>, iterations: usize, step0: f64) -> f64 {
    let mut obj = form.objective_groups(v);
    let mut step = step0;
    for _ in 0..iterations {
        let grad = &form.matrix * &*v * 2.0;
        let mut accepted = false;
        let mut trial_step = step;
        for _ in 0..30 {
            let mut cand = &*v + &grad * trial_step;
            project(&mut cand, 50);
            let cand_obj = form.objective_groups(&cand);
            if cand_obj >= obj {
                *v = cand;
                obj = cand_obj;
                accepted = true;
                break;
            }
            trial_step *= 0.5;
        }
        if !accepted {
            break;
        }
        step = trial_step;
    }
    obj
}

/// Best feasible point over seeded restarts, never worse than the warm start.
pub fn solve(
    form: &QuadraticForm,
    rank: usize,
    iterations: usize,
    restarts: usize,
    seed: u64,
    warm: Option<&VectorSolution>,
) -> VectorSolution {
    let n = form.n();
    let rank = rank.max(2).min(n.max(2));
    // Fixed base step from a crude operator-norm bound.
    let norm_bound = form.matrix.abs().row_sum().max().max(1e-12);
    let step0 = 0.5 / norm_bound;

    let run_one = |r: usize| -> (f64, usize, DMatrix<f64>) {
        let mut v = match (r, warm) {
            (0, Some(w)) => {
                let mut m = DMatrix::<f64>::zeros(n, rank);
                let wm = w.matrix(n);
                for i in 0..n {
                    for c in 0..w.rank.min(rank) {
                        m[(i, c)] = wm[(i, c)];
                    }
                }
                m
            }
            _ => {
                let mut rng = rng_for(seed, "sdp-restart", r as u64);
                let mut m = DMatrix::<f64>::from_fn(n, rank, |_, _| {
                    StandardNormal.sample(&mut rng)
                });
                m /= (rank as f64).sqrt();
                m
            }
        };
        project(&mut v, 50);
        ascend(form, &mut v, iterations, step0);
        finalize(&mut v);
        (form.objective_groups(&v), r, v)
    };

    let results: Vec<(f64, usize, DMatrix<f64>)> = {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            (0..restarts.max(1)).into_par_iter().map(run_one).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..restarts.max(1)).map(run_one).collect()
        }
    };
    let (obj, _, v) = results
        .into_iter()
        .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(b.1.cmp(&a.1)))
        .expect("at least one restart");
    let mut best = VectorSolution::from_matrix(&v, obj);
    if let Some(w) = warm {
        if w.objective > best.objective {
            best = w.clone();
        }
    }
    best
}
