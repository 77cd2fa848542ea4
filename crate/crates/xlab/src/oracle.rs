//! Brute-force ground truth: exact minimum neighbor sets over k-subsets,
//! disperser/expander certification, the closed-form expected neighbor count,
//! and the largest-small-neighborhood duality witness.
//!
//! Exact search enumerates k-subsets in lexicographic order with a running
//! neighbor-union lower bound for pruning; ties always resolve to the
//! lexicographically smallest subset. With the `parallel` feature the
//! combination space is partitioned by first element and merged by
//! `(value, subset)`, so the answer is identical to the sequential one.

use crate::bits::Bitset;
use crate::graph::BipartiteGraph;
use crate::seeding::rng_for;
use crate::subspace::binomial;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default cap on enumerated k-subsets.
pub const DEFAULT_SUBSET_CAP: u128 = 10_000_000;
/// Default cap on the power-set enumeration behind the duality witness.
pub const DEFAULT_POWERSET_CAP: u128 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{combinations} subsets exceed the cap {cap}")]
    TooManySubsets { combinations: u128, cap: u128 },
    #[error("{0}")]
    Invalid(String),
}

/// A subset of the left side together with its recomputable neighbor count.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionWitness {
    pub subset: Vec<u32>,
    pub neighbor_count: usize,
    /// True when the witness came from exhaustive enumeration.
    pub exhaustive: bool,
}

struct SearchCtx<'a> {
    masks: &'a [Bitset],
    n: usize,
    k: usize,
}

/// Best completion of `prefix` (already unioned into `unions[depth]`),
/// scanning start indices in lexicographic order.
fn search_from(
    ctx: &SearchCtx,
    depth: usize,
    start: usize,
    prefix: &mut Vec<u32>,
    unions: &mut Vec<Bitset>,
    best: &mut Option<(usize, Vec<u32>)>,
    foreign_bound: impl Fn() -> usize + Copy,
) {
    for i in start..=(ctx.n - (ctx.k - depth)) {
        let (head, tail) = unions.split_at_mut(depth + 1);
        tail[0].copy_from(&head[depth]);
        tail[0].union_with(&ctx.masks[i]);
        let count = tail[0].count();
        if let Some((b, _)) = best {
            if count >= *b {
                continue;
            }
        }
        if count > foreign_bound() {
            continue;
        }
        prefix.push(i as u32);
        if depth + 1 == ctx.k {
            let better = best.as_ref().is_none_or(|(b, _)| count < *b);
            if better {
                *best = Some((count, prefix.clone()));
            }
        } else {
            search_from(ctx, depth + 1, i + 1, prefix, unions, best, foreign_bound);
        }
        prefix.pop();
    }
}

fn check_cap(n: usize, k: usize, cap: u128) -> Result<(), OracleError> {
    let combinations = binomial(n as u128, k as u128);
    if combinations > cap {
        return Err(OracleError::TooManySubsets { combinations, cap });
    }
    Ok(())
}

/// Exact minimizer of `|Γ(S)|` over k-subsets of the left side.
pub fn min_neighbor_exact(
    g: &BipartiteGraph,
    k: usize,
    cap: u128,
) -> Result<ExpansionWitness, OracleError> {
    if k > g.n_left() {
        return Err(OracleError::Invalid(format!(
            "k={k} exceeds the {} left vertices",
            g.n_left()
        )));
    }
    check_cap(g.n_left(), k, cap)?;
    if k == 0 {
        return Ok(ExpansionWitness { subset: vec![], neighbor_count: 0, exhaustive: true });
    }
    let masks = g.left_masks();
    Ok(run_search(g, &masks, k))
}

#[cfg(feature = "parallel")]
fn run_search(g: &BipartiteGraph, masks: &[Bitset], k: usize) -> ExpansionWitness {
    use rayon::prelude::*;
    use std::sync::atomic::{AtomicUsize, Ordering};
    let n = g.n_left();
    let global = AtomicUsize::new(usize::MAX);
    let best = (0..=(n - k))
        .into_par_iter()
        .filter_map(|first| {
            let ctx = SearchCtx { masks, n, k };
            let mut unions = vec![Bitset::new(g.n_right()); k + 1];
            let (head, tail) = unions.split_at_mut(1);
            tail[0].copy_from(&head[0]);
            tail[0].union_with(&masks[first]);
            let count = tail[0].count();
            // Strict comparison against foreign partitions keeps equal-value
            // lexicographic winners alive.
            if count > global.load(Ordering::Relaxed) {
                return None;
            }
            let mut prefix = vec![first as u32];
            let mut best = None;
            if k == 1 {
                best = Some((count, prefix.clone()));
            } else {
                search_from(&ctx, 1, first + 1, &mut prefix, &mut unions, &mut best, || {
                    global.load(Ordering::Relaxed)
                });
            }
            if let Some((value, _)) = &best {
                global.fetch_min(*value, Ordering::Relaxed);
            }
            best
        })
        .min_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)))
        .expect("at least one partition yields a candidate");
    ExpansionWitness { neighbor_count: best.0, subset: best.1, exhaustive: true }
}

#[cfg(not(feature = "parallel"))]
fn run_search(g: &BipartiteGraph, masks: &[Bitset], k: usize) -> ExpansionWitness {
    let best = sequential_search(g, masks, k);
    ExpansionWitness { neighbor_count: best.0, subset: best.1, exhaustive: true }
}

fn sequential_search(g: &BipartiteGraph, masks: &[Bitset], k: usize) -> (usize, Vec<u32>) {
    let ctx = SearchCtx { masks, n: g.n_left(), k };
    let mut unions = vec![Bitset::new(g.n_right()); k + 1];
    let mut prefix = Vec::with_capacity(k);
    let mut best = None;
    search_from(&ctx, 0, 0, &mut prefix, &mut unions, &mut best, usize::max_value);
    best.expect("nonempty combination space")
}

/// Sequential reference version of [`min_neighbor_exact`]; always available
/// and used by the bench suite to compare against the parallel path.
pub fn min_neighbor_exact_sequential(
    g: &BipartiteGraph,
    k: usize,
    cap: u128,
) -> Result<ExpansionWitness, OracleError> {
    if k > g.n_left() {
        return Err(OracleError::Invalid(format!(
            "k={k} exceeds the {} left vertices",
            g.n_left()
        )));
    }
    check_cap(g.n_left(), k, cap)?;
    if k == 0 {
        return Ok(ExpansionWitness { subset: vec![], neighbor_count: 0, exhaustive: true });
    }
    let masks = g.left_masks();
    let (neighbor_count, subset) = sequential_search(g, &masks, k);
    Ok(ExpansionWitness { subset, neighbor_count, exhaustive: true })
}

/// Best of `trials` uniform k-subsets; an upper-bound heuristic for sizes
/// beyond exhaustive reach.
pub fn min_neighbor_sampled(
    g: &BipartiteGraph,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<ExpansionWitness, OracleError> {
    if k > g.n_left() || trials == 0 {
        return Err(OracleError::Invalid("need k <= n_left and trials >= 1".into()));
    }
    let mut best: Option<(usize, Vec<u32>)> = None;
    for t in 0..trials {
        let mut rng = rng_for(seed, "min-neighbor-sampled", t as u64);
        let mut subset = crate::graph::sample_distinct(&mut rng, g.n_left(), k);
        subset.sort_unstable();
        let count = g.neighbor_count(&subset);
        let better = match &best {
            None => true,
            Some((c, s)) => count < *c || (count == *c && subset < *s),
        };
        if better {
            best = Some((count, subset));
        }
    }
    let (neighbor_count, subset) = best.unwrap();
    Ok(ExpansionWitness { subset, neighbor_count, exhaustive: false })
}

/// True iff every k-subset of the left side has at least `s` neighbors.
pub fn is_disperser(
    g: &BipartiteGraph,
    k: usize,
    s: usize,
    cap: u128,
) -> Result<bool, OracleError> {
    Ok(min_neighbor_exact(g, k, cap)?.neighbor_count >= s)
}

/// True iff every k-subset of the left side has at least `a·k` neighbors.
pub fn is_expander(g: &BipartiteGraph, k: usize, a: f64, cap: u128) -> Result<bool, OracleError> {
    Ok(min_neighbor_exact(g, k, cap)?.neighbor_count as f64 >= a * k as f64)
}

/// The `(≤K, a)` variant: an expander at every size `1..=K`.
pub fn is_expander_up_to(
    g: &BipartiteGraph,
    k_max: usize,
    a: f64,
    cap: u128,
) -> Result<bool, OracleError> {
    for k in 1..=k_max {
        if !is_expander(g, k, a, cap)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Expected `|Γ(S)|` over a uniform random `set_size`-subset when every right
/// vertex has exactly `d` distinct neighbors:
/// `M · (1 − ∏_{i<d} (N−i−|S|)/(N−i))`, as an exact rational.
pub fn expected_random_neighbors(
    n_left: usize,
    n_right: usize,
    d: usize,
    set_size: usize,
) -> BigRational {
    if set_size == 0 {
        return BigRational::zero();
    }
    let mut miss = crate::ratio::one();
    for i in 0..d {
        if n_left < i + set_size || n_left == i {
            // The subset necessarily meets every d-set of distinct neighbors.
            miss = BigRational::zero();
            break;
        }
        miss *= crate::ratio::ratio_u((n_left - i - set_size) as u128, (n_left - i) as u128);
    }
    crate::ratio::from_int(n_right as i64) * (crate::ratio::one() - miss)
}

/// The pair `(T, S)`: the largest left subset with `|Γ(T)| ≤ γM`, and
/// `S = [M] ∖ Γ(T)`, which attains the exact minimum neighbor count among
/// `|S|`-subsets of the transpose.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualityWitness {
    pub t_set: Vec<u32>,
    pub t_neighbor_count: usize,
    pub s_set: Vec<u32>,
    /// `⌊γM⌋`, the neighbor budget used for T.
    pub budget: usize,
}

pub fn duality_witness(
    g: &BipartiteGraph,
    gamma: f64,
    cap: u128,
) -> Result<DualityWitness, OracleError> {
    let n = g.n_left();
    if n >= 127 || (1u128 << n) > cap {
        return Err(OracleError::TooManySubsets { combinations: 1u128 << n.min(126), cap });
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(OracleError::Invalid("gamma must be in [0,1]".into()));
    }
    let budget = (gamma * g.n_right() as f64 + 1e-9).floor() as usize;
    let masks = g.left_masks();
    // Neighbor sets for all subsets by dynamic programming on bitmasks.
    let total = 1usize << n;
    let mut best: Option<(usize, Vec<u32>)> = None;
    let mut table: Vec<Bitset> = Vec::with_capacity(total);
    table.push(Bitset::new(g.n_right()));
    for mask in 1..total {
        let low = mask.trailing_zeros() as usize;
        let mut set = table[mask & (mask - 1)].clone();
        set.union_with(&masks[low]);
        if set.count() <= budget {
            let size = mask.count_ones() as usize;
            let subset: Vec<u32> = (0..n as u32).filter(|&i| mask >> i & 1 == 1).collect();
            let better = match &best {
                None => true,
                Some((bs, bsub)) => size > *bs || (size == *bs && subset < *bsub),
            };
            if better {
                best = Some((size, subset));
            }
        }
        table.push(set);
    }
    let t_set = best.map(|(_, s)| s).unwrap_or_default();
    let gamma_t = g.neighbor_set(&t_set);
    let hit: std::collections::BTreeSet<u32> = gamma_t.iter().copied().collect();
    let s_set: Vec<u32> = (0..g.n_right() as u32).filter(|j| !hit.contains(j)).collect();
    debug_assert!(s_set.len() >= g.n_right() - budget);
    // Γ_transpose(S) avoids T by construction.
    debug_assert!({
        let tr = g.transpose();
        let ts: std::collections::BTreeSet<u32> = t_set.iter().copied().collect();
        tr.neighbor_set(&s_set).iter().all(|i| !ts.contains(i))
    });
    Ok(DualityWitness { t_neighbor_count: gamma_t.len(), t_set, s_set, budget })
}
