//! Bipartite graphs with right-driven adjacency, seeded generators, and the
//! graph transforms used by the gap and amplification pipelines.
//!
//! The right side owns the primary adjacency (generators and constraint
//! extraction read right rows); left adjacency is built lazily. Graphs are
//! immutable after construction and safe to share across threads.

use crate::bits::Bitset;
use crate::seeding::rng_for;
use crate::subspace::LinearSubspace;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;
use thiserror::Error;

/// Cap on `n_left * n_right` for the product construction.
pub const MAX_PRODUCT_CELLS: u128 = 1 << 26;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("adjacency index {index} out of range for {n_left} left vertices")]
    IndexOutOfRange { index: u32, n_left: usize },
    #[error("operation requires a square graph, got {n_left} x {n_right}")]
    NotSquare { n_left: usize, n_right: usize },
    #[error("product with {cells} cells exceeds the memory cap")]
    TooLarge { cells: u128 },
    #[error("no left vertex has degree within the requested band")]
    EmptyResult,
    #[error("{0}")]
    Invalid(String),
}

/// Per-right-vertex variable/value labels for constraint-layout graphs.
/// Tuple order is significant: slot t of right vertex j pairs variable
/// `tuples[j][t].0` with shift value `tuples[j][t].1`, and the left vertex
/// behind the pair is `var * q + value`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Labels {
    pub q: u8,
    pub tuples: Vec<Vec<(u32, u8)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planted: Option<Vec<u8>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BipartiteGraph {
    n_left: usize,
    n_right: usize,
    /// Sorted, duplicate-free neighbor lists per right vertex.
    right_adj: Vec<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Labels>,
    /// Declared bound on right degrees; generators record their `d` here.
    nominal_right_degree: usize,
    /// Planted low-expansion left subset, when the generator created one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    planted_subset: Option<Vec<u32>>,
    #[serde(skip)]
    left_adj: OnceLock<Vec<Vec<u32>>>,
}

impl PartialEq for BipartiteGraph {
    fn eq(&self, other: &Self) -> bool {
        self.n_left == other.n_left
            && self.n_right == other.n_right
            && self.right_adj == other.right_adj
            && self.labels == other.labels
    }
}

impl BipartiteGraph {
    pub fn new(
        n_left: usize,
        n_right: usize,
        mut right_adj: Vec<Vec<u32>>,
        nominal_right_degree: usize,
    ) -> Result<Self, GraphError> {
        if right_adj.len() != n_right {
            return Err(GraphError::Invalid(format!(
                "expected {n_right} adjacency rows, got {}",
                right_adj.len()
            )));
        }
        for row in &mut right_adj {
            row.sort_unstable();
            row.dedup();
            if let Some(&bad) = row.iter().find(|&&i| i as usize >= n_left) {
                return Err(GraphError::IndexOutOfRange { index: bad, n_left });
            }
        }
        let max_deg = right_adj.iter().map(Vec::len).max().unwrap_or(0);
        Ok(BipartiteGraph {
            n_left,
            n_right,
            right_adj,
            labels: None,
            nominal_right_degree: nominal_right_degree.max(max_deg),
            planted_subset: None,
            left_adj: OnceLock::new(),
        })
    }

    pub fn n_left(&self) -> usize {
        self.n_left
    }

    pub fn n_right(&self) -> usize {
        self.n_right
    }

    pub fn right_adj(&self) -> &[Vec<u32>] {
        &self.right_adj
    }

    pub fn labels(&self) -> Option<&Labels> {
        self.labels.as_ref()
    }

    pub fn planted_subset(&self) -> Option<&[u32]> {
        self.planted_subset.as_deref()
    }

    pub fn nominal_right_degree(&self) -> usize {
        self.nominal_right_degree
    }

    /// Lazily built left-to-right adjacency.
    pub fn left_adj(&self) -> &[Vec<u32>] {
        self.left_adj.get_or_init(|| {
            let mut adj = vec![Vec::new(); self.n_left];
            for (j, row) in self.right_adj.iter().enumerate() {
                for &i in row {
                    adj[i as usize].push(j as u32);
                }
            }
            adj
        })
    }

    /// Neighbor bitmask over the right side for each left vertex.
    pub fn left_masks(&self) -> Vec<Bitset> {
        self.left_adj()
            .iter()
            .map(|row| {
                let mut b = Bitset::new(self.n_right);
                for &j in row {
                    b.set(j as usize);
                }
                b
            })
            .collect()
    }

    /// `Γ(S)` for a set of left vertices, as a sorted list of right vertices.
    pub fn neighbor_set(&self, subset: &[u32]) -> Vec<u32> {
        let mut hit = Bitset::new(self.n_right);
        let left = self.left_adj();
        for &i in subset {
            for &j in &left[i as usize] {
                hit.set(j as usize);
            }
        }
        hit.iter_ones().map(|j| j as u32).collect()
    }

    pub fn neighbor_count(&self, subset: &[u32]) -> usize {
        self.neighbor_set(subset).len()
    }

    pub fn degree_stats(&self) -> DegreeStats {
        let right: Vec<usize> = self.right_adj.iter().map(Vec::len).collect();
        let left: Vec<usize> = self.left_adj().iter().map(Vec::len).collect();
        let sum_r: usize = right.iter().sum();
        let sum_l: usize = left.iter().sum();
        debug_assert_eq!(sum_r, sum_l);
        DegreeStats {
            min_left: left.iter().copied().min().unwrap_or(0),
            max_left: left.iter().copied().max().unwrap_or(0),
            mean_left: sum_l as f64 / self.n_left.max(1) as f64,
            min_right: right.iter().copied().min().unwrap_or(0),
            max_right: right.iter().copied().max().unwrap_or(0),
            mean_right: sum_r as f64 / self.n_right.max(1) as f64,
            edge_count: sum_r,
            d0: self.nominal_right_degree as f64 * self.n_right as f64 / self.n_left.max(1) as f64,
        }
    }

    /// Swaps the two sides.
    pub fn transpose(&self) -> BipartiteGraph {
        let right_adj = self.left_adj().to_vec();
        let nominal = right_adj.iter().map(Vec::len).max().unwrap_or(0);
        BipartiteGraph {
            n_left: self.n_right,
            n_right: self.n_left,
            right_adj,
            labels: None,
            nominal_right_degree: nominal,
            planted_subset: None,
            left_adj: OnceLock::new(),
        }
    }

    /// Serializes as a plain edge list: `N M` header then one `i j` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.n_left, self.n_right);
        for (j, row) in self.right_adj.iter().enumerate() {
            for &i in row {
                out.push_str(&format!("{i} {j}\n"));
            }
        }
        out
    }

    pub fn from_edge_list(text: &str) -> Result<BipartiteGraph, GraphError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| GraphError::Invalid("empty edge list".into()))?;
        let mut parts = header.split_whitespace();
        let parse = |s: Option<&str>| -> Result<usize, GraphError> {
            s.and_then(|x| x.parse().ok())
                .ok_or_else(|| GraphError::Invalid("bad edge-list line".into()))
        };
        let n_left = parse(parts.next())?;
        let n_right = parse(parts.next())?;
        let mut right_adj = vec![Vec::new(); n_right];
        for line in lines {
            let mut p = line.split_whitespace();
            let i = parse(p.next())?;
            let j = parse(p.next())?;
            if j >= n_right {
                return Err(GraphError::Invalid(format!("right index {j} out of range")));
            }
            right_adj[j].push(i as u32);
        }
        BipartiteGraph::new(n_left, n_right, right_adj, 0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeStats {
    pub min_left: usize,
    pub max_left: usize,
    pub mean_left: f64,
    pub min_right: usize,
    pub max_right: usize,
    pub mean_right: f64,
    pub edge_count: usize,
    /// `d · M / N` for the declared right degree.
    pub d0: f64,
}

/// Random graph where each right vertex draws `d` independent uniform left
/// neighbors; collisions are deduplicated, so right degrees may drop below `d`.
pub fn gen_right_regular(n_left: usize, n_right: usize, d: usize, seed: u64) -> BipartiteGraph {
    assert!(n_left >= 1 && d >= 1);
    let mut rng = rng_for(seed, "gen-right-regular", 0);
    let right_adj: Vec<Vec<u32>> = (0..n_right)
        .map(|_| (0..d).map(|_| rng.random_range(0..n_left) as u32).collect())
        .collect();
    let mut g = BipartiteGraph::new(n_left, n_right, right_adj, d).expect("indices in range");
    g.nominal_right_degree = d;
    g
}

/// Random graph where each right vertex draws `d` *distinct* left neighbors,
/// so every right degree is exactly `d`. Requires `n_left >= d`.
pub fn gen_right_regular_distinct(
    n_left: usize,
    n_right: usize,
    d: usize,
    seed: u64,
) -> BipartiteGraph {
    assert!(n_left >= d && d >= 1);
    let mut rng = rng_for(seed, "gen-right-regular-distinct", 0);
    let right_adj: Vec<Vec<u32>> =
        (0..n_right).map(|_| sample_distinct(&mut rng, n_left, d)).collect();
    BipartiteGraph::new(n_left, n_right, right_adj, d).expect("indices in range")
}

pub(crate) fn sample_distinct(rng: &mut impl Rng, n: usize, d: usize) -> Vec<u32> {
    // Floyd's algorithm: uniform d-subset without materializing 0..n.
    let mut chosen: Vec<u32> = Vec::with_capacity(d);
    for j in n - d..n {
        let t = rng.random_range(0..=j) as u32;
        if chosen.contains(&t) {
            chosen.push(j as u32);
        } else {
            chosen.push(t);
        }
    }
    chosen
}

/// Constraint-layout graph on `n·q` left vertices: right vertex `j` draws `d`
/// distinct variables and one shift value per variable; the left vertex behind
/// slot `t` is `var_t · q + shift_t`. With a planted assignment `x*`, shifts
/// are `x*` minus a uniformly drawn codeword of `predicate`, so `x*` satisfies
/// every induced constraint.
pub fn gen_csp_layout(
    n: usize,
    q: u8,
    m: usize,
    d: usize,
    predicate: &LinearSubspace,
    seed: u64,
    planted: Option<&[u8]>,
) -> Result<BipartiteGraph, GraphError> {
    if predicate.block_len() != d {
        return Err(GraphError::Invalid(format!(
            "predicate block length {} does not match d={d}",
            predicate.block_len()
        )));
    }
    if predicate.field().order() != q {
        return Err(GraphError::Invalid("predicate field does not match q".into()));
    }
    if n < d {
        return Err(GraphError::Invalid(format!("need n >= d, got n={n}, d={d}")));
    }
    if let Some(x) = planted {
        if x.len() != n || x.iter().any(|&v| v >= q) {
            return Err(GraphError::Invalid("planted assignment malformed".into()));
        }
    }
    let f = predicate.field();
    let mut rng = rng_for(seed, "gen-csp-layout", 0);
    let mut tuples = Vec::with_capacity(m);
    let mut right_adj = Vec::with_capacity(m);
    for _ in 0..m {
        let mut vars = sample_distinct(&mut rng, n, d);
        vars.shuffle(&mut rng);
        let shifts: Vec<u8> = match planted {
            None => (0..d).map(|_| rng.random_range(0..q)).collect(),
            Some(x) => {
                let idx = rng.random_range(0..predicate.size() as u64);
                let code = predicate.codeword_at(u128::from(idx));
                vars.iter()
                    .zip(&code)
                    .map(|(&v, &c)| f.sub(x[v as usize], c))
                    .collect()
            }
        };
        right_adj.push(
            vars.iter().zip(&shifts).map(|(&v, &s)| v * u32::from(q) + u32::from(s)).collect(),
        );
        tuples.push(vars.into_iter().zip(shifts).collect());
    }
    let mut g = BipartiteGraph::new(n * q as usize, m, right_adj, d)?;
    g.nominal_right_degree = d;
    g.labels = Some(Labels { q, tuples, planted: planted.map(<[u8]>::to_vec) });
    Ok(g)
}

/// Planted low-expansion instance: a seeded `ρN`-subset `S*` plus a block of
/// right vertices drawn entirely outside `S*`, so `|Γ(S*)| ≤ (1-gap)·M`.
/// Remaining right vertices draw `d` distinct neighbors from all of `[N]`.
pub fn gen_planted_gap(
    n_left: usize,
    n_right: usize,
    d: usize,
    rho: f64,
    gap_fraction: f64,
    seed: u64,
) -> Result<BipartiteGraph, GraphError> {
    if !(0.0..1.0).contains(&rho) || rho <= 0.0 {
        return Err(GraphError::Invalid("rho must be in (0,1)".into()));
    }
    if !(0.0..=1.0).contains(&gap_fraction) {
        return Err(GraphError::Invalid("gap fraction must be in [0,1]".into()));
    }
    let subset_size = (rho * n_left as f64).floor() as usize;
    let outside = n_left - subset_size;
    if outside < d || n_left < d {
        return Err(GraphError::Invalid("not enough vertices outside the planted set".into()));
    }
    let mut rng = rng_for(seed, "gen-planted-gap", 0);
    let mut perm: Vec<u32> = (0..n_left as u32).collect();
    perm.shuffle(&mut rng);
    let planted: Vec<u32> = {
        let mut s = perm[..subset_size].to_vec();
        s.sort_unstable();
        s
    };
    let complement: Vec<u32> = perm[subset_size..].to_vec();
    let holdout = (gap_fraction * n_right as f64).ceil() as usize;
    let right_adj: Vec<Vec<u32>> = (0..n_right)
        .map(|j| {
            if j < holdout {
                let picks = sample_distinct(&mut rng, complement.len(), d);
                picks.into_iter().map(|p| complement[p as usize]).collect()
            } else {
                sample_distinct(&mut rng, n_left, d)
            }
        })
        .collect();
    let mut g = BipartiteGraph::new(n_left, n_right, right_adj, d)?;
    g.nominal_right_degree = d;
    g.planted_subset = Some(planted);
    Ok(g)
}

/// Adds the identity matching to a square graph: edge `(i,j)` iff the input
/// has it or `i = j`, so `Γ(S) = Γ_H(S) ∪ S` for every `S`.
pub fn diagonal_closure(h: &BipartiteGraph) -> Result<BipartiteGraph, GraphError> {
    if h.n_left != h.n_right {
        return Err(GraphError::NotSquare { n_left: h.n_left, n_right: h.n_right });
    }
    let right_adj: Vec<Vec<u32>> = h
        .right_adj
        .iter()
        .enumerate()
        .map(|(j, row)| {
            let mut r = row.clone();
            r.push(j as u32);
            r
        })
        .collect();
    BipartiteGraph::new(h.n_left, h.n_right, right_adj, h.nominal_right_degree + 1)
}

/// k-fold tensor product with `W` membership columns: left side `V^k`, right
/// side `V^k ∪ (V × [W])`. Tuple `(a_1..a_k)` connects to `(b_1..b_k)` iff
/// every coordinate pair is an edge of `g0` or equal, and to `(i, w)` iff
/// `i ∈ {a_1..a_k}`. Expects `g0` square with the diagonal already included.
pub fn product_amplify(
    g0: &BipartiteGraph,
    k: u32,
    w: usize,
) -> Result<BipartiteGraph, GraphError> {
    if g0.n_left != g0.n_right {
        return Err(GraphError::NotSquare { n_left: g0.n_left, n_right: g0.n_right });
    }
    let n_base = g0.n_left as u128;
    let nk_big = n_base.checked_pow(k).ok_or(GraphError::TooLarge { cells: u128::MAX })?;
    let n_right_big = nk_big + n_base * w as u128;
    let cells = nk_big.checked_mul(n_right_big).ok_or(GraphError::TooLarge { cells: u128::MAX })?;
    if cells > MAX_PRODUCT_CELLS {
        return Err(GraphError::TooLarge { cells });
    }
    let n = g0.n_left;
    let nk = nk_big as usize;
    let decode = |mut t: usize| -> Vec<usize> {
        let mut coords = vec![0usize; k as usize];
        for c in (0..k as usize).rev() {
            coords[c] = t % n;
            t /= n;
        }
        coords
    };
    // Per-coordinate edge test on g0 (diagonal included via the input).
    let mut edge = vec![false; n * n];
    for (j, row) in g0.right_adj.iter().enumerate() {
        for &i in row {
            edge[i as usize * n + j] = true;
        }
    }
    let mut right_adj: Vec<Vec<u32>> = Vec::with_capacity(nk + n * w);
    for bt in 0..nk {
        let b = decode(bt);
        let mut nbrs = Vec::new();
        for at in 0..nk {
            let a = decode(at);
            let ok = a.iter().zip(&b).all(|(&ai, &bi)| ai == bi || edge[ai * n + bi]);
            if ok {
                nbrs.push(at as u32);
            }
        }
        right_adj.push(nbrs);
    }
    for i in 0..n {
        // Membership column (i, w): tuples containing i in some coordinate.
        let mut nbrs = Vec::new();
        for at in 0..nk {
            if decode(at).contains(&i) {
                nbrs.push(at as u32);
            }
        }
        for _ in 0..w {
            right_adj.push(nbrs.clone());
        }
    }
    BipartiteGraph::new(nk, nk + n * w, right_adj, 0)
}

/// Left-tuple index of `(a_1..a_k)` in a product graph over `n` base vertices.
pub fn tuple_index(coords: &[usize], n: usize) -> usize {
    coords.iter().fold(0, |acc, &c| acc * n + c)
}

/// Outcome of degree-band pruning.
#[derive(Clone, Debug)]
pub struct PruneReport {
    pub graph: BipartiteGraph,
    pub kept_left: Vec<u32>,
    pub kept_fraction: f64,
    pub retained_edge_fraction: f64,
}

/// Keeps the left vertices whose degree lies in `[(1-δ)D₀, (1+δ)D₀]` and
/// induces on them (the right side is kept whole).
pub fn prune_near_regular(g: &BipartiteGraph, delta: f64) -> Result<PruneReport, GraphError> {
    if !(0.0..1.0).contains(&delta) || delta <= 0.0 {
        return Err(GraphError::Invalid("delta must be in (0,1)".into()));
    }
    let d0 = g.nominal_right_degree as f64 * g.n_right as f64 / g.n_left as f64;
    let (lo, hi) = ((1.0 - delta) * d0, (1.0 + delta) * d0);
    let left = g.left_adj();
    let kept: Vec<u32> = (0..g.n_left)
        .filter(|&i| {
            let deg = left[i].len() as f64;
            deg >= lo && deg <= hi
        })
        .map(|i| i as u32)
        .collect();
    if kept.is_empty() {
        return Err(GraphError::EmptyResult);
    }
    let mut new_index = vec![u32::MAX; g.n_left];
    for (new, &old) in kept.iter().enumerate() {
        new_index[old as usize] = new as u32;
    }
    let right_adj: Vec<Vec<u32>> = g
        .right_adj
        .iter()
        .map(|row| {
            row.iter()
                .filter_map(|&i| {
                    let ni = new_index[i as usize];
                    (ni != u32::MAX).then_some(ni)
                })
                .collect()
        })
        .collect();
    let total_edges: usize = g.right_adj.iter().map(Vec::len).sum();
    let kept_edges: usize = right_adj.iter().map(Vec::len).sum();
    let graph = BipartiteGraph::new(kept.len(), g.n_right, right_adj, g.nominal_right_degree)?;
    Ok(PruneReport {
        graph,
        kept_fraction: kept.len() as f64 / g.n_left as f64,
        retained_edge_fraction: if total_edges == 0 {
            1.0
        } else {
            kept_edges as f64 / total_edges as f64
        },
        kept_left: kept,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subspace::simplex_code;
    use std::collections::BTreeSet;

    fn naive_neighbor_set(g: &BipartiteGraph, subset: &[u32]) -> Vec<u32> {
        // Edge-scan reimplementation, independent of the adjacency caches.
        let s: BTreeSet<u32> = subset.iter().copied().collect();
        let mut out = BTreeSet::new();
        for (j, row) in g.right_adj().iter().enumerate() {
            if row.iter().any(|i| s.contains(i)) {
                out.insert(j as u32);
            }
        }
        out.into_iter().collect()
    }

    #[test]
    fn single_left_vertex_collapses() {
        let g = gen_right_regular(1, 3, 2, 0);
        for row in g.right_adj() {
            assert_eq!(row, &vec![0u32]);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = gen_right_regular(20, 40, 3, 7);
        let b = gen_right_regular(20, 40, 3, 7);
        assert_eq!(a, b);
        assert_ne!(a, gen_right_regular(20, 40, 3, 8));

        let c = gen_right_regular_distinct(20, 40, 3, 7);
        assert_eq!(c, gen_right_regular_distinct(20, 40, 3, 7));
        assert!(c.right_adj().iter().all(|r| r.len() == 3));
    }

    #[test]
    fn neighbor_set_agrees_with_edge_scan() {
        let mut rng = rng_for(99, "test-neighbor", 0);
        for trial in 0..1000 {
            let n = rng.random_range(1..12);
            let m = rng.random_range(1..15);
            let d = rng.random_range(1..=n.min(4));
            let g = gen_right_regular(n, m, d, trial);
            let size = rng.random_range(0..=n);
            let subset = sample_distinct(&mut rng, n, size);
            assert_eq!(g.neighbor_set(&subset), naive_neighbor_set(&g, &subset));
        }
    }

    #[test]
    fn neighbor_set_basics() {
        let g = gen_right_regular(10, 20, 3, 1);
        assert!(g.neighbor_set(&[]).is_empty());
        // Monotone under union.
        let s1: Vec<u32> = vec![0, 1, 2];
        let s2: Vec<u32> = vec![3, 4];
        let both: Vec<u32> = s1.iter().chain(&s2).copied().collect();
        let n1: BTreeSet<u32> = g.neighbor_set(&s1).into_iter().collect();
        let nb: BTreeSet<u32> = g.neighbor_set(&both).into_iter().collect();
        assert!(n1.is_subset(&nb));
    }

    #[test]
    fn complete_graph_hits_everything() {
        let right_adj = vec![(0..5u32).collect::<Vec<_>>(); 7];
        let g = BipartiteGraph::new(5, 7, right_adj, 5).unwrap();
        assert_eq!(g.neighbor_set(&[2]).len(), 7);
    }

    #[test]
    fn transpose_involution_and_stats() {
        let g = gen_right_regular(8, 12, 3, 5);
        let t = g.transpose();
        assert_eq!(t.n_left(), 12);
        assert_eq!(t.n_right(), 8);
        assert_eq!(t.transpose(), g);
        let gs = g.degree_stats();
        let ts = t.degree_stats();
        assert_eq!(gs.edge_count, ts.edge_count);
        assert_eq!((gs.min_left, gs.max_left), (ts.min_right, ts.max_right));
    }

    #[test]
    fn handshake_after_transforms() {
        let g = gen_right_regular(9, 9, 2, 3);
        for graph in [diagonal_closure(&g).unwrap(), g.transpose()] {
            let s = graph.degree_stats();
            let left_sum: usize = graph.left_adj().iter().map(Vec::len).sum();
            assert_eq!(left_sum, s.edge_count);
        }
    }

    #[test]
    fn diagonal_closure_neighbor_law() {
        let empty = BipartiteGraph::new(4, 4, vec![vec![]; 4], 0).unwrap();
        let ident = diagonal_closure(&empty).unwrap();
        for i in 0..4u32 {
            assert_eq!(ident.neighbor_set(&[i]), vec![i]);
        }
        let mut rng = rng_for(11, "test-diag", 0);
        for trial in 0..50 {
            let h = gen_right_regular(6, 6, 2, trial);
            let g0 = diagonal_closure(&h).unwrap();
            let size = rng.random_range(0..=6);
            let s = sample_distinct(&mut rng, 6, size);
            let gh: BTreeSet<u32> = h.neighbor_set(&s).into_iter().collect();
            let sset: BTreeSet<u32> = s.iter().copied().collect();
            let expected: BTreeSet<u32> = gh.union(&sset).copied().collect();
            let got: BTreeSet<u32> = g0.neighbor_set(&s).into_iter().collect();
            assert_eq!(got, expected);
            assert_eq!(got.len(), gh.difference(&sset).count() + sset.len());
        }
        // Idempotent on the edge set.
        let h = gen_right_regular(5, 5, 2, 1);
        let once = diagonal_closure(&h).unwrap();
        let twice = diagonal_closure(&once).unwrap();
        assert_eq!(once.right_adj(), twice.right_adj());
    }

    #[test]
    fn product_sizes_and_identity() {
        let h = gen_right_regular(4, 4, 2, 9);
        let g0 = diagonal_closure(&h).unwrap();
        let p = product_amplify(&g0, 1, 0).unwrap();
        assert_eq!(p.n_left(), 4);
        assert_eq!(p.right_adj(), g0.right_adj());

        let p2 = product_amplify(&g0, 2, 3).unwrap();
        assert_eq!(p2.n_left(), 16);
        assert_eq!(p2.n_right(), 16 + 4 * 3);
    }

    #[test]
    fn product_neighbor_law_on_power_sets() {
        // |Γ(S^k)| = |Γ_{G0}(S)|^k + |S|·W, exhaustively on small graphs.
        for seed in 0..5 {
            let h = gen_right_regular(4, 4, 2, seed);
            let g0 = diagonal_closure(&h).unwrap();
            for k in [1u32, 2] {
                for w in [0usize, 2] {
                    let p = product_amplify(&g0, k, w).unwrap();
                    for mask in 0u32..16 {
                        let s: Vec<u32> = (0..4u32).filter(|&i| mask >> i & 1 == 1).collect();
                        let base = g0.neighbor_set(&s).len();
                        let power: Vec<u32> = (0..p.n_left())
                            .filter(|&t| {
                                let mut t = t;
                                (0..k).all(|_| {
                                    let c = (t % 4) as u32;
                                    t /= 4;
                                    s.contains(&c)
                                })
                            })
                            .map(|t| t as u32)
                            .collect();
                        let expect = base.pow(k) + s.len() * w;
                        assert_eq!(p.neighbor_set(&power).len(), expect);
                    }
                }
            }
        }
    }

    #[test]
    fn prune_keeps_biregular_graphs_whole() {
        // 2-regular on both sides: a cycle structure.
        let right_adj: Vec<Vec<u32>> =
            (0..6).map(|j| vec![j as u32, ((j + 1) % 6) as u32]).collect();
        let g = BipartiteGraph::new(6, 6, right_adj, 2).unwrap();
        let report = prune_near_regular(&g, 0.4).unwrap();
        assert_eq!(report.kept_left.len(), 6);
        assert_eq!(report.retained_edge_fraction, 1.0);
    }

    #[test]
    fn prune_handshake_holds() {
        let g = gen_right_regular(200, 600, 3, 13);
        let report = prune_near_regular(&g, 0.5).unwrap();
        let s = report.graph.degree_stats();
        let left_sum: usize = report.graph.left_adj().iter().map(Vec::len).sum();
        assert_eq!(left_sum, s.edge_count);
        assert!(report.kept_fraction > 0.0);
    }

    #[test]
    fn csp_layout_labels_roundtrip() {
        let c = simplex_code(2, 2).unwrap();
        let g = gen_csp_layout(8, 2, 6, 3, &c, 11, None).unwrap();
        assert_eq!(g.n_left(), 16);
        let labels = g.labels().unwrap();
        for (j, tuple) in labels.tuples.iter().enumerate() {
            let mut from_labels: Vec<u32> =
                tuple.iter().map(|&(v, s)| v * 2 + u32::from(s)).collect();
            from_labels.sort_unstable();
            from_labels.dedup();
            assert_eq!(&from_labels, &g.right_adj()[j]);
            let vars: BTreeSet<u32> = tuple.iter().map(|&(v, _)| v).collect();
            assert_eq!(vars.len(), 3, "variables are distinct");
        }
    }

    #[test]
    fn planted_layout_satisfies_constraints() {
        let c = simplex_code(2, 2).unwrap();
        let planted: Vec<u8> = vec![0, 1, 1, 0, 0, 1, 0, 1];
        let g = gen_csp_layout(8, 2, 10, 3, &c, 5, Some(&planted)).unwrap();
        let labels = g.labels().unwrap();
        let f = c.field();
        for tuple in &labels.tuples {
            let diff: Vec<u8> =
                tuple.iter().map(|&(v, s)| f.sub(planted[v as usize], s)).collect();
            assert!(c.contains(&diff), "planted assignment satisfies the constraint");
        }
    }

    #[test]
    fn edge_list_roundtrip() {
        let g = gen_right_regular(7, 9, 2, 21);
        let text = g.to_edge_list();
        let back = BipartiteGraph::from_edge_list(&text).unwrap();
        assert_eq!(back.right_adj(), g.right_adj());
    }

    #[test]
    fn json_roundtrip_with_labels() {
        let c = simplex_code(2, 2).unwrap();
        let g = gen_csp_layout(5, 2, 4, 3, &c, 2, None).unwrap();
        let json = serde_json::to_string(&g).unwrap();
        let back: BipartiteGraph = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn planted_gap_structure() {
        let g = gen_planted_gap(60, 180, 3, 0.5, 0.25, 4).unwrap();
        let s = g.planted_subset().unwrap().to_vec();
        assert_eq!(s.len(), 30);
        let gamma = g.neighbor_count(&s);
        assert!(gamma <= 180 - 45, "held-out block stays clear of the planted set");
        assert!(g.right_adj().iter().all(|r| r.len() == 3));
    }
}
