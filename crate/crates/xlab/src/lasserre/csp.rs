//! Constraint instances over a subspace predicate.
//!
//! An instance has `n` variables over GF(q) and constraints `x_{C_j} ∈ C + b_j`
//! extracted from a labelled bipartite graph: one constraint per right vertex
//! whose variable tuple is duplicate-free; the rest are recorded as excluded
//! and score as always-hit in objectives.

use crate::field::FiniteField;
use crate::graph::{gen_csp_layout, BipartiteGraph, GraphError};
use crate::subspace::{binomial, LinearSubspace};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CspError {
    #[error("graph carries no constraint labels")]
    MissingLabels,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("{0}")]
    Invalid(String),
}

/// One constraint `x_{vars} ∈ C + shift`, remembering its right vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    pub right_vertex: u32,
    pub vars: Vec<u16>,
    pub shift: Vec<u8>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ListCspInstance {
    pub n: usize,
    pub field: FiniteField,
    /// List size: how many alphabet values each variable takes.
    pub k: usize,
    pub predicate: LinearSubspace,
    /// Constraints from retained right vertices, in right-vertex order.
    pub constraints: Vec<Constraint>,
    /// Right vertices dropped for having a repeated variable.
    pub excluded: Vec<u32>,
    /// Total number of right vertices in the source graph.
    pub total_right: usize,
}

impl ListCspInstance {
    pub fn q(&self) -> u8 {
        self.field.order()
    }

    pub fn width(&self) -> usize {
        self.predicate.block_len()
    }

    /// Value of one constraint under a list assignment (one value set per
    /// variable): `|(C + b_j) ∩ lists_1 × … × lists_d|`.
    pub fn constraint_value(&self, c: &Constraint, lists: &[Vec<u8>]) -> u64 {
        let f = &self.field;
        self.predicate
            .codewords()
            .filter(|code| {
                code.iter()
                    .zip(&c.vars)
                    .zip(&c.shift)
                    .all(|((&cw, &v), &b)| lists[v as usize].contains(&f.add(cw, b)))
            })
            .count() as u64
    }

    /// Total value of a list assignment across all retained constraints.
    pub fn value(&self, lists: &[Vec<u8>]) -> u64 {
        self.constraints.iter().map(|c| self.constraint_value(c, lists)).sum()
    }

    /// True when the point assignment satisfies every retained constraint.
    pub fn satisfied_by(&self, point: &[u8]) -> bool {
        let f = &self.field;
        self.constraints.iter().all(|c| {
            let diff: Vec<u8> = c
                .vars
                .iter()
                .zip(&c.shift)
                .map(|(&v, &b)| f.sub(point[v as usize], b))
                .collect();
            self.predicate.contains(&diff)
        })
    }
}

/// Advances a k-combination of `0..m` in lexicographic order.
pub(crate) fn next_combination(subset: &mut [usize], m: usize) -> bool {
    let k = subset.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if subset[i] < m - k + i {
            subset[i] += 1;
            for j in i + 1..k {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Reads the constraints off a labelled graph. Right vertices with a repeated
/// variable are excluded rather than kept as malformed constraints.
pub fn instance_from_graph(
    g: &BipartiteGraph,
    predicate: &LinearSubspace,
    k: usize,
) -> Result<ListCspInstance, CspError> {
    let labels = g.labels().ok_or(CspError::MissingLabels)?;
    let q = labels.q;
    if predicate.field().order() != q {
        return Err(CspError::Invalid("predicate field does not match the labels".into()));
    }
    if k == 0 || k > q as usize {
        return Err(CspError::Invalid(format!("list size {k} outside 1..={q}")));
    }
    let n = g.n_left() / q as usize;
    if n * q as usize != g.n_left() {
        return Err(CspError::Invalid("left side is not a multiple of q".into()));
    }
    let mut constraints = Vec::new();
    let mut excluded = Vec::new();
    for (j, tuple) in labels.tuples.iter().enumerate() {
        let vars: Vec<u16> = tuple.iter().map(|&(v, _)| v as u16).collect();
        let mut sorted = vars.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != vars.len() {
            excluded.push(j as u32);
            continue;
        }
        if tuple.len() != predicate.block_len() {
            return Err(CspError::Invalid(format!(
                "right vertex {j} has {} labels, predicate width is {}",
                tuple.len(),
                predicate.block_len()
            )));
        }
        let shift: Vec<u8> = tuple.iter().map(|&(_, s)| s).collect();
        constraints.push(Constraint { right_vertex: j as u32, vars, shift });
    }
    Ok(ListCspInstance {
        n,
        field: predicate.field().clone(),
        k,
        predicate: predicate.clone(),
        constraints,
        excluded,
        total_right: g.n_right(),
    })
}

/// Generates a constraint-layout graph and its instance in one step.
#[allow(clippy::too_many_arguments)]
pub fn gen_csp_instance(
    n: usize,
    q: u8,
    m: usize,
    d: usize,
    predicate: &LinearSubspace,
    k: usize,
    seed: u64,
    planted: Option<&[u8]>,
) -> Result<(BipartiteGraph, ListCspInstance), CspError> {
    let g = gen_csp_layout(n, q, m, d, predicate, seed, planted)?;
    let inst = instance_from_graph(&g, predicate, k)?;
    Ok((g, inst))
}

/// Variable-spread requirement for constraint subsets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ExpansionThreshold {
    /// `(d - 1.4)·|T|`, the distance-3 requirement.
    Standard,
    /// `(1 - l/2 + 0.2)·d·|T|` for dual distance `l`.
    DistanceL(u32),
}

impl ExpansionThreshold {
    fn factor(&self, d: usize) -> f64 {
        match self {
            ExpansionThreshold::Standard => d as f64 - 1.4,
            ExpansionThreshold::DistanceL(l) => (1.0 - f64::from(*l) / 2.0 + 0.2) * d as f64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionCheck {
    pub passed: bool,
    pub cap: usize,
    /// Subset achieving the smallest variable slack, with its variable count
    /// and the count it needed.
    pub worst_subset: Vec<u32>,
    pub worst_variable_count: usize,
    pub required: usize,
}

/// Exhaustively checks that every subset of at most `cap` constraints touches
/// at least `⌈factor·|T|⌉` distinct variables, reporting the worst subset.
pub fn expansion_condition_check(
    inst: &ListCspInstance,
    cap: usize,
    threshold: ExpansionThreshold,
) -> Result<ExpansionCheck, CspError> {
    let m = inst.constraints.len();
    let d = inst.width();
    let factor = threshold.factor(d);
    let mut worst: Option<(i64, Vec<u32>, usize, usize)> = None;
    let mut passed = true;
    for size in 1..=cap.min(m) {
        if binomial(m as u128, size as u128) > 5_000_000 {
            return Err(CspError::Invalid(format!(
                "subset enumeration at size {size} is too large"
            )));
        }
        let needed = (factor * size as f64).ceil().max(0.0) as usize;
        let mut subset: Vec<usize> = (0..size).collect();
        loop {
            let mut vars: Vec<u16> = subset
                .iter()
                .flat_map(|&c| inst.constraints[c].vars.iter().copied())
                .collect();
            vars.sort_unstable();
            vars.dedup();
            let slack = vars.len() as i64 - needed as i64;
            if worst.as_ref().is_none_or(|(s, ..)| slack < *s) {
                worst = Some((
                    slack,
                    subset.iter().map(|&c| c as u32).collect(),
                    vars.len(),
                    needed,
                ));
            }
            if vars.len() < needed {
                passed = false;
            }
            if !next_combination(&mut subset, m) {
                break;
            }
        }
    }
    let (_, worst_subset, worst_variable_count, required) = worst.unwrap_or((0, Vec::new(), 0, 0));
    Ok(ExpansionCheck { passed, cap, worst_subset, worst_variable_count, required })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Labels;
    use crate::subspace::simplex_code;

    #[test]
    fn instance_roundtrips_graph_labels() {
        let c = simplex_code(2, 2).unwrap();
        let (g, inst) = gen_csp_instance(8, 2, 6, 3, &c, 1, 11, None).unwrap();
        assert_eq!(inst.constraints.len() + inst.excluded.len(), g.n_right());
        let labels = g.labels().unwrap();
        for cons in &inst.constraints {
            let tuple = &labels.tuples[cons.right_vertex as usize];
            let vars: Vec<u16> = tuple.iter().map(|&(v, _)| v as u16).collect();
            let shift: Vec<u8> = tuple.iter().map(|&(_, s)| s).collect();
            assert_eq!(cons.vars, vars);
            assert_eq!(cons.shift, shift);
        }
        // The layout generator draws distinct variables, so nothing is excluded.
        assert!(inst.excluded.is_empty());
    }

    #[test]
    fn duplicate_variable_right_vertices_are_excluded() {
        let tuples = vec![
            vec![(0u32, 0u8), (1, 1), (2, 0)],
            vec![(3u32, 0u8), (3, 1), (2, 0)],
        ];
        let adj: Vec<Vec<u32>> = tuples
            .iter()
            .map(|t| t.iter().map(|&(v, s)| v * 2 + s as u32).collect())
            .collect();
        let g = BipartiteGraph::new(8, 2, adj, 3).unwrap();
        let mut value = serde_json::to_value(&g).unwrap();
        value["labels"] = serde_json::to_value(Labels { q: 2, tuples, planted: None }).unwrap();
        let g: BipartiteGraph = serde_json::from_value(value).unwrap();
        let inst = instance_from_graph(&g, &simplex_code(2, 2).unwrap(), 1).unwrap();
        assert_eq!(inst.constraints.len(), 1);
        assert_eq!(inst.excluded, vec![1]);
    }

    #[test]
    fn planted_instances_are_satisfied() {
        let c = simplex_code(2, 2).unwrap();
        let planted: Vec<u8> = vec![1, 0, 1, 1, 0, 0, 1, 0];
        let (_, inst) = gen_csp_instance(8, 2, 12, 3, &c, 1, 3, Some(&planted)).unwrap();
        assert!(inst.satisfied_by(&planted));
        let lists: Vec<Vec<u8>> = planted.iter().map(|&x| vec![x]).collect();
        for cons in &inst.constraints {
            assert!(inst.constraint_value(cons, &lists) >= 1);
        }
    }

    #[test]
    fn missing_labels_is_an_error() {
        let g = crate::graph::gen_right_regular(8, 4, 2, 0);
        assert!(matches!(
            instance_from_graph(&g, &simplex_code(2, 2).unwrap(), 1),
            Err(CspError::MissingLabels)
        ));
    }

    #[test]
    fn expansion_check_single_constraints_pass() {
        let c = simplex_code(2, 2).unwrap();
        let (_, inst) = gen_csp_instance(8, 2, 4, 3, &c, 1, 1, None).unwrap();
        let check = expansion_condition_check(&inst, 1, ExpansionThreshold::Standard).unwrap();
        assert!(check.passed, "single constraints have d distinct variables");
    }

    #[test]
    fn expansion_check_fails_on_identical_tuples() {
        let c = simplex_code(2, 2).unwrap();
        let (_, mut inst) = gen_csp_instance(8, 2, 2, 3, &c, 1, 1, None).unwrap();
        let clone = Constraint { right_vertex: 1, ..inst.constraints[0].clone() };
        inst.constraints[1] = clone;
        let check = expansion_condition_check(&inst, 2, ExpansionThreshold::Standard).unwrap();
        assert!(!check.passed);
        assert_eq!(check.worst_variable_count, 3);
        assert_eq!(check.required, 4); // ceil(1.6 * 2)
        assert_eq!(check.worst_subset, vec![0, 1]);
    }

    #[test]
    fn expansion_check_passing_random_instance() {
        // Spread constraints over many variables pass at small caps.
        let c = simplex_code(2, 2).unwrap();
        let (_, inst) = gen_csp_instance(30, 2, 6, 3, &c, 1, 5, None).unwrap();
        let check = expansion_condition_check(&inst, 3, ExpansionThreshold::Standard).unwrap();
        assert!(check.passed);
        assert!(check.worst_variable_count >= check.required);
    }
}
