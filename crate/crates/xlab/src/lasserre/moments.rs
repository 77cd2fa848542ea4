//! Pseudo-distributions over the ground set `[n] × GF(q)` and their moment
//! matrices.
//!
//! A pseudo-distribution is a family of local distributions on small variable
//! sets plus a selection semantics for indicator labels:
//!
//! * **closure mode** — `D_V` is uniform over the assignments on `V`
//!   satisfying every closure equation supported inside `V`;
//! * **exact mode** — `D_V` is the marginal of the genuine uniform
//!   distribution over solutions of the full affine system (computed by
//!   projecting the solution space, never by enumerating it).
//!
//! Indicator moments `y_S(f)` are probabilities that each labelled pair
//! `(i, α)` in `S` is selected or not according to `f`. The base semantics
//! selects `(i, α)` when `x_i = α`; the list lift by a subset `Q` selects it
//! when `α ∈ x_i + Q`; the vertex-expansion view complements the selection.
//! All moments are exact rationals.

use crate::field::FiniteField;
use crate::gf_linalg;
use crate::graph::BipartiteGraph;
use crate::lasserre::closure::{AffineClosure, AffineEquation};
use crate::lasserre::csp::ListCspInstance;
use crate::ratio;
use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use thiserror::Error;

/// Default cap on moment-matrix dimension.
pub const DEFAULT_INDEX_CAP: usize = 4000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MomentError {
    #[error("closure carries a contradiction; no pseudo-distribution exists")]
    Contradiction,
    #[error("the affine system is unsatisfiable")]
    Unsatisfiable,
    #[error("moment matrix dimension {dim} exceeds the cap {cap}")]
    TooLarge { dim: usize, cap: usize },
    #[error("graph carries no constraint labels")]
    MissingLabels,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MomentMode {
    Closure,
    ExactDistribution,
}

#[derive(Clone)]
enum MomentSource {
    ClosureEqs(Arc<Vec<AffineEquation>>),
    Affine { particular: Vec<u8>, basis: Vec<Vec<u8>> },
}

/// Which alphabet values select the label `(i, α)`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Selection {
    /// Sorted subset `Q`; the label `(i, α)` is selected when `x_i ∈ α - Q`.
    shift_set: Vec<u8>,
    complemented: bool,
}

/// Uniform distribution over explicit atoms on a sorted variable set.
pub struct LocalDist {
    pub vars: Vec<u16>,
    pub atoms: Vec<Vec<u8>>,
}

pub struct PseudoDistribution {
    n: usize,
    field: FiniteField,
    level: usize,
    mode: MomentMode,
    source: MomentSource,
    selection: Selection,
    /// Selected-value bitmask per label value α.
    sel_mask: Vec<u16>,
    locals: Mutex<HashMap<Vec<u16>, Arc<LocalDist>>>,
}

impl Clone for PseudoDistribution {
    fn clone(&self) -> Self {
        PseudoDistribution {
            n: self.n,
            field: self.field.clone(),
            level: self.level,
            mode: self.mode,
            source: self.source.clone(),
            selection: self.selection.clone(),
            sel_mask: self.sel_mask.clone(),
            locals: Mutex::new(self.locals.lock().unwrap().clone()),
        }
    }
}

fn selection_masks(f: &FiniteField, sel: &Selection) -> Vec<u16> {
    let q = f.order();
    (0..q)
        .map(|alpha| {
            let mut mask = 0u16;
            for gamma in 0..q {
                // γ selects (i, α) iff α - γ ∈ Q.
                if sel.shift_set.binary_search(&f.sub(alpha, gamma)).is_ok() {
                    mask |= 1 << gamma;
                }
            }
            if sel.complemented {
                mask = !mask & ((1u16 << q) - 1);
            }
            mask
        })
        .collect()
}

impl PseudoDistribution {
    fn new(
        n: usize,
        field: FiniteField,
        level: usize,
        mode: MomentMode,
        source: MomentSource,
        selection: Selection,
    ) -> Self {
        let sel_mask = selection_masks(&field, &selection);
        PseudoDistribution {
            n,
            field,
            level,
            mode,
            source,
            selection,
            sel_mask,
            locals: Mutex::new(HashMap::new()),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u8 {
        self.field.order()
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn mode(&self) -> MomentMode {
        self.mode
    }

    pub fn field(&self) -> &FiniteField {
        &self.field
    }

    /// Number of ground pairs `n·q`.
    pub fn ground_size(&self) -> usize {
        self.n * self.q() as usize
    }

    /// True for the single-value (k = 1, uncomplemented) semantics.
    pub fn is_projection_form(&self) -> bool {
        self.selection.shift_set == [0] && !self.selection.complemented
    }

    pub fn is_complemented(&self) -> bool {
        self.selection.complemented
    }

    /// Values per variable under the current semantics.
    pub fn list_size(&self) -> usize {
        let k = self.selection.shift_set.len();
        if self.selection.complemented {
            self.q() as usize - k
        } else {
            k
        }
    }

    /// Local distribution on a set of variables (any order, duplicates ok).
    pub fn local(&self, vars: &[u16]) -> Arc<LocalDist> {
        let mut sorted: Vec<u16> = vars.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if let Some(hit) = self.locals.lock().unwrap().get(&sorted) {
            return hit.clone();
        }
        let dist = Arc::new(self.compute_local(sorted.clone()));
        self.locals.lock().unwrap().insert(sorted, dist.clone());
        dist
    }

    fn compute_local(&self, vars: Vec<u16>) -> LocalDist {
        let q = self.q();
        match &self.source {
            MomentSource::ClosureEqs(eqs) => {
                let inside: Vec<&AffineEquation> = eqs
                    .iter()
                    .filter(|eq| eq.support().all(|v| vars.binary_search(&v).is_ok()))
                    .collect();
                let mut atoms = Vec::new();
                let mut assign = vec![0u8; vars.len()];
                loop {
                    let point = |v: u16| assign[vars.binary_search(&v).unwrap()];
                    let ok = inside.iter().all(|eq| {
                        let mut acc = 0u8;
                        for &(v, c) in &eq.terms {
                            acc = self.field.add(acc, self.field.mul(c, point(v)));
                        }
                        acc == eq.rhs
                    });
                    if ok {
                        atoms.push(assign.clone());
                    }
                    let mut pos = vars.len();
                    loop {
                        if pos == 0 {
                            return LocalDist { vars, atoms };
                        }
                        pos -= 1;
                        if assign[pos] + 1 < q {
                            assign[pos] += 1;
                            for x in assign[pos + 1..].iter_mut() {
                                *x = 0;
                            }
                            break;
                        }
                        assign[pos] = 0;
                    }
                    if vars.is_empty() {
                        return LocalDist { vars, atoms };
                    }
                }
            }
            MomentSource::Affine { particular, basis } => {
                // Project the solution space onto `vars`: restrict the
                // nullspace basis, re-reduce, and enumerate the image.
                let restricted: Vec<Vec<u8>> = basis
                    .iter()
                    .map(|row| vars.iter().map(|&v| row[v as usize]).collect())
                    .collect();
                let mut reduced = restricted;
                gf_linalg::row_reduce(&mut reduced, &self.field);
                let offset: Vec<u8> = vars.iter().map(|&v| particular[v as usize]).collect();
                let rank = reduced.len();
                let mut atoms = Vec::with_capacity((q as usize).pow(rank as u32));
                let mut coeffs = vec![0u8; rank];
                loop {
                    let mut point = offset.clone();
                    for (c, row) in coeffs.iter().zip(&reduced) {
                        for (p, &b) in point.iter_mut().zip(row) {
                            *p = self.field.add(*p, self.field.mul(*c, b));
                        }
                    }
                    atoms.push(point);
                    let mut pos = rank;
                    loop {
                        if pos == 0 {
                            return LocalDist { vars, atoms };
                        }
                        pos -= 1;
                        if coeffs[pos] + 1 < q {
                            coeffs[pos] += 1;
                            for x in coeffs[pos + 1..].iter_mut() {
                                *x = 0;
                            }
                            break;
                        }
                        coeffs[pos] = 0;
                    }
                }
            }
        }
    }

    /// Indicator moment `y_S(f)` for a query of `(pair, bit)` entries, where
    /// `pair = variable·q + α`. Conflicting duplicate pairs give 0.
    pub fn moment(&self, query: &[(u16, bool)]) -> BigRational {
        let mut sorted: Vec<(u16, bool)> = query.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        for w in sorted.windows(2) {
            if w[0].0 == w[1].0 {
                return BigRational::zero(); // same pair demanded 0 and 1
            }
        }
        let q = self.q() as u16;
        let vars: Vec<u16> = {
            let mut v: Vec<u16> = sorted.iter().map(|&(p, _)| p / q).collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        let dist = self.local(&vars);
        if dist.atoms.is_empty() {
            return BigRational::zero();
        }
        let hits = dist
            .atoms
            .iter()
            .filter(|atom| {
                sorted.iter().all(|&(p, bit)| {
                    let var = p / q;
                    let alpha = (p % q) as usize;
                    let value = atom[dist.vars.binary_search(&var).unwrap()];
                    let selected = self.sel_mask[alpha] >> value & 1 == 1;
                    selected == bit
                })
            })
            .count();
        ratio::ratio_u(hits as u128, dist.atoms.len() as u128)
    }

    /// `Σ_α y_{(i,α)}(1)` for one variable.
    pub fn variable_total(&self, var: u16) -> BigRational {
        let q = self.q() as u16;
        (0..q).map(|alpha| self.moment(&[(var * q + alpha, true)])).sum()
    }

    /// `Σ_{(i,α)} y_{(i,α)}(1)` over the whole ground set.
    pub fn selected_total(&self) -> BigRational {
        (0..self.n as u16).map(|v| self.variable_total(v)).sum()
    }

    /// Exact marginalization-consistency check over all variable sets of size
    /// at most `max_size`: removing one variable from `D_V` must reproduce
    /// `D_{V'}` as a distribution. Returns the first offending pair.
    pub fn check_marginal_consistency(&self, max_size: usize) -> Result<(), (Vec<u16>, u16)> {
        let q = self.q();
        let sets = variable_subsets(self.n, max_size);
        for vars in &sets {
            if vars.len() < 2 {
                continue;
            }
            let dist = self.local(vars);
            for drop in 0..vars.len() {
                let sub: Vec<u16> =
                    vars.iter().enumerate().filter(|&(i, _)| i != drop).map(|(_, &v)| v).collect();
                let sub_dist = self.local(&sub);
                // Compare counts scaled by total mass.
                let mut marginal: HashMap<Vec<u8>, u128> = HashMap::new();
                for atom in &dist.atoms {
                    let key: Vec<u8> = atom
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != drop)
                        .map(|(_, &x)| x)
                        .collect();
                    *marginal.entry(key).or_insert(0) += 1;
                }
                let lhs_total = dist.atoms.len() as u128;
                let rhs_total = sub_dist.atoms.len() as u128;
                let mut ok = lhs_total > 0 && rhs_total > 0;
                if ok {
                    for atom in &sub_dist.atoms {
                        let c = marginal.get(atom).copied().unwrap_or(0);
                        // c / lhs_total == 1 / rhs_total
                        if c * rhs_total != lhs_total {
                            ok = false;
                            break;
                        }
                    }
                    if marginal.len() != sub_dist.atoms.len() {
                        ok = false;
                    }
                }
                if !ok {
                    return Err((vars.clone(), vars[drop]));
                }
            }
            let _ = q;
        }
        Ok(())
    }
}

pub(crate) fn variable_subsets(n: usize, max_size: usize) -> Vec<Vec<u16>> {
    let mut out = vec![vec![]];
    for size in 1..=max_size.min(n) {
        let mut subset: Vec<usize> = (0..size).collect();
        loop {
            out.push(subset.iter().map(|&v| v as u16).collect());
            if !crate::lasserre::csp::next_combination(&mut subset, n) {
                break;
            }
        }
    }
    out
}

/// Pseudo-distribution backed by a width-bounded closure.
pub fn pseudo_moments(
    inst: &ListCspInstance,
    closure: &AffineClosure,
    level: usize,
) -> Result<PseudoDistribution, MomentError> {
    if closure.contradiction {
        return Err(MomentError::Contradiction);
    }
    Ok(PseudoDistribution::new(
        inst.n,
        inst.field.clone(),
        level,
        MomentMode::Closure,
        MomentSource::ClosureEqs(Arc::new(closure.equations.clone())),
        Selection { shift_set: vec![0], complemented: false },
    ))
}

/// Genuine moments of the uniform distribution over solutions of the full
/// affine system; the unit-test oracle for the closure path.
pub fn exact_moments(
    inst: &ListCspInstance,
    level: usize,
) -> Result<PseudoDistribution, MomentError> {
    let f = &inst.field;
    let mut lhs: Vec<Vec<u8>> = Vec::new();
    let mut rhs: Vec<u8> = Vec::new();
    for c in &inst.constraints {
        for h in inst.predicate.parity_check() {
            let mut row = vec![0u8; inst.n];
            for (&v, &coeff) in c.vars.iter().zip(h) {
                row[v as usize] = f.add(row[v as usize], coeff);
            }
            lhs.push(row);
            rhs.push(f.dot(h, &c.shift));
        }
    }
    let (particular, basis) =
        gf_linalg::solve_affine(&lhs, &rhs, inst.n, f).ok_or(MomentError::Unsatisfiable)?;
    Ok(PseudoDistribution::new(
        inst.n,
        f.clone(),
        level,
        MomentMode::ExactDistribution,
        MomentSource::Affine { particular, basis },
        Selection { shift_set: vec![0], complemented: false },
    ))
}

/// List lift: from single-value semantics to `x_i + Q` membership. The local
/// distributions are untouched; only the selection semantics changes, which
/// is exactly the transform `z_S(g) = Pr[∀(i,α)∈S: 1[α ∈ x_i+Q] = g(i,α)]`.
pub fn lift_list(pd: &PseudoDistribution, subset: &[u8]) -> PseudoDistribution {
    assert!(pd.is_projection_form(), "lift starts from the single-value form");
    let mut q_sorted: Vec<u8> = subset.to_vec();
    q_sorted.sort_unstable();
    q_sorted.dedup();
    assert!(!q_sorted.is_empty() && q_sorted.iter().all(|&x| x < pd.q()));
    let mut out = pd.clone();
    out.selection = Selection { shift_set: q_sorted, complemented: false };
    out.sel_mask = selection_masks(&out.field, &out.selection);
    out
}

/// Complements the selection: selected pairs become the `q - k` non-list
/// labels, turning a list pseudo-distribution into one for the
/// vertex-expansion relaxation. Involutive.
pub fn to_vertex_expansion(pd: &PseudoDistribution) -> PseudoDistribution {
    let mut out = pd.clone();
    out.selection.complemented = !out.selection.complemented;
    out.sel_mask = selection_masks(&out.field, &out.selection);
    out
}

/// A dense symmetric moment matrix with its index map.
pub struct MomentMatrix {
    pub indices: Vec<MomentIndex>,
    pub matrix: DMatrix<f64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentIndex {
    pub pairs: Vec<u16>,
    pub bits: u32,
}

impl MomentMatrix {
    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        crate::eig::min_symmetric_eigenvalue(&self.matrix)
    }
}

fn level_indices(pd: &PseudoDistribution, level: usize) -> Vec<MomentIndex> {
    let ground = pd.ground_size();
    let mut out = vec![MomentIndex { pairs: vec![], bits: 0 }];
    for size in 1..=level.min(ground) {
        let mut subset: Vec<usize> = (0..size).collect();
        loop {
            for bits in 0..(1u32 << size) {
                out.push(MomentIndex {
                    pairs: subset.iter().map(|&p| p as u16).collect(),
                    bits,
                });
            }
            if !crate::lasserre::csp::next_combination(&mut subset, ground) {
                break;
            }
        }
    }
    out
}

fn index_query(idx: &MomentIndex) -> Vec<(u16, bool)> {
    idx.pairs
        .iter()
        .enumerate()
        .map(|(pos, &p)| (p, idx.bits >> pos & 1 == 1))
        .collect()
}

fn fill_matrix(
    pd: &PseudoDistribution,
    indices: &[MomentIndex],
    entry: impl Fn(&[(u16, bool)]) -> f64 + Sync,
) -> DMatrix<f64> {
    let dim = indices.len();
    let queries: Vec<Vec<(u16, bool)>> = indices.iter().map(index_query).collect();
    let row_of = |r: usize| -> Vec<f64> {
        let mut row = vec![0.0; dim];
        for c in 0..dim {
            let mut joint = queries[r].clone();
            joint.extend_from_slice(&queries[c]);
            row[c] = entry(&joint);
        }
        row
    };
    let rows: Vec<Vec<f64>> = {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            (0..dim).into_par_iter().map(row_of).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..dim).map(row_of).collect()
        }
    };
    let _ = pd;
    DMatrix::from_fn(dim, dim, |r, c| rows[r][c])
}

/// The level-`t` moment matrix `(y_{S∪T}(f∘g))`.
pub fn moment_matrix(
    pd: &PseudoDistribution,
    level: usize,
    cap: usize,
) -> Result<MomentMatrix, MomentError> {
    let indices = level_indices(pd, level);
    if indices.len() > cap {
        return Err(MomentError::TooLarge { dim: indices.len(), cap });
    }
    // Warm the local cache sequentially so parallel fill only reads.
    for vars in variable_subsets(pd.n, 2 * level) {
        pd.local(&vars);
    }
    let matrix = fill_matrix(pd, &indices, |joint| ratio::to_f64(&pd.moment(joint)));
    Ok(MomentMatrix { indices, matrix })
}

/// The global-cardinality matrix
/// `(Σ_v y_{S∪T∪{(v,1)}}(f∘g∘1) − ρN·y_{S∪T}(f∘g))` at level `t`.
pub fn cardinality_matrix(
    pd: &PseudoDistribution,
    level: usize,
    target: &BigRational,
    cap: usize,
) -> Result<MomentMatrix, MomentError> {
    let indices = level_indices(pd, level);
    if indices.len() > cap {
        return Err(MomentError::TooLarge { dim: indices.len(), cap });
    }
    for vars in variable_subsets(pd.n, (2 * level + 1).min(pd.n)) {
        pd.local(&vars);
    }
    let ground = pd.ground_size() as u16;
    let matrix = fill_matrix(pd, &indices, |joint| {
        let base = pd.moment(joint);
        let mut acc = BigRational::zero();
        let mut extended = joint.to_vec();
        for v in 0..ground {
            extended.push((v, true));
            acc += pd.moment(&extended);
            extended.pop();
        }
        ratio::to_f64(&(acc - target * base))
    });
    Ok(MomentMatrix { indices, matrix })
}

/// `Σ_{(i,α)} y_{(i,α)}(1) − target`, exactly.
pub fn cardinality_scalar_residual(pd: &PseudoDistribution, target: &BigRational) -> BigRational {
    pd.selected_total() - target
}

/// Relaxation objective `Σ_{j∈R} (1 − y_{Γ(j)}(0⃗)) + |excluded|` on a
/// labelled graph: excluded right vertices count as always hit.
pub fn vertex_sdp_objective(
    pd: &PseudoDistribution,
    g: &BipartiteGraph,
) -> Result<BigRational, MomentError> {
    let labels = g.labels().ok_or(MomentError::MissingLabels)?;
    let q = u16::from(labels.q);
    let mut acc = BigRational::zero();
    for tuple in &labels.tuples {
        let mut vars: Vec<u32> = tuple.iter().map(|&(v, _)| v).collect();
        vars.sort_unstable();
        vars.dedup();
        if vars.len() != tuple.len() {
            acc += ratio::one(); // excluded: counted as fully hit
            continue;
        }
        let query: Vec<(u16, bool)> =
            tuple.iter().map(|&(v, s)| (v as u16 * q + u16::from(s), false)).collect();
        acc += ratio::one() - pd.moment(&query);
    }
    Ok(acc)
}

/// Reports, per retained constraint, whether the local distribution on its
/// variables is exactly uniform over the shifted predicate `C + b_j`.
pub fn per_constraint_marginal_uniform(
    pd: &PseudoDistribution,
    inst: &ListCspInstance,
) -> Vec<bool> {
    let f = &inst.field;
    inst.constraints
        .iter()
        .map(|c| {
            let dist = pd.local(&c.vars);
            if dist.atoms.len() as u128 != inst.predicate.size() {
                return false;
            }
            let mut expected: Vec<Vec<u8>> = inst
                .predicate
                .codewords()
                .map(|code| {
                    // Reorder onto sorted variables.
                    let shifted: Vec<u8> =
                        code.iter().zip(&c.shift).map(|(&cw, &b)| f.add(cw, b)).collect();
                    let mut keyed: Vec<(u16, u8)> =
                        c.vars.iter().copied().zip(shifted).collect();
                    keyed.sort_unstable_by_key(|&(v, _)| v);
                    keyed.into_iter().map(|(_, x)| x).collect()
                })
                .collect();
            expected.sort();
            let mut atoms = dist.atoms.clone();
            atoms.sort();
            atoms == expected
        })
        .collect()
}

/// Total list-value of the lifted pseudo-distribution:
/// `Σ_j Σ_{f ∈ C+b_j} z_{(C_j,f)}(1⃗)`.
pub fn list_value(pd: &PseudoDistribution, inst: &ListCspInstance) -> BigRational {
    let f = &inst.field;
    let q = u16::from(inst.q());
    let mut acc = BigRational::zero();
    for c in &inst.constraints {
        for code in inst.predicate.codewords() {
            let query: Vec<(u16, bool)> = c
                .vars
                .iter()
                .zip(code.iter().zip(&c.shift))
                .map(|(&v, (&cw, &b))| (v * q + u16::from(f.add(cw, b)), true))
                .collect();
            acc += pd.moment(&query);
        }
    }
    acc
}
