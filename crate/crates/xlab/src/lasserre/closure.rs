//! Width-bounded affine closure of a constraint instance.
//!
//! Each constraint contributes the parity equations `H·x_{C_j} = H·b_j` of its
//! predicate. The closure is the fixpoint of pairwise GF(q)-linear
//! combinations whose support stays within the width bound, canonicalized by
//! leading-coefficient normalization. A derived `0 = c` with `c ≠ 0` sets the
//! contradiction flag: the instance refutes low-width consistency and no
//! pseudo-distribution is emitted.
//!
//! The fixpoint is intentionally single-threaded: insertion order feeds the
//! canonical worklist, and determinism of the stored set matters more here
//! than speed at these sizes.

use crate::field::FiniteField;
use crate::lasserre::csp::ListCspInstance;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Default cap on stored equations before the closure reports truncation.
pub const DEFAULT_EQUATION_CAP: usize = 100_000;

/// A canonical affine equation: sorted nonzero terms, leading coefficient 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AffineEquation {
    /// `(variable, coefficient)` pairs, sorted by variable, coefficients nonzero.
    pub terms: Vec<(u16, u8)>,
    pub rhs: u8,
}

impl AffineEquation {
    /// Canonicalizes a term list; `None` when the equation is trivial (0 = 0),
    /// `Some(Err(rhs))` when it is a contradiction (0 = rhs ≠ 0).
    fn canonical(
        mut terms: Vec<(u16, u8)>,
        rhs: u8,
        f: &FiniteField,
    ) -> Option<Result<AffineEquation, u8>> {
        terms.retain(|&(_, c)| c != 0);
        terms.sort_unstable_by_key(|&(v, _)| v);
        if terms.is_empty() {
            return if rhs == 0 { None } else { Some(Err(rhs)) };
        }
        let scale = f.inv(terms[0].1);
        for (_, c) in terms.iter_mut() {
            *c = f.mul(*c, scale);
        }
        Some(Ok(AffineEquation { terms, rhs: f.mul(rhs, scale) }))
    }

    pub fn support(&self) -> impl Iterator<Item = u16> + '_ {
        self.terms.iter().map(|&(v, _)| v)
    }

    pub fn width(&self) -> usize {
        self.terms.len()
    }

    /// Evaluates the equation on a point assignment.
    pub fn satisfied_by(&self, point: &[u8], f: &FiniteField) -> bool {
        let mut acc = 0u8;
        for &(v, c) in &self.terms {
            acc = f.add(acc, f.mul(c, point[v as usize]));
        }
        acc == self.rhs
    }

    fn combine(&self, other: &AffineEquation, lambda: u8, f: &FiniteField) -> (Vec<(u16, u8)>, u8) {
        let mut terms: HashMap<u16, u8> = self.terms.iter().copied().collect();
        for &(v, c) in &other.terms {
            let entry = terms.entry(v).or_insert(0);
            *entry = f.add(*entry, f.mul(lambda, c));
        }
        let rhs = f.add(self.rhs, f.mul(lambda, other.rhs));
        (terms.into_iter().collect(), rhs)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AffineClosure {
    pub width: usize,
    pub equations: Vec<AffineEquation>,
    pub contradiction: bool,
    pub truncated: bool,
    pub field: FiniteField,
}

impl AffineClosure {
    /// Equations whose support lies inside `vars` (which must be sorted).
    pub fn equations_within(&self, vars: &[u16]) -> Vec<&AffineEquation> {
        self.equations
            .iter()
            .filter(|eq| eq.support().all(|v| vars.binary_search(&v).is_ok()))
            .collect()
    }

    pub fn contains(&self, eq: &AffineEquation) -> bool {
        self.equations.contains(eq)
    }
}

/// Parity generator rows of one constraint: `H·x_{C_j} = H·b_j`.
fn generator_equations(inst: &ListCspInstance) -> Vec<(Vec<(u16, u8)>, u8)> {
    let f = &inst.field;
    let mut out = Vec::new();
    for c in &inst.constraints {
        for h in inst.predicate.parity_check() {
            let terms: Vec<(u16, u8)> =
                c.vars.iter().zip(h).map(|(&v, &coeff)| (v, coeff)).collect();
            let rhs = f.dot(h, &c.shift);
            out.push((terms, rhs));
        }
    }
    out
}

/// Closes the constraint equations under pairwise width-bounded combination.
pub fn affine_closure(inst: &ListCspInstance, width: usize, cap: usize) -> AffineClosure {
    let f = inst.field.clone();
    let mut closure = AffineClosure {
        width,
        equations: Vec::new(),
        contradiction: false,
        truncated: false,
        field: f.clone(),
    };
    let mut seen: HashMap<AffineEquation, ()> = HashMap::new();
    let mut queue: usize = 0;

    let mut push = |closure: &mut AffineClosure,
                    seen: &mut HashMap<AffineEquation, ()>,
                    terms: Vec<(u16, u8)>,
                    rhs: u8| {
        match AffineEquation::canonical(terms, rhs, &f) {
            None => {}
            Some(Err(_)) => closure.contradiction = true,
            Some(Ok(eq)) => {
                if eq.width() <= closure.width && !seen.contains_key(&eq) {
                    seen.insert(eq.clone(), ());
                    closure.equations.push(eq);
                }
            }
        }
    };

    for (terms, rhs) in generator_equations(inst) {
        push(&mut closure, &mut seen, terms, rhs);
        if closure.contradiction {
            return closure;
        }
    }

    // Worklist fixpoint: combine each newly stored equation with everything
    // stored before it, over all nonzero scalars.
    let q = f.order();
    while queue < closure.equations.len() {
        if closure.equations.len() >= cap {
            closure.truncated = true;
            break;
        }
        let current = closure.equations[queue].clone();
        queue += 1;
        for idx in 0..queue.saturating_sub(1) {
            let other = closure.equations[idx].clone();
            for lambda in 1..q {
                let (terms, rhs) = current.combine(&other, lambda, &f);
                push(&mut closure, &mut seen, terms, rhs);
                if closure.contradiction {
                    return closure;
                }
                if closure.equations.len() >= cap {
                    closure.truncated = true;
                    return closure;
                }
            }
        }
    }
    closure
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lasserre::csp::{gen_csp_instance, Constraint};
    use crate::subspace::{simplex_code, LinearSubspace};

    fn two_contradicting_parities() -> ListCspInstance {
        // x1 + x2 = 0 and x1 + x2 = 1 over GF(2): predicate is the kernel of
        // [1 1], i.e. the repetition space {00, 11}.
        let f = crate::field::make_field(2).unwrap();
        let pred = LinearSubspace::new(f.clone(), 2, vec![vec![1, 1]]).unwrap();
        ListCspInstance {
            n: 2,
            field: f,
            k: 1,
            predicate: pred,
            constraints: vec![
                Constraint { right_vertex: 0, vars: vec![0, 1], shift: vec![0, 0] },
                Constraint { right_vertex: 1, vars: vec![0, 1], shift: vec![0, 1] },
            ],
            excluded: vec![],
            total_right: 2,
        }
    }

    #[test]
    fn contradicting_pair_is_flagged() {
        let inst = two_contradicting_parities();
        let closure = affine_closure(&inst, 2, DEFAULT_EQUATION_CAP);
        assert!(closure.contradiction);
    }

    #[test]
    fn planted_instances_never_contradict() {
        let c = simplex_code(2, 2).unwrap();
        let planted: Vec<u8> = vec![0, 1, 0, 1, 1, 0, 1, 1];
        for w in [3, 5, 7] {
            let (_, inst) = gen_csp_instance(8, 2, 20, 3, &c, 1, 9, Some(&planted)).unwrap();
            let closure = affine_closure(&inst, w, DEFAULT_EQUATION_CAP);
            assert!(!closure.contradiction, "width {w}");
            // Every derived equation is satisfied by the planted point.
            for eq in &closure.equations {
                assert!(eq.satisfied_by(&planted, &inst.field));
            }
        }
    }

    #[test]
    fn generators_are_contained() {
        let c = simplex_code(2, 2).unwrap();
        let (_, inst) = gen_csp_instance(10, 2, 6, 3, &c, 1, 4, None).unwrap();
        let closure = affine_closure(&inst, 7, DEFAULT_EQUATION_CAP);
        for (terms, rhs) in generator_equations(&inst) {
            let eq = AffineEquation::canonical(terms, rhs, &inst.field).unwrap().unwrap();
            assert!(closure.contains(&eq));
        }
    }

    #[test]
    fn sparse_instance_closure_equals_generator_spans() {
        // With disjoint variable tuples and width below 2d, the closure is
        // exactly the union of per-constraint spans.
        let c = simplex_code(2, 2).unwrap();
        let inst = (0..200)
            .find_map(|seed| {
                let (_, inst) = gen_csp_instance(30, 2, 4, 3, &c, 1, seed, None).unwrap();
                let mut seen = std::collections::BTreeSet::new();
                inst.constraints
                    .iter()
                    .all(|cst| cst.vars.iter().all(|v| seen.insert(*v)))
                    .then_some(inst)
            })
            .expect("some seed yields disjoint tuples");
        let closure = affine_closure(&inst, 5, DEFAULT_EQUATION_CAP);
        // Each constraint has a single parity equation here, and no cross
        // combination fits within width 5.
        assert_eq!(closure.equations.len(), inst.constraints.len());
        assert!(!closure.contradiction);
    }

    #[test]
    fn truncation_flag_fires_at_the_cap() {
        let c = simplex_code(2, 2).unwrap();
        let (_, inst) = gen_csp_instance(8, 2, 16, 3, &c, 1, 2, None).unwrap();
        let closure = affine_closure(&inst, 7, 10);
        assert!(closure.truncated || closure.contradiction);
    }

    #[test]
    fn equations_within_filters_by_support() {
        let inst = two_contradicting_parities();
        let mut only_first = inst.clone();
        only_first.constraints.truncate(1);
        let closure = affine_closure(&only_first, 2, DEFAULT_EQUATION_CAP);
        assert_eq!(closure.equations_within(&[0, 1]).len(), 1);
        assert_eq!(closure.equations_within(&[0]).len(), 0);
        assert_eq!(closure.equations_within(&[2, 3]).len(), 0);
    }
}
