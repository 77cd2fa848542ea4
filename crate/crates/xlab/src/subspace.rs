//! Linear subspaces of GF(q)^d used as constraint predicates.
//!
//! A subspace is held as a basis of independent length-`d` rows. The module
//! provides the two pairwise-independent families used throughout the crate —
//! duals of Hamming codes ("simplex" spaces) and the quadratic `(α, α²)`
//! construction — together with exact staying-probability computations over
//! alphabet subsets.

use crate::field::{make_field, FieldError, FiniteField};
use crate::gf_linalg;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Cap on `|C|` for codeword enumeration.
pub const MAX_ENUMERATION: u128 = 1 << 20;
/// Cap on the number of alphabet subsets searched exhaustively.
pub const MAX_SUBSET_SEARCH: u128 = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SubspaceError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("block length {0} is degenerate (must be at least 3)")]
    DegenerateLength(usize),
    #[error("truncated construction needs 2 <= d < q-1, got d={d} for q={q}")]
    BadLength { q: u8, d: usize },
    #[error("subspace with {0} codewords exceeds the enumeration cap")]
    TooLarge(u128),
    #[error("searching {0} subsets exceeds the search cap")]
    SearchTooLarge(u128),
    #[error("{0}")]
    InvalidParameter(String),
}

/// A subspace `C ⊆ GF(q)^d` given by independent basis rows.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearSubspace {
    field: FiniteField,
    block_len: usize,
    basis: Vec<Vec<u8>>,
    parity: Vec<Vec<u8>>,
}

#[derive(Serialize, Deserialize)]
struct SubspaceRepr {
    q: u8,
    d: usize,
    basis: Vec<Vec<u8>>,
}

impl Serialize for LinearSubspace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SubspaceRepr { q: self.field.order(), d: self.block_len, basis: self.basis.clone() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LinearSubspace {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = SubspaceRepr::deserialize(d)?;
        let field = make_field(u64::from(repr.q)).map_err(serde::de::Error::custom)?;
        LinearSubspace::new(field, repr.d, repr.basis).map_err(serde::de::Error::custom)
    }
}

impl LinearSubspace {
    /// Builds a subspace from basis rows, rejecting dependent rows.
    pub fn new(
        field: FiniteField,
        block_len: usize,
        basis: Vec<Vec<u8>>,
    ) -> Result<Self, SubspaceError> {
        if block_len == 0 {
            return Err(SubspaceError::InvalidParameter("block length must be positive".into()));
        }
        for row in &basis {
            if row.len() != block_len {
                return Err(SubspaceError::InvalidParameter(format!(
                    "basis row of length {} does not match block length {block_len}",
                    row.len()
                )));
            }
            if row.iter().any(|&x| x >= field.order()) {
                return Err(SubspaceError::InvalidParameter(
                    "basis entry outside the field".into(),
                ));
            }
        }
        if gf_linalg::rank(&basis, &field) != basis.len() {
            return Err(SubspaceError::InvalidParameter("basis rows are dependent".into()));
        }
        let parity = gf_linalg::nullspace(&basis, block_len, &field);
        Ok(LinearSubspace { field, block_len, basis, parity })
    }

    /// The zero subspace {0} in GF(q)^d.
    pub fn zero(field: FiniteField, block_len: usize) -> Result<Self, SubspaceError> {
        Self::new(field, block_len, Vec::new())
    }

    pub fn field(&self) -> &FiniteField {
        &self.field
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<u8>] {
        &self.basis
    }

    /// Rows spanning the dual space; `H x = 0` iff `x` is a codeword.
    pub fn parity_check(&self) -> &[Vec<u8>] {
        &self.parity
    }

    /// `q^dim`.
    pub fn size(&self) -> u128 {
        (u128::from(self.field.order())).pow(self.dim() as u32)
    }

    pub fn contains(&self, word: &[u8]) -> bool {
        word.len() == self.block_len
            && self.parity.iter().all(|h| self.field.dot(h, word) == 0)
    }

    /// Streams every codeword exactly once.
    pub fn codewords(&self) -> CodewordIter<'_> {
        CodewordIter::new(self)
    }

    /// Codeword for a message index in `0..q^dim`, digits in basis order.
    pub fn codeword_at(&self, mut index: u128) -> Vec<u8> {
        let q = u128::from(self.field.order());
        let mut word = vec![0u8; self.block_len];
        for row in &self.basis {
            let digit = (index % q) as u8;
            index /= q;
            for (w, &b) in word.iter_mut().zip(row) {
                *w = self.field.add(*w, self.field.mul(digit, b));
            }
        }
        word
    }

    fn check_enumerable(&self) -> Result<(), SubspaceError> {
        if self.size() > MAX_ENUMERATION {
            Err(SubspaceError::TooLarge(self.size()))
        } else {
            Ok(())
        }
    }
}

/// Odometer over messages with incremental codeword updates.
pub struct CodewordIter<'a> {
    space: &'a LinearSubspace,
    digits: Vec<u8>,
    word: Vec<u8>,
    remaining: u128,
}

impl<'a> CodewordIter<'a> {
    fn new(space: &'a LinearSubspace) -> Self {
        CodewordIter {
            space,
            digits: vec![0; space.dim()],
            word: vec![0; space.block_len()],
            remaining: space.size(),
        }
    }
}

impl<'a> Iterator for CodewordIter<'a> {
    type Item = Vec<u8>;

    fn next(&mut self) -> Option<Vec<u8>> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let out = self.word.clone();
        let f = self.space.field();
        let q = f.order();
        for r in 0..self.digits.len() {
            let old = self.digits[r];
            let new = if old + 1 == q { 0 } else { old + 1 };
            self.digits[r] = new;
            let delta = f.sub(new, old);
            for (w, &b) in self.word.iter_mut().zip(&self.space.basis[r]) {
                *w = f.add(*w, f.mul(delta, b));
            }
            if new != 0 {
                break;
            }
        }
        Some(out)
    }
}

/// Dual of the Hamming code over GF(q): block length `(q^l - 1)/(q - 1)`,
/// dimension `l`, columns one representative per projective point.
pub fn simplex_code(q: u64, l: u32) -> Result<LinearSubspace, SubspaceError> {
    let field = make_field(q)?;
    let ql = (q as u128).checked_pow(l).ok_or(SubspaceError::TooLarge(u128::MAX))?;
    if ql > MAX_ENUMERATION {
        return Err(SubspaceError::TooLarge(ql));
    }
    let d = ((ql - 1) / (u128::from(q as u64) - 1)) as usize;
    if d < 3 {
        return Err(SubspaceError::DegenerateLength(d));
    }
    // Columns: nonzero vectors of GF(q)^l whose first nonzero coordinate is 1,
    // in lexicographic order.
    let mut columns = Vec::with_capacity(d);
    let mut v = vec![0u8; l as usize];
    'outer: loop {
        if let Some(&first) = v.iter().find(|&&x| x != 0) {
            if first == 1 {
                columns.push(v.clone());
            }
        }
        for pos in (0..l as usize).rev() {
            if v[pos] + 1 < q as u8 {
                v[pos] += 1;
                for x in v[pos + 1..].iter_mut() {
                    *x = 0;
                }
                continue 'outer;
            }
        }
        break;
    }
    debug_assert_eq!(columns.len(), d);
    let basis: Vec<Vec<u8>> =
        (0..l as usize).map(|r| columns.iter().map(|c| c[r]).collect()).collect();
    LinearSubspace::new(field, d, basis)
}

/// The `(α, α², β_1, …, β_l)` construction: block length `(q-1)·q^l`,
/// dimension `l + 2`, one generator row per `(α, β)` with `α` nonzero.
pub fn quadratic_code(q: u64, l: u32) -> Result<LinearSubspace, SubspaceError> {
    let field = make_field(q)?;
    if q < 3 {
        return Err(SubspaceError::InvalidParameter(
            "quadratic construction needs q >= 3".into(),
        ));
    }
    let size = (q as u128).checked_pow(l + 2).ok_or(SubspaceError::TooLarge(u128::MAX))?;
    if size > MAX_ENUMERATION {
        return Err(SubspaceError::TooLarge(size));
    }
    let d = (q as usize - 1) * (q as usize).pow(l);
    let ncols = l as usize + 2;
    let mut rows = Vec::with_capacity(d);
    for alpha in 1..q as u8 {
        let mut beta = vec![0u8; l as usize];
        loop {
            let mut row = Vec::with_capacity(ncols);
            row.push(alpha);
            row.push(field.mul(alpha, alpha));
            row.extend_from_slice(&beta);
            rows.push(row);
            let mut pos = l as usize;
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                if beta[pos] + 1 < q as u8 {
                    beta[pos] += 1;
                    for x in beta[pos + 1..].iter_mut() {
                        *x = 0;
                    }
                    break;
                }
                beta[pos] = 0;
            }
            if beta.iter().all(|&x| x == 0) {
                break;
            }
        }
    }
    debug_assert_eq!(rows.len(), d);
    // The subspace is the image of the generator map, i.e. the span of its columns.
    let basis: Vec<Vec<u8>> =
        (0..ncols).map(|c| rows.iter().map(|r| r[c]).collect()).collect();
    LinearSubspace::new(field, d, basis)
}

/// The quadratic construction with only `d` rows `(α_i, α_i²)`, 2 ≤ d < q-1.
pub fn quadratic_code_truncated(q: u64, d: usize) -> Result<LinearSubspace, SubspaceError> {
    let field = make_field(q)?;
    if d < 2 || d as u64 >= q - 1 {
        return Err(SubspaceError::BadLength { q: q as u8, d });
    }
    let col_alpha: Vec<u8> = (1..=d as u8).collect();
    let col_sq: Vec<u8> = col_alpha.iter().map(|&a| field.mul(a, a)).collect();
    LinearSubspace::new(field, d, vec![col_alpha, col_sq])
}

/// Exact staying probability of `C` in `Q^d` plus the pairwise-independence
/// upper bound `(k/q) / ((1-k/q)d + k/q)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StayingReport {
    pub subset: Vec<u8>,
    pub stay_count: u128,
    pub code_size: u128,
    pub probability: BigRational,
    pub pairwise_bound: BigRational,
}

fn pairwise_bound(q: u8, k: usize, d: usize) -> BigRational {
    // (k/q) / ((1-k/q)·d + k/q) = k / ((q-k)·d + k)
    crate::ratio::ratio_u(k as u128, (u128::from(q) - k as u128) * d as u128 + k as u128)
}

/// `Pr_{x ~ C}[x ∈ Q^d]` by enumeration.
pub fn staying_probability(
    space: &LinearSubspace,
    subset: &[u8],
) -> Result<StayingReport, SubspaceError> {
    let q = space.field().order();
    let mut sorted: Vec<u8> = subset.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.is_empty() || sorted.iter().any(|&x| x >= q) {
        return Err(SubspaceError::InvalidParameter(
            "subset must be a nonempty subset of the alphabet".into(),
        ));
    }
    space.check_enumerable()?;
    let mut in_q = vec![false; q as usize];
    for &x in &sorted {
        in_q[x as usize] = true;
    }
    let stay_count =
        space.codewords().filter(|w| w.iter().all(|&x| in_q[x as usize])).count() as u128;
    let code_size = space.size();
    Ok(StayingReport {
        probability: crate::ratio::ratio_u(stay_count, code_size),
        pairwise_bound: pairwise_bound(q, sorted.len(), space.block_len()),
        subset: sorted,
        stay_count,
        code_size,
    })
}

/// Staying counts for every alphabet subset at once, indexed by bitmask.
fn staying_counts_all(space: &LinearSubspace) -> Vec<u64> {
    let q = space.field().order() as usize;
    let mut hist = vec![0u64; 1 << q];
    for word in space.codewords() {
        let mut mask = 0usize;
        for &x in &word {
            mask |= 1 << x;
        }
        hist[mask] += 1;
    }
    // Superset-sum transform: counts[m] = number of codewords whose symbol
    // set is contained in m.
    for bit in 0..q {
        for m in 0..hist.len() {
            if m >> bit & 1 == 1 {
                hist[m] += hist[m ^ (1 << bit)];
            }
        }
    }
    hist
}

/// Exhaustively maximizes the staying probability over k-subsets of the
/// alphabet; ties go to the lexicographically smallest subset.
pub fn best_staying_subset(
    space: &LinearSubspace,
    k: usize,
) -> Result<StayingReport, SubspaceError> {
    let q = space.field().order() as usize;
    if k == 0 || k > q {
        return Err(SubspaceError::InvalidParameter(format!(
            "subset size {k} outside 1..={q}"
        )));
    }
    let combos = binomial(q as u128, k as u128);
    if combos > MAX_SUBSET_SEARCH {
        return Err(SubspaceError::SearchTooLarge(combos));
    }
    space.check_enumerable()?;
    let counts = staying_counts_all(space);
    let mut best: Option<(u64, Vec<u8>)> = None;
    let mut subset: Vec<u8> = (0..k as u8).collect();
    loop {
        let mask: usize = subset.iter().map(|&x| 1usize << x).sum();
        let count = counts[mask];
        if best.as_ref().is_none_or(|(c, _)| count > *c) {
            best = Some((count, subset.clone()));
        }
        // next k-combination of 0..q in lexicographic order
        let mut i = k;
        loop {
            if i == 0 {
                let (stay_count, subset) = best.unwrap();
                return Ok(StayingReport {
                    probability: crate::ratio::ratio_u(u128::from(stay_count), space.size()),
                    pairwise_bound: pairwise_bound(q as u8, k, space.block_len()),
                    subset,
                    stay_count: u128::from(stay_count),
                    code_size: space.size(),
                });
            }
            i -= 1;
            if subset[i] < (q - k + i) as u8 {
                subset[i] += 1;
                for j in i + 1..k {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

pub fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Outcome of the exhaustive pairwise-independence check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairwiseReport {
    pub independent: bool,
    /// On failure: offending coordinate pair and its joint counts (row-major
    /// over GF(q) × GF(q)).
    pub witness: Option<(usize, usize, Vec<u64>)>,
}

/// Checks that every coordinate pair of a uniform codeword is uniform on
/// GF(q)². Pairs are counted empirically over the full enumeration.
pub fn pairwise_independence_check(
    space: &LinearSubspace,
) -> Result<PairwiseReport, SubspaceError> {
    space.check_enumerable()?;
    let d = space.block_len();
    if d < 2 {
        return Ok(PairwiseReport { independent: true, witness: None });
    }
    let q = space.field().order() as usize;
    let pairs: Vec<(u32, u32)> = (0..d as u32)
        .flat_map(|i| (i + 1..d as u32).map(move |j| (i, j)))
        .collect();
    let counts = count_pairs(space, &pairs, q);
    let expected = space.size() / (q as u128 * q as u128);
    for (p, (i, j)) in pairs.iter().enumerate() {
        let slice = &counts[p * q * q..(p + 1) * q * q];
        if slice.iter().any(|&c| u128::from(c) != expected) {
            return Ok(PairwiseReport {
                independent: false,
                witness: Some((*i as usize, *j as usize, slice.to_vec())),
            });
        }
    }
    Ok(PairwiseReport { independent: true, witness: None })
}

#[cfg(feature = "parallel")]
fn count_pairs(space: &LinearSubspace, pairs: &[(u32, u32)], q: usize) -> Vec<u64> {
    use rayon::prelude::*;
    let chunk = (pairs.len() / (4 * rayon::current_num_threads().max(1))).max(64);
    let mut counts = vec![0u64; pairs.len() * q * q];
    counts
        .par_chunks_mut(chunk * q * q)
        .zip(pairs.par_chunks(chunk))
        .for_each(|(slice, pair_chunk)| count_pairs_into(space, pair_chunk, q, slice));
    counts
}

#[cfg(not(feature = "parallel"))]
fn count_pairs(space: &LinearSubspace, pairs: &[(u32, u32)], q: usize) -> Vec<u64> {
    let mut counts = vec![0u64; pairs.len() * q * q];
    count_pairs_into(space, pairs, q, &mut counts);
    counts
}

fn count_pairs_into(space: &LinearSubspace, pairs: &[(u32, u32)], q: usize, out: &mut [u64]) {
    for word in space.codewords() {
        for (p, &(i, j)) in pairs.iter().enumerate() {
            let a = word[i as usize] as usize;
            let b = word[j as usize] as usize;
            out[p * q * q + a * q + b] += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::{one, ratio};

    /// Independent span enumeration used as the test oracle: materializes all
    /// q^dim combinations directly from message vectors.
    fn span_oracle(space: &LinearSubspace) -> Vec<Vec<u8>> {
        (0..space.size()).map(|i| space.codeword_at(i)).collect()
    }

    #[test]
    fn simplex_2_2_codewords() {
        let c = simplex_code(2, 2).unwrap();
        assert_eq!(c.block_len(), 3);
        assert_eq!(c.dim(), 2);
        let mut words: Vec<Vec<u8>> = c.codewords().collect();
        words.sort();
        assert_eq!(words, vec![vec![0, 0, 0], vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]);
    }

    #[test]
    fn codeword_iter_matches_span_oracle() {
        for space in [
            simplex_code(2, 2).unwrap(),
            simplex_code(3, 2).unwrap(),
            quadratic_code(3, 1).unwrap(),
            quadratic_code(4, 0).unwrap(),
        ] {
            let mut streamed: Vec<Vec<u8>> = space.codewords().collect();
            let mut oracle = span_oracle(&space);
            streamed.sort();
            oracle.sort();
            oracle.dedup();
            assert_eq!(streamed.len() as u128, space.size());
            assert_eq!(streamed, oracle);
        }
    }

    #[test]
    fn simplex_staying_at_zero() {
        let c = simplex_code(2, 2).unwrap();
        let r = staying_probability(&c, &[0]).unwrap();
        assert_eq!(r.probability, ratio(1, 4));
        assert_eq!(r.probability, r.pairwise_bound);

        let r1 = staying_probability(&c, &[1]).unwrap();
        assert_eq!(r1.probability, ratio(0, 1));

        let c3 = simplex_code(3, 2).unwrap();
        assert_eq!(c3.block_len(), 4);
        assert_eq!(c3.size(), 9);
        let r3 = staying_probability(&c3, &[0]).unwrap();
        assert_eq!(r3.probability, ratio(1, 9));
    }

    #[test]
    fn simplex_rejects_degenerate_length() {
        assert!(matches!(simplex_code(2, 1), Err(SubspaceError::DegenerateLength(1))));
    }

    #[test]
    fn quadratic_staying_matches_closed_form() {
        // (q² - q + 2) / (2q²) on the alphabet minus {1}.
        for (q, expect) in [(3u64, ratio(4, 9)), (5, ratio(22, 50)), (4, ratio(7, 16))] {
            let c = quadratic_code(q, 0).unwrap();
            assert_eq!(c.block_len(), q as usize - 1);
            let q_set: Vec<u8> = (0..q as u8).filter(|&x| x != 1).collect();
            let r = staying_probability(&c, &q_set).unwrap();
            assert_eq!(r.probability, expect, "q={q}");
            // Brute-force recount against the span oracle.
            let oracle = span_oracle(&c)
                .iter()
                .filter(|w| w.iter().all(|&x| x != 1))
                .count() as i64;
            assert_eq!(r.probability, ratio(oracle, c.size() as i64));
        }
    }

    #[test]
    fn quadratic_block_scaling() {
        let c = quadratic_code(3, 1).unwrap();
        assert_eq!(c.block_len(), 6);
        assert_eq!(c.size(), 27);
        let r = staying_probability(&c, &[0, 2]).unwrap();
        assert_eq!(r.probability, ratio(1, 3) * ratio(4, 9));
    }

    #[test]
    fn truncated_quadratic() {
        let c = quadratic_code_truncated(7, 3).unwrap();
        let q_set: Vec<u8> = (0..7).filter(|&x| x != 1).collect();
        let r = staying_probability(&c, &q_set).unwrap();
        assert_eq!(r.probability, ratio(31, 49)); // 1 - 3/7 + 3/49

        let c5 = quadratic_code_truncated(5, 2).unwrap();
        let q5: Vec<u8> = (0..5).filter(|&x| x != 1).collect();
        assert_eq!(staying_probability(&c5, &q5).unwrap().probability, ratio(16, 25));

        assert!(matches!(
            quadratic_code_truncated(5, 5),
            Err(SubspaceError::BadLength { q: 5, d: 5 })
        ));
        assert!(matches!(
            quadratic_code_truncated(5, 1),
            Err(SubspaceError::BadLength { q: 5, d: 1 })
        ));
    }

    #[test]
    fn full_alphabet_stays_surely() {
        let c = quadratic_code(5, 0).unwrap();
        let r = staying_probability(&c, &[0, 1, 2, 3, 4]).unwrap();
        assert_eq!(r.probability, one());
    }

    #[test]
    fn staying_monotone_under_inclusion() {
        let c = simplex_code(3, 2).unwrap();
        let mut prev = ratio(0, 1);
        let mut q_set = vec![];
        for x in 0..3u8 {
            q_set.push(x);
            let r = staying_probability(&c, &q_set).unwrap();
            assert!(r.probability >= prev);
            prev = r.probability;
        }
    }

    #[test]
    fn best_subset_examples() {
        let c = simplex_code(2, 2).unwrap();
        let full = best_staying_subset(&c, 2).unwrap();
        assert_eq!(full.subset, vec![0, 1]);
        assert_eq!(full.probability, one());

        let single = best_staying_subset(&c, 1).unwrap();
        assert_eq!(single.subset, vec![0]);
        assert_eq!(single.probability, ratio(1, 4));

        // The quadratic construction at (3,0) spans all of GF(3)², so every
        // 2-subset stays with probability 4/9.
        let c3 = quadratic_code(3, 0).unwrap();
        for pair in [[0u8, 1], [0, 2], [1, 2]] {
            assert_eq!(staying_probability(&c3, &pair).unwrap().probability, ratio(4, 9));
        }
        let best = best_staying_subset(&c3, 2).unwrap();
        assert_eq!(best.probability, ratio(4, 9));
        assert_eq!(best.subset, vec![0, 1]); // lexicographic tie-break
    }

    #[test]
    fn zeta_table_agrees_with_direct_count() {
        let c = quadratic_code(3, 1).unwrap();
        let counts = staying_counts_all(&c);
        for mask in 1usize..(1 << 3) {
            let subset: Vec<u8> = (0..3u8).filter(|&x| mask >> x & 1 == 1).collect();
            let direct = staying_probability(&c, &subset).unwrap();
            assert_eq!(u128::from(counts[mask]), direct.stay_count);
        }
    }

    #[test]
    fn pairwise_independence_of_constructions() {
        assert!(pairwise_independence_check(&simplex_code(2, 2).unwrap()).unwrap().independent);
        assert!(pairwise_independence_check(&quadratic_code(5, 0).unwrap()).unwrap().independent);
        // Algebraic cross-check: every pair of generator columns... every pair
        // of coordinates corresponds to a rank-2 submatrix of the basis.
        let c = quadratic_code(5, 0).unwrap();
        let f = c.field().clone();
        for i in 0..c.block_len() {
            for j in i + 1..c.block_len() {
                let rows: Vec<Vec<u8>> =
                    c.basis().iter().map(|r| vec![r[i], r[j]]).collect();
                assert_eq!(crate::gf_linalg::rank(&rows, &f), 2);
            }
        }
    }

    #[test]
    fn repetition_code_fails_pairwise() {
        let f = make_field(2).unwrap();
        let rep = LinearSubspace::new(f, 2, vec![vec![1, 1]]).unwrap();
        let report = pairwise_independence_check(&rep).unwrap();
        assert!(!report.independent);
        let (i, j, counts) = report.witness.unwrap();
        assert_eq!((i, j), (0, 1));
        assert_eq!(counts, vec![1, 0, 0, 1]);
    }

    #[test]
    fn bound_holds_for_best_subsets() {
        for space in [simplex_code(2, 2).unwrap(), quadratic_code(3, 0).unwrap()] {
            let q = space.field().order() as usize;
            for k in 1..=q {
                let r = best_staying_subset(&space, k).unwrap();
                assert!(r.probability <= r.pairwise_bound);
            }
        }
    }

    #[test]
    fn parity_check_annihilates_codewords() {
        let c = quadratic_code(3, 1).unwrap();
        assert_eq!(c.parity_check().len(), c.block_len() - c.dim());
        for w in c.codewords() {
            assert!(c.contains(&w));
        }
        assert!(!c.contains(&vec![1; c.block_len()]) || span_oracle(&c).contains(&vec![1; c.block_len()]));
    }

    #[test]
    fn serde_roundtrip() {
        let c = simplex_code(3, 2).unwrap();
        let json = serde_json::to_string(&c).unwrap();
        let back: LinearSubspace = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
        assert!(json.contains("\"q\":3"));
    }
}
