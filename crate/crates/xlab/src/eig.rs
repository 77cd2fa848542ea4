//! Robust smallest-eigenvalue computation for symmetric matrices.
//!
//! The moment matrices here are heavily rank-deficient with exact-zero rows,
//! which can break QL/QR iteration. Tridiagonalize once, then bisect on the
//! Sturm negative-pivot count, which cannot fail to converge.

use nalgebra::DMatrix;

/// Number of eigenvalues strictly below `x`, via the LDLᵀ pivot signs of the
/// shifted tridiagonal matrix.
fn count_below(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0usize;
    let mut d = 1.0f64;
    for i in 0..diag.len() {
        let sub = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] / d };
        d = diag[i] - x - sub;
        if d == 0.0 {
            d = -f64::MIN_POSITIVE;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "matrix must be square");
    if n == 0 {
        return 0.0;
    }
    if n == 1 {
        return m[(0, 0)];
    }
    let tri = nalgebra::linalg::SymmetricTridiagonal::new(m.clone());
    let diag: Vec<f64> = tri.diagonal().iter().copied().collect();
    let off: Vec<f64> = tri.off_diagonal().iter().copied().collect();

    // Gershgorin bounds on the tridiagonal form.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let radius = if i == 0 { 0.0 } else { off[i - 1].abs() }
            + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - radius);
        hi = hi.max(diag[i] + radius);
    }
    if lo == hi {
        return lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count_below(&diag, &off, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= f64::EPSILON * hi.abs().max(lo.abs()).max(1.0) {
            break;
        }
    }
    hi
}
