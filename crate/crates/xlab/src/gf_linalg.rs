//! Gaussian elimination over GF(q) for dense row matrices.

use crate::field::FiniteField;

/// Reduced row echelon form in place. Returns the pivot column of each of the
/// first `rank` rows.
pub fn row_reduce(rows: &mut Vec<Vec<u8>>, f: &FiniteField) -> Vec<usize> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(pr) = (r..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(r, pr);
        let scale = f.inv(rows[r][c]);
        for x in rows[r].iter_mut() {
            *x = f.mul(*x, scale);
        }
        for i in 0..rows.len() {
            if i != r && rows[i][c] != 0 {
                let factor = rows[i][c];
                for j in 0..ncols {
                    let sub = f.mul(factor, rows[r][j]);
                    rows[i][j] = f.sub(rows[i][j], sub);
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    pivots
}

pub fn rank(rows: &[Vec<u8>], f: &FiniteField) -> usize {
    let mut copy = rows.to_vec();
    row_reduce(&mut copy, f).len()
}

/// Basis of `{ x : rows · x = 0 }` for rows of width `ncols`.
pub fn nullspace(rows: &[Vec<u8>], ncols: usize, f: &FiniteField) -> Vec<Vec<u8>> {
    let mut reduced = rows.to_vec();
    let pivots = row_reduce(&mut reduced, f);
    let pivot_set: Vec<bool> = {
        let mut v = vec![false; ncols];
        for &c in &pivots {
            v[c] = true;
        }
        v
    };
    let mut basis = Vec::new();
    for free in 0..ncols {
        if pivot_set[free] {
            continue;
        }
        let mut vec = vec![0u8; ncols];
        vec[free] = 1;
        for (row, &pc) in reduced.iter().zip(&pivots) {
            // pivot coefficient is 1, so x_pc = -row[free].
            vec[pc] = f.neg(row[free]);
        }
        basis.push(vec);
    }
    basis
}

/// Solves `lhs · x = rhs` for the stacked system. Returns a particular
/// solution and a nullspace basis, or `None` when inconsistent.
pub fn solve_affine(
    lhs: &[Vec<u8>],
    rhs: &[u8],
    ncols: usize,
    f: &FiniteField,
) -> Option<(Vec<u8>, Vec<Vec<u8>>)> {
    let mut aug: Vec<Vec<u8>> = lhs
        .iter()
        .zip(rhs)
        .map(|(row, &b)| {
            let mut r = row.clone();
            r.push(b);
            r
        })
        .collect();
    let pivots = row_reduce(&mut aug, f);
    if pivots.last() == Some(&ncols) {
        return None; // a row reduced to 0 = nonzero
    }
    let mut particular = vec![0u8; ncols];
    for (row, &pc) in aug.iter().zip(&pivots) {
        particular[pc] = row[ncols];
    }
    Some((particular, nullspace(lhs, ncols, f)))
}
