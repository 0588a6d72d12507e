//! Dense tableau simplex for `max c'x  s.t.  A x <= b, x >= 0` with
//! `b >= 0`, so the slack basis is a feasible start and no phase one is
//! needed. Small problems only.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

const EPS: f64 = 1e-11;
/// Degenerate pivots in a row before switching to Bland's rule.
const STALL_LIMIT: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("right-hand side must be nonnegative (row {0})")]
    NegativeRhs(usize),
    #[error("constraint matrix shape does not match")]
    Shape,
    #[error("objective is unbounded")]
    Unbounded,
    #[error("pivot limit reached")]
    PivotLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Shadow prices of the constraints.
    pub duals: Vec<f64>,
    pub pivots: usize,
}

/// Solves the LP. `a` is row-major, `b.len()` rows by `c.len()` columns.
pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution, LpError> {
    let m = b.len();
    let n = c.len();
    if a.len() != m || a.iter().any(|r| r.len() != n) {
        return Err(LpError::Shape);
    }
    if let Some(i) = b.iter().position(|&v| v.is_nan() || v < 0.0) {
        return Err(LpError::NegativeRhs(i));
    }
    let width = n + m + 1;
    // Rows 0..m are constraints, row m is the reduced cost row (negated
    // objective) and the last column is the right-hand side.
    let mut t = vec![0.0; (m + 1) * width];
    for i in 0..m {
        let row = &mut t[i * width..(i + 1) * width];
        row[..n].copy_from_slice(&a[i]);
        row[n + i] = 1.0;
        row[width - 1] = b[i];
    }
    for j in 0..n {
        t[m * width + j] = -c[j];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    let max_pivots = 50 * (n + m) + 1000;
    let mut pivots = 0;
    let mut stall = 0;
    loop {
        let obj = &t[m * width..(m + 1) * width - 1];
        let entering = if stall < STALL_LIMIT {
            let (j, v) = obj.iter().enumerate().fold((usize::MAX, -EPS), |best, (j, &v)| if v < best.1 { (j, v) } else { best });
            (v < -EPS).then_some(j)
        } else {
            obj.iter().position(|&v| v < -EPS)
        };
        let Some(col) = entering else { break };

        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let aij = t[i * width + col];
            if aij > EPS {
                let ratio = t[i * width + width - 1] / aij;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((r, best)) => {
                        if ratio < best - EPS || (ratio <= best + EPS && basis[i] < basis[r]) {
                            Some((i, ratio))
                        } else {
                            Some((r, best))
                        }
                    }
                };
            }
        }
        let Some((row, ratio)) = leave else { return Err(LpError::Unbounded) };
        stall = if ratio <= EPS { stall + 1 } else { 0 };

        pivot(&mut t, width, m, row, col);
        basis[row] = col;
        pivots += 1;
        if pivots > max_pivots {
            return Err(LpError::PivotLimit);
        }
    }

    let mut x = vec![0.0; n];
    for (i, &j) in basis.iter().enumerate() {
        if j < n {
            x[j] = t[i * width + width - 1];
        }
    }
    let duals = (0..m).map(|i| t[m * width + n + i]).collect();
    Ok(LpSolution { x, objective: t[(m + 1) * width - 1], duals, pivots })
}

fn pivot(t: &mut [f64], width: usize, m: usize, row: usize, col: usize) {
    let p = t[row * width + col];
    for v in &mut t[row * width..(row + 1) * width] {
        *v /= p;
    }
    let pivot_row: Vec<f64> = t[row * width..(row + 1) * width].to_vec();
    for i in 0..=m {
        if i == row {
            continue;
        }
        let f = t[i * width + col];
        if f != 0.0 {
            for (v, &pv) in t[i * width..(i + 1) * width].iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
        }
    }
}
