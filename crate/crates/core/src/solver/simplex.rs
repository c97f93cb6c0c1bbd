//! Dense tableau simplex with Bland's rule.

use crate::error::{Result, SbnError};

use super::LP_FEASIBILITY_TOL;

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub objective: f64,
    pub primal: Vec<f64>,
    /// One multiplier per constraint.
    pub dual: Vec<f64>,
    pub pivots: usize,
}

/// Maximizes `c·x` subject to `a x <= b`, `x >= 0`, for `b >= 0`, so the
/// all-slack basis is feasible.
pub fn maximize(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Result<LpSolution> {
    let m = a.len();
    let n = c.len();
    if b.len() != m || a.iter().any(|r| r.len() != n) {
        return Err(SbnError::contract("LP dimensions do not agree"));
    }
    if b.iter().any(|&x| x < 0.0) {
        return Err(SbnError::contract("LP right-hand side must be non-negative"));
    }
    let width = n + m + 1;
    // Rows 0..m are constraints; row m is the objective, stored as -c.
    let mut t = vec![vec![0.0; width]; m + 1];
    for i in 0..m {
        t[i][..n].copy_from_slice(&a[i]);
        t[i][n + i] = 1.0;
        t[i][width - 1] = b[i];
    }
    for j in 0..n {
        t[m][j] = -c[j];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    let max_pivots = 50 * (n + m + 10);
    let mut pivots = 0;
    loop {
        let Some(enter) = (0..n + m).find(|&j| t[m][j] < -LP_FEASIBILITY_TOL) else { break };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let coef = t[i][enter];
            if coef > LP_FEASIBILITY_TOL {
                let ratio = t[i][width - 1] / coef;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((k, best)) => {
                        if ratio < best - LP_FEASIBILITY_TOL
                            || ((ratio - best).abs() <= LP_FEASIBILITY_TOL && basis[i] < basis[k])
                        {
                            Some((i, ratio))
                        } else {
                            Some((k, best))
                        }
                    }
                };
            }
        }
        let Some((row, _)) = leave else {
            return Err(SbnError::internal("LP is unbounded"));
        };
        pivot(&mut t, row, enter);
        basis[row] = enter;
        pivots += 1;
        if pivots > max_pivots {
            return Err(SbnError::internal("simplex exceeded its pivot budget"));
        }
    }

    let mut primal = vec![0.0; n];
    for (i, &var) in basis.iter().enumerate() {
        if var < n {
            primal[var] = t[i][width - 1];
        }
    }
    let dual = (0..m).map(|i| t[m][n + i]).collect();
    Ok(LpSolution { objective: t[m][width - 1], primal, dual, pivots })
}

fn pivot(t: &mut [Vec<f64>], row: usize, col: usize) {
    let p = t[row][col];
    for x in t[row].iter_mut() {
        *x /= p;
    }
    let pivot_row = t[row].clone();
    for (i, r) in t.iter_mut().enumerate() {
        if i == row {
            continue;
        }
        let f = r[col];
        if f != 0.0 {
            for (x, y) in r.iter_mut().zip(&pivot_row) {
                *x -= f * y;
            }
        }
    }
}
