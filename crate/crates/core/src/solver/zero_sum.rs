//! Zero-sum matrix games by linear programming.

use serde::Serialize;

use crate::error::{Result, SbnError};

use super::normal_form::MixedStrategy;
use super::simplex::maximize;
use super::DUALITY_GAP_TOL;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroSumSolution {
    /// Value of the game to the row (maximizing) player.
    pub value: f64,
    /// Maximin strategy of the row player.
    pub strategy: MixedStrategy,
    /// Row payoff of `strategy` against each pure column; all are at least
    /// `value` up to tolerance.
    pub certificate: Vec<f64>,
    /// Minimax strategy of the column player.
    pub column_strategy: MixedStrategy,
    /// Largest disagreement between the two LPs and between the strategies'
    /// guarantees.
    pub duality_gap: f64,
}

/// Parses a matrix written as a JSON array of arrays.
pub fn parse_matrix(text: &str) -> Result<Vec<Vec<f64>>> {
    let m: Vec<Vec<f64>> = serde_json::from_str(text).map_err(|e| SbnError::Parse(e.to_string()))?;
    check_shape(&m)?;
    Ok(m)
}

fn check_shape(a: &[Vec<f64>]) -> Result<(usize, usize)> {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    if m == 0 || n == 0 || a.iter().any(|r| r.len() != n) {
        return Err(SbnError::contract("matrix must be non-empty and rectangular"));
    }
    if a.iter().flatten().any(|x| !x.is_finite()) {
        return Err(SbnError::contract("matrix entries must be finite"));
    }
    Ok((m, n))
}

/// Solves `max_x min_j sum_i x_i a[i][j]` as an LP over a shifted, strictly
/// positive matrix; row strategy from the dual, column strategy from the primal.
fn solve_one_side(a: &[Vec<f64>]) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let (m, n) = check_shape(a)?;
    let min = a.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let shift = 1.0 - min;
    let shifted: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(|x| x + shift).collect()).collect();
    let lp = maximize(&shifted, &vec![1.0; m], &vec![1.0; n])?;
    if !(lp.objective > 0.0) {
        return Err(SbnError::internal("zero-sum LP returned a non-positive objective"));
    }
    let value = 1.0 / lp.objective - shift;
    let rows = lp.dual.iter().map(|y| y / lp.objective).collect();
    let cols = lp.primal.iter().map(|y| y / lp.objective).collect();
    Ok((value, rows, cols))
}

pub fn zero_sum_solve(a: &[Vec<f64>]) -> Result<ZeroSumSolution> {
    let (m, n) = check_shape(a)?;
    let (value, rows, cols) = solve_one_side(a)?;
    let strategy = MixedStrategy::cleaned(&rows)?;
    let column_strategy = MixedStrategy::cleaned(&cols)?;

    // The column player's own LP, on -A^T.
    let neg_t: Vec<Vec<f64>> = (0..n).map(|j| (0..m).map(|i| -a[i][j]).collect()).collect();
    let (col_value, _, _) = solve_one_side(&neg_t)?;

    let certificate: Vec<f64> =
        (0..n).map(|j| (0..m).map(|i| strategy.probs[i] * a[i][j]).sum()).collect();
    let row_guarantee = certificate.iter().copied().fold(f64::INFINITY, f64::min);
    let col_guarantee = (0..m)
        .map(|i| (0..n).map(|j| a[i][j] * column_strategy.probs[j]).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    let duality_gap = (value + col_value).abs().max(col_guarantee - row_guarantee);
    if duality_gap > DUALITY_GAP_TOL {
        return Err(SbnError::internal(format!("zero-sum duality gap {duality_gap:e} exceeds tolerance")));
    }
    Ok(ZeroSumSolution { value, strategy, certificate, column_strategy, duality_gap })
}

pub fn is_skew_symmetric(a: &[Vec<f64>], tol: f64) -> bool {
    let n = a.len();
    a.iter().all(|r| r.len() == n)
        && (0..n).all(|i| (0..n).all(|j| (a[i][j] + a[j][i]).abs() <= tol))
}

/// A strategy that is a symmetric equilibrium when both players use it.
pub fn symmetric_nash_skew(a: &[Vec<f64>]) -> Result<MixedStrategy> {
    if !is_skew_symmetric(a, 1e-12) {
        return Err(SbnError::contract("matrix is not skew-symmetric"));
    }
    let sol = zero_sum_solve(a)?;
    let m = sol.strategy;
    let n = a.len();
    let against: Vec<f64> = (0..n).map(|i| (0..n).map(|j| a[i][j] * m.probs[j]).sum()).collect();
    let best = against.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let self_payoff: f64 = (0..n).map(|i| m.probs[i] * against[i]).sum();
    if best > super::NASH_REGRET_TOL || self_payoff.abs() > 1e-9 {
        return Err(SbnError::internal(format!(
            "symmetric strategy check failed: best deviation {best:e}, self payoff {self_payoff:e}"
        )));
    }
    Ok(m)
}
