//! Support enumeration for small two-player games.

use serde::Serialize;

use crate::error::{Result, SbnError};

use super::linalg::solve_linear;
use super::normal_form::{MixedStrategy, NormalFormGame};
use super::EQUILIBRIUM_DEDUP_TOL;

pub const DEFAULT_MAX_SUPPORT_SIZE: usize = 8;

const FEASIBILITY_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupportEnumeration {
    pub equilibria: Vec<(MixedStrategy, MixedStrategy)>,
    /// Support pairs whose indifference system was singular.
    pub degenerate_skipped: usize,
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Mix over `own` that makes the opponent indifferent across `other`, where
/// `payoff(o, s)` is the opponent's payoff for its strategy `o` against our `s`.
fn indifference(own: &[usize], other: &[usize], payoff: impl Fn(usize, usize) -> f64) -> Option<(Vec<f64>, f64)> {
    let k = own.len();
    let mut a = Vec::with_capacity(k + 1);
    let mut b = Vec::with_capacity(k + 1);
    for &o in other {
        let mut row: Vec<f64> = own.iter().map(|&s| payoff(o, s)).collect();
        row.push(-1.0);
        a.push(row);
        b.push(0.0);
    }
    let mut sum = vec![1.0; k];
    sum.push(0.0);
    a.push(sum);
    b.push(1.0);
    let sol = solve_linear(a, b)?;
    let value = sol[k];
    Some((sol[..k].to_vec(), value))
}

fn expand(n: usize, support: &[usize], weights: &[f64]) -> Option<Vec<f64>> {
    let mut out = vec![0.0; n];
    for (&i, &w) in support.iter().zip(weights) {
        if w < -FEASIBILITY_TOL {
            return None;
        }
        out[i] = w.max(0.0);
    }
    Some(out)
}

/// All equilibria with equal-size supports of a two-player game.
pub fn support_enumeration_2p(game: &NormalFormGame, max_size: usize) -> Result<SupportEnumeration> {
    if game.n_players != 2 {
        return Err(SbnError::contract("support enumeration needs a two-player game"));
    }
    let a = game.matrix(0);
    let b = game.matrix(1);
    let (m, n) = (a.len(), b[0].len());
    if m > max_size || n > max_size {
        return Err(SbnError::capacity(format!("{m}x{n} game exceeds support enumeration limit {max_size}")));
    }
    let mut equilibria: Vec<(MixedStrategy, MixedStrategy)> = Vec::new();
    let mut degenerate_skipped = 0;
    for k in 1..=m.min(n) {
        for rows in subsets(m, k) {
            for cols in subsets(n, k) {
                // Column mix makes the row player indifferent over `rows`.
                let Some((y, u)) = indifference(&cols, &rows, |i, j| a[i][j]) else {
                    degenerate_skipped += 1;
                    continue;
                };
                let Some((x, v)) = indifference(&rows, &cols, |j, i| b[i][j]) else {
                    degenerate_skipped += 1;
                    continue;
                };
                let (Some(x), Some(y)) = (expand(m, &rows, &x), expand(n, &cols, &y)) else { continue };
                let row_ok = (0..m).all(|i| (0..n).map(|j| a[i][j] * y[j]).sum::<f64>() <= u + FEASIBILITY_TOL);
                let col_ok = (0..n).all(|j| (0..m).map(|i| x[i] * b[i][j]).sum::<f64>() <= v + FEASIBILITY_TOL);
                if !(row_ok && col_ok) {
                    continue;
                }
                let (x, y) = (MixedStrategy::cleaned(&x)?, MixedStrategy::cleaned(&y)?);
                let dup = equilibria.iter().any(|(ex, ey)| {
                    ex.max_distance(&x) <= EQUILIBRIUM_DEDUP_TOL && ey.max_distance(&y) <= EQUILIBRIUM_DEDUP_TOL
                });
                if !dup {
                    equilibria.push((x, y));
                }
            }
        }
    }
    Ok(SupportEnumeration { equilibria, degenerate_skipped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::epsilon_nash_check;

    #[test]
    fn rps_has_one_equilibrium() {
        let a = vec![vec![0.0, -1.0, 1.0], vec![1.0, 0.0, -1.0], vec![-1.0, 1.0, 0.0]];
        let g = NormalFormGame::zero_sum(&a).unwrap();
        let res = support_enumeration_2p(&g, DEFAULT_MAX_SUPPORT_SIZE).unwrap();
        assert_eq!(res.equilibria.len(), 1);
        let (x, y) = &res.equilibria[0];
        assert!(x.max_distance(&MixedStrategy::uniform(3)) < 1e-6);
        assert!(y.max_distance(&MixedStrategy::uniform(3)) < 1e-6);
    }

    #[test]
    fn coordination_game() {
        let a = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let g = NormalFormGame::bimatrix(&a, &a).unwrap();
        let res = support_enumeration_2p(&g, 8).unwrap();
        assert_eq!(res.equilibria.len(), 3);
        for (x, y) in &res.equilibria {
            assert!(epsilon_nash_check(&g, &[x.clone(), y.clone()], 1e-6).unwrap().is_nash);
        }
        let half = MixedStrategy::uniform(2);
        assert!(res.equilibria.iter().any(|(x, y)| x.max_distance(&half) < 1e-6 && y.max_distance(&half) < 1e-6));
    }

    #[test]
    fn trivial_and_capacity() {
        let g = NormalFormGame::bimatrix(&[vec![1.0]], &[vec![2.0]]).unwrap();
        let res = support_enumeration_2p(&g, 8).unwrap();
        assert_eq!(res.equilibria.len(), 1);
        let big = vec![vec![0.0; 9]; 9];
        let g = NormalFormGame::zero_sum(&big).unwrap();
        assert!(matches!(support_enumeration_2p(&g, 8), Err(SbnError::Capacity(_))));
    }
}
