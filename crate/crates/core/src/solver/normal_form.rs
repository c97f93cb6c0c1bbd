use rayon::prelude::*;
use serde::Serialize;

use crate::bind::{bind, StrategyProfile};
use crate::cpd::for_each_assignment;
use crate::error::{Result, SbnError};
use crate::graph::{NodeId, PlayerId, SbnGraph};
use crate::inference::exact_expected_payoffs;

use super::NASH_REGRET_TOL;

/// Tolerance for treating two pure-strategy payoffs as tied.
pub const TIE_TOL: f64 = 1e-9;

/// A pure strategy of the induced game: one action per strategic node the
/// player owns.
pub type PureLabel = Vec<(NodeId, usize)>;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MixedStrategy {
    pub probs: Vec<f64>,
}

impl MixedStrategy {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() || probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(SbnError::contract("mixed strategy entries must be finite and non-negative"));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(SbnError::contract(format!("mixed strategy sums to {sum}")));
        }
        Ok(MixedStrategy { probs })
    }

    pub fn pure(n: usize, i: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[i] = 1.0;
        MixedStrategy { probs }
    }

    pub fn uniform(n: usize) -> Self {
        MixedStrategy { probs: vec![1.0 / n as f64; n] }
    }

    /// Clips round-off negatives and renormalizes.
    pub fn cleaned(raw: &[f64]) -> Result<Self> {
        let clipped: Vec<f64> = raw.iter().map(|&p| if p < 0.0 { 0.0 } else { p }).collect();
        let sum: f64 = clipped.iter().sum();
        if !(sum > 0.0) {
            return Err(SbnError::internal("strategy has no positive mass"));
        }
        MixedStrategy::new(clipped.iter().map(|p| p / sum).collect())
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn max_distance(&self, other: &MixedStrategy) -> f64 {
        self.probs.iter().zip(&other.probs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Simultaneous-move game with a dense payoff tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalFormGame {
    pub n_players: usize,
    pub pure_strategies: Vec<Vec<PureLabel>>,
    /// Payoff vectors indexed by joint pure strategy, first player most significant.
    payoffs: Vec<Vec<f64>>,
}

impl NormalFormGame {
    pub fn new(pure_strategies: Vec<Vec<PureLabel>>, payoffs: Vec<Vec<f64>>) -> Result<Self> {
        let n_players = pure_strategies.len();
        let cells: usize = pure_strategies.iter().map(Vec::len).product();
        if n_players == 0 || cells == 0 {
            return Err(SbnError::contract("game needs at least one player and one strategy each"));
        }
        if payoffs.len() != cells || payoffs.iter().any(|p| p.len() != n_players) {
            return Err(SbnError::contract("payoff tensor does not cover the strategy cross product"));
        }
        Ok(NormalFormGame { n_players, pure_strategies, payoffs })
    }

    /// Two-player game from row and column payoff matrices.
    pub fn bimatrix(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<Self> {
        let m = a.len();
        let n = a.first().map_or(0, Vec::len);
        if b.len() != m || a.iter().chain(b).any(|r| r.len() != n) {
            return Err(SbnError::contract("bimatrix shapes differ"));
        }
        let labels = |k: usize, who: &str| (0..k).map(|i| vec![(NodeId::new(who), i)]).collect();
        let payoffs = (0..m).flat_map(|i| (0..n).map(move |j| vec![a[i][j], b[i][j]])).collect();
        NormalFormGame::new(vec![labels(m, "row"), labels(n, "col")], payoffs)
    }

    /// Zero-sum game with row payoffs `a`.
    pub fn zero_sum(a: &[Vec<f64>]) -> Result<Self> {
        let neg: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(|x| -x).collect()).collect();
        NormalFormGame::bimatrix(a, &neg)
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.pure_strategies.iter().map(Vec::len).collect()
    }

    pub fn payoff(&self, joint: &[usize]) -> &[f64] {
        let idx = joint.iter().zip(self.sizes()).fold(0, |acc, (&j, s)| acc * s + j);
        &self.payoffs[idx]
    }

    /// Payoff matrix of one player in a two-player game.
    pub fn matrix(&self, player: usize) -> Vec<Vec<f64>> {
        let s = self.sizes();
        (0..s[0]).map(|i| (0..s[1]).map(|j| self.payoff(&[i, j])[player]).collect()).collect()
    }

    fn check_profile(&self, profile: &[MixedStrategy]) -> Result<()> {
        if profile.len() != self.n_players
            || profile.iter().zip(self.sizes()).any(|(m, s)| m.len() != s)
        {
            return Err(SbnError::contract("profile does not match the game's strategy counts"));
        }
        Ok(())
    }

    /// Expected payoff vector under a mixed profile.
    pub fn expected_payoffs(&self, profile: &[MixedStrategy]) -> Result<Vec<f64>> {
        self.check_profile(profile)?;
        let mut out = vec![0.0; self.n_players];
        let mut k = 0;
        for_each_assignment(&self.sizes(), |joint| {
            let w: f64 = joint.iter().zip(profile).map(|(&j, m)| m.probs[j]).product();
            if w != 0.0 {
                for (o, x) in out.iter_mut().zip(&self.payoffs[k]) {
                    *o += w * x;
                }
            }
            k += 1;
        });
        Ok(out)
    }

    /// Payoff to `player` of each of its pure strategies against the others' mixes.
    pub fn deviation_payoffs(&self, player: usize, profile: &[MixedStrategy]) -> Result<Vec<f64>> {
        self.check_profile(profile)?;
        let sizes = self.sizes();
        let mut out = vec![0.0; sizes[player]];
        let mut k = 0;
        for_each_assignment(&sizes, |joint| {
            let w: f64 = joint
                .iter()
                .zip(profile)
                .enumerate()
                .filter(|(q, _)| *q != player)
                .map(|(_, (&j, m))| m.probs[j])
                .product();
            if w != 0.0 {
                out[joint[player]] += w * self.payoffs[k][player];
            }
            k += 1;
        });
        Ok(out)
    }
}

/// Pure strategies (owned nodes in id order, cross product of their families)
/// and exact expected payoffs for every joint profile.
pub fn induced_normal_form(graph: &SbnGraph, max_support: usize) -> Result<NormalFormGame> {
    graph.ensure_valid()?;
    let mut pure_strategies = Vec::with_capacity(graph.n_players);
    for p in 0..graph.n_players {
        let owned: Vec<(NodeId, usize)> = graph
            .strategic_nodes()
            .filter_map(|n| match &n.kind {
                crate::graph::NodeKind::Strategic { owner, family } if *owner == PlayerId(p) => {
                    Some((n.id.clone(), family.len()))
                }
                _ => None,
            })
            .collect();
        let sizes: Vec<usize> = owned.iter().map(|(_, s)| *s).collect();
        let mut labels = Vec::new();
        for_each_assignment(&sizes, |a| {
            labels.push(owned.iter().zip(a).map(|((id, _), &i)| (id.clone(), i)).collect::<PureLabel>());
        });
        pure_strategies.push(labels);
    }

    let sizes: Vec<usize> = pure_strategies.iter().map(Vec::len).collect();
    let mut joints = Vec::new();
    for_each_assignment(&sizes, |a| joints.push(a.to_vec()));
    let payoffs = joints
        .par_iter()
        .map(|joint| {
            let mut profile = StrategyProfile::new();
            for (p, &j) in joint.iter().enumerate() {
                for (id, i) in &pure_strategies[p][j] {
                    profile.choices.insert(id.clone(), *i);
                }
            }
            exact_expected_payoffs(&bind(graph, &profile)?, max_support)
        })
        .collect::<Result<Vec<_>>>()?;
    NormalFormGame::new(pure_strategies, payoffs)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BestResponse {
    /// Every maximizing pure strategy, ascending; the first is canonical.
    pub indices: Vec<usize>,
    pub value: f64,
}

pub fn best_response(game: &NormalFormGame, player: usize, profile: &[MixedStrategy]) -> Result<BestResponse> {
    if player >= game.n_players {
        return Err(SbnError::contract(format!("player {player} out of range")));
    }
    let dev = game.deviation_payoffs(player, profile)?;
    let value = dev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let indices = dev.iter().enumerate().filter(|(_, &v)| v >= value - TIE_TOL).map(|(i, _)| i).collect();
    Ok(BestResponse { indices, value })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NashCheck {
    pub is_nash: bool,
    pub max_regret: f64,
    pub regrets: Vec<f64>,
}

pub fn epsilon_nash_check(game: &NormalFormGame, profile: &[MixedStrategy], eps: f64) -> Result<NashCheck> {
    let current = game.expected_payoffs(profile)?;
    let mut regrets = Vec::with_capacity(game.n_players);
    for p in 0..game.n_players {
        let br = best_response(game, p, profile)?;
        regrets.push((br.value - current[p]).max(0.0));
    }
    let max_regret = regrets.iter().copied().fold(0.0, f64::max);
    Ok(NashCheck { is_nash: max_regret <= eps, max_regret, regrets })
}

/// Default `eps` for [`epsilon_nash_check`].
pub const DEFAULT_EPS: f64 = NASH_REGRET_TOL;
