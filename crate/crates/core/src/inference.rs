//! Outcomes of a bound network: ancestral sampling, exact expectation by
//! enumeration, and Monte Carlo estimation.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bind::{BoundNetwork, Step};
use crate::error::{Result, SbnError};
use crate::graph::{NodeId, ProbabilityMode};
use crate::rng;
use crate::value::Value;

/// Default cap on enumerated joint outcomes.
pub const DEFAULT_MAX_SUPPORT: usize = 2_000_000;

/// One play of the game.
#[derive(Clone, Debug, PartialEq)]
pub struct WorldOutcome {
    pub assignment: BTreeMap<NodeId, Value>,
    pub payoffs: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PayoffEstimate {
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
    pub n_samples: usize,
    pub seed: u64,
}

enum RowSampler {
    Point(usize),
    Cumulative { cum: Vec<f64>, last: usize },
}

impl RowSampler {
    fn draw(&self, u: f64) -> usize {
        match self {
            RowSampler::Point(i) => *i,
            RowSampler::Cumulative { cum, last } => {
                let k = cum.partition_point(|&c| c <= u);
                if k >= cum.len() {
                    *last
                } else {
                    k
                }
            }
        }
    }
}

/// Precomputed cumulative tables for repeated ancestral sampling of one network.
pub struct Sampler<'a> {
    bound: &'a BoundNetwork,
    rows: Vec<Vec<RowSampler>>,
}

impl<'a> Sampler<'a> {
    pub fn new(bound: &'a BoundNetwork) -> Self {
        let rows = bound
            .steps()
            .iter()
            .map(|s| {
                s.cpd
                    .distinct_rows()
                    .iter()
                    .map(|row| match row.point_mass_index() {
                        Some(i) => RowSampler::Point(i),
                        None => {
                            let mut acc = 0.0;
                            let cum = row.probs().iter().map(|p| {
                                acc += p;
                                acc
                            });
                            let cum: Vec<f64> = cum.collect();
                            let last = row.probs().iter().rposition(|&p| p > 0.0).unwrap_or(0);
                            RowSampler::Cumulative { cum, last }
                        }
                    })
                    .collect()
            })
            .collect();
        Sampler { bound, rows }
    }

    /// Draws value indices in depth order.
    pub fn draw_indices(&self, rng: &mut rng::StreamRng) -> Result<Vec<usize>> {
        let steps = self.bound.steps();
        let mut assignment = Vec::with_capacity(steps.len());
        for (k, step) in steps.iter().enumerate() {
            let row = step.row_index(&assignment);
            let id = step.cpd.row_id(row).ok_or_else(|| {
                SbnError::internal(format!("{}: no CPD row {row} for the sampled parents", step.id))
            })?;
            let u: f64 = rng.gen();
            assignment.push(self.rows[k][id].draw(u));
        }
        Ok(assignment)
    }

    pub fn draw(&self, seed: u64) -> Result<WorldOutcome> {
        let mut rng = rng::rng_from_seed(seed);
        let idx = self.draw_indices(&mut rng)?;
        Ok(self.outcome(&idx))
    }

    fn outcome(&self, idx: &[usize]) -> WorldOutcome {
        let graph = &self.bound.graph;
        let assignment = self
            .bound
            .steps()
            .iter()
            .zip(idx)
            .map(|(s, &v)| {
                let node = graph.node(&s.id).expect("step ids come from the graph");
                (s.id.clone(), node.domain.values()[v].clone())
            })
            .collect();
        WorldOutcome { assignment, payoffs: self.bound.payoffs_of(idx) }
    }
}

/// Samples every node once in depth order.
pub fn sample(bound: &BoundNetwork, seed: u64) -> Result<WorldOutcome> {
    Sampler::new(bound).draw(seed)
}

/// Result of a full enumeration of the joint support.
#[derive(Clone, Debug, PartialEq)]
pub struct Enumeration {
    pub expected: Vec<f64>,
    pub total_probability: f64,
    /// Complete assignments of positive probability visited.
    pub outcomes: usize,
}

/// Upper bound on the number of positive-probability joint assignments:
/// the product over nodes of the widest row support.
pub fn support_bound(bound: &BoundNetwork) -> usize {
    bound.steps().iter().fold(1usize, |acc, s| acc.saturating_mul(s.cpd.max_support().max(1)))
}

fn check_support(bound: &BoundNetwork, max_support: usize) -> Result<()> {
    let upper = support_bound(bound);
    if upper <= max_support {
        return Ok(());
    }
    let mut count = 0usize;
    let mut assignment = Vec::with_capacity(bound.steps().len());
    if count_leaves(bound.steps(), &mut assignment, &mut count, max_support) {
        Ok(())
    } else {
        Err(SbnError::capacity(format!(
            "joint support exceeds max_support {max_support} (row-support bound {upper})"
        )))
    }
}

/// Counts positive-probability leaves; returns false once `cap` is exceeded.
fn count_leaves(steps: &[Step], assignment: &mut Vec<usize>, count: &mut usize, cap: usize) -> bool {
    let k = assignment.len();
    if k == steps.len() {
        *count += 1;
        return *count <= cap;
    }
    let step = &steps[k];
    let Some(row) = step.cpd.row(step.row_index(assignment)) else { return true };
    for (v, &p) in row.probs().iter().enumerate() {
        if p > 0.0 {
            assignment.push(v);
            let ok = count_leaves(steps, assignment, count, cap);
            assignment.pop();
            if !ok {
                return false;
            }
        }
    }
    true
}

/// Depth-first enumeration of every joint assignment, skipping zero-probability branches.
pub fn enumerate(bound: &BoundNetwork, max_support: usize) -> Result<Enumeration> {
    let mut acc = Enumeration { expected: vec![0.0; bound.n_players()], total_probability: 0.0, outcomes: 0 };
    for_each_outcome(bound, max_support, |_, prob, payoffs| {
        acc.total_probability += prob;
        acc.outcomes += 1;
        for (e, r) in acc.expected.iter_mut().zip(payoffs) {
            *e += prob * r;
        }
    })?;
    Ok(acc)
}

/// Calls `f(assignment, probability, payoffs)` for every positive-probability
/// joint assignment, in depth order with values as domain indices.
pub fn for_each_outcome(
    bound: &BoundNetwork,
    max_support: usize,
    mut f: impl FnMut(&[usize], f64, &[f64]),
) -> Result<()> {
    check_support(bound, max_support)?;
    let mut assignment = Vec::with_capacity(bound.steps().len());
    let mut running = vec![0.0; bound.n_players()];
    walk_float(bound.steps(), &mut assignment, 1.0, &mut running, &mut f)
}

fn walk_float(
    steps: &[Step],
    assignment: &mut Vec<usize>,
    prob: f64,
    running: &mut Vec<f64>,
    f: &mut impl FnMut(&[usize], f64, &[f64]),
) -> Result<()> {
    let k = assignment.len();
    if k == steps.len() {
        f(assignment, prob, running);
        return Ok(());
    }
    let step = &steps[k];
    let ri = step.row_index(assignment);
    let row = step
        .cpd
        .row(ri)
        .ok_or_else(|| SbnError::internal(format!("{}: no CPD row {ri}", step.id)))?;
    for (v, &p) in row.probs().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        if let Some(t) = &step.payoff {
            for (r, x) in running.iter_mut().zip(&t.float[v]) {
                *r += x;
            }
        }
        assignment.push(v);
        walk_float(steps, assignment, prob * p, running, f)?;
        assignment.pop();
        if let Some(t) = &step.payoff {
            for (r, x) in running.iter_mut().zip(&t.float[v]) {
                *r -= x;
            }
        }
    }
    Ok(())
}

/// Expected payoff of every player, by exhaustive enumeration.
pub fn exact_expected_payoffs(bound: &BoundNetwork, max_support: usize) -> Result<Vec<f64>> {
    enumerate(bound, max_support).map(|e| e.expected)
}

/// Exact rational enumeration; requires a graph in exact probability mode.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactEnumeration {
    pub expected: Vec<BigRational>,
    pub total_probability: BigRational,
}

pub fn exact_expected_payoffs_rational(bound: &BoundNetwork, max_support: usize) -> Result<ExactEnumeration> {
    if bound.graph.mode != ProbabilityMode::Exact {
        return Err(SbnError::contract("rational enumeration needs a graph in exact probability mode"));
    }
    check_support(bound, max_support)?;
    let n = bound.n_players();
    let mut acc = ExactEnumeration { expected: vec![BigRational::zero(); n], total_probability: BigRational::zero() };
    let mut assignment = Vec::with_capacity(bound.steps().len());
    walk_exact(bound, &mut assignment, BigRational::one(), &mut acc)?;
    Ok(acc)
}

fn walk_exact(
    bound: &BoundNetwork,
    assignment: &mut Vec<usize>,
    prob: BigRational,
    acc: &mut ExactEnumeration,
) -> Result<()> {
    let steps = bound.steps();
    let k = assignment.len();
    if k == steps.len() {
        for (step, &v) in steps.iter().zip(assignment.iter()) {
            if let Some(t) = &step.payoff {
                for (e, x) in acc.expected.iter_mut().zip(&t.exact[v]) {
                    *e += &prob * x;
                }
            }
        }
        acc.total_probability += prob;
        return Ok(());
    }
    let step = &steps[k];
    let ri = step.row_index(assignment);
    let row = step.cpd.row(ri).ok_or_else(|| SbnError::internal(format!("{}: no CPD row {ri}", step.id)))?;
    let exact = row
        .exact_probs()
        .ok_or_else(|| SbnError::internal(format!("{}: row {ri} has no exact probabilities", step.id)))?;
    for (v, p) in exact.iter().enumerate() {
        if p.is_zero() {
            continue;
        }
        assignment.push(v);
        walk_exact(bound, assignment, &prob * p, acc)?;
        assignment.pop();
    }
    Ok(())
}

/// Pairwise summation over a fixed index order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Monte Carlo estimate of expected payoffs. Sample `i` uses stream
/// `mix(seed, i)`; the result does not depend on the rayon pool size.
pub fn mc_expected_payoffs(bound: &BoundNetwork, n_samples: usize, seed: u64) -> Result<PayoffEstimate> {
    if n_samples < 2 {
        return Err(SbnError::contract("Monte Carlo needs at least 2 samples"));
    }
    let sampler = Sampler::new(bound);
    let draws: Vec<Vec<f64>> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, i);
            sampler.draw_indices(&mut r).map(|idx| bound.payoffs_of(&idx))
        })
        .collect::<Result<_>>()?;

    let n_players = bound.n_players();
    let n = n_samples as f64;
    let mut mean = Vec::with_capacity(n_players);
    let mut std_error = Vec::with_capacity(n_players);
    let mut column = vec![0.0; n_samples];
    for p in 0..n_players {
        for (c, d) in column.iter_mut().zip(&draws) {
            *c = d[p];
        }
        let rough = pairwise_sum(&column) / n;
        let residual: Vec<f64> = column.iter().map(|c| c - rough).collect();
        let m = rough + pairwise_sum(&residual) / n;
        for c in column.iter_mut() {
            *c = (*c - m) * (*c - m);
        }
        let var = pairwise_sum(&column) / (n - 1.0);
        mean.push(m);
        std_error.push((var / n).sqrt());
    }
    Ok(PayoffEstimate { mean, std_error, n_samples, seed })
}

/// Runs [`mc_expected_payoffs`] on a dedicated pool of `threads` workers.
pub fn mc_expected_payoffs_on(
    bound: &BoundNetwork,
    n_samples: usize,
    seed: u64,
    threads: usize,
) -> Result<PayoffEstimate> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| SbnError::internal(e.to_string()))?;
    pool.install(|| mc_expected_payoffs(bound, n_samples, seed))
}
