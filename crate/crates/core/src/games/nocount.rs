//! Bit-counting games: one guesser, or two guessers with unequal action sets.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rust_decimal::Decimal;
use serde::Serialize;

use super::GameBundle;
use crate::cpd::{Cpd, ProbRow};
use crate::error::{Result, SbnError};
use crate::graph::{Node, NodeId, PlayerId, SbnGraph, StrategyFamily};
use crate::value::{Domain, Value};

/// Hard cap on string length; enumeration over all strings up to this length
/// stays near two million outcomes.
pub const DEFAULT_N_CAP: usize = 20;

/// What to do when the requested tail tolerance needs a longer support than the cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailPolicy {
    /// Capacity error.
    Strict,
    /// Truncate at the cap and report the larger tail mass.
    TruncateAtCap,
}

/// Exponential(lambda) rounded up to an integer and truncated to `1..=n_max`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruncatedExponential {
    pub lambda: f64,
    pub n_max: usize,
    /// `pmf[k - 1]` is the probability of length `k`.
    pub pmf: Vec<f64>,
    /// Mass beyond `n_max` before renormalization.
    pub tail_mass: f64,
}

impl TruncatedExponential {
    pub fn new(lambda: f64, tail_tol: f64, n_cap: usize, policy: TailPolicy) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(SbnError::contract("lambda must be positive"));
        }
        if !(tail_tol > 0.0 && tail_tol < 1.0) {
            return Err(SbnError::contract("tail tolerance must lie in (0, 1)"));
        }
        let tail = |k: usize| (-lambda * k as f64).exp();
        let mut needed = ((1.0 / tail_tol).ln() / lambda).ceil().max(1.0) as usize;
        while needed > 1 && tail(needed - 1) <= tail_tol {
            needed -= 1;
        }
        while tail(needed) > tail_tol {
            needed += 1;
        }
        let n_max = if needed > n_cap {
            match policy {
                TailPolicy::Strict => {
                    return Err(SbnError::capacity(format!(
                        "tail tolerance {tail_tol:e} needs strings up to length {needed}, above the cap {n_cap}"
                    )))
                }
                TailPolicy::TruncateAtCap => n_cap,
            }
        } else {
            needed
        };
        // mass of (k-1, k]
        let raw: Vec<f64> = (1..=n_max).map(|k| tail(k - 1) - tail(k)).collect();
        let total: f64 = raw.iter().sum();
        let pmf = raw.iter().map(|p| p / total).collect();
        Ok(TruncatedExponential { lambda, n_max, pmf, tail_mass: tail(n_max) })
    }
}

/// Distribution of the string length over `1..=n_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct LengthPmf {
    pub pmf: Vec<f64>,
    /// Present when every probability is known exactly.
    pub exact: Option<Vec<BigRational>>,
    pub tail_mass: f64,
    pub description: String,
}

impl LengthPmf {
    pub fn point_mass(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(SbnError::contract("string length must be at least 1"));
        }
        let row = ProbRow::point_mass(n, n - 1);
        Ok(LengthPmf {
            pmf: row.probs().to_vec(),
            exact: row.exact_probs().map(<[_]>::to_vec),
            tail_mass: 0.0,
            description: format!("point mass at n={n}"),
        })
    }

    pub fn n_max(&self) -> usize {
        self.pmf.len()
    }
}

impl From<&TruncatedExponential> for LengthPmf {
    fn from(t: &TruncatedExponential) -> Self {
        LengthPmf {
            pmf: t.pmf.clone(),
            exact: None,
            tail_mass: t.tail_mass,
            description: format!("exponential lambda={} truncated at n_max={}", t.lambda, t.n_max),
        }
    }
}

/// All bit strings of length `1..=n_max`, by length then binary value.
pub fn bit_strings(n_max: usize) -> Vec<String> {
    let mut out = Vec::with_capacity((1usize << (n_max + 1)) - 2);
    for n in 1..=n_max {
        for v in 0..(1usize << n) {
            out.push(format!("{v:0n$b}"));
        }
    }
    out
}

struct Strings {
    domain: Domain,
    popcount: Vec<u8>,
}

fn strings(n_max: usize) -> Result<Strings> {
    let values = bit_strings(n_max);
    let popcount = values.iter().map(|s| s.bytes().filter(|&b| b == b'1').count() as u8).collect();
    Ok(Strings { domain: Domain::new(values.into_iter().map(Value::Symbol).collect())?, popcount })
}

fn length_node(lengths: &LengthPmf) -> Result<Node> {
    let domain = Domain::int_range(1, lengths.n_max() as i64)?;
    let row = match &lengths.exact {
        Some(exact) => ProbRow::exact(exact.clone()),
        None => ProbRow::new(lengths.pmf.clone()),
    };
    Ok(Node::chance("a", domain, Cpd::from_rows(vec![], vec![row])))
}

/// b given a = n: uniform over the 2^n strings of length n.
fn string_node(lengths: &LengthPmf, s: &Strings) -> Node {
    let n_max = lengths.n_max();
    let total = s.domain.len();
    let exact = lengths.exact.is_some();
    let rows = (1..=n_max)
        .map(|n| {
            let start = (1usize << n) - 2;
            let count = 1usize << n;
            if exact {
                let p = BigRational::new(BigInt::one(), BigInt::from(count));
                let mut v = vec![BigRational::zero(); total];
                for x in &mut v[start..start + count] {
                    *x = p.clone();
                }
                ProbRow::exact(v)
            } else {
                let mut v = vec![0.0; total];
                let p = 1.0 / count as f64;
                for x in &mut v[start..start + count] {
                    *x = p;
                }
                ProbRow::new(v)
            }
        })
        .collect();
    Node::chance("b", s.domain.clone(), Cpd::from_rows(vec!["a".into()], rows))
}

fn constant_family(name: &str, s: &Strings, g_max: usize) -> StrategyFamily {
    let mut family = StrategyFamily::new(name).deterministic();
    for g in 0..=g_max {
        let cpd = Cpd::constant(vec!["b".into()], &[s.domain.len()], ProbRow::point_mass(g_max + 1, g));
        family = family.with(format!("constant-{g}"), cpd);
    }
    family
}

fn counter(s: &Strings, g_max: usize) -> Cpd {
    let rows = (0..=g_max).map(|g| ProbRow::point_mass(g_max + 1, g)).collect();
    Cpd::from_row_ids(vec!["b".into()], &[s.domain.len()], rows, |a| s.popcount[a[0]] as usize)
}

fn check_g_max(lengths: &LengthPmf, g_max: Option<usize>) -> Result<usize> {
    let n_max = lengths.n_max();
    let g = g_max.unwrap_or(n_max);
    if g < n_max {
        return Err(SbnError::contract(format!("g_max {g} is below n_max {n_max}")));
    }
    Ok(g)
}

fn payoff(entries: &[i64]) -> Value {
    Value::payoff(entries.iter().map(|&e| Decimal::from(e)))
}

fn base_notes(lengths: &LengthPmf) -> BTreeMap<String, String> {
    let mut notes = BTreeMap::new();
    notes.insert("a".into(), format!("string length: {}", lengths.description));
    notes.insert("b".into(), "uniform bit string of length a".into());
    notes.insert("n_max".into(), lengths.n_max().to_string());
    notes.insert("tail_mass".into(), format!("{:e}", lengths.tail_mass));
    notes
}

/// Single-player guessing game over an explicit length distribution.
pub fn make_nocount_with(lengths: &LengthPmf, g_max: Option<usize>) -> Result<GameBundle> {
    let g_max = check_g_max(lengths, g_max)?;
    let s = strings(lengths.n_max())?;
    let guesses = Domain::int_range(0, g_max as i64)?;
    let mut graph = SbnGraph::new(1);
    if lengths.exact.is_some() {
        graph = graph.exact();
    }
    graph.add(length_node(lengths)?)?;
    graph.add(string_node(lengths, &s))?;
    graph.add(Node::strategic("x", guesses.clone(), vec!["b".into()], PlayerId(0), constant_family("constant-time", &s, g_max)))?;
    let pd = Domain::new(vec![payoff(&[0]), payoff(&[1])])?;
    let rows = vec![ProbRow::point_mass(2, 0), ProbRow::point_mass(2, 1)];
    let pi = Cpd::from_row_ids(vec!["b".into(), "x".into()], &[s.domain.len(), g_max + 1], rows, |a| {
        usize::from(a[1] == s.popcount[a[0]] as usize)
    });
    graph.add(Node::payoff("pi", None, pd, pi))?;
    graph.ensure_valid()?;
    let mut notes = base_notes(lengths);
    notes.insert("x".into(), "constant guesses 0..=g_max, ignoring the string (constant-time proxy)".into());
    notes.insert("pi".into(), "1 when the guess equals the number of ones, else 0".into());
    Ok(GameBundle { graph, notes })
}

pub fn make_nocount(lambda: f64, tail_tol: f64, g_max: Option<usize>, policy: TailPolicy) -> Result<GameBundle> {
    let t = TruncatedExponential::new(lambda, tail_tol, DEFAULT_N_CAP, policy)?;
    make_nocount_with(&LengthPmf::from(&t), g_max)
}

/// Two guessers: `x` limited to constants, `y` with constants plus an exact counter.
pub fn make_two_player_nocount_with(lengths: &LengthPmf, g_max: Option<usize>) -> Result<GameBundle> {
    let g_max = check_g_max(lengths, g_max)?;
    let s = strings(lengths.n_max())?;
    let guesses = Domain::int_range(0, g_max as i64)?;
    let mut graph = SbnGraph::new(2);
    if lengths.exact.is_some() {
        graph = graph.exact();
    }
    graph.add(length_node(lengths)?)?;
    graph.add(string_node(lengths, &s))?;
    graph.add(Node::strategic("x", guesses.clone(), vec!["b".into()], PlayerId(0), constant_family("constant-time", &s, g_max)))?;
    let y_family = constant_family("linear-time", &s, g_max).with("counter", counter(&s, g_max));
    graph.add(Node::strategic("y", guesses, vec!["b".into()], PlayerId(1), y_family))?;

    let half = Decimal::new(5, 1);
    let pd = Domain::new(vec![
        payoff(&[0, 0]),
        payoff(&[1, 0]),
        payoff(&[0, 1]),
        Value::payoff([half, half]),
    ])?;
    let rows = (0..4).map(|i| ProbRow::point_mass(4, i)).collect();
    let parents: Vec<NodeId> = vec!["b".into(), "x".into(), "y".into()];
    let pi = Cpd::from_row_ids(parents, &[s.domain.len(), g_max + 1, g_max + 1], rows, |a| {
        let sum = s.popcount[a[0]] as usize;
        match (a[1] == sum, a[2] == sum) {
            (false, false) => 0,
            (true, false) => 1,
            (false, true) => 2,
            (true, true) => 3,
        }
    });
    graph.add(Node::payoff("pi", None, pd, pi))?;
    graph.ensure_valid()?;
    let mut notes = base_notes(lengths);
    notes.insert("x".into(), "player 0: constant guesses only (constant-time proxy)".into());
    notes.insert("y".into(), "player 1: constant guesses plus an exact bit counter (linear-time proxy)".into());
    notes.insert("pi".into(), "sole correct guesser wins 1; both correct split 0.5/0.5".into());
    Ok(GameBundle { graph, notes })
}

pub fn make_two_player_nocount(
    lambda: f64,
    tail_tol: f64,
    g_max: Option<usize>,
    policy: TailPolicy,
) -> Result<GameBundle> {
    let t = TruncatedExponential::new(lambda, tail_tol, DEFAULT_N_CAP, policy)?;
    make_two_player_nocount_with(&LengthPmf::from(&t), g_max)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstantGuess {
    pub g_star: usize,
    pub win_prob: f64,
    /// Win probability of each constant guess `0..=g_max`.
    pub table: Vec<f64>,
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64).round()
}

/// Win probability of every constant guess: sum over n of pmf(n) C(n, g) / 2^n.
pub fn best_constant_guess(lengths: &LengthPmf, g_max: Option<usize>) -> Result<ConstantGuess> {
    let g_max = check_g_max(lengths, g_max)?;
    let table: Vec<f64> = (0..=g_max)
        .map(|g| {
            lengths
                .pmf
                .iter()
                .enumerate()
                .map(|(k, &p)| {
                    let n = k + 1;
                    p * binomial(n, g) * 0.5f64.powi(n as i32)
                })
                .sum()
        })
        .collect();
    let mut g_star = 0;
    for (g, &w) in table.iter().enumerate() {
        if w > table[g_star] {
            g_star = g;
        }
    }
    Ok(ConstantGuess { g_star, win_prob: table[g_star], table })
}
