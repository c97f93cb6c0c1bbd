//! Random symmetric zero-sum subgames and the game built on a pool of them.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand_distr::{Distribution, StandardNormal};
use rust_decimal::prelude::{FromPrimitive, ToPrimitive};
use rust_decimal::{Decimal, RoundingStrategy};
use serde::Serialize;

use super::GameBundle;
use crate::cpd::{Cpd, ProbRow};
use crate::error::{Result, SbnError};
use crate::graph::{Node, NodeId, PlayerId, SbnGraph, StrategyFamily};
use crate::rng;
use crate::solver::symmetric_nash_skew;
use crate::value::{Domain, Value};

/// Tolerance of the best-response audit against the equilibrium strategy.
pub const BR_AUDIT_TOL: f64 = 1e-7;

/// Square matrix game with `matrix[i][j] == -matrix[j][i]`, entries exact at
/// `decimals` places.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SkewSymmetricGame {
    pub n: usize,
    pub decimals: u32,
    pub matrix: Vec<Vec<Decimal>>,
}

impl SkewSymmetricGame {
    pub fn new(matrix: Vec<Vec<Decimal>>, decimals: u32) -> Result<Self> {
        let n = matrix.len();
        if n == 0 || matrix.iter().any(|r| r.len() != n) {
            return Err(SbnError::contract("subgame matrix must be square and non-empty"));
        }
        for i in 0..n {
            for j in 0..n {
                if matrix[i][j] != -matrix[j][i] {
                    return Err(SbnError::contract(format!("subgame entry ({i},{j}) breaks skew-symmetry")));
                }
            }
        }
        Ok(SkewSymmetricGame { n, decimals, matrix })
    }

    pub fn from_f64(rows: &[Vec<f64>], decimals: u32) -> Result<Self> {
        let matrix = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|&x| {
                        Decimal::from_f64(x)
                            .map(|d| d.round_dp(decimals).normalize())
                            .ok_or_else(|| SbnError::contract(format!("entry {x} is not representable")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        SkewSymmetricGame::new(matrix, decimals)
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.matrix.iter().map(|r| r.iter().map(|d| d.to_f64().unwrap_or(f64::NAN)).collect()).collect()
    }
}

/// Draws each upper-triangle entry from a standard normal (row-major order),
/// rounds it to `decimals` places and mirrors it with the opposite sign.
pub fn gen_skew_symmetric(n: usize, decimals: u32, seed: u64) -> Result<SkewSymmetricGame> {
    if n == 0 {
        return Err(SbnError::contract("subgame size must be at least 1"));
    }
    let mut r = rng::rng_from_seed(seed);
    let mut matrix = vec![vec![Decimal::ZERO; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let x: f64 = StandardNormal.sample(&mut r);
            let v = Decimal::from_f64(x)
                .ok_or_else(|| SbnError::internal("normal draw not representable"))?
                .round_dp_with_strategy(decimals, RoundingStrategy::MidpointAwayFromZero)
                .normalize();
            matrix[i][j] = v;
            matrix[j][i] = -v;
        }
    }
    SkewSymmetricGame::new(matrix, decimals)
}

/// Builtin strategy functions from a subgame matrix to a mixed strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FamilyMember {
    /// Symmetric equilibrium strategy from the zero-sum LP.
    LpNash,
    Uniform,
    /// Point mass on `min(k, n - 1)`.
    Pure(usize),
    /// Best pure response to a uniform opponent, lowest index on ties.
    BrToUniform,
}

impl fmt::Display for FamilyMember {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyMember::LpNash => f.write_str("lp-nash"),
            FamilyMember::Uniform => f.write_str("uniform"),
            FamilyMember::Pure(k) => write!(f, "pure-{k}"),
            FamilyMember::BrToUniform => f.write_str("br-to-uniform"),
        }
    }
}

impl FromStr for FamilyMember {
    type Err = SbnError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lp-nash" => Ok(FamilyMember::LpNash),
            "uniform" => Ok(FamilyMember::Uniform),
            "br-to-uniform" => Ok(FamilyMember::BrToUniform),
            _ => s
                .strip_prefix("pure-")
                .and_then(|k| k.parse().ok())
                .map(FamilyMember::Pure)
                .ok_or_else(|| SbnError::contract(format!("unknown family member {s:?}"))),
        }
    }
}

impl FamilyMember {
    pub fn mixed(&self, game: &SkewSymmetricGame) -> Result<Vec<f64>> {
        let n = game.n;
        Ok(match self {
            FamilyMember::LpNash => symmetric_nash_skew(&game.to_f64())?.probs,
            FamilyMember::Uniform => vec![1.0 / n as f64; n],
            FamilyMember::Pure(k) => {
                let mut v = vec![0.0; n];
                v[(*k).min(n - 1)] = 1.0;
                v
            }
            FamilyMember::BrToUniform => {
                // Row sums are exact in decimal, so ties are exact.
                let sums: Vec<Decimal> = game.matrix.iter().map(|r| r.iter().sum()).collect();
                let mut best = 0;
                for (i, s) in sums.iter().enumerate() {
                    if *s > sums[best] {
                        best = i;
                    }
                }
                let mut v = vec![0.0; n];
                v[best] = 1.0;
                v
            }
        })
    }
}

/// Members for the restricted player: every builtin except `lp-nash`, with
/// `pure-k` for each index below `max_n`.
pub fn builtin_b_members(max_n: usize) -> Vec<FamilyMember> {
    let mut v = vec![FamilyMember::Uniform, FamilyMember::BrToUniform];
    v.extend((0..max_n).map(FamilyMember::Pure));
    v
}

/// How one member fares against the equilibrium strategy in one subgame.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubgameAudit {
    pub subgame: usize,
    /// Payoff to the member's player when facing the equilibrium strategy.
    pub member_payoff: f64,
    /// Best pure-strategy payoff against the equilibrium strategy.
    pub best_payoff: f64,
    pub is_best_response: bool,
}

/// Best-response test of `member` against the LP equilibrium in every subgame.
pub fn audit_member(subgames: &[SkewSymmetricGame], member: FamilyMember) -> Result<Vec<SubgameAudit>> {
    subgames
        .iter()
        .enumerate()
        .map(|(k, g)| {
            let a = g.to_f64();
            let m = symmetric_nash_skew(&a)?.probs;
            let b = member.mixed(g)?;
            let against: Vec<f64> = (0..g.n).map(|i| (0..g.n).map(|j| a[i][j] * m[j]).sum()).collect();
            let member_payoff: f64 = b.iter().zip(&against).map(|(x, y)| x * y).sum();
            let best_payoff = against.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Ok(SubgameAudit {
                subgame: k,
                member_payoff,
                best_payoff,
                is_best_response: member_payoff >= best_payoff - BR_AUDIT_TOL,
            })
        })
        .collect()
}

fn family(name: &str, members: &[FamilyMember], subgames: &[SkewSymmetricGame], max_n: usize) -> Result<StrategyFamily> {
    let mut f = StrategyFamily::new(name);
    for m in members {
        let rows = subgames
            .iter()
            .map(|g| {
                let mut p = m.mixed(g)?;
                p.resize(max_n, 0.0);
                Ok(ProbRow::new(p))
            })
            .collect::<Result<Vec<_>>>()?;
        f = f.with(m.to_string(), Cpd::from_rows(vec!["G".into()], rows));
    }
    Ok(f)
}

/// Pool of subgames drawn by `G`; both players pick a strategy function of
/// the realized matrix and are paid `(g[i][j], -g[i][j])`.
pub fn make_letsplay(
    subgames: &[SkewSymmetricGame],
    weights: &[f64],
    a_members: &[FamilyMember],
    b_members: &[FamilyMember],
) -> Result<GameBundle> {
    if subgames.is_empty() || weights.len() != subgames.len() {
        return Err(SbnError::contract("need one weight per subgame"));
    }
    let row = ProbRow::new(weights.to_vec());
    if let Some(problem) = row.check(false) {
        return Err(SbnError::contract(format!("subgame weights: {problem}")));
    }
    if !a_members.contains(&FamilyMember::LpNash) {
        return Err(SbnError::contract("player A's family must include lp-nash"));
    }
    if b_members.contains(&FamilyMember::LpNash) {
        return Err(SbnError::contract("player B's family must not include lp-nash"));
    }
    if b_members.is_empty() {
        return Err(SbnError::contract("player B's family is empty"));
    }
    let k = subgames.len();
    let max_n = subgames.iter().map(|g| g.n).max().unwrap_or(1);

    let mut graph = SbnGraph::new(2);
    graph.add(Node::chance("G", Domain::int_range(0, k as i64 - 1)?, Cpd::from_rows(vec![], vec![row])))?;
    let choices = Domain::int_range(0, max_n as i64 - 1)?;
    graph.add(Node::strategic("S_a", choices.clone(), vec!["G".into()], PlayerId(0), family("A", a_members, subgames, max_n)?))?;
    graph.add(Node::strategic("S_b", choices, vec!["G".into()], PlayerId(1), family("B", b_members, subgames, max_n)?))?;

    let mut values: BTreeMap<Value, usize> = BTreeMap::new();
    let zero = Value::payoff([Decimal::ZERO, Decimal::ZERO]);
    values.insert(zero.clone(), 0);
    for g in subgames {
        for r in &g.matrix {
            for &x in r {
                let v = Value::payoff([x, -x]);
                let next = values.len();
                values.entry(v).or_insert(next);
            }
        }
    }
    let mut ordered: Vec<(Value, usize)> = values.into_iter().collect();
    ordered.sort_by_key(|(_, i)| *i);
    let payoff_domain = Domain::new(ordered.into_iter().map(|(v, _)| v).collect())?;
    let rows = (0..payoff_domain.len()).map(|i| ProbRow::point_mass(payoff_domain.len(), i)).collect();
    let parents: Vec<NodeId> = vec!["G".into(), "S_a".into(), "S_b".into()];
    let pi = Cpd::from_row_ids(parents, &[k, max_n, max_n], rows, |a| {
        let g = &subgames[a[0]];
        let v = if a[1] < g.n && a[2] < g.n {
            let x = g.matrix[a[1]][a[2]];
            Value::payoff([x, -x])
        } else {
            zero.clone()
        };
        payoff_domain.position(&v).expect("payoff value registered above")
    });
    graph.add(Node::payoff("pi", None, payoff_domain.clone(), pi))?;
    graph.ensure_valid()?;

    let mut notes = BTreeMap::new();
    notes.insert("G".into(), format!("{k} skew-symmetric subgames, sizes up to {max_n}"));
    notes.insert(
        "S_a".into(),
        format!(
            "player A: {} (includes the LP equilibrium solver)",
            a_members.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
        ),
    );
    notes.insert(
        "S_b".into(),
        format!(
            "player B: {} (no equilibrium solver)",
            b_members.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
        ),
    );
    notes.insert("pi".into(), "A receives g[i][j], B receives -g[i][j]".into());
    Ok(GameBundle { graph, notes })
}
