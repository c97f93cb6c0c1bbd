//! JSON description format for strategic Bayesian networks.
//!
//! ```json
//! {
//!   "players": 1,
//!   "nodes": [
//!     {"id": "a", "kind": "chance", "domain": [0, 1], "parents": [],
//!      "cpd": [{"given": [], "p": [0.5, 0.5]}]},
//!     {"id": "pi", "kind": "payoff", "domain": [[0], [1]], "parents": ["a"],
//!      "cpd": [{"given": [0], "p": [1, 0]}, {"given": [1], "p": [0, 1]}]}
//!   ]
//! }
//! ```
//!
//! Payoff nodes without `owner` are elided tuple nodes. With
//! `"probabilities": "exact"`, probabilities are written as `"p/q"` strings.

use std::collections::BTreeMap;
use std::str::FromStr;

use num_rational::BigRational;
use rust_decimal::prelude::ToPrimitive;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use serde_json::{json, Number, Value as Json};

use crate::cpd::{for_each_assignment, Cpd, ProbRow};
use crate::error::{Result, SbnError};
use crate::exact::{f64_to_rational, parse_rational};
use crate::graph::{Node, NodeId, NodeKind, PlayerId, ProbabilityMode, SbnGraph, Strategy, StrategyFamily};
use crate::value::{Domain, Value};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraph {
    players: usize,
    #[serde(default, skip_serializing_if = "is_float")]
    probabilities: ProbabilityMode,
    nodes: Vec<RawNode>,
}

fn is_float(m: &ProbabilityMode) -> bool {
    *m == ProbabilityMode::Float
}

#[derive(Serialize, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum RawKind {
    Chance,
    Strategic,
    Payoff,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    id: String,
    kind: RawKind,
    domain: Vec<Json>,
    parents: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cpd: Option<Vec<RawRow>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    owner: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    family: Option<RawFamily>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRow {
    given: Vec<Json>,
    p: Vec<Json>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFamily {
    name: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    deterministic: bool,
    strategies: Vec<RawStrategy>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStrategy {
    label: String,
    cpd: Vec<RawRow>,
}

fn perr(msg: impl Into<String>) -> SbnError {
    SbnError::Parse(msg.into())
}

pub fn value_from_json(v: &Json) -> Result<Value> {
    match v {
        Json::Number(n) => n
            .as_i64()
            .map(Value::Int)
            .ok_or_else(|| perr(format!("scalar value {n} is not an integer; wrap fractional payoffs in an array"))),
        Json::String(s) => Ok(Value::Symbol(s.clone())),
        Json::Array(items) => {
            let entries = items
                .iter()
                .map(|x| match x {
                    Json::Number(n) => decimal_from_number(n),
                    other => Err(perr(format!("payoff entry {other} is not a number"))),
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Value::payoff(entries))
        }
        other => Err(perr(format!("unsupported value {other}"))),
    }
}

fn decimal_from_number(n: &Number) -> Result<Decimal> {
    if let Some(i) = n.as_i64() {
        return Ok(Decimal::from(i));
    }
    let s = n.to_string();
    Decimal::from_str(&s)
        .or_else(|_| Decimal::from_scientific(&s))
        .map_err(|e| perr(format!("payoff entry {s}: {e}")))
}

pub fn value_to_json(v: &Value) -> Json {
    match v {
        Value::Int(i) => json!(i),
        Value::Symbol(s) => json!(s),
        Value::Payoff(p) => Json::Array(p.iter().map(|d| decimal_to_json(*d)).collect()),
    }
}

fn decimal_to_json(d: Decimal) -> Json {
    if d.fract().is_zero() {
        if let Some(i) = d.to_i64() {
            return json!(i);
        }
    }
    d.to_f64().and_then(Number::from_f64).map(Json::Number).unwrap_or(Json::Null)
}

fn prob_from_json(v: &Json, mode: ProbabilityMode) -> Result<(f64, Option<BigRational>)> {
    match (v, mode) {
        (Json::Number(n), ProbabilityMode::Float) => {
            n.as_f64().map(|x| (x, None)).ok_or_else(|| perr(format!("bad probability {n}")))
        }
        (Json::Number(n), ProbabilityMode::Exact) => {
            let x = n.as_f64().ok_or_else(|| perr(format!("bad probability {n}")))?;
            let r = f64_to_rational(x).ok_or_else(|| perr(format!("bad probability {n}")))?;
            Ok((x, Some(r)))
        }
        (Json::String(s), ProbabilityMode::Exact) => {
            let r = parse_rational(s).ok_or_else(|| perr(format!("bad rational probability {s:?}")))?;
            Ok((crate::exact::rational_to_f64(&r), Some(r)))
        }
        (other, _) => Err(perr(format!("bad probability {other}"))),
    }
}

fn prob_to_json(row: &ProbRow, mode: ProbabilityMode) -> Vec<Json> {
    match (mode, row.exact_probs()) {
        (ProbabilityMode::Exact, Some(exact)) => exact.iter().map(|r| json!(r.to_string())).collect(),
        _ => row.probs().iter().map(|&p| float_json(p)).collect(),
    }
}

fn float_json(p: f64) -> Json {
    if p == 0.0 {
        json!(0)
    } else if p == 1.0 {
        json!(1)
    } else {
        Number::from_f64(p).map(Json::Number).unwrap_or(Json::Null)
    }
}

/// Parses a graph description. Structural problems other than malformed
/// input (cycles, unnormalized rows, missing rows) are left for `validate`.
pub fn parse_graph(text: &str) -> Result<SbnGraph> {
    let raw: RawGraph = serde_json::from_str(text).map_err(|e| perr(e.to_string()))?;
    let mode = raw.probabilities;
    let mut domains: BTreeMap<String, Domain> = BTreeMap::new();
    for n in &raw.nodes {
        let values = n.domain.iter().map(value_from_json).collect::<Result<Vec<_>>>().map_err(|e| at(&n.id, e))?;
        let domain = Domain::new(values).map_err(|e| at(&n.id, e))?;
        if domains.insert(n.id.clone(), domain).is_some() {
            return Err(perr(format!("duplicate node id {:?}", n.id)));
        }
    }

    let mut graph = SbnGraph::new(raw.players);
    graph.mode = mode;
    for n in &raw.nodes {
        let parents: Vec<NodeId> = n.parents.iter().map(NodeId::new).collect();
        let parent_domains = n
            .parents
            .iter()
            .map(|p| domains.get(p).cloned().ok_or_else(|| perr(format!("node {:?}: unknown parent {p:?}", n.id))))
            .collect::<Result<Vec<_>>>()?;
        let domain = domains[&n.id].clone();
        let read_cpd = |rows: &[RawRow]| parse_rows(&parents, &parent_domains, rows, mode).map_err(|e| at(&n.id, e));
        let kind = match n.kind {
            RawKind::Chance | RawKind::Payoff => {
                if n.family.is_some() {
                    return Err(perr(format!("node {:?}: only strategic nodes have a family", n.id)));
                }
                let rows = n.cpd.as_ref().ok_or_else(|| perr(format!("node {:?}: missing cpd", n.id)))?;
                let cpd = read_cpd(rows)?;
                if n.kind == RawKind::Chance {
                    if n.owner.is_some() {
                        return Err(perr(format!("node {:?}: chance nodes have no owner", n.id)));
                    }
                    NodeKind::Chance { cpd }
                } else {
                    NodeKind::Payoff { owner: n.owner.map(PlayerId), cpd }
                }
            }
            RawKind::Strategic => {
                if n.cpd.is_some() {
                    return Err(perr(format!("node {:?}: strategic nodes take a family, not a cpd", n.id)));
                }
                let owner = n.owner.ok_or_else(|| perr(format!("node {:?}: missing owner", n.id)))?;
                let rf = n.family.as_ref().ok_or_else(|| perr(format!("node {:?}: missing family", n.id)))?;
                let strategies = rf
                    .strategies
                    .iter()
                    .map(|s| Ok(Strategy { label: s.label.clone(), cpd: read_cpd(&s.cpd)? }))
                    .collect::<Result<Vec<_>>>()?;
                NodeKind::Strategic {
                    owner: PlayerId(owner),
                    family: StrategyFamily { name: rf.name.clone(), deterministic: rf.deterministic, strategies },
                }
            }
        };
        graph.add(Node { id: NodeId::new(&n.id), domain, parents, kind })?;
    }
    Ok(graph)
}

fn at(id: &str, e: SbnError) -> SbnError {
    match e {
        SbnError::Parse(m) | SbnError::Structural(m) => perr(format!("node {id:?}: {m}")),
        other => other,
    }
}

fn parse_rows(parents: &[NodeId], parent_domains: &[Domain], rows: &[RawRow], mode: ProbabilityMode) -> Result<Cpd> {
    let sizes: Vec<usize> = parent_domains.iter().map(Domain::len).collect();
    let total: usize = sizes.iter().product();
    let mut table: Vec<Option<ProbRow>> = vec![None; total];
    for row in rows {
        if row.given.len() != parents.len() {
            return Err(perr(format!("row gives {} parent values for {} parents", row.given.len(), parents.len())));
        }
        let mut idx = 0usize;
        for ((g, d), &s) in row.given.iter().zip(parent_domains).zip(&sizes) {
            let v = value_from_json(g)?;
            let pos = d.position(&v).ok_or_else(|| perr(format!("given value {v} is not in the parent's domain")))?;
            idx = idx * s + pos;
        }
        if table[idx].is_some() {
            return Err(perr(format!("duplicate row for given {:?}", row.given)));
        }
        let probs = row.p.iter().map(|p| prob_from_json(p, mode)).collect::<Result<Vec<_>>>()?;
        let parsed = match mode {
            ProbabilityMode::Float => ProbRow::new(probs.into_iter().map(|(f, _)| f).collect()),
            ProbabilityMode::Exact => ProbRow::exact(probs.into_iter().map(|(_, r)| r.expect("exact mode")).collect()),
        };
        table[idx] = Some(parsed);
    }
    Ok(Cpd::from_optional_rows(parents.to_vec(), table))
}

fn rows_to_raw(graph: &SbnGraph, parents: &[NodeId], cpd: &Cpd) -> Result<Vec<RawRow>> {
    let domains = parents
        .iter()
        .map(|p| graph.node(p).map(|n| n.domain.clone()).ok_or_else(|| SbnError::structural(format!("unknown parent {p}"))))
        .collect::<Result<Vec<_>>>()?;
    let sizes: Vec<usize> = domains.iter().map(Domain::len).collect();
    let mut out = Vec::with_capacity(cpd.num_rows());
    let mut i = 0usize;
    for_each_assignment(&sizes, |a| {
        if let Some(row) = cpd.row(i) {
            let given = a.iter().zip(&domains).map(|(&k, d)| value_to_json(&d.values()[k])).collect();
            out.push(RawRow { given, p: prob_to_json(row, graph.mode) });
        }
        i += 1;
    });
    Ok(out)
}

fn to_raw(graph: &SbnGraph) -> Result<RawGraph> {
    let mut nodes = Vec::with_capacity(graph.len());
    for node in graph.nodes() {
        let domain = node.domain.values().iter().map(value_to_json).collect();
        let parents = node.parents.iter().map(|p| p.to_string()).collect();
        let mut raw = RawNode {
            id: node.id.to_string(),
            kind: RawKind::Chance,
            domain,
            parents,
            cpd: None,
            owner: None,
            family: None,
        };
        match &node.kind {
            NodeKind::Chance { cpd } => raw.cpd = Some(rows_to_raw(graph, &node.parents, cpd)?),
            NodeKind::Payoff { owner, cpd } => {
                raw.kind = RawKind::Payoff;
                raw.owner = owner.map(|p| p.0);
                raw.cpd = Some(rows_to_raw(graph, &node.parents, cpd)?);
            }
            NodeKind::Strategic { owner, family } => {
                raw.kind = RawKind::Strategic;
                raw.owner = Some(owner.0);
                raw.family = Some(RawFamily {
                    name: family.name.clone(),
                    deterministic: family.deterministic,
                    strategies: family
                        .strategies
                        .iter()
                        .map(|s| Ok(RawStrategy { label: s.label.clone(), cpd: rows_to_raw(graph, &node.parents, &s.cpd)? }))
                        .collect::<Result<Vec<_>>>()?,
                });
            }
        }
        nodes.push(raw);
    }
    Ok(RawGraph { players: graph.n_players, probabilities: graph.mode, nodes })
}

pub fn graph_to_json(graph: &SbnGraph) -> Result<Json> {
    serde_json::to_value(to_raw(graph)?).map_err(|e| SbnError::internal(e.to_string()))
}

pub fn write_graph(graph: &SbnGraph) -> Result<String> {
    serde_json::to_string_pretty(&to_raw(graph)?).map_err(|e| SbnError::internal(e.to_string()))
}
