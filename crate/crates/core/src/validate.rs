//! Structural validation and depth ordering.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::cpd::Cpd;
use crate::error::{Result, SbnError};
use crate::graph::{NodeId, NodeKind, ProbabilityMode, SbnGraph};
use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    NoPlayers,
    Cycle,
    UnknownParent,
    ParentMismatch,
    IncompleteCpd,
    RowArity,
    BadProbability,
    OwnerOutOfRange,
    EmptyFamily,
    FamilyMismatch,
    DuplicateLabel,
    NotDeterministic,
    PayoffValue,
    PayoffNodes,
    PayoffHasChildren,
}

impl ViolationKind {
    pub fn name(self) -> &'static str {
        match self {
            ViolationKind::NoPlayers => "no players",
            ViolationKind::Cycle => "cycle",
            ViolationKind::UnknownParent => "unknown parent",
            ViolationKind::ParentMismatch => "parent mismatch",
            ViolationKind::IncompleteCpd => "incomplete CPD",
            ViolationKind::RowArity => "row arity",
            ViolationKind::BadProbability => "bad probability",
            ViolationKind::OwnerOutOfRange => "owner out of range",
            ViolationKind::EmptyFamily => "empty family",
            ViolationKind::FamilyMismatch => "family mismatch",
            ViolationKind::DuplicateLabel => "duplicate label",
            ViolationKind::NotDeterministic => "not deterministic",
            ViolationKind::PayoffValue => "payoff value",
            ViolationKind::PayoffNodes => "payoff nodes",
            ViolationKind::PayoffHasChildren => "payoff has children",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub node: Option<NodeId>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.node {
            Some(n) => write!(f, "{} at {n}: {}", self.kind.name(), self.message),
            None => write!(f, "{}: {}", self.kind.name(), self.message),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    pub fn for_node<'a>(&'a self, id: &'a NodeId) -> impl Iterator<Item = &'a Violation> + 'a {
        self.violations.iter().filter(move |v| v.node.as_ref() == Some(id))
    }

    fn push(&mut self, kind: ViolationKind, node: Option<&NodeId>, message: impl Into<String>) {
        self.violations.push(Violation { kind, node: node.cloned(), message: message.into() });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Returns every violated structural invariant. An empty report means the
/// graph is valid.
pub fn validate(graph: &SbnGraph) -> ValidationReport {
    let mut report = ValidationReport::default();
    if graph.n_players == 0 {
        report.push(ViolationKind::NoPlayers, None, "graph declares zero players");
    }

    for node in graph.nodes() {
        for p in &node.parents {
            if graph.node(p).is_none() {
                report.push(ViolationKind::UnknownParent, Some(&node.id), format!("parent {p} is not declared"));
            }
        }
    }

    if let Err(stuck) = kahn(graph) {
        let names: Vec<String> = stuck.iter().map(|n| n.to_string()).collect();
        report.push(
            ViolationKind::Cycle,
            stuck.first(),
            format!("cycle among nodes [{}]", names.join(", ")),
        );
    }

    let exact = graph.mode == ProbabilityMode::Exact;
    let mut children: BTreeMap<&NodeId, usize> = BTreeMap::new();
    for node in graph.nodes() {
        for p in &node.parents {
            *children.entry(p).or_default() += 1;
        }
    }

    let mut elided = 0usize;
    let mut per_player = vec![0usize; graph.n_players];
    for node in graph.nodes() {
        let id = &node.id;
        match &node.kind {
            NodeKind::Chance { cpd } => check_cpd(graph, &mut report, id, &node.parents, node.domain.len(), cpd, exact),
            NodeKind::Strategic { owner, family } => {
                if owner.0 >= graph.n_players {
                    report.push(ViolationKind::OwnerOutOfRange, Some(id), format!("owner {} of {} players", owner.0, graph.n_players));
                }
                if family.is_empty() {
                    report.push(ViolationKind::EmptyFamily, Some(id), format!("family {:?} has no strategies", family.name));
                }
                let mut labels = BTreeSet::new();
                for s in &family.strategies {
                    if !labels.insert(s.label.as_str()) {
                        report.push(ViolationKind::DuplicateLabel, Some(id), format!("label {:?} repeated", s.label));
                    }
                    if s.cpd.parents() != node.parents.as_slice() {
                        report.push(
                            ViolationKind::FamilyMismatch,
                            Some(id),
                            format!("strategy {:?} does not share the node's parent list", s.label),
                        );
                        continue;
                    }
                    check_cpd(graph, &mut report, id, &node.parents, node.domain.len(), &s.cpd, exact);
                    if family.deterministic && !s.cpd.is_deterministic() {
                        report.push(
                            ViolationKind::NotDeterministic,
                            Some(id),
                            format!("strategy {:?} has a row that is not a point mass", s.label),
                        );
                    }
                }
            }
            NodeKind::Payoff { owner, cpd } => {
                check_cpd(graph, &mut report, id, &node.parents, node.domain.len(), cpd, exact);
                if children.get(id).copied().unwrap_or(0) > 0 {
                    report.push(ViolationKind::PayoffHasChildren, Some(id), "payoff nodes must be sinks");
                }
                match owner {
                    None => {
                        elided += 1;
                        for v in node.domain.values() {
                            if v.as_payoff().map(|p| p.len()) != Some(graph.n_players) {
                                report.push(
                                    ViolationKind::PayoffValue,
                                    Some(id),
                                    format!("value {v} is not a payoff vector of length {}", graph.n_players),
                                );
                                break;
                            }
                        }
                    }
                    Some(p) => {
                        if p.0 >= graph.n_players {
                            report.push(ViolationKind::OwnerOutOfRange, Some(id), format!("owner {} of {} players", p.0, graph.n_players));
                        } else {
                            per_player[p.0] += 1;
                        }
                        if let Some(v) = node.domain.values().iter().find(|v| payoff_scalar(v).is_none()) {
                            report.push(ViolationKind::PayoffValue, Some(id), format!("value {v} is not a scalar payoff"));
                        }
                    }
                }
            }
        }
    }

    let per_player_total: usize = per_player.iter().sum();
    let one_each = per_player_total == graph.n_players && per_player.iter().all(|&c| c == 1);
    let ok = (elided == 1 && per_player_total == 0) || (elided == 0 && one_each);
    if !ok && graph.n_players > 0 {
        report.push(
            ViolationKind::PayoffNodes,
            None,
            format!(
                "need exactly one payoff node per player or one elided payoff node; found {elided} elided, per-player counts {per_player:?}"
            ),
        );
    }
    report
}

/// A scalar payoff: an integer or a one-entry payoff vector.
pub(crate) fn payoff_scalar(v: &Value) -> Option<rust_decimal::Decimal> {
    match v {
        Value::Int(i) => Some((*i).into()),
        Value::Payoff(p) if p.len() == 1 => Some(p[0]),
        _ => None,
    }
}

fn check_cpd(
    graph: &SbnGraph,
    report: &mut ValidationReport,
    id: &NodeId,
    parents: &[NodeId],
    domain_len: usize,
    cpd: &Cpd,
    exact: bool,
) {
    if cpd.parents() != parents {
        report.push(ViolationKind::ParentMismatch, Some(id), "CPD parent list differs from node parents");
        return;
    }
    let Some(expected) = parents
        .iter()
        .map(|p| graph.node(p).map(|n| n.domain.len()))
        .collect::<Option<Vec<_>>>()
        .map(|s| s.iter().product::<usize>())
    else {
        return;
    };
    let missing = cpd.missing_rows();
    if cpd.num_rows() != expected || missing > 0 {
        report.push(
            ViolationKind::IncompleteCpd,
            Some(id),
            format!(
                "CPD lists {} of {expected} parent assignments",
                cpd.num_rows().min(expected) - missing.min(cpd.num_rows())
            ),
        );
    }
    for row in cpd.distinct_rows() {
        if row.len() != domain_len {
            report.push(ViolationKind::RowArity, Some(id), format!("row has {} entries for a domain of {domain_len}", row.len()));
            return;
        }
        if let Some(problem) = row.check(exact) {
            report.push(ViolationKind::BadProbability, Some(id), problem);
            return;
        }
    }
}

/// Kahn's algorithm with the smallest ready id first. On a cycle, returns the
/// nodes that could not be ordered.
fn kahn(graph: &SbnGraph) -> std::result::Result<Vec<NodeId>, Vec<NodeId>> {
    let mut indegree: BTreeMap<&NodeId, usize> = graph.node_ids().map(|id| (id, 0)).collect();
    let mut children: BTreeMap<&NodeId, Vec<&NodeId>> = BTreeMap::new();
    for node in graph.nodes() {
        for p in &node.parents {
            if graph.node(p).is_some() {
                *indegree.get_mut(&node.id).expect("node present") += 1;
                children.entry(p).or_default().push(&node.id);
            }
        }
    }
    let mut ready: BTreeSet<&NodeId> = indegree.iter().filter(|(_, &d)| d == 0).map(|(&id, _)| id).collect();
    let mut order = Vec::with_capacity(graph.len());
    while let Some(next) = ready.pop_first() {
        order.push(next.clone());
        for &child in children.get(next).map(Vec::as_slice).unwrap_or(&[]) {
            let d = indegree.get_mut(child).expect("child present");
            *d -= 1;
            if *d == 0 {
                ready.insert(child);
            }
        }
    }
    if order.len() == graph.len() {
        Ok(order)
    } else {
        Err(indegree.into_iter().filter(|(_, d)| *d > 0).map(|(id, _)| id.clone()).collect())
    }
}

/// Depth order: every node after all of its parents, ties broken by id.
pub fn topological_order(graph: &SbnGraph) -> Result<Vec<NodeId>> {
    kahn(graph).map_err(|stuck| {
        let names: Vec<String> = stuck.iter().map(|n| n.to_string()).collect();
        SbnError::structural(format!("cycle among nodes [{}]", names.join(", ")))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cpd::ProbRow;
    use crate::graph::{Node, PlayerId, StrategyFamily};
    use crate::value::Domain;
    use rust_decimal::Decimal;

    fn payoff_domain(vals: &[i64]) -> Domain {
        Domain::new(vals.iter().map(|&v| Value::payoff([Decimal::from(v)])).collect()).unwrap()
    }

    fn coin_graph() -> SbnGraph {
        let coin = Domain::int_range(0, 1).unwrap();
        SbnGraph::new(1)
            .with(Node::chance("a", coin.clone(), Cpd::from_rows(vec![], vec![ProbRow::uniform(2)])))
            .unwrap()
            .with(Node::payoff(
                "pi",
                None,
                payoff_domain(&[0, 1]),
                Cpd::from_fn(vec!["a".into()], &[2], |a| ProbRow::point_mass(2, a[0])),
            ))
            .unwrap()
    }

    #[test]
    fn minimal_graph_is_valid() {
        let report = validate(&coin_graph());
        assert!(report.is_valid(), "{report}");
    }

    #[test]
    fn cycle_is_reported() {
        let d = Domain::int_range(0, 1).unwrap();
        let g = SbnGraph::new(1)
            .with(Node::chance("a", d.clone(), Cpd::from_fn(vec!["b".into()], &[2], |a| ProbRow::point_mass(2, a[0]))))
            .unwrap()
            .with(Node::chance("b", d.clone(), Cpd::from_fn(vec!["a".into()], &[2], |a| ProbRow::point_mass(2, a[0]))))
            .unwrap()
            .with(Node::payoff("pi", None, payoff_domain(&[0]), Cpd::from_rows(vec![], vec![ProbRow::point_mass(1, 0)])))
            .unwrap();
        let report = validate(&g);
        assert!(report.has(ViolationKind::Cycle), "{report}");
        assert!(report.to_string().contains("cycle"));
        assert!(topological_order(&g).is_err());
    }

    #[test]
    fn incomplete_cpd_names_node() {
        let coin = Domain::int_range(0, 1).unwrap();
        let g = SbnGraph::new(1)
            .with(Node::chance("a", coin, Cpd::from_rows(vec![], vec![ProbRow::uniform(2)])))
            .unwrap()
            .with(Node::payoff(
                "pi",
                None,
                payoff_domain(&[0, 1]),
                Cpd::from_rows(vec!["a".into()], vec![ProbRow::point_mass(2, 0)]),
            ))
            .unwrap();
        let report = validate(&g);
        let pi = NodeId::new("pi");
        assert!(report.for_node(&pi).any(|v| v.kind == ViolationKind::IncompleteCpd), "{report}");
        assert!(report.to_string().contains("incomplete CPD"));
    }

    #[test]
    fn payoff_rules() {
        let mut g = coin_graph();
        g.add(Node::payoff("pi2", None, payoff_domain(&[0]), Cpd::from_rows(vec![], vec![ProbRow::point_mass(1, 0)])))
            .unwrap();
        assert!(validate(&g).has(ViolationKind::PayoffNodes));

        let coin = Domain::int_range(0, 1).unwrap();
        let g = SbnGraph::new(1)
            .with(Node::payoff("pi", None, payoff_domain(&[0, 1]), Cpd::from_rows(vec![], vec![ProbRow::uniform(2)])))
            .unwrap()
            .with(Node::chance("z", coin, Cpd::from_fn(vec!["pi".into()], &[2], |a| ProbRow::point_mass(2, a[0]))))
            .unwrap();
        assert!(validate(&g).has(ViolationKind::PayoffHasChildren));
    }

    #[test]
    fn strategic_checks() {
        let coin = Domain::int_range(0, 1).unwrap();
        let family = StrategyFamily::new("f")
            .deterministic()
            .with("mix", Cpd::from_rows(vec![], vec![ProbRow::uniform(2)]))
            .with("mix", Cpd::from_rows(vec![], vec![ProbRow::point_mass(2, 0)]));
        let g = SbnGraph::new(1)
            .with(Node::strategic("x", coin, vec![], PlayerId(3), family))
            .unwrap()
            .with(Node::payoff(
                "pi",
                None,
                payoff_domain(&[0, 1]),
                Cpd::from_fn(vec!["x".into()], &[2], |a| ProbRow::point_mass(2, a[0])),
            ))
            .unwrap();
        let report = validate(&g);
        assert!(report.has(ViolationKind::OwnerOutOfRange));
        assert!(report.has(ViolationKind::DuplicateLabel));
        assert!(report.has(ViolationKind::NotDeterministic));
    }

    #[test]
    fn orders() {
        let d = Domain::int_range(0, 1).unwrap();
        let det = |p: &str| Cpd::from_fn(vec![p.into()], &[2], |a| ProbRow::point_mass(2, a[0]));
        let chain = SbnGraph::new(1)
            .with(Node::chance("a", d.clone(), Cpd::from_rows(vec![], vec![ProbRow::uniform(2)])))
            .unwrap()
            .with(Node::chance("b", d.clone(), det("a")))
            .unwrap()
            .with(Node::payoff("pi", None, payoff_domain(&[0, 1]), det("b")))
            .unwrap();
        let ids: Vec<String> = topological_order(&chain).unwrap().iter().map(|n| n.to_string()).collect();
        assert_eq!(ids, ["a", "b", "pi"]);

        let two = |p: &str, q: &str| {
            Cpd::from_fn(vec![p.into(), q.into()], &[2, 2], |a| ProbRow::point_mass(2, a[0] & a[1]))
        };
        let diamond = SbnGraph::new(1)
            .with(Node::chance("a", d.clone(), Cpd::from_rows(vec![], vec![ProbRow::uniform(2)])))
            .unwrap()
            .with(Node::chance("y", d.clone(), det("a")))
            .unwrap()
            .with(Node::chance("x", d.clone(), det("a")))
            .unwrap()
            .with(Node::payoff("pi", None, payoff_domain(&[0, 1]), two("x", "y")))
            .unwrap();
        let ids: Vec<String> = topological_order(&diamond).unwrap().iter().map(|n| n.to_string()).collect();
        assert_eq!(ids, ["a", "x", "y", "pi"]);
    }
}
