//! Strategy profiles and binding them into classic Bayesian networks.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;

use crate::cpd::Cpd;
use crate::error::{Result, SbnError};
use crate::graph::{Node, NodeId, NodeKind, SbnGraph};
use crate::validate::{payoff_scalar, topological_order};
use crate::value::Value;

/// One chosen strategy index per strategic node.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StrategyProfile {
    pub choices: BTreeMap<NodeId, usize>,
}

impl StrategyProfile {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(mut self, node: impl Into<NodeId>, index: usize) -> Self {
        self.choices.insert(node.into(), index);
        self
    }

    pub fn get(&self, node: &NodeId) -> Option<usize> {
        self.choices.get(node).copied()
    }

    /// Builds a profile from strategy labels.
    pub fn from_labels<'a>(
        graph: &SbnGraph,
        labels: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<Self> {
        let mut profile = StrategyProfile::new();
        for (node, label) in labels {
            let id = NodeId::new(node);
            let family = graph.node(&id).and_then(Node::family).ok_or_else(|| SbnError::Binding {
                node: id.clone(),
                reason: "is not a strategic node".into(),
            })?;
            let idx = family.position(label).ok_or_else(|| SbnError::Binding {
                node: id.clone(),
                reason: format!("has no strategy labelled {label:?}"),
            })?;
            profile.choices.insert(id, idx);
        }
        Ok(profile)
    }

    /// `node=label` pairs, for reports.
    pub fn describe(&self, graph: &SbnGraph) -> String {
        self.choices
            .iter()
            .map(|(id, &i)| {
                let label = graph
                    .node(id)
                    .and_then(Node::family)
                    .and_then(|f| f.strategies.get(i))
                    .map(|s| s.label.clone())
                    .unwrap_or_else(|| i.to_string());
                format!("{id}={label}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Iterator over every complete profile, lexicographic in (node id, index).
#[derive(Clone, Debug)]
pub struct Profiles {
    nodes: Vec<NodeId>,
    sizes: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl Iterator for Profiles {
    type Item = StrategyProfile;

    fn next(&mut self) -> Option<StrategyProfile> {
        let current = self.next.take()?;
        let profile = StrategyProfile {
            choices: self.nodes.iter().cloned().zip(current.iter().copied()).collect(),
        };
        let mut idx = current;
        let mut k = idx.len();
        while k > 0 {
            k -= 1;
            idx[k] += 1;
            if idx[k] < self.sizes[k] {
                self.next = Some(idx);
                break;
            }
            idx[k] = 0;
        }
        Some(profile)
    }
}

pub fn enumerate_profiles(graph: &SbnGraph) -> Profiles {
    let (nodes, sizes): (Vec<NodeId>, Vec<usize>) =
        graph.strategic_nodes().map(|n| (n.id.clone(), n.family().map_or(0, |f| f.len()))).unzip();
    let next = if sizes.iter().all(|&s| s > 0) { Some(vec![0; sizes.len()]) } else { None };
    Profiles { nodes, sizes, next }
}

/// Number of complete profiles.
pub fn profile_count(graph: &SbnGraph) -> usize {
    graph.strategic_nodes().map(|n| n.family().map_or(0, |f| f.len())).product()
}

/// Payoff contribution of each value of a payoff node.
#[derive(Clone, Debug)]
pub struct PayoffTable {
    pub float: Vec<Vec<f64>>,
    pub exact: Vec<Vec<BigRational>>,
}

/// One node of a bound network in depth order, with parent positions resolved.
#[derive(Clone, Debug)]
pub struct Step {
    pub id: NodeId,
    pub domain_len: usize,
    /// Positions (in depth order) of the parents.
    pub parents: Vec<usize>,
    pub strides: Vec<usize>,
    pub cpd: Cpd,
    pub payoff: Option<PayoffTable>,
}

impl Step {
    /// Row of the CPD selected by already-assigned value indices.
    pub fn row_index(&self, assignment: &[usize]) -> usize {
        self.parents.iter().zip(&self.strides).map(|(&p, &s)| assignment[p] * s).sum()
    }
}

/// A fully specified Bayesian network: every strategic node replaced by the
/// CPD of its chosen action.
#[derive(Clone, Debug)]
pub struct BoundNetwork {
    pub graph: SbnGraph,
    pub profile: StrategyProfile,
    pub resolved: BTreeMap<NodeId, Cpd>,
    steps: Vec<Step>,
}

impl BoundNetwork {
    pub fn n_players(&self) -> usize {
        self.graph.n_players
    }

    /// Nodes in depth order with resolved CPDs.
    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn order(&self) -> impl Iterator<Item = &NodeId> {
        self.steps.iter().map(|s| &s.id)
    }

    /// The bound network as a graph with no strategic nodes: each one becomes
    /// a chance node carrying its chosen CPD.
    pub fn as_graph(&self) -> SbnGraph {
        let mut g = SbnGraph::new(self.graph.n_players);
        g.mode = self.graph.mode;
        for node in self.graph.nodes() {
            let mut node = node.clone();
            if node.is_strategic() {
                node.kind = NodeKind::Chance { cpd: self.resolved[&node.id].clone() };
            }
            g.add(node).expect("ids are unique in the source graph");
        }
        g
    }

    /// Sum of payoff contributions of a complete assignment (value indices in depth order).
    pub fn payoffs_of(&self, assignment: &[usize]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_players()];
        for (step, &v) in self.steps.iter().zip(assignment) {
            if let Some(table) = &step.payoff {
                for (o, x) in out.iter_mut().zip(&table.float[v]) {
                    *o += x;
                }
            }
        }
        out
    }
}

/// Substitutes each strategic node's chosen action CPD.
pub fn bind(graph: &SbnGraph, profile: &StrategyProfile) -> Result<BoundNetwork> {
    graph.ensure_valid()?;
    let mut resolved = BTreeMap::new();
    for node in graph.nodes() {
        let cpd = match &node.kind {
            NodeKind::Chance { cpd } | NodeKind::Payoff { cpd, .. } => cpd.clone(),
            NodeKind::Strategic { family, .. } => {
                let idx = profile.get(&node.id).ok_or_else(|| SbnError::Binding {
                    node: node.id.clone(),
                    reason: "unbound".into(),
                })?;
                let strategy = family.strategies.get(idx).ok_or_else(|| SbnError::Binding {
                    node: node.id.clone(),
                    reason: format!("strategy index {idx} out of range for family of {}", family.len()),
                })?;
                strategy.cpd.clone()
            }
        };
        resolved.insert(node.id.clone(), cpd);
    }
    if let Some(extra) = profile.choices.keys().find(|id| graph.node(id).is_none_or(|n| !n.is_strategic())) {
        return Err(SbnError::Binding { node: extra.clone(), reason: "is not a strategic node".into() });
    }
    let steps = compile(graph, &resolved)?;
    Ok(BoundNetwork { graph: graph.clone(), profile: profile.clone(), resolved, steps })
}

fn compile(graph: &SbnGraph, resolved: &BTreeMap<NodeId, Cpd>) -> Result<Vec<Step>> {
    let order = topological_order(graph)?;
    let position: BTreeMap<&NodeId, usize> = order.iter().enumerate().map(|(i, id)| (id, i)).collect();
    let mut steps = Vec::with_capacity(order.len());
    for id in &order {
        let node = graph.node(id).expect("ordered ids exist");
        let sizes = graph.parent_sizes(node)?;
        let mut strides = vec![1usize; sizes.len()];
        for k in (0..sizes.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * sizes[k + 1];
        }
        let payoff = match &node.kind {
            NodeKind::Payoff { owner, .. } => Some(payoff_table(graph.n_players, *owner, node)?),
            _ => None,
        };
        steps.push(Step {
            id: id.clone(),
            domain_len: node.domain.len(),
            parents: node.parents.iter().map(|p| position[p]).collect(),
            strides,
            cpd: resolved[id].clone(),
            payoff,
        });
    }
    Ok(steps)
}

fn payoff_table(n_players: usize, owner: Option<crate::graph::PlayerId>, node: &Node) -> Result<PayoffTable> {
    let mut float = Vec::with_capacity(node.domain.len());
    let mut exact = Vec::with_capacity(node.domain.len());
    for v in node.domain.values() {
        let mut e = vec![BigRational::zero(); n_players];
        match (owner, v) {
            (None, Value::Payoff(p)) => {
                for (slot, d) in e.iter_mut().zip(p) {
                    *slot = crate::exact::decimal_to_rational(*d);
                }
            }
            (Some(p), v) => {
                let d = payoff_scalar(v).ok_or_else(|| SbnError::internal(format!("{}: bad payoff value {v}", node.id)))?;
                e[p.0] = crate::exact::decimal_to_rational(d);
            }
            (None, v) => return Err(SbnError::internal(format!("{}: bad payoff value {v}", node.id))),
        }
        float.push(e.iter().map(crate::exact::rational_to_f64).collect());
        exact.push(e);
    }
    Ok(PayoffTable { float, exact })
}
