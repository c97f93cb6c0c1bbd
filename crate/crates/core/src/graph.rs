//! Strategic Bayesian network data model.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cpd::Cpd;
use crate::error::{Result, SbnError};
use crate::value::Domain;

/// Node identifier, unique within a graph. Ordering is the canonical
/// tie-break used by topological sorting and profile enumeration.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        NodeId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId::new(s)
    }
}

impl From<String> for NodeId {
    fn from(s: String) -> Self {
        NodeId(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlayerId(pub usize);

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "player {}", self.0)
    }
}

/// One action available at a strategic node.
#[derive(Clone, Debug, PartialEq)]
pub struct Strategy {
    pub label: String,
    pub cpd: Cpd,
}

/// The finite action set of a strategic node.
#[derive(Clone, Debug, PartialEq)]
pub struct StrategyFamily {
    pub name: String,
    /// When set, every member must map each parent assignment to a point mass.
    pub deterministic: bool,
    pub strategies: Vec<Strategy>,
}

impl StrategyFamily {
    pub fn new(name: impl Into<String>) -> Self {
        StrategyFamily { name: name.into(), deterministic: false, strategies: Vec::new() }
    }

    pub fn deterministic(mut self) -> Self {
        self.deterministic = true;
        self
    }

    pub fn with(mut self, label: impl Into<String>, cpd: Cpd) -> Self {
        self.strategies.push(Strategy { label: label.into(), cpd });
        self
    }

    pub fn len(&self) -> usize {
        self.strategies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strategies.is_empty()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.strategies.iter().position(|s| s.label == label)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum NodeKind {
    Chance { cpd: Cpd },
    Strategic { owner: PlayerId, family: StrategyFamily },
    /// `owner == None` is the elided tuple node paying every player at once.
    Payoff { owner: Option<PlayerId>, cpd: Cpd },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub domain: Domain,
    pub parents: Vec<NodeId>,
    pub kind: NodeKind,
}

impl Node {
    pub fn chance(id: impl Into<NodeId>, domain: Domain, cpd: Cpd) -> Self {
        let parents = cpd.parents().to_vec();
        Node { id: id.into(), domain, parents, kind: NodeKind::Chance { cpd } }
    }

    pub fn strategic(
        id: impl Into<NodeId>,
        domain: Domain,
        parents: Vec<NodeId>,
        owner: PlayerId,
        family: StrategyFamily,
    ) -> Self {
        Node { id: id.into(), domain, parents, kind: NodeKind::Strategic { owner, family } }
    }

    pub fn payoff(id: impl Into<NodeId>, owner: Option<PlayerId>, domain: Domain, cpd: Cpd) -> Self {
        let parents = cpd.parents().to_vec();
        Node { id: id.into(), domain, parents, kind: NodeKind::Payoff { owner, cpd } }
    }

    pub fn is_strategic(&self) -> bool {
        matches!(self.kind, NodeKind::Strategic { .. })
    }

    pub fn is_payoff(&self) -> bool {
        matches!(self.kind, NodeKind::Payoff { .. })
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            NodeKind::Chance { .. } => "chance",
            NodeKind::Strategic { .. } => "strategic",
            NodeKind::Payoff { .. } => "payoff",
        }
    }

    /// The fixed CPD of a chance or payoff node.
    pub fn fixed_cpd(&self) -> Option<&Cpd> {
        match &self.kind {
            NodeKind::Chance { cpd } | NodeKind::Payoff { cpd, .. } => Some(cpd),
            NodeKind::Strategic { .. } => None,
        }
    }

    pub fn family(&self) -> Option<&StrategyFamily> {
        match &self.kind {
            NodeKind::Strategic { family, .. } => Some(family),
            _ => None,
        }
    }
}

/// Whether CPDs carry exact rational probabilities.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbabilityMode {
    #[default]
    Float,
    Exact,
}

/// A strategic Bayesian network. Edges are implied by parent lists.
#[derive(Clone, Debug, PartialEq)]
pub struct SbnGraph {
    pub n_players: usize,
    pub mode: ProbabilityMode,
    nodes: BTreeMap<NodeId, Node>,
}

impl SbnGraph {
    pub fn new(n_players: usize) -> Self {
        SbnGraph { n_players, mode: ProbabilityMode::Float, nodes: BTreeMap::new() }
    }

    pub fn exact(mut self) -> Self {
        self.mode = ProbabilityMode::Exact;
        self
    }

    pub fn add(&mut self, node: Node) -> Result<()> {
        if self.nodes.contains_key(&node.id) {
            return Err(SbnError::structural(format!("duplicate node id {}", node.id)));
        }
        self.nodes.insert(node.id.clone(), node);
        Ok(())
    }

    pub fn with(mut self, node: Node) -> Result<Self> {
        self.add(node)?;
        Ok(self)
    }

    pub fn node(&self, id: &NodeId) -> Option<&Node> {
        self.nodes.get(id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.values()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = &NodeId> {
        self.nodes.keys()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Strategic nodes in canonical id order.
    pub fn strategic_nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.values().filter(|n| n.is_strategic())
    }

    pub fn payoff_nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.values().filter(|n| n.is_payoff())
    }

    /// Domain sizes of a node's parents, in parent order.
    pub fn parent_sizes(&self, node: &Node) -> Result<Vec<usize>> {
        node.parents
            .iter()
            .map(|p| {
                self.nodes
                    .get(p)
                    .map(|n| n.domain.len())
                    .ok_or_else(|| SbnError::structural(format!("{}: unknown parent {p}", node.id)))
            })
            .collect()
    }

    /// Ensures the graph passes validation.
    pub fn ensure_valid(&self) -> Result<()> {
        let report = crate::validate::validate(self);
        if report.is_valid() {
            Ok(())
        } else {
            Err(SbnError::Structural(report.to_string()))
        }
    }
}
