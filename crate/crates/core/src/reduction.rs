//! Reduction of a strategic network to an extensive-form game tree.
//!
//! The tree has one tier of decision nodes per strategic node, in
//! `tier_order`. A decision node for strategic node `r` joins the
//! information set of every other `r` node whose path carries the same
//! actions by `r`'s owner; other players' actions are invisible, own actions
//! are remembered.
//!
//! Below each tier leaf the bound network is unfolded in depth order. A node
//! whose resolved CPD is a deterministic function of its parents does not
//! branch: its value is fixed by the path. Every other node becomes a chance
//! node with one branch per domain value, zero-probability branches included.
//! Payoff nodes add their value's payoff to the path; leaves hold the sums.
//!
//! Node counts follow from the structure alone. With family sizes `m_t`
//! along the tiers, decision nodes number `sum_t prod_{s<t} m_s`. For one
//! tier leaf, let `d_k` be the domain size of the `k`-th node in depth order
//! if it branches and 1 otherwise; the subtree has `sum_{k branching}
//! prod_{j<k} d_j` chance nodes and `prod_k d_k` leaves. [`predicted_counts`]
//! evaluates this recurrence independently of construction.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use serde_json::{json, Value as Json};

use crate::bind::{bind, enumerate_profiles, BoundNetwork, StrategyProfile};
use crate::error::{Result, SbnError};
use crate::format::value_to_json;
use crate::graph::{NodeId, NodeKind, PlayerId, SbnGraph};
use crate::value::Value;

/// Default cap on tree size.
pub const DEFAULT_MAX_TREE_NODES: usize = 5_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct InfoSetId(pub usize);

#[derive(Clone, Debug, PartialEq)]
pub struct ChanceBranch {
    pub value: Value,
    pub prob: f64,
    pub child: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TreeNode {
    Decision {
        player: PlayerId,
        source: NodeId,
        info_set: InfoSetId,
        /// `(action index, child)` for every member of the source's family.
        branches: Vec<(usize, usize)>,
    },
    Chance {
        source: NodeId,
        branches: Vec<ChanceBranch>,
    },
    Leaf {
        payoffs: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtensiveTree {
    pub n_players: usize,
    pub root: usize,
    pub nodes: Vec<TreeNode>,
    pub info_sets: BTreeMap<InfoSetId, Vec<usize>>,
}

/// Actions on a path from the root: `(strategic node, owner, action index)`.
pub type History = Vec<(NodeId, PlayerId, usize)>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TreeCounts {
    pub decision: usize,
    pub chance: usize,
    pub leaf: usize,
}

struct Builder<'g> {
    graph: &'g SbnGraph,
    tiers: Vec<(NodeId, PlayerId, usize)>,
    nodes: Vec<TreeNode>,
    info_keys: BTreeMap<(NodeId, Vec<(NodeId, usize)>), InfoSetId>,
    info_sets: BTreeMap<InfoSetId, Vec<usize>>,
    max_nodes: usize,
}

impl Builder<'_> {
    fn push(&mut self, node: TreeNode) -> Result<usize> {
        if self.nodes.len() >= self.max_nodes {
            return Err(SbnError::capacity(format!("tree exceeds {} nodes", self.max_nodes)));
        }
        self.nodes.push(node);
        Ok(self.nodes.len() - 1)
    }

    fn tier(&mut self, t: usize, path: &mut Vec<(NodeId, PlayerId, usize)>) -> Result<usize> {
        if t == self.tiers.len() {
            let profile = StrategyProfile { choices: path.iter().map(|(id, _, a)| (id.clone(), *a)).collect() };
            let bound = bind(self.graph, &profile)?;
            let mut assignment = Vec::with_capacity(bound.steps().len());
            let mut running = vec![0.0; self.graph.n_players];
            return self.unfold(&bound, &mut assignment, &mut running);
        }
        let (source, player, width) = self.tiers[t].clone();
        let own: Vec<(NodeId, usize)> =
            path.iter().filter(|(_, p, _)| *p == player).map(|(id, _, a)| (id.clone(), *a)).collect();
        let next_id = InfoSetId(self.info_keys.len());
        let info_set = *self.info_keys.entry((source.clone(), own)).or_insert(next_id);
        let me = self.push(TreeNode::Decision { player, source: source.clone(), info_set, branches: Vec::new() })?;
        self.info_sets.entry(info_set).or_default().push(me);
        let mut branches = Vec::with_capacity(width);
        for a in 0..width {
            path.push((source.clone(), player, a));
            let child = self.tier(t + 1, path)?;
            path.pop();
            branches.push((a, child));
        }
        if let TreeNode::Decision { branches: b, .. } = &mut self.nodes[me] {
            *b = branches;
        }
        Ok(me)
    }

    fn unfold(&mut self, bound: &BoundNetwork, assignment: &mut Vec<usize>, running: &mut Vec<f64>) -> Result<usize> {
        let steps = bound.steps();
        let k = assignment.len();
        if k == steps.len() {
            return self.push(TreeNode::Leaf { payoffs: running.clone() });
        }
        let step = &steps[k];
        let ri = step.row_index(assignment);
        let row = step.cpd.row(ri).ok_or_else(|| SbnError::internal(format!("{}: no CPD row {ri}", step.id)))?;
        let add = |running: &mut Vec<f64>, v: usize, sign: f64| {
            if let Some(t) = &step.payoff {
                for (r, x) in running.iter_mut().zip(&t.float[v]) {
                    *r += sign * x;
                }
            }
        };
        if step.cpd.is_deterministic() {
            let v = row
                .point_mass_index()
                .ok_or_else(|| SbnError::internal(format!("{}: deterministic CPD row {ri} is not a point mass", step.id)))?;
            add(running, v, 1.0);
            assignment.push(v);
            let child = self.unfold(bound, assignment, running);
            assignment.pop();
            add(running, v, -1.0);
            return child;
        }
        let me = self.push(TreeNode::Chance { source: step.id.clone(), branches: Vec::new() })?;
        let domain = &bound.graph.node(&step.id).expect("step ids come from the graph").domain;
        let mut branches = Vec::with_capacity(step.domain_len);
        for (v, &p) in row.probs().iter().enumerate() {
            add(running, v, 1.0);
            assignment.push(v);
            let child = self.unfold(bound, assignment, running)?;
            assignment.pop();
            add(running, v, -1.0);
            branches.push(ChanceBranch { value: domain.values()[v].clone(), prob: p, child });
        }
        if let TreeNode::Chance { branches: b, .. } = &mut self.nodes[me] {
            *b = branches;
        }
        Ok(me)
    }
}

fn check_tiers(graph: &SbnGraph, tier_order: &[NodeId]) -> Result<Vec<(NodeId, PlayerId, usize)>> {
    let strategic: BTreeSet<&NodeId> = graph.strategic_nodes().map(|n| &n.id).collect();
    let given: BTreeSet<&NodeId> = tier_order.iter().collect();
    if given.len() != tier_order.len() || given != strategic {
        return Err(SbnError::contract("tier order must be a permutation of the strategic nodes"));
    }
    tier_order
        .iter()
        .map(|id| match &graph.node(id).expect("checked above").kind {
            NodeKind::Strategic { owner, family } => {
                if family.is_empty() {
                    Err(SbnError::structural(format!("{id}: empty strategy family")))
                } else {
                    Ok((id.clone(), *owner, family.len()))
                }
            }
            _ => unreachable!("tier ids are strategic"),
        })
        .collect()
}

/// Canonical tier order: strategic nodes by id.
pub fn default_tier_order(graph: &SbnGraph) -> Vec<NodeId> {
    graph.strategic_nodes().map(|n| n.id.clone()).collect()
}

pub fn to_extensive_form(graph: &SbnGraph, tier_order: &[NodeId]) -> Result<ExtensiveTree> {
    to_extensive_form_capped(graph, tier_order, DEFAULT_MAX_TREE_NODES)
}

pub fn to_extensive_form_capped(graph: &SbnGraph, tier_order: &[NodeId], max_nodes: usize) -> Result<ExtensiveTree> {
    graph.ensure_valid()?;
    let tiers = check_tiers(graph, tier_order)?;
    let predicted = predicted_counts(graph, tier_order)?;
    let total = predicted.decision + predicted.chance + predicted.leaf;
    if total > max_nodes {
        return Err(SbnError::capacity(format!("tree would have {total} nodes, above the cap {max_nodes}")));
    }
    let mut b = Builder {
        graph,
        tiers,
        nodes: Vec::with_capacity(total),
        info_keys: BTreeMap::new(),
        info_sets: BTreeMap::new(),
        max_nodes,
    };
    let root = b.tier(0, &mut Vec::new())?;
    Ok(ExtensiveTree { n_players: graph.n_players, root, nodes: b.nodes, info_sets: b.info_sets })
}

/// Node counts from the closed-form recurrence, without building the tree.
pub fn predicted_counts(graph: &SbnGraph, tier_order: &[NodeId]) -> Result<TreeCounts> {
    let tiers = check_tiers(graph, tier_order)?;
    let mut counts = TreeCounts::default();
    let mut width = 1usize;
    for (_, _, m) in &tiers {
        counts.decision += width;
        width = width.saturating_mul(*m);
    }
    for profile in enumerate_profiles(graph) {
        let bound = bind(graph, &profile)?;
        let mut prefix = 1usize;
        for step in bound.steps() {
            if !step.cpd.is_deterministic() {
                counts.chance = counts.chance.saturating_add(prefix);
                prefix = prefix.saturating_mul(step.domain_len);
            }
        }
        counts.leaf = counts.leaf.saturating_add(prefix);
    }
    Ok(counts)
}

/// `1 + prod_u |D_u|` over all nodes, for comparison with the traversal counts.
pub fn product_formula(graph: &SbnGraph) -> u128 {
    1 + graph.nodes().fold(1u128, |acc, n| acc.saturating_mul(n.domain.len() as u128))
}

impl ExtensiveTree {
    pub fn counts(&self) -> TreeCounts {
        let mut c = TreeCounts::default();
        let mut stack = vec![self.root];
        while let Some(i) = stack.pop() {
            match &self.nodes[i] {
                TreeNode::Decision { branches, .. } => {
                    c.decision += 1;
                    stack.extend(branches.iter().map(|(_, ch)| *ch));
                }
                TreeNode::Chance { branches, .. } => {
                    c.chance += 1;
                    stack.extend(branches.iter().map(|b| b.child));
                }
                TreeNode::Leaf { .. } => c.leaf += 1,
            }
        }
        c
    }

    /// Every decision node with the actions taken on its path from the root.
    pub fn decision_histories(&self) -> Vec<(usize, History)> {
        let mut out = Vec::new();
        let mut stack = vec![(self.root, Vec::new())];
        while let Some((i, path)) = stack.pop() {
            if let TreeNode::Decision { player, source, branches, .. } = &self.nodes[i] {
                out.push((i, path.clone()));
                for (a, ch) in branches {
                    let mut p = path.clone();
                    p.push((source.clone(), *player, *a));
                    stack.push((*ch, p));
                }
            }
        }
        out.sort_by_key(|(i, _)| *i);
        out
    }

    pub fn to_json(&self) -> Json {
        let nodes: Vec<Json> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| match n {
                TreeNode::Decision { player, source, info_set, branches } => json!({
                    "id": i,
                    "kind": "decision",
                    "player": player.0,
                    "source": source.as_str(),
                    "info_set": info_set.0,
                    "branches": branches.iter().map(|(a, c)| json!({"action": a, "child": c})).collect::<Vec<_>>(),
                }),
                TreeNode::Chance { source, branches } => json!({
                    "id": i,
                    "kind": "chance",
                    "source": source.as_str(),
                    "branches": branches
                        .iter()
                        .map(|b| json!({"value": value_to_json(&b.value), "p": b.prob, "child": b.child}))
                        .collect::<Vec<_>>(),
                }),
                TreeNode::Leaf { payoffs } => json!({"id": i, "kind": "leaf", "payoffs": payoffs}),
            })
            .collect();
        let info_sets: serde_json::Map<String, Json> =
            self.info_sets.iter().map(|(id, members)| (id.0.to_string(), json!(members))).collect();
        json!({"players": self.n_players, "root": self.root, "nodes": nodes, "info_sets": info_sets})
    }
}

/// Expected payoffs when every decision node follows the profile's action
/// for its source strategic node.
pub fn tree_expected_payoffs(tree: &ExtensiveTree, profile: &StrategyProfile) -> Result<Vec<f64>> {
    fn walk(tree: &ExtensiveTree, i: usize, profile: &StrategyProfile) -> Result<Vec<f64>> {
        match &tree.nodes[i] {
            TreeNode::Leaf { payoffs } => Ok(payoffs.clone()),
            TreeNode::Decision { source, branches, .. } => {
                let a = profile.get(source).ok_or_else(|| SbnError::Binding {
                    node: source.clone(),
                    reason: "unbound".into(),
                })?;
                let (_, child) = branches.get(a).ok_or_else(|| SbnError::Binding {
                    node: source.clone(),
                    reason: format!("action {a} out of range for {} branches", branches.len()),
                })?;
                walk(tree, *child, profile)
            }
            TreeNode::Chance { branches, .. } => {
                let mut out = vec![0.0; tree.n_players];
                for b in branches.iter().filter(|b| b.prob != 0.0) {
                    let sub = walk(tree, b.child, profile)?;
                    for (o, s) in out.iter_mut().zip(sub) {
                        *o += b.prob * s;
                    }
                }
                Ok(out)
            }
        }
    }
    walk(tree, tree.root, profile)
}
