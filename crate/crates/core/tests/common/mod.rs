#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use rust_decimal::prelude::ToPrimitive;
use rust_decimal::Decimal;

use sbn::cpd::{Cpd, ProbRow};
use sbn::rng::rng_from_seed;
use sbn::{Domain, Node, NodeId, NodeKind, PlayerId, SbnGraph, StrategyFamily, StrategyProfile, Value};

/// Bounds for random networks.
#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub max_strategic: usize,
    pub max_family: usize,
    pub max_chance: usize,
    pub max_domain: usize,
}

pub const SMALL: Shape = Shape { max_strategic: 3, max_family: 3, max_chance: 3, max_domain: 3 };

fn random_row<R: Rng>(rng: &mut R, len: usize, deterministic: bool) -> ProbRow {
    if deterministic || len == 1 {
        return ProbRow::point_mass(len, rng.gen_range(0..len));
    }
    let mut w: Vec<f64> = (0..len).map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.05..1.0) }).collect();
    if w.iter().all(|&x| x == 0.0) {
        w[0] = 1.0;
    }
    let s: f64 = w.iter().sum();
    let mut p: Vec<f64> = w.iter().map(|x| x / s).collect();
    let big = (0..len).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap();
    let rest: f64 = p.iter().enumerate().filter(|(i, _)| *i != big).map(|(_, x)| x).sum();
    p[big] = 1.0 - rest;
    ProbRow::new(p)
}

fn random_cpd<R: Rng>(rng: &mut R, parents: &[NodeId], sizes: &[usize], len: usize, deterministic: bool) -> Cpd {
    Cpd::from_fn(parents.to_vec(), sizes, |_| random_row(rng, len, deterministic))
}

fn pick_parents<R: Rng>(rng: &mut R, earlier: &[(NodeId, usize)], max: usize) -> (Vec<NodeId>, Vec<usize>) {
    let k = rng.gen_range(0..=max.min(earlier.len()));
    let mut chosen: Vec<&(NodeId, usize)> = earlier.choose_multiple(rng, k).collect();
    chosen.shuffle(rng);
    (chosen.iter().map(|(id, _)| id.clone()).collect(), chosen.iter().map(|(_, s)| *s).collect())
}

fn payoff_value<R: Rng>(rng: &mut R, arity: usize) -> Value {
    Value::payoff((0..arity).map(|_| Decimal::new(rng.gen_range(-500..=500), 2)))
}

fn payoff_domain<R: Rng>(rng: &mut R, arity: usize, len: usize) -> Domain {
    let mut values: Vec<Value> = Vec::new();
    while values.len() < len {
        let v = payoff_value(rng, arity);
        if !values.contains(&v) {
            values.push(v);
        }
    }
    Domain::new(values).unwrap()
}

/// A valid random network. Node ids are shuffled so id order and
/// dependency order disagree.
pub fn random_sbn(seed: u64, shape: Shape) -> SbnGraph {
    let mut rng = rng_from_seed(seed);
    let n_players = rng.gen_range(1..=2);
    let n_strategic = rng.gen_range(1..=shape.max_strategic);
    let n_chance = rng.gen_range(0..=shape.max_chance);
    let mut kinds: Vec<bool> = std::iter::repeat(true).take(n_strategic).chain(std::iter::repeat(false).take(n_chance)).collect();
    kinds.shuffle(&mut rng);
    let mut names: Vec<String> = (0..kinds.len()).map(|i| format!("n{i}")).collect();
    names.shuffle(&mut rng);

    let mut graph = SbnGraph::new(n_players);
    let mut earlier: Vec<(NodeId, usize)> = Vec::new();
    for (name, strategic) in names.iter().zip(kinds) {
        let len = rng.gen_range(1..=shape.max_domain);
        let domain = Domain::int_range(0, len as i64 - 1).unwrap();
        let (parents, sizes) = pick_parents(&mut rng, &earlier, 2);
        let node = if strategic {
            let m = rng.gen_range(1..=shape.max_family);
            let det = rng.gen_bool(0.5);
            let mut family = StrategyFamily::new(format!("F{name}"));
            if det {
                family = family.deterministic();
            }
            for s in 0..m {
                let d = det || rng.gen_bool(0.3);
                family = family.with(format!("s{s}"), random_cpd(&mut rng, &parents, &sizes, len, d));
            }
            Node::strategic(name.as_str(), domain, parents, PlayerId(rng.gen_range(0..n_players)), family)
        } else {
            let d = rng.gen_bool(0.3);
            Node::chance(name.as_str(), domain, random_cpd(&mut rng, &parents, &sizes, len, d))
        };
        graph.add(node).unwrap();
        earlier.push((NodeId::new(name.as_str()), len));
    }

    if n_players == 2 && rng.gen_bool(0.3) {
        for p in 0..2 {
            let len = rng.gen_range(1..=shape.max_domain);
            let mut ints: Vec<i64> = (-5..=5).collect();
            ints.shuffle(&mut rng);
            let domain = Domain::new(ints[..len].iter().map(|&v| Value::Int(v)).collect()).unwrap();
            let (parents, sizes) = pick_parents(&mut rng, &earlier, 3);
            let d = rng.gen_bool(0.5);
            let cpd = random_cpd(&mut rng, &parents, &sizes, len, d);
            graph.add(Node::payoff(format!("u{p}"), Some(PlayerId(p)), domain, cpd)).unwrap();
        }
    } else {
        let len = rng.gen_range(1..=shape.max_domain);
        let domain = payoff_domain(&mut rng, n_players, len);
        let (parents, sizes) = pick_parents(&mut rng, &earlier, 3);
        let d = rng.gen_bool(0.5);
        let cpd = random_cpd(&mut rng, &parents, &sizes, len, d);
        graph.add(Node::payoff("pi", None, domain, cpd)).unwrap();
    }
    graph.ensure_valid().unwrap();
    graph
}

/// One random complete profile.
pub fn random_profile(graph: &SbnGraph, seed: u64) -> StrategyProfile {
    let mut rng = rng_from_seed(seed);
    let mut p = StrategyProfile::new();
    for n in graph.strategic_nodes() {
        let m = n.family().unwrap().len();
        p = p.set(n.id.clone(), rng.gen_range(0..m));
    }
    p
}

fn dec(x: &Decimal) -> f64 {
    x.to_f64().unwrap()
}

/// Per-player payoff carried by one value of a payoff node.
fn payoff_of(node: &Node, v: &Value, n_players: usize) -> Vec<f64> {
    let mut out = vec![0.0; n_players];
    let NodeKind::Payoff { owner, .. } = &node.kind else { return out };
    match owner {
        None => {
            for (o, x) in out.iter_mut().zip(v.as_payoff().unwrap()) {
                *o = dec(x);
            }
        }
        Some(p) => {
            out[p.0] = match v {
                Value::Int(i) => *i as f64,
                Value::Payoff(x) => dec(&x[0]),
                Value::Symbol(_) => panic!("symbolic payoff"),
            }
        }
    }
    out
}

/// Expected payoffs by summing over the full cartesian product of domains,
/// walking nodes in an order found by repeated scanning.
pub fn brute_force_expected(graph: &SbnGraph, profile: &StrategyProfile) -> Vec<f64> {
    let mut order: Vec<&Node> = Vec::new();
    let mut placed: Vec<NodeId> = Vec::new();
    while order.len() < graph.len() {
        for n in graph.nodes() {
            if !placed.contains(&n.id) && n.parents.iter().all(|p| placed.contains(p)) {
                order.push(n);
                placed.push(n.id.clone());
            }
        }
    }
    let cpds: Vec<&Cpd> = order
        .iter()
        .map(|n| match &n.kind {
            NodeKind::Chance { cpd } | NodeKind::Payoff { cpd, .. } => cpd,
            NodeKind::Strategic { family, .. } => &family.strategies[profile.get(&n.id).unwrap()].cpd,
        })
        .collect();
    let sizes: Vec<usize> = order.iter().map(|n| n.domain.len()).collect();
    let pos = |id: &NodeId| placed.iter().position(|p| p == id).unwrap();
    let parent_pos: Vec<Vec<usize>> = order.iter().map(|n| n.parents.iter().map(pos).collect()).collect();

    let mut total = vec![0.0; graph.n_players];
    let count: usize = sizes.iter().product();
    let mut x = vec![0usize; sizes.len()];
    for mut code in 0..count {
        for k in (0..sizes.len()).rev() {
            x[k] = code % sizes[k];
            code /= sizes[k];
        }
        let mut prob = 1.0;
        for k in 0..sizes.len() {
            let mut row = 0;
            for &pp in &parent_pos[k] {
                row = row * sizes[pp] + x[pp];
            }
            prob *= cpds[k].row(row).unwrap().probs()[x[k]];
            if prob == 0.0 {
                break;
            }
        }
        if prob == 0.0 {
            continue;
        }
        for (k, n) in order.iter().enumerate() {
            if n.is_payoff() {
                let u = payoff_of(n, &n.domain.values()[x[k]], graph.n_players);
                for (t, v) in total.iter_mut().zip(u) {
                    *t += prob * v;
                }
            }
        }
    }
    total
}

pub fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}
