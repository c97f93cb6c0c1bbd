//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;

use common::{brute_force_expected, close, random_profile, random_sbn, SMALL};
use sbn::exact::f64_to_rational;
use sbn::games::{
    audit_member, best_constant_guess, builtin_b_members, gen_skew_symmetric, make_letsplay,
    make_two_player_nocount_with, FamilyMember, LengthPmf, TailPolicy, TruncatedExponential, DEFAULT_N_CAP,
};
use sbn::inference::{exact_expected_payoffs, exact_expected_payoffs_rational, mc_expected_payoffs, mc_expected_payoffs_on, DEFAULT_MAX_SUPPORT};
use sbn::reduction::{default_tier_order, to_extensive_form, tree_expected_payoffs};
use sbn::rng::rng_from_seed;
use sbn::solver::{
    epsilon_nash_check, support_enumeration_2p, symmetric_nash_skew, zero_sum_solve, MixedStrategy, NormalFormGame,
    DEFAULT_MAX_SUPPORT_SIZE,
};
use sbn::{bind, enumerate_profiles, StrategyProfile};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within(elapsed: Duration, limit_secs: u64) -> bool {
    elapsed <= Duration::from_secs(limit_secs)
}

fn reduction_fidelity() -> Outcome {
    let start = Instant::now();
    let (mut profiles, mut worst, mut oracle_worst) = (0usize, 0f64, 0f64);
    for seed in 0..50u64 {
        let g = random_sbn(seed, SMALL);
        let tree = match to_extensive_form(&g, &default_tier_order(&g)) {
            Ok(t) => t,
            Err(e) => return outcome(false, format!("network {seed}: {e}")),
        };
        for p in enumerate_profiles(&g) {
            let exact = exact_expected_payoffs(&bind(&g, &p).unwrap(), DEFAULT_MAX_SUPPORT).unwrap();
            let tree_v = tree_expected_payoffs(&tree, &p).unwrap();
            let oracle = brute_force_expected(&g, &p);
            for k in 0..exact.len() {
                worst = worst.max((exact[k] - tree_v[k]).abs());
                oracle_worst = oracle_worst.max((exact[k] - oracle[k]).abs());
            }
            profiles += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-9 && oracle_worst <= 1e-9 && within(elapsed, 10),
        format!("50 networks, {profiles} profiles, max |tree - exact| {worst:.1e}, max |exact - brute force| {oracle_worst:.1e}, {elapsed:.2?}"),
    )
}

fn skew_games() -> Vec<Vec<Vec<f64>>> {
    (0..200u64).map(|i| gen_skew_symmetric(1 + (i % 10) as usize, 2, i).unwrap().to_f64()).collect()
}

fn skew_value_zero() -> Outcome {
    let games = skew_games();
    let start = Instant::now();
    let (mut worst_value, mut worst_gap) = (0f64, 0f64);
    for a in &games {
        match zero_sum_solve(a) {
            Ok(s) => {
                worst_value = worst_value.max(s.value.abs());
                worst_gap = worst_gap.max(s.duality_gap);
            }
            Err(e) => return outcome(false, format!("solver error: {e}")),
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst_value <= 1e-7 && worst_gap <= 1e-7 && within(elapsed, 5),
        format!("200 games, max |value| {worst_value:.1e}, max duality gap {worst_gap:.1e}, {elapsed:.2?}"),
    )
}

fn self_best_response() -> Outcome {
    let (mut worst_dev, mut worst_self) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for a in skew_games() {
        let m = match symmetric_nash_skew(&a) {
            Ok(m) => m.probs,
            Err(e) => return outcome(false, format!("solver error: {e}")),
        };
        let against: Vec<f64> = a.iter().map(|r| r.iter().zip(&m).map(|(x, p)| x * p).sum()).collect();
        let best = against.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let own: f64 = m.iter().zip(&against).map(|(p, v)| p * v).sum();
        worst_dev = worst_dev.max(best);
        worst_self = worst_self.max(own);
    }
    outcome(
        worst_dev <= 1e-7 && worst_self <= 1e-9,
        format!("max pure payoff against m {worst_dev:.1e}, max m'Am {worst_self:.1e}"),
    )
}

fn letsplay_guarantee() -> Outcome {
    let decimals = 2;
    let margin = 10f64.powi(-(decimals as i32)) / 2.0;
    let start = Instant::now();
    let (mut min_all, mut min_flagged, mut flagged, mut checked) = (f64::INFINITY, f64::INFINITY, 0usize, 0usize);
    for pool_seed in 0..20u64 {
        let mut rng = rng_from_seed(pool_seed ^ 0xA5A5);
        let pool: Vec<_> = (0..5u64)
            .map(|k| gen_skew_symmetric(rng.gen_range(2..=6), decimals, pool_seed * 100 + k).unwrap())
            .collect();
        let max_n = pool.iter().map(|g| g.n).max().unwrap();
        let members = builtin_b_members(max_n);
        let bundle = match make_letsplay(&pool, &[0.2; 5], &[FamilyMember::LpNash], &members) {
            Ok(b) => b,
            Err(e) => return outcome(false, format!("pool {pool_seed}: {e}")),
        };
        for (j, member) in members.iter().enumerate() {
            let p = StrategyProfile::new().set("S_a", 0).set("S_b", j);
            let v = exact_expected_payoffs(&bind(&bundle.graph, &p).unwrap(), DEFAULT_MAX_SUPPORT).unwrap();
            let fails_br = audit_member(&pool, *member).unwrap().iter().any(|a| !a.is_best_response);
            min_all = min_all.min(v[0]);
            if fails_br {
                flagged += 1;
                min_flagged = min_flagged.min(v[0]);
            }
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        min_all >= -1e-7 && (flagged == 0 || min_flagged >= margin) && within(elapsed, 10),
        format!(
            "{checked} pool/member pairs, min E[A] {min_all:.3e}; {flagged} flagged, min flagged E[A] {min_flagged:.3e} (needs >= {margin}), {elapsed:.2?}"
        ),
    )
}

fn nocount_asymmetry() -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    for lambda in [0.5, 1.0, 2.0] {
        let t = TruncatedExponential::new(lambda, 1e-6, 16, TailPolicy::TruncateAtCap).unwrap();
        let lengths = LengthPmf::from(&t);
        let best = best_constant_guess(&lengths, None).unwrap();
        let bundle = make_two_player_nocount_with(&lengths, None).unwrap();
        let p = StrategyProfile::from_labels(&bundle.graph, [("x", format!("constant-{}", best.g_star).as_str()), ("y", "counter")]).unwrap();
        let v = exact_expected_payoffs(&bind(&bundle.graph, &p).unwrap(), DEFAULT_MAX_SUPPORT).unwrap();
        let gap = v[1] - v[0];
        pass &= gap > 0.0;
        parts.push(format!("lambda {lambda}: n_max {} gap {gap:.6}", t.n_max));
    }
    let fixture = make_two_player_nocount_with(&LengthPmf::point_mass(2).unwrap(), None).unwrap();
    let p = StrategyProfile::from_labels(&fixture.graph, [("x", "constant-1"), ("y", "counter")]).unwrap();
    let b = bind(&fixture.graph, &p).unwrap();
    let v = exact_expected_payoffs(&b, DEFAULT_MAX_SUPPORT).unwrap();
    let r = exact_expected_payoffs_rational(&b, DEFAULT_MAX_SUPPORT).unwrap();
    let quarter = BigRational::new(1.into(), 4.into());
    pass &= close(&v, &[0.25, 0.75], 1e-12) && r.expected == vec![quarter.clone(), BigRational::from_integer(3.into()) * quarter];
    parts.push(format!("fixture ({}, {})", r.expected[0], r.expected[1]));
    let elapsed = start.elapsed();
    pass &= within(elapsed, 60);
    outcome(pass, format!("{}, {elapsed:.2?}", parts.join("; ")))
}

/// Win probability of each guess by direct summation over every bit pattern.
fn brute_force_guess_table(pmf: &[f64]) -> Vec<BigRational> {
    let n_max = pmf.len();
    let mut table = vec![BigRational::zero(); n_max + 1];
    for (k, &p) in pmf.iter().enumerate() {
        let n = k + 1;
        let mut counts = vec![0u64; n + 1];
        for bits in 0u64..(1 << n) {
            counts[bits.count_ones() as usize] += 1;
        }
        let weight = f64_to_rational(p).unwrap() / BigRational::from_integer(BigInt::from(1u64 << n));
        for (g, c) in counts.iter().enumerate() {
            table[g] += &weight * BigRational::from_integer(BigInt::from(*c));
        }
    }
    table
}

fn nocount_conjecture() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for lambda in [0.5, 1.0, 2.0] {
        let t = TruncatedExponential::new(lambda, 1e-6, DEFAULT_N_CAP, TailPolicy::TruncateAtCap).unwrap();
        let best = best_constant_guess(&LengthPmf::from(&t), None).unwrap();
        let oracle = brute_force_guess_table(&t.pmf);
        let mut g_oracle = 0;
        for g in 0..oracle.len() {
            if oracle[g] > oracle[g_oracle] {
                g_oracle = g;
            }
        }
        let worst = oracle.iter().zip(&best.table).map(|(o, w)| (o.to_f64().unwrap() - w).abs()).fold(0.0, f64::max);
        pass &= best.g_star == g_oracle && best.table.len() == oracle.len() && worst <= 1e-12;
        let conjecture = (1.0 / (2.0 * lambda)).round() as usize;
        parts.push(format!(
            "lambda {lambda}: g_star {} oracle {g_oracle} max diff {worst:.1e}, round(1/(2 lambda)) = {conjecture} ({})",
            best.g_star,
            if conjecture == best.g_star { "agrees" } else { "differs" }
        ));
    }
    outcome(pass, parts.join("; "))
}

fn monte_carlo_soundness() -> Outcome {
    let n = 100_000;
    let start = Instant::now();
    let mut worst_z = 0f64;
    for seed in 0..20u64 {
        let g = random_sbn(1000 + seed, SMALL);
        let b = bind(&g, &random_profile(&g, seed)).unwrap();
        let exact = exact_expected_payoffs(&b, DEFAULT_MAX_SUPPORT).unwrap();
        let est = mc_expected_payoffs(&b, n, seed).unwrap();
        for k in 0..exact.len() {
            let diff = (est.mean[k] - exact[k]).abs();
            if est.std_error[k] == 0.0 {
                // every draw took the same value
                if diff > 1e-12 {
                    return outcome(false, format!("network {seed}: zero-variance mean off by {diff:e}"));
                }
            } else {
                worst_z = worst_z.max(diff / est.std_error[k]);
            }
        }
        let again = mc_expected_payoffs(&b, n, seed).unwrap();
        let serial = mc_expected_payoffs_on(&b, n, seed, 1).unwrap();
        let wide = mc_expected_payoffs_on(&b, n, seed, 4).unwrap();
        if again != est || serial != est || wide != est {
            return outcome(false, format!("network {seed}: estimate depends on run or worker count"));
        }
    }
    outcome(worst_z <= 5.0, format!("20 networks, n = {n}, max |error| / SE {worst_z:.2}, identical across runs and 1/4 workers, {:.2?}", start.elapsed()))
}

fn equilibrium_audit() -> Outcome {
    let rps = vec![vec![0.0, -1.0, 1.0], vec![1.0, 0.0, -1.0], vec![-1.0, 1.0, 0.0]];
    let neg: Vec<Vec<f64>> = rps.iter().map(|r| r.iter().map(|x| -x).collect()).collect();
    let game = NormalFormGame::bimatrix(&rps, &neg).unwrap();
    let res = support_enumeration_2p(&game, DEFAULT_MAX_SUPPORT_SIZE).unwrap();
    let u = MixedStrategy::uniform(3);
    let rps_ok = res.equilibria.len() == 1
        && res.equilibria[0].0.max_distance(&u) <= 1e-6
        && res.equilibria[0].1.max_distance(&u) <= 1e-6;

    let mut rng = rng_from_seed(808);
    let (mut total, mut failures, mut degenerate) = (0usize, 0usize, 0usize);
    for _ in 0..50 {
        let (m, n) = (rng.gen_range(2..=4), rng.gen_range(2..=4));
        let mut draw = || -> Vec<Vec<f64>> {
            (0..m).map(|_| (0..n).map(|_| (rng.gen_range(-100..=100) as f64) / 10.0).collect()).collect()
        };
        let (a, b) = (draw(), draw());
        let game = NormalFormGame::bimatrix(&a, &b).unwrap();
        let res = support_enumeration_2p(&game, DEFAULT_MAX_SUPPORT_SIZE).unwrap();
        degenerate += res.degenerate_skipped;
        for (x, y) in &res.equilibria {
            total += 1;
            if !epsilon_nash_check(&game, &[x.clone(), y.clone()], 1e-6).unwrap().is_nash {
                failures += 1;
            }
        }
    }
    outcome(
        rps_ok && failures == 0,
        format!(
            "RPS: {} equilibrium, uniform {}; random: {total} equilibria from 50 games, {failures} failed the 1e-6 check, {degenerate} singular supports skipped",
            res.equilibria.len(),
            if rps_ok { "yes" } else { "no" }
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("reduction fidelity", reduction_fidelity),
        ("skew-symmetric value zero", skew_value_zero),
        ("equilibrium is a best response to itself", self_best_response),
        ("LetsPlay guarantee", letsplay_guarantee),
        ("TwoPlayerNoCount asymmetry", nocount_asymmetry),
        ("NoCount constant guess vs brute force", nocount_conjecture),
        ("Monte Carlo soundness", monte_carlo_soundness),
        ("equilibrium audit", equilibrium_audit),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!("criterion {} {name}: {} ({})", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} of {} passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
