use num_rational::BigRational;
use sbn::games::{
    audit_member, best_constant_guess, builtin_b_members, gen_skew_symmetric, make_letsplay, make_nocount,
    make_two_player_nocount, make_two_player_nocount_with, FamilyMember, LengthPmf, SkewSymmetricGame, TailPolicy,
};
use sbn::inference::{exact_expected_payoffs, for_each_outcome, exact_expected_payoffs_rational, DEFAULT_MAX_SUPPORT};
use sbn::solver::induced_normal_form;
use sbn::{bind, enumerate_profiles, topological_order, NodeId, SbnError, StrategyProfile};

fn rps() -> SkewSymmetricGame {
    SkewSymmetricGame::from_f64(&[vec![0.0, -1.0, 1.0], vec![1.0, 0.0, -1.0], vec![-1.0, 1.0, 0.0]], 0).unwrap()
}

fn r(p: i64, q: i64) -> BigRational {
    BigRational::new(p.into(), q.into())
}

#[test]
fn fixture_counter_beats_constant_exactly() {
    let bundle = make_two_player_nocount_with(&LengthPmf::point_mass(2).unwrap(), None).unwrap();
    let g = &bundle.graph;
    let p = StrategyProfile::from_labels(g, [("x", "constant-1"), ("y", "counter")]).unwrap();
    let e = exact_expected_payoffs_rational(&bind(g, &p).unwrap(), DEFAULT_MAX_SUPPORT).unwrap();
    assert_eq!(e.expected, vec![r(1, 4), r(3, 4)]);
    assert_eq!(e.total_probability, r(1, 1));
}

#[test]
fn induced_bimatrix_of_fixture() {
    let bundle = make_two_player_nocount_with(&LengthPmf::point_mass(2).unwrap(), None).unwrap();
    let game = induced_normal_form(&bundle.graph, DEFAULT_MAX_SUPPORT).unwrap();
    assert_eq!(game.sizes(), vec![3, 4]);
    assert_eq!(game.payoff(&[1, 3]), &[0.25, 0.75]);
    // Both guess 1: correct half the time, prize split.
    assert_eq!(game.payoff(&[1, 1]), &[0.25, 0.25]);
}

#[test]
fn counter_profile_payoffs_follow_constant_guess() {
    for lambda in [1.0, 2.0] {
        let bundle = make_two_player_nocount(lambda, 1e-6, None, TailPolicy::Strict).unwrap();
        let g = &bundle.graph;
        let n_max: usize = bundle.notes["n_max"].parse().unwrap();
        let t = sbn::games::TruncatedExponential::new(lambda, 1e-6, 20, TailPolicy::Strict).unwrap();
        assert_eq!(t.n_max, n_max);
        let best = best_constant_guess(&LengthPmf::from(&t), None).unwrap();
        let p = StrategyProfile::new().set("x", best.g_star).set("y", n_max + 1);
        let got = exact_expected_payoffs(&bind(g, &p).unwrap(), DEFAULT_MAX_SUPPORT).unwrap();
        assert!((got[0] - 0.5 * best.win_prob).abs() <= 1e-12);
        assert!((got[1] - (1.0 - 0.5 * best.win_prob)).abs() <= 1e-12);
    }
}

#[test]
fn two_player_payoffs_are_conserved() {
    let bundle = make_two_player_nocount_with(&LengthPmf::point_mass(3).unwrap(), None).unwrap();
    let g = &bundle.graph;
    let popcount = |s: &str| s.bytes().filter(|&b| b == b'1').count() as i64;
    for p in enumerate_profiles(g) {
        let b = bind(g, &p).unwrap();
        let pos = |id: &str| b.order().position(|n| n.as_str() == id).unwrap();
        let (bi, xi, yi) = (pos("b"), pos("x"), pos("y"));
        let strings = &g.node(&NodeId::new("b")).unwrap().domain;
        for_each_outcome(&b, DEFAULT_MAX_SUPPORT, |a, _, payoffs| {
            let ones = popcount(strings.values()[a[bi]].as_symbol().unwrap());
            let (x, y) = (a[xi] as i64, a[yi] as i64);
            let sum = payoffs[0] + payoffs[1];
            assert!(sum <= 1.0);
            assert_eq!(sum == 1.0, x == ones || y == ones);
        })
        .unwrap();
    }
}

#[test]
fn nocount_order_and_normalization() {
    let bundle = make_nocount(1.0, 1e-6, None, TailPolicy::Strict).unwrap();
    let order: Vec<String> = topological_order(&bundle.graph).unwrap().iter().map(|n| n.to_string()).collect();
    assert_eq!(order, ["a", "b", "x", "pi"]);
    let t = sbn::games::TruncatedExponential::new(1.0, 1e-6, 20, TailPolicy::Strict).unwrap();
    assert_eq!(t.n_max, 14);
    let best = best_constant_guess(&LengthPmf::from(&t), None).unwrap();
    assert!((best.table.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    assert!(matches!(make_nocount(0.0, 1e-6, None, TailPolicy::Strict), Err(SbnError::Contract(m)) if m == "lambda must be positive"));
    assert!(matches!(make_nocount(0.1, 1e-6, None, TailPolicy::Strict), Err(SbnError::Capacity(_))));
}

#[test]
fn rps_uniform_is_fair() {
    let bundle = make_letsplay(&[rps()], &[1.0], &[FamilyMember::LpNash], &[FamilyMember::Uniform]).unwrap();
    let p = StrategyProfile::new().set("S_a", 0).set("S_b", 0);
    let v = exact_expected_payoffs(&bind(&bundle.graph, &p).unwrap(), DEFAULT_MAX_SUPPORT).unwrap();
    assert!(v[0].abs() <= 1e-9 && v[1].abs() <= 1e-9);
}

#[test]
fn dominated_opponent_loses() {
    let g = SkewSymmetricGame::from_f64(&[vec![0.0, 1.0], vec![-1.0, 0.0]], 0).unwrap();
    let bundle = make_letsplay(&[g.clone()], &[1.0], &[FamilyMember::LpNash], &[FamilyMember::Pure(1)]).unwrap();
    let p = StrategyProfile::new().set("S_a", 0).set("S_b", 0);
    let v = exact_expected_payoffs(&bind(&bundle.graph, &p).unwrap(), DEFAULT_MAX_SUPPORT).unwrap();
    assert!((v[0] - 1.0).abs() <= 1e-12 && (v[1] + 1.0).abs() <= 1e-12);
    let audit = audit_member(&[g], FamilyMember::Pure(1)).unwrap();
    assert!(!audit[0].is_best_response);
}

#[test]
fn mixed_pool_with_flagged_subgame_favours_a() {
    let dominated = SkewSymmetricGame::from_f64(&[vec![0.0, 1.0], vec![-1.0, 0.0]], 0).unwrap();
    let pool = vec![rps(), dominated];
    let bundle = make_letsplay(&pool, &[0.5, 0.5], &[FamilyMember::LpNash], &[FamilyMember::Pure(1)]).unwrap();
    let p = StrategyProfile::new().set("S_a", 0).set("S_b", 0);
    let v = exact_expected_payoffs(&bind(&bundle.graph, &p).unwrap(), DEFAULT_MAX_SUPPORT).unwrap();
    assert!(v[0] > 0.0);
}

#[test]
fn letsplay_outcomes_are_zero_sum() {
    let pool: Vec<_> = (0..4).map(|s| gen_skew_symmetric(2 + s as usize, 2, s).unwrap()).collect();
    let members = builtin_b_members(5);
    let bundle = make_letsplay(&pool, &[0.25; 4], &[FamilyMember::LpNash, FamilyMember::Uniform], &members).unwrap();
    for p in enumerate_profiles(&bundle.graph) {
        let b = bind(&bundle.graph, &p).unwrap();
        for_each_outcome(&b, DEFAULT_MAX_SUPPORT, |_, _, payoffs| assert_eq!(payoffs[0] + payoffs[1], 0.0)).unwrap();
    }
}

#[test]
fn smaller_subgames_get_no_mass_beyond_their_size() {
    let pool = vec![gen_skew_symmetric(2, 1, 3).unwrap(), gen_skew_symmetric(4, 1, 4).unwrap()];
    let bundle = make_letsplay(&pool, &[0.5, 0.5], &[FamilyMember::LpNash], &[FamilyMember::Pure(3)]).unwrap();
    for node in ["S_a", "S_b"] {
        let family = bundle.graph.node(&NodeId::new(node)).unwrap().family().unwrap();
        for s in &family.strategies {
            let row = s.cpd.row(0).unwrap().probs();
            assert!(row[2..].iter().all(|&p| p == 0.0));
        }
    }
}
