use std::fmt;
use std::path::{Path, PathBuf};

use clap::Args;
use serde_json::json;

use sbn::format::{parse_graph, write_graph};
use sbn::games::{
    audit_member, best_constant_guess, builtin_b_members, gen_skew_symmetric, make_letsplay, make_nocount_with,
    make_two_player_nocount_with, FamilyMember, GameBundle, LengthPmf, SkewSymmetricGame, TailPolicy,
    TruncatedExponential,
};
use sbn::inference::{exact_expected_payoffs, mc_expected_payoffs, PayoffEstimate, DEFAULT_MAX_SUPPORT};
use sbn::reduction::{default_tier_order, predicted_counts, product_formula, to_extensive_form_capped, DEFAULT_MAX_TREE_NODES};
use sbn::rng::{mix, splitmix64};
use sbn::solver::{best_response, induced_normal_form, parse_matrix, zero_sum_solve, MixedStrategy, NormalFormGame};
use sbn::{bind, NodeId, SbnError, SbnGraph, StrategyProfile};

use crate::output::{emit, Cell, Format, Meta, Report};

pub const MAX_SUPPORT_ENV: &str = "SBN_MAX_SUPPORT";

#[derive(Debug)]
pub enum CliError {
    Sbn(SbnError),
    Io(PathBuf, std::io::Error),
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Sbn(SbnError::Capacity(_)) => 3,
            CliError::Sbn(SbnError::Internal(_)) => 4,
            CliError::Sbn(_) | CliError::Io(..) | CliError::Usage(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Sbn(e) => write!(f, "{e}"),
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            CliError::Usage(m) => f.write_str(m),
        }
    }
}

impl From<SbnError> for CliError {
    fn from(e: SbnError) -> Self {
        CliError::Sbn(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(path.to_path_buf(), e)
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(io_err(path))
}

/// Enumeration cap, from the environment when set.
pub fn max_support() -> CliResult<usize> {
    match std::env::var(MAX_SUPPORT_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Usage(format!("{MAX_SUPPORT_ENV} must be a positive integer, got {v:?}"))),
        Err(_) => Ok(DEFAULT_MAX_SUPPORT),
    }
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

impl OutputArgs {
    fn write(&self, report: &Report) -> CliResult<()> {
        let bytes = report.render(self.format).map_err(|e| CliError::Io(PathBuf::from("<output>"), e))?;
        let path = self.out.as_deref();
        emit(&bytes, path).map_err(|e| CliError::Io(path.map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf), e))
    }
}

#[derive(Args, Debug, Clone)]
pub struct EvalArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Exact enumeration only.
    #[arg(long, conflicts_with = "mc")]
    pub exact: bool,
    /// Also estimate by Monte Carlo with this many samples.
    #[arg(long, value_name = "N")]
    pub mc: Option<usize>,
}

impl EvalArgs {
    fn mc_samples(&self, default: Option<usize>) -> Option<usize> {
        if self.exact {
            None
        } else {
            self.mc.or(default)
        }
    }

    fn require_seed(&self, why: &str) -> CliResult<u64> {
        self.seed.ok_or_else(|| CliError::Usage(format!("--seed is required {why}")))
    }
}

#[derive(Args, Debug, Clone)]
pub struct LengthArgs {
    /// Rate of the exponential string-length distribution.
    #[arg(long, required_unless_present = "point_mass", allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Tail mass allowed beyond the longest string.
    #[arg(long, default_value_t = 1e-6)]
    pub tail_tol: f64,
    /// Longest string length allowed.
    #[arg(long, default_value_t = sbn::games::DEFAULT_N_CAP)]
    pub n_cap: usize,
    /// Truncate at --n-cap instead of failing when the tail tolerance needs longer strings.
    #[arg(long)]
    pub truncate: bool,
    /// Fix the string length instead of drawing it.
    #[arg(long, conflicts_with = "lambda", value_name = "N")]
    pub point_mass: Option<usize>,
    /// Largest guess; defaults to the longest string length.
    #[arg(long)]
    pub g_max: Option<usize>,
}

impl LengthArgs {
    fn lengths(&self) -> CliResult<LengthPmf> {
        if let Some(n) = self.point_mass {
            return Ok(LengthPmf::point_mass(n)?);
        }
        let lambda = self.lambda.expect("clap requires lambda without point mass");
        let policy = if self.truncate { TailPolicy::TruncateAtCap } else { TailPolicy::Strict };
        let t = TruncatedExponential::new(lambda, self.tail_tol, self.n_cap, policy)?;
        Ok(LengthPmf::from(&t))
    }

    fn config(&self) -> serde_json::Value {
        json!({
            "lambda": self.lambda,
            "tail_tol": self.tail_tol,
            "n_cap": self.n_cap,
            "truncate": self.truncate,
            "point_mass": self.point_mass,
            "g_max": self.g_max,
        })
    }
}

fn emit_sbn(graph: &SbnGraph, path: Option<&Path>) -> CliResult<()> {
    if let Some(p) = path {
        let mut text = write_graph(graph)?;
        text.push('\n');
        std::fs::write(p, text).map_err(io_err(p))?;
    }
    Ok(())
}

fn notes(bundle: &GameBundle) -> Vec<(String, String)> {
    bundle.notes.iter().map(|(k, v)| (k.clone(), v.clone())).collect()
}

#[derive(Args, Debug)]
pub struct NocountArgs {
    #[command(flatten)]
    pub lengths: LengthArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Also write the constructed network as JSON.
    #[arg(long)]
    pub emit_sbn: Option<PathBuf>,
}

pub fn nocount(args: &NocountArgs) -> CliResult<()> {
    let lengths = args.lengths.lengths()?;
    let bundle = make_nocount_with(&lengths, args.lengths.g_max)?;
    emit_sbn(&bundle.graph, args.emit_sbn.as_deref())?;
    let best = best_constant_guess(&lengths, args.lengths.g_max)?;

    let meta = Meta { command: "nocount", config: args.lengths.config(), seed: None };
    let mut report = Report::new(meta, vec!["g", "win_prob"]);
    report.notes = notes(&bundle);
    for (g, w) in best.table.iter().enumerate() {
        report.row(vec![g.into(), (*w).into()]);
    }
    report.row(vec!["g_star".into(), best.g_star.into()]);
    let conjecture = args.lengths.lambda.map(|l| (1.0 / (2.0 * l)).round() as i64);
    report.row(vec!["round_1_over_2lambda".into(), conjecture.into()]);
    report.row(vec!["n_max".into(), lengths.n_max().into()]);
    report.row(vec!["tail_mass".into(), lengths.tail_mass.into()]);
    args.output.write(&report)
}

#[derive(Args, Debug)]
pub struct AsymmetryArgs {
    #[command(flatten)]
    pub lengths: LengthArgs,
    #[command(flatten)]
    pub eval: EvalArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long)]
    pub emit_sbn: Option<PathBuf>,
}

fn family_labels(graph: &SbnGraph, id: &str) -> Vec<String> {
    let node = graph.node(&NodeId::new(id)).expect("game nodes exist");
    node.family().expect("strategic node").strategies.iter().map(|s| s.label.clone()).collect()
}

fn pure_pair(game: &NormalFormGame, x: usize, y: usize) -> [MixedStrategy; 2] {
    let sizes = game.sizes();
    [MixedStrategy::pure(sizes[0], x), MixedStrategy::pure(sizes[1], y)]
}

/// The leader's best pure strategy when the follower best-responds, lowest
/// index on ties throughout.
fn leader_outcome(game: &NormalFormGame, leader: usize) -> CliResult<(usize, usize)> {
    let sizes = game.sizes();
    let follower = 1 - leader;
    let mut best: Option<((usize, usize), f64)> = None;
    for l in 0..sizes[leader] {
        let probe = if leader == 0 { pure_pair(game, l, 0) } else { pure_pair(game, 0, l) };
        let f = best_response(game, follower, &probe)?.indices[0];
        let joint = if leader == 0 { (l, f) } else { (f, l) };
        let u = game.payoff(&[joint.0, joint.1])[leader];
        if best.map_or(true, |(_, b)| u > b) {
            best = Some((joint, u));
        }
    }
    Ok(best.expect("at least one strategy").0)
}

pub fn asymmetry(args: &AsymmetryArgs) -> CliResult<()> {
    let max_support = max_support()?;
    let lengths = args.lengths.lengths()?;
    let bundle = make_two_player_nocount_with(&lengths, args.lengths.g_max)?;
    emit_sbn(&bundle.graph, args.emit_sbn.as_deref())?;
    let graph = &bundle.graph;
    let best = best_constant_guess(&lengths, args.lengths.g_max)?;
    let game = induced_normal_form(graph, max_support)?;
    let x_labels = family_labels(graph, "x");
    let y_labels = family_labels(graph, "y");
    let counter = y_labels.iter().position(|l| l == "counter").expect("y family has the counter");

    let x_br = best_response(&game, 0, &pure_pair(&game, 0, counter))?.indices[0];
    let y_br = best_response(&game, 1, &pure_pair(&game, best.g_star, 0))?.indices[0];
    let named = [
        ("reference", (best.g_star, counter)),
        ("x_best_response_to_counter", (x_br, counter)),
        ("y_best_response_to_g_star", (best.g_star, y_br)),
        ("x_leads", leader_outcome(&game, 0)?),
        ("y_leads", leader_outcome(&game, 1)?),
    ];

    let mc_samples = args.eval.mc_samples(None);
    let seed = match mc_samples {
        Some(_) => Some(args.eval.require_seed("with --mc")?),
        None => args.eval.seed,
    };
    let mut config = args.lengths.config();
    config["mc"] = json!(mc_samples);
    config["max_support"] = json!(max_support);
    let meta = Meta { command: "asymmetry", config, seed };
    let mut report = Report::new(meta, vec!["metric", "x", "y", "u_x", "u_y", "gap", "se_x", "se_y"]);
    report.notes = notes(&bundle);
    for (name, (x, y)) in named {
        let u = game.payoff(&[x, y]);
        report.row(vec![
            name.into(),
            x_labels[x].clone().into(),
            y_labels[y].clone().into(),
            u[0].into(),
            u[1].into(),
            (u[1] - u[0]).into(),
            Cell::Empty,
            Cell::Empty,
        ]);
    }
    if let (Some(n), Some(seed)) = (mc_samples, seed) {
        let profile = StrategyProfile::new().set("x", best.g_star).set("y", counter);
        let est = mc_expected_payoffs(&bind(graph, &profile)?, n, seed)?;
        report.row(vec![
            "reference_mc".into(),
            x_labels[best.g_star].clone().into(),
            y_labels[counter].clone().into(),
            est.mean[0].into(),
            est.mean[1].into(),
            (est.mean[1] - est.mean[0]).into(),
            est.std_error[0].into(),
            est.std_error[1].into(),
        ]);
    }
    report.extra.insert(
        "bimatrix".into(),
        json!({"x": x_labels, "y": y_labels, "u_x": game.matrix(0), "u_y": game.matrix(1)}),
    );
    report.extra.insert("constant_guess".into(), json!(best));
    args.output.write(&report)
}

#[derive(Args, Debug)]
pub struct LetsplayArgs {
    /// Number of generated subgames.
    #[arg(long, default_value_t = 5)]
    pub pool_size: usize,
    #[arg(long, default_value_t = 2)]
    pub n_min: usize,
    #[arg(long, default_value_t = 6)]
    pub n_max: usize,
    /// Decimal places of generated and loaded matrix entries.
    #[arg(long, default_value_t = 2)]
    pub decimals: u32,
    /// JSON file with a list of skew-symmetric matrices, used instead of a generated pool.
    #[arg(long)]
    pub pool: Option<PathBuf>,
    /// Comma-separated B family; all builtins except lp-nash by default.
    #[arg(long, value_delimiter = ',')]
    pub b_members: Option<Vec<String>>,
    #[command(flatten)]
    pub eval: EvalArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long)]
    pub emit_sbn: Option<PathBuf>,
}

pub const LETSPLAY_DEFAULT_MC: usize = 10_000;

fn load_pool(path: &Path, decimals: u32) -> CliResult<Vec<SkewSymmetricGame>> {
    let text = read(path)?;
    let matrices: Vec<Vec<Vec<f64>>> =
        serde_json::from_str(&text).map_err(|e| SbnError::Parse(format!("{}: {e}", path.display())))?;
    if matrices.is_empty() {
        return Err(SbnError::contract("pool file lists no matrices").into());
    }
    Ok(matrices.iter().map(|m| SkewSymmetricGame::from_f64(m, decimals)).collect::<sbn::Result<_>>()?)
}

fn generate_pool(args: &LetsplayArgs, seed: u64) -> CliResult<Vec<SkewSymmetricGame>> {
    if args.pool_size == 0 || args.n_min == 0 || args.n_min > args.n_max {
        return Err(CliError::Usage("need --pool-size >= 1 and 1 <= --n-min <= --n-max".into()));
    }
    let span = (args.n_max - args.n_min + 1) as u64;
    (0..args.pool_size as u64)
        .map(|k| {
            let n = args.n_min + (splitmix64(mix(seed, k)) % span) as usize;
            Ok(gen_skew_symmetric(n, args.decimals, mix(seed, k))?)
        })
        .collect()
}

fn within_5se(exact: f64, est: &PayoffEstimate, k: usize) -> bool {
    (est.mean[k] - exact).abs() <= 5.0 * est.std_error[k] + 1e-12
}

pub fn letsplay(args: &LetsplayArgs) -> CliResult<()> {
    let max_support = max_support()?;
    let mc_samples = args.eval.mc_samples(Some(LETSPLAY_DEFAULT_MC));
    let seed = if args.pool.is_none() || mc_samples.is_some() {
        Some(args.eval.require_seed("to generate a pool or run Monte Carlo")?)
    } else {
        args.eval.seed
    };
    let pool = match &args.pool {
        Some(p) => load_pool(p, args.decimals)?,
        None => generate_pool(args, seed.expect("seed checked above"))?,
    };
    let max_n = pool.iter().map(|g| g.n).max().unwrap_or(1);
    let members: Vec<FamilyMember> = match &args.b_members {
        Some(names) => names.iter().map(|s| s.trim().parse()).collect::<sbn::Result<_>>()?,
        None => builtin_b_members(max_n),
    };
    let weights = vec![1.0 / pool.len() as f64; pool.len()];
    let bundle = make_letsplay(&pool, &weights, &[FamilyMember::LpNash], &members)?;
    emit_sbn(&bundle.graph, args.emit_sbn.as_deref())?;

    let config = json!({
        "pool_size": pool.len(),
        "n_min": args.n_min,
        "n_max": args.n_max,
        "decimals": args.decimals,
        "pool": args.pool.as_ref().map(|p| p.display().to_string()),
        "b_members": members.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "mc": mc_samples,
        "max_support": max_support,
    });
    let meta = Meta { command: "letsplay", config, seed };
    let mut report = Report::new(
        meta,
        vec!["b_member", "exact_a", "exact_b", "mc_a", "mc_a_se", "mc_b", "mc_b_se", "mc_within_5se", "flagged_subgames"],
    );
    report.notes = notes(&bundle);
    for (j, member) in members.iter().enumerate() {
        let profile = StrategyProfile::new().set("S_a", 0).set("S_b", j);
        let bound = bind(&bundle.graph, &profile)?;
        let exact = exact_expected_payoffs(&bound, max_support)?;
        let flagged: Vec<String> = audit_member(&pool, *member)?
            .iter()
            .filter(|a| !a.is_best_response)
            .map(|a| a.subgame.to_string())
            .collect();
        let mut row: Vec<Cell> = vec![member.to_string().into(), exact[0].into(), exact[1].into()];
        match (mc_samples, seed) {
            (Some(n), Some(seed)) => {
                let est = mc_expected_payoffs(&bound, n, seed)?;
                let ok = within_5se(exact[0], &est, 0) && within_5se(exact[1], &est, 1);
                row.extend([
                    est.mean[0].into(),
                    est.std_error[0].into(),
                    est.mean[1].into(),
                    est.std_error[1].into(),
                    (if ok { "yes" } else { "no" }).into(),
                ]);
            }
            _ => row.extend([Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty]),
        }
        row.push(flagged.join(";").into());
        report.row(row);
    }
    let matrices: Vec<Vec<Vec<String>>> =
        pool.iter().map(|g| g.matrix.iter().map(|r| r.iter().map(ToString::to_string).collect()).collect()).collect();
    report.extra.insert("pool".into(), json!({"weights": weights, "matrices": matrices}));
    args.output.write(&report)
}

#[derive(Args, Debug)]
pub struct ReduceArgs {
    /// Network JSON file.
    pub sbn_file: PathBuf,
    /// Tree JSON output; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated strategic node ids; id order by default.
    #[arg(long, value_delimiter = ',')]
    pub tier_order: Option<Vec<String>>,
    #[arg(long, default_value_t = DEFAULT_MAX_TREE_NODES)]
    pub max_nodes: usize,
}

pub fn reduce(args: &ReduceArgs) -> CliResult<()> {
    let text = read(&args.sbn_file)?;
    let graph = parse_graph(&text).map_err(|e| match e {
        SbnError::Parse(m) => SbnError::Parse(format!("{}: {m}", args.sbn_file.display())),
        other => other,
    })?;
    graph.ensure_valid()?;
    let order: Vec<NodeId> = match &args.tier_order {
        Some(ids) => ids.iter().map(|s| NodeId::new(s.trim())).collect(),
        None => default_tier_order(&graph),
    };
    let tree = to_extensive_form_capped(&graph, &order, args.max_nodes)?;
    let counts = tree.counts();
    let predicted = predicted_counts(&graph, &order)?;
    if counts != predicted {
        return Err(SbnError::internal(format!("tree counts {counts:?} differ from the recurrence {predicted:?}")).into());
    }
    let formula = product_formula(&graph);
    let meta = Meta {
        command: "reduce",
        config: json!({
            "sbn_file": args.sbn_file.display().to_string(),
            "tier_order": order.iter().map(NodeId::as_str).collect::<Vec<_>>(),
            "max_nodes": args.max_nodes,
        }),
        seed: None,
    };
    let mut report = Report::new(meta, vec![]);
    report.extra.insert("counts".into(), json!(counts));
    report.extra.insert("product_formula".into(), json!(formula.to_string()));
    report.extra.insert("tree".into(), tree.to_json());
    let bytes = report.render(Format::Json).map_err(|e| CliError::Io(PathBuf::from("<output>"), e))?;
    let summary = format!(
        "decision nodes {}, chance nodes {}, leaves {}, 1 + product of domain sizes {formula}",
        counts.decision, counts.chance, counts.leaf
    );
    match &args.out {
        Some(p) => {
            std::fs::write(p, bytes).map_err(io_err(p))?;
            println!("{summary}");
        }
        None => {
            emit(&bytes, None).map_err(|e| CliError::Io(PathBuf::from("<stdout>"), e))?;
            eprintln!("{summary}");
        }
    }
    Ok(())
}

#[derive(Args, Debug)]
pub struct SolveZsArgs {
    /// JSON file holding the row player's payoff matrix as a list of rows.
    pub matrix_file: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}

pub fn solve_zs(args: &SolveZsArgs) -> CliResult<()> {
    let text = read(&args.matrix_file)?;
    let a = parse_matrix(&text).map_err(|e| match e {
        SbnError::Parse(m) => SbnError::Parse(format!("{}: {m}", args.matrix_file.display())),
        other => other,
    })?;
    let s = zero_sum_solve(&a)?;
    let meta = Meta {
        command: "solve-zs",
        config: json!({"matrix_file": args.matrix_file.display().to_string(), "rows": a.len(), "columns": a[0].len()}),
        seed: None,
    };
    let mut report = Report::new(meta, vec!["quantity", "index", "value"]);
    report.row(vec!["value".into(), Cell::Empty, s.value.into()]);
    report.row(vec!["duality_gap".into(), Cell::Empty, s.duality_gap.into()]);
    for (i, p) in s.strategy.probs.iter().enumerate() {
        report.row(vec!["row_strategy".into(), i.into(), (*p).into()]);
    }
    for (j, p) in s.column_strategy.probs.iter().enumerate() {
        report.row(vec!["column_strategy".into(), j.into(), (*p).into()]);
    }
    for (j, c) in s.certificate.iter().enumerate() {
        report.row(vec!["certificate".into(), j.into(), (*c).into()]);
    }
    args.output.write(&report)
}
