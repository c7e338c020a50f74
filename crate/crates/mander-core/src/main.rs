//! Command-line shell over the library: plan validation, partisan
//! scoring, exhaustive enumeration, local search, and hard-instance
//! generation and verification.
//!
//! All results are JSON on stdout; errors are JSON on stderr. Exit
//! codes: 0 success (and every checked claim holds), 1 invalid input,
//! 2 claim failed or plan invalid, 3 budget exceeded. Rationals print
//! as exact `"P/Q"` strings with `_approx` companions for plotting.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Deserialize;
use serde_json::{json, Value};

use mander_core::enumerate::{enumerate_plans, EnumerateOptions, ObjectiveValue};
use mander_core::exact::{format_rational, parse_rational, rational_to_f64};
use mander_core::gadgets::{
    build_seatvote, gen_mis_gadget, verify_mis_gadget, verify_seatvote_gadget, GadgetError,
    GadgetVerdict, SeatVoteCheck, SeatVoteVariant, SourceGraph,
};
use mander_core::io::{
    map_from_file, map_from_json, map_to_json, parse_anneal_spec, parse_balance_spec,
    parse_metric_list, parse_objective_spec, parse_party, parse_verify_mode, plan_from_file,
    plan_from_json, plan_to_file, plan_to_json, same_structure, GadgetMeta, MapFile, MetricSpec,
    PlanFile, RebuiltGadget, VerifyMode, FORMAT_VERSION,
};
use mander_core::metrics::{
    compactness_check, effgap_identity_residual, metrics_report, partisan_bias, seat_vote_factor,
    MetricsError, SeatVoteConfig, ShiftModel,
};
use mander_core::model::{district_stats, MapInstance, Plan};
use mander_core::optimize::{optimize, OptimizeError, SearchParams};
use mander_core::validity::{check_plan, ValidityError};

/// A failed invocation, carrying its contract exit code.
enum Failure {
    /// Exit 1: unreadable, unparseable, or inconsistent input.
    Input(String),
    /// Exit 2: a requested claim failed or the plan is invalid.
    Claim(String),
    /// Exit 3: a search budget ran out before the answer was decided.
    Budget(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Claim(_) => 2,
            Failure::Budget(_) => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Input(_) => "invalid-input",
            Failure::Claim(_) => "claim-failed",
            Failure::Budget(_) => "budget-exceeded",
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Claim(m) | Failure::Budget(m) => m,
        }
    }
}

impl From<mander_core::io::IoError> for Failure {
    fn from(e: mander_core::io::IoError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<MetricsError> for Failure {
    fn from(e: MetricsError) -> Self {
        Failure::Input(e.to_string())
    }
}

/// Maps verifier errors onto the exit-code contract: a refuted claim
/// exits 2, an exhausted budget exits 3, anything else is bad input.
fn verify_failure(e: GadgetError) -> Failure {
    match e {
        GadgetError::NotASolution(m) => Failure::Claim(format!("not a solution: {m}")),
        GadgetError::NotIndependent(a, b) => {
            Failure::Claim(format!("claimed set is not independent: edge ({a},{b})"))
        }
        GadgetError::NotMaximal(v) => {
            Failure::Claim(format!("claimed set is not maximal: node {v} can be added"))
        }
        GadgetError::TilingMismatch(m) => Failure::Claim(format!("tiling check failed: {m}")),
        GadgetError::BudgetExceeded => {
            Failure::Budget("enumeration budget exceeded before the claim was decided".into())
        }
        GadgetError::IllustrationOnly => Failure::Input(
            "soundness verification is refused on illustration-mode maps".into(),
        ),
        other => Failure::Input(other.to_string()),
    }
}

#[derive(Parser)]
#[command(
    name = "mander",
    version,
    about = "Exact redistricting analysis: validity, metrics, enumeration, search, gadgets"
)]
struct Cli {
    /// Read input documents from a single stdin JSON object
    /// `{"map": ..., "plan": ..., "graph": ...}` instead of paths.
    #[arg(long, global = true)]
    stdio: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a plan's validity (connectivity + population balance).
    Validate(ValidateArgs),
    /// Compute partisan metrics of a plan.
    Score(ScoreArgs),
    /// Exhaustively enumerate all valid plans of a small map.
    Enumerate(EnumerateArgs),
    /// Search for a plan optimizing an objective by boundary flips.
    Optimize(OptimizeArgs),
    /// Generate a hard benchmark map.
    #[command(subcommand)]
    GenGadget(GenGadgetCmd),
    /// Verify the claims recorded in a generated gadget map.
    VerifyGadget(VerifyGadgetArgs),
}

#[derive(Args)]
struct ValidateArgs {
    /// Map document path (`-` for stdin).
    #[arg(long)]
    map: Option<PathBuf>,
    /// Plan document path (`-` for stdin).
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Balance criterion: `strict`, `mult:EPS`, `add:DELTA`, `poly:C`.
    #[arg(long)]
    balance: String,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    map: Option<PathBuf>,
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Party awarded exactly tied districts.
    #[arg(long, default_value = "A")]
    tie_pref: String,
    /// Comma-separated metrics: `effgap`, `bias:SHIFT`, `seatvote:RHO`,
    /// `compactness:L1:L2`. Default `effgap`.
    #[arg(long)]
    metrics: Option<String>,
    /// Also write per-district stats as CSV to this path.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long)]
    map: Option<PathBuf>,
    #[arg(long)]
    balance: String,
    /// Objective tracked over visited plans, e.g. `effgap-min`.
    #[arg(long)]
    objective: Option<String>,
    /// Search-node budget; hitting it reports a partial count, exit 3.
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, default_value = "A")]
    tie_pref: String,
    /// Cap on retained optimal plans.
    #[arg(long, default_value_t = 16)]
    max_best: usize,
}

#[derive(Args)]
struct OptimizeArgs {
    #[arg(long)]
    map: Option<PathBuf>,
    #[arg(long)]
    balance: String,
    #[arg(long)]
    objective: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Independent restarts.
    #[arg(long, default_value_t = 1)]
    restarts: u32,
    /// Iteration cap per restart.
    #[arg(long, default_value_t = 1000)]
    iters: u64,
    /// Annealing schedule `T0:DECAY`; hill-climbs when absent.
    #[arg(long)]
    anneal: Option<String>,
    #[arg(long, default_value = "A")]
    tie_pref: String,
    /// Also write the best plan document to this path.
    #[arg(long)]
    plan_out: Option<PathBuf>,
    /// Write the per-iteration objective trace as CSV to this path.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Subcommand)]
enum GenGadgetCmd {
    /// Grid map from a number-partition instance: the minority party
    /// can win a seat exactly when the values split evenly.
    Seatvote(GenSeatvoteArgs),
    /// Planar map from a cubic graph: a canonical plan's wasted-vote
    /// sum is an affine function of an independent set's size.
    Mis(GenMisArgs),
}

#[derive(Args)]
struct GenSeatvoteArgs {
    /// Comma-separated positive instance values.
    #[arg(long)]
    set: String,
    /// District count.
    #[arg(long)]
    kappa: u32,
    /// `a` (minority needs the split) or `b` (one seat granted up front).
    #[arg(long, default_value = "a")]
    variant: String,
    /// Balance exponent c > 1.
    #[arg(long, default_value = "1.1")]
    c: String,
    /// Skip preprocessing and build from the values as given.
    #[arg(long)]
    illustration: bool,
    /// Output path (default stdout).
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenMisArgs {
    /// Graph document path, or the builtin names `k4` / `q3`.
    #[arg(long)]
    graph: Option<String>,
    /// Balance tolerance, a rational strictly between 0 and 1/2.
    #[arg(long)]
    epsilon: String,
    /// Output path (default stdout).
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyGadgetArgs {
    #[arg(long)]
    map: Option<PathBuf>,
    /// `completeness:V1,V2,...` (raw values), `soundness`, or
    /// `upsilon:I1,I2,...` (graph node indices).
    #[arg(long)]
    mode: String,
    /// Node budget for exhaustive soundness enumeration.
    #[arg(long)]
    budget: Option<u64>,
}

/// Source-graph document for `gen-gadget mis`.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    format_version: u32,
    /// Node count; nodes are `0..n`.
    n: u32,
    edges: Vec<(u32, u32)>,
}

/// The single JSON object read from stdin under `--stdio`.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StdioRequest {
    map: Option<MapFile>,
    plan: Option<PlanFile>,
    graph: Option<GraphFile>,
}

/// Input plumbing: either path-based or a parsed `--stdio` request.
struct Ctx {
    stdio: Option<StdioRequest>,
}

impl Ctx {
    fn new(stdio: bool) -> Result<Self, Failure> {
        if !stdio {
            return Ok(Ctx { stdio: None });
        }
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| Failure::Input(format!("reading stdin: {e}")))?;
        let req: StdioRequest = serde_json::from_str(&buf)
            .map_err(|e| Failure::Input(format!("stdin request: {e}")))?;
        Ok(Ctx { stdio: Some(req) })
    }

    fn load_map(
        &self,
        path: &Option<PathBuf>,
    ) -> Result<(MapInstance, Option<GadgetMeta>), Failure> {
        if let Some(req) = &self.stdio {
            let file = req
                .map
                .as_ref()
                .ok_or_else(|| Failure::Input("stdin request lacks `map`".into()))?;
            return Ok(map_from_file(file)?);
        }
        let path = path
            .as_ref()
            .ok_or_else(|| Failure::Input("--map is required".into()))?;
        Ok(map_from_json(&read_input(path)?)?)
    }

    fn load_plan(&self, map: &MapInstance, path: &Option<PathBuf>) -> Result<Plan, Failure> {
        if let Some(req) = &self.stdio {
            let file = req
                .plan
                .as_ref()
                .ok_or_else(|| Failure::Input("stdin request lacks `plan`".into()))?;
            return Ok(plan_from_file(map, file)?);
        }
        let path = path
            .as_ref()
            .ok_or_else(|| Failure::Input("--plan is required".into()))?;
        Ok(plan_from_json(map, &read_input(path)?)?)
    }

    fn load_graph(&self, spec: &Option<String>) -> Result<SourceGraph, Failure> {
        let file: GraphFile = if let Some(req) = &self.stdio {
            let Some(g) = &req.graph else {
                return Err(Failure::Input("stdin request lacks `graph`".into()));
            };
            GraphFile {
                format_version: g.format_version,
                n: g.n,
                edges: g.edges.clone(),
            }
        } else {
            let spec = spec
                .as_ref()
                .ok_or_else(|| Failure::Input("--graph is required".into()))?;
            // Builtin names resolve only when no such file exists.
            if !Path::new(spec).exists() {
                match spec.as_str() {
                    "k4" => return Ok(mander_core::gadgets::k4()),
                    "q3" => return Ok(mander_core::gadgets::q3()),
                    _ => {}
                }
            }
            serde_json::from_str(&read_input(Path::new(spec))?)
                .map_err(|e| Failure::Input(format!("graph document: {e}")))?
        };
        if file.format_version != FORMAT_VERSION {
            return Err(Failure::Input(format!(
                "unsupported format_version {} (this build reads {FORMAT_VERSION})",
                file.format_version
            )));
        }
        SourceGraph::new(file.n, &file.edges).map_err(|e| Failure::Input(e.to_string()))
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| Failure::Input(format!("reading stdin: {e}")))?;
        return Ok(buf);
    }
    fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("reading {}: {e}", path.display())))
}

fn write_output(path: &Option<PathBuf>, content: &str) -> Result<(), Failure> {
    match path {
        Some(p) if p != Path::new("-") => fs::write(p, content)
            .map_err(|e| Failure::Input(format!("writing {}: {e}", p.display()))),
        _ => {
            print!("{content}");
            Ok(())
        }
    }
}

fn print_doc(doc: &Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(doc).expect("reports serialize")
    );
}

fn objective_value_json(v: &ObjectiveValue) -> Value {
    match v {
        ObjectiveValue::Rational(r) => Value::String(format_rational(r)),
        ObjectiveValue::Pow { pow_q, q } => json!({
            "pow_q": format_rational(pow_q),
            "q": q,
        }),
    }
}

fn parse_u64_list(s: &str) -> Result<Vec<u64>, Failure> {
    s.split(',')
        .map(|v| {
            v.trim().parse::<u64>().map_err(|_| {
                Failure::Input(format!(
                    "bad value list `{s}`: expected comma-separated nonnegative integers"
                ))
            })
        })
        .collect()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            // Usage errors follow the same contract as bad files.
            let failure = Failure::Input(e.to_string());
            emit_failure(&failure);
            return ExitCode::from(failure.exit_code());
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(f) => {
            emit_failure(&f);
            ExitCode::from(f.exit_code())
        }
    }
}

fn emit_failure(f: &Failure) {
    let doc = json!({"error": {"kind": f.kind(), "message": f.message()}});
    eprintln!("{doc}");
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    let ctx = Ctx::new(cli.stdio)?;
    match &cli.command {
        Command::Validate(args) => cmd_validate(&ctx, args),
        Command::Score(args) => cmd_score(&ctx, args),
        Command::Enumerate(args) => cmd_enumerate(&ctx, args),
        Command::Optimize(args) => cmd_optimize(&ctx, args),
        Command::GenGadget(cmd) => cmd_gen_gadget(&ctx, cmd),
        Command::VerifyGadget(args) => cmd_verify_gadget(&ctx, args),
    }
}

fn cmd_validate(ctx: &Ctx, args: &ValidateArgs) -> Result<ExitCode, Failure> {
    let (map, _) = ctx.load_map(&args.map)?;
    let plan = ctx.load_plan(&map, &args.plan)?;
    let criterion = parse_balance_spec(&args.balance)?;
    let report = match check_plan(&map, &plan, &criterion) {
        Ok(r) => r,
        // A structurally broken plan (an empty district) is an invalid
        // plan, not invalid input.
        Err(ValidityError::Model(e)) => return Err(Failure::Claim(format!("plan invalid: {e}"))),
        Err(e) => return Err(Failure::Input(e.to_string())),
    };
    let doc = json!({
        "valid": report.is_valid(),
        "connected_ok": report.connected_ok,
        "balance_ok": report.balance_ok,
        "max_pop": report.max_pop,
        "min_pop": report.min_pop,
        "offending_districts": report
            .offending_districts
            .iter()
            .map(|(d, reason)| json!({"district": d, "reason": reason}))
            .collect::<Vec<Value>>(),
    });
    print_doc(&doc);
    Ok(if report.is_valid() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn cmd_score(ctx: &Ctx, args: &ScoreArgs) -> Result<ExitCode, Failure> {
    let (map, _) = ctx.load_map(&args.map)?;
    let plan = ctx.load_plan(&map, &args.plan)?;
    let tie = parse_party(&args.tie_pref)?;
    let specs = match &args.metrics {
        Some(s) => parse_metric_list(s)?,
        None => vec![MetricSpec::EffGap],
    };
    let report = metrics_report(&map, &plan, tie)?;
    let effgap = BigRational::new(BigInt::from(report.effgap_x2), BigInt::from(2));
    let mut doc = json!({
        "n_seat_c_a": format_rational(&report.n_seat_c_a),
        "n_seat_m_a": format_rational(&report.n_seat_m_a),
        "n_vote_c_a": format_rational(&report.n_vote_c_a),
        "n_vote_m_a": format_rational(&report.n_vote_m_a),
        "raw_seats_a": report.raw_seats_a,
        "raw_seats_b": map.kappa() - report.raw_seats_a,
        "effgap_x2": report.effgap_x2,
        "effgap": format_rational(&effgap),
        "effgap_normalized": format_rational(&report.effgap_normalized),
        "effgap_normalized_approx": rational_to_f64(&report.effgap_normalized),
    });
    for spec in &specs {
        match spec {
            MetricSpec::EffGap => {
                doc["identity_residual"] = match effgap_identity_residual(&map, &plan, tie) {
                    Ok(r) => Value::String(format_rational(&r)),
                    // The identity is asserted only for equal district
                    // populations; elsewhere it is reported as absent.
                    Err(MetricsError::PreconditionUnequalDistricts) => Value::Null,
                    Err(e) => return Err(e.into()),
                };
            }
            MetricSpec::Bias(shift) => {
                let bias = partisan_bias(&map, &plan, shift, tie)?;
                let shift_doc = match shift {
                    ShiftModel::Uniform => Value::String("uniform".into()),
                    ShiftModel::Explicit(betas) => Value::Array(
                        betas
                            .iter()
                            .map(|b| Value::String(format_rational(b)))
                            .collect(),
                    ),
                };
                doc["bias"] = json!({
                    "value": format_rational(&bias),
                    "approx": rational_to_f64(&bias),
                    "shift": shift_doc,
                });
            }
            MetricSpec::SeatVote(rho) => {
                let cfg = SeatVoteConfig {
                    rho: rho.clone(),
                    tie_pref: tie,
                };
                let factor = seat_vote_factor(&map, &plan, &cfg)?;
                doc["seatvote"] = json!({
                    "rho": format_rational(rho),
                    "pow_q": format_rational(&factor.pow_q),
                    "q": factor.q,
                    "approx": factor.approx(),
                });
            }
            MetricSpec::Compactness { l1_pi, l2_pi } => {
                let verdicts = compactness_check(&map, &plan, l1_pi, l2_pi)?;
                doc["compactness"] = json!({
                    "l1_pi": format_rational(l1_pi),
                    "l2_pi": format_rational(l2_pi),
                    "per_district": verdicts,
                    "all_pass": verdicts.iter().all(|v| *v),
                });
            }
        }
    }
    if args.csv.is_some() {
        let stats = district_stats(&map, &plan, tie).map_err(|e| Failure::Input(e.to_string()))?;
        let mut csv = String::from("district,pop,party_a,party_b,winner,wasted_a_x2,wasted_b_x2\n");
        for (j, s) in stats.iter().enumerate() {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                j + 1,
                s.pop,
                s.party_a,
                s.party_b,
                s.winner,
                s.wasted_a_x2,
                s.wasted_b_x2
            ));
        }
        write_output(&args.csv, &csv)?;
    }
    print_doc(&doc);
    Ok(ExitCode::SUCCESS)
}

fn cmd_enumerate(ctx: &Ctx, args: &EnumerateArgs) -> Result<ExitCode, Failure> {
    let (map, _) = ctx.load_map(&args.map)?;
    let criterion = parse_balance_spec(&args.balance)?;
    let objective = args
        .objective
        .as_deref()
        .map(parse_objective_spec)
        .transpose()?;
    let opts = EnumerateOptions {
        objective,
        tie_pref: parse_party(&args.tie_pref)?,
        node_budget: args.budget,
        max_best_plans: args.max_best,
    };
    let result =
        enumerate_plans(&map, &criterion, &opts).map_err(|e| Failure::Input(e.to_string()))?;
    let best_plans = result
        .best_plans
        .iter()
        .map(|p| Ok(serde_json::to_value(plan_to_file(&map, p)?.assignment)?))
        .collect::<Result<Vec<Value>, mander_core::io::IoError>>()?;
    let doc = json!({
        "count": result.count,
        "exhausted": result.exhausted,
        "nodes_visited": result.nodes_visited,
        "truncated": result.truncated,
        "best_value": result.best_value.as_ref().map(objective_value_json),
        "best_value_approx": result.best_value.as_ref().map(|v| v.approx()),
        "best_plans": best_plans,
    });
    print_doc(&doc);
    Ok(if result.exhausted {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    })
}

fn cmd_optimize(ctx: &Ctx, args: &OptimizeArgs) -> Result<ExitCode, Failure> {
    let (map, _) = ctx.load_map(&args.map)?;
    let criterion = parse_balance_spec(&args.balance)?;
    let objective = parse_objective_spec(&args.objective)?;
    let params = SearchParams {
        seed: args.seed,
        restarts: args.restarts,
        max_iters: args.iters,
        temperature_schedule: args.anneal.as_deref().map(parse_anneal_spec).transpose()?,
    };
    let tie = parse_party(&args.tie_pref)?;
    let outcome = optimize(&map, &criterion, &objective, &params, tie).map_err(|e| match e {
        OptimizeError::NoValidPlanFound => {
            Failure::Claim("no valid plan found within the construction budget".into())
        }
        other => Failure::Input(other.to_string()),
    })?;
    let plan_file = plan_to_file(&map, &outcome.plan)?;
    if args.plan_out.is_some() {
        write_output(&args.plan_out, &plan_to_json(&map, &outcome.plan)?)?;
    }
    if args.trace.is_some() {
        let mut csv = String::from("iteration,objective,restart,accepted\n");
        for (i, point) in outcome.trace.iter().enumerate() {
            csv.push_str(&format!(
                "{},{},{},{}\n",
                i,
                point.value.approx(),
                point.restart,
                point.accepted
            ));
        }
        write_output(&args.trace, &csv)?;
    }
    let doc = json!({
        "value": objective_value_json(&outcome.value),
        "value_approx": outcome.value.approx(),
        "restarts_succeeded": outcome.restarts_succeeded,
        "trace_points": outcome.trace.len(),
        "plan": serde_json::to_value(&plan_file).expect("plan documents serialize"),
    });
    print_doc(&doc);
    Ok(ExitCode::SUCCESS)
}

fn cmd_gen_gadget(ctx: &Ctx, cmd: &GenGadgetCmd) -> Result<ExitCode, Failure> {
    match cmd {
        GenGadgetCmd::Seatvote(args) => {
            let values = parse_u64_list(&args.set)?;
            let variant = match args.variant.as_str() {
                "a" | "A" => SeatVoteVariant::A,
                "b" | "B" => SeatVoteVariant::B,
                other => {
                    return Err(Failure::Input(format!(
                        "bad variant `{other}`: expected `a` or `b`"
                    )))
                }
            };
            let c = parse_rational(&args.c).map_err(|e| Failure::Input(e.to_string()))?;
            let gadget = build_seatvote(&values, args.kappa, variant, &c, args.illustration)
                .map_err(|e| Failure::Input(e.to_string()))?;
            let meta = GadgetMeta::from_seatvote(&gadget);
            write_output(&args.out, &map_to_json(&gadget.map, Some(meta)))?;
            Ok(ExitCode::SUCCESS)
        }
        GenGadgetCmd::Mis(args) => {
            let graph = ctx.load_graph(&args.graph)?;
            let epsilon =
                parse_rational(&args.epsilon).map_err(|e| Failure::Input(e.to_string()))?;
            let gadget =
                gen_mis_gadget(&graph, &epsilon).map_err(|e| Failure::Input(e.to_string()))?;
            let meta = GadgetMeta::from_mis(&gadget);
            write_output(&args.out, &map_to_json(&gadget.map, Some(meta)))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn cmd_verify_gadget(ctx: &Ctx, args: &VerifyGadgetArgs) -> Result<ExitCode, Failure> {
    let (map, meta) = ctx.load_map(&args.map)?;
    let meta = meta.ok_or_else(|| {
        Failure::Input("map document carries no gadget metadata to verify".into())
    })?;
    let mode = parse_verify_mode(&args.mode)?;
    let rebuilt = meta.rebuild()?;
    if !same_structure(&map, rebuilt.map()) {
        return Err(Failure::Input(
            "map cells do not match the gadget metadata".into(),
        ));
    }
    let verdict: GadgetVerdict = match (&rebuilt, &mode) {
        (RebuiltGadget::SeatVote(g), VerifyMode::Completeness(raw)) => {
            // Claimed solutions use raw values; scale to gadget units.
            let solution = raw
                .iter()
                .map(|&v| {
                    v.checked_mul(g.multiplier)
                        .ok_or_else(|| Failure::Input("claimed value overflows".into()))
                })
                .collect::<Result<Vec<u64>, Failure>>()?;
            verify_seatvote_gadget(g, &SeatVoteCheck::Completeness { solution })
                .map_err(verify_failure)?
        }
        (RebuiltGadget::SeatVote(g), VerifyMode::Soundness) => verify_seatvote_gadget(
            g,
            &SeatVoteCheck::SoundnessExhaustive {
                node_budget: args.budget,
            },
        )
        .map_err(verify_failure)?,
        (RebuiltGadget::Mis(g), VerifyMode::Upsilon(ind_set)) => {
            verify_mis_gadget(g, ind_set).map_err(verify_failure)?
        }
        _ => {
            return Err(Failure::Input(
                "mode does not apply to this gadget family".into(),
            ))
        }
    };
    let doc = json!({
        "trivial_plan_valid": verdict.trivial_plan_valid,
        "completeness_holds": verdict.completeness_holds,
        "soundness_holds": verdict.soundness_holds,
        "details": verdict.details,
        "all_hold": verdict.all_hold(),
    });
    print_doc(&doc);
    Ok(if verdict.all_hold() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}
