//! `smoothot` command-line frontend.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use smoothot::bounds::bound_report;
use smoothot::colortransfer::{transfer, PlanMethod, Raster, TransferConfig};
use smoothot::csvio::{read_groups, read_matrix, read_vector, write_matrix};
use smoothot::oracle::{plan_error, solve_exact, value_errors, ExactSolution};
use smoothot::problem::{CostMatrix, Groups, Histogram, Instance, RegKind, RegParams, TransportPlan};
use smoothot::solvers::{
    solve_dual, solve_relaxed_primal, solve_semi_relaxed_primal, solve_semidual, RelaxationParams, SolveOptions,
    SolveReport, SolverKind,
};
use smoothot::OtError;

const EXIT_CODES: &str = "\
Exit codes:
   0  success
   2  invalid command line
   3  dimension mismatch
   4  non-positive histogram mass
   5  histogram not normalized
   6  negative cost
   7  non-finite input
   8  regularizer not supported by the operation
   9  invalid parameter
  10  invalid group structure
  11  instance too large for the exact solver
  12  zero reference quantity
  13  too few distinct colors for k
  14  malformed input file
  15  image decoding or encoding failure
  16  I/O failure
  17  solver did not converge (only with --strict)

Environment:
  SMOOTHOT_THREADS  number of worker threads (default: all cores)";

#[derive(Parser)]
#[command(name = "smoothot", version, about = "Smooth and sparse optimal transport", after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a regularized or relaxed OT instance.
    Solve(SolveArgs),
    /// Color transfer between two PNG images.
    Transfer(TransferArgs),
    /// Closed-form approximation bounds for an instance.
    Bounds(BoundsArgs),
    /// Exact (unregularized) OT by network simplex.
    Exact(ExactArgs),
    /// Sweep gamma and report errors against the exact solution.
    Compare(CompareArgs),
}

#[derive(Args)]
struct InstanceArgs {
    /// Source histogram, one weight per line.
    #[arg(long)]
    a: PathBuf,
    /// Target histogram.
    #[arg(long)]
    b: PathBuf,
    /// Cost matrix, comma-separated rows.
    #[arg(long)]
    cost: PathBuf,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum FormulationArg {
    Dual,
    Semidual,
    Relaxed,
    Semirelaxed,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum RegArg {
    Entropy,
    L2,
    GlL2,
    GlEntropy,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    #[value(alias = "lbfgs")]
    QuasiNewton,
    GradientDescent,
    Alternating,
    Apg,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, value_enum, default_value = "semidual")]
    formulation: FormulationArg,
    /// Regularizer (ignored by the relaxed formulations).
    #[arg(long, value_enum, default_value = "l2")]
    reg: RegArg,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    gamma: f64,
    /// Group-lasso weight.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    mu: f64,
    /// Row groups, one group of zero-based indices per line.
    #[arg(long)]
    groups: Option<PathBuf>,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, value_enum)]
    solver: Option<SolverArg>,
    #[arg(long, default_value_t = 1000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    grad_tol: f64,
    /// Fail with exit code 17 when the solver does not converge.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Plan CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON report output (stdout when omitted).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Also solve exactly and add bounds and error metrics to the report.
    #[arg(long)]
    exact: bool,
}

#[derive(Args)]
struct TransferArgs {
    #[arg(long)]
    source: PathBuf,
    #[arg(long)]
    target: PathBuf,
    /// Recolored PNG output.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 32)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Use the exact plan instead of a smoothed one.
    #[arg(long)]
    exact: bool,
    /// Recolor the target with the source palette instead.
    #[arg(long)]
    reverse: bool,
    /// Palette-level plan CSV output.
    #[arg(long)]
    plan_out: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, value_enum, default_value = "l2")]
    reg: RegArg,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct ExactArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Comma-separated gamma grid.
    #[arg(long, value_delimiter = ',', default_value = "1e-4,1e-2,1,1e2,1e4")]
    gammas: Vec<f64>,
    #[arg(long)]
    report: Option<PathBuf>,
}

enum Failure {
    Ot(OtError),
    NotConverged(String),
}

impl From<OtError> for Failure {
    fn from(e: OtError) -> Self {
        Failure::Ot(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Ot(OtError::Io(e))
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::NotConverged(_) => 17,
            Failure::Ot(e) => match e {
                OtError::DimensionMismatch(_) => 3,
                OtError::NonPositiveMass { .. } => 4,
                OtError::NotNormalized { .. } => 5,
                OtError::NegativeCost { .. } => 6,
                OtError::NonFiniteInput(_) => 7,
                OtError::UnsupportedRegularizer(_) => 8,
                OtError::InvalidParameter(_) => 9,
                OtError::InvalidGroups(_) => 10,
                OtError::SizeLimitExceeded { .. } => 11,
                OtError::ZeroReference => 12,
                OtError::TooFewColors { .. } => 13,
                OtError::Parse(_) => 14,
                OtError::Image(_) => 15,
                OtError::Io(_) => 16,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Ot(e) => e.to_string(),
            Failure::NotConverged(s) => s.clone(),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn with_path<T>(path: &Path, r: smoothot::Result<T>) -> CliResult<T> {
    r.map_err(|e| match e {
        OtError::Parse(msg) => OtError::Parse(format!("{}: {msg}", path.display())),
        OtError::Io(io) => OtError::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        other => other,
    })
    .map_err(Failure::from)
}

fn load_instance(args: &InstanceArgs) -> CliResult<Instance> {
    let a = Histogram::new(with_path(&args.a, read_vector(&args.a))?)?;
    let b = Histogram::new(with_path(&args.b, read_vector(&args.b))?)?;
    let cost = CostMatrix::new(with_path(&args.cost, read_matrix(&args.cost))?)?;
    Ok(Instance::new(a, b, cost)?)
}

fn reg_kind(r: RegArg) -> RegKind {
    match r {
        RegArg::Entropy => RegKind::Entropy,
        RegArg::L2 => RegKind::SquaredL2,
        RegArg::GlL2 => RegKind::GroupLassoL2,
        RegArg::GlEntropy => RegKind::GroupLassoEntropy,
    }
}

fn reg_params(model: &ModelArgs, gamma: f64, m: usize) -> CliResult<RegParams> {
    let kind = reg_kind(model.reg);
    let groups = match &model.groups {
        Some(p) => Some(Groups::new(with_path(p, read_groups(p))?, m)?),
        None => None,
    };
    if groups.is_some() && !kind.is_group_lasso() {
        return Err(OtError::InvalidParameter("--groups requires a group-lasso regularizer".into()).into());
    }
    if kind.is_group_lasso() && model.formulation != FormulationArg::Dual {
        return Err(OtError::InvalidParameter("group lasso is only available with --formulation dual".into()).into());
    }
    Ok(RegParams { kind, gamma, mu: model.mu, groups })
}

fn solve_options(s: &SolverArgs) -> SolveOptions {
    let solver = s.solver.map(|k| match k {
        SolverArg::QuasiNewton => SolverKind::QuasiNewton,
        SolverArg::GradientDescent => SolverKind::GradientDescent,
        SolverArg::Alternating => SolverKind::Alternating,
        SolverArg::Apg => SolverKind::AcceleratedProjectedGradient,
    });
    SolveOptions { max_iters: s.max_iters, grad_tol: s.grad_tol, solver, ..Default::default() }
}

fn reg_label(model: &ModelArgs) -> &'static str {
    match model.formulation {
        FormulationArg::Relaxed | FormulationArg::Semirelaxed => "quadratic_penalty",
        _ => reg_kind(model.reg).name(),
    }
}

fn run_model(inst: &Instance, model: &ModelArgs, gamma: f64, opts: &SolveOptions) -> CliResult<(TransportPlan, SolveReport)> {
    Ok(match model.formulation {
        FormulationArg::Dual => {
            let s = solve_dual(inst, &reg_params(model, gamma, inst.m())?, opts)?;
            (s.plan, s.report)
        }
        FormulationArg::Semidual => {
            let s = solve_semidual(inst, &reg_params(model, gamma, inst.m())?, opts)?;
            (s.plan, s.report)
        }
        FormulationArg::Relaxed => {
            let s = solve_relaxed_primal(inst, &RelaxationParams::new(gamma)?, opts)?;
            (s.plan, s.report)
        }
        FormulationArg::Semirelaxed => {
            let s = solve_semi_relaxed_primal(inst, &RelaxationParams::new(gamma)?, opts)?;
            (s.plan, s.report)
        }
    })
}

fn summary(model: &ModelArgs, gamma: f64, report: &SolveReport) -> Value {
    json!({
        "formulation": report.formulation,
        "reg": reg_label(model),
        "gamma": gamma,
        "mu": model.mu,
        "iterations": report.iters,
        "objective": report.objective,
        "converged": report.converged,
        "plan_sparsity": report.plan_sparsity,
        "row_residual": report.row_residual,
        "col_residual": report.col_residual,
    })
}

fn exact_metrics(plan: &TransportPlan, report: &SolveReport, exact: &ExactSolution, inst: &Instance) -> CliResult<Value> {
    Ok(json!({
        "exact_value": exact.value,
        "errors": value_errors(plan, report.objective, exact, inst)?,
        "plan_error": plan_error(plan, &exact.plan)?,
    }))
}

fn emit(path: Option<&Path>, value: &Value) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    match path {
        Some(p) => std::fs::write(p, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn check_converged(strict: bool, report: &SolveReport) -> CliResult<()> {
    if strict && !report.converged {
        return Err(Failure::NotConverged(format!(
            "solver stopped after {} iterations with gradient norm {:.3e}",
            report.iters, report.grad_norm
        )));
    }
    Ok(())
}

fn cmd_solve(args: &SolveArgs) -> CliResult<()> {
    let inst = load_instance(&args.instance)?;
    let opts = solve_options(&args.solver);
    let gamma = args.model.gamma;
    let (plan, report) = run_model(&inst, &args.model, gamma, &opts)?;
    if let Some(out) = &args.out {
        write_matrix(out, plan.entries.view())?;
    }
    let mut value = summary(&args.model, gamma, &report);
    value["report"] = json!(report);
    if args.exact {
        let exact = solve_exact(&inst)?;
        let kind = match args.model.formulation {
            FormulationArg::Relaxed | FormulationArg::Semirelaxed => RegKind::SquaredL2,
            _ => reg_kind(args.model.reg),
        };
        if !kind.is_group_lasso() {
            value["bounds"] = json!(bound_report(&inst, kind)?);
        }
        value["exact"] = exact_metrics(&plan, &report, &exact, &inst)?;
    }
    emit(args.report.as_deref(), &value)?;
    check_converged(args.solver.strict, &report)
}

fn cmd_transfer(args: &TransferArgs) -> CliResult<()> {
    let source = Raster::read_png(&args.source)?;
    let target = Raster::read_png(&args.target)?;
    let gamma = args.model.gamma;
    let method = if args.exact {
        PlanMethod::Exact
    } else {
        match args.model.formulation {
            FormulationArg::Dual => PlanMethod::Dual(reg_params(&args.model, gamma, args.k)?),
            FormulationArg::Semidual => PlanMethod::Semidual(reg_params(&args.model, gamma, args.k)?),
            FormulationArg::Relaxed => PlanMethod::Relaxed(RelaxationParams::new(gamma)?),
            FormulationArg::Semirelaxed => PlanMethod::SemiRelaxed(RelaxationParams::new(gamma)?),
        }
    };
    let config = TransferConfig { k: args.k, seed: args.seed, method, opts: solve_options(&args.solver), reverse: args.reverse };
    let out = transfer(&source, &target, &config)?;
    out.image.write_png(&args.out)?;
    if let Some(p) = &args.plan_out {
        write_matrix(p, out.plan.entries.view())?;
    }
    let mut value = json!({
        "k": args.k,
        "seed": args.seed,
        "reverse": args.reverse,
        "plan_sparsity": out.plan.sparsity(),
        "row_residual": out.plan.row_residual,
        "col_residual": out.plan.col_residual,
        "empty_rows": out.empty_rows,
    });
    match &out.report {
        Some(r) => {
            let mut s = summary(&args.model, gamma, r);
            s.as_object_mut().unwrap().extend(value.as_object().unwrap().clone());
            s["report"] = json!(r);
            value = s;
        }
        None => {
            value["formulation"] = json!("exact");
        }
    }
    if args.report.is_some() {
        emit(args.report.as_deref(), &value)?;
    }
    match &out.report {
        Some(r) => check_converged(args.solver.strict, r),
        None => Ok(()),
    }
}

fn cmd_bounds(args: &BoundsArgs) -> CliResult<()> {
    let inst = load_instance(&args.instance)?;
    emit(args.report.as_deref(), &json!(bound_report(&inst, reg_kind(args.reg))?))
}

fn cmd_exact(args: &ExactArgs) -> CliResult<()> {
    let inst = load_instance(&args.instance)?;
    let exact = solve_exact(&inst)?;
    if let Some(out) = &args.out {
        write_matrix(out, exact.plan.entries.view())?;
    }
    emit(
        args.report.as_deref(),
        &json!({
            "value": exact.value,
            "pivots": exact.pivots,
            "nonzeros": exact.plan.nonzeros(),
            "plan_sparsity": exact.plan.sparsity(),
            "alpha": exact.dual.alpha,
            "beta": exact.dual.beta,
        }),
    )
}

fn cmd_compare(args: &CompareArgs) -> CliResult<()> {
    let inst = load_instance(&args.instance)?;
    let opts = solve_options(&args.solver);
    let exact = solve_exact(&inst)?;
    let mut rows = Vec::with_capacity(args.gammas.len());
    let mut unconverged = Vec::new();
    for &gamma in &args.gammas {
        let (plan, report) = run_model(&inst, &args.model, gamma, &opts)?;
        let mut row = summary(&args.model, gamma, &report);
        row.as_object_mut().unwrap().extend(exact_metrics(&plan, &report, &exact, &inst)?.as_object().unwrap().clone());
        rows.push(row);
        if !report.converged {
            unconverged.push(gamma);
        }
    }
    emit(
        args.report.as_deref(),
        &json!({
            "reg": reg_label(&args.model),
            "exact_value": exact.value,
            "rows": rows,
        }),
    )?;
    if args.solver.strict && !unconverged.is_empty() {
        return Err(Failure::NotConverged(format!("solver did not converge for gamma {unconverged:?}")));
    }
    Ok(())
}

fn configure_threads() -> CliResult<()> {
    if let Ok(v) = std::env::var("SMOOTHOT_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| OtError::InvalidParameter(format!("SMOOTHOT_THREADS must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(OtError::InvalidParameter("SMOOTHOT_THREADS must be positive".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| OtError::InvalidParameter(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Transfer(a) => cmd_transfer(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Exact(a) => cmd_exact(a),
        Command::Compare(a) => cmd_compare(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("smoothot: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
