//! Drivers for the four smooth OT formulations.
//!
//! Duals are maximized (internally by minimizing the negation); primals are
//! minimized over their feasible sets. Every driver returns a [`SolveReport`].

mod alternating;
mod objectives;
mod optim;

use std::cell::Cell;
use std::time::Instant;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{OtError, Result};
use crate::problem::{dot, DualPotentials, Histogram, Instance, RegKind, RegParams, TransportPlan};
use crate::regularizers::{omega_value, project_simplex_in_place};

pub use alternating::AlternatingMinimizer;
pub use objectives::{
    dual_objective_grad, recover_plan_from_dual, recover_plan_from_semidual, relaxed_primal_objective_grad,
    semi_dual_objective_grad, semi_relaxed_primal_objective_grad, DualEval,
};
pub(crate) use objectives::{dual_eval, semi_dual_eval};

use optim::{Minimized, StopRule};

/// Optimization backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    QuasiNewton,
    GradientDescent,
    Alternating,
    AcceleratedProjectedGradient,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::QuasiNewton => "quasi_newton",
            SolverKind::GradientDescent => "gradient_descent",
            SolverKind::Alternating => "alternating",
            SolverKind::AcceleratedProjectedGradient => "accelerated_projected_gradient",
        }
    }
}

/// Which smooth problem was solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    Dual,
    Semidual,
    Relaxed,
    SemiRelaxed,
}

impl Formulation {
    pub fn name(self) -> &'static str {
        match self {
            Formulation::Dual => "dual",
            Formulation::Semidual => "semidual",
            Formulation::Relaxed => "relaxed",
            Formulation::SemiRelaxed => "semi_relaxed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub max_iters: usize,
    /// Target ∞-norm of the gradient (or projected-gradient residual).
    pub grad_tol: f64,
    /// `None` picks quasi-Newton for the duals and accelerated projected
    /// gradient for the primals.
    pub solver: Option<SolverKind>,
    pub record_trace: bool,
    /// Quasi-Newton history length.
    pub memory: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { max_iters: 1000, grad_tol: 1e-6, solver: None, record_trace: true, memory: 10 }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(OtError::InvalidParameter("max_iters must be positive".into()));
        }
        if !(self.grad_tol > 0.0 && self.grad_tol.is_finite()) {
            return Err(OtError::InvalidParameter(format!("grad_tol must be > 0, got {}", self.grad_tol)));
        }
        if self.memory == 0 {
            return Err(OtError::InvalidParameter("memory must be positive".into()));
        }
        Ok(())
    }

    fn stop(&self) -> StopRule {
        StopRule { max_iters: self.max_iters, tol: self.grad_tol }
    }
}

/// Scale of the quadratic penalty `Φ(x, y) = (1/2γ)‖x − y‖²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelaxationParams {
    pub gamma: f64,
}

impl RelaxationParams {
    pub fn new(gamma: f64) -> Result<Self> {
        let rel = Self { gamma };
        rel.validate()?;
        Ok(rel)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(OtError::InvalidParameter(format!("gamma must be > 0, got {}", self.gamma)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub formulation: Formulation,
    pub solver: SolverKind,
    /// Final objective in the problem's own sense (maximized for duals).
    pub objective: f64,
    pub objective_trace: Vec<f64>,
    pub iters: usize,
    /// `false` means `max_iters` ran out (or the line search stalled) first.
    pub converged: bool,
    pub grad_norm: f64,
    pub duality_gap: Option<f64>,
    /// How the plan was made feasible before computing `duality_gap`.
    pub gap_rounding: Option<String>,
    pub plan_sparsity: f64,
    pub row_residual: f64,
    pub col_residual: f64,
    pub wall_time: f64,
    pub clamp_events: usize,
}

#[derive(Debug, Clone)]
pub struct DualSolution {
    pub potentials: DualPotentials,
    pub plan: TransportPlan,
    pub report: SolveReport,
}

#[derive(Debug, Clone)]
pub struct PrimalSolution {
    pub plan: TransportPlan,
    pub report: SolveReport,
}

/// Label stored in `SolveReport::gap_rounding`.
pub const FEASIBLE_ROUNDING: &str = "feasible_rounding";

/// Rounds a nonnegative plan onto `U(a, b)`: shrink rows exceeding `a`,
/// shrink columns exceeding `b`, then spread the missing mass with a rank-one
/// correction. The result is exactly feasible up to floating-point error and
/// stays close to `t` when `t` is nearly feasible.
pub fn round_to_feasible(t: ArrayView2<f64>, a: &Histogram, b: &Histogram) -> Array2<f64> {
    let mut f = t.to_owned();
    let (a, b) = (a.as_slice(), b.as_slice());
    for (mut row, &ai) in f.rows_mut().into_iter().zip(a) {
        let s = row.sum();
        if s > ai {
            let x = ai / s;
            row.iter_mut().for_each(|v| *v *= x);
        }
    }
    for (mut col, &bj) in f.columns_mut().into_iter().zip(b) {
        let s = col.sum();
        if s > bj {
            let x = bj / s;
            col.iter_mut().for_each(|v| *v *= x);
        }
    }
    let err_r: Vec<f64> = f.rows().into_iter().zip(a).map(|(r, &ai)| (ai - r.sum()).max(0.0)).collect();
    let err_c: Vec<f64> = f.columns().into_iter().zip(b).map(|(c, &bj)| (bj - c.sum()).max(0.0)).collect();
    let total: f64 = err_r.iter().sum();
    if total > 0.0 {
        for ((i, j), v) in f.indexed_iter_mut() {
            *v += err_r[i] * err_c[j] / total;
        }
    }
    f
}

/// `⟨T,C⟩ + Σ_j Ω(t_j)` of the rounded plan minus `dual`.
fn duality_gap(plan: &TransportPlan, inst: &Instance, reg: &RegParams, dual: f64) -> f64 {
    let rounded = round_to_feasible(plan.entries.view(), &inst.a, &inst.b);
    let primal = dot(rounded.as_slice().unwrap(), inst.c().as_slice().unwrap()) + omega_value(rounded.view(), reg);
    primal - dual
}

fn finish_trace(opts: &SolveOptions, trace: Vec<f64>, negate: bool) -> Vec<f64> {
    if !opts.record_trace {
        return Vec::new();
    }
    if negate {
        trace.into_iter().map(|v| -v).collect()
    } else {
        trace
    }
}

fn unsupported(formulation: Formulation, solver: SolverKind) -> OtError {
    OtError::InvalidParameter(format!("solver {} is not available for the {} formulation", solver.name(), formulation.name()))
}

/// Minimizes `obj` without constraints using the chosen backend.
fn minimize_unconstrained<O: optim::Objective>(
    obj: &mut O,
    x0: Vec<f64>,
    solver: SolverKind,
    opts: &SolveOptions,
    step0: f64,
) -> Minimized {
    let identity = |_: &mut [f64]| {};
    match solver {
        SolverKind::QuasiNewton => optim::lbfgs(obj, x0, opts.memory, opts.stop()),
        SolverKind::GradientDescent => optim::projected_gradient(obj, identity, x0, step0, opts.stop()),
        _ => optim::accelerated_projected_gradient(obj, identity, x0, step0, opts.stop()),
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Maximizes the smoothed dual `αᵀa + βᵀb − Σ_j δ_Ω(α + β_j 1 − c_j)` from
/// `α = 0, β = 0`.
pub fn solve_dual(inst: &Instance, reg: &RegParams, opts: &SolveOptions) -> Result<DualSolution> {
    opts.validate()?;
    reg.validate(inst.m())?;
    let solver = opts.solver.unwrap_or(SolverKind::QuasiNewton);
    if solver == SolverKind::Alternating {
        return alternating_minimization(inst, reg, opts);
    }
    let start = Instant::now();
    let (m, n) = (inst.m(), inst.n());
    let clamps = Cell::new(0usize);
    let mut obj = |x: &[f64]| {
        let e = dual_eval(&x[..m], &x[m..], inst, reg);
        clamps.set(clamps.get() + e.clamp_events);
        let mut g = e.grad_alpha;
        g.extend(e.grad_beta);
        g.iter_mut().for_each(|v| *v = -*v);
        (-e.value, g)
    };
    // The dual is γ-smooth in the entropy/L2 sense: steps of order γ are safe.
    let r = minimize_unconstrained(&mut obj, vec![0.0; m + n], solver, opts, reg.gamma);
    let (alpha, beta) = (r.x[..m].to_vec(), r.x[m..].to_vec());
    let (plan, plan_clamps) = objectives::plan_from_dual(&alpha, &beta, inst, reg);
    let objective = -r.value;
    let report = SolveReport {
        formulation: Formulation::Dual,
        solver,
        objective,
        objective_trace: finish_trace(opts, r.trace, true),
        iters: r.iters,
        converged: r.converged,
        grad_norm: r.residual,
        duality_gap: Some(duality_gap(&plan, inst, reg, objective)),
        gap_rounding: Some(FEASIBLE_ROUNDING.into()),
        plan_sparsity: plan.sparsity(),
        row_residual: plan.row_residual,
        col_residual: plan.col_residual,
        wall_time: start.elapsed().as_secs_f64(),
        clamp_events: clamps.get() + plan_clamps,
    };
    Ok(DualSolution { potentials: DualPotentials { alpha, beta: Some(beta) }, plan, report })
}

fn require_closed_form(reg: &RegParams) -> Result<()> {
    if !matches!(reg.kind, RegKind::Entropy | RegKind::SquaredL2) {
        return Err(OtError::UnsupportedRegularizer(reg.kind.name()));
    }
    Ok(())
}

/// Maximizes the smoothed semi-dual `αᵀa − Σ_j b_j max_Ω_j(α − c_j)` from
/// `α = 0`. The reported `β` is the exact block maximizer of the smoothed
/// dual for the final `α`.
pub fn solve_semidual(inst: &Instance, reg: &RegParams, opts: &SolveOptions) -> Result<DualSolution> {
    opts.validate()?;
    require_closed_form(reg)?;
    reg.validate(inst.m())?;
    let solver = opts.solver.unwrap_or(SolverKind::QuasiNewton);
    if solver == SolverKind::Alternating {
        return Err(unsupported(Formulation::Semidual, solver));
    }
    let start = Instant::now();
    let mut obj = |x: &[f64]| {
        let (v, mut g) = semi_dual_eval(x, inst, reg);
        g.iter_mut().for_each(|v| *v = -*v);
        (-v, g)
    };
    let r = minimize_unconstrained(&mut obj, vec![0.0; inst.m()], solver, opts, reg.gamma);
    let plan = objectives::plan_from_semidual(&r.x, inst, reg);
    let mut block = AlternatingMinimizer::with_alpha(inst, reg, r.x);
    block.update_beta();
    let (alpha, beta) = block.into_potentials();
    let objective = -r.value;
    let report = SolveReport {
        formulation: Formulation::Semidual,
        solver,
        objective,
        objective_trace: finish_trace(opts, r.trace, true),
        iters: r.iters,
        converged: r.converged,
        grad_norm: r.residual,
        duality_gap: Some(duality_gap(&plan, inst, reg, objective)),
        gap_rounding: Some(FEASIBLE_ROUNDING.into()),
        plan_sparsity: plan.sparsity(),
        row_residual: plan.row_residual,
        col_residual: plan.col_residual,
        wall_time: start.elapsed().as_secs_f64(),
        clamp_events: 0,
    };
    Ok(DualSolution { potentials: DualPotentials { alpha, beta: Some(beta) }, plan, report })
}

/// Exact block coordinate ascent on the smoothed dual (Sinkhorn for the
/// entropy). One iteration is a full `β`-then-`α` sweep; stops once a sweep
/// moves `(α, β)` by at most `grad_tol` in ∞-norm.
pub fn alternating_minimization(inst: &Instance, reg: &RegParams, opts: &SolveOptions) -> Result<DualSolution> {
    opts.validate()?;
    let start = Instant::now();
    let mut am = AlternatingMinimizer::new(inst, reg)?;
    let mut trace = vec![dual_eval(am.alpha(), am.beta(), inst, reg).value];
    let mut iters = 0;
    let mut converged = false;
    while iters < opts.max_iters {
        let change = am.sweep();
        iters += 1;
        if opts.record_trace {
            trace.push(dual_eval(am.alpha(), am.beta(), inst, reg).value);
        }
        if change <= opts.grad_tol {
            converged = true;
            break;
        }
    }
    let (alpha, beta) = am.into_potentials();
    let e = dual_eval(&alpha, &beta, inst, reg);
    let grad_norm = inf_norm(&e.grad_alpha).max(inf_norm(&e.grad_beta));
    let (plan, clamps) = objectives::plan_from_dual(&alpha, &beta, inst, reg);
    let report = SolveReport {
        formulation: Formulation::Dual,
        solver: SolverKind::Alternating,
        objective: e.value,
        objective_trace: finish_trace(opts, trace, false),
        iters,
        converged,
        grad_norm,
        duality_gap: Some(duality_gap(&plan, inst, reg, e.value)),
        gap_rounding: Some(FEASIBLE_ROUNDING.into()),
        plan_sparsity: plan.sparsity(),
        row_residual: plan.row_residual,
        col_residual: plan.col_residual,
        wall_time: start.elapsed().as_secs_f64(),
        clamp_events: clamps + e.clamp_events,
    };
    Ok(DualSolution { potentials: DualPotentials { alpha, beta: Some(beta) }, plan, report })
}

fn outer_product(inst: &Instance) -> Vec<f64> {
    let (a, b) = (inst.a.as_slice(), inst.b.as_slice());
    a.iter().flat_map(|ai| b.iter().map(move |bj| ai * bj)).collect()
}

fn primal_solver(formulation: Formulation, opts: &SolveOptions) -> Result<SolverKind> {
    match opts.solver.unwrap_or(SolverKind::AcceleratedProjectedGradient) {
        s @ (SolverKind::AcceleratedProjectedGradient | SolverKind::GradientDescent) => Ok(s),
        s => Err(unsupported(formulation, s)),
    }
}

fn run_primal<O: optim::Objective, P: Fn(&mut [f64])>(
    obj: &mut O,
    project: P,
    inst: &Instance,
    gamma: f64,
    solver: SolverKind,
    opts: &SolveOptions,
) -> Minimized {
    let x0 = outer_product(inst);
    match solver {
        SolverKind::GradientDescent => optim::projected_gradient(obj, project, x0, gamma, opts.stop()),
        _ => optim::accelerated_projected_gradient(obj, project, x0, gamma, opts.stop()),
    }
}

fn primal_report(
    formulation: Formulation,
    solver: SolverKind,
    r: Minimized,
    inst: &Instance,
    opts: &SolveOptions,
    start: Instant,
) -> PrimalSolution {
    let t = Array2::from_shape_vec((inst.m(), inst.n()), r.x).expect("shape matches");
    let plan = TransportPlan::new(t, &inst.a, &inst.b);
    let report = SolveReport {
        formulation,
        solver,
        objective: r.value,
        objective_trace: finish_trace(opts, r.trace, false),
        iters: r.iters,
        converged: r.converged,
        grad_norm: r.residual,
        duality_gap: None,
        gap_rounding: None,
        plan_sparsity: plan.sparsity(),
        row_residual: plan.row_residual,
        col_residual: plan.col_residual,
        wall_time: start.elapsed().as_secs_f64(),
        clamp_events: 0,
    };
    PrimalSolution { plan, report }
}

/// Minimizes `⟨T,C⟩ + (1/4γ)‖T1 − a‖² + (1/4γ)‖Tᵀ1 − b‖²` over `T ≥ 0`,
/// from `T = abᵀ`.
pub fn solve_relaxed_primal(inst: &Instance, rel: &RelaxationParams, opts: &SolveOptions) -> Result<PrimalSolution> {
    opts.validate()?;
    rel.validate()?;
    let solver = primal_solver(Formulation::Relaxed, opts)?;
    let start = Instant::now();
    let gamma = rel.gamma;
    let mut obj = |t: &[f64]| objectives::relaxed_eval(t, inst, gamma);
    let clamp = |t: &mut [f64]| t.iter_mut().for_each(|v| *v = v.max(0.0));
    let r = run_primal(&mut obj, clamp, inst, gamma, solver, opts);
    Ok(primal_report(Formulation::Relaxed, solver, r, inst, opts, start))
}

/// Minimizes `⟨T,C⟩ + (1/2γ)‖T1 − a‖²` over `{T ≥ 0, Tᵀ1 = b}`, projecting
/// every column onto the simplex of radius `b_j`.
pub fn solve_semi_relaxed_primal(
    inst: &Instance,
    rel: &RelaxationParams,
    opts: &SolveOptions,
) -> Result<PrimalSolution> {
    opts.validate()?;
    rel.validate()?;
    let solver = primal_solver(Formulation::SemiRelaxed, opts)?;
    let start = Instant::now();
    let gamma = rel.gamma;
    let (m, n) = (inst.m(), inst.n());
    let b = inst.b.as_slice();
    let mut obj = |t: &[f64]| objectives::semi_relaxed_eval(t, inst, gamma);
    let project = |t: &mut [f64]| {
        let mut col = vec![0.0; m];
        for (j, &bj) in b.iter().enumerate() {
            for i in 0..m {
                col[i] = t[i * n + j];
            }
            project_simplex_in_place(&mut col, bj);
            for i in 0..m {
                t[i * n + j] = col[i];
            }
        }
    };
    let r = run_primal(&mut obj, project, inst, gamma, solver, opts);
    Ok(primal_report(Formulation::SemiRelaxed, solver, r, inst, opts, start))
}
