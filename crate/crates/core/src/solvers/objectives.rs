//! Objective and gradient assembly for the four smooth formulations, and
//! recovery of transport plans from dual potentials.

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;

use crate::error::{OtError, Result};
use crate::problem::{dot, Instance, RegParams, TransportPlan};
use crate::regularizers::{delta_omega_into, max_omega_into};

/// Column fan-out kicks in above this many cells.
const PARALLEL_CELLS: usize = 1 << 15;

/// Evaluates `f` on every column index and returns the results in column
/// order, so any reduction over them is independent of the worker count.
pub(crate) fn map_columns<T, F>(inst: &Instance, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    let n = inst.n();
    if inst.m() * n >= PARALLEL_CELLS {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

/// Smoothed dual value and gradients.
#[derive(Debug, Clone)]
pub struct DualEval {
    pub value: f64,
    pub grad_alpha: Vec<f64>,
    pub grad_beta: Vec<f64>,
    pub clamp_events: usize,
}

fn check_len(name: &str, v: &[f64], expected: usize) -> Result<()> {
    if v.len() != expected {
        return Err(OtError::DimensionMismatch(format!("|{name}| = {}, expected {expected}", v.len())));
    }
    Ok(())
}

/// `αᵀa + βᵀb − Σ_j δ_Ω(α + β_j 1 − c_j)` and its gradient.
pub fn dual_objective_grad(alpha: &[f64], beta: &[f64], inst: &Instance, reg: &RegParams) -> Result<DualEval> {
    check_len("alpha", alpha, inst.m())?;
    check_len("beta", beta, inst.n())?;
    reg.validate(inst.m())?;
    Ok(dual_eval(alpha, beta, inst, reg))
}

pub(crate) fn dual_eval(alpha: &[f64], beta: &[f64], inst: &Instance, reg: &RegParams) -> DualEval {
    let c = inst.c();
    let m = inst.m();
    let columns = map_columns(inst, |j| {
        let x: Vec<f64> = (0..m).map(|i| alpha[i] + beta[j] - c[[i, j]]).collect();
        let mut y = vec![0.0; m];
        let (v, clamps) = delta_omega_into(&x, reg, &mut y);
        (v, y, clamps)
    });
    let mut value = dot(alpha, inst.a.as_slice()) + dot(beta, inst.b.as_slice());
    let mut grad_alpha = inst.a.as_slice().to_vec();
    let mut grad_beta = inst.b.as_slice().to_vec();
    let mut clamp_events = 0;
    for (j, (v, y, clamps)) in columns.into_iter().enumerate() {
        value -= v;
        clamp_events += clamps;
        let mut col_sum = 0.0;
        for (ga, yi) in grad_alpha.iter_mut().zip(&y) {
            *ga -= yi;
            col_sum += yi;
        }
        grad_beta[j] -= col_sum;
    }
    DualEval { value, grad_alpha, grad_beta, clamp_events }
}

fn require_closed_form(reg: &RegParams) -> Result<()> {
    if reg.kind.is_group_lasso() {
        return Err(OtError::UnsupportedRegularizer(reg.kind.name()));
    }
    Ok(())
}

/// `αᵀa − Σ_j b_j max_Ω_j(α − c_j)` and its gradient.
pub fn semi_dual_objective_grad(alpha: &[f64], inst: &Instance, reg: &RegParams) -> Result<(f64, Vec<f64>)> {
    check_len("alpha", alpha, inst.m())?;
    require_closed_form(reg)?;
    reg.validate(inst.m())?;
    Ok(semi_dual_eval(alpha, inst, reg))
}

pub(crate) fn semi_dual_eval(alpha: &[f64], inst: &Instance, reg: &RegParams) -> (f64, Vec<f64>) {
    let c = inst.c();
    let m = inst.m();
    let b = inst.b.as_slice();
    let columns = map_columns(inst, |j| {
        let x: Vec<f64> = (0..m).map(|i| alpha[i] - c[[i, j]]).collect();
        let mut y = vec![0.0; m];
        let v = max_omega_into(&x, reg, b[j], &mut y);
        (v, y)
    });
    let mut value = dot(alpha, inst.a.as_slice());
    let mut grad = inst.a.as_slice().to_vec();
    for (j, (v, y)) in columns.into_iter().enumerate() {
        value -= b[j] * v;
        for (g, yi) in grad.iter_mut().zip(&y) {
            *g -= b[j] * yi;
        }
    }
    (value, grad)
}

/// Column `j` of the plan is `∇δ_Ω(α + β_j 1 − c_j)`.
pub fn recover_plan_from_dual(alpha: &[f64], beta: &[f64], inst: &Instance, reg: &RegParams) -> Result<TransportPlan> {
    check_len("alpha", alpha, inst.m())?;
    check_len("beta", beta, inst.n())?;
    reg.validate(inst.m())?;
    Ok(plan_from_dual(alpha, beta, inst, reg).0)
}

pub(crate) fn plan_from_dual(alpha: &[f64], beta: &[f64], inst: &Instance, reg: &RegParams) -> (TransportPlan, usize) {
    let c = inst.c();
    let m = inst.m();
    let columns = map_columns(inst, |j| {
        let x: Vec<f64> = (0..m).map(|i| alpha[i] + beta[j] - c[[i, j]]).collect();
        let mut y = vec![0.0; m];
        let (_, clamps) = delta_omega_into(&x, reg, &mut y);
        (y, clamps)
    });
    let mut t = Array2::zeros((m, inst.n()));
    let mut clamps = 0;
    for (j, (y, k)) in columns.into_iter().enumerate() {
        clamps += k;
        t.column_mut(j).iter_mut().zip(y).for_each(|(d, s)| *d = s);
    }
    (TransportPlan::new(t, &inst.a, &inst.b), clamps)
}

/// Column `j` of the plan is `b_j ∇max_Ω_j(α − c_j)`, so column sums match
/// `b` by construction.
pub fn recover_plan_from_semidual(alpha: &[f64], inst: &Instance, reg: &RegParams) -> Result<TransportPlan> {
    check_len("alpha", alpha, inst.m())?;
    require_closed_form(reg)?;
    reg.validate(inst.m())?;
    Ok(plan_from_semidual(alpha, inst, reg))
}

pub(crate) fn plan_from_semidual(alpha: &[f64], inst: &Instance, reg: &RegParams) -> TransportPlan {
    let c = inst.c();
    let m = inst.m();
    let b = inst.b.as_slice();
    let columns = map_columns(inst, |j| {
        let x: Vec<f64> = (0..m).map(|i| alpha[i] - c[[i, j]]).collect();
        let mut y = vec![0.0; m];
        max_omega_into(&x, reg, b[j], &mut y);
        y
    });
    let mut t = Array2::zeros((m, inst.n()));
    for (j, y) in columns.into_iter().enumerate() {
        t.column_mut(j).iter_mut().zip(y).for_each(|(d, s)| *d = b[j] * s);
    }
    TransportPlan::new(t, &inst.a, &inst.b)
}

fn check_plan_shape(t: ArrayView2<f64>, inst: &Instance) -> Result<()> {
    if t.dim() != (inst.m(), inst.n()) {
        return Err(OtError::DimensionMismatch(format!(
            "plan is {:?}, instance is {}x{}",
            t.dim(),
            inst.m(),
            inst.n()
        )));
    }
    Ok(())
}

fn row_col_gaps(t: &[f64], inst: &Instance) -> (Vec<f64>, Vec<f64>) {
    let (m, n) = (inst.m(), inst.n());
    let mut rows: Vec<f64> = inst.a.as_slice().iter().map(|a| -a).collect();
    let mut cols: Vec<f64> = inst.b.as_slice().iter().map(|b| -b).collect();
    for i in 0..m {
        for j in 0..n {
            let v = t[i * n + j];
            rows[i] += v;
            cols[j] += v;
        }
    }
    (rows, cols)
}

/// `⟨T,C⟩ + (1/4γ)‖T1 − a‖² + (1/4γ)‖Tᵀ1 − b‖²` and its gradient.
pub fn relaxed_primal_objective_grad(t: ArrayView2<f64>, inst: &Instance, gamma: f64) -> Result<(f64, Array2<f64>)> {
    check_plan_shape(t, inst)?;
    let flat: Vec<f64> = t.iter().cloned().collect();
    let (v, g) = relaxed_eval(&flat, inst, gamma);
    Ok((v, Array2::from_shape_vec((inst.m(), inst.n()), g).expect("shape matches")))
}

pub(crate) fn relaxed_eval(t: &[f64], inst: &Instance, gamma: f64) -> (f64, Vec<f64>) {
    let n = inst.n();
    let c = inst.c().as_slice().expect("cost is standard layout");
    let (rows, cols) = row_col_gaps(t, inst);
    let value = dot(t, c)
        + (dot(&rows, &rows) + dot(&cols, &cols)) / (4.0 * gamma);
    let grad = (0..t.len())
        .map(|k| c[k] + (rows[k / n] + cols[k % n]) / (2.0 * gamma))
        .collect();
    (value, grad)
}

/// `⟨T,C⟩ + (1/2γ)‖T1 − a‖²` and its gradient; the column constraint
/// `Tᵀ1 = b` is left to the solver.
pub fn semi_relaxed_primal_objective_grad(
    t: ArrayView2<f64>,
    inst: &Instance,
    gamma: f64,
) -> Result<(f64, Array2<f64>)> {
    check_plan_shape(t, inst)?;
    let flat: Vec<f64> = t.iter().cloned().collect();
    let (v, g) = semi_relaxed_eval(&flat, inst, gamma);
    Ok((v, Array2::from_shape_vec((inst.m(), inst.n()), g).expect("shape matches")))
}

pub(crate) fn semi_relaxed_eval(t: &[f64], inst: &Instance, gamma: f64) -> (f64, Vec<f64>) {
    let n = inst.n();
    let c = inst.c().as_slice().expect("cost is standard layout");
    let (rows, _) = row_col_gaps(t, inst);
    let value = dot(t, c) + dot(&rows, &rows) / (2.0 * gamma);
    let grad = (0..t.len()).map(|k| c[k] + rows[k / n] / gamma).collect();
    (value, grad)
}
