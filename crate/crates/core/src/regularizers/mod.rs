//! Strongly convex regularizers `Ω` and their two conjugates:
//!
//! * `δ_Ω(x) = sup_{y ≥ 0} yᵀx − Ω(y)`, a smoothed indicator of `x ≤ 0`
//!   used by the dual;
//! * `max_Ω(x) = sup_{y ∈ Δ} yᵀx − Ω(y)`, a smoothed max used by the
//!   semi-dual.
//!
//! Both gradients are the maximizing `y`.

mod group;
mod simplex;

use ndarray::ArrayView2;

use crate::error::{OtError, Result};
use crate::problem::{RegKind, RegParams};

pub use group::EXP_CLAMP;
pub use simplex::{project_simplex, simplex_threshold};
pub(crate) use simplex::project_simplex_in_place;

/// Value and gradient of a conjugate, plus how many exponent arguments had to
/// be clamped at [`EXP_CLAMP`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateValueGrad {
    pub value: f64,
    pub grad: Vec<f64>,
    pub clamp_events: usize,
}

fn check_input(x: &[f64], reg: &RegParams) -> Result<()> {
    if x.is_empty() {
        return Err(OtError::InvalidParameter("empty argument".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(OtError::NonFiniteInput("conjugate argument".into()));
    }
    reg.validate(x.len())
}

/// `δ_Ω(x)` and its gradient.
pub fn delta_omega(x: &[f64], reg: &RegParams) -> Result<ConjugateValueGrad> {
    check_input(x, reg)?;
    let mut grad = vec![0.0; x.len()];
    let (value, clamp_events) = delta_omega_into(x, reg, &mut grad);
    Ok(ConjugateValueGrad { value, grad, clamp_events })
}

/// Unchecked kernel behind [`delta_omega`]; writes the gradient into `grad`
/// and returns `(value, clamp_events)`.
pub(crate) fn delta_omega_into(x: &[f64], reg: &RegParams, grad: &mut [f64]) -> (f64, usize) {
    let gamma = reg.gamma;
    match reg.kind {
        RegKind::Entropy => {
            let mut clamps = 0;
            let mut sum = 0.0;
            for (g, &v) in grad.iter_mut().zip(x) {
                let mut r = v / gamma;
                if r > EXP_CLAMP {
                    r = EXP_CLAMP;
                    clamps += 1;
                }
                *g = (r - 1.0).exp();
                sum += *g;
            }
            (gamma * sum, clamps)
        }
        RegKind::SquaredL2 => {
            let mut sum = 0.0;
            for (g, &v) in grad.iter_mut().zip(x) {
                let p = v.max(0.0);
                *g = p / gamma;
                sum += p * p;
            }
            (sum / (2.0 * gamma), 0)
        }
        RegKind::GroupLassoL2 | RegKind::GroupLassoEntropy => {
            let mut clamps = 0;
            let mut xg = Vec::new();
            let mut yg = Vec::new();
            for_each_group(reg, x.len(), |idx| {
                xg.clear();
                xg.extend(idx.iter().map(|&i| x[i]));
                yg.clear();
                yg.resize(idx.len(), 0.0);
                if reg.kind == RegKind::GroupLassoL2 {
                    group::l2_group_maximizer(&xg, gamma, reg.mu, &mut yg);
                } else {
                    clamps += group::entropy_group_maximizer(&xg, gamma, reg.mu, &mut yg);
                }
                for (&i, &y) in idx.iter().zip(&yg) {
                    grad[i] = y;
                }
            });
            let value = crate::problem::dot(x, grad) - omega_column(grad, reg);
            (value, clamps)
        }
    }
}

fn for_each_group(reg: &RegParams, m: usize, mut f: impl FnMut(&[usize])) {
    match &reg.groups {
        Some(groups) => groups.as_slice().iter().for_each(|g| f(g)),
        None => {
            let all: Vec<usize> = (0..m).collect();
            f(&all)
        }
    }
}

/// `max_Ω_j(x)` with `Ω_j(y) = Ω(b_j y) / b_j`, and its gradient (a point of
/// the simplex).
pub fn max_omega(x: &[f64], reg: &RegParams, bj: f64) -> Result<ConjugateValueGrad> {
    check_input(x, reg)?;
    if !(bj > 0.0 && bj.is_finite()) {
        return Err(OtError::InvalidParameter(format!("b_j must be > 0, got {bj}")));
    }
    if reg.kind.is_group_lasso() {
        return Err(OtError::UnsupportedRegularizer(reg.kind.name()));
    }
    let mut grad = vec![0.0; x.len()];
    let value = max_omega_into(x, reg, bj, &mut grad);
    Ok(ConjugateValueGrad { value, grad, clamp_events: 0 })
}

pub(crate) fn max_omega_into(x: &[f64], reg: &RegParams, bj: f64, grad: &mut [f64]) -> f64 {
    let gamma = reg.gamma;
    match reg.kind {
        RegKind::Entropy => {
            let top = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for (g, &v) in grad.iter_mut().zip(x) {
                *g = ((v - top) / gamma).exp();
                sum += *g;
            }
            grad.iter_mut().for_each(|g| *g /= sum);
            top + gamma * sum.ln() - gamma * bj.ln()
        }
        RegKind::SquaredL2 => {
            let scale = gamma * bj;
            for (g, &v) in grad.iter_mut().zip(x) {
                *g = v / scale;
            }
            project_simplex_in_place(grad, 1.0);
            let lin = crate::problem::dot(x, grad);
            let sq: f64 = grad.iter().map(|y| y * y).sum();
            lin - 0.5 * scale * sq
        }
        RegKind::GroupLassoEntropy | RegKind::GroupLassoL2 => {
            unreachable!("group-lasso smoothed max is rejected before evaluation")
        }
    }
}

fn xlogx(t: f64) -> f64 {
    if t > 0.0 {
        t * t.ln()
    } else {
        0.0
    }
}

/// `Ω(y)` for a single column.
pub(crate) fn omega_column(y: &[f64], reg: &RegParams) -> f64 {
    let gamma = reg.gamma;
    let base = match reg.kind {
        RegKind::Entropy | RegKind::GroupLassoEntropy => y.iter().map(|&t| xlogx(t)).sum::<f64>(),
        RegKind::SquaredL2 | RegKind::GroupLassoL2 => 0.5 * y.iter().map(|t| t * t).sum::<f64>(),
    };
    let penalty = if reg.kind.is_group_lasso() && reg.mu > 0.0 {
        let mut total = 0.0;
        for_each_group(reg, y.len(), |idx| {
            total += idx.iter().map(|&i| y[i] * y[i]).sum::<f64>().sqrt();
        });
        reg.mu * total
    } else {
        0.0
    };
    gamma * (base + penalty)
}

/// `Σ_j Ω(t_j)` over the columns of a plan; `0 log 0 = 0`.
pub fn omega_value(plan: ArrayView2<f64>, reg: &RegParams) -> f64 {
    let mut col = vec![0.0; plan.nrows()];
    (0..plan.ncols())
        .map(|j| {
            col.iter_mut().zip(plan.column(j)).for_each(|(c, &t)| *c = t);
            omega_column(&col, reg)
        })
        .sum()
}
