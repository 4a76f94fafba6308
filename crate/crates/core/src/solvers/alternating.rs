//! Exact block maximization of the smoothed dual, alternating between
//! `β ← β(α)` and `α ← α(β)`.
//!
//! For the negative entropy both updates are closed-form log-sum-exp
//! expressions and the scheme reproduces Sinkhorn's row/column scaling. For
//! the squared 2-norm each update is the threshold of a Euclidean projection
//! onto the simplex.

use crate::error::{OtError, Result};
use crate::problem::{Instance, RegKind, RegParams};
use crate::regularizers::simplex_threshold;

/// Stateful two-block coordinate ascent on the smoothed dual.
#[derive(Debug, Clone)]
pub struct AlternatingMinimizer<'a> {
    inst: &'a Instance,
    reg: RegParams,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let top = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + values.map(|v| (v - top).exp()).sum::<f64>().ln()
}

impl<'a> AlternatingMinimizer<'a> {
    /// Starts from `α = 0, β = 0`.
    pub fn new(inst: &'a Instance, reg: &RegParams) -> Result<Self> {
        if !matches!(reg.kind, RegKind::Entropy | RegKind::SquaredL2) {
            return Err(OtError::UnsupportedRegularizer(reg.kind.name()));
        }
        reg.validate(inst.m())?;
        Ok(Self { inst, reg: reg.clone(), alpha: vec![0.0; inst.m()], beta: vec![0.0; inst.n()] })
    }

    /// Starts from the given `α` and `β = 0`, without validation.
    pub(crate) fn with_alpha(inst: &'a Instance, reg: &RegParams, alpha: Vec<f64>) -> Self {
        Self { inst, reg: reg.clone(), alpha, beta: vec![0.0; inst.n()] }
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn into_potentials(self) -> (Vec<f64>, Vec<f64>) {
        (self.alpha, self.beta)
    }

    /// `β ← argmax_β D(α, β)`.
    pub fn update_beta(&mut self) {
        let c = self.inst.c();
        let gamma = self.reg.gamma;
        let a = &self.alpha;
        let b = self.inst.b.as_slice();
        let m = self.inst.m();
        for (j, beta_j) in self.beta.iter_mut().enumerate() {
            *beta_j = match self.reg.kind {
                RegKind::Entropy => {
                    let lse = log_sum_exp((0..m).map(|i| (a[i] - c[[i, j]]) / gamma - 1.0));
                    gamma * b[j].ln() - gamma * lse
                }
                _ => {
                    let scale = gamma * b[j];
                    let x: Vec<f64> = (0..m).map(|i| (a[i] - c[[i, j]]) / scale).collect();
                    let (tau, _) = simplex_threshold(&x, 1.0);
                    -scale * tau
                }
            };
        }
    }

    /// `α ← argmax_α D(α, β)`.
    pub fn update_alpha(&mut self) {
        let c = self.inst.c();
        let gamma = self.reg.gamma;
        let beta = &self.beta;
        let a = self.inst.a.as_slice();
        let n = self.inst.n();
        for (i, alpha_i) in self.alpha.iter_mut().enumerate() {
            *alpha_i = match self.reg.kind {
                RegKind::Entropy => {
                    let lse = log_sum_exp((0..n).map(|j| (beta[j] - c[[i, j]]) / gamma - 1.0));
                    gamma * a[i].ln() - gamma * lse
                }
                _ => {
                    let scale = gamma * a[i];
                    let x: Vec<f64> = (0..n).map(|j| (beta[j] - c[[i, j]]) / scale).collect();
                    let (tau, _) = simplex_threshold(&x, 1.0);
                    -scale * tau
                }
            };
        }
    }

    /// One full sweep (`β` then `α`); returns the ∞-norm change of `(α, β)`.
    pub fn sweep(&mut self) -> f64 {
        let old_alpha = self.alpha.clone();
        let old_beta = self.beta.clone();
        self.update_beta();
        self.update_alpha();
        let da = self.alpha.iter().zip(&old_alpha).map(|(x, y)| (x - y).abs());
        let db = self.beta.iter().zip(&old_beta).map(|(x, y)| (x - y).abs());
        da.chain(db).fold(0.0, f64::max)
    }
}
