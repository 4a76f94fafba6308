//! Domain types for discrete optimal transport and the basic quantities shared
//! by every solver: primal objective, marginal residuals and the c-transform.
//!
//! Matrices are stored dense and row-major: rows index the source histogram
//! `a` (length `m`), columns index the target histogram `b` (length `n`).

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{OtError, Result};

/// Histograms whose sum is within this distance of 1 are renormalized,
/// anything further away is rejected.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// A strictly positive probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram(Array1<f64>);

impl Histogram {
    pub fn new(weights: impl Into<Vec<f64>>) -> Result<Self> {
        let weights: Vec<f64> = weights.into();
        if weights.is_empty() {
            return Err(OtError::InvalidParameter("histogram must be non-empty".into()));
        }
        if let Some(i) = weights.iter().position(|w| !w.is_finite()) {
            return Err(OtError::NonFiniteInput(format!("histogram entry {i}")));
        }
        if let Some((index, &value)) = weights.iter().enumerate().find(|(_, &w)| w <= 0.0) {
            return Err(OtError::NonPositiveMass { index, value });
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(OtError::NotNormalized { sum });
        }
        Ok(Self(Array1::from(weights) / sum))
    }

    /// Normalizes arbitrary positive weights (counts, intensities) to unit mass.
    pub fn from_weights(weights: impl Into<Vec<f64>>) -> Result<Self> {
        let weights: Vec<f64> = weights.into();
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0 && sum.is_finite()) {
            return Err(OtError::InvalidParameter(format!("cannot normalize weights with sum {sum}")));
        }
        Self::new(weights.into_iter().map(|w| w / sum).collect::<Vec<_>>())
    }

    pub fn uniform(dim: usize) -> Self {
        assert!(dim > 0, "uniform histogram needs dim > 0");
        Self(Array1::from_elem(dim, 1.0 / dim as f64))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn weights(&self) -> &Array1<f64> {
        &self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice().expect("histogram storage is contiguous")
    }

    /// Shannon entropy `-Σ a_i log a_i`.
    pub fn entropy(&self) -> f64 {
        -self.0.iter().map(|&w| w * w.ln()).sum::<f64>()
    }

    pub fn squared_norm(&self) -> f64 {
        self.0.iter().map(|w| w * w).sum()
    }

    /// `‖a⁻¹‖_∞ = 1 / min_i a_i`.
    pub fn inverse_inf_norm(&self) -> f64 {
        1.0 / self.0.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Nonnegative, finite ground-cost matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix(Array2<f64>);

impl CostMatrix {
    pub fn new(entries: Array2<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(OtError::InvalidParameter("cost matrix must be non-empty".into()));
        }
        for ((row, col), &value) in entries.indexed_iter() {
            if !value.is_finite() {
                return Err(OtError::NonFiniteInput(format!("cost entry ({row}, {col})")));
            }
            if value < 0.0 {
                return Err(OtError::NegativeCost { row, col, value });
            }
        }
        Ok(Self(entries.as_standard_layout().into_owned()))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.0
    }

    /// Largest entry, i.e. `‖C‖_∞` for a nonnegative matrix.
    pub fn max_entry(&self) -> f64 {
        self.0.iter().cloned().fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(&self.0 * s)
    }
}

/// A validated `(a, b, C)` triple.
#[derive(Debug, Clone)]
pub struct Instance {
    pub a: Histogram,
    pub b: Histogram,
    pub cost: CostMatrix,
}

impl Instance {
    pub fn new(a: Histogram, b: Histogram, cost: CostMatrix) -> Result<Self> {
        validate_instance(&a, &b, &cost)?;
        Ok(Self { a, b, cost })
    }

    /// Validates raw vectors and matrix in one go.
    pub fn from_raw(a: Vec<f64>, b: Vec<f64>, cost: Array2<f64>) -> Result<Self> {
        Self::new(Histogram::new(a)?, Histogram::new(b)?, CostMatrix::new(cost)?)
    }

    pub fn m(&self) -> usize {
        self.a.dim()
    }

    pub fn n(&self) -> usize {
        self.b.dim()
    }

    pub fn c(&self) -> &Array2<f64> {
        self.cost.entries()
    }
}

/// Checks that `a`, `b` and `C` form a well-posed transport instance.
pub fn validate_instance(a: &Histogram, b: &Histogram, cost: &CostMatrix) -> Result<()> {
    if a.dim() != cost.rows() || b.dim() != cost.cols() {
        return Err(OtError::DimensionMismatch(format!(
            "|a| = {}, |b| = {}, C is {}x{}",
            a.dim(),
            b.dim(),
            cost.rows(),
            cost.cols()
        )));
    }
    for hist in [a, b] {
        if let Some((index, &value)) = hist.0.iter().enumerate().find(|(_, &w)| !(w > 0.0)) {
            return Err(OtError::NonPositiveMass { index, value });
        }
        let sum = hist.0.sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(OtError::NotNormalized { sum });
        }
    }
    Ok(())
}

/// A nonnegative transport plan together with its marginal violations
/// (∞-norm) for the histograms it was built against.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pub entries: Array2<f64>,
    pub row_residual: f64,
    pub col_residual: f64,
}

impl TransportPlan {
    pub fn new(entries: Array2<f64>, a: &Histogram, b: &Histogram) -> Self {
        debug_assert!(entries.iter().all(|&t| t >= 0.0), "plan entries must be nonnegative");
        let (row_residual, col_residual) = marginal_residuals(entries.view(), a, b);
        Self { entries, row_residual, col_residual }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.entries.dim()
    }

    pub fn row_sums(&self) -> Array1<f64> {
        self.entries.sum_axis(Axis(1))
    }

    pub fn col_sums(&self) -> Array1<f64> {
        self.entries.sum_axis(Axis(0))
    }

    /// Fraction of entries that are exactly zero.
    pub fn sparsity(&self) -> f64 {
        let zeros = self.entries.iter().filter(|&&t| t == 0.0).count();
        zeros as f64 / self.entries.len() as f64
    }

    pub fn nonzeros(&self) -> usize {
        self.entries.iter().filter(|&&t| t != 0.0).count()
    }
}

/// `(max_i |Σ_j T_ij − a_i|, max_j |Σ_i T_ij − b_j|)`.
pub fn marginal_residuals(t: ArrayView2<f64>, a: &Histogram, b: &Histogram) -> (f64, f64) {
    let rows = t.sum_axis(Axis(1));
    let cols = t.sum_axis(Axis(0));
    let row = rows.iter().zip(a.weights()).map(|(r, a)| (r - a).abs()).fold(0.0, f64::max);
    let col = cols.iter().zip(b.weights()).map(|(c, b)| (c - b).abs()).fold(0.0, f64::max);
    (row, col)
}

/// Dual variables `α ∈ ℝᵐ` and, unless eliminated, `β ∈ ℝⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualPotentials {
    pub alpha: Vec<f64>,
    pub beta: Option<Vec<f64>>,
}

impl DualPotentials {
    /// `αᵀa + βᵀb`, the unregularized dual objective.
    pub fn dual_value(&self, a: &Histogram, b: &Histogram) -> Option<f64> {
        let beta = self.beta.as_ref()?;
        Some(dot(&self.alpha, a.as_slice()) + dot(beta, b.as_slice()))
    }

    /// Largest violation of `α_i + β_j ≤ C_ij` (nonpositive when feasible).
    pub fn max_violation(&self, cost: &CostMatrix) -> Option<f64> {
        let beta = self.beta.as_ref()?;
        let mut worst = f64::NEG_INFINITY;
        for ((i, j), &c) in cost.entries().indexed_iter() {
            worst = worst.max(self.alpha[i] + beta[j] - c);
        }
        Some(worst)
    }
}

/// Kind of strongly convex regularizer applied to the columns of the plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegKind {
    Entropy,
    SquaredL2,
    GroupLassoEntropy,
    GroupLassoL2,
}

impl RegKind {
    pub fn name(self) -> &'static str {
        match self {
            RegKind::Entropy => "entropy",
            RegKind::SquaredL2 => "squared_l2",
            RegKind::GroupLassoEntropy => "group_lasso_entropy",
            RegKind::GroupLassoL2 => "group_lasso_l2",
        }
    }

    pub fn is_group_lasso(self) -> bool {
        matches!(self, RegKind::GroupLassoEntropy | RegKind::GroupLassoL2)
    }
}

/// Partition of the row indices `0..m` into disjoint non-empty groups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Groups(Vec<Vec<usize>>);

impl Groups {
    pub fn new(groups: Vec<Vec<usize>>, m: usize) -> Result<Self> {
        let mut seen = vec![false; m];
        for (g, group) in groups.iter().enumerate() {
            if group.is_empty() {
                return Err(OtError::InvalidGroups(format!("group {g} is empty")));
            }
            for &i in group {
                if i >= m {
                    return Err(OtError::InvalidGroups(format!("index {i} out of range for m = {m}")));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(OtError::InvalidGroups(format!("index {i} appears twice")));
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(OtError::InvalidGroups(format!("index {i} is not covered")));
        }
        Ok(Self(groups))
    }

    pub fn single(m: usize) -> Self {
        Self(vec![(0..m).collect()])
    }

    pub fn as_slice(&self) -> &[Vec<usize>] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.0.iter().map(Vec::len).sum()
    }
}

/// Regularizer selection and strength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegParams {
    pub kind: RegKind,
    pub gamma: f64,
    /// Group-lasso weight, ignored by the non-group kinds.
    pub mu: f64,
    /// Row groups; `None` means a single group holding every row.
    pub groups: Option<Groups>,
}

impl RegParams {
    pub fn entropy(gamma: f64) -> Self {
        Self { kind: RegKind::Entropy, gamma, mu: 0.0, groups: None }
    }

    pub fn squared_l2(gamma: f64) -> Self {
        Self { kind: RegKind::SquaredL2, gamma, mu: 0.0, groups: None }
    }

    pub fn group_lasso_l2(gamma: f64, mu: f64, groups: Option<Groups>) -> Self {
        Self { kind: RegKind::GroupLassoL2, gamma, mu, groups }
    }

    pub fn group_lasso_entropy(gamma: f64, mu: f64, groups: Option<Groups>) -> Self {
        Self { kind: RegKind::GroupLassoEntropy, gamma, mu, groups }
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(OtError::InvalidParameter(format!("gamma must be > 0, got {}", self.gamma)));
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(OtError::InvalidParameter(format!("mu must be >= 0, got {}", self.mu)));
        }
        if let Some(groups) = &self.groups {
            // Re-run the partition check against this m.
            Groups::new(groups.0.clone(), m)?;
        }
        Ok(())
    }
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn check_shape(t: ArrayView2<f64>, cost: &CostMatrix) -> Result<()> {
    if t.dim() != cost.entries().dim() {
        return Err(OtError::DimensionMismatch(format!(
            "plan is {:?}, cost is {:?}",
            t.dim(),
            cost.entries().dim()
        )));
    }
    Ok(())
}

/// `⟨T, C⟩`.
pub fn primal_value(t: ArrayView2<f64>, cost: &CostMatrix) -> Result<f64> {
    check_shape(t, cost)?;
    Ok(t.iter().zip(cost.entries().iter()).map(|(t, c)| t * c).sum())
}

/// `β_j = min_i (C_ij − α_i)`; ties resolve to the smallest row index.
pub fn c_transform(alpha: &[f64], cost: &CostMatrix) -> Result<Array1<f64>> {
    if alpha.len() != cost.rows() {
        return Err(OtError::DimensionMismatch(format!(
            "|alpha| = {}, C has {} rows",
            alpha.len(),
            cost.rows()
        )));
    }
    let c = cost.entries();
    Ok(Array1::from_iter((0..cost.cols()).map(|j| {
        let mut best = f64::INFINITY;
        for (i, &ai) in alpha.iter().enumerate() {
            let v = c[[i, j]] - ai;
            if v < best {
                best = v;
            }
        }
        best
    })))
}

/// Unsmoothed semi-dual `αᵀa − Σ_j b_j max_i (α_i − C_ij)`.
pub fn semi_dual_value(alpha: &[f64], inst: &Instance) -> Result<f64> {
    let beta = c_transform(alpha, &inst.cost)?;
    // max_i (α_i − C_ij) = −min_i (C_ij − α_i)
    Ok(dot(alpha, inst.a.as_slice()) + dot(beta.as_slice().unwrap(), inst.b.as_slice()))
}
