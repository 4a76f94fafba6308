//! Closed-form approximation-error constants.
//!
//! For a regularized value `OT_Ω`: `γL ≤ OT_Ω − OT ≤ γU`. For the relaxed
//! primals: `0 ≤ OT − OT_Φ ≤ γL` (relaxed) and `γL̃` (semi-relaxed).

use serde::{Deserialize, Serialize};

use crate::error::{OtError, Result};
use crate::problem::{CostMatrix, Histogram, Instance, RegKind};

/// Lower and upper constants of the regularized-value bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularizedBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Constants of the relaxed-primal bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelaxedBounds {
    /// `L` for the relaxed primal.
    pub relaxed: f64,
    /// `L̃` for the semi-relaxed primal.
    pub semi_relaxed: f64,
    pub nu1: f64,
    pub nu2: f64,
}

/// All constants for one instance and regularizer, as written into reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "U")]
    pub u: f64,
    #[serde(rename = "L_relaxed")]
    pub l_relaxed: f64,
    #[serde(rename = "L_semi_relaxed")]
    pub l_semi_relaxed: f64,
    pub nu1: f64,
    pub nu2: f64,
}

/// Entropy: `L = −H(a) − H(b)`, `U = −max{H(a), H(b)}`.
/// Squared 2-norm: `L = ½ Σ_ij (a_i/n + b_j/m − 1/(mn))²`,
/// `U = ½ min{‖a‖², ‖b‖²}`.
pub fn theorem1_bounds(a: &Histogram, b: &Histogram, kind: RegKind) -> Result<RegularizedBounds> {
    match kind {
        RegKind::Entropy => {
            let (ha, hb) = (a.entropy(), b.entropy());
            Ok(RegularizedBounds { lower: -ha - hb, upper: -ha.max(hb) })
        }
        RegKind::SquaredL2 => {
            let (m, n) = (a.dim() as f64, b.dim() as f64);
            let mut lower = 0.0;
            for &ai in a.as_slice() {
                for &bj in b.as_slice() {
                    let t = ai / n + bj / m - 1.0 / (m * n);
                    lower += t * t;
                }
            }
            Ok(RegularizedBounds { lower: 0.5 * lower, upper: 0.5 * a.squared_norm().min(b.squared_norm()) })
        }
        other => Err(OtError::UnsupportedRegularizer(other.name())),
    }
}

/// `ν₁ = max{(2 + n/m)‖a⁻¹‖∞, ‖b⁻¹‖∞}`, `ν₂ = max{‖a⁻¹‖∞, (2 + m/n)‖b⁻¹‖∞}`,
/// `L = ‖C‖∞² min{ν₁ + n, ν₂ + m}²`, `L̃ = 2‖C‖∞² ‖a⁻¹‖∞²`, where `‖C‖∞` is
/// the largest entry of `C`.
pub fn theorem2_bounds(a: &Histogram, b: &Histogram, cost: &CostMatrix) -> Result<RelaxedBounds> {
    let (m, n) = (a.dim() as f64, b.dim() as f64);
    if cost.rows() != a.dim() || cost.cols() != b.dim() {
        return Err(OtError::DimensionMismatch(format!(
            "C is {}x{}, histograms are {}, {}",
            cost.rows(),
            cost.cols(),
            a.dim(),
            b.dim()
        )));
    }
    let (ia, ib) = (a.inverse_inf_norm(), b.inverse_inf_norm());
    let nu1 = ((2.0 + n / m) * ia).max(ib);
    let nu2 = ia.max((2.0 + m / n) * ib);
    let c2 = cost.max_entry().powi(2);
    let k = (nu1 + n).min(nu2 + m);
    Ok(RelaxedBounds { relaxed: c2 * k * k, semi_relaxed: 2.0 * c2 * ia * ia, nu1, nu2 })
}

/// Both theorems for one instance.
pub fn bound_report(inst: &Instance, kind: RegKind) -> Result<BoundReport> {
    let t1 = theorem1_bounds(&inst.a, &inst.b, kind)?;
    let t2 = theorem2_bounds(&inst.a, &inst.b, &inst.cost)?;
    Ok(BoundReport {
        l: t1.lower,
        u: t1.upper,
        l_relaxed: t2.relaxed,
        l_semi_relaxed: t2.semi_relaxed,
        nu1: t2.nu1,
        nu2: t2.nu2,
    })
}

/// Checks `γ·lower ≤ measured − exact ≤ γ·upper` with additive slack
/// `10·grad_tol·(1 + |exact|)`.
///
/// For the relaxed primals pass `lower = −L, upper = 0` (the bound is on
/// `exact − measured`).
pub fn verify_sandwich(measured: f64, exact: f64, lower: f64, upper: f64, gamma: f64, grad_tol: f64) -> bool {
    let slack = 10.0 * grad_tol * (1.0 + exact.abs());
    let diff = measured - exact;
    gamma * lower - slack <= diff && diff <= gamma * upper + slack
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use proptest::prelude::*;
    use std::f64::consts::LN_2;

    fn uniform2() -> (Histogram, Histogram) {
        (Histogram::uniform(2), Histogram::uniform(2))
    }

    fn hist(v: Vec<f64>) -> Histogram {
        Histogram::from_weights(v).unwrap()
    }

    #[test]
    fn uniform_examples() {
        let (a, b) = uniform2();
        let e = theorem1_bounds(&a, &b, RegKind::Entropy).unwrap();
        assert!((e.lower + 2.0 * LN_2).abs() < 1e-15 && (e.upper + LN_2).abs() < 1e-15);
        let s = theorem1_bounds(&a, &b, RegKind::SquaredL2).unwrap();
        assert!((s.lower - 0.125).abs() < 1e-15 && (s.upper - 0.25).abs() < 1e-15);
        assert!(theorem1_bounds(&a, &b, RegKind::GroupLassoL2).is_err());
    }

    #[test]
    fn theorem2_uniform_two_by_two() {
        // Hand evaluation: ‖a⁻¹‖∞ = ‖b⁻¹‖∞ = 2, (2 + 1)·2 = 6 > 2 so ν₁ = ν₂ = 6;
        // min{6 + 2, 6 + 2}² = 64; L̃ = 2·1·2² = 8.
        let (a, b) = uniform2();
        let c = CostMatrix::new(ndarray::array![[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let t = theorem2_bounds(&a, &b, &c).unwrap();
        assert_eq!((t.nu1, t.nu2, t.relaxed, t.semi_relaxed), (6.0, 6.0, 64.0, 8.0));

        let zero = CostMatrix::new(Array2::zeros((2, 2))).unwrap();
        let t0 = theorem2_bounds(&a, &b, &zero).unwrap();
        assert_eq!((t0.relaxed, t0.semi_relaxed), (0.0, 0.0));
    }

    #[test]
    fn sandwich_examples() {
        assert!(verify_sandwich(1.0, 1.0, -0.5, 0.5, 0.1, 1e-6));
        let (gamma, upper) = (0.1, 0.25);
        assert!(!verify_sandwich(1.0 + 2.0 * gamma * upper, 1.0, -1.0, upper, gamma, 1e-6));
        assert!(!verify_sandwich(1.0 - 2.0 * gamma, 1.0, -1.0, upper, gamma, 1e-6));
    }

    #[test]
    fn report_serializes_symbol_names() {
        let inst = Instance::from_raw(vec![0.5, 0.5], vec![0.5, 0.5], ndarray::array![[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let r = bound_report(&inst, RegKind::SquaredL2).unwrap();
        let json = serde_json::to_value(r).unwrap();
        for key in ["L", "U", "L_relaxed", "L_semi_relaxed", "nu1", "nu2"] {
            assert!(json.get(key).is_some(), "{key}");
        }
    }

    fn weights(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.01f64..1.0, len)
    }

    proptest! {
        #[test]
        fn squared_lower_is_min_norm_affine_plan(a in weights(1..9), b in weights(1..9)) {
            let (a, b) = (hist(a), hist(b));
            let (m, n) = (a.dim(), b.dim());
            let t = Array2::from_shape_fn((m, n), |(i, j)| {
                a.as_slice()[i] / n as f64 + b.as_slice()[j] / m as f64 - 1.0 / (m * n) as f64
            });
            // T̄ satisfies both marginal constraints.
            for (r, ai) in t.rows().into_iter().zip(a.as_slice()) {
                prop_assert!((r.sum() - ai).abs() < 1e-12);
            }
            let s = theorem1_bounds(&a, &b, RegKind::SquaredL2).unwrap();
            let direct = 0.5 * t.iter().map(|v| v * v).sum::<f64>();
            prop_assert!((s.lower - direct).abs() <= 1e-14);
            prop_assert!(s.lower <= s.upper + 1e-15);
            prop_assert!(0.0 <= s.upper && s.upper <= 0.5);
        }

        #[test]
        fn entropy_chain(a in weights(1..9), b in weights(1..9)) {
            let (m, n) = (a.len() as f64, b.len() as f64);
            let e = theorem1_bounds(&hist(a), &hist(b), RegKind::Entropy).unwrap();
            prop_assert!(-m.ln() - n.ln() - 1e-12 <= e.lower);
            prop_assert!(e.lower <= e.upper && e.upper <= 1e-15);
        }

        #[test]
        fn squared_upper_beats_entropy_lower_when_entropy_is_large(a in weights(1..9), b in weights(1..9)) {
            let (a, b) = (hist(a), hist(b));
            let s = theorem1_bounds(&a, &b, RegKind::SquaredL2).unwrap();
            let e = theorem1_bounds(&a, &b, RegKind::Entropy).unwrap();
            if a.entropy().min(b.entropy()) > s.upper {
                prop_assert!(s.upper < e.lower.abs());
            }
        }

        #[test]
        fn theorem2_scales_quadratically(a in weights(1..7), b in weights(1..7), s in 0.1f64..10.0) {
            let (a, b) = (hist(a), hist(b));
            let c = CostMatrix::new(Array2::from_shape_fn((a.dim(), b.dim()), |(i, j)| ((i * 7 + j * 3) % 5) as f64)).unwrap();
            let t = theorem2_bounds(&a, &b, &c).unwrap();
            let ts = theorem2_bounds(&a, &b, &c.scaled(s).unwrap()).unwrap();
            prop_assert!((ts.relaxed - s * s * t.relaxed).abs() <= 1e-9 * ts.relaxed.max(1.0));
            prop_assert!((ts.semi_relaxed - s * s * t.semi_relaxed).abs() <= 1e-9 * ts.semi_relaxed.max(1.0));
            prop_assert!(t.relaxed >= 0.0 && t.semi_relaxed >= 0.0 && t.nu1 >= 0.0 && t.nu2 >= 0.0);
        }
    }
}
