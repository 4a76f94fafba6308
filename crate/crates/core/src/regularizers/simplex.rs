//! Euclidean projection onto the scaled simplex `{y ≥ 0, Σ y = r}`.

use crate::error::{OtError, Result};

/// Threshold `τ` and support size `ρ` of the projection: the projection is
/// `[x − τ]_+` and exactly `ρ` coordinates stay positive.
///
/// Sort-based rule: with `x` sorted decreasingly,
/// `ρ = max{i : x_[i] − (Σ_{r≤i} x_[r] − radius)/i > 0}` and
/// `τ = (Σ_{r≤ρ} x_[r] − radius)/ρ`.
pub fn simplex_threshold(x: &[f64], radius: f64) -> (f64, usize) {
    debug_assert!(!x.is_empty());
    let mut sorted = x.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut rho = 1;
    let mut rho_sum = sorted[0];
    for (k, &v) in sorted.iter().enumerate() {
        cumsum += v;
        let i = (k + 1) as f64;
        if v - (cumsum - radius) / i > 0.0 {
            rho = k + 1;
            rho_sum = cumsum;
        }
    }
    ((rho_sum - radius) / rho as f64, rho)
}

/// `argmin_{y ≥ 0, Σy = radius} ‖y − x‖²`.
pub fn project_simplex(x: &[f64], radius: f64) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(OtError::InvalidParameter("cannot project an empty vector".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(OtError::NonFiniteInput("simplex projection input".into()));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(OtError::InvalidParameter(format!("radius must be > 0, got {radius}")));
    }
    let mut y = x.to_vec();
    project_simplex_in_place(&mut y, radius);
    Ok(y)
}

pub(crate) fn project_simplex_in_place(x: &mut [f64], radius: f64) {
    let (tau, _) = simplex_threshold(x, radius);
    for v in x.iter_mut() {
        *v = (*v - tau).max(0.0);
    }
}
