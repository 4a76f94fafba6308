//! Per-group maximizers of `yᵀx − Ω(y)` over `y ≥ 0` for the two
//! group-lasso regularizers.

/// Exponent cap applied to `x_i / γ` before any exponential.
pub const EXP_CLAMP: f64 = 700.0;

/// Squared 2-norm plus group lasso: block soft-thresholding of `[x]_+ / γ`.
/// A group whose positive part vanishes maps exactly to zero.
pub(crate) fn l2_group_maximizer(x: &[f64], gamma: f64, mu: f64, out: &mut [f64]) {
    let mut norm2 = 0.0;
    for (o, &v) in out.iter_mut().zip(x) {
        *o = v.max(0.0) / gamma;
        norm2 += *o * *o;
    }
    if norm2 == 0.0 {
        return;
    }
    let shrink = 1.0 - mu / norm2.sqrt();
    if shrink <= 0.0 {
        out.iter_mut().for_each(|o| *o = 0.0);
    } else {
        out.iter_mut().for_each(|o| *o *= shrink);
    }
}

/// Principal branch of Lambert W evaluated at `z = exp(ln_z)`, without ever
/// forming `z`. Newton on `g(w) = w + ln w − ln z`, which is concave and
/// increasing, started below the root so iterates increase monotonically.
pub(crate) fn lambert_w_from_log(ln_z: f64) -> f64 {
    if ln_z < -700.0 {
        // W(z) = z − z² + …, with z below f64 resolution relative to 1.
        return ln_z.exp();
    }
    let mut w = if ln_z > 1.0 {
        ln_z - ln_z.ln()
    } else {
        let z = ln_z.exp();
        z / (1.0 + z)
    };
    for _ in 0..100 {
        let next = w * (1.0 + ln_z - w.ln()) / (1.0 + w);
        let next = if next > 0.0 { next } else { 0.5 * w };
        let done = (next - w).abs() <= 1e-16 * next;
        w = next;
        if done {
            break;
        }
    }
    w
}

fn scaled_norm(v: &[f64]) -> f64 {
    let scale = v.iter().cloned().fold(0.0, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    scale * v.iter().map(|x| (x / scale) * (x / scale)).sum::<f64>().sqrt()
}

/// Negative entropy plus group lasso, `Ω(y) = γ(Σ y log y + μ‖y‖)` on one
/// group. The maximizer is interior; stationarity
/// `log y_i + (μ/s) y_i = x_i/γ − 1` with `s = ‖y‖` gives
/// `y_i(s) = W((μ/s) e^{c_i}) / (μ/s)` and leaves a scalar equation
/// `‖y(s)‖ = s`, solved by Illinois regula falsi.
///
/// Returns the number of clamped exponents.
pub(crate) fn entropy_group_maximizer(x: &[f64], gamma: f64, mu: f64, out: &mut [f64]) -> usize {
    let mut clamps = 0;
    let c: Vec<f64> = x
        .iter()
        .map(|&v| {
            let r = v / gamma;
            if r > EXP_CLAMP {
                clamps += 1;
                EXP_CLAMP - 1.0
            } else {
                r - 1.0
            }
        })
        .collect();
    for (o, &ci) in out.iter_mut().zip(&c) {
        *o = ci.exp();
    }
    if mu == 0.0 {
        return clamps;
    }
    let s_hi = scaled_norm(out);
    if s_hi == 0.0 {
        return clamps;
    }

    let fill = |s: f64, out: &mut [f64]| -> f64 {
        let kappa = mu / s;
        let ln_kappa = kappa.ln();
        for (o, &ci) in out.iter_mut().zip(&c) {
            *o = lambert_w_from_log(ln_kappa + ci) / kappa;
        }
        scaled_norm(out) - s
    };

    // psi(s_hi) < 0 because y(s) < e^c componentwise; walk down for psi > 0.
    let mut hi = s_hi;
    let mut f_hi = fill(hi, out);
    let mut lo = hi;
    let mut f_lo = f_hi;
    for _ in 0..2000 {
        if f_lo > 0.0 {
            break;
        }
        hi = lo;
        f_hi = f_lo;
        lo *= 0.5;
        if lo < f64::MIN_POSITIVE {
            out.iter_mut().for_each(|o| *o = 0.0);
            return clamps;
        }
        f_lo = fill(lo, out);
    }
    if f_hi == 0.0 {
        fill(hi, out);
        return clamps;
    }

    let mut side = 0i8;
    let mut s = hi;
    for _ in 0..200 {
        s = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        if !(s > lo && s < hi) {
            s = 0.5 * (lo + hi);
        }
        let f = fill(s, out);
        if f == 0.0 || (hi - lo) <= 1e-15 * hi {
            break;
        }
        if f > 0.0 {
            lo = s;
            f_lo = f;
            if side == 1 {
                f_hi *= 0.5;
            }
            side = 1;
        } else {
            hi = s;
            f_hi = f;
            if side == -1 {
                f_lo *= 0.5;
            }
            side = -1;
        }
    }
    fill(s, out);
    clamps
}
