//! First-order and quasi-Newton minimizers over flat `f64` vectors.
//!
//! Every routine minimizes; maximization problems are handled by the caller
//! through negation.

use std::collections::VecDeque;

/// Objective returning value and gradient at a point.
pub(crate) trait Objective {
    fn eval(&mut self, x: &[f64]) -> (f64, Vec<f64>);
}

impl<F: FnMut(&[f64]) -> (f64, Vec<f64>)> Objective for F {
    fn eval(&mut self, x: &[f64]) -> (f64, Vec<f64>) {
        self(x)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Minimized {
    pub x: Vec<f64>,
    pub value: f64,
    /// ∞-norm of the gradient (or gradient mapping when constrained).
    pub residual: f64,
    pub iters: usize,
    pub converged: bool,
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct StopRule {
    pub max_iters: usize,
    pub tol: f64,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Room for rounding noise in sufficient-decrease tests.
fn slack(f: f64) -> f64 {
    1e-15 * f.abs().max(1e-300)
}

/// Upper-model test `f(x+d) ≤ f + gᵀd + ‖d‖²/2s` used by the projected
/// methods. When the value difference is swamped by rounding in `f`, the
/// equivalent curvature test `(g⁺ − g)ᵀd ≤ ‖d‖²/s` is used instead; it is
/// exact for quadratics and free of cancellation.
fn model_holds(f: f64, fnew: f64, g: &[f64], gnew: &[f64], d: &[f64], step: f64) -> bool {
    if !fnew.is_finite() {
        return false;
    }
    let dd = dot(d, d);
    if (fnew - f).abs() <= 1e-10 * f.abs() {
        let curv: f64 = gnew.iter().zip(g).zip(d).map(|((a, b), di)| (a - b) * di).sum();
        return curv <= dd / step;
    }
    fnew <= f + dot(g, d) + dd / (2.0 * step) + slack(f)
}

struct LineSearchPoint {
    x: Vec<f64>,
    f: f64,
    g: Vec<f64>,
}

/// Weak Wolfe line search by bracketing and bisection. Returns the last point
/// found to satisfy Armijo when the curvature condition cannot be met within
/// the evaluation budget.
fn weak_wolfe<O: Objective>(
    obj: &mut O,
    x: &[f64],
    f0: f64,
    g0d: f64,
    dir: &[f64],
    t_init: f64,
) -> Option<LineSearchPoint> {
    const C1: f64 = 1e-4;
    const C2: f64 = 0.9;
    let mut lo = 0.0;
    let mut hi = f64::INFINITY;
    let mut t = t_init;
    let mut armijo_ok: Option<LineSearchPoint> = None;
    for _ in 0..80 {
        let xt: Vec<f64> = x.iter().zip(dir).map(|(a, d)| a + t * d).collect();
        let (ft, gt) = obj.eval(&xt);
        if !ft.is_finite() || ft > f0 + C1 * t * g0d + slack(f0) {
            hi = t;
        } else {
            let gtd = dot(&gt, dir);
            let point = LineSearchPoint { x: xt, f: ft, g: gt };
            if gtd < C2 * g0d {
                lo = t;
                armijo_ok = Some(point);
            } else {
                return Some(point);
            }
        }
        t = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * lo };
        if hi.is_finite() && (hi - lo) <= 1e-16 * hi {
            break;
        }
    }
    armijo_ok
}

/// Limited-memory BFGS with weak Wolfe line search. Stops when the gradient
/// ∞-norm drops to `stop.tol`.
pub(crate) fn lbfgs<O: Objective>(obj: &mut O, x0: Vec<f64>, memory: usize, stop: StopRule) -> Minimized {
    let mut x = x0;
    let (mut f, mut g) = obj.eval(&x);
    let mut trace = vec![f];
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(memory);
    let mut iters = 0;
    let mut converged = inf_norm(&g) <= stop.tol;

    while !converged && iters < stop.max_iters {
        let mut dir = two_loop(&g, &history);
        let mut g0d = dot(&g, &dir);
        if !(g0d < 0.0) {
            history.clear();
            dir = g.iter().map(|v| -v).collect();
            g0d = dot(&g, &dir);
        }
        let t_init = if history.is_empty() { 1.0 / inf_norm(&g).max(1.0) } else { 1.0 };
        let mut step = weak_wolfe(obj, &x, f, g0d, &dir, t_init);
        if step.is_none() && !history.is_empty() {
            history.clear();
            dir = g.iter().map(|v| -v).collect();
            g0d = dot(&g, &dir);
            step = weak_wolfe(obj, &x, f, g0d, &dir, 1.0 / inf_norm(&g).max(1.0));
        }
        let Some(point) = step else { break };
        iters += 1;

        let s: Vec<f64> = point.x.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = point.g.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy > 0.0 {
            if history.len() == memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        x = point.x;
        f = point.f;
        g = point.g;
        trace.push(f);
        converged = inf_norm(&g) <= stop.tol;
    }
    Minimized { residual: inf_norm(&g), x, value: f, iters, converged, trace }
}

fn two_loop(g: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q: Vec<f64> = g.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * dot(s, &q);
        q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        let scale = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|v| *v *= scale);
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

/// Projected gradient descent with backtracking on the quadratic upper
/// model. With the identity projection this is plain gradient descent with
/// an Armijo-type test. The step can grow again by doubling after each
/// accepted iteration.
pub(crate) fn projected_gradient<O: Objective, P: Fn(&mut [f64])>(
    obj: &mut O,
    project: P,
    mut x: Vec<f64>,
    step0: f64,
    stop: StopRule,
) -> Minimized {
    project(&mut x);
    let (mut f, mut g) = obj.eval(&x);
    let mut trace = vec![f];
    let mut step = step0;
    let mut iters = 0;
    let mut residual = f64::INFINITY;
    let mut converged = false;

    while iters < stop.max_iters {
        let mut accepted = None;
        for _ in 0..100 {
            let mut xn: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - step * b).collect();
            project(&mut xn);
            let d: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
            let (fnew, gnew) = obj.eval(&xn);
            if model_holds(f, fnew, &g, &gnew, &d, step) {
                accepted = Some((xn, fnew, gnew, inf_norm(&d) / step));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fnew, gnew, gm)) = accepted else { break };
        iters += 1;
        residual = gm;
        x = xn;
        f = fnew;
        g = gnew;
        trace.push(f);
        if gm <= stop.tol {
            converged = true;
            break;
        }
        step *= 2.0;
    }
    Minimized { x, value: f, residual, iters, converged, trace }
}

/// FISTA with backtracking and adaptive (gradient and function value)
/// restart. The step starts at `step0` and is only ever halved. Returns the
/// iterate with the lowest objective seen.
pub(crate) fn accelerated_projected_gradient<O: Objective, P: Fn(&mut [f64])>(
    obj: &mut O,
    project: P,
    mut x: Vec<f64>,
    step0: f64,
    stop: StopRule,
) -> Minimized {
    project(&mut x);
    let (mut fx, gx) = obj.eval(&x);
    let mut trace = vec![fx];
    let mut y = x.clone();
    let (mut fy, mut gy) = (fx, gx);
    let mut momentum = 1.0f64;
    let mut step = step0;
    let mut best = (x.clone(), fx);
    let mut iters = 0;
    let mut residual = f64::INFINITY;
    let mut converged = false;

    while iters < stop.max_iters {
        let mut accepted = None;
        for _ in 0..100 {
            let mut xn: Vec<f64> = y.iter().zip(&gy).map(|(a, b)| a - step * b).collect();
            project(&mut xn);
            let d: Vec<f64> = xn.iter().zip(&y).map(|(a, b)| a - b).collect();
            let (fnew, gnew) = obj.eval(&xn);
            if model_holds(fy, fnew, &gy, &gnew, &d, step) {
                accepted = Some((xn, fnew, gnew, inf_norm(&d) / step, d));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fnew, gnew, gm, d)) = accepted else { break };
        iters += 1;
        residual = gm;
        trace.push(fnew);
        if fnew < best.1 {
            best = (xn.clone(), fnew);
        }
        if gm <= stop.tol {
            converged = true;
            best = if fnew <= best.1 { (xn, fnew) } else { best };
            break;
        }

        // Restart when the step opposes the momentum or the value went up.
        let progress: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let restart = -dot(&d, &progress) > 0.0 || fnew > fx;
        if restart {
            momentum = 1.0;
            y = xn.clone();
            fy = fnew;
            gy = gnew;
        } else {
            let next = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
            let beta = (momentum - 1.0) / next;
            momentum = next;
            y = xn.iter().zip(&progress).map(|(a, p)| a + beta * p).collect();
            project(&mut y);
            let (f_y, g_y) = obj.eval(&y);
            fy = f_y;
            gy = g_y;
        }
        x = xn;
        fx = fnew;
    }
    Minimized { x: best.0, value: best.1, residual, iters, converged, trace }
}
