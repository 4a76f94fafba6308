//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::time::Instant;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use smoothot::bounds::{theorem1_bounds, theorem2_bounds, verify_sandwich};
use smoothot::colortransfer::{quantize, transfer, build_cost, PlanMethod, Raster, TransferConfig};
use smoothot::oracle::{solve_exact, value_errors};
use smoothot::problem::{Groups, Instance, RegKind, RegParams};
use smoothot::solvers::{
    dual_objective_grad, relaxed_primal_objective_grad, semi_dual_objective_grad, solve_dual,
    solve_relaxed_primal, solve_semi_relaxed_primal, solve_semidual, AlternatingMinimizer, RelaxationParams,
    SolveOptions,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn random_instance(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Instance {
    let a: Vec<f64> = (0..m).map(|_| rng.gen_range(0.05..1.0)).collect();
    let b: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let c = Array2::from_shape_fn((m, n), |_| rng.gen_range(0.0..1.0));
    let sa: f64 = a.iter().sum();
    let sb: f64 = b.iter().sum();
    Instance::from_raw(a.iter().map(|v| v / sa).collect(), b.iter().map(|v| v / sb).collect(), c).unwrap()
}

// ---------------------------------------------------------------------------
// Independent reference implementations.

/// Minimum over all greedy shipping sequences (each vertex of U(a,b) is
/// produced by shipping the leaves of its support tree first), with
/// commutation pruning and a dual-feasible lower bound for branch and bound.
fn brute_force_ot(a: &[f64], b: &[f64], c: &Array2<f64>) -> f64 {
    fn bound(ra: &[f64], rb: &[f64], c: &Array2<f64>) -> f64 {
        let rows: Vec<usize> = (0..ra.len()).filter(|&i| ra[i] > 0.0).collect();
        let cols: Vec<usize> = (0..rb.len()).filter(|&j| rb[j] > 0.0).collect();
        let u: Vec<f64> = rows.iter().map(|&i| cols.iter().map(|&j| c[[i, j]]).fold(f64::INFINITY, f64::min)).collect();
        let v: Vec<f64> = cols
            .iter()
            .map(|&j| rows.iter().zip(&u).map(|(&i, ui)| c[[i, j]] - ui).fold(f64::INFINITY, f64::min))
            .collect();
        let by_rows = rows.iter().zip(&u).map(|(&i, x)| ra[i] * x).sum::<f64>()
            + cols.iter().zip(&v).map(|(&j, x)| rb[j] * x).sum::<f64>();
        let v2: Vec<f64> = cols.iter().map(|&j| rows.iter().map(|&i| c[[i, j]]).fold(f64::INFINITY, f64::min)).collect();
        let u2: Vec<f64> = rows
            .iter()
            .map(|&i| cols.iter().zip(&v2).map(|(&j, vj)| c[[i, j]] - vj).fold(f64::INFINITY, f64::min))
            .collect();
        let by_cols = rows.iter().zip(&u2).map(|(&i, x)| ra[i] * x).sum::<f64>()
            + cols.iter().zip(&v2).map(|(&j, x)| rb[j] * x).sum::<f64>();
        by_rows.max(by_cols)
    }
    #[allow(clippy::too_many_arguments)]
    fn go(
        ra: &mut [f64],
        rb: &mut [f64],
        c: &Array2<f64>,
        order: &[(usize, usize)],
        cost: f64,
        prev: Option<(usize, usize)>,
        best: &mut f64,
    ) {
        if ra.iter().all(|&v| v == 0.0) || rb.iter().all(|&v| v == 0.0) {
            *best = best.min(cost);
            return;
        }
        if cost + bound(ra, rb, c) >= *best * (1.0 + 1e-12) + 1e-15 {
            return;
        }
        let n = rb.len();
        for &(i, j) in order {
            if ra[i] == 0.0 || rb[j] == 0.0 {
                continue;
            }
            if let Some((pi, pj)) = prev {
                if pi != i && pj != j && i * n + j < pi * n + pj {
                    continue;
                }
            }
            let (oa, ob) = (ra[i], rb[j]);
            let t = oa.min(ob);
            if (oa - ob).abs() <= 1e-14 {
                ra[i] = 0.0;
                rb[j] = 0.0;
            } else if oa < ob {
                ra[i] = 0.0;
                rb[j] = ob - oa;
            } else {
                rb[j] = 0.0;
                ra[i] = oa - ob;
            }
            go(ra, rb, c, order, cost + t * c[[i, j]], Some((i, j)), best);
            ra[i] = oa;
            rb[j] = ob;
        }
    }
    let mut order: Vec<(usize, usize)> = (0..a.len()).flat_map(|i| (0..b.len()).map(move |j| (i, j))).collect();
    order.sort_by(|x, y| c[*x].total_cmp(&c[*y]));
    let mut best = f64::INFINITY;
    go(&mut a.to_vec(), &mut b.to_vec(), c, &order, 0.0, None, &mut best);
    best
}

/// Central-difference gradient.
fn numeric_grad(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|k| {
            let orig = xp[k];
            xp[k] = orig + h;
            let fp = f(&xp);
            xp[k] = orig - h;
            let fm = f(&xp);
            xp[k] = orig;
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

fn rel_err(g: &[f64], r: &[f64]) -> f64 {
    let num = g.iter().zip(r).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den = g.iter().map(|x| x * x).sum::<f64>().sqrt().max(r.iter().map(|x| x * x).sum::<f64>().sqrt());
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// Synthetic raster: smooth color gradients with a seeded palette offset
/// and mild noise, so quantization has many distinct colors to work with.
fn synthetic_image(seed: u64, size: u32) -> Raster {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base: [f64; 3] = [rng.gen(), rng.gen(), rng.gen()];
    let tilt: [f64; 3] = [rng.gen_range(0.2..0.8), rng.gen_range(0.2..0.8), rng.gen_range(0.2..0.8)];
    let pixels = (0..size * size)
        .map(|k| {
            let x = (k % size) as f64 / size as f64;
            let y = (k / size) as f64 / size as f64;
            let w = [x, y, 0.5 * (x + y)];
            [0, 1, 2].map(|d| ((base[d] + tilt[d] * w[d]).fract() + rng.gen_range(-0.02..0.02)).clamp(0.0, 1.0))
        })
        .collect();
    Raster::new(size, size, pixels).unwrap()
}

// ---------------------------------------------------------------------------
// Criteria.

fn oracle_correctness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let (m, n) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
        let inst = random_instance(&mut rng, m, n);
        let exact = solve_exact(&inst).unwrap().value;
        let bf = brute_force_ot(inst.a.as_slice(), inst.b.as_slice(), inst.c());
        worst = worst.max((exact - bf).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome { pass: worst <= 1e-10 && secs < 10.0, detail: format!("max |simplex - brute force| = {worst:.2e} (tol 1e-10), {secs:.2} s (< 10 s)") }
}

fn theorem1_sandwich() -> Outcome {
    let start = Instant::now();
    let grad_tol = 1e-7;
    let opts = SolveOptions { grad_tol, max_iters: 20_000, ..Default::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let instances: Vec<Instance> = (0..50).map(|_| random_instance(&mut rng, 8, 8)).collect();
    let (mut checked, mut failed, mut unconverged) = (0, 0, 0);
    for inst in &instances {
        let ot = solve_exact(inst).unwrap().value;
        for kind in [RegKind::Entropy, RegKind::SquaredL2] {
            let bounds = theorem1_bounds(&inst.a, &inst.b, kind).unwrap();
            for gamma in [0.01, 0.1, 1.0] {
                let reg = RegParams { kind, gamma, mu: 0.0, groups: None };
                let sol = solve_semidual(inst, &reg, &opts).unwrap();
                unconverged += usize::from(!sol.report.converged);
                checked += 1;
                if !verify_sandwich(sol.report.objective, ot, bounds.lower, bounds.upper, gamma, grad_tol) {
                    failed += 1;
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: failed == 0 && secs < 120.0,
        detail: format!("{failed}/{checked} violations, {unconverged} unconverged, grad_tol {grad_tol:.0e}, {secs:.1} s (< 120 s)"),
    }
}

fn theorem2_sandwich() -> Outcome {
    let start = Instant::now();
    let grad_tol = 1e-7;
    let opts = SolveOptions { grad_tol, max_iters: 50_000, ..Default::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let instances: Vec<Instance> = (0..50).map(|_| random_instance(&mut rng, 8, 8)).collect();
    let (mut checked, mut failed, mut unconverged) = (0, 0, 0);
    let mut worst_excess: f64 = f64::NEG_INFINITY;
    for inst in &instances {
        let ot = solve_exact(inst).unwrap().value;
        let t2 = theorem2_bounds(&inst.a, &inst.b, &inst.cost).unwrap();
        for gamma in [0.01, 0.1, 1.0] {
            let rel = RelaxationParams::new(gamma).unwrap();
            let relaxed = solve_relaxed_primal(inst, &rel, &opts).unwrap();
            let semi = solve_semi_relaxed_primal(inst, &rel, &opts).unwrap();
            for (sol, l) in [(relaxed, t2.relaxed), (semi, t2.semi_relaxed)] {
                unconverged += usize::from(!sol.report.converged);
                checked += 1;
                worst_excess = worst_excess.max(sol.report.objective - ot);
                if !verify_sandwich(sol.report.objective, ot, -l, 0.0, gamma, grad_tol) {
                    failed += 1;
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: failed == 0 && secs < 120.0,
        detail: format!(
            "{failed}/{checked} violations, {unconverged} unconverged, max(value - OT) = {worst_excess:.2e}, {secs:.1} s (< 120 s)"
        ),
    }
}

fn gradient_checks() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let inst = random_instance(&mut rng, 6, 5);
    let (m, n) = (inst.m(), inst.n());
    let h = 1e-6;
    let mut worst = [0.0f64; 3];
    for _ in 0..20 {
        for reg in [RegParams::entropy(0.5), RegParams::squared_l2(0.5)] {
            let x: Vec<f64> = (0..m + n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let e = dual_objective_grad(&x[..m], &x[m..], &inst, &reg).unwrap();
            let g: Vec<f64> = e.grad_alpha.iter().chain(&e.grad_beta).cloned().collect();
            let f = |z: &[f64]| dual_objective_grad(&z[..m], &z[m..], &inst, &reg).unwrap().value;
            worst[0] = worst[0].max(rel_err(&g, &numeric_grad(&f, &x, h)));

            let alpha: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let (_, g) = semi_dual_objective_grad(&alpha, &inst, &reg).unwrap();
            let f = |z: &[f64]| semi_dual_objective_grad(z, &inst, &reg).unwrap().0;
            worst[1] = worst[1].max(rel_err(&g, &numeric_grad(&f, &alpha, h)));
        }
        let t = Array2::from_shape_fn((m, n), |_| rng.gen_range(0.0..0.2));
        let (_, g) = relaxed_primal_objective_grad(t.view(), &inst, 0.5).unwrap();
        let flat: Vec<f64> = t.iter().cloned().collect();
        let f = |z: &[f64]| {
            let tz = Array2::from_shape_vec((m, n), z.to_vec()).unwrap();
            relaxed_primal_objective_grad(tz.view(), &inst, 0.5).unwrap().0
        };
        worst[2] = worst[2].max(rel_err(g.as_slice().unwrap(), &numeric_grad(&f, &flat, h)));
    }
    Outcome {
        pass: worst.iter().all(|&w| w <= 1e-5),
        detail: format!(
            "max relative error: dual {:.1e}, semi-dual {:.1e}, relaxed primal {:.1e} (tol 1e-5)",
            worst[0], worst[1], worst[2]
        ),
    }
}

fn sinkhorn_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let inst = random_instance(&mut rng, 16, 16);
    let gamma = 0.1;
    let reg = RegParams::entropy(gamma);
    let c = inst.c();
    let (a, b) = (inst.a.as_slice(), inst.b.as_slice());
    let k = c.mapv(|v| (-v / gamma).exp());
    // Plain Sinkhorn scaling, u = exp(α/γ − 1), v = exp(β/γ), from α = 0.
    let mut u = vec![(-1.0f64).exp(); 16];
    let mut v = vec![1.0; 16];
    let mut am = AlternatingMinimizer::new(&inst, &reg).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        for j in 0..16 {
            v[j] = b[j] / (0..16).map(|i| k[[i, j]] * u[i]).sum::<f64>();
        }
        for i in 0..16 {
            u[i] = a[i] / (0..16).map(|j| k[[i, j]] * v[j]).sum::<f64>();
        }
        am.sweep();
        for (x, y) in am.alpha().iter().map(|al| (al / gamma - 1.0).exp()).zip(&u) {
            worst = worst.max((x - y).abs() / y.abs());
        }
        for (x, y) in am.beta().iter().map(|be| (be / gamma).exp()).zip(&v) {
            worst = worst.max((x - y).abs() / y.abs());
        }
    }
    Outcome { pass: worst <= 1e-10, detail: format!("max relative deviation of scalings over 100 sweeps = {worst:.2e} (tol 1e-10)") }
}

fn dual_semidual_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let opts = SolveOptions { grad_tol: 1e-8, max_iters: 20_000, ..Default::default() };
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let inst = random_instance(&mut rng, 16, 16);
        for reg in [RegParams::entropy(0.1), RegParams::squared_l2(0.1)] {
            let d = solve_dual(&inst, &reg, &opts).unwrap().report.objective;
            let s = solve_semidual(&inst, &reg, &opts).unwrap().report.objective;
            worst = worst.max((d - s).abs() / d.abs().max(s.abs()));
        }
    }
    Outcome { pass: worst <= 1e-5, detail: format!("max relative difference = {worst:.2e} (tol 1e-5)") }
}

fn sparsity_dichotomy() -> Outcome {
    let p = quantize(&synthetic_image(7, 64), 32, 1).unwrap();
    let q = quantize(&synthetic_image(8, 64), 32, 1).unwrap();
    let inst = Instance::new(p.histogram.clone(), q.histogram.clone(), build_cost(&p, &q).unwrap()).unwrap();
    let opts = SolveOptions::default();
    let entropy: Vec<f64> = [0.1, 1.0]
        .iter()
        .map(|&g| solve_semidual(&inst, &RegParams::entropy(g), &opts).unwrap().report.plan_sparsity)
        .collect();
    let l2: Vec<(f64, f64)> = [1e-2, 1e-1, 1.0, 10.0]
        .iter()
        .map(|&g| (g, solve_semidual(&inst, &RegParams::squared_l2(g), &opts).unwrap().report.plan_sparsity))
        .collect();
    let exact = solve_exact(&inst).unwrap();
    let (best_gamma, best) = l2.iter().cloned().fold((0.0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    let nnz = exact.plan.nonzeros();
    // The 94% figure is a percentage rounded to integers; m+n−1 nonzeros of
    // 1024 is 93.85%.
    let pass = entropy.iter().all(|&s| s == 0.0) && best >= 0.8 && nnz <= inst.m() + inst.n() - 1 && (100.0 * exact.plan.sparsity()).round() >= 94.0;
    Outcome {
        pass,
        detail: format!(
            "entropy sparsity {:?}; squared 2-norm best {:.1}% at gamma {best_gamma} (per gamma {:?}); exact {nnz} nonzeros ({:.1}%)",
            entropy,
            100.0 * best,
            l2.iter().map(|(g, s)| format!("{g}:{:.0}%", 100.0 * s)).collect::<Vec<_>>(),
            100.0 * exact.plan.sparsity()
        ),
    }
}

/// Per-column maximization of `yᵀx − γ(½‖y‖² + μ Σ_G ‖y_G‖)` over `y ≥ 0` by
/// plain projected subgradient-free ascent on each group's radius and
/// direction separately: for fixed direction the optimum over the radius is
/// found by dense scanning, refined by golden sections.
fn brute_force_group_column(x: &[f64], groups: &[Vec<usize>], gamma: f64, mu: f64) -> Vec<f64> {
    let mut y = vec![0.0; x.len()];
    for g in groups {
        // Over y_G ≥ 0 with ‖y_G‖ = r, the linear term is maximized by the
        // normalized positive part of x_G (Cauchy–Schwarz on the orthant).
        let pos: Vec<f64> = g.iter().map(|&i| x[i].max(0.0)).collect();
        let norm = pos.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let f = |r: f64| r * norm - gamma * (0.5 * r * r + mu * r);
        let hi = 2.0 * norm / gamma + 1.0;
        let steps = 20_000;
        let (mut best_r, mut best_f) = (0.0, 0.0);
        for s in 1..=steps {
            let r = hi * s as f64 / steps as f64;
            if f(r) > best_f {
                best_r = r;
                best_f = f(r);
            }
        }
        if best_r > 0.0 {
            let (mut lo, mut up) = ((best_r - hi / steps as f64).max(0.0), best_r + hi / steps as f64);
            for _ in 0..200 {
                let m1 = lo + (up - lo) / 3.0;
                let m2 = up - (up - lo) / 3.0;
                if f(m1) < f(m2) {
                    lo = m1;
                } else {
                    up = m2;
                }
            }
            let r = 0.5 * (lo + up);
            if f(r) > 0.0 {
                for (&i, p) in g.iter().zip(&pos) {
                    y[i] = r * p / norm;
                }
            }
        }
    }
    y
}

fn group_sparsity() -> Outcome {
    let (m, n) = (8, 8);
    let groups = vec![(0..4).collect::<Vec<_>>(), (4..8).collect()];
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    // Column j is cheap from group j % 2 and expensive from the other one.
    let c = Array2::from_shape_fn((m, n), |(i, j)| {
        let cheap = (i / 4) == (j % 2);
        if cheap { rng.gen_range(0.0..0.2) } else { rng.gen_range(1.0..1.5) }
    });
    let inst = Instance::from_raw(vec![1.0 / 8.0; 8], vec![1.0 / 8.0; 8], c).unwrap();
    let (gamma, mu) = (0.1, 0.5);
    let reg = RegParams::group_lasso_l2(gamma, mu, Some(Groups::new(groups.clone(), m).unwrap()));
    let opts = SolveOptions { grad_tol: 1e-9, max_iters: 20_000, ..Default::default() };
    let sol = solve_dual(&inst, &reg, &opts).unwrap();
    let alpha = &sol.potentials.alpha;
    let beta = sol.potentials.beta.as_ref().unwrap();
    let t = &sol.plan.entries;
    let (mut columns_with_zero_group, mut pattern_ok, mut agree) = (0, true, 0.0f64);
    for j in 0..n {
        let x: Vec<f64> = (0..m).map(|i| alpha[i] + beta[j] - inst.c()[[i, j]]).collect();
        let reference = brute_force_group_column(&x, &groups, gamma, mu);
        let mut has_zero = false;
        for g in &groups {
            let zero = g.iter().all(|&i| t[[i, j]] == 0.0);
            let ref_norm = g.iter().map(|&i| reference[i].powi(2)).sum::<f64>().sqrt();
            has_zero |= zero;
            if zero != (ref_norm <= 1e-9) {
                pattern_ok = false;
            }
            if !zero && !g.iter().all(|&i| (t[[i, j]] > 0.0) == (x[i] > 0.0)) {
                pattern_ok = false;
            }
        }
        for i in 0..m {
            agree = agree.max((t[[i, j]] - reference[i]).abs());
        }
        columns_with_zero_group += usize::from(has_zero);
    }
    Outcome {
        pass: sol.report.converged && columns_with_zero_group == n && pattern_ok && agree <= 1e-6,
        detail: format!(
            "{columns_with_zero_group}/{n} columns with an all-zero group, patterns match brute force: {pattern_ok}, max |T - brute force| = {agree:.1e}"
        ),
    }
}

fn entropy_of(v: &[f64]) -> f64 {
    -v.iter().map(|&w| w * w.ln()).sum::<f64>()
}

fn tightness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let gamma = 0.1;
    let opts = SolveOptions { grad_tol: 1e-8, max_iters: 20_000, ..Default::default() };
    let (mut qualifying, mut l2_wins) = (0, 0);
    for _ in 0..50 {
        let inst = random_instance(&mut rng, 8, 8);
        let (a, b) = (inst.a.as_slice(), inst.b.as_slice());
        let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
        if entropy_of(a).min(entropy_of(b)) <= 0.5 * sq(a).min(sq(b)) {
            continue;
        }
        qualifying += 1;
        let exact = solve_exact(&inst).unwrap();
        let err = |reg: RegParams| {
            let s = solve_semidual(&inst, &reg, &opts).unwrap();
            value_errors(&s.plan, s.report.objective, &exact, &inst).unwrap().reg_value_error
        };
        if err(RegParams::squared_l2(gamma)) < err(RegParams::entropy(gamma)) {
            l2_wins += 1;
        }
    }
    let frac = l2_wins as f64 / qualifying.max(1) as f64;
    Outcome {
        pass: qualifying > 0 && frac >= 0.8,
        detail: format!("squared 2-norm tighter on {l2_wins}/{qualifying} qualifying instances ({:.0}%, need >= 80%)", 100.0 * frac),
    }
}

fn end_to_end_transfer() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let (src, dst) = (synthetic_image(21, 64), synthetic_image(22, 64));
    let config = TransferConfig {
        k: 32,
        seed: 3,
        method: PlanMethod::Semidual(RegParams::squared_l2(1.0)),
        opts: SolveOptions::default(),
        reverse: false,
    };
    let run = |name: &str| {
        let start = Instant::now();
        let out = transfer(&src, &dst, &config).unwrap();
        let path = dir.path().join(name);
        out.image.write_png(&path).unwrap();
        (out, std::fs::read(&path).unwrap(), start.elapsed().as_secs_f64(), path)
    };
    let (first, bytes1, secs, path) = run("a.png");
    let (second, bytes2, _, _) = run("b.png");
    let decoded = image::open(&path).map(|img| (img.width(), img.height()));
    let valid = matches!(decoded, Ok((64, 64)));
    let residual = first.plan.row_residual.max(first.plan.col_residual);
    let reproducible = bytes1 == bytes2 && first.plan == second.plan;
    Outcome {
        pass: secs < 10.0 && valid && residual <= 1e-4 && reproducible,
        detail: format!(
            "{secs:.2} s (< 10 s), valid 64x64 PNG: {valid}, max marginal residual {residual:.1e} (tol 1e-4), bit-reproducible: {reproducible}"
        ),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("oracle correctness", oracle_correctness),
        ("regularized value sandwich", theorem1_sandwich),
        ("relaxed primal sandwich", theorem2_sandwich),
        ("gradient checks", gradient_checks),
        ("Sinkhorn equivalence", sinkhorn_equivalence),
        ("dual / semi-dual agreement", dual_semidual_agreement),
        ("sparsity dichotomy", sparsity_dichotomy),
        ("group sparsity", group_sparsity),
        ("tightness comparison", tightness),
        ("end-to-end color transfer", end_to_end_transfer),
    ];
    let mut failures = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let outcome = check();
        failures += usize::from(!outcome.pass);
        println!("{} {:>2} {name}: {}", if outcome.pass { "PASS" } else { "FAIL" }, k + 1, outcome.detail);
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
