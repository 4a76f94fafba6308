//! Color transfer between two images through an OT plan between their
//! quantized palettes.
//!
//! Pipeline: quantize both images, build the squared Euclidean cost between
//! centroids, solve for a plan, move every source centroid to the barycenter
//! of the target centroids it is sent to, and recolor the source pixels.

mod kmeans;
mod raster;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{OtError, Result};
use crate::oracle::solve_exact;
use crate::problem::{CostMatrix, Instance, RegParams, TransportPlan};
use crate::solvers::{
    solve_dual, solve_relaxed_primal, solve_semi_relaxed_primal, solve_semidual, RelaxationParams, SolveOptions,
    SolveReport,
};

pub use kmeans::{quantize, Palette, MAX_LLOYD_ITERS, MOVE_TOL};
pub use raster::Raster;

/// `C_ij = ‖x_i − y_j‖²` between two centroid lists.
pub fn cost_between(x: &[[f64; 3]], y: &[[f64; 3]]) -> Result<CostMatrix> {
    CostMatrix::new(Array2::from_shape_fn((x.len(), y.len()), |(i, j)| kmeans::dist2(&x[i], &y[j])))
}

/// Squared Euclidean RGB cost between palettes.
pub fn build_cost(p: &Palette, q: &Palette) -> Result<CostMatrix> {
    cost_between(&p.centroids, &q.centroids)
}

/// Row sums below this leave a centroid untouched.
pub const EMPTY_ROW_MASS: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub centroids: Vec<[f64; 3]>,
    /// Rows whose mass was below [`EMPTY_ROW_MASS`]; they keep their
    /// original centroid.
    pub empty_rows: Vec<usize>,
}

/// `x̂_i = Σ_j T_ij y_j / Σ_j T_ij`, clamped to `[0, 1]`.
pub fn barycentric_project(plan: &TransportPlan, targets: &[[f64; 3]], originals: &[[f64; 3]]) -> Result<Projection> {
    let (m, n) = plan.shape();
    if targets.len() != n || originals.len() != m {
        return Err(OtError::DimensionMismatch(format!(
            "plan is {m}x{n}, {} originals and {} targets",
            originals.len(),
            targets.len()
        )));
    }
    let mut centroids = Vec::with_capacity(m);
    let mut empty_rows = Vec::new();
    for (i, row) in plan.entries.rows().into_iter().enumerate() {
        let mass = row.sum();
        if mass < EMPTY_ROW_MASS {
            empty_rows.push(i);
            centroids.push(originals[i]);
            continue;
        }
        // Incremental weighted mean: exact when a single target is used.
        let (mut x, mut seen) = ([0.0; 3], 0.0);
        for (&t, y) in row.iter().zip(targets) {
            if t > 0.0 {
                seen += t;
                let r = t / seen;
                for d in 0..3 {
                    x[d] += r * (y[d] - x[d]);
                }
            }
        }
        centroids.push(x.map(|v| v.clamp(0.0, 1.0)));
    }
    Ok(Projection { centroids, empty_rows })
}

/// Replaces every pixel with the new color of its cluster.
pub fn recolor(image: &Raster, palette: &Palette, new_centroids: &[[f64; 3]]) -> Result<Raster> {
    if new_centroids.len() != palette.len() {
        return Err(OtError::DimensionMismatch(format!(
            "{} new colors for a palette of {}",
            new_centroids.len(),
            palette.len()
        )));
    }
    if palette.assignments.len() != image.len() {
        return Err(OtError::DimensionMismatch("palette was built for a different image".into()));
    }
    let pixels = palette.assignments.iter().map(|&c| new_centroids[c]).collect();
    Ok(Raster { width: image.width, height: image.height, pixels, alpha: image.alpha.clone() })
}

/// How the plan between palettes is computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanMethod {
    Dual(RegParams),
    Semidual(RegParams),
    Relaxed(RelaxationParams),
    SemiRelaxed(RelaxationParams),
    Exact,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferConfig {
    pub k: usize,
    pub seed: u64,
    pub method: PlanMethod,
    pub opts: SolveOptions,
    /// Recolor the target image with the source palette instead, using `Tᵀ`.
    pub reverse: bool,
}

#[derive(Debug, Clone)]
pub struct TransferOutput {
    pub image: Raster,
    pub source_palette: Palette,
    pub target_palette: Palette,
    /// Plan from the source palette (rows) to the target palette (columns).
    pub plan: TransportPlan,
    /// `None` for the exact method.
    pub report: Option<SolveReport>,
    pub empty_rows: Vec<usize>,
}

/// Solves one palette-to-palette instance with the requested method.
pub fn palette_plan(inst: &Instance, method: &PlanMethod, opts: &SolveOptions) -> Result<(TransportPlan, Option<SolveReport>)> {
    Ok(match method {
        PlanMethod::Dual(reg) => {
            let s = solve_dual(inst, reg, opts)?;
            (s.plan, Some(s.report))
        }
        PlanMethod::Semidual(reg) => {
            let s = solve_semidual(inst, reg, opts)?;
            (s.plan, Some(s.report))
        }
        PlanMethod::Relaxed(rel) => {
            let s = solve_relaxed_primal(inst, rel, opts)?;
            (s.plan, Some(s.report))
        }
        PlanMethod::SemiRelaxed(rel) => {
            let s = solve_semi_relaxed_primal(inst, rel, opts)?;
            (s.plan, Some(s.report))
        }
        PlanMethod::Exact => (solve_exact(inst)?.plan, None),
    })
}

/// Full pipeline: quantize both images with the same seed, solve, project,
/// recolor.
pub fn transfer(source: &Raster, target: &Raster, config: &TransferConfig) -> Result<TransferOutput> {
    let p = quantize(source, config.k, config.seed)?;
    let q = quantize(target, config.k, config.seed)?;
    let inst = Instance::new(p.histogram.clone(), q.histogram.clone(), build_cost(&p, &q)?)?;
    let (plan, report) = palette_plan(&inst, &config.method, &config.opts)?;
    let (image, empty_rows) = if config.reverse {
        let flipped = TransportPlan::new(plan.entries.t().to_owned(), &inst.b, &inst.a);
        let proj = barycentric_project(&flipped, &p.centroids, &q.centroids)?;
        (recolor(target, &q, &proj.centroids)?, proj.empty_rows)
    } else {
        let proj = barycentric_project(&plan, &q.centroids, &p.centroids)?;
        (recolor(source, &p, &proj.centroids)?, proj.empty_rows)
    };
    Ok(TransferOutput { image, source_palette: p, target_palette: q, plan, report, empty_rows })
}
