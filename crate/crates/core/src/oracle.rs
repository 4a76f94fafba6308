//! Exact unregularized OT by the transportation (network) simplex method.
//!
//! The basis is a spanning tree on the bipartite graph of `m` row nodes and
//! `n` column nodes, started from the north-west corner rule. Entering cells
//! follow Dantzig's most-negative reduced cost, switching to Bland's
//! smallest-index rule for as long as pivots stay degenerate.

use std::collections::VecDeque;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{OtError, Result};
use crate::problem::{DualPotentials, Instance, TransportPlan};

/// Largest `m·n` accepted by [`solve_exact`].
pub const MAX_EXACT_CELLS: usize = 1_000_000;

#[derive(Debug, Clone)]
pub struct ExactSolution {
    pub plan: TransportPlan,
    pub value: f64,
    pub dual: DualPotentials,
    /// Number of simplex pivots performed.
    pub pivots: usize,
}

struct Basis {
    m: usize,
    n: usize,
    /// Basic cells as flat indices `i·n + j`.
    cells: Vec<usize>,
    flow: Vec<f64>,
}

impl Basis {
    fn north_west(a: &[f64], b: &[f64]) -> Self {
        let (m, n) = (a.len(), b.len());
        let mut ra = a.to_vec();
        let mut rb = b.to_vec();
        let mut flow = vec![0.0; m * n];
        let mut cells = Vec::with_capacity(m + n - 1);
        let (mut i, mut j) = (0, 0);
        loop {
            let t = ra[i].min(rb[j]);
            flow[i * n + j] = t;
            cells.push(i * n + j);
            ra[i] -= t;
            rb[j] -= t;
            if i == m - 1 && j == n - 1 {
                break;
            }
            if j == n - 1 || (i < m - 1 && ra[i] <= rb[j]) {
                i += 1;
            } else {
                j += 1;
            }
        }
        debug_assert_eq!(cells.len(), m + n - 1);
        Basis { m, n, cells, flow }
    }

    /// Tree adjacency: node `k < m` is row `k`, node `m + j` is column `j`;
    /// entries are `(neighbour, cell)`.
    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.m + self.n];
        for &cell in &self.cells {
            let (i, j) = (cell / self.n, cell % self.n);
            adj[i].push((self.m + j, cell));
            adj[self.m + j].push((i, cell));
        }
        adj
    }

    /// Potentials with `u_0 = 0` and `u_i + v_j = C_ij` on basic cells.
    fn potentials(&self, adj: &[Vec<(usize, usize)>], c: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut pot = vec![f64::NAN; self.m + self.n];
        pot[0] = 0.0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(node) = queue.pop_front() {
            for &(next, cell) in &adj[node] {
                if pot[next].is_nan() {
                    pot[next] = c[cell] - pot[node];
                    queue.push_back(next);
                }
            }
        }
        let v = pot.split_off(self.m);
        (pot, v)
    }

    /// Cells on the tree path from `from` to `to`, in order.
    fn path(&self, adj: &[Vec<(usize, usize)>], from: usize, to: usize) -> Vec<usize> {
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; self.m + self.n];
        let mut seen = vec![false; self.m + self.n];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(node) = queue.pop_front() {
            if node == to {
                break;
            }
            for &(next, cell) in &adj[node] {
                if !seen[next] {
                    seen[next] = true;
                    parent[next] = Some((node, cell));
                    queue.push_back(next);
                }
            }
        }
        let mut cells = Vec::new();
        let mut node = to;
        while let Some((prev, cell)) = parent[node] {
            cells.push(cell);
            node = prev;
        }
        cells.reverse();
        cells
    }
}

/// Optimal vertex of `U(a, b)` for `min ⟨T, C⟩`, with optimal potentials.
pub fn solve_exact(inst: &Instance) -> Result<ExactSolution> {
    let (m, n) = (inst.m(), inst.n());
    if m * n > MAX_EXACT_CELLS {
        return Err(OtError::SizeLimitExceeded { cells: m * n, limit: MAX_EXACT_CELLS });
    }
    let c = inst.c().as_slice().expect("cost is standard layout");
    let eps = 1e-12 * (1.0 + inst.cost.max_entry());
    let mut basis = Basis::north_west(inst.a.as_slice(), inst.b.as_slice());
    let mut in_basis = vec![false; m * n];
    basis.cells.iter().for_each(|&k| in_basis[k] = true);

    let mut bland = false;
    let mut pivots = 0;
    let (u, v) = loop {
        let adj = basis.adjacency();
        let (u, v) = basis.potentials(&adj, c);
        let mut entering = None;
        let mut best = -eps;
        for k in 0..m * n {
            if in_basis[k] {
                continue;
            }
            let r = c[k] - u[k / n] - v[k % n];
            if r < best {
                entering = Some(k);
                if bland {
                    break;
                }
                best = r;
            }
        }
        let Some(enter) = entering else { break (u, v) };

        // Cycle: enter(+) then the tree path from column j back to row i.
        let (i, j) = (enter / n, enter % n);
        let cycle = basis.path(&adj, m + j, i);
        let mut theta = f64::INFINITY;
        let mut leave = usize::MAX;
        for &cell in cycle.iter().step_by(2) {
            let f = basis.flow[cell];
            if f < theta || (f == theta && cell < leave) {
                theta = f;
                leave = cell;
            }
        }
        for (pos, &cell) in cycle.iter().enumerate() {
            if pos % 2 == 0 {
                basis.flow[cell] -= theta;
            } else {
                basis.flow[cell] += theta;
            }
        }
        basis.flow[enter] = theta;
        basis.flow[leave] = 0.0;
        in_basis[leave] = false;
        in_basis[enter] = true;
        let slot = basis.cells.iter().position(|&k| k == leave).expect("leaving cell is basic");
        basis.cells[slot] = enter;
        bland = theta == 0.0;
        pivots += 1;
    };

    let entries = Array2::from_shape_vec((m, n), basis.flow).expect("shape matches");
    let value = entries.iter().zip(c).map(|(t, c)| t * c).sum();
    let plan = TransportPlan::new(entries, &inst.a, &inst.b);
    Ok(ExactSolution { plan, value, dual: DualPotentials { alpha: u, beta: Some(v) }, pivots })
}

fn check_same_shape(t: &TransportPlan, r: &TransportPlan) -> Result<()> {
    if t.shape() != r.shape() {
        return Err(OtError::DimensionMismatch(format!("{:?} vs {:?}", t.shape(), r.shape())));
    }
    Ok(())
}

/// `‖T − T*‖_F / ‖T*‖_F`.
pub fn plan_error(t: &TransportPlan, reference: &TransportPlan) -> Result<f64> {
    check_same_shape(t, reference)?;
    let denom = reference.entries.iter().map(|v| v * v).sum::<f64>().sqrt();
    if denom == 0.0 {
        return Err(OtError::ZeroReference);
    }
    let num = t.entries.iter().zip(&reference.entries).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    Ok(num / denom)
}

/// Errors of an approximate plan against the exact solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueErrors {
    /// `|⟨T,C⟩ − ⟨T*,C⟩| / ⟨T*,C⟩`; `None` when the exact value is zero.
    pub value_error: Option<f64>,
    /// `|v_reg − ⟨T*,C⟩|`.
    pub reg_value_error: f64,
    /// `‖T1 − a‖ + ‖Tᵀ1 − b‖` in 2-norms.
    pub marginal_error: f64,
}

pub fn value_errors(t: &TransportPlan, v_reg: f64, exact: &ExactSolution, inst: &Instance) -> Result<ValueErrors> {
    check_same_shape(t, &exact.plan)?;
    if t.shape() != (inst.m(), inst.n()) {
        return Err(OtError::DimensionMismatch("plan does not match the instance".into()));
    }
    let value: f64 = t.entries.iter().zip(inst.c().iter()).map(|(t, c)| t * c).sum();
    let value_error = (exact.value != 0.0).then(|| (value - exact.value).abs() / exact.value);
    let rows = t.row_sums();
    let cols = t.col_sums();
    let row_err = rows.iter().zip(inst.a.as_slice()).map(|(r, a)| (r - a) * (r - a)).sum::<f64>().sqrt();
    let col_err = cols.iter().zip(inst.b.as_slice()).map(|(c, b)| (c - b) * (c - b)).sum::<f64>().sqrt();
    Ok(ValueErrors { value_error, reg_value_error: (v_reg - exact.value).abs(), marginal_error: row_err + col_err })
}
