//! Dense active-set primal simplex for `min c.x  s.t.  A x (<= | >=) b, 0 <= x <= u`.
//!
//! A vertex is described by a working set of `n` active rows whose normals form
//! an invertible matrix `B`. The solver keeps `B^-1` explicitly, updates it by a
//! rank-one formula on every pivot and refactors it periodically. The start is
//! the origin, so every row must admit `x = 0`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpRow {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub rows: Vec<LpRow>,
    /// Upper bounds; lower bounds are all zero.
    pub upper: Vec<f64>,
}

impl LpProblem {
    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_vars();
        if self.upper.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: self.upper.len(),
            });
        }
        if self.objective.iter().chain(&self.upper).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite objective or bound".into()));
        }
        if self.upper.iter().any(|&u| u < 0.0) {
            return Err(Error::InvalidArgument("negative upper bound".into()));
        }
        for (k, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() || row.coeffs.iter().any(|&(i, v)| i >= n || !v.is_finite()) {
                return Err(Error::InvalidArgument(format!("row {k} is malformed")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    /// The first attempt stalled and the pure Bland restart succeeded.
    OptimalAfterRestart,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub status: LpStatus,
    pub pivots: usize,
    /// `max(A x - b)` over all rows and bounds, clipped at zero.
    pub primal_residual: f64,
    /// `max(-lambda)` over the final working set, clipped at zero.
    pub dual_residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimplexParams {
    pub feasibility_tol: f64,
    /// Relative to `max |c|`.
    pub optimality_tol: f64,
    pub refactor_every: usize,
    /// Consecutive zero-length pivots before switching to Bland's rule.
    pub degenerate_streak: usize,
    pub max_pivots: usize,
    /// Size of the right-hand-side shifts used during the primal phase.
    pub perturbation: f64,
}

impl Default for SimplexParams {
    fn default() -> Self {
        SimplexParams {
            feasibility_tol: 1e-9,
            optimality_tol: 1e-11,
            refactor_every: 100,
            degenerate_streak: 50,
            max_pivots: 200_000,
            perturbation: 1e-7,
        }
    }
}

/// Rows in `<=` form: general rows first, then `x_i <= u_i`, then `-x_i <= 0`.
struct Rows {
    n: usize,
    m: usize,
    general: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
}

impl Rows {
    fn new(p: &LpProblem) -> Self {
        let mut general = Vec::with_capacity(p.rows.len());
        let mut rhs = Vec::with_capacity(p.rows.len() + 2 * p.n_vars());
        for r in &p.rows {
            match r.sense {
                Sense::Le => {
                    general.push(r.coeffs.clone());
                    rhs.push(r.rhs);
                }
                Sense::Ge => {
                    general.push(r.coeffs.iter().map(|&(i, v)| (i, -v)).collect());
                    rhs.push(-r.rhs);
                }
            }
        }
        rhs.extend_from_slice(&p.upper);
        rhs.extend(std::iter::repeat_n(0.0, p.n_vars()));
        Rows {
            n: p.n_vars(),
            m: general.len(),
            general,
            rhs,
        }
    }

    fn len(&self) -> usize {
        self.m + 2 * self.n
    }

    /// Calls `f(i, a_ki)` for the nonzeros of row `k`.
    fn for_each(&self, k: usize, mut f: impl FnMut(usize, f64)) {
        if k < self.m {
            for &(i, v) in &self.general[k] {
                f(i, v);
            }
        } else if k < self.m + self.n {
            f(k - self.m, 1.0);
        } else {
            f(k - self.m - self.n, -1.0);
        }
    }

    fn dot(&self, k: usize, v: &[f64]) -> f64 {
        let mut s = 0.0;
        self.for_each(k, |i, a| s += a * v[i]);
        s
    }
}

enum Phase {
    Optimal,
    Stalled,
}

struct Tableau<'a> {
    rows: &'a Rows,
    rhs: Vec<f64>,
    c: &'a [f64],
    n: usize,
    /// Working-set row per basis position.
    work: Vec<usize>,
    in_work: Vec<bool>,
    /// Row-major `B^-1`; column `j` belongs to `work[j]`.
    binv: Vec<f64>,
    x: Vec<f64>,
    /// `c^T B^-1`, so the multipliers are `-y`.
    y: Vec<f64>,
    pivots: usize,
    since_refactor: usize,
}

impl<'a> Tableau<'a> {
    /// The origin with every lower bound active.
    fn at_origin(rows: &'a Rows, c: &'a [f64], rhs: Vec<f64>) -> Self {
        let n = rows.n;
        let m = rows.m;
        let mut binv = vec![0.0; n * n];
        for i in 0..n {
            binv[i * n + i] = -1.0;
        }
        Tableau {
            rows,
            rhs,
            c,
            n,
            work: (m + n..m + 2 * n).collect(),
            in_work: (0..rows.len()).map(|k| k >= m + n).collect(),
            binv,
            x: vec![0.0; n],
            y: c.iter().map(|v| -v).collect(),
            pivots: 0,
            since_refactor: 0,
        }
    }

    fn recompute_x(&mut self) {
        let n = self.n;
        for i in 0..n {
            self.x[i] = (0..n).map(|j| self.binv[i * n + j] * self.rhs[self.work[j]]).sum();
        }
    }

    fn refactor(&mut self) -> Result<()> {
        let n = self.n;
        let mut b = DMatrix::<f64>::zeros(n, n);
        for (j, &k) in self.work.iter().enumerate() {
            self.rows.for_each(k, |i, a| b[(j, i)] = a);
        }
        let inv = b
            .try_inverse()
            .ok_or_else(|| Error::InvalidArgument("singular working set".into()))?;
        for i in 0..n {
            for j in 0..n {
                self.binv[i * n + j] = inv[(i, j)];
            }
        }
        self.recompute_x();
        for j in 0..n {
            self.y[j] = (0..n).map(|i| self.c[i] * self.binv[i * n + j]).sum();
        }
        self.since_refactor = 0;
        Ok(())
    }

    fn slack(&self, k: usize) -> f64 {
        self.rhs[k] - self.rows.dot(k, &self.x)
    }

    /// `a_k^T B^-1`: the coordinates of row `k` in the working-set basis.
    fn coordinates(&self, k: usize) -> Vec<f64> {
        let n = self.n;
        let mut w = vec![0.0; n];
        self.rows.for_each(k, |i, a| {
            for (wj, b) in w.iter_mut().zip(&self.binv[i * n..(i + 1) * n]) {
                *wj += a * b;
            }
        });
        w
    }

    /// Replaces the working row at position `r` by row `k`.
    fn exchange(&mut self, r: usize, k: usize) -> Result<()> {
        let n = self.n;
        let w = self.coordinates(k);
        let wr = w[r];
        for i in 0..n {
            let row = &mut self.binv[i * n..(i + 1) * n];
            let col_r = row[r] / wr;
            for (j, (b, &wj)) in row.iter_mut().zip(&w).enumerate() {
                if j == r {
                    *b = col_r;
                } else {
                    *b -= wj * col_r;
                }
            }
        }
        let yr = self.y[r] / wr;
        for (j, (yj, &wj)) in self.y.iter_mut().zip(&w).enumerate() {
            if j == r {
                *yj = yr;
            } else {
                *yj -= wj * yr;
            }
        }
        self.in_work[self.work[r]] = false;
        self.in_work[k] = true;
        self.work[r] = k;
        self.pivots += 1;
        self.since_refactor += 1;
        Ok(())
    }

    fn maybe_refactor(&mut self, every: usize) -> Result<()> {
        if self.since_refactor >= every {
            self.refactor()?;
        }
        Ok(())
    }

    /// Primal simplex from a primal feasible vertex.
    fn primal(&mut self, params: &SimplexParams, dual_tol: f64, mut bland: bool) -> Result<Phase> {
        let mut streak = 0;
        loop {
            // Release the working row with the most negative multiplier
            // (smallest row index under Bland's rule).
            let mut leave: Option<(usize, f64)> = None;
            for (j, &k) in self.work.iter().enumerate() {
                let lambda = -self.y[j];
                if lambda >= -dual_tol {
                    continue;
                }
                let better = match leave {
                    None => true,
                    Some((bj, bl)) => {
                        if bland {
                            k < self.work[bj]
                        } else {
                            lambda < bl || (lambda == bl && k < self.work[bj])
                        }
                    }
                };
                if better {
                    leave = Some((j, lambda));
                }
            }
            let Some((r, _)) = leave else {
                return Ok(Phase::Optimal);
            };
            if self.pivots >= params.max_pivots {
                return Ok(Phase::Stalled);
            }
            let n = self.n;
            let d: Vec<f64> = (0..n).map(|i| -self.binv[i * n + r]).collect();
            // Ratio test, ties to the smallest row index.
            let mut enter: Option<(usize, f64)> = None;
            for k in 0..self.rows.len() {
                if self.in_work[k] {
                    continue;
                }
                let ad = self.rows.dot(k, &d);
                if ad <= params.feasibility_tol {
                    continue;
                }
                let step = self.slack(k).max(0.0) / ad;
                if enter.is_none_or(|(_, s)| step < s) {
                    enter = Some((k, step));
                }
            }
            let Some((k, step)) = enter else {
                return Err(Error::Unbounded);
            };
            for (xi, di) in self.x.iter_mut().zip(&d) {
                *xi += step * di;
            }
            self.exchange(r, k)?;
            if step * d.iter().fold(0.0f64, |a, v| a.max(v.abs())) <= params.feasibility_tol {
                streak += 1;
                if streak >= params.degenerate_streak {
                    bland = true;
                }
            } else {
                streak = 0;
            }
            self.maybe_refactor(params.refactor_every)?;
        }
    }

    /// Dual simplex from a dual feasible working set: brings violated rows
    /// into the working set while keeping the multipliers nonnegative.
    fn dual(&mut self, params: &SimplexParams) -> Result<Phase> {
        loop {
            let mut worst: Option<(usize, f64)> = None;
            for k in 0..self.rows.len() {
                if self.in_work[k] {
                    continue;
                }
                let s = self.slack(k);
                if s < -params.feasibility_tol && worst.is_none_or(|(_, w)| s < w) {
                    worst = Some((k, s));
                }
            }
            let Some((k, _)) = worst else {
                return Ok(Phase::Optimal);
            };
            if self.pivots >= params.max_pivots {
                return Ok(Phase::Stalled);
            }
            let w = self.coordinates(k);
            let mut leave: Option<(usize, f64)> = None;
            for (j, &wj) in w.iter().enumerate() {
                if wj <= params.feasibility_tol {
                    continue;
                }
                let ratio = (-self.y[j]).max(0.0) / wj;
                let better = match leave {
                    None => true,
                    Some((bj, br)) => ratio < br || (ratio == br && self.work[j] < self.work[bj]),
                };
                if better {
                    leave = Some((j, ratio));
                }
            }
            let Some((r, _)) = leave else {
                return Err(Error::InvalidArgument("LP is infeasible".into()));
            };
            self.exchange(r, k)?;
            self.recompute_x();
            self.maybe_refactor(params.refactor_every)?;
        }
    }

    fn solution(&self, status: LpStatus) -> LpSolution {
        let primal_residual = (0..self.rows.len())
            .map(|k| -self.slack(k))
            .fold(0.0f64, f64::max)
            + 0.0;
        let dual_residual = self.y.iter().fold(0.0f64, |a, &y| a.max(y));
        LpSolution {
            x: self.x.clone(),
            objective: self.c.iter().zip(&self.x).map(|(a, b)| a * b).sum(),
            status,
            pivots: self.pivots,
            primal_residual,
            dual_residual,
        }
    }
}

/// Fixed pseudo-random shifts in `[1, 2) * scale` for the general and upper
/// rows; lower bounds stay exact so the origin remains a vertex.
fn perturbed_rhs(rows: &Rows, scale: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut rhs = rows.rhs.clone();
    for v in rhs.iter_mut().take(rows.m + rows.n) {
        *v += scale * (1.0 + rng.random::<f64>());
    }
    rhs
}

/// Solves the LP; deterministic for a given problem.
///
/// The primal phase runs on right-hand sides shifted by tiny fixed amounts,
/// which removes the heavy degeneracy of decoding polytopes. The shifts are
/// then dropped and a dual phase restores exact feasibility. If either phase
/// stalls, the solve restarts on the exact problem with Bland's rule.
pub fn lp_solve(p: &LpProblem, params: &SimplexParams) -> Result<LpSolution> {
    p.validate()?;
    let rows = Rows::new(p);
    for k in 0..rows.m {
        if rows.rhs[k] < -params.feasibility_tol {
            return Err(Error::InfeasibleStart { row: k });
        }
    }
    let c = &p.objective;
    let cmax = c.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let dual_tol = params.optimality_tol * cmax.max(f64::MIN_POSITIVE);

    let mut t = Tableau::at_origin(&rows, c, perturbed_rhs(&rows, params.perturbation));
    if let Phase::Optimal = t.primal(params, dual_tol, false)? {
        t.rhs = rows.rhs.clone();
        t.refactor()?;
        if let Phase::Optimal = t.dual(params)? {
            if let Phase::Optimal = t.primal(params, dual_tol, true)? {
                return Ok(t.solution(LpStatus::Optimal));
            }
        }
    }
    let mut t = Tableau::at_origin(&rows, c, rows.rhs.clone());
    t.pivots = 0;
    match t.primal(params, dual_tol, true)? {
        Phase::Optimal => Ok(t.solution(LpStatus::OptimalAfterRestart)),
        Phase::Stalled => Err(Error::Stalled {
            iterations: params.max_pivots,
        }),
    }
}
