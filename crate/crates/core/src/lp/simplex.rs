use super::{LpResult, LpStatus};
use crate::config::{fractional_part, Tolerances};
use crate::error::{Error, Result};
use crate::instance::{MilpInstance, Relation};

const NONBASIC: usize = usize::MAX;
/// Step lengths below this count as degenerate pivots.
const DEGENERATE_STEP: f64 = 1e-12;

/// Dense LP data of one instance, reused across solves with different boxes.
#[derive(Debug, Clone)]
pub struct LpModel {
    n: usize,
    m: usize,
    /// Row-major `m x n` constraint matrix.
    a: Vec<f64>,
    rhs: Vec<f64>,
    slack_lb: Vec<f64>,
    slack_ub: Vec<f64>,
    cost: Vec<f64>,
    is_integer: Vec<bool>,
    tol: Tolerances,
    max_iterations: usize,
}

impl LpModel {
    pub fn new(inst: &MilpInstance, tol: Tolerances) -> Self {
        let (n, m) = (inst.num_vars, inst.num_cons);
        let mut a = vec![0.0; m * n];
        let mut slack_lb = Vec::with_capacity(m);
        let mut slack_ub = Vec::with_capacity(m);
        for (i, row) in inst.cons.iter().enumerate() {
            for &(j, v) in &row.entries {
                a[i * n + j] += v;
            }
            let (lo, hi) = match row.rel {
                Relation::Le => (0.0, f64::INFINITY),
                Relation::Ge => (f64::NEG_INFINITY, 0.0),
                Relation::Eq => (0.0, 0.0),
            };
            slack_lb.push(lo);
            slack_ub.push(hi);
        }
        LpModel {
            n,
            m,
            a,
            rhs: inst.cons.iter().map(|r| r.rhs).collect(),
            slack_lb,
            slack_ub,
            cost: inst.obj.clone(),
            is_integer: inst.is_integer.clone(),
            tol,
            max_iterations: 1000 + 50 * (n + m),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tol
    }

    pub fn with_max_iterations(mut self, limit: usize) -> Self {
        self.max_iterations = limit;
        self
    }

    pub fn solve(&self, lb: &[f64], ub: &[f64]) -> Result<LpResult> {
        Ok(self.solve_with_basis(lb, ub)?.0)
    }

    /// Cold solve that also returns the optimal tableau for later warm starts.
    pub fn solve_with_basis(&self, lb: &[f64], ub: &[f64]) -> Result<(LpResult, Option<WarmStart>)> {
        self.check_box(lb, ub)?;
        if lb.iter().zip(ub).any(|(l, u)| l > u) {
            return Ok((LpResult::infeasible(0), None));
        }
        let mut tab = Tableau::build(self, lb, ub);
        if tab.num_artificial > 0 {
            let phase1: Vec<f64> = (0..tab.ncols)
                .map(|j| if j >= tab.first_artificial { 1.0 } else { 0.0 })
                .collect();
            tab.set_costs(phase1);
            // phase 1 is bounded below by zero
            let _ = tab.run(self.max_iterations, self.tol)?;
            let infeas = (tab.first_artificial..tab.ncols)
                .map(|j| tab.val[j])
                .fold(0.0_f64, f64::max);
            if infeas > self.tol.feasibility {
                return Ok((LpResult::infeasible(tab.iterations), None));
            }
            for j in tab.first_artificial..tab.ncols {
                tab.lb[j] = 0.0;
                tab.ub[j] = 0.0;
                if tab.basic_row[j] == NONBASIC {
                    tab.val[j] = 0.0;
                }
            }
        }
        let mut phase2 = vec![0.0; tab.ncols];
        phase2[..self.n].copy_from_slice(&self.cost);
        tab.set_costs(phase2);
        if !tab.run(self.max_iterations, self.tol)? {
            return Ok((self.unbounded(tab.iterations), None));
        }
        tab.refresh_basic_values(self);
        let res = self.optimal_result(&tab);
        Ok((res, Some(WarmStart { tab })))
    }

    /// Re-optimizes from a previous optimal tableau after the box changed.
    ///
    /// The old basis stays dual feasible, so the dual simplex restores primal
    /// feasibility; a primal pass then cleans up any drift. Falls back to a
    /// cold solve when the warm path runs long.
    pub fn resolve(
        &self,
        warm: &WarmStart,
        lb: &[f64],
        ub: &[f64],
    ) -> Result<(LpResult, Option<WarmStart>)> {
        self.check_box(lb, ub)?;
        if lb.iter().zip(ub).any(|(l, u)| l > u) {
            return Ok((LpResult::infeasible(0), None));
        }
        if warm.tab.age > MAX_WARM_AGE {
            return self.solve_with_basis(lb, ub);
        }
        let mut tab = warm.tab.clone();
        tab.iterations = 0;
        for j in 0..self.n {
            tab.lb[j] = lb[j];
            tab.ub[j] = ub[j];
            if tab.basic_row[j] == NONBASIC {
                let target = tab.nonbasic_target(j);
                let delta = target - tab.val[j];
                if delta != 0.0 {
                    tab.move_entering(j, 1.0, delta);
                    tab.val[j] = target;
                }
            }
        }
        let limit = 2 * (self.m + self.n) + 50;
        match tab.dual(limit, self.tol) {
            DualOutcome::Infeasible => {
                let it = tab.iterations;
                return Ok((LpResult::infeasible(it), None));
            }
            DualOutcome::GaveUp => {
                let (mut res, basis) = self.solve_with_basis(lb, ub)?;
                res.iterations += tab.iterations;
                return Ok((res, basis));
            }
            DualOutcome::Feasible => {}
        }
        match tab.run(self.max_iterations, self.tol) {
            Ok(true) => {}
            Ok(false) => return Ok((self.unbounded(tab.iterations), None)),
            Err(Error::Stalled { .. }) => {
                let (mut res, basis) = self.solve_with_basis(lb, ub)?;
                res.iterations += tab.iterations;
                return Ok((res, basis));
            }
            Err(e) => return Err(e),
        }
        if tab.row_residual(self) > self.tol.feasibility * 1e-2 {
            tab.refresh_basic_values(self);
        }
        tab.age += tab.iterations;
        let res = self.optimal_result(&tab);
        Ok((res, Some(WarmStart { tab })))
    }

    fn check_box(&self, lb: &[f64], ub: &[f64]) -> Result<()> {
        if lb.len() != self.n || ub.len() != self.n {
            return Err(Error::invalid(format!(
                "bound vectors have lengths {}/{} but the LP has {} variables",
                lb.len(),
                ub.len(),
                self.n
            )));
        }
        Ok(())
    }

    fn unbounded(&self, iterations: usize) -> LpResult {
        LpResult {
            status: LpStatus::Unbounded,
            x: Vec::new(),
            objective: f64::NEG_INFINITY,
            iterations,
            num_fractional: 0,
        }
    }

    fn optimal_result(&self, tab: &Tableau) -> LpResult {
        let x: Vec<f64> = tab.val[..self.n].to_vec();
        let objective = self.cost.iter().zip(&x).map(|(c, v)| c * v).sum();
        let num_fractional = x
            .iter()
            .zip(&self.is_integer)
            .filter(|(v, &int)| int && fractional_part(**v, self.tol.integrality) > 0.0)
            .count();
        LpResult {
            status: LpStatus::Optimal,
            x,
            objective,
            iterations: tab.iterations,
            num_fractional,
        }
    }
}

/// Warm-start pivots a tableau may accumulate before a cold rebuild.
const MAX_WARM_AGE: usize = 400;

/// Optimal tableau of a solved LP, reusable as a starting point.
#[derive(Debug, Clone)]
pub struct WarmStart {
    tab: Tableau,
}

enum DualOutcome {
    Feasible,
    Infeasible,
    GaveUp,
}

#[derive(Debug, Clone)]
struct Tableau {
    m: usize,
    ncols: usize,
    first_artificial: usize,
    num_artificial: usize,
    /// Row-major `m x ncols` matrix `B^-1 [A I σ]`.
    t: Vec<f64>,
    basis: Vec<usize>,
    basic_row: Vec<usize>,
    val: Vec<f64>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    cost: Vec<f64>,
    d: Vec<f64>,
    /// Sign of each artificial column (indexed by row), zero when absent.
    art_sign: Vec<f64>,
    art_row: Vec<usize>,
    iterations: usize,
    /// Pivots done in warm solves since the last cold build.
    age: usize,
}

impl Tableau {
    fn build(model: &LpModel, lb: &[f64], ub: &[f64]) -> Self {
        let (n, m) = (model.n, model.m);
        let mut val = Vec::with_capacity(n + 2 * m);
        for j in 0..n {
            val.push(if lb[j].is_finite() {
                lb[j]
            } else if ub[j].is_finite() {
                ub[j]
            } else {
                0.0
            });
        }
        let residual: Vec<f64> = (0..m)
            .map(|i| {
                let row = &model.a[i * n..(i + 1) * n];
                model.rhs[i] - row.iter().zip(&val).map(|(a, v)| a * v).sum::<f64>()
            })
            .collect();
        let feas = model.tol.feasibility;
        let needs_art: Vec<bool> = (0..m)
            .map(|i| residual[i] < model.slack_lb[i] - feas || residual[i] > model.slack_ub[i] + feas)
            .collect();
        let num_artificial = needs_art.iter().filter(|&&b| b).count();
        let first_artificial = n + m;
        let ncols = first_artificial + num_artificial;

        let mut col_lb: Vec<f64> = lb.to_vec();
        let mut col_ub: Vec<f64> = ub.to_vec();
        col_lb.extend_from_slice(&model.slack_lb);
        col_ub.extend_from_slice(&model.slack_ub);
        col_lb.extend(std::iter::repeat_n(0.0, num_artificial));
        col_ub.extend(std::iter::repeat_n(f64::INFINITY, num_artificial));
        val.resize(ncols, 0.0);

        let mut t = vec![0.0; m * ncols];
        let mut basis = vec![0; m];
        let mut basic_row = vec![NONBASIC; ncols];
        let mut art_sign = vec![0.0; m];
        let mut art_row = Vec::with_capacity(num_artificial);
        let mut next_art = first_artificial;
        for i in 0..m {
            let row = &mut t[i * ncols..(i + 1) * ncols];
            row[..n].copy_from_slice(&model.a[i * n..(i + 1) * n]);
            row[n + i] = 1.0;
            let slack = n + i;
            if needs_art[i] {
                let at = residual[i].clamp(model.slack_lb[i], model.slack_ub[i]);
                let excess = residual[i] - at;
                let sign = if excess >= 0.0 { 1.0 } else { -1.0 };
                val[slack] = at;
                if sign < 0.0 {
                    row[..=slack].iter_mut().for_each(|v| *v = -*v);
                }
                row[next_art] = 1.0;
                val[next_art] = excess.abs();
                basis[i] = next_art;
                basic_row[next_art] = i;
                art_sign[i] = sign;
                art_row.push(i);
                next_art += 1;
            } else {
                val[slack] = residual[i];
                basis[i] = slack;
                basic_row[slack] = i;
            }
        }
        Tableau {
            m,
            ncols,
            first_artificial,
            num_artificial,
            t,
            basis,
            basic_row,
            val,
            lb: col_lb,
            ub: col_ub,
            cost: vec![0.0; ncols],
            d: vec![0.0; ncols],
            art_sign,
            art_row,
            iterations: 0,
            age: 0,
        }
    }

    fn set_costs(&mut self, cost: Vec<f64>) {
        self.cost = cost;
        self.recompute_reduced_costs();
    }

    fn recompute_reduced_costs(&mut self) {
        let nc = self.ncols;
        self.d.copy_from_slice(&self.cost);
        for i in 0..self.m {
            let cb = self.cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.t[i * nc..(i + 1) * nc];
                for (dj, tij) in self.d.iter_mut().zip(row) {
                    *dj -= cb * tij;
                }
            }
        }
        for i in 0..self.m {
            self.d[self.basis[i]] = 0.0;
        }
    }

    /// Entering column and direction (+1 increase, -1 decrease).
    fn price(&self, bland: bool, tol: f64) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.ncols {
            if self.basic_row[j] != NONBASIC || self.lb[j] == self.ub[j] {
                continue;
            }
            let dj = self.d[j];
            let dir = if dj < -tol && self.val[j] < self.ub[j] {
                1.0
            } else if dj > tol && self.val[j] > self.lb[j] {
                -1.0
            } else {
                continue;
            };
            if bland {
                return Some((j, dir));
            }
            if best.is_none_or(|(_, _, mag)| dj.abs() > mag) {
                best = Some((j, dir, dj.abs()));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    /// Runs simplex iterations under the current costs. Returns `false` when
    /// the objective is unbounded below.
    fn run(&mut self, max_iterations: usize, tol: Tolerances) -> Result<bool> {
        let nc = self.ncols;
        let degenerate_limit = 3 * (self.m + nc);
        let mut degenerate_run = 0usize;
        let mut verified = false;
        loop {
            let bland = degenerate_run > degenerate_limit;
            let Some((q, dir)) = self.price(bland, tol.optimality) else {
                if verified {
                    return Ok(true);
                }
                // drift guard: confirm optimality with freshly computed reduced costs
                self.recompute_reduced_costs();
                verified = true;
                continue;
            };
            verified = false;
            if self.iterations >= max_iterations {
                return Err(Error::Stalled {
                    iterations: self.iterations,
                });
            }
            self.iterations += 1;

            let flip = if dir > 0.0 {
                self.ub[q] - self.val[q]
            } else {
                self.val[q] - self.lb[q]
            };
            let mut step = f64::INFINITY;
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let tiq = self.t[i * nc + q];
                if tiq.abs() <= tol.pivot {
                    continue;
                }
                let alpha = dir * tiq;
                let b = self.basis[i];
                let limit = if alpha > 0.0 {
                    if self.lb[b].is_finite() {
                        (self.val[b] - self.lb[b]) / alpha
                    } else {
                        continue;
                    }
                } else if self.ub[b].is_finite() {
                    (self.ub[b] - self.val[b]) / -alpha
                } else {
                    continue;
                };
                let limit = limit.max(0.0);
                let better = match leave {
                    None => true,
                    Some((r, best_alpha)) => {
                        if limit < step - DEGENERATE_STEP {
                            true
                        } else if limit <= step + DEGENERATE_STEP {
                            if bland {
                                b < self.basis[r]
                            } else {
                                alpha.abs() > best_alpha.abs()
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    step = if leave.is_none() { limit } else { step.min(limit) };
                    leave = Some((i, alpha));
                }
            }

            if flip <= step {
                if !flip.is_finite() {
                    return Ok(false);
                }
                self.move_entering(q, dir, flip);
                self.val[q] = if dir > 0.0 { self.ub[q] } else { self.lb[q] };
                degenerate_run = if flip <= DEGENERATE_STEP { degenerate_run + 1 } else { 0 };
                continue;
            }
            let (r, alpha) = leave.expect("finite step implies a leaving row");
            self.move_entering(q, dir, step);
            let out = self.basis[r];
            self.val[out] = if alpha > 0.0 { self.lb[out] } else { self.ub[out] };
            self.pivot(r, q);
            degenerate_run = if step <= DEGENERATE_STEP { degenerate_run + 1 } else { 0 };
        }
    }

    fn move_entering(&mut self, q: usize, dir: f64, step: f64) {
        if step == 0.0 {
            return;
        }
        let nc = self.ncols;
        self.val[q] += dir * step;
        for i in 0..self.m {
            let tiq = self.t[i * nc + q];
            if tiq != 0.0 {
                self.val[self.basis[i]] -= dir * step * tiq;
            }
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let nc = self.ncols;
        let p = self.t[r * nc + q];
        {
            let row = &mut self.t[r * nc..(r + 1) * nc];
            for v in row.iter_mut() {
                *v /= p;
            }
            row[q] = 1.0;
        }
        let (before, rest) = self.t.split_at_mut(r * nc);
        let (pivot_row, after) = rest.split_at_mut(nc);
        for row in before.chunks_exact_mut(nc).chain(after.chunks_exact_mut(nc)) {
            let f = row[q];
            if f != 0.0 {
                for (v, pr) in row.iter_mut().zip(pivot_row.iter()) {
                    *v -= f * pr;
                }
                row[q] = 0.0;
            }
        }
        let dq = self.d[q];
        if dq != 0.0 {
            for (dj, pr) in self.d.iter_mut().zip(pivot_row.iter()) {
                *dj -= dq * pr;
            }
        }
        self.d[q] = 0.0;
        let out = self.basis[r];
        self.basic_row[out] = NONBASIC;
        self.basis[r] = q;
        self.basic_row[q] = r;
    }

    /// Bound a nonbasic column should sit at to keep the basis dual feasible.
    fn nonbasic_target(&self, j: usize) -> f64 {
        let (lo, hi, v) = (self.lb[j], self.ub[j], self.val[j]);
        if lo == hi {
            return lo;
        }
        if (v == lo || v == hi) && v >= lo && v <= hi {
            return v;
        }
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) => {
                if self.d[j] >= 0.0 {
                    lo
                } else {
                    hi
                }
            }
            (true, false) => lo,
            (false, true) => hi,
            (false, false) => v,
        }
    }

    /// Dual simplex: pivots out the most violated basic variable until the
    /// basis is primal feasible.
    fn dual(&mut self, max_iterations: usize, tol: Tolerances) -> DualOutcome {
        let nc = self.ncols;
        loop {
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let b = self.basis[i];
                let v = self.val[b];
                let viol = if v < self.lb[b] {
                    self.lb[b] - v
                } else if v > self.ub[b] {
                    v - self.ub[b]
                } else {
                    0.0
                };
                if viol > tol.feasibility && leave.is_none_or(|(_, w)| viol > w) {
                    leave = Some((i, viol));
                }
            }
            let Some((r, _)) = leave else {
                return DualOutcome::Feasible;
            };
            if self.iterations >= max_iterations {
                return DualOutcome::GaveUp;
            }
            let b = self.basis[r];
            let (target, sign) = if self.val[b] < self.lb[b] {
                (self.lb[b], 1.0)
            } else {
                (self.ub[b], -1.0)
            };
            let row = &self.t[r * nc..(r + 1) * nc];
            let mut enter: Option<(usize, f64, f64)> = None;
            for (j, &trj) in row.iter().enumerate() {
                if self.basic_row[j] != NONBASIC || self.lb[j] == self.ub[j] {
                    continue;
                }
                if trj.abs() <= tol.pivot {
                    continue;
                }
                let a = sign * trj;
                let ratio = if a < 0.0 && self.val[j] < self.ub[j] {
                    self.d[j].max(0.0) / trj.abs()
                } else if a > 0.0 && self.val[j] > self.lb[j] {
                    (-self.d[j]).max(0.0) / trj.abs()
                } else {
                    continue;
                };
                let better = match enter {
                    None => true,
                    Some((_, best, mag)) => {
                        ratio < best - DEGENERATE_STEP
                            || (ratio <= best + DEGENERATE_STEP && trj.abs() > mag)
                    }
                };
                if better {
                    enter = Some((j, ratio, trj.abs()));
                }
            }
            let Some((q, _, _)) = enter else {
                return DualOutcome::Infeasible;
            };
            self.iterations += 1;
            let delta = (self.val[b] - target) / self.t[r * nc + q];
            self.move_entering(q, 1.0, delta);
            self.val[b] = target;
            self.pivot(r, q);
        }
    }

    /// Largest violation of `A x + s = b` by the current values.
    fn row_residual(&self, model: &LpModel) -> f64 {
        let n = model.n;
        (0..model.m)
            .map(|i| {
                let row = &model.a[i * n..(i + 1) * n];
                let ax: f64 = row.iter().zip(&self.val[..n]).map(|(a, v)| a * v).sum();
                (ax + self.val[n + i] - model.rhs[i]).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Recomputes basic values from the original data: `B x_B = b - N x_N`.
    fn refresh_basic_values(&mut self, model: &LpModel) {
        let (n, m) = (model.n, model.m);
        if m == 0 {
            return;
        }
        let column = |j: usize, i: usize| -> f64 {
            if j < n {
                model.a[i * n + j]
            } else if j < n + m {
                if j - n == i {
                    1.0
                } else {
                    0.0
                }
            } else {
                let row = self.art_row[j - self.first_artificial];
                if row == i {
                    self.art_sign[row]
                } else {
                    0.0
                }
            }
        };
        let mut bmat = vec![0.0; m * m];
        let mut rhs = model.rhs.clone();
        for j in 0..self.ncols {
            if self.basic_row[j] != NONBASIC {
                continue;
            }
            let v = self.val[j];
            if v != 0.0 {
                for (i, r) in rhs.iter_mut().enumerate() {
                    *r -= column(j, i) * v;
                }
            }
        }
        for (k, &j) in self.basis.iter().enumerate() {
            for i in 0..m {
                bmat[i * m + k] = column(j, i);
            }
        }
        if let Some(xb) = solve_dense(&mut bmat, &mut rhs, m) {
            for (k, &j) in self.basis.iter().enumerate() {
                self.val[j] = xb[k];
            }
        }
    }
}

/// Gaussian elimination with partial pivoting on a row-major `m x m` system.
fn solve_dense(a: &mut [f64], b: &mut [f64], m: usize) -> Option<Vec<f64>> {
    for col in 0..m {
        let piv = (col..m).max_by(|&x, &y| {
            a[x * m + col]
                .abs()
                .partial_cmp(&a[y * m + col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[piv * m + col].abs() < 1e-14 {
            return None;
        }
        if piv != col {
            for k in 0..m {
                a.swap(piv * m + k, col * m + k);
            }
            b.swap(piv, col);
        }
        let p = a[col * m + col];
        for row in col + 1..m {
            let f = a[row * m + col] / p;
            if f != 0.0 {
                for k in col..m {
                    a[row * m + k] -= f * a[col * m + k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; m];
    for row in (0..m).rev() {
        let s: f64 = (row + 1..m).map(|k| a[row * m + k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row * m + row];
    }
    Some(x)
}
