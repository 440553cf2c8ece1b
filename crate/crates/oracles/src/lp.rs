//! Two reference LP solvers: a textbook two-phase tableau simplex on the
//! standard form, and brute-force vertex enumeration for very small boxes.

use boundlab::instance::{MilpInstance, Relation};

use crate::OracleError;

/// `min c·x` subject to dense rows and a variable box.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLp {
    pub c: Vec<f64>,
    pub rows: Vec<(Vec<f64>, Relation, f64)>,
    pub lb: Vec<f64>,
    pub ub: Vec<f64>,
}

impl DenseLp {
    /// The LP relaxation of `inst` over the box `[lb, ub]`.
    pub fn relaxation(inst: &MilpInstance, lb: &[f64], ub: &[f64]) -> Self {
        let rows = inst
            .cons
            .iter()
            .map(|r| {
                let mut a = vec![0.0; inst.num_vars];
                for &(j, v) in &r.entries {
                    a[j] += v;
                }
                (a, r.rel, r.rhs)
            })
            .collect();
        DenseLp {
            c: inst.obj.clone(),
            rows,
            lb: lb.to_vec(),
            ub: ub.to_vec(),
        }
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.c.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest row or bound violation of `x`.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (a, rel, b) in &self.rows {
            let act: f64 = a.iter().zip(x).map(|(a, v)| a * v).sum();
            let v = match rel {
                Relation::Le => act - b,
                Relation::Ge => b - act,
                Relation::Eq => (act - b).abs(),
            };
            worst = worst.max(v);
        }
        for j in 0..x.len() {
            worst = worst.max(self.lb[j] - x[j]).max(x[j] - self.ub[j]);
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { objective: f64, x: Vec<f64> },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn objective(&self) -> f64 {
        match self {
            LpOutcome::Optimal { objective, .. } => *objective,
            LpOutcome::Infeasible => f64::INFINITY,
            LpOutcome::Unbounded => f64::NEG_INFINITY,
        }
    }
}

const EPS: f64 = 1e-9;

/// Two-phase simplex with Bland's rule on `min c·y, T y (<=,>=,=) r, y >= 0`,
/// where `x = lb + y` and finite upper bounds become extra `<=` rows.
/// Variables need finite lower bounds.
pub fn tableau_simplex(lp: &DenseLp) -> Result<LpOutcome, OracleError> {
    let n = lp.n();
    if lp.lb.iter().any(|l| !l.is_finite()) {
        return Err(OracleError::Unsupported("tableau simplex needs finite lower bounds".into()));
    }
    if (0..n).any(|j| lp.lb[j] > lp.ub[j]) {
        return Ok(LpOutcome::Infeasible);
    }
    // rows in y-space with nonnegative right-hand sides
    let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::new();
    for (a, rel, b) in &lp.rows {
        let shift: f64 = a.iter().zip(&lp.lb).map(|(a, l)| a * l).sum();
        rows.push((a.clone(), *rel, b - shift));
    }
    for j in 0..n {
        if lp.ub[j].is_finite() {
            let mut a = vec![0.0; n];
            a[j] = 1.0;
            rows.push((a, Relation::Le, lp.ub[j] - lp.lb[j]));
        }
    }
    for (a, rel, b) in rows.iter_mut() {
        if *b < 0.0 {
            a.iter_mut().for_each(|v| *v = -*v);
            *b = -*b;
            *rel = match rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }
    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let width = n + n_slack + n_art;
    let art_start = n + n_slack;
    // tableau rows: coefficients then rhs
    let mut t = vec![vec![0.0; width + 1]; m];
    let mut basis = vec![0usize; m];
    let (mut s, mut art) = (n, art_start);
    for (i, (a, rel, b)) in rows.iter().enumerate() {
        t[i][..n].copy_from_slice(a);
        t[i][width] = *b;
        match rel {
            Relation::Le => {
                t[i][s] = 1.0;
                basis[i] = s;
                s += 1;
            }
            Relation::Ge => {
                t[i][s] = -1.0;
                s += 1;
                t[i][art] = 1.0;
                basis[i] = art;
                art += 1;
            }
            Relation::Eq => {
                t[i][art] = 1.0;
                basis[i] = art;
                art += 1;
            }
        }
    }

    // phase 1: minimize the sum of artificials
    let mut cost1 = vec![0.0; width];
    cost1[art_start..].iter_mut().for_each(|c| *c = 1.0);
    if n_art > 0 {
        if !run_bland(&mut t, &mut basis, &cost1, width, |_| true) {
            unreachable!("phase 1 is bounded below by zero");
        }
        let infeas: f64 = (0..m).filter(|&i| basis[i] >= art_start).map(|i| t[i][width]).sum();
        if infeas > 1e-7 {
            return Ok(LpOutcome::Infeasible);
        }
        // drive zero-level artificials out of the basis, dropping redundant rows
        let mut i = 0;
        while i < t.len() {
            if basis[i] >= art_start {
                match (0..art_start).find(|&j| t[i][j].abs() > EPS) {
                    Some(j) => pivot(&mut t, &mut basis, i, j),
                    None => {
                        t.remove(i);
                        basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    let mut cost2 = vec![0.0; width];
    cost2[..n].copy_from_slice(&lp.c);
    if !run_bland(&mut t, &mut basis, &cost2, width, |j| j < art_start) {
        return Ok(LpOutcome::Unbounded);
    }
    let mut x = lp.lb.clone();
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            x[b] += t[i][width];
        }
    }
    Ok(LpOutcome::Optimal {
        objective: lp.objective(&x),
        x,
    })
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], r: usize, col: usize) {
    let p = t[r][col];
    t[r].iter_mut().for_each(|v| *v /= p);
    let pivot_row = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i != r && row[col] != 0.0 {
            let f = row[col];
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
        }
    }
    basis[r] = col;
}

/// Returns false when the objective is unbounded below.
fn run_bland(t: &mut [Vec<f64>], basis: &mut [usize], cost: &[f64], width: usize, allowed: impl Fn(usize) -> bool) -> bool {
    loop {
        // reduced costs from scratch each iteration
        let entering = (0..width).filter(|&j| allowed(j) && !basis.contains(&j)).find(|&j| {
            let z: f64 = basis.iter().enumerate().map(|(i, &b)| cost[b] * t[i][j]).sum();
            cost[j] - z < -EPS
        });
        let Some(j) = entering else {
            return true;
        };
        let mut leave: Option<(usize, f64)> = None;
        for (i, row) in t.iter().enumerate() {
            if row[j] > EPS {
                let ratio = row[width] / row[j];
                let better = match leave {
                    None => true,
                    Some((li, lr)) => ratio < lr - EPS || (ratio <= lr + EPS && basis[i] < basis[li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((r, _)) = leave else {
            return false;
        };
        pivot(t, basis, r, j);
    }
}

/// Largest number of variables [`vertex_enumeration`] accepts.
pub const MAX_VERTEX_VARS: usize = 8;

/// Optimum over all vertices of a bounded LP: every choice of `n` tight
/// constraints among rows and finite bounds is solved and checked.
pub fn vertex_enumeration(lp: &DenseLp) -> Result<LpOutcome, OracleError> {
    let n = lp.n();
    if n > MAX_VERTEX_VARS {
        return Err(OracleError::TooLarge { what: "variables", limit: MAX_VERTEX_VARS, found: n });
    }
    if lp.lb.iter().chain(&lp.ub).any(|b| !b.is_finite()) {
        return Err(OracleError::Unsupported("vertex enumeration needs a finite box".into()));
    }
    // all hyperplanes a·x = b
    let mut planes: Vec<(Vec<f64>, f64)> = lp.rows.iter().map(|(a, _, b)| (a.clone(), *b)).collect();
    for j in 0..n {
        for bound in [lp.lb[j], lp.ub[j]] {
            let mut a = vec![0.0; n];
            a[j] = 1.0;
            planes.push((a, bound));
        }
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut chosen = Vec::with_capacity(n);
    combinations(planes.len(), n, 0, &mut chosen, &mut |idx| {
        let a: Vec<Vec<f64>> = idx.iter().map(|&i| planes[i].0.clone()).collect();
        let b: Vec<f64> = idx.iter().map(|&i| planes[i].1).collect();
        if let Some(x) = gauss_solve(a, b) {
            let scale = 1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if lp.violation(&x) <= 1e-9 * scale {
                let obj = lp.objective(&x);
                if best.as_ref().is_none_or(|(o, _)| obj < *o) {
                    best = Some((obj, x));
                }
            }
        }
    });
    Ok(match best {
        Some((objective, x)) => LpOutcome::Optimal { objective, x },
        None => LpOutcome::Infeasible,
    })
}

fn combinations(total: usize, k: usize, start: usize, chosen: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if chosen.len() == k {
        f(chosen);
        return;
    }
    for i in start..total {
        if total - i < k - chosen.len() {
            break;
        }
        chosen.push(i);
        combinations(total, k, i + 1, chosen, f);
        chosen.pop();
    }
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[p][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, p);
        b.swap(col, p);
        for i in col + 1..n {
            let f = a[i][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[i][k] -= f * a[col][k];
                }
                b[i] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(c: &[f64], rows: &[(&[f64], Relation, f64)], lb: &[f64], ub: &[f64]) -> DenseLp {
        DenseLp {
            c: c.to_vec(),
            rows: rows.iter().map(|(a, r, b)| (a.to_vec(), *r, *b)).collect(),
            lb: lb.to_vec(),
            ub: ub.to_vec(),
        }
    }

    #[test]
    fn textbook_example() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6)
        let p = lp(
            &[-3.0, -5.0],
            &[(&[1.0, 0.0], Relation::Le, 4.0), (&[0.0, 2.0], Relation::Le, 12.0), (&[3.0, 2.0], Relation::Le, 18.0)],
            &[0.0, 0.0],
            &[f64::INFINITY, f64::INFINITY],
        );
        let LpOutcome::Optimal { objective, x } = tableau_simplex(&p).unwrap() else { panic!() };
        assert!((objective + 36.0).abs() < 1e-9);
        assert!((x[0] - 2.0).abs() < 1e-9 && (x[1] - 6.0).abs() < 1e-9);
        let mut boxed = p.clone();
        boxed.ub = vec![10.0, 10.0];
        assert!((vertex_enumeration(&boxed).unwrap().objective() + 36.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let p = lp(&[1.0], &[(&[1.0], Relation::Ge, 3.0)], &[0.0], &[2.0]);
        assert_eq!(tableau_simplex(&p).unwrap(), LpOutcome::Infeasible);
        assert_eq!(vertex_enumeration(&p).unwrap(), LpOutcome::Infeasible);
        let q = lp(&[-1.0], &[(&[1.0], Relation::Ge, 3.0)], &[0.0], &[f64::INFINITY]);
        assert_eq!(tableau_simplex(&q).unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn equality_and_negative_bounds() {
        // min x + 2y = 1 + y on x + y = 1, so y = -1, x = 2
        let p = lp(&[1.0, 2.0], &[(&[1.0, 1.0], Relation::Eq, 1.0)], &[-2.0, -1.0], &[3.0, 1.0]);
        let a = tableau_simplex(&p).unwrap().objective();
        let b = vertex_enumeration(&p).unwrap().objective();
        assert!((a - 0.0).abs() < 1e-9, "{a}");
        assert!((b - 0.0).abs() < 1e-9, "{b}");
    }

    #[test]
    fn redundant_equalities() {
        let p = lp(
            &[1.0, 1.0],
            &[(&[1.0, 1.0], Relation::Eq, 2.0), (&[2.0, 2.0], Relation::Eq, 4.0), (&[1.0, 0.0], Relation::Ge, 0.5)],
            &[0.0, 0.0],
            &[5.0, 5.0],
        );
        assert!((tableau_simplex(&p).unwrap().objective() - 2.0).abs() < 1e-9);
    }
}
