//! Plain floating-point LP solving: minimize or maximize one variable over
//! the midpoint realization of an interval linear program.
//!
//! Nothing here is reliable — the answers carry rounding error and the duals
//! are approximate. Reliability is restored downstream, where the duals are
//! turned into certified bounds; this module only has to be good, not sound.
//!
//! Two-phase dense tableau. Box bounds enter as explicit unit rows (see
//! `IntervalLinearProgram::extended_rows`) so that every binding constraint,
//! box sides included, gets a dual multiplier. Entering column: most negative
//! reduced cost, ties by lowest index. Leaving row: minimum ratio with
//! lexicographic tie-breaking against cycling.

use crate::relax::{Direction, IntervalLinearProgram};
use std::collections::BTreeMap;

pub const FEAS_TOL: f64 = 1e-9;
pub const COST_TOL: f64 = 1e-9;
pub const PIVOT_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Unbounded,
    Infeasible,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct SimplexSolution {
    pub status: Status,
    /// Optimal value of the objective variable (`NaN` when infeasible,
    /// the appropriate infinity when unbounded).
    pub objective: f64,
    pub primal: BTreeMap<String, f64>,
    /// One multiplier per `extended_rows` entry. Positive supports the row's
    /// lower bound, negative its upper bound. On an infeasible exit these are
    /// the phase-1 (Farkas) multipliers; rows with no finite bound get 0.
    pub duals: Vec<f64>,
    /// Recession direction of the midpoint feasible set on unbounded exits.
    pub ray: Option<BTreeMap<String, f64>>,
    pub iterations: usize,
}

/// Midpoint-realization feasibility of a point, all extended rows, absolute
/// tolerance `tol`.
pub fn midpoint_feasible(p: &IntervalLinearProgram, point: &BTreeMap<String, f64>, tol: f64) -> bool {
    p.extended_rows().iter().all(|row| {
        let val: f64 = row
            .form
            .coefficients
            .iter()
            .map(|(name, k)| k.mid() * point[name])
            .sum();
        val >= row.bound.lo() - tol && val <= row.bound.hi() + tol
    })
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    obj: Vec<f64>,
    oval: f64,
    ncols: usize,
    /// Columns allowed to enter the basis; keeps artificials out once they
    /// leave (a departed artificial never needs to return).
    enter_limit: usize,
    iterations: usize,
    limit: usize,
}

enum RunExit {
    Done,
    Unbounded(usize),
    Limit,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.rows[r][c];
        for e in self.rows[r].iter_mut() {
            *e /= piv;
        }
        self.rhs[r] /= piv;
        self.rows[r][c] = 1.0;
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r];
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c] == 0.0 {
                continue;
            }
            let f = self.rows[i][c];
            for (e, pe) in self.rows[i].iter_mut().zip(&pivot_row) {
                *e -= f * pe;
            }
            self.rows[i][c] = 0.0;
            self.rhs[i] -= f * pivot_rhs;
        }
        if self.obj[c] != 0.0 {
            let f = self.obj[c];
            for (e, pe) in self.obj.iter_mut().zip(&pivot_row) {
                *e -= f * pe;
            }
            self.obj[c] = 0.0;
            self.oval -= f * pivot_rhs;
        }
        self.basis[r] = c;
    }

    fn entering(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for j in 0..self.enter_limit {
            if self.obj[j] < -COST_TOL && best.map_or(true, |b| self.obj[j] < self.obj[b]) {
                best = Some(j);
            }
        }
        best
    }

    fn lex_less(&self, r: usize, b: usize, c: usize) -> bool {
        let (ar, ab) = (self.rows[r][c], self.rows[b][c]);
        for j in 0..self.ncols {
            let (vr, vb) = (self.rows[r][j] / ar, self.rows[b][j] / ab);
            if vr != vb {
                return vr < vb;
            }
        }
        false
    }

    fn leaving(&self, c: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for r in 0..self.rows.len() {
            let a = self.rows[r][c];
            if a <= PIVOT_TOL {
                continue;
            }
            let ratio = self.rhs[r].max(0.0) / a;
            let take = match best {
                None => true,
                Some((br, bratio)) => {
                    ratio < bratio || (ratio == bratio && self.lex_less(r, br, c))
                }
            };
            if take {
                best = Some((r, ratio));
            }
        }
        best.map(|(r, _)| r)
    }

    fn run(&mut self) -> RunExit {
        loop {
            if self.iterations >= self.limit {
                return RunExit::Limit;
            }
            let Some(c) = self.entering() else {
                return RunExit::Done;
            };
            let Some(r) = self.leaving(c) else {
                return RunExit::Unbounded(c);
            };
            self.iterations += 1;
            self.pivot(r, c);
        }
    }
}

/// Minimize or maximize `variable` over the midpoint realization of the
/// program; `limit` caps simplex iterations (default `50·(rows+variables)`).
pub fn solve_lp(
    p: &IntervalLinearProgram,
    variable: &str,
    direction: Direction,
    limit: Option<usize>,
) -> SimplexSolution {
    let ext = p.extended_rows();
    let n = p.variables.len();
    assert!(n >= 1, "program has no variables");
    let v = p
        .variables
        .iter()
        .position(|name| name == variable)
        .expect("objective variable is in the program");

    // One-sided inequalities g·x >= h, tagged with (extended row, is lower
    // side) for dual readback.
    let mut ineqs: Vec<(Vec<f64>, f64, usize, bool)> = Vec::new();
    for (i, row) in ext.iter().enumerate() {
        let g: Vec<f64> = p
            .variables
            .iter()
            .map(|name| row.form.coeff(name).mid())
            .collect();
        if row.bound.lo() != f64::NEG_INFINITY {
            ineqs.push((g.clone(), row.bound.lo(), i, true));
        }
        if row.bound.hi() != f64::INFINITY {
            let neg = g.iter().map(|a| -a).collect();
            ineqs.push((neg, -row.bound.hi(), i, false));
        }
    }

    let m = ineqs.len();
    let struct_cols = 2 * n + m;
    let limit = limit.unwrap_or(50 * (ext.len() + n));
    let mut t = Tableau {
        rows: Vec::with_capacity(m),
        rhs: Vec::with_capacity(m),
        basis: (0..m).map(|k| struct_cols + k).collect(),
        obj: vec![0.0; struct_cols + m],
        oval: 0.0,
        ncols: struct_cols + m,
        enter_limit: struct_cols,
        iterations: 0,
        limit,
    };
    for (k, (g, h, _, _)) in ineqs.iter().enumerate() {
        let mut row = vec![0.0; struct_cols + m];
        for j in 0..n {
            row[j] = g[j];
            row[n + j] = -g[j];
        }
        row[2 * n + k] = -1.0;
        let mut h = *h;
        if h < 0.0 {
            for e in row.iter_mut().take(struct_cols) {
                *e = -*e;
            }
            h = -h;
        }
        row[struct_cols + k] = 1.0;
        t.rows.push(row);
        t.rhs.push(h);
    }
    for j in 0..struct_cols {
        t.obj[j] = -t.rows.iter().map(|row| row[j]).sum::<f64>();
    }
    t.oval = -t.rhs.iter().sum::<f64>();
    // Infeasibility threshold scales with the data: leftover phase-1 dust is
    // proportional to the bound magnitudes, and a false "infeasible" here
    // discards all bounding information downstream.
    let infeas_tol = FEAS_TOL * (1.0 + t.rhs.iter().fold(0.0f64, |a, &b| a.max(b)));

    let duals_from = |obj: &[f64]| -> Vec<f64> {
        let mut duals = vec![0.0; ext.len()];
        for (k, (_, _, i, lower)) in ineqs.iter().enumerate() {
            let lam = obj[2 * n + k].max(0.0);
            if *lower {
                duals[*i] += lam;
            } else {
                duals[*i] -= lam;
            }
        }
        duals
    };
    let primal_from = |t: &Tableau| -> BTreeMap<String, f64> {
        let mut z = vec![0.0; struct_cols];
        for (r, &b) in t.basis.iter().enumerate() {
            if b < struct_cols {
                z[b] = t.rhs[r];
            }
        }
        p.variables
            .iter()
            .enumerate()
            .map(|(j, name)| (name.clone(), z[j] - z[n + j]))
            .collect()
    };

    match t.run() {
        RunExit::Limit => {
            return SimplexSolution {
                status: Status::IterationLimit,
                objective: f64::NAN,
                primal: primal_from(&t),
                duals: duals_from(&t.obj),
                ray: None,
                iterations: t.iterations,
            }
        }
        RunExit::Unbounded(_) => unreachable!("phase 1 is bounded below by zero"),
        RunExit::Done => {}
    }
    if -t.oval > infeas_tol {
        return SimplexSolution {
            status: Status::Infeasible,
            objective: f64::NAN,
            primal: primal_from(&t),
            duals: duals_from(&t.obj),
            ray: None,
            iterations: t.iterations,
        };
    }

    // Pivot artificials out (or drop their redundant rows), then shed the
    // artificial columns entirely.
    let mut r = 0;
    while r < t.rows.len() {
        if t.basis[r] >= struct_cols {
            if let Some(c) = (0..struct_cols).find(|&j| t.rows[r][j].abs() > PIVOT_TOL) {
                t.pivot(r, c);
                r += 1;
            } else {
                t.rows.remove(r);
                t.rhs.remove(r);
                t.basis.remove(r);
            }
        } else {
            r += 1;
        }
    }
    for row in t.rows.iter_mut() {
        row.truncate(struct_cols);
    }
    t.ncols = struct_cols;

    let mut costs = vec![0.0; struct_cols];
    costs[v] = match direction {
        Direction::Min => 1.0,
        Direction::Max => -1.0,
    };
    costs[n + v] = -costs[v];
    t.obj = costs.clone();
    t.oval = 0.0;
    for (r, &b) in t.basis.iter().enumerate() {
        let f = costs[b];
        if f != 0.0 {
            for j in 0..struct_cols {
                t.obj[j] -= f * t.rows[r][j];
            }
            t.oval -= f * t.rhs[r];
        }
    }

    let exit = t.run();
    let duals = duals_from(&t.obj);
    let primal = primal_from(&t);
    match exit {
        RunExit::Limit => SimplexSolution {
            status: Status::IterationLimit,
            objective: f64::NAN,
            primal,
            duals,
            ray: None,
            iterations: t.iterations,
        },
        RunExit::Unbounded(c) => {
            let mut delta = vec![0.0; struct_cols];
            delta[c] = 1.0;
            for (r, &b) in t.basis.iter().enumerate() {
                if b < struct_cols {
                    delta[b] = -t.rows[r][c];
                }
            }
            let ray = p
                .variables
                .iter()
                .enumerate()
                .map(|(j, name)| (name.clone(), delta[j] - delta[n + j]))
                .collect();
            SimplexSolution {
                status: Status::Unbounded,
                objective: match direction {
                    Direction::Min => f64::NEG_INFINITY,
                    Direction::Max => f64::INFINITY,
                },
                primal,
                duals,
                ray: Some(ray),
                iterations: t.iterations,
            }
        }
        RunExit::Done => {
            let minval = -t.oval;
            SimplexSolution {
                status: Status::Optimal,
                objective: match direction {
                    Direction::Min => minval,
                    Direction::Max => -minval,
                },
                primal,
                duals,
                ray: None,
                iterations: t.iterations,
            }
        }
    }
}

/// `‖e_v − Σ y_i·mid(row_i)‖∞`: how far the duals are from exactly
/// reproducing the objective. Used by tests; the certified-bound path
/// recomputes this residual in interval arithmetic.
pub fn dual_residual(p: &IntervalLinearProgram, variable: &str, duals: &[f64]) -> f64 {
    let ext = p.extended_rows();
    p.variables
        .iter()
        .map(|name| {
            let mut c = if name == variable { 1.0 } else { 0.0 };
            for (row, y) in ext.iter().zip(duals) {
                c -= y * row.form.coeff(name).mid();
            }
            c.abs()
        })
        .fold(0.0, f64::max)
}
