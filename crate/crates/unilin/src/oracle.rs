//! Exact rational reference solver for tests: optimizes a single coordinate
//! over a (thin-coefficient) interval linear program with arbitrary-precision
//! rational arithmetic, and samples provably feasible points. Never part of
//! the solving pipeline — ground truth only, so clarity beats speed.

use crate::interval::Interval;
use crate::rat;
use crate::relax::{Direction, IntervalLinearProgram};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

pub const MAX_VARIABLES: usize = 8;
pub const MAX_ROWS: usize = 12;

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("program too large for exact solving ({vars} variables, {rows} rows)")]
    SizeCap { vars: usize, rows: usize },
    #[error("coefficient of '{0}' is not a thin interval")]
    WideCoefficient(String),
    #[error("coefficient of '{0}' is not finite")]
    InfiniteCoefficient(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Optimal {
        value: BigRational,
        point: BTreeMap<String, BigRational>,
    },
    Infeasible,
    Unbounded,
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn lo_rat(iv: Interval) -> Option<BigRational> {
    (iv.lo() != f64::NEG_INFINITY).then(|| rat::rational_of(iv.lo()))
}

fn hi_rat(iv: Interval) -> Option<BigRational> {
    (iv.hi() != f64::INFINITY).then(|| rat::rational_of(iv.hi()))
}

/// `coeffs · x >= rhs` over the program's variable order.
type Ineq = (Vec<BigRational>, BigRational);

/// Collects the one-sided inequalities of the program under a fixed rational
/// realization of every row's coefficient vector.
fn inequalities(
    p: &IntervalLinearProgram,
    realized: &[Vec<BigRational>],
) -> Vec<Ineq> {
    let n = p.variables.len();
    let mut out = Vec::new();
    for (row, coeffs) in p.rows.iter().zip(realized) {
        if let Some(l) = lo_rat(row.bound) {
            out.push((coeffs.clone(), l));
        }
        if let Some(u) = hi_rat(row.bound) {
            let neg: Vec<BigRational> = coeffs.iter().map(|k| -k.clone()).collect();
            out.push((neg, -u));
        }
    }
    for (j, name) in p.variables.iter().enumerate() {
        let dom = p.box_.get(name);
        let unit = |s: i64| {
            let mut v = vec![BigRational::zero(); n];
            v[j] = q(s);
            v
        };
        if let Some(l) = lo_rat(dom) {
            out.push((unit(1), l));
        }
        if let Some(u) = hi_rat(dom) {
            out.push((unit(-1), -u));
        }
    }
    out
}

fn thin_coefficients(p: &IntervalLinearProgram) -> Result<Vec<Vec<BigRational>>, OracleError> {
    let mut rows = Vec::with_capacity(p.rows.len());
    for row in &p.rows {
        let mut coeffs = vec![BigRational::zero(); p.variables.len()];
        for (j, name) in p.variables.iter().enumerate() {
            let k = row.form.coeff(name);
            if !k.is_finite() {
                return Err(OracleError::InfiniteCoefficient(name.clone()));
            }
            if !k.is_point() {
                return Err(OracleError::WideCoefficient(name.clone()));
            }
            coeffs[j] = rat::rational_of(k.lo());
        }
        rows.push(coeffs);
    }
    Ok(rows)
}

enum SimplexOutcome {
    Optimal { value: BigRational, x: Vec<BigRational> },
    Infeasible,
    Unbounded,
}

/// Exact two-phase simplex with Bland's rule: minimize `c · x` over
/// `ineqs` (each `g · x >= h`), x free. Terminates on every input.
fn solve_rational(ineqs: &[Ineq], n: usize, c: &[BigRational]) -> SimplexOutcome {
    let m = ineqs.len();
    // Split columns: x_j = z[j] - z[n+j]; one surplus per inequality.
    let struct_cols = 2 * n + m;
    let mut rows: Vec<Vec<BigRational>> = Vec::with_capacity(m);
    let mut rhs: Vec<BigRational> = Vec::with_capacity(m);
    for (i, (g, h)) in ineqs.iter().enumerate() {
        let mut row = vec![BigRational::zero(); struct_cols];
        for j in 0..n {
            row[j] = g[j].clone();
            row[n + j] = -g[j].clone();
        }
        row[2 * n + i] = -BigRational::one();
        if h.is_negative() {
            for e in row.iter_mut() {
                *e = -e.clone();
            }
            rhs.push(-h.clone());
        } else {
            rhs.push(h.clone());
        }
        rows.push(row);
    }

    // Phase 1: artificial basis, minimize the sum of artificials. The
    // artificial columns are implicit (identity), tracked through `basis`.
    let mut basis: Vec<usize> = (0..m).map(|i| struct_cols + i).collect();
    for (i, row) in rows.iter_mut().enumerate() {
        row.extend((0..m).map(|k| {
            if k == i {
                BigRational::one()
            } else {
                BigRational::zero()
            }
        }));
    }
    let ncols = struct_cols + m;
    let mut obj = vec![BigRational::zero(); ncols];
    for j in 0..ncols {
        for row in &rows {
            obj[j] -= &row[j];
        }
    }
    for j in struct_cols..ncols {
        obj[j] += BigRational::one();
    }
    let mut objval: BigRational = -rhs.iter().sum::<BigRational>();

    if !phase(&mut rows, &mut rhs, &mut basis, &mut obj, &mut objval, ncols) {
        unreachable!("phase 1 is bounded below by zero");
    }
    if (-objval.clone()).is_positive() {
        return SimplexOutcome::Infeasible;
    }

    // Drive leftover artificials out of the basis; rows that cannot be
    // pivoted are redundant and dropped.
    let mut r = 0;
    while r < rows.len() {
        if basis[r] >= struct_cols {
            if let Some(col) = (0..struct_cols).find(|&j| !rows[r][j].is_zero()) {
                pivot(&mut rows, &mut rhs, &mut basis, &mut obj, &mut objval, r, col);
                r += 1;
            } else {
                rows.remove(r);
                rhs.remove(r);
                basis.remove(r);
            }
        } else {
            r += 1;
        }
    }
    for row in rows.iter_mut() {
        row.truncate(struct_cols);
    }

    // Phase 2 objective over the surviving basis.
    let mut costs = vec![BigRational::zero(); struct_cols];
    for j in 0..n {
        costs[j] = c[j].clone();
        costs[n + j] = -c[j].clone();
    }
    let mut obj = costs.clone();
    let mut objval = BigRational::zero();
    for (r, &b) in basis.iter().enumerate() {
        if !costs[b].is_zero() {
            let f = costs[b].clone();
            for j in 0..struct_cols {
                let d = &f * &rows[r][j];
                obj[j] -= d;
            }
            objval -= &f * &rhs[r];
        }
    }

    if !phase(&mut rows, &mut rhs, &mut basis, &mut obj, &mut objval, struct_cols) {
        return SimplexOutcome::Unbounded;
    }

    let mut z = vec![BigRational::zero(); struct_cols];
    for (r, &b) in basis.iter().enumerate() {
        z[b] = rhs[r].clone();
    }
    let x = (0..n).map(|j| &z[j] - &z[n + j]).collect();
    SimplexOutcome::Optimal {
        value: -objval,
        x,
    }
}

/// Bland-rule simplex iterations; `false` means unbounded.
fn phase(
    rows: &mut Vec<Vec<BigRational>>,
    rhs: &mut Vec<BigRational>,
    basis: &mut Vec<usize>,
    obj: &mut Vec<BigRational>,
    objval: &mut BigRational,
    ncols: usize,
) -> bool {
    loop {
        let Some(c) = (0..ncols).find(|&j| obj[j].is_negative()) else {
            return true;
        };
        let mut leave: Option<(usize, BigRational)> = None;
        for r in 0..rows.len() {
            if rows[r][c].is_positive() {
                let ratio = &rhs[r] / &rows[r][c];
                let better = match &leave {
                    None => true,
                    Some((lr, lratio)) => {
                        ratio < *lratio || (ratio == *lratio && basis[r] < basis[*lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
        }
        let Some((r, _)) = leave else {
            return false;
        };
        pivot(rows, rhs, basis, obj, objval, r, c);
    }
}

fn pivot(
    rows: &mut [Vec<BigRational>],
    rhs: &mut [BigRational],
    basis: &mut [usize],
    obj: &mut [BigRational],
    objval: &mut BigRational,
    r: usize,
    c: usize,
) {
    let p = rows[r][c].clone();
    for e in rows[r].iter_mut() {
        *e /= &p;
    }
    rhs[r] /= &p;
    let (pivot_row, pivot_rhs) = (rows[r].clone(), rhs[r].clone());
    for (i, row) in rows.iter_mut().enumerate() {
        if i == r || row[c].is_zero() {
            continue;
        }
        let f = row[c].clone();
        for (e, pe) in row.iter_mut().zip(&pivot_row) {
            *e -= &f * pe;
        }
        rhs[i] -= &f * &pivot_rhs;
    }
    if !obj[c].is_zero() {
        let f = obj[c].clone();
        for (e, pe) in obj.iter_mut().zip(&pivot_row) {
            *e -= &f * pe;
        }
        *objval -= &f * &pivot_rhs;
    }
    basis[r] = c;
}

fn check_size(p: &IntervalLinearProgram) -> Result<(), OracleError> {
    if p.variables.len() > MAX_VARIABLES || p.rows.len() > MAX_ROWS {
        return Err(OracleError::SizeCap {
            vars: p.variables.len(),
            rows: p.rows.len(),
        });
    }
    Ok(())
}

/// Exact optimum of one variable over a thin-coefficient program.
pub fn exact_optimum(
    p: &IntervalLinearProgram,
    variable: &str,
    direction: Direction,
) -> Result<Outcome, OracleError> {
    check_size(p)?;
    let coeffs = thin_coefficients(p)?;
    let ineqs = inequalities(p, &coeffs);
    let n = p.variables.len();
    let v = p
        .variables
        .iter()
        .position(|name| name == variable)
        .expect("objective variable is in the program");
    let mut c = vec![BigRational::zero(); n];
    c[v] = match direction {
        Direction::Min => BigRational::one(),
        Direction::Max => -BigRational::one(),
    };
    Ok(match solve_rational(&ineqs, n, &c) {
        SimplexOutcome::Infeasible => Outcome::Infeasible,
        SimplexOutcome::Unbounded => Outcome::Unbounded,
        SimplexOutcome::Optimal { value, x } => {
            let value = match direction {
                Direction::Min => value,
                Direction::Max => -value,
            };
            let point = p.variables.iter().cloned().zip(x).collect();
            Outcome::Optimal { value, point }
        }
    })
}

/// Whether a rational point is feasible for the interval program: for every
/// row, some realization of the coefficient intervals puts the row value in
/// its bound, and the point lies in the box.
pub fn point_satisfies(p: &IntervalLinearProgram, point: &BTreeMap<String, BigRational>) -> bool {
    for (name, x) in point {
        let dom = p.box_.get(name);
        if let Some(l) = lo_rat(dom) {
            if *x < l {
                return false;
            }
        }
        if let Some(u) = hi_rat(dom) {
            if *x > u {
                return false;
            }
        }
    }
    for row in &p.rows {
        // Range of Σ k_i·x_i over realizations, as Option endpoints where
        // `None` marks an infinite side (a one-sided-infinite coefficient
        // interval still contains arbitrarily large finite realizations).
        let mut lo = Some(BigRational::zero());
        let mut hi = Some(BigRational::zero());
        for (name, k) in &row.form.coefficients {
            let x = &point[name];
            if x.is_zero() {
                continue;
            }
            let ends = [lo_rat(*k).map(|l| l * x), hi_rat(*k).map(|h| h * x)];
            let (a, b) = if x.is_positive() {
                (ends[0].clone(), ends[1].clone())
            } else {
                (ends[1].clone(), ends[0].clone())
            };
            lo = match (lo, a) {
                (Some(s), Some(t)) => Some(s + t),
                _ => None,
            };
            hi = match (hi, b) {
                (Some(s), Some(t)) => Some(s + t),
                _ => None,
            };
        }
        if let (Some(l), Some(h)) = (lo_rat(row.bound), &hi) {
            if *h < l {
                return false;
            }
        }
        if let (Some(u), Some(l)) = (hi_rat(row.bound), &lo) {
            if *l > u {
                return false;
            }
        }
    }
    true
}

fn rand_frac(rng: &mut ChaCha8Rng, den: i64) -> BigRational {
    BigRational::new(BigInt::from(rng.gen_range(0..=den)), BigInt::from(den))
}

/// Up to `count` rational points provably feasible for the program: optimal
/// vertices of a random coefficient realization under coordinate and random
/// objectives, padded with convex combinations. Deterministic per seed.
pub fn sample_solutions(
    p: &IntervalLinearProgram,
    count: usize,
    seed: u64,
) -> Vec<BTreeMap<String, BigRational>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = p.variables.len();
    if n == 0 {
        return Vec::new();
    }

    let mut realized = Vec::with_capacity(p.rows.len());
    for row in &p.rows {
        let mut coeffs = vec![BigRational::zero(); n];
        for (j, name) in p.variables.iter().enumerate() {
            let k = row.form.coeff(name);
            if k == Interval::ZERO {
                continue;
            }
            let (Some(l), Some(u)) = (lo_rat(k), hi_rat(k)) else {
                return Vec::new();
            };
            coeffs[j] = if l == u {
                l
            } else {
                &l + (&u - &l) * rand_frac(&mut rng, 8)
            };
        }
        realized.push(coeffs);
    }
    let ineqs = inequalities(p, &realized);

    let mut vertices: Vec<Vec<BigRational>> = Vec::new();
    let push_opt = |outcome: SimplexOutcome, vertices: &mut Vec<Vec<BigRational>>| {
        if let SimplexOutcome::Optimal { x, .. } = outcome {
            if !vertices.contains(&x) {
                vertices.push(x);
            }
        }
    };
    for j in 0..n {
        for sign in [1i64, -1] {
            let mut c = vec![BigRational::zero(); n];
            c[j] = q(sign);
            push_opt(solve_rational(&ineqs, n, &c), &mut vertices);
        }
    }
    for _ in 0..2 * n {
        let c: Vec<BigRational> = (0..n)
            .map(|_| BigRational::new(BigInt::from(rng.gen_range(-8i64..=8)), BigInt::from(4)))
            .collect();
        push_opt(solve_rational(&ineqs, n, &c), &mut vertices);
    }
    if vertices.is_empty() {
        // No bounded direction at all; any feasible point will do.
        push_opt(
            solve_rational(&ineqs, n, &vec![BigRational::zero(); n]),
            &mut vertices,
        );
    }

    let mut points: Vec<Vec<BigRational>> = vertices.clone();
    let mut tries = 0;
    while points.len() < count && !vertices.is_empty() && tries < 8 * count {
        tries += 1;
        let a = &vertices[rng.gen_range(0..vertices.len())];
        let b = &vertices[rng.gen_range(0..vertices.len())];
        let t = rand_frac(&mut rng, 16);
        let mix: Vec<BigRational> = a
            .iter()
            .zip(b)
            .map(|(xa, xb)| xa + (xb - xa) * &t)
            .collect();
        if !points.contains(&mix) {
            points.push(mix);
        }
    }

    points.truncate(count);
    points
        .into_iter()
        .map(|x| p.variables.iter().cloned().zip(x).collect())
        .filter(|pt| point_satisfies(p, pt))
        .collect()
}

/// Infinity-norm condition number of the active-constraint system at a point
/// (thin coefficients assumed). `f64::INFINITY` when fewer than `n`
/// independent constraints are active — the point is not a proper vertex.
pub fn condition_at(p: &IntervalLinearProgram, point: &BTreeMap<String, BigRational>) -> f64 {
    let n = p.variables.len();
    let Ok(coeffs) = thin_coefficients(p) else {
        return f64::INFINITY;
    };
    let x: Vec<BigRational> = p.variables.iter().map(|v| point[v].clone()).collect();
    let mut active: Vec<Vec<BigRational>> = Vec::new();
    for (g, h) in inequalities(p, &coeffs) {
        let val: BigRational = g.iter().zip(&x).map(|(a, b)| a * b).sum();
        if val == h {
            active.push(g);
        }
    }
    let Some(basis) = independent_square(&active, n) else {
        return f64::INFINITY;
    };
    let Some(inv) = invert(&basis) else {
        return f64::INFINITY;
    };
    inf_norm(&basis) * inf_norm(&inv)
}

fn independent_square(rows: &[Vec<BigRational>], n: usize) -> Option<Vec<Vec<BigRational>>> {
    let mut chosen: Vec<Vec<BigRational>> = Vec::new();
    let mut reduced: Vec<Vec<BigRational>> = Vec::new();
    for row in rows {
        let mut work = row.clone();
        for lead in &reduced {
            let col = lead.iter().position(|e| !e.is_zero()).unwrap();
            if !work[col].is_zero() {
                let f = &work[col] / &lead[col];
                for (w, l) in work.iter_mut().zip(lead) {
                    *w -= &f * l;
                }
            }
        }
        if work.iter().any(|e| !e.is_zero()) {
            chosen.push(row.clone());
            reduced.push(work);
            if chosen.len() == n {
                return Some(chosen);
            }
        }
    }
    None
}

fn invert(a: &[Vec<BigRational>]) -> Option<Vec<Vec<BigRational>>> {
    let n = a.len();
    let mut w: Vec<Vec<BigRational>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| {
                if i == j {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !w[r][col].is_zero())?;
        w.swap(col, piv);
        let d = w[col][col].clone();
        for e in w[col].iter_mut() {
            *e /= &d;
        }
        let lead = w[col].clone();
        for (r, row) in w.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (e, le) in row.iter_mut().zip(&lead) {
                *e -= &f * le;
            }
        }
    }
    Some(w.into_iter().map(|row| row[n..].to_vec()).collect())
}

fn inf_norm(a: &[Vec<BigRational>]) -> f64 {
    a.iter()
        .map(|row| {
            row.iter()
                .map(|e| e.abs())
                .sum::<BigRational>()
                .to_f64()
                .unwrap_or(f64::INFINITY)
        })
        .fold(0.0, f64::max)
}
