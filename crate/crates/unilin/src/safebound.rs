//! Rigorous per-variable bounds from non-reliable simplex output, and the
//! enclosure-tightening driver built on them.
//!
//! The certification argument: for any multipliers y with admissible signs,
//! every feasible x satisfies Σ yᵢ·(rowᵢ·x) ≥ Σ yᵢ·(bound side picked by the
//! sign of yᵢ). Adding the residual r = c − Σ yᵢ·rowᵢ evaluated over the
//! prior box gives c·x ≥ ⌊r·box⌋ + ⌊Σ yᵢ·sideᵢ⌋ — a true lower bound no
//! matter how wrong the simplex was, computed entirely in directed-rounding
//! arithmetic. Interval coefficients only strengthen this: the residual is
//! formed with interval operations, so it covers every realization at once.

use crate::fp;
use crate::interval::{dot_lower, Interval};
use crate::rat;
use crate::relax::{Direction, IntervalLinearProgram, LinearForm};
use crate::simplex::{self, Status};
use num_traits::One;
use std::collections::BTreeMap;

/// A named box of variable enclosures. Intervals are nonempty unless the
/// whole box is marked infeasible.
#[derive(Debug, Clone, PartialEq)]
pub struct VarBox {
    vars: BTreeMap<String, Interval>,
    infeasible: Option<String>,
}

impl VarBox {
    pub fn new(vars: BTreeMap<String, Interval>) -> VarBox {
        debug_assert!(vars.values().all(|iv| !iv.is_empty()));
        VarBox {
            vars,
            infeasible: None,
        }
    }

    pub fn entire(names: impl IntoIterator<Item = String>) -> VarBox {
        VarBox::new(
            names
                .into_iter()
                .map(|n| (n, Interval::ENTIRE))
                .collect(),
        )
    }

    pub fn get(&self, name: &str) -> Interval {
        self.vars.get(name).copied().unwrap_or(Interval::ENTIRE)
    }

    pub fn set(&mut self, name: &str, iv: Interval) {
        debug_assert!(!iv.is_empty());
        self.vars.insert(name.to_string(), iv);
    }

    /// Intersects one variable's interval; an empty result marks the box
    /// infeasible (the interval keeps its prior value).
    pub fn intersect_var(&mut self, name: &str, iv: Interval) -> bool {
        let cur = self.get(name);
        let new = cur.intersect(iv);
        if new.is_empty() {
            self.mark_infeasible(format!("empty enclosure for '{name}'"));
            false
        } else {
            self.vars.insert(name.to_string(), new);
            true
        }
    }

    pub fn mark_infeasible(&mut self, reason: String) {
        if self.infeasible.is_none() {
            self.infeasible = Some(reason);
        }
    }

    pub fn is_infeasible(&self) -> bool {
        self.infeasible.is_some()
    }

    pub fn infeasible_reason(&self) -> Option<&str> {
        self.infeasible.as_deref()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Interval)> {
        self.vars.iter()
    }

    pub fn names(&self) -> impl Iterator<Item = &String> {
        self.vars.keys()
    }

    /// Containment partial order: every interval of `self` inside `other`'s.
    pub fn subset_of(&self, other: &VarBox) -> bool {
        self.vars
            .iter()
            .all(|(n, iv)| other.get(n).contains_interval(iv))
    }
}

pub const DEFAULT_SWEEPS: usize = 3;
pub const IMPROVE_TAU: f64 = 0.01;

/// A certified bound together with the evidence it was computed from.
#[derive(Debug, Clone)]
pub struct SafeBoundReport {
    /// For the lower-bound operations: ≤ every feasible objective value
    /// (−∞ when the duals certify nothing). The upper-bound counterpart
    /// flips the inequality.
    pub bound: f64,
    /// Interval residual `r = objective − Σ yᵢ·rowᵢ`.
    pub residual: LinearForm,
    /// Multipliers as actually used, after sign clamping.
    pub used_duals: Vec<f64>,
}

pub struct TightenReport {
    pub sweeps: usize,
    pub simplex_iterations: usize,
}

/// Certified lower bound of an objective form over the program's feasible
/// set, from arbitrary (even garbage) dual multipliers:
///
/// 1. clamp every multiplier to the sign its row's bounds admit,
/// 2. form the interval residual `r = objective − Σ yᵢ·rowᵢ`,
/// 3. bound = ⌊r·box⌋ + ⌊Σ yᵢ·(yᵢ ≥ 0 ? Lᵢ : Uᵢ)⌋, all rounded downward.
///
/// Soundness needs nothing from the duals: any clamped y gives a valid
/// inequality, only its tightness varies.
fn certified_lower(
    p: &IntervalLinearProgram,
    objective: &LinearForm,
    duals: &[f64],
    box_: &VarBox,
) -> SafeBoundReport {
    let ext = p.extended_rows();
    let mut used = vec![0.0; ext.len()];
    let mut r = objective.clone();
    let mut sides = 0.0f64;
    for (i, row) in ext.iter().enumerate() {
        let mut y = duals.get(i).copied().unwrap_or(0.0);
        if !y.is_finite()
            || (y > 0.0 && row.bound.lo() == f64::NEG_INFINITY)
            || (y < 0.0 && row.bound.hi() == f64::INFINITY)
        {
            y = 0.0;
        }
        if y == 0.0 {
            continue;
        }
        used[i] = y;
        r = r.sub(&row.form.scale(Interval::point(y)));
        let side = if y > 0.0 { row.bound.lo() } else { row.bound.hi() };
        sides = fp::add_down(sides, fp::mul_down(y, side));
    }
    let pairs = r
        .coefficients
        .iter()
        .map(|(name, &k)| (k, box_.get(name)));
    let bound = fp::add_down(fp::add_down(dot_lower(pairs), sides), r.constant.lo());
    SafeBoundReport {
        bound,
        residual: r,
        used_duals: used,
    }
}

/// `bound ≤ min v` over the feasible set; duals should come from a
/// `solve_lp(v, Min)` run (any values are sound, good ones are tight).
pub fn safe_lower_bound(
    p: &IntervalLinearProgram,
    variable: &str,
    duals: &[f64],
    box_: &VarBox,
) -> SafeBoundReport {
    certified_lower(p, &LinearForm::from_variable(variable), duals, box_)
}

/// `bound ≥ max v`, by negation symmetry; duals from a `solve_lp(v, Max)`
/// run.
pub fn safe_upper_bound(
    p: &IntervalLinearProgram,
    variable: &str,
    duals: &[f64],
    box_: &VarBox,
) -> SafeBoundReport {
    let neg = LinearForm::from_variable(variable).neg();
    let mut report = certified_lower(p, &neg, duals, box_);
    report.bound = -report.bound;
    report
}

/// Rigorous infeasibility: a certified positive lower bound on the zero
/// objective means no feasible point exists.
pub fn certify_infeasible(p: &IntervalLinearProgram, duals: &[f64], box_: &VarBox) -> bool {
    certified_lower(p, &LinearForm::zero(), duals, box_).bound > 0.0
}

fn improved(old: f64, new: f64, tau: f64) -> bool {
    if old.is_infinite() {
        return new.is_finite();
    }
    old - new >= tau * old && old > new
}

/// Per-variable min/max solves, each certified and intersected into the box;
/// repeated up to `sweeps` times while some width improves by a relative
/// factor ≥ `tau`. Intersections apply at sweep barriers, so within a sweep
/// every solve sees the same box. A certified-infeasible exit returns the
/// box marked infeasible; uncertified simplex failures leave the variable's
/// prior interval in place.
pub fn tighten_box(
    p: &IntervalLinearProgram,
    sweeps: usize,
    tau: f64,
) -> (VarBox, TightenReport) {
    let mut box_ = p.box_.clone();
    let mut report = TightenReport {
        sweeps: 0,
        simplex_iterations: 0,
    };
    if box_.is_infeasible() {
        return (box_, report);
    }
    for _ in 0..sweeps {
        report.sweeps += 1;
        let mut q = p.clone();
        q.box_ = box_.clone();
        let mut next = box_.clone();
        let mut any_improved = false;
        for name in &p.variables {
            let mut side = |direction: Direction| -> f64 {
                let sol = simplex::solve_lp(&q, name, direction, None);
                report.simplex_iterations += sol.iterations;
                match (sol.status, direction) {
                    (Status::Infeasible, _) => {
                        if certify_infeasible(&q, &sol.duals, &box_) {
                            f64::NAN // caller turns this into an infeasible box
                        } else {
                            match direction {
                                Direction::Min => f64::NEG_INFINITY,
                                Direction::Max => f64::INFINITY,
                            }
                        }
                    }
                    (_, Direction::Min) => safe_lower_bound(&q, name, &sol.duals, &box_).bound,
                    (_, Direction::Max) => safe_upper_bound(&q, name, &sol.duals, &box_).bound,
                }
            };
            let lower = side(Direction::Min);
            let upper = side(Direction::Max);
            if lower.is_nan() || upper.is_nan() || lower > upper {
                next.mark_infeasible(format!("certified infeasible while bounding '{name}'"));
                return (next, report);
            }
            if !next.intersect_var(name, Interval::new(lower, upper)) {
                return (next, report);
            }
            any_improved |= improved(
                box_.get(name).width(),
                next.get(name).width(),
                tau,
            );
        }
        box_ = next;
        if !any_improved {
            break;
        }
    }
    (box_, report)
}

fn exact_number(v: f64) -> String {
    let r = rat::rational_of(v);
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// The box as single-variable constraints in the modeling language, one
/// inequality per finite side. The flag is false for an infeasible box,
/// whose text is the unsatisfiable `1 = 0;`.
pub fn enclosure_to_constraints(box_: &VarBox) -> (String, bool) {
    if box_.is_infeasible() {
        return ("1 = 0;".to_string(), false);
    }
    let mut parts = Vec::new();
    for (name, iv) in box_.iter() {
        if iv.lo() != f64::NEG_INFINITY {
            parts.push(format!("{} <= {};", exact_number(iv.lo()), name));
        }
        if iv.hi() != f64::INFINITY {
            parts.push(format!("{} <= {};", name, exact_number(iv.hi())));
        }
    }
    (parts.join(" "), true)
}
