//! The combination pipeline: relax the model, split off thin equations,
//! eliminate those with interval Gauss, then run the certified LP tightener
//! over everything against the narrowed box.

use crate::gauss::interval_gauss;
use crate::model::Model;
use crate::relax::{relax, IntervalLinearProgram, Row};
use crate::safebound::{self, VarBox};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMode {
    Lin,
    Gauss,
    Combined,
}

impl SolverMode {
    pub fn name(self) -> &'static str {
        match self {
            SolverMode::Lin => "lin",
            SolverMode::Gauss => "gauss",
            SolverMode::Combined => "combined",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub mode: SolverMode,
    /// Relative width threshold below which a row counts as a thin equation.
    pub thin_eps: f64,
    pub sweeps: usize,
    /// Explicit Gauss elimination order (diagnostic; default automatic).
    pub order: Option<Vec<String>>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            mode: SolverMode::Combined,
            thin_eps: 1e-10,
            sweeps: safebound::DEFAULT_SWEEPS,
            order: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveStatus {
    Solved,
    /// Which pipeline stage proved there is no solution.
    Infeasible { stage: &'static str },
}

#[derive(Debug, Clone, Default)]
pub struct RunReport {
    /// Box after relaxation folded single-variable rows.
    pub relaxed_box: Option<VarBox>,
    /// Box after interval Gauss, when that stage ran.
    pub gauss_box: Option<VarBox>,
    pub sweeps: usize,
    pub simplex_iterations: usize,
    pub gauss_resolved: usize,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub box_: VarBox,
    pub report: RunReport,
}

impl SolveResult {
    fn infeasible(stage: &'static str, box_: VarBox, report: RunReport) -> SolveResult {
        SolveResult {
            status: SolveStatus::Infeasible { stage },
            box_,
            report,
        }
    }
}

/// Partitions the rows into thin equations (relative bound width at most
/// `thin_eps`) and everything else.
pub fn split_thin(p: &IntervalLinearProgram, thin_eps: f64) -> (Vec<Row>, Vec<Row>) {
    let mut thin = Vec::new();
    let mut rest = Vec::new();
    for row in &p.rows {
        let w = row.bound.width();
        if w.is_finite() && w <= thin_eps * f64::max(1.0, row.bound.mid().abs()) {
            thin.push(row.clone());
        } else {
            rest.push(row.clone());
        }
    }
    (thin, rest)
}

pub fn solve(mut model: Model, options: &SolveOptions) -> SolveResult {
    model.evaluate_ranges();
    let var_names: Vec<String> = model.variables.keys().cloned().collect();
    if let Some(reason) = &model.infeasible {
        let mut b = VarBox::entire(var_names);
        b.mark_infeasible(reason.clone());
        return SolveResult::infeasible("evaluate", b, RunReport::default());
    }
    let p = match relax(&model) {
        Ok(p) => p,
        Err(reason) => {
            let mut b = VarBox::entire(var_names);
            b.mark_infeasible(reason);
            return SolveResult::infeasible("relax", b, RunReport::default());
        }
    };
    let mut report = RunReport {
        relaxed_box: Some(p.box_.clone()),
        ..RunReport::default()
    };
    let order = options.order.as_deref();

    // Elimination is an equation method: a row with an infinite bound side is
    // an inequality and stays with the LP stage.
    let gauss_input: Option<Vec<Row>> = match options.mode {
        SolverMode::Lin => None,
        SolverMode::Gauss => Some(
            p.rows
                .iter()
                .filter(|r| r.bound.lo().is_finite() && r.bound.hi().is_finite())
                .cloned()
                .collect(),
        ),
        SolverMode::Combined => Some(split_thin(&p, options.thin_eps).0),
    };
    let narrowed = gauss_input.as_ref().map_or(false, |rows| !rows.is_empty())
        && options.mode == SolverMode::Combined;
    let mut box_ = p.box_.clone();
    if let Some(rows) = gauss_input {
        let g = interval_gauss(&rows, &p.variables, order, &box_);
        report.gauss_resolved = g.resolved.len();
        report.gauss_box = Some(g.box_.clone());
        box_ = g.box_;
        if box_.is_infeasible() {
            return SolveResult::infeasible("gauss", box_, report);
        }
    }
    if options.mode == SolverMode::Gauss {
        return SolveResult {
            status: SolveStatus::Solved,
            box_,
            report,
        };
    }

    let mut q = p.clone();
    q.box_ = box_;
    let (mut tight, tr) = safebound::tighten_box(&q, options.sweeps, safebound::IMPROVE_TAU);
    report.sweeps = tr.sweeps;
    report.simplex_iterations = tr.simplex_iterations;
    if tight.is_infeasible() {
        return SolveResult::infeasible("lin", tight, report);
    }
    if narrowed {
        // A narrower starting box moves the float pivot path, so certified
        // bounds from the narrowed run are not pointwise below the plain
        // ones; intersecting with a plain run keeps the combination at least
        // as tight as either stage alone.
        let (base, br) = safebound::tighten_box(&p, options.sweeps, safebound::IMPROVE_TAU);
        report.simplex_iterations += br.simplex_iterations;
        if base.is_infeasible() {
            return SolveResult::infeasible("lin", base, report);
        }
        let names: Vec<String> = tight.names().cloned().collect();
        for name in &names {
            tight.intersect_var(name, base.get(name));
        }
        if tight.is_infeasible() {
            return SolveResult::infeasible("lin", tight, report);
        }
    }
    SolveResult {
        status: SolveStatus::Solved,
        box_: tight,
        report,
    }
}
