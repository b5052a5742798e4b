//! Linear relaxation: extracts from a range-annotated model the interval
//! linear program it logically implies.
//!
//! Three-case rule per constraint: a relation between two linear expressions
//! becomes one row (difference form, constant folded into the bound); a
//! maximal linear subexpression sitting directly under a nonlinear operator
//! becomes an enclosure row `e in I`; everything else contributes nothing.

use crate::interval::Interval;
use crate::model::{Dag, Model, NodeId, NodeKind, Rel};
use crate::rat;
use crate::safebound::VarBox;
use std::collections::BTreeMap;

/// Linear expression with interval coefficients over named variables.
/// Variables absent from the map have coefficient `[0,0]` (exact zeros are
/// normalized away so equal forms compare equal).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearForm {
    pub coefficients: BTreeMap<String, Interval>,
    pub constant: Interval,
}

impl LinearForm {
    pub fn zero() -> LinearForm {
        LinearForm {
            coefficients: BTreeMap::new(),
            constant: Interval::ZERO,
        }
    }

    pub fn from_constant(c: Interval) -> LinearForm {
        debug_assert!(!c.is_empty());
        LinearForm {
            coefficients: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn from_variable(name: &str) -> LinearForm {
        let mut coefficients = BTreeMap::new();
        coefficients.insert(name.to_string(), Interval::ONE);
        LinearForm {
            coefficients,
            constant: Interval::ZERO,
        }
    }

    pub fn coeff(&self, name: &str) -> Interval {
        self.coefficients
            .get(name)
            .copied()
            .unwrap_or(Interval::ZERO)
    }

    pub fn is_constant(&self) -> bool {
        self.coefficients.is_empty()
    }

    fn normalized(mut self) -> LinearForm {
        self.coefficients.retain(|_, iv| *iv != Interval::ZERO);
        self
    }

    pub fn neg(&self) -> LinearForm {
        LinearForm {
            coefficients: self
                .coefficients
                .iter()
                .map(|(n, iv)| (n.clone(), iv.neg()))
                .collect(),
            constant: self.constant.neg(),
        }
    }

    pub fn add(&self, other: &LinearForm) -> LinearForm {
        let mut coefficients = self.coefficients.clone();
        for (name, &iv) in &other.coefficients {
            let cur = coefficients
                .get(name)
                .copied()
                .unwrap_or(Interval::ZERO);
            coefficients.insert(name.clone(), cur.add(iv));
        }
        LinearForm {
            coefficients,
            constant: self.constant.add(other.constant),
        }
        .normalized()
    }

    pub fn sub(&self, other: &LinearForm) -> LinearForm {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: Interval) -> LinearForm {
        debug_assert!(!k.is_empty());
        LinearForm {
            coefficients: self
                .coefficients
                .iter()
                .map(|(n, iv)| (n.clone(), iv.mul(k)))
                .collect(),
            constant: self.constant.mul(k),
        }
        .normalized()
    }

    /// Division by a constant interval; `None` when 0 is inside (the quotient
    /// form would not be linear-with-intervals any more).
    pub fn div_by(&self, k: Interval) -> Option<LinearForm> {
        if k.contains(0.0) {
            return None;
        }
        Some(
            LinearForm {
                coefficients: self
                    .coefficients
                    .iter()
                    .map(|(n, iv)| (n.clone(), iv.div(k)))
                    .collect(),
                constant: self.constant.div(k),
            }
            .normalized(),
        )
    }
}

/// One relaxed constraint: `form` (no constant part) takes a value in
/// `bound` for some realization of the coefficient intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub form: LinearForm,
    pub bound: Interval,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Min,
    Max,
}

#[derive(Debug, Clone)]
pub struct IntervalLinearProgram {
    /// All model variables, ordered (alphabetical; also the box iteration
    /// order).
    pub variables: Vec<String>,
    pub rows: Vec<Row>,
    pub box_: VarBox,
}

impl IntervalLinearProgram {
    /// Convenience constructor for tests and diagnostics.
    pub fn from_parts(rows: Vec<Row>, box_: VarBox) -> IntervalLinearProgram {
        let variables = box_.names().cloned().collect();
        IntervalLinearProgram {
            variables,
            rows,
            box_,
        }
    }

    /// The program rows followed by one unit row per variable with a bounded
    /// box side. This is the row list the LP solver constrains against and
    /// the index space of its dual multipliers.
    pub fn extended_rows(&self) -> Vec<Row> {
        let mut out = self.rows.clone();
        for name in &self.variables {
            let dom = self.box_.get(name);
            if dom == Interval::ENTIRE {
                continue;
            }
            out.push(Row {
                form: LinearForm::from_variable(name),
                bound: dom,
            });
        }
        out
    }
}

/// Per-node linear forms, bottom-up over the whole arena; `None` marks a
/// nonlinear node.
pub fn linear_forms(dag: &Dag) -> Vec<Option<LinearForm>> {
    let mut out: Vec<Option<LinearForm>> = Vec::with_capacity(dag.len());
    for (_, node) in dag.iter() {
        let lf = match &node.kind {
            NodeKind::Var(name) => Some(LinearForm::from_variable(name)),
            NodeKind::Const(r) => Some(LinearForm::from_constant(rat::enclose(r))),
            NodeKind::Neg(a) => out[*a].as_ref().map(LinearForm::neg),
            NodeKind::Add(a, b) => match (&out[*a], &out[*b]) {
                (Some(f), Some(g)) => Some(f.add(g)),
                _ => None,
            },
            NodeKind::Sub(a, b) => match (&out[*a], &out[*b]) {
                (Some(f), Some(g)) => Some(f.sub(g)),
                _ => None,
            },
            NodeKind::Mul(a, b) => match (&out[*a], &out[*b]) {
                (Some(f), Some(g)) if g.is_constant() => Some(f.scale(g.constant)),
                (Some(f), Some(g)) if f.is_constant() => Some(g.scale(f.constant)),
                _ => None,
            },
            NodeKind::Div(a, b) => match (&out[*a], &out[*b]) {
                (Some(f), Some(g)) if g.is_constant() => f.div_by(g.constant),
                _ => None,
            },
            NodeKind::Fun(..) | NodeKind::Chain { .. } => None,
        };
        out.push(lf);
    }
    out
}

/// Linear form of one node, or `None` for a nonlinear expression.
pub fn linear_form_of(dag: &Dag, id: NodeId) -> Option<LinearForm> {
    linear_forms(dag).swap_remove(id)
}

fn operands(kind: &NodeKind) -> Vec<NodeId> {
    match kind {
        NodeKind::Var(_) | NodeKind::Const(_) => Vec::new(),
        NodeKind::Neg(a) | NodeKind::Fun(_, a) => vec![*a],
        NodeKind::Add(a, b)
        | NodeKind::Sub(a, b)
        | NodeKind::Mul(a, b)
        | NodeKind::Div(a, b) => vec![*a, *b],
        NodeKind::Chain { items, .. } => items.clone(),
    }
}

// Flip a row so its first (alphabetically) coefficient has positive midpoint;
// rows over the same expression then compare equal regardless of which side
// of the relation the expression appeared on.
fn canonicalize(row: Row) -> Row {
    if let Some((_, &k)) = row.form.coefficients.iter().next() {
        if k.mid() < 0.0 {
            return Row {
                form: row.form.neg(),
                bound: row.bound.neg(),
            };
        }
    }
    row
}

/// Builds the interval linear program implied by a range-annotated model.
///
/// Returns `Err` with a reason when the model is already infeasible (empty
/// enclosure, contradictory constant relation, or an empty box after folding
/// single-variable rows).
pub fn relax(model: &Model) -> Result<IntervalLinearProgram, String> {
    if let Some(reason) = &model.infeasible {
        return Err(reason.clone());
    }
    let lfs = linear_forms(&model.dag);
    // (row, chain provenance): rows merge only within one chain, where the
    // underlying exact coefficient realization is shared.
    let mut pending: Vec<(Row, Option<usize>)> = Vec::new();

    for (chain_no, &root) in model.roots.iter().enumerate() {
        let NodeKind::Chain { items, rels } = &model.dag.node(root).kind else {
            continue;
        };
        for (k, rel) in rels.iter().enumerate() {
            let (Some(fa), Some(fb)) = (&lfs[items[k]], &lfs[items[k + 1]]) else {
                continue;
            };
            let d = fa.sub(fb);
            let base = match rel {
                Rel::Eq => Interval::ZERO,
                Rel::Le => Interval::new(f64::NEG_INFINITY, 0.0),
                Rel::Ge => Interval::new(0.0, f64::INFINITY),
            };
            let bound = base.sub(d.constant);
            let form = LinearForm {
                coefficients: d.coefficients,
                constant: Interval::ZERO,
            };
            pending.push((canonicalize(Row { form, bound }), Some(chain_no)));
        }
    }

    // Enclosure rows for maximal linear subexpressions under nonlinear nodes.
    // Chain nodes are skipped: their linear items are covered by the pair
    // rows, and range evaluation is forward-only, so a chain item's enclosure
    // never says more than the box already does.
    for (id, node) in model.dag.iter() {
        if lfs[id].is_some() || matches!(node.kind, NodeKind::Chain { .. }) {
            continue;
        }
        for op in operands(&node.kind) {
            let Some(f) = &lfs[op] else { continue };
            if f.is_constant() {
                continue;
            }
            let enc = model.dag.node(op).enclosure;
            if enc.is_empty() {
                return Err("empty range enclosure".to_string());
            }
            if enc.lo() == f64::NEG_INFINITY && enc.hi() == f64::INFINITY {
                continue;
            }
            let bound = enc.sub(f.constant);
            let form = LinearForm {
                coefficients: f.coefficients.clone(),
                constant: Interval::ZERO,
            };
            pending.push((canonicalize(Row { form, bound }), None));
        }
    }

    // Merge within chains; drop exact duplicates globally.
    let mut rows: Vec<(Row, Option<usize>)> = Vec::new();
    'next: for (row, origin) in pending {
        for (have, have_origin) in rows.iter_mut() {
            if have.form.coefficients != row.form.coefficients {
                continue;
            }
            if origin.is_some() && origin == *have_origin {
                let merged = have.bound.intersect(row.bound);
                if merged.is_empty() {
                    return Err("contradictory bounds in one constraint chain".to_string());
                }
                have.bound = merged;
                continue 'next;
            }
            if have.bound == row.bound {
                continue 'next; // identical row, regardless of origin
            }
        }
        rows.push((row, origin));
    }

    let mut box_ = VarBox::new(model.variables.clone());
    let mut out_rows = Vec::new();
    for (row, _) in rows {
        match row.form.coefficients.len() {
            0 => {
                // Constant relation: some realization of the (zero) form must
                // land in the bound, i.e. the bound must contain zero.
                if !row.bound.contains(0.0) {
                    return Err("constraint with no variables is violated".to_string());
                }
            }
            1 => {
                let (name, &k) = row.form.coefficients.iter().next().unwrap();
                if !k.contains(0.0) {
                    if !box_.intersect_var(name, row.bound.div(k)) {
                        return Err(format!("empty domain for '{name}'"));
                    }
                    continue;
                }
                out_rows.push(row);
            }
            _ => out_rows.push(row),
        }
    }

    Ok(IntervalLinearProgram {
        variables: model.variables.keys().cloned().collect(),
        rows: out_rows,
        box_,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn prepared(src: &str) -> Model {
        let mut m = Model::parse(src).unwrap();
        m.evaluate_ranges();
        m
    }

    fn thin(v: f64) -> Interval {
        Interval::point(v)
    }

    #[test]
    fn chain_pairs_fold_into_ranged_rows() {
        let p = relax(&prepared("0 <= x + y <= 1; 0 <= x - y <= 1;")).unwrap();
        assert_eq!(p.rows.len(), 2);
        let r0 = &p.rows[0];
        assert_eq!(r0.form.coeff("x"), thin(1.0));
        assert_eq!(r0.form.coeff("y"), thin(1.0));
        assert_eq!(r0.bound, Interval::new(0.0, 1.0));
        let r1 = &p.rows[1];
        assert_eq!(r1.form.coeff("x"), thin(1.0));
        assert_eq!(r1.form.coeff("y"), thin(-1.0));
        assert_eq!(r1.bound, Interval::new(0.0, 1.0));
        assert_eq!(p.box_.get("x"), Interval::ENTIRE);
        assert_eq!(p.box_.get("y"), Interval::ENTIRE);
    }

    #[test]
    fn nonlinear_constraint_yields_enclosure_row_only() {
        let p = relax(&prepared("x in [0, 1]; y in [0, 1]; sin(x + y) = 0;")).unwrap();
        assert_eq!(p.rows.len(), 1, "the sin relation itself contributes no row");
        let r = &p.rows[0];
        assert_eq!(r.form.coeff("x"), thin(1.0));
        assert_eq!(r.form.coeff("y"), thin(1.0));
        assert_eq!(r.bound, Interval::new(0.0, 2.0));
    }

    #[test]
    fn unbounded_nonlinear_model_relaxes_to_nothing() {
        let p = relax(&prepared("x * y = 1;")).unwrap();
        assert!(p.rows.is_empty());
        assert_eq!(p.box_.get("x"), Interval::ENTIRE);
        assert_eq!(p.box_.get("y"), Interval::ENTIRE);
    }

    #[test]
    fn single_variable_rows_become_box_updates() {
        let p = relax(&prepared("x >= 0; 2 * x <= 4; x - 1 >= -3;")).unwrap();
        assert!(p.rows.is_empty());
        assert_eq!(p.box_.get("x"), Interval::new(0.0, 2.0));
    }

    #[test]
    fn constant_relations() {
        assert!(relax(&prepared("1 = 2;")).is_err());
        assert!(relax(&prepared("1 <= 2;")).unwrap().rows.is_empty());
        assert!(relax(&prepared("2 <= 1;")).is_err());
        assert!(relax(&prepared("1 <= x <= 0;")).is_err());
    }

    #[test]
    fn infeasible_model_propagates() {
        assert!(relax(&prepared("x in [-2, -1]; ln(x) = 0;")).is_err());
    }

    #[test]
    fn rational_coefficients_get_tight_intervals() {
        let p = relax(&prepared("(1/3) * x + y = 1;")).unwrap();
        assert_eq!(p.rows.len(), 1);
        let k = p.rows[0].form.coeff("x");
        let third = BigRational::new(BigInt::from(1), BigInt::from(3));
        assert!(rat::rational_of(k.lo()) <= third && third <= rat::rational_of(k.hi()));
        assert!(k.width() <= 2.0 * ((1.0f64 / 3.0).next_up() - 1.0 / 3.0));
        assert_eq!(p.rows[0].form.coeff("y"), thin(1.0));
    }

    #[test]
    fn float_coefficients_stay_thin() {
        let p = relax(&prepared("0.5 * x - y = 1.5; x + 0.25 * y >= 2;")).unwrap();
        assert_eq!(p.rows.len(), 2);
        for row in &p.rows {
            for (_, iv) in &row.form.coefficients {
                assert!(iv.is_point(), "representable literals give thin coefficients");
            }
        }
        assert_eq!(p.rows[0].bound, thin(1.5));
    }

    #[test]
    fn nested_nonlinear_harvest() {
        // x*y is nonlinear, so both x and y (finite boxes) are harvested, and
        // the outer sum never forms a row.
        let p = relax(&prepared(
            "x in [1, 2]; y in [3, 4]; x * y + x = 5;",
        ))
        .unwrap();
        // x and y enclosure rows are single-variable, so they dissolve into
        // the box; the only row left could come from the chain, which is
        // nonlinear. Nothing remains.
        assert!(p.rows.is_empty());
        assert_eq!(p.box_.get("x"), Interval::new(1.0, 2.0));
        assert_eq!(p.box_.get("y"), Interval::new(3.0, 4.0));
    }

    #[test]
    fn shared_subexpression_row_deduplicated() {
        let p = relax(&prepared(
            "x in [0, 1]; y in [0, 1]; sin(x + y) = 0; cos(x + y) = 1;",
        ))
        .unwrap();
        assert_eq!(p.rows.len(), 1, "one enclosure row for the shared x+y");
    }

    // Exact-rational satisfaction check: a row holds at a point when the
    // interval of possible form values meets the bound.
    fn row_holds_exactly(row: &Row, point: &BTreeMap<String, BigRational>) -> bool {
        let mut lo = BigRational::new(BigInt::from(0), BigInt::from(1));
        let mut hi = lo.clone();
        for (name, iv) in &row.form.coefficients {
            let x = point[name].clone();
            let a = rat::rational_of(iv.lo()) * x.clone();
            let b = rat::rational_of(iv.hi()) * x;
            lo += a.clone().min(b.clone());
            hi += a.max(b);
        }
        let bl = row.bound.lo();
        let bh = row.bound.hi();
        (bl == f64::NEG_INFINITY || rat::rational_of(bl) <= hi)
            && (bh == f64::INFINITY || lo <= rat::rational_of(bh))
    }

    proptest! {
        #[test]
        fn relaxation_is_a_logical_consequence(num in -12i64..=12, den in 1i64..=4) {
            // Feasible points of the model found by parameterization: on the
            // line x = t, y = 1 - t/3 the first constraint holds exactly.
            let m = prepared(
                "x in [-4, 4]; y in [-4, 4]; x/3 + y = 1; 0 <= x - y <= 9; sin(y) <= 1;",
            );
            let t = BigRational::new(BigInt::from(num), BigInt::from(den));
            let mut point = BTreeMap::new();
            let one = BigRational::new(BigInt::from(1), BigInt::from(1));
            point.insert("x".to_string(), t.clone());
            point.insert("y".to_string(), one - t.clone() / BigRational::new(BigInt::from(3), BigInt::from(1)));
            // Reject parameters outside the model's own constraints.
            let sat = m.roots.iter().take(2).all(|&r| {
                crate::model::chain_holds_rational(&m.dag, r, &point).unwrap()
            }) && point.iter().all(|(n, v)| {
                let dom = m.variables[n];
                rat::rational_of(dom.lo()) <= *v && *v <= rat::rational_of(dom.hi())
            });
            prop_assume!(sat);
            let p = relax(&m).unwrap();
            for row in &p.rows {
                prop_assert!(row_holds_exactly(row, &point), "row {row:?} excludes a solution");
            }
            for name in ["x", "y"] {
                let iv = p.box_.get(name);
                let v = &point[name];
                prop_assert!(rat::rational_of(iv.lo()) <= *v && *v <= rat::rational_of(iv.hi()));
            }
        }
    }
}
