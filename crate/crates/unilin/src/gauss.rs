//! Interval Gaussian elimination for linear systems with interval
//! right-hand sides (and possibly interval coefficients).
//!
//! Forward elimination zeroes entries exactly — for every realization the
//! eliminated coefficient is exactly zero, so substituting `[0,0]` is sound
//! and avoids spurious growth. Pivots never contain zero; columns offering
//! only zero-containing pivots stay unresolved and contribute their box
//! interval during back substitution.

use crate::interval::Interval;
use crate::relax::Row;
use crate::safebound::VarBox;

pub struct GaussResult {
    pub box_: VarBox,
    /// Variables actually resolved by back substitution, in pivot order.
    pub resolved: Vec<String>,
    /// False when not a single pivot could be chosen (output box = input).
    pub progress: bool,
}

/// Eliminates `rows` (equations `form ∈ bound`) over `variables`, following
/// the explicit `order` when given, else picking the maximum-mignitude pivot
/// globally. The result intersects back substitution with `box_`; an empty
/// intersection or a vanished row with a bound excluding zero marks the box
/// infeasible.
pub fn interval_gauss(
    rows: &[Row],
    variables: &[String],
    order: Option<&[String]>,
    box_: &VarBox,
) -> GaussResult {
    let m = rows.len();
    let n = variables.len();
    let mut a: Vec<Vec<Interval>> = rows
        .iter()
        .map(|row| variables.iter().map(|v| row.form.coeff(v)).collect())
        .collect();
    let mut b: Vec<Interval> = rows.iter().map(|row| row.bound).collect();
    let mut active = vec![true; m];
    let mut unresolved = vec![true; n];
    let mut pivots: Vec<(usize, usize)> = Vec::new();

    let pick_row = |a: &[Vec<Interval>], active: &[bool], c: usize| -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (r, row) in a.iter().enumerate() {
            if !active[r] {
                continue;
            }
            let mig = row[c].mignitude();
            if mig > 0.0 && best.map_or(true, |(_, bm)| mig > bm) {
                best = Some((r, mig));
            }
        }
        best.map(|(r, _)| r)
    };

    fn eliminate(
        a: &mut [Vec<Interval>],
        b: &mut [Interval],
        active: &mut [bool],
        r: usize,
        c: usize,
    ) {
        active[r] = false;
        let pivot = a[r][c];
        let pivot_row = a[r].clone();
        let pivot_rhs = b[r];
        for (i, row) in a.iter_mut().enumerate() {
            if !active[i] || row[c] == Interval::ZERO {
                continue;
            }
            let f = row[c].div(pivot);
            for (j, e) in row.iter_mut().enumerate() {
                if j != c {
                    *e = e.sub(f.mul(pivot_row[j]));
                }
            }
            row[c] = Interval::ZERO;
            b[i] = b[i].sub(f.mul(pivot_rhs));
        }
    }

    match order {
        Some(names) => {
            for name in names {
                let Some(c) = variables.iter().position(|v| v == name) else {
                    continue;
                };
                if !unresolved[c] {
                    continue;
                }
                if let Some(r) = pick_row(&a, &active, c) {
                    eliminate(&mut a, &mut b, &mut active, r, c);
                    unresolved[c] = false;
                    pivots.push((r, c));
                }
            }
        }
        None => loop {
            let mut best: Option<(usize, usize, f64)> = None;
            for r in 0..m {
                if !active[r] {
                    continue;
                }
                for c in 0..n {
                    if !unresolved[c] {
                        continue;
                    }
                    let mig = a[r][c].mignitude();
                    if mig > 0.0 && best.map_or(true, |(_, _, bm)| mig > bm) {
                        best = Some((r, c, mig));
                    }
                }
            }
            let Some((r, c, _)) = best else { break };
            eliminate(&mut a, &mut b, &mut active, r, c);
            unresolved[c] = false;
            pivots.push((r, c));
        },
    }

    let mut out = box_.clone();
    let progress = !pivots.is_empty();

    // Rows reduced to nothing must still admit a zero sum.
    for i in 0..m {
        if active[i]
            && a[i].iter().all(|e| *e == Interval::ZERO)
            && !b[i].contains(0.0)
        {
            out.mark_infeasible("equations eliminate to an impossible constant".to_string());
            return GaussResult {
                box_: out,
                resolved: Vec::new(),
                progress,
            };
        }
    }

    let mut values: Vec<Option<Interval>> = vec![None; n];
    let mut resolved = Vec::with_capacity(pivots.len());
    for &(r, c) in pivots.iter().rev() {
        let mut acc = b[r];
        for j in 0..n {
            if j == c || a[r][j] == Interval::ZERO {
                continue;
            }
            let xj = values[j].unwrap_or_else(|| box_.get(&variables[j]));
            acc = acc.sub(a[r][j].mul(xj));
        }
        let val = acc.div(a[r][c]);
        if !out.intersect_var(&variables[c], val) {
            return GaussResult {
                box_: out,
                resolved,
                progress,
            };
        }
        values[c] = Some(out.get(&variables[c]));
        resolved.push(variables[c].clone());
    }
    resolved.reverse();
    GaussResult {
        box_: out,
        resolved,
        progress,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;
    use crate::relax::{relax, LinearForm};
    use crate::Model;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn row(coeffs: &[(&str, f64)], lo: f64, hi: f64) -> Row {
        let mut form = LinearForm::zero();
        for &(n, k) in coeffs {
            form.coefficients
                .insert(n.to_string(), Interval::point(k));
        }
        Row {
            form,
            bound: Interval::new(lo, hi),
        }
    }

    fn names(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    fn square_rows() -> Vec<Row> {
        vec![
            row(&[("x", 1.0), ("y", 1.0)], 0.0, 1.0),
            row(&[("x", 1.0), ("y", -1.0)], 0.0, 1.0),
        ]
    }

    #[test]
    fn elimination_order_changes_the_enclosure() {
        let vars = names(&["x", "y"]);
        let free = VarBox::entire(vars.clone());

        let x_first = interval_gauss(&square_rows(), &vars, Some(&names(&["x", "y"])), &free);
        assert!(x_first.progress);
        assert_eq!(x_first.box_.get("x"), Interval::new(-0.5, 1.5));
        assert_eq!(x_first.box_.get("y"), Interval::new(-0.5, 0.5));

        let y_first = interval_gauss(&square_rows(), &vars, Some(&names(&["y", "x"])), &free);
        assert_eq!(y_first.box_.get("x"), Interval::new(0.0, 1.0));
        assert_eq!(y_first.box_.get("y"), Interval::new(-1.0, 1.0));
    }

    #[test]
    fn automatic_pivoting_matches_some_order() {
        let vars = names(&["x", "y"]);
        let free = VarBox::entire(vars.clone());
        let auto = interval_gauss(&square_rows(), &vars, None, &free);
        assert!(auto.progress);
        assert_eq!(auto.resolved.len(), 2);
        // Ties in mignitude resolve to the first candidate, i.e. x first.
        assert_eq!(auto.box_.get("x"), Interval::new(-0.5, 1.5));
    }

    #[test]
    fn triangular_thin_systems_are_exact() {
        let vars = names(&["x", "y"]);
        let rows = vec![
            row(&[("x", 1.0), ("y", 1.0)], 3.0, 3.0),
            row(&[("y", 1.0)], 1.0, 1.0),
        ];
        let res = interval_gauss(&rows, &vars, None, &VarBox::entire(vars.clone()));
        assert_eq!(res.box_.get("x"), Interval::point(2.0));
        assert_eq!(res.box_.get("y"), Interval::point(1.0));
    }

    #[test]
    fn zero_containing_pivots_are_skipped() {
        let vars = names(&["x", "y"]);
        let mut form = LinearForm::zero();
        form.coefficients
            .insert("x".to_string(), Interval::new(-1.0, 1.0));
        form.coefficients.insert("y".to_string(), Interval::ONE);
        let rows = vec![Row {
            form,
            bound: Interval::point(0.0),
        }];
        let mut boxed = VarBox::entire(vars.clone());
        boxed.set("x", Interval::new(2.0, 3.0));
        let res = interval_gauss(&rows, &vars, None, &boxed);
        assert!(res.progress);
        assert_eq!(res.resolved, vec!["y".to_string()]);
        // y = 0 - [-1,1]·[2,3] = [-3,3]
        assert_eq!(res.box_.get("y"), Interval::new(-3.0, 3.0));
        assert_eq!(res.box_.get("x"), Interval::new(2.0, 3.0));
    }

    #[test]
    fn no_pivot_means_no_progress() {
        let vars = names(&["x"]);
        let mut form = LinearForm::zero();
        form.coefficients
            .insert("x".to_string(), Interval::new(-1.0, 1.0));
        let rows = vec![Row {
            form,
            bound: Interval::point(0.0),
        }];
        let free = VarBox::entire(vars.clone());
        let res = interval_gauss(&rows, &vars, None, &free);
        assert!(!res.progress);
        assert!(res.resolved.is_empty());
        assert_eq!(res.box_.get("x"), Interval::ENTIRE);
    }

    #[test]
    fn contradictory_equations_are_flagged() {
        let vars = names(&["x"]);
        let rows = vec![
            row(&[("x", 1.0)], 0.0, 0.0),
            row(&[("x", 1.0)], 1.0, 1.0),
        ];
        let res = interval_gauss(&rows, &vars, None, &VarBox::entire(vars.clone()));
        assert!(res.box_.is_infeasible());
    }

    #[test]
    fn ill_conditioned_system_resolves_tightly() {
        let mut m = Model::parse(
            "x + y = 0.0000003; x + (1 + 0.0000001) * y = 0.0000001;",
        )
        .unwrap();
        m.evaluate_ranges();
        let p = relax(&m).unwrap();
        assert_eq!(p.rows.len(), 2);
        let res = interval_gauss(&p.rows, &p.variables, None, &p.box_);
        let x = res.box_.get("x");
        let y = res.box_.get("y");
        assert!(x.contains(2.0 + 3.0e-7), "{x:?}");
        assert!(y.contains(-2.0), "{y:?}");
        assert!(x.width() <= 1e-6, "x width {}", x.width());
        assert!(y.width() <= 1e-6, "y width {}", y.width());
    }

    #[test]
    fn random_realizations_stay_inside() {
        // Systems built around known rational solutions: A·s ∈ bound by
        // construction, so s must land in the output box.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for case in 0..30 {
            let n = rng.gen_range(2..=3);
            let vars: Vec<String> = (0..n).map(|j| format!("v{j}")).collect();
            let mut sols: Vec<Vec<BigRational>> = Vec::new();
            for _ in 0..10 {
                sols.push(
                    (0..n)
                        .map(|_| {
                            BigRational::new(
                                BigInt::from(rng.gen_range(-16i64..=16)),
                                BigInt::from(4),
                            )
                        })
                        .collect(),
                );
            }
            let mut rows = Vec::new();
            for _ in 0..n {
                let coeffs: Vec<i64> = (0..n).map(|_| rng.gen_range(-4i64..=4)).collect();
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for s in &sols {
                    let v: BigRational = coeffs
                        .iter()
                        .zip(s)
                        .map(|(&k, x)| BigRational::from_integer(BigInt::from(k)) * x)
                        .sum();
                    lo = lo.min(rat::f64_below(&v));
                    hi = hi.max(rat::f64_above(&v));
                }
                let mut form = LinearForm::zero();
                for (j, &k) in coeffs.iter().enumerate() {
                    if k != 0 {
                        form.coefficients
                            .insert(vars[j].clone(), Interval::point(k as f64));
                    }
                }
                rows.push(Row {
                    form,
                    bound: Interval::new(lo, hi),
                });
            }
            let mut boxed = VarBox::entire(vars.clone());
            for v in &vars {
                boxed.set(v, Interval::new(-100.0, 100.0));
            }
            let res = interval_gauss(&rows, &vars, None, &boxed);
            assert!(!res.box_.is_infeasible(), "case {case}");
            for s in &sols {
                for (j, v) in vars.iter().enumerate() {
                    let iv = res.box_.get(v);
                    let lo = rat::rational_of(iv.lo());
                    let hi = rat::rational_of(iv.hi());
                    assert!(
                        lo <= s[j] && s[j] <= hi,
                        "case {case}: {v} = {} outside {iv:?}",
                        s[j]
                    );
                }
            }
        }
    }
}
