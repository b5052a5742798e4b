//! Command-line front end: read a model file, run the strategy, print
//! certified enclosures as constraints or JSON.

use crate::interval::Interval;
use crate::model::Model;
use crate::rat::{self, Decimal};
use crate::safebound::VarBox;
use crate::strategy::{self, SolveOptions, SolveResult, SolveStatus, SolverMode};
use clap::{Parser, ValueEnum};
use num_traits::Zero;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Lin,
    Gauss,
    Combined,
}

impl From<SolverArg> for SolverMode {
    fn from(a: SolverArg) -> SolverMode {
        match a {
            SolverArg::Lin => SolverMode::Lin,
            SolverArg::Gauss => SolverMode::Gauss,
            SolverArg::Combined => SolverMode::Combined,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputArg {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "unilin", about = "Certified interval enclosures for constraint models")]
pub struct Args {
    /// Model file (conventionally .ucl)
    pub file: PathBuf,
    /// Solver pipeline to run
    #[arg(long, value_enum, default_value_t = SolverArg::Combined)]
    pub solver: SolverArg,
    /// Explicit Gauss elimination order (diagnostic), e.g. x,y
    #[arg(long, value_delimiter = ',')]
    pub order: Option<Vec<String>>,
    /// Significant decimal digits for printed bounds
    #[arg(long, default_value_t = 17, value_parser = clap::value_parser!(u32).range(1..=50))]
    pub digits: u32,
    #[arg(long, value_enum, default_value_t = OutputArg::Text)]
    pub output: OutputArg,
    /// Relative bound width below which an equation counts as thin
    #[arg(long = "thin-eps", default_value_t = 1e-10)]
    pub thin_eps: f64,
    /// Tightening sweeps over all variables
    #[arg(long, default_value_t = 3)]
    pub sweeps: usize,
}

fn render(d: &Decimal) -> String {
    if d.mantissa.is_zero() {
        return "0".to_string();
    }
    let digits = d.mantissa.to_string();
    let len = digits.len() as i64;
    // Count of digits left of the decimal point.
    let point = len + d.exp10;
    let body = if d.exp10 >= 0 && point <= 21 {
        let mut s = digits;
        s.extend(std::iter::repeat('0').take(d.exp10 as usize));
        s
    } else if point > 0 && point <= 21 {
        let (int, frac) = digits.split_at(point as usize);
        format!("{int}.{frac}")
    } else if point > -6 && point <= 0 {
        format!("0.{}{}", "0".repeat(-point as usize), digits)
    } else {
        let (first, rest) = digits.split_at(1);
        let rest = rest.trim_end_matches('0');
        let exp = point - 1;
        if rest.is_empty() {
            format!("{first}e{exp}")
        } else {
            format!("{first}.{rest}e{exp}")
        }
    };
    let body = if body.contains('.') && !body.contains('e') {
        body.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        body
    };
    if d.neg {
        format!("-{body}")
    } else {
        body
    }
}

/// Decimal strings bracketing the interval outward at `digits` significant
/// decimals; parsing them back encloses `x`.
pub fn print_outward(x: Interval, digits: u32) -> (String, String) {
    assert!(digits >= 1);
    let lo = if x.lo() == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        render(&rat::decimal_below(&rat::rational_of(x.lo()), digits))
    };
    let hi = if x.hi() == f64::INFINITY {
        "inf".to_string()
    } else {
        render(&rat::decimal_above(&rat::rational_of(x.hi()), digits))
    };
    (lo, hi)
}

/// The solved box as re-parseable constraints, omitting infinite sides.
pub fn render_text(box_: &VarBox, digits: u32) -> String {
    let mut parts = Vec::new();
    for (name, iv) in box_.iter() {
        let (lo, hi) = print_outward(*iv, digits);
        if lo != "-inf" {
            parts.push(format!("{lo} <= {name};"));
        }
        if hi != "inf" {
            parts.push(format!("{name} <= {hi};"));
        }
    }
    parts.join(" ")
}

fn json_endpoint(v: f64, neg_label: &str, pos_label: &str) -> serde_json::Value {
    if v == f64::NEG_INFINITY {
        serde_json::Value::String(neg_label.to_string())
    } else if v == f64::INFINITY {
        serde_json::Value::String(pos_label.to_string())
    } else {
        serde_json::json!(v)
    }
}

pub fn render_json(status: &str, solver: SolverMode, result: Option<&SolveResult>) -> String {
    let mut variables = serde_json::Map::new();
    if let Some(res) = result {
        if res.status == SolveStatus::Solved {
            for (name, iv) in res.box_.iter() {
                variables.insert(
                    name.clone(),
                    serde_json::json!({
                        "lo": json_endpoint(iv.lo(), "-inf", "inf"),
                        "hi": json_endpoint(iv.hi(), "-inf", "inf"),
                    }),
                );
            }
        }
    }
    let report = result.map(|r| &r.report);
    serde_json::json!({
        "status": status,
        "solver": solver.name(),
        "variables": serde_json::Value::Object(variables),
        "report": {
            "sweeps": report.map_or(0, |r| r.sweeps),
            "simplex_iterations": report.map_or(0, |r| r.simplex_iterations),
            "gauss_resolved": report.map_or(0, |r| r.gauss_resolved),
        },
    })
    .to_string()
}

pub fn run(args: Args) -> i32 {
    let solver: SolverMode = args.solver.into();
    let fail = |msg: String| -> i32 {
        eprintln!("unilin: {msg}");
        if args.output == OutputArg::Json {
            println!("{}", render_json("error", solver, None));
        }
        2
    };
    if !(args.thin_eps.is_finite() && args.thin_eps >= 0.0) {
        return fail(format!("--thin-eps must be a finite nonnegative number, got {}", args.thin_eps));
    }
    let text = match std::fs::read_to_string(&args.file) {
        Ok(t) => t,
        Err(e) => return fail(format!("{}: {e}", args.file.display())),
    };
    let model = match Model::parse(&text) {
        Ok(m) => m,
        Err(e) => return fail(format!("{}:{e}", args.file.display())),
    };
    for w in &model.warnings {
        eprintln!("unilin: warning: {w}");
    }
    let options = SolveOptions {
        mode: solver,
        thin_eps: args.thin_eps,
        sweeps: args.sweeps,
        order: args.order.clone(),
    };
    let result = strategy::solve(model, &options);
    match &result.status {
        SolveStatus::Solved => {
            match args.output {
                OutputArg::Text => println!("{}", render_text(&result.box_, args.digits)),
                OutputArg::Json => println!("{}", render_json("solved", solver, Some(&result))),
            }
            0
        }
        SolveStatus::Infeasible { stage } => {
            let reason = result
                .box_
                .infeasible_reason()
                .unwrap_or("no solutions")
                .to_string();
            eprintln!("unilin: infeasible ({stage}): {reason}");
            match args.output {
                OutputArg::Text => println!("1 = 0;"),
                OutputArg::Json => println!("{}", render_json("infeasible", solver, Some(&result))),
            }
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::Signed;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Exact value of a rendered decimal (plain or scientific).
    fn parse_back(s: &str) -> BigRational {
        let (sign, rest) = match s.strip_prefix('-') {
            Some(r) => (-1, r),
            None => (1, s),
        };
        let (body, exp) = match rest.split_once('e') {
            Some((b, e)) => (b, e.parse::<i64>().unwrap()),
            None => (rest, 0),
        };
        let (int, frac) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        let digits: BigInt = format!("{int}{frac}").parse().unwrap();
        let ten = BigRational::from_integer(BigInt::from(10));
        let scale = exp - frac.len() as i64;
        let mag = if scale >= 0 {
            ten.pow(scale as i32)
        } else {
            ten.pow((-scale) as i32).recip()
        };
        BigRational::from_integer(digits * BigInt::from(sign)) * mag
    }

    #[test]
    fn paper_style_two_digit_rounding() {
        let (lo, hi) = print_outward(Interval::new(-2.0361, -1.9437), 3);
        assert_eq!((lo.as_str(), hi.as_str()), ("-2.04", "-1.94"));
        let (lo, hi) = print_outward(Interval::new(1.9437, 2.0361), 2);
        assert_eq!((lo.as_str(), hi.as_str()), ("1.9", "2.1"));
        let (lo, hi) = print_outward(Interval::ZERO, 7);
        assert_eq!((lo.as_str(), hi.as_str()), ("0", "0"));
    }

    #[test]
    fn rendering_covers_all_magnitude_ranges() {
        let (lo, _) = print_outward(Interval::point(0.5), 17);
        assert_eq!(lo, "0.5");
        let (lo, _) = print_outward(Interval::point(1.0), 17);
        assert_eq!(lo, "1");
        let (lo, _) = print_outward(Interval::point(1900.0), 3);
        assert_eq!(lo, "1900");
        let (lo, hi) = print_outward(Interval::point(3e-10), 2);
        assert_eq!(lo, "2.9e-10");
        assert_eq!(hi, "3e-10");
        let (lo, hi) = print_outward(Interval::point(1e300), 2);
        assert_eq!(lo, "1e300");
        assert_eq!(hi, "1.1e300");
        let (lo, hi) = print_outward(Interval::new(f64::NEG_INFINITY, f64::INFINITY), 4);
        assert_eq!((lo.as_str(), hi.as_str()), ("-inf", "inf"));
    }

    #[test]
    fn round_trip_contains_the_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..500 {
            let a = (rng.gen::<f64>() - 0.5) * 10f64.powi(rng.gen_range(-12..12));
            let b = a + rng.gen::<f64>().abs() * 10f64.powi(rng.gen_range(-14..2));
            let x = Interval::new(a, b.max(a));
            let digits = rng.gen_range(1..=12);
            let (lo, hi) = print_outward(x, digits);
            assert!(parse_back(&lo) <= rat::rational_of(x.lo()), "{lo} vs {}", x.lo());
            assert!(parse_back(&hi) >= rat::rational_of(x.hi()), "{hi} vs {}", x.hi());
        }
    }

    #[test]
    fn printed_significance_is_respected() {
        let (lo, hi) = print_outward(Interval::new(0.123456, 0.123456), 4);
        assert_eq!((lo.as_str(), hi.as_str()), ("0.1234", "0.1235"));
        let abs_err = (parse_back(&hi) - parse_back(&lo)).abs();
        assert!(abs_err <= BigRational::new(BigInt::from(1), BigInt::from(10_000)));
    }

    #[test]
    fn text_output_is_reparseable_constraints() {
        let mut b = VarBox::entire(["x".to_string(), "y".to_string()]);
        b.set("x", Interval::new(0.0, 1.0));
        b.set("y", Interval::new(f64::NEG_INFINITY, 0.5));
        let out = render_text(&b, 3);
        assert_eq!(out, "0 <= x; x <= 1; y <= 0.5;");
        let m = Model::parse(&out).unwrap();
        assert_eq!(m.roots.len(), 3);
    }

    #[test]
    fn json_shape_is_stable() {
        let b = VarBox::entire(["x".to_string()]);
        let res = SolveResult {
            status: SolveStatus::Solved,
            box_: b,
            report: strategy::RunReport::default(),
        };
        let s = render_json("solved", SolverMode::Combined, Some(&res));
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["status"], "solved");
        assert_eq!(v["solver"], "combined");
        assert_eq!(v["variables"]["x"]["lo"], "-inf");
        assert_eq!(v["variables"]["x"]["hi"], "inf");
        assert_eq!(v["report"]["sweeps"], 0);
    }
}
