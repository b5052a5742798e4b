//! Outward-rounded interval arithmetic over extended binary64 endpoints.
//!
//! Every operation returns an interval guaranteed to contain the exact
//! real-number result set of the operation over its operands. Tightness is
//! best effort (usually within 1 ulp per endpoint); containment is mandatory.

use crate::fp::{self, add_down, add_up, mul_down, mul_up, sub_up};
use std::fmt;

/// Extra ulps added around transcendental endpoint evaluations to cover the
/// platform libm's error.
const LIBM_PAD: u32 = 4;

/// A closed interval `[lo, hi]` with `lo <= hi`, either endpoint possibly
/// infinite. The empty set is a distinguished value (encoded `[+inf, -inf]`).
///
/// Nonempty invariants: `lo <= hi`, `lo < +inf`, `hi > -inf`, no NaN, and no
/// negative zero (canonicalized to `+0` so derived equality behaves).
#[derive(Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum IntervalError {
    #[error("undefined quotient: division by [0,0]")]
    UndefinedQuotient,
    #[error("domain violation: argument does not meet the function domain")]
    DomainViolation,
}

/// Tags for the supported standard mathematical functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StdFun {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
    Abs,
}

impl StdFun {
    pub fn name(self) -> &'static str {
        match self {
            StdFun::Sin => "sin",
            StdFun::Cos => "cos",
            StdFun::Exp => "exp",
            StdFun::Ln => "ln",
            StdFun::Sqrt => "sqrt",
            StdFun::Abs => "abs",
        }
    }

    pub fn from_name(s: &str) -> Option<StdFun> {
        Some(match s {
            "sin" => StdFun::Sin,
            "cos" => StdFun::Cos,
            "exp" => StdFun::Exp,
            "ln" => StdFun::Ln,
            "sqrt" => StdFun::Sqrt,
            "abs" => StdFun::Abs,
            _ => return None,
        })
    }
}

fn canon(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

fn min4(a: f64, b: f64, c: f64, d: f64) -> f64 {
    a.min(b).min(c.min(d))
}

fn max4(a: f64, b: f64, c: f64, d: f64) -> f64 {
    a.max(b).max(c.max(d))
}

impl Interval {
    pub const EMPTY: Interval = Interval {
        lo: f64::INFINITY,
        hi: f64::NEG_INFINITY,
    };
    pub const ENTIRE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };

    /// Builds `[lo, hi]`. Panics on NaN or an inverted/degenerate-infinite
    /// pair; use `EMPTY` for the empty set.
    pub fn new(lo: f64, hi: f64) -> Interval {
        assert!(!lo.is_nan() && !hi.is_nan(), "NaN interval endpoint");
        assert!(
            lo <= hi && lo < f64::INFINITY && hi > f64::NEG_INFINITY,
            "invalid interval [{lo}, {hi}]"
        );
        Interval {
            lo: canon(lo),
            hi: canon(hi),
        }
    }

    pub fn point(v: f64) -> Interval {
        Interval::new(v, v)
    }

    /// Internal constructor: canonicalizes and maps inverted pairs to Empty.
    fn make(lo: f64, hi: f64) -> Interval {
        debug_assert!(!lo.is_nan() && !hi.is_nan(), "NaN endpoint [{lo},{hi}]");
        if lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return Interval::EMPTY;
        }
        Interval {
            lo: canon(lo),
            hi: canon(hi),
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn is_finite(&self) -> bool {
        !self.is_empty() && self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        other.is_empty() || (self.lo <= other.lo && other.hi <= self.hi)
    }

    /// Upper bound on the diameter. NaN for Empty (undefined), `+inf` when an
    /// endpoint is infinite.
    pub fn width(&self) -> f64 {
        if self.is_empty() {
            return f64::NAN;
        }
        if self.lo == self.hi {
            return 0.0;
        }
        sub_up(self.hi, self.lo)
    }

    /// Approximate midpoint (round-to-nearest). Conventions for unbounded
    /// intervals: entire -> 0, half-infinite -> the largest finite double of
    /// the unbounded side.
    pub fn mid(&self) -> f64 {
        debug_assert!(!self.is_empty());
        match (self.lo == f64::NEG_INFINITY, self.hi == f64::INFINITY) {
            (true, true) => 0.0,
            (true, false) => f64::MIN,
            (false, true) => f64::MAX,
            (false, false) => {
                let m = 0.5 * self.lo + 0.5 * self.hi;
                if m.is_finite() {
                    m
                } else {
                    // Both endpoints near the overflow edge with the same sign.
                    self.lo + 0.5 * (self.hi - self.lo)
                }
            }
        }
    }

    /// min{ |x| : x in self }.
    pub fn mignitude(&self) -> f64 {
        debug_assert!(!self.is_empty());
        if self.lo <= 0.0 && 0.0 <= self.hi {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    /// max{ |x| : x in self } (may be +inf).
    pub fn magnitude(&self) -> f64 {
        debug_assert!(!self.is_empty());
        self.lo.abs().max(self.hi.abs())
    }

    pub fn hull(self, other: Interval) -> Interval {
        if self.is_empty() {
            return other;
        }
        if other.is_empty() {
            return self;
        }
        Interval::make(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    pub fn intersect(self, other: Interval) -> Interval {
        if self.is_empty() || other.is_empty() {
            return Interval::EMPTY;
        }
        Interval::make(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    pub fn add(self, rhs: Interval) -> Interval {
        if self.is_empty() || rhs.is_empty() {
            return Interval::EMPTY;
        }
        Interval::make(add_down(self.lo, rhs.lo), add_up(self.hi, rhs.hi))
    }

    pub fn neg(self) -> Interval {
        if self.is_empty() {
            return Interval::EMPTY;
        }
        Interval::make(-self.hi, -self.lo)
    }

    pub fn sub(self, rhs: Interval) -> Interval {
        self.add(rhs.neg())
    }

    /// Four-endpoint-products hull with the convention `0 * inf = 0`, which is
    /// exact for real operands (an infinite endpoint is a bound, never a
    /// value, so a zero factor pins the product to zero).
    pub fn mul(self, rhs: Interval) -> Interval {
        if self.is_empty() || rhs.is_empty() {
            return Interval::EMPTY;
        }
        let (al, ah, bl, bh) = (self.lo, self.hi, rhs.lo, rhs.hi);
        let lo = min4(
            mul_down(al, bl),
            mul_down(al, bh),
            mul_down(ah, bl),
            mul_down(ah, bh),
        );
        let hi = max4(
            mul_up(al, bl),
            mul_up(al, bh),
            mul_up(ah, bl),
            mul_up(ah, bh),
        );
        Interval::make(lo, hi)
    }

    /// Division with a zero-containing (but nonzero) divisor collapsing to the
    /// single-interval hull of the two sign branches. Division by `[0,0]`
    /// yields Empty; see `checked_div` for the flagged variant.
    pub fn div(self, rhs: Interval) -> Interval {
        self.checked_div(rhs).unwrap_or(Interval::EMPTY)
    }

    pub fn checked_div(self, rhs: Interval) -> Result<Interval, IntervalError> {
        if self.is_empty() || rhs.is_empty() {
            return Ok(Interval::EMPTY);
        }
        if rhs.lo == 0.0 && rhs.hi == 0.0 {
            return Err(IntervalError::UndefinedQuotient);
        }
        if rhs.lo > 0.0 {
            return Ok(div_pos(self, rhs));
        }
        if rhs.hi < 0.0 {
            return Ok(div_pos(self.neg(), rhs.neg()));
        }
        if rhs.lo == 0.0 {
            return Ok(div_zero_pos(self, rhs));
        }
        if rhs.hi == 0.0 {
            return Ok(div_zero_pos(self.neg(), rhs.neg()));
        }
        // Divisor straddles zero: the two branch quotient sets are unbounded
        // tails; their single-interval hull is the entire line unless the
        // numerator is exactly zero.
        if self.lo == 0.0 && self.hi == 0.0 {
            Ok(Interval::ZERO)
        } else {
            Ok(Interval::ENTIRE)
        }
    }

    /// Applies a standard function, clipping the argument to the function's
    /// domain first.
    pub fn eval_std(f: StdFun, a: Interval) -> Result<Interval, IntervalError> {
        if a.is_empty() {
            return Ok(Interval::EMPTY);
        }
        match f {
            StdFun::Abs => Ok(abs_interval(a)),
            StdFun::Sqrt => sqrt_interval(a),
            StdFun::Exp => Ok(exp_interval(a)),
            StdFun::Ln => ln_interval(a),
            StdFun::Sin => Ok(trig_interval(a, false)),
            StdFun::Cos => Ok(trig_interval(a, true)),
        }
    }

    pub fn sqrt(self) -> Result<Interval, IntervalError> {
        Interval::eval_std(StdFun::Sqrt, self)
    }

    pub fn abs(self) -> Interval {
        if self.is_empty() {
            return Interval::EMPTY;
        }
        abs_interval(self)
    }
}

fn div_pos(a: Interval, b: Interval) -> Interval {
    debug_assert!(b.lo > 0.0);
    let lo = if a.lo >= 0.0 {
        fp::div_down(a.lo, b.hi)
    } else {
        fp::div_down(a.lo, b.lo)
    };
    let hi = if a.hi <= 0.0 {
        fp::div_up(a.hi, b.hi)
    } else {
        fp::div_up(a.hi, b.lo)
    };
    Interval::make(lo, hi)
}

fn div_zero_pos(a: Interval, b: Interval) -> Interval {
    debug_assert!(b.lo == 0.0 && b.hi > 0.0);
    let lo = if a.lo >= 0.0 {
        fp::div_down(a.lo, b.hi)
    } else {
        f64::NEG_INFINITY
    };
    let hi = if a.hi <= 0.0 {
        fp::div_up(a.hi, b.hi)
    } else {
        f64::INFINITY
    };
    Interval::make(lo, hi)
}

fn abs_interval(a: Interval) -> Interval {
    if a.lo >= 0.0 {
        a
    } else if a.hi <= 0.0 {
        a.neg()
    } else {
        Interval::make(0.0, (-a.lo).max(a.hi))
    }
}

fn sqrt_interval(a: Interval) -> Result<Interval, IntervalError> {
    if a.hi < 0.0 {
        return Err(IntervalError::DomainViolation);
    }
    Ok(Interval::make(
        fp::sqrt_down(a.lo.max(0.0)),
        fp::sqrt_up(a.hi),
    ))
}

fn exp_interval(a: Interval) -> Interval {
    let lo = if a.lo == f64::NEG_INFINITY {
        0.0
    } else {
        fp::step_down(a.lo.exp(), LIBM_PAD).max(0.0)
    };
    let hi = if a.hi == f64::INFINITY {
        f64::INFINITY
    } else {
        fp::step_up(a.hi.exp(), LIBM_PAD)
    };
    Interval::make(lo, hi)
}

fn ln_interval(a: Interval) -> Result<Interval, IntervalError> {
    if a.hi <= 0.0 {
        return Err(IntervalError::DomainViolation);
    }
    let lo = if a.lo <= 0.0 {
        f64::NEG_INFINITY
    } else {
        fp::step_down(a.lo.ln(), LIBM_PAD)
    };
    let hi = if a.hi == f64::INFINITY {
        f64::INFINITY
    } else {
        fp::step_up(a.hi.ln(), LIBM_PAD)
    };
    Ok(Interval::make(lo, hi))
}

/// sin (or cos when `shifted`): endpoint values padded for libm error, plus
/// the exact extremum wherever a critical point may fall inside the argument
/// interval. Critical points are odd (sin) / even (cos) multiples of pi/2,
/// located with an interval enclosure of pi/2 so that uncertainty errs toward
/// inclusion — including an extremum that is not quite reached only widens the
/// result inside the always-valid envelope [-1, 1].
fn trig_interval(a: Interval, shifted: bool) -> Interval {
    const ARG_LIMIT: f64 = 1e15;
    const WIDTH_LIMIT: f64 = 64.0;
    if !a.lo.is_finite()
        || !a.hi.is_finite()
        || a.lo.abs() > ARG_LIMIT
        || a.hi.abs() > ARG_LIMIT
        || sub_up(a.hi, a.lo) > WIDTH_LIMIT
    {
        return Interval::new(-1.0, 1.0);
    }
    let eval = |x: f64| if shifted { x.cos() } else { x.sin() };
    let v_lo = eval(a.lo);
    let v_hi = eval(a.hi);
    let mut lo = fp::step_down(v_lo.min(v_hi), LIBM_PAD);
    let mut hi = fp::step_up(v_lo.max(v_hi), LIBM_PAD);

    let half_pi = Interval::new(
        std::f64::consts::FRAC_PI_2.next_down(),
        std::f64::consts::FRAC_PI_2.next_up(),
    );
    let m_first = (a.lo / std::f64::consts::FRAC_PI_2).floor() - 1.0;
    let m_last = (a.hi / std::f64::consts::FRAC_PI_2).ceil() + 1.0;
    let mut m = m_first;
    while m <= m_last {
        let parity = (m as i64).rem_euclid(4);
        let critical = match (shifted, parity) {
            (false, 1) => Some(1.0),
            (false, 3) => Some(-1.0),
            (true, 0) => Some(1.0),
            (true, 2) => Some(-1.0),
            _ => None,
        };
        if let Some(extremum) = critical {
            let t = Interval::point(m).mul(half_pi);
            if t.hi >= a.lo && t.lo <= a.hi {
                lo = lo.min(extremum);
                hi = hi.max(extremum);
            }
        }
        m += 1.0;
    }
    Interval::make(lo.max(-1.0), hi.min(1.0))
}

/// Downward-rounded lower bound on `inf { sum_j r_j x_j : r_j in r_j, x in B }`
/// over pairs (coefficient interval, box interval). `-inf` is a valid result
/// when a nonzero coefficient meets an unbounded box side; exactly-zero
/// coefficients tolerate unbounded boxes thanks to the `0 * inf = 0` product
/// convention.
pub fn dot_lower(pairs: impl IntoIterator<Item = (Interval, Interval)>) -> f64 {
    let mut acc = 0.0f64;
    for (r, x) in pairs {
        debug_assert!(!r.is_empty() && !x.is_empty());
        let p = min4(
            mul_down(r.lo, x.lo),
            mul_down(r.lo, x.hi),
            mul_down(r.hi, x.lo),
            mul_down(r.hi, x.hi),
        );
        acc = add_down(acc, p);
    }
    acc
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            write!(f, "Empty")
        } else {
            write!(f, "[{:?}, {:?}]", self.lo, self.hi)
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            write!(f, "empty")
        } else {
            write!(f, "[{}, {}]", self.lo, self.hi)
        }
    }
}
