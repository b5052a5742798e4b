//! Exact conversions between arbitrary-precision rationals and binary64, in
//! both rounding directions, plus directed decimal rounding for output.
//!
//! These are the only places where rationals meet floats; everything is done
//! by integer mantissa construction, never by parsing or float arithmetic, so
//! the directed guarantees are exact.

use crate::interval::Interval;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

/// Exact rational value of a finite double.
pub fn rational_of(x: f64) -> BigRational {
    BigRational::from_f64(x).expect("finite f64")
}

fn pow2(k: i64) -> BigRational {
    if k >= 0 {
        BigRational::from_integer(BigInt::one() << k as usize)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-k) as usize)
    }
}

fn pow10_int(k: u64) -> BigInt {
    BigInt::from(10u32).pow(k as u32)
}

fn pow10_rat(k: i64) -> BigRational {
    if k >= 0 {
        BigRational::from_integer(pow10_int(k as u64))
    } else {
        BigRational::new(BigInt::one(), pow10_int((-k) as u64))
    }
}

/// floor(log2 r) for positive r.
fn ilog2_floor(r: &BigRational) -> i64 {
    debug_assert!(r.is_positive());
    let mut e = r.numer().bits() as i64 - r.denom().bits() as i64;
    while pow2(e) > *r {
        e -= 1;
    }
    while pow2(e + 1) <= *r {
        e += 1;
    }
    e
}

/// floor(log10 r) for positive r.
fn ilog10_floor(r: &BigRational) -> i64 {
    debug_assert!(r.is_positive());
    let bits = r.numer().bits() as i64 - r.denom().bits() as i64;
    let mut k = (bits as f64 * std::f64::consts::LOG10_2).floor() as i64 - 1;
    while pow10_rat(k + 1) <= *r {
        k += 1;
    }
    while pow10_rat(k) > *r {
        k -= 1;
    }
    k
}

/// floor(r * 2^shift) as an integer, exactly.
fn floor_scaled(r: &BigRational, shift: i64) -> BigInt {
    let scaled = if shift >= 0 {
        BigRational::new(r.numer() << shift as usize, r.denom().clone())
    } else {
        BigRational::new(r.numer().clone(), r.denom() << (-shift) as usize)
    };
    scaled.floor().to_integer()
}

/// Largest double `<= r` for positive `r`; `MAX` past the overflow edge, `0`
/// below the subnormal range.
fn floor_pos(r: &BigRational) -> f64 {
    debug_assert!(r.is_positive());
    let e = ilog2_floor(r);
    if e >= 1024 {
        return f64::MAX;
    }
    if e < -1022 {
        // Subnormal grid: spacing 2^-1074, mantissa < 2^52.
        let m = floor_scaled(r, 1074).to_u64().expect("subnormal mantissa");
        return f64::from_bits(m);
    }
    let m = floor_scaled(r, 52 - e).to_u64().expect("53-bit mantissa");
    debug_assert!((1u64 << 52..1u64 << 53).contains(&m));
    f64::from_bits(((e + 1023) as u64) << 52 | (m - (1u64 << 52)))
}

/// Smallest double `>= r` for positive `r`.
fn ceil_pos(r: &BigRational) -> f64 {
    let f = floor_pos(r);
    if rational_of(f) == *r {
        f
    } else {
        f.next_up()
    }
}

/// Largest double `<= r` (may be `-inf` when r < -MAX).
pub fn f64_below(r: &BigRational) -> f64 {
    if r.is_zero() {
        0.0
    } else if r.is_positive() {
        floor_pos(r)
    } else {
        -ceil_pos(&-r)
    }
}

/// Smallest double `>= r` (may be `+inf` when r > MAX).
pub fn f64_above(r: &BigRational) -> f64 {
    -f64_below(&-r)
}

/// Tightest interval containing the exact rational.
pub fn enclose(r: &BigRational) -> Interval {
    Interval::new(f64_below(r), f64_above(r))
}

/// A signed decimal `±mantissa * 10^exp10` where `mantissa` has exactly the
/// requested number of significant digits (or is zero).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decimal {
    pub neg: bool,
    pub mantissa: BigInt,
    pub exp10: i64,
}

impl Decimal {
    pub fn value(&self) -> BigRational {
        let v = BigRational::from_integer(self.mantissa.clone()) * pow10_rat(self.exp10);
        if self.neg {
            -v
        } else {
            v
        }
    }

    fn negated(mut self) -> Decimal {
        if !self.mantissa.is_zero() {
            self.neg = !self.neg;
        }
        self
    }
}

fn dec_floor_pos(r: &BigRational, digits: u32) -> Decimal {
    let k = ilog10_floor(r);
    let exp10 = k - digits as i64 + 1;
    let m = (r * pow10_rat(-exp10)).floor().to_integer();
    Decimal {
        neg: false,
        mantissa: m,
        exp10,
    }
}

fn dec_ceil_pos(r: &BigRational, digits: u32) -> Decimal {
    let k = ilog10_floor(r);
    let mut exp10 = k - digits as i64 + 1;
    let mut m = (r * pow10_rat(-exp10)).ceil().to_integer();
    if m == pow10_int(digits as u64) {
        // 9.99... rounded up a magnitude.
        m = pow10_int(digits as u64 - 1);
        exp10 += 1;
    }
    Decimal {
        neg: false,
        mantissa: m,
        exp10,
    }
}

/// Largest `digits`-significant-digit decimal `<= r`.
pub fn decimal_below(r: &BigRational, digits: u32) -> Decimal {
    assert!(digits >= 1);
    if r.is_zero() {
        Decimal {
            neg: false,
            mantissa: BigInt::zero(),
            exp10: 0,
        }
    } else if r.is_positive() {
        dec_floor_pos(r, digits)
    } else {
        dec_ceil_pos(&-r, digits).negated()
    }
}

/// Smallest `digits`-significant-digit decimal `>= r`.
pub fn decimal_above(r: &BigRational, digits: u32) -> Decimal {
    decimal_below(&-r, digits).negated()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn directed_conversion_brackets_one_third() {
        let third = big(1, 3);
        let lo = f64_below(&third);
        let hi = f64_above(&third);
        assert!(rational_of(lo) < third && third < rational_of(hi));
        assert_eq!(lo.next_up(), hi, "bracket is one ulp wide");
    }

    #[test]
    fn exact_values_convert_exactly() {
        for v in [0.75, -3.0, 0.1, 1e300, 5e-324, -0.5] {
            let r = rational_of(v);
            assert_eq!(f64_below(&r), v);
            assert_eq!(f64_above(&r), v);
        }
        assert_eq!(f64_below(&BigRational::zero()), 0.0);
        assert_eq!(f64_above(&BigRational::zero()), 0.0);
    }

    #[test]
    fn overflow_and_underflow_edges() {
        let huge = pow2(1030);
        assert_eq!(f64_below(&huge), f64::MAX);
        assert_eq!(f64_above(&huge), f64::INFINITY);
        assert_eq!(f64_below(&-&huge), f64::NEG_INFINITY);
        assert_eq!(f64_above(&-&huge), f64::MIN);
        let tiny = pow2(-1080);
        assert_eq!(f64_below(&tiny), 0.0);
        assert_eq!(f64_above(&tiny), f64::from_bits(1));
        // Exact subnormal.
        let sub = pow2(-1073);
        assert_eq!(f64_below(&sub), f64_above(&sub));
        assert_eq!(rational_of(f64_below(&sub)), sub);
    }

    #[test]
    fn enclose_is_tight() {
        let iv = enclose(&big(1, 10));
        assert!(iv.contains(0.1));
        assert!(iv.width() <= 0.1f64.next_up() - 0.1);
        let iv3 = enclose(&big(-2, 3));
        assert!(rational_of(iv3.lo()) <= big(-2, 3) && big(-2, 3) <= rational_of(iv3.hi()));
    }

    #[test]
    fn decimal_directed_rounding() {
        let d = decimal_below(&rational_of(1.9437), 2);
        assert_eq!(d.value(), big(19, 10));
        let u = decimal_above(&rational_of(2.0361), 2);
        assert_eq!(u.value(), big(21, 10));
        let nl = decimal_below(&rational_of(-2.0361), 3);
        assert_eq!(nl.value(), big(-204, 100));
        let nu = decimal_above(&rational_of(-1.9437), 3);
        assert_eq!(nu.value(), big(-194, 100));
        let z = decimal_below(&BigRational::zero(), 5);
        assert!(z.mantissa.is_zero());
        // Carry across a magnitude: ceil(9.99, 2 digits) -> 10.
        let c = decimal_above(&rational_of(9.99), 2);
        assert_eq!(c.value(), BigRational::from_integer(BigInt::from(10)));
    }

    proptest! {
        #[test]
        fn below_above_bracket_random_rationals(n in -10_000i64..10_000, d in 1i64..10_000) {
            let r = big(n, d);
            let lo = f64_below(&r);
            let hi = f64_above(&r);
            prop_assert!(rational_of(lo) <= r && r <= rational_of(hi));
            prop_assert!(hi == lo || hi == lo.next_up());
        }

        #[test]
        fn decimal_bracket(v in -1e9..1e9f64, digits in 1u32..12) {
            let r = rational_of(v);
            let lo = decimal_below(&r, digits);
            let hi = decimal_above(&r, digits);
            prop_assert!(lo.value() <= r && r <= hi.value());
        }
    }
}
