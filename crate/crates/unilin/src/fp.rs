//! Directed-rounding scalar arithmetic on IEEE-754 binary64.
//!
//! Every `*_down` function returns a value that is less than or equal to the
//! exact real result of the operation, every `*_up` function a value greater
//! than or equal to it. The implementation computes in round-to-nearest and
//! steps one ulp outward unless the operation is provably exact, so it needs
//! no hardware rounding-mode switches and is safe to call concurrently.

/// Largest double `<= a + b`.
pub fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    debug_assert!(!s.is_nan(), "add_down({a}, {b}) produced NaN");
    if s.is_infinite() {
        if a.is_infinite() || b.is_infinite() {
            // Exact in the extended reals.
            return s;
        }
        // Finite operands overflowed: the true sum lies strictly beyond MAX.
        return if s > 0.0 { f64::MAX } else { s };
    }
    if two_sum_is_exact(a, b, s) {
        s
    } else {
        s.next_down()
    }
}

/// Smallest double `>= a + b`.
pub fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    debug_assert!(!s.is_nan(), "add_up({a}, {b}) produced NaN");
    if s.is_infinite() {
        if a.is_infinite() || b.is_infinite() {
            return s;
        }
        return if s < 0.0 { f64::MIN } else { s };
    }
    if two_sum_is_exact(a, b, s) {
        s
    } else {
        s.next_up()
    }
}

pub fn sub_down(a: f64, b: f64) -> f64 {
    add_down(a, -b)
}

pub fn sub_up(a: f64, b: f64) -> f64 {
    add_up(a, -b)
}

// Knuth's TwoSum error term; valid whenever the rounded sum is finite.
fn two_sum_is_exact(a: f64, b: f64, s: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return true;
    }
    let bb = s - a;
    let aa = s - bb;
    (a - aa) + (b - bb) == 0.0
}

/// Largest double `<= a * b`, with the interval convention `0 * ±inf = 0`.
pub fn mul_down(a: f64, b: f64) -> f64 {
    mul_dir(a, b, false)
}

/// Smallest double `>= a * b`, with the interval convention `0 * ±inf = 0`.
pub fn mul_up(a: f64, b: f64) -> f64 {
    mul_dir(a, b, true)
}

fn mul_dir(a: f64, b: f64, up: bool) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    debug_assert!(!p.is_nan(), "mul({a}, {b}) produced NaN");
    if a.is_infinite() || b.is_infinite() {
        return p;
    }
    if p.is_infinite() {
        // Overflow of finite operands; the magnitude exceeded MAX.
        return match (up, p > 0.0) {
            (false, true) => f64::MAX,
            (true, false) => f64::MIN,
            _ => p,
        };
    }
    // The rounding error of a product is exactly representable only when the
    // product is normal, so a zero fma residual proves exactness just there.
    let err = a.mul_add(b, -p);
    if err == 0.0 && p.is_normal() {
        p
    } else if up {
        p.next_up()
    } else {
        p.next_down()
    }
}

/// Largest double `<= a / b`. Requires `b != 0`; infinite/infinite never occurs
/// because callers pick sign-definite endpoints.
pub fn div_down(a: f64, b: f64) -> f64 {
    div_dir(a, b, false)
}

/// Smallest double `>= a / b`. Requires `b != 0`.
pub fn div_up(a: f64, b: f64) -> f64 {
    div_dir(a, b, true)
}

fn div_dir(a: f64, b: f64, up: bool) -> f64 {
    debug_assert!(b != 0.0, "division by zero endpoint");
    debug_assert!(
        !(a.is_infinite() && b.is_infinite()),
        "indeterminate quotient {a} / {b}"
    );
    if a == 0.0 {
        return 0.0;
    }
    if a.is_infinite() {
        return a * b.signum();
    }
    if b.is_infinite() {
        // finite / inf: the quotient tends to zero; 0 closes the limit.
        return 0.0;
    }
    let q = a / b;
    if q.is_infinite() {
        return match (up, q > 0.0) {
            (false, true) => f64::MAX,
            (true, false) => f64::MIN,
            _ => q,
        };
    }
    let err = q.mul_add(b, -a);
    if err == 0.0 && q.is_normal() {
        q
    } else if up {
        q.next_up()
    } else {
        q.next_down()
    }
}

/// Largest double `<= sqrt(a)`. Requires `a >= 0`.
pub fn sqrt_down(a: f64) -> f64 {
    debug_assert!(a >= 0.0);
    if a == 0.0 {
        return 0.0;
    }
    if a.is_infinite() {
        return f64::INFINITY;
    }
    let s = a.sqrt();
    let err = s.mul_add(s, -a);
    if err == 0.0 && s.is_normal() {
        s
    } else {
        s.next_down()
    }
}

/// Smallest double `>= sqrt(a)`. Requires `a >= 0`.
pub fn sqrt_up(a: f64) -> f64 {
    debug_assert!(a >= 0.0);
    if a == 0.0 {
        return 0.0;
    }
    if a.is_infinite() {
        return f64::INFINITY;
    }
    let s = a.sqrt();
    let err = s.mul_add(s, -a);
    if err == 0.0 && s.is_normal() {
        s
    } else {
        s.next_up()
    }
}

/// Steps `x` down by `n` ulps (saturating at -inf).
pub fn step_down(x: f64, n: u32) -> f64 {
    let mut v = x;
    for _ in 0..n {
        v = v.next_down();
    }
    v
}

/// Steps `x` up by `n` ulps (saturating at +inf).
pub fn step_up(x: f64, n: u32) -> f64 {
    let mut v = x;
    for _ in 0..n {
        v = v.next_up();
    }
    v
}
