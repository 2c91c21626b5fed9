//! Exact rational helpers.
//!
//! Every probability and the budget parameter are carried as
//! [`num_rational::BigRational`], which keeps values in lowest terms with a
//! positive denominator.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Parses `"p/q"`, an integer, or a finite decimal such as `"0.125"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("`{s}` is not a rational number"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("`{s}` has a zero denominator")));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        if !whole_digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let digits = format!("{whole_digits}{frac}");
        let mut n: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| bad())? };
        if negative {
            n = -n;
        }
        let d = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(Rational::new(n, d));
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

/// `"p/q"`, or just `"p"` for integers.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Huge numerators or denominators: shift both down first.
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Decimal rendering with `digits` significant digits, trailing zeros trimmed.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".to_string() } else { x.to_string() };
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    let mut s = format!("{x:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

/// `t^k` for any integer exponent.
pub fn pow(t: &Rational, k: i64) -> Rational {
    if k >= 0 {
        num_traits::pow(t.clone(), k as usize)
    } else {
        num_traits::pow(t.recip(), k.unsigned_abs() as usize)
    }
}

/// The integer `k` with `t^k == q`, if one exists. Requires `t > 1`, `q > 0`.
pub fn exact_log(t: &Rational, q: &Rational) -> Option<i64> {
    debug_assert!(*t > Rational::one());
    if !q.is_positive() {
        return None;
    }
    let (target, sign) = if *q >= Rational::one() { (q.clone(), 1) } else { (q.recip(), -1) };
    let mut acc = Rational::one();
    let mut k = 0i64;
    while acc < target {
        acc *= t;
        k += 1;
    }
    (acc == target).then_some(sign * k)
}

/// Best rational approximation of `x > 0` with denominator at most `max_denom`.
pub fn best_rational_approximation(x: f64, max_denom: u64) -> Rational {
    assert!(x.is_finite() && x >= 0.0, "approximation target must be finite and nonnegative");
    let max_denom = BigInt::from(max_denom.max(1));
    let (mut p0, mut q0) = (BigInt::zero(), BigInt::one());
    let (mut p1, mut q1) = (BigInt::one(), BigInt::zero());
    let mut rem = x;
    loop {
        let a_f = rem.floor();
        let a = BigInt::from(a_f as u64);
        let p2 = &a * &p1 + &p0;
        let q2 = &a * &q1 + &q0;
        if q2 > max_denom {
            // Largest admissible semiconvergent against the last convergent.
            let k = (&max_denom - &q0).div_floor(&q1);
            let ps = &k * &p1 + &p0;
            let qs = &k * &q1 + &q0;
            let conv = Rational::new(p1.clone(), q1.clone());
            if qs.is_zero() {
                return conv;
            }
            let semi = Rational::new(ps, qs);
            let err = |r: &Rational| (to_f64(r) - x).abs();
            return if err(&semi) < err(&conv) { semi } else { conv };
        }
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        let frac = rem - a_f;
        if frac <= f64::EPSILON * rem.max(1.0) {
            return Rational::new(p1, q1);
        }
        rem = 1.0 / frac;
    }
}

/// `e^epsilon` as the best rational with denominator at most `10^6`.
pub fn approximate_exp(epsilon: f64) -> Rational {
    if epsilon == 0.0 {
        return Rational::one();
    }
    best_rational_approximation(epsilon.exp(), 1_000_000)
}
