//! Outward-rounded interval arithmetic over `f64`.
//!
//! Directed rounding is obtained without touching the floating-point
//! environment: the basic operations compute the round-to-nearest result and
//! then recover the exact rounding error with an error-free transformation
//! (`TwoSum` for addition, a fused multiply-add residual for multiplication and
//! division). The sign of the error tells which neighbour of the rounded value
//! is the correct directed result, so `+ - * /` produce the tightest possible
//! enclosures and every function here is safe to call from any thread.
//!
//! `ln` and `exp` delegate to the platform `libm`, which is not guaranteed to be
//! correctly rounded. Their endpoints are widened by [`LIBM_SLOP_ULPS`] units in
//! the last place in the outward direction.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Outward widening applied to each endpoint of `ln` and `exp`.
pub const LIBM_SLOP_ULPS: u32 = 2;

// Below this magnitude the FMA residual may underflow, so the error-free
// transformations are no longer exact and we widen by one ulp unconditionally.
const TINY: f64 = 1e-280;

// Adjacent doubles around 1/e (the minimiser of x ln x).
const INV_E_LO: f64 = 0.367_879_441_171_442_3;
const INV_E_HI: f64 = 0.367_879_441_171_442_33;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntervalError {
    #[error("invalid interval bounds [{0}, {1}]")]
    Bounds(f64, f64),
    #[error("enclosure is unbounded")]
    Overflow,
    #[error("division by an interval containing zero")]
    DivisionByZero,
    #[error("logarithm of an interval with non-positive lower bound {0}")]
    LogDomain(f64),
    #[error("pow: {0}")]
    PowDomain(&'static str),
    #[error("malformed interval literal {0:?}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, IntervalError>;

/// A closed interval `[lo, hi]` with finite `f64` endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

fn two_sum_err(a: f64, b: f64, s: f64) -> f64 {
    let bb = s - a;
    (a - (s - bb)) + (b - bb)
}

fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return s;
    }
    if two_sum_err(a, b, s) < 0.0 {
        s.next_down()
    } else {
        s
    }
}

fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return s;
    }
    if two_sum_err(a, b, s) > 0.0 {
        s.next_up()
    } else {
        s
    }
}

fn mul_dir(a: f64, b: f64) -> (f64, f64) {
    if a == 0.0 || b == 0.0 {
        return (0.0, 0.0);
    }
    let p = a * b;
    if !p.is_finite() {
        return (p, p);
    }
    if p.abs() < TINY {
        return (p.next_down(), p.next_up());
    }
    let err = a.mul_add(b, -p);
    match err.partial_cmp(&0.0) {
        Some(Ordering::Greater) => (p, p.next_up()),
        Some(Ordering::Less) => (p.next_down(), p),
        _ => (p, p),
    }
}

fn div_dir(a: f64, b: f64) -> (f64, f64) {
    if a == 0.0 {
        return (0.0, 0.0);
    }
    let q = a / b;
    if !q.is_finite() {
        return (q, q);
    }
    if q.abs() < TINY || a.abs() < TINY {
        return (q.next_down(), q.next_up());
    }
    // a - q*b, exactly; the true quotient is q + r/b.
    let r = (-q).mul_add(b, a);
    let correction = if r == 0.0 { 0.0 } else { r.signum() * b.signum() };
    if correction > 0.0 {
        (q, q.next_up())
    } else if correction < 0.0 {
        (q.next_down(), q)
    } else {
        (q, q)
    }
}

fn widen_down(x: f64, ulps: u32) -> f64 {
    (0..ulps).fold(x, |acc, _| acc.next_down())
}

fn widen_up(x: f64, ulps: u32) -> f64 {
    (0..ulps).fold(x, |acc, _| acc.next_up())
}

fn to_rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite endpoint")
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(IntervalError::Bounds(lo, hi));
        }
        // Normalise -0.0 so that equality and display behave.
        Ok(Self {
            lo: lo + 0.0,
            hi: hi + 0.0,
        })
    }

    /// Degenerate interval. Panics on a non-finite value.
    pub fn point(x: f64) -> Self {
        Self::new(x, x).expect("finite point")
    }

    fn checked(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(IntervalError::Overflow);
        }
        Self::new(lo, hi)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_rational(&self, x: &BigRational) -> bool {
        &to_rational(self.lo) <= x && x <= &to_rational(self.hi)
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    pub fn is_subset(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    /// Smallest interval containing both operands.
    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    /// Round-to-nearest midpoint, clamped into the interval.
    ///
    /// Strictly interior whenever some double lies strictly between the
    /// endpoints; for adjacent doubles it returns one of them.
    pub fn mid(&self) -> f64 {
        let m = 0.5 * self.lo + 0.5 * self.hi;
        m.clamp(self.lo, self.hi)
    }

    /// Splits at [`mid`](Self::mid); `None` when no double lies strictly inside.
    pub fn bisect(&self) -> Option<(Interval, Interval)> {
        let m = self.mid();
        if m <= self.lo || m >= self.hi {
            return None;
        }
        Some((Interval { lo: self.lo, hi: m }, Interval { lo: m, hi: self.hi }))
    }

    /// Certainly less than: every element of `self` is below every element of `other`.
    pub fn clt(&self, other: &Interval) -> bool {
        self.hi < other.lo
    }

    pub fn neg(&self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }

    pub fn add(&self, other: &Interval) -> Result<Interval> {
        Self::checked(add_down(self.lo, other.lo), add_up(self.hi, other.hi))
    }

    pub fn sub(&self, other: &Interval) -> Result<Interval> {
        Self::checked(add_down(self.lo, -other.hi), add_up(self.hi, -other.lo))
    }

    pub fn mul(&self, other: &Interval) -> Result<Interval> {
        let corners = [
            mul_dir(self.lo, other.lo),
            mul_dir(self.lo, other.hi),
            mul_dir(self.hi, other.lo),
            mul_dir(self.hi, other.hi),
        ];
        let lo = corners.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
        let hi = corners.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
        Self::checked(lo, hi)
    }

    pub fn div(&self, other: &Interval) -> Result<Interval> {
        if other.contains_zero() {
            return Err(IntervalError::DivisionByZero);
        }
        let corners = [
            div_dir(self.lo, other.lo),
            div_dir(self.lo, other.hi),
            div_dir(self.hi, other.lo),
            div_dir(self.hi, other.hi),
        ];
        let lo = corners.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
        let hi = corners.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
        Self::checked(lo, hi)
    }

    /// `x²` without the dependency loss of `x * x`.
    pub fn sqr(&self) -> Result<Interval> {
        let (lo_sq_down, lo_sq_up) = mul_dir(self.lo, self.lo);
        let (hi_sq_down, hi_sq_up) = mul_dir(self.hi, self.hi);
        if self.contains_zero() {
            Self::checked(0.0, lo_sq_up.max(hi_sq_up))
        } else if self.lo > 0.0 {
            Self::checked(lo_sq_down, hi_sq_up)
        } else {
            Self::checked(hi_sq_down, lo_sq_up)
        }
    }

    pub fn scale(&self, k: f64) -> Result<Interval> {
        self.mul(&Interval::point(k))
    }

    pub fn ln(&self) -> Result<Interval> {
        if self.lo <= 0.0 {
            return Err(IntervalError::LogDomain(self.lo));
        }
        let point_ln = |x: f64| -> (f64, f64) {
            if x == 1.0 {
                (0.0, 0.0)
            } else {
                let y = x.ln();
                (widen_down(y, LIBM_SLOP_ULPS), widen_up(y, LIBM_SLOP_ULPS))
            }
        };
        Self::checked(point_ln(self.lo).0, point_ln(self.hi).1)
    }

    pub fn exp(&self) -> Result<Interval> {
        let point_exp = |x: f64| -> (f64, f64) {
            if x == 0.0 {
                (1.0, 1.0)
            } else {
                let y = x.exp();
                (widen_down(y, LIBM_SLOP_ULPS).max(0.0), widen_up(y, LIBM_SLOP_ULPS))
            }
        };
        Self::checked(point_exp(self.lo).0, point_exp(self.hi).1)
    }

    /// `x ln x` extended by continuity with `0 ln 0 = 0`; requires `lo ≥ 0`.
    ///
    /// Uses the monotonicity of `x ln x` on either side of `1/e`, which gives a
    /// much tighter enclosure than multiplying `x` by `ln x`.
    pub fn xlnx(&self) -> Result<Interval> {
        if self.lo < 0.0 {
            return Err(IntervalError::LogDomain(self.lo));
        }
        let at = |x: f64| -> Result<Interval> {
            if x == 0.0 {
                Ok(Interval::point(0.0))
            } else {
                let p = Interval::point(x);
                p.mul(&p.ln()?)
            }
        };
        let at_lo = at(self.lo)?;
        let at_hi = at(self.hi)?;
        if self.hi <= INV_E_LO {
            Self::checked(at_hi.lo, at_lo.hi)
        } else if self.lo >= INV_E_HI {
            Self::checked(at_lo.lo, at_hi.hi)
        } else {
            // The minimum -1/e is attained inside; -INV_E_HI is below it.
            Self::checked(-INV_E_HI, at_lo.hi.max(at_hi.hi))
        }
    }

    /// `base^expo` for `base ≥ 0`, continuous extension with `0^0 = 1` and `0^y = 0` for `y > 0`.
    pub fn pow(&self, expo: &Interval) -> Result<Interval> {
        if self.lo < 0.0 {
            return Err(IntervalError::PowDomain("negative base"));
        }
        if expo.is_point() && expo.lo.fract() == 0.0 && expo.lo.abs() <= 64.0 {
            return self.powi(expo.lo as i32);
        }
        if self.lo > 0.0 {
            return expo.mul(&self.ln()?)?.exp();
        }
        if expo.lo < 0.0 {
            return Err(IntervalError::PowDomain("zero base with negative exponent"));
        }
        // lo(base) = 0 and expo ⊆ [0, ∞).
        if expo.hi == 0.0 {
            return Ok(Interval::point(1.0));
        }
        let mut hi = if self.hi > 0.0 {
            Interval::point(self.hi).pow(expo)?.hi
        } else {
            0.0
        };
        if expo.lo == 0.0 {
            hi = hi.max(1.0);
        }
        Self::checked(0.0, hi)
    }

    /// Integer power of a non-negative interval.
    pub fn powi(&self, n: i32) -> Result<Interval> {
        if self.lo < 0.0 {
            return Err(IntervalError::PowDomain("negative base"));
        }
        if n < 0 {
            if self.lo == 0.0 {
                return Err(IntervalError::PowDomain("zero base with negative exponent"));
            }
            return Interval::point(1.0).div(&self.powi(-n)?);
        }
        let mut acc = Interval::point(1.0);
        for _ in 0..n {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Tightest enclosure of an exact rational.
    pub fn from_rational(r: &BigRational) -> Result<Interval> {
        let mut f = r.to_f64().ok_or(IntervalError::Overflow)?;
        if !f.is_finite() {
            return Err(IntervalError::Overflow);
        }
        loop {
            match to_rational(f).cmp(r) {
                Ordering::Equal => return Ok(Interval::point(f)),
                Ordering::Greater => {
                    let below = f.next_down();
                    match to_rational(below).cmp(r) {
                        Ordering::Equal => return Ok(Interval::point(below)),
                        Ordering::Less => return Interval::checked(below, f),
                        Ordering::Greater => f = below,
                    }
                }
                Ordering::Less => {
                    let above = f.next_up();
                    match to_rational(above).cmp(r) {
                        Ordering::Equal => return Ok(Interval::point(above)),
                        Ordering::Greater => return Interval::checked(f, above),
                        Ordering::Less => f = above,
                    }
                }
            }
        }
    }

    /// Hull of the enclosures of two rationals, `a ≤ b`.
    pub fn from_rationals(a: &BigRational, b: &BigRational) -> Result<Interval> {
        if a > b {
            return Err(IntervalError::Parse(format!("{a} > {b}")));
        }
        Ok(Self::from_rational(a)?.hull(&Self::from_rational(b)?))
    }

    /// Parses `"[a]"`, `"[a,b]"` or a bare decimal `"a"`.
    pub fn parse_decimal(text: &str) -> Result<Interval> {
        let bad = || IntervalError::Parse(text.to_string());
        let t = text.trim();
        let inner = match (t.strip_prefix('['), t.ends_with(']')) {
            (Some(rest), true) => &rest[..rest.len() - 1],
            (None, false) => t,
            _ => return Err(bad()),
        };
        let parts: Vec<&str> = inner.split(',').collect();
        let nums = parts
            .iter()
            .map(|p| parse_decimal_rational(p).ok_or_else(bad))
            .collect::<Result<Vec<_>>>()?;
        match nums.as_slice() {
            [a] => Self::from_rational(a),
            [a, b] if a <= b => Self::from_rationals(a, b),
            [_, _] => Err(bad()),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.lo, self.hi)
    }
}

impl std::str::FromStr for Interval {
    type Err = IntervalError;

    fn from_str(s: &str) -> Result<Self> {
        Interval::parse_decimal(s)
    }
}

/// Exact value of a decimal literal such as `-12.5e-3`.
pub fn parse_decimal_rational(text: &str) -> Option<BigRational> {
    let t = text.trim();
    let (negative, t) = match t.as_bytes().first()? {
        b'-' => (true, &t[1..]),
        b'+' => (false, &t[1..]),
        _ => (false, t),
    };
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let scale = exponent.checked_sub(i32::try_from(frac_part.len()).ok()?)?;
    let ten = BigInt::from(10u32);
    let mut value = if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, scale.unsigned_abs() as usize))
    };
    if negative {
        value = -value;
    }
    Some(value)
}

/// Decimal literal or a fraction `p/q`.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    match text.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            (!q.is_zero()).then(|| BigRational::new(p, q))
        }
        None => parse_decimal_rational(text),
    }
}

/// Natural logarithm of a positive rational, accurate to a few ulps of `f64`.
///
/// Works for values far outside the `f64` range by splitting off powers of two.
pub fn ln_rational(r: &BigRational) -> Option<f64> {
    if !r.is_positive() {
        return None;
    }
    Some(ln_bigint(r.numer()) - ln_bigint(r.denom()))
}

fn ln_bigint(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().expect("fits").ln();
    }
    let shift = bits - 64;
    let top: BigInt = n >> shift;
    top.to_f64().expect("64-bit").ln() + (shift as f64) * std::f64::consts::LN_2
}
