//! Exact rationals and the extended nonnegative value used for every measure.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Mul};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational. Every coordinate and every finite measure is one of these.
pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// `2^-level` as an exact rational.
pub fn dyadic_step(level: u32) -> Q {
    Q::new(BigInt::one(), BigInt::one() << level as usize)
}

/// `2^level` as an exact rational.
pub fn pow2(level: u32) -> Q {
    Q::from_integer(BigInt::one() << level as usize)
}

pub fn floor_i64(x: &Q) -> Result<i64> {
    x.floor().to_integer().to_i64().ok_or_else(|| Error::Overflow(format!("floor({x}) does not fit in i64")))
}

pub fn ceil_i64(x: &Q) -> Result<i64> {
    x.ceil().to_integer().to_i64().ok_or_else(|| Error::Overflow(format!("ceil({x}) does not fit in i64")))
}

/// Parses `"p/q"` or `"p"`. Whitespace is not accepted; the wire format is canonical.
pub fn parse_q(s: &str) -> Result<Q> {
    let bad = || Error::Parse(format!("malformed rational {s:?}, expected \"p/q\""));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let digits_ok = |t: &str, signed: bool| {
        let t = if signed { t.strip_prefix('-').unwrap_or(t) } else { t };
        !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit())
    };
    if !digits_ok(num, true) || !digits_ok(den, false) {
        return Err(bad());
    }
    let n: BigInt = num.parse().map_err(|_| bad())?;
    let d: BigInt = den.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Q::new(n, d))
}

/// Canonical string form: reduced, `"p/q"`, or `"p"` for integers.
pub fn format_q(x: &Q) -> String {
    x.to_string()
}

/// Decimal rendering of `sqrt(x)` with `digits` significant digits, rounded half up.
/// Exact: computed with integer square roots, no floating point.
pub fn sqrt_decimal(x: &Q, digits: u32) -> String {
    assert!(!x.is_negative());
    if x.is_zero() {
        return "0".to_string();
    }
    // Find exponent e with 10^e <= sqrt(x) < 10^(e+1), i.e. 10^(2e) <= x < 10^(2e+2).
    let mut e: i64 = 0;
    let pow10 = |k: i64| -> Q {
        if k >= 0 {
            Q::from_integer(BigInt::from(10).pow(k as u32))
        } else {
            Q::new(BigInt::one(), BigInt::from(10).pow((-k) as u32))
        }
    };
    while &pow10(2 * e) > x {
        e -= 1;
    }
    while &pow10(2 * e + 2) <= x {
        e += 1;
    }
    // Scale so the integer part of the scaled root carries digits + 1 significant digits.
    let shift = digits as i64 - e; // 10^(shift) * sqrt(x) has digits+1 integer digits
    let scaled = x * pow10(2 * shift);
    let floor = scaled.floor().to_integer();
    let root = floor.sqrt();
    // round half up on the last extra digit
    let (rounded, last) = root.div_rem(&BigInt::from(10));
    let mut mantissa = rounded;
    if last >= BigInt::from(5) {
        mantissa += 1;
    }
    // mantissa has `digits` (or digits+1 after carry) significant digits; value = mantissa * 10^(1 - shift)
    let mut s = mantissa.to_string();
    let mut exp10 = 1 - shift; // value = s * 10^exp10
    if s.len() as u32 > digits {
        // carry produced an extra digit (e.g. 9.99.. -> 10.0..); drop a trailing zero
        s.pop();
        exp10 += 1;
    }
    place_decimal(&s, exp10)
}

fn place_decimal(digits: &str, exp10: i64) -> String {
    if exp10 >= 0 {
        let mut out = digits.to_string();
        out.extend(std::iter::repeat_n('0', exp10 as usize));
        return out;
    }
    let frac = (-exp10) as usize;
    if digits.len() > frac {
        let (int, f) = digits.split_at(digits.len() - frac);
        format!("{int}.{f}")
    } else {
        let zeros = "0".repeat(frac - digits.len());
        format!("0.{zeros}{digits}")
    }
}

/// A nonnegative exact rational or `+inf`. Measures and squared distances live here.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExtendedRational {
    Finite(Q),
    Infinity,
}

impl ExtendedRational {
    pub fn zero() -> Self {
        ExtendedRational::Finite(Q::zero())
    }

    /// Rejects negative values.
    pub fn finite(x: Q) -> Result<Self> {
        if x.is_negative() {
            return Err(Error::Invalid(format!("negative measure value {x}")));
        }
        Ok(ExtendedRational::Finite(x))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedRational::Finite(_))
    }

    pub fn is_infinite(&self) -> bool {
        !self.is_finite()
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ExtendedRational::Finite(x) if x.is_zero())
    }

    pub fn as_finite(&self) -> Option<&Q> {
        match self {
            ExtendedRational::Finite(x) => Some(x),
            ExtendedRational::Infinity => None,
        }
    }

    /// `self - other`. `inf - finite = inf`; `inf - inf` and negative results are errors.
    pub fn checked_sub(&self, other: &ExtendedRational) -> Result<ExtendedRational> {
        use ExtendedRational::*;
        match (self, other) {
            (Infinity, Infinity) => Err(Error::Invalid("inf - inf is undefined".into())),
            (Infinity, Finite(_)) => Ok(Infinity),
            (Finite(a), Finite(b)) => ExtendedRational::finite(a - b),
            (Finite(_), Infinity) => Err(Error::Invalid("finite - inf is negative".into())),
        }
    }

    pub fn min<'a>(&'a self, other: &'a ExtendedRational) -> &'a ExtendedRational {
        if self <= other {
            self
        } else {
            other
        }
    }

    /// Scales by a nonnegative finite factor with the convention `0 * inf = 0`.
    pub fn scale(&self, k: &Q) -> ExtendedRational {
        match self {
            ExtendedRational::Finite(x) => ExtendedRational::Finite(x * k),
            ExtendedRational::Infinity if k.is_zero() => ExtendedRational::zero(),
            ExtendedRational::Infinity => ExtendedRational::Infinity,
        }
    }
}

impl Default for ExtendedRational {
    fn default() -> Self {
        ExtendedRational::zero()
    }
}

impl From<Q> for ExtendedRational {
    fn from(x: Q) -> Self {
        debug_assert!(!x.is_negative());
        ExtendedRational::Finite(x)
    }
}

impl PartialOrd for ExtendedRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtendedRational {
    fn cmp(&self, other: &Self) -> Ordering {
        use ExtendedRational::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.cmp(b),
            (Finite(_), Infinity) => Ordering::Less,
            (Infinity, Finite(_)) => Ordering::Greater,
            (Infinity, Infinity) => Ordering::Equal,
        }
    }
}

impl Add for ExtendedRational {
    type Output = ExtendedRational;
    fn add(self, rhs: ExtendedRational) -> ExtendedRational {
        &self + &rhs
    }
}

impl<'a> Add<&'a ExtendedRational> for &'a ExtendedRational {
    type Output = ExtendedRational;
    fn add(self, rhs: &ExtendedRational) -> ExtendedRational {
        match (self, rhs) {
            (ExtendedRational::Finite(a), ExtendedRational::Finite(b)) => ExtendedRational::Finite(a + b),
            _ => ExtendedRational::Infinity,
        }
    }
}

impl<'a> Mul<&'a ExtendedRational> for &'a ExtendedRational {
    type Output = ExtendedRational;
    /// `0 * inf = 0`, the measure-theoretic convention.
    fn mul(self, rhs: &ExtendedRational) -> ExtendedRational {
        match (self, rhs) {
            (ExtendedRational::Finite(a), ExtendedRational::Finite(b)) => ExtendedRational::Finite(a * b),
            (ExtendedRational::Finite(a), _) | (_, ExtendedRational::Finite(a)) if a.is_zero() => {
                ExtendedRational::zero()
            }
            _ => ExtendedRational::Infinity,
        }
    }
}

impl Sum for ExtendedRational {
    fn sum<I: Iterator<Item = ExtendedRational>>(iter: I) -> Self {
        let mut acc = Q::zero();
        for x in iter {
            match x {
                ExtendedRational::Finite(v) => acc += v,
                ExtendedRational::Infinity => return ExtendedRational::Infinity,
            }
        }
        ExtendedRational::Finite(acc)
    }
}

impl fmt::Display for ExtendedRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedRational::Finite(x) => write!(f, "{x}"),
            ExtendedRational::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for ExtendedRational {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "inf" {
            Ok(ExtendedRational::Infinity)
        } else {
            ExtendedRational::finite(parse_q(s)?)
        }
    }
}

/// Running sum that tolerates infinite terms without allocating on each step.
#[derive(Clone, Debug, Default)]
pub(crate) struct ExtSum {
    finite: Q,
    infinite: usize,
}

impl ExtSum {
    pub fn add(&mut self, x: &ExtendedRational) {
        match x {
            ExtendedRational::Finite(v) => self.finite += v,
            ExtendedRational::Infinity => self.infinite += 1,
        }
    }

    pub fn sub(&mut self, x: &ExtendedRational) {
        match x {
            ExtendedRational::Finite(v) => self.finite -= v,
            ExtendedRational::Infinity => self.infinite -= 1,
        }
    }

    pub fn value(&self) -> ExtendedRational {
        if self.infinite > 0 {
            ExtendedRational::Infinity
        } else {
            ExtendedRational::Finite(self.finite.clone())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_are_canonical() {
        assert_eq!(parse_q("2/4").unwrap(), q(1, 2));
        assert_eq!(format_q(&parse_q("2/4").unwrap()), "1/2");
        assert_eq!(format_q(&parse_q("-6/3").unwrap()), "-2");
        assert_eq!(format_q(&qi(7)), "7");
        for bad in ["", "1/", "/2", "1/0", "a", "1.5", " 1/2", "1/-2", "--1"] {
            assert!(parse_q(bad).is_err(), "{bad:?} should be rejected");
        }
    }

    #[test]
    fn extended_arithmetic_follows_measure_conventions() {
        let inf = ExtendedRational::Infinity;
        let one = ExtendedRational::from(qi(1));
        assert_eq!(&inf + &one, inf);
        assert_eq!(inf.checked_sub(&one).unwrap(), inf);
        assert!(inf.checked_sub(&inf).is_err());
        assert!(one.checked_sub(&ExtendedRational::from(qi(2))).is_err());
        assert!(one < inf);
        assert_eq!(&ExtendedRational::zero() * &inf, ExtendedRational::zero());
        assert_eq!("inf".parse::<ExtendedRational>().unwrap(), inf);
        assert!("-1/2".parse::<ExtendedRational>().is_err());
    }

    #[test]
    fn sqrt_decimal_is_exact_and_rounded() {
        assert_eq!(sqrt_decimal(&q(1, 64), 12), "0.125000000000");
        assert_eq!(sqrt_decimal(&qi(2), 12), "1.41421356237");
        assert_eq!(sqrt_decimal(&qi(100), 3), "10.0");
        assert_eq!(sqrt_decimal(&q(1, 2), 12), "0.707106781187");
        assert_eq!(sqrt_decimal(&qi(0), 12), "0");
        assert_eq!(sqrt_decimal(&q(1, 10000), 2), "0.010");
        // 0.99999... rounds up across a power of ten
        assert_eq!(sqrt_decimal(&q(99999999, 100000000), 3), "1.00");
    }
}
