use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{structural, Error, Result};

pub type Rational = BigRational;

/// Largest denominator produced when snapping floats to rationals.
pub const SNAP_MAX_DENOMINATOR: u64 = 1_000_000;
/// Largest residual accepted when snapping floats to rationals.
pub const SNAP_RESIDUAL: f64 = 1e-9;

/// Numeric field used for box entries: exact rationals or IEEE floats.
pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Num + Signed + Send + Sync + 'static
{
    const EXACT: bool;
    const KIND: &'static str;

    /// Tolerance for equality comparisons (0 for exact kinds).
    fn default_tol() -> f64;
    /// Tolerance below zero accepted for entries.
    fn negative_tol() -> f64;
    fn from_rational(r: &Rational) -> Self;
    fn from_i64(v: i64) -> Self;
    fn as_f64(&self) -> f64;
    /// Exact copy for rationals, denominator-capped snap for floats.
    fn to_rational(&self) -> Result<Rational>;
    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self>;

    fn close_to(&self, other: &Self, tol: f64) -> bool {
        if Self::EXACT && tol == 0.0 {
            self == other
        } else {
            (self.clone() - other.clone()).abs().as_f64() <= tol
        }
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;
    const KIND: &'static str = "rational";

    fn default_tol() -> f64 {
        0.0
    }
    fn negative_tol() -> f64 {
        0.0
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }
    fn as_f64(&self) -> f64 {
        ratio_to_f64(self)
    }
    fn to_rational(&self) -> Result<Rational> {
        Ok(self.clone())
    }
    fn to_json(&self) -> Value {
        Value::String(format_rational(self))
    }
    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::String(s) => parse_rational(s),
            Value::Number(n) => match n.as_i64() {
                Some(i) => Ok(Self::from_i64(i)),
                None => structural(format!("rational entry must be an integer or \"num/den\", got {n}")),
            },
            _ => structural(format!("bad rational entry {v}")),
        }
    }
}

macro_rules! float_scalar {
    ($t:ty, $tol:expr) => {
        impl Scalar for $t {
            const EXACT: bool = false;
            const KIND: &'static str = "float";

            fn default_tol() -> f64 {
                $tol
            }
            fn negative_tol() -> f64 {
                1e-12
            }
            fn from_rational(r: &Rational) -> Self {
                ratio_to_f64(r) as $t
            }
            fn from_i64(v: i64) -> Self {
                v as $t
            }
            fn as_f64(&self) -> f64 {
                *self as f64
            }
            fn to_rational(&self) -> Result<Rational> {
                snap(*self as f64)
            }
            fn to_json(&self) -> Value {
                serde_json::Number::from_f64(*self as f64)
                    .map(Value::Number)
                    .unwrap_or(Value::Null)
            }
            fn from_json(v: &Value) -> Result<Self> {
                match v.as_f64() {
                    Some(x) => Ok(x as $t),
                    None => structural(format!("float entry must be a number, got {v}")),
                }
            }
        }
    };
}

float_scalar!(f64, 1e-9);
float_scalar!(f32, 1e-5);

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// `num/den`, or just `num` for integers.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Structural(format!("cannot parse rational {s:?}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

fn ratio_to_f64(r: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Huge numerators/denominators: shift both down before dividing.
    let bits = r.numer().bits().max(r.denom().bits());
    let shift = bits.saturating_sub(1000) as usize;
    let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

/// Best rational approximation with denominator at most `max_den`
/// (continued fractions with a final semiconvergent).
pub fn best_rational(x: f64, max_den: u64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let neg = x < 0.0;
    let target = Rational::from_float(x.abs())?;
    let max_den = BigInt::from(max_den);
    let (mut p0, mut q0) = (BigInt::zero(), BigInt::one());
    let (mut p1, mut q1) = (BigInt::one(), BigInt::zero());
    let mut rest = target.clone();
    loop {
        let a = rest.floor().to_integer();
        let q2 = &a * &q1 + &q0;
        if q2 > max_den {
            // Largest admissible semiconvergent, kept only if it beats the last convergent.
            let k = (&max_den - &q0).div_floor(&q1);
            let semi = Rational::new(&k * &p1 + &p0, &k * &q1 + &q0);
            let conv = Rational::new(p1.clone(), q1.clone());
            let pick = if (&semi - &target).abs() < (&conv - &target).abs() { semi } else { conv };
            return Some(if neg { -pick } else { pick });
        }
        let p2 = &a * &p1 + &p0;
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        let frac = &rest - Rational::from_integer(a);
        if frac.is_zero() {
            let r = Rational::new(p1, q1);
            return Some(if neg { -r } else { r });
        }
        rest = frac.recip();
    }
}

/// Snap a float to a rational with the default denominator cap and residual.
pub fn snap(x: f64) -> Result<Rational> {
    let r = best_rational(x, SNAP_MAX_DENOMINATOR)
        .ok_or_else(|| Error::InvalidArgument(format!("cannot rationalize {x}")))?;
    let residual = (ratio_to_f64(&r) - x).abs();
    if residual > SNAP_RESIDUAL {
        return Err(Error::InvalidArgument(format!(
            "{x} has no rational within {SNAP_RESIDUAL} with denominator <= {SNAP_MAX_DENOMINATOR}"
        )));
    }
    Ok(r)
}

pub(crate) fn sum<T: Scalar>(items: impl IntoIterator<Item = T>) -> T {
    items.into_iter().fold(T::zero(), |acc, v| acc + v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["3/4", "-1/8", "7", "0"] {
            assert_eq!(format_rational(&parse_rational(s).unwrap()), s);
        }
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(parse_rational("2/4").unwrap(), rat(1, 2));
    }

    #[test]
    fn snapping() {
        assert_eq!(snap(0.5).unwrap(), rat(1, 2));
        assert_eq!(snap(1.0 / 3.0).unwrap(), rat(1, 3));
        assert_eq!(snap(-0.125).unwrap(), rat(-1, 8));
        let r = snap(std::f64::consts::FRAC_1_SQRT_2).unwrap();
        assert!(r.denom() <= &BigInt::from(SNAP_MAX_DENOMINATOR));
        assert!((r.as_f64() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
        // pi: 355/113 is a convergent; the snap must still respect the residual bound.
        let pi = snap(std::f64::consts::PI).unwrap();
        assert!((pi.as_f64() - std::f64::consts::PI).abs() <= SNAP_RESIDUAL);
    }

    #[test]
    fn exact_comparison_ignores_tolerance_only_at_zero() {
        let a = rat(1, 3);
        let b = rat(1, 3) + rat(1, 1_000_000_000_000);
        assert!(!a.close_to(&b, 0.0));
        assert!(a.close_to(&b, 1e-9));
        assert!(0.1f64.close_to(&(0.1 + 1e-12), 1e-9));
    }

    #[test]
    fn huge_rationals_convert() {
        let big = Rational::new((BigInt::from(3) << 2000usize) + 1, BigInt::from(4) << 2000usize);
        assert_eq!(big.as_f64(), 0.75);
    }
}
