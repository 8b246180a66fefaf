//! Scalar backends.
//!
//! Every finite-space operation is generic over [`Scalar`]. Two backends exist:
//! `f64`, and [`Rational`] (arbitrary precision) for instances where laws must
//! hold with equality rather than up to rounding.

use std::fmt::Debug;

use num::{BigInt, BigRational, Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{Error, Result};

/// Arbitrary-precision rational scalar.
pub type Rational = BigRational;

/// Tolerance on `|sum - 1|` when validating floating-point probability vectors.
pub const PROB_SUM_TOL: f64 = 1e-9;
/// Floating-point weights in `[-NEG_WEIGHT_TOL, 0)` are clamped to zero.
pub const NEG_WEIGHT_TOL: f64 = 1e-12;
/// Shared entrywise comparator for kernels and measures under the float backend.
pub const KERNEL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarKind {
    Rational,
    Float,
}

impl ScalarKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScalarKind::Rational => "rational",
            ScalarKind::Float => "float",
        }
    }
}

pub trait Scalar: Clone + Debug + PartialEq + PartialOrd + Signed + Send + Sync + 'static {
    const KIND: ScalarKind;

    fn to_f64(&self) -> f64;

    /// Exact conversion for rationals (every finite double is a dyadic rational).
    fn from_f64(x: f64) -> Result<Self>;

    fn from_ratio(numer: i64, denom: i64) -> Self;

    fn from_usize(n: usize) -> Self {
        Self::from_ratio(n as i64, 1)
    }

    /// Equality up to `tol` for floats; `tol` is ignored by exact backends.
    fn close(&self, other: &Self, tol: f64) -> bool;

    /// Applies the tiny-negative clamp. Returns the offending value if it is
    /// too negative to be rounding noise.
    fn clamp_nonnegative(self) -> std::result::Result<Self, Self>;

    fn to_json(&self) -> Value;

    fn from_json(v: &Value) -> Result<Self>;

    fn is_exact() -> bool {
        Self::KIND == ScalarKind::Rational
    }
}

impl Scalar for f64 {
    const KIND: ScalarKind = ScalarKind::Float;

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_f64(x: f64) -> Result<Self> {
        if x.is_finite() {
            Ok(x)
        } else {
            Err(Error::Invalid(format!("non-finite scalar {x}")))
        }
    }

    fn from_ratio(numer: i64, denom: i64) -> Self {
        numer as f64 / denom as f64
    }

    fn close(&self, other: &Self, tol: f64) -> bool {
        (self - other).abs() <= tol
    }

    fn clamp_nonnegative(self) -> std::result::Result<Self, Self> {
        if self >= 0.0 {
            Ok(self)
        } else if self >= -NEG_WEIGHT_TOL {
            Ok(0.0)
        } else {
            Err(self)
        }
    }

    fn to_json(&self) -> Value {
        serde_json::Number::from_f64(*self)
            .map(Value::Number)
            .unwrap_or(Value::Null)
    }

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::Number(n) => n
                .as_f64()
                .ok_or_else(|| Error::Invalid(format!("bad number {n}"))),
            Value::String(s) => parse_rational(s).map(|r| Scalar::to_f64(&r)),
            other => Err(Error::Invalid(format!("expected a number, got {other}"))),
        }
    }
}

impl Scalar for Rational {
    const KIND: ScalarKind = ScalarKind::Rational;

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_f64(x: f64) -> Result<Self> {
        BigRational::from_float(x).ok_or_else(|| Error::Invalid(format!("non-finite scalar {x}")))
    }

    fn from_ratio(numer: i64, denom: i64) -> Self {
        BigRational::new(BigInt::from(numer), BigInt::from(denom))
    }

    fn close(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }

    fn clamp_nonnegative(self) -> std::result::Result<Self, Self> {
        if self.is_negative() {
            Err(self)
        } else {
            Ok(self)
        }
    }

    fn to_json(&self) -> Value {
        Value::String(format_rational(self))
    }

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::String(s) => parse_rational(s),
            Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Ok(BigRational::from_integer(BigInt::from(i)))
                } else {
                    let f = n
                        .as_f64()
                        .ok_or_else(|| Error::Invalid(format!("bad number {n}")))?;
                    <Rational as Scalar>::from_f64(f)
                }
            }
            other => Err(Error::Invalid(format!("expected \"p/q\", got {other}"))),
        }
    }
}

/// `"p/q"` form; integers keep the `/1` so the format is uniform.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::Invalid(format!("cannot parse rational {s:?}"));
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s.trim(), "1"),
    };
    let p: BigInt = p.parse().map_err(|_| bad())?;
    let q: BigInt = q.parse().map_err(|_| bad())?;
    if q.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(p, q))
}

/// Sum of a slice of scalars.
pub fn sum<S: Scalar>(xs: &[S]) -> S {
    xs.iter().fold(S::zero(), |acc, x| acc + x.clone())
}

/// Dot product of two equally long slices.
pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

/// Checks `sum == 1` within [`PROB_SUM_TOL`] (exactly for rationals).
pub fn is_unit_sum<S: Scalar>(xs: &[S]) -> bool {
    sum(xs).close(&S::one(), PROB_SUM_TOL)
}
