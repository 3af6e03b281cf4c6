//! Exact scalars and the numeric backend contract.

mod eps;
mod poly;
mod rational;

use std::fmt;
use std::str::FromStr;

pub use eps::{EpsScalar, DEFAULT_PRECISION};
pub use poly::Poly;
pub use rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ArithError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("value has a pole at e = 0")]
    PoleAtZero,
    #[error("ran out of series precision in e")]
    PrecisionExhausted,
    #[error("parse error: {0}")]
    Parse(String),
}

/// Field operations shared by every backend.
///
/// Method names are distinct from the `std::ops` traits so that generic code
/// reads the same for all backends and never relies on operator overloading.
pub trait Scalar: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync + 'static {
    /// What a scalar collapses to once ε is sent to zero.
    type Value: Probability;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn is_zero(&self) -> bool;
    fn plus(&self, rhs: &Self) -> Self;
    fn minus(&self, rhs: &Self) -> Self;
    fn times(&self, rhs: &Self) -> Self;
    fn over(&self, rhs: &Self) -> Result<Self, ArithError>;
    fn limit(&self) -> Result<Self::Value, ArithError>;
}

/// A limit value usable as a probability: exact rationals or doubles.
pub trait Probability: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn to_f64(&self) -> f64;
    /// True when the uniform variate `u / 2^64` falls below `self`.
    fn admits(&self, u: u64) -> bool;
}

impl Scalar for Rational {
    type Value = Rational;

    fn zero() -> Self {
        Rational::zero()
    }
    fn one() -> Self {
        Rational::one()
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn is_zero(&self) -> bool {
        Rational::is_zero(self)
    }
    fn plus(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn minus(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn times(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn over(&self, rhs: &Self) -> Result<Self, ArithError> {
        self.checked_div(rhs)
    }
    fn limit(&self) -> Result<Rational, ArithError> {
        Ok(self.clone())
    }
}

impl Probability for Rational {
    fn zero() -> Self {
        Rational::zero()
    }
    fn one() -> Self {
        Rational::one()
    }
    fn to_f64(&self) -> f64 {
        Rational::to_f64(self)
    }
    fn admits(&self, u: u64) -> bool {
        self.exceeds_fraction_of_u64(u)
    }
}

impl Scalar for EpsScalar {
    type Value = Rational;

    fn zero() -> Self {
        EpsScalar::zero()
    }
    fn one() -> Self {
        EpsScalar::one()
    }
    fn from_rational(r: &Rational) -> Self {
        EpsScalar::from_rational(r.clone())
    }
    fn is_zero(&self) -> bool {
        EpsScalar::is_zero(self)
    }
    fn plus(&self, rhs: &Self) -> Self {
        self.add(rhs)
    }
    fn minus(&self, rhs: &Self) -> Self {
        self.sub(rhs)
    }
    fn times(&self, rhs: &Self) -> Self {
        self.mul(rhs)
    }
    fn over(&self, rhs: &Self) -> Result<Self, ArithError> {
        self.div(rhs)
    }
    fn limit(&self) -> Result<Rational, ArithError> {
        self.limit0()
    }
}

impl Scalar for f64 {
    type Value = f64;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_rational(r: &Rational) -> Self {
        r.to_f64()
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn plus(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn minus(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn times(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn over(&self, rhs: &Self) -> Result<Self, ArithError> {
        if *rhs == 0.0 {
            Err(ArithError::DivisionByZero)
        } else {
            Ok(self / rhs)
        }
    }
    fn limit(&self) -> Result<f64, ArithError> {
        Ok(*self)
    }
}

impl Probability for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn admits(&self, u: u64) -> bool {
        ((u >> 11) as f64) * (1.0 / 9_007_199_254_740_992.0) < *self
    }
}

/// Which scalar type a computation runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Backend {
    /// Rationals, escalating to ε-fractions on a zero cell factor.
    #[default]
    ExactRational,
    /// ε-fractions from the start.
    ExactEps,
    Float64,
}

impl Backend {
    pub fn is_exact(self) -> bool {
        !matches!(self, Backend::Float64)
    }
}

impl FromStr for Backend {
    type Err = ArithError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" | "exact-rational" | "rational" => Ok(Backend::ExactRational),
            "eps" | "exact-eps" => Ok(Backend::ExactEps),
            "float64" | "float" | "f64" => Ok(Backend::Float64),
            other => Err(ArithError::Parse(format!("unknown backend {other:?}"))),
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::ExactRational => "exact",
            Backend::ExactEps => "eps",
            Backend::Float64 => "float64",
        })
    }
}
