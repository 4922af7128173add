//! Scalar abstraction shared by the exact-rational and floating-point pipelines.
//!
//! All geometry and constraint work defaults to [`Rat`] (arbitrary-precision
//! rationals, never rounding); the `f64` instantiation exists for the large
//! L2 studies where exactness is not required. Code generic over [`Scalar`]
//! must route every "is this zero / are these equal" decision through
//! [`Scalar::near_zero`] / [`Scalar::near_eq`] so that the rational pipeline
//! stays exact while the float pipeline carries an explicit tolerance.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Arbitrary-precision rational scalar, the default number type.
pub type Rat = BigRational;

/// Comparison tolerance used by every float-mode equality check.
pub const FLOAT_TOL: f64 = 1e-10;

/// Field operations plus the few conversions the spline machinery needs.
pub trait Scalar:
    Clone
    + PartialEq
    + PartialOrd
    + Debug
    + Display
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + 'static
{
    /// Whether arithmetic in this type is exact (no rounding anywhere).
    const EXACT: bool;

    fn from_int(n: i64) -> Self;

    /// The fraction `n/d`; `d` must be nonzero.
    fn from_ratio(n: i64, d: i64) -> Self;

    /// Exact value of a finite float (floats are dyadic rationals).
    fn from_f64(v: f64) -> Self;

    fn to_f64(&self) -> f64;

    fn abs(&self) -> Self;

    /// Exact-zero test in rational mode, `|x| <= FLOAT_TOL` in float mode.
    fn near_zero(&self) -> bool;

    fn near_eq(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).near_zero()
    }

    fn is_positive(&self) -> bool {
        *self > Self::zero()
    }

    fn is_negative(&self) -> bool {
        *self < Self::zero()
    }
}

impl Scalar for Rat {
    const EXACT: bool = true;

    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn from_ratio(n: i64, d: i64) -> Self {
        assert!(d != 0, "zero denominator");
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn from_f64(v: f64) -> Self {
        BigRational::from_float(v).expect("finite float")
    }

    fn to_f64(&self) -> f64 {
        // BigRational::to_f64 can overflow to None for huge components;
        // fall back to a quotient of rounded parts.
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            let n = self.numer().to_f64().unwrap_or(f64::INFINITY);
            let d = self.denom().to_f64().unwrap_or(f64::INFINITY);
            n / d
        })
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn near_zero(&self) -> bool {
        self.is_zero()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_int(n: i64) -> Self {
        n as f64
    }

    fn from_ratio(n: i64, d: i64) -> Self {
        assert!(d != 0, "zero denominator");
        n as f64 / d as f64
    }

    fn from_f64(v: f64) -> Self {
        v
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn near_zero(&self) -> bool {
        f64::abs(*self) <= FLOAT_TOL
    }
}

/// Binomial coefficient as a scalar.
pub fn binomial<T: Scalar>(n: usize, k: usize) -> T {
    if k > n {
        return T::zero();
    }
    let k = k.min(n - k);
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..k {
        num *= (n - i) as u128;
        den *= (i + 1) as u128;
    }
    T::from_int((num / den) as i64)
}

/// A point in the plane with scalar coordinates.
#[derive(Clone, PartialEq, Debug)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point2<T> {
    pub fn new(x: T, y: T) -> Self {
        Point2 { x, y }
    }

    pub fn zero() -> Self {
        Point2::new(T::zero(), T::zero())
    }

    pub fn scale(&self, s: &T) -> Self {
        Point2::new(self.x.clone() * s.clone(), self.y.clone() * s.clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        Point2::new(
            self.x.clone() + other.x.clone(),
            self.y.clone() + other.y.clone(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        Point2::new(
            self.x.clone() - other.x.clone(),
            self.y.clone() - other.y.clone(),
        )
    }

    /// 2x2 determinant `det(self, other)`.
    pub fn cross(&self, other: &Self) -> T {
        self.x.clone() * other.y.clone() - self.y.clone() * other.x.clone()
    }

    pub fn near_eq(&self, other: &Self) -> bool {
        self.x.near_eq(&other.x) && self.y.near_eq(&other.y)
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.x.to_f64(), self.y.to_f64())
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Point2<U> {
        Point2::new(f(&self.x), f(&self.y))
    }
}

/// Convert a rational point to float coordinates.
pub fn rat_point_to_f64(p: &Point2<Rat>) -> Point2<f64> {
    Point2::new(Scalar::to_f64(&p.x), Scalar::to_f64(&p.y))
}

/// Shorthand for building a rational from a ratio of machine integers.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::from_ratio(n, d)
}
