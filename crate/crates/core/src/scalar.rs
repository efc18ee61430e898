//! Scalar abstraction so the game arithmetic works over exact rationals and
//! floats alike. The pivot engine itself is rational-only; genericity here
//! covers the data model, cost arithmetic and verification.

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::{Int, Rational};

pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + 'static
{
    /// True when equality tests are exact (tolerance 0 is meaningful).
    const EXACT: bool;

    fn from_rational(q: &Rational) -> Self;
    fn from_int(v: i64) -> Self;
    fn abs_val(&self) -> Self;
    fn to_f64_lossy(&self) -> f64;
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }

    fn from_int(v: i64) -> Self {
        Rational::from_integer(Int::from(v))
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn to_f64_lossy(&self) -> f64 {
        rational_to_f64(self)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_rational(q: &Rational) -> Self {
        rational_to_f64(q)
    }

    fn from_int(v: i64) -> Self {
        v as f64
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn to_f64_lossy(&self) -> f64 {
        *self
    }
}

/// Lossy conversion that stays accurate for the magnitudes we produce.
pub fn rational_to_f64(q: &Rational) -> f64 {
    let n = bigint_to_f64(q.numer());
    let d = bigint_to_f64(q.denom());
    n / d
}

fn bigint_to_f64(x: &Int) -> f64 {
    // num-bigint's to_f64 handles arbitrary size; fall back to ±inf on overflow
    num_traits::ToPrimitive::to_f64(x).unwrap_or(if x.is_negative() {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    })
}
