use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Arithmetic surface shared by plain `f64`, tape variables and dual numbers.
///
/// Only these primitives exist, so any function written against `Scalar` is
/// differentiable by construction.
pub trait Scalar:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// A constant with no derivative information.
    fn from_f64(v: f64) -> Self;

    /// Primal value.
    fn value(&self) -> f64;

    fn tanh(self) -> Self;

    fn ln(self) -> Self;

    fn powf(self, exponent: f64) -> Self;

    fn abs(self) -> Self;

    /// `Σ a_i b_i`. Implementations may fuse this into a single node.
    fn dot(a: &[Self], b: &[Self]) -> Self {
        debug_assert_eq!(a.len(), b.len());
        let mut acc = Self::from_f64(0.0);
        for (&x, &y) in a.iter().zip(b) {
            acc = acc + x * y;
        }
        acc
    }

    fn square(self) -> Self {
        self * self
    }
}

impl Scalar for f64 {
    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }

    #[inline]
    fn value(&self) -> f64 {
        *self
    }

    #[inline]
    fn tanh(self) -> Self {
        f64::tanh(self)
    }

    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }

    #[inline]
    fn powf(self, exponent: f64) -> Self {
        f64::powf(self, exponent)
    }

    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }

    fn dot(a: &[Self], b: &[Self]) -> Self {
        a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
    }
}
