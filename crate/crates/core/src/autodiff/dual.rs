//! Forward-mode dual numbers over any [`Scalar`].
//!
//! `Dual<f64>` gives exact first derivatives in one pass. `Dual<Var>` keeps
//! both the value and the tangent on a reverse-mode tape, so a loss built
//! from input derivatives can itself be differentiated with respect to the
//! network parameters.

use std::ops::{Add, Div, Mul, Neg, Sub};

use super::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual<T> {
    pub value: T,
    pub tangent: T,
}

impl<T: Scalar> Dual<T> {
    pub fn new(value: T, tangent: T) -> Self {
        Self { value, tangent }
    }

    /// Tangent zero.
    pub fn constant(value: T) -> Self {
        Self {
            value,
            tangent: T::from_f64(0.0),
        }
    }

    /// Tangent one: the independent variable.
    pub fn variable(value: T) -> Self {
        Self {
            value,
            tangent: T::from_f64(1.0),
        }
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Dual::new(self.value + rhs.value, self.tangent + rhs.tangent)
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Dual::new(self.value - rhs.value, self.tangent - rhs.tangent)
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Dual::new(
            self.value * rhs.value,
            self.value * rhs.tangent + self.tangent * rhs.value,
        )
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let q = self.value / rhs.value;
        Dual::new(q, (self.tangent - q * rhs.tangent) / rhs.value)
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual::new(-self.value, -self.tangent)
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    fn from_f64(v: f64) -> Self {
        Dual::constant(T::from_f64(v))
    }

    fn value(&self) -> f64 {
        self.value.value()
    }

    fn tanh(self) -> Self {
        let t = self.value.tanh();
        let slope = T::from_f64(1.0) - t * t;
        Dual::new(t, slope * self.tangent)
    }

    fn ln(self) -> Self {
        Dual::new(self.value.ln(), self.tangent / self.value)
    }

    fn powf(self, exponent: f64) -> Self {
        let slope = T::from_f64(exponent) * self.value.powf(exponent - 1.0);
        Dual::new(self.value.powf(exponent), slope * self.tangent)
    }

    fn abs(self) -> Self {
        let v = self.value.value();
        let tangent = if v > 0.0 {
            self.tangent
        } else if v < 0.0 {
            -self.tangent
        } else {
            T::from_f64(0.0)
        };
        Dual::new(self.value.abs(), tangent)
    }

    fn dot(a: &[Self], b: &[Self]) -> Self {
        debug_assert_eq!(a.len(), b.len());
        let n = a.len();
        let mut lhs = Vec::with_capacity(2 * n);
        let mut rhs = Vec::with_capacity(2 * n);
        lhs.extend(a.iter().map(|d| d.value));
        rhs.extend(b.iter().map(|d| d.value));
        let value = T::dot(&lhs, &rhs);
        // d(Σ a b) = Σ a·db + Σ da·b
        lhs.extend(a.iter().map(|d| d.tangent));
        rhs.clear();
        rhs.extend(b.iter().map(|d| d.tangent));
        rhs.extend(b.iter().map(|d| d.value));
        let tangent = T::dot(&lhs, &rhs);
        Dual::new(value, tangent)
    }
}
