//! Scalar abstraction shared by plain `f64` evaluation and taped evaluation,
//! so the physics and the network are written once.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::tape::Var;

pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn value(self) -> f64;
    /// A constant living in the same context as `self`.
    fn lift(self, c: f64) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn asin(self) -> Self;
    fn sqrt(self) -> Self;
    fn relu(self) -> Self;
    fn square(self) -> Self;
    /// Inner product; `a` must be non-empty and as long as `b`.
    fn dot(a: &[Self], b: &[Self]) -> Self;
}

impl Real for f64 {
    fn value(self) -> f64 {
        self
    }
    fn lift(self, c: f64) -> f64 {
        c
    }
    fn sin(self) -> f64 {
        f64::sin(self)
    }
    fn cos(self) -> f64 {
        f64::cos(self)
    }
    fn asin(self) -> f64 {
        f64::asin(self)
    }
    fn sqrt(self) -> f64 {
        f64::sqrt(self)
    }
    fn relu(self) -> f64 {
        self.max(0.0)
    }
    fn square(self) -> f64 {
        self * self
    }
    fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }
}

impl<'t> Real for Var<'t> {
    fn value(self) -> f64 {
        Var::value(self)
    }
    fn lift(self, c: f64) -> Self {
        self.tape().constant(c)
    }
    fn sin(self) -> Self {
        Var::sin(self)
    }
    fn cos(self) -> Self {
        Var::cos(self)
    }
    fn asin(self) -> Self {
        Var::asin(self)
    }
    fn sqrt(self) -> Self {
        Var::sqrt(self)
    }
    fn relu(self) -> Self {
        Var::relu(self)
    }
    fn square(self) -> Self {
        Var::square(self)
    }
    fn dot(a: &[Self], b: &[Self]) -> Self {
        a[0].tape()
            .dot(a, b)
            .expect("dot operands must have equal length")
    }
}
