//! Element type abstraction: networks run in `f32` for speed, and in
//! `f64` where verification needs headroom (finite-difference checks).

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

/// Floating-point element of a network: `f32` or `f64`.
pub trait Scalar:
    Copy
    + Clone
    + Debug
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
{
    const ZERO: Self;
    const ONE: Self;

    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
    fn exp_s(self) -> Self;
    fn sqrt_s(self) -> Self;
    fn max_s(self, other: Self) -> Self;
}

impl Scalar for f32 {
    const ZERO: f32 = 0.0;
    const ONE: f32 = 1.0;

    fn from_f64(v: f64) -> f32 {
        v as f32
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
    fn exp_s(self) -> f32 {
        self.exp()
    }
    fn sqrt_s(self) -> f32 {
        self.sqrt()
    }
    fn max_s(self, other: f32) -> f32 {
        self.max(other)
    }
}

impl Scalar for f64 {
    const ZERO: f64 = 0.0;
    const ONE: f64 = 1.0;

    fn from_f64(v: f64) -> f64 {
        v
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn exp_s(self) -> f64 {
        self.exp()
    }
    fn sqrt_s(self) -> f64 {
        self.sqrt()
    }
    fn max_s(self, other: f64) -> f64 {
        self.max(other)
    }
}
