//! Scalar abstraction and 2-D vectors.
//!
//! All core math is generic over [`Scalar`] so the same code runs in `f32`
//! or `f64`; the crate root exports double-precision aliases which the
//! simulator binaries use.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};
use rand::distributions::uniform::SampleUniform;
use rand::distributions::{Distribution, Uniform};
use rand::Rng;
use rand_distr::{Poisson, StandardNormal};

/// Floating-point scalar type for positions, powers and rates.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + SampleUniform
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Convert an `f64` constant, panicking only on genuinely
    /// unrepresentable values (none of the constants used here are).
    fn c(value: f64) -> Self {
        Self::from_f64(value).expect("constant not representable in scalar type")
    }

    /// One standard-normal draw.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// One uniform draw from `[lo, hi)`.
    fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: Self, hi: Self) -> Self;

    /// One Poisson count with the given mean (> 0).
    fn poisson_count<R: Rng + ?Sized>(rng: &mut R, mean: Self) -> u64;
}

impl Scalar for f64 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }

    fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: Self, hi: Self) -> Self {
        Uniform::new(lo, hi).sample(rng)
    }

    fn poisson_count<R: Rng + ?Sized>(rng: &mut R, mean: Self) -> u64 {
        let draw: f64 = Poisson::new(mean)
            .expect("Poisson mean must be > 0")
            .sample(rng);
        draw as u64
    }
}

impl Scalar for f32 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }

    fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: Self, hi: Self) -> Self {
        Uniform::new(lo, hi).sample(rng)
    }

    fn poisson_count<R: Rng + ?Sized>(rng: &mut R, mean: Self) -> u64 {
        let draw: f32 = Poisson::new(mean)
            .expect("Poisson mean must be > 0")
            .sample(rng);
        draw as u64
    }
}

/// Planar coordinates or velocities, in km or km/step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2<S> {
    pub x: S,
    pub y: S,
}

impl<S: Scalar> Vec2<S> {
    pub fn new(x: S, y: S) -> Self {
        Self { x, y }
    }

    pub fn zero() -> Self {
        Self::new(S::zero(), S::zero())
    }

    pub fn norm(self) -> S {
        self.x.hypot(self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl<S: Scalar> Add for Vec2<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl<S: Scalar> Sub for Vec2<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl<S: Scalar> Mul<S> for Vec2<S> {
    type Output = Self;
    fn mul(self, rhs: S) -> Self {
        Self::new(self.x * rhs, self.y * rhs)
    }
}

impl<S: Scalar> Div<S> for Vec2<S> {
    type Output = Self;
    fn div(self, rhs: S) -> Self {
        Self::new(self.x / rhs, self.y / rhs)
    }
}

impl<S: Scalar> Neg for Vec2<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}
