//! Gauss–Markov user mobility.
//!
//! Velocity follows a per-component AR(1) recursion
//! `v' = β·v + (1−β)·μ + σ·√(1−β²)·w` with standard-normal `w`, so the
//! stationary per-component variance is σ² and the lag-1 autocorrelation
//! is β. One optimizer epoch advances each user by one velocity step and
//! wraps the position onto the torus window.

use rand::Rng;
use thiserror::Error;

use crate::model::{SimWindow, UserTerminal};
use crate::scalar::{Scalar, Vec2};

/// Gauss–Markov parameters: memory β ∈ [0, 1], mean drift μ in km/step and
/// innovation stddev σ in km/step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobilityParams<S> {
    pub memory: S,
    pub mean_velocity: Vec2<S>,
    pub sigma: S,
}

impl<S: Scalar> MobilityParams<S> {
    pub fn validate(&self) -> Result<(), MobilityError> {
        if !(self.memory >= S::zero() && self.memory <= S::one()) {
            return Err(MobilityError::InvalidMemory);
        }
        if !(self.sigma >= S::zero()) {
            return Err(MobilityError::InvalidSigma);
        }
        if !self.mean_velocity.is_finite() {
            return Err(MobilityError::InvalidMean);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum MobilityError {
    #[error("memory must lie in [0, 1]")]
    InvalidMemory,
    #[error("sigma must be >= 0")]
    InvalidSigma,
    #[error("mean velocity must be finite")]
    InvalidMean,
}

/// Velocity state carried by each user between steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobilityState<S> {
    pub velocity: Vec2<S>,
}

impl<S: Scalar> MobilityState<S> {
    pub fn at_rest() -> Self {
        Self {
            velocity: Vec2::zero(),
        }
    }

    /// Draw from the stationary velocity distribution N(μ, σ²) per component.
    pub fn stationary<R: Rng + ?Sized>(params: &MobilityParams<S>, rng: &mut R) -> Self {
        let wx = S::standard_normal(rng);
        let wy = S::standard_normal(rng);
        Self {
            velocity: Vec2::new(
                params.mean_velocity.x + params.sigma * wx,
                params.mean_velocity.y + params.sigma * wy,
            ),
        }
    }
}

/// One AR(1) velocity update. β = 1 keeps the velocity exactly constant
/// because the √(1−β²) factor annihilates the innovation.
pub fn gm_step<S: Scalar, R: Rng + ?Sized>(
    state: &MobilityState<S>,
    params: &MobilityParams<S>,
    rng: &mut R,
) -> MobilityState<S> {
    let beta = params.memory;
    let noise_gain = params.sigma * (S::one() - beta * beta).max(S::zero()).sqrt();
    let wx = S::standard_normal(rng);
    let wy = S::standard_normal(rng);
    let v = state.velocity;
    let mu = params.mean_velocity;
    MobilityState {
        velocity: Vec2::new(
            beta * v.x + (S::one() - beta) * mu.x + noise_gain * wx,
            beta * v.y + (S::one() - beta) * mu.y + noise_gain * wy,
        ),
    }
}

/// Advance every user by one mobility epoch: update the velocity with
/// [`gm_step`] and move the position one step, wrapping onto the torus.
/// Stations never move.
pub fn advance_users<S: Scalar, R: Rng + ?Sized>(
    users: &mut [UserTerminal<S>],
    params: &MobilityParams<S>,
    window: &SimWindow<S>,
    rng: &mut R,
) {
    for user in users.iter_mut() {
        let next = gm_step(&user.mobility_state, params, rng);
        user.position = window.wrap(user.position + next.velocity);
        user.mobility_state = next;
    }
}
