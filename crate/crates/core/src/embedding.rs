//! Transversal stabilization of `SO(3)` inside `R^{3x3}`.
//!
//! The constraint potential is `V(R) = k_e/4 ||R^T R - I||^2`. Subtracting its
//! gradient from any extension of the dynamics leaves the flow on `SO(3)`
//! untouched and makes `SO(3)` exponentially attractive off it.

use serde::Serialize;
use thiserror::Error;

use crate::matlib::Mat3;

/// Values at or below this are dropped before log-fitting.
pub const DECAY_FIT_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EmbeddingError {
    #[error("transversal gain k_e must be positive and finite, got {0}")]
    NonPositiveGain(f64),
    #[error("decay fit needs at least two samples at distinct times, got {0}")]
    TooFewSamples(usize),
    #[error("fewer than two samples lie above the fit floor {DECAY_FIT_FLOOR:e}")]
    AllBelowFloor,
    #[error("times and values differ in length ({times} vs {values})")]
    LengthMismatch { times: usize, values: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilizationParams {
    k_e: f64,
}

impl StabilizationParams {
    pub fn new(k_e: f64) -> Result<Self, EmbeddingError> {
        if k_e > 0.0 && k_e.is_finite() {
            Ok(Self { k_e })
        } else {
            Err(EmbeddingError::NonPositiveGain(k_e))
        }
    }

    pub fn k_e(&self) -> f64 {
        self.k_e
    }
}

impl Default for StabilizationParams {
    fn default() -> Self {
        Self { k_e: 1.0 }
    }
}

/// `k_e/4 ||R^T R - I||^2`.
pub fn tilde_v(r: &Mat3, p: &StabilizationParams) -> f64 {
    let f = r.transpose() * r - Mat3::identity();
    0.25 * p.k_e * f.norm_squared()
}

/// Euclidean gradient of [`tilde_v`] with respect to `R`: `k_e R (R^T R - I)`.
pub fn grad_tilde_v(r: &Mat3, p: &StabilizationParams) -> Mat3 {
    p.k_e * r * (r.transpose() * r - Mat3::identity())
}

/// A state (or state derivative) whose leading block is an ambient 3x3
/// attitude matrix.
pub trait AmbientAttitude {
    fn attitude(&self) -> &Mat3;
    fn attitude_mut(&mut self) -> &mut Mat3;
}

/// Wraps an extended vector field `base(x, u)` into `base(x, u) - grad V(x)`.
///
/// Only the attitude block of the derivative is modified, since `V` does not
/// depend on the remaining coordinates.
pub fn modified_rhs<S, D, U, F>(base: F, p: StabilizationParams) -> impl Fn(&S, &U) -> D
where
    S: AmbientAttitude,
    D: AmbientAttitude,
    F: Fn(&S, &U) -> D,
{
    move |state, input| {
        let mut d = base(state, input);
        let grad = grad_tilde_v(state.attitude(), &p);
        *d.attitude_mut() -= grad;
        d
    }
}

/// Least-squares fit of `ln(value) = c + rate * t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub rate: f64,
    pub r2: f64,
    pub samples: usize,
}

pub fn fit_decay_rate(times: &[f64], values: &[f64]) -> Result<DecayFit, EmbeddingError> {
    if times.len() != values.len() {
        return Err(EmbeddingError::LengthMismatch {
            times: times.len(),
            values: values.len(),
        });
    }
    if times.len() < 2 {
        return Err(EmbeddingError::TooFewSamples(times.len()));
    }
    let points: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(t, v)| t.is_finite() && v.is_finite() && **v > DECAY_FIT_FLOOR)
        .map(|(&t, &v)| (t, v.ln()))
        .collect();
    if points.len() < 2 {
        return Err(EmbeddingError::AllBelowFloor);
    }

    let n = points.len() as f64;
    let mean_t = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut stt, mut sty, mut syy) = (0.0, 0.0, 0.0);
    for &(t, y) in &points {
        let (dt, dy) = (t - mean_t, y - mean_y);
        stt += dt * dt;
        sty += dt * dy;
        syy += dy * dy;
    }
    if stt == 0.0 {
        return Err(EmbeddingError::TooFewSamples(1));
    }
    let rate = sty / stt;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        (sty * sty / (stt * syy)).clamp(0.0, 1.0)
    };
    Ok(DecayFit {
        rate,
        r2,
        samples: points.len(),
    })
}
