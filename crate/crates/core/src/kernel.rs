//! Cubic B-spline smoothing kernel evaluated in generalized coordinates.
//!
//! ```text
//! W(r, h) = α_D · { 1 - 3/2 q² + 3/4 q³    0 <= q < 1
//!                 { 1/4 (2 - q)³           1 <= q < 2
//!                 { 0                      otherwise
//! α_D = 1 / (π h³),  q = |r| / h
//! ```
//!
//! The support radius is `2h`. Values outside the support are exactly zero.

use std::f64::consts::PI;

use crate::error::{GsphError, Result};
use crate::tensor::Vec3;

/// Smoothing length and the matching 3-D normalization constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub h: f64,
    pub alpha_d: f64,
}

impl KernelParams {
    pub fn new(h: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(GsphError::Setup(format!(
                "smoothing length must be positive and finite, got {h}"
            )));
        }
        Ok(Self {
            h,
            alpha_d: 1.0 / (PI * h * h * h),
        })
    }

    #[inline]
    pub fn support_radius(&self) -> f64 {
        2.0 * self.h
    }

    /// Kernel value as a function of the normalized distance `q`.
    #[inline]
    pub fn shape(&self, q: f64) -> f64 {
        self.alpha_d * shape(q)
    }

    /// `dW/dq` as a function of the normalized distance.
    #[inline]
    pub fn shape_derivative(&self, q: f64) -> f64 {
        self.alpha_d * shape_derivative(q)
    }

    #[inline]
    pub fn value(&self, r: &Vec3) -> f64 {
        self.shape(r.norm() / self.h)
    }

    /// Gradient of `W(r)` with respect to the first particle's coordinates, `r = θ_a - θ_b`.
    #[inline]
    pub fn gradient(&self, r: &Vec3) -> Vec3 {
        let dist = r.norm();
        let q = dist / self.h;
        if dist == 0.0 || q >= 2.0 {
            return Vec3::zeros();
        }
        r * (self.shape_derivative(q) / (self.h * dist))
    }
}

/// Unnormalized piecewise polynomial.
#[inline]
fn shape(q: f64) -> f64 {
    if q < 0.0 {
        // only reachable with a negative distance, which norm() cannot produce
        return 0.0;
    }
    if q <= 1.0 {
        1.0 - 1.5 * q * q + 0.75 * q * q * q
    } else if q < 2.0 {
        let t = 2.0 - q;
        0.25 * t * t * t
    } else {
        0.0
    }
}

#[inline]
fn shape_derivative(q: f64) -> f64 {
    if q <= 1.0 {
        -3.0 * q + 2.25 * q * q
    } else if q < 2.0 {
        let t = 2.0 - q;
        -0.75 * t * t
    } else {
        0.0
    }
}

fn check_inputs(r: &Vec3, h: f64, op: &'static str) -> Result<KernelParams> {
    if !r.iter().all(|c| c.is_finite()) || !h.is_finite() {
        return Err(GsphError::NonFiniteInput(op));
    }
    KernelParams::new(h)
}

/// Kernel value for a generalized-space separation `r` and smoothing length `h`.
pub fn kernel_value(r: &Vec3, h: f64) -> Result<f64> {
    Ok(check_inputs(r, h, "kernel_value")?.value(r))
}

/// `∂W/∂θ_a` for the separation `r = θ_a - θ_b`.
pub fn kernel_gradient(r: &Vec3, h: f64) -> Result<Vec3> {
    Ok(check_inputs(r, h, "kernel_gradient")?.gradient(r))
}
