//! Total-Lagrangian kinematics and the semi-discrete momentum balance.

use rayon::prelude::*;

use crate::domain::PairTable;
use crate::error::{GsphError, Result};
use crate::mapping::MetricField;
use crate::particles::ParticleSet;
use crate::tensor::{is_finite_vec, Mat3, Vec3};

/// Deformation gradient `F_a = [Σ_b V̂_b (x_b − x_a) ⊗ ∇W] K_a` over active bonds.
pub fn compute_f(particles: &ParticleSet, pairs: &PairTable, metric: &MetricField) -> Vec<Mat3> {
    (0..particles.len())
        .into_par_iter()
        .map(|a| {
            let mut s = difference_sum(pairs, &particles.x, a);
            metric.dim.pad(&mut s, 1.0);
            s * metric.gradient_map[a] + metric.completion[a]
        })
        .collect()
}

/// Rate of the deformation gradient from velocity differences.
pub fn compute_f_dot(particles: &ParticleSet, pairs: &PairTable, metric: &MetricField, v: &[Vec3]) -> Vec<Mat3> {
    (0..particles.len())
        .into_par_iter()
        .map(|a| {
            let mut s = difference_sum(pairs, v, a);
            metric.dim.pad(&mut s, 0.0);
            s * metric.gradient_map[a]
        })
        .collect()
}

fn difference_sum(pairs: &PairTable, field: &[Vec3], a: usize) -> Mat3 {
    pairs.active(a).fold(Mat3::zeros(), |acc, it| {
        acc + ((field[it.other] - field[a]) * it.weight) * it.grad.transpose()
    })
}

/// Determinants of `F`, failing on the first non-positive or non-finite one.
pub fn jacobians(f: &[Mat3], ids: &[u64], step: u64) -> Result<Vec<f64>> {
    f.iter()
        .zip(ids)
        .map(|(f, &id)| {
            let det = f.determinant();
            if det.is_finite() && det > 0.0 {
                Ok(det)
            } else {
                Err(GsphError::Inversion {
                    particle: id,
                    step,
                    det,
                })
            }
        })
        .collect()
}

/// `ρ = ρ₀ / J`.
#[inline]
pub fn update_density(rho0: f64, j: f64) -> f64 {
    rho0 / j
}

/// First Piola-Kirchhoff stress `P = J F⁻¹ σ`.
pub fn assemble_pk1(sigma: &Mat3, f: &Mat3) -> Option<Mat3> {
    let j = f.determinant();
    Some(f.try_inverse()? * j * sigma)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViscosityParams {
    pub beta1: f64,
    pub beta2: f64,
}

impl Default for ViscosityParams {
    fn default() -> Self {
        Self { beta1: 1.0, beta2: 1.0 }
    }
}

/// Scalar pair viscosity `π_ab`; zero for separating pairs.
pub fn viscosity_scalar(
    params: &ViscosityParams,
    c_bar: f64,
    rho_bar: f64,
    h_ab: f64,
    v_ab: &Vec3,
    x_ab: &Vec3,
) -> f64 {
    let vx = v_ab.dot(x_ab);
    if vx >= 0.0 {
        return 0.0;
    }
    let eps = 0.01 * h_ab * h_ab;
    let phi = h_ab * vx / (x_ab.norm_squared() + eps * eps);
    (-params.beta1 * c_bar * phi + params.beta2 * phi * phi) / rho_bar
}

/// Options of the momentum right-hand side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumOptions {
    pub viscosity: ViscosityParams,
    /// Apply the CSPM correction to kernel gradients in the momentum sum.
    pub correction: bool,
    /// Map `π_ab` with the average of both particles' `J F⁻¹`.
    pub symmetric_viscosity: bool,
    /// Pair each stress with its own particle's gradient map,
    /// `P_a K_aᵀ∇W + P_b K_bᵀ∇W`, instead of mapping the whole pair term with
    /// `K_a`. Pair forces are then antisymmetric and linear momentum is
    /// conserved with corrected gradients.
    pub paired_maps: bool,
}

impl Default for MomentumOptions {
    fn default() -> Self {
        Self {
            viscosity: ViscosityParams::default(),
            correction: true,
            symmetric_viscosity: false,
            paired_maps: false,
        }
    }
}

/// Per-particle quantities the viscosity needs beyond the particle set.
pub struct ViscosityInputs<'a> {
    pub sound_speed: &'a [f64],
    pub h_phys: &'a [f64],
    /// `J F⁻¹` per particle.
    pub j_f_inv: &'a [Mat3],
}

/// Tensor viscosity `Π_ab = J F⁻¹ π_ab` between particles `a` and `b`.
pub fn artificial_viscosity(
    a: usize,
    b: usize,
    particles: &ParticleSet,
    inputs: &ViscosityInputs,
    opts: &MomentumOptions,
) -> Mat3 {
    let pi = viscosity_scalar(
        &opts.viscosity,
        0.5 * (inputs.sound_speed[a] + inputs.sound_speed[b]),
        0.5 * (particles.rho[a] + particles.rho[b]),
        0.5 * (inputs.h_phys[a] + inputs.h_phys[b]),
        &(particles.v[a] - particles.v[b]),
        &(particles.x[a] - particles.x[b]),
    );
    if pi == 0.0 {
        return Mat3::zeros();
    }
    let map = if opts.symmetric_viscosity {
        (inputs.j_f_inv[a] + inputs.j_f_inv[b]) * 0.5
    } else {
        inputs.j_f_inv[a]
    };
    map * pi
}

/// `J F⁻¹` for every particle, given current `F` and `J`.
pub fn j_f_inverse(particles: &ParticleSet) -> Vec<Mat3> {
    particles
        .f
        .par_iter()
        .zip(&particles.j)
        .map(|(f, &j)| f.try_inverse().map(|fi| fi * j).unwrap_or_else(Mat3::zeros))
        .collect()
}

/// Internal acceleration of every particle:
/// `a_a = Σ_b m̂_b (P_a/ρ₀a² + P_b/ρ₀b² − Π_ab)ᵀ g_ab` with `g_ab` the physical
/// (optionally corrected) kernel gradient at `a` and `m̂_b = ρ₀b V̂_b` the mass
/// of `b`'s generalized cell. On the identity chart `m̂_b = m_b`.
pub fn momentum_rhs(
    particles: &ParticleSet,
    pairs: &PairTable,
    metric: &MetricField,
    inputs: &ViscosityInputs,
    opts: &MomentumOptions,
    step: u64,
) -> Result<Vec<Vec3>> {
    let acc: Vec<Vec3> = (0..particles.len())
        .into_par_iter()
        .map(|a| {
            let map = |i: usize| {
                if opts.correction {
                    metric.gradient_map[i]
                } else {
                    metric.dtheta_dx[i]
                }
            };
            let map_a = map(a);
            let pa = particles.pk1[a] / (particles.rho0[a] * particles.rho0[a]);
            let mut sum = Vec3::zeros();
            for it in pairs.active(a) {
                let b = it.other;
                let g = map_a.transpose() * it.grad;
                let pb = particles.pk1[b] / (particles.rho0[b] * particles.rho0[b]);
                let visc = artificial_viscosity(a, b, particles, inputs, opts);
                let term = if opts.paired_maps {
                    let g_b = map(b).transpose() * it.grad;
                    pa.transpose() * g + pb.transpose() * g_b - visc.transpose() * ((g + g_b) * 0.5)
                } else {
                    (pa + pb - visc).transpose() * g
                };
                sum += term * (particles.rho0[b] * it.weight);
            }
            sum
        })
        .collect();
    if let Some(a) = acc.iter().position(|v| !is_finite_vec(v)) {
        return Err(GsphError::NonFinite {
            quantity: "acceleration",
            particle: particles.id[a],
            step,
        });
    }
    Ok(acc)
}
