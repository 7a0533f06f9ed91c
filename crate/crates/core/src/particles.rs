//! Structure-of-arrays particle state.

use crate::material::PlasticState;
use crate::tensor::{Mat3, Vec3};

/// All per-particle state. Index `a` into every vector refers to the same particle.
#[derive(Debug, Clone, Default)]
pub struct ParticleSet {
    /// Stable external identifier (survives reordering).
    pub id: Vec<u64>,
    /// Index of the owning subdomain (in precedence order).
    pub subdomain: Vec<usize>,
    pub material: Vec<usize>,
    /// Reference mass m₀ (kg).
    pub mass: Vec<f64>,
    /// Reference density ρ₀ (kg/m³).
    pub rho0: Vec<f64>,
    /// Current density ρ = ρ₀/J.
    pub rho: Vec<f64>,
    /// Reference position X.
    pub x_ref: Vec<Vec3>,
    /// Current position x.
    pub x: Vec<Vec3>,
    pub v: Vec<Vec3>,
    pub acc: Vec<Vec3>,
    /// Deformation gradient F.
    pub f: Vec<Mat3>,
    pub f_dot: Vec<Mat3>,
    pub j: Vec<f64>,
    /// Cauchy stress σ.
    pub sigma: Vec<Mat3>,
    /// First Piola-Kirchhoff stress P = J F⁻¹ σ.
    pub pk1: Vec<Mat3>,
    pub plastic: Vec<PlasticState>,
    pub broken_bonds: Vec<u32>,
}

/// Initial data for one particle.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSeed {
    pub id: u64,
    pub position: Vec3,
    pub mass: f64,
    pub rho0: f64,
    pub material: usize,
}

impl ParticleSet {
    pub fn from_seeds(seeds: &[ParticleSeed]) -> Self {
        let n = seeds.len();
        let mut p = ParticleSet {
            id: Vec::with_capacity(n),
            subdomain: vec![0; n],
            material: Vec::with_capacity(n),
            mass: Vec::with_capacity(n),
            rho0: Vec::with_capacity(n),
            rho: Vec::with_capacity(n),
            x_ref: Vec::with_capacity(n),
            x: Vec::with_capacity(n),
            v: vec![Vec3::zeros(); n],
            acc: vec![Vec3::zeros(); n],
            f: vec![Mat3::identity(); n],
            f_dot: vec![Mat3::zeros(); n],
            j: vec![1.0; n],
            sigma: vec![Mat3::zeros(); n],
            pk1: vec![Mat3::zeros(); n],
            plastic: vec![PlasticState::default(); n],
            broken_bonds: vec![0; n],
        };
        for s in seeds {
            p.id.push(s.id);
            p.material.push(s.material);
            p.mass.push(s.mass);
            p.rho0.push(s.rho0);
            p.rho.push(s.rho0);
            p.x_ref.push(s.position);
            p.x.push(s.position);
        }
        p
    }

    pub fn len(&self) -> usize {
        self.id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.id.is_empty()
    }

    /// Reference volume m₀/ρ₀.
    #[inline]
    pub fn volume0(&self, a: usize) -> f64 {
        self.mass[a] / self.rho0[a]
    }

    pub fn total_momentum(&self) -> Vec3 {
        self.mass
            .iter()
            .zip(&self.v)
            .fold(Vec3::zeros(), |acc, (m, v)| acc + v * *m)
    }

    pub fn kinetic_energy(&self) -> f64 {
        self.mass
            .iter()
            .zip(&self.v)
            .map(|(m, v)| 0.5 * m * v.norm_squared())
            .sum()
    }
}
