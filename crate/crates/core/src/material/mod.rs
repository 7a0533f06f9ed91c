//! Constitutive laws: hypoelastic Jaumann update, Johnson-Cook plasticity and
//! damage, Rankine bond failure.

mod johnson_cook;

pub use johnson_cook::{fracture_strain, jc_yield_stress, return_map, JCDamageParams, JohnsonCookParams, ReturnMapResult};

use crate::error::{GsphError, Result};
use crate::tensor::{skew_part, symmetric_part, Mat3};

/// Isotropic linear-elastic constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticParams {
    pub e: f64,
    pub nu: f64,
    pub g: f64,
    pub k: f64,
    pub rho0: f64,
}

impl ElasticParams {
    pub fn new(e: f64, nu: f64, rho0: f64) -> Result<Self> {
        if !(e > 0.0 && nu > 0.0 && nu < 0.5 && rho0 > 0.0) {
            return Err(GsphError::Setup(format!(
                "invalid elastic constants E={e}, nu={nu}, rho0={rho0}"
            )));
        }
        Ok(Self {
            e,
            nu,
            g: e / (2.0 * (1.0 + nu)),
            k: e / (3.0 * (1.0 - 2.0 * nu)),
            rho0,
        })
    }

    /// Lamé's first parameter.
    pub fn lambda(&self) -> f64 {
        self.k - 2.0 * self.g / 3.0
    }

    /// Bulk sound speed `sqrt(K/ρ₀)`.
    pub fn sound_speed(&self) -> f64 {
        (self.k / self.rho0).sqrt()
    }
}

/// History variables of a plastic particle.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlasticState {
    /// Effective plastic strain ε̄_pl.
    pub eps_pl_bar: f64,
    /// Damage-weighted plastic strain r.
    pub r_damage: f64,
    /// Damage D ∈ [0, 1].
    pub d: f64,
    /// Temperature (K).
    pub t: f64,
    /// Plastic work density (J/m³).
    pub w_p: f64,
    /// Effective plastic strain rate of the last update (1/s).
    pub eps_rate: f64,
}

/// Critical bond stretch for brittle failure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankineParams {
    pub eps_max: f64,
}

impl Default for RankineParams {
    fn default() -> Self {
        Self { eps_max: 0.03 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MaterialLaw {
    Elastic,
    JohnsonCook(JohnsonCookParams),
    JohnsonCookDamage(JohnsonCookParams, JCDamageParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    pub name: String,
    pub elastic: ElasticParams,
    pub law: MaterialLaw,
    pub rankine: Option<RankineParams>,
}

impl Material {
    pub fn elastic(name: &str, elastic: ElasticParams) -> Self {
        Self {
            name: name.to_string(),
            elastic,
            law: MaterialLaw::Elastic,
            rankine: None,
        }
    }

    /// Initial state: temperature at room temperature for Johnson-Cook laws.
    pub fn initial_state(&self) -> PlasticState {
        let t = match &self.law {
            MaterialLaw::Elastic => 0.0,
            MaterialLaw::JohnsonCook(jc) | MaterialLaw::JohnsonCookDamage(jc, _) => jc.t_r,
        };
        PlasticState {
            t,
            ..PlasticState::default()
        }
    }

    /// Advance the Cauchy stress over one step from the current kinematics.
    pub fn update_stress(
        &self,
        sigma: &Mat3,
        f: &Mat3,
        f_dot: &Mat3,
        state: &PlasticState,
        rho: f64,
        dt: f64,
    ) -> Option<(Mat3, PlasticState)> {
        let (_, w, d) = spin_and_stretch(f, f_dot)?;
        let trial = jaumann_update(sigma, &w, &d, &self.elastic, dt);
        Some(match &self.law {
            MaterialLaw::Elastic => (trial, *state),
            MaterialLaw::JohnsonCook(jc) => {
                let r = return_map(&trial, state, jc, None, self.elastic.g, rho, dt);
                (r.sigma, r.state)
            }
            MaterialLaw::JohnsonCookDamage(jc, dmg) => {
                let r = return_map(&trial, state, jc, Some(dmg), self.elastic.g, rho, dt);
                (r.sigma, r.state)
            }
        })
    }
}

/// Velocity gradient `L = Ḟ F⁻¹`, spin `W` and stretching `D`. `None` if `F` is singular.
pub fn spin_and_stretch(f: &Mat3, f_dot: &Mat3) -> Option<(Mat3, Mat3, Mat3)> {
    let l = f_dot * f.try_inverse()?;
    Some((l, skew_part(&l), symmetric_part(&l)))
}

/// Jaumann update with a hypoelastic Hooke rate: rotate by the spin, add `Δt` times
/// the rate, symmetrize.
pub fn jaumann_update(sigma: &Mat3, w: &Mat3, d: &Mat3, el: &ElasticParams, dt: f64) -> Mat3 {
    let rate = Mat3::identity() * (el.lambda() * d.trace()) + d * (2.0 * el.g);
    let next = spin(sigma, w, dt) + rate * dt;
    symmetric_part(&next)
}

/// Rotate `σ` through one step of the spin `W`: `Q σ Qᵀ` with the Cayley
/// rotation `Q = (I - ½WΔt)⁻¹(I + ½WΔt)`, which is orthogonal for any step
/// and agrees with `σ + Δt(Wσ + σWᵀ)` to second order.
fn spin(sigma: &Mat3, w: &Mat3, dt: f64) -> Mat3 {
    let half = w * (0.5 * dt);
    let q = match (Mat3::identity() - half).try_inverse() {
        Some(inv) => inv * (Mat3::identity() + half),
        // only reachable for a non-finite spin; the caller reports it
        None => return sigma + (sigma * w.transpose() + w * sigma) * dt,
    };
    q * sigma * q.transpose()
}

/// Outcome of the bond-stretch test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BondFate {
    Intact,
    Broken,
}

/// Break a bond once its stretch relative to the reference length reaches `eps_max`.
pub fn rankine_check(r0: f64, r_now: f64, params: &RankineParams) -> BondFate {
    if (r_now - r0) / r0 >= params.eps_max {
        BondFate::Broken
    } else {
        BondFate::Intact
    }
}
