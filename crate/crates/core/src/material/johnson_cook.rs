//! Johnson-Cook flow stress, Wilkins return mapping and ductile damage.

use super::PlasticState;
use crate::tensor::{deviator, double_dot, Mat3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JohnsonCookParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub n: f64,
    pub m: f64,
    pub eps0_dot: f64,
    pub t_r: f64,
    pub t_m: f64,
    pub cp: f64,
    /// Fraction of plastic work converted to heat.
    pub chi: f64,
}

impl JohnsonCookParams {
    /// Homologous temperature clamped to [0, 1].
    pub fn homologous(&self, t: f64) -> f64 {
        ((t - self.t_r) / (self.t_m - self.t_r)).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JCDamageParams {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
    pub d5: f64,
}

/// Flow stress. `damage` selects the damaged form driven by `r` and `D`.
///
/// `rate_star` is the undamaged normalized plastic strain rate; values
/// below 1 do not soften the material.
pub fn jc_yield_stress(state: &PlasticState, rate_star: f64, p: &JohnsonCookParams, damage: bool) -> f64 {
    let t_star = p.homologous(state.t);
    let thermal = 1.0 - t_star.powf(p.m);
    if damage {
        let r_star = ((1.0 - state.d) * rate_star).max(1.0);
        (1.0 - state.d) * (p.a + p.b * state.r_damage.powf(p.n)) * (1.0 + p.c * r_star.ln()) * thermal
    } else {
        let rate = rate_star.max(1.0);
        (p.a + p.b * state.eps_pl_bar.powf(p.n)) * (1.0 + p.c * rate.ln()) * thermal
    }
}

/// Failure strain at the given stress triaxiality.
pub fn fracture_strain(sigma: &Mat3, state: &PlasticState, jc: &JohnsonCookParams, dmg: &JCDamageParams) -> f64 {
    let s = deviator(sigma);
    let sigma_eq = (1.5 * double_dot(&s, &s)).sqrt();
    let sigma_m = sigma.trace() / 3.0;
    let triax = if sigma_eq < 1e-6 * jc.a {
        if sigma_m > 0.0 {
            1.5
        } else if sigma_m < 0.0 {
            -1.5
        } else {
            0.0
        }
    } else {
        sigma_m / sigma_eq
    };
    let rate_star = state.eps_rate / jc.eps0_dot;
    (dmg.d1 + dmg.d2 * (dmg.d3 * triax).exp())
        * (1.0 + rate_star).powf(dmg.d4)
        * (1.0 + dmg.d5 * jc.homologous(state.t))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnMapResult {
    pub sigma: Mat3,
    pub state: PlasticState,
    pub c_f: f64,
    pub yield_stress: f64,
    /// Plastic strain increment tensor.
    pub d_eps_pl: Mat3,
}

/// Radial return of the trial stress onto the von Mises surface.
pub fn return_map(
    trial: &Mat3,
    state: &PlasticState,
    jc: &JohnsonCookParams,
    dmg: Option<&JCDamageParams>,
    g: f64,
    rho: f64,
    dt: f64,
) -> ReturnMapResult {
    let s = deviator(trial);
    let ss = double_dot(&s, &s);
    let eq = (1.5 * ss).sqrt();
    let sigma_y = jc_yield_stress(state, state.eps_rate / jc.eps0_dot, jc, dmg.is_some());
    let c_f = if eq > 0.0 { (sigma_y / eq).min(1.0) } else { 1.0 };
    if c_f >= 1.0 {
        let mut next = *state;
        next.eps_rate = 0.0;
        return ReturnMapResult {
            sigma: *trial,
            state: next,
            c_f: 1.0,
            yield_stress: sigma_y,
            d_eps_pl: Mat3::zeros(),
        };
    }
    let s_n = s * c_f;
    let pressure = Mat3::identity() * (trial.trace() / 3.0);
    let sigma = s_n + pressure;
    let d_eps_pl = s * ((1.0 - c_f) / (2.0 * g));
    let d_eps_bar = (1.0 - c_f) / (3.0 * g) * eq;
    let d_wp = double_dot(&d_eps_pl, &s_n);
    let mut next = *state;
    next.eps_pl_bar += d_eps_bar;
    next.w_p += d_wp;
    next.t += jc.chi * d_wp / (rho * jc.cp);
    next.eps_rate = d_eps_bar / dt;
    if let Some(dmg) = dmg {
        next.r_damage += (1.0 - state.d) * d_eps_bar;
        let eps_f = fracture_strain(&sigma, &next, jc, dmg);
        next.d = (state.d + d_eps_bar / eps_f).min(1.0);
    }
    ReturnMapResult {
        sigma,
        state: next,
        c_f,
        yield_stress: sigma_y,
        d_eps_pl,
    }
}
