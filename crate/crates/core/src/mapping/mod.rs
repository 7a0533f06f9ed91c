//! Physical ↔ generalized coordinate transformation at the particle level.
//!
//! For every particle `a` two kernel-gradient moments are accumulated over its
//! active pairs (`V_b` the volume of `b`'s cell measured in the pair's chart,
//! `∇W = ∂W_ab/∂θ_a`):
//!
//! ```text
//! M_a  = Σ_b V_b (θ_b − θ_a) ⊗ ∇W     CSPM moment, L_a = M_a⁻¹
//! S_a  = Σ_b V_b (X_b − X_a) ⊗ ∇W
//! ∂X/∂θ = S_a L_a,   ∂θ/∂X = (∂X/∂θ)⁻¹
//! ```
//!
//! A corrected derivative with respect to θ is `Lᵀ Σ_b V_b (f_b − f_a) ∇W`,
//! and the physical derivative follows by the chain rule through `∂θ/∂X`.
//! The product `K_a = L_a ∂θ/∂X` is cached as the per-particle gradient map.
//!
//! Pairs owned by another chart (transient particles) enter the same sums
//! with their owner's `θ` differences; the correction keeps the operator
//! exact for fields affine in `X`.

pub mod chart;

use rayon::prelude::*;

use crate::domain::{PairTable, Subdomain};
use crate::error::{GsphError, Result};
use crate::particles::ParticleSet;
use crate::tensor::{condition_number, double_dot, pseudo_inverse, Mat3, Vec3};

/// Largest admissible condition number of a particle's moment matrices.
pub const MAX_CONDITION: f64 = 1e8;

/// Spatial treatment of the third axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dimensionality {
    #[default]
    Full,
    /// One-particle-thick slab with normal along the third axis (plane strain).
    Planar,
}

impl Dimensionality {
    /// Replace the third row and column by `diag · e₃ ⊗ e₃` in planar mode.
    #[inline]
    pub fn pad(self, m: &mut Mat3, diag: f64) {
        if self == Dimensionality::Planar {
            for k in 0..3 {
                m[(2, k)] = 0.0;
                m[(k, 2)] = 0.0;
            }
            m[(2, 2)] = diag;
        }
    }
}

/// Per-particle coordinate transformation matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricField {
    /// `∂X_α/∂θ^i` (row α, column i).
    pub dx_dtheta: Vec<Mat3>,
    /// `∂θ^i/∂X_α` (row i, column α).
    pub dtheta_dx: Vec<Mat3>,
    pub jacobian_det: Vec<f64>,
    /// `K_a = L_a · ∂θ/∂X`; the physical corrected kernel gradient is `Kᵀ ∇W`.
    pub gradient_map: Vec<Mat3>,
    /// Added to `F` for particles whose neighborhood lost rank after fracture.
    pub completion: Vec<Mat3>,
    /// Smallest physical image of the smoothing length.
    pub h_phys: Vec<f64>,
    pub dim: Dimensionality,
}

/// CSPM renormalization matrices `L_a = M_a⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct CspmCorrection {
    pub matrices: Vec<Mat3>,
}

struct Moments {
    m: Mat3,
    s: Mat3,
    count: usize,
}

fn moments(a: usize, particles: &ParticleSet, pairs: &PairTable, dim: Dimensionality) -> Moments {
    let mut m = Mat3::zeros();
    let mut s = Mat3::zeros();
    let mut count = 0;
    let xa = particles.x_ref[a];
    for it in pairs.active(a) {
        let vb = it.weight;
        m += (it.dtheta * vb) * it.grad.transpose();
        s += ((particles.x_ref[it.other] - xa) * vb) * it.grad.transpose();
        count += 1;
    }
    dim.pad(&mut m, 1.0);
    dim.pad(&mut s, 1.0);
    Moments { m, s, count }
}

struct ParticleMetric {
    dx_dtheta: Mat3,
    dtheta_dx: Mat3,
    det: f64,
    k: Mat3,
    l: Mat3,
    h_phys: f64,
}

fn regular_metric(mom: &Moments, h: f64, dim: Dimensionality) -> Option<ParticleMetric> {
    if condition_number(&mom.m) > MAX_CONDITION || condition_number(&mom.s) > MAX_CONDITION {
        return None;
    }
    let l = mom.m.try_inverse()?;
    let dx_dtheta = mom.s * l;
    let dtheta_dx = dx_dtheta.try_inverse()?;
    let sv = match dim {
        Dimensionality::Full => dx_dtheta.singular_values().min(),
        Dimensionality::Planar => dx_dtheta.fixed_view::<2, 2>(0, 0).into_owned().singular_values().min(),
    };
    Some(ParticleMetric {
        dx_dtheta,
        dtheta_dx,
        det: dx_dtheta.determinant(),
        k: l * dtheta_dx,
        l,
        h_phys: h * sv,
    })
}

/// Compute the transformation matrices and CSPM corrections on the reference configuration.
///
/// Fails on the first particle whose neighborhood cannot resolve all directions.
pub fn build_metric(
    particles: &ParticleSet,
    pairs: &PairTable,
    subdomains: &[Subdomain],
    dim: Dimensionality,
) -> Result<(MetricField, CspmCorrection)> {
    let n = particles.len();
    let per: Vec<Result<ParticleMetric>> = (0..n)
        .into_par_iter()
        .map(|a| {
            let mom = moments(a, particles, pairs, dim);
            let h = subdomains[particles.subdomain[a]].kernel.h;
            regular_metric(&mom, h, dim).ok_or_else(|| GsphError::SingularMetric {
                particle: particles.id[a],
                neighbors: mom.count,
                condition: condition_number(&mom.m).max(condition_number(&mom.s)),
            })
        })
        .collect();
    let mut metric = MetricField {
        dx_dtheta: Vec::with_capacity(n),
        dtheta_dx: Vec::with_capacity(n),
        jacobian_det: Vec::with_capacity(n),
        gradient_map: Vec::with_capacity(n),
        completion: vec![Mat3::zeros(); n],
        h_phys: Vec::with_capacity(n),
        dim,
    };
    let mut cspm = CspmCorrection {
        matrices: Vec::with_capacity(n),
    };
    for pm in per {
        let pm = pm?;
        metric.dx_dtheta.push(pm.dx_dtheta);
        metric.dtheta_dx.push(pm.dtheta_dx);
        metric.jacobian_det.push(pm.det);
        metric.gradient_map.push(pm.k);
        metric.h_phys.push(pm.h_phys);
        cspm.matrices.push(pm.l);
    }
    Ok((metric, cspm))
}

/// Recompute the matrices of particles whose bond set changed.
///
/// A neighborhood that no longer spans all directions falls back to a
/// pseudo-inverse; the lost directions deform rigidly.
pub fn refresh_metric(
    particles: &ParticleSet,
    pairs: &PairTable,
    subdomains: &[Subdomain],
    metric: &mut MetricField,
    cspm: &mut CspmCorrection,
    affected: &[usize],
) {
    let dim = metric.dim;
    let updates: Vec<(usize, Option<ParticleMetric>, Mat3)> = affected
        .par_iter()
        .map(|&a| {
            let mom = moments(a, particles, pairs, dim);
            let h = subdomains[particles.subdomain[a]].kernel.h;
            let regular = regular_metric(&mom, h, dim);
            (a, regular, mom.s)
        })
        .collect();
    for (a, regular, s) in updates {
        match regular {
            Some(pm) => {
                metric.dx_dtheta[a] = pm.dx_dtheta;
                metric.dtheta_dx[a] = pm.dtheta_dx;
                metric.jacobian_det[a] = pm.det;
                metric.gradient_map[a] = pm.k;
                metric.completion[a] = Mat3::zeros();
                cspm.matrices[a] = pm.l;
            }
            None => {
                let k = pseudo_inverse(&s, 1.0 / MAX_CONDITION);
                metric.gradient_map[a] = k;
                metric.completion[a] = Mat3::identity() - s * k;
            }
        }
    }
}

/// Corrected differential operators on per-particle fields.
pub struct Operators<'a> {
    pub particles: &'a ParticleSet,
    pub pairs: &'a PairTable,
    pub metric: &'a MetricField,
    pub cspm: &'a CspmCorrection,
}

impl<'a> Operators<'a> {
    fn check(&self, a: usize) -> Result<()> {
        if a < self.particles.len() {
            Ok(())
        } else {
            Err(GsphError::UnknownParticle(a))
        }
    }

    /// Raw difference sum `Σ_b V_b (φ_b − φ_a) ∇W`.
    fn raw_scalar(&self, field: &[f64], a: usize) -> Vec3 {
        self.pairs.active(a).fold(Vec3::zeros(), |acc, it| {
            acc + it.grad * (it.weight * (field[it.other] - field[a]))
        })
    }

    /// Raw difference sum `Σ_b V_b (v_b − v_a) ⊗ ∇W`.
    fn raw_vector(&self, field: &[Vec3], a: usize) -> Mat3 {
        self.pairs.active(a).fold(Mat3::zeros(), |acc, it| {
            acc + ((field[it.other] - field[a]) * it.weight) * it.grad.transpose()
        })
    }

    /// CSPM-corrected `∂φ/∂θ^i`.
    pub fn grad_theta(&self, field: &[f64], a: usize) -> Result<Vec3> {
        self.check(a)?;
        Ok(self.cspm.matrices[a].transpose() * self.raw_scalar(field, a))
    }

    /// `∇φ = (∂φ/∂θ^i)(∂θ^i/∂X_α) e_α`.
    pub fn grad_scalar(&self, field: &[f64], a: usize) -> Result<Vec3> {
        let d_theta = self.grad_theta(field, a)?;
        Ok(self.metric.dtheta_dx[a].transpose() * d_theta)
    }

    /// `(∇v)_αγ = (∂θ^i/∂X_γ)(∂v_α/∂θ^i)`.
    pub fn grad_vector(&self, field: &[Vec3], a: usize) -> Result<Mat3> {
        self.check(a)?;
        let d_theta = self.raw_vector(field, a) * self.cspm.matrices[a];
        Ok(d_theta * self.metric.dtheta_dx[a])
    }

    pub fn div_vector(&self, field: &[Vec3], a: usize) -> Result<f64> {
        Ok(self.grad_vector(field, a)?.trace())
    }

    /// `(∇·Ψ)_γ = (∂Ψ_βγ/∂θ^i)(∂θ^i/∂X_β)`.
    pub fn div_tensor(&self, field: &[Mat3], a: usize) -> Result<Vec3> {
        self.check(a)?;
        let map = self.cspm.matrices[a] * self.metric.dtheta_dx[a];
        let mut out = Vec3::zeros();
        for it in self.pairs.active(a) {
            let g = map.transpose() * it.grad;
            let diff = (field[it.other] - field[a]) * it.weight;
            out += diff.transpose() * g;
        }
        Ok(out)
    }
}

/// `A : B = Σ_αβ A_αβ B_αβ`.
pub fn tensor_inner(a: &Mat3, b: &Mat3) -> f64 {
    double_dot(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{assign_subdomains, build_pairs, Region, SubdomainDef};
    use crate::mapping::chart::ChartFn;
    use crate::particles::ParticleSeed;

    fn cube(n: usize, dx: f64) -> ParticleSet {
        let mut seeds = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    seeds.push(ParticleSeed {
                        id: seeds.len() as u64,
                        position: Vec3::new(i as f64 + 0.5, j as f64 + 0.5, k as f64 + 0.5) * dx,
                        mass: dx * dx * dx * 2.0,
                        rho0: 2.0,
                        material: 0,
                    });
                }
            }
        }
        ParticleSet::from_seeds(&seeds)
    }

    fn setup(p: &mut ParticleSet, h: f64) -> (Vec<Subdomain>, PairTable, MetricField, CspmCorrection) {
        let subs = assign_subdomains(
            &[SubdomainDef {
                name: "s".into(),
                rank: 0,
                chart: ChartFn::Identity,
                region: Region::All,
                h,
                overlap: 0.0,
            }],
            p,
        )
        .unwrap();
        let pairs = build_pairs(&subs, p).unwrap();
        let (m, c) = build_metric(p, &pairs, &subs, Dimensionality::Full).unwrap();
        (subs, pairs, m, c)
    }

    #[test]
    fn identity_chart_gives_identity_metric() {
        let mut p = cube(6, 0.1);
        let (_, _, m, _) = setup(&mut p, 0.12);
        for a in 0..p.len() {
            assert!((m.dx_dtheta[a] - Mat3::identity()).abs().max() < 1e-8);
            assert!((m.dx_dtheta[a] * m.dtheta_dx[a] - Mat3::identity()).abs().max() < 1e-10);
            assert!(m.jacobian_det[a] > 0.0);
        }
    }

    #[test]
    fn interior_cspm_is_near_identity() {
        let mut p = cube(7, 1.0);
        let (_, _, _, c) = setup(&mut p, 1.2);
        let centre = 3 * 49 + 3 * 7 + 3;
        // lattice sums of the cubic spline are within a few percent of exact
        assert!((c.matrices[centre] - Mat3::identity()).abs().max() < 0.05);
    }

    #[test]
    fn collinear_neighbors_are_singular() {
        let seeds: Vec<ParticleSeed> = (0..4)
            .map(|i| ParticleSeed {
                id: i,
                position: Vec3::new(i as f64, 0.0, 0.0),
                mass: 1.0,
                rho0: 1.0,
                material: 0,
            })
            .collect();
        let mut p = ParticleSet::from_seeds(&seeds);
        let subs = assign_subdomains(
            &[SubdomainDef {
                name: "s".into(),
                rank: 0,
                chart: ChartFn::Identity,
                region: Region::All,
                h: 2.0,
                overlap: 0.0,
            }],
            &mut p,
        )
        .unwrap();
        let pairs = build_pairs(&subs, &p).unwrap();
        match build_metric(&p, &pairs, &subs, Dimensionality::Full) {
            Err(GsphError::SingularMetric { neighbors, .. }) => assert_eq!(neighbors, 3),
            other => panic!("expected singular metric, got {other:?}"),
        }
    }

    #[test]
    fn operators_on_simple_fields() {
        let mut p = cube(5, 0.2);
        let (_, pairs, m, c) = setup(&mut p, 0.24);
        let ops = Operators {
            particles: &p,
            pairs: &pairs,
            metric: &m,
            cspm: &c,
        };
        let constant = vec![3.5; p.len()];
        let linear: Vec<f64> = p.x_ref.iter().map(|x| x.x).collect();
        let rotation: Vec<Vec3> = p.x_ref.iter().map(|x| Vec3::new(-x.y, x.x, 0.0)).collect();
        let tensors = vec![Mat3::new(1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0); p.len()];
        for a in 0..p.len() {
            assert_eq!(ops.grad_scalar(&constant, a).unwrap(), Vec3::zeros());
            assert!((ops.grad_scalar(&linear, a).unwrap() - Vec3::x()).norm() < 1e-8);
            assert!(ops.div_vector(&rotation, a).unwrap().abs() < 1e-8);
            assert!(ops.div_vector(&p.x_ref, a).unwrap() - 3.0 < 1e-8);
            assert_eq!(ops.div_tensor(&tensors, a).unwrap(), Vec3::zeros());
        }
        assert!(ops.grad_scalar(&constant, p.len()).is_err());
    }

    #[test]
    fn tensor_inner_examples() {
        assert_eq!(tensor_inner(&Mat3::identity(), &Mat3::identity()), 3.0);
        let a = Mat3::new(1.0, 2.0, 0.0, 3.0, 4.0, 0.0, 0.0, 0.0, 0.0);
        assert_eq!(tensor_inner(&a, &Mat3::zeros()), 0.0);
        assert_eq!(tensor_inner(&a, &a), 30.0);
    }

    #[test]
    fn refresh_after_isolation_gives_rigid_completion() {
        let mut p = cube(4, 1.0);
        let (subs, mut pairs, mut m, mut c) = setup(&mut p, 1.2);
        let ids: Vec<usize> = pairs.interactions(0).map(|i| i.pair).collect();
        let mut affected = vec![0];
        for k in ids {
            affected.push(pairs.pair(k).b);
            pairs.deactivate_bond(k);
        }
        refresh_metric(&p, &pairs, &subs, &mut m, &mut c, &affected);
        assert_eq!(m.gradient_map[0], Mat3::zeros());
        assert_eq!(m.completion[0], Mat3::identity());
    }
}
