use std::collections::HashSet;

use super::grid::CellGrid;
use super::Subdomain;
use crate::error::{GsphError, Result};
use crate::mapping::chart::ChartFn;
use crate::particles::ParticleSet;
use crate::tensor::Vec3;

/// One reference-configuration interaction pair, evaluated in its owner's chart.
#[derive(Debug, Clone, PartialEq)]
pub struct Pair {
    /// Lower particle index.
    pub a: usize,
    pub b: usize,
    /// Index of the owning subdomain.
    pub owner: usize,
    /// `∂W_ab/∂θ_a`.
    pub grad_a: Vec3,
    /// `∂W_ba/∂θ_b`.
    pub grad_b: Vec3,
    pub w: f64,
    /// `θ_b - θ_a` in the owner chart.
    pub dtheta: Vec3,
    /// Reference physical distance `|X_b - X_a|`.
    pub r0: f64,
    /// Generalized-cell volume of `a` in the owner chart, `V_a / det(∂X/∂θ)`.
    pub weight_a: f64,
    pub weight_b: f64,
    pub bond_active: bool,
}

/// A pair seen from one of its particles.
#[derive(Debug, Clone, Copy)]
pub struct Interaction {
    pub pair: usize,
    pub other: usize,
    /// `∂W/∂θ` at this particle.
    pub grad: Vec3,
    /// `θ_other - θ_self` in the owner chart.
    pub dtheta: Vec3,
    /// Generalized-cell volume of the other particle in the owner chart.
    pub weight: f64,
}

#[derive(Debug, Clone, Copy)]
struct Slot {
    pair: usize,
    first: bool,
}

/// All interaction pairs plus a per-particle adjacency index.
#[derive(Debug, Clone)]
pub struct PairTable {
    pairs: Vec<Pair>,
    offsets: Vec<usize>,
    slots: Vec<Slot>,
}

impl PairTable {
    /// Build from an explicit pair list (sorted internally by `(a, b)`).
    pub fn from_pairs(n_particles: usize, mut pairs: Vec<Pair>) -> Self {
        for p in &mut pairs {
            if p.a > p.b {
                std::mem::swap(&mut p.a, &mut p.b);
                std::mem::swap(&mut p.grad_a, &mut p.grad_b);
                p.dtheta = -p.dtheta;
            }
        }
        pairs.sort_by_key(|p| (p.a, p.b));
        let mut counts = vec![0usize; n_particles + 1];
        for p in &pairs {
            counts[p.a + 1] += 1;
            counts[p.b + 1] += 1;
        }
        for i in 0..n_particles {
            counts[i + 1] += counts[i];
        }
        let offsets = counts;
        let mut fill = offsets.clone();
        let mut slots = vec![
            Slot {
                pair: 0,
                first: true
            };
            offsets[n_particles]
        ];
        for (k, p) in pairs.iter().enumerate() {
            slots[fill[p.a]] = Slot { pair: k, first: true };
            fill[p.a] += 1;
            slots[fill[p.b]] = Slot { pair: k, first: false };
            fill[p.b] += 1;
        }
        Self {
            pairs,
            offsets,
            slots,
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn pair(&self, k: usize) -> &Pair {
        &self.pairs[k]
    }

    pub fn n_particles(&self) -> usize {
        self.offsets.len() - 1
    }

    fn view(&self, slot: Slot) -> Interaction {
        let p = &self.pairs[slot.pair];
        if slot.first {
            Interaction {
                pair: slot.pair,
                other: p.b,
                grad: p.grad_a,
                dtheta: p.dtheta,
                weight: p.weight_b,
            }
        } else {
            Interaction {
                pair: slot.pair,
                other: p.a,
                grad: p.grad_b,
                dtheta: -p.dtheta,
                weight: p.weight_a,
            }
        }
    }

    /// Every pair of particle `a`, active or not, in ascending pair order.
    pub fn interactions(&self, a: usize) -> impl Iterator<Item = Interaction> + '_ {
        self.slots[self.offsets[a]..self.offsets[a + 1]]
            .iter()
            .map(move |&s| self.view(s))
    }

    /// Pairs of particle `a` whose bond is still intact.
    pub fn active(&self, a: usize) -> impl Iterator<Item = Interaction> + '_ {
        self.slots[self.offsets[a]..self.offsets[a + 1]]
            .iter()
            .filter(move |s| self.pairs[s.pair].bond_active)
            .map(move |&s| self.view(s))
    }

    pub fn active_count(&self, a: usize) -> usize {
        self.active(a).count()
    }

    pub fn neighbor_count(&self, a: usize) -> usize {
        self.offsets[a + 1] - self.offsets[a]
    }

    /// Permanently remove a bond from all sums. Returns `true` if it was intact.
    pub fn deactivate_bond(&mut self, k: usize) -> bool {
        let p = &mut self.pairs[k];
        std::mem::replace(&mut p.bond_active, false)
    }

    pub fn broken_count(&self) -> usize {
        self.pairs.iter().filter(|p| !p.bond_active).count()
    }
}

/// Volume of a particle's cell measured in generalized coordinates.
///
/// Charts without an analytic Jacobian (tables) use the physical volume.
pub fn generalized_volume(chart: &ChartFn, theta: &Vec3, volume: f64) -> f64 {
    match chart.jacobian(theta) {
        Some(j) => volume / j.determinant().abs(),
        None => volume,
    }
}

/// Collect all interaction pairs, subdomain by subdomain in precedence order.
///
/// A pair belongs to the first chart, in precedence order, into which both
/// of its particles are mapped; transient particles therefore pair with each
/// other in the higher-precedence chart too.
///
/// Kernel values and gradients are evaluated once on the reference
/// configuration and never updated.
pub fn build_pairs(subdomains: &[Subdomain], particles: &ParticleSet) -> Result<PairTable> {
    let n = particles.len();
    let mut pairs = Vec::new();
    let mut seen = HashSet::new();
    for (k, sub) in subdomains.iter().enumerate() {
        let kernel = sub.kernel;
        let radius = kernel.support_radius();
        let grid = CellGrid::new(&sub.theta, radius);
        let weights: Vec<f64> = sub
            .mapped
            .iter()
            .zip(&sub.theta)
            .map(|(&a, th)| generalized_volume(&sub.chart, th, particles.volume0(a)))
            .collect();
        for (i, j) in grid.pairs_within(radius) {
            let (a, b) = (sub.mapped[i], sub.mapped[j]);
            if !seen.insert((a.min(b), a.max(b))) {
                continue;
            }
            let r = sub.theta[i] - sub.theta[j];
            let grad_a = kernel.gradient(&r);
            pairs.push(Pair {
                a,
                b,
                owner: k,
                grad_a,
                grad_b: -grad_a,
                w: kernel.value(&r),
                dtheta: -r,
                r0: (particles.x_ref[b] - particles.x_ref[a]).norm(),
                weight_a: weights[i],
                weight_b: weights[j],
                bond_active: true,
            });
        }
    }
    let table = PairTable::from_pairs(n, pairs);
    if let Some(a) = (0..n).find(|&a| table.neighbor_count(a) == 0) {
        return Err(GsphError::Setup(format!(
            "particle {} has no neighbors within its kernel support",
            particles.id[a]
        )));
    }
    Ok(table)
}
