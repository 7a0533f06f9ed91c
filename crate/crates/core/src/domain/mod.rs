//! Overset decomposition: subdomain ownership, transient particles and the
//! reference-configuration pair table.
//!
//! Subdomains are ordered by an integer precedence rank (lower rank = more
//! comprehensive chart). A particle is owned by exactly one subdomain. Particles
//! of a lower-precedence subdomain that lie within the overlap band of a
//! higher-precedence subdomain are *transient*: they also receive coordinates
//! in that subdomain's chart and take part in its pair search. A pair found in
//! several charts is owned by the highest-precedence one.

mod grid;
mod pairs;

use serde::{Deserialize, Serialize};

use crate::error::{GsphError, Result};
use crate::kernel::KernelParams;
use crate::mapping::chart::{ChartFn, CylinderFrame};
use crate::particles::ParticleSet;
use crate::tensor::Vec3;

pub use grid::{brute_force_pairs, CellGrid};
pub use pairs::{build_pairs, generalized_volume, Interaction, Pair, PairTable};

/// Spatial predicate on reference positions (and particle ids).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Region {
    All,
    Box {
        min: [f64; 3],
        max: [f64; 3],
    },
    /// Cylindrical sector `r ∈ [r0, r1]`, optional `φ` and axial `z` ranges.
    Annulus {
        #[serde(default)]
        origin: [f64; 3],
        #[serde(default = "default_axis")]
        axis: [f64; 3],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ref_dir: Option<[f64; 3]>,
        r: [f64; 2],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        phi: Option<[f64; 2]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        z: Option<[f64; 2]>,
    },
    Ids {
        ids: Vec<u64>,
    },
}

fn default_axis() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

const REGION_EPS: f64 = 1e-12;

impl Region {
    pub fn contains(&self, id: u64, x: &Vec3) -> bool {
        match self {
            Region::All => true,
            Region::Box { min, max } => (0..3).all(|i| {
                let tol = REGION_EPS * (max[i] - min[i]).abs().max(1.0);
                x[i] >= min[i] - tol && x[i] <= max[i] + tol
            }),
            Region::Annulus {
                origin,
                axis,
                ref_dir,
                r,
                phi,
                z,
            } => {
                let Ok(frame) = CylinderFrame::new(
                    Vec3::from(*origin),
                    Vec3::from(*axis),
                    ref_dir.map(Vec3::from),
                ) else {
                    return false;
                };
                let (rr, pp, zz) = frame.polar(x);
                let within = |v: f64, range: &[f64; 2]| {
                    let tol = REGION_EPS * (range[1] - range[0]).abs().max(1.0);
                    v >= range[0] - tol && v <= range[1] + tol
                };
                within(rr, r)
                    && phi.as_ref().is_none_or(|p| within(pp, p))
                    && z.as_ref().is_none_or(|zr| within(zz, zr))
            }
            Region::Ids { ids } => ids.contains(&id),
        }
    }
}

/// Declarative description of one subdomain.
#[derive(Debug, Clone)]
pub struct SubdomainDef {
    pub name: String,
    pub rank: i64,
    pub chart: ChartFn,
    pub region: Region,
    /// Smoothing length in this chart's generalized units.
    pub h: f64,
    /// Width of the band (in this chart) within which lower-precedence particles become transient.
    pub overlap: f64,
}

/// One generalized coordinate space with the particles mapped into it.
#[derive(Debug, Clone)]
pub struct Subdomain {
    pub name: String,
    pub rank: i64,
    pub chart: ChartFn,
    pub kernel: KernelParams,
    pub overlap: f64,
    /// Owned particle indices, ascending.
    pub members: Vec<usize>,
    /// Particles owned elsewhere but also mapped into this chart, ascending.
    pub transients: Vec<usize>,
    /// `members ∪ transients`, ascending.
    pub mapped: Vec<usize>,
    /// Generalized coordinates, parallel to `mapped`.
    pub theta: Vec<Vec3>,
}

impl Subdomain {
    pub fn theta_of(&self, a: usize) -> Option<Vec3> {
        self.mapped.binary_search(&a).ok().map(|k| self.theta[k])
    }

    pub fn is_transient(&self, a: usize) -> bool {
        self.transients.binary_search(&a).is_ok()
    }
}

/// Assign every particle to its owning subdomain and flag transient particles.
///
/// `defs` may be given in any order; the result is sorted by precedence rank
/// and `particles.subdomain` is filled with indices into it.
pub fn assign_subdomains(defs: &[SubdomainDef], particles: &mut ParticleSet) -> Result<Vec<Subdomain>> {
    if defs.is_empty() {
        return Err(GsphError::Setup("at least one subdomain is required".into()));
    }
    let mut order: Vec<usize> = (0..defs.len()).collect();
    order.sort_by_key(|&i| defs[i].rank);
    for w in order.windows(2) {
        if defs[w[0]].rank == defs[w[1]].rank {
            return Err(GsphError::Setup(format!(
                "subdomains '{}' and '{}' share precedence rank {}",
                defs[w[0]].name, defs[w[1]].name, defs[w[0]].rank
            )));
        }
    }
    let sorted: Vec<&SubdomainDef> = order.iter().map(|&i| &defs[i]).collect();

    let mut problems = Vec::new();
    for d in &sorted {
        if d.overlap > 0.0 && d.overlap < 2.0 * d.h {
            problems.push(format!(
                "subdomain '{}': overlap band {} is thinner than the kernel support 2h = {}",
                d.name,
                d.overlap,
                2.0 * d.h
            ));
        }
    }

    // ownership: highest-precedence region containing the particle
    let n = particles.len();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); sorted.len()];
    let mut uncovered = Vec::new();
    let mut conflicts = Vec::new();
    for a in 0..n {
        let id = particles.id[a];
        let x = particles.x_ref[a];
        let hits: Vec<usize> = (0..sorted.len())
            .filter(|&k| sorted[k].region.contains(id, &x))
            .collect();
        match hits.first() {
            None => uncovered.push(id),
            Some(&k) => {
                if hits.len() > 1 && sorted[k].overlap <= 0.0 {
                    conflicts.push((id, k, hits[1]));
                }
                particles.subdomain[a] = k;
                members[k].push(a);
            }
        }
    }
    if !uncovered.is_empty() {
        problems.push(format!(
            "{} particle(s) not covered by any subdomain region (first ids: {:?})",
            uncovered.len(),
            &uncovered[..uncovered.len().min(8)]
        ));
    }
    if let Some(&(id, k, j)) = conflicts.first() {
        problems.push(format!(
            "regions of subdomains '{}' and '{}' overlap (e.g. particle {id}) but '{}' declares no overlap band",
            sorted[k].name, sorted[j].name, sorted[k].name
        ));
    }
    if !problems.is_empty() {
        return Err(GsphError::Setup(problems.join("; ")));
    }

    let mut out = Vec::with_capacity(sorted.len());
    for (k, d) in sorted.iter().enumerate() {
        let kernel = KernelParams::new(d.h)?;
        let own = &members[k];
        let own_theta = own
            .iter()
            .map(|&a| d.chart.forward(particles.id[a], &particles.x_ref[a]))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| GsphError::Setup(format!("subdomain '{}': {e}", d.name)))?;

        let mut transients = Vec::new();
        let mut transient_theta = Vec::new();
        if d.overlap > 0.0 && !own.is_empty() {
            let grid = CellGrid::new(&own_theta, d.overlap);
            for a in 0..n {
                if particles.subdomain[a] <= k {
                    continue;
                }
                // particles the chart cannot represent are never transient into it
                let Ok(theta) = d.chart.forward(particles.id[a], &particles.x_ref[a]) else {
                    continue;
                };
                if grid.nearest_distance(&theta).is_some_and(|dist| dist < d.overlap) {
                    transients.push(a);
                    transient_theta.push(theta);
                }
            }
        }

        let mut mapped: Vec<(usize, Vec3)> = own
            .iter()
            .copied()
            .zip(own_theta)
            .chain(transients.iter().copied().zip(transient_theta))
            .collect();
        mapped.sort_by_key(|(a, _)| *a);
        out.push(Subdomain {
            name: d.name.clone(),
            rank: d.rank,
            chart: d.chart.clone(),
            kernel,
            overlap: d.overlap,
            members: own.clone(),
            transients,
            mapped: mapped.iter().map(|(a, _)| *a).collect(),
            theta: mapped.iter().map(|(_, t)| *t).collect(),
        });
    }
    Ok(out)
}
