//! Particle sources: generalized-space lattices, CSV clouds and chart tables.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use crate::domain::Region;
use crate::error::{GsphError, Result};
use crate::mapping::chart::ChartFn;
use crate::particles::ParticleSeed;
use crate::tensor::Vec3;

/// A box in generalized coordinates filled with cell-centered particles.
#[derive(Debug, Clone)]
pub struct LatticeSpec<'a> {
    pub chart: &'a ChartFn,
    pub min: Vec3,
    pub max: Vec3,
    pub spacing: f64,
    /// Particles outside this physical region are dropped.
    pub region: &'a Region,
    /// Particles inside any of these physical regions are dropped.
    pub exclude: &'a [Region],
    pub rho0: f64,
    pub material: usize,
}

/// Cell-centered lattice `θ = min + (i + ½)Δθ`, mapped to physical space.
///
/// Each particle carries `m₀ = ρ₀ |det ∂X/∂θ| Δθ³`. Ids are assigned
/// consecutively from `first_id` in lexicographic `(i, j, k)` order.
pub fn generate_lattice(spec: &LatticeSpec, first_id: u64) -> Result<Vec<ParticleSeed>> {
    let d = spec.spacing;
    let extent = spec.max - spec.min;
    if !(d > 0.0) || extent.iter().any(|e| !(*e > 0.0)) {
        return Err(GsphError::Setup(format!(
            "lattice box {:?}..{:?} with spacing {d} has zero extent",
            spec.min.as_slice(),
            spec.max.as_slice()
        )));
    }
    let counts: Vec<usize> = extent.iter().map(|e| (e / d).round() as usize).collect();
    if extent
        .iter()
        .zip(&counts)
        .any(|(e, &n)| n == 0 || (n as f64 * d - e).abs() > 1e-6 * d)
    {
        return Err(GsphError::Setup(format!(
            "lattice box {:?}..{:?} is not a whole number of cells of size {d}",
            spec.min.as_slice(),
            spec.max.as_slice()
        )));
    }
    let cell = d * d * d;
    let mut seeds = Vec::new();
    let mut id = first_id;
    for i in 0..counts[0] {
        for j in 0..counts[1] {
            for k in 0..counts[2] {
                let theta = spec.min + Vec3::new(i as f64 + 0.5, j as f64 + 0.5, k as f64 + 0.5) * d;
                let (Some(x), Some(jac)) = (spec.chart.inverse(&theta), spec.chart.jacobian(&theta)) else {
                    return Err(GsphError::Setup(format!(
                        "chart is not invertible at generalized point {:?}",
                        theta.as_slice()
                    )));
                };
                if !spec.region.contains(id, &x) || spec.exclude.iter().any(|r| r.contains(id, &x)) {
                    continue;
                }
                seeds.push(ParticleSeed {
                    id,
                    position: x,
                    mass: spec.rho0 * jac.determinant().abs() * cell,
                    rho0: spec.rho0,
                    material: spec.material,
                });
                id += 1;
            }
        }
    }
    Ok(seeds)
}

#[derive(Deserialize)]
struct CloudRow {
    id: u64,
    #[serde(rename = "X")]
    x: f64,
    #[serde(rename = "Y")]
    y: f64,
    #[serde(rename = "Z")]
    z: f64,
    volume: f64,
}

/// Read a particle cloud `id,X,Y,Z,volume` (header required).
pub fn load_particle_csv(path: &Path, rho0: f64, material: usize) -> Result<Vec<ParticleSeed>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut out = Vec::new();
    for row in reader.deserialize::<CloudRow>() {
        let row = row.map_err(|e| csv_error(path, e))?;
        if !(row.volume > 0.0) {
            return Err(GsphError::Setup(format!(
                "{}: particle {} has non-positive volume",
                path.display(),
                row.id
            )));
        }
        out.push(ParticleSeed {
            id: row.id,
            position: Vec3::new(row.x, row.y, row.z),
            mass: rho0 * row.volume,
            rho0,
            material,
        });
    }
    Ok(out)
}

#[derive(Deserialize)]
struct TableRow {
    id: u64,
    theta1: f64,
    theta2: f64,
    theta3: f64,
}

/// Read a per-particle chart `id,theta1,theta2,theta3` (header required).
pub fn load_chart_table(path: &Path) -> Result<ChartFn> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut map = HashMap::new();
    for row in reader.deserialize::<TableRow>() {
        let row = row.map_err(|e| csv_error(path, e))?;
        if map.insert(row.id, Vec3::new(row.theta1, row.theta2, row.theta3)).is_some() {
            return Err(GsphError::Setup(format!(
                "{}: duplicate particle id {}",
                path.display(),
                row.id
            )));
        }
    }
    Ok(ChartFn::Table(Arc::new(map)))
}

fn csv_error(path: &Path, e: csv::Error) -> GsphError {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => GsphError::io(path, io),
            _ => unreachable!(),
        }
    } else {
        GsphError::Setup(format!("{}: {e}", path.display()))
    }
}
