#![allow(dead_code)]

use std::f64::consts::PI;

use gsph::domain::{Region, SubdomainDef};
use gsph::io::lattice::{generate_lattice, LatticeSpec};
use gsph::mapping::chart::ChartFn;
use gsph::material::{ElasticParams, Material};
use gsph::particles::{ParticleSeed, ParticleSet};
use gsph::tensor::Vec3;

pub fn elastic(e: f64, nu: f64, rho0: f64) -> Material {
    Material::elastic("m", ElasticParams::new(e, nu, rho0).unwrap())
}

pub fn identity_def(h: f64) -> SubdomainDef {
    SubdomainDef {
        name: "block".into(),
        rank: 0,
        chart: ChartFn::Identity,
        region: Region::All,
        h,
        overlap: 0.0,
    }
}

/// Cell-centered block `counts` cells of size `dx` starting at the origin.
pub fn block_seeds(counts: [usize; 3], dx: f64, rho0: f64) -> Vec<ParticleSeed> {
    let mut seeds = Vec::new();
    for i in 0..counts[0] {
        for j in 0..counts[1] {
            for k in 0..counts[2] {
                seeds.push(ParticleSeed {
                    id: seeds.len() as u64,
                    position: Vec3::new(i as f64 + 0.5, j as f64 + 0.5, k as f64 + 0.5) * dx,
                    mass: rho0 * dx * dx * dx,
                    rho0,
                    material: 0,
                });
            }
        }
    }
    seeds
}

pub fn block(counts: [usize; 3], dx: f64, rho0: f64) -> ParticleSet {
    ParticleSet::from_seeds(&block_seeds(counts, dx, rho0))
}

/// Planar annular sector `r ∈ [r0, r1]`, `φ ∈ [0, π/2]`, one layer thick, on a
/// cylindrical chart with `n_r × n_phi` generalized cells of size `d`.
pub fn sector(r0: f64, r1: f64, n_r: usize, n_phi: usize, rho0: f64) -> (ParticleSet, SubdomainDef, f64) {
    let d = (r1 - r0) / n_r as f64;
    let s_phi = n_phi as f64 * d / (PI / 2.0);
    let chart = ChartFn::cylindrical(Vec3::zeros(), Vec3::z(), None, Vec3::new(1.0, s_phi, 1.0)).unwrap();
    let spec = LatticeSpec {
        chart: &chart,
        min: Vec3::new(r0, 0.0, 0.0),
        max: Vec3::new(r1, n_phi as f64 * d, d),
        spacing: d,
        region: &Region::All,
        exclude: &[],
        rho0,
        material: 0,
    };
    let seeds = generate_lattice(&spec, 0).unwrap();
    let def = SubdomainDef {
        name: "sector".into(),
        rank: 0,
        chart,
        region: Region::All,
        h: 1.2 * d,
        overlap: 0.0,
    };
    (ParticleSet::from_seeds(&seeds), def, d)
}

/// Overset quarter disk: identity-chart core `r < r_i` and a cylindrical
/// annulus `r_i ≤ r ≤ r_o`, both with spacing `d` (tangential spacing `d` at `r_i`).
pub struct QuarterDisk {
    pub particles: ParticleSet,
    pub defs: Vec<SubdomainDef>,
    pub d: f64,
    pub r_i: f64,
    pub r_o: f64,
}

pub fn quarter_disk(r_i: f64, r_o: f64, n_core: usize, layers: usize, rho0: f64) -> QuarterDisk {
    let d = r_i / n_core as f64;
    let n_r = ((r_o - r_i) / d).round() as usize;
    let r_o = r_i + n_r as f64 * d;
    let n_phi = (r_i * PI / 2.0 / d).round() as usize;
    let s_phi = n_phi as f64 * d / (PI / 2.0);
    let h = 1.2 * d;
    let quarter = |r: [f64; 2]| Region::Annulus {
        origin: [0.0; 3],
        axis: [0.0, 0.0, 1.0],
        ref_dir: None,
        r,
        phi: Some([0.0, PI / 2.0]),
        z: None,
    };
    let core = SubdomainDef {
        name: "core".into(),
        rank: 0,
        chart: ChartFn::Identity,
        region: quarter([0.0, r_i]),
        h,
        overlap: 2.5 * h,
    };
    let ring = SubdomainDef {
        name: "ring".into(),
        rank: 1,
        chart: ChartFn::cylindrical(Vec3::zeros(), Vec3::z(), None, Vec3::new(1.0, s_phi, 1.0)).unwrap(),
        region: quarter([r_i, r_o]),
        h,
        overlap: 0.0,
    };
    let thickness = layers as f64 * d;
    let mut seeds = generate_lattice(
        &LatticeSpec {
            chart: &core.chart,
            min: Vec3::zeros(),
            max: Vec3::new(n_core as f64 * d, n_core as f64 * d, thickness),
            spacing: d,
            region: &core.region,
            exclude: &[],
            rho0,
            material: 0,
        },
        0,
    )
    .unwrap();
    let first = seeds.len() as u64;
    seeds.extend(
        generate_lattice(
            &LatticeSpec {
                chart: &ring.chart,
                min: Vec3::new(r_i, 0.0, 0.0),
                max: Vec3::new(r_o, n_phi as f64 * d, thickness),
                spacing: d,
                region: &ring.region,
                exclude: &[],
                rho0,
                material: 0,
            },
            first,
        )
        .unwrap(),
    );
    QuarterDisk {
        particles: ParticleSet::from_seeds(&seeds),
        defs: vec![core, ring],
        d,
        r_i,
        r_o,
    }
}
