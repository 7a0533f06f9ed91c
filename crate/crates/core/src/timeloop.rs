//! Velocity-Verlet integration of the Total-Lagrangian system.
//!
//! One step, in order: half kick, drift, kinematics (`F`, `Ḟ`, `ρ`),
//! constitutive update (`σ`, `P`), bond checks, acceleration, final kick.

use rayon::prelude::*;

use crate::domain::{assign_subdomains, build_pairs, PairTable, Region, Subdomain, SubdomainDef};
use crate::error::{GsphError, Result};
use crate::mapping::chart::CylinderFrame;
use crate::mapping::{build_metric, refresh_metric, CspmCorrection, Dimensionality, MetricField};
use crate::io::config::{BcConfig, BodyForceConfig, ChartConfig, MaterialConfig, ModelKind, SimConfig};
use crate::io::lattice::{generate_lattice, load_chart_table, load_particle_csv, LatticeSpec};
use crate::mapping::chart::ChartFn;
use crate::material::{
    rankine_check, BondFate, ElasticParams, JCDamageParams, JohnsonCookParams, Material, MaterialLaw, RankineParams,
};
use crate::mechanics::{
    assemble_pk1, compute_f, compute_f_dot, j_f_inverse, jacobians, momentum_rhs, update_density, MomentumOptions,
    ViscosityInputs, ViscosityParams,
};
use crate::particles::ParticleSet;
use crate::tensor::{double_dot, is_finite_mat, is_finite_vec, symmetric_part, Mat3, Vec3};

pub use crate::io::config::IntegratorConfig;

/// Step phases, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    HalfKick,
    Drift,
    Kinematics,
    Constitutive,
    BondCheck,
    Acceleration,
    FinalKick,
}

impl Phase {
    pub const ORDER: [Phase; 7] = [
        Phase::HalfKick,
        Phase::Drift,
        Phase::Kinematics,
        Phase::Constitutive,
        Phase::BondCheck,
        Phase::Acceleration,
        Phase::FinalKick,
    ];
}

/// External acceleration field, optionally ramped linearly from zero.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum BodyForce {
    #[default]
    None,
    Uniform { acceleration: Vec3, ramp_time: f64 },
    /// Outward from the axis, evaluated at the reference position.
    Radial {
        frame: CylinderFrame,
        magnitude: f64,
        ramp_time: f64,
    },
}

impl BodyForce {
    fn ramp(ramp_time: f64, t: f64) -> f64 {
        if ramp_time > 0.0 {
            (t / ramp_time).min(1.0)
        } else {
            1.0
        }
    }

    pub fn at(&self, x_ref: &Vec3, t: f64) -> Vec3 {
        match self {
            BodyForce::None => Vec3::zeros(),
            BodyForce::Uniform { acceleration, ramp_time } => acceleration * Self::ramp(*ramp_time, t),
            BodyForce::Radial {
                frame,
                magnitude,
                ramp_time,
            } => {
                let (r, phi, _) = frame.polar(x_ref);
                if r == 0.0 {
                    Vec3::zeros()
                } else {
                    frame.radial(phi) * (magnitude * Self::ramp(*ramp_time, t))
                }
            }
        }
    }
}

/// Prescribed velocity components on a fixed particle set.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityConstraint {
    pub particles: Vec<usize>,
    pub velocity: Vec3,
    pub components: [bool; 3],
}

impl VelocityConstraint {
    pub fn from_region(particles: &ParticleSet, region: &Region, velocity: Vec3, components: [bool; 3]) -> Self {
        Self {
            particles: (0..particles.len())
                .filter(|&a| region.contains(particles.id[a], &particles.x_ref[a]))
                .collect(),
            velocity,
            components,
        }
    }

    fn apply(&self, v: &mut [Vec3]) {
        for &a in &self.particles {
            for k in 0..3 {
                if self.components[k] {
                    v[a][k] = self.velocity[k];
                }
            }
        }
    }
}

/// Time-step selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeStep {
    Fixed(f64),
    Cfl(f64),
}

/// Everything except geometry needed to build a [`Simulation`].
#[derive(Debug, Clone)]
pub struct SimOptions {
    pub dim: Dimensionality,
    pub momentum: MomentumOptions,
    pub time_step: TimeStep,
    pub constraints: Vec<VelocityConstraint>,
    pub body_force: BodyForce,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            dim: Dimensionality::Full,
            momentum: MomentumOptions::default(),
            time_step: TimeStep::Cfl(IntegratorConfig::DEFAULT_CFL),
            constraints: Vec::new(),
            body_force: BodyForce::None,
        }
    }
}

/// Summary emitted at every output interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Progress {
    pub step: u64,
    pub time: f64,
    /// Smallest step used since the previous report (the current step size at step 0).
    pub min_dt: f64,
    pub max_speed: f64,
    pub broken_bonds: usize,
}

impl std::fmt::Display for Progress {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "step {} t={:.6e} min_dt={:.3e} max|v|={:.3e} broken_bonds={}",
            self.step, self.time, self.min_dt, self.max_speed, self.broken_bonds
        )
    }
}

pub struct Simulation {
    pub particles: ParticleSet,
    pub subdomains: Vec<Subdomain>,
    pub pairs: PairTable,
    pub metric: MetricField,
    pub cspm: CspmCorrection,
    pub materials: Vec<Material>,
    pub options: SimOptions,
    pub sound_speed: Vec<f64>,
    pub step: u64,
    pub time: f64,
    /// Accumulated stress work `Σ ∫ σ:D V dt` (approximate strain energy).
    pub strain_energy: f64,
    min_dt_since_report: f64,
    trace: Option<Vec<Phase>>,
}

impl Simulation {
    /// Assign subdomains, build pairs and metric, and evaluate the initial acceleration.
    pub fn new(
        mut particles: ParticleSet,
        defs: &[SubdomainDef],
        materials: Vec<Material>,
        options: SimOptions,
    ) -> Result<Self> {
        if particles.is_empty() {
            return Err(GsphError::Setup("no particles".into()));
        }
        if let Some(a) = particles.material.iter().position(|&m| m >= materials.len()) {
            return Err(GsphError::Setup(format!(
                "particle {} references an unknown material",
                particles.id[a]
            )));
        }
        if options.dim == Dimensionality::Planar {
            let z0 = particles.x_ref[0].z;
            let scale = particles.x_ref.iter().map(|x| x.norm()).fold(1e-300, f64::max);
            if particles.x_ref.iter().any(|x| (x.z - z0).abs() > 1e-9 * scale) {
                return Err(GsphError::Setup(
                    "planar mode needs a single particle layer (all z equal)".into(),
                ));
            }
        }
        let subdomains = assign_subdomains(defs, &mut particles)?;
        let pairs = build_pairs(&subdomains, &particles)?;
        let (metric, cspm) = build_metric(&particles, &pairs, &subdomains, options.dim)?;
        let sound_speed = particles
            .material
            .iter()
            .map(|&m| materials[m].elastic.sound_speed())
            .collect();
        for a in 0..particles.len() {
            particles.plastic[a] = materials[particles.material[a]].initial_state();
        }
        for c in &options.constraints {
            c.apply(&mut particles.v);
        }
        let mut sim = Self {
            particles,
            subdomains,
            pairs,
            metric,
            cspm,
            materials,
            options,
            sound_speed,
            step: 0,
            time: 0.0,
            strain_energy: 0.0,
            min_dt_since_report: f64::INFINITY,
            trace: None,
        };
        sim.initial_state()?;
        Ok(sim)
    }

    fn initial_state(&mut self) -> Result<()> {
        let p = &mut self.particles;
        p.f = compute_f(p, &self.pairs, &self.metric);
        p.j = jacobians(&p.f, &p.id, 0)?;
        p.f_dot = compute_f_dot(p, &self.pairs, &self.metric, &p.v);
        for a in 0..p.len() {
            p.rho[a] = update_density(p.rho0[a], p.j[a]);
            p.pk1[a] = assemble_pk1(&p.sigma[a], &p.f[a]).unwrap_or_else(Mat3::zeros);
        }
        self.particles.acc = self.acceleration(0.0)?;
        Ok(())
    }

    /// Record the phase sequence of subsequent steps.
    pub fn enable_trace(&mut self) {
        self.trace = Some(Vec::new());
    }

    pub fn trace(&self) -> &[Phase] {
        self.trace.as_deref().unwrap_or(&[])
    }

    fn mark(&mut self, phase: Phase) {
        if let Some(t) = &mut self.trace {
            t.push(phase);
        }
    }

    /// Step size for the current state.
    pub fn stable_dt(&self) -> f64 {
        match self.options.time_step {
            TimeStep::Fixed(dt) => dt,
            TimeStep::Cfl(cfl) => {
                let p = &self.particles;
                let limit = (0..p.len())
                    .map(|a| self.metric.h_phys[a] / (self.sound_speed[a] + p.v[a].norm()))
                    .fold(f64::INFINITY, f64::min);
                cfl * limit
            }
        }
    }

    fn acceleration(&self, t: f64) -> Result<Vec<Vec3>> {
        let jf = j_f_inverse(&self.particles);
        let inputs = ViscosityInputs {
            sound_speed: &self.sound_speed,
            h_phys: &self.metric.h_phys,
            j_f_inv: &jf,
        };
        let mut acc = momentum_rhs(
            &self.particles,
            &self.pairs,
            &self.metric,
            &inputs,
            &self.options.momentum,
            self.step,
        )?;
        if self.options.body_force != BodyForce::None {
            for (a, x) in acc.iter_mut().zip(&self.particles.x_ref) {
                *a += self.options.body_force.at(x, t);
            }
        }
        Ok(acc)
    }

    fn apply_constraints(&mut self) {
        for c in &self.options.constraints {
            c.apply(&mut self.particles.v);
        }
    }

    /// Advance by one step of size [`Simulation::stable_dt`].
    pub fn step(&mut self) -> Result<()> {
        let dt = self.stable_dt();
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(GsphError::NonFinite {
                quantity: "time step",
                particle: 0,
                step: self.step,
            });
        }
        self.advance(dt)
    }

    /// Advance by one step of the given size.
    pub fn advance(&mut self, dt: f64) -> Result<()> {
        let step = self.step + 1;
        let half = 0.5 * dt;

        self.mark(Phase::HalfKick);
        {
            let p = &mut self.particles;
            p.v.par_iter_mut().zip(&p.acc).for_each(|(v, a)| *v += a * half);
        }
        self.apply_constraints();

        self.mark(Phase::Drift);
        {
            let p = &mut self.particles;
            p.x.par_iter_mut().zip(&p.v).for_each(|(x, v)| *x += v * dt);
            if let Some(a) = p.x.iter().position(|x| !is_finite_vec(x)) {
                return Err(GsphError::NonFinite {
                    quantity: "position",
                    particle: p.id[a],
                    step,
                });
            }
        }

        self.mark(Phase::Kinematics);
        {
            let p = &mut self.particles;
            p.f = compute_f(p, &self.pairs, &self.metric);
            p.j = jacobians(&p.f, &p.id, step)?;
            p.f_dot = compute_f_dot(p, &self.pairs, &self.metric, &p.v);
            let (rho0, j) = (&p.rho0, &p.j);
            p.rho.par_iter_mut().enumerate().for_each(|(a, r)| *r = update_density(rho0[a], j[a]));
        }

        self.mark(Phase::Constitutive);
        {
            let p = &self.particles;
            let materials = &self.materials;
            let updates: Vec<Option<(Mat3, crate::material::PlasticState, Mat3, f64)>> = (0..p.len())
                .into_par_iter()
                .map(|a| {
                    let mat = &materials[p.material[a]];
                    let (sigma, state) =
                        mat.update_stress(&p.sigma[a], &p.f[a], &p.f_dot[a], &p.plastic[a], p.rho[a], dt)?;
                    let pk1 = assemble_pk1(&sigma, &p.f[a])?;
                    let d = symmetric_part(&(p.f_dot[a] * p.f[a].try_inverse()?));
                    let work = double_dot(&((sigma + p.sigma[a]) * 0.5), &d) * (p.mass[a] / p.rho[a]) * dt;
                    Some((sigma, state, pk1, work))
                })
                .collect();
            let p = &mut self.particles;
            for (a, u) in updates.into_iter().enumerate() {
                let Some((sigma, state, pk1, work)) = u else {
                    return Err(GsphError::Inversion {
                        particle: p.id[a],
                        step,
                        det: p.f[a].determinant(),
                    });
                };
                if !is_finite_mat(&sigma) || !is_finite_mat(&pk1) {
                    return Err(GsphError::NonFinite {
                        quantity: "stress",
                        particle: p.id[a],
                        step,
                    });
                }
                p.sigma[a] = sigma;
                p.pk1[a] = pk1;
                p.plastic[a] = state;
                self.strain_energy += work;
            }
        }

        self.mark(Phase::BondCheck);
        self.check_bonds();

        self.mark(Phase::Acceleration);
        self.step = step;
        self.time += dt;
        self.particles.acc = self.acceleration(self.time)?;

        self.mark(Phase::FinalKick);
        {
            let p = &mut self.particles;
            p.v.par_iter_mut().zip(&p.acc).for_each(|(v, a)| *v += a * half);
        }
        self.apply_constraints();
        self.min_dt_since_report = self.min_dt_since_report.min(dt);
        Ok(())
    }

    fn bond_threshold(&self, a: usize, b: usize) -> Option<f64> {
        let ra = self.materials[self.particles.material[a]].rankine.map(|r| r.eps_max);
        let rb = self.materials[self.particles.material[b]].rankine.map(|r| r.eps_max);
        match (ra, rb) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, y) => x.or(y),
        }
    }

    /// Apply the Rankine criterion to every intact bond; broken bonds leave all sums at once.
    fn check_bonds(&mut self) {
        if self.materials.iter().all(|m| m.rankine.is_none()) {
            return;
        }
        let p = &self.particles;
        let broken: Vec<usize> = (0..self.pairs.len())
            .into_par_iter()
            .filter(|&k| {
                let pair = self.pairs.pair(k);
                if !pair.bond_active {
                    return false;
                }
                let Some(eps_max) = self.bond_threshold(pair.a, pair.b) else {
                    return false;
                };
                let r_now = (p.x[pair.b] - p.x[pair.a]).norm();
                rankine_check(pair.r0, r_now, &RankineParams { eps_max }) == BondFate::Broken
            })
            .collect();
        if broken.is_empty() {
            return;
        }
        let mut affected = Vec::with_capacity(2 * broken.len());
        for k in broken {
            if self.pairs.deactivate_bond(k) {
                let (a, b) = (self.pairs.pair(k).a, self.pairs.pair(k).b);
                self.particles.broken_bonds[a] += 1;
                self.particles.broken_bonds[b] += 1;
                affected.push(a);
                affected.push(b);
            }
        }
        affected.sort_unstable();
        affected.dedup();
        refresh_metric(
            &self.particles,
            &self.pairs,
            &self.subdomains,
            &mut self.metric,
            &mut self.cspm,
            &affected,
        );
    }

    pub fn kinetic_energy(&self) -> f64 {
        self.particles.kinetic_energy()
    }

    /// Kinetic energy plus accumulated stress work.
    pub fn total_energy(&self) -> f64 {
        self.kinetic_energy() + self.strain_energy
    }

    pub fn progress(&self) -> Progress {
        Progress {
            step: self.step,
            time: self.time,
            min_dt: if self.min_dt_since_report.is_finite() {
                self.min_dt_since_report
            } else {
                self.stable_dt()
            },
            max_speed: self.particles.v.iter().map(|v| v.norm()).fold(0.0, f64::max),
            broken_bonds: self.pairs.broken_count(),
        }
    }

    /// Run `steps` steps, calling `output` at the start, every `output_every`
    /// steps and after the last step.
    pub fn run(
        &mut self,
        steps: u64,
        output_every: Option<u64>,
        mut output: impl FnMut(&Simulation, &Progress) -> Result<()>,
    ) -> Result<()> {
        let first = self.step;
        let report = |sim: &mut Simulation, out: &mut dyn FnMut(&Simulation, &Progress) -> Result<()>| {
            let prog = sim.progress();
            out(sim, &prog)?;
            sim.min_dt_since_report = f64::INFINITY;
            Ok::<(), GsphError>(())
        };
        report(self, &mut output)?;
        for _ in 0..steps {
            self.step()?;
            let done = self.step - first;
            let due = output_every.is_some_and(|k| done.is_multiple_of(k));
            if due || done == steps {
                report(self, &mut output)?;
            }
        }
        Ok(())
    }
}

/// Build a ready-to-run simulation from a validated configuration.
pub fn setup(config: &SimConfig) -> Result<Simulation> {
    let materials = config
        .materials
        .iter()
        .map(build_material)
        .collect::<Result<Vec<_>>>()?;
    let mut defs = Vec::with_capacity(config.subdomains.len());
    for sd in &config.subdomains {
        defs.push(SubdomainDef {
            name: sd.name.clone(),
            rank: sd.rank,
            chart: build_chart(config, &sd.chart)?,
            region: sd.region.clone(),
            h: sd.h(),
            overlap: sd.overlap,
        });
    }

    let mut seeds = Vec::new();
    for l in &config.lattices {
        let k = config
            .subdomain_index(&l.subdomain)
            .ok_or_else(|| GsphError::Setup(format!("unknown subdomain '{}'", l.subdomain)))?;
        let m = config
            .material_index(&l.material)
            .ok_or_else(|| GsphError::Setup(format!("unknown material '{}'", l.material)))?;
        let spec = LatticeSpec {
            chart: &defs[k].chart,
            min: Vec3::from(l.min),
            max: Vec3::from(l.max),
            spacing: config.subdomains[k].spacing,
            region: &defs[k].region,
            exclude: &l.exclude,
            rho0: materials[m].elastic.rho0,
            material: m,
        };
        let first = seeds.len() as u64;
        seeds.extend(generate_lattice(&spec, first)?);
    }
    for f in &config.particle_files {
        let m = config
            .material_index(&f.material)
            .ok_or_else(|| GsphError::Setup(format!("unknown material '{}'", f.material)))?;
        seeds.extend(load_particle_csv(&config.resolve(&f.path), materials[m].elastic.rho0, m)?);
    }
    let mut ids: Vec<u64> = seeds.iter().map(|s| s.id).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(GsphError::Setup(format!("particle id {} is used twice", w[0])));
    }
    let mut particles = ParticleSet::from_seeds(&seeds);

    let mut constraints = Vec::new();
    for bc in &config.bcs {
        match bc {
            BcConfig::FixedVelocity {
                region,
                velocity,
                components,
            } => constraints.push(VelocityConstraint::from_region(
                &particles,
                region,
                Vec3::from(*velocity),
                *components,
            )),
            BcConfig::InitialVelocity {
                region,
                velocity,
                angular_velocity,
                center,
            } => {
                let omega = angular_velocity.map(Vec3::from).unwrap_or_else(Vec3::zeros);
                let c = Vec3::from(*center);
                for a in 0..particles.len() {
                    let x = particles.x_ref[a];
                    if region.contains(particles.id[a], &x) {
                        particles.v[a] = Vec3::from(*velocity) + omega.cross(&(x - c));
                    }
                }
            }
        }
    }

    let body_force = match &config.body_force {
        None => BodyForce::None,
        Some(BodyForceConfig::Uniform {
            acceleration,
            ramp_time,
        }) => BodyForce::Uniform {
            acceleration: Vec3::from(*acceleration),
            ramp_time: *ramp_time,
        },
        Some(BodyForceConfig::Radial {
            origin,
            axis,
            magnitude,
            ramp_time,
        }) => BodyForce::Radial {
            frame: CylinderFrame::new(Vec3::from(*origin), Vec3::from(*axis), None)?,
            magnitude: *magnitude,
            ramp_time: *ramp_time,
        },
    };

    let s = &config.solver;
    let options = SimOptions {
        dim: if s.planar {
            Dimensionality::Planar
        } else {
            Dimensionality::Full
        },
        momentum: MomentumOptions {
            viscosity: ViscosityParams {
                beta1: s.beta1,
                beta2: s.beta2,
            },
            correction: s.momentum_correction,
            symmetric_viscosity: s.symmetric_viscosity,
            paired_maps: s.paired_maps,
        },
        time_step: match config.integrator.dt {
            Some(dt) => TimeStep::Fixed(dt),
            None => TimeStep::Cfl(config.integrator.cfl_factor()),
        },
        constraints,
        body_force,
    };
    Simulation::new(particles, &defs, materials, options)
}

fn build_chart(config: &SimConfig, chart: &ChartConfig) -> Result<ChartFn> {
    match chart {
        ChartConfig::Identity => Ok(ChartFn::Identity),
        ChartConfig::Stretch { origin, scale } => ChartFn::stretch(Vec3::from(*origin), Vec3::from(*scale)),
        ChartConfig::Cylindrical {
            origin,
            axis,
            ref_dir,
            scale,
        } => ChartFn::cylindrical(
            Vec3::from(*origin),
            Vec3::from(*axis),
            ref_dir.map(Vec3::from),
            Vec3::from(*scale),
        ),
        ChartConfig::Table { path } => load_chart_table(&config.resolve(path)),
    }
}

fn build_material(m: &MaterialConfig) -> Result<Material> {
    let elastic = ElasticParams::new(m.e, m.nu, m.rho0)?;
    let jc = m.johnson_cook.as_ref().map(|j| JohnsonCookParams {
        a: j.a,
        b: j.b,
        c: j.c,
        n: j.n,
        m: j.m,
        eps0_dot: j.eps0_dot,
        t_r: j.t_r,
        t_m: j.t_m,
        cp: j.cp,
        chi: j.chi,
    });
    let missing = || GsphError::Setup(format!("material '{}' lacks Johnson-Cook constants", m.name));
    let law = match m.model {
        ModelKind::Elastic => MaterialLaw::Elastic,
        ModelKind::JohnsonCook => MaterialLaw::JohnsonCook(jc.ok_or_else(missing)?),
        ModelKind::JohnsonCookDamage => {
            let d = m.damage.as_ref().ok_or_else(missing)?;
            MaterialLaw::JohnsonCookDamage(
                jc.ok_or_else(missing)?,
                JCDamageParams {
                    d1: d.d1,
                    d2: d.d2,
                    d3: d.d3,
                    d4: d.d4,
                    d5: d.d5,
                },
            )
        }
    };
    Ok(Material {
        name: m.name.clone(),
        elastic,
        law,
        rankine: m.rankine.as_ref().map(|r| RankineParams { eps_max: r.eps_max }),
    })
}
