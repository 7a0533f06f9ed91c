//! TOML run description: schema, loading and semantic validation.
//!
//! Parsing rejects unknown keys. Semantic checks run afterwards and report
//! every problem found, each tagged with its key path (`material[0].E`).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::domain::Region;
use crate::error::{GsphError, Result, ValidationIssue};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    /// One-particle-thick slab with normal along z (plane strain).
    #[serde(default)]
    pub planar: bool,
    #[serde(default = "one")]
    pub beta1: f64,
    #[serde(default = "one")]
    pub beta2: f64,
    /// Apply CSPM-corrected kernel gradients in the momentum equation.
    #[serde(default = "yes")]
    pub momentum_correction: bool,
    /// Map pair viscosity with the average of both particles' `J F⁻¹`.
    #[serde(default)]
    pub symmetric_viscosity: bool,
    /// Pair each stress with its own particle's corrected gradient.
    #[serde(default)]
    pub paired_maps: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            planar: false,
            beta1: 1.0,
            beta2: 1.0,
            momentum_correction: true,
            symmetric_viscosity: false,
            paired_maps: false,
        }
    }
}

/// Time stepping: either a fixed `dt` or a CFL factor (default 0.3).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cfl: Option<f64>,
    pub steps: u64,
    /// Steps between snapshots; when absent only the first and last states are written.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_every: Option<u64>,
}

impl IntegratorConfig {
    pub const DEFAULT_CFL: f64 = 0.3;

    pub fn cfl_factor(&self) -> f64 {
        self.cfl.unwrap_or(Self::DEFAULT_CFL)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Vtk,
    Both,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_output_dir")]
    pub dir: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_output_dir(),
            format: OutputFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Elastic,
    JohnsonCook,
    JohnsonCookDamage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JohnsonCookConfig {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub n: f64,
    pub m: f64,
    #[serde(default = "one")]
    pub eps0_dot: f64,
    #[serde(rename = "T_r", default = "room_temperature")]
    pub t_r: f64,
    #[serde(rename = "T_m")]
    pub t_m: f64,
    #[serde(rename = "Cp")]
    pub cp: f64,
    #[serde(default = "taylor_quinney")]
    pub chi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DamageConfig {
    #[serde(rename = "D1")]
    pub d1: f64,
    #[serde(rename = "D2")]
    pub d2: f64,
    #[serde(rename = "D3")]
    pub d3: f64,
    #[serde(rename = "D4")]
    pub d4: f64,
    #[serde(rename = "D5")]
    pub d5: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankineConfig {
    #[serde(default = "default_eps_max")]
    pub eps_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialConfig {
    pub name: String,
    pub model: ModelKind,
    #[serde(rename = "E")]
    pub e: f64,
    pub nu: f64,
    pub rho0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub johnson_cook: Option<JohnsonCookConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub damage: Option<DamageConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rankine: Option<RankineConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChartConfig {
    Identity,
    Stretch {
        #[serde(default)]
        origin: [f64; 3],
        scale: [f64; 3],
    },
    Cylindrical {
        #[serde(default)]
        origin: [f64; 3],
        #[serde(default = "z_axis")]
        axis: [f64; 3],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ref_dir: Option<[f64; 3]>,
        #[serde(default = "unit_scale")]
        scale: [f64; 3],
    },
    /// CSV of `id,theta1,theta2,theta3`.
    Table { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubdomainConfig {
    pub name: String,
    pub rank: i64,
    /// Generalized lattice spacing Δθ.
    pub spacing: f64,
    /// Smoothing length as a multiple of `spacing`.
    #[serde(default = "default_h_ratio")]
    pub h_ratio: f64,
    #[serde(default)]
    pub overlap: f64,
    pub chart: ChartConfig,
    pub region: Region,
}

impl SubdomainConfig {
    pub fn h(&self) -> f64 {
        self.h_ratio * self.spacing
    }
}

/// Particles uniform in a subdomain's generalized coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub subdomain: String,
    pub material: String,
    /// Generalized-coordinate box.
    pub min: [f64; 3],
    pub max: [f64; 3],
    /// Physical regions left empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub exclude: Vec<Region>,
}

/// Particles read from a CSV of `id,X,Y,Z,volume`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleFileConfig {
    pub path: PathBuf,
    pub material: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BcConfig {
    /// Prescribe the selected velocity components for all time.
    FixedVelocity {
        region: Region,
        velocity: [f64; 3],
        #[serde(default = "all_components")]
        components: [bool; 3],
    },
    /// Initial velocity `v + ω × (X − center)`.
    InitialVelocity {
        region: Region,
        #[serde(default)]
        velocity: [f64; 3],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        angular_velocity: Option<[f64; 3]>,
        #[serde(default)]
        center: [f64; 3],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodyForceConfig {
    Uniform {
        acceleration: [f64; 3],
        #[serde(default)]
        ramp_time: f64,
    },
    /// Outward acceleration of given magnitude, normal to `axis` through `origin`.
    Radial {
        #[serde(default)]
        origin: [f64; 3],
        #[serde(default = "z_axis")]
        axis: [f64; 3],
        magnitude: f64,
        #[serde(default)]
        ramp_time: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default)]
    pub solver: SolverConfig,
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, rename = "material")]
    pub materials: Vec<MaterialConfig>,
    #[serde(default, rename = "subdomain")]
    pub subdomains: Vec<SubdomainConfig>,
    #[serde(default, rename = "lattice", skip_serializing_if = "Vec::is_empty")]
    pub lattices: Vec<LatticeConfig>,
    #[serde(default, rename = "particles", skip_serializing_if = "Vec::is_empty")]
    pub particle_files: Vec<ParticleFileConfig>,
    #[serde(default, rename = "bc", skip_serializing_if = "Vec::is_empty")]
    pub bcs: Vec<BcConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body_force: Option<BodyForceConfig>,
    /// Directory against which relative paths are resolved.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn one() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}
fn room_temperature() -> f64 {
    293.15
}
fn taylor_quinney() -> f64 {
    0.9
}
fn default_eps_max() -> f64 {
    0.03
}
fn default_h_ratio() -> f64 {
    1.2
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("output")
}
fn z_axis() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}
fn unit_scale() -> [f64; 3] {
    [1.0, 1.0, 1.0]
}
fn all_components() -> [bool; 3] {
    [true; 3]
}

impl SimConfig {
    /// Parse and validate TOML text. `base_dir` anchors relative paths.
    pub fn from_toml_str(text: &str, origin: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: SimConfig = toml::from_str(text).map_err(|e| {
            let (line, column) = e
                .span()
                .map(|s| line_col(text, s.start))
                .unwrap_or((0, 0));
            GsphError::Parse {
                path: origin.to_string(),
                line,
                column,
                message: e.message().to_string(),
            }
        })?;
        cfg.base_dir = base_dir.to_path_buf();
        let issues = cfg.validate();
        if issues.is_empty() {
            Ok(cfg)
        } else {
            Err(GsphError::Validation(issues))
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("configuration is always representable in TOML")
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn material_index(&self, name: &str) -> Option<usize> {
        self.materials.iter().position(|m| m.name == name)
    }

    pub fn subdomain_index(&self, name: &str) -> Option<usize> {
        self.subdomains.iter().position(|s| s.name == name)
    }

    /// Every semantic problem in the configuration.
    pub fn validate(&self) -> Vec<ValidationIssue> {
        let mut v = Vec::new();
        let mut issue = |path: String, msg: &str| v.push(ValidationIssue::new(path, msg));

        let s = &self.solver;
        if !(s.beta1 >= 0.0 && s.beta1.is_finite()) {
            issue("solver.beta1".into(), "must be a finite non-negative number");
        }
        if !(s.beta2 >= 0.0 && s.beta2.is_finite()) {
            issue("solver.beta2".into(), "must be a finite non-negative number");
        }

        let it = &self.integrator;
        match (it.dt, it.cfl) {
            (Some(_), Some(_)) => issue("integrator".into(), "give either dt or cfl, not both"),
            (Some(dt), None) if !(dt > 0.0 && dt.is_finite()) => {
                issue("integrator.dt".into(), "must be positive")
            }
            (None, Some(c)) if !(c > 0.0 && c <= 1.0) => issue("integrator.cfl".into(), "must lie in (0, 1]"),
            _ => {}
        }
        if it.output_every == Some(0) {
            issue("integrator.output_every".into(), "must be at least 1");
        }

        if self.materials.is_empty() {
            issue("material".into(), "at least one [[material]] block is required");
        }
        for (i, m) in self.materials.iter().enumerate() {
            let p = |k: &str| format!("material[{i}].{k}");
            if self.materials[..i].iter().any(|o| o.name == m.name) {
                issue(p("name"), "duplicate material name");
            }
            if !(m.e > 0.0 && m.e.is_finite()) {
                issue(p("E"), "Young's modulus must be positive");
            }
            if !(m.nu > 0.0 && m.nu < 0.5) {
                issue(p("nu"), "Poisson ratio must lie in (0, 0.5)");
            }
            if !(m.rho0 > 0.0 && m.rho0.is_finite()) {
                issue(p("rho0"), "reference density must be positive");
            }
            let needs_jc = m.model != ModelKind::Elastic;
            match (&m.johnson_cook, needs_jc) {
                (None, true) => issue(p("johnson_cook"), "required by the selected model"),
                (Some(_), false) => issue(p("johnson_cook"), "only valid for Johnson-Cook models"),
                (Some(jc), true) => {
                    if !(jc.a >= 0.0 && jc.b >= 0.0) {
                        issue(p("johnson_cook.A"), "A and B must be non-negative");
                    }
                    if !(jc.eps0_dot > 0.0) {
                        issue(p("johnson_cook.eps0_dot"), "must be positive");
                    }
                    if !(jc.t_m > jc.t_r) {
                        issue(p("johnson_cook.T_m"), "melting temperature must exceed T_r");
                    }
                    if !(jc.cp > 0.0) {
                        issue(p("johnson_cook.Cp"), "must be positive");
                    }
                    if !(0.0..=1.0).contains(&jc.chi) {
                        issue(p("johnson_cook.chi"), "must lie in [0, 1]");
                    }
                }
                (None, false) => {}
            }
            let needs_damage = m.model == ModelKind::JohnsonCookDamage;
            match (&m.damage, needs_damage) {
                (None, true) => issue(p("damage"), "required by johnson_cook_damage"),
                (Some(_), false) => issue(p("damage"), "only valid for johnson_cook_damage"),
                (Some(d), true) => {
                    if [d.d1, d.d2, d.d3, d.d4, d.d5].iter().any(|x| !x.is_finite()) {
                        issue(p("damage"), "constants must be finite");
                    }
                }
                (None, false) => {}
            }
            if let Some(r) = &m.rankine {
                if !(r.eps_max > 0.0) {
                    issue(p("rankine.eps_max"), "must be positive");
                }
            }
        }

        if self.subdomains.is_empty() {
            issue("subdomain".into(), "at least one [[subdomain]] block is required");
        }
        for (i, sd) in self.subdomains.iter().enumerate() {
            let p = |k: &str| format!("subdomain[{i}].{k}");
            if self.subdomains[..i].iter().any(|o| o.name == sd.name) {
                issue(p("name"), "duplicate subdomain name");
            }
            if self.subdomains[..i].iter().any(|o| o.rank == sd.rank) {
                issue(p("rank"), "precedence ranks must be distinct");
            }
            if !(sd.spacing > 0.0 && sd.spacing.is_finite()) {
                issue(p("spacing"), "must be positive");
            }
            if !(sd.h_ratio > 0.0) {
                issue(p("h_ratio"), "must be positive");
            }
            if sd.overlap < 0.0 {
                issue(p("overlap"), "must be non-negative");
            } else if sd.overlap > 0.0 && sd.overlap < 2.0 * sd.h() {
                issue(p("overlap"), "overlap band must be at least the kernel support 2h");
            }
            match &sd.chart {
                ChartConfig::Stretch { scale, .. } | ChartConfig::Cylindrical { scale, .. } => {
                    if scale.iter().any(|s| !(*s > 0.0)) {
                        issue(p("chart.scale"), "scale factors must be positive");
                    }
                }
                _ => {}
            }
            if let ChartConfig::Cylindrical { axis, .. } = &sd.chart {
                if axis.iter().all(|a| *a == 0.0) {
                    issue(p("chart.axis"), "axis must be non-zero");
                }
            }
            check_region(&sd.region, &p("region"), &mut v_push(&mut issue));
        }
        for (i, a) in self.subdomains.iter().enumerate() {
            for b in self.subdomains.iter().skip(i + 1) {
                let (hi, lo) = if a.rank < b.rank { (a, b) } else { (b, a) };
                if hi.overlap == 0.0 && regions_intersect(&hi.region, &lo.region) {
                    issue(
                        format!("subdomain[{}].overlap", self.subdomain_index(&hi.name).unwrap_or(i)),
                        &format!(
                            "region overlaps subdomain '{}' but no overlap band is declared",
                            lo.name
                        ),
                    );
                }
            }
        }

        if self.lattices.is_empty() && self.particle_files.is_empty() {
            issue("lattice".into(), "no particle source: add [[lattice]] or [[particles]] blocks");
        }
        for (i, l) in self.lattices.iter().enumerate() {
            let p = |k: &str| format!("lattice[{i}].{k}");
            if self.material_index(&l.material).is_none() {
                issue(p("material"), "unknown material");
            }
            match self.subdomain_index(&l.subdomain) {
                None => issue(p("subdomain"), "unknown subdomain"),
                Some(k) => {
                    if matches!(self.subdomains[k].chart, ChartConfig::Table { .. }) {
                        issue(p("subdomain"), "table charts have no inverse; use a [[particles]] file");
                    }
                }
            }
            if (0..3).any(|d| !(l.max[d] > l.min[d])) {
                issue(p("max"), "box must have positive extent along every axis");
            }
            for (j, r) in l.exclude.iter().enumerate() {
                check_region(r, &format!("lattice[{i}].exclude[{j}]"), &mut v_push(&mut issue));
            }
        }
        for (i, f) in self.particle_files.iter().enumerate() {
            if self.material_index(&f.material).is_none() {
                issue(format!("particles[{i}].material"), "unknown material");
            }
        }

        for (i, bc) in self.bcs.iter().enumerate() {
            let (region, vals): (&Region, Vec<f64>) = match bc {
                BcConfig::FixedVelocity { region, velocity, .. } => (region, velocity.to_vec()),
                BcConfig::InitialVelocity {
                    region,
                    velocity,
                    angular_velocity,
                    center,
                } => (
                    region,
                    velocity
                        .iter()
                        .chain(angular_velocity.iter().flatten())
                        .chain(center)
                        .copied()
                        .collect(),
                ),
            };
            if vals.iter().any(|x| !x.is_finite()) {
                issue(format!("bc[{i}]"), "velocities must be finite");
            }
            check_region(region, &format!("bc[{i}].region"), &mut v_push(&mut issue));
        }
        if let Some(bf) = &self.body_force {
            let ramp = match bf {
                BodyForceConfig::Uniform { ramp_time, .. } | BodyForceConfig::Radial { ramp_time, .. } => *ramp_time,
            };
            if !(ramp >= 0.0) {
                issue("body_force.ramp_time".into(), "must be non-negative");
            }
        }
        v
    }
}

/// Adapter so region checks can report through the same closure.
fn v_push<'a, F: FnMut(String, &str)>(f: &'a mut F) -> impl FnMut(String, String) + 'a {
    move |p, m| f(p, &m)
}

fn check_region(r: &Region, path: &str, issue: &mut impl FnMut(String, String)) {
    match r {
        Region::Box { min, max } => {
            if (0..3).any(|d| !(max[d] >= min[d])) {
                issue(format!("{path}.max"), "box max must not be below min".into());
            }
        }
        Region::Annulus { r, axis, .. } => {
            if !(r[0] >= 0.0 && r[1] > r[0]) {
                issue(format!("{path}.r"), "radius range must satisfy 0 <= r0 < r1".into());
            }
            if axis.iter().all(|a| *a == 0.0) {
                issue(format!("{path}.axis"), "axis must be non-zero".into());
            }
        }
        _ => {}
    }
}

/// Conservative static overlap test; cases it cannot decide are left to setup.
fn regions_intersect(a: &Region, b: &Region) -> bool {
    match (a, b) {
        (Region::All, _) | (_, Region::All) => true,
        (Region::Box { min: a0, max: a1 }, Region::Box { min: b0, max: b1 }) => {
            (0..3).all(|d| a0[d].max(b0[d]) < a1[d].min(b1[d]))
        }
        _ => false,
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map(|i| i + 1).unwrap_or(0) + 1;
    (line, column)
}

/// Read, parse and validate a configuration file.
pub fn load_config(path: &Path) -> Result<SimConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| GsphError::io(path, e))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    SimConfig::from_toml_str(&text, &path.display().to_string(), &base)
}
