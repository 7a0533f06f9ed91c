//! Per-step particle snapshots in CSV and legacy VTK, plus the run index.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{GsphError, Result};
use crate::io::config::OutputFormat;
use crate::particles::ParticleSet;
use crate::tensor::{Mat3, Vec3};

pub const CSV_HEADER: &str =
    "id,subdomain,X,Y,Z,x,y,z,vx,vy,vz,rho,sxx,syy,szz,sxy,syz,sxz,J,eps_pl,D,broken_bonds";

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotRecord {
    pub id: u64,
    pub subdomain: usize,
    pub x_ref: Vec3,
    pub x: Vec3,
    pub v: Vec3,
    pub rho: f64,
    /// `[xx, yy, zz, xy, yz, xz]`.
    pub sigma: [f64; 6],
    pub j: f64,
    pub eps_pl: f64,
    pub damage: f64,
    pub broken_bonds: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: u64,
    pub time: f64,
    pub records: Vec<SnapshotRecord>,
}

fn voigt(s: &Mat3) -> [f64; 6] {
    [s[(0, 0)], s[(1, 1)], s[(2, 2)], s[(0, 1)], s[(1, 2)], s[(0, 2)]]
}

impl Snapshot {
    pub fn capture(p: &ParticleSet, step: u64, time: f64) -> Self {
        let records = (0..p.len())
            .map(|a| SnapshotRecord {
                id: p.id[a],
                subdomain: p.subdomain[a],
                x_ref: p.x_ref[a],
                x: p.x[a],
                v: p.v[a],
                rho: p.rho[a],
                sigma: voigt(&p.sigma[a]),
                j: p.j[a],
                eps_pl: p.plastic[a].eps_pl_bar,
                damage: p.plastic[a].d,
                broken_bonds: p.broken_bonds[a],
            })
            .collect();
        Self { step, time, records }
    }

    /// CSV text: header line, one row per particle, `\n` line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.records.len() * 300);
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let _ = write!(out, "{},{}", r.id, r.subdomain);
            let tail = [r.j, r.eps_pl, r.damage];
            let floats = r
                .x_ref
                .iter()
                .chain(r.x.iter())
                .chain(r.v.iter())
                .chain(std::iter::once(&r.rho))
                .chain(r.sigma.iter())
                .chain(tail.iter());
            for f in floats {
                let _ = write!(out, ",{f:e}");
            }
            let _ = writeln!(out, ",{}", r.broken_bonds);
        }
        out
    }

    /// Parse CSV text written by [`Snapshot::to_csv`].
    pub fn from_csv(text: &str, step: u64, time: f64) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some(CSV_HEADER) {
            return Err(GsphError::Setup("snapshot CSV header mismatch".into()));
        }
        let bad = |n: usize| GsphError::Setup(format!("malformed snapshot row {n}"));
        let mut records = Vec::new();
        for (n, line) in lines.enumerate() {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 22 {
                return Err(bad(n));
            }
            let f = |i: usize| cols[i].parse::<f64>().map_err(|_| bad(n));
            let v3 = |i: usize| -> Result<Vec3> { Ok(Vec3::new(f(i)?, f(i + 1)?, f(i + 2)?)) };
            records.push(SnapshotRecord {
                id: cols[0].parse().map_err(|_| bad(n))?,
                subdomain: cols[1].parse().map_err(|_| bad(n))?,
                x_ref: v3(2)?,
                x: v3(5)?,
                v: v3(8)?,
                rho: f(11)?,
                sigma: [f(12)?, f(13)?, f(14)?, f(15)?, f(16)?, f(17)?],
                j: f(18)?,
                eps_pl: f(19)?,
                damage: f(20)?,
                broken_bonds: cols[21].parse().map_err(|_| bad(n))?,
            });
        }
        Ok(Self { step, time, records })
    }

    /// Legacy ASCII VTK polydata with one vertex per particle.
    pub fn to_vtk(&self) -> String {
        let n = self.records.len();
        let mut out = String::with_capacity(n * 400);
        out.push_str("# vtk DataFile Version 3.0\n");
        let _ = writeln!(out, "gsph step {} time {:e}", self.step, self.time);
        out.push_str("ASCII\nDATASET POLYDATA\n");
        let _ = writeln!(out, "POINTS {n} double");
        for r in &self.records {
            let _ = writeln!(out, "{:e} {:e} {:e}", r.x.x, r.x.y, r.x.z);
        }
        let _ = writeln!(out, "VERTICES {n} {}", 2 * n);
        for i in 0..n {
            let _ = writeln!(out, "1 {i}");
        }
        let _ = writeln!(out, "POINT_DATA {n}");
        let scalar_int = |out: &mut String, name: &str, vals: &mut dyn Iterator<Item = u64>| {
            let _ = writeln!(out, "SCALARS {name} long 1\nLOOKUP_TABLE default");
            for v in vals {
                let _ = writeln!(out, "{v}");
            }
        };
        scalar_int(&mut out, "id", &mut self.records.iter().map(|r| r.id));
        scalar_int(&mut out, "subdomain", &mut self.records.iter().map(|r| r.subdomain as u64));
        scalar_int(&mut out, "broken_bonds", &mut self.records.iter().map(|r| r.broken_bonds as u64));
        let scalar = |out: &mut String, name: &str, vals: &mut dyn Iterator<Item = f64>| {
            let _ = writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default");
            for v in vals {
                let _ = writeln!(out, "{v:e}");
            }
        };
        scalar(&mut out, "rho", &mut self.records.iter().map(|r| r.rho));
        scalar(&mut out, "J", &mut self.records.iter().map(|r| r.j));
        scalar(&mut out, "eps_pl", &mut self.records.iter().map(|r| r.eps_pl));
        scalar(&mut out, "D", &mut self.records.iter().map(|r| r.damage));
        let vector = |out: &mut String, name: &str, vals: &mut dyn Iterator<Item = Vec3>| {
            let _ = writeln!(out, "VECTORS {name} double");
            for v in vals {
                let _ = writeln!(out, "{:e} {:e} {:e}", v.x, v.y, v.z);
            }
        };
        vector(&mut out, "velocity", &mut self.records.iter().map(|r| r.v));
        vector(&mut out, "reference_position", &mut self.records.iter().map(|r| r.x_ref));
        out.push_str("TENSORS stress double\n");
        for r in &self.records {
            let [xx, yy, zz, xy, yz, xz] = r.sigma;
            let _ = writeln!(out, "{xx:e} {xy:e} {xz:e}\n{xy:e} {yy:e} {yz:e}\n{xz:e} {yz:e} {zz:e}");
        }
        out
    }
}

/// Writes snapshot files and maintains `index.csv` in an output directory.
#[derive(Debug)]
pub struct SnapshotWriter {
    dir: PathBuf,
    format: OutputFormat,
    index: String,
}

impl SnapshotWriter {
    pub fn new(dir: &Path, format: OutputFormat) -> Result<Self> {
        if format != OutputFormat::None {
            fs::create_dir_all(dir).map_err(|e| GsphError::io(dir, e))?;
        }
        Ok(Self {
            dir: dir.to_path_buf(),
            format,
            index: "step,time,file\n".to_string(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Write one snapshot; returns the files created.
    pub fn write(&mut self, snap: &Snapshot) -> Result<Vec<PathBuf>> {
        let stem = format!("snapshot_{:08}", snap.step);
        let mut files = Vec::new();
        if matches!(self.format, OutputFormat::Csv | OutputFormat::Both) {
            files.push((format!("{stem}.csv"), snap.to_csv()));
        }
        if matches!(self.format, OutputFormat::Vtk | OutputFormat::Both) {
            files.push((format!("{stem}.vtk"), snap.to_vtk()));
        }
        let mut written = Vec::new();
        for (name, body) in files {
            let path = self.dir.join(&name);
            fs::write(&path, body).map_err(|e| GsphError::io(&path, e))?;
            let _ = writeln!(self.index, "{},{:e},{name}", snap.step, snap.time);
            written.push(path);
        }
        if !written.is_empty() {
            let path = self.dir.join("index.csv");
            fs::write(&path, &self.index).map_err(|e| GsphError::io(&path, e))?;
        }
        Ok(written)
    }
}
