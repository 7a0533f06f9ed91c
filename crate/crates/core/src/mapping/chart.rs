//! Analytic and tabulated maps from reference physical positions to generalized coordinates.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{GsphError, Result};
use crate::tensor::{Mat3, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartKind {
    Identity,
    Stretch,
    Cylindrical,
    Table,
}

/// Orthonormal frame used by the cylindrical chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderFrame {
    pub origin: Vec3,
    /// Unit vector from which the angle is measured.
    pub e1: Vec3,
    pub e2: Vec3,
    pub axis: Vec3,
}

impl CylinderFrame {
    pub fn new(origin: Vec3, axis: Vec3, ref_dir: Option<Vec3>) -> Result<Self> {
        let axis_norm = axis.norm();
        if !(axis_norm > 0.0 && axis_norm.is_finite()) {
            return Err(GsphError::Setup("cylinder axis must be a nonzero vector".into()));
        }
        let axis = axis / axis_norm;
        let guess = ref_dir.unwrap_or_else(|| {
            if axis.x.abs() < 0.9 {
                Vec3::x()
            } else {
                Vec3::y()
            }
        });
        let e1 = guess - axis * guess.dot(&axis);
        let n = e1.norm();
        if n < 1e-12 {
            return Err(GsphError::Setup(
                "cylinder reference direction is parallel to the axis".into(),
            ));
        }
        let e1 = e1 / n;
        let e2 = axis.cross(&e1);
        Ok(Self {
            origin,
            e1,
            e2,
            axis,
        })
    }

    /// `(r, φ, z)` of a physical point; φ in `(-π, π]`.
    pub fn polar(&self, x: &Vec3) -> (f64, f64, f64) {
        let d = x - self.origin;
        let a = d.dot(&self.e1);
        let b = d.dot(&self.e2);
        let z = d.dot(&self.axis);
        ((a * a + b * b).sqrt(), b.atan2(a), z)
    }

    pub fn point(&self, r: f64, phi: f64, z: f64) -> Vec3 {
        self.origin + self.e1 * (r * phi.cos()) + self.e2 * (r * phi.sin()) + self.axis * z
    }

    pub fn radial(&self, phi: f64) -> Vec3 {
        self.e1 * phi.cos() + self.e2 * phi.sin()
    }

    pub fn tangential(&self, phi: f64) -> Vec3 {
        -self.e1 * phi.sin() + self.e2 * phi.cos()
    }
}

/// A generalized coordinate chart `θ(X)` for one subdomain.
#[derive(Debug, Clone)]
pub enum ChartFn {
    /// θ = X.
    Identity,
    /// θ_i = scale_i (X_i - origin_i).
    Stretch { origin: Vec3, scale: Vec3 },
    /// θ = (s_r r, s_φ φ, s_z z) about an arbitrary axis.
    Cylindrical { frame: CylinderFrame, scale: Vec3 },
    /// Generalized coordinates listed per particle id.
    Table(Arc<HashMap<u64, Vec3>>),
}

impl ChartFn {
    pub fn kind(&self) -> ChartKind {
        match self {
            ChartFn::Identity => ChartKind::Identity,
            ChartFn::Stretch { .. } => ChartKind::Stretch,
            ChartFn::Cylindrical { .. } => ChartKind::Cylindrical,
            ChartFn::Table(_) => ChartKind::Table,
        }
    }

    pub fn cylindrical(origin: Vec3, axis: Vec3, ref_dir: Option<Vec3>, scale: Vec3) -> Result<Self> {
        check_scale(&scale)?;
        Ok(ChartFn::Cylindrical {
            frame: CylinderFrame::new(origin, axis, ref_dir)?,
            scale,
        })
    }

    pub fn stretch(origin: Vec3, scale: Vec3) -> Result<Self> {
        check_scale(&scale)?;
        Ok(ChartFn::Stretch { origin, scale })
    }

    /// Map a reference position (belonging to particle `id`) into generalized coordinates.
    pub fn forward(&self, id: u64, x: &Vec3) -> Result<Vec3> {
        match self {
            ChartFn::Identity => Ok(*x),
            ChartFn::Stretch { origin, scale } => Ok((x - origin).component_mul(scale)),
            ChartFn::Cylindrical { frame, scale } => {
                let (r, phi, z) = frame.polar(x);
                if r <= 0.0 {
                    return Err(GsphError::Setup(format!(
                        "particle {id} lies on the cylinder axis, where the chart is singular"
                    )));
                }
                Ok(Vec3::new(r, phi, z).component_mul(scale))
            }
            ChartFn::Table(table) => table.get(&id).copied().ok_or_else(|| {
                GsphError::Setup(format!(
                    "particle {id} has no entry in the generalized-coordinate table"
                ))
            }),
        }
    }

    /// Physical position of a generalized point; `None` where the chart has no analytic inverse.
    pub fn inverse(&self, theta: &Vec3) -> Option<Vec3> {
        match self {
            ChartFn::Identity => Some(*theta),
            ChartFn::Stretch { origin, scale } => Some(origin + theta.component_div(scale)),
            ChartFn::Cylindrical { frame, scale } => {
                let p = theta.component_div(scale);
                if p.x <= 0.0 || p.y.abs() > PI {
                    return None;
                }
                Some(frame.point(p.x, p.y, p.z))
            }
            ChartFn::Table(_) => None,
        }
    }

    /// Analytic `∂X_α/∂θ^i` (row α, column i) at a generalized point.
    pub fn jacobian(&self, theta: &Vec3) -> Option<Mat3> {
        match self {
            ChartFn::Identity => Some(Mat3::identity()),
            ChartFn::Stretch { scale, .. } => Some(Mat3::from_diagonal(&scale.map(|s| 1.0 / s))),
            ChartFn::Cylindrical { frame, scale } => {
                let p = theta.component_div(scale);
                if p.x <= 0.0 {
                    return None;
                }
                let c0 = frame.radial(p.y) / scale.x;
                let c1 = frame.tangential(p.y) * (p.x / scale.y);
                let c2 = frame.axis / scale.z;
                Some(Mat3::from_columns(&[c0, c1, c2]))
            }
            ChartFn::Table(_) => None,
        }
    }
}

fn check_scale(scale: &Vec3) -> Result<()> {
    if scale.iter().all(|s| s.is_finite() && *s > 0.0) {
        Ok(())
    } else {
        Err(GsphError::Setup(format!(
            "chart scale factors must be positive, got {:?}",
            scale.as_slice()
        )))
    }
}
