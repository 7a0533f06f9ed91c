//! Small fixed-size linear-algebra helpers shared across the solver.

use nalgebra::{Matrix3, Vector3};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Double contraction `A : B = Σ A_ij B_ij`.
#[inline]
pub fn double_dot(a: &Mat3, b: &Mat3) -> f64 {
    a.component_mul(b).sum()
}

#[inline]
pub fn symmetric_part(a: &Mat3) -> Mat3 {
    (a + a.transpose()) * 0.5
}

#[inline]
pub fn skew_part(a: &Mat3) -> Mat3 {
    (a - a.transpose()) * 0.5
}

#[inline]
pub fn deviator(a: &Mat3) -> Mat3 {
    a - Mat3::identity() * (a.trace() / 3.0)
}

/// Von Mises equivalent stress `sqrt(3 J2)` with `J2 = S:S / 2`.
#[inline]
pub fn von_mises(sigma: &Mat3) -> f64 {
    let s = deviator(sigma);
    (1.5 * double_dot(&s, &s)).sqrt()
}

/// Ratio of largest to smallest singular value; `inf` for a singular matrix.
pub fn condition_number(a: &Mat3) -> f64 {
    let sv = a.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min <= 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Moore-Penrose pseudo-inverse, dropping singular values below `rel_tol * σ_max`.
pub fn pseudo_inverse(a: &Mat3, rel_tol: f64) -> Mat3 {
    let svd = a.svd(true, true);
    let (Some(u), Some(v_t)) = (svd.u, svd.v_t) else {
        return Mat3::zeros();
    };
    let max = svd.singular_values.max();
    if max <= 0.0 {
        return Mat3::zeros();
    }
    let mut inv_s = Mat3::zeros();
    for i in 0..3 {
        let s = svd.singular_values[i];
        if s > rel_tol * max {
            inv_s[(i, i)] = 1.0 / s;
        }
    }
    v_t.transpose() * inv_s * u.transpose()
}

#[inline]
pub fn is_finite_mat(a: &Mat3) -> bool {
    a.iter().all(|v| v.is_finite())
}

#[inline]
pub fn is_finite_vec(a: &Vec3) -> bool {
    a.iter().all(|v| v.is_finite())
}
