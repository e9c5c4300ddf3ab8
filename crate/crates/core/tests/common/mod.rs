//! Independent pinhole oracle: eye orientations are rebuilt from the
//! fixation point itself rather than from the library's azimuth formulas.

#![allow(dead_code)]

use nalgebra::{Matrix3, Vector3};

pub type V3 = Vector3<f64>;
pub type M3 = Matrix3<f64>;

pub const LEFT: V3 = V3::new(-0.5, 0.0, 0.0);
pub const RIGHT: V3 = V3::new(0.5, 0.0, 0.0);

pub fn rot_y(t: f64) -> M3 {
    let (s, c) = t.sin_cos();
    M3::new(c, 0.0, -s, 0.0, 1.0, 0.0, s, 0.0, c)
}

pub fn rot_x(t: f64) -> M3 {
    let (s, c) = t.sin_cos();
    M3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

pub fn skew(v: &V3) -> M3 {
    M3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Fixation point of the gaze `(alpha, beta, rho)`.
pub fn fixation(alpha: f64, beta: f64, rho: f64) -> V3 {
    rho * V3::new(
        beta.sin(),
        -alpha.sin() * beta.cos(),
        alpha.cos() * beta.cos(),
    )
}

/// Rotation of an eye at `centre` that fixates the gaze point: the elevation
/// brings the fixation point into the horizontal plane, then the azimuth is
/// read off directly.
pub fn eye_rotation(alpha: f64, beta: f64, rho: f64, centre: &V3) -> M3 {
    let plane = rot_x(-alpha);
    let f = plane * (fixation(alpha, beta, rho) - centre);
    rot_y(f.x.atan2(f.z)) * plane
}

/// Eye-frame coordinates `R (q - c)`.
pub fn eye_frame(alpha: f64, beta: f64, rho: f64, centre: &V3, q: &V3) -> V3 {
    eye_rotation(alpha, beta, rho, centre) * (q - centre)
}

/// Inhomogeneous pinhole image.
pub fn project(alpha: f64, beta: f64, rho: f64, centre: &V3, q: &V3) -> (f64, f64, f64) {
    let p = eye_frame(alpha, beta, rho, centre, q);
    (p.x / p.z, p.y / p.z, p.z)
}

/// Scene point at plane depth `s` on the Cyclopean ray `(x, y, 1)`.
pub fn scene_point(alpha: f64, beta: f64, rho: f64, x: f64, y: f64, s: f64) -> V3 {
    let rc = eye_rotation(alpha, beta, rho, &V3::zeros());
    (rho + s) * rc.transpose() * V3::new(x, y, 1.0)
}

/// Largest elementwise difference after scaling both to unit Frobenius
/// norm, minimised over the sign.
pub fn scaled_difference(a: &M3, b: &M3) -> f64 {
    let (a, b) = (a / a.norm(), b / b.norm());
    (a - b).amax().min((a + b).amax())
}

/// Angle between two homogeneous vectors taken as projective points.
pub fn projective_gap(a: &V3, b: &V3) -> f64 {
    a.normalize().cross(&b.normalize()).norm()
}
