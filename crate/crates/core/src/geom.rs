//! Homogeneous image points and lines, 3-vectors, rotations and the
//! cross-product matrix.
//!
//! Scene coordinates are measured in units of the inter-ocular baseline.
//! Image points are homogeneous 3-vectors `(mu x, mu y, mu)`; two triples that
//! differ by a nonzero scale represent the same point.

use std::ops::Mul;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Relative tolerance for projective equality of points, lines and matrices.
pub const PROJECTIVE_TOL: f64 = 1e-9;

/// Below this, a homogeneous third component (or a cross product norm relative
/// to its factors) is treated as zero.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// The antisymmetric matrix `(w x)` with `(w x) p = w x p`.
pub fn cross_matrix(w: &Vec3) -> Mat3 {
    Mat3::new(
        0.0, -w.z, w.y, //
        w.z, 0.0, -w.x, //
        -w.y, w.x, 0.0,
    )
}

/// Divides `v` by its largest-magnitude component (keeping that component's
/// sign), so the result has a `+1` entry and all others in `[-1, 1]`.
fn scale_by_dominant(v: &Vec3) -> Option<(usize, Vec3)> {
    let k = v.iamax();
    let pivot = v[k];
    if pivot == 0.0 || !pivot.is_finite() {
        return None;
    }
    Some((k, v / pivot))
}

fn projectively_equal(a: &Vec3, b: &Vec3, tol: f64) -> bool {
    let Some((k, a_hat)) = scale_by_dominant(a) else {
        return false;
    };
    let pivot = b[k];
    if pivot.abs() <= DEGENERACY_TOL * b.amax() || pivot == 0.0 {
        return false;
    }
    let b_hat = b / pivot;
    (a_hat - b_hat).amax() <= tol
}

/// A point of the projective image plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct HomogPoint2(Vec3);

impl HomogPoint2 {
    pub fn new(x: f64, y: f64, w: f64) -> Result<Self> {
        Self::from_vec(Vec3::new(x, y, w))
    }

    pub fn from_vec(v: Vec3) -> Result<Self> {
        if !v.iter().all(|c| c.is_finite()) {
            return Err(Error::DegenerateInput("non-finite homogeneous point"));
        }
        if v.amax() == 0.0 {
            return Err(Error::DegenerateInput("zero homogeneous point"));
        }
        Ok(Self(v))
    }

    /// The finite point `(x, y, 1)`.
    pub fn from_inhomogeneous(x: f64, y: f64) -> Self {
        Self(Vec3::new(x, y, 1.0))
    }

    pub fn coords(&self) -> &Vec3 {
        &self.0
    }

    pub fn is_at_infinity(&self) -> bool {
        self.0.z.abs() <= DEGENERACY_TOL * self.0.amax()
    }

    /// Rescales so the third component is exactly 1.
    pub fn normalize(&self) -> Result<Self> {
        if self.is_at_infinity() {
            return Err(Error::PointAtInfinity);
        }
        let w = self.0.z;
        Ok(Self(Vec3::new(self.0.x / w, self.0.y / w, 1.0)))
    }

    /// Inhomogeneous image coordinates `(x, y)`.
    pub fn inhomogeneous(&self) -> Result<(f64, f64)> {
        let n = self.normalize()?;
        Ok((n.0.x, n.0.y))
    }

    pub fn projectively_eq(&self, other: &Self, tol: f64) -> bool {
        projectively_equal(&self.0, &other.0, tol)
    }
}

impl TryFrom<[f64; 3]> for HomogPoint2 {
    type Error = Error;

    fn try_from(v: [f64; 3]) -> Result<Self> {
        Self::from_vec(Vec3::from(v))
    }
}

impl From<HomogPoint2> for [f64; 3] {
    fn from(p: HomogPoint2) -> Self {
        p.0.into()
    }
}

/// A line of the projective image plane; `q` lies on `n` iff `n . q = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogLine2(Vec3);

impl HomogLine2 {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::from_vec(Vec3::new(a, b, c))
    }

    pub fn from_vec(v: Vec3) -> Result<Self> {
        if !v.iter().all(|c| c.is_finite()) {
            return Err(Error::DegenerateInput("non-finite homogeneous line"));
        }
        if v.amax() == 0.0 {
            return Err(Error::DegenerateInput("zero homogeneous line"));
        }
        Ok(Self(v))
    }

    pub fn coords(&self) -> &Vec3 {
        &self.0
    }

    /// The raw incidence value `n . q`.
    pub fn incidence(&self, q: &HomogPoint2) -> f64 {
        self.0.dot(&q.0)
    }

    /// Scale-free incidence, `|n . q| / (|n| |q|)`.
    pub fn normalized_incidence(&self, q: &HomogPoint2) -> f64 {
        self.incidence(q).abs() / (self.0.norm() * q.0.norm())
    }

    pub fn contains(&self, q: &HomogPoint2, tol: f64) -> bool {
        self.normalized_incidence(q) <= tol
    }

    pub fn projectively_eq(&self, other: &Self, tol: f64) -> bool {
        projectively_equal(&self.0, &other.0, tol)
    }
}

/// The line through two distinct points.
pub fn join(p: &HomogPoint2, q: &HomogPoint2) -> Result<HomogLine2> {
    let n = p.0.cross(&q.0);
    if n.norm() <= DEGENERACY_TOL * p.0.norm() * q.0.norm() {
        return Err(Error::DegenerateInput("join of coincident points"));
    }
    Ok(HomogLine2(n))
}

/// The intersection of two distinct lines. Parallel lines meet at a point at
/// infinity (third component zero).
pub fn meet(m: &HomogLine2, n: &HomogLine2) -> Result<HomogPoint2> {
    let q = m.0.cross(&n.0);
    if q.norm() <= DEGENERACY_TOL * m.0.norm() * n.0.norm() {
        return Err(Error::DegenerateInput("meet of identical lines"));
    }
    Ok(HomogPoint2(q))
}

/// A proper rotation of scene coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rot3(Mat3);

impl Rot3 {
    pub fn identity() -> Self {
        Self(Mat3::identity())
    }

    /// Eye rotation for azimuth `angle`, laid out as
    /// `(cos, 0, -sin; 0, 1, 0; sin, 0, cos)`.
    ///
    /// With this layout a point straight ahead of the rotated eye, at azimuth
    /// `angle` in the `x,z` plane, maps to the optical axis `(0, 0, 1)`.
    pub fn rot_y(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self(Mat3::new(
            c, 0.0, -s, //
            0.0, 1.0, 0.0, //
            s, 0.0, c,
        ))
    }

    /// Rotation about the baseline axis, `(1, 0, 0; 0, cos, -sin; 0, sin, cos)`.
    pub fn rot_x(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self(Mat3::new(
            1.0, 0.0, 0.0, //
            0.0, c, -s, //
            0.0, s, c,
        ))
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        self.0 * v
    }

    /// Checks `R^T R = I` and `det R = +1` within `tol`.
    pub fn is_proper_rotation(&self, tol: f64) -> bool {
        let gram = self.0.transpose() * self.0;
        (gram - Mat3::identity()).amax() <= tol && (self.0.determinant() - 1.0).abs() <= tol
    }
}

impl Mul for Rot3 {
    type Output = Rot3;

    fn mul(self, rhs: Rot3) -> Rot3 {
        Rot3(self.0 * rhs.0)
    }
}

/// Scales a homogeneous matrix so its largest-magnitude entry is 1 in
/// magnitude, with the sign chosen to make the first nonzero entry (row-major)
/// positive.
pub fn normalize_homogeneous_matrix(m: &Mat3) -> Option<Mat3> {
    let scale = m.amax();
    if scale == 0.0 || !scale.is_finite() {
        return None;
    }
    let floor = PROJECTIVE_TOL * scale;
    let first = (0..3)
        .flat_map(|r| (0..3).map(move |c| (r, c)))
        .map(|(r, c)| m[(r, c)])
        .find(|v| v.abs() > floor)?;
    Some(m * (first.signum() / scale))
}

/// Equality of two homogeneous matrices up to a nonzero scale of either sign.
///
/// Both are scaled to unit max-magnitude and compared elementwise against
/// `b` and `-b`, so near-zero entries never decide the sign.
pub fn matrices_proportional(a: &Mat3, b: &Mat3, tol: f64) -> bool {
    let (sa, sb) = (a.amax(), b.amax());
    if sa == 0.0 || sb == 0.0 || !sa.is_finite() || !sb.is_finite() {
        return false;
    }
    let (a, b) = (a / sa, b / sb);
    (a - b).amax() <= tol || (a + b).amax() <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn pt(x: f64, y: f64, w: f64) -> HomogPoint2 {
        HomogPoint2::new(x, y, w).unwrap()
    }

    fn line(a: f64, b: f64, c: f64) -> HomogLine2 {
        HomogLine2::new(a, b, c).unwrap()
    }

    #[test]
    fn cross_matrix_zero_and_unit_x() {
        assert_eq!(cross_matrix(&Vec3::zeros()), Mat3::zeros());
        let m = cross_matrix(&Vec3::new(1.0, 0.0, 0.0));
        let expected = Mat3::new(0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0);
        assert_eq!(m, expected);
        assert_eq!(m.transpose(), -m);
    }

    #[test]
    fn join_x_axis() {
        let n = join(&pt(0.0, 0.0, 1.0), &pt(1.0, 0.0, 1.0)).unwrap();
        assert!(n.projectively_eq(&line(0.0, 1.0, 0.0), PROJECTIVE_TOL));
    }

    #[test]
    fn join_is_incident_and_antisymmetric() {
        let p = pt(1.0, 1.0, 1.0);
        let q = pt(2.0, 2.0, 1.0);
        let n = join(&p, &q).unwrap();
        assert_eq!(n.incidence(&p), 0.0);
        assert_eq!(n.incidence(&q), 0.0);
        let swapped = join(&q, &p).unwrap();
        assert!(n.projectively_eq(&swapped, PROJECTIVE_TOL));
        assert_eq!(*swapped.coords(), -*n.coords());
    }

    #[test]
    fn join_coincident_points_is_an_error() {
        let p = pt(1.0, 2.0, 1.0);
        assert!(matches!(
            join(&p, &pt(2.0, 4.0, 2.0)),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn meet_axes_at_origin() {
        let q = meet(&line(1.0, 0.0, 0.0), &line(0.0, 1.0, 0.0)).unwrap();
        assert!(q.projectively_eq(&pt(0.0, 0.0, 1.0), PROJECTIVE_TOL));
    }

    #[test]
    fn meet_round_trips_through_join() {
        let p = pt(3.0, -2.0, 1.0);
        let m = join(&p, &pt(0.0, 1.0, 1.0)).unwrap();
        let n = join(&p, &pt(-4.0, 0.5, 1.0)).unwrap();
        assert!(meet(&m, &n).unwrap().projectively_eq(&p, PROJECTIVE_TOL));
    }

    #[test]
    fn meet_parallel_lines_at_infinity() {
        let q = meet(&line(1.0, 0.0, -1.0), &line(1.0, 0.0, 2.0)).unwrap();
        assert_eq!(q.coords().z, 0.0);
        assert!(q.is_at_infinity());
        assert!(matches!(
            meet(&line(1.0, 0.0, -1.0), &line(-2.0, 0.0, 2.0)),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn rot_y_layout() {
        assert_eq!(*Rot3::rot_y(0.0).matrix(), Mat3::identity());
        let v = Rot3::rot_y(FRAC_PI_2).apply(&Vec3::new(0.0, 0.0, 1.0));
        assert!((v - Vec3::new(-1.0, 0.0, 0.0)).amax() < 1e-15);
        let r = Rot3::rot_y(0.7) * Rot3::rot_y(-0.7);
        assert!((r.matrix() - Mat3::identity()).amax() < 1e-15);
    }

    #[test]
    fn normalize_point_cases() {
        let n = pt(2.0, 4.0, 2.0).normalize().unwrap();
        assert_eq!(*n.coords(), Vec3::new(1.0, 2.0, 1.0));
        assert_eq!(
            *pt(0.0, 0.0, 1.0).normalize().unwrap().coords(),
            Vec3::new(0.0, 0.0, 1.0)
        );
        assert_eq!(pt(1.0, 1.0, 0.0).normalize(), Err(Error::PointAtInfinity));
    }

    #[test]
    fn zero_triples_are_rejected() {
        assert!(HomogPoint2::new(0.0, 0.0, 0.0).is_err());
        assert!(HomogLine2::new(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn projective_equality_ignores_sign_and_scale() {
        assert!(pt(1.0, -2.0, 3.0).projectively_eq(&pt(-2.0, 4.0, -6.0), 1e-12));
        assert!(!pt(1.0, -2.0, 3.0).projectively_eq(&pt(1.0, -2.0, 3.1), 1e-9));
    }

    #[test]
    fn matrix_normalization_fixes_sign() {
        let m = Mat3::new(0.0, -2.0, 0.0, 1.0, 0.0, 4.0, 0.0, 0.0, 0.0);
        let n = normalize_homogeneous_matrix(&m).unwrap();
        assert_eq!(n[(0, 1)], 0.5);
        assert_eq!(n[(1, 2)], -1.0);
        assert!(matrices_proportional(&m, &(m * -3.5), 1e-12));
        assert!(normalize_homogeneous_matrix(&Mat3::zeros()).is_none());
    }
}
