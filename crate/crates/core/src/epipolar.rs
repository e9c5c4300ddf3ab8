//! Epipoles and the Essential matrix of the fixating pair.
//!
//! Three constructions are provided and agree up to scale: the product of
//! cross matrices through the midline horopter image, the closed form in the
//! eye azimuths, and `R_r (b x) R_l^T` from the eye poses.

use nalgebra::SVD;

use crate::error::{Error, Result};
use crate::geom::{
    cross_matrix, join, matrices_proportional, meet, HomogLine2, HomogPoint2, Mat3, Vec3,
    DEGENERACY_TOL,
};
use crate::oculomotor::{EyeAzimuths, EyePose, BASELINE};

/// Images of the other eye's optical centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Epipoles {
    /// `(cos b_l, 0, sin b_l)`
    pub left: HomogPoint2,
    /// `(-cos b_r, 0, -sin b_r)`
    pub right: HomogPoint2,
}

impl Epipoles {
    pub fn from_azimuths(az: &EyeAzimuths) -> Self {
        let (sl, cl) = az.left.sin_cos();
        let (sr, cr) = az.right.sin_cos();
        Self {
            left: HomogPoint2::from_vec(Vec3::new(cl, 0.0, sl)).expect("unit vector"),
            right: HomogPoint2::from_vec(Vec3::new(-cr, 0.0, -sr)).expect("unit vector"),
        }
    }
}

/// A homogeneous 3x3 Essential matrix; `q_r^T E q_l = 0` for corresponding
/// points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EssentialMatrix(Mat3);

impl EssentialMatrix {
    pub fn from_matrix(m: Mat3) -> Self {
        Self(m)
    }

    /// `(e_r x)(a x)(e_l x)`: an epipolar line through `q_l` meets the midline
    /// image `a` in a fixed point, which is joined to `e_r`.
    pub fn from_horopter(epipoles: &Epipoles, midline_image: &HomogLine2) -> Self {
        Self(
            cross_matrix(epipoles.right.coords())
                * cross_matrix(midline_image.coords())
                * cross_matrix(epipoles.left.coords()),
        )
    }

    /// Closed form with the common `cos(delta/2)` factor removed:
    /// `(0, -sin b_r, 0; sin b_l, 0, -cos b_l; 0, cos b_r, 0)`.
    pub fn closed_form(az: &EyeAzimuths) -> Self {
        let (sl, cl) = az.left.sin_cos();
        let (sr, cr) = az.right.sin_cos();
        Self(Mat3::new(
            0.0, -sr, 0.0, //
            sl, 0.0, -cl, //
            0.0, cr, 0.0,
        ))
    }

    /// `R_r (b x) R_l^T`, valid for any pair of poses on the baseline.
    pub fn traditional(left: &EyePose, right: &EyePose) -> Self {
        let b = right.centre - left.centre;
        Self(right.rotation.matrix() * cross_matrix(&b) * left.rotation.matrix().transpose())
    }

    /// `(b x)`, the Essential matrix for parallel visual axes.
    pub fn parallel() -> Self {
        Self(cross_matrix(&BASELINE))
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    /// Scaled to unit Frobenius norm.
    pub fn normalized(&self) -> Mat3 {
        self.0 / self.0.norm()
    }

    /// Singular values in descending order.
    pub fn singular_values(&self) -> [f64; 3] {
        let mut sv: Vec<f64> = SVD::new(self.0, false, false)
            .singular_values
            .iter()
            .copied()
            .collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        [sv[0], sv[1], sv[2]]
    }

    pub fn proportional_to(&self, other: &Self, tol: f64) -> bool {
        matrices_proportional(&self.0, &other.0, tol)
    }

    /// Epipolar line `E q_l` in the right image.
    pub fn line_right(&self, q_l: &HomogPoint2) -> Result<HomogLine2> {
        self.line_through(&self.0, q_l)
    }

    /// Epipolar line `E^T q_r` in the left image.
    pub fn line_left(&self, q_r: &HomogPoint2) -> Result<HomogLine2> {
        self.line_through(&self.0.transpose(), q_r)
    }

    fn line_through(&self, m: &Mat3, q: &HomogPoint2) -> Result<HomogLine2> {
        let u = m * q.coords();
        if u.norm() <= DEGENERACY_TOL * m.norm() * q.coords().norm() {
            return Err(Error::UndefinedEpipolarLine);
        }
        HomogLine2::from_vec(u)
    }

    /// `q_r^T E q_l` with both points scaled to unit third component and `E`
    /// to unit Frobenius norm. Points at infinity are scaled to unit length
    /// instead.
    pub fn residual(&self, q_l: &HomogPoint2, q_r: &HomogPoint2) -> f64 {
        let l = scale_for_residual(q_l);
        let r = scale_for_residual(q_r);
        r.dot(&(self.normalized() * l))
    }
}

fn scale_for_residual(q: &HomogPoint2) -> Vec3 {
    match q.normalize() {
        Ok(n) => *n.coords(),
        Err(_) => q.coords().normalize(),
    }
}

/// Builds the right epipolar line of `q_l` by the horopter construction
/// `e_r x (a x (e_l x q_l))`. Returns the line and the intermediate fixed
/// point on `a`.
pub fn construct_line_via_fixed_point(
    epipoles: &Epipoles,
    midline_image: &HomogLine2,
    q_l: &HomogPoint2,
) -> Result<(HomogLine2, HomogPoint2)> {
    let u_l = join(&epipoles.left, q_l).map_err(|_| Error::UndefinedEpipolarLine)?;
    let fixed = meet(midline_image, &u_l)
        .map_err(|_| Error::DegenerateInput("epipolar line coincides with the midline image"))?;
    let u_r = join(&epipoles.right, &fixed)
        .map_err(|_| Error::DegenerateInput("fixed point coincides with the right epipole"))?;
    Ok((u_r, fixed))
}
