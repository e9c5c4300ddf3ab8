//! Symmetric Cyclopean parallax.
//!
//! A scene point is described by its Cyclopean image direction `p_c` and its
//! signed distance `s` from the fixation plane (the plane through the fixation
//! point orthogonal to the Cyclopean gaze). In each eye the image is the
//! prediction `p`, the image of the ray's intersection with the fixation
//! plane, displaced along the epipolar line by a scalar parallax:
//!
//! ```text
//! q = p + t(s) d,    t(s) = kappa (s / rho) / (lambda (rho + s) + mu)
//! ```
//!
//! `t` is a 1-D projective (Moebius) function of `s`, so depth is recovered
//! from `t` in closed form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{HomogPoint2, Mat3, Rot3, Vec3, DEGENERACY_TOL};
use crate::oculomotor::{Eye, GazeState, BASELINE};

/// Below this the parallax direction `mu p - e/2` is treated as zero.
pub const KAPPA_TOL: f64 = 1e-12;

/// Plane through the fixation point with normal equal to the Cyclopean gaze
/// direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixationPlane {
    pub normal: Vec3,
    pub range: f64,
}

/// Plane-relative depth `s` and Cyclopean depth `z_c = rho + s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneDepth {
    pub s: f64,
    pub z_c: f64,
}

impl FixationPlane {
    pub fn from_gaze(gaze: &GazeState) -> Self {
        Self {
            normal: gaze.direction(),
            range: gaze.rho(),
        }
    }

    /// Negative in front of the plane, positive beyond it.
    pub fn depth(&self, q: &Vec3) -> PlaneDepth {
        let z_c = self.normal.dot(q);
        PlaneDepth {
            s: z_c - self.range,
            z_c,
        }
    }

    /// Perpendicular distance from an eye's optical centre to the plane.
    pub fn eye_distance(&self, eye: Eye) -> f64 {
        self.range - self.normal.dot(&eye.centre())
    }
}

/// Per-eye decomposition of a Cyclopean ray into a predicted point and a unit
/// parallax direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParallaxDecomposition {
    pub eye: Eye,
    /// Image of the ray's intersection with the fixation plane, third
    /// component 1.
    pub predicted: HomogPoint2,
    /// Unit image-plane vector `(mu p - e/2) / kappa`; third component 0.
    pub direction: Vec3,
    pub kappa: f64,
    pub lambda: f64,
    pub mu: f64,
    /// Fixation range the decomposition was built for.
    pub range: f64,
}

/// Observed image point split along and across the parallax direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParallaxProjection {
    pub t: f64,
    /// Signed offset along the direction rotated by +90 degrees.
    pub perpendicular: f64,
}

/// Decomposes the Cyclopean ray `p_c` for one eye.
pub fn decompose(gaze: &GazeState, p_c: &HomogPoint2, eye: Eye) -> Result<ParallaxDecomposition> {
    let p_c = p_c.normalize()?;
    let az = gaze.eye_azimuths()?;
    let eye_azimuth = match eye {
        Eye::Left => az.left,
        Eye::Right => az.right,
    };
    let rho = gaze.rho();

    // R_e R^T; the elevation rotation cancels.
    let relative = Rot3::rot_y(eye_azimuth - gaze.beta());
    let ray = relative.apply(p_c.coords());
    // R_e (-c_e), half the epipole
    let half_epipole = -Rot3::rot_y(eye_azimuth).apply(&eye.centre());

    let lambda = ray.z;
    let mu = half_epipole.z;
    let scaled = rho * ray + half_epipole;
    let eye_range = scaled.z;
    if eye_range <= 0.0 {
        return Err(Error::BehindEye(eye));
    }
    let predicted = Vec3::new(scaled.x / eye_range, scaled.y / eye_range, 1.0);

    let mut offset = mu * predicted - half_epipole;
    offset.z = 0.0;
    let kappa = offset.norm();
    if kappa < KAPPA_TOL {
        return Err(Error::DegenerateRay(eye));
    }

    Ok(ParallaxDecomposition {
        eye,
        predicted: HomogPoint2::from_vec(predicted)?,
        direction: offset / kappa,
        kappa,
        lambda,
        mu,
        range: rho,
    })
}

impl ParallaxDecomposition {
    /// Eye-frame depth of the fixation-plane point, `lambda rho + mu`.
    pub fn eye_range(&self) -> f64 {
        self.lambda * self.range + self.mu
    }

    /// Eye-frame depth `lambda z_c + mu` of the point at plane depth `s`.
    pub fn eye_depth(&self, s: f64) -> f64 {
        self.lambda * (self.range + s) + self.mu
    }

    /// `t(s) = kappa (s / rho) / (lambda (rho + s) + mu)`.
    pub fn parallax(&self, s: f64) -> Result<f64> {
        let depth = self.eye_depth(s);
        if depth <= 0.0 {
            return Err(Error::BehindEye(self.eye));
        }
        Ok(self.kappa * (s / self.range) / depth)
    }

    /// Inverse of [`parallax`](Self::parallax):
    /// `s = t rho (lambda rho + mu) / (kappa - t lambda rho)`.
    pub fn recover_depth(&self, t: f64) -> Result<f64> {
        let denom = self.kappa - t * self.lambda * self.range;
        if denom.abs() <= DEGENERACY_TOL * self.kappa.max(1.0) {
            return Err(Error::DepthAtInfinity);
        }
        if denom < 0.0 {
            return Err(Error::BehindEye(self.eye));
        }
        Ok(t * self.range * self.eye_range() / denom)
    }

    /// Image point `p + t d`.
    pub fn point_at(&self, t: f64) -> HomogPoint2 {
        let p = self.predicted.coords() + t * self.direction;
        HomogPoint2::from_inhomogeneous(p.x, p.y)
    }

    /// Least-squares parallax of an observed point, `t = d . (q - p)`.
    pub fn project_parallax(&self, q: &HomogPoint2) -> Result<ParallaxProjection> {
        let q = q.normalize()?;
        let offset = q.coords() - self.predicted.coords();
        let d = self.direction;
        Ok(ParallaxProjection {
            t: d.dot(&offset),
            perpendicular: d.x * offset.y - d.y * offset.x,
        })
    }

    /// The map `s -> t` as a Moebius transformation.
    pub fn mobius(&self) -> Mobius {
        Mobius {
            a: self.kappa / self.range,
            b: 0.0,
            c: self.lambda,
            d: self.eye_range(),
        }
    }
}

/// `x -> (a x + b) / (c x + d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mobius {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mobius {
    pub fn apply(&self, x: f64) -> f64 {
        (self.a * x + self.b) / (self.c * x + self.d)
    }

    pub fn determinant(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn inverse(&self) -> Mobius {
        Mobius {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    /// `self` after `inner`.
    pub fn compose(&self, inner: &Mobius) -> Mobius {
        Mobius {
            a: self.a * inner.a + self.b * inner.c,
            b: self.a * inner.b + self.b * inner.d,
            c: self.c * inner.a + self.d * inner.c,
            d: self.c * inner.b + self.d * inner.d,
        }
    }
}

/// Projective map carrying the left parallax of a ray to its right parallax.
pub fn parallax_transfer(left: &ParallaxDecomposition, right: &ParallaxDecomposition) -> Mobius {
    right.mobius().compose(&left.mobius().inverse())
}

/// `((a - c)(b - d)) / ((a - d)(b - c))`, invariant under Moebius maps.
pub fn cross_ratio(a: f64, b: f64, c: f64, d: f64) -> f64 {
    ((a - c) * (b - d)) / ((a - d) * (b - c))
}

/// Cyclopean direction and depths of one scene point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthSample {
    pub cyclopean_dir: HomogPoint2,
    pub s: f64,
    pub z_c: f64,
}

impl DepthSample {
    pub fn new(cyclopean_dir: HomogPoint2, s: f64, rho: f64) -> Result<Self> {
        let z_c = rho + s;
        if z_c <= 0.0 {
            return Err(Error::NonPositiveDepth(z_c));
        }
        Ok(Self {
            cyclopean_dir: cyclopean_dir.normalize()?,
            s,
            z_c,
        })
    }

    /// Cyclopean coordinates of a scene point: `z_c p_c = R q`.
    pub fn from_scene_point(gaze: &GazeState, q: &Vec3) -> Result<Self> {
        let rotation = Rot3::rot_y(gaze.beta()) * gaze.visual_plane_rotation();
        let local = rotation.apply(q);
        if local.z <= 0.0 {
            return Err(Error::NonPositiveDepth(local.z));
        }
        let depth = FixationPlane::from_gaze(gaze).depth(q);
        Ok(Self {
            cyclopean_dir: HomogPoint2::from_inhomogeneous(local.x / local.z, local.y / local.z),
            s: depth.s,
            z_c: local.z,
        })
    }

    /// Scene point `z_c R^T p_c`.
    pub fn scene_point(&self, gaze: &GazeState) -> Vec3 {
        let rotation = Rot3::rot_y(gaze.beta()) * gaze.visual_plane_rotation();
        rotation
            .transpose()
            .apply(&(self.z_c * self.cyclopean_dir.coords()))
    }
}

/// A pair of corresponding image points, third components 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correspondence {
    pub left: HomogPoint2,
    pub right: HomogPoint2,
    pub truth: Option<DepthSample>,
}

impl Correspondence {
    pub fn new(left: HomogPoint2, right: HomogPoint2) -> Result<Self> {
        Ok(Self {
            left: left.normalize()?,
            right: right.normalize()?,
            truth: None,
        })
    }
}

/// Images of the point at plane depth `s` along Cyclopean ray `p_c`, built
/// from the parallax decomposition of each eye.
pub fn synthesize_correspondence(
    gaze: &GazeState,
    p_c: &HomogPoint2,
    s: f64,
) -> Result<Correspondence> {
    let truth = DepthSample::new(*p_c, s, gaze.rho())?;
    let left = decompose(gaze, &truth.cyclopean_dir, Eye::Left)?;
    let right = decompose(gaze, &truth.cyclopean_dir, Eye::Right)?;
    let t_l = left.parallax(s)?;
    let t_r = right.parallax(s)?;
    Ok(Correspondence {
        left: left.point_at(t_l),
        right: right.point_at(t_r),
        truth: Some(truth),
    })
}

/// Homography `R_r (I - b v^T / w_l) R_l^T` induced by the fixation plane,
/// where `w_l` is the distance from the left optical centre to the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneHomography(Mat3);

impl PlaneHomography {
    pub fn from_gaze(gaze: &GazeState) -> Result<Self> {
        let plane = FixationPlane::from_gaze(gaze);
        let w_l = plane.eye_distance(Eye::Left);
        if w_l <= 0.0 {
            return Err(Error::PlaneBehindEye);
        }
        let poses = gaze.eye_poses()?;
        let shear = Mat3::identity() - BASELINE * plane.normal.transpose() / w_l;
        Ok(Self(
            poses.right.rotation.matrix() * shear * poses.left.rotation.matrix().transpose(),
        ))
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    /// Maps a left image point of the fixation plane to its right image.
    pub fn transfer(&self, p_l: &HomogPoint2) -> Result<HomogPoint2> {
        HomogPoint2::from_vec(self.0 * p_l.coords())?.normalize()
    }

    /// Plane plus parallax: `q_r = H p_l + t_r d_r` with `H p_l` normalized.
    pub fn plane_plus_parallax(
        &self,
        p_l: &HomogPoint2,
        right: &ParallaxDecomposition,
        t_r: f64,
    ) -> Result<HomogPoint2> {
        let p = self.transfer(p_l)?.coords() + t_r * right.direction;
        Ok(HomogPoint2::from_inhomogeneous(p.x, p.y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn symmetric() -> GazeState {
        GazeState::new(0.0, 0.0, 1.0).unwrap()
    }

    fn ahead() -> HomogPoint2 {
        HomogPoint2::new(0.0, 0.0, 1.0).unwrap()
    }

    #[test]
    fn plane_depth_cases() {
        let g = symmetric();
        let plane = FixationPlane::from_gaze(&g);
        assert_eq!(plane.depth(&g.fixation_point()).s, 0.0);
        let d = plane.depth(&Vec3::new(0.0, 0.0, 1.5));
        assert_eq!((d.s, d.z_c), (0.5, 1.5));
        let g = GazeState::new(0.2, -0.4, 2.0).unwrap();
        let plane = FixationPlane::from_gaze(&g);
        let poses = g.eye_poses().unwrap();
        let in_plane = poses
            .cyclopean
            .rotation
            .transpose()
            .apply(&Vec3::new(0.3, -0.2, 2.0));
        assert!(plane.depth(&in_plane).s.abs() < 1e-14);
    }

    #[test]
    fn running_example_left() {
        let dec = decompose(&symmetric(), &ahead(), Eye::Left).unwrap();
        assert!((dec.predicted.coords() - Vec3::new(0.0, 0.0, 1.0)).amax() < 1e-15);
        assert!((dec.lambda - 0.894_427_190_999_916).abs() < 1e-15);
        assert!((dec.mu - 0.223_606_797_749_979).abs() < 1e-15);
        assert!((dec.kappa - 0.447_213_595_499_958).abs() < 1e-15);
        assert!((dec.direction - Vec3::new(-1.0, 0.0, 0.0)).amax() < 1e-15);
        let t = dec.parallax(0.5).unwrap();
        assert!((t - 1.0 / 7.0).abs() < 1e-15);
        assert!((dec.recover_depth(t).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(dec.parallax(0.0).unwrap(), 0.0);
        assert_eq!(dec.recover_depth(0.0).unwrap(), 0.0);
    }

    #[test]
    fn running_example_correspondence() {
        let c = synthesize_correspondence(&symmetric(), &ahead(), 0.5).unwrap();
        assert!((c.left.coords() - Vec3::new(-1.0 / 7.0, 0.0, 1.0)).amax() < 1e-15);
        assert!((c.right.coords() - Vec3::new(1.0 / 7.0, 0.0, 1.0)).amax() < 1e-15);
    }

    #[test]
    fn straight_eye_has_zero_mu_but_valid_direction() {
        // b_l = 0 when tan b = -sec b / (2 rho)
        let rho = 2.0;
        let beta = (-1.0f64 / (2.0 * rho)).asin();
        let g = GazeState::new(0.0, beta, rho).unwrap();
        assert!(g.eye_azimuths().unwrap().left.abs() < 1e-15);
        let dec = decompose(&g, &HomogPoint2::from_inhomogeneous(0.1, 0.2), Eye::Left).unwrap();
        assert!(dec.mu.abs() < 1e-15);
        assert!((dec.direction.norm() - 1.0).abs() < 1e-15);
        assert_eq!(dec.direction.z, 0.0);
    }

    #[test]
    fn ray_through_epipole_is_degenerate() {
        // the fixation plane meets the baseline at x = rho / sin(beta); that
        // point images onto the left epipole
        let g = GazeState::new(0.0, 0.5, 1.0).unwrap();
        let q = Vec3::new(g.rho() / g.beta().sin(), 0.0, 0.0);
        let sample = DepthSample::from_scene_point(&g, &q).unwrap();
        assert!(sample.s.abs() < 1e-14);
        assert_eq!(
            decompose(&g, &sample.cyclopean_dir, Eye::Left),
            Err(Error::DegenerateRay(Eye::Left))
        );
    }

    #[test]
    fn behind_eye_is_rejected() {
        let dec = decompose(&symmetric(), &ahead(), Eye::Left).unwrap();
        assert_eq!(dec.parallax(-1.5), Err(Error::BehindEye(Eye::Left)));
        assert_eq!(
            synthesize_correspondence(&symmetric(), &ahead(), -1.0),
            Err(Error::NonPositiveDepth(0.0))
        );
    }

    #[test]
    fn recover_depth_at_asymptote() {
        let dec = decompose(&symmetric(), &ahead(), Eye::Left).unwrap();
        let t_inf = dec.kappa / (dec.lambda * dec.range);
        assert_eq!(dec.recover_depth(t_inf), Err(Error::DepthAtInfinity));
        assert_eq!(
            dec.recover_depth(t_inf * 1.1),
            Err(Error::BehindEye(Eye::Left))
        );
    }

    #[test]
    fn project_parallax_cases() {
        let dec = decompose(&symmetric(), &ahead(), Eye::Left).unwrap();
        assert_eq!(dec.project_parallax(&dec.predicted).unwrap().t, 0.0);
        let proj = dec
            .project_parallax(&HomogPoint2::from_inhomogeneous(-1.0 / 7.0, 0.0))
            .unwrap();
        assert!((proj.t - 1.0 / 7.0).abs() < 1e-15);
        assert_eq!(proj.perpendicular, 0.0);
        let off = dec
            .project_parallax(&HomogPoint2::from_inhomogeneous(-1.0 / 7.0, 0.01))
            .unwrap();
        assert!((off.perpendicular.abs() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn mobius_matches_parallax() {
        let g = GazeState::new(0.0, 0.25, 1.8).unwrap();
        let dec = decompose(&g, &HomogPoint2::from_inhomogeneous(-0.2, 0.3), Eye::Right).unwrap();
        let m = dec.mobius();
        for s in [-0.5, 0.0, 0.3, 2.0] {
            assert!((m.apply(s) - dec.parallax(s).unwrap()).abs() < 1e-15);
        }
        let id = m.compose(&m.inverse());
        assert!((id.apply(0.7) - 0.7).abs() < 1e-14);
    }

    #[test]
    fn cross_ratio_is_invariant() {
        let m = Mobius {
            a: 2.0,
            b: -1.0,
            c: 0.5,
            d: 3.0,
        };
        let xs = [0.1, 0.7, -1.3, 2.2];
        let before = cross_ratio(xs[0], xs[1], xs[2], xs[3]);
        let after = cross_ratio(
            m.apply(xs[0]),
            m.apply(xs[1]),
            m.apply(xs[2]),
            m.apply(xs[3]),
        );
        assert!((before - after).abs() < 1e-13);
    }

    #[test]
    fn homography_fixes_fixation_image() {
        let g = GazeState::new(0.0, 0.3, 1.2).unwrap();
        let h = PlaneHomography::from_gaze(&g).unwrap();
        let p = h.transfer(&ahead()).unwrap();
        assert!((p.coords() - ahead().coords()).amax() < 1e-14);
        assert!(h.matrix().determinant().abs() > 0.1);
    }

    #[test]
    fn homography_far_plane_is_identity() {
        let g = GazeState::new(0.0, 0.0, 1e9).unwrap();
        let h = PlaneHomography::from_gaze(&g).unwrap();
        assert!((h.matrix() - Mat3::identity()).amax() < 1e-8);
    }

    #[test]
    fn scene_point_round_trip() {
        let g = GazeState::new(0.3, -0.2, 1.6).unwrap();
        let q = Vec3::new(0.4, -0.7, 2.3);
        let sample = DepthSample::from_scene_point(&g, &q).unwrap();
        assert!((sample.scene_point(&g) - q).amax() < 1e-14);
        assert!((sample.z_c - (g.rho() + sample.s)).abs() < 1e-14);
    }
}
