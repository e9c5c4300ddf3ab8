//! The geometric horopter: scene points whose images coincide in both eyes.
//!
//! Without cyclo-rotation it is the forward arc of the Vieth-Mueller circle
//! plus a vertical line through the top of that circle (the midline
//! horopter). Coordinates here are visual-plane coordinates, i.e. the scene
//! rotated by [`GazeState::visual_plane_rotation`]; use [`to_scene`] to map
//! back.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{HomogLine2, HomogPoint2, Vec3, DEGENERACY_TOL};
use crate::oculomotor::{GazeState, VergenceVersion, ViethMullerCircle};

/// Absolute membership tolerance, in baseline units.
pub const HOROPTER_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HoropterComponent {
    Circle,
    Midline,
}

/// Maps a visual-plane point back to head-centric scene coordinates.
pub fn to_scene(gaze: &GazeState, q: &Vec3) -> Vec3 {
    gaze.visual_plane_rotation().transpose().apply(q)
}

/// Point `(eta sin t, 0, zeta + eta cos t)` of the forward arc; `t = 0` is the
/// top of the circle.
pub fn vm_point(circle: &ViethMullerCircle, theta: f64) -> Result<Vec3> {
    let (s, c) = theta.sin_cos();
    let q = Vec3::new(circle.eta * s, 0.0, circle.zeta + circle.eta * c);
    if q.z < -DEGENERACY_TOL * (1.0 + circle.eta) {
        return Err(Error::BackwardArc(theta));
    }
    Ok(q)
}

/// Largest `|theta|` on the forward arc; the endpoints are the optical centres.
pub fn forward_arc_limit(vv: &VergenceVersion) -> f64 {
    std::f64::consts::PI - vv.delta
}

/// Which horopter component, if any, contains the scene point `q`.
pub fn is_on_horopter(q: &Vec3, gaze: &GazeState) -> Result<Option<HoropterComponent>> {
    let vv = gaze.eye_azimuths()?.vergence_version();
    let circle = vv.vieth_muller()?;
    let p = gaze.visual_plane_rotation().apply(q);
    let top = circle.zeta + circle.eta;
    if p.y.abs() <= HOROPTER_TOL
        && p.z >= -HOROPTER_TOL
        && circle.radial_offset(&p).abs() <= HOROPTER_TOL
    {
        return Ok(Some(HoropterComponent::Circle));
    }
    if p.x.abs() <= HOROPTER_TOL && (p.z - top).abs() <= HOROPTER_TOL {
        return Ok(Some(HoropterComponent::Midline));
    }
    Ok(None)
}

/// The vertical axis of points with identical eye-frame coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MidlineHoropter {
    /// `(0, 0, zeta + eta)` in visual-plane coordinates.
    pub scene_base: Vec3,
    /// Common eye-frame coordinates of `scene_base`,
    /// `csc(delta/2) / 2 * (-sin eps, 0, cos eps)`.
    pub image_base: HomogPoint2,
    /// Image of the axis, `(cos eps, 0, sin eps)`, shared by both eyes.
    pub image_line: HomogLine2,
}

impl MidlineHoropter {
    pub fn from_vergence(vv: &VergenceVersion) -> Result<Self> {
        let circle = vv.vieth_muller()?;
        let (se, ce) = vv.epsilon.sin_cos();
        let distance = 0.5 / (0.5 * vv.delta).sin();
        Ok(Self {
            scene_base: Vec3::new(0.0, 0.0, circle.zeta + circle.eta),
            image_base: HomogPoint2::new(-distance * se, 0.0, distance * ce)?,
            image_line: HomogLine2::new(ce, 0.0, se)?,
        })
    }

    /// Distance of `scene_base` from either optical centre.
    pub fn eye_distance(&self) -> f64 {
        self.image_base.coords().norm()
    }

    /// Visual-plane point `scene_base + (0, y, 0)`.
    pub fn scene_point(&self, y: f64) -> Vec3 {
        self.scene_base + Vec3::new(0.0, y, 0.0)
    }

    /// Eye-frame coordinates `image_base + (0, y, 0)`, identical in both eyes.
    pub fn image_point(&self, y: f64) -> HomogPoint2 {
        let c = self.image_base.coords();
        HomogPoint2::from_vec(Vec3::new(c.x, c.y + y, c.z))
            .expect("image_base has a nonzero third component")
    }
}
