//! Three-parameter binocular gaze: Helmholtz coordinates of the fixation
//! point, the derived eye azimuths and poses, vergence/version, and the
//! Vieth-Mueller circle.
//!
//! The scene origin is the Cyclopean point midway between the optical centres
//! `(-1/2, 0, 0)` and `(1/2, 0, 0)`; `y` points down and `z` outward. Eyes have
//! no cyclo-rotation. Elevation is removed by a rotation about the baseline
//! that carries the visual plane onto the horizontal plane, so every image
//! level quantity depends only on the in-plane azimuths.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{HomogPoint2, Rot3, Vec3};

/// Default lower bound on the fixation range.
pub const DEFAULT_MIN_RANGE: f64 = 0.75;

/// Vergence below this is treated as parallel visual axes.
pub const PARALLEL_VERGENCE: f64 = 1e-12;

pub const LEFT_CENTRE: Vec3 = Vec3::new(-0.5, 0.0, 0.0);
pub const RIGHT_CENTRE: Vec3 = Vec3::new(0.5, 0.0, 0.0);

/// The baseline vector `c_r - c_l`.
pub const BASELINE: Vec3 = Vec3::new(1.0, 0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Eye {
    Left,
    Right,
}

impl Eye {
    pub fn other(self) -> Eye {
        match self {
            Eye::Left => Eye::Right,
            Eye::Right => Eye::Left,
        }
    }

    pub fn centre(self) -> Vec3 {
        match self {
            Eye::Left => LEFT_CENTRE,
            Eye::Right => RIGHT_CENTRE,
        }
    }
}

impl fmt::Display for Eye {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Eye::Left => "left",
            Eye::Right => "right",
        })
    }
}

/// Unit Cyclopean direction `(sin b, -sin a cos b, cos a cos b)` for
/// elevation `a` and azimuth `b`.
pub fn direction_from_angles(alpha: f64, beta: f64) -> Vec3 {
    let (sa, ca) = alpha.sin_cos();
    let (sb, cb) = beta.sin_cos();
    Vec3::new(sb, -sa * cb, ca * cb)
}

fn check_angle(name: &str, value: f64) -> Result<()> {
    if !value.is_finite() || value.abs() > FRAC_PI_2 {
        return Err(Error::InvalidGaze(format!(
            "{name} = {value} is outside [-pi/2, pi/2]"
        )));
    }
    Ok(())
}

/// Helmholtz coordinates `(alpha, beta, rho)` of the fixation point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGaze")]
pub struct GazeState {
    alpha: f64,
    beta: f64,
    rho: f64,
}

impl GazeState {
    /// Validates the angles and requires `rho >= DEFAULT_MIN_RANGE`.
    pub fn new(alpha: f64, beta: f64, rho: f64) -> Result<Self> {
        Self::with_min_range(alpha, beta, rho, DEFAULT_MIN_RANGE)
    }

    pub fn with_min_range(alpha: f64, beta: f64, rho: f64, min_range: f64) -> Result<Self> {
        check_angle("alpha", alpha)?;
        check_angle("beta", beta)?;
        if !rho.is_finite() || rho <= 0.0 || rho < min_range {
            return Err(Error::RangeBelowMinimum {
                rho,
                min: min_range,
            });
        }
        Ok(Self { alpha, beta, rho })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn direction(&self) -> Vec3 {
        direction_from_angles(self.alpha, self.beta)
    }

    pub fn fixation_point(&self) -> Vec3 {
        self.rho * self.direction()
    }

    /// Rotation about the baseline taking the visual plane onto `y = 0`.
    pub fn visual_plane_rotation(&self) -> Rot3 {
        Rot3::rot_x(-self.alpha)
    }

    /// Per-eye azimuths from `tan b_l,r = tan b +- sec b / (2 rho)`.
    pub fn eye_azimuths(&self) -> Result<EyeAzimuths> {
        let cos_beta = self.beta.cos();
        if cos_beta <= f64::EPSILON {
            return Err(Error::InvalidGaze(
                "azimuth of +-pi/2 leaves the eye azimuths undefined".into(),
            ));
        }
        let tan_beta = self.beta.tan();
        let offset = 1.0 / (2.0 * self.rho * cos_beta);
        Ok(EyeAzimuths {
            left: (tan_beta + offset).atan(),
            right: (tan_beta - offset).atan(),
        })
    }

    pub fn eye_poses(&self) -> Result<BinocularPoses> {
        let az = self.eye_azimuths()?;
        let plane = self.visual_plane_rotation();
        Ok(BinocularPoses {
            left: EyePose::new(Rot3::rot_y(az.left) * plane, LEFT_CENTRE),
            right: EyePose::new(Rot3::rot_y(az.right) * plane, RIGHT_CENTRE),
            cyclopean: EyePose::new(Rot3::rot_y(self.beta) * plane, Vec3::zeros()),
        })
    }
}

#[derive(Deserialize)]
struct RawGaze {
    alpha: f64,
    beta: f64,
    rho: f64,
}

impl TryFrom<RawGaze> for GazeState {
    type Error = Error;

    fn try_from(raw: RawGaze) -> Result<Self> {
        GazeState::with_min_range(raw.alpha, raw.beta, raw.rho, 0.0)
    }
}

/// Helmholtz coordinates of a scene point, from `tan a = -y/z` and
/// `sin b = x/rho`. Only requires `rho > 0`.
pub fn helmholtz_from_point(p: &Vec3) -> Result<GazeState> {
    let rho = p.norm();
    if rho == 0.0 || !rho.is_finite() {
        return Err(Error::InvalidGaze("point at the Cyclopean origin".into()));
    }
    if p.z < 0.0 {
        return Err(Error::InvalidGaze(format!(
            "point has z = {} < 0, behind the head",
            p.z
        )));
    }
    let beta = (p.x / rho).clamp(-1.0, 1.0).asin();
    let alpha = if p.y == 0.0 && p.z == 0.0 {
        0.0
    } else {
        (-p.y).atan2(p.z) + 0.0
    };
    GazeState::with_min_range(alpha, beta, rho, 0.0)
}

/// Azimuths of the left and right visual axes within the visual plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EyeAzimuths {
    pub left: f64,
    pub right: f64,
}

impl EyeAzimuths {
    pub fn new(left: f64, right: f64) -> Result<Self> {
        check_angle("left azimuth", left)?;
        check_angle("right azimuth", right)?;
        if right > left {
            return Err(Error::InvalidGaze(format!(
                "right azimuth {right} exceeds left azimuth {left} (divergent axes)"
            )));
        }
        Ok(Self { left, right })
    }

    pub fn from_vergence_version(vv: &VergenceVersion) -> Result<Self> {
        Self::new(vv.epsilon + 0.5 * vv.delta, vv.epsilon - 0.5 * vv.delta)
    }

    pub fn vergence_version(&self) -> VergenceVersion {
        VergenceVersion {
            delta: self.left - self.right,
            epsilon: 0.5 * (self.left + self.right),
        }
    }

    /// Inverts the azimuth equations: `tan b = (tan b_l + tan b_r) / 2` and
    /// `rho = sec b / (tan b_l - tan b_r)`. The elevation is not observable
    /// from the azimuths and is supplied by the caller.
    pub fn to_gaze(&self, alpha: f64) -> Result<GazeState> {
        if self.left - self.right < PARALLEL_VERGENCE {
            return Err(Error::InfiniteRange);
        }
        let (tl, tr) = (self.left.tan(), self.right.tan());
        let beta = (0.5 * (tl + tr)).atan();
        let rho = 1.0 / (beta.cos() * (tl - tr));
        GazeState::with_min_range(alpha, beta, rho, 0.0)
    }
}

/// Vergence `delta = b_l - b_r` and version `epsilon = (b_l + b_r) / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VergenceVersion {
    pub delta: f64,
    pub epsilon: f64,
}

impl VergenceVersion {
    pub fn vieth_muller(&self) -> Result<ViethMullerCircle> {
        if self.delta < PARALLEL_VERGENCE {
            return Err(Error::ZeroVergence);
        }
        let (s, c) = self.delta.sin_cos();
        Ok(ViethMullerCircle {
            zeta: 0.5 * c / s,
            eta: 0.5 / s,
        })
    }
}

/// Circle through both optical centres and the fixation point, centred at
/// `(0, 0, zeta)` with radius `eta`, in visual-plane coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViethMullerCircle {
    pub zeta: f64,
    pub eta: f64,
}

impl ViethMullerCircle {
    pub fn centre(&self) -> Vec3 {
        Vec3::new(0.0, 0.0, self.zeta)
    }

    /// The point `(0, 0, zeta - eta)` on the backward arc, from which the
    /// fixation point has azimuth equal to the version.
    pub fn back_point(&self) -> Vec3 {
        Vec3::new(0.0, 0.0, self.zeta - self.eta)
    }

    /// Signed distance of an in-plane point from the circle.
    pub fn radial_offset(&self, q: &Vec3) -> f64 {
        q.x.hypot(q.z - self.zeta) - self.eta
    }

    /// Algebraic residual `|x^2 + (z - zeta)^2 - eta^2|`.
    pub fn residual(&self, q: &Vec3) -> f64 {
        (q.x * q.x + (q.z - self.zeta).powi(2) - self.eta * self.eta).abs()
    }
}

/// Orientation and optical centre of one eye; projection is `R (q - c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EyePose {
    pub rotation: Rot3,
    pub centre: Vec3,
}

impl EyePose {
    pub fn new(rotation: Rot3, centre: Vec3) -> Self {
        Self { rotation, centre }
    }

    /// Eye-frame coordinates of a scene point.
    pub fn to_eye_frame(&self, q: &Vec3) -> Vec3 {
        self.rotation.apply(&(q - self.centre))
    }

    /// Homogeneous image of a scene point (not normalized).
    pub fn project(&self, q: &Vec3) -> Result<HomogPoint2> {
        HomogPoint2::from_vec(self.to_eye_frame(q))
    }

    /// Normalized image of a scene point in front of the eye.
    pub fn project_forward(&self, q: &Vec3) -> Option<HomogPoint2> {
        let v = self.to_eye_frame(q);
        (v.z > 0.0).then(|| HomogPoint2::from_inhomogeneous(v.x / v.z, v.y / v.z))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinocularPoses {
    pub left: EyePose,
    pub right: EyePose,
    pub cyclopean: EyePose,
}

impl BinocularPoses {
    pub fn eye(&self, eye: Eye) -> &EyePose {
        match eye {
            Eye::Left => &self.left,
            Eye::Right => &self.right,
        }
    }
}
