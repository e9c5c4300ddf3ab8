//! Recovery of the gaze and of the Cyclopean depth map from correspondences.
//!
//! With fixation imposed the Essential matrix has two free parameters, the
//! eye azimuths `(b_l, b_r)`. They are fitted by damped least squares on the
//! normalized epipolar residuals, seeded from a coarse grid over
//! vergence/version. Elevation is not observable from the images and is
//! taken from the configuration.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::disparity::{decompose, Correspondence, DepthSample};
use crate::error::{Error, Result};
use crate::geom::{HomogPoint2, Vec3};
use crate::oculomotor::{Eye, EyeAzimuths, GazeState, VergenceVersion};

/// Points with `|y|` at or below this (normalized image units, both eyes)
/// lie on the horizontal meridian and carry no information about the gaze.
pub const MERIDIAN_TOL: f64 = 1e-9;

/// Grid resolution of [`grid_init`] along each axis.
pub const GRID_SIZE: usize = 64;
pub const GRID_MAX_VERGENCE: f64 = 1.2;
pub const GRID_MAX_VERSION: f64 = 0.8;

/// Box constraint on vergence and version, applied by projection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GazeBounds {
    pub delta: (f64, f64),
    pub epsilon: (f64, f64),
}

impl GazeBounds {
    fn project(&self, p: Vector2<f64>) -> Vector2<f64> {
        let vv = EyeAzimuths {
            left: p.x,
            right: p.y,
        }
        .vergence_version();
        let delta = vv.delta.clamp(self.delta.0, self.delta.1);
        let epsilon = vv.epsilon.clamp(self.epsilon.0, self.epsilon.1);
        Vector2::new(epsilon + 0.5 * delta, epsilon - 0.5 * delta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub max_iterations: usize,
    pub initial_damping: f64,
    /// Damping is multiplied by this on a rejected step and divided on an
    /// accepted one.
    pub damping_factor: f64,
    /// Converged when the accepted step is shorter than this (radians).
    pub step_tolerance: f64,
    /// Converged when the relative decrease of the objective drops below this.
    pub relative_decrease_tolerance: f64,
    /// Central-difference step for the Jacobian (radians).
    pub jacobian_step: f64,
    /// Elevation assigned to the recovered gaze.
    pub alpha: f64,
    pub bounds: Option<GazeBounds>,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            initial_damping: 1e-3,
            damping_factor: 10.0,
            step_tolerance: 1e-10,
            relative_decrease_tolerance: 1e-12,
            jacobian_step: 1e-7,
            alpha: 0.0,
            bounds: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GazeEstimate {
    pub azimuths: EyeAzimuths,
    pub gaze: GazeState,
    pub rms_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Correspondences reduced to unit-third-component coordinates.
struct Observations(Vec<(Vec3, Vec3)>);

impl Observations {
    fn new(correspondences: &[Correspondence]) -> Result<Self> {
        correspondences
            .iter()
            .map(|c| {
                Ok((
                    *c.left.normalize()?.coords(),
                    *c.right.normalize()?.coords(),
                ))
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    fn off_meridian(&self) -> usize {
        self.0
            .iter()
            .filter(|(l, r)| l.y.abs() > MERIDIAN_TOL || r.y.abs() > MERIDIAN_TOL)
            .count()
    }

    /// `q_r^T E q_l` for the closed-form E scaled to unit Frobenius norm,
    /// expanded over its four nonzero entries.
    fn residuals(&self, p: &Vector2<f64>) -> Vec<f64> {
        let (sl, cl) = p.x.sin_cos();
        let (sr, cr) = p.y.sin_cos();
        let k = std::f64::consts::FRAC_1_SQRT_2;
        self.0
            .iter()
            .map(|(l, r)| k * (r.y * (sl * l.x - cl * l.z) + l.y * (cr * r.z - sr * r.x)))
            .collect()
    }

    fn cost(&self, p: &Vector2<f64>) -> f64 {
        0.5 * self.residuals(p).iter().map(|r| r * r).sum::<f64>()
    }

    fn jacobian(&self, p: &Vector2<f64>, h: f64) -> Vec<[f64; 2]> {
        let mut columns = [Vec::new(), Vec::new()];
        for (k, column) in columns.iter_mut().enumerate() {
            let mut step = Vector2::zeros();
            step[k] = h;
            let plus = self.residuals(&(p + step));
            let minus = self.residuals(&(p - step));
            *column = plus
                .iter()
                .zip(&minus)
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect();
        }
        columns[0]
            .iter()
            .zip(&columns[1])
            .map(|(a, b)| [*a, *b])
            .collect()
    }
}

/// Sum of squared normalized epipolar residuals at the given azimuths.
pub fn objective(correspondences: &[Correspondence], azimuths: &EyeAzimuths) -> Result<f64> {
    let obs = Observations::new(correspondences)?;
    Ok(2.0 * obs.cost(&Vector2::new(azimuths.left, azimuths.right)))
}

/// Seeds the optimizer with the best cell of a vergence/version grid,
/// `delta` in `(0, 1.2]` and `epsilon` in `[-0.8, 0.8]`.
///
/// Always returns a seed; with very few correspondences it may be poor.
pub fn grid_init(correspondences: &[Correspondence]) -> Result<EyeAzimuths> {
    let obs = Observations::new(correspondences)?;
    let mut best = (
        f64::INFINITY,
        VergenceVersion {
            delta: GRID_MAX_VERGENCE,
            epsilon: 0.0,
        },
    );
    for i in 0..GRID_SIZE {
        let delta = GRID_MAX_VERGENCE * (i + 1) as f64 / GRID_SIZE as f64;
        for j in 0..GRID_SIZE {
            let epsilon =
                -GRID_MAX_VERSION + 2.0 * GRID_MAX_VERSION * j as f64 / (GRID_SIZE - 1) as f64;
            let vv = VergenceVersion { delta, epsilon };
            let az = EyeAzimuths::from_vergence_version(&vv)?;
            let cost = obs.cost(&Vector2::new(az.left, az.right));
            if cost < best.0 {
                best = (cost, vv);
            }
        }
    }
    EyeAzimuths::from_vergence_version(&best.1)
}

/// Damped least-squares fit of the eye azimuths from `initial`.
pub fn estimate_gaze(
    correspondences: &[Correspondence],
    initial: &EyeAzimuths,
    config: &EstimatorConfig,
) -> Result<GazeEstimate> {
    if correspondences.len() < 3 {
        return Err(Error::DegenerateConfiguration(
            "fewer than three correspondences",
        ));
    }
    let obs = Observations::new(correspondences)?;
    if obs.off_meridian() < 2 {
        return Err(Error::DegenerateConfiguration(
            "correspondences lie on the horizontal meridian",
        ));
    }

    let project = |p: Vector2<f64>| match &config.bounds {
        Some(b) => b.project(p),
        None => p,
    };
    let mut params = project(Vector2::new(initial.left, initial.right));
    let mut cost = obs.cost(&params);
    let mut damping = config.initial_damping;
    let mut iterations = 0;
    let mut converged = cost == 0.0;

    while !converged && iterations < config.max_iterations {
        iterations += 1;
        let jac = obs.jacobian(&params, config.jacobian_step);
        let res = obs.residuals(&params);
        let mut normal = Matrix2::zeros();
        let mut gradient = Vector2::zeros();
        for (row, r) in jac.iter().zip(&res) {
            let j = Vector2::new(row[0], row[1]);
            normal += j * j.transpose();
            gradient += j * *r;
        }

        loop {
            let mut damped = normal;
            for k in 0..2 {
                damped[(k, k)] += damping * normal[(k, k)].max(f64::EPSILON);
            }
            let Some(step) = damped.lu().solve(&-gradient) else {
                damping *= config.damping_factor;
                continue;
            };
            let candidate = project(params + step);
            let step_norm = (candidate - params).norm();
            let candidate_cost = obs.cost(&candidate);
            if candidate_cost < cost {
                let decrease = (cost - candidate_cost) / cost;
                params = candidate;
                cost = candidate_cost;
                damping /= config.damping_factor;
                converged = step_norm < config.step_tolerance
                    || decrease < config.relative_decrease_tolerance
                    || cost == 0.0;
                break;
            }
            if step_norm < config.step_tolerance {
                converged = true;
                break;
            }
            damping *= config.damping_factor;
            if damping > 1e16 {
                // no descent direction left at working precision
                converged = true;
                break;
            }
        }
    }

    let jac = obs.jacobian(&params, config.jacobian_step);
    let normal = jac.iter().fold(Matrix2::zeros(), |acc, row| {
        let j = Vector2::new(row[0], row[1]);
        acc + j * j.transpose()
    });
    let trace = normal.trace();
    if trace == 0.0 || normal.determinant() <= 1e-12 * trace * trace {
        return Err(Error::DegenerateConfiguration(
            "residuals do not constrain both eye azimuths",
        ));
    }

    let azimuths = EyeAzimuths::new(params.x, params.y)?;
    let gaze = azimuths.to_gaze(config.alpha)?;
    let estimate = GazeEstimate {
        azimuths,
        gaze,
        rms_residual: (2.0 * cost / obs.0.len() as f64).sqrt(),
        iterations,
        converged,
    };
    if converged {
        Ok(estimate)
    } else {
        Err(Error::NotConverged(Box::new(estimate)))
    }
}

/// [`grid_init`] followed by [`estimate_gaze`].
pub fn estimate_gaze_from_grid(
    correspondences: &[Correspondence],
    config: &EstimatorConfig,
) -> Result<GazeEstimate> {
    let seed = grid_init(correspondences)?;
    estimate_gaze(correspondences, &seed, config)
}

/// Per-point result of [`estimate_depth_map`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthEstimate {
    pub sample: DepthSample,
    pub s_left: f64,
    pub s_right: f64,
    /// Offsets of the observations across their epipolar lines.
    pub perpendicular_left: f64,
    pub perpendicular_right: f64,
}

/// Midpoint of the common perpendicular of the two viewing rays.
pub fn triangulate_midpoint(gaze: &GazeState, c: &Correspondence) -> Result<Vec3> {
    let poses = gaze.eye_poses()?;
    let dl = poses.left.rotation.transpose().apply(c.left.coords());
    let dr = poses.right.rotation.transpose().apply(c.right.coords());
    let w0 = poses.left.centre - poses.right.centre;
    let (a, b, cc) = (dl.dot(&dl), dl.dot(&dr), dr.dot(&dr));
    let (d, e) = (dl.dot(&w0), dr.dot(&w0));
    let denom = a * cc - b * b;
    if denom <= 1e-15 * a * cc {
        return Err(Error::DepthAtInfinity);
    }
    let sl = (b * e - cc * d) / denom;
    let sr = (a * e - b * d) / denom;
    let pl = poses.left.centre + sl * dl;
    let pr = poses.right.centre + sr * dr;
    Ok(0.5 * (pl + pr))
}

fn depth_for(gaze: &GazeState, c: &Correspondence) -> Result<DepthEstimate> {
    let c = Correspondence::new(c.left, c.right)?;
    let point = triangulate_midpoint(gaze, &c)?;
    let p_c: HomogPoint2 = DepthSample::from_scene_point(gaze, &point)?.cyclopean_dir;
    let left = decompose(gaze, &p_c, Eye::Left)?;
    let right = decompose(gaze, &p_c, Eye::Right)?;
    let pl = left.project_parallax(&c.left)?;
    let pr = right.project_parallax(&c.right)?;
    let s_left = left.recover_depth(pl.t)?;
    let s_right = right.recover_depth(pr.t)?;
    let s = 0.5 * (s_left + s_right);
    Ok(DepthEstimate {
        sample: DepthSample::new(p_c, s, gaze.rho())?,
        s_left,
        s_right,
        perpendicular_left: pl.perpendicular,
        perpendicular_right: pr.perpendicular,
    })
}

/// Plane-relative depth of every correspondence under the given gaze. The
/// Cyclopean direction comes from the triangulated midpoint; depth is the
/// mean of the left and right parallax inversions. Failures are per point.
pub fn estimate_depth_map(
    correspondences: &[Correspondence],
    gaze: &GazeState,
) -> Vec<Result<DepthEstimate>> {
    correspondences.iter().map(|c| depth_for(gaze, c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disparity::synthesize_correspondence;
    use crate::epipolar::EssentialMatrix;

    fn scene(gaze: &GazeState, n: usize) -> Vec<Correspondence> {
        // deterministic spread of rays and depths
        (0..n)
            .map(|i| {
                let f = i as f64 / n as f64;
                let x = -0.4 + 0.8 * ((i * 37) % n) as f64 / n as f64;
                let y = -0.3 + 0.6 * ((i * 11) % n) as f64 / n as f64;
                let s = -0.3 + 0.9 * f;
                synthesize_correspondence(gaze, &HomogPoint2::from_inhomogeneous(x, y), s).unwrap()
            })
            .collect()
    }

    #[test]
    fn expanded_residuals_match_the_essential_matrix() {
        let g = GazeState::new(0.1, -0.3, 1.7).unwrap();
        let data = scene(&g, 20);
        let obs = Observations::new(&data).unwrap();
        let az = EyeAzimuths::new(0.4, -0.6).unwrap();
        let e = EssentialMatrix::closed_form(&az);
        for (r, c) in obs
            .residuals(&Vector2::new(az.left, az.right))
            .iter()
            .zip(&data)
        {
            assert!((r - e.residual(&c.left, &c.right)).abs() < 1e-15);
        }
    }

    #[test]
    fn recovers_noiseless_gaze_from_offset_seed() {
        let g = GazeState::new(0.0, 0.2, 2.0).unwrap();
        let truth = g.eye_azimuths().unwrap();
        let data = scene(&g, 50);
        let seed = EyeAzimuths::new(truth.left + 0.1, truth.right + 0.1).unwrap();
        let est = estimate_gaze(&data, &seed, &EstimatorConfig::default()).unwrap();
        assert!(est.converged);
        assert!((est.azimuths.left - truth.left).abs() < 1e-6);
        assert!((est.azimuths.right - truth.right).abs() < 1e-6);
        assert!((est.gaze.rho() - 2.0).abs() < 1e-5);
    }

    #[test]
    fn meridian_only_data_is_degenerate() {
        let g = GazeState::new(0.0, 0.1, 1.5).unwrap();
        let data: Vec<_> = (0..20)
            .map(|i| {
                let x = -0.5 + 0.05 * i as f64;
                synthesize_correspondence(&g, &HomogPoint2::from_inhomogeneous(x, 0.0), 0.1 * x)
                    .unwrap()
            })
            .collect();
        let seed = EyeAzimuths::new(0.3, -0.2).unwrap();
        assert!(matches!(
            estimate_gaze(&data, &seed, &EstimatorConfig::default()),
            Err(Error::DegenerateConfiguration(_))
        ));
        // the residual vanishes for any gaze
        assert_eq!(objective(&data, &seed).unwrap(), 0.0);
    }

    #[test]
    fn grid_seed_near_symmetric_truth() {
        let g = GazeState::new(0.0, 0.0, 1.0).unwrap();
        let data = scene(&g, 40);
        let seed = grid_init(&data).unwrap().vergence_version();
        let cell_delta = GRID_MAX_VERGENCE / GRID_SIZE as f64;
        let cell_eps = 2.0 * GRID_MAX_VERSION / (GRID_SIZE - 1) as f64;
        assert!((seed.delta - 0.927_295_218_001_612).abs() <= cell_delta);
        assert!(seed.epsilon.abs() <= cell_eps);
    }

    #[test]
    fn grid_accepts_tiny_inputs() {
        let g = GazeState::new(0.0, 0.0, 1.0).unwrap();
        assert!(grid_init(&scene(&g, 2)).is_ok());
    }

    #[test]
    fn too_few_points() {
        let g = GazeState::new(0.0, 0.0, 1.0).unwrap();
        let seed = g.eye_azimuths().unwrap();
        assert!(matches!(
            estimate_gaze(&scene(&g, 2), &seed, &EstimatorConfig::default()),
            Err(Error::DegenerateConfiguration(_))
        ));
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let g = GazeState::new(0.0, 0.2, 2.0).unwrap();
        let data = scene(&g, 30);
        let config = EstimatorConfig {
            max_iterations: 1,
            ..Default::default()
        };
        let seed = EyeAzimuths::new(0.6, -0.3).unwrap();
        match estimate_gaze(&data, &seed, &config) {
            Err(Error::NotConverged(est)) => {
                assert!(!est.converged);
                assert_eq!(est.iterations, 1);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn bounds_are_respected() {
        let g = GazeState::new(0.0, 0.2, 2.0).unwrap();
        let data = scene(&g, 30);
        let bounds = GazeBounds {
            delta: (0.3, 1.0),
            epsilon: (-0.8, 0.8),
        };
        let config = EstimatorConfig {
            bounds: Some(bounds),
            ..Default::default()
        };
        let seed = EyeAzimuths::new(0.7, 0.1).unwrap();
        let est = estimate_gaze(&data, &seed, &config).unwrap();
        let vv = est.azimuths.vergence_version();
        assert!(vv.delta >= 0.3 - 1e-15);
    }

    #[test]
    fn noiseless_depth_map() {
        let g = GazeState::new(0.0, -0.25, 1.7).unwrap();
        let data = scene(&g, 30);
        for (c, est) in data.iter().zip(estimate_depth_map(&data, &g)) {
            let est = est.unwrap();
            let truth = c.truth.unwrap();
            assert!((est.sample.s - truth.s).abs() < 1e-9);
            assert!((est.s_left - est.s_right).abs() < 1e-9);
            assert!(est.perpendicular_left.abs() < 1e-12);
        }
    }

    #[test]
    fn in_plane_scene_has_zero_depth() {
        let g = GazeState::new(0.0, 0.3, 2.0).unwrap();
        let data: Vec<_> = (0..10)
            .map(|i| {
                let p = HomogPoint2::from_inhomogeneous(-0.3 + 0.06 * i as f64, 0.2);
                synthesize_correspondence(&g, &p, 0.0).unwrap()
            })
            .collect();
        for est in estimate_depth_map(&data, &g) {
            assert!(est.unwrap().sample.s.abs() < 1e-12);
        }
    }
}
