use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::records::{
    require_records, CorrespondenceFile, DepthMapFile, DepthRecord, ErrorStats, EstimateRecord,
    ExperimentRecord, GazeDeltas, PointRecord, Timings,
};
use super::{SimError, SimResult, SCHEMA};
use crate::epipolar::{Epipoles, EssentialMatrix};
use crate::estimation::{estimate_depth_map, estimate_gaze_from_grid, EstimatorConfig};
use crate::geom::{HomogPoint2, Vec3};
use crate::horopter::{forward_arc_limit, to_scene, vm_point, MidlineHoropter};
use crate::oculomotor::GazeState;

fn arr(v: &Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixationReport {
    pub schema: String,
    pub alpha: f64,
    pub beta: f64,
    pub rho: f64,
    pub fixation_point: [f64; 3],
    pub beta_left: f64,
    pub beta_right: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub zeta: f64,
    pub eta: f64,
    pub epipole_left: [f64; 3],
    pub epipole_right: [f64; 3],
}

pub fn fixation_report(gaze: &GazeState) -> SimResult<FixationReport> {
    let az = gaze.eye_azimuths()?;
    let vv = az.vergence_version();
    let circle = vv.vieth_muller()?;
    let epi = Epipoles::from_azimuths(&az);
    Ok(FixationReport {
        schema: SCHEMA.to_string(),
        alpha: gaze.alpha(),
        beta: gaze.beta(),
        rho: gaze.rho(),
        fixation_point: arr(&gaze.fixation_point()),
        beta_left: az.left,
        beta_right: az.right,
        delta: vv.delta,
        epsilon: vv.epsilon,
        zeta: circle.zeta,
        eta: circle.eta,
        epipole_left: arr(epi.left.coords()),
        epipole_right: arr(epi.right.coords()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EssentialReport {
    pub schema: String,
    pub gaze: GazeState,
    /// Closed-form E, row-major; unit singular values.
    pub matrix: [[f64; 3]; 3],
    pub singular_values: [f64; 3],
    pub epipole_left: [f64; 3],
    pub epipole_right: [f64; 3],
    /// Image of the midline horopter, common to both eyes.
    pub horopter_line: [f64; 3],
}

pub fn essential_report(gaze: &GazeState) -> SimResult<EssentialReport> {
    let az = gaze.eye_azimuths()?;
    let e = EssentialMatrix::closed_form(&az);
    let epi = Epipoles::from_azimuths(&az);
    let midline = MidlineHoropter::from_vergence(&az.vergence_version())?;
    let m = e.matrix();
    Ok(EssentialReport {
        schema: SCHEMA.to_string(),
        gaze: *gaze,
        matrix: std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)])),
        singular_values: e.singular_values(),
        epipole_left: arr(epi.left.coords()),
        epipole_right: arr(epi.right.coords()),
        horopter_line: arr(midline.image_line.coords()),
    })
}

/// Polylines of the forward circle and the midline axis as
/// `component,x,y,z` rows in scene coordinates. The circle starts at its top
/// point, runs out to one optical centre, then from beside the top to the
/// other. The midline spans `|y| <= extent`.
pub fn horopter_csv(gaze: &GazeState, samples: usize, extent: f64) -> SimResult<String> {
    if samples < 2 {
        return Err(SimError::Invalid(format!(
            "samples = {samples} must be at least 2"
        )));
    }
    if !(extent > 0.0 && extent.is_finite()) {
        return Err(SimError::Invalid(format!(
            "extent = {extent} must be positive"
        )));
    }
    let vv = gaze.eye_azimuths()?.vergence_version();
    let circle = vv.vieth_muller()?;
    let midline = MidlineHoropter::from_vergence(&vv)?;
    let limit = forward_arc_limit(&vv);

    let positive = samples / 2;
    let negative = samples - 1 - positive;
    let thetas = std::iter::once(0.0)
        .chain((1..=positive).map(|i| limit * i as f64 / positive as f64))
        .chain((1..=negative).map(|i| -limit * i as f64 / negative as f64));

    let mut out = String::from("component,x,y,z\n");
    for theta in thetas {
        let q = to_scene(gaze, &vm_point(&circle, theta)?);
        writeln!(out, "circle,{},{},{}", q.x, q.y, q.z).expect("write to String");
    }
    for k in 0..samples {
        let y = -extent + 2.0 * extent * k as f64 / (samples - 1) as f64;
        let q = to_scene(gaze, &midline.scene_point(y));
        writeln!(out, "midline,{},{},{}", q.x, q.y, q.z).expect("write to String");
    }
    Ok(out)
}

fn inhomogeneous(p: &HomogPoint2) -> Option<[f64; 2]> {
    p.inhomogeneous().ok().map(|(x, y)| [x, y])
}

/// Plane-relative depth of every row under `gaze`, or under the file's own
/// gaze when none is given.
pub fn reconstruct(file: &CorrespondenceFile, gaze: Option<GazeState>) -> SimResult<DepthMapFile> {
    require_records(file)?;
    let gaze = gaze.or(file.gaze).ok_or_else(|| {
        SimError::Invalid("no gaze given and the file header carries none".into())
    })?;
    let correspondences = file.correspondences()?;
    let estimates = estimate_depth_map(&correspondences, &gaze);

    let mut failed = 0;
    let records: Vec<DepthRecord> = estimates
        .iter()
        .zip(&file.records)
        .map(|(est, row)| match est {
            Ok(d) => DepthRecord {
                p_c: inhomogeneous(&d.sample.cyclopean_dir),
                s_est: Some(d.sample.s),
                s_left: Some(d.s_left),
                s_right: Some(d.s_right),
                s_true: row.s,
                error: None,
            },
            Err(e) => {
                failed += 1;
                DepthRecord {
                    p_c: None,
                    s_est: None,
                    s_left: None,
                    s_right: None,
                    s_true: row.s,
                    error: Some(e.to_string()),
                }
            }
        })
        .collect();

    let stats = if file.has_truth() {
        ErrorStats::from_errors(records.iter().filter_map(|r| Some(r.s_est? - r.s_true?)))
    } else {
        None
    };
    Ok(DepthMapFile {
        schema: SCHEMA.to_string(),
        gaze,
        failed,
        stats,
        records,
    })
}

/// Grid-seeded gaze estimation followed by reconstruction under the
/// estimate. Elevation is unobservable from the images; it comes from
/// `alpha`, else the file header, else `config.alpha`.
pub fn run_estimate(
    file: &CorrespondenceFile,
    config: &EstimatorConfig,
    alpha: Option<f64>,
) -> SimResult<ExperimentRecord> {
    require_records(file)?;
    let mut config = *config;
    config.alpha = alpha
        .or(file.gaze.map(|g| g.alpha()))
        .unwrap_or(config.alpha);
    let correspondences = file.correspondences()?;

    let start = Instant::now();
    let est = estimate_gaze_from_grid(&correspondences, &config)?;
    let estimate_ms = start.elapsed().as_secs_f64() * 1e3;

    let start = Instant::now();
    let depths = estimate_depth_map(&correspondences, &est.gaze);
    let reconstruct_ms = start.elapsed().as_secs_f64() * 1e3;

    let e = EssentialMatrix::closed_form(&est.azimuths);
    let residual_stats = ErrorStats::from_errors(
        correspondences
            .iter()
            .map(|c| e.residual(&c.left, &c.right)),
    )
    .expect("records are non-empty");

    let points: Vec<PointRecord> = file
        .records
        .iter()
        .zip(&depths)
        .map(|(row, d)| PointRecord {
            p_c: row.p_c,
            s_true: row.s,
            s_est: d.as_ref().ok().map(|d| d.sample.s),
            q_l: row.q_l,
            q_r: row.q_r,
        })
        .collect();
    let depth_stats = if file.has_truth() {
        ErrorStats::from_errors(points.iter().filter_map(|p| Some(p.s_est? - p.s_true?)))
    } else {
        None
    };

    let vv = est.azimuths.vergence_version();
    let deltas = file.gaze.map(|truth| {
        let az = truth
            .eye_azimuths()
            .expect("header gaze was validated on parse");
        GazeDeltas {
            beta_left: est.azimuths.left - az.left,
            beta_right: est.azimuths.right - az.right,
            beta: est.gaze.beta() - truth.beta(),
            rho: est.gaze.rho() - truth.rho(),
            rho_relative: (est.gaze.rho() - truth.rho()) / truth.rho(),
        }
    });

    Ok(ExperimentRecord {
        schema: SCHEMA.to_string(),
        gaze_truth: file.gaze,
        estimate: EstimateRecord {
            beta_left: est.azimuths.left,
            beta_right: est.azimuths.right,
            delta: vv.delta,
            epsilon: vv.epsilon,
            alpha: est.gaze.alpha(),
            beta: est.gaze.beta(),
            rho: est.gaze.rho(),
            rms_residual: est.rms_residual,
            iterations: est.iterations,
            converged: est.converged,
        },
        deltas,
        residual_stats,
        depth_stats,
        timings: Timings {
            estimate_ms,
            reconstruct_ms,
        },
        points,
    })
}
