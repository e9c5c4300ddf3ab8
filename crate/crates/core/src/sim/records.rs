use serde::{Deserialize, Serialize};

use super::scene::SceneSpec;
use super::{SimError, SimResult};
use crate::disparity::{Correspondence, DepthSample};
use crate::geom::HomogPoint2;
use crate::oculomotor::GazeState;

/// One row of a correspondence file. `p_c` and `s` are ground truth and may
/// be absent for measured data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_c: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    pub q_l: [f64; 2],
    pub q_r: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceFile {
    pub schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gaze: Option<GazeState>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scene: Option<SceneSpec>,
    /// Points the generator dropped because an eye could not image them.
    #[serde(default)]
    pub skipped: usize,
    pub records: Vec<CorrespondenceRecord>,
}

impl CorrespondenceFile {
    /// Image pairs with ground truth attached where the file carries it.
    pub fn correspondences(&self) -> SimResult<Vec<Correspondence>> {
        self.records
            .iter()
            .map(|r| {
                let mut c = Correspondence::new(
                    HomogPoint2::from_inhomogeneous(r.q_l[0], r.q_l[1]),
                    HomogPoint2::from_inhomogeneous(r.q_r[0], r.q_r[1]),
                )?;
                if let (Some(p), Some(s), Some(g)) = (r.p_c, r.s, self.gaze) {
                    c.truth = Some(DepthSample::new(
                        HomogPoint2::from_inhomogeneous(p[0], p[1]),
                        s,
                        g.rho(),
                    )?);
                }
                Ok(c)
            })
            .collect()
    }

    pub fn has_truth(&self) -> bool {
        self.gaze.is_some() && self.records.iter().all(|r| r.s.is_some())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub count: usize,
    pub rms: f64,
    pub max_abs: f64,
}

impl ErrorStats {
    pub fn from_errors(errors: impl IntoIterator<Item = f64>) -> Option<Self> {
        let (mut count, mut sum_sq, mut max_abs) = (0usize, 0.0, 0.0f64);
        for e in errors {
            count += 1;
            sum_sq += e * e;
            max_abs = max_abs.max(e.abs());
        }
        (count > 0).then(|| Self {
            count,
            rms: (sum_sq / count as f64).sqrt(),
            max_abs,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthRecord {
    /// Cyclopean image of the triangulated point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_c: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_est: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_left: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_right: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_true: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthMapFile {
    pub schema: String,
    pub gaze: GazeState,
    pub failed: usize,
    /// Error of `s_est` against `s_true`; absent without ground truth.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<ErrorStats>,
    pub records: Vec<DepthRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub beta_left: f64,
    pub beta_right: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub beta: f64,
    pub rho: f64,
    pub rms_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Estimate minus truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GazeDeltas {
    pub beta_left: f64,
    pub beta_right: f64,
    pub beta: f64,
    pub rho: f64,
    pub rho_relative: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_c: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_true: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_est: Option<f64>,
    pub q_l: [f64; 2],
    pub q_r: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub estimate_ms: f64,
    pub reconstruct_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gaze_truth: Option<GazeState>,
    pub estimate: EstimateRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deltas: Option<GazeDeltas>,
    /// Algebraic epipolar residuals under the estimated gaze.
    pub residual_stats: ErrorStats,
    /// Depth error under the estimated gaze, when truth is present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth_stats: Option<ErrorStats>,
    pub timings: Timings,
    pub points: Vec<PointRecord>,
}

pub(super) fn require_records(file: &CorrespondenceFile) -> SimResult<()> {
    if file.records.is_empty() {
        return Err(SimError::Invalid(
            "correspondence file has no records".into(),
        ));
    }
    Ok(())
}
