use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::records::{CorrespondenceFile, CorrespondenceRecord};
use super::{SimError, SimResult, SCHEMA};
use crate::disparity::{synthesize_correspondence, DepthSample};
use crate::geom::HomogPoint2;
use crate::horopter::{forward_arc_limit, to_scene, vm_point, MidlineHoropter};
use crate::oculomotor::GazeState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SceneKind {
    /// Uniform Cyclopean rays and plane depths inside the region.
    RandomBox,
    /// Points of the fixation plane (`s = 0`).
    FixationPlanePatch,
    /// Alternating samples of the forward circle and the midline axis.
    HoropterSamples,
}

/// Sampling box: Cyclopean image coordinates within `half_width` and
/// `half_height`, plane depth `s` in `[depth_min, depth_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub half_width: f64,
    pub half_height: f64,
    pub depth_min: f64,
    pub depth_max: f64,
}

impl Region {
    /// A box of rays with depths from a quarter range in front of the
    /// fixation plane to half a range behind it.
    pub fn default_for(rho: f64) -> Self {
        Self {
            half_width: 0.5,
            half_height: 0.4,
            depth_min: -0.25 * rho,
            depth_max: 0.5 * rho,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub kind: SceneKind,
    pub count: usize,
    pub region: Region,
    pub sigma: f64,
    pub seed: u64,
}

impl SceneSpec {
    pub fn validate(&self, gaze: &GazeState) -> SimResult<()> {
        let r = &self.region;
        if self.count == 0 {
            return Err(SimError::Invalid("count must be positive".into()));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(SimError::Invalid(format!(
                "sigma = {} must be >= 0",
                self.sigma
            )));
        }
        if !(r.half_width > 0.0 && r.half_width.is_finite())
            || !(r.half_height > 0.0 && r.half_height.is_finite())
        {
            return Err(SimError::Invalid(
                "region half-extents must be positive".into(),
            ));
        }
        if r.depth_min.is_nan() || r.depth_min > r.depth_max || !r.depth_max.is_finite() {
            return Err(SimError::Invalid(
                "depth range must satisfy min <= max".into(),
            ));
        }
        if r.depth_min <= -gaze.rho() {
            return Err(SimError::Invalid(format!(
                "depth-min = {} must exceed -rho = {} to stay in front of the eyes",
                r.depth_min,
                -gaze.rho()
            )));
        }
        Ok(())
    }
}

/// Draws `spec.count` scene points, projects them into both eyes and adds
/// isotropic Gaussian noise to each image independently. Points that cannot
/// be imaged by both eyes are skipped and counted. Noise is drawn even when
/// `sigma = 0`, so the geometry stream does not depend on `sigma`.
pub fn synthesize_scene(gaze: &GazeState, spec: &SceneSpec) -> SimResult<CorrespondenceFile> {
    spec.validate(gaze)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let vv = gaze.eye_azimuths()?.vergence_version();
    let circle = vv.vieth_muller()?;
    let midline = MidlineHoropter::from_vergence(&vv)?;
    let theta_max = 0.9 * forward_arc_limit(&vv);
    let r = spec.region;

    let mut records = Vec::with_capacity(spec.count);
    let mut skipped = 0;
    for i in 0..spec.count {
        let sample = match spec.kind {
            SceneKind::RandomBox => {
                let x = rng.random_range(-r.half_width..=r.half_width);
                let y = rng.random_range(-r.half_height..=r.half_height);
                let s = rng.random_range(r.depth_min..=r.depth_max);
                DepthSample::new(HomogPoint2::from_inhomogeneous(x, y), s, gaze.rho())
            }
            SceneKind::FixationPlanePatch => {
                let x = rng.random_range(-r.half_width..=r.half_width);
                let y = rng.random_range(-r.half_height..=r.half_height);
                DepthSample::new(HomogPoint2::from_inhomogeneous(x, y), 0.0, gaze.rho())
            }
            SceneKind::HoropterSamples => {
                let u: f64 = rng.random_range(-1.0..=1.0);
                let q = if i % 2 == 0 {
                    vm_point(&circle, u * theta_max)
                } else {
                    Ok(midline.scene_point(u * r.half_height * midline.scene_base.z))
                };
                q.and_then(|q| DepthSample::from_scene_point(gaze, &to_scene(gaze, &q)))
            }
        };
        let noise: [f64; 4] = std::array::from_fn(|_| rng.sample::<f64, _>(StandardNormal));

        let Ok(sample) = sample else {
            skipped += 1;
            continue;
        };
        let Ok(c) = synthesize_correspondence(gaze, &sample.cyclopean_dir, sample.s) else {
            skipped += 1;
            continue;
        };
        let (Ok(ql), Ok(qr), Ok(pc)) = (
            c.left.inhomogeneous(),
            c.right.inhomogeneous(),
            sample.cyclopean_dir.inhomogeneous(),
        ) else {
            skipped += 1;
            continue;
        };
        let sigma = spec.sigma;
        records.push(CorrespondenceRecord {
            p_c: Some([pc.0, pc.1]),
            s: Some(sample.s),
            q_l: [ql.0 + sigma * noise[0], ql.1 + sigma * noise[1]],
            q_r: [qr.0 + sigma * noise[2], qr.1 + sigma * noise[3]],
        });
    }

    Ok(CorrespondenceFile {
        schema: SCHEMA.to_string(),
        gaze: Some(*gaze),
        scene: Some(*spec),
        skipped,
        records,
    })
}
