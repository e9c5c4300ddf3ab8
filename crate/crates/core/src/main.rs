use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cyclovision::estimation::EstimatorConfig;
use cyclovision::oculomotor::{helmholtz_from_point, DEFAULT_MIN_RANGE};
use cyclovision::sim::{
    essential_report, fixation_report, horopter_csv, read_json, reconstruct, run_estimate,
    synthesize_scene, to_json, write_text, CorrespondenceFile, Region, SceneKind, SceneSpec,
    SimError, SimResult,
};
use cyclovision::{GazeState, Vec3};

/// Binocular fixation geometry: gaze conversions, horopter, epipolar
/// geometry, synthetic stereo and gaze estimation.
#[derive(Parser)]
#[command(name = "cyclovision", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eye azimuths, vergence, version, circle and epipoles of a gaze.
    Fixate {
        #[command(flatten)]
        gaze: GazeArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Circle and midline horopter polylines as CSV.
    Horopter {
        #[command(flatten)]
        gaze: GazeArgs,
        #[arg(long, default_value_t = 64)]
        samples: usize,
        /// Half-length of the midline segment.
        #[arg(long, default_value_t = 1.0)]
        extent: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form Essential matrix, epipoles and singular values.
    Essential {
        #[command(flatten)]
        gaze: GazeArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a noisy correspondence file from a synthetic scene.
    Synthesize {
        #[command(flatten)]
        gaze: GazeArgs,
        #[command(flatten)]
        scene: SceneArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plane-relative depth map of a correspondence file.
    Reconstruct {
        #[arg(long)]
        input: PathBuf,
        /// Overrides the gaze stored in the file header.
        #[command(flatten)]
        gaze: GazeArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recover the gaze from a correspondence file.
    Estimate {
        #[arg(long)]
        input: PathBuf,
        /// Elevation assigned to the estimate; defaults to the file header.
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
        #[arg(long)]
        degrees: bool,
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct GazeArgs {
    /// Elevation of the visual plane.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// Cyclopean azimuth.
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    /// Distance of the fixation point from the Cyclopean origin.
    #[arg(long, allow_hyphen_values = true)]
    rho: Option<f64>,
    /// Fixation point `x,y,z`, instead of angles and range.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true,
          conflicts_with_all = ["alpha", "beta", "rho"])]
    point: Option<Vec<f64>>,
    /// Read angles in degrees.
    #[arg(long)]
    degrees: bool,
    #[arg(long, default_value_t = DEFAULT_MIN_RANGE)]
    min_range: f64,
}

impl GazeArgs {
    fn given(&self) -> bool {
        self.point.is_some() || self.rho.is_some() || self.alpha.is_some() || self.beta.is_some()
    }

    fn resolve(&self) -> SimResult<GazeState> {
        if let Some(p) = &self.point {
            if p.len() != 3 {
                return Err(SimError::Invalid(format!(
                    "--point takes x,y,z; got {} values",
                    p.len()
                )));
            }
            let gaze = helmholtz_from_point(&Vec3::new(p[0], p[1], p[2]))?;
            return Ok(GazeState::with_min_range(
                gaze.alpha(),
                gaze.beta(),
                gaze.rho(),
                self.min_range,
            )?);
        }
        let rho = self
            .rho
            .ok_or_else(|| SimError::Invalid("either --rho or --point is required".into()))?;
        let angle = |a: Option<f64>| {
            let a = a.unwrap_or(0.0);
            if self.degrees {
                a.to_radians()
            } else {
                a
            }
        };
        Ok(GazeState::with_min_range(
            angle(self.alpha),
            angle(self.beta),
            rho,
            self.min_range,
        )?)
    }
}

#[derive(Args)]
struct SceneArgs {
    #[arg(long, value_enum, default_value_t = SceneKind::RandomBox)]
    scene: SceneKind,
    #[arg(long, default_value_t = 100)]
    count: usize,
    /// Standard deviation of the image noise.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    half_width: Option<f64>,
    #[arg(long)]
    half_height: Option<f64>,
    /// Nearest plane depth; negative is in front of the fixation plane.
    #[arg(long, allow_hyphen_values = true)]
    depth_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    depth_max: Option<f64>,
}

impl SceneArgs {
    fn spec(&self, gaze: &GazeState) -> SceneSpec {
        let d = Region::default_for(gaze.rho());
        SceneSpec {
            kind: self.scene,
            count: self.count,
            region: Region {
                half_width: self.half_width.unwrap_or(d.half_width),
                half_height: self.half_height.unwrap_or(d.half_height),
                depth_min: self.depth_min.unwrap_or(d.depth_min),
                depth_max: self.depth_max.unwrap_or(d.depth_max),
            },
            sigma: self.sigma,
            seed: self.seed,
        }
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> SimResult<()> {
    match out {
        Some(path) => write_text(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> SimResult<()> {
    match cli.command {
        Command::Fixate { gaze, out } => {
            emit(out.as_ref(), &to_json(&fixation_report(&gaze.resolve()?)?)?)
        }
        Command::Horopter {
            gaze,
            samples,
            extent,
            out,
        } => emit(
            out.as_ref(),
            &horopter_csv(&gaze.resolve()?, samples, extent)?,
        ),
        Command::Essential { gaze, out } => emit(
            out.as_ref(),
            &to_json(&essential_report(&gaze.resolve()?)?)?,
        ),
        Command::Synthesize { gaze, scene, out } => {
            let gaze = gaze.resolve()?;
            let file = synthesize_scene(&gaze, &scene.spec(&gaze))?;
            emit(out.as_ref(), &to_json(&file)?)
        }
        Command::Reconstruct { input, gaze, out } => {
            let file: CorrespondenceFile = read_json(&input)?;
            let gaze = if gaze.given() {
                Some(gaze.resolve()?)
            } else {
                None
            };
            emit(out.as_ref(), &to_json(&reconstruct(&file, gaze)?)?)
        }
        Command::Estimate {
            input,
            alpha,
            degrees,
            max_iter,
            out,
        } => {
            let file: CorrespondenceFile = read_json(&input)?;
            let config = EstimatorConfig {
                max_iterations: max_iter,
                ..EstimatorConfig::default()
            };
            let alpha = alpha.map(|a| if degrees { a.to_radians() } else { a });
            emit(
                out.as_ref(),
                &to_json(&run_estimate(&file, &config, alpha)?)?,
            )
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cyclovision: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
