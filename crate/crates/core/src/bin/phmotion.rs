use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use phmotion::bench::{timing_harness, DEFAULT_REPEATS};
use phmotion::error::{Error, Result};
use phmotion::frames::ConstraintConfig;
use phmotion::geom::Pose;
use phmotion::hermite::FreeAngles;
use phmotion::io::{parse_pose_line, read_trajectory_file, write_poses};
use phmotion::metrics::{evaluate, EvalOptions, MetricsReport, DEFAULT_MAX_DT};
use phmotion::pipeline::{
    build_segments, reconstruct, simulate_online, FramePolicy, PipelineConfig, PoseStream, SampledTrajectory,
    SpeedPolicy,
};
use phmotion::tracking::PredictorConfig;

#[derive(Parser)]
#[command(name = "phmotion", version, about = "Pose trajectory interpolation with quintic PH curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the segment between two poses
    Interpolate {
        /// Start pose as "t x y z qx qy qz qw"
        #[arg(long, allow_hyphen_values = true)]
        start: String,
        /// End pose as "t x y z qx qy qz qw"
        #[arg(long, allow_hyphen_values = true)]
        end: String,
        #[arg(long, default_value_t = 60.0)]
        rate: f64,
        #[command(flatten)]
        curve: CurveArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Reconstruct a pose file at a new rate
    Resample {
        input: PathBuf,
        #[arg(long, default_value_t = 60.0)]
        rate: f64,
        #[command(flatten)]
        curve: CurveArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Causal reconstruction through the Kalman predictor
    Simulate {
        input: PathBuf,
        #[arg(long, default_value_t = 60.0)]
        rate: f64,
        /// Prediction horizon in seconds [default: interval to the next measurement]
        #[arg(long)]
        horizon: Option<f64>,
        /// Acceleration noise density, m²/s³
        #[arg(long, default_value_t = PredictorConfig::default().accel_density)]
        accel_density: f64,
        /// Position measurement sigma, m
        #[arg(long, default_value_t = PredictorConfig::default().position_sigma)]
        position_sigma: f64,
        /// Orientation measurement sigma, degrees
        #[arg(long, default_value_t = 1.0)]
        orientation_sigma_deg: f64,
        /// Write per-knot prediction errors here as CSV
        #[arg(long)]
        errors: Option<PathBuf>,
        #[command(flatten)]
        curve: CurveArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Compare an estimate with ground truth
    Evaluate {
        estimate: PathBuf,
        ground_truth: PathBuf,
        /// Association window, seconds
        #[arg(long, default_value_t = DEFAULT_MAX_DT)]
        max_dt: f64,
        /// Rigidly align the estimate onto the ground truth first
        #[arg(long)]
        align: bool,
        #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
        format: ReportFormat,
        /// Also write the residual series as CSV
        #[arg(long)]
        residuals: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Time segment sampling at several sizes
    Bench {
        #[arg(long, value_delimiter = ',', default_values_t = [10_000usize, 100_000])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_REPEATS)]
        repeats: usize,
        #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
        format: ReportFormat,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct CurveArgs {
    #[arg(long, default_value_t = -std::f64::consts::FRAC_PI_2, allow_hyphen_values = true)]
    phi0: f64,
    #[arg(long, default_value_t = -std::f64::consts::FRAC_PI_2, allow_hyphen_values = true)]
    phi1: f64,
    #[arg(long, default_value_t = -std::f64::consts::FRAC_PI_2, allow_hyphen_values = true)]
    phi2: f64,
    /// Curvature bound, 1/m
    #[arg(long, default_value_t = ConstraintConfig::default().kappa_max)]
    kappa_max: f64,
    /// Torsion bound, 1/m
    #[arg(long, default_value_t = ConstraintConfig::default().tau_max)]
    tau_max: f64,
    /// End tangent speed policy [default: chord offline, filter online]
    #[arg(long, value_enum)]
    speed: Option<SpeedArg>,
    #[arg(long, value_enum, default_value_t = FrameArg::Rmf)]
    frames: FrameArg,
}

#[derive(Args)]
struct OutArgs {
    #[arg(long, value_enum, default_value_t = SampleFormat::Traj)]
    format: SampleFormat,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpeedArg {
    Chord,
    Filter,
}

#[derive(Clone, Copy, ValueEnum)]
enum FrameArg {
    Rmf,
    Frenet,
}

#[derive(Clone, Copy, ValueEnum)]
enum SampleFormat {
    /// `timestamp tx ty tz qx qy qz qw` lines
    Traj,
    /// One JSON object per sample
    Json,
    /// Poses with frames
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Json,
    Csv,
}

impl CurveArgs {
    fn config(&self) -> Result<PipelineConfig> {
        Ok(PipelineConfig {
            angles: FreeAngles::new(self.phi0, self.phi1, self.phi2),
            constraints: ConstraintConfig::new(self.kappa_max, self.tau_max)?,
            frames: match self.frames {
                FrameArg::Rmf => FramePolicy::Rmf,
                FrameArg::Frenet => FramePolicy::Frenet,
            },
            speed: self.speed.map(|s| match s {
                SpeedArg::Chord => SpeedPolicy::Chord,
                SpeedArg::Filter => SpeedPolicy::Filter,
            }),
            ..PipelineConfig::default()
        })
    }
}

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_samples(traj: &SampledTrajectory, out: &OutArgs) -> Result<()> {
    let mut w = sink(&out.output)?;
    match out.format {
        SampleFormat::Traj => write_poses(&traj.poses(), &mut w)?,
        SampleFormat::Json => {
            for s in &traj.samples {
                let line = serde_json::to_string(s).map_err(|e| Error::InvalidArgument(e.to_string()))?;
                writeln!(w, "{line}")?;
            }
        }
        SampleFormat::Csv => {
            writeln!(
                w,
                "t,x,y,z,qx,qy,qz,qw,tx,ty,tz,nx,ny,nz,bx,by,bz,curvature,torsion,theta,segment,fallback"
            )?;
            for s in &traj.samples {
                let (p, q, f) = (s.pose.position, s.pose.orientation.quaternion(), &s.frame);
                let torsion = f.torsion.map_or(String::new(), |v| format!("{v:?}"));
                writeln!(
                    w,
                    "{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{},{:?},{},{}",
                    s.pose.t, p.x, p.y, p.z, q.x, q.y, q.z, q.w,
                    f.tangent.x, f.tangent.y, f.tangent.z,
                    f.normal.x, f.normal.y, f.normal.z,
                    f.binormal.x, f.binormal.y, f.binormal.z,
                    f.curvature, torsion, f.theta, s.segment, s.fallback
                )?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn write_report(report: &MetricsReport, format: ReportFormat, output: &Option<PathBuf>) -> Result<()> {
    let mut w = sink(output)?;
    match format {
        ReportFormat::Json => writeln!(w, "{}", report.to_json_line()?)?,
        ReportFormat::Csv => {
            if report.timing.is_empty() {
                report.write_summary_csv(&mut w)?;
            } else {
                report.write_timing_csv(&mut w)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn pose_arg(text: &str) -> Result<Pose> {
    parse_pose_line(&text.replace(',', " "), 1)?
        .ok_or_else(|| Error::InvalidArgument(format!("no pose in {text:?}")))
}

fn report_warnings(stream: &PoseStream, cfg: &PipelineConfig) -> Result<()> {
    for (k, seg) in build_segments(stream, cfg)?.iter().enumerate() {
        for w in &seg.warnings {
            warn!("segment {k}: {w}");
        }
    }
    Ok(())
}

fn read(path: &Path) -> Result<PoseStream> {
    let s = read_trajectory_file(path)?;
    info!("read {} poses from {}", s.len(), path.display());
    Ok(s)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Interpolate {
            start,
            end,
            rate,
            curve,
            out,
        } => {
            let stream = PoseStream::new(vec![pose_arg(&start)?, pose_arg(&end)?])?;
            let cfg = curve.config()?;
            report_warnings(&stream, &cfg)?;
            write_samples(&reconstruct(&stream, rate, &cfg)?, &out)
        }
        Command::Resample {
            input,
            rate,
            curve,
            out,
        } => {
            let stream = read(&input)?;
            let cfg = curve.config()?;
            report_warnings(&stream, &cfg)?;
            write_samples(&reconstruct(&stream, rate, &cfg)?, &out)
        }
        Command::Simulate {
            input,
            rate,
            horizon,
            accel_density,
            position_sigma,
            orientation_sigma_deg,
            errors,
            curve,
            out,
        } => {
            let stream = read(&input)?;
            let cfg = PipelineConfig {
                horizon,
                predictor: PredictorConfig {
                    accel_density,
                    position_sigma,
                    orientation_sigma: orientation_sigma_deg.to_radians(),
                    ..PredictorConfig::default()
                },
                ..curve.config()?
            };
            let result = simulate_online(&stream, rate, &cfg)?;
            if result.fallback_segments > 0 {
                warn!("{} segments used the linear fallback", result.fallback_segments);
            }
            if let Some(path) = errors {
                let mut w = BufWriter::new(File::create(path)?);
                writeln!(w, "t,position_error,rotation_error_deg")?;
                for e in &result.prediction_errors {
                    writeln!(w, "{:?},{:?},{:?}", e.t, e.position, e.rotation_deg)?;
                }
                w.flush()?;
            }
            write_samples(&result.trajectory, &out)
        }
        Command::Evaluate {
            estimate,
            ground_truth,
            max_dt,
            align,
            format,
            residuals,
            output,
        } => {
            if !(max_dt >= 0.0) {
                return Err(Error::InvalidArgument(format!("max-dt must be non-negative, got {max_dt}")));
            }
            let est = read(&estimate)?;
            let gt = read(&ground_truth)?;
            let report = evaluate(&est, &gt, &EvalOptions { max_dt, align })?;
            if let Some(path) = residuals {
                let mut w = BufWriter::new(File::create(path)?);
                report.write_residuals_csv(&mut w)?;
                w.flush()?;
            }
            write_report(&report, format, &output)
        }
        Command::Bench {
            sizes,
            repeats,
            format,
            output,
        } => {
            let timing = timing_harness(&sizes, repeats)?;
            let report = MetricsReport {
                timing,
                ..MetricsReport::empty()
            };
            write_report(&report, format, &output)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Io(_) => 2,
                _ => 1,
            })
        }
    }
}
