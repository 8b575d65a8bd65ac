//! End-to-end reconstruction of a dense, framed trajectory from a sparse
//! pose stream.

use log::{debug, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{curvature, frenet_frame, torsion, validate, ConstraintConfig, ConstraintReport, FrameSample, RmfTrack};
use crate::geom::{Pose, UnitQuaternion, Vec3, EPS_DEGENERATE};
use crate::hermite::{end_tangent_from_pose, solve_canonical, FreeAngles, HermiteData};
use crate::ph::PhQuintic;
use crate::tracking::{PredictorConfig, PredictorState};

/// Slack added before flooring the sample count, so spans that are whole
/// multiples of the interval up to rounding keep their last sample.
pub const GRID_SLACK: f64 = 1e-9;

/// Poses with strictly increasing timestamps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Pose>", into = "Vec<Pose>")]
pub struct PoseStream(Vec<Pose>);

impl PoseStream {
    pub fn new(poses: Vec<Pose>) -> Result<Self> {
        if poses.is_empty() {
            return Err(Error::EmptyStream);
        }
        for (k, w) in poses.windows(2).enumerate() {
            if !(w[1].t > w[0].t) {
                return Err(Error::NonMonotonicStream { index: k + 1 });
            }
        }
        Ok(PoseStream(poses))
    }

    pub fn poses(&self) -> &[Pose] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn t_start(&self) -> f64 {
        self.0[0].t
    }

    pub fn t_end(&self) -> f64 {
        self.0[self.0.len() - 1].t
    }

    pub fn into_poses(self) -> Vec<Pose> {
        self.0
    }
}

impl TryFrom<Vec<Pose>> for PoseStream {
    type Error = Error;
    fn try_from(v: Vec<Pose>) -> Result<Self> {
        PoseStream::new(v)
    }
}

impl From<PoseStream> for Vec<Pose> {
    fn from(s: PoseStream) -> Self {
        s.0
    }
}

/// Which moving frame is reported with each sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FramePolicy {
    Frenet,
    #[default]
    Rmf,
}

/// How the magnitude of the end tangents is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpeedPolicy {
    /// Knot speed from the neighbouring chords.
    Chord,
    /// Speed of the Kalman velocity estimate (online mode only).
    Filter,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub angles: FreeAngles,
    pub constraints: ConstraintConfig,
    pub frames: FramePolicy,
    /// `None` picks [`SpeedPolicy::Chord`] for [`reconstruct`] and
    /// [`SpeedPolicy::Filter`] for [`simulate_online`].
    pub speed: Option<SpeedPolicy>,
    pub predictor: PredictorConfig,
    /// Prediction horizon in seconds; `None` uses the interval to the next
    /// measurement.
    pub horizon: Option<f64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            angles: FreeAngles::default(),
            constraints: ConstraintConfig::default(),
            frames: FramePolicy::Rmf,
            speed: None,
            predictor: PredictorConfig::default(),
            horizon: None,
        }
    }
}

#[derive(Debug, Clone)]
enum Curve {
    Ph {
        segment: PhQuintic,
        track: RmfTrack,
        /// Body-frame rotation taking the track frame onto the start pose.
        offset: UnitQuaternion,
        /// Rotation vector, about body x, of the end mismatch.
        twist: Vec3,
        length: f64,
    },
    Linear,
}

/// One reconstructed piece between two poses.
#[derive(Debug, Clone)]
pub struct FramedSegment {
    pub start: Pose,
    pub end: Pose,
    pub frames: FramePolicy,
    /// Constraint check, absent for the linear fallback.
    pub report: Option<ConstraintReport>,
    pub warnings: Vec<String>,
    curve: Curve,
}

impl FramedSegment {
    /// `true` when the Hermite solve failed and the segment is a straight
    /// line with spherical orientation interpolation.
    pub fn is_fallback(&self) -> bool {
        matches!(self.curve, Curve::Linear)
    }

    pub fn curve(&self) -> Option<&PhQuintic> {
        match &self.curve {
            Curve::Ph { segment, .. } => Some(segment),
            Curve::Linear => None,
        }
    }

    pub fn duration(&self) -> f64 {
        self.end.t - self.start.t
    }

    fn param(&self, time: f64) -> f64 {
        ((time - self.start.t) / self.duration()).clamp(0.0, 1.0)
    }

    /// Velocity in m/s at absolute time `time`, clamped to the segment.
    pub fn velocity(&self, time: f64) -> Vec3 {
        match &self.curve {
            Curve::Ph { segment, .. } => segment.derivative(self.param(time), 1) / self.duration(),
            Curve::Linear => (self.end.position - self.start.position) / self.duration(),
        }
    }

    /// Pose and frame at absolute time `time`, clamped to the segment.
    pub fn sample(&self, time: f64) -> (Pose, FrameSample) {
        let u = self.param(time);
        match &self.curve {
            Curve::Ph {
                segment,
                track,
                offset,
                twist,
                length,
            } => {
                let s = if *length > 0.0 { segment.arc_length(u) / length } else { u };
                let q = track.orientation(u) * *offset * UnitQuaternion::exp(*twist * s);
                let point = segment.eval(u);
                let frame = match self.frames {
                    FramePolicy::Frenet => frenet_frame(segment, u).unwrap_or_else(|_| axes_frame(u, point, q)),
                    FramePolicy::Rmf => {
                        let mut f = axes_frame(u, point, q);
                        f.curvature = curvature(segment, u).unwrap_or(0.0);
                        f.torsion = torsion(segment, u).ok();
                        if let Ok(fr) = frenet_frame(segment, u) {
                            f.theta = f.normal.dot(fr.binormal).atan2(f.normal.dot(fr.normal));
                        }
                        f
                    }
                };
                (Pose::new(time, point, q), frame)
            }
            Curve::Linear => {
                let point = self.start.position + (self.end.position - self.start.position) * u;
                let q = self.start.orientation.slerp(self.end.orientation, u);
                (Pose::new(time, point, q), axes_frame(u, point, q))
            }
        }
    }
}

fn axes_frame(t: f64, point: Vec3, q: UnitQuaternion) -> FrameSample {
    FrameSample {
        t,
        point,
        tangent: q.rotate(Vec3::X),
        normal: q.rotate(Vec3::Y),
        binormal: q.rotate(Vec3::Z),
        curvature: 0.0,
        torsion: None,
        theta: 0.0,
    }
}

fn linear(current: &Pose, next: &Pose, frames: FramePolicy, reason: String) -> FramedSegment {
    FramedSegment {
        start: *current,
        end: *next,
        frames,
        report: None,
        warnings: vec![reason],
        curve: Curve::Linear,
    }
}

/// Builds the segment between two poses with explicit end speeds, in metres
/// per second.
pub fn build_segment_with_speeds(
    current: &Pose,
    next: &Pose,
    speeds: (f64, f64),
    cfg: &PipelineConfig,
) -> Result<FramedSegment> {
    let dt = next.t - current.t;
    if !(dt > 0.0) {
        return Err(Error::NonMonotonicTimestamp {
            previous: current.t,
            current: next.t,
        });
    }
    let scale = (next.position - current.position)
        .norm()
        .max(current.position.max_abs())
        .max(next.position.max_abs())
        .max(1.0);
    if !(speeds.0 * dt > EPS_DEGENERATE * scale && speeds.1 * dt > EPS_DEGENERATE * scale) {
        debug!("segment at t={} has no speed, using linear fallback", current.t);
        return Ok(linear(current, next, cfg.frames, "stationary segment".into()));
    }
    let data = HermiteData::new(
        current.position,
        next.position,
        end_tangent_from_pose(current, speeds.0 * dt),
        end_tangent_from_pose(next, speeds.1 * dt),
    );
    let solved = solve_canonical(&data, &cfg.angles).and_then(|sol| {
        let segment = sol.segment(current.t, next.t);
        let track = RmfTrack::new(&segment)?;
        Ok((segment, track))
    });
    let (segment, track) = match solved {
        Ok(v) => v,
        Err(Error::NonFinite) => return Err(Error::NonFinite),
        Err(e) => {
            warn!("segment at t={} downgraded to linear: {e}", current.t);
            return Ok(linear(current, next, cfg.frames, format!("linear fallback: {e}")));
        }
    };
    let offset = track.orientation(0.0).inverse() * current.orientation;
    let mismatch = (track.orientation(1.0) * offset).inverse() * next.orientation;
    // both orientations carry the end tangent on their x axis, so the
    // mismatch is a roll about body x
    let twist = Vec3::new(mismatch.log().x, 0.0, 0.0);
    let report = validate(&segment, &cfg.constraints);
    let warnings = report.warnings();
    for w in &warnings {
        warn!("segment at t={}: {w}", current.t);
    }
    let length = segment.length();
    Ok(FramedSegment {
        start: *current,
        end: *next,
        frames: cfg.frames,
        report: Some(report),
        warnings,
        curve: Curve::Ph {
            segment,
            track,
            offset,
            twist,
            length,
        },
    })
}

/// Builds a lone segment with chord-length end speeds.
pub fn build_segment(current: &Pose, next: &Pose, cfg: &PipelineConfig) -> Result<FramedSegment> {
    let speed = (next.position - current.position).norm() / (next.t - current.t);
    build_segment_with_speeds(current, next, (speed, speed), cfg)
}

/// Knot speeds in m/s: the mean chord speed of the adjacent segments.
fn knot_speeds(poses: &[Pose]) -> Vec<f64> {
    let chord: Vec<f64> = poses
        .windows(2)
        .map(|w| (w[1].position - w[0].position).norm() / (w[1].t - w[0].t))
        .collect();
    (0..poses.len())
        .map(|k| match (k.checked_sub(1).map(|j| chord[j]), chord.get(k)) {
            (Some(a), Some(b)) => 0.5 * (a + b),
            (Some(a), None) => a,
            (None, Some(b)) => *b,
            (None, None) => 0.0,
        })
        .collect()
}

/// One output sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub pose: Pose,
    pub frame: FrameSample,
    /// Index of the source segment.
    pub segment: usize,
    pub fallback: bool,
}

/// Samples on the grid `t_start + k/rate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledTrajectory {
    pub rate: f64,
    pub t_start: f64,
    pub samples: Vec<TrajectorySample>,
}

impl SampledTrajectory {
    pub fn poses(&self) -> Vec<Pose> {
        self.samples.iter().map(|s| s.pose).collect()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Number of samples covering `[t_start, t_end]` at `rate`.
pub fn sample_count(t_start: f64, t_end: f64, rate: f64) -> usize {
    ((t_end - t_start) * rate + GRID_SLACK).floor() as usize + 1
}

/// Timestamp of grid sample `k`.
pub fn grid_time(t_start: f64, k: usize, rate: f64) -> f64 {
    t_start + k as f64 / rate
}

fn check_rate(rate: f64) -> Result<()> {
    if rate.is_finite() && rate > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("rate must be positive, got {rate}")))
    }
}

fn check_stream(stream: &PoseStream) -> Result<()> {
    if stream.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: stream.len(),
        });
    }
    Ok(())
}

/// Segment index for time `t`, given segment start times.
fn locate(starts: &[f64], t: f64) -> usize {
    starts.partition_point(|&s| s <= t).saturating_sub(1)
}

fn sample_segments(segments: &[FramedSegment], t_start: f64, t_end: f64, rate: f64) -> SampledTrajectory {
    let starts: Vec<f64> = segments.iter().map(|s| s.start.t).collect();
    let n = sample_count(t_start, t_end, rate);
    let samples = (0..n)
        .into_par_iter()
        .map(|k| {
            let t = grid_time(t_start, k, rate);
            let j = locate(&starts, t);
            let seg = &segments[j];
            let (pose, frame) = seg.sample(t);
            TrajectorySample {
                pose,
                frame,
                segment: j,
                fallback: seg.is_fallback(),
            }
        })
        .collect();
    SampledTrajectory {
        rate,
        t_start,
        samples,
    }
}

/// Builds every segment of a stream with shared knot tangents.
pub fn build_segments(stream: &PoseStream, cfg: &PipelineConfig) -> Result<Vec<FramedSegment>> {
    check_stream(stream)?;
    if cfg.speed == Some(SpeedPolicy::Filter) {
        return Err(Error::InvalidArgument("the filter speed policy needs the online simulation".into()));
    }
    let poses = stream.poses();
    let speeds = knot_speeds(poses);
    (0..poses.len() - 1)
        .into_par_iter()
        .map(|k| build_segment_with_speeds(&poses[k], &poses[k + 1], (speeds[k], speeds[k + 1]), cfg))
        .collect()
}

/// Offline reconstruction of the whole stream at `rate` Hz.
pub fn reconstruct(stream: &PoseStream, rate: f64, cfg: &PipelineConfig) -> Result<SampledTrajectory> {
    check_rate(rate)?;
    let segments = build_segments(stream, cfg)?;
    Ok(sample_segments(&segments, stream.t_start(), stream.t_end(), rate))
}

/// Prediction quality at one knot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionError {
    pub t: f64,
    /// m.
    pub position: f64,
    /// Degrees.
    pub rotation_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnlineResult {
    pub trajectory: SampledTrajectory,
    /// One entry per measurement after the first.
    pub prediction_errors: Vec<PredictionError>,
    pub fallback_segments: usize,
}

/// Causal reconstruction: at each measurement the filter is corrected, the
/// next pose is predicted, and the segment towards the prediction is what a
/// renderer shows until the next measurement arrives.
pub fn simulate_online(stream: &PoseStream, rate: f64, cfg: &PipelineConfig) -> Result<OnlineResult> {
    check_rate(rate)?;
    check_stream(stream)?;
    cfg.predictor.validate()?;
    if let Some(h) = cfg.horizon {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidArgument(format!("horizon must be positive, got {h}")));
        }
    }
    let policy = cfg.speed.unwrap_or(SpeedPolicy::Filter);
    let poses = stream.poses();
    let mut state = PredictorState::initialise(poses[0], cfg.predictor);
    let mut segments = Vec::with_capacity(poses.len());
    let mut errors = Vec::with_capacity(poses.len() - 1);
    for k in 0..poses.len() - 1 {
        if k > 0 {
            state = state.update(&poses[k])?;
        }
        let horizon = cfg.horizon.unwrap_or(poses[k + 1].t - poses[k].t);
        let predicted = state.predict_next(horizon);
        let speed = match policy {
            SpeedPolicy::Filter => state.linear_velocity.norm(),
            SpeedPolicy::Chord => (predicted.position - poses[k].position).norm() / horizon,
        };
        segments.push(build_segment_with_speeds(&poses[k], &predicted, (speed, speed), cfg)?);
        let truth = &poses[k + 1];
        let at_truth = if cfg.horizon.is_none() {
            predicted
        } else {
            state.predict_next(truth.t - poses[k].t)
        };
        errors.push(PredictionError {
            t: truth.t,
            position: (at_truth.position - truth.position).norm(),
            rotation_deg: at_truth.orientation.angle_to(truth.orientation).to_degrees(),
        });
    }
    // the final measurement is shown as is
    let last = poses[poses.len() - 1];
    let hold = Pose { t: last.t + 1.0, ..last };
    segments.push(linear(&last, &hold, cfg.frames, "final hold".into()));

    let starts: Vec<f64> = poses.iter().map(|p| p.t).collect();
    let n = sample_count(stream.t_start(), stream.t_end(), rate);
    let samples = (0..n)
        .into_par_iter()
        .map(|i| {
            let t = grid_time(stream.t_start(), i, rate);
            let j = locate(&starts, t);
            let seg = &segments[j];
            let (pose, frame) = seg.sample(t);
            TrajectorySample {
                pose,
                frame,
                segment: j,
                fallback: seg.is_fallback(),
            }
        })
        .collect();
    let fallback_segments = segments[..segments.len() - 1].iter().filter(|s| s.is_fallback()).count();
    Ok(OnlineResult {
        trajectory: SampledTrajectory {
            rate,
            t_start: stream.t_start(),
            samples,
        },
        prediction_errors: errors,
        fallback_segments,
    })
}

/// Naive upsampling: each sample repeats the latest measurement.
pub fn zero_order_hold(stream: &PoseStream, rate: f64) -> Result<SampledTrajectory> {
    check_rate(rate)?;
    let poses = stream.poses();
    let starts: Vec<f64> = poses.iter().map(|p| p.t).collect();
    let n = sample_count(stream.t_start(), stream.t_end(), rate);
    let samples = (0..n)
        .map(|i| {
            let t = grid_time(stream.t_start(), i, rate);
            let j = locate(&starts, t);
            let src = poses[j];
            TrajectorySample {
                pose: Pose { t, ..src },
                frame: axes_frame(0.0, src.position, src.orientation),
                segment: j,
                fallback: false,
            }
        })
        .collect();
    Ok(SampledTrajectory {
        rate,
        t_start: stream.t_start(),
        samples,
    })
}

/// Third-difference jerk statistics of a uniformly sampled trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JerkReport {
    /// Largest jerk magnitude, m/s³.
    pub max_jerk: f64,
    /// Root-mean-square jerk magnitude, m/s³.
    pub rms_jerk: f64,
    /// Largest absolute jerk per axis, m/s³.
    pub max_axis_jerk: [f64; 3],
    /// Largest rotation between consecutive samples, degrees.
    pub max_rotation_step_deg: f64,
}

pub fn jerk_report(traj: &SampledTrajectory) -> Result<JerkReport> {
    let s = &traj.samples;
    if s.len() < 4 {
        return Err(Error::TooFewSamples { needed: 4, got: s.len() });
    }
    let h3 = traj.rate.powi(3);
    let mut max_jerk: f64 = 0.0;
    let mut sum_sq = 0.0;
    let mut axis = [0.0f64; 3];
    for w in s.windows(4) {
        let p = |k: usize| w[k].pose.position;
        let j = (p(3) - p(2) * 3.0 + p(1) * 3.0 - p(0)) * h3;
        max_jerk = max_jerk.max(j.norm());
        sum_sq += j.norm_squared();
        for (a, v) in axis.iter_mut().zip(j.to_array()) {
            *a = a.max(v.abs());
        }
    }
    let max_rotation_step_deg = s
        .windows(2)
        .map(|w| w[0].pose.orientation.angle_to(w[1].pose.orientation).to_degrees())
        .fold(0.0, f64::max);
    Ok(JerkReport {
        max_jerk,
        rms_jerk: (sum_sq / (s.len() - 3) as f64).sqrt(),
        max_axis_jerk: axis,
        max_rotation_step_deg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tracking::RigidTransform;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pose(t: f64, p: Vec3, q: UnitQuaternion) -> Pose {
        Pose::new(t, p, q)
    }

    /// Knots along a wandering path, each facing roughly along its motion.
    fn wander(rng: &mut ChaCha8Rng, n: usize, t0: f64) -> PoseStream {
        let mut p = Vec3::ZERO;
        let mut heading = UnitQuaternion::IDENTITY;
        let mut t = t0;
        let mut out = Vec::new();
        for _ in 0..n {
            out.push(pose(t, p, heading));
            let turn = UnitQuaternion::exp(Vec3::new(
                rng.gen_range(-0.5..0.5),
                rng.gen_range(-0.3..0.3),
                rng.gen_range(-0.3..0.3),
            ));
            let step = rng.gen_range(0.02..0.06);
            p += heading.rotate(Vec3::X) * step;
            heading = turn * heading;
            t += rng.gen_range(0.02..0.05);
        }
        PoseStream::new(out).unwrap()
    }

    #[test]
    fn stream_validation() {
        assert!(matches!(PoseStream::new(vec![]), Err(Error::EmptyStream)));
        let a = pose(0.0, Vec3::ZERO, UnitQuaternion::IDENTITY);
        let b = pose(0.0, Vec3::X, UnitQuaternion::IDENTITY);
        assert!(matches!(PoseStream::new(vec![a, b]), Err(Error::NonMonotonicStream { index: 1 })));
    }

    #[test]
    fn one_second_at_sixty_hertz() {
        let s = PoseStream::new(vec![
            pose(0.0, Vec3::ZERO, UnitQuaternion::IDENTITY),
            pose(1.0, Vec3::X, UnitQuaternion::IDENTITY),
        ])
        .unwrap();
        let tr = reconstruct(&s, 60.0, &PipelineConfig::default()).unwrap();
        assert_eq!(tr.len(), 61);
        assert!((tr.samples[60].pose.t - 1.0).abs() < 1e-15);
        assert!((tr.samples[60].pose.position - Vec3::X).norm() < 1e-9);
    }

    #[test]
    fn stationary_segment() {
        let q = UnitQuaternion::about_y(0.3);
        let a = pose(0.0, Vec3::new(1.0, 2.0, 3.0), q);
        let b = Pose { t: 0.5, ..a };
        let seg = build_segment(&a, &b, &PipelineConfig::default()).unwrap();
        for k in 0..=20 {
            let (p, _) = seg.sample(k as f64 * 0.025);
            assert_eq!(p.position, a.position);
            assert!(p.orientation.angle_to(q) < 1e-12);
        }
    }

    #[test]
    fn straight_segment() {
        let a = pose(0.0, Vec3::ZERO, UnitQuaternion::IDENTITY);
        let b = pose(1.0, Vec3::new(2.0, 0.0, 0.0), UnitQuaternion::IDENTITY);
        let seg = build_segment(&a, &b, &PipelineConfig::default()).unwrap();
        assert!(!seg.is_fallback());
        let c = seg.curve().unwrap();
        for k in 0..=1000 {
            let t = k as f64 / 1000.0;
            assert!(curvature(c, t).unwrap() <= 1e-8);
            let (p, _) = seg.sample(t);
            assert!(p.position.y.abs() < 1e-10 && p.position.z.abs() < 1e-10);
            assert!(p.orientation.angle() < 1e-9);
        }
    }

    #[test]
    fn end_orientations_are_honoured() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = wander(&mut rng, 12, 0.0);
        let segs = build_segments(&s, &PipelineConfig::default()).unwrap();
        for seg in &segs {
            assert!(!seg.is_fallback());
            let (a, fa) = seg.sample(seg.start.t);
            let (b, _) = seg.sample(seg.end.t);
            assert!(a.orientation.angle_to(seg.start.orientation) < 1e-9);
            assert!(b.orientation.angle_to(seg.end.orientation) < 1e-8);
            assert!((b.position - seg.end.position).norm() < 1e-9);
            assert!((fa.tangent - seg.start.forward()).norm() < 1e-9);
        }
    }

    #[test]
    fn knots_and_continuity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = wander(&mut rng, 10, 0.0);
        let segs = build_segments(&s, &PipelineConfig::default()).unwrap();
        for (k, w) in segs.windows(2).enumerate() {
            let knot = s.poses()[k + 1];
            let (a, _) = w[0].sample(knot.t);
            let (b, _) = w[1].sample(knot.t);
            assert!((a.position - knot.position).norm() < 1e-9);
            assert!((b.position - knot.position).norm() < 1e-9);
            let va = w[0].curve().unwrap().derivative(1.0, 1) / w[0].duration();
            let vb = w[1].curve().unwrap().derivative(0.0, 1) / w[1].duration();
            assert!((va - vb).norm() < 1e-6);
        }
    }

    #[test]
    fn subsampling_matches_lower_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let s = wander(&mut rng, 10, 0.25);
        let cfg = PipelineConfig::default();
        let hi = reconstruct(&s, 60.0, &cfg).unwrap();
        let lo = reconstruct(&s, 30.0, &cfg).unwrap();
        for (k, b) in lo.samples.iter().enumerate() {
            let a = &hi.samples[2 * k];
            assert_eq!(a.pose.t, b.pose.t);
            assert!((a.pose.position - b.pose.position).norm() <= 1e-12);
            assert!(a.pose.orientation.angle_to(b.pose.orientation) <= 1e-12);
        }
    }

    #[test]
    fn time_shift() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = wander(&mut rng, 6, 0.0);
        let d = 3.5;
        let shifted = PoseStream::new(s.poses().iter().map(|p| Pose { t: p.t + d, ..*p }).collect()).unwrap();
        let cfg = PipelineConfig::default();
        let a = reconstruct(&s, 60.0, &cfg).unwrap();
        let b = reconstruct(&shifted, 60.0, &cfg).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.samples.iter().zip(&b.samples) {
            assert!((x.pose.t + d - y.pose.t).abs() < 1e-12);
            assert!((x.pose.position - y.pose.position).norm() < 1e-9);
            assert!(x.pose.orientation.angle_to(y.pose.orientation) < 1e-9);
        }
    }

    #[test]
    fn rigid_motion() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let s = wander(&mut rng, 6, 0.0);
        let m = RigidTransform {
            rotation: UnitQuaternion::from_axis_angle(Vec3::new(0.3, -1.0, 0.5), 1.1).unwrap(),
            translation: Vec3::new(-2.0, 0.5, 4.0),
        };
        let moved = PoseStream::new(s.poses().iter().map(|p| m.apply_pose(p)).collect()).unwrap();
        let cfg = PipelineConfig::default();
        let a = reconstruct(&s, 90.0, &cfg).unwrap();
        let b = reconstruct(&moved, 90.0, &cfg).unwrap();
        for (x, y) in a.samples.iter().zip(&b.samples) {
            let mx = m.apply_pose(&x.pose);
            assert!((mx.position - y.pose.position).norm() < 1e-9);
            assert!(mx.orientation.angle_to(y.pose.orientation) < 1e-9);
        }
    }

    #[test]
    fn filter_policy_rejected_offline() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = wander(&mut rng, 3, 0.0);
        let cfg = PipelineConfig {
            speed: Some(SpeedPolicy::Filter),
            ..Default::default()
        };
        assert!(matches!(reconstruct(&s, 30.0, &cfg), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn online_constant_velocity() {
        let v = Vec3::new(0.3, 0.1, -0.05);
        let q = UnitQuaternion::rotation_between(Vec3::X, v.try_normalize().unwrap());
        let poses = (0..60).map(|k| pose(k as f64 / 30.0, v * (k as f64 / 30.0), q)).collect();
        let s = PoseStream::new(poses).unwrap();
        let out = simulate_online(&s, 60.0, &PipelineConfig::default()).unwrap();
        assert_eq!(out.trajectory.len(), reconstruct(&s, 60.0, &PipelineConfig::default()).unwrap().len());
        for e in &out.prediction_errors[30..] {
            assert!(e.position <= 1e-3, "{e:?}");
        }
    }

    #[test]
    fn online_stationary() {
        let p0 = pose(0.0, Vec3::new(0.5, 0.5, 1.0), UnitQuaternion::about_z(0.4));
        let poses = (0..120).map(|k| Pose { t: k as f64 / 30.0, ..p0 }).collect();
        let s = PoseStream::new(poses).unwrap();
        let out = simulate_online(&s, 60.0, &PipelineConfig::default()).unwrap();
        for smp in &out.trajectory.samples {
            assert!((smp.pose.position - p0.position).norm() <= 1e-6);
        }
    }

    #[test]
    fn jerk_examples() {
        let poses: Vec<TrajectorySample> = (0..20)
            .map(|k| {
                let t = k as f64 / 60.0;
                let p = Vec3::new(0.5, -0.2, 0.1) * t + Vec3::new(1.0, 2.0, 3.0);
                TrajectorySample {
                    pose: pose(t, p, UnitQuaternion::IDENTITY),
                    frame: axes_frame(t, p, UnitQuaternion::IDENTITY),
                    segment: 0,
                    fallback: false,
                }
            })
            .collect();
        let tr = SampledTrajectory {
            rate: 60.0,
            t_start: 0.0,
            samples: poses,
        };
        assert!(jerk_report(&tr).unwrap().max_jerk <= 1e-9);
        let short = SampledTrajectory {
            samples: tr.samples[..3].to_vec(),
            ..tr.clone()
        };
        assert!(matches!(jerk_report(&short), Err(Error::TooFewSamples { .. })));

        let s = PoseStream::new(vec![
            pose(0.0, Vec3::ZERO, UnitQuaternion::IDENTITY),
            pose(1.0, Vec3::new(0.8, 0.4, 0.2), UnitQuaternion::from_axis_angle(Vec3::new(0.2, 0.5, 1.0), 0.9).unwrap()),
        ])
        .unwrap();
        let single = reconstruct(&s, 240.0, &PipelineConfig::default()).unwrap();
        let r = jerk_report(&single).unwrap();
        assert!(r.max_jerk.is_finite());
        assert!(r.max_rotation_step_deg < 5.0);
    }

    #[test]
    fn zoh_is_jerkier() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let poses: Vec<Pose> = wander(&mut rng, 20, 0.0)
            .poses()
            .iter()
            .enumerate()
            .map(|(k, p)| Pose { t: k as f64 / 30.0, ..*p })
            .collect();
        let s = PoseStream::new(poses).unwrap();
        let ph = jerk_report(&reconstruct(&s, 60.0, &PipelineConfig::default()).unwrap()).unwrap();
        let zoh = jerk_report(&zero_order_hold(&s, 60.0).unwrap()).unwrap();
        assert!(ph.max_jerk < zoh.max_jerk, "{} vs {}", ph.max_jerk, zoh.max_jerk);
    }
}
