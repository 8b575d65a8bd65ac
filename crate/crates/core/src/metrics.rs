//! Accuracy and shape metrics for estimated trajectories.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{curvature, torsion};
use crate::geom::{Pose, UnitQuaternion};
use crate::pipeline::{FramedSegment, PoseStream, SampledTrajectory};
use crate::ph::PhQuintic;
use crate::quadrature::integrate_adaptive;
use crate::tracking::{align, MatchedPointSets, RigidTransform};

/// Default association window, seconds.
pub const DEFAULT_MAX_DT: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    /// Largest accepted timestamp difference of an associated pair, s.
    pub max_dt: f64,
    /// Align the estimate onto the ground truth before measuring.
    pub align: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            max_dt: DEFAULT_MAX_DT,
            align: false,
        }
    }
}

/// Pairs `(estimate index, ground-truth index)`: each estimate with its
/// nearest ground-truth timestamp, earlier one on ties, kept if within
/// `max_dt`.
pub fn associate(est: &[Pose], gt: &[Pose], max_dt: f64) -> Vec<(usize, usize)> {
    if gt.is_empty() {
        return Vec::new();
    }
    est.iter()
        .enumerate()
        .filter_map(|(i, e)| {
            let k = gt.partition_point(|g| g.t < e.t);
            let best = match (k.checked_sub(1), (k < gt.len()).then_some(k)) {
                (Some(a), Some(b)) => {
                    if e.t - gt[a].t <= gt[b].t - e.t {
                        a
                    } else {
                        b
                    }
                }
                (Some(a), None) => a,
                (None, Some(b)) => b,
                (None, None) => unreachable!(),
            };
            ((gt[best].t - e.t).abs() <= max_dt).then_some((i, best))
        })
        .collect()
}

fn associated(est: &PoseStream, gt: &PoseStream, opts: &EvalOptions) -> Result<(Vec<(usize, usize)>, Option<RigidTransform>)> {
    let pairs = associate(est.poses(), gt.poses(), opts.max_dt);
    if pairs.is_empty() {
        return Err(Error::NoAssociations);
    }
    let transform = if opts.align {
        let sets = MatchedPointSets::new(
            pairs.iter().map(|&(i, _)| est.poses()[i].position).collect(),
            pairs.iter().map(|&(_, j)| gt.poses()[j].position).collect(),
        )?;
        Some(align(&sets)?)
    } else {
        None
    };
    Ok((pairs, transform))
}

/// Geodesic angle between two orientations, radians, with `q` and `-q`
/// identified. Uses the chord form, exact at zero.
pub fn rotation_error(a: UnitQuaternion, b: UnitQuaternion) -> f64 {
    let (a, mut b) = (a.quaternion(), b.quaternion());
    if a.dot(b) < 0.0 {
        b = -b;
    }
    4.0 * (a - b).norm().atan2((a + b).norm())
}

fn moved(m: &Option<RigidTransform>, p: &Pose) -> Pose {
    m.map_or(*p, |m| m.apply_pose(p))
}

fn rms(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v * v, n + 1));
    (sum / n as f64).sqrt()
}

/// Root-mean-square position error over associated pairs, m.
pub fn position_rmse(est: &PoseStream, gt: &PoseStream, opts: &EvalOptions) -> Result<f64> {
    let (pairs, m) = associated(est, gt, opts)?;
    Ok(rms(pairs
        .iter()
        .map(|&(i, j)| (moved(&m, &est.poses()[i]).position - gt.poses()[j].position).norm())))
}

/// Root-mean-square geodesic rotation error over associated pairs, degrees.
pub fn rotation_rmse(est: &PoseStream, gt: &PoseStream, opts: &EvalOptions) -> Result<f64> {
    let (pairs, m) = associated(est, gt, opts)?;
    Ok(rms(pairs.iter().map(|&(i, j)| {
        rotation_error(moved(&m, &est.poses()[i]).orientation, gt.poses()[j].orientation).to_degrees()
    })))
}

/// Arc-length-weighted mean absolute curvature and torsion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeMeans {
    /// 1/m.
    pub mean_curvature: f64,
    /// 1/m, over the part of the path where torsion is defined; 0 if none.
    pub mean_torsion: f64,
    /// m.
    pub length: f64,
    /// Length over which torsion was undefined and skipped, m.
    pub torsion_excluded_length: f64,
}

const SHAPE_TOLERANCE: f64 = 1e-10;

fn segment_integrals(s: &PhQuintic) -> [f64; 4] {
    let sp = |t: f64| s.sigma(t);
    let length = s.length();
    let k = integrate_adaptive(|t| curvature(s, t).unwrap_or(0.0) * sp(t), 0.0, 1.0, 16, SHAPE_TOLERANCE);
    let tau = integrate_adaptive(|t| torsion(s, t).map_or(0.0, f64::abs) * sp(t), 0.0, 1.0, 16, SHAPE_TOLERANCE);
    let defined = integrate_adaptive(|t| if torsion(s, t).is_ok() { sp(t) } else { 0.0 }, 0.0, 1.0, 16, SHAPE_TOLERANCE);
    [length, k, tau, defined]
}

fn shape_from(totals: [f64; 4]) -> ShapeMeans {
    let [length, k, tau, defined] = totals;
    ShapeMeans {
        mean_curvature: if length > 0.0 { k / length } else { 0.0 },
        mean_torsion: if defined > 0.0 { tau / defined } else { 0.0 },
        length,
        torsion_excluded_length: (length - defined).max(0.0),
    }
}

/// Shape means over PH segments; linear fallbacks contribute length only.
pub fn segments_curvature_torsion(segments: &[FramedSegment]) -> Result<ShapeMeans> {
    if segments.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let mut totals = [0.0; 4];
    for seg in segments {
        let part = match seg.curve() {
            Some(c) => segment_integrals(c),
            None => [(seg.end.position - seg.start.position).norm(), 0.0, 0.0, 0.0],
        };
        for (t, p) in totals.iter_mut().zip(part) {
            *t += p;
        }
    }
    Ok(shape_from(totals))
}

/// Shape means over PH curves.
pub fn curves_curvature_torsion(curves: &[PhQuintic]) -> Result<ShapeMeans> {
    if curves.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let mut totals = [0.0; 4];
    for c in curves {
        for (t, p) in totals.iter_mut().zip(segment_integrals(c)) {
            *t += p;
        }
    }
    Ok(shape_from(totals))
}

/// Shape means of a sampled trajectory from the per-sample frame values,
/// trapezoidal in chord length.
pub fn trajectory_curvature_torsion(traj: &SampledTrajectory) -> Result<ShapeMeans> {
    let s = &traj.samples;
    if s.len() < 2 {
        return Err(Error::EmptyTrajectory);
    }
    let mut totals = [0.0; 4];
    for w in s.windows(2) {
        let ds = (w[1].pose.position - w[0].pose.position).norm();
        totals[0] += ds;
        totals[1] += 0.5 * ds * (w[0].frame.curvature.abs() + w[1].frame.curvature.abs());
        if let (Some(a), Some(b)) = (w[0].frame.torsion, w[1].frame.torsion) {
            totals[2] += 0.5 * ds * (a.abs() + b.abs());
            totals[3] += ds;
        }
    }
    Ok(shape_from(totals))
}

/// Shape means of a bare pose sequence from discrete differential
/// geometry: circumscribed-circle curvature of point triples and the
/// turning of consecutive binormals for torsion.
pub fn discrete_curvature_torsion(poses: &[Pose]) -> Result<ShapeMeans> {
    if poses.len() < 2 {
        return Err(Error::EmptyTrajectory);
    }
    let p: Vec<_> = poses.iter().map(|x| x.position).collect();
    let length: f64 = p.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    let mut k_int = 0.0;
    let mut binormals = Vec::with_capacity(p.len());
    for w in p.windows(3) {
        let (a, b) = (w[1] - w[0], w[2] - w[1]);
        let c = w[2] - w[0];
        let cross = a.cross(b);
        let denom = a.norm() * b.norm() * c.norm();
        let kappa = if denom > 0.0 { 2.0 * cross.norm() / denom } else { 0.0 };
        k_int += kappa * 0.5 * (a.norm() + b.norm());
        let scale = a.norm() * b.norm();
        binormals.push((cross.norm() > 1e-9 * scale).then(|| cross / cross.norm()));
    }
    let (mut t_int, mut defined) = (0.0, 0.0);
    for (k, w) in binormals.windows(2).enumerate() {
        if let (Some(b0), Some(b1)) = (w[0], w[1]) {
            let ds = (p[k + 2] - p[k + 1]).norm();
            if ds > 0.0 {
                t_int += b0.cross(b1).norm().atan2(b0.dot(b1));
                defined += ds;
            }
        }
    }
    Ok(shape_from([length, k_int, t_int, defined]))
}

/// One associated pair in the residual series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub index: usize,
    pub t_est: f64,
    pub t_gt: f64,
    /// m.
    pub position_error: f64,
    /// Degrees.
    pub rotation_error_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxGaps {
    /// m.
    pub position: f64,
    /// Degrees.
    pub rotation_deg: f64,
    /// Largest timestamp difference of an associated pair, s.
    pub association_dt: f64,
    /// Largest interval between consecutive estimate timestamps, s.
    pub estimate_interval: f64,
}

/// Wall time of one harness size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub samples: usize,
    /// Seconds for `samples`.
    pub seconds: f64,
    /// Seconds for twice as many.
    pub seconds_double: f64,
    /// `seconds_double / seconds`.
    pub ratio: f64,
    pub per_sample_ns: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub associations: usize,
    pub aligned: bool,
    /// m.
    pub position_rmse: f64,
    /// Degrees.
    pub rotation_rmse_deg: f64,
    pub shape: ShapeMeans,
    pub max_gaps: MaxGaps,
    pub residuals: Vec<Residual>,
    pub constraint_warnings: Vec<String>,
    pub timing: Vec<TimingRow>,
}

/// Full comparison of an estimate against ground truth.
pub fn evaluate(est: &PoseStream, gt: &PoseStream, opts: &EvalOptions) -> Result<MetricsReport> {
    let (pairs, m) = associated(est, gt, opts)?;
    let residuals: Vec<Residual> = pairs
        .iter()
        .map(|&(i, j)| {
            let (e, g) = (moved(&m, &est.poses()[i]), &gt.poses()[j]);
            Residual {
                index: i,
                t_est: e.t,
                t_gt: g.t,
                position_error: (e.position - g.position).norm(),
                rotation_error_deg: rotation_error(e.orientation, g.orientation).to_degrees(),
            }
        })
        .collect();
    let max = |f: &dyn Fn(&Residual) -> f64| residuals.iter().map(f).fold(0.0, f64::max);
    let max_gaps = MaxGaps {
        position: max(&|r| r.position_error),
        rotation_deg: max(&|r| r.rotation_error_deg),
        association_dt: max(&|r| (r.t_est - r.t_gt).abs()),
        estimate_interval: est.poses().windows(2).map(|w| w[1].t - w[0].t).fold(0.0, f64::max),
    };
    Ok(MetricsReport {
        associations: residuals.len(),
        aligned: opts.align,
        position_rmse: rms(residuals.iter().map(|r| r.position_error)),
        rotation_rmse_deg: rms(residuals.iter().map(|r| r.rotation_error_deg)),
        shape: discrete_curvature_torsion(est.poses())?,
        max_gaps,
        residuals,
        constraint_warnings: Vec::new(),
        timing: Vec::new(),
    })
}

impl MetricsReport {
    /// A report with no associations, used to carry timing alone.
    pub fn empty() -> Self {
        MetricsReport {
            associations: 0,
            aligned: false,
            position_rmse: 0.0,
            rotation_rmse_deg: 0.0,
            shape: ShapeMeans {
                mean_curvature: 0.0,
                mean_torsion: 0.0,
                length: 0.0,
                torsion_excluded_length: 0.0,
            },
            max_gaps: MaxGaps {
                position: 0.0,
                rotation_deg: 0.0,
                association_dt: 0.0,
                estimate_interval: 0.0,
            },
            residuals: Vec::new(),
            constraint_warnings: Vec::new(),
            timing: Vec::new(),
        }
    }

    /// The report as one JSON line.
    pub fn to_json_line(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::InvalidArgument(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidArgument(e.to_string()))
    }

    /// Residual series as CSV with a header row.
    pub fn write_residuals_csv<W: Write>(&self, mut sink: W) -> Result<()> {
        writeln!(sink, "index,t_est,t_gt,position_error,rotation_error_deg")?;
        for r in &self.residuals {
            writeln!(
                sink,
                "{},{:?},{:?},{:?},{:?}",
                r.index, r.t_est, r.t_gt, r.position_error, r.rotation_error_deg
            )?;
        }
        Ok(())
    }

    /// Single-row summary CSV with a header row.
    pub fn write_summary_csv<W: Write>(&self, mut sink: W) -> Result<()> {
        writeln!(
            sink,
            "associations,aligned,position_rmse,rotation_rmse_deg,mean_curvature,mean_torsion,length,torsion_excluded_length,max_position,max_rotation_deg,max_association_dt,max_estimate_interval"
        )?;
        let s = &self.shape;
        let g = &self.max_gaps;
        writeln!(
            sink,
            "{},{},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
            self.associations,
            self.aligned,
            self.position_rmse,
            self.rotation_rmse_deg,
            s.mean_curvature,
            s.mean_torsion,
            s.length,
            s.torsion_excluded_length,
            g.position,
            g.rotation_deg,
            g.association_dt,
            g.estimate_interval
        )?;
        Ok(())
    }

    /// Timing table as CSV with a header row.
    pub fn write_timing_csv<W: Write>(&self, mut sink: W) -> Result<()> {
        writeln!(sink, "samples,seconds,seconds_double,ratio,per_sample_ns")?;
        for r in &self.timing {
            writeln!(
                sink,
                "{},{:?},{:?},{:?},{:?}",
                r.samples, r.seconds, r.seconds_double, r.ratio, r.per_sample_ns
            )?;
        }
        Ok(())
    }
}

/// Parses a residual CSV written by [`MetricsReport::write_residuals_csv`].
pub fn read_residuals_csv(text: &str) -> Result<Vec<Residual>> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate().skip(1) {
        let err = |m: String| Error::Parse { line: k + 1, message: m };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(err(format!("expected 5 fields, found {}", f.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| err(e.to_string()));
        out.push(Residual {
            index: f[0].parse().map_err(|e: std::num::ParseIntError| err(e.to_string()))?,
            t_est: num(f[1])?,
            t_gt: num(f[2])?,
            position_error: num(f[3])?,
            rotation_error_deg: num(f[4])?,
        });
    }
    Ok(out)
}
