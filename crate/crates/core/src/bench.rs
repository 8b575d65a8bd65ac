//! Wall-time scaling of segment sampling.

use std::hint::black_box;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::geom::{Pose, UnitQuaternion, Vec3};
use crate::metrics::TimingRow;
use crate::pipeline::{build_segment, FramedSegment, PipelineConfig};

pub const MIN_SIZE: usize = 100;
pub const DEFAULT_REPEATS: usize = 5;

/// The fixed non-planar segment the harness samples.
pub fn reference_segment() -> FramedSegment {
    let a = Pose::new(0.0, Vec3::ZERO, UnitQuaternion::IDENTITY);
    let b = Pose::new(
        1.0,
        Vec3::new(1.0, 0.4, 0.3),
        UnitQuaternion::from_axis_angle(Vec3::new(0.2, 0.4, 1.0), 0.8).expect("non-zero axis"),
    );
    build_segment(&a, &b, &PipelineConfig::default()).expect("reference segment solves")
}

/// Samples `n` evenly spaced poses and frames, sequentially.
pub fn sample_uniform(seg: &FramedSegment, n: usize) -> f64 {
    let (t0, dt) = (seg.start.t, seg.duration());
    let mut acc = 0.0;
    for k in 0..n {
        let t = t0 + dt * k as f64 / (n - 1).max(1) as f64;
        let (p, f) = seg.sample(t);
        acc += p.position.x + f.normal.y;
    }
    acc
}

fn time_once(seg: &FramedSegment, n: usize, repeats: usize) -> f64 {
    (0..repeats.max(1))
        .map(|_| {
            let start = Instant::now();
            black_box(sample_uniform(seg, black_box(n)));
            start.elapsed().as_secs_f64()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Times sampling at each size `N` and at `2N`, best of `repeats`.
pub fn timing_harness(sizes: &[usize], repeats: usize) -> Result<Vec<TimingRow>> {
    if sizes.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 sizes, got {}",
            sizes.len()
        )));
    }
    if let Some(&bad) = sizes.iter().find(|&&n| n < MIN_SIZE) {
        return Err(Error::InvalidArgument(format!("size {bad} is below {MIN_SIZE}")));
    }
    let seg = reference_segment();
    // warm caches and the frequency governor
    time_once(&seg, sizes[0], 1);
    Ok(sizes
        .iter()
        .map(|&n| {
            let seconds = time_once(&seg, n, repeats);
            let seconds_double = time_once(&seg, 2 * n, repeats);
            TimingRow {
                samples: n,
                seconds,
                seconds_double,
                ratio: seconds_double / seconds,
                per_sample_ns: seconds * 1e9 / n as f64,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preconditions() {
        assert!(timing_harness(&[], 1).is_err());
        assert!(timing_harness(&[1000], 1).is_err());
        assert!(timing_harness(&[1000, 50], 1).is_err());
    }

    #[test]
    fn per_sample_cost_is_flat() {
        let rows = timing_harness(&[2000, 8000, 32000], 3).unwrap();
        let costs: Vec<f64> = rows.iter().map(|r| r.per_sample_ns).collect();
        let (lo, hi) = costs.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &c| (l.min(c), h.max(c)));
        assert!(hi / lo <= 2.0, "{costs:?}");
    }
}
