//! C ABI over `phmotion`.
//!
//! Every fallible call returns a [`PhmStatus`]; on failure the message is
//! available from [`phm_last_error_message`] on the same thread. Objects
//! are opaque handles released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use phmotion::error::Error;
use phmotion::frames::{ConstraintConfig, FrameSample};
use phmotion::geom::{Pose, Quaternion, Vec3};
use phmotion::hermite::FreeAngles;
use phmotion::pipeline::{
    build_segment, reconstruct, FramePolicy, FramedSegment, PipelineConfig, PoseStream, SampledTrajectory,
};
use phmotion::tracking::{PredictorConfig, PredictorState};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NonFinite = 3,
    Degenerate = 4,
    NearAntipodal = 5,
    ResidualTooLarge = 6,
    NonMonotonic = 7,
    TooFewSamples = 8,
    OutOfRange = 9,
    Panic = 10,
}

/// A timestamped pose. Orientation is stored x, y, z, w.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhmPose {
    pub t: f64,
    pub position: [f64; 3],
    pub orientation: [f64; 4],
}

/// A moving frame sample.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhmFrame {
    pub t: f64,
    pub point: [f64; 3],
    pub tangent: [f64; 3],
    pub normal: [f64; 3],
    pub binormal: [f64; 3],
    pub curvature: f64,
    /// Meaningful only when `torsion_defined` is non-zero.
    pub torsion: f64,
    pub torsion_defined: i32,
    pub theta: f64,
}

/// Reconstruction settings; fill with [`phm_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhmConfig {
    pub phi0: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub kappa_max: f64,
    pub tau_max: f64,
    /// 0 for rotation-minimising frames, 1 for Frenet frames.
    pub frenet_frames: i32,
}

pub struct PhmSegment(FramedSegment);
pub struct PhmTrajectory(SampledTrajectory);
pub struct PhmPredictor(PredictorState);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> PhmStatus {
    match e {
        Error::NonFinite => PhmStatus::NonFinite,
        Error::NearAntipodal(_) => PhmStatus::NearAntipodal,
        Error::ResidualTooLarge { .. } => PhmStatus::ResidualTooLarge,
        Error::DegenerateDirection
        | Error::DegenerateSpeed(_)
        | Error::DegenerateGeometry
        | Error::UndefinedNormal(_)
        | Error::UndefinedTorsion(_) => PhmStatus::Degenerate,
        Error::NonMonotonicTimestamp { .. } | Error::NonMonotonicStream { .. } => PhmStatus::NonMonotonic,
        Error::TooFewSamples { .. } | Error::TooFewPoints { .. } | Error::EmptyStream | Error::EmptyTrajectory => {
            PhmStatus::TooFewSamples
        }
        _ => PhmStatus::InvalidArgument,
    }
}

fn guard<F: FnOnce() -> Result<(), (PhmStatus, String)>>(f: F) -> PhmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            PhmStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            PhmStatus::Panic
        }
    }
}

fn fail(e: Error) -> (PhmStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (PhmStatus, String) {
    (PhmStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read<'a, T>(p: *const T, what: &str) -> Result<&'a T, (PhmStatus, String)> {
    // SAFETY: caller contract: non-null pointers are valid for reads
    unsafe { p.as_ref() }.ok_or_else(|| null(what))
}

fn to_pose(p: &PhmPose) -> Result<Pose, (PhmStatus, String)> {
    let [x, y, z, w] = p.orientation;
    let [px, py, pz] = p.position;
    Pose::try_new(p.t, Vec3::new(px, py, pz), Quaternion::new(w, x, y, z)).map_err(fail)
}

fn from_pose(p: &Pose) -> PhmPose {
    let q = p.orientation.quaternion();
    PhmPose {
        t: p.t,
        position: p.position.to_array(),
        orientation: [q.x, q.y, q.z, q.w],
    }
}

fn from_frame(f: &FrameSample) -> PhmFrame {
    PhmFrame {
        t: f.t,
        point: f.point.to_array(),
        tangent: f.tangent.to_array(),
        normal: f.normal.to_array(),
        binormal: f.binormal.to_array(),
        curvature: f.curvature,
        torsion: f.torsion.unwrap_or(0.0),
        torsion_defined: f.torsion.is_some() as i32,
        theta: f.theta,
    }
}

fn to_config(c: Option<&PhmConfig>) -> Result<PipelineConfig, (PhmStatus, String)> {
    let Some(c) = c else {
        return Ok(PipelineConfig::default());
    };
    Ok(PipelineConfig {
        angles: FreeAngles::new(c.phi0, c.phi1, c.phi2),
        constraints: ConstraintConfig::new(c.kappa_max, c.tau_max).map_err(fail)?,
        frames: if c.frenet_frames != 0 {
            FramePolicy::Frenet
        } else {
            FramePolicy::Rmf
        },
        ..PipelineConfig::default()
    })
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn phm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn phm_status_string(status: PhmStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        PhmStatus::Ok => b"ok\0",
        PhmStatus::NullPointer => b"null pointer\0",
        PhmStatus::InvalidArgument => b"invalid argument\0",
        PhmStatus::NonFinite => b"non-finite input\0",
        PhmStatus::Degenerate => b"degenerate geometry\0",
        PhmStatus::NearAntipodal => b"tangent nearly antipodal to the reference axis\0",
        PhmStatus::ResidualTooLarge => b"interpolation residual too large\0",
        PhmStatus::NonMonotonic => b"timestamps not increasing\0",
        PhmStatus::TooFewSamples => b"too few samples\0",
        PhmStatus::OutOfRange => b"index out of range\0",
        PhmStatus::Panic => b"internal panic\0",
    };
    s.as_ptr().cast()
}

/// Writes the default configuration to `out`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn phm_config_default(out: *mut PhmConfig) -> PhmStatus {
    guard(|| {
        // SAFETY: caller contract
        let out = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        let d = PipelineConfig::default();
        *out = PhmConfig {
            phi0: d.angles.phi0,
            phi1: d.angles.phi1,
            phi2: d.angles.phi2,
            kappa_max: d.constraints.kappa_max,
            tau_max: d.constraints.tau_max,
            frenet_frames: 0,
        };
        Ok(())
    })
}

/// Builds the segment between two poses. `config` may be null for
/// defaults. On success `*out` owns a handle for [`phm_segment_free`].
///
/// # Safety
/// Non-null pointers must be valid; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn phm_segment_new(
    start: *const PhmPose,
    end: *const PhmPose,
    config: *const PhmConfig,
    out: *mut *mut PhmSegment,
) -> PhmStatus {
    guard(|| {
        // SAFETY: caller contract
        let out = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        *out = ptr::null_mut();
        let a = to_pose(unsafe { read(start, "start") }?)?;
        let b = to_pose(unsafe { read(end, "end") }?)?;
        let cfg = to_config(unsafe { config.as_ref() })?;
        let seg = build_segment(&a, &b, &cfg).map_err(fail)?;
        *out = Box::into_raw(Box::new(PhmSegment(seg)));
        Ok(())
    })
}

/// Pose (and, if `frame` is non-null, frame) at absolute time `t`,
/// clamped to the segment.
///
/// # Safety
/// `segment` must come from [`phm_segment_new`]; `pose` must be valid for
/// writes; `frame` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn phm_segment_sample(
    segment: *const PhmSegment,
    t: f64,
    pose: *mut PhmPose,
    frame: *mut PhmFrame,
) -> PhmStatus {
    guard(|| {
        let seg = unsafe { read(segment, "segment") }?;
        // SAFETY: caller contract
        let pose = unsafe { pose.as_mut() }.ok_or_else(|| null("pose"))?;
        if !t.is_finite() {
            return Err(fail(Error::NonFinite));
        }
        let (p, f) = seg.0.sample(t);
        *pose = from_pose(&p);
        if let Some(frame) = unsafe { frame.as_mut() } {
            *frame = from_frame(&f);
        }
        Ok(())
    })
}

/// 1 if the segment is the straight-line fallback, 0 if it is a PH curve,
/// -1 for a null handle.
///
/// # Safety
/// `segment` must be null or come from [`phm_segment_new`].
#[no_mangle]
pub unsafe extern "C" fn phm_segment_is_fallback(segment: *const PhmSegment) -> i32 {
    match unsafe { segment.as_ref() } {
        Some(s) => s.0.is_fallback() as i32,
        None => -1,
    }
}

/// Arc length of the segment in metres.
///
/// # Safety
/// `segment` must come from [`phm_segment_new`]; `out` must be valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn phm_segment_length(segment: *const PhmSegment, out: *mut f64) -> PhmStatus {
    guard(|| {
        let seg = unsafe { read(segment, "segment") }?;
        let out = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        *out = match seg.0.curve() {
            Some(c) => c.length(),
            None => (seg.0.end.position - seg.0.start.position).norm(),
        };
        Ok(())
    })
}

/// # Safety
/// `segment` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn phm_segment_free(segment: *mut PhmSegment) {
    if !segment.is_null() {
        // SAFETY: created by Box::into_raw in phm_segment_new
        drop(unsafe { Box::from_raw(segment) });
    }
}

/// Reconstructs `count` poses at `rate` Hz.
///
/// # Safety
/// `poses` must point to `count` readable poses; `config` may be null;
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn phm_trajectory_reconstruct(
    poses: *const PhmPose,
    count: usize,
    rate: f64,
    config: *const PhmConfig,
    out: *mut *mut PhmTrajectory,
) -> PhmStatus {
    guard(|| {
        let out = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        *out = ptr::null_mut();
        if poses.is_null() {
            return Err(null("poses"));
        }
        // SAFETY: caller contract
        let raw = unsafe { std::slice::from_raw_parts(poses, count) };
        let list = raw.iter().map(to_pose).collect::<Result<Vec<_>, _>>()?;
        let stream = PoseStream::new(list).map_err(fail)?;
        let cfg = to_config(unsafe { config.as_ref() })?;
        let traj = reconstruct(&stream, rate, &cfg).map_err(fail)?;
        *out = Box::into_raw(Box::new(PhmTrajectory(traj)));
        Ok(())
    })
}

/// Number of samples, 0 for a null handle.
///
/// # Safety
/// `traj` must be null or come from [`phm_trajectory_reconstruct`].
#[no_mangle]
pub unsafe extern "C" fn phm_trajectory_len(traj: *const PhmTrajectory) -> usize {
    unsafe { traj.as_ref() }.map_or(0, |t| t.0.len())
}

/// Sample `index`; `frame` may be null.
///
/// # Safety
/// `traj` must come from [`phm_trajectory_reconstruct`]; `pose` must be
/// valid for writes; `frame` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn phm_trajectory_get(
    traj: *const PhmTrajectory,
    index: usize,
    pose: *mut PhmPose,
    frame: *mut PhmFrame,
) -> PhmStatus {
    guard(|| {
        let traj = unsafe { read(traj, "trajectory") }?;
        let pose = unsafe { pose.as_mut() }.ok_or_else(|| null("pose"))?;
        let s = traj.0.samples.get(index).ok_or_else(|| {
            (
                PhmStatus::OutOfRange,
                format!("index {index} out of {} samples", traj.0.len()),
            )
        })?;
        *pose = from_pose(&s.pose);
        if let Some(frame) = unsafe { frame.as_mut() } {
            *frame = from_frame(&s.frame);
        }
        Ok(())
    })
}

/// # Safety
/// `traj` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn phm_trajectory_free(traj: *mut PhmTrajectory) {
    if !traj.is_null() {
        // SAFETY: created by Box::into_raw in phm_trajectory_reconstruct
        drop(unsafe { Box::from_raw(traj) });
    }
}

/// Starts a predictor at its first measurement with default noise
/// settings.
///
/// # Safety
/// `first` must be valid; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn phm_predictor_new(first: *const PhmPose, out: *mut *mut PhmPredictor) -> PhmStatus {
    guard(|| {
        let out = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        *out = ptr::null_mut();
        let p = to_pose(unsafe { read(first, "first") }?)?;
        let state = PredictorState::initialise(p, PredictorConfig::default());
        *out = Box::into_raw(Box::new(PhmPredictor(state)));
        Ok(())
    })
}

/// Corrects the predictor with a new measurement. On failure the state is
/// unchanged.
///
/// # Safety
/// `predictor` must come from [`phm_predictor_new`]; `measured` must be
/// valid.
#[no_mangle]
pub unsafe extern "C" fn phm_predictor_update(predictor: *mut PhmPredictor, measured: *const PhmPose) -> PhmStatus {
    guard(|| {
        let pred = unsafe { predictor.as_mut() }.ok_or_else(|| null("predictor"))?;
        let m = to_pose(unsafe { read(measured, "measured") }?)?;
        pred.0 = pred.0.update(&m).map_err(fail)?;
        Ok(())
    })
}

/// Pose `horizon` seconds after the latest measurement.
///
/// # Safety
/// `predictor` must come from [`phm_predictor_new`]; `out` must be valid
/// for writes.
#[no_mangle]
pub unsafe extern "C" fn phm_predictor_predict(
    predictor: *const PhmPredictor,
    horizon: f64,
    out: *mut PhmPose,
) -> PhmStatus {
    guard(|| {
        let pred = unsafe { read(predictor, "predictor") }?;
        let out = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        if !(horizon.is_finite() && horizon >= 0.0) {
            return Err((PhmStatus::InvalidArgument, format!("bad horizon {horizon}")));
        }
        *out = from_pose(&pred.0.predict_next(horizon));
        Ok(())
    })
}

/// # Safety
/// `predictor` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn phm_predictor_free(predictor: *mut PhmPredictor) {
    if !predictor.is_null() {
        // SAFETY: created by Box::into_raw in phm_predictor_new
        drop(unsafe { Box::from_raw(predictor) });
    }
}
