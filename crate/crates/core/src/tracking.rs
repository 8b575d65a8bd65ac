//! Pose acquisition: rigid alignment of matched point sets and
//! constant-velocity Kalman prediction of the next pose.

use nalgebra::{Matrix3, Matrix4, SMatrix, SVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Pose, Quaternion, UnitQuaternion, Vec3};

/// Index-matched reference and current landmark sets.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchedPointSets {
    pub reference: Vec<Vec3>,
    pub current: Vec<Vec3>,
}

impl MatchedPointSets {
    pub fn new(reference: Vec<Vec3>, current: Vec<Vec3>) -> Result<Self> {
        if reference.len() != current.len() {
            return Err(Error::SizeMismatch {
                reference: reference.len(),
                current: current.len(),
            });
        }
        if reference.len() < 3 {
            return Err(Error::TooFewPoints {
                needed: 3,
                got: reference.len(),
            });
        }
        Ok(MatchedPointSets { reference, current })
    }
}

/// `x ↦ rotation·x + translation`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidTransform {
    pub rotation: UnitQuaternion,
    pub translation: Vec3,
}

impl RigidTransform {
    pub const IDENTITY: RigidTransform = RigidTransform {
        rotation: UnitQuaternion::IDENTITY,
        translation: Vec3::ZERO,
    };

    pub fn apply(&self, p: Vec3) -> Vec3 {
        self.rotation.rotate(p) + self.translation
    }

    pub fn apply_pose(&self, pose: &Pose) -> Pose {
        Pose::new(pose.t, self.apply(pose.position), self.rotation * pose.orientation)
    }

    /// Root-mean-square of `|T(p_k) - q_k|` over the pairs.
    pub fn residual_rms(&self, sets: &MatchedPointSets) -> f64 {
        let sum: f64 = sets
            .reference
            .iter()
            .zip(&sets.current)
            .map(|(p, q)| (self.apply(*p) - *q).norm_squared())
            .sum();
        (sum / sets.reference.len() as f64).sqrt()
    }
}

fn centroid(points: &[Vec3]) -> Vec3 {
    let mut c = Vec3::ZERO;
    for p in points {
        c += *p;
    }
    c / points.len() as f64
}

fn is_degenerate(points: &[Vec3], c: Vec3) -> bool {
    let mut scatter = Matrix3::zeros();
    for p in points {
        let d = *p - c;
        let v = nalgebra::Vector3::new(d.x, d.y, d.z);
        scatter += v * v.transpose();
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(scatter).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    !(ev[0] > 0.0 && ev[1] > 1e-12 * ev[0])
}

/// Least-squares rigid transform taking `reference` onto `current`.
///
/// Closed form: the rotation is the eigenvector of the largest eigenvalue
/// of Horn's symmetric 4×4 matrix, which is always a proper rotation.
pub fn align(sets: &MatchedPointSets) -> Result<RigidTransform> {
    let (p, q) = (&sets.reference, &sets.current);
    if p.len() != q.len() {
        return Err(Error::SizeMismatch {
            reference: p.len(),
            current: q.len(),
        });
    }
    if p.len() < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: p.len() });
    }
    let (pc, qc) = (centroid(p), centroid(q));
    if is_degenerate(p, pc) || is_degenerate(q, qc) {
        return Err(Error::DegenerateGeometry);
    }
    let mut s = [[0.0; 3]; 3];
    for (a, b) in p.iter().zip(q) {
        let a = (*a - pc).to_array();
        let b = (*b - qc).to_array();
        for i in 0..3 {
            for j in 0..3 {
                s[i][j] += a[i] * b[j];
            }
        }
    }
    let [[sxx, sxy, sxz], [syx, syy, syz], [szx, szy, szz]] = s;
    let n = Matrix4::new(
        sxx + syy + szz, syz - szy, szx - sxz, sxy - syx,
        syz - szy, sxx - syy - szz, sxy + syx, szx + sxz,
        szx - sxz, sxy + syx, -sxx + syy - szz, syz + szy,
        sxy - syx, szx + sxz, syz + szy, -sxx - syy + szz,
    );
    let eig = SymmetricEigen::new(n);
    let best = eig.eigenvalues.imax();
    let v = eig.eigenvectors.column(best);
    let rotation = UnitQuaternion::try_from_quaternion(Quaternion::new(v[0], v[1], v[2], v[3]))?.canonical();
    let translation = qc - rotation.rotate(pc);
    Ok(RigidTransform {
        rotation,
        translation,
    })
}

/// Noise model of the constant-velocity predictor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictorConfig {
    /// White-noise acceleration spectral density, m²/s³.
    pub accel_density: f64,
    /// White-noise angular acceleration spectral density, rad²/s³.
    pub angular_accel_density: f64,
    /// Position measurement standard deviation, m.
    pub position_sigma: f64,
    /// Orientation measurement standard deviation, rad.
    pub orientation_sigma: f64,
    /// Prior standard deviation of the linear velocity, m/s.
    pub initial_velocity_sigma: f64,
    /// Prior standard deviation of the angular velocity, rad/s.
    pub initial_angular_velocity_sigma: f64,
}

impl Default for PredictorConfig {
    fn default() -> Self {
        PredictorConfig {
            accel_density: 0.5,
            angular_accel_density: 0.5,
            position_sigma: 0.01,
            orientation_sigma: 1f64.to_radians(),
            initial_velocity_sigma: 1.0,
            initial_angular_velocity_sigma: 1.0,
        }
    }
}

impl PredictorConfig {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.accel_density,
            self.angular_accel_density,
            self.position_sigma,
            self.orientation_sigma,
            self.initial_velocity_sigma,
            self.initial_angular_velocity_sigma,
        ];
        if all.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(Error::InvalidArgument("predictor noise parameters must be positive".into()))
        }
    }
}

pub type Covariance = SMatrix<f64, 12, 12>;

// state layout: position, velocity, orientation error, angular velocity
const P: usize = 0;
const V: usize = 3;
const TH: usize = 6;
const W: usize = 9;

/// Filter state after the most recent measurement.
///
/// The orientation is carried as a unit quaternion; the covariance refers
/// to a small world-frame rotation error `δθ` with `q_true = exp(δθ)·q`.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorState {
    pub pose: Pose,
    /// m/s.
    pub linear_velocity: Vec3,
    /// World-frame, rad/s.
    pub angular_velocity: Vec3,
    pub covariance: Covariance,
    pub config: PredictorConfig,
}

fn set_block(m: &mut Covariance, r: usize, c: usize, v: f64) {
    for k in 0..3 {
        m[(r + k, c + k)] = v;
    }
}

fn vec3_of(x: &SVector<f64, 12>, at: usize) -> Vec3 {
    Vec3::new(x[at], x[at + 1], x[at + 2])
}

impl PredictorState {
    /// State at the first measurement: zero velocities.
    pub fn initialise(measured: Pose, config: PredictorConfig) -> Self {
        let mut covariance = Covariance::zeros();
        set_block(&mut covariance, P, P, config.position_sigma.powi(2));
        set_block(&mut covariance, V, V, config.initial_velocity_sigma.powi(2));
        set_block(&mut covariance, TH, TH, config.orientation_sigma.powi(2));
        set_block(&mut covariance, W, W, config.initial_angular_velocity_sigma.powi(2));
        PredictorState {
            pose: measured,
            linear_velocity: Vec3::ZERO,
            angular_velocity: Vec3::ZERO,
            covariance,
            config,
        }
    }

    pub fn timestamp(&self) -> f64 {
        self.pose.t
    }

    /// Predict to the measurement time, then correct with it.
    pub fn update(&self, measured: &Pose) -> Result<Self> {
        let dt = measured.t - self.pose.t;
        if !(dt >= 0.0) {
            return Err(Error::NonMonotonicTimestamp {
                previous: self.pose.t,
                current: measured.t,
            });
        }
        let cfg = &self.config;

        let predicted = self.predict_next(dt);
        let mut f = Covariance::identity();
        set_block(&mut f, P, V, dt);
        set_block(&mut f, TH, W, dt);
        let mut q = Covariance::zeros();
        let (d3, d2) = (dt.powi(3) / 3.0, dt.powi(2) / 2.0);
        for (at, rate, dens) in [(P, V, cfg.accel_density), (TH, W, cfg.angular_accel_density)] {
            set_block(&mut q, at, at, dens * d3);
            set_block(&mut q, at, rate, dens * d2);
            set_block(&mut q, rate, at, dens * d2);
            set_block(&mut q, rate, rate, dens * dt);
        }
        let p_pred = f * self.covariance * f.transpose() + q;

        let mut h = SMatrix::<f64, 6, 12>::zeros();
        for k in 0..3 {
            h[(k, P + k)] = 1.0;
            h[(3 + k, TH + k)] = 1.0;
        }
        let mut r = SMatrix::<f64, 6, 6>::zeros();
        for k in 0..3 {
            r[(k, k)] = cfg.position_sigma.powi(2);
            r[(3 + k, 3 + k)] = cfg.orientation_sigma.powi(2);
        }
        let dp = measured.position - predicted.position;
        let dq = (measured.orientation * predicted.orientation.inverse()).log();
        let z = SVector::<f64, 6>::new(dp.x, dp.y, dp.z, dq.x, dq.y, dq.z);

        let s = h * p_pred * h.transpose() + r;
        let s_inv = s
            .try_inverse()
            .ok_or_else(|| Error::InvalidArgument("singular innovation covariance".into()))?;
        let k = p_pred * h.transpose() * s_inv;
        let dx = k * z;
        let ikh = Covariance::identity() - k * h;
        let mut p_new = ikh * p_pred * ikh.transpose() + k * r * k.transpose();
        p_new = (p_new + p_new.transpose()) * 0.5;

        let orientation = UnitQuaternion::exp(vec3_of(&dx, TH)) * predicted.orientation;
        Ok(PredictorState {
            pose: Pose::new(measured.t, predicted.position + vec3_of(&dx, P), orientation),
            linear_velocity: self.linear_velocity + vec3_of(&dx, V),
            angular_velocity: self.angular_velocity + vec3_of(&dx, W),
            covariance: p_new,
            config: self.config,
        })
    }

    /// Pose `horizon` seconds ahead under constant linear and angular
    /// velocity.
    pub fn predict_next(&self, horizon: f64) -> Pose {
        Pose::new(
            self.pose.t + horizon,
            self.pose.position + self.linear_velocity * horizon,
            UnitQuaternion::exp(self.angular_velocity * horizon) * self.pose.orientation,
        )
    }
}

/// Functional form of [`PredictorState::update`].
pub fn predictor_update(state: &PredictorState, measured: &Pose) -> Result<PredictorState> {
    state.update(measured)
}

/// Functional form of [`PredictorState::predict_next`].
pub fn predict_next(state: &PredictorState, horizon: f64) -> Pose {
    state.predict_next(horizon)
}
