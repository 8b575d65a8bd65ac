//! Vector, quaternion and pose primitives.
//!
//! Everything here is a small `Copy` value type. Angles are radians.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inputs shorter than this have no usable direction.
pub const EPS_DEGENERATE: f64 = 1e-12;

/// A 3-vector of `f64`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    /// Checked constructor; rejects NaN and infinities.
    pub fn try_new(x: f64, y: f64, z: f64) -> Result<Self> {
        if x.is_finite() && y.is_finite() && z.is_finite() {
            Ok(Vec3 { x, y, z })
        } else {
            Err(Error::NonFinite)
        }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    #[inline]
    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Unit vector along `self`, or `None` when the norm is at most
    /// [`EPS_DEGENERATE`].
    pub fn try_normalize(self) -> Option<Vec3> {
        let n = self.norm();
        (n > EPS_DEGENERATE).then(|| self / n)
    }

    pub fn max_abs(self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    /// Any unit vector orthogonal to `self` (which must be non-zero).
    pub fn any_orthogonal(self) -> Vec3 {
        let a = if self.x.abs() <= self.y.abs() && self.x.abs() <= self.z.abs() {
            Vec3::X
        } else if self.y.abs() <= self.z.abs() {
            Vec3::Y
        } else {
            Vec3::Z
        };
        let v = self.cross(a);
        v / v.norm()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    #[inline]
    fn add_assign(&mut self, o: Vec3) {
        self.x += o.x;
        self.y += o.y;
        self.z += o.z;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    #[inline]
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl fmt::Display for Vec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// Unit vector along `v`.
///
/// The components are the direction cosines of `v` against the x, y and z
/// axes.
pub fn direction_cosines(v: Vec3) -> Result<Vec3> {
    v.try_normalize().ok_or(Error::DegenerateDirection)
}

/// A general (not necessarily unit) quaternion `w + x i + y j + z k`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    #[inline]
    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quaternion { w, x, y, z }
    }

    pub fn try_new(w: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        let q = Quaternion { w, x, y, z };
        if q.is_finite() {
            Ok(q)
        } else {
            Err(Error::NonFinite)
        }
    }

    /// Pure quaternion with vector part `v`.
    #[inline]
    pub fn pure(v: Vec3) -> Self {
        Quaternion::new(0.0, v.x, v.y, v.z)
    }

    #[inline]
    pub fn vector(self) -> Vec3 {
        Vec3::new(self.x, self.y, self.z)
    }

    #[inline]
    pub fn conj(self) -> Self {
        Quaternion::new(self.w, -self.x, -self.y, -self.z)
    }

    /// Four-dimensional inner product.
    #[inline]
    pub fn dot(self, o: Quaternion) -> f64 {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.w.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Vector part of `self · i · other*`.
    ///
    /// With `other == self` this is the rotation-and-scaling of the x axis
    /// that generates a spatial Pythagorean hodograph.
    #[inline]
    pub fn i_sandwich(self, other: Quaternion) -> Vec3 {
        let (a, b) = (self, other);
        // a·i = (-a.x, a.w, a.z, -a.y)
        let (w, x, y, z) = (-a.x, a.w, a.z, -a.y);
        // (w,x,y,z)·b* vector part
        Vec3::new(
            -w * b.x + x * b.w - y * b.z + z * b.y,
            -w * b.y + x * b.z + y * b.w - z * b.x,
            -w * b.z - x * b.y + y * b.x + z * b.w,
        )
    }
}

/// Hamilton product.
#[inline]
pub fn quat_mul(a: Quaternion, b: Quaternion) -> Quaternion {
    Quaternion::new(
        a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
        a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
        a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
        a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
    )
}

impl Mul for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn mul(self, o: Quaternion) -> Quaternion {
        quat_mul(self, o)
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn mul(self, s: f64) -> Quaternion {
        Quaternion::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn add(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn sub(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.w, -self.x, -self.y, -self.z)
    }
}

/// A rotation, stored as a quaternion of norm one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Quaternion", into = "Quaternion")]
pub struct UnitQuaternion(Quaternion);

impl Default for UnitQuaternion {
    fn default() -> Self {
        UnitQuaternion::IDENTITY
    }
}

impl TryFrom<Quaternion> for UnitQuaternion {
    type Error = Error;
    fn try_from(q: Quaternion) -> Result<Self> {
        UnitQuaternion::try_from_quaternion(q)
    }
}

impl From<UnitQuaternion> for Quaternion {
    fn from(q: UnitQuaternion) -> Quaternion {
        q.0
    }
}

impl UnitQuaternion {
    pub const IDENTITY: UnitQuaternion = UnitQuaternion(Quaternion::ONE);

    /// Normalises `q`. Fails on non-finite or (near) zero input.
    pub fn try_from_quaternion(q: Quaternion) -> Result<Self> {
        if !q.is_finite() {
            return Err(Error::NonFinite);
        }
        let n = q.norm();
        if n <= EPS_DEGENERATE {
            return Err(Error::DegenerateDirection);
        }
        Ok(UnitQuaternion(q * (1.0 / n)))
    }

    /// Normalises a quaternion known to be well away from zero.
    #[inline]
    pub fn new_normalize(q: Quaternion) -> Self {
        let n = q.norm();
        debug_assert!(n > EPS_DEGENERATE && n.is_finite());
        UnitQuaternion(q * (1.0 / n))
    }

    #[inline]
    pub fn quaternion(self) -> Quaternion {
        self.0
    }

    pub fn w(self) -> f64 {
        self.0.w
    }

    /// Rotation of `angle` radians about `axis` (normalised internally).
    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Result<Self> {
        let a = direction_cosines(axis)?;
        let (s, c) = (0.5 * angle).sin_cos();
        Ok(UnitQuaternion(Quaternion::new(c, a.x * s, a.y * s, a.z * s)))
    }

    /// Rotation about the x axis.
    #[inline]
    pub fn about_x(angle: f64) -> Self {
        let (s, c) = (0.5 * angle).sin_cos();
        UnitQuaternion(Quaternion::new(c, s, 0.0, 0.0))
    }

    pub fn about_y(angle: f64) -> Self {
        let (s, c) = (0.5 * angle).sin_cos();
        UnitQuaternion(Quaternion::new(c, 0.0, s, 0.0))
    }

    pub fn about_z(angle: f64) -> Self {
        let (s, c) = (0.5 * angle).sin_cos();
        UnitQuaternion(Quaternion::new(c, 0.0, 0.0, s))
    }

    /// Exponential map of a rotation vector (axis times angle).
    pub fn exp(rotation_vector: Vec3) -> Self {
        let angle = rotation_vector.norm();
        let half = 0.5 * angle;
        // sin(h)/angle, with the series near zero
        let k = if angle < 1e-8 {
            0.5 - angle * angle / 48.0
        } else {
            half.sin() / angle
        };
        UnitQuaternion::new_normalize(Quaternion::new(
            half.cos(),
            rotation_vector.x * k,
            rotation_vector.y * k,
            rotation_vector.z * k,
        ))
    }

    /// Rotation vector of the shortest rotation represented by `self`.
    pub fn log(self) -> Vec3 {
        let q = if self.0.w < 0.0 { -self.0 } else { self.0 };
        let v = q.vector();
        let s = v.norm();
        if s < 1e-12 {
            return v * 2.0;
        }
        let angle = 2.0 * s.atan2(q.w);
        v * (angle / s)
    }

    #[inline]
    pub fn inverse(self) -> Self {
        UnitQuaternion(self.0.conj())
    }

    /// Rotation angle in `[0, π]`.
    pub fn angle(self) -> f64 {
        2.0 * self.0.vector().norm().atan2(self.0.w.abs())
    }

    /// Geodesic angle between two rotations, in `[0, π]`.
    pub fn angle_to(self, other: UnitQuaternion) -> f64 {
        (self.inverse() * other).angle()
    }

    /// Rotates `v`: the vector part of `q v q*`.
    #[inline]
    pub fn rotate(self, v: Vec3) -> Vec3 {
        let q = self.0;
        let u = q.vector();
        let t = u.cross(v) * 2.0;
        v + t * q.w + u.cross(t)
    }

    /// Spherical linear interpolation along the shorter arc.
    pub fn slerp(self, other: UnitQuaternion, s: f64) -> UnitQuaternion {
        let mut delta = (self.inverse() * other).0;
        if delta.w < 0.0 {
            delta = -delta;
        }
        let step = UnitQuaternion(delta).log() * s;
        self * UnitQuaternion::exp(step)
    }

    /// Rotation matrix, row-major.
    pub fn to_matrix(self) -> [[f64; 3]; 3] {
        let c0 = self.rotate(Vec3::X);
        let c1 = self.rotate(Vec3::Y);
        let c2 = self.rotate(Vec3::Z);
        [[c0.x, c1.x, c2.x], [c0.y, c1.y, c2.y], [c0.z, c1.z, c2.z]]
    }

    /// Rotation whose matrix columns are the given orthonormal, right-handed
    /// axes.
    pub fn from_axes(x: Vec3, y: Vec3, z: Vec3) -> Self {
        let m = [[x.x, y.x, z.x], [x.y, y.y, z.y], [x.z, y.z, z.z]];
        UnitQuaternion::from_matrix(&m)
    }

    /// Converts a proper rotation matrix (row-major).
    pub fn from_matrix(m: &[[f64; 3]; 3]) -> Self {
        let trace = m[0][0] + m[1][1] + m[2][2];
        let q = if trace > 0.0 {
            let s = (trace + 1.0).sqrt() * 2.0;
            Quaternion::new(
                0.25 * s,
                (m[2][1] - m[1][2]) / s,
                (m[0][2] - m[2][0]) / s,
                (m[1][0] - m[0][1]) / s,
            )
        } else if m[0][0] > m[1][1] && m[0][0] > m[2][2] {
            let s = (1.0 + m[0][0] - m[1][1] - m[2][2]).sqrt() * 2.0;
            Quaternion::new(
                (m[2][1] - m[1][2]) / s,
                0.25 * s,
                (m[0][1] + m[1][0]) / s,
                (m[0][2] + m[2][0]) / s,
            )
        } else if m[1][1] > m[2][2] {
            let s = (1.0 + m[1][1] - m[0][0] - m[2][2]).sqrt() * 2.0;
            Quaternion::new(
                (m[0][2] - m[2][0]) / s,
                (m[0][1] + m[1][0]) / s,
                0.25 * s,
                (m[1][2] + m[2][1]) / s,
            )
        } else {
            let s = (1.0 + m[2][2] - m[0][0] - m[1][1]).sqrt() * 2.0;
            Quaternion::new(
                (m[1][0] - m[0][1]) / s,
                (m[0][2] + m[2][0]) / s,
                (m[1][2] + m[2][1]) / s,
                0.25 * s,
            )
        };
        UnitQuaternion::new_normalize(q)
    }

    /// Shortest rotation taking unit vector `from` onto unit vector `to`.
    pub fn rotation_between(from: Vec3, to: Vec3) -> Self {
        let c = from.dot(to);
        if c < -1.0 + 1e-12 {
            let axis = from.any_orthogonal();
            return UnitQuaternion(Quaternion::pure(axis));
        }
        let v = from.cross(to);
        UnitQuaternion::new_normalize(Quaternion::new(1.0 + c, v.x, v.y, v.z))
    }

    /// Same rotation with non-negative scalar part.
    pub fn canonical(self) -> Self {
        if self.0.w < 0.0 {
            UnitQuaternion(-self.0)
        } else {
            self
        }
    }
}

impl Mul for UnitQuaternion {
    type Output = UnitQuaternion;
    #[inline]
    fn mul(self, o: UnitQuaternion) -> UnitQuaternion {
        // renormalise so long products keep the unit-norm invariant
        let q = self.0 * o.0;
        UnitQuaternion(q * (1.0 / q.norm()))
    }
}

/// Rotates `v` by `q`.
#[inline]
pub fn rotate_by(q: UnitQuaternion, v: Vec3) -> Vec3 {
    q.rotate(v)
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

/// Intrinsic Z-Y-X (yaw, pitch, roll) angles to a rotation.
pub fn quaternion_from_euler(yaw: f64, pitch: f64, roll: f64) -> UnitQuaternion {
    UnitQuaternion::about_z(yaw) * UnitQuaternion::about_y(pitch) * UnitQuaternion::about_x(roll)
}

/// Inverse of [`quaternion_from_euler`].
///
/// At gimbal lock (pitch = ±π/2) only yaw − roll (or yaw + roll) is
/// determined; the returned representative has roll = 0.
pub fn quaternion_to_euler(q: UnitQuaternion) -> (f64, f64, f64) {
    let m = q.to_matrix();
    let sp = (-m[2][0]).clamp(-1.0, 1.0);
    if sp.abs() > 1.0 - 1e-12 {
        let pitch = sp.signum() * PI / 2.0;
        let yaw = (-m[0][1]).atan2(m[1][1]);
        return (wrap_angle(yaw), pitch, 0.0);
    }
    let yaw = m[1][0].atan2(m[0][0]);
    let roll = m[2][1].atan2(m[2][2]);
    // asin loses accuracy near ±1; use atan2 against the cosine instead
    let cp = (m[0][0] * m[0][0] + m[1][0] * m[1][0]).sqrt();
    let pitch = sp.atan2(cp);
    (wrap_angle(yaw), pitch, wrap_angle(roll))
}

/// A timestamped 6-DOF pose.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    /// Seconds.
    pub t: f64,
    /// Metres.
    pub position: Vec3,
    pub orientation: UnitQuaternion,
}

impl Pose {
    pub fn new(t: f64, position: Vec3, orientation: UnitQuaternion) -> Self {
        Pose {
            t,
            position,
            orientation,
        }
    }

    /// Checked constructor.
    pub fn try_new(t: f64, position: Vec3, orientation: Quaternion) -> Result<Self> {
        if !t.is_finite() || !position.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(Pose {
            t,
            position,
            orientation: UnitQuaternion::try_from_quaternion(orientation)?,
        })
    }

    /// Forward axis: the body x axis expressed in the world frame.
    pub fn forward(&self) -> Vec3 {
        self.orientation.rotate(Vec3::X)
    }
}

/// Builds a pose from a position and intrinsic Z-Y-X Euler angles
/// `(alpha, beta, gamma) = (yaw, pitch, roll)`.
pub fn pose_from_euler(t: f64, x: f64, y: f64, z: f64, alpha: f64, beta: f64, gamma: f64) -> Pose {
    Pose::new(t, Vec3::new(x, y, z), quaternion_from_euler(alpha, beta, gamma))
}

/// `(x, y, z, yaw, pitch, roll)` of a pose.
pub fn pose_to_euler(pose: &Pose) -> (f64, f64, f64, f64, f64, f64) {
    let (a, b, g) = quaternion_to_euler(pose.orientation);
    (pose.position.x, pose.position.y, pose.position.z, a, b, g)
}
