//! Spatial Pythagorean-hodograph quintics in quaternion form.
//!
//! A quadratic quaternion polynomial `A(t)` (the preimage) generates the
//! hodograph `r'(t) = A(t) i A*(t)`, whose length is the polynomial
//! `σ(t) = |A(t)|²`. Integrating gives a quintic Bézier curve with an exact,
//! polynomial arc length.

use serde::{Deserialize, Serialize};

use crate::geom::{Quaternion, Vec3};

/// Quadratic Bernstein polynomial with quaternion coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuaternionPoly {
    pub a0: Quaternion,
    pub a1: Quaternion,
    pub a2: Quaternion,
}

impl QuaternionPoly {
    pub fn new(a0: Quaternion, a1: Quaternion, a2: Quaternion) -> Self {
        QuaternionPoly { a0, a1, a2 }
    }

    pub fn constant(c: Quaternion) -> Self {
        QuaternionPoly::new(c, c, c)
    }

    /// `A(t)` by Bernstein weights.
    #[inline]
    pub fn eval(&self, t: f64) -> Quaternion {
        let s = 1.0 - t;
        self.a0 * (s * s) + self.a1 * (2.0 * s * t) + self.a2 * (t * t)
    }

    /// `A'(t)`.
    #[inline]
    pub fn derivative(&self, t: f64) -> Quaternion {
        ((self.a1 - self.a0) * (1.0 - t) + (self.a2 - self.a1) * t) * 2.0
    }

    /// Hodograph `r'(t)`: vector part of `A(t) i A*(t)`.
    #[inline]
    pub fn hodograph(&self, t: f64) -> Vec3 {
        let a = self.eval(t);
        a.i_sandwich(a)
    }

    /// Parametric speed `σ(t) = |A(t)|²`.
    #[inline]
    pub fn sigma(&self, t: f64) -> f64 {
        self.eval(t).norm_squared()
    }

    /// Degree-4 Bernstein coefficients of `σ(t)`.
    pub fn sigma_bernstein(&self) -> [f64; 5] {
        let (a0, a1, a2) = (self.a0, self.a1, self.a2);
        [
            a0.norm_squared(),
            a0.dot(a1),
            (2.0 * a1.norm_squared() + a0.dot(a2)) / 3.0,
            a1.dot(a2),
            a2.norm_squared(),
        ]
    }

    /// Multiplies every coefficient on the left by `q`; for a unit `q`
    /// this rotates the generated curve by `q`.
    pub fn left_mul(&self, q: Quaternion) -> Self {
        QuaternionPoly::new(q * self.a0, q * self.a1, q * self.a2)
    }
}

/// `A(t)` at `t`.
pub fn preimage_eval(p: &QuaternionPoly, t: f64) -> Quaternion {
    p.eval(t)
}

/// `r'(t) = A(t) i A*(t)`.
pub fn hodograph(p: &QuaternionPoly, t: f64) -> Vec3 {
    p.hodograph(t)
}

/// `σ(t) = |A(t)|²`.
pub fn sigma(p: &QuaternionPoly, t: f64) -> f64 {
    p.sigma(t)
}

/// Bézier control points of the quintic generated by `p` starting at `p0`.
pub fn control_points(p: &QuaternionPoly, p0: Vec3) -> [Vec3; 6] {
    let (a0, a1, a2) = (p.a0, p.a1, p.a2);
    // A_a i A_b* + A_b i A_a* = 2 vec(A_a i A_b*)
    let p1 = p0 + a0.i_sandwich(a0) * (1.0 / 5.0);
    let p2 = p1 + a0.i_sandwich(a1) * (2.0 / 10.0);
    let p3 = p2 + (a0.i_sandwich(a2) * 2.0 + a1.i_sandwich(a1) * 4.0) * (1.0 / 30.0);
    let p4 = p3 + a1.i_sandwich(a2) * (2.0 / 10.0);
    let p5 = p4 + a2.i_sandwich(a2) * (1.0 / 5.0);
    [p0, p1, p2, p3, p4, p5]
}

fn casteljau<const N: usize>(mut pts: [Vec3; N], t: f64) -> Vec3 {
    if N == 0 {
        return Vec3::ZERO;
    }
    let s = 1.0 - t;
    for level in 1..N {
        for i in 0..N - level {
            pts[i] = pts[i] * s + pts[i + 1] * t;
        }
    }
    pts[0]
}

fn bernstein_scalar<const N: usize>(mut c: [f64; N], t: f64) -> f64 {
    let s = 1.0 - t;
    for level in 1..N {
        for i in 0..N - level {
            c[i] = c[i] * s + c[i + 1] * t;
        }
    }
    c[0]
}

/// One PH quintic motion segment, mapped onto the wall-clock interval
/// `[t_start, t_end]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhQuintic {
    preimage: QuaternionPoly,
    control: [Vec3; 6],
    t_start: f64,
    t_end: f64,
    #[serde(skip)]
    first: [Vec3; 5],
    #[serde(skip)]
    second: [Vec3; 4],
    #[serde(skip)]
    third: [Vec3; 3],
    /// Bernstein coefficients of the degree-5 arc-length polynomial.
    #[serde(skip)]
    arc: [f64; 6],
}

impl PhQuintic {
    /// Builds the segment generated by `preimage` from `start`, spanning
    /// `[t_start, t_end]` seconds.
    pub fn new(preimage: QuaternionPoly, start: Vec3, t_start: f64, t_end: f64) -> Self {
        let control = control_points(&preimage, start);
        let mut first = [Vec3::ZERO; 5];
        for k in 0..5 {
            first[k] = (control[k + 1] - control[k]) * 5.0;
        }
        let mut second = [Vec3::ZERO; 4];
        for k in 0..4 {
            second[k] = (first[k + 1] - first[k]) * 4.0;
        }
        let mut third = [Vec3::ZERO; 3];
        for k in 0..3 {
            third[k] = (second[k + 1] - second[k]) * 3.0;
        }
        let sig = preimage.sigma_bernstein();
        let mut arc = [0.0; 6];
        for k in 1..6 {
            arc[k] = arc[k - 1] + sig[k - 1] / 5.0;
        }
        PhQuintic {
            preimage,
            control,
            t_start,
            t_end,
            first,
            second,
            third,
            arc,
        }
    }

    /// Same segment with its caches rebuilt (after deserialisation).
    pub fn rebuilt(&self) -> Self {
        PhQuintic::new(self.preimage, self.control[0], self.t_start, self.t_end)
    }

    pub fn preimage(&self) -> &QuaternionPoly {
        &self.preimage
    }

    pub fn control_points(&self) -> &[Vec3; 6] {
        &self.control
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }

    /// Curve parameter for wall-clock time `time` (affine map, unclamped).
    pub fn param_at(&self, time: f64) -> f64 {
        (time - self.t_start) / (self.t_end - self.t_start)
    }

    /// Wall-clock time for curve parameter `t`.
    pub fn time_at(&self, t: f64) -> f64 {
        self.t_start + t * (self.t_end - self.t_start)
    }

    /// Position `r(t)`, by de Casteljau.
    #[inline]
    pub fn eval(&self, t: f64) -> Vec3 {
        casteljau(self.control, t)
    }

    /// Derivative of order 0..=5 with respect to the curve parameter.
    pub fn derivative(&self, t: f64, order: usize) -> Vec3 {
        match order {
            0 => self.eval(t),
            1 => casteljau(self.first, t),
            2 => casteljau(self.second, t),
            3 => casteljau(self.third, t),
            4 => {
                let d = [(self.third[1] - self.third[0]) * 2.0, (self.third[2] - self.third[1]) * 2.0];
                casteljau(d, t)
            }
            5 => (self.third[2] - self.third[1] * 2.0 + self.third[0]) * 2.0,
            _ => Vec3::ZERO,
        }
    }

    /// First three derivatives at `t`.
    #[inline]
    pub fn derivatives(&self, t: f64) -> (Vec3, Vec3, Vec3) {
        (
            casteljau(self.first, t),
            casteljau(self.second, t),
            casteljau(self.third, t),
        )
    }

    /// `σ(t)`, the parametric speed.
    #[inline]
    pub fn sigma(&self, t: f64) -> f64 {
        self.preimage.sigma(t)
    }

    /// Exact arc length from `t = 0` to `t1`, in metres.
    pub fn arc_length(&self, t1: f64) -> f64 {
        bernstein_scalar(self.arc, t1)
    }

    /// Total arc length.
    pub fn length(&self) -> f64 {
        self.arc[5]
    }

    /// Largest deviation between the stored control points and those
    /// re-derived from the preimage.
    pub fn control_point_deviation(&self) -> f64 {
        let again = control_points(&self.preimage, self.control[0]);
        again
            .iter()
            .zip(&self.control)
            .map(|(a, b)| (*a - *b).norm())
            .fold(0.0, f64::max)
    }

    /// Applies `x ↦ rotation·x + translation` to the segment; `rotation`
    /// must have unit norm.
    pub fn transformed(&self, rotation: Quaternion, translation: Vec3) -> Self {
        let q = crate::geom::UnitQuaternion::new_normalize(rotation);
        PhQuintic::new(
            self.preimage.left_mul(q.quaternion()),
            q.rotate(self.control[0]) + translation,
            self.t_start,
            self.t_end,
        )
    }
}

/// `r(t)` of a segment.
pub fn eval(s: &PhQuintic, t: f64) -> Vec3 {
    s.eval(t)
}

/// Parametric derivative of `order` (1, 2 or 3 in normal use).
pub fn derivative(s: &PhQuintic, t: f64, order: usize) -> Vec3 {
    s.derivative(t, order)
}

/// Exact arc length on `[0, t1]`.
pub fn arc_length(s: &PhQuintic, t1: f64) -> f64 {
    s.arc_length(t1)
}
