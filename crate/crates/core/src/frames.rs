//! Differential geometry of a segment: curvature, torsion, Frenet and
//! rotation-minimising frames, and comfort-bound validation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{UnitQuaternion, Vec3, EPS_DEGENERATE};
use crate::ph::{PhQuintic, QuaternionPoly};
use crate::quadrature::{integrate_adaptive, CumulativeIntegral};

/// Below this turning rate `|r' × r''| / |r'|²` (radians per unit
/// parameter) the curve counts as locally straight: no normal, no torsion.
pub const EPS_TURNING: f64 = 1e-9;

/// Initial panel count for the twist integrals.
pub const TWIST_PANELS: usize = 8;

/// Absolute tolerance of the twist integrals over `[0, 1]`.
pub const TWIST_TOLERANCE: f64 = 1e-8;

/// A moving frame at one curve parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameSample {
    pub t: f64,
    pub point: Vec3,
    pub tangent: Vec3,
    pub normal: Vec3,
    pub binormal: Vec3,
    /// 1/m.
    pub curvature: f64,
    /// 1/m; `None` where the curve is locally straight.
    pub torsion: Option<f64>,
    /// Rotation of (normal, binormal) about the tangent relative to the
    /// Frenet frame, radians.
    pub theta: f64,
}

impl FrameSample {
    /// The frame as a rotation taking (x, y, z) to (tangent, normal,
    /// binormal).
    pub fn rotation(&self) -> UnitQuaternion {
        UnitQuaternion::from_axes(self.tangent, self.normal, self.binormal)
    }
}

/// Comfort bounds on curvature and torsion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintConfig {
    /// 1/m.
    pub kappa_max: f64,
    /// 1/m.
    pub tau_max: f64,
}

impl ConstraintConfig {
    pub fn new(kappa_max: f64, tau_max: f64) -> Result<Self> {
        if !(kappa_max > 0.0 && tau_max > 0.0) || !kappa_max.is_finite() || !tau_max.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "curvature/torsion bounds must be positive, got {kappa_max}, {tau_max}"
            )));
        }
        Ok(ConstraintConfig { kappa_max, tau_max })
    }
}

impl Default for ConstraintConfig {
    fn default() -> Self {
        ConstraintConfig {
            kappa_max: 10.0,
            tau_max: 5.0,
        }
    }
}

#[inline]
fn is_straight(cross: Vec3, speed_sq: f64) -> bool {
    cross.norm_squared() <= EPS_TURNING * EPS_TURNING * speed_sq * speed_sq
}

/// `κ = |r' × r''| / |r'|³`.
pub fn curvature(s: &PhQuintic, t: f64) -> Result<f64> {
    let (d1, d2, _) = s.derivatives(t);
    let speed = d1.norm();
    if speed <= EPS_DEGENERATE {
        return Err(Error::DegenerateSpeed(t));
    }
    Ok(d1.cross(d2).norm() / (speed * speed * speed))
}

/// `τ = (r' × r'')·r''' / |r' × r''|²`.
pub fn torsion(s: &PhQuintic, t: f64) -> Result<f64> {
    let (d1, d2, d3) = s.derivatives(t);
    let sp2 = d1.norm_squared();
    if sp2.sqrt() <= EPS_DEGENERATE {
        return Err(Error::DegenerateSpeed(t));
    }
    let c = d1.cross(d2);
    if is_straight(c, sp2) {
        return Err(Error::UndefinedTorsion(t));
    }
    Ok(c.dot(d3) / c.norm_squared())
}

/// Frenet–Serret frame at `t` (with `theta = 0`).
pub fn frenet_frame(s: &PhQuintic, t: f64) -> Result<FrameSample> {
    let (d1, d2, d3) = s.derivatives(t);
    let sp2 = d1.norm_squared();
    let speed = sp2.sqrt();
    if speed <= EPS_DEGENERATE {
        return Err(Error::DegenerateSpeed(t));
    }
    let c = d1.cross(d2);
    if is_straight(c, sp2) {
        return Err(Error::UndefinedNormal(t));
    }
    let cn = c.norm();
    let tangent = d1 / speed;
    let binormal = c / cn;
    let normal = binormal.cross(tangent);
    Ok(FrameSample {
        t,
        point: s.eval(t),
        tangent,
        normal,
        binormal,
        curvature: cn / (sp2 * speed),
        torsion: Some(c.dot(d3) / (cn * cn)),
        theta: 0.0,
    })
}

/// `-τ(t)|r'(t)|`, or zero where the torsion is undefined.
#[inline]
fn theta_rate(s: &PhQuintic, t: f64) -> f64 {
    let (d1, d2, d3) = s.derivatives(t);
    let sp2 = d1.norm_squared();
    let c = d1.cross(d2);
    if is_straight(c, sp2) {
        return 0.0;
    }
    -c.dot(d3) / c.norm_squared() * sp2.sqrt()
}

#[inline]
fn rotate_in_normal_plane(normal: Vec3, binormal: Vec3, angle: f64) -> (Vec3, Vec3) {
    let (sn, cs) = angle.sin_cos();
    (normal * cs + binormal * sn, binormal * cs - normal * sn)
}

/// Frame-correction angle `θ(t) = -∫₀ᵗ τ|r'| ds` of a segment, tabulated
/// once so it can be queried at any `t`, together with the locations where
/// the Frenet normal jumps by π (inflections of a locally planar curve).
#[derive(Debug, Clone)]
pub struct RmfAngle<'a> {
    segment: &'a PhQuintic,
    table: CumulativeIntegral,
    flips: Vec<f64>,
}

impl<'a> RmfAngle<'a> {
    pub fn new(segment: &'a PhQuintic) -> Self {
        let table = CumulativeIntegral::build(
            |t| theta_rate(segment, t),
            0.0,
            1.0,
            TWIST_PANELS,
            TWIST_TOLERANCE,
        );
        let mut me = RmfAngle {
            segment,
            table,
            flips: Vec::new(),
        };
        me.flips = me.find_flips();
        me
    }

    /// `θ(t)` for `t ∈ [0, 1]`.
    pub fn angle(&self, t: f64) -> f64 {
        self.table.eval(|x| theta_rate(self.segment, x), t)
    }

    /// Parameters where the Frenet normal reverses.
    pub fn flips(&self) -> &[f64] {
        &self.flips
    }

    /// Total correction applied at `t`: `θ(t)` plus π per normal reversal
    /// before `t`.
    pub fn correction(&self, t: f64) -> f64 {
        let n = self.flips.partition_point(|&f| f < t);
        self.angle(t) + std::f64::consts::PI * n as f64
    }

    /// Frenet frame at `t` with normal and binormal turned by the
    /// correction angle.
    pub fn frame(&self, t: f64) -> Result<FrameSample> {
        let f = frenet_frame(self.segment, t)?;
        let theta = self.correction(t);
        let (normal, binormal) = rotate_in_normal_plane(f.normal, f.binormal, theta);
        Ok(FrameSample {
            normal,
            binormal,
            theta,
            ..f
        })
    }

    fn corrected_normal(&self, t: f64, flips: usize) -> Option<Vec3> {
        let f = frenet_frame(self.segment, t).ok()?;
        let theta = self.angle(t) + std::f64::consts::PI * flips as f64;
        Some(rotate_in_normal_plane(f.normal, f.binormal, theta).0)
    }

    // The corrected normal is continuous except where the Frenet normal
    // jumps; scan for sign reversals and bisect each one.
    fn find_flips(&self) -> Vec<f64> {
        const MAX_STEP: f64 = 1.0 / 512.0;
        let mut grid = Vec::new();
        for w in self.table.panel_breaks().windows(2) {
            let n = ((w[1] - w[0]) / MAX_STEP).ceil().max(1.0) as usize;
            for k in 0..n {
                grid.push(w[0] + (w[1] - w[0]) * k as f64 / n as f64);
            }
        }
        grid.push(1.0);

        let mut flips = Vec::new();
        let mut prev: Option<(f64, Vec3)> = None;
        for &t in &grid {
            let Some(m) = self.corrected_normal(t, flips.len()) else {
                continue;
            };
            if let Some((tp, mp)) = prev {
                if mp.dot(m) < 0.0 {
                    let (mut lo, mut hi) = (tp, t);
                    for _ in 0..60 {
                        let mid = 0.5 * (lo + hi);
                        match self.corrected_normal(mid, flips.len()) {
                            Some(mm) if mp.dot(mm) >= 0.0 => lo = mid,
                            Some(_) => hi = mid,
                            None => {
                                lo = mid;
                                hi = mid;
                                break;
                            }
                        }
                        if hi - lo < 1e-15 {
                            break;
                        }
                    }
                    flips.push(0.5 * (lo + hi));
                    let m2 = self.corrected_normal(t, flips.len()).unwrap_or(-m);
                    prev = Some((t, m2));
                    continue;
                }
            }
            prev = Some((t, m));
        }
        flips
    }
}

/// `θ(t) = -∫₀ᵗ τ(s)|r'(s)| ds`.
pub fn rmf_angle(s: &PhQuintic, t: f64) -> f64 {
    RmfAngle::new(s).angle(t)
}

/// Rotation-minimising frame at `t`: the Frenet frame turned about the
/// tangent by `θ(t)`, with the π jump of the Frenet normal at inflections
/// undone.
pub fn rmf_frame(s: &PhQuintic, t: f64) -> Result<FrameSample> {
    RmfAngle::new(s).frame(t)
}

/// `ω·T` of the Euler–Rodrigues frame `A(t)/|A(t)|`.
#[inline]
fn erf_twist_rate(p: &QuaternionPoly, t: f64) -> f64 {
    let a = p.eval(t);
    let da = p.derivative(t);
    let s = a.norm_squared();
    let w = (da * a.conj()).vector();
    2.0 * w.dot(a.i_sandwich(a)) / (s * s)
}

/// Rotation-minimising orientation along a PH segment, defined wherever the
/// parametric speed is non-zero (including straight stretches and
/// inflections, where the Frenet frame is not).
///
/// The Euler–Rodrigues frame `A(t)/|A(t)|` maps the x axis onto the tangent;
/// removing its accumulated twist about the tangent leaves a frame with no
/// tangential angular velocity. The result agrees with [`rmf_frame`] up to a
/// constant rotation about the tangent.
#[derive(Debug, Clone)]
pub struct RmfTrack {
    preimage: QuaternionPoly,
    twist: CumulativeIntegral,
}

impl RmfTrack {
    /// Fails with [`Error::DegenerateSpeed`] if the segment has a cusp.
    pub fn new(segment: &PhQuintic) -> Result<Self> {
        let preimage = *segment.preimage();
        let scale = preimage.a0.norm().max(preimage.a1.norm()).max(preimage.a2.norm());
        let mut min_sigma = f64::INFINITY;
        let twist = CumulativeIntegral::build(
            |t| {
                min_sigma = min_sigma.min(preimage.sigma(t));
                erf_twist_rate(&preimage, t)
            },
            0.0,
            1.0,
            TWIST_PANELS,
            TWIST_TOLERANCE,
        );
        if !(min_sigma > 1e-12 * scale * scale) || !twist.total().is_finite() {
            return Err(Error::DegenerateSpeed(0.0));
        }
        Ok(RmfTrack { preimage, twist })
    }

    /// Accumulated Euler–Rodrigues twist `∫₀ᵗ ω·T`.
    pub fn twist(&self, t: f64) -> f64 {
        self.twist.eval(|x| erf_twist_rate(&self.preimage, x), t)
    }

    /// Orientation at `t`; its x axis is the unit tangent.
    pub fn orientation(&self, t: f64) -> UnitQuaternion {
        let erf = UnitQuaternion::new_normalize(self.preimage.eval(t));
        erf * UnitQuaternion::about_x(-self.twist(t))
    }
}

/// Worst-case value of one bounded quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub limit: f64,
    pub max_abs: f64,
    pub at_t: f64,
    pub pass: bool,
}

/// Outcome of checking a segment against [`ConstraintConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub curvature: BoundCheck,
    pub torsion: BoundCheck,
    /// Grid samples where torsion was undefined and skipped.
    pub undefined_torsion_samples: usize,
    /// Largest `|dθ/dt| = |τ|·|r'|` seen, radians per unit parameter.
    /// Reported only; there is no bound on it.
    pub max_rotation_rate: f64,
}

impl ConstraintReport {
    pub fn passed(&self) -> bool {
        self.curvature.pass && self.torsion.pass
    }

    /// Human-readable warnings for failed bounds.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.curvature.pass {
            out.push(format!(
                "curvature {:.6} 1/m at t={:.6} exceeds {}",
                self.curvature.max_abs, self.curvature.at_t, self.curvature.limit
            ));
        }
        if !self.torsion.pass {
            out.push(format!(
                "torsion {:.6} 1/m at t={:.6} exceeds {}",
                self.torsion.max_abs, self.torsion.at_t, self.torsion.limit
            ));
        }
        out
    }
}

const VALIDATE_GRID: usize = 512;

/// Maximises `f` over `[0, 1]`: dense grid, then golden-section refinement
/// of every local maximum. `f` returns `None` where undefined.
fn refined_max<F: Fn(f64) -> Option<f64>>(f: F) -> (f64, f64, usize) {
    let n = VALIDATE_GRID;
    let vals: Vec<Option<f64>> = (0..=n).map(|k| f(k as f64 / n as f64)).collect();
    let undefined = vals.iter().filter(|v| v.is_none()).count();
    let mut best = (0.0, 0.0);
    for (k, v) in vals.iter().enumerate() {
        if let Some(v) = *v {
            if v > best.0 {
                best = (v, k as f64 / n as f64);
            }
        }
    }
    let get = |k: isize| -> f64 {
        if k < 0 || k > n as isize {
            f64::NEG_INFINITY
        } else {
            vals[k as usize].unwrap_or(f64::NEG_INFINITY)
        }
    };
    let g = |x: f64| f(x).unwrap_or(f64::NEG_INFINITY);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    for k in 0..=n as isize {
        let v = get(k);
        if !v.is_finite() || v < get(k - 1) || v < get(k + 1) {
            continue;
        }
        let mut a = ((k - 1).max(0)) as f64 / n as f64;
        let mut b = ((k + 1).min(n as isize)) as f64 / n as f64;
        let mut c = b - ratio * (b - a);
        let mut d = a + ratio * (b - a);
        let (mut fc, mut fd) = (g(c), g(d));
        for _ in 0..60 {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - ratio * (b - a);
                fc = g(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + ratio * (b - a);
                fd = g(d);
            }
        }
        for (x, fx) in [(c, fc), (d, fd)] {
            if fx > best.0 {
                best = (fx, x);
            }
        }
    }
    (best.0, best.1, undefined)
}

/// Checks `|κ| < κ_max` and `|τ| < τ_max` over the whole segment.
pub fn validate(s: &PhQuintic, cfg: &ConstraintConfig) -> ConstraintReport {
    let (kmax, kt, _) = refined_max(|t| curvature(s, t).ok());
    let (tmax, tt, undefined) = refined_max(|t| torsion(s, t).ok().map(f64::abs));
    let (rate, _, _) = refined_max(|t| Some(theta_rate(s, t).abs()));
    ConstraintReport {
        curvature: BoundCheck {
            limit: cfg.kappa_max,
            max_abs: kmax,
            at_t: kt,
            pass: kmax < cfg.kappa_max,
        },
        torsion: BoundCheck {
            limit: cfg.tau_max,
            max_abs: tmax,
            at_t: tt,
            pass: tmax < cfg.tau_max,
        },
        undefined_torsion_samples: undefined,
        max_rotation_rate: rate,
    }
}

/// Bending energy `∫₀¹ κ²|r'| dt`.
pub fn bending_energy(s: &PhQuintic) -> f64 {
    let f = |t: f64| {
        let (d1, d2, _) = s.derivatives(t);
        let sp = d1.norm();
        if sp <= EPS_DEGENERATE {
            return 0.0;
        }
        d1.cross(d2).norm_squared() / sp.powi(5)
    };
    let coarse = integrate_adaptive(f, 0.0, 1.0, 16, f64::INFINITY);
    integrate_adaptive(f, 0.0, 1.0, 16, 1e-11 * coarse.max(f64::MIN_POSITIVE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::{solve, FreeAngles, HermiteData};
    use crate::geom::Quaternion;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn straight() -> PhQuintic {
        solve(&HermiteData::new(Vec3::ZERO, Vec3::X, Vec3::X, Vec3::X), &FreeAngles::default())
            .unwrap()
            .segment(0.0, 1.0)
    }

    pub(crate) fn s_curve() -> PhQuintic {
        let d = Vec3::new(1.0, 1.5, 0.0);
        solve(&HermiteData::new(Vec3::ZERO, Vec3::X, d, d), &FreeAngles::default())
            .unwrap()
            .segment(0.0, 1.0)
    }

    fn random_segment(rng: &mut ChaCha8Rng) -> PhQuintic {
        let mut r = || Quaternion::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        PhQuintic::new(QuaternionPoly::new(r(), r(), r()), Vec3::ZERO, 0.0, 1.0)
    }

    #[test]
    fn straight_segment_geometry() {
        let s = straight();
        for k in 0..=100 {
            let t = k as f64 / 100.0;
            assert!(curvature(&s, t).unwrap() <= 1e-10);
            assert!(matches!(torsion(&s, t), Err(Error::UndefinedTorsion(_))));
            assert!(matches!(frenet_frame(&s, t), Err(Error::UndefinedNormal(_))));
        }
        assert_eq!(rmf_angle(&s, 1.0), 0.0);
        let report = validate(&s, &ConstraintConfig::new(1e-3, 1e-3).unwrap());
        assert!(report.passed());
    }

    #[test]
    fn planar_segment_has_no_torsion_or_twist() {
        let s = s_curve();
        let angle = RmfAngle::new(&s);
        for k in 0..=40 {
            let t = k as f64 / 40.0;
            if let Ok(tau) = torsion(&s, t) {
                assert!(tau.abs() <= 1e-9);
            }
            assert!(angle.angle(t).abs() <= 1e-12);
        }
        assert_eq!(rmf_angle(&s, 0.0), 0.0);
    }

    #[test]
    fn canonical_frenet_configuration() {
        // starts along +x, bending toward +y
        let s = solve(
            &HermiteData::new(Vec3::ZERO, Vec3::new(1.0, 0.5, 0.0), Vec3::X, Vec3::new(0.5, 1.0, 0.0)),
            &FreeAngles::default(),
        )
        .unwrap()
        .segment(0.0, 1.0);
        let f = frenet_frame(&s, 0.0).unwrap();
        assert!((f.tangent - Vec3::X).norm() < 1e-12);
        assert!((f.normal - Vec3::Y).norm() < 1e-9);
        assert!((f.binormal - Vec3::Z).norm() < 1e-9);
    }

    fn orthonormal(f: &FrameSample) -> bool {
        let tol = 1e-9;
        f.tangent.dot(f.normal).abs() < tol
            && f.tangent.dot(f.binormal).abs() < tol
            && f.normal.dot(f.binormal).abs() < tol
            && (f.tangent.cross(f.normal) - f.binormal).norm() < tol
            && (f.tangent.norm() - 1.0).abs() < tol
            && (f.normal.norm() - 1.0).abs() < tol
    }

    #[test]
    fn frames_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let s = random_segment(&mut rng);
            let angle = RmfAngle::new(&s);
            for k in 0..=20 {
                let t = k as f64 / 20.0;
                if let Ok(f) = frenet_frame(&s, t) {
                    assert!(orthonormal(&f));
                    assert!(orthonormal(&angle.frame(t).unwrap()));
                }
            }
        }
    }

    #[test]
    fn curvature_and_torsion_against_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let h = 1e-4;
        for _ in 0..20 {
            let s = random_segment(&mut rng);
            for k in 1..10 {
                let t = k as f64 / 10.0;
                // derivatives from positions only
                let p = |x: f64| s.eval(x);
                let d1 = (p(t + h) - p(t - h)) / (2.0 * h);
                let d2 = (p(t + h) - p(t) * 2.0 + p(t - h)) / (h * h);
                let d3 = (p(t + 2.0 * h) - p(t + h) * 2.0 + p(t - h) * 2.0 - p(t - 2.0 * h)) / (2.0 * h * h * h);
                let c = d1.cross(d2);
                let kappa = c.norm() / d1.norm().powi(3);
                let k_exact = curvature(&s, t).unwrap();
                assert!((kappa - k_exact).abs() <= 1e-5 * k_exact.max(1.0), "{kappa} {k_exact}");
                if let Ok(tau) = torsion(&s, t) {
                    let fd = c.dot(d3) / c.norm_squared();
                    if c.norm() > 1e-2 * d1.norm_squared() {
                        assert!((fd - tau).abs() <= 1e-4 * tau.abs().max(1.0), "{fd} {tau}");
                    }
                }
            }
        }
    }

    #[test]
    fn theta_derivative_is_minus_torsion_times_speed() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let h = 1e-5;
        for _ in 0..20 {
            let s = random_segment(&mut rng);
            let a = RmfAngle::new(&s);
            for k in 1..10 {
                let t = k as f64 / 10.0;
                let Ok(tau) = torsion(&s, t) else { continue };
                let fd = (a.angle(t + h) - a.angle(t - h)) / (2.0 * h);
                let exact = -tau * s.sigma(t);
                assert!((fd - exact).abs() <= 1e-5 * exact.abs().max(1.0), "{fd} vs {exact}");
            }
        }
    }

    #[test]
    fn frenet_normal_flips_across_inflection_but_rmf_does_not() {
        let s = s_curve();
        let angle = RmfAngle::new(&s);
        assert_eq!(angle.flips().len(), 1);
        let ti = angle.flips()[0];
        let before = frenet_frame(&s, ti - 1e-3).unwrap();
        let after = frenet_frame(&s, ti + 1e-3).unwrap();
        assert!(before.normal.dot(after.normal) < -0.99);
        let rb = angle.frame(ti - 1e-3).unwrap();
        let ra = angle.frame(ti + 1e-3).unwrap();
        assert!(rb.normal.dot(ra.normal) > 0.99);
    }

    #[test]
    fn rmf_equals_frenet_on_planar_segment_before_inflection() {
        let s = s_curve();
        let angle = RmfAngle::new(&s);
        let ti = angle.flips()[0];
        for k in 0..10 {
            let t = ti * k as f64 / 10.0;
            let f = frenet_frame(&s, t).unwrap();
            let r = angle.frame(t).unwrap();
            assert!((f.normal - r.normal).norm() < 1e-12);
        }
    }

    #[test]
    fn theta_invariant_under_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = random_segment(&mut rng);
        let r = UnitQuaternion::from_axis_angle(Vec3::new(0.3, 1.0, -0.2), 1.3).unwrap();
        let m = s.transformed(r.quaternion(), Vec3::new(1.0, 2.0, 3.0));
        let (a, b) = (RmfAngle::new(&s), RmfAngle::new(&m));
        for k in 0..=10 {
            let t = k as f64 / 10.0;
            assert!((a.angle(t) - b.angle(t)).abs() < 1e-9);
        }
    }

    #[test]
    fn rmf_track_matches_corrected_frenet_frame() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let s = random_segment(&mut rng);
            let track = RmfTrack::new(&s).unwrap();
            let angle = RmfAngle::new(&s);
            let mut offset = None;
            for k in 0..=20 {
                let t = k as f64 / 20.0;
                let Ok(f) = angle.frame(t) else { continue };
                let q = track.orientation(t);
                assert!((q.rotate(Vec3::X) - f.tangent).norm() < 1e-9);
                let y = q.rotate(Vec3::Y);
                let phi = y.cross(f.normal).dot(f.tangent).atan2(y.dot(f.normal));
                match offset {
                    None => offset = Some(phi),
                    Some(o) => {
                        let d = crate::geom::wrap_angle(phi - o);
                        assert!(d.abs() < 1e-7, "offset drift {d}");
                    }
                }
            }
        }
    }

    #[test]
    fn rmf_track_handles_straight_and_inflected_segments() {
        for s in [straight(), s_curve()] {
            let track = RmfTrack::new(&s).unwrap();
            let mut prev = track.orientation(0.0);
            for k in 1..=1000 {
                let q = track.orientation(k as f64 / 1000.0);
                assert!(prev.angle_to(q) < 0.05);
                prev = q;
            }
        }
        // a straight segment's frame never rotates
        let s = straight();
        let track = RmfTrack::new(&s).unwrap();
        assert!(track.orientation(0.0).angle_to(track.orientation(1.0)) < 1e-12);
    }

    #[test]
    fn validate_locates_worst_curvature() {
        // sharp turn: end tangent at right angle to the start
        let s = solve(
            &HermiteData::new(Vec3::ZERO, Vec3::new(0.2, 0.2, 0.0), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)),
            &FreeAngles::default(),
        )
        .unwrap()
        .segment(0.0, 1.0);
        // dense-grid oracle
        let mut best = (0.0, 0.0);
        for k in 0..=20000 {
            let t = k as f64 / 20000.0;
            let kv = curvature(&s, t).unwrap();
            if kv > best.0 {
                best = (kv, t);
            }
        }
        let report = validate(&s, &ConstraintConfig::new(best.0 * 0.5, 100.0).unwrap());
        assert!(!report.curvature.pass);
        assert!(report.curvature.max_abs >= best.0 - 1e-9);
        assert!((report.curvature.at_t - best.1).abs() < 1e-3);
        assert!(!report.warnings().is_empty());
        let loose = validate(&s, &ConstraintConfig::new(best.0 * 2.0, 1e6).unwrap());
        assert!(loose.passed());
    }

    #[test]
    fn config_must_be_positive() {
        assert!(ConstraintConfig::new(0.0, 1.0).is_err());
        assert!(ConstraintConfig::new(1.0, -1.0).is_err());
        assert!(ConstraintConfig::new(1.0, 1.0).is_ok());
    }
}
