//! First-order spatial Hermite interpolation by PH quintics.
//!
//! Given end points `p_i`, `p_f` and end derivatives `d_i`, `d_f` (per unit
//! parameter), [`solve`] produces the quaternion coefficients `A0, A1, A2`
//! of a PH quintic with `r(0) = p_i`, `r(1) = p_f`, `r'(0) = d_i`,
//! `r'(1) = d_f`. Three free angles select one member of the solution
//! family; every solution is checked against the four end conditions before
//! it is returned.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{direction_cosines, wrap_angle, Pose, Quaternion, UnitQuaternion, Vec3};
use crate::ph::{PhQuintic, QuaternionPoly};

/// Smallest admissible `1 + cos` between a direction and the x axis.
pub const EPS_ANTIPODAL: f64 = 1e-10;

/// Relative tolerance of the end-condition self-check.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;

/// End positions (metres) and end derivatives (metres per unit parameter).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HermiteData {
    pub p_i: Vec3,
    pub p_f: Vec3,
    pub d_i: Vec3,
    pub d_f: Vec3,
}

impl HermiteData {
    pub fn new(p_i: Vec3, p_f: Vec3, d_i: Vec3, d_f: Vec3) -> Self {
        HermiteData { p_i, p_f, d_i, d_f }
    }

    /// Length scale used to make the residual tolerance relative.
    pub fn scale(&self) -> f64 {
        1f64.max(self.d_i.norm())
            .max(self.d_f.norm())
            .max((self.p_f - self.p_i).norm())
    }
}

/// The free angles `φ0, φ1, φ2`, each kept in `(-π, π]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeAngles {
    pub phi0: f64,
    pub phi1: f64,
    pub phi2: f64,
}

impl FreeAngles {
    pub fn new(phi0: f64, phi1: f64, phi2: f64) -> Self {
        FreeAngles {
            phi0: wrap_angle(phi0),
            phi1: wrap_angle(phi1),
            phi2: wrap_angle(phi2),
        }
    }
}

impl Default for FreeAngles {
    /// All three at −π/2, the rotation-minimising choice.
    fn default() -> Self {
        FreeAngles::new(-FRAC_PI_2, -FRAC_PI_2, -FRAC_PI_2)
    }
}

/// Norms of the end-condition mismatches of a solved segment.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Residuals {
    pub start_position: f64,
    pub end_position: f64,
    pub start_derivative: f64,
    pub end_derivative: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.start_position
            .max(self.end_position)
            .max(self.start_derivative)
            .max(self.end_derivative)
    }
}

/// A verified Hermite solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermiteSolution {
    pub preimage: QuaternionPoly,
    /// The vector whose square root (in the PH sense) fixes `A1`.
    pub g: Vec3,
    pub start: Vec3,
    pub residuals: Residuals,
    pub tolerance: f64,
}

impl HermiteSolution {
    /// The solved curve, mapped onto `[t_start, t_end]` seconds.
    pub fn segment(&self, t_start: f64, t_end: f64) -> PhQuintic {
        PhQuintic::new(self.preimage, self.start, t_start, t_end)
    }
}

/// A quaternion `A` with `A i A* = d`, one of a one-parameter family
/// indexed by `phi`.
fn pure_root(d: Vec3, phi: f64) -> Result<Quaternion> {
    let n = d.norm();
    let c = direction_cosines(d)?;
    // 1 + cos without cancellation when the direction points backwards
    let one_plus = if c.x >= 0.0 {
        1.0 + c.x
    } else {
        (c.y * c.y + c.z * c.z) / (1.0 - c.x)
    };
    if one_plus <= EPS_ANTIPODAL {
        return Err(Error::NearAntipodal(one_plus));
    }
    let scale = (0.5 * one_plus * n).sqrt();
    let (s, co) = phi.sin_cos();
    Ok(Quaternion::new(
        -s,
        co,
        (c.y * co + c.z * s) / one_plus,
        (c.z * co - c.y * s) / one_plus,
    ) * scale)
}

/// Solves the Hermite problem in the given coordinates.
pub fn solve(data: &HermiteData, angles: &FreeAngles) -> Result<HermiteSolution> {
    if !(data.p_i.is_finite() && data.p_f.is_finite() && data.d_i.is_finite() && data.d_f.is_finite()) {
        return Err(Error::NonFinite);
    }
    let a0 = pure_root(data.d_i, angles.phi0)?;
    let a2 = pure_root(data.d_f, angles.phi2)?;
    let g = (data.p_f - data.p_i) * 120.0 - (data.d_f + data.d_i) * 15.0 + a0.i_sandwich(a2) * 10.0;
    let b = pure_root(g, angles.phi1)?;
    let a1 = (a0 + a2) * -0.75 + b * 0.25;
    let preimage = QuaternionPoly::new(a0, a1, a2);
    verified(data, preimage, g)
}

fn verified(data: &HermiteData, preimage: QuaternionPoly, g: Vec3) -> Result<HermiteSolution> {
    let seg = PhQuintic::new(preimage, data.p_i, 0.0, 1.0);
    let residuals = Residuals {
        start_position: (seg.eval(0.0) - data.p_i).norm(),
        end_position: (seg.eval(1.0) - data.p_f).norm(),
        start_derivative: (seg.derivative(0.0, 1) - data.d_i).norm(),
        end_derivative: (seg.derivative(1.0, 1) - data.d_f).norm(),
    };
    let tolerance = RESIDUAL_TOLERANCE * data.scale();
    let worst = residuals.max();
    if !(worst <= tolerance) {
        return Err(Error::ResidualTooLarge {
            residual: worst,
            tolerance,
        });
    }
    Ok(HermiteSolution {
        preimage,
        g,
        start: data.p_i,
        residuals,
        tolerance,
    })
}

/// Solves in a chord-aligned frame and maps the result back.
///
/// The angle convention of [`solve`] is tied to the coordinate x axis, so
/// the same data posed in rotated coordinates gives a different curve. Here
/// the data are first rotated so the chord `p_f - p_i` lies along +x (for a
/// closed chord, `d_i + d_f` or `d_i` is used instead); the result is then
/// covariant under rigid motions of the input.
pub fn solve_canonical(data: &HermiteData, angles: &FreeAngles) -> Result<HermiteSolution> {
    let chord = data.p_f - data.p_i;
    let scale = data.scale();
    let reference = [chord, data.d_i + data.d_f, data.d_i]
        .into_iter()
        .find(|v| v.norm() > 1e-9 * scale)
        .ok_or(Error::DegenerateDirection)?;
    let to_canonical = UnitQuaternion::rotation_between(direction_cosines(reference)?, Vec3::X);
    let local = HermiteData {
        p_i: Vec3::ZERO,
        p_f: to_canonical.rotate(chord),
        d_i: to_canonical.rotate(data.d_i),
        d_f: to_canonical.rotate(data.d_f),
    };
    let sol = solve(&local, angles)?;
    let back = to_canonical.inverse();
    let preimage = sol.preimage.left_mul(back.quaternion());
    verified(data, preimage, back.rotate(sol.g))
}

/// End derivative for a pose: its forward (body x) axis scaled by `speed`.
pub fn end_tangent_from_pose(pose: &Pose, speed: f64) -> Vec3 {
    pose.forward() * speed
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::UnitQuaternion;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_vec(rng: &mut ChaCha8Rng, r: f64) -> Vec3 {
        Vec3::new(rng.gen_range(-r..r), rng.gen_range(-r..r), rng.gen_range(-r..r))
    }

    #[test]
    fn pure_root_family_reproduces_direction() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let d = rand_vec(&mut rng, 3.0);
            let phi = rng.gen_range(-3.0..3.0);
            let a = pure_root(d, phi).unwrap();
            assert!((a.i_sandwich(a) - d).norm() < 1e-12 * (1.0 + d.norm()));
        }
    }

    #[test]
    fn backwards_direction_is_rejected() {
        assert!(matches!(
            pure_root(Vec3::new(-2.0, 0.0, 0.0), 0.3),
            Err(Error::NearAntipodal(_))
        ));
        assert!(matches!(pure_root(Vec3::ZERO, 0.0), Err(Error::DegenerateDirection)));
        // nearly backwards but still admissible stays accurate
        let d = Vec3::new(-1.0, 1e-4, -2e-4);
        let a = pure_root(d, -FRAC_PI_2).unwrap();
        assert!((a.i_sandwich(a) - d).norm() < 1e-12);
    }

    #[test]
    fn straight_segment() {
        let data = HermiteData::new(Vec3::ZERO, Vec3::X, Vec3::X, Vec3::X);
        let sol = solve(&data, &FreeAngles::default()).unwrap();
        let seg = sol.segment(0.0, 1.0);
        for k in 0..=1000 {
            let t = k as f64 / 1000.0;
            let p = seg.eval(t);
            assert!(p.y.abs() <= 1e-10 && p.z.abs() <= 1e-10);
            let (d1, d2, _) = seg.derivatives(t);
            let kappa = d1.cross(d2).norm() / d1.norm().powi(3);
            assert!(kappa <= 1e-8);
        }
    }

    #[test]
    fn end_conditions_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let data = HermiteData::new(
                rand_vec(&mut rng, 1.0),
                rand_vec(&mut rng, 1.0) + Vec3::new(2.0, 0.0, 0.0),
                rand_vec(&mut rng, 1.0) + Vec3::new(1.5, 0.0, 0.0),
                rand_vec(&mut rng, 1.0) + Vec3::new(1.5, 0.0, 0.0),
            );
            let sol = solve(&data, &FreeAngles::default()).unwrap();
            assert!(sol.residuals.max() <= 1e-8 * data.scale());
            let seg = sol.segment(0.0, 1.0);
            assert!((seg.eval(0.0) - data.p_i).norm() <= 1e-8);
            assert!((seg.eval(1.0) - data.p_f).norm() <= 1e-8 * data.scale());
        }
    }

    #[test]
    fn angles_only_move_the_interior() {
        let data = HermiteData::new(
            Vec3::new(0.1, 0.2, 0.0),
            Vec3::new(1.0, 0.5, 0.3),
            Vec3::new(1.0, 0.4, -0.2),
            Vec3::new(0.8, -0.3, 0.5),
        );
        let a = solve(&data, &FreeAngles::default()).unwrap().segment(0.0, 1.0);
        let b = solve(&data, &FreeAngles::new(0.3, 1.2, -2.0)).unwrap().segment(0.0, 1.0);
        assert!((a.eval(1.0) - b.eval(1.0)).norm() < 1e-9);
        assert!((a.derivative(1.0, 1) - b.derivative(1.0, 1)).norm() < 1e-9);
        assert!((a.eval(0.5) - b.eval(0.5)).norm() > 1e-3);
    }

    #[test]
    fn scaling_covariance() {
        let data = HermiteData::new(
            Vec3::new(0.1, 0.2, 0.0),
            Vec3::new(1.0, 0.5, 0.3),
            Vec3::new(1.0, 0.4, -0.2),
            Vec3::new(0.8, -0.3, 0.5),
        );
        let s = 3.7;
        let scaled = HermiteData::new(data.p_i * s, data.p_f * s, data.d_i * s, data.d_f * s);
        let a = solve(&data, &FreeAngles::default()).unwrap().segment(0.0, 1.0);
        let b = solve(&scaled, &FreeAngles::default()).unwrap().segment(0.0, 1.0);
        for k in 0..=20 {
            let t = k as f64 / 20.0;
            let pa = a.eval(t) * s;
            assert!((pa - b.eval(t)).norm() <= 1e-9 * pa.norm().max(1.0));
        }
    }

    #[test]
    fn closed_chord_never_yields_nan() {
        let cases = [
            (Vec3::X, -Vec3::X),
            (Vec3::Y, -Vec3::Y),
            (Vec3::new(0.3, 0.5, 0.1), Vec3::new(-0.3, -0.5, -0.1)),
        ];
        for (d_i, d_f) in cases {
            let data = HermiteData::new(Vec3::ZERO, Vec3::ZERO, d_i, d_f);
            for res in [solve(&data, &FreeAngles::default()), solve_canonical(&data, &FreeAngles::default())] {
                match res {
                    Ok(sol) => {
                        let seg = sol.segment(0.0, 1.0);
                        for k in 0..=50 {
                            assert!(seg.eval(k as f64 / 50.0).is_finite());
                        }
                    }
                    Err(Error::NearAntipodal(_) | Error::DegenerateDirection | Error::ResidualTooLarge { .. }) => {}
                    Err(e) => panic!("unexpected {e}"),
                }
            }
        }
    }

    #[test]
    fn canonical_solution_is_rotation_covariant() {
        let data = HermiteData::new(
            Vec3::new(0.1, 0.2, 0.0),
            Vec3::new(1.0, 0.5, 0.3),
            Vec3::new(1.0, 0.4, -0.2),
            Vec3::new(0.8, -0.3, 0.5),
        );
        let r = UnitQuaternion::from_axis_angle(Vec3::new(0.2, -1.0, 0.7), 2.1).unwrap();
        let t = Vec3::new(3.0, -1.0, 0.5);
        let moved = HermiteData::new(
            r.rotate(data.p_i) + t,
            r.rotate(data.p_f) + t,
            r.rotate(data.d_i),
            r.rotate(data.d_f),
        );
        let a = solve_canonical(&data, &FreeAngles::default()).unwrap().segment(0.0, 1.0);
        let b = solve_canonical(&moved, &FreeAngles::default()).unwrap().segment(0.0, 1.0);
        for k in 0..=20 {
            let s = k as f64 / 20.0;
            assert!((r.rotate(a.eval(s)) + t - b.eval(s)).norm() < 1e-12);
        }
        // the literal-coordinate solver is not covariant in general
        let c = solve(&data, &FreeAngles::default()).unwrap().segment(0.0, 1.0);
        let d = solve(&moved, &FreeAngles::default()).unwrap().segment(0.0, 1.0);
        let gap = (r.rotate(c.eval(0.5)) + t - d.eval(0.5)).norm();
        assert!(gap > 1e-6);
    }

    #[test]
    fn tangent_from_pose() {
        let p = Pose::new(0.0, Vec3::ZERO, UnitQuaternion::IDENTITY);
        assert_eq!(end_tangent_from_pose(&p, 2.0), Vec3::new(2.0, 0.0, 0.0));
        let p = Pose::new(0.0, Vec3::ZERO, UnitQuaternion::about_z(FRAC_PI_2));
        assert!((end_tangent_from_pose(&p, 1.0) - Vec3::Y).norm() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let q = UnitQuaternion::exp(rand_vec(&mut rng, 3.0));
            let speed = rng.gen_range(0.1..5.0);
            let d = end_tangent_from_pose(&Pose::new(0.0, Vec3::ZERO, q), speed);
            assert!((d.norm() - speed).abs() < 1e-12);
        }
    }
}
