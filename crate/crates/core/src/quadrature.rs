//! Gauss–Legendre quadrature: fixed rules, adaptive integration, and
//! piecewise cumulative integrals that can be queried at any upper limit.

use std::sync::OnceLock;

/// An n-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Computes nodes and weights by Newton iteration on P_n.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integral of `f` over `[a, b]`.
    #[inline]
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut sum = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(mid + half * x);
        }
        sum * half
    }
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// The shared 16-point rule.
pub fn gl16() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(16))
}

const MAX_DEPTH: u32 = 30;

/// Adaptive integral of `f` over `[a, b]`: `initial_panels` equal panels,
/// each bisected until the 16-point estimate and the sum over its halves
/// differ by at most `tol` scaled to the panel width.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    initial_panels: usize,
    tol: f64,
) -> f64 {
    let mut total = 0.0;
    for_each_panel(&mut f, a, b, initial_panels, tol, |_, _, v| total += v);
    total
}

fn for_each_panel<F: FnMut(f64) -> f64, G: FnMut(f64, f64, f64)>(
    f: &mut F,
    a: f64,
    b: f64,
    initial_panels: usize,
    tol: f64,
    mut accept: G,
) {
    let rule = gl16();
    let n = initial_panels.max(1);
    let width = b - a;
    if width == 0.0 {
        return;
    }
    let per_unit = tol / width.abs();
    for k in 0..n {
        let lo = a + width * k as f64 / n as f64;
        let hi = if k + 1 == n { b } else { a + width * (k + 1) as f64 / n as f64 };
        let whole = rule.integrate(&mut *f, lo, hi);
        // explicit stack keeps panels in ascending order
        let mut stack = vec![(lo, hi, whole, 0u32)];
        while let Some((l, h, est, depth)) = stack.pop() {
            let m = 0.5 * (l + h);
            let left = rule.integrate(&mut *f, l, m);
            let right = rule.integrate(&mut *f, m, h);
            let diff = (left + right - est).abs();
            if diff <= per_unit * (h - l).abs() || depth >= MAX_DEPTH {
                accept(l, h, left + right);
            } else {
                stack.push((m, h, right, depth + 1));
                stack.push((l, m, left, depth + 1));
            }
        }
    }
}

/// Running integral `F(t) = ∫_a^t f` over a fixed adaptive panel partition.
///
/// `F` at a panel break is the sum of the accepted panel integrals; between
/// breaks a 16-point rule covers the partial panel. The partition depends
/// only on `f`, so `F(t)` is a deterministic function of `t`.
#[derive(Debug, Clone)]
pub struct CumulativeIntegral {
    breaks: Vec<f64>,
    values: Vec<f64>,
}

impl CumulativeIntegral {
    pub fn build<F: FnMut(f64) -> f64>(
        mut f: F,
        a: f64,
        b: f64,
        initial_panels: usize,
        tol: f64,
    ) -> Self {
        let mut breaks = vec![a];
        let mut values = vec![0.0];
        let mut acc = 0.0;
        for_each_panel(&mut f, a, b, initial_panels, tol, |_, h, v| {
            acc += v;
            breaks.push(h);
            values.push(acc);
        });
        CumulativeIntegral { breaks, values }
    }

    /// Integral over the whole interval.
    pub fn total(&self) -> f64 {
        *self.values.last().unwrap_or(&0.0)
    }

    pub fn panel_breaks(&self) -> &[f64] {
        &self.breaks
    }

    /// `∫_a^t f`, with `t` clamped to the interval.
    pub fn eval<F: FnMut(f64) -> f64>(&self, f: F, t: f64) -> f64 {
        let n = self.breaks.len();
        if n < 2 {
            return 0.0;
        }
        let t = t.clamp(self.breaks[0], self.breaks[n - 1]);
        // last break <= t
        let idx = self.breaks.partition_point(|&b| b <= t).saturating_sub(1);
        if idx >= n - 1 {
            return self.values[n - 1];
        }
        let start = self.breaks[idx];
        if t == start {
            return self.values[idx];
        }
        self.values[idx] + gl16().integrate(f, start, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(16);
        // degree 31 is exact for 16 points
        let v = rule.integrate(|x| x.powi(30), -1.0, 1.0);
        assert!((v - 2.0 / 31.0).abs() < 1e-15);
        let w: f64 = rule.weights.iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_a_peak() {
        // ∫_0^1 1/(1e-4 + (x-0.3)^2) dx
        let e = 1e-2;
        let exact = ((0.7f64 / e).atan() + (0.3f64 / e).atan()) / e;
        let v = integrate_adaptive(|x| 1.0 / (e * e + (x - 0.3) * (x - 0.3)), 0.0, 1.0, 8, 1e-10);
        assert!((v - exact).abs() < 1e-8 * exact, "{v} vs {exact}");
    }

    #[test]
    fn cumulative_matches_closed_form() {
        let f = |x: f64| x.cos() * 3.0;
        let c = CumulativeIntegral::build(f, 0.0, 2.0, 4, 1e-12);
        for &t in &[0.0, 0.1, 0.77, 1.5, 2.0] {
            assert!((c.eval(f, t) - 3.0 * t.sin()).abs() < 1e-13);
        }
        assert!((c.total() - 3.0 * 2f64.sin()).abs() < 1e-13);
    }
}
