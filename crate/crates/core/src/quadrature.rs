//! Deterministic integration over the plane, covered by two stereographic
//! charts: the disk `|ξ| <= R` and, through `η = 1/ξ`, the disk `|η| <= 1/R`.
//!
//! Each disk is integrated in polar form: composite Gauss–Legendre in the
//! radius and the periodic trapezoid rule in the angle. Node contributions
//! are evaluated in parallel and reduced with a fixed pairwise tree, so the
//! result does not depend on thread scheduling.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

type C64 = Complex64;

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Tricomi's initial guess, then Newton on P_n
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
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
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn on_interval(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = 0.5 * (b - a);
        let m = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (m + h * x, h * w))
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureScheme {
    /// Gauss–Legendre nodes per radial panel; the angle uses `4 * order` points.
    pub order: usize,
    pub chart_radius: f64,
    /// Radial panels per chart.
    pub subdivisions: usize,
    /// Rotation of the angular node layout, in radians.
    pub angle_offset: f64,
}

impl Default for QuadratureScheme {
    fn default() -> Self {
        QuadratureScheme { order: 16, chart_radius: 1.0, subdivisions: 4, angle_offset: 0.0 }
    }
}

impl QuadratureScheme {
    pub fn with_order(order: usize) -> Self {
        QuadratureScheme { order, ..Default::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.order < 4 {
            return Err(CoreError::InvalidInput(format!("quadrature order {} < 4", self.order)));
        }
        if self.subdivisions < 1 {
            return Err(CoreError::InvalidInput("subdivisions must be >= 1".into()));
        }
        if !(self.chart_radius.is_finite() && self.chart_radius > 0.0) {
            return Err(CoreError::InvalidInput(format!("chart radius {}", self.chart_radius)));
        }
        Ok(())
    }

    /// Polar nodes `(point, weight)` covering the disk `|ξ| <= radius`.
    pub fn disk_nodes(&self, radius: f64) -> Vec<(C64, f64)> {
        let gl = GaussLegendre::new(self.order);
        let n_theta = 4 * self.order;
        let dtheta = 2.0 * PI / n_theta as f64;
        let panel = radius / self.subdivisions as f64;
        let mut out = Vec::with_capacity(self.subdivisions * self.order * n_theta);
        for s in 0..self.subdivisions {
            let (a, b) = (s as f64 * panel, (s + 1) as f64 * panel);
            for (r, wr) in gl.on_interval(a, b) {
                for t in 0..n_theta {
                    let theta = self.angle_offset + t as f64 * dtheta;
                    out.push((C64::from_polar(r, theta), wr * r * dtheta));
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    /// `|value(order) - value(2 order)|`.
    pub refinement_error: f64,
}

/// Sum with a fixed balanced binary tree.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

fn integrate_disk<F>(density: &F, scheme: &QuadratureScheme, radius: f64) -> Result<f64>
where
    F: Fn(C64) -> Result<f64> + Sync,
{
    let nodes = scheme.disk_nodes(radius);
    let terms: Vec<f64> = nodes
        .par_iter()
        .map(|&(z, w)| density(z).map(|d| d * w))
        .collect::<Result<_>>()?;
    if let Some(bad) = terms.iter().position(|t| !t.is_finite()) {
        return Err(CoreError::QuadratureDivergence(format!(
            "density not finite at {}",
            nodes[bad].0
        )));
    }
    Ok(pairwise_sum(&terms))
}

fn integrate_charts_once<F1, F2>(chart1: &F1, chart2: &F2, scheme: &QuadratureScheme) -> Result<f64>
where
    F1: Fn(C64) -> Result<f64> + Sync,
    F2: Fn(C64) -> Result<f64> + Sync,
{
    let inner = integrate_disk(chart1, scheme, scheme.chart_radius)?;
    let outer = integrate_disk(chart2, scheme, 1.0 / scheme.chart_radius)?;
    Ok(inner + outer)
}

/// Integrate over the sphere given a density in each chart.
///
/// `chart1` is evaluated at `ξ` with `|ξ| <= R`; `chart2` at `η` with
/// `|η| <= 1/R` and must already include the Jacobian of `ξ = 1/η`.
pub fn integrate_sphere<F1, F2>(chart1: F1, chart2: F2, scheme: &QuadratureScheme) -> Result<QuadratureResult>
where
    F1: Fn(C64) -> Result<f64> + Sync,
    F2: Fn(C64) -> Result<f64> + Sync,
{
    scheme.validate()?;
    let coarse = integrate_charts_once(&chart1, &chart2, scheme)?;
    let fine_scheme = QuadratureScheme { order: 2 * scheme.order, ..*scheme };
    let fine = integrate_charts_once(&chart1, &chart2, &fine_scheme)?;
    let refinement_error = (fine - coarse).abs();
    if refinement_error > 1e-4 * fine.abs() {
        return Err(CoreError::QuadratureDivergence(format!(
            "order {} gives {coarse}, order {} gives {fine}",
            scheme.order, fine_scheme.order
        )));
    }
    Ok(QuadratureResult { value: fine, refinement_error })
}

/// Integrate a density `ρ(x, y)` over the whole plane.
pub fn integrate_plane<F>(density: F, scheme: &QuadratureScheme) -> Result<QuadratureResult>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    integrate_sphere(
        |z: C64| Ok(density(z.re, z.im)),
        |eta: C64| {
            let r2 = eta.norm_sqr();
            if r2 == 0.0 {
                // the density must decay faster than |ξ|^-4 for the integral to exist
                return Ok(0.0);
            }
            let z = eta.inv();
            Ok(density(z.re, z.im) / (r2 * r2))
        },
        scheme,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let gl = GaussLegendre::new(6);
        // exact through degree 11
        for p in 0..12 {
            let s: f64 = gl.on_interval(0.0, 1.0).map(|(x, w)| w * x.powi(p)).sum();
            assert!((s - 1.0 / (p as f64 + 1.0)).abs() < 1e-14, "degree {p}");
        }
    }

    #[test]
    fn gauss_legendre_known_nodes() {
        let gl = GaussLegendre::new(3);
        let x = (0.6f64).sqrt();
        assert!((gl.nodes()[0] + x).abs() < 1e-15);
        assert!(gl.nodes()[1].abs() < 1e-15);
        assert!((gl.weights()[1] - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn lorentzian_squared() {
        let r = integrate_plane(|x, y| 1.0 / (1.0 + x * x + y * y).powi(2), &QuadratureScheme::default()).unwrap();
        assert!((r.value - PI).abs() < 1e-8, "{}", r.value);
    }

    #[test]
    fn gaussian() {
        let r = integrate_plane(|x, y| (-(x * x + y * y)).exp(), &QuadratureScheme::default()).unwrap();
        assert!((r.value - PI).abs() < 1e-8, "{}", r.value);
    }

    #[test]
    fn chart_radius_independence() {
        let f = |x: f64, y: f64| 1.0 / (1.0 + x * x + y * y).powi(2);
        let a = integrate_plane(f, &QuadratureScheme::default()).unwrap();
        let b = integrate_plane(f, &QuadratureScheme { chart_radius: 2.0, ..Default::default() }).unwrap();
        assert!((a.value - b.value).abs() < 1e-8);
    }

    #[test]
    fn rotated_layout_for_radial_density() {
        let f = |x: f64, y: f64| (1.0 + x * x + y * y).powi(-3);
        let a = integrate_plane(f, &QuadratureScheme::default()).unwrap();
        let b = integrate_plane(f, &QuadratureScheme { angle_offset: 0.37, ..Default::default() }).unwrap();
        assert!((a.value - b.value).abs() < 1e-10);
    }

    #[test]
    fn rejects_low_order() {
        let r = integrate_plane(|_, _| 0.0, &QuadratureScheme::with_order(3));
        assert!(matches!(r, Err(CoreError::InvalidInput(_))));
    }

    #[test]
    fn divergent_density_reported() {
        // ∝ 1/|ξ|^2 at infinity: the chart-2 density blows up at η = 0
        let r = integrate_plane(|x, y| 1.0 / (1.0 + x * x + y * y), &QuadratureScheme::default());
        assert!(matches!(r, Err(CoreError::QuadratureDivergence(_))));
    }

    #[test]
    fn deterministic() {
        let f = |x: f64, y: f64| (1.0 + x + 0.5 * x * y) / (1.0 + x * x + y * y).powi(3);
        let a = integrate_plane(f, &QuadratureScheme::default()).unwrap();
        let b = integrate_plane(f, &QuadratureScheme::default()).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn linearity(a in -3.0..3.0f64, b in -3.0..3.0f64, s in 0.5..2.0f64) {
            let f = move |x: f64, y: f64| 1.0 / (1.0 + s * (x * x + y * y)).powi(2);
            let g = |x: f64, y: f64| (-(x * x + 2.0 * y * y)).exp();
            let scheme = QuadratureScheme::default();
            let lhs = integrate_plane(|x, y| a * f(x, y) + b * g(x, y), &scheme);
            let fi = integrate_plane(f, &scheme).unwrap().value;
            let gi = integrate_plane(g, &scheme).unwrap().value;
            if let Ok(lhs) = lhs {
                prop_assert!((lhs.value - (a * fi + b * gi)).abs() < 1e-10);
            }
        }
    }
}
