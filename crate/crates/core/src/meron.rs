//! Dilation-invariant CP² solutions with `|w₁| = |w₂| = 1`, their flat
//! immersions, and the trajectory structure of the quadratic differential
//! `d ln F · d ln F̄`.

use std::f64::consts::{FRAC_PI_3, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::geometry::{MetricSample, DEGENERACY_THRESHOLD};
use crate::jet::BiJet;
use crate::jetmat::JetVector;
use crate::model::cp2_equation_residual;
use crate::poly::RationalFunction;

type C64 = Complex64;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Sign of `ψ = ±π/3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn from_sign(sign: i32) -> Result<Self> {
        match sign {
            1 => Ok(Branch::Plus),
            -1 => Ok(Branch::Minus),
            s => Err(CoreError::InvalidInput(format!("branch must be +1 or -1, got {s}"))),
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn psi(self) -> f64 {
        self.sign() * FRAC_PI_3
    }
}

/// `w₁ = F/F̄`, `w₂ = (c/c̄) F^{e^{iψ}} / F̄^{e^{-iψ}}`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeronSpec {
    f: RationalFunction,
    c: C64,
    branch: Branch,
}

impl MeronSpec {
    pub fn new(f: RationalFunction, c: C64, branch: Branch) -> Result<Self> {
        if f.is_zero() {
            return Err(CoreError::InvalidInput("F is identically zero".into()));
        }
        if c.norm() == 0.0 || !c.re.is_finite() || !c.im.is_finite() {
            return Err(CoreError::InvalidInput("c must be a finite nonzero complex number".into()));
        }
        Ok(MeronSpec { f, c, branch })
    }

    pub fn f(&self) -> &RationalFunction {
        &self.f
    }

    pub fn c(&self) -> C64 {
        self.c
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }
}

/// `F(ξ)`, rejecting zeros and the cut of the principal logarithm.
fn f_value(f: &RationalFunction, xi: C64) -> Result<C64> {
    let v = f.eval(xi)?;
    if v.norm() == 0.0 {
        return Err(CoreError::ZeroOfF(xi));
    }
    if v.im == 0.0 && v.re < 0.0 {
        return Err(CoreError::BranchCut(v));
    }
    Ok(v)
}

pub fn meron_solution(spec: &MeronSpec, xi: C64) -> Result<(C64, C64)> {
    let f = f_value(&spec.f, xi)?;
    let sigma = C64::from_polar(1.0, spec.branch.psi());
    let g = (sigma * f.ln()).exp();
    let phase = spec.c / spec.c.conj();
    Ok((f / f.conj(), phase * g / g.conj()))
}

/// Jets of `w₁, w₂` at `base` for an arbitrary angle `ψ`; only `ψ = ±π/3`
/// gives a solution.
pub fn meron_jets_for_psi(f: &RationalFunction, c: C64, psi: f64, base: C64, order: usize) -> Result<(BiJet, BiJet)> {
    f_value(f, base)?;
    let fj = BiJet::from_rational(f, base, order)?;
    let g = fj.pow_complex(C64::from_polar(1.0, psi))?;
    let w1 = fj.div(&fj.conj())?;
    let w2 = g.div(&g.conj())?.scale(c / c.conj());
    Ok((w1, w2))
}

pub fn meron_jets(spec: &MeronSpec, base: C64, order: usize) -> Result<(BiJet, BiJet)> {
    meron_jets_for_psi(&spec.f, spec.c, spec.branch.psi(), base, order)
}

/// Residual of the CP² equations for the ansatz with angle `ψ`.
pub fn meron_equation_residual(f: &RationalFunction, c: C64, psi: f64, base: C64) -> Result<f64> {
    let (w1, w2) = meron_jets_for_psi(f, c, psi, base, 2)?;
    cp2_equation_residual(&w1, &w2)
}

/// The eight components of the radius vector, principal branch of `ln F`.
pub fn meron_radius(spec: &MeronSpec, xi: C64) -> Result<[f64; 8]> {
    let f = f_value(&spec.f, xi)?;
    let (c, lnf) = match spec.branch {
        Branch::Plus => (spec.c, f.ln()),
        Branch::Minus => (spec.c.conj(), f.ln()),
    };
    let k = 1.0 / (6.0 * SQRT3 * c.norm_sqr());
    let sigma = C64::from_polar(1.0, FRAC_PI_3);
    // |F|^{-2σ}; its product with |F|^{2i√3} is |F|^{-2σ̄}
    let damp = (-2.0 * sigma * f.norm().ln()).exp();
    let a = c.conj() * c.conj() * f * damp;
    let b = c.conj() * c.conj() * f.conj() * damp;
    let x1 = -2.0 * k * a.im;
    let x2 = -2.0 * k * a.re;
    let x6 = 2.0 * k * b.re;
    let x8 = -2.0 * k * b.im;
    let f2 = f * f / f.norm_sqr();
    let x5 = -f2.re / (3.0 * SQRT3);
    let x7 = -f2.im / (3.0 * SQRT3);
    Ok(match spec.branch {
        Branch::Plus => [
            x1,
            x2,
            (C64::new(1.0, -SQRT3) * lnf).re / 3.0,
            -(C64::new(SQRT3, 1.0) * lnf).re / 3.0,
            x5,
            x6,
            x7,
            x8,
        ],
        Branch::Minus => [
            x8,
            x6,
            (C64::new(1.0, SQRT3) * lnf).re / 3.0,
            -(C64::new(SQRT3, -1.0) * lnf).re / 3.0,
            -x5,
            x2,
            -x7,
            x1,
        ],
    })
}

/// `g₁₂ = |F'/F|²/3`, so that `I = (2/3)|F'|²/|F|² dξdξ̄`.
pub fn meron_metric(spec: &MeronSpec, xi: C64) -> Result<MetricSample> {
    f_value(&spec.f, xi)?;
    let g = spec.f.log_derivative()?.eval(xi)?;
    let zero = C64::new(0.0, 0.0);
    Ok(MetricSample { g11: zero, g12: C64::new(g.norm_sqr() / 3.0, 0.0), g22: zero })
}

/// `g₁₂` of the general projector metric applied to `(1, w₁, w₂)`.
pub fn meron_metric_from_jets(spec: &MeronSpec, xi: C64) -> Result<MetricSample> {
    let (w1, w2) = meron_jets(spec, xi, 1)?;
    let one = BiJet::constant(C64::new(1.0, 0.0), xi, 1);
    crate::geometry::metric(&JetVector::new(vec![one, w1, w2])?)
}

/// Gaussian curvature of the meron metric from the `g₁₂` jet.
pub fn meron_gaussian_curvature(spec: &MeronSpec, xi: C64) -> Result<f64> {
    f_value(&spec.f, xi)?;
    let g = BiJet::from_rational(&spec.f.log_derivative()?, xi, 2)?;
    let g12 = (&g * &g.conj()).scale(C64::new(1.0 / 3.0, 0.0));
    let v = g12.value().re;
    if !(v.is_finite() && v >= DEGENERACY_THRESHOLD) {
        return Err(CoreError::DegenerateMetric { point: xi, g12: v });
    }
    Ok(-g12.log()?.derivative_value(1, 1).re / v)
}

/// A semi-infinite cylinder attached at a simple pole of `F'/F`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cylinder {
    /// `None` for the point at infinity.
    pub pole: Option<C64>,
    pub residue: f64,
    pub perimeter: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadDiffReport {
    pub finite_poles: Vec<(C64, C64)>,
    pub residue_at_infinity: C64,
    pub zeros: Vec<C64>,
    pub cylinders: Vec<Cylinder>,
}

/// Poles, residues and zeros of `F'/F`. Every pole is simple with the
/// (signed) multiplicity of the corresponding zero or pole of `F` as residue.
pub fn quad_diff_report(f: &RationalFunction) -> Result<QuadDiffReport> {
    if f.is_zero() {
        return Err(CoreError::InvalidInput("F is identically zero".into()));
    }
    let mut poles: Vec<(C64, i64)> = Vec::new();
    let mut add = |z: C64, m: i64| {
        if let Some(p) = poles.iter_mut().find(|p| (p.0 - z).norm() < 1e-8 * (1.0 + z.norm())) {
            p.1 += m;
        } else {
            poles.push((z, m));
        }
    };
    for (z, m) in f.numerator().roots()? {
        add(z, m as i64);
    }
    for (z, m) in f.denominator().roots()? {
        add(z, -(m as i64));
    }
    poles.retain(|p| p.1 != 0);
    poles.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));

    let (p, q) = (f.numerator(), f.denominator());
    let wronskian = p.derivative().mul(q).sub(&p.mul(&q.derivative()));
    let mut zeros = Vec::new();
    if !wronskian.is_zero() {
        for (z, _) in wronskian.roots()? {
            if !poles.iter().any(|(pz, _)| (pz - z).norm() < 1e-7 * (1.0 + z.norm()))
                && !(p.eval(z).norm() <= 1e-10 * p.magnitude_at(z) || q.eval(z).norm() <= 1e-10 * q.magnitude_at(z))
            {
                zeros.push(z);
            }
        }
    }
    zeros.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));

    let at_infinity = -(p.degree() as i64 - q.degree() as i64);
    let mut cylinders: Vec<Cylinder> = poles
        .iter()
        .map(|&(z, m)| Cylinder { pole: Some(z), residue: m as f64, perimeter: 2.0 * PI * (m as f64).abs() })
        .collect();
    if at_infinity != 0 {
        cylinders.push(Cylinder {
            pole: None,
            residue: at_infinity as f64,
            perimeter: 2.0 * PI * (at_infinity as f64).abs(),
        });
    }
    Ok(QuadDiffReport {
        finite_poles: poles.into_iter().map(|(z, m)| (z, C64::new(m as f64, 0.0))).collect(),
        residue_at_infinity: C64::new(at_infinity as f64, 0.0),
        zeros,
        cylinders,
    })
}

/// Why tracing stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Closed,
    CriticalPoint,
    MaxSteps,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub seed: C64,
    pub points: Vec<C64>,
    pub closed: bool,
    /// Distance from the seed to the interpolated path at closure.
    pub period_error: f64,
    pub stop: StopReason,
    pub arc_length: f64,
    /// `∮ |F'/F| |dξ|`, the perimeter in the flat metric.
    pub omega_perimeter: f64,
    /// Largest `|ln|F(ξ)| - ln|F(seed)||` along the path.
    pub max_invariant_drift: f64,
}

/// Zeros and poles of `F'/F` in the finite plane.
pub fn critical_points(f: &RationalFunction) -> Result<Vec<C64>> {
    let r = quad_diff_report(f)?;
    Ok(r.finite_poles.iter().map(|p| p.0).chain(r.zeros).collect())
}

/// `10⁻³` times the distance from `seed` to the nearest critical point.
pub fn default_step(f: &RationalFunction, seed: C64) -> Result<f64> {
    let d = critical_points(f)?.iter().map(|z| (z - seed).norm()).fold(f64::INFINITY, f64::min);
    Ok(if d.is_finite() { 1e-3 * d } else { 1e-3 * (1.0 + seed.norm()) })
}

fn segment_distance(p: C64, a: C64, b: C64) -> f64 {
    let d = b - a;
    let l2 = d.norm_sqr();
    if l2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * d.conj()).re / l2).clamp(0.0, 1.0);
    (p - (a + d * t)).norm()
}

/// True when the foot of the perpendicular from `p` lies on the half-open
/// chord `[a, b)`.
fn passes(p: C64, a: C64, b: C64) -> bool {
    let d = b - a;
    ((p - a) * d.conj()).re >= 0.0 && ((p - b) * d.conj()).re < 0.0
}

/// Cubic Hermite point on a step of length `h` with unit-time endpoint
/// velocities `v0, v1`.
fn hermite(p0: C64, v0: C64, p1: C64, v1: C64, h: f64, t: f64) -> C64 {
    let t2 = t * t;
    let t3 = t2 * t;
    p0 * (2.0 * t3 - 3.0 * t2 + 1.0) + v0 * (h * (t3 - 2.0 * t2 + t)) + p1 * (-2.0 * t3 + 3.0 * t2) + v1 * (h * (t3 - t2))
}

fn closest_on_hermite(seed: C64, p0: C64, v0: C64, p1: C64, v1: C64, h: f64) -> (f64, C64) {
    let dist = |t: f64| (hermite(p0, v0, p1, v1, h, t) - seed).norm();
    let n = 64;
    let mut best = 0;
    for i in 1..=n {
        if dist(i as f64 / n as f64) < dist(best as f64 / n as f64) {
            best = i;
        }
    }
    let (mut lo, mut hi) = (((best as f64) - 1.0).max(0.0) / n as f64, ((best as f64) + 1.0).min(n as f64) / n as f64);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if dist(a) < dist(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let t = 0.5 * (lo + hi);
    (t, hermite(p0, v0, p1, v1, h, t))
}

/// Follows `Re((F'/F) dξ) = 0` from `seed` by classic RK4 in arc length,
/// i.e. `dξ/ds = i conj(F'/F)/|F'/F|`, with fixed step `step`.
pub fn trace_trajectory(f: &RationalFunction, seed: C64, step: f64, max_steps: usize) -> Result<Trajectory> {
    if !(step.is_finite() && step > 0.0) {
        return Err(CoreError::InvalidInput(format!("step must be positive, got {step}")));
    }
    if max_steps == 0 {
        return Err(CoreError::InvalidInput("max_steps must be >= 1".into()));
    }
    let g = f.log_derivative()?;
    let critical = critical_points(f)?;
    let exclusion = 10.0 * step;
    if critical.iter().any(|z| (z - seed).norm() < exclusion) {
        return Err(CoreError::SeedAtCriticalPoint(seed));
    }
    let level = f_value_any(f, seed)?.norm().ln();
    let field = |z: C64| -> Result<(C64, f64)> {
        let gv = g.eval(z)?;
        let m = gv.norm();
        if m == 0.0 || !m.is_finite() {
            return Err(CoreError::SeedAtCriticalPoint(z));
        }
        Ok((C64::new(0.0, 1.0) * gv.conj() / m, m))
    };

    let mut points = vec![seed];
    let (mut v, mut speed) = field(seed)?;
    let mut omega = 0.0;
    let mut drift: f64 = 0.0;
    let mut stop = StopReason::MaxSteps;
    let mut period_error = 0.0;
    let mut arc = 0.0;
    let mut z = seed;
    for n in 1..=max_steps {
        let k1 = v;
        let k2 = field(z + k1 * (0.5 * step))?.0;
        let k3 = field(z + k2 * (0.5 * step))?.0;
        let k4 = field(z + k3 * step)?.0;
        let next = z + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (step / 6.0);
        let (v_next, speed_next) = field(next)?;
        let d = (f_value_any(f, next)?.norm().ln() - level).abs();
        drift = drift.max(d);
        if drift > 1e-4 {
            return Err(CoreError::StepTooLarge(drift));
        }
        if n > 10 && passes(seed, z, next) && segment_distance(seed, z, next) < 0.5 * step {
            let (t, p) = closest_on_hermite(seed, z, v, next, v_next, step);
            let end_speed = speed + (speed_next - speed) * t;
            omega += 0.5 * (speed + end_speed) * step * t;
            arc += step * t;
            period_error = (p - seed).norm();
            points.push(p);
            stop = StopReason::Closed;
            break;
        }
        omega += 0.5 * (speed + speed_next) * step;
        arc += step;
        points.push(next);
        z = next;
        v = v_next;
        speed = speed_next;
        if critical.iter().any(|c| (c - z).norm() < exclusion) {
            stop = StopReason::CriticalPoint;
            break;
        }
    }
    Ok(Trajectory {
        seed,
        points,
        closed: stop == StopReason::Closed,
        period_error,
        stop,
        arc_length: arc,
        omega_perimeter: omega,
        max_invariant_drift: drift,
    })
}

/// `F(ξ)` without the branch-cut restriction.
fn f_value_any(f: &RationalFunction, xi: C64) -> Result<C64> {
    let v = f.eval(xi)?;
    if v.norm() == 0.0 {
        return Err(CoreError::ZeroOfF(xi));
    }
    Ok(v)
}

/// Winding number of a closed polyline around `z`.
pub fn winding_number(points: &[C64], z: C64) -> i64 {
    if points.len() < 2 {
        return 0;
    }
    let mut total = 0.0;
    for i in 0..points.len() {
        let a = points[i] - z;
        let b = points[(i + 1) % points.len()] - z;
        total += (b / a).arg();
    }
    (total / (2.0 * PI)).round() as i64
}
