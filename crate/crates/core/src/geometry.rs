//! Induced metric and curvature of the immersed surface, from projector jets.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::jet::Wirtinger;
use crate::jetmat::{trace_product_value, JetMatrix, JetVector};
use crate::model::{j_invariants, projector_full, HolomorphicVectorSpec, Solution};

type C64 = Complex64;

const I: C64 = C64::new(0.0, 1.0);

/// Below this value of `g₁₂` the point is treated as singular.
pub const DEGENERACY_THRESHOLD: f64 = 1e-14;

/// First fundamental form `g₁₁ dξ² + 2g₁₂ dξdξ̄ + g₂₂ dξ̄²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricSample {
    pub g11: C64,
    pub g12: C64,
    pub g22: C64,
}

/// `g₁₁ = -J`, `g₂₂ = -J̄`, `g₁₂ = ½ tr(∂P ∂̄P)` with `P = I - vv†/(v†v)`.
pub fn metric(v: &JetVector) -> Result<MetricSample> {
    let (j, jb) = j_invariants(v)?;
    let g12 = crate::model::g12_value(&projector_full(v)?)?;
    Ok(MetricSample { g11: -j, g12: C64::new(g12, 0.0), g22: -jb })
}

/// `g₁₂` by the vector route `½[(∂v)†P∂v + (∂̄v)†P∂̄v]/(v†v)`.
pub fn metric_g12_from_vector(v: &JetVector) -> Result<f64> {
    if v.order() == 0 {
        return Err(CoreError::OrderExhausted { needed: 1, have: 0 });
    }
    let p = projector_full(&v.truncated(0))?.value();
    let n = v.norm_sqr().value().re;
    let d = v.deriv(Wirtinger::Xi)?.value();
    let db = v.deriv(Wirtinger::XiBar)?.value();
    let s = (d.adjoint() * &p * &d)[(0, 0)] + (db.adjoint() * &p * &db)[(0, 0)];
    Ok(0.5 * s.re / n)
}

/// Christoffel symbols of the second kind, `Γ^a_bc`, indices 1 = ξ, 2 = ξ̄.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Christoffel {
    pub g1_11: C64,
    pub g2_11: C64,
    pub g1_12: C64,
    pub g2_12: C64,
    pub g1_22: C64,
    pub g2_22: C64,
}

struct Derivs {
    d: DMatrix<C64>,
    db: DMatrix<C64>,
    dd: DMatrix<C64>,
    ddb: DMatrix<C64>,
    dbdb: DMatrix<C64>,
}

fn derivs(p: &JetMatrix) -> Result<Derivs> {
    if p.order() < 2 {
        return Err(CoreError::OrderExhausted { needed: 2, have: p.order() });
    }
    let d = p.deriv(Wirtinger::Xi)?;
    let db = p.deriv(Wirtinger::XiBar)?;
    Ok(Derivs {
        dd: d.deriv(Wirtinger::Xi)?.value(),
        ddb: d.deriv(Wirtinger::XiBar)?.value(),
        dbdb: db.deriv(Wirtinger::XiBar)?.value(),
        d: d.value(),
        db: db.value(),
    })
}

fn checked_trace(p: &JetMatrix, d: &DMatrix<C64>, db: &DMatrix<C64>) -> Result<f64> {
    let t = trace_product_value(d, db).re;
    if !(t.is_finite() && 0.5 * t >= DEGENERACY_THRESHOLD) {
        return Err(CoreError::DegenerateMetric { point: p.base(), g12: 0.5 * t });
    }
    Ok(t)
}

fn christoffel_from(d: &Derivs, t: f64) -> Christoffel {
    let zero = C64::new(0.0, 0.0);
    Christoffel {
        g1_11: trace_product_value(&d.dd, &d.db) / t,
        g2_11: trace_product_value(&d.dd, &d.d) / t,
        g1_12: zero,
        g2_12: zero,
        g1_22: trace_product_value(&d.dbdb, &d.db) / t,
        g2_22: trace_product_value(&d.dbdb, &d.d) / t,
    }
}

pub fn christoffel(p: &JetMatrix) -> Result<Christoffel> {
    let d = derivs(p)?;
    let t = checked_trace(p, &d.d, &d.db)?;
    Ok(christoffel_from(&d, t))
}

/// `𝒦 = -(1/g₁₂) ∂∂̄ ln g₁₂`, with `g₁₂` carried as a jet. Needs `v` of order 3.
pub fn gaussian_curvature(v: &JetVector) -> Result<f64> {
    if v.order() < 3 {
        return Err(CoreError::OrderExhausted { needed: 3, have: v.order() });
    }
    let p = projector_full(v)?;
    let g = p.deriv(Wirtinger::Xi)?.mul(&p.deriv(Wirtinger::XiBar)?).trace().scale(C64::new(0.5, 0.0));
    let g12 = g.value().re;
    if !(g12.is_finite() && g12 >= DEGENERACY_THRESHOLD) {
        return Err(CoreError::DegenerateMetric { point: v.base(), g12 });
    }
    let lap = g.log()?.derivative_value(1, 1);
    Ok(-lap.re / g12)
}

/// Coefficients of `dξ²`, `dξdξ̄` and `dξ̄²` in the second fundamental form.
#[derive(Clone, Debug, PartialEq)]
pub struct SecondForm {
    pub dxi2: DMatrix<C64>,
    pub dxi_dxibar: DMatrix<C64>,
    pub dxibar2: DMatrix<C64>,
}

fn second_form_from(d: &Derivs, g: &Christoffel, epsilon: f64) -> SecondForm {
    let e = I * epsilon;
    SecondForm {
        dxi2: (&d.dd - &d.d * g.g1_11 - &d.db * g.g2_11) * e,
        dxi_dxibar: &d.ddb * (e * 2.0),
        dxibar2: (&d.dbdb - &d.d * g.g1_22 - &d.db * g.g2_22) * e,
    }
}

pub fn second_fundamental_form(p: &JetMatrix, epsilon: f64) -> Result<SecondForm> {
    if epsilon != 1.0 && epsilon != -1.0 {
        return Err(CoreError::InvalidInput(format!("epsilon must be +1 or -1, got {epsilon}")));
    }
    let d = derivs(p)?;
    let t = checked_trace(p, &d.d, &d.db)?;
    Ok(second_form_from(&d, &christoffel_from(&d, t), epsilon))
}

/// `∂∂̄X` at the base point, from the integrand `∂̄X = i[∂̄P, P]`.
pub fn laplacian_of_immersion(p: &JetMatrix) -> Result<DMatrix<C64>> {
    if p.order() < 2 {
        return Err(CoreError::OrderExhausted { needed: 2, have: p.order() });
    }
    let k = p.deriv(Wirtinger::XiBar)?.commutator(p);
    Ok(k.deriv(Wirtinger::Xi)?.value() * I)
}

/// Mean curvature vector `H = 2∂∂̄X/g₁₂`, the trace of the second
/// fundamental form against the inverse metric.
pub fn mean_curvature(solution: &Solution, base: C64) -> Result<DMatrix<C64>> {
    let p = solution.projector(base, 2)?;
    let d = p.deriv(Wirtinger::Xi)?.value();
    let db = p.deriv(Wirtinger::XiBar)?.value();
    let g12 = 0.5 * checked_trace(&p, &d, &db)?;
    Ok(laplacian_of_immersion(&p)? * C64::new(2.0 / g12, 0.0))
}

/// `u = ln((|∂w₁|² + |∂w₂|² + |w₂∂w₁ - w₁∂w₂|²)/A²)` for a holomorphic CP²
/// curve with `w_i = f_i/f_0` and `A = 1 + |w₁|² + |w₂|²`.
pub fn energy_density(f: &HolomorphicVectorSpec, base: C64) -> Result<f64> {
    if f.dim() != 3 {
        return Err(CoreError::InvalidDimension(f.dim()));
    }
    let jet = f.jet(base, 1)?;
    let f0 = jet.get(0).value();
    if f0.norm() == 0.0 {
        return Err(CoreError::PoleAtBase(base));
    }
    let df0 = jet.get(0).derivative_value(1, 0);
    let w = |i: usize| jet.get(i).value() / f0;
    let dw = |i: usize| (jet.get(i).derivative_value(1, 0) * f0 - jet.get(i).value() * df0) / (f0 * f0);
    let (w1, w2, d1, d2) = (w(1), w(2), dw(1), dw(2));
    let a = 1.0 + w1.norm_sqr() + w2.norm_sqr();
    let num = d1.norm_sqr() + d2.norm_sqr() + (w2 * d1 - w1 * d2).norm_sqr();
    Ok((num / (a * a)).ln())
}

/// Everything at one point of the surface.
#[derive(Clone, Debug, PartialEq)]
pub struct GeometryReport {
    pub base: C64,
    pub metric: MetricSample,
    pub christoffel: Christoffel,
    pub gaussian: f64,
    pub second_form: SecondForm,
    pub mean_curvature: DMatrix<C64>,
}

/// Full local geometry of a tower solution. ε follows the chirality and is
/// +1 for mixed members.
pub fn analyze_point(solution: &Solution, base: C64) -> Result<GeometryReport> {
    let v = solution.vector(base, 3)?;
    let p = projector_full(&v)?;
    let d = derivs(&p)?;
    let t = checked_trace(&p, &d.d, &d.db)?;
    let gamma = christoffel_from(&d, t);
    let (j, jb) = j_invariants(&v)?;
    let metric = MetricSample { g11: -j, g12: C64::new(0.5 * t, 0.0), g22: -jb };
    let epsilon = if solution.k == 0 { solution.chirality.epsilon() } else { 1.0 };
    Ok(GeometryReport {
        base,
        metric,
        christoffel: gamma,
        gaussian: gaussian_curvature(&v)?,
        second_form: second_form_from(&d, &gamma, epsilon),
        mean_curvature: laplacian_of_immersion(&p.truncated(2))? * C64::new(4.0 / t, 0.0),
    })
}
