//! CP^{N-1} solutions: holomorphic input vectors, the P₊/P₋ tower, projectors,
//! Euler–Lagrange residuals, J invariants, the composite gauge field, and the
//! topological charge.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::jet::{BiJet, Wirtinger};
use crate::jetmat::{trace_product_value, JetMatrix, JetVector};
use crate::poly::{Poly, RationalFunction};
use crate::quadrature::{integrate_sphere, QuadratureScheme};

type C64 = Complex64;

/// Jet order needed to analyse tower depth `k` through curvature.
pub fn required_order(k: usize) -> usize {
    k + 3
}

/// The holomorphic vector `f` as N rational functions of ξ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolomorphicVectorSpec {
    components: Vec<RationalFunction>,
}

impl HolomorphicVectorSpec {
    pub fn new(components: Vec<RationalFunction>) -> Result<Self> {
        if components.len() < 2 {
            return Err(CoreError::InvalidDimension(components.len()));
        }
        if components.iter().all(RationalFunction::is_zero) {
            return Err(CoreError::InvalidInput("all components are identically zero".into()));
        }
        Ok(HolomorphicVectorSpec { components })
    }

    /// `f_r = sqrt(C(N-1, r)) ξ^r`.
    pub fn veronese(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(CoreError::InvalidDimension(n));
        }
        let comps = (0..n)
            .map(|r| {
                let b = binomial(n - 1, r).sqrt();
                RationalFunction::polynomial(Poly::monomial(r, C64::new(b, 0.0)))
            })
            .collect();
        HolomorphicVectorSpec::new(comps)
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[RationalFunction] {
        &self.components
    }

    pub fn jet(&self, base: C64, order: usize) -> Result<JetVector> {
        JetVector::new(
            self.components
                .iter()
                .map(|r| BiJet::from_rational(r, base, order))
                .collect::<Result<_>>()?,
        )
    }

    pub fn eval(&self, xi: C64) -> Result<DVector<C64>> {
        let vals: Vec<C64> = self.components.iter().map(|r| r.eval(xi)).collect::<Result<_>>()?;
        Ok(DVector::from_vec(vals))
    }

    /// The same map seen from the chart `η = 1/ξ`: every component is
    /// multiplied by `η^D` with `D` the smallest power that clears the pole
    /// at `η = 0`. The projective class, and hence every projector, is
    /// unchanged.
    pub fn chart_at_infinity(&self) -> HolomorphicVectorSpec {
        let d = self
            .components
            .iter()
            .filter(|r| !r.is_zero())
            .map(|r| r.numerator().degree() as i64 - r.denominator().degree() as i64)
            .max()
            .unwrap_or(0)
            .max(0);
        let comps = self
            .components
            .iter()
            .map(|r| {
                if r.is_zero() {
                    return r.clone();
                }
                let dp = r.numerator().degree() as i64;
                let dq = r.denominator().degree() as i64;
                let shift = (d - dp + dq) as usize;
                let rev = |p: &Poly| {
                    let mut c = p.coeffs().to_vec();
                    c.reverse();
                    Poly::new(c)
                };
                let num = rev(r.numerator()).mul(&Poly::monomial(shift, C64::new(1.0, 0.0)));
                RationalFunction::new(num, rev(r.denominator())).expect("reversed denominator is nonzero")
            })
            .collect();
        HolomorphicVectorSpec { components: comps }
    }
}

fn binomial(n: usize, r: usize) -> f64 {
    (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chirality {
    /// Tower built from `f(ξ)` with P₊.
    Holomorphic,
    /// Tower built from `conj(f)` with P₋.
    Antiholomorphic,
}

impl Chirality {
    /// Sign ε of the closed-form immersion for the seed of the tower.
    pub fn epsilon(self) -> f64 {
        match self {
            Chirality::Holomorphic => 1.0,
            Chirality::Antiholomorphic => -1.0,
        }
    }
}

/// A tower member `V_k = P₊^k f` (or `P₋^k conj f`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub spec: HolomorphicVectorSpec,
    pub k: usize,
    pub chirality: Chirality,
}

impl Solution {
    pub fn new(spec: HolomorphicVectorSpec, k: usize, chirality: Chirality) -> Result<Self> {
        let n = spec.dim();
        if k >= n {
            return Err(CoreError::TowerDepthExceeded { k, max: n - 1 });
        }
        Ok(Solution { spec, k, chirality })
    }

    pub fn holomorphic(spec: HolomorphicVectorSpec, k: usize) -> Result<Self> {
        Solution::new(spec, k, Chirality::Holomorphic)
    }

    pub fn veronese(n: usize, k: usize) -> Result<Self> {
        Solution::holomorphic(HolomorphicVectorSpec::veronese(n)?, k)
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    /// `V_k` as a jet of order `order` at `base`.
    pub fn vector(&self, base: C64, order: usize) -> Result<JetVector> {
        self.tower_members(base, order).map(|mut t| t.pop().expect("non-empty tower"))
    }

    /// `V_0, …, V_k`, each truncated to order `order`.
    pub fn tower_members(&self, base: C64, order: usize) -> Result<Vec<JetVector>> {
        let seed = self.spec.jet(base, order + self.k)?;
        let seed = match self.chirality {
            Chirality::Holomorphic => seed,
            Chirality::Antiholomorphic => seed.conj(),
        };
        let mut out = vec![seed];
        for _ in 0..self.k {
            let prev = out.last().unwrap();
            let next = match self.chirality {
                Chirality::Holomorphic => p_plus_apply(prev)?,
                Chirality::Antiholomorphic => p_minus_apply(prev)?,
            };
            out.push(next);
        }
        Ok(out.into_iter().map(|v| v.truncated(order)).collect())
    }

    pub fn projector(&self, base: C64, order: usize) -> Result<JetMatrix> {
        projector_full(&self.vector(base, order)?)
    }

    pub fn with_spec(&self, spec: HolomorphicVectorSpec) -> Solution {
        Solution { spec, k: self.k, chirality: self.chirality }
    }
}

/// `V_k = P₊^k f` of order `order - k`, per the tower recursion.
pub fn tower(f: &HolomorphicVectorSpec, k: usize, base: C64, order: usize) -> Result<JetVector> {
    let n = f.dim();
    if k >= n {
        return Err(CoreError::TowerDepthExceeded { k, max: n - 1 });
    }
    if order < k {
        return Err(CoreError::OrderExhausted { needed: k, have: order });
    }
    let mut v = f.jet(base, order)?;
    for _ in 0..k {
        v = p_plus_apply(&v)?;
    }
    Ok(v)
}

fn checked_norm(v: &JetVector) -> Result<BiJet> {
    let n = v.norm_sqr();
    let scale = v.max_abs();
    let nv = n.value().re;
    if !(nv.is_finite() && nv > 1e-26 * scale * scale && nv > 0.0) {
        return Err(CoreError::NullVector(v.base()));
    }
    Ok(n)
}

fn apply_raising(v: &JetVector, which: Wirtinger) -> Result<JetVector> {
    if v.order() == 0 {
        return Err(CoreError::OrderExhausted { needed: 1, have: 0 });
    }
    let n = checked_norm(v)?;
    let dv = v.deriv(which)?;
    let coef = v.dot(&dv).div(&n)?;
    Ok(dv.sub(&v.scale(&coef)))
}

/// `P₊v = ∂v - v (v†∂v)/(v†v)`.
pub fn p_plus_apply(v: &JetVector) -> Result<JetVector> {
    apply_raising(v, Wirtinger::Xi)
}

/// `P₋v = ∂̄v - v (v†∂̄v)/(v†v)`.
pub fn p_minus_apply(v: &JetVector) -> Result<JetVector> {
    apply_raising(v, Wirtinger::XiBar)
}

/// Rank-one projector `v v† / (v†v)`.
pub fn projector_rank1(v: &JetVector) -> Result<JetMatrix> {
    let n = checked_norm(v)?;
    Ok(v.outer(v).scale_jet(&n.recip()?))
}

/// Rank-(N-1) projector `I - v v† / (v†v)`.
pub fn projector_full(v: &JetVector) -> Result<JetMatrix> {
    let r = projector_rank1(v)?;
    Ok(JetMatrix::identity(v.len(), v.base(), v.order()).sub(&r))
}

/// Frobenius norm of `∂[∂̄P, P] + ∂̄[∂P, P]` at the base point.
pub fn el_residual(p: &JetMatrix) -> Result<f64> {
    if p.order() < 2 {
        return Err(CoreError::OrderExhausted { needed: 2, have: p.order() });
    }
    let dp = p.deriv(Wirtinger::Xi)?;
    let dbp = p.deriv(Wirtinger::XiBar)?;
    let a = dbp.commutator(p).deriv(Wirtinger::Xi)?;
    let b = dp.commutator(p).deriv(Wirtinger::XiBar)?;
    Ok((a.value() + b.value()).norm())
}

/// `(J, J̄) = (∂v† P ∂v, ∂̄v† P ∂̄v) / (v†v)` at the base point, where
/// `∂v† = (∂̄v)†` is the derivative of the conjugate row.
pub fn j_invariants(v: &JetVector) -> Result<(C64, C64)> {
    if v.order() == 0 {
        return Err(CoreError::OrderExhausted { needed: 1, have: 0 });
    }
    let n = checked_norm(v)?.value();
    let p = projector_full(&v.truncated(0))?.value();
    let vc = v.conj();
    let d = v.deriv(Wirtinger::Xi)?.value();
    let db = v.deriv(Wirtinger::XiBar)?.value();
    let dc = vc.deriv(Wirtinger::Xi)?.value();
    let dbc = vc.deriv(Wirtinger::XiBar)?.value();
    let j = (dc.transpose() * &p * d)[(0, 0)] / n;
    let jb = (dbc.transpose() * &p * db)[(0, 0)] / n;
    Ok((j, jb))
}

/// Composite gauge field and covariant derivative of `z = v/|v|`.
#[derive(Clone, Debug, PartialEq)]
pub struct CovariantData {
    /// `A = z†∂z`.
    pub a: C64,
    /// `z†∂̄z`.
    pub a_bar: C64,
    /// `Dz = ∂z - A z`.
    pub dz: DVector<C64>,
}

impl CovariantData {
    /// Real-coordinate components `(A_x, A_y)`; both are purely imaginary.
    pub fn real_components(&self) -> (C64, C64) {
        let i = C64::new(0.0, 1.0);
        (self.a + self.a_bar, i * (self.a - self.a_bar))
    }
}

pub fn covariant_data(v: &JetVector) -> Result<CovariantData> {
    if v.order() == 0 {
        return Err(CoreError::OrderExhausted { needed: 1, have: 0 });
    }
    let n = checked_norm(v)?;
    let inv_len = n.pow_complex(C64::new(-0.5, 0.0))?;
    let z = v.scale(&inv_len);
    let dz = z.deriv(Wirtinger::Xi)?;
    let dbz = z.deriv(Wirtinger::XiBar)?;
    let a = z.dot(&dz).value();
    let a_bar = z.dot(&dbz).value();
    let zv = z.value();
    let dzv = dz.value();
    Ok(CovariantData { a, a_bar, dz: dzv - zv * a })
}

/// Residual of the two CP² field equations for inhomogeneous coordinates
/// `w₁, w₂` given as jets of order at least 2.
pub fn cp2_equation_residual(w1: &BiJet, w2: &BiJet) -> Result<f64> {
    let order = w1.order().min(w2.order());
    if order < 2 {
        return Err(CoreError::OrderExhausted { needed: 2, have: order });
    }
    let val = |j: &BiJet, a: Wirtinger| j.deriv(a).map(|d| d.value());
    let (w1v, w2v) = (w1.value(), w2.value());
    let d1 = val(w1, Wirtinger::Xi)?;
    let db1 = val(w1, Wirtinger::XiBar)?;
    let d2 = val(w2, Wirtinger::Xi)?;
    let db2 = val(w2, Wirtinger::XiBar)?;
    let ddb1 = w1.derivative_value(1, 1);
    let ddb2 = w2.derivative_value(1, 1);
    let a2 = 1.0 + w1v.norm_sqr() + w2v.norm_sqr();
    let cross = d1 * db2 + db1 * d2;
    let e1 = ddb1 - 2.0 * w1v.conj() / a2 * d1 * db1 - w2v.conj() / a2 * cross;
    let e2 = ddb2 - 2.0 * w2v.conj() / a2 * d2 * db2 - w1v.conj() / a2 * cross;
    Ok((e1.norm_sqr() + e2.norm_sqr()).sqrt())
}

/// `g₁₂ = ½ tr(∂P ∂̄P)` at the base point of a projector jet.
pub fn g12_value(p: &JetMatrix) -> Result<f64> {
    let dp = p.deriv(Wirtinger::Xi)?.value();
    let dbp = p.deriv(Wirtinger::XiBar)?.value();
    Ok(0.5 * trace_product_value(&dp, &dbp).re)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChargeActionReport {
    /// `(1/π) ∬ g₁₂ dx dy`.
    pub q: f64,
    /// `∬ tr(∂P ∂̄P) dx dy`.
    pub action_energy: f64,
    pub q_refinement_error: f64,
    pub action_refinement_error: f64,
    pub quadrature_order: usize,
    pub charts_used: usize,
}

/// Topological charge and action, integrated over both stereographic charts.
pub fn charge_and_action(solution: &Solution, quad_order: usize) -> Result<ChargeActionReport> {
    if quad_order < 8 {
        return Err(CoreError::InvalidInput(format!("quadrature order {quad_order} < 8")));
    }
    let scheme = QuadratureScheme::with_order(quad_order);
    let far = solution.with_spec(solution.spec.chart_at_infinity());
    let density = |s: &Solution, z: C64| -> Result<f64> { g12_value(&s.projector(z, 1)?) };
    let r = integrate_sphere(|z| density(solution, z), |eta| density(&far, eta), &scheme)?;
    let pi = std::f64::consts::PI;
    Ok(ChargeActionReport {
        q: r.value / pi,
        action_energy: 2.0 * r.value,
        q_refinement_error: r.refinement_error / pi,
        action_refinement_error: 2.0 * r.refinement_error,
        quadrature_order: quad_order,
        charts_used: 2,
    })
}

/// Values of `P` at a point, for reporting.
pub fn projector_value(solution: &Solution, xi: C64) -> Result<DMatrix<C64>> {
    Ok(solution.projector(xi, 0)?.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn points(seed: u64, n: usize) -> Vec<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))).collect()
    }

    /// Hand-built, non-harmonic `(1, ξ + 2ξ̄, 0)`.
    fn non_harmonic(base: C64, order: usize) -> JetVector {
        let one = BiJet::constant(c(1.0, 0.0), base, order);
        let mid = &BiJet::xi(base, order) + &BiJet::xibar(base, order).scale(c(2.0, 0.0));
        JetVector::new(vec![one, mid, BiJet::zero(base, order)]).unwrap()
    }

    #[test]
    fn veronese_components() {
        let f = HolomorphicVectorSpec::veronese(3).unwrap();
        let x = c(0.7, -0.2);
        let v = f.eval(x).unwrap();
        assert!((v[0] - 1.0).norm() < 1e-15);
        assert!((v[1] - x * 2f64.sqrt()).norm() < 1e-15);
        assert!((v[2] - x * x).norm() < 1e-15);
        let f4 = HolomorphicVectorSpec::veronese(4).unwrap();
        let v4 = f4.eval(c(1.0, 0.0)).unwrap();
        let s3 = 3f64.sqrt();
        for (a, b) in v4.iter().zip([1.0, s3, s3, 1.0]) {
            assert!((a - b).norm() < 1e-15);
        }
        assert_eq!(HolomorphicVectorSpec::veronese(2).unwrap().eval(x).unwrap()[1], x);
        assert_eq!(HolomorphicVectorSpec::veronese(1), Err(CoreError::InvalidDimension(1)));
    }

    #[test]
    fn constant_vector_is_annihilated() {
        let b = c(0.2, 0.1);
        let v = JetVector::new(vec![
            BiJet::constant(c(1.0, 0.0), b, 3),
            BiJet::constant(c(0.0, 2.0), b, 3),
        ])
        .unwrap();
        assert!(p_plus_apply(&v).unwrap().max_abs() == 0.0);
    }

    #[test]
    fn mixed_solution_direction_at_one() {
        let f = HolomorphicVectorSpec::veronese(3).unwrap();
        let v1 = tower(&f, 1, c(1.0, 0.0), 3).unwrap().value();
        // (-√2, 0, √2) up to scale
        assert!(v1[1].norm() < 1e-14);
        assert!((v1[0] + v1[2]).norm() < 1e-14);
        assert!(v1[0].norm() > 0.1);
    }

    #[test]
    fn mixed_solution_matches_closed_form() {
        let f = HolomorphicVectorSpec::veronese(3).unwrap();
        for x in points(3, 10) {
            let v1 = tower(&f, 1, x, 3).unwrap().value();
            let r = x.norm_sqr();
            let s = 2f64.sqrt() / (1.0 + r);
            let want = [-x.conj() * 2f64.sqrt() * s, c(1.0 - r, 0.0) * s, x * 2f64.sqrt() * s];
            for i in 0..3 {
                assert!((v1[i] - want[i]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn mixed_solution_at_i() {
        let f = HolomorphicVectorSpec::veronese(3).unwrap();
        let v1 = tower(&f, 1, c(0.0, 1.0), 3).unwrap().value();
        // ξ = i: √2/2 · (-√2 (-i), 0, √2 i) = (i, 0, i)
        assert!((v1[0] - c(0.0, 1.0)).norm() < 1e-14);
        assert!(v1[1].norm() < 1e-14);
        assert!((v1[2] - c(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn veronese_cp2_third_power_vanishes() {
        let f = HolomorphicVectorSpec::veronese(3).unwrap();
        for x in points(5, 5) {
            let v2 = tower(&f, 2, x, 4).unwrap();
            let v3 = p_plus_apply(&v2).unwrap();
            assert!(v3.value().norm() < 1e-12 * v2.value().norm().max(1.0));
        }
    }

    #[test]
    fn tower_nilpotency() {
        for n in 2..=5 {
            let f = HolomorphicVectorSpec::veronese(n).unwrap();
            let x = c(0.3, -0.45);
            let last = tower(&f, n - 1, x, n + 1).unwrap();
            let next = p_plus_apply(&last).unwrap();
            assert!(next.value().norm() < 1e-11 * last.value().norm().max(1.0), "N = {n}");
        }
    }

    #[test]
    fn tower_zero_is_identity() {
        let f = HolomorphicVectorSpec::veronese(4).unwrap();
        let b = c(0.1, 0.2);
        assert_eq!(tower(&f, 0, b, 3).unwrap(), f.jet(b, 3).unwrap());
    }

    #[test]
    fn tower_depth_checked() {
        let f = HolomorphicVectorSpec::veronese(3).unwrap();
        assert_eq!(
            tower(&f, 3, c(0.0, 0.0), 6),
            Err(CoreError::TowerDepthExceeded { k: 3, max: 2 })
        );
    }

    #[test]
    fn orthogonality_of_tower() {
        for n in 2..=5 {
            let s = Solution::veronese(n, n - 1).unwrap();
            for x in points(11 + n as u64, 25) {
                let members = s.tower_members(x, 1).unwrap();
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            let d = members[i].dot(&members[j]).value();
                            let scale = members[i].value().norm() * members[j].value().norm();
                            assert!(d.norm() < 1e-10 * scale.max(1.0), "N={n} i={i} j={j}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn p_minus_mirrors_p_plus() {
        let f = HolomorphicVectorSpec::veronese(3).unwrap();
        for x in points(19, 6) {
            let up = tower(&f, 1, x, 3).unwrap();
            let down = p_minus_apply(&f.jet(x, 3).unwrap().conj()).unwrap();
            assert!((down.value() - up.conj().value()).norm() < 1e-13);
        }
    }

    #[test]
    fn full_projector_values() {
        let s = Solution::veronese(3, 0).unwrap();
        let p = s.projector(c(0.0, 0.0), 2).unwrap().value();
        let want = DMatrix::from_diagonal(&DVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]));
        assert!((p.clone() - want).norm() < 1e-15);
        for x in points(23, 10) {
            let p = s.projector(x, 1).unwrap().value();
            assert!((&p * &p - &p).norm() < 1e-12);
            assert!((p.trace() - 2.0).norm() < 1e-12);
            assert!((p.adjoint() - &p).norm() < 1e-14);
        }
    }

    #[test]
    fn rank1_projector_values() {
        let f = HolomorphicVectorSpec::veronese(3).unwrap();
        let r = projector_rank1(&tower(&f, 1, c(0.0, 0.0), 3).unwrap()).unwrap().value();
        let want = DMatrix::from_diagonal(&DVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]));
        assert!((r - want).norm() < 1e-15);

        let b = c(0.5, 0.5);
        let e1 = JetVector::new(vec![
            BiJet::constant(c(1.0, 0.0), b, 1),
            BiJet::zero(b, 1),
            BiJet::zero(b, 1),
        ])
        .unwrap();
        let p = projector_rank1(&e1).unwrap();
        assert!((p.value()[(0, 0)] - 1.0).norm() < 1e-15);
        assert!((p.value().trace() - 1.0).norm() < 1e-15);

        for x in points(29, 10) {
            let p = projector_rank1(&non_harmonic(x, 1)).unwrap().value();
            assert!((&p * &p - &p).norm() < 1e-12);
        }
    }

    #[test]
    fn el_residual_vanishes_on_tower() {
        for n in 2..=4 {
            for k in 0..n {
                let s = Solution::veronese(n, k).unwrap();
                for x in points(31 + (n * 7 + k) as u64, 4) {
                    let v = s.vector(x, 2).unwrap();
                    assert!(el_residual(&projector_full(&v).unwrap()).unwrap() < 1e-10);
                    assert!(el_residual(&projector_rank1(&v).unwrap()).unwrap() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn el_residual_detects_non_harmonic() {
        let p = projector_full(&non_harmonic(c(1.0, 0.0), 2)).unwrap();
        assert!(el_residual(&p).unwrap() > 1e-3);
    }

    #[test]
    fn j_vanishes_for_veronese_tower() {
        let s = Solution::veronese(3, 0).unwrap();
        let (j, jb) = j_invariants(&s.vector(c(0.4, 0.3), 1).unwrap()).unwrap();
        assert!(j.norm() < 1e-14 && jb.norm() < 1e-14);
        let m = Solution::veronese(3, 1).unwrap();
        for x in points(37, 10) {
            let (j, jb) = j_invariants(&m.vector(x, 1).unwrap()).unwrap();
            assert!(j.norm() < 1e-10 && jb.norm() < 1e-10);
        }
    }

    #[test]
    fn j_nonzero_for_non_harmonic() {
        let (j, _) = j_invariants(&non_harmonic(c(1.0, 0.0), 1)).unwrap();
        assert!(j.norm() > 1e-3);
    }

    #[test]
    fn covariant_data_properties() {
        let b = c(0.2, 0.0);
        let e1 = JetVector::new(vec![BiJet::constant(c(1.0, 0.0), b, 1), BiJet::zero(b, 1)]).unwrap();
        let d = covariant_data(&e1).unwrap();
        assert!(d.a.norm() < 1e-15 && d.dz.norm() < 1e-15);
        for x in points(41, 10) {
            let v = non_harmonic(x, 2);
            let d = covariant_data(&v).unwrap();
            let z = v.value().unscale(v.value().norm());
            assert!((z.dotc(&d.dz)).norm() < 1e-12);
            let (ax, ay) = d.real_components();
            assert!((ax + ax.conj()).norm() < 1e-12);
            assert!((ay + ay.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn null_vector_reported() {
        let b = c(0.0, 0.0);
        let v = JetVector::new(vec![BiJet::xi(b, 2), BiJet::xibar(b, 2)]).unwrap();
        assert_eq!(p_plus_apply(&v), Err(CoreError::NullVector(b)));
    }

    #[test]
    fn chart_at_infinity_reverses() {
        let f = HolomorphicVectorSpec::veronese(3).unwrap().chart_at_infinity();
        let eta = c(0.3, 0.2);
        let v = f.eval(eta).unwrap();
        // η² (1, √2/η, 1/η²) = (η², √2 η, 1)
        assert!((v[0] - eta * eta).norm() < 1e-15);
        assert!((v[1] - eta * 2f64.sqrt()).norm() < 1e-15);
        assert!((v[2] - 1.0).norm() < 1e-15);
    }

    #[test]
    fn charge_of_veronese() {
        let r = charge_and_action(&Solution::veronese(3, 0).unwrap(), 16).unwrap();
        assert!((r.q - 1.0).abs() < 1e-6, "{}", r.q);
        assert!((r.action_energy - 2.0 * std::f64::consts::PI).abs() < 1e-6);
        let r = charge_and_action(&Solution::veronese(3, 1).unwrap(), 16).unwrap();
        assert!((r.q - 2.0).abs() < 1e-6, "{}", r.q);
    }

    #[test]
    fn cp2_residual_of_veronese() {
        // w = (√2 ξ, ξ²)
        let x = c(0.3, 0.8);
        let xi = BiJet::xi(x, 3);
        let w1 = xi.scale(c(2f64.sqrt(), 0.0));
        let w2 = &xi * &xi;
        assert!(cp2_equation_residual(&w1, &w2).unwrap() < 1e-13);
        let bad = BiJet::xibar(x, 3);
        let w2b = &xi * &bad;
        assert!(cp2_equation_residual(&w1, &w2b).unwrap() > 1e-3);
    }
}
