//! Dense complex polynomials in ascending-power form, rational functions, and
//! root finding through companion-matrix eigenvalues.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

type C64 = Complex64;

/// Polynomial with complex coefficients; `coeffs[i]` multiplies `ξ^i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Poly {
    coeffs: Vec<C64>,
}

impl Poly {
    pub fn new(coeffs: Vec<C64>) -> Self {
        let mut p = Poly { coeffs };
        p.trim();
        p
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| C64::new(c, 0.0)).collect())
    }

    pub fn constant(c: C64) -> Self {
        Poly::new(vec![c])
    }

    /// `ξ^n`.
    pub fn monomial(n: usize, c: C64) -> Self {
        let mut coeffs = vec![C64::new(0.0, 0.0); n + 1];
        coeffs[n] = c;
        Poly::new(coeffs)
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[C64]) -> Self {
        roots.iter().fold(Poly::constant(C64::new(1.0, 0.0)), |acc, r| {
            acc.mul(&Poly::new(vec![-r, C64::new(1.0, 0.0)]))
        })
    }

    fn trim(&mut self) {
        while self.coeffs.len() > 1 && *self.coeffs.last().unwrap() == C64::new(0.0, 0.0) {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.coeffs.push(C64::new(0.0, 0.0));
        }
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == C64::new(0.0, 0.0))
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: C64) -> C64 {
        self.coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }

    /// Sum of `|c_i| |x|^i`, the scale against which `eval(x)` is judged zero.
    pub fn magnitude_at(&self, x: C64) -> f64 {
        let r = x.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::constant(C64::new(0.0, 0.0));
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![C64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = C64::new(0.0, 0.0);
        Poly::new(
            (0..n)
                .map(|i| {
                    self.coeffs.get(i).copied().unwrap_or(zero)
                        - other.coeffs.get(i).copied().unwrap_or(zero)
                })
                .collect(),
        )
    }

    /// Coefficients of `p(base + t)` in ascending powers of `t`.
    pub fn taylor_shift(&self, base: C64) -> Vec<C64> {
        // repeated synthetic division by (ξ - base)
        let mut work = self.coeffs.clone();
        let n = work.len();
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let len = n - k;
            for i in (0..len - 1).rev() {
                let carry = work[i + 1] * base;
                work[i] += carry;
            }
            out.push(work[0]);
            work.remove(0);
        }
        out
    }

    /// Multiplicity of `ξ = 0` as a root (number of leading zero coefficients).
    fn zero_root_multiplicity(&self) -> usize {
        if self.is_zero() {
            return 0;
        }
        self.coeffs.iter().take_while(|c| **c == C64::new(0.0, 0.0)).count()
    }

    /// `ξ^n`-stripped, in the sense that `self = ξ^n · rest`.
    fn strip_zero_roots(&self) -> (usize, Poly) {
        let n = self.zero_root_multiplicity();
        (n, Poly::new(self.coeffs[n..].to_vec()))
    }

    /// Roots with multiplicities.
    ///
    /// Exact roots at the origin are split off from the coefficient list;
    /// the rest come from the eigenvalues of the companion matrix followed by
    /// a Newton polish. Eigenvalues within `1e-5` (relative) of each other are
    /// treated as one multiple root only if the lower derivatives vanish there;
    /// otherwise the roots are reported as unresolvable.
    pub fn roots(&self) -> Result<Vec<(C64, usize)>> {
        if self.is_zero() {
            return Err(CoreError::InvalidInput("roots of the zero polynomial".into()));
        }
        let (zero_mult, rest) = self.strip_zero_roots();
        let mut out = Vec::new();
        if zero_mult > 0 {
            out.push((C64::new(0.0, 0.0), zero_mult));
        }
        let deg = rest.degree();
        if deg == 0 {
            return Ok(out);
        }
        let lead = rest.coeffs[deg];
        let mut companion = DMatrix::<C64>::zeros(deg, deg);
        for i in 1..deg {
            companion[(i, i - 1)] = C64::new(1.0, 0.0);
        }
        for i in 0..deg {
            companion[(i, deg - 1)] = -rest.coeffs[i] / lead;
        }
        let eig = companion
            .clone()
            .schur()
            .eigenvalues()
            .ok_or_else(|| CoreError::RootFindingFailure("Schur iteration failed".into()))?;
        let mut raw: Vec<C64> = eig.iter().copied().collect();
        if raw.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(CoreError::RootFindingFailure("non-finite eigenvalue".into()));
        }
        raw.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));

        // group eigenvalues belonging to one (possibly multiple) root
        let mut groups: Vec<Vec<C64>> = Vec::new();
        let mut used = vec![false; raw.len()];
        for i in 0..raw.len() {
            if used[i] {
                continue;
            }
            used[i] = true;
            let mut g = vec![raw[i]];
            for j in (i + 1)..raw.len() {
                if !used[j] && (raw[j] - raw[i]).norm() <= 1e-5 * (1.0 + raw[i].norm()) {
                    used[j] = true;
                    g.push(raw[j]);
                }
            }
            groups.push(g);
        }

        let mut derivs = vec![rest.clone()];
        for _ in 0..deg {
            let d = derivs.last().unwrap().derivative();
            derivs.push(d);
        }
        for g in groups {
            let m = g.len();
            let mean = g.iter().sum::<C64>() / m as f64;
            // a root of multiplicity m is a simple root of the (m-1)-th derivative
            let target = &derivs[m - 1];
            let slope = &derivs[m];
            let mut r = mean;
            for _ in 0..3 {
                let d = slope.eval(r);
                if d.norm() == 0.0 {
                    break;
                }
                let step = target.eval(r) / d;
                if !step.re.is_finite() || !step.im.is_finite() {
                    break;
                }
                r -= step;
            }
            if m > 1 {
                for dp in derivs.iter().take(m) {
                    let scale = dp.magnitude_at(r).max(f64::MIN_POSITIVE);
                    if dp.eval(r).norm() > 1e-8 * scale {
                        let spread = g.iter().map(|z| (z - mean).norm()).fold(0.0, f64::max);
                        return Err(CoreError::ClusteredRoots(spread.max(1e-8)));
                    }
                }
            }
            out.push((r, m));
        }
        for i in 0..out.len() {
            for j in (i + 1)..out.len() {
                if (out[i].0 - out[j].0).norm() < 1e-8 {
                    return Err(CoreError::ClusteredRoots(1e-8));
                }
            }
        }
        Ok(out)
    }
}

/// Ratio of two polynomials in ξ; the denominator must not be the zero
/// polynomial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalFunction {
    numerator: Poly,
    denominator: Poly,
}

impl RationalFunction {
    pub fn new(numerator: Poly, denominator: Poly) -> Result<Self> {
        if denominator.is_zero() {
            return Err(CoreError::InvalidInput("denominator is the zero polynomial".into()));
        }
        Ok(RationalFunction { numerator, denominator })
    }

    pub fn polynomial(p: Poly) -> Self {
        RationalFunction { numerator: p, denominator: Poly::constant(C64::new(1.0, 0.0)) }
    }

    pub fn from_coeffs(numerator: Vec<C64>, denominator: Vec<C64>) -> Result<Self> {
        Self::new(Poly::new(numerator), Poly::new(denominator))
    }

    pub fn numerator(&self) -> &Poly {
        &self.numerator
    }

    pub fn denominator(&self) -> &Poly {
        &self.denominator
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    /// True when the denominator is numerically zero at `x`.
    pub fn has_pole_at(&self, x: C64) -> bool {
        let q = self.denominator.eval(x);
        q.norm() <= 1e-14 * self.denominator.magnitude_at(x)
    }

    pub fn eval(&self, x: C64) -> Result<C64> {
        if self.has_pole_at(x) {
            return Err(CoreError::PoleAtBase(x));
        }
        Ok(self.numerator.eval(x) / self.denominator.eval(x))
    }

    pub fn derivative(&self) -> RationalFunction {
        let (p, q) = (&self.numerator, &self.denominator);
        RationalFunction {
            numerator: p.derivative().mul(q).sub(&p.mul(&q.derivative())),
            denominator: q.mul(q),
        }
    }

    /// `F'/F` as a rational function, `(p'q - pq') / (pq)`.
    pub fn log_derivative(&self) -> Result<RationalFunction> {
        if self.is_zero() {
            return Err(CoreError::InvalidInput("log-derivative of the zero function".into()));
        }
        let (p, q) = (&self.numerator, &self.denominator);
        Ok(RationalFunction {
            numerator: p.derivative().mul(q).sub(&p.mul(&q.derivative())),
            denominator: p.mul(q),
        })
    }

    /// Largest of numerator and denominator degree.
    pub fn degree(&self) -> usize {
        self.numerator.degree().max(self.denominator.degree())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn arithmetic() {
        let p = Poly::from_real(&[1.0, -3.0, 2.0]);
        assert_eq!(p.degree(), 2);
        assert_eq!(p.eval(c(2.0, 0.0)), c(3.0, 0.0));
        assert_eq!(p.derivative(), Poly::from_real(&[-3.0, 4.0]));
        assert_eq!(Poly::from_roots(&[c(1.0, 0.0), c(0.5, 0.0)]).mul(&Poly::constant(c(2.0, 0.0))), p);
        assert!(p.sub(&p).is_zero());
        assert_eq!(Poly::from_real(&[1.0, 0.0, 0.0]).degree(), 0);
        assert_eq!(Poly::monomial(3, c(2.0, 0.0)).coeffs().len(), 4);
    }

    #[test]
    fn taylor_shift_matches_derivatives() {
        let p = Poly::new(vec![c(1.0, 2.0), c(-0.5, 0.0), c(0.0, 3.0), c(1.0, 0.0)]);
        let b = c(0.3, -0.7);
        let shifted = p.taylor_shift(b);
        let mut d = p.clone();
        let mut fact = 1.0;
        for (k, s) in shifted.iter().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            assert!((s - d.eval(b) / fact).norm() < 1e-13);
            d = d.derivative();
        }
    }

    #[test]
    fn multiple_roots() {
        let p = Poly::from_roots(&[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(-2.0, 0.0), c(0.0, 0.0)]);
        let mut r = p.roots().unwrap();
        r.sort_by(|a, b| a.0.re.total_cmp(&b.0.re));
        assert_eq!(r.len(), 3);
        assert!((r[0].0 + 2.0).norm() < 1e-12 && r[0].1 == 1);
        assert_eq!(r[1], (c(0.0, 0.0), 1));
        assert!((r[2].0 - 1.0).norm() < 1e-10 && r[2].1 == 3);
    }

    #[test]
    fn near_roots_are_rejected() {
        let p = Poly::from_roots(&[c(0.0, 0.0), c(1e-10, 0.0), c(1.0, 0.0)]);
        assert!(matches!(p.roots(), Err(CoreError::ClusteredRoots(_))));
        // below double-precision resolution a pair is indistinguishable from a double root
        let r = Poly::from_roots(&[c(1.0, 0.0), c(1.0 + 1e-9, 0.0)]).roots().unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].1, 2);
        assert!(Poly::from_real(&[0.0]).roots().is_err());
        assert!(Poly::from_real(&[4.0]).roots().unwrap().is_empty());
    }

    #[test]
    fn rational_functions() {
        let r = RationalFunction::new(Poly::from_real(&[1.0]), Poly::from_real(&[0.0, 1.0])).unwrap();
        assert!(r.has_pole_at(c(0.0, 0.0)));
        assert!(matches!(r.eval(c(0.0, 0.0)), Err(CoreError::PoleAtBase(_))));
        assert_eq!(r.eval(c(2.0, 0.0)).unwrap(), c(0.5, 0.0));
        let d = r.derivative();
        assert!((d.eval(c(2.0, 0.0)).unwrap() + 0.25).norm() < 1e-15);
        let l = RationalFunction::polynomial(Poly::from_real(&[0.0, -1.0, 1.0])).log_derivative().unwrap();
        let z = c(0.3, 0.9);
        assert!((l.eval(z).unwrap() - (1.0 / z + 1.0 / (z - 1.0))).norm() < 1e-14);
        assert!(RationalFunction::from_coeffs(vec![c(1.0, 0.0)], vec![c(0.0, 0.0)]).is_err());
        assert_eq!(r.degree(), 1);
    }

    proptest! {
        #[test]
        fn roots_reconstruct(roots in proptest::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 1..6)) {
            let rs: Vec<C64> = roots.iter().map(|&(a, b)| c(a, b)).collect();
            for i in 0..rs.len() {
                for j in (i + 1)..rs.len() {
                    prop_assume!((rs[i] - rs[j]).norm() > 1e-2);
                }
            }
            let p = Poly::from_roots(&rs);
            let found = p.roots().unwrap();
            prop_assert_eq!(found.len(), rs.len());
            for r in &rs {
                prop_assert!(found.iter().any(|(z, m)| *m == 1 && (z - r).norm() < 1e-9));
            }
        }
    }
}
