//! Truncated bivariate Taylor jets in `(ξ - ξ₀, ξ̄ - ξ̄₀)`.
//!
//! A jet of order `m` stores the coefficients `c(a, b)` of
//! `(ξ - ξ₀)^a (ξ̄ - ξ̄₀)^b` for every `a + b <= m`, so that
//! `∂^a ∂̄^b f (ξ₀) = a! b! c(a, b)`.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::poly::RationalFunction;

type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Which Wirtinger derivative to take.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Wirtinger {
    Xi,
    XiBar,
}

/// Binary operation selector for [`BiJet::combine`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JetOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiJet {
    base: C64,
    order: usize,
    coeffs: Vec<C64>,
}

#[inline]
fn index(a: usize, b: usize) -> usize {
    let d = a + b;
    d * (d + 1) / 2 + b
}

#[inline]
fn len_for(order: usize) -> usize {
    (order + 1) * (order + 2) / 2
}

impl BiJet {
    pub fn zero(base: C64, order: usize) -> Self {
        BiJet { base, order, coeffs: vec![ZERO; len_for(order)] }
    }

    pub fn constant(value: C64, base: C64, order: usize) -> Self {
        let mut j = Self::zero(base, order);
        j.coeffs[0] = value;
        j
    }

    /// The coordinate function `ξ`.
    pub fn xi(base: C64, order: usize) -> Self {
        let mut j = Self::constant(base, base, order);
        if order >= 1 {
            j.coeffs[index(1, 0)] = ONE;
        }
        j
    }

    /// The coordinate function `ξ̄`.
    pub fn xibar(base: C64, order: usize) -> Self {
        let mut j = Self::constant(base.conj(), base, order);
        if order >= 1 {
            j.coeffs[index(0, 1)] = ONE;
        }
        j
    }

    /// Build from a coefficient closure `(a, b) -> c(a, b)`.
    pub fn from_fn(base: C64, order: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut j = Self::zero(base, order);
        for d in 0..=order {
            for b in 0..=d {
                j.coeffs[index(d - b, b)] = f(d - b, b);
            }
        }
        j
    }

    pub fn base(&self) -> C64 {
        self.base
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Coefficient of `(ξ - ξ₀)^a (ξ̄ - ξ̄₀)^b`; zero beyond the order.
    pub fn coeff(&self, a: usize, b: usize) -> C64 {
        if a + b > self.order {
            ZERO
        } else {
            self.coeffs[index(a, b)]
        }
    }

    pub fn set_coeff(&mut self, a: usize, b: usize, c: C64) {
        assert!(a + b <= self.order, "coefficient ({a},{b}) beyond order {}", self.order);
        self.coeffs[index(a, b)] = c;
    }

    pub fn value(&self) -> C64 {
        self.coeffs[0]
    }

    /// `∂^a ∂̄^b f` at the base point.
    pub fn derivative_value(&self, a: usize, b: usize) -> C64 {
        self.coeff(a, b) * (factorial(a) * factorial(b))
    }

    /// Coefficients in `(a, b)` order of increasing total degree.
    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn is_holomorphic(&self, tol: f64) -> bool {
        (0..=self.order).all(|d| (1..=d).all(|b| self.coeff(d - b, b).norm() <= tol))
    }

    pub fn truncated(&self, order: usize) -> BiJet {
        let order = order.min(self.order);
        BiJet { base: self.base, order, coeffs: self.coeffs[..len_for(order)].to_vec() }
    }

    pub fn scale(&self, s: C64) -> BiJet {
        BiJet { base: self.base, order: self.order, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn check_shape(&self, other: &BiJet) -> Result<()> {
        if self.base != other.base {
            return Err(CoreError::ShapeMismatch(format!(
                "base points {} and {} differ",
                self.base, other.base
            )));
        }
        if self.order != other.order {
            return Err(CoreError::ShapeMismatch(format!(
                "orders {} and {} differ",
                self.order, other.order
            )));
        }
        Ok(())
    }

    /// Checked arithmetic; operands must share base point and order.
    pub fn combine(op: JetOp, a: &BiJet, b: &BiJet) -> Result<BiJet> {
        a.check_shape(b)?;
        match op {
            JetOp::Add => Ok(zip_same(a, b, |x, y| x + y)),
            JetOp::Sub => Ok(zip_same(a, b, |x, y| x - y)),
            JetOp::Mul => Ok(mul_same(a, b)),
            JetOp::Div => div_same(a, b),
        }
    }

    /// Quotient, truncated to the smaller order.
    pub fn div(&self, other: &BiJet) -> Result<BiJet> {
        let (a, b) = align(self, other);
        div_same(&a, &b)
    }

    pub fn recip(&self) -> Result<BiJet> {
        BiJet::constant(ONE, self.base, self.order).div(self)
    }

    /// `∂` or `∂̄`; the result has order `m - 1`.
    pub fn deriv(&self, which: Wirtinger) -> Result<BiJet> {
        if self.order == 0 {
            return Err(CoreError::OrderExhausted { needed: 1, have: 0 });
        }
        let order = self.order - 1;
        Ok(BiJet::from_fn(self.base, order, |a, b| match which {
            Wirtinger::Xi => self.coeff(a + 1, b) * (a + 1) as f64,
            Wirtinger::XiBar => self.coeff(a, b + 1) * (b + 1) as f64,
        }))
    }

    /// Complex conjugate function, expanded about the same base point.
    pub fn conj(&self) -> BiJet {
        BiJet::from_fn(self.base, self.order, |a, b| self.coeff(b, a).conj())
    }

    /// Apply `g(a₀ + u) = Σ g_k u^k` where `series[k] = g_k` and `u` is the
    /// nilpotent part.
    fn compose(&self, series: &[C64]) -> BiJet {
        let mut u = self.clone();
        u.coeffs[0] = ZERO;
        let mut out = BiJet::constant(series[0], self.base, self.order);
        let mut power = BiJet::constant(ONE, self.base, self.order);
        for g in series.iter().skip(1) {
            power = mul_same(&power, &u);
            for (o, p) in out.coeffs.iter_mut().zip(&power.coeffs) {
                *o += g * p;
            }
        }
        out
    }

    fn check_log_domain(&self) -> Result<C64> {
        let a0 = self.value();
        if a0 == ZERO {
            return Err(CoreError::ZeroBase);
        }
        if a0.im == 0.0 && a0.re < 0.0 {
            return Err(CoreError::BranchCut(a0));
        }
        Ok(a0)
    }

    /// Principal logarithm.
    pub fn log(&self) -> Result<BiJet> {
        let a0 = self.check_log_domain()?;
        // log(a0 + u) = log a0 + Σ (-1)^{k+1} (u/a0)^k / k
        let inv = a0.inv();
        let mut series = vec![a0.ln()];
        let mut p = ONE;
        for k in 1..=self.order {
            p *= inv;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            series.push(p * (sign / k as f64));
        }
        Ok(self.compose(&series))
    }

    pub fn exp(&self) -> BiJet {
        let e0 = self.value().exp();
        let mut series = vec![e0];
        let mut fact = 1.0;
        for k in 1..=self.order {
            fact *= k as f64;
            series.push(e0 / fact);
        }
        self.compose(&series)
    }

    /// `exp(σ log a)` on the principal branch.
    pub fn pow_complex(&self, sigma: C64) -> Result<BiJet> {
        Ok(self.log()?.scale(sigma).exp())
    }

    pub fn powi(&self, n: u32) -> BiJet {
        let mut out = BiJet::constant(ONE, self.base, self.order);
        for _ in 0..n {
            out = mul_same(&out, self);
        }
        out
    }

    /// Sum the truncated series at `ξ`.
    pub fn evaluate(&self, xi: C64) -> C64 {
        let dz = xi - self.base;
        let dzb = dz.conj();
        let mut s = ZERO;
        for d in 0..=self.order {
            for b in 0..=d {
                s += self.coeff(d - b, b) * dz.powu((d - b) as u32) * dzb.powu(b as u32);
            }
        }
        s
    }

    /// Taylor expansion of a rational function of `ξ` about `base`.
    pub fn from_rational(r: &RationalFunction, base: C64, order: usize) -> Result<BiJet> {
        if r.has_pole_at(base) {
            return Err(CoreError::PoleAtBase(base));
        }
        let mut num = r.numerator().taylor_shift(base);
        let den = r.denominator().taylor_shift(base);
        num.resize(num.len().max(order + 1), ZERO);
        // univariate series division
        let mut q = vec![ZERO; order + 1];
        for n in 0..=order {
            let mut acc = num[n];
            for k in 1..=n.min(den.len() - 1) {
                acc -= den[k] * q[n - k];
            }
            q[n] = acc / den[0];
        }
        Ok(BiJet::from_fn(base, order, |a, b| if b == 0 { q[a] } else { ZERO }))
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

fn align(a: &BiJet, b: &BiJet) -> (BiJet, BiJet) {
    assert!(
        a.base == b.base,
        "jets at different base points {} and {} cannot be combined",
        a.base,
        b.base
    );
    let m = a.order.min(b.order);
    (a.truncated(m), b.truncated(m))
}

fn zip_same(a: &BiJet, b: &BiJet, f: impl Fn(C64, C64) -> C64) -> BiJet {
    BiJet {
        base: a.base,
        order: a.order,
        coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| f(*x, *y)).collect(),
    }
}

fn mul_same(x: &BiJet, y: &BiJet) -> BiJet {
    let m = x.order;
    let mut out = BiJet::zero(x.base, m);
    for d1 in 0..=m {
        for b1 in 0..=d1 {
            let c1 = x.coeffs[index(d1 - b1, b1)];
            if c1 == ZERO {
                continue;
            }
            let a1 = d1 - b1;
            for d2 in 0..=(m - d1) {
                for b2 in 0..=d2 {
                    let c2 = y.coeffs[index(d2 - b2, b2)];
                    out.coeffs[index(a1 + d2 - b2, b1 + b2)] += c1 * c2;
                }
            }
        }
    }
    out
}

fn div_same(x: &BiJet, y: &BiJet) -> Result<BiJet> {
    let y0 = y.coeffs[0];
    if y0 == ZERO {
        return Err(CoreError::DivisionBySingularJet);
    }
    let m = x.order;
    let inv = y0.inv();
    let mut q = BiJet::zero(x.base, m);
    // q(a,b) = (x(a,b) - Σ_{(p,r) != 0} y(p,r) q(a-p, b-r)) / y0, by increasing degree
    for d in 0..=m {
        for b in 0..=d {
            let a = d - b;
            let mut acc = x.coeffs[index(a, b)];
            for p in 0..=a {
                for r in 0..=b {
                    if p == 0 && r == 0 {
                        continue;
                    }
                    acc -= y.coeffs[index(p, r)] * q.coeffs[index(a - p, b - r)];
                }
            }
            q.coeffs[index(a, b)] = acc * inv;
        }
    }
    Ok(q)
}

impl<'a> Add<&'a BiJet> for &'a BiJet {
    type Output = BiJet;
    fn add(self, rhs: &BiJet) -> BiJet {
        let (a, b) = align(self, rhs);
        zip_same(&a, &b, |x, y| x + y)
    }
}

impl<'a> Sub<&'a BiJet> for &'a BiJet {
    type Output = BiJet;
    fn sub(self, rhs: &BiJet) -> BiJet {
        let (a, b) = align(self, rhs);
        zip_same(&a, &b, |x, y| x - y)
    }
}

impl<'a> Mul<&'a BiJet> for &'a BiJet {
    type Output = BiJet;
    fn mul(self, rhs: &BiJet) -> BiJet {
        if self.order == rhs.order {
            assert!(self.base == rhs.base, "jets at different base points");
            return mul_same(self, rhs);
        }
        let (a, b) = align(self, rhs);
        mul_same(&a, &b)
    }
}

impl Neg for &BiJet {
    type Output = BiJet;
    fn neg(self) -> BiJet {
        self.scale(-ONE)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<BiJet> for BiJet {
            type Output = BiJet;
            fn $m(self, rhs: BiJet) -> BiJet {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a BiJet> for BiJet {
            type Output = BiJet;
            fn $m(self, rhs: &BiJet) -> BiJet {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<BiJet> for &'a BiJet {
            type Output = BiJet;
            fn $m(self, rhs: BiJet) -> BiJet {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for BiJet {
    type Output = BiJet;
    fn neg(self) -> BiJet {
        -&self
    }
}

impl Mul<C64> for &BiJet {
    type Output = BiJet;
    fn mul(self, s: C64) -> BiJet {
        self.scale(s)
    }
}

impl Mul<C64> for BiJet {
    type Output = BiJet;
    fn mul(self, s: C64) -> BiJet {
        self.scale(s)
    }
}
