//! Weierstrass immersion of CP^{N-1} solutions into su(N) ≅ ℝ^{N²-1}.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::jet::Wirtinger;
use crate::jetmat::JetMatrix;
use crate::model::{projector_rank1, HolomorphicVectorSpec, Solution};
use crate::quadrature::GaussLegendre;

type C64 = Complex64;

const I: C64 = C64::new(0.0, 1.0);

/// Traceless anti-Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SuNElement {
    matrix: DMatrix<C64>,
}

impl SuNElement {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        let defect = su_defect(&matrix);
        if defect > 1e-11 * (1.0 + matrix.norm()) {
            return Err(CoreError::NotAntiHermitian(defect));
        }
        Ok(SuNElement { matrix })
    }

    pub fn zero(n: usize) -> Self {
        SuNElement { matrix: DMatrix::zeros(n, n) }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// `‖X + X†‖ + |tr X|`.
pub fn su_defect(x: &DMatrix<C64>) -> f64 {
    (x + x.adjoint()).norm() + x.trace().norm()
}

/// Hermitian traceless generators `T_a` with `tr(T_a T_b) = 2δ_ab`.
///
/// Order: for each pair `i < j` (lexicographic) the symmetric generator
/// `E_ij + E_ji` followed by the antisymmetric one `-i E_ij + i E_ji`; then
/// the diagonal generators `sqrt(2/(l(l+1))) diag(1, …, 1, -l, 0, …)` for
/// `l = 1 … N-1`. For N = 3 this is a reordering of the Gell-Mann matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct SuNBasis {
    n: usize,
    generators: Vec<DMatrix<C64>>,
}

impl SuNBasis {
    pub fn gell_mann(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(CoreError::InvalidDimension(n));
        }
        let mut generators = Vec::with_capacity(n * n - 1);
        for i in 0..n {
            for j in (i + 1)..n {
                let mut s = DMatrix::zeros(n, n);
                s[(i, j)] = C64::new(1.0, 0.0);
                s[(j, i)] = C64::new(1.0, 0.0);
                generators.push(s);
                let mut a = DMatrix::zeros(n, n);
                a[(i, j)] = -I;
                a[(j, i)] = I;
                generators.push(a);
            }
        }
        for l in 1..n {
            let scale = (2.0 / (l * (l + 1)) as f64).sqrt();
            let mut d = DMatrix::zeros(n, n);
            for m in 0..l {
                d[(m, m)] = C64::new(scale, 0.0);
            }
            d[(l, l)] = C64::new(-(l as f64) * scale, 0.0);
            generators.push(d);
        }
        Ok(SuNBasis { n, generators })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[DMatrix<C64>] {
        &self.generators
    }

    /// Human-readable names, `S(i,j)`, `A(i,j)`, `D(l)` with 1-based indices.
    pub fn labels(&self) -> Vec<String> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                out.push(format!("S({},{})", i + 1, j + 1));
                out.push(format!("A({},{})", i + 1, j + 1));
            }
        }
        for l in 1..self.n {
            out.push(format!("D({l})"));
        }
        out
    }

    /// `⟨x, iT_a⟩ = -½ tr(x · iT_a)`.
    pub fn coordinates(&self, x: &SuNElement) -> Result<Vec<f64>> {
        if x.dim() != self.n {
            return Err(CoreError::ShapeMismatch(format!("element is {0}x{0}, basis is su({1})", x.dim(), self.n)));
        }
        let defect = su_defect(&x.matrix);
        if defect > 1e-11 * (1.0 + x.matrix.norm()) {
            return Err(CoreError::NotAntiHermitian(defect));
        }
        Ok(self
            .generators
            .iter()
            .map(|t| {
                let mut s = C64::new(0.0, 0.0);
                for i in 0..self.n {
                    for k in 0..self.n {
                        s += x.matrix[(i, k)] * t[(k, i)];
                    }
                }
                (-0.5 * I * s).re
            })
            .collect())
    }

    /// `Σ c_a iT_a`.
    pub fn reconstruct(&self, coords: &[f64]) -> Result<SuNElement> {
        if coords.len() != self.generators.len() {
            return Err(CoreError::ShapeMismatch(format!(
                "{} coordinates for su({})",
                coords.len(),
                self.n
            )));
        }
        let mut m = DMatrix::zeros(self.n, self.n);
        for (c, t) in coords.iter().zip(&self.generators) {
            m += t * (I * *c);
        }
        Ok(SuNElement { matrix: m })
    }
}

/// `sun_coordinates` in the fixed generator order of [`SuNBasis::gell_mann`].
pub fn sun_coordinates(x: &SuNElement, basis: &SuNBasis) -> Result<Vec<f64>> {
    basis.coordinates(x)
}

/// Values of the immersion matrices at the base point of a projector jet.
#[derive(Clone, Debug, PartialEq)]
pub struct KmlMatrices {
    /// `K = [∂̄P, P]`.
    pub k: DMatrix<C64>,
    /// `K† = -[∂P, P]`.
    pub k_dagger: DMatrix<C64>,
    /// `M = (I - P)∂̄P`.
    pub m: DMatrix<C64>,
    /// `L = -∂̄P(I - P)`.
    pub l: DMatrix<C64>,
    /// `∂̄P`, for the identity `M - L = ∂̄P`.
    pub dbar_p: DMatrix<C64>,
}

pub fn k_matrices(p: &JetMatrix) -> Result<KmlMatrices> {
    let pv = p.value();
    let dp = p.deriv(Wirtinger::Xi)?.value();
    let dbp = p.deriv(Wirtinger::XiBar)?.value();
    let q = DMatrix::identity(pv.nrows(), pv.ncols()) - &pv;
    Ok(KmlMatrices {
        k: &dbp * &pv - &pv * &dbp,
        k_dagger: -(&dp * &pv - &pv * &dp),
        m: &q * &dbp,
        l: -(&dbp * &q),
        dbar_p: dbp,
    })
}

/// Norms of `∂M - ∂̄M†` and `∂L - ∂̄L†` for a projector jet of order >= 2.
pub fn conservation_residuals(p: &JetMatrix) -> Result<(f64, f64)> {
    if p.order() < 2 {
        return Err(CoreError::OrderExhausted { needed: 2, have: p.order() });
    }
    let dbp = p.deriv(Wirtinger::XiBar)?;
    let q = JetMatrix::identity(p.dim(), p.base(), p.order()).sub(p);
    let m = q.mul(&dbp);
    let l = dbp.mul(&q).scale(C64::new(-1.0, 0.0));
    let res = |a: &JetMatrix| -> Result<f64> {
        let lhs = a.deriv(Wirtinger::Xi)?.value();
        let rhs = a.dagger().deriv(Wirtinger::XiBar)?.value();
        Ok((lhs - rhs).norm())
    };
    Ok((res(&m)?, res(&l)?))
}

/// [`conservation_residuals`] for the full projector of a tower member.
pub fn conservation_check_ml(solution: &Solution, base: C64) -> Result<(f64, f64)> {
    conservation_residuals(&solution.projector(base, 2)?)
}

/// `X = ε i ((1-N)/N I + P)` from the projector value.
pub fn immersion_closed_form(p: &DMatrix<C64>, epsilon: f64) -> Result<SuNElement> {
    if epsilon != 1.0 && epsilon != -1.0 {
        return Err(CoreError::InvalidInput(format!("epsilon must be +1 or -1, got {epsilon}")));
    }
    let n = p.nrows();
    let shift = DMatrix::<C64>::identity(n, n) * C64::new((1.0 - n as f64) / n as f64, 0.0);
    SuNElement::new((shift + p) * (I * epsilon))
}

/// The closed-form immersion of a holomorphic or antiholomorphic seed, with
/// ε taken from the chirality.
pub fn closed_form_at(solution: &Solution, xi: C64) -> Result<SuNElement> {
    if solution.k != 0 {
        return Err(CoreError::InvalidInput("closed form applies to tower depth 0 only".into()));
    }
    immersion_closed_form(&solution.projector(xi, 0)?.value(), solution.chirality.epsilon())
}

/// Coefficients `(A, B)` of `dX = A dξ + B dξ̄`, i.e. `A = -i[∂P, P]`,
/// `B = i[∂̄P, P]`.
pub fn immersion_integrand(solution: &Solution, xi: C64) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    let p = solution.projector(xi, 1)?;
    let km = k_matrices(&p)?;
    Ok((km.k_dagger * I, km.k * I))
}

fn singular_points(spec: &HolomorphicVectorSpec) -> Result<Vec<C64>> {
    let mut out = Vec::new();
    for r in spec.components() {
        if r.denominator().degree() > 0 {
            out.extend(r.denominator().roots()?.into_iter().map(|(z, _)| z));
        }
    }
    Ok(out)
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

const CLEARANCE: f64 = 1e-6;

fn check_clearance(points: &[C64], a: C64, b: C64) -> Result<()> {
    for &p in points {
        let d = segment_distance(p, a, b);
        if d < CLEARANCE {
            return Err(CoreError::PathThroughSingularity { point: p, clearance: d });
        }
    }
    Ok(())
}

fn as_path_error(e: CoreError) -> CoreError {
    match e {
        CoreError::NullVector(p) | CoreError::PoleAtBase(p) => {
            CoreError::PathThroughSingularity { point: p, clearance: 0.0 }
        }
        other => other,
    }
}

/// Composite Gauss–Legendre sum of a matrix-valued 1-form along a segment.
fn segment_integral<F>(n: usize, a: C64, b: C64, segments: usize, nodes: usize, integrand: &F) -> Result<DMatrix<C64>>
where
    F: Fn(C64) -> Result<(DMatrix<C64>, DMatrix<C64>)>,
{
    let gl = GaussLegendre::new(nodes);
    let d = b - a;
    let mut total = DMatrix::zeros(n, n);
    for s in 0..segments {
        let (t0, t1) = (s as f64 / segments as f64, (s + 1) as f64 / segments as f64);
        let mut part = DMatrix::zeros(n, n);
        for (t, w) in gl.on_interval(t0, t1) {
            let (ca, cb) = integrand(a + d * t)?;
            part += (ca * d + cb * d.conj()) * C64::new(w, 0.0);
        }
        total += part;
    }
    Ok(total)
}

fn validate_rule(segments: usize, nodes: usize) -> Result<()> {
    if segments < 1 {
        return Err(CoreError::InvalidInput("segments must be >= 1".into()));
    }
    if nodes < 4 {
        return Err(CoreError::InvalidInput(format!("nodes per segment {nodes} < 4")));
    }
    Ok(())
}

/// Default rule: 32 segments of 8 Gauss–Legendre nodes.
pub const DEFAULT_SEGMENTS: usize = 32;
pub const DEFAULT_NODES: usize = 8;

/// `X(end) - X(start)` along the straight path, by the Weierstrass integral.
/// The result is certified by a second pass with twice as many segments.
pub fn immersion_line_integral(
    solution: &Solution,
    start: C64,
    end: C64,
    segments: usize,
    nodes: usize,
) -> Result<SuNElement> {
    immersion_polyline(solution, &[start, end], segments, nodes)
}

/// The Weierstrass integral along a polyline through `points`.
pub fn immersion_polyline(solution: &Solution, points: &[C64], segments: usize, nodes: usize) -> Result<SuNElement> {
    validate_rule(segments, nodes)?;
    let n = solution.dim();
    let sing = singular_points(&solution.spec)?;
    let integrand = |z: C64| immersion_integrand(solution, z).map_err(as_path_error);
    let mut coarse = DMatrix::zeros(n, n);
    let mut fine = DMatrix::zeros(n, n);
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a == b {
            continue;
        }
        check_clearance(&sing, a, b)?;
        coarse += segment_integral(n, a, b, segments, nodes, &integrand)?;
        fine += segment_integral(n, a, b, 2 * segments, nodes, &integrand)?;
    }
    let diff = (&fine - &coarse).norm();
    if diff > 1e-6 {
        return Err(CoreError::NonConvergent(diff));
    }
    SuNElement::new(fine)
}

/// `X = i(𝒫_k - I/N)`, the surface built directly from the rank-one
/// projector of the tower member.
pub fn rank1_immersion(solution: &Solution, xi: C64) -> Result<SuNElement> {
    let v = solution.vector(xi, 0)?;
    let p = projector_rank1(&v)?.value();
    let n = p.nrows();
    let shift = DMatrix::<C64>::identity(n, n) * C64::new(1.0 / n as f64, 0.0);
    SuNElement::new((p - shift) * I)
}

/// Weierstrass data of the rank-one projector `𝒫_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rank1Data {
    /// `[∂𝒫_k, 𝒫_k]`.
    pub comm: DMatrix<C64>,
    /// `[∂̄𝒫_k, 𝒫_k]`.
    pub comm_bar: DMatrix<C64>,
    /// Norm of `[∂𝒫_k, 𝒫_k] - ∂𝒫_k - 2 V_k V_{k-1}† / |V_{k-1}|²`
    /// (the last term absent for k = 0).
    pub identity_defect: f64,
    /// The same for `[∂̄𝒫_k, 𝒫_k] + ∂̄𝒫_k + 2 V_{k-1} V_k† / |V_{k-1}|²`.
    pub identity_defect_bar: f64,
}

pub fn rank1_weierstrass_data(solution: &Solution, base: C64) -> Result<Rank1Data> {
    let members = solution.tower_members(base, 1)?;
    let vk = members.last().unwrap();
    let p = projector_rank1(vk)?;
    let pv = p.value();
    let dp = p.deriv(Wirtinger::Xi)?.value();
    let dbp = p.deriv(Wirtinger::XiBar)?.value();
    let comm = &dp * &pv - &pv * &dp;
    let comm_bar = &dbp * &pv - &pv * &dbp;
    let (extra, extra_bar) = if solution.k == 0 {
        let z = DMatrix::zeros(pv.nrows(), pv.ncols());
        (z.clone(), z)
    } else {
        let prev = members[members.len() - 2].value();
        let cur = vk.value();
        let n = prev.norm_squared();
        (&cur * prev.adjoint() * C64::new(2.0 / n, 0.0), &prev * cur.adjoint() * C64::new(2.0 / n, 0.0))
    };
    let identity_defect = (&comm - &dp - &extra).norm();
    let identity_defect_bar = (&comm_bar + &dbp + &extra_bar).norm();
    Ok(Rank1Data { comm, comm_bar, identity_defect, identity_defect_bar })
}

// ---------------------------------------------------------------------------
// CP² in standard coordinates X₁ … X₈

/// Closed-form radius vector of a holomorphic CP² solution in inhomogeneous
/// coordinates, integration constants zero.
pub fn cp2_radius_holomorphic(w1: C64, w2: C64) -> [f64; 8] {
    let a2 = 1.0 + w1.norm_sqr() + w2.norm_sqr();
    let h = 1.0 / (2.0 * a2);
    let s3 = 3f64.sqrt();
    [
        ((w1 * w2.conj() + w1.conj() * w2) * h).re,
        (I * (w1 * w2.conj() - w1.conj() * w2) * h).re,
        (w1.norm_sqr() - w2.norm_sqr()) * h,
        -s3 * (w1.norm_sqr() + w2.norm_sqr()) * h,
        (-I * (w1 - w1.conj()) * h).re,
        (-I * (w2 - w2.conj()) * h).re,
        -(w1 + w1.conj()).re * h,
        -(w2 + w2.conj()).re * h,
    ]
}

/// Coefficients `α_j` of the eight real 1-forms `dX_j = 2 Re(α_j dξ)` of a
/// CP² solution. `dw` holds `∂w_i`, `dwc` holds `∂(w̄_i)`.
pub fn cp2_one_forms(w: [C64; 2], dw: [C64; 2], dwc: [C64; 2]) -> [C64; 8] {
    let [w1, w2] = w;
    let [d1, d2] = dw;
    let [dc1, dc2] = dwc;
    let (c1, c2) = (w1.conj(), w2.conj());
    let (r1, r2) = (w1.norm_sqr(), w2.norm_sqr());
    let a2 = 1.0 + r1 + r2;
    let h = 1.0 / (2.0 * a2 * a2);
    let one = C64::new(1.0, 0.0);
    let s3 = 3f64.sqrt();
    let b1 = (w2 * w2 - w1 * w1) * (c1 * dc2 - c2 * dc1) - (c2 * c2 - c1 * c1) * (w1 * d2 - w2 * d1) - w2 * dc1
        + c2 * d1
        - w1 * dc2
        + c1 * d2;
    let b2 = (w1 * w1 + w2 * w2) * (c2 * dc1 - c1 * dc2) + (c1 * c1 + c2 * c2) * (w2 * d1 - w1 * d2) + w2 * dc1
        + c2 * d1
        - w1 * dc2
        - c1 * d2;
    let b3 = w2 * dc2 - w1 * dc1 - c2 * d2 + c1 * d1 + (w2 * dc2 - c2 * d2) * (2.0 * r1) - (w1 * dc1 - c1 * d1) * (2.0 * r2);
    let b4 = (w1 * dc1 + w2 * dc2 - c1 * d1 - c2 * d2) * s3;
    let b5 = (one + c1 * c1 + r2) * d1 + (one + w1 * w1 + r2) * dc1 + (w2 * dc2 - c2 * d2) * (w1 - c1);
    let b6 = (one + c2 * c2 + r1) * d2 + (one + w2 * w2 + r1) * dc2 + (w1 * dc1 - c1 * d1) * (w2 - c2);
    let b7 = (one - w1 * w1 + r2) * dc1 - (one - c1 * c1 + r2) * d1 + (c2 * d2 - w2 * dc2) * (w1 + c1);
    let b8 = (one - w2 * w2 + r1) * dc2 - (one - c2 * c2 + r1) * d2 + (c1 * d1 - w1 * dc1) * (w2 + c2);
    [b1 * h, I * b2 * h, b3 * h, b4 * h, -I * b5 * h, -I * b6 * h, b7 * h, b8 * h]
}

/// Inhomogeneous coordinates `w_i = V_i/V_0` of a CP² tower member with
/// `∂w_i` and `∂(w̄_i)` at `xi`.
pub fn cp2_inhomogeneous(solution: &Solution, xi: C64) -> Result<([C64; 2], [C64; 2], [C64; 2])> {
    if solution.dim() != 3 {
        return Err(CoreError::InvalidDimension(solution.dim()));
    }
    let v = solution.vector(xi, 1)?;
    let v0 = v.get(0);
    if v0.value().norm() <= 1e-14 * v.value().norm() {
        return Err(CoreError::PoleAtBase(xi));
    }
    let mut w = [C64::new(0.0, 0.0); 2];
    let mut dw = w;
    let mut dwc = w;
    for i in 0..2 {
        let wi = v.get(i + 1).div(v0)?;
        w[i] = wi.value();
        dw[i] = wi.deriv(Wirtinger::Xi)?.value();
        dwc[i] = wi.conj().deriv(Wirtinger::Xi)?.value();
    }
    Ok((w, dw, dwc))
}

/// Value of the mixed Veronese radius vector at the anchor `ξ = 1`.
pub const MIXED_ANCHOR: [f64; 8] = [
    std::f64::consts::FRAC_1_SQRT_2,
    0.0,
    0.5,
    0.866_025_403_784_438_6,
    0.0,
    0.0,
    -std::f64::consts::FRAC_1_SQRT_2,
    0.0,
];

/// Path from the anchor `ξ = 1` to `xi` that keeps clear of the origin: two
/// legs through a waypoint at half the argument of `xi`.
pub fn anchor_path(xi: C64) -> Vec<C64> {
    let rho = xi.norm().max(1.0);
    let mid = C64::from_polar(rho, xi.arg() / 2.0);
    vec![C64::new(1.0, 0.0), mid, xi]
}

fn one_form_segment<F>(a: C64, b: C64, segments: usize, nodes: usize, alpha: &F) -> Result<[f64; 8]>
where
    F: Fn(C64) -> Result<[C64; 8]>,
{
    let gl = GaussLegendre::new(nodes);
    let d = b - a;
    let mut total = [0.0; 8];
    for s in 0..segments {
        let (t0, t1) = (s as f64 / segments as f64, (s + 1) as f64 / segments as f64);
        let mut part = [0.0; 8];
        for (t, w) in gl.on_interval(t0, t1) {
            let al = alpha(a + d * t)?;
            for j in 0..8 {
                part[j] += 2.0 * (al[j] * d).re * w;
            }
        }
        for j in 0..8 {
            total[j] += part[j];
        }
    }
    Ok(total)
}

/// Radius vector of the first mixed solution `P₊f` of a CP² input, by
/// integrating the eight 1-forms from the anchor `ξ = 1`, where the value is
/// fixed to [`MIXED_ANCHOR`].
pub fn cp2_radius_mixed(f: &HolomorphicVectorSpec, xi: C64, segments: usize, nodes: usize) -> Result<[f64; 8]> {
    validate_rule(segments, nodes)?;
    let solution = Solution::holomorphic(f.clone(), 1)?;
    if solution.dim() != 3 {
        return Err(CoreError::InvalidDimension(solution.dim()));
    }
    if xi.norm() < CLEARANCE {
        return Err(CoreError::PathThroughSingularity { point: C64::new(0.0, 0.0), clearance: xi.norm() });
    }
    let alpha = |z: C64| -> Result<[C64; 8]> {
        let (w, dw, dwc) = cp2_inhomogeneous(&solution, z).map_err(as_path_error)?;
        Ok(cp2_one_forms(w, dw, dwc))
    };
    let path = anchor_path(xi);
    let mut coarse = MIXED_ANCHOR;
    let mut fine = MIXED_ANCHOR;
    for leg in path.windows(2) {
        if leg[0] == leg[1] {
            continue;
        }
        let c = one_form_segment(leg[0], leg[1], segments, nodes, &alpha)?;
        let f2 = one_form_segment(leg[0], leg[1], 2 * segments, nodes, &alpha)?;
        for j in 0..8 {
            coarse[j] += c[j];
            fine[j] += f2[j];
        }
    }
    let diff = coarse.iter().zip(&fine).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    if diff > 1e-6 {
        return Err(CoreError::NonConvergent(diff));
    }
    Ok(fine)
}

/// Affine map `standard = gm · O + b` from Gell-Mann-ordered su(3) coordinates
/// to the X₁ … X₈ coordinates used for CP², with `O` orthogonal.
#[derive(Clone, Debug)]
pub struct Cp2Frame {
    pub rotation: DMatrix<f64>,
    pub offset: DVector<f64>,
    /// Largest residual of the fit over the calibration samples.
    pub residual: f64,
}

impl Cp2Frame {
    /// Fit the frame by orthogonal Procrustes on closed-form immersion points
    /// of random `(w₁, w₂)`.
    pub fn calibrate(samples: usize, seed: u64) -> Result<Cp2Frame> {
        let basis = SuNBasis::gell_mann(3)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = DMatrix::<f64>::zeros(samples, 8);
        let mut b = DMatrix::<f64>::zeros(samples, 8);
        for s in 0..samples {
            let w1 = C64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let w2 = C64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let f = DVector::from_vec(vec![C64::new(1.0, 0.0), w1, w2]);
            let p = DMatrix::identity(3, 3) - &f * f.adjoint() * C64::new(1.0 / f.norm_squared(), 0.0);
            let x = immersion_closed_form(&p, 1.0)?;
            let gm = basis.coordinates(&x)?;
            let standard = cp2_radius_holomorphic(w1, w2);
            for j in 0..8 {
                a[(s, j)] = gm[j];
                b[(s, j)] = standard[j];
            }
        }
        let mean = |m: &DMatrix<f64>| DVector::from_fn(8, |j, _| m.column(j).mean());
        let (ma, mb) = (mean(&a), mean(&b));
        let mut a0 = a.clone();
        let mut b0 = b.clone();
        for s in 0..samples {
            for j in 0..8 {
                a0[(s, j)] -= ma[j];
                b0[(s, j)] -= mb[j];
            }
        }
        let svd = (a0.transpose() * &b0).svd(true, true);
        let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
        let rotation = u * vt;
        let offset = &mb - rotation.transpose() * &ma;
        let fitted = &a * &rotation;
        let mut residual: f64 = 0.0;
        for s in 0..samples {
            for j in 0..8 {
                residual = residual.max((fitted[(s, j)] + offset[j] - b[(s, j)]).abs());
            }
        }
        Ok(Cp2Frame { rotation, offset, residual })
    }

    /// The frame used throughout, calibrated once on 20 seeded samples.
    pub fn global() -> &'static Cp2Frame {
        static FRAME: OnceLock<Cp2Frame> = OnceLock::new();
        FRAME.get_or_init(|| Cp2Frame::calibrate(20, 0x5eed).expect("calibration of the su(3) frame"))
    }

    /// Standard coordinates of a point.
    pub fn to_standard(&self, gm: &[f64]) -> [f64; 8] {
        let g = DVector::from_column_slice(gm);
        let p = self.rotation.transpose() * g + &self.offset;
        std::array::from_fn(|j| p[j])
    }

    /// Standard components of a tangent vector (no offset).
    pub fn to_standard_linear(&self, gm: &[f64]) -> [f64; 8] {
        let g = DVector::from_column_slice(gm);
        let p = self.rotation.transpose() * g;
        std::array::from_fn(|j| p[j])
    }
}

/// Coordinates of an su(3) point in the X₁ … X₈ frame.
pub fn cp2_standard_coordinates(x: &SuNElement) -> Result<[f64; 8]> {
    if x.dim() != 3 {
        return Err(CoreError::InvalidDimension(x.dim()));
    }
    let gm = SuNBasis::gell_mann(3)?.coordinates(x)?;
    Ok(Cp2Frame::global().to_standard(&gm))
}

// ---------------------------------------------------------------------------
// Comparing surfaces up to Euclidean motions

/// Eigenvalues, largest first, of the covariance of a point sample. Two
/// samples related by a rotation and translation share this spectrum.
pub fn centered_gram_spectrum(points: &[Vec<f64>]) -> Vec<f64> {
    let m = points.len();
    let d = points.first().map_or(0, Vec::len);
    let mut a = DMatrix::<f64>::zeros(m, d);
    for (i, p) in points.iter().enumerate() {
        for j in 0..d {
            a[(i, j)] = p[j];
        }
    }
    for j in 0..d {
        let mean = a.column(j).mean();
        for i in 0..m {
            a[(i, j)] -= mean;
        }
    }
    let mut ev: Vec<f64> = (a.transpose() * &a / m as f64).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| y.partial_cmp(x).unwrap());
    ev
}

/// Number of independent directions spanned by a point sample.
pub fn coordinate_rank(points: &[Vec<f64>], rel_tol: f64) -> usize {
    let ev = centered_gram_spectrum(points);
    let top = ev.first().copied().unwrap_or(0.0);
    ev.iter().filter(|&&e| e > rel_tol * rel_tol * top).count()
}

/// Comparison of the two surfaces attached to a mixed solution: the
/// Weierstrass integral of the full projector and `i(𝒫_k - I/N)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub full_rank: usize,
    pub rank1_rank: usize,
    pub full_spectrum: Vec<f64>,
    pub rank1_spectrum: Vec<f64>,
    /// `Σ|λ_i - μ_i| / Σλ_i`.
    pub spectral_gap: f64,
    pub related_by_motion: bool,
}

pub fn discrepancy_report(solution: &Solution, samples: &[C64], segments: usize, nodes: usize) -> Result<DiscrepancyReport> {
    let basis = SuNBasis::gell_mann(solution.dim())?;
    let anchor = C64::new(1.0, 0.0);
    let mut full = Vec::with_capacity(samples.len());
    let mut rank1 = Vec::with_capacity(samples.len());
    for &z in samples {
        full.push(basis.coordinates(&immersion_line_integral(solution, anchor, z, segments, nodes)?)?);
        rank1.push(basis.coordinates(&rank1_immersion(solution, z)?)?);
    }
    let fs = centered_gram_spectrum(&full);
    let rs = centered_gram_spectrum(&rank1);
    let total: f64 = fs.iter().sum::<f64>().max(rs.iter().sum());
    let gap = fs.iter().zip(&rs).map(|(a, b)| (a - b).abs()).sum::<f64>() / total;
    Ok(DiscrepancyReport {
        full_rank: coordinate_rank(&full, 1e-6),
        rank1_rank: coordinate_rank(&rank1, 1e-6),
        full_spectrum: fs,
        rank1_spectrum: rs,
        spectral_gap: gap,
        related_by_motion: gap < 1e-6,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::BiJet;
    use crate::jetmat::JetVector;
    use crate::model::{projector_full, Chirality};
    use proptest::prelude::*;
    use rand::Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn points(seed: u64, n: usize) -> Vec<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))).collect()
    }

    fn grid(n: usize, lo: f64, hi: f64) -> Vec<C64> {
        let h = (hi - lo) / (n - 1) as f64;
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                out.push(c(lo + i as f64 * h, lo + j as f64 * h));
            }
        }
        out
    }

    /// The mixed Veronese surface, written out by hand.
    fn radiusvecmix(z: C64) -> [f64; 8] {
        let (x, y) = (z.re, z.im);
        let d = 1.0 + x * x + y * y;
        let s2 = 2f64.sqrt();
        let x1 = s2 * x / d;
        let x2 = s2 * y / d;
        let x3 = 1.0 / d;
        [x1, x2, x3, 3f64.sqrt() * x3, x2, 0.0, -x1, 0.0]
    }

    fn veronese_standard(z: C64) -> [f64; 8] {
        let (x, y) = (z.re, z.im);
        let r = x * x + y * y;
        let d = (1.0 + r).powi(2);
        let s2 = 2f64.sqrt();
        let s3 = 3f64.sqrt();
        [
            s2 * x * r / d,
            s2 * y * r / d,
            -r * (r - 2.0) / (2.0 * d),
            -s3 * r * (r + 2.0) / (2.0 * d),
            s2 * y / d,
            2.0 * x * y / d,
            -s2 * x / d,
            (y * y - x * x) / d,
        ]
    }

    fn non_harmonic_projector(base: C64) -> JetMatrix {
        let one = BiJet::constant(c(1.0, 0.0), base, 2);
        let mid = &BiJet::xi(base, 2) + &BiJet::xibar(base, 2).scale(c(2.0, 0.0));
        projector_full(&JetVector::new(vec![one, mid, BiJet::zero(base, 2)]).unwrap()).unwrap()
    }

    #[test]
    fn basis_is_orthonormal() {
        for n in 2..=5 {
            let b = SuNBasis::gell_mann(n).unwrap();
            assert_eq!(b.generators().len(), n * n - 1);
            for (i, ti) in b.generators().iter().enumerate() {
                assert!(ti.trace().norm() < 1e-15);
                assert!((ti - ti.adjoint()).norm() < 1e-15);
                for (j, tj) in b.generators().iter().enumerate() {
                    let ip = (-0.5 * ((ti * I) * (tj * I)).trace()).re;
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((ip - want).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn coordinates_of_generators() {
        let b = SuNBasis::gell_mann(3).unwrap();
        let x = SuNElement::new(&b.generators()[0] * I).unwrap();
        let cds = b.coordinates(&x).unwrap();
        assert!((cds[0] - 1.0).abs() < 1e-15);
        assert!(cds[1..].iter().all(|v| v.abs() < 1e-15));
        assert!(b.coordinates(&SuNElement::zero(3)).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn non_anti_hermitian_rejected() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]));
        assert!(matches!(SuNElement::new(m), Err(CoreError::NotAntiHermitian(_))));
    }

    proptest! {
        #[test]
        fn coordinate_roundtrip(v in proptest::collection::vec(-3.0..3.0f64, 15)) {
            let b = SuNBasis::gell_mann(4).unwrap();
            let x = b.reconstruct(&v).unwrap();
            let back = b.coordinates(&x).unwrap();
            let again = b.reconstruct(&back).unwrap();
            prop_assert!((again.matrix() - x.matrix()).norm() < 1e-11);
            for (a, e) in back.iter().zip(&v) {
                prop_assert!((a - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kml_algebra() {
        for k in 0..3 {
            let s = Solution::veronese(3, k).unwrap();
            for z in points(100 + k as u64, 8) {
                let km = k_matrices(&s.projector(z, 1).unwrap()).unwrap();
                assert!((&km.k - (&km.m + &km.l)).norm() < 1e-10);
                assert!((&km.m - &km.l - &km.dbar_p).norm() < 1e-10);
                assert!((&km.k_dagger - km.k.adjoint()).norm() < 1e-10);
                if k == 0 {
                    assert!((&km.k - &km.dbar_p).norm() < 1e-10);
                }
            }
        }
        let anti = Solution::new(HolomorphicVectorSpec::veronese(3).unwrap(), 0, Chirality::Antiholomorphic).unwrap();
        let km = k_matrices(&anti.projector(c(0.3, 0.4), 1).unwrap()).unwrap();
        assert!((&km.k + &km.dbar_p).norm() < 1e-12);
    }

    #[test]
    fn ml_conservation() {
        let s1 = Solution::veronese(3, 1).unwrap();
        let (a, b) = conservation_check_ml(&s1, c(1.0, 1.0)).unwrap();
        assert!(a < 1e-10 && b < 1e-10);
        let s0 = Solution::veronese(3, 0).unwrap();
        let (a, b) = conservation_check_ml(&s0, c(0.0, 0.0)).unwrap();
        assert!(a < 1e-10 && b < 1e-10);
        let (a, b) = conservation_residuals(&non_harmonic_projector(c(1.0, 0.0))).unwrap();
        assert!(a.max(b) > 1e-3);
    }

    #[test]
    fn closed_form_at_origin() {
        let s = Solution::veronese(3, 0).unwrap();
        let x = closed_form_at(&s, c(0.0, 0.0)).unwrap();
        let want = DMatrix::from_diagonal(&DVector::from_vec(vec![c(0.0, -2.0 / 3.0), c(0.0, 1.0 / 3.0), c(0.0, 1.0 / 3.0)]));
        assert!((x.matrix() - want).norm() < 1e-15);
        let p = s.projector(c(0.4, -0.9), 0).unwrap().value();
        let plus = immersion_closed_form(&p, 1.0).unwrap();
        let minus = immersion_closed_form(&p, -1.0).unwrap();
        assert!((plus.matrix() + minus.matrix()).norm() < 1e-15);
        assert!(plus.matrix().trace().norm() < 1e-14);
    }

    #[test]
    fn line_integral_matches_closed_form() {
        let s = Solution::veronese(3, 0).unwrap();
        let x = immersion_line_integral(&s, c(0.0, 0.0), c(1.0, 0.0), DEFAULT_SEGMENTS, DEFAULT_NODES).unwrap();
        let want = closed_form_at(&s, c(1.0, 0.0)).unwrap().matrix() - closed_form_at(&s, c(0.0, 0.0)).unwrap().matrix();
        assert!((x.matrix() - want).norm() < 1e-8);
    }

    #[test]
    fn path_independence() {
        let s = Solution::veronese(3, 1).unwrap();
        let end = c(1.0, 1.0);
        let a = immersion_polyline(&s, &[c(0.0, 0.0), end], DEFAULT_SEGMENTS, DEFAULT_NODES).unwrap();
        let b = immersion_polyline(&s, &[c(0.0, 0.0), c(1.0, 0.0), end], DEFAULT_SEGMENTS, DEFAULT_NODES).unwrap();
        assert!((a.matrix() - b.matrix()).norm() < 1e-8);
    }

    #[test]
    fn empty_path() {
        let s = Solution::veronese(3, 1).unwrap();
        let x = immersion_line_integral(&s, c(0.5, 0.5), c(0.5, 0.5), 4, 4).unwrap();
        assert_eq!(x.matrix().norm(), 0.0);
    }

    #[test]
    fn path_through_pole() {
        // f = (1, 1/ξ) is singular at 0
        let f = HolomorphicVectorSpec::new(vec![
            crate::poly::RationalFunction::polynomial(crate::poly::Poly::from_real(&[1.0])),
            crate::poly::RationalFunction::from_coeffs(vec![c(1.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap(),
        ])
        .unwrap();
        let s = Solution::holomorphic(f, 0).unwrap();
        let r = immersion_line_integral(&s, c(-1.0, 0.0), c(1.0, 0.0), 8, 8);
        assert!(matches!(r, Err(CoreError::PathThroughSingularity { .. })));
    }

    #[test]
    fn tangent_vectors() {
        // ∂X = iK† via a central difference of the integral
        let s = Solution::veronese(3, 1).unwrap();
        let z = c(0.4, 0.3);
        let h = 1e-4;
        let x = |p: C64| immersion_line_integral(&s, c(0.0, 0.0), p, 16, 8).unwrap().matrix().clone();
        let dx = (x(z + h) - x(z - h)) / C64::new(2.0 * h, 0.0);
        let dy = (x(z + c(0.0, h)) - x(z - c(0.0, h))) / C64::new(2.0 * h, 0.0);
        let d = (dx - dy * I) * C64::new(0.5, 0.0);
        let km = k_matrices(&s.projector(z, 1).unwrap()).unwrap();
        assert!((d - km.k_dagger * I).norm() < 1e-6);
    }

    #[test]
    fn calibration_is_orthogonal_and_exact() {
        let f = Cp2Frame::global();
        assert!(f.residual < 1e-12, "{}", f.residual);
        let o = &f.rotation;
        assert!((o.transpose() * o - DMatrix::<f64>::identity(8, 8)).norm() < 1e-12);
        let s3 = 3f64.sqrt();
        // hand-derived: signed permutation on off-diagonal generators, a
        // rotation with reflection on the Cartan pair, X₄ shifted
        let mut want = DMatrix::<f64>::zeros(8, 8);
        for (row, col, sign) in [(0, 6, 1.0), (1, 4, -1.0), (2, 7, 1.0), (3, 5, -1.0), (4, 0, -1.0), (5, 1, -1.0)] {
            want[(row, col)] = sign;
        }
        want[(6, 2)] = 0.5;
        want[(6, 3)] = -s3 / 2.0;
        want[(7, 2)] = -s3 / 2.0;
        want[(7, 3)] = -0.5;
        assert!((o - want).norm() < 1e-10);
        let mut b = DVector::<f64>::zeros(8);
        b[3] = -1.0 / s3;
        assert!((&f.offset - b).norm() < 1e-10);
    }

    #[test]
    fn veronese_in_standard_frame() {
        let s = Solution::veronese(3, 0).unwrap();
        for z in points(7, 10).into_iter().chain([c(1.0, 0.0)]) {
            let x = cp2_standard_coordinates(&closed_form_at(&s, z).unwrap()).unwrap();
            let want = veronese_standard(z);
            for j in 0..8 {
                assert!((x[j] - want[j]).abs() < 1e-12, "{z} X{}", j + 1);
            }
        }
        let s2 = 2f64.sqrt();
        let at1 = cp2_radius_holomorphic(s2.into(), c(1.0, 0.0));
        let want = [s2 / 4.0, 0.0, 0.125, -3.0 * 3f64.sqrt() / 8.0, 0.0, 0.0, -s2 / 4.0, -0.25];
        for j in 0..8 {
            assert!((at1[j] - want[j]).abs() < 1e-15);
        }
        assert!(cp2_radius_holomorphic(c(0.0, 0.0), c(0.0, 0.0)).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn affine_sphere() {
        let s2 = 2f64.sqrt();
        for z in grid(20, -2.0, 2.0) {
            let x = cp2_radius_holomorphic(z * s2, z * z);
            let r = 4.0 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) + 2.0 / 3f64.sqrt() * x[3]
                + x[4] * x[4]
                + x[5] * x[5]
                + x[6] * x[6]
                + x[7] * x[7];
            assert!(r.abs() < 1e-12);
        }
    }

    /// `∂X = ½(X_x - i X_y)` by central differences.
    fn fd_holomorphic_derivative(f: impl Fn(C64) -> [f64; 8], z: C64, h: f64) -> [C64; 8] {
        let (a, b, cc, d) = (f(z + h), f(z - h), f(z + c(0.0, h)), f(z - c(0.0, h)));
        std::array::from_fn(|j| c((a[j] - b[j]) / (4.0 * h), -(cc[j] - d[j]) / (4.0 * h)))
    }

    #[test]
    fn one_forms_integrate_closed_forms() {
        let s2 = 2f64.sqrt();
        let hol = Solution::veronese(3, 0).unwrap();
        let mixed = Solution::veronese(3, 1).unwrap();
        for z in points(17, 10) {
            let (w, dw, dwc) = cp2_inhomogeneous(&hol, z).unwrap();
            let alpha = cp2_one_forms(w, dw, dwc);
            let fd = fd_holomorphic_derivative(|p| cp2_radius_holomorphic(p * s2, p * p), z, 1e-5);
            for j in 0..8 {
                assert!((alpha[j] - fd[j]).norm() < 1e-8, "holomorphic X{}", j + 1);
            }
            let (w, dw, dwc) = cp2_inhomogeneous(&mixed, z).unwrap();
            let alpha = cp2_one_forms(w, dw, dwc);
            let fd = fd_holomorphic_derivative(radiusvecmix, z, 1e-5);
            for j in 0..8 {
                assert!((alpha[j] - fd[j]).norm() < 1e-8, "mixed X{}", j + 1);
            }
        }
    }

    #[test]
    fn one_forms_are_the_commutator_integrand() {
        let basis = SuNBasis::gell_mann(3).unwrap();
        let frame = Cp2Frame::global();
        for k in 0..2 {
            let s = Solution::veronese(3, k).unwrap();
            for z in points(23 + k as u64, 6) {
                let (a, _) = immersion_integrand(&s, z).unwrap();
                // complex-linear coordinates of the dξ coefficient
                let cre: Vec<f64> = basis.generators().iter().map(|t| (-0.5 * I * (&a * t).trace()).re).collect();
                let cim: Vec<f64> = basis.generators().iter().map(|t| (-0.5 * I * (&a * t).trace()).im).collect();
                let (pr, pi) = (frame.to_standard_linear(&cre), frame.to_standard_linear(&cim));
                let (w, dw, dwc) = cp2_inhomogeneous(&s, z).unwrap();
                let alpha = cp2_one_forms(w, dw, dwc);
                for j in 0..8 {
                    assert!((alpha[j] - c(pr[j], pi[j])).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn mixed_radius_matches_closed_form() {
        let f = HolomorphicVectorSpec::veronese(3).unwrap();
        for z in [c(1.0, 0.0), c(-1.0, 0.0), c(-0.3, 0.01), c(0.2, -1.7), c(2.0, 2.0)] {
            let x = cp2_radius_mixed(&f, z, DEFAULT_SEGMENTS, DEFAULT_NODES).unwrap();
            let want = radiusvecmix(z);
            for j in 0..8 {
                assert!((x[j] - want[j]).abs() < 1e-7, "{z} X{}: {} vs {}", j + 1, x[j], want[j]);
            }
        }
        assert!(matches!(
            cp2_radius_mixed(&f, c(0.0, 0.0), 8, 8),
            Err(CoreError::PathThroughSingularity { .. })
        ));
    }

    #[test]
    fn rank1_identities() {
        let s = Solution::veronese(3, 1).unwrap();
        let d = rank1_weierstrass_data(&s, c(1.0, 0.0)).unwrap();
        assert!(d.identity_defect < 1e-10 && d.identity_defect_bar < 1e-10);
        assert!((&d.comm_bar + d.comm.adjoint()).norm() < 1e-12);
        let s0 = Solution::veronese(3, 0).unwrap();
        for z in points(5, 5) {
            let d = rank1_weierstrass_data(&s0, z).unwrap();
            assert!(d.identity_defect < 1e-10 && d.identity_defect_bar < 1e-10);
        }
    }

    #[test]
    fn rank1_surface_is_an_affine_image_of_y() {
        // Y₁ … Y₅ of the rank-one construction, written out by hand
        let y = |z: C64| {
            let (x, yy) = (z.re, z.im);
            let r = x * x + yy * yy;
            let d = (1.0 + r).powi(2);
            [2.0 * x * (1.0 - r) / d, 2.0 * yy * (1.0 - r) / d, 2.0 * (x * x - yy * yy) / d, 4.0 * x * yy / d, 3f64.sqrt() * (1.0 - r).powi(2) / d]
        };
        let s = Solution::veronese(3, 1).unwrap();
        let basis = SuNBasis::gell_mann(3).unwrap();
        let zs = points(41, 30);
        // least squares Y ≈ [coords, 1] · A
        let mut m = DMatrix::<f64>::zeros(zs.len(), 9);
        let mut t = DMatrix::<f64>::zeros(zs.len(), 5);
        for (i, &z) in zs.iter().enumerate() {
            let cds = basis.coordinates(&rank1_immersion(&s, z).unwrap()).unwrap();
            for j in 0..8 {
                m[(i, j)] = cds[j];
            }
            m[(i, 8)] = 1.0;
            let yv = y(z);
            for j in 0..5 {
                t[(i, j)] = yv[j];
            }
        }
        let sol = m.clone().svd(true, true).solve(&t, 1e-12).unwrap();
        assert!((m * sol - t).norm() < 1e-10);
    }

    #[test]
    fn full_and_rank1_surfaces_differ() {
        let s = Solution::veronese(3, 1).unwrap();
        let zs: Vec<C64> = grid(5, -1.5, 1.5);
        let r = discrepancy_report(&s, &zs, 16, 8).unwrap();
        assert_eq!(r.full_rank, 3);
        assert_eq!(r.rank1_rank, 5);
        assert!(!r.related_by_motion);
    }
}
