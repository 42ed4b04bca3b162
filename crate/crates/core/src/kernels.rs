//! Region kernels K(x) = ∫_R e^{i2π k·x} dk for triangles, tetrahedra,
//! signal cones and balls, and the cascaded quadratures that discretize them
//! as exponential sums Σ a_j e^{i2π k_j·x}.
//!
//! The triangle and tetrahedron closed forms are divided differences of
//! e^{iw} over the simplex vertices (Hermite–Genocchi), so the removable
//! singularities on the lines y = ±s x etc. need no special casing.

use alloc::{format, vec, vec::Vec};
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::{DMatrix, Matrix3, Rotation3, Unit, Vector3};
use num_complex::Complex64;

use crate::moments::{merge_nodes, Quadrature1D};
use crate::numkit::{
    bessel_j1, cosinc_c, divided_difference, expc, gauss_legendre, integrate, integrate_c, sinc_c, IntegrationOptions, PointSet, I,
};
use crate::projection::Region;
use crate::sincapprox::build_sinc_cosine_approx;
use crate::{Error, Result};

fn positive(v: f64, name: &str) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be finite and positive, got {v}")))
    }
}

// ---------------------------------------------------------------------------
// Region parameters

/// Isosceles triangle {0 ≤ k_x ≤ Δp, |k_y| ≤ s k_x}. With a phase shift c the
/// triangle is translated by −c along k_x, i.e. K(x, y) is multiplied by
/// e^{−i2πcx}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleSpec {
    pub dp: f64,
    pub s: f64,
    pub phase_shift: Option<f64>,
}

impl TriangleSpec {
    pub fn new(dp: f64, s: f64) -> Result<Self> {
        positive(dp, "Δp")?;
        positive(s, "s")?;
        Ok(TriangleSpec { dp, s, phase_shift: None })
    }

    /// Unit-side equilateral triangle with a vertex at the origin.
    pub fn equilateral() -> Self {
        TriangleSpec { dp: 3f64.sqrt() / 2.0, s: 1.0 / 3f64.sqrt(), phase_shift: None }
    }

    /// One third of the unit equilateral triangle: apex at the centroid, base
    /// one full side. Three copies rotated by 2π/3 tile the triangle.
    pub fn isosceles_sub() -> Self {
        TriangleSpec { dp: 3f64.sqrt() / 6.0, s: 3f64.sqrt(), phase_shift: None }
    }

    /// The same triangle translated so its centroid is at the origin.
    pub fn centered(self) -> Self {
        TriangleSpec { phase_shift: Some(2.0 * self.dp / 3.0), ..self }
    }

    pub fn unshifted(self) -> Self {
        TriangleSpec { phase_shift: None, ..self }
    }

    pub fn area(&self) -> f64 {
        self.dp * self.dp * self.s
    }

    pub fn vertices(&self) -> [[f64; 2]; 3] {
        let c = self.phase_shift.unwrap_or(0.0);
        [[-c, 0.0], [self.dp - c, self.dp * self.s], [self.dp - c, -self.dp * self.s]]
    }
}

/// Tetrahedron {0 ≤ k_z ≤ h, 0 ≤ k_y ≤ Δp k_z, |k_x| ≤ s k_y}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TetraSpec {
    pub h: f64,
    pub dp: f64,
    pub s: f64,
}

impl TetraSpec {
    pub fn new(h: f64, dp: f64, s: f64) -> Result<Self> {
        positive(h, "h")?;
        positive(dp, "Δp")?;
        positive(s, "s")?;
        Ok(TetraSpec { h, dp, s })
    }

    /// h = √(2/3), Δp = (√3/6)h, s = √3 — the parameters of the published
    /// kernel plots. (Three copies rotated about k_z tile a regular
    /// tetrahedron only with Δp = √3/(6h).)
    pub fn preset() -> Self {
        let h = (2.0f64 / 3.0).sqrt();
        TetraSpec { h, dp: 3f64.sqrt() / 6.0 * h, s: 3f64.sqrt() }
    }

    /// Cone from the centroid of the unit regular tetrahedron over one third
    /// of a face; twelve rotated copies tile the tetrahedron.
    pub fn sub_tetra() -> Self {
        TetraSpec { h: 1.0 / 24f64.sqrt(), dp: 2f64.sqrt(), s: 3f64.sqrt() }
    }

    pub fn volume(&self) -> f64 {
        self.h.powi(3) * self.dp * self.dp * self.s / 3.0
    }

    pub fn vertices(&self) -> [[f64; 3]; 4] {
        let (h, a) = (self.h, self.dp * self.h);
        [[0.0; 3], [0.0, 0.0, h], [self.s * a, a, h], [-self.s * a, a, h]]
    }
}

/// Signal cone {(ω, k) ∈ R × Rⁿ : |ω| ≤ ω₀, |k| ≤ |ω| p_max}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeSpec {
    pub omega0: f64,
    pub pmax: f64,
    pub n: usize,
}

impl ConeSpec {
    pub fn new(omega0: f64, pmax: f64, n: usize) -> Result<Self> {
        positive(omega0, "ω₀")?;
        positive(pmax, "p_max")?;
        if !(1..=3).contains(&n) {
            return Err(Error::Unsupported(format!("cone with {n} spatial dimensions")));
        }
        Ok(ConeSpec { omega0, pmax, n })
    }

    /// 2 V_n p_maxⁿ ω₀ⁿ⁺¹/(n+1), V_n the unit-ball volume.
    pub fn measure(&self) -> f64 {
        let n = self.n as i32;
        2.0 * crate::projection::unit_ball_volume(self.n) * self.pmax.powi(n) * self.omega0.powi(n + 1) / (n + 1) as f64
    }
}

// ---------------------------------------------------------------------------
// Exponential-sum quadratures

/// Symmetric box [−w₁, w₁] × … on which a surrogate must be accurate
/// (the difference set S + S of the region of interest).
#[derive(Debug, Clone, PartialEq)]
pub struct TargetBox {
    pub half_widths: Vec<f64>,
}

impl TargetBox {
    pub fn new(half_widths: Vec<f64>) -> Result<Self> {
        if half_widths.is_empty() || half_widths.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidArgument("target half widths must be finite and non-negative".into()));
        }
        Ok(TargetBox { half_widths })
    }

    pub fn radius(&self) -> f64 {
        self.half_widths.iter().map(|w| w * w).sum::<f64>().sqrt()
    }
}

/// Measured max |K − K̃| over a grid of the target box.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorProfile {
    pub max_error: f64,
    pub target: TargetBox,
    pub grid: Vec<usize>,
}

/// Exponential-sum kernel surrogate K̃(x) = Σ a_j e^{i2π k_j·x}.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureND {
    pub weights: Vec<f64>,
    pub nodes: PointSet,
    pub region_tag: Region,
    /// Orthogonal maps under which the weighted node multiset is invariant.
    pub symmetry_group: Option<Vec<DMatrix<f64>>>,
    pub error_profile: Option<ErrorProfile>,
}

impl QuadratureND {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.nodes.dim()
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (w, k) in self.weights.iter().zip(self.nodes.iter()) {
            let ph: f64 = k.iter().zip(x).map(|(a, b)| a * b).sum();
            acc += Complex64::from_polar(*w, 2.0 * PI * ph);
        }
        acc
    }

    /// Largest |k_i| over the nodes, per axis.
    pub fn extent(&self) -> Vec<f64> {
        let d = self.dim();
        let mut e = vec![0.0f64; d];
        for k in self.nodes.iter() {
            for (ei, ki) in e.iter_mut().zip(k) {
                *ei = ei.max(ki.abs());
            }
        }
        e
    }
}

/// ∫_{−1}^{1} e^{iaω} dω ≈ Σ w_j e^{iaω_j} for |a| ≤ a_max, from the
/// 3ⁿ-expanded Gauss–Legendre cosine sum; nodes closed under negation.
pub(crate) fn sym_exp_rule(a_max: f64, m: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let q = build_sinc_cosine_approx(a_max.max(1e-12), m)?.rule();
    let mut pairs = Vec::with_capacity(2 * q.len());
    for (b, w) in q.weights.iter().zip(&q.nodes) {
        pairs.push((w.abs(), *b));
        pairs.push((-w.abs(), *b));
    }
    Ok(merge_nodes(pairs, 1e-14))
}

/// ∫_0^1 e^{icu} du ≈ Σ w_j e^{icu_j} for |c| ≤ c_max.
pub(crate) fn unit_exp_rule(c_max: f64, m: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let (x, w) = sym_exp_rule(0.5 * c_max, m)?;
    Ok((x.iter().map(|v| 0.5 * (1.0 + v)).collect(), w.iter().map(|v| 0.5 * v).collect()))
}

/// Grid of the target box (zero-width axes collapse to one point).
pub fn target_grid(target: &TargetBox, counts: &[usize]) -> Result<PointSet> {
    let d = target.half_widths.len();
    if counts.len() != d {
        return Err(Error::Dimension(format!("{} counts for a {d}-d box", counts.len())));
    }
    let axes: Vec<Vec<f64>> = target
        .half_widths
        .iter()
        .zip(counts)
        .map(|(w, n)| if *w == 0.0 || *n < 2 { vec![0.0] } else { crate::numkit::linspace(-w, *w, *n) })
        .collect();
    let total: usize = axes.iter().map(|a| a.len()).product();
    let mut coords = Vec::with_capacity(total * d);
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        for k in 0..d {
            coords.push(axes[k][idx[k]]);
        }
        for k in (0..d).rev() {
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
    PointSet::new(d, coords)
}

/// Max |K̃ − K| over a grid of the target box.
pub fn measure_error<F>(q: &QuadratureND, target: &TargetBox, counts: &[usize], exact: F) -> Result<ErrorProfile>
where
    F: Fn(&[f64]) -> Result<Complex64>,
{
    let grid = target_grid(target, counts)?;
    let mut max_error = 0.0f64;
    for p in grid.iter() {
        max_error = max_error.max((q.eval(p) - exact(p)?).norm());
    }
    Ok(ErrorProfile { max_error, target: target.clone(), grid: counts.to_vec() })
}

/// Grid density for profiles: about twelve points per period of the fastest
/// exponential along each axis, clamped to [lo, hi].
pub fn profile_counts(q: &QuadratureND, target: &TargetBox, lo: usize, hi: usize) -> Vec<usize> {
    q.extent()
        .iter()
        .zip(&target.half_widths)
        .map(|(k, w)| if *w == 0.0 { 1 } else { ((24.0 * w * k).ceil() as usize + 1).clamp(lo, hi) })
        .collect()
}

fn check_target(target: &TargetBox, d: usize) -> Result<()> {
    if target.half_widths.len() != d {
        return Err(Error::Dimension(format!("{}-d target box for a {d}-d kernel", target.half_widths.len())));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Simplices

fn simplex_det(vertices: &[Vec<f64>]) -> Result<f64> {
    let d = vertices.len().saturating_sub(1);
    if d == 0 || vertices.iter().any(|v| v.len() != d) {
        return Err(Error::Dimension(format!("{} vertices do not span a simplex", vertices.len())));
    }
    let m = DMatrix::from_fn(d, d, |i, j| vertices[j + 1][i] - vertices[0][i]);
    Ok(m.determinant())
}

pub fn simplex_volume(vertices: &[Vec<f64>]) -> Result<f64> {
    let d = vertices.len() - 1;
    Ok(simplex_det(vertices)?.abs() / (1..=d).product::<usize>() as f64)
}

/// ∫_simplex e^{i2π k·x} dk = |det V| · E[t₀, …, t_d] / i^d with
/// E(w) = e^{iw} and t_j = 2π v_j·x.
pub fn simplex_kernel(vertices: &[Vec<f64>], x: &[f64]) -> Result<Complex64> {
    let det = simplex_det(vertices)?.abs();
    let d = x.len();
    if vertices.len() != d + 1 {
        return Err(Error::Dimension(format!("point of dimension {d} for a simplex with {} vertices", vertices.len())));
    }
    let t: Vec<Complex64> =
        vertices.iter().map(|v| Complex64::new(2.0 * PI * v.iter().zip(x).map(|(a, b)| a * b).sum::<f64>(), 0.0)).collect();
    let e = |w: Complex64| (I * w).exp();
    Ok(divided_difference(&e, &t) * det * (-I).powu(d as u32))
}

// ---------------------------------------------------------------------------
// Triangle

fn phi(w: Complex64) -> Complex64 {
    expc(I * w)
}

/// K_△(x, y) = ∫_T e^{i2π(k_x x + k_y y)} dk = −2iΔp²s · φ[A₋, A₊] with
/// φ(w) = expc(iw) and A± = 2πΔp(x ± s y).
pub fn k_triangle(spec: &TriangleSpec, x: f64, y: f64) -> Complex64 {
    let am = Complex64::new(2.0 * PI * spec.dp * (x - spec.s * y), 0.0);
    let ap = Complex64::new(2.0 * PI * spec.dp * (x + spec.s * y), 0.0);
    let k = divided_difference(&phi, &[am, ap]) * Complex64::new(0.0, -2.0 * spec.area());
    match spec.phase_shift {
        Some(c) => k * Complex64::from_polar(1.0, -2.0 * PI * c * x),
        None => k,
    }
}

/// Right-hand side of the self-similarity relation
/// K(x,y) = ¼[K(x/2,y/2)(1 + 2e^{iπΔpx}cos(πΔpsy)) + e^{i2πΔpx}K(−x/2,y/2)]
/// for the unshifted kernel; `half` = (K(x/2, y/2), K(−x/2, y/2)).
pub fn triangle_scaling_refine(spec: &TriangleSpec, x: f64, y: f64, half: (Complex64, Complex64)) -> Complex64 {
    let a = Complex64::from_polar(1.0, PI * spec.dp * x);
    let c = (PI * spec.dp * spec.s * y).cos();
    0.25 * (half.0 * (1.0 + 2.0 * a * c) + a * a * half.1)
}

/// Level m−1 value K_{m−1}(x, y) from (K_m(x, y), K_m(−x, y)), where
/// K_m(x, y) = K(2^m x, 2^m y).
pub fn triangle_scaling_invert(spec: &TriangleSpec, m: i32, x: f64, y: f64, values: (Complex64, Complex64)) -> Result<Complex64> {
    let sc = 2f64.powi(m);
    let a = Complex64::from_polar(1.0, PI * sc * spec.dp * x);
    let c = (PI * sc * spec.dp * spec.s * y).cos();
    let den = c * c + c * (PI * sc * spec.dp * x).cos();
    if den.abs() <= 1e-8 {
        return Err(Error::Singular { value: den, location: format!("(x, y) = ({x}, {y}) at level {m}") });
    }
    Ok((values.0 * (1.0 + 2.0 * a.conj() * c) - a * a * values.1) / den)
}

/// m-fold refinement: approximates K(x, y) from a base approximation that is
/// only evaluated at (±x/2^m, y/2^m)-type points (2^m base calls).
pub fn triangle_refined_eval<F: Fn(f64, f64) -> Complex64>(spec: &TriangleSpec, m: u32, x: f64, y: f64, base: &F) -> Complex64 {
    if m == 0 {
        return base(x, y);
    }
    let p = triangle_refined_eval(spec, m - 1, 0.5 * x, 0.5 * y, base);
    let n = triangle_refined_eval(spec, m - 1, -0.5 * x, 0.5 * y, base);
    triangle_scaling_refine(spec, x, y, (p, n))
}

fn triangle_nodes(dp: f64, s: f64, m_outer: usize, m_inner: usize, xw: f64, yw: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let (u, a) = unit_exp_rule(2.0 * PI * dp * (xw + s * yw), m_outer)?;
    let mut coords = Vec::new();
    let mut weights = Vec::new();
    for (uj, aj) in u.iter().zip(&a) {
        let (v, b) = sym_exp_rule(2.0 * PI * dp * s * uj * yw, m_inner)?;
        for (vk, bk) in v.iter().zip(&b) {
            coords.extend_from_slice(&[dp * uj, dp * s * uj * vk]);
            weights.push(dp * dp * s * aj * uj * bk);
        }
    }
    Ok((coords, weights))
}

/// Cascaded exponential-sum surrogate of K_△: an outer rule in
/// u = k_x/Δp ∈ [0, 1] for bands up to 2πΔp(X + sY) and, per outer node, an
/// inner rule in k_y/(s k_x) ∈ [−1, 1] for bands up to 2πΔp s u Y.
/// `m_outer`/`m_inner` are the Gauss–Legendre sizes of the base rules.
pub fn triangle_quadrature(spec: &TriangleSpec, m_outer: usize, m_inner: usize, target: &TargetBox) -> Result<QuadratureND> {
    check_target(target, 2)?;
    let (mut coords, weights) = triangle_nodes(spec.dp, spec.s, m_outer, m_inner, target.half_widths[0], target.half_widths[1])?;
    if let Some(c) = spec.phase_shift {
        coords.iter_mut().step_by(2).for_each(|k| *k -= c);
    }
    let mut q = QuadratureND {
        weights,
        nodes: PointSet::new(2, coords)?,
        region_tag: Region::Triangle(*spec),
        symmetry_group: None,
        error_profile: None,
    };
    let counts = profile_counts(&q, target, 41, 241);
    q.error_profile = Some(measure_error(&q, target, &counts, |p| Ok(k_triangle(spec, p[0], p[1])))?);
    Ok(q)
}

/// Rule for the doubled kernel K(2x, 2y)-style refinement: four scaled and
/// shifted copies of the nodes (the midpoint subdivision of the triangle).
/// The result approximates K on twice the original target box.
pub fn refine_triangle_quadrature(spec: &TriangleSpec, q: &QuadratureND) -> Result<QuadratureND> {
    if q.dim() != 2 {
        return Err(Error::Dimension("triangle refinement needs a 2-d rule".into()));
    }
    let c = spec.phase_shift.unwrap_or(0.0);
    let (dp, s) = (spec.dp, spec.s);
    let mut coords = Vec::with_capacity(8 * q.len());
    let mut weights = Vec::with_capacity(4 * q.len());
    for (w, k) in q.weights.iter().zip(q.nodes.iter()) {
        let (kx, ky) = (k[0] + c, k[1]);
        for (nx, ny) in [
            (0.5 * kx, 0.5 * ky),
            (0.5 * kx + 0.5 * dp, 0.5 * ky + 0.5 * dp * s),
            (0.5 * kx + 0.5 * dp, 0.5 * ky - 0.5 * dp * s),
            (dp - 0.5 * kx, 0.5 * ky),
        ] {
            coords.extend_from_slice(&[nx - c, ny]);
            weights.push(0.25 * w);
        }
    }
    let error_profile = q.error_profile.as_ref().map(|p| ErrorProfile {
        max_error: p.max_error,
        target: TargetBox { half_widths: p.target.half_widths.iter().map(|w| 2.0 * w).collect() },
        grid: p.grid.clone(),
    });
    Ok(QuadratureND { weights, nodes: PointSet::new(2, coords)?, region_tag: q.region_tag.clone(), symmetry_group: None, error_profile })
}

fn rotation2(theta: f64) -> DMatrix<f64> {
    let (s, c) = theta.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
}

fn apply_group(coords: &[f64], weights: &[f64], dim: usize, group: &[DMatrix<f64>]) -> (Vec<f64>, Vec<f64>) {
    let mut out = Vec::with_capacity(coords.len() * group.len());
    let mut ws = Vec::with_capacity(weights.len() * group.len());
    for g in group {
        for (k, w) in coords.chunks(dim).zip(weights) {
            for i in 0..dim {
                out.push((0..dim).map(|j| g[(i, j)] * k[j]).sum());
            }
            ws.push(*w);
        }
    }
    (out, ws)
}

/// Unit equilateral triangle centred at its centroid, discretized by three
/// rotated copies (0, 2π/3, 4π/3) of the isosceles sub-triangle rule, so the
/// node multiset is invariant under the rotation group C₃.
pub fn equilateral_symmetric_quadrature(m_outer: usize, m_inner: usize, target: &TargetBox) -> Result<QuadratureND> {
    check_target(target, 2)?;
    let sub = TriangleSpec::isosceles_sub();
    let r = target.radius();
    let (coords, weights) = triangle_nodes(sub.dp, sub.s, m_outer, m_inner, r, r)?;
    let group: Vec<DMatrix<f64>> = (0..3).map(|n| rotation2(2.0 * PI * n as f64 / 3.0)).collect();
    let (coords, weights) = apply_group(&coords, &weights, 2, &group);
    let tri = TriangleSpec::equilateral().centered();
    let mut q = QuadratureND {
        weights,
        nodes: PointSet::new(2, coords)?,
        region_tag: Region::Triangle(tri),
        symmetry_group: Some(group),
        error_profile: None,
    };
    let counts = profile_counts(&q, target, 41, 241);
    q.error_profile = Some(measure_error(&q, target, &counts, |p| Ok(k_triangle(&tri, p[0], p[1])))?);
    Ok(q)
}

// ---------------------------------------------------------------------------
// Tetrahedron

/// K_◁(x, y, z) = −2h³Δp²s · φ[Z, Z + P + Q, Z + P − Q] with Z = 2πhz,
/// P = 2πhΔp y, Q = 2πhΔp s x.
pub fn k_tetra(spec: &TetraSpec, x: f64, y: f64, z: f64) -> Complex64 {
    let zz = 2.0 * PI * spec.h * z;
    let p = 2.0 * PI * spec.h * spec.dp * y;
    let q = 2.0 * PI * spec.h * spec.dp * spec.s * x;
    let pts = [Complex64::new(zz, 0.0), Complex64::new(zz + p + q, 0.0), Complex64::new(zz + p - q, 0.0)];
    divided_difference(&phi, &pts) * (-6.0 * spec.volume())
}

fn tetra_nodes(spec: &TetraSpec, m: [usize; 3], hw: [f64; 3]) -> Result<(Vec<f64>, Vec<f64>)> {
    let TetraSpec { h, dp, s } = *spec;
    let [xw, yw, zw] = hw;
    let (w, a) = unit_exp_rule(2.0 * PI * h * (zw + dp * (yw + s * xw)), m[0])?;
    let mut coords = Vec::new();
    let mut weights = Vec::new();
    for (wj, aj) in w.iter().zip(&a) {
        let (u, b) = unit_exp_rule(2.0 * PI * h * dp * wj * (yw + s * xw), m[1])?;
        for (uk, bk) in u.iter().zip(&b) {
            let (v, c) = sym_exp_rule(2.0 * PI * s * dp * h * wj * uk * xw, m[2])?;
            for (vl, cl) in v.iter().zip(&c) {
                coords.extend_from_slice(&[s * dp * h * wj * uk * vl, dp * h * wj * uk, h * wj]);
                weights.push(h.powi(3) * dp * dp * s * aj * wj * wj * bk * uk * cl);
            }
        }
    }
    Ok((coords, weights))
}

/// Three-level cascaded surrogate of K_◁ (k_z, then k_y/(Δp k_z), then
/// k_x/(s k_y)), with bands from the target box as for the triangle.
pub fn tetra_quadrature(spec: &TetraSpec, m1: usize, m2: usize, m3: usize, target: &TargetBox) -> Result<QuadratureND> {
    check_target(target, 3)?;
    let hw = [target.half_widths[0], target.half_widths[1], target.half_widths[2]];
    let (coords, weights) = tetra_nodes(spec, [m1, m2, m3], hw)?;
    let mut q = QuadratureND {
        weights,
        nodes: PointSet::new(3, coords)?,
        region_tag: Region::Tetrahedron(*spec),
        symmetry_group: None,
        error_profile: None,
    };
    let counts = profile_counts(&q, target, 15, 41);
    q.error_profile = Some(measure_error(&q, target, &counts, |p| Ok(k_tetra(spec, p[0], p[1], p[2])))?);
    Ok(q)
}

/// Vertices v₁..v₄ of the unit regular tetrahedron centred at its centroid.
pub fn tetra_vertices() -> [Vector3<f64>; 4] {
    let r3 = 3f64.sqrt();
    let zb = -(1.5f64).sqrt() / 6.0;
    [
        Vector3::new(-0.5, -r3 / 6.0, zb),
        Vector3::new(0.5, -r3 / 6.0, zb),
        Vector3::new(0.0, r3 / 3.0, zb),
        Vector3::new(0.0, 0.0, (2.0f64 / 3.0).sqrt() + zb),
    ]
}

fn axis_rotation(v: &Vector3<f64>, theta: f64) -> Matrix3<f64> {
    Rotation3::from_axis_angle(&Unit::new_normalize(*v), theta).into_inner()
}

/// The 12 orientation-preserving symmetries of the regular tetrahedron:
/// R_{v̂₄}(2πn/3)R_{v̂₁}(2πm/3), n, m = 0, 1, 2, and R_{v̂₄}(2πn/3)R_{v̂₂}(4π/3).
pub fn tetra_symmetry_group() -> Vec<Matrix3<f64>> {
    let v = tetra_vertices();
    let third = 2.0 * PI / 3.0;
    let mut g = Vec::with_capacity(12);
    for n in 0..3 {
        for m in 0..3 {
            g.push(axis_rotation(&v[3], third * n as f64) * axis_rotation(&v[0], third * m as f64));
        }
    }
    for n in 0..3 {
        g.push(axis_rotation(&v[3], third * n as f64) * axis_rotation(&v[1], 2.0 * third));
    }
    g
}

/// Unit regular tetrahedron rule invariant under its rotation group: the
/// sub-tetrahedron rule is turned onto the face v₁v₂v₃ (rotation by π about
/// k_x) and mapped by all 12 group elements.
pub fn tetra_symmetric_quadrature(m1: usize, m2: usize, m3: usize, target: &TargetBox) -> Result<QuadratureND> {
    check_target(target, 3)?;
    let r = target.radius();
    let (mut coords, weights) = tetra_nodes(&TetraSpec::sub_tetra(), [m1, m2, m3], [r, r, r])?;
    for k in coords.chunks_mut(3) {
        k[1] = -k[1];
        k[2] = -k[2];
    }
    let group: Vec<DMatrix<f64>> = tetra_symmetry_group().iter().map(|g| DMatrix::from_column_slice(3, 3, g.as_slice())).collect();
    let (coords, weights) = apply_group(&coords, &weights, 3, &group);
    let verts: Vec<Vec<f64>> = tetra_vertices().iter().map(|v| v.as_slice().to_vec()).collect();
    let mut q = QuadratureND {
        weights,
        nodes: PointSet::new(3, coords)?,
        region_tag: Region::Simplex(verts.clone()),
        symmetry_group: Some(group),
        error_profile: None,
    };
    let counts = profile_counts(&q, target, 11, 25);
    q.error_profile = Some(measure_error(&q, target, &counts, |p| simplex_kernel(&verts, p))?);
    Ok(q)
}

// ---------------------------------------------------------------------------
// Signal cone and ball

/// J₁(z)/z, with its Taylor polynomial near 0.
fn j1_over_z(z: f64) -> f64 {
    if z.abs() < 1e-3 {
        let z2 = z * z;
        0.5 - z2 / 16.0 + z2 * z2 / 384.0
    } else {
        bessel_j1(z) / z
    }
}

/// K(t, x) = ∫_C e^{i2π(ωt − k·x)} dω dk.
///
/// n = 1: 4ω₀²p ψ[a₋, a₊]; n = 3: −16πω₀⁴p³ ψ[a₋, a₋, a₊, a₊], with
/// ψ = cosinc and a± = 2πω₀(t ± p|x|). n = 2 has no elementary form and is
/// integrated numerically: (2pω₀²/r) ∫₀¹ u J₁(2πuω₀pr) cos(2πuω₀t) du.
pub fn k_cone(spec: &ConeSpec, t: f64, x: &[f64]) -> Result<Complex64> {
    if x.len() != spec.n {
        return Err(Error::Dimension(format!("point of dimension {} for an n = {} cone", x.len(), spec.n)));
    }
    let (w0, p) = (spec.omega0, spec.pmax);
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let am = Complex64::new(2.0 * PI * w0 * (t - p * r), 0.0);
    let ap = Complex64::new(2.0 * PI * w0 * (t + p * r), 0.0);
    match spec.n {
        1 => {
            // odd in x through ψ[a₋, a₊] being even in x: use the signed x
            let am = Complex64::new(2.0 * PI * w0 * (t - p * x[0]), 0.0);
            let ap = Complex64::new(2.0 * PI * w0 * (t + p * x[0]), 0.0);
            Ok(divided_difference(&cosinc_c, &[am, ap]) * (4.0 * w0 * w0 * p))
        }
        3 => Ok(divided_difference(&cosinc_c, &[am, am, ap, ap]) * (-16.0 * PI * w0.powi(4) * p.powi(3))),
        _ => {
            let c = 2.0 * PI * w0 * p;
            let scale = spec.measure();
            let opts = IntegrationOptions { abs_tol: 1e-14 * scale, rel_tol: 1e-12, max_segments: 4000 };
            let v = integrate(|u| u * c * u * j1_over_z(c * u * r) * (2.0 * PI * u * w0 * t).cos(), 0.0, 1.0, opts)?;
            Ok(Complex64::new(2.0 * p * w0 * w0 * v, 0.0))
        }
    }
}

fn check_j1_rule(j1: &Quadrature1D) -> Result<()> {
    if j1.symmetric || j1.is_empty() {
        return Err(Error::InvalidArgument("need a half (cosine-type) J1/cosinc rule".into()));
    }
    Ok(())
}

/// Surrogate from J₁(y) ≈ Σ α_m cosinc(γ_m y):
/// K̃ = (ω₀/(πr²)) Σ (α_m/γ_m)[sinc(T) − ½(sinc(δ_m − T) + sinc(δ_m + T))],
/// T = 2πω₀t, δ_m = 2πω₀p γ_m r. Evaluated as −4πω₀³p² Σ w_m sinc[T−δ_m, T, T+δ_m]
/// with the rule weights w_m = α_m γ_m, which is regular at r = 0.
pub fn tilde_k_cone(spec: &ConeSpec, j1: &Quadrature1D, t: f64, r: f64) -> Result<Complex64> {
    if spec.n != 2 {
        return Err(Error::Unsupported(format!("J1 surrogate for an n = {} cone", spec.n)));
    }
    check_j1_rule(j1)?;
    let (w0, p) = (spec.omega0, spec.pmax);
    let tt = 2.0 * PI * w0 * t;
    let mut acc = Complex64::new(0.0, 0.0);
    for (w, g) in j1.weights.iter().zip(&j1.nodes) {
        let d = 2.0 * PI * w0 * p * g * r;
        let pts = [Complex64::new(tt - d, 0.0), Complex64::new(tt, 0.0), Complex64::new(tt + d, 0.0)];
        acc += divided_difference(&sinc_c, &pts) * *w;
    }
    Ok(Complex64::new((acc * (-4.0 * PI * w0.powi(3) * p * p)).re, 0.0))
}

/// m(γ) = ∫₀^∞ J₁(y) cosinc(γy) dy/y.
fn j1_cosinc_overlap(g: f64) -> f64 {
    if g <= 1.0 {
        0.5 * g
    } else {
        let q = (g * g - 1.0).sqrt();
        (0.5 * g * g - 0.5 * g * q + 0.5 * (g + q).ln()) / g
    }
}

/// w(γ, γ') = ∫₀^∞ s(γy) s(γ'y) dy/y with s(z) = (1 − cos z)/z.
///
/// With s(z) = ∫₀¹ sin(zu) du and ∫₀^∞ sin(az)sin(bz) dz/z = ½ln|(a+b)/(a−b)|
/// this is ½∫₀¹ F(ρv) dv, ρ = min/max of (γ, γ'),
/// F(c) = (1+c)ln(1+c) − (1−c)ln|1−c| − 2c ln c; integrated adaptively.
pub fn cosinc_gram(g1: f64, g2: f64) -> Result<f64> {
    let (lo, hi) = if g1 <= g2 { (g1, g2) } else { (g2, g1) };
    if !(lo > 0.0) {
        return Err(Error::InvalidArgument("cosinc frequencies must be positive".into()));
    }
    let rho = lo / hi;
    let xlnx = |x: f64| if x == 0.0 { 0.0 } else { x * x.abs().ln() };
    let f = |v: f64| {
        let c = rho * v;
        xlnx(1.0 + c) - xlnx(1.0 - c) - 2.0 * xlnx(c)
    };
    let opts = IntegrationOptions { abs_tol: 1e-15, rel_tol: 1e-13, max_segments: 2000 };
    Ok(0.5 * integrate(f, 0.0, 1.0, opts)?)
}

/// ∫|K − K̃|² dt dx = (4πω₀³p²/3) · (½ − 2Σ α_m m(γ_m) + Σ α_m w_{mm'} α_{m'}),
/// α_m = w_m/γ_m the cosinc coefficients of the rule.
pub fn cone_ls_error(spec: &ConeSpec, j1: &Quadrature1D) -> Result<f64> {
    if spec.n != 2 {
        return Err(Error::Unsupported(format!("least-squares error for an n = {} cone", spec.n)));
    }
    check_j1_rule(j1)?;
    let alpha: Vec<f64> = j1.weights.iter().zip(&j1.nodes).map(|(w, g)| w / g).collect();
    let mut i = 0.5;
    for (a, g) in alpha.iter().zip(&j1.nodes) {
        i -= 2.0 * a * j1_cosinc_overlap(*g);
    }
    for (a, g) in alpha.iter().zip(&j1.nodes) {
        for (b, h) in alpha.iter().zip(&j1.nodes) {
            i += a * b * cosinc_gram(*g, *h)?;
        }
    }
    Ok(4.0 * PI * spec.omega0.powi(3) * spec.pmax.powi(2) / 3.0 * i.max(0.0))
}

/// Number of equispaced angles resolving e^{ib cos θ}: b plus a margin
/// growing like b^{1/3}, rounded up to an even count.
fn angular_count(b: f64, m: usize) -> usize {
    let l = (b + m as f64 * b.cbrt().max(1.0)).ceil() as usize;
    (l.max(m).max(4) + 1) & !1
}

/// Cascaded surrogate of the n = 2 cone kernel: a symmetric rule in ω/ω₀
/// (bands up to 2πω₀(T + p_max R)), a [0, 1] rule in the normalized slowness
/// (bands 2πω₀|ω|p_max R) and an equispaced angular rule. Nodes are
/// (ω, k) with |k| ≤ |ω| p_max; target half widths are (T, X, Y).
pub fn cone_quadrature(spec: &ConeSpec, m_w: usize, m_p: usize, m_tau: usize, target: &TargetBox) -> Result<QuadratureND> {
    if spec.n != 2 {
        return Err(Error::Unsupported(format!("cone quadrature for n = {}", spec.n)));
    }
    check_target(target, 3)?;
    let (w0, p) = (spec.omega0, spec.pmax);
    let tw = target.half_widths[0];
    let rw = target.half_widths[1].hypot(target.half_widths[2]);
    let (u, a) = sym_exp_rule(2.0 * PI * w0 * (tw + p * rw), m_w)?;
    let mut coords = Vec::new();
    let mut weights = Vec::new();
    for (uj, aj) in u.iter().zip(&a) {
        if *uj == 0.0 {
            continue;
        }
        let (pp, b) = unit_exp_rule(2.0 * PI * w0 * uj.abs() * p * rw, m_p)?;
        for (pk, bk) in pp.iter().zip(&b) {
            let rad = w0 * uj.abs() * p * pk;
            let l = angular_count(2.0 * PI * rad * rw, m_tau);
            for q in 0..l {
                let th = 2.0 * PI * (q as f64 + 0.5) / l as f64;
                coords.extend_from_slice(&[w0 * uj, rad * th.cos(), rad * th.sin()]);
                weights.push(w0.powi(3) * p * p * aj * uj * uj * bk * pk * 2.0 * PI / l as f64);
            }
        }
    }
    let mut q = QuadratureND {
        weights,
        nodes: PointSet::new(3, coords)?,
        region_tag: Region::Cone(*spec),
        symmetry_group: None,
        error_profile: None,
    };
    let counts = profile_counts(&q, target, 9, 15);
    q.error_profile = Some(measure_error(&q, target, &counts, |x| k_cone(spec, x[0], &x[1..]))?);
    Ok(q)
}

/// ∫_{|k| ≤ k_max} e^{i2π k·x} dk in three dimensions, as a function of r = |x|.
pub fn ball_kernel_radial(k_max: f64, r: f64) -> f64 {
    let a = 2.0 * PI * k_max * r;
    let j = if a.abs() < 1e-2 {
        let a2 = a * a;
        1.0 - a2 / 10.0 + a2 * a2 / 280.0 - a2 * a2 * a2 / 15120.0
    } else {
        3.0 * (a.sin() - a * a.cos()) / (a * a * a)
    };
    4.0 * PI / 3.0 * k_max.powi(3) * j
}

/// Ball rule: radial [0, 1] rule (bands 2πk_max R), Gauss–Legendre in
/// cos(polar angle) and equispaced azimuths, both sized to the local band
/// 2πk_max ρ R with margins m_tau and at least m_theta azimuths.
pub fn ball_quadrature(k_max: f64, m_r: usize, m_theta: usize, m_tau: usize, target: &TargetBox) -> Result<QuadratureND> {
    positive(k_max, "k_max")?;
    check_target(target, 3)?;
    let rw = target.radius();
    let (rho, a) = unit_exp_rule(2.0 * PI * k_max * rw, m_r)?;
    let mut coords = Vec::new();
    let mut weights = Vec::new();
    for (rj, aj) in rho.iter().zip(&a) {
        let b = 2.0 * PI * k_max * rj * rw;
        let n_tau = ((b + m_tau as f64 * b.cbrt().max(1.0)) / 2.0).ceil() as usize + 1;
        let (tau, gt) = gauss_legendre(n_tau);
        let l = (2 * n_tau).max(m_theta).max(4);
        let l = (l + 1) & !1;
        for (tk, gk) in tau.iter().zip(&gt) {
            let st = (1.0 - tk * tk).sqrt();
            for q in 0..l {
                let th = 2.0 * PI * (q as f64 + 0.5) / l as f64;
                let rad = k_max * rj;
                coords.extend_from_slice(&[rad * st * th.cos(), rad * st * th.sin(), rad * tk]);
                weights.push(k_max.powi(3) * aj * rj * rj * gk * 2.0 * PI / l as f64);
            }
        }
    }
    let mut q = QuadratureND {
        weights,
        nodes: PointSet::new(3, coords)?,
        region_tag: Region::Ball { dim: 3, k_max },
        symmetry_group: None,
        error_profile: None,
    };
    let counts = profile_counts(&q, target, 11, 25);
    q.error_profile = Some(measure_error(&q, target, &counts, |x| {
        Ok(Complex64::new(ball_kernel_radial(k_max, (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()), 0.0))
    })?);
    Ok(q)
}

// ---------------------------------------------------------------------------
// Node-set comparisons

/// Largest partner distance when every weighted point of `b` is matched to a
/// distinct, equally weighted point of `a` (greedy nearest neighbour within
/// `radius`). Returns ∞ when sizes differ or some point has no partner.
pub fn multiset_match_distance(a: &PointSet, wa: &[f64], b: &PointSet, wb: &[f64], radius: f64) -> f64 {
    if a.len() != b.len() || a.dim() != b.dim() || wa.len() != a.len() || wb.len() != b.len() {
        return f64::INFINITY;
    }
    let wscale = wa.iter().fold(0.0f64, |m, w| m.max(w.abs())).max(f64::MIN_POSITIVE);
    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_by(|&i, &j| a.point(i)[0].partial_cmp(&a.point(j)[0]).unwrap_or(core::cmp::Ordering::Equal));
    let keys: Vec<f64> = order.iter().map(|&i| a.point(i)[0]).collect();
    let mut used = vec![false; a.len()];
    let mut worst = 0.0f64;
    for (q, wq) in b.iter().zip(wb) {
        let start = keys.partition_point(|k| *k < q[0] - radius);
        let mut best: Option<(usize, f64)> = None;
        for (pos, key) in keys.iter().enumerate().skip(start) {
            if *key > q[0] + radius {
                break;
            }
            let i = order[pos];
            if used[i] || (wa[i] - wq).abs() > 1e-12 * wscale {
                continue;
            }
            let d = a.point(i).iter().zip(q).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
            if d <= radius && best.map_or(true, |(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        match best {
            Some((i, d)) => {
                used[i] = true;
                worst = worst.max(d);
            }
            None => return f64::INFINITY,
        }
    }
    worst
}

/// Apply a linear map to every node.
pub fn map_nodes(nodes: &PointSet, g: &DMatrix<f64>) -> Result<PointSet> {
    let d = nodes.dim();
    if g.nrows() != d || g.ncols() != d {
        return Err(Error::Dimension(format!("{}x{} map for {d}-d nodes", g.nrows(), g.ncols())));
    }
    let mut out = Vec::with_capacity(nodes.coords().len());
    for k in nodes.iter() {
        for i in 0..d {
            out.push((0..d).map(|j| g[(i, j)] * k[j]).sum());
        }
    }
    PointSet::new(d, out)
}

/// Complex exponential integrand helper shared by the oracles in tests and the
/// verify suite: ∫_a^b f(u) du for complex f with tight tolerances.
pub fn integrate_tight<F: FnMut(f64) -> Complex64>(f: F, a: f64, b: f64, scale: f64) -> Result<Complex64> {
    integrate_c(f, a, b, IntegrationOptions { abs_tol: 1e-14 * scale.max(1e-300), rel_tol: 1e-12, max_segments: 8000 })
}
