//! Band-limited and R-limited projections: discrete Fourier representations,
//! sampling/interpolation reconstructions, and region kernels.

use alloc::{boxed::Box, format, string::String, vec, vec::Vec};
use core::cmp::Ordering;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::kernels::{self, ConeSpec, ErrorProfile, QuadratureND, TargetBox, TetraSpec, TriangleSpec};
use crate::moments::{uniform_rule, Quadrature1D};
use crate::numkit::{integrate, linspace, sinc, IntegrationOptions, PointSet, SampledField};
use crate::prolate::{rslepian_kernel_eigensystem, EigenBasis, SystemKind, MU_MIN};
use crate::{Error, Result};

/// A compact spectral region R.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    /// [−half_width, half_width].
    Interval {
        half_width: f64,
    },
    /// {0 ≤ k_x ≤ Δp, |k_y| ≤ s k_x}, optionally shifted by −phase_shift in k_x.
    Triangle(TriangleSpec),
    /// Convex hull of d+1 vertices in R^d.
    Simplex(Vec<Vec<f64>>),
    /// {0 ≤ k_z ≤ h, 0 ≤ k_y ≤ Δp k_z, |k_x| ≤ s k_y}.
    Tetrahedron(TetraSpec),
    /// Signal cone {(ω, k) : |ω| ≤ ω₀, |k| ≤ |ω| p_max}.
    Cone(ConeSpec),
    Ball {
        dim: usize,
        k_max: f64,
    },
    /// R_A = {A k : k ∈ base}.
    Transformed {
        base: Box<Region>,
        a: DMatrix<f64>,
    },
    /// Parts intersecting in measure zero (asserted by the caller).
    Union(Vec<Region>),
}

impl Region {
    pub fn dim(&self) -> usize {
        match self {
            Region::Interval { .. } => 1,
            Region::Triangle(_) => 2,
            Region::Simplex(v) => v.first().map_or(0, |p| p.len()),
            Region::Tetrahedron(_) => 3,
            Region::Cone(c) => c.n + 1,
            Region::Ball { dim, .. } => *dim,
            Region::Transformed { a, .. } => a.nrows(),
            Region::Union(parts) => parts.first().map_or(0, |p| p.dim()),
        }
    }

    /// Lebesgue measure |R|.
    pub fn measure(&self) -> f64 {
        match self {
            Region::Interval { half_width } => 2.0 * half_width,
            Region::Triangle(t) => t.area(),
            Region::Simplex(v) => kernels::simplex_volume(v).unwrap_or(f64::NAN),
            Region::Tetrahedron(t) => t.volume(),
            Region::Cone(c) => c.measure(),
            Region::Ball { dim, k_max } => unit_ball_volume(*dim) * k_max.powi(*dim as i32),
            Region::Transformed { base, a } => a.determinant().abs() * base.measure(),
            Region::Union(parts) => parts.iter().map(|p| p.measure()).sum(),
        }
    }

    /// Whether R = −R (the kernel is then real).
    pub fn is_symmetric(&self) -> bool {
        match self {
            Region::Interval { .. } | Region::Ball { .. } | Region::Cone(_) => true,
            Region::Transformed { base, .. } => base.is_symmetric(),
            _ => false,
        }
    }

    /// Membership with slack `tol` (absolute, in the region's coordinates).
    pub fn contains(&self, k: &[f64], tol: f64) -> bool {
        if k.len() != self.dim() {
            return false;
        }
        match self {
            Region::Interval { half_width } => k[0].abs() <= half_width + tol,
            Region::Triangle(t) => in_simplex(&t.vertices().iter().map(|v| v.to_vec()).collect::<Vec<_>>(), k, tol),
            Region::Simplex(v) => in_simplex(v, k, tol),
            Region::Tetrahedron(t) => in_simplex(&t.vertices().iter().map(|v| v.to_vec()).collect::<Vec<_>>(), k, tol),
            Region::Cone(c) => {
                let r = k[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
                k[0].abs() <= c.omega0 + tol && r <= k[0].abs() * c.pmax + tol
            }
            Region::Ball { k_max, .. } => k.iter().map(|v| v * v).sum::<f64>().sqrt() <= k_max + tol,
            Region::Transformed { base, a } => match a.clone().try_inverse() {
                Some(inv) => {
                    let y = &inv * DVector::from_column_slice(k);
                    base.contains(y.as_slice(), tol * inv.norm())
                }
                None => false,
            },
            Region::Union(parts) => parts.iter().any(|p| p.contains(k, tol)),
        }
    }

    pub fn transformed(self, a: DMatrix<f64>) -> Result<Region> {
        if a.nrows() != a.ncols() || a.nrows() != self.dim() {
            return Err(Error::Dimension(format!("{}x{} transform for a {}-d region", a.nrows(), a.ncols(), self.dim())));
        }
        if a.determinant().abs() <= 1e-14 {
            return Err(Error::InvalidArgument("region transform is singular".into()));
        }
        Ok(Region::Transformed { base: Box::new(self), a })
    }
}

/// Barycentric test with the slack scaled to the simplex size.
fn in_simplex(v: &[Vec<f64>], k: &[f64], tol: f64) -> bool {
    let d = k.len();
    if v.len() != d + 1 {
        return false;
    }
    let m = DMatrix::from_fn(d, d, |i, j| v[j + 1][i] - v[0][i]);
    let Some(inv) = m.try_inverse() else { return false };
    let b = &inv * DVector::from_fn(d, |i, _| k[i] - v[0][i]);
    let slack = tol * inv.norm();
    b.iter().all(|x| *x >= -slack) && 1.0 - b.sum() >= -slack
}

pub(crate) fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        0 => 1.0,
        1 => 2.0,
        d => 2.0 * PI / d as f64 * unit_ball_volume(d - 2),
    }
}

/// K(x) = ∫_R e^{i k·x} dk, by closed form where one exists and by the
/// numerical oracle otherwise (cone with n = 2).
pub fn region_kernel_exact(r: &Region, x: &[f64]) -> Result<Complex64> {
    if x.len() != r.dim() {
        return Err(Error::Dimension(format!("point of dimension {} for a {}-d region", x.len(), r.dim())));
    }
    let s = 0.5 / PI;
    match r {
        Region::Interval { half_width } => Ok(Complex64::new(2.0 * half_width * sinc(half_width * x[0]), 0.0)),
        Region::Triangle(t) => Ok(kernels::k_triangle(t, s * x[0], s * x[1])),
        Region::Simplex(v) => {
            let y: Vec<f64> = x.iter().map(|xi| s * xi).collect();
            kernels::simplex_kernel(v, &y)
        }
        Region::Tetrahedron(t) => Ok(kernels::k_tetra(t, s * x[0], s * x[1], s * x[2])),
        Region::Cone(c) => {
            let y: Vec<f64> = x[1..].iter().map(|xi| -s * xi).collect();
            kernels::k_cone(c, s * x[0], &y)
        }
        Region::Ball { dim, k_max } => {
            if *dim != 3 {
                return Err(Error::Unsupported(format!("ball kernel in {dim} dimensions")));
            }
            let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            Ok(Complex64::new(kernels::ball_kernel_radial(*k_max, s * r), 0.0))
        }
        Region::Transformed { base, a } => {
            let y = a.transpose() * nalgebra::DVector::from_column_slice(x);
            Ok(region_kernel_exact(base, y.as_slice())? * a.determinant().abs())
        }
        Region::Union(parts) => {
            if parts.is_empty() {
                return Err(Error::InvalidArgument("empty union".into()));
            }
            parts.iter().map(|p| region_kernel_exact(p, x)).sum()
        }
    }
}

impl Region {
    /// Axis-aligned bounding box (lo, hi).
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let from_points = |pts: &[Vec<f64>]| {
            let d = pts.first().map_or(0, |p| p.len());
            let mut lo = vec![f64::INFINITY; d];
            let mut hi = vec![f64::NEG_INFINITY; d];
            for p in pts {
                for i in 0..d {
                    lo[i] = lo[i].min(p[i]);
                    hi[i] = hi[i].max(p[i]);
                }
            }
            (lo, hi)
        };
        match self {
            Region::Interval { half_width } => (vec![-half_width], vec![*half_width]),
            Region::Triangle(t) => from_points(&t.vertices().iter().map(|v| v.to_vec()).collect::<Vec<_>>()),
            Region::Simplex(v) => from_points(v),
            Region::Tetrahedron(t) => from_points(&t.vertices().iter().map(|v| v.to_vec()).collect::<Vec<_>>()),
            Region::Cone(c) => {
                let r = c.omega0 * c.pmax;
                let mut lo = vec![-r; c.n + 1];
                let mut hi = vec![r; c.n + 1];
                lo[0] = -c.omega0;
                hi[0] = c.omega0;
                (lo, hi)
            }
            Region::Ball { dim, k_max } => (vec![-k_max; *dim], vec![*k_max; *dim]),
            Region::Transformed { base, a } => {
                let (lo, hi) = base.bounding_box();
                let d = lo.len();
                let corners: Vec<Vec<f64>> = (0..1usize << d)
                    .map(|mask| {
                        let c = DVector::from_fn(d, |i, _| if mask >> i & 1 == 1 { hi[i] } else { lo[i] });
                        (a * c).iter().copied().collect()
                    })
                    .collect();
                from_points(&corners)
            }
            Region::Union(parts) => {
                let boxes: Vec<Vec<f64>> = parts
                    .iter()
                    .flat_map(|p| {
                        let (lo, hi) = p.bounding_box();
                        [lo, hi]
                    })
                    .collect();
                from_points(&boxes)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Exponential-sum kernels

/// Surrogate |det B| K(Bx) ≈ Σ α_m e^{i k_m·Bx}, K(x) = ∫_R e^{ik·x}dk.
/// The weights carry the |det B| factor: α_m = |det B| w_m with w_m the
/// weights of ∫_R ≈ Σ w_m.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpSumKernel {
    pub weights: Vec<f64>,
    pub nodes: PointSet,
    pub region: Region,
    pub band: DMatrix<f64>,
    /// max |Σ w e^{i2πk·y} − K(2πy)| over a grid of its target box (in y).
    pub error_profile: Option<ErrorProfile>,
}

impl ExpSumKernel {
    pub fn new(
        weights: Vec<f64>,
        nodes: PointSet,
        region: Region,
        band: DMatrix<f64>,
        error_profile: Option<ErrorProfile>,
    ) -> Result<Self> {
        let d = nodes.dim();
        if weights.len() != nodes.len() {
            return Err(Error::Dimension(format!("{} weights for {} nodes", weights.len(), nodes.len())));
        }
        if region.dim() != d || band.nrows() != d || band.ncols() != d {
            return Err(Error::Dimension(format!("{d}-d nodes with a {}-d region", region.dim())));
        }
        if !(band.determinant().abs() > 1e-14) {
            return Err(Error::InvalidArgument("band matrix is singular".into()));
        }
        let scale = nodes.coords().iter().fold(1.0f64, |m, v| m.max(v.abs()));
        if let Some(bad) = nodes.iter().position(|k| !region.contains(k, 1e-12 * scale)) {
            return Err(Error::InvalidArgument(format!("node {bad} lies outside the region")));
        }
        Ok(ExpSumKernel { weights, nodes, region, band, error_profile })
    }

    /// Unit band: α = w.
    pub fn from_quadrature(q: &QuadratureND) -> Result<Self> {
        let d = q.dim();
        ExpSumKernel::new(q.weights.clone(), q.nodes.clone(), q.region_tag.clone(), DMatrix::identity(d, d), q.error_profile.clone())
    }

    /// A symmetric 1D rule (Σα ≈ 2B) as a kernel on [−1, 1] with band B.
    pub fn from_rule_1d(q: &Quadrature1D) -> Result<Self> {
        if !q.symmetric {
            return Err(Error::InvalidArgument("need a symmetric rule".into()));
        }
        ExpSumKernel::new(
            q.weights.clone(),
            PointSet::new(1, q.nodes.clone())?,
            Region::Interval { half_width: 1.0 },
            DMatrix::from_element(1, 1, q.band),
            None,
        )
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.nodes.dim()
    }

    pub fn det_band(&self) -> f64 {
        self.band.determinant().abs()
    }

    /// w_m = α_m / |det B|.
    pub fn unit_weights(&self) -> Vec<f64> {
        let d = self.det_band();
        self.weights.iter().map(|a| a / d).collect()
    }

    pub fn with_band(&self, b: DMatrix<f64>) -> Result<Self> {
        let w = self.unit_weights();
        let det = b.determinant().abs();
        ExpSumKernel::new(w.iter().map(|v| v * det).collect(), self.nodes.clone(), self.region.clone(), b, self.error_profile.clone())
    }

    /// Kernel of R_A = A R: nodes A k_m, weights |det A| α_m. The error
    /// profile is dropped (its verification set is not a box any more).
    pub fn transformed(&self, a: &DMatrix<f64>) -> Result<Self> {
        let d = self.dim();
        if a.nrows() != d || a.ncols() != d {
            return Err(Error::Dimension(format!("{}x{} transform for {d}-d nodes", a.nrows(), a.ncols())));
        }
        let det = a.determinant().abs();
        let mut coords = Vec::with_capacity(self.nodes.coords().len());
        for k in self.nodes.iter() {
            coords.extend((a * DVector::from_column_slice(k)).iter());
        }
        ExpSumKernel::new(
            self.weights.iter().map(|w| w * det).collect(),
            PointSet::new(d, coords)?,
            self.region.clone().transformed(a.clone())?,
            self.band.clone(),
            None,
        )
    }

    /// Σ α_m e^{i k_m·Bx}.
    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let bx = &self.band * DVector::from_column_slice(x);
        self.weights
            .iter()
            .zip(self.nodes.iter())
            .map(|(a, k)| Complex64::from_polar(*a, k.iter().zip(bx.iter()).map(|(u, v)| u * v).sum()))
            .sum()
    }

    /// Measure max |Σ w e^{i2πk·y} − K(2πy)| on a grid of `target` (in y) and
    /// record it as the error profile.
    pub fn measure_profile(&mut self, target: &TargetBox, counts: &[usize]) -> Result<&ErrorProfile> {
        if target.half_widths.len() != self.dim() {
            return Err(Error::Dimension("target box dimension".into()));
        }
        let grid = kernels::target_grid(target, counts)?;
        let w = self.unit_weights();
        let mut worst: f64 = 0.0;
        for y in grid.iter() {
            let mut s = Complex64::new(0.0, 0.0);
            for (wm, k) in w.iter().zip(self.nodes.iter()) {
                s += Complex64::from_polar(*wm, 2.0 * PI * k.iter().zip(y).map(|(a, b)| a * b).sum::<f64>());
            }
            let y2: Vec<f64> = y.iter().map(|v| 2.0 * PI * v).collect();
            worst = worst.max((s - region_kernel_exact(&self.region, &y2)?).norm());
        }
        self.error_profile = Some(ErrorProfile { max_error: worst, target: target.clone(), grid: counts.to_vec() });
        Ok(self.error_profile.as_ref().unwrap())
    }

    /// Bound on max |Σα e^{i2πk·Bx} − |det B|K(2πBx)| over the box |x_i| ≤ h_i,
    /// from the recorded profile; fails if B·box is not inside the target.
    pub fn error_bound_for_band(&self, b: &DMatrix<f64>, half_widths: &[f64]) -> Result<f64> {
        let prof = self.error_profile.as_ref().ok_or_else(|| Error::InvalidArgument("kernel has no recorded error profile".into()))?;
        if half_widths.len() != self.dim() {
            return Err(Error::Dimension("half widths".into()));
        }
        for i in 0..self.dim() {
            let reach: f64 = (0..self.dim()).map(|j| b[(i, j)].abs() * half_widths[j]).sum();
            let t = prof.target.half_widths[i];
            if reach > t * (1.0 + 1e-12) + 1e-300 {
                return Err(Error::InvalidArgument(format!(
                    "kernel verification set does not cover the required set (axis {i}: {reach} > {t})"
                )));
            }
        }
        Ok(b.determinant().abs() * prof.max_error)
    }

    pub fn kernel_error_bound(&self, half_widths: &[f64]) -> Result<f64> {
        self.error_bound_for_band(&self.band, half_widths)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult {
    pub field: SampledField,
    pub error_bound: f64,
    pub provenance: Vec<String>,
}

// ---------------------------------------------------------------------------
// One dimension

/// ∫_{−T}^{T} f(τ)·2B sinc(2πB(t − τ)) dτ by adaptive quadrature (absolute
/// tolerance 1e-10); the reference for all 1D projection checks.
pub fn bandlimited_projection_oracle<F: FnMut(f64) -> f64>(mut f: F, support: f64, b: f64, t: f64) -> Result<f64> {
    if !(support > 0.0) || !(b > 0.0) {
        return Err(Error::InvalidArgument("need T > 0 and B > 0".into()));
    }
    // panels of about half a kernel oscillation keep the adaptive rule honest
    let panels = ((4.0 * b * support).ceil() as usize).clamp(1, 4000);
    let h = 2.0 * support / panels as f64;
    let opts = IntegrationOptions { abs_tol: 1e-10 / panels as f64, rel_tol: 0.0, max_segments: 2000 };
    let mut acc = 0.0;
    for p in 0..panels {
        let lo = -support + p as f64 * h;
        let hi = if p + 1 == panels { support } else { lo + h };
        acc += integrate(|tau| f(tau) * 2.0 * b * sinc(2.0 * PI * b * (t - tau)), lo, hi, opts)?;
    }
    Ok(acc)
}

fn check_symmetric_rule(q: &Quadrature1D, b: f64) -> Result<()> {
    if !q.symmetric {
        return Err(Error::InvalidArgument("need a symmetric rule".into()));
    }
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::InvalidArgument("band must be positive".into()));
    }
    Ok(())
}

fn match_points_1d(points: &PointSet, expected: &[f64]) -> Result<()> {
    if points.dim() != 1 || points.len() != expected.len() {
        return Err(Error::Dimension(format!("{} samples for {} nodes", points.len(), expected.len())));
    }
    for (p, e) in points.coords().iter().zip(expected) {
        if (p - e).abs() > 1e-10 * e.abs().max(1.0) {
            return Err(Error::InvalidArgument(format!("sample at {p} does not match node {e}")));
        }
    }
    Ok(())
}

/// Σ α_m f̂(Bω_m) e^{i2πBω_m t}, with f̂ sampled at Bω_m.
pub fn discrete_fourier_repr_1d(fhat_at_nodes: &SampledField, q: &Quadrature1D, b: f64, t: f64) -> Result<Complex64> {
    check_symmetric_rule(q, b)?;
    let expected: Vec<f64> = q.nodes.iter().map(|w| b * w).collect();
    match_points_1d(&fhat_at_nodes.points, &expected)?;
    Ok(q.weights
        .iter()
        .zip(&q.nodes)
        .zip(&fhat_at_nodes.values)
        .map(|((a, w), fh)| fh * Complex64::from_polar(*a, 2.0 * PI * b * w * t))
        .sum())
}

/// ε_B(2πx) = Σ α_m e^{i2πBω_m x} − 2B sinc(2πBx).
pub fn sinc_rule_error(q: &Quadrature1D, b: f64, x: f64) -> Complex64 {
    let s: Complex64 = q.weights.iter().zip(&q.nodes).map(|(a, w)| Complex64::from_polar(*a, 2.0 * PI * b * w * x)).sum();
    s - 2.0 * b * sinc(2.0 * PI * b * x)
}

/// max |ε_B(2πx)| over |x| ≤ x_max on a grid of 64 points per unit of
/// B·max|ω| (and at least 401 points).
pub fn max_sinc_rule_error(q: &Quadrature1D, b: f64, x_max: f64) -> f64 {
    let wmax = q.nodes.iter().fold(1.0f64, |m, w| m.max(w.abs()));
    let n = ((128.0 * b * wmax * x_max).ceil() as usize).max(400) + 1;
    linspace(-x_max, x_max, n).iter().fold(0.0, |m, x| m.max(sinc_rule_error(q, b, *x).norm()))
}

/// 2T·max|f|·max_{|t| ≤ 2T} |ε_B(2πt)|.
pub fn discrete_fourier_bound_1d(q: &Quadrature1D, b: f64, support: f64, max_f: f64) -> f64 {
    2.0 * support * max_f * max_sinc_rule_error(q, b, 2.0 * support)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NyquistReport {
    pub band: f64,
    pub m: usize,
    pub k: usize,
    /// (l, f_B(l/2B), 2B f_l)
    pub lattice: Vec<(i64, Complex64, f64)>,
    /// ε_f(l/2B) = Σ_k f_k ε_B(2π(k − l)/(2B)).
    pub epsilon_f: Vec<Complex64>,
    pub max_error: f64,
}

/// Delta train Σ f_k δ(t − k/2B) (T = (2K+1)/(4B)) projected with the
/// uniform rule: checks f_B(l/2B) = 2B f_l. Band B = 1.
pub fn nyquist_delta_train_check(f_k: &[f64], m: usize, k: usize) -> Result<NyquistReport> {
    nyquist_delta_train_check_band(f_k, m, k, 1.0)
}

pub fn nyquist_delta_train_check_band(f_k: &[f64], m: usize, k: usize, b: f64) -> Result<NyquistReport> {
    if m < k {
        return Err(Error::InvalidArgument(format!("M = {m} < K = {k}: the lattice condition |l − k| ≤ 2M fails")));
    }
    if f_k.len() != 2 * k + 1 {
        return Err(Error::Dimension(format!("{} samples for K = {k}", f_k.len())));
    }
    if !(b > 0.0) {
        return Err(Error::InvalidArgument("band must be positive".into()));
    }
    let q = uniform_rule(b, m);
    let ks: Vec<f64> = (0..=2 * k).map(|i| i as f64 - k as f64).collect();
    let fhat: Vec<Complex64> = q
        .nodes
        .iter()
        .map(|w| ks.iter().zip(f_k).map(|(kk, f)| Complex64::from_polar(*f, -2.0 * PI * b * w * kk / (2.0 * b))).sum())
        .collect();
    let mut lattice = Vec::with_capacity(ks.len());
    let mut eps = Vec::with_capacity(ks.len());
    let mut max_error: f64 = 0.0;
    for (i, l) in ks.iter().enumerate() {
        let t = l / (2.0 * b);
        let v: Complex64 =
            q.weights.iter().zip(&q.nodes).zip(&fhat).map(|((a, w), fh)| fh * Complex64::from_polar(*a, 2.0 * PI * b * w * t)).sum();
        let expected = 2.0 * b * f_k[i];
        max_error = max_error.max((v - expected).norm());
        lattice.push((*l as i64, v, expected));
        eps.push(ks.iter().zip(f_k).map(|(kk, f)| sinc_rule_error(&q, b, (kk - l) / (2.0 * b)) * f).sum());
    }
    Ok(NyquistReport { band: b, m, k, lattice, epsilon_f: eps, max_error })
}

// ---------------------------------------------------------------------------
// Fourier transforms of sampled fields

/// Sorted distinct coordinates per axis of a tensor grid and the multi-index
/// of every point; None if the points do not form a full tensor grid.
fn tensor_axes(p: &PointSet) -> Option<(Vec<Vec<f64>>, Vec<Vec<usize>>)> {
    let d = p.dim();
    let scale = p.coords().iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-10 * scale;
    let mut axes = Vec::with_capacity(d);
    for i in 0..d {
        let mut v: Vec<f64> = p.iter().map(|x| x[i]).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
        v.dedup_by(|a, b| (*a - *b).abs() <= tol);
        axes.push(v);
    }
    if axes.iter().map(|a| a.len()).product::<usize>() != p.len() {
        return None;
    }
    let mut seen = vec![false; p.len()];
    let mut idx = Vec::with_capacity(p.len());
    for x in p.iter() {
        let mut multi = Vec::with_capacity(d);
        let mut flat = 0;
        for i in 0..d {
            let a = &axes[i];
            let j = a.partition_point(|v| *v < x[i] - tol);
            if j >= a.len() || (a[j] - x[i]).abs() > tol {
                return None;
            }
            multi.push(j);
            flat = flat * a.len() + j;
        }
        if core::mem::replace(&mut seen[flat], true) {
            return None;
        }
        idx.push(multi);
    }
    Some((axes, idx))
}

fn trapezoid_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|i| {
            let lo = if i == 0 { x[0] } else { x[i - 1] };
            let hi = if i + 1 == n { x[n - 1] } else { x[i + 1] };
            0.5 * (hi - lo)
        })
        .collect()
}

/// f̂(ξ) = ∫ f(x) e^{−i2πξ·x} dx by the tensor trapezoidal rule over the
/// sample grid. The second value estimates the discretization error as the
/// difference to the every-other-point subgrid (None if some axis has an
/// even count).
pub fn fourier_transform_samples(f: &SampledField, freqs: &PointSet) -> Result<(Vec<Complex64>, Option<f64>)> {
    if f.points.dim() != freqs.dim() {
        return Err(Error::Dimension("field and frequency dimensions differ".into()));
    }
    let (axes, idx) = tensor_axes(&f.points).ok_or_else(|| Error::InvalidArgument("samples do not form a tensor grid".into()))?;
    let wf: Vec<Vec<f64>> = axes.iter().map(|a| trapezoid_weights(a)).collect();
    let coarse_ok = axes.iter().all(|a| a.len() >= 3 && a.len() % 2 == 1);
    let wc: Vec<Vec<f64>> = axes
        .iter()
        .map(|a| {
            let sub: Vec<f64> = a.iter().step_by(2).copied().collect();
            let ws = trapezoid_weights(&sub);
            (0..a.len()).map(|j| if j % 2 == 0 { ws[j / 2] } else { 0.0 }).collect()
        })
        .collect();
    let mut out = Vec::with_capacity(freqs.len());
    let mut est: f64 = 0.0;
    for xi in freqs.iter() {
        let mut full = Complex64::new(0.0, 0.0);
        let mut coarse = Complex64::new(0.0, 0.0);
        for ((x, v), m) in f.points.iter().zip(&f.values).zip(&idx) {
            let e = v * Complex64::from_polar(1.0, -2.0 * PI * x.iter().zip(xi).map(|(a, b)| a * b).sum::<f64>());
            full += e * m.iter().enumerate().map(|(i, j)| wf[i][*j]).product::<f64>();
            if coarse_ok {
                coarse += e * m.iter().enumerate().map(|(i, j)| wc[i][*j]).product::<f64>();
            }
        }
        est = est.max((full - coarse).norm());
        out.push(full);
    }
    Ok((out, coarse_ok.then_some(est)))
}

fn field_box(p: &PointSet) -> (Vec<f64>, Vec<f64>) {
    let d = p.dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for x in p.iter() {
        for i in 0..d {
            lo[i] = lo[i].min(x[i]);
            hi[i] = hi[i].max(x[i]);
        }
    }
    (lo, hi)
}

/// Σ α_m e^{i2πBk_m·x} f̂(Bk_m), f̂ from the samples by the trapezoidal rule.
/// error_bound = |X|·max|f|·max_{X−X}|ε_K(2π·)| + Σ|α|·(f̂ discretization
/// estimate), where X is the sample grid's bounding box.
pub fn rlimited_discrete_fourier(f: &SampledField, k: &ExpSumKernel, x: &PointSet) -> Result<ProjectionResult> {
    let d = k.dim();
    if f.points.dim() != d || x.dim() != d {
        return Err(Error::Dimension("field, kernel and evaluation dimensions differ".into()));
    }
    let mut freq = Vec::with_capacity(k.len() * d);
    for km in k.nodes.iter() {
        freq.extend((&k.band * DVector::from_column_slice(km)).iter());
    }
    let freqs = PointSet::new(d, freq)?;
    let (fhat, fhat_err) = fourier_transform_samples(f, &freqs)?;
    let values: Vec<Complex64> = x
        .iter()
        .map(|p| {
            freqs
                .iter()
                .zip(&k.weights)
                .zip(&fhat)
                .map(|((xi, a), fh)| fh * Complex64::from_polar(*a, 2.0 * PI * xi.iter().zip(p).map(|(u, v)| u * v).sum::<f64>()))
                .sum()
        })
        .collect();
    let (lo, hi) = field_box(&f.points);
    let (xlo, xhi) = field_box(x);
    let hw: Vec<f64> = (0..d).map(|i| (hi[i] - lo[i]).max(xhi[i] - lo[i]).max(hi[i] - xlo[i])).collect();
    let measure: f64 = (0..d).map(|i| hi[i] - lo[i]).product();
    let eps = k.kernel_error_bound(&hw)?;
    let asum: f64 = k.weights.iter().map(|a| a.abs()).sum();
    let mut provenance = vec![
        format!("discrete Fourier representation with {} kernel nodes", k.len()),
        format!("kernel error bound {eps:e} over |x_i| <= {hw:?}"),
    ];
    let fh_term = match fhat_err {
        Some(e) => {
            provenance.push(format!("trapezoidal Fourier transform, estimated error {e:e}"));
            asum * e
        }
        None => {
            provenance.push("trapezoidal Fourier transform, error not estimated (even grid counts)".into());
            0.0
        }
    };
    Ok(ProjectionResult {
        field: SampledField::new(x.clone(), values, "rlimited_discrete_fourier")?,
        error_bound: measure * f.max_abs() * eps + fh_term,
        provenance,
    })
}

// ---------------------------------------------------------------------------
// Sampling and interpolation

/// Which function the samples come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SampleSource {
    /// Samples of the projection f_B at the nodes.
    #[default]
    Projected,
    /// Samples of the compactly supported f itself.
    Compact,
}

/// How the node coefficients are recovered from projected samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Regularization {
    /// R_m(k) ≈ |det B| K(2πB(k − k_m)).
    #[default]
    KernelRegularized,
    /// R_m(k) = Σ_{μ_n ≥ μ_min} μ_n^{−1} φ_n(k_m) φ_n(k), in the symmetrized form.
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingOptions {
    pub source: SampleSource,
    pub regularization: Regularization,
    pub mu_min: f64,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        SamplingOptions { source: SampleSource::Projected, regularization: Regularization::KernelRegularized, mu_min: MU_MIN }
    }
}

/// Node coefficients g with f_B(x) ≈ Σ_m w_m G(x, k_m) g_m, where
/// G(x, k) = |det B| K(2πB(x − k)).
fn node_coefficients(basis: &EigenBasis, y: &[Complex64], opts: &SamplingOptions, reg: Regularization) -> Result<Vec<Complex64>> {
    let n = basis.nodes().len();
    let w = basis.weights();
    match (opts.source, reg) {
        (SampleSource::Compact, _) => Ok(y.to_vec()),
        (SampleSource::Projected, Regularization::KernelRegularized) => {
            let mut g = vec![Complex64::new(0.0, 0.0); n];
            for l in 0..n {
                for m in 0..n {
                    g[l] += basis.kernel(basis.nodes().point(l), basis.nodes().point(m))? * w[m] * y[m];
                }
            }
            Ok(g)
        }
        (SampleSource::Projected, Regularization::Spectral) => {
            if basis.kind != SystemKind::KernelSystem {
                return Err(Error::InvalidArgument("spectral regularization needs a kernel-system basis".into()));
            }
            let psi = basis.symmetrized_vectors();
            let c = DVector::from_fn(n, |i, _| y[i] * w[i].sqrt());
            let mut acc = DVector::<Complex64>::zeros(n);
            for (j, mu) in basis.eigenvalues_mu.iter().enumerate() {
                if *mu < opts.mu_min {
                    continue;
                }
                let col = psi.column(j);
                let coef = col.adjoint() * &c;
                acc += col * (coef[(0, 0)] / *mu);
            }
            Ok((0..n).map(|i| acc[i] / w[i].sqrt()).collect())
        }
    }
}

/// C of the sampling error bound: Σ_{μ_n ≥ μ_min} 2√|det B| μ_n^{−3/2}
/// [Σ w + 4√|det B| μ_n^{−1/2} ε].
pub fn sampling_error_constant(basis: &EigenBasis, eps: f64, mu_min: f64) -> f64 {
    let sd = basis.det_band().sqrt();
    let sw: f64 = basis.weights().iter().sum();
    basis.eigenvalues_mu.iter().filter(|m| **m >= mu_min).map(|m| 2.0 * sd * m.powf(-1.5) * (sw + 4.0 * sd * m.powf(-0.5) * eps)).sum()
}

fn check_basis_1d(basis: &EigenBasis, q: &Quadrature1D, b: f64) -> Result<()> {
    let ok = basis.nodes().dim() == 1
        && basis.nodes().len() == q.len()
        && basis.nodes().coords().iter().zip(&q.nodes).all(|(a, c)| (a - c).abs() <= 1e-12)
        && basis.weights().iter().zip(&q.weights).all(|(w, a)| (w - a / b).abs() <= 1e-12 * (a / b).abs().max(1e-300))
        && (basis.band[(0, 0)] - b).abs() <= 1e-12 * b;
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidArgument("basis was not built from this rule and band".into()))
    }
}

/// f_B(t) ≈ Σ_k w_k 2B sinc(2πB(t − ω_k)) g_k from samples at the rule's nodes
/// (support normalized to [−1, 1]); default options.
pub fn sampling_interpolation_1d(f_at_nodes: &SampledField, q: &Quadrature1D, b: f64, basis: &EigenBasis, t: f64) -> Result<Complex64> {
    sampling_interpolation_1d_with(f_at_nodes, q, b, basis, t, &SamplingOptions::default())
}

pub fn sampling_interpolation_1d_with(
    f_at_nodes: &SampledField,
    q: &Quadrature1D,
    b: f64,
    basis: &EigenBasis,
    t: f64,
    opts: &SamplingOptions,
) -> Result<Complex64> {
    check_symmetric_rule(q, b)?;
    check_basis_1d(basis, q, b)?;
    match_points_1d(&f_at_nodes.points, &q.nodes)?;
    let g = node_coefficients(basis, &f_at_nodes.values, opts, opts.regularization)?;
    let w = basis.weights();
    let mut acc = Complex64::new(0.0, 0.0);
    for (m, om) in q.nodes.iter().enumerate() {
        acc += basis.kernel(&[t], &[*om])? * w[m] * g[m];
    }
    Ok(acc)
}

/// The same reconstruction for support [−T, T]: samples at Tω_m, rule and basis
/// for band B·T, and f_B(t) = g_{BT}(t/T) with g(s) = f(Ts).
pub fn sampling_interpolation_1d_scaled(
    f_at_nodes: &SampledField,
    q: &Quadrature1D,
    b: f64,
    support: f64,
    basis: &EigenBasis,
    t: f64,
    opts: &SamplingOptions,
) -> Result<Complex64> {
    if !(support > 0.0) || !support.is_finite() {
        return Err(Error::InvalidArgument("support half-width must be positive".into()));
    }
    let coords: Vec<f64> = f_at_nodes.points.coords().iter().map(|x| x / support).collect();
    let scaled = SampledField::new(PointSet::new(1, coords)?, f_at_nodes.values.clone(), f_at_nodes.label.clone())?;
    sampling_interpolation_1d_with(&scaled, q, b * support, basis, t / support, opts)
}

/// C·max|f_B|·max_{|t| ≤ 2}|ε_B(2πt)| for the 1D sampling reconstruction.
pub fn sampling_bound_1d(basis: &EigenBasis, q: &Quadrature1D, b: f64, max_fb: f64, mu_min: f64) -> f64 {
    let eps = max_sinc_rule_error(q, b, 2.0);
    sampling_error_constant(basis, eps, mu_min) * max_fb * eps
}

/// R_A-limited reconstruction from samples at A k_m:
/// f_A(x) ≈ Σ_m w_m |det B| K(2πAᵀ(x − Ak_m)) g_m, B = AᵀA.
pub fn ra_sampling_interpolation(
    f_at_transformed_nodes: &SampledField,
    k: &ExpSumKernel,
    a: &DMatrix<f64>,
    basis: &EigenBasis,
    x: &PointSet,
) -> Result<ProjectionResult> {
    ra_sampling_interpolation_with(f_at_transformed_nodes, k, a, basis, x, &SamplingOptions::default())
}

pub fn ra_sampling_interpolation_with(
    samples: &SampledField,
    k: &ExpSumKernel,
    a: &DMatrix<f64>,
    basis: &EigenBasis,
    x: &PointSet,
    opts: &SamplingOptions,
) -> Result<ProjectionResult> {
    let d = k.dim();
    if a.nrows() != d || a.ncols() != d || x.dim() != d || samples.points.dim() != d {
        return Err(Error::Dimension("transform, kernel, samples and points must share a dimension".into()));
    }
    if !(a.determinant().abs() > 1e-14) {
        return Err(Error::InvalidArgument("transform is singular".into()));
    }
    let b = a.transpose() * a;
    let bscale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let w = k.unit_weights();
    let same_nodes = basis.nodes().len() == k.len()
        && basis.nodes().coords().iter().zip(k.nodes.coords()).all(|(u, v)| (u - v).abs() <= 1e-12 * v.abs().max(1.0))
        && basis.weights().iter().zip(&w).all(|(u, v)| (u - v).abs() <= 1e-12 * v.abs());
    let same_band = basis.band.nrows() == d && (&basis.band - &b).iter().all(|v| v.abs() <= 1e-10 * bscale);
    if !same_nodes || !same_band {
        return Err(Error::InvalidArgument("basis was not built for this kernel and B = AᵀA".into()));
    }
    // samples in node order
    let ak: Vec<DVector<f64>> = k.nodes.iter().map(|km| a * DVector::from_column_slice(km)).collect();
    let y = gather_samples(samples, &ak)?;
    let det_b = b.determinant().abs();
    let g_of = |reg| node_coefficients(basis, &y, opts, reg);
    let eval = |g: &[Complex64], p: &[f64]| -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, akm) in ak.iter().enumerate() {
            let diff = DVector::from_fn(d, |i, _| p[i] - akm[i]);
            let yv = a.transpose() * diff * (2.0 * PI);
            acc += basis.kernel_at(yv.as_slice(), det_b)? * w[m] * g[m];
        }
        Ok(acc)
    };
    let g = g_of(opts.regularization)?;
    let values: Vec<Complex64> = x.iter().map(|p| eval(&g, p)).collect::<Result<_>>()?;

    let mut provenance = vec![format!("sampling reconstruction, {} nodes, {:?} samples, {:?}", k.len(), opts.source, opts.regularization)];
    // bound: kernel error over R − R in the B-scaled variable
    let (lo, hi) = k.region.bounding_box();
    let hw: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| h - l).collect();
    let mut bound = match k.error_bound_for_band(&b, &hw) {
        Ok(eps) => sampling_error_constant(basis, eps, opts.mu_min) * samples.max_abs() * eps,
        Err(e) => {
            provenance.push(format!("no kernel error bound: {e}"));
            f64::INFINITY
        }
    };
    if opts.source == SampleSource::Projected
        && opts.regularization == Regularization::KernelRegularized
        && basis.kind == SystemKind::KernelSystem
        && bound.is_finite()
    {
        // deviation of the regularized form from the spectral one
        let gs = g_of(Regularization::Spectral)?;
        let mut dev: f64 = 0.0;
        for (p, v) in x.iter().zip(&values) {
            dev = dev.max((eval(&gs, p)? - v).norm());
        }
        provenance.push(format!("kernel regularization deviates from the spectral form by {dev:e}"));
        bound += dev;
    }
    Ok(ProjectionResult { field: SampledField::new(x.clone(), values, "ra_sampling_interpolation")?, error_bound: bound, provenance })
}

/// Values of `samples` at the given locations (nearest point within 1e-9
/// relative).
fn gather_samples(samples: &SampledField, at: &[DVector<f64>]) -> Result<Vec<Complex64>> {
    let scale = samples.points.coords().iter().fold(1.0f64, |m, v| m.max(v.abs()));
    at.iter()
        .map(|p| {
            samples
                .points
                .iter()
                .position(|s| s.iter().zip(p.iter()).all(|(u, v)| (u - v).abs() <= 1e-9 * scale))
                .map(|i| samples.values[i])
                .ok_or_else(|| Error::InvalidArgument(format!("no sample at {:?}", p.as_slice())))
        })
        .collect()
}

/// K_Σ(x) = Σ_l |det A_l| K_l(2πA_lᵀx).
pub fn patched_kernel(parts: &[(DMatrix<f64>, Region)], x: &[f64]) -> Result<Complex64> {
    if parts.is_empty() {
        return Err(Error::InvalidArgument("no parts".into()));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (a, r) in parts {
        let y = a.transpose() * DVector::from_column_slice(x) * (2.0 * PI);
        acc += region_kernel_exact(r, y.as_slice())? * a.determinant().abs();
    }
    Ok(acc)
}

/// Σ_l Σ_m |det A_l| w_m e^{i2πA_l k_m·x}: the surrogate of `patched_kernel`.
pub fn patched_kernel_surrogate(parts: &[(DMatrix<f64>, ExpSumKernel)], x: &[f64]) -> Result<Complex64> {
    if parts.is_empty() {
        return Err(Error::InvalidArgument("no parts".into()));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (a, k) in parts {
        let det = a.determinant().abs();
        let atx = a.transpose() * DVector::from_column_slice(x);
        for (w, km) in k.unit_weights().iter().zip(k.nodes.iter()) {
            acc += Complex64::from_polar(det * w, 2.0 * PI * km.iter().zip(atx.iter()).map(|(u, v)| u * v).sum::<f64>());
        }
    }
    Ok(acc)
}

/// ∪_l {A_l k_{m,l}}, in part order.
pub fn patched_sample_locations(parts: &[(DMatrix<f64>, ExpSumKernel)]) -> Result<PointSet> {
    let d = parts.first().map(|p| p.1.dim()).ok_or_else(|| Error::InvalidArgument("no parts".into()))?;
    let mut coords = Vec::new();
    for (a, k) in parts {
        for km in k.nodes.iter() {
            coords.extend((a * DVector::from_column_slice(km)).iter());
        }
    }
    PointSet::new(d, coords)
}

/// Sum of per-part R_{A_l}-limited reconstructions; each part gets its own
/// kernel-system basis for B_l = A_lᵀA_l. The parts are asserted (not
/// checked) to overlap in measure zero.
pub fn patched_projection(parts: &[(DMatrix<f64>, ExpSumKernel)], f: &SampledField, x: &PointSet) -> Result<ProjectionResult> {
    patched_projection_with(parts, f, x, &SamplingOptions::default())
}

pub fn patched_projection_with(
    parts: &[(DMatrix<f64>, ExpSumKernel)],
    f: &SampledField,
    x: &PointSet,
    opts: &SamplingOptions,
) -> Result<ProjectionResult> {
    if parts.is_empty() {
        return Err(Error::InvalidArgument("no parts".into()));
    }
    let mut values = vec![Complex64::new(0.0, 0.0); x.len()];
    let mut bound = 0.0;
    let mut provenance = vec![format!("{} parts, asserted to intersect in measure zero", parts.len())];
    for (l, (a, k)) in parts.iter().enumerate() {
        let basis = rslepian_kernel_eigensystem(k, &(a.transpose() * a))?;
        let r = ra_sampling_interpolation_with(f, k, a, &basis, x, opts)?;
        for (v, p) in values.iter_mut().zip(&r.field.values) {
            *v += p;
        }
        bound += r.error_bound;
        provenance.extend(r.provenance.into_iter().map(|s| format!("part {l}: {s}")));
    }
    Ok(ProjectionResult { field: SampledField::new(x.clone(), values, "patched_projection")?, error_bound: bound, provenance })
}
