//! Special functions, point sets, sampled fields and the small numerical
//! toolbox (Gauss rules, adaptive integration, divided differences) that the
//! other modules build on.

use alloc::{format, string::String, vec, vec::Vec};
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64;

use crate::{Error, Result};

pub type ComplexValue = Complex64;

/// Below this magnitude the removable singularities are evaluated by Taylor
/// polynomials of degree 10.
pub const SERIES_THRESHOLD: f64 = 1e-3;

pub(crate) const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// sin(x)/x, with sinc(0) = 1.
pub fn sinc(x: f64) -> f64 {
    if x.abs() <= SERIES_THRESHOLD {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0 * (1.0 - x2 / 110.0))))
    } else {
        x.sin() / x
    }
}

/// (1 - cos x)/x, odd, with cosinc(0) = 0.
pub fn cosinc(x: f64) -> f64 {
    if x.abs() <= SERIES_THRESHOLD {
        let x2 = x * x;
        x / 2.0 * (1.0 - x2 / 12.0 * (1.0 - x2 / 30.0 * (1.0 - x2 / 56.0 * (1.0 - x2 / 90.0))))
    } else {
        (1.0 - x.cos()) / x
    }
}

/// (e^z - 1)/z, with expc(0) = 1. Note expc(ix) = sinc(x) + i cosinc(x).
pub fn expc(z: Complex64) -> Complex64 {
    if z.norm() <= SERIES_THRESHOLD {
        // sum_{k=0}^{10} z^k/(k+1)!  (Horner)
        let mut acc = Complex64::new(1.0, 0.0);
        for k in (1..=10).rev() {
            acc = Complex64::new(1.0, 0.0) + acc * z / (k as f64 + 1.0);
        }
        acc
    } else {
        (z.exp() - 1.0) / z
    }
}

/// sin(z)/z continued to the complex plane.
pub fn sinc_c(z: Complex64) -> Complex64 {
    if z.norm() <= SERIES_THRESHOLD {
        let z2 = z * z;
        Complex64::new(1.0, 0.0) - z2 / 6.0 * (1.0 - z2 / 20.0 * (1.0 - z2 / 42.0 * (1.0 - z2 / 72.0 * (1.0 - z2 / 110.0))))
    } else {
        z.sin() / z
    }
}

/// (1 - cos z)/z continued to the complex plane.
pub fn cosinc_c(z: Complex64) -> Complex64 {
    if z.norm() <= SERIES_THRESHOLD {
        let z2 = z * z;
        z / 2.0 * (1.0 - z2 / 12.0 * (1.0 - z2 / 30.0 * (1.0 - z2 / 56.0 * (1.0 - z2 / 90.0))))
    } else {
        (1.0 - z.cos()) / z
    }
}

/// Bessel function of the first kind J_n for integer order, evaluated by the
/// trapezoidal rule on its periodic integral representation (spectrally
/// accurate once the number of points exceeds |x| by a margin).
pub fn bessel_jn(n: i32, x: f64) -> f64 {
    let npts = (2.0 * x.abs()) as usize + 64;
    let mut acc = 0.0;
    for k in 0..npts {
        let th = 2.0 * PI * (k as f64) / (npts as f64);
        acc += (n as f64 * th - x * th.sin()).cos();
    }
    acc / npts as f64
}

pub fn bessel_j0(x: f64) -> f64 {
    bessel_jn(0, x)
}

pub fn bessel_j1(x: f64) -> f64 {
    bessel_jn(1, x)
}

/// ln(n!) by direct summation (exact enough for the moment tables).
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// n-point Gauss-Legendre rule on [-1, 1], nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

// ---------------------------------------------------------------------------
// Divided differences of entire functions

const DD_CLUSTER: f64 = 0.1;
const DD_CONTOUR_POINTS: usize = 32;

/// Divided difference f[p_0, ..., p_n] of an entire function, with repeated
/// or clustered points allowed (confluent limits are taken automatically).
///
/// Well-separated points use the recursive definition; clusters use a
/// trapezoidal contour integral on a unit circle around the cluster.
pub fn divided_difference<F: Fn(Complex64) -> Complex64>(f: &F, pts: &[Complex64]) -> Complex64 {
    let n = pts.len();
    if n == 1 {
        return f(pts[0]);
    }
    let (mut bi, mut bj, mut best) = (0, 1, -1.0);
    for i in 0..n {
        for j in i + 1..n {
            let d = (pts[i] - pts[j]).norm();
            if d > best {
                best = d;
                bi = i;
                bj = j;
            }
        }
    }
    if best <= DD_CLUSTER {
        let center = pts.iter().sum::<Complex64>() / n as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..DD_CONTOUR_POINTS {
            let th = 2.0 * PI * (k as f64 + 0.5) / DD_CONTOUR_POINTS as f64;
            let e = Complex64::new(th.cos(), th.sin());
            let z = center + e;
            let mut den = Complex64::new(1.0, 0.0);
            for p in pts {
                den *= z - p;
            }
            acc += f(z) * e / den;
        }
        return acc / DD_CONTOUR_POINTS as f64;
    }
    let without = |skip: usize| -> Vec<Complex64> { pts.iter().enumerate().filter(|(k, _)| *k != skip).map(|(_, p)| *p).collect() };
    let a = divided_difference(f, &without(bi));
    let b = divided_difference(f, &without(bj));
    (a - b) / (pts[bj] - pts[bi])
}

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod integration

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy)]
pub struct IntegrationOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_segments: usize,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        IntegrationOptions { abs_tol: 1e-10, rel_tol: 1e-10, max_segments: 4000 }
    }
}

fn gk15<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

/// Globally adaptive G7-K15 quadrature of a complex-valued integrand.
pub fn integrate_c<F: FnMut(f64) -> Complex64>(mut f: F, a: f64, b: f64, opts: IntegrationOptions) -> Result<Complex64> {
    if a == b {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut segs: Vec<(f64, f64, Complex64, f64)> = vec![(a, b, v, e)];
    loop {
        let total: Complex64 = segs.iter().map(|s| s.2).sum();
        let err: f64 = segs.iter().map(|s| s.3).sum();
        if !total.re.is_finite() || !total.im.is_finite() {
            return Err(Error::NonFinite("adaptive integration"));
        }
        if err <= opts.abs_tol.max(opts.rel_tol * total.norm()) {
            return Ok(total);
        }
        if segs.len() >= opts.max_segments {
            return Err(Error::NoConvergence { estimate: err });
        }
        let (idx, _) = segs.iter().enumerate().fold((0, -1.0), |acc, (i, s)| if s.3 > acc.1 { (i, s.3) } else { acc });
        let (lo, hi, _, _) = segs.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        segs.push((lo, mid, v1, e1));
        segs.push((mid, hi, v2, e2));
    }
}

pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: IntegrationOptions) -> Result<f64> {
    integrate_c(|x| Complex64::new(f(x), 0.0), a, b, opts).map(|v| v.re)
}

/// Fixed composite Gauss-Legendre sum over `panels` equal panels of `order`
/// points each; cheap and robust for smooth oscillatory integrands.
pub fn composite_gauss<F: FnMut(f64) -> Complex64>(mut f: F, a: f64, b: f64, panels: usize, order: usize) -> Complex64 {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            acc += f(lo + 0.5 * h * (xi + 1.0)) * (0.5 * h * wi);
        }
    }
    acc
}

// ---------------------------------------------------------------------------
// Point sets and fields

#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
}

impl PointSet {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || coords.len() % dim != 0 {
            return Err(Error::Dimension(format!("{} coordinates do not form {}-vectors", coords.len(), dim)));
        }
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("point set"));
        }
        Ok(PointSet { dim, coords })
    }

    pub fn from_points(dim: usize, points: &[Vec<f64>]) -> Result<Self> {
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.len() != dim {
                return Err(Error::Dimension(format!("point of length {} in a {}-d set", p.len(), dim)));
            }
            coords.extend_from_slice(p);
        }
        PointSet::new(dim, coords)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

/// Tensor-product uniform grid including both endpoints; the first axis
/// varies slowest.
pub fn make_grid(lo: &[f64], hi: &[f64], counts: &[usize]) -> Result<PointSet> {
    let d = lo.len();
    if hi.len() != d || counts.len() != d || d == 0 {
        return Err(Error::Dimension(format!("lo/hi/counts lengths {}/{}/{}", d, hi.len(), counts.len())));
    }
    for k in 0..d {
        if !(lo[k] < hi[k]) || counts[k] < 2 {
            return Err(Error::InvalidArgument(format!("axis {k}: need lo < hi and count >= 2")));
        }
    }
    let total: usize = counts.iter().product();
    let mut coords = Vec::with_capacity(total * d);
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        for k in 0..d {
            let t = idx[k] as f64 / (counts[k] - 1) as f64;
            coords.push(if idx[k] == counts[k] - 1 { hi[k] } else { lo[k] + t * (hi[k] - lo[k]) });
        }
        for k in (0..d).rev() {
            idx[k] += 1;
            if idx[k] < counts[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    PointSet::new(d, coords)
}

/// Uniform 1-D grid of n points on [lo, hi].
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    pub points: PointSet,
    pub values: Vec<Complex64>,
    pub label: String,
}

impl SampledField {
    pub fn new(points: PointSet, values: Vec<Complex64>, label: impl Into<String>) -> Result<Self> {
        if points.len() != values.len() {
            return Err(Error::Dimension(format!("{} points but {} values", points.len(), values.len())));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite("sampled field"));
        }
        Ok(SampledField { points, values, label: label.into() })
    }

    pub fn from_fn<F: FnMut(&[f64]) -> Complex64>(points: PointSet, label: impl Into<String>, mut f: F) -> Result<Self> {
        let values = points.iter().map(|p| f(p)).collect();
        SampledField::new(points, values, label)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }
}

/// Reject NaN/inf results instead of letting them propagate.
pub fn finite(v: Complex64, ctx: &'static str) -> Result<Complex64> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(ctx))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinc_limits() {
        assert_eq!(sinc(0.0), 1.0);
        assert!(sinc(PI).abs() < 1e-15);
        assert!((sinc(1e-9) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cosinc_values() {
        assert_eq!(cosinc(0.0), 0.0);
        assert!((cosinc(PI) - 2.0 / PI).abs() < 1e-15);
        assert_eq!(cosinc(-0.7), -cosinc(0.7));
    }

    #[test]
    fn expc_values() {
        assert_eq!(expc(c(0.0, 0.0)), c(1.0, 0.0));
        let v = expc(c(0.0, PI));
        assert!(v.re.abs() < 1e-15 && (v.im - 2.0 / PI).abs() < 1e-15);
        assert!((expc(c(1.0, 0.0)).re - 1.718281828459045).abs() < 1e-14);
    }

    #[test]
    fn grids() {
        let g = make_grid(&[-1.0], &[1.0], &[3]).unwrap();
        assert_eq!(g.coords(), &[-1.0, 0.0, 1.0]);
        let g = make_grid(&[0.0, 0.0], &[1.0, 1.0], &[2, 2]).unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g.point(3), &[1.0, 1.0]);
        let g = make_grid(&[-2.0], &[2.0], &[5]).unwrap();
        assert_eq!(g.coords(), &[-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert!(make_grid(&[0.0], &[1.0, 2.0], &[2]).is_err());
    }

    #[test]
    fn bessel_reference_values() {
        // Tabulated values (Abramowitz & Stegun).
        assert!((bessel_j0(1.0) - 0.765197686557966551).abs() < 1e-15);
        assert!((bessel_j1(1.0) - 0.440050585744933516).abs() < 1e-15);
        assert!((bessel_j0(10.0) + 0.245935764451348335).abs() < 1e-15);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((s - 2.0 / 13.0).abs() < 1e-15);
    }

    #[test]
    fn divided_difference_confluent() {
        let f = |z: Complex64| z.exp();
        let p = c(0.3, 0.0);
        let d = divided_difference(&f, &[p, p, p]);
        assert!((d - p.exp() / 2.0).norm() < 1e-14);
        let d2 = divided_difference(&f, &[c(0.0, 0.0), c(2.0, 0.0)]);
        assert!((d2.re - (2f64.exp() - 1.0) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_integration() {
        let v = integrate(|x| x.sin(), 0.0, PI, IntegrationOptions::default()).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }
}
