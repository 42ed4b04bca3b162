//! Approximations of sinc(B₀x): cosine sums with 3ⁿ band scaling, the
//! periodic sinc of uniform sampling, and Gaussian-tapered chirp sums.
//!
//! The scaling trick rests on sinc(3y) = sinc(y)·(2cos(2y) + 1)/3: an
//! approximation at a small band B is lifted to 3ⁿB by a trigonometric
//! multiplier bounded by one, so pointwise errors never grow.

use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64;

use crate::moments::{gauss_legendre_01, merge_nodes, preset_moments, solve_moment_problem, Preset, Quadrature1D};
use crate::numkit::{sinc, SampledField};
use crate::{Error, Result};

/// Level n of the band reduction: n = ⌊log₃⌊B₀⌋⌋ + 1 for B₀ ≥ 1, else 0.
/// Computed in integers so that exact powers of three are not misrounded.
pub fn reduction_level(b0: f64) -> u32 {
    if !(b0 >= 1.0) {
        return 0;
    }
    let f = b0.floor() as u64;
    let mut n = 0;
    let mut p: u64 = 1;
    while p.saturating_mul(3) <= f {
        p *= 3;
        n += 1;
    }
    n + 1
}

fn pow3(n: u32) -> f64 {
    3f64.powi(n as i32)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CosineSumApprox {
    /// Half rule at the reduced band B = B₀/3ⁿ: sinc(Bx) ≈ Σ α_m cos(Bθ_m x).
    pub base_quadrature: Quadrature1D,
    pub level: u32,
    pub b0: f64,
    /// Half rule at band B₀ with nodes (θ_m + 2k)/3ⁿ and weights α_m/3ⁿ.
    pub expanded: Option<Quadrature1D>,
}

impl CosineSumApprox {
    pub fn reduced_band(&self) -> f64 {
        self.base_quadrature.band
    }

    /// The rule whose cosine sum is the level-n approximation.
    pub fn rule(&self) -> Quadrature1D {
        match &self.expanded {
            Some(q) => q.clone(),
            None => expand(&self.base_quadrature, self.level, self.b0),
        }
    }

    /// Symmetric exponential rule for 2B₀ sinc(2πB₀t).
    pub fn symmetric_rule(&self) -> Quadrature1D {
        self.rule().to_symmetric()
    }
}

fn expand(base: &Quadrature1D, level: u32, b0: f64) -> Quadrature1D {
    let p = pow3(level);
    let kmax = ((p as i64) - 1) / 2;
    let mut pairs = Vec::with_capacity(base.len() * p as usize);
    for (a, th) in base.weights.iter().zip(&base.nodes) {
        for k in -kmax..=kmax {
            pairs.push(((th + 2.0 * k as f64) / p, a / p));
        }
    }
    let (nodes, weights) = merge_nodes(pairs, 1e-12);
    Quadrature1D { weights, nodes, band: b0, symmetric: false }
}

/// Reduce the band by 3ⁿ, use the M-node Gauss-Legendre rule
/// for sinc(Bx) = ∫₀¹ cos(Bωx)dω, and expand the nodes back to B₀.
pub fn build_sinc_cosine_approx(b0: f64, m: usize) -> Result<CosineSumApprox> {
    if !(b0 > 0.0) || !b0.is_finite() || m == 0 {
        return Err(Error::InvalidArgument("need B0 > 0 and M >= 1".into()));
    }
    let level = reduction_level(b0);
    let b = b0 / pow3(level);
    let mut base = gauss_legendre_01(m);
    base.band = b;
    let expanded = (level > 0).then(|| expand(&base, level, b0));
    Ok(CosineSumApprox { base_quadrature: base, level, b0, expanded })
}

pub fn eval_cosine_sum(a: &CosineSumApprox, x: f64) -> f64 {
    match &a.expanded {
        Some(q) => q.eval(x).re,
        None => a.base_quadrature.eval(x).re,
    }
}

/// ε(x) = sinc(B₀x) − cosine sum.
pub fn error_epsilon_b(a: &CosineSumApprox, x: f64) -> f64 {
    sinc(a.b0 * x) - eval_cosine_sum(a, x)
}

/// Error of the level-0 approximation that the scaled one is built from,
/// i.e. sinc(Bx) − Σα cos(Bθx) at the reduced band.
pub fn base_epsilon(a: &CosineSumApprox, x: f64) -> f64 {
    let q = &a.base_quadrature;
    sinc(q.band * x) - q.eval(x).re
}

/// Periodic sinc sin(Bx)/((2N+1) sin(Bx/(2N+1))), the Riemann-sum
/// surrogate of sinc(Bx) from 2N+1 uniform samples.
pub fn periodic_sinc(b: f64, n: usize, x: f64) -> f64 {
    let k = (2 * n + 1) as f64;
    let y = b * x / k;
    let yr = y - PI * (y / PI).round();
    sinc(k * yr) / sinc(yr)
}

/// Location x* = (2N+1)π/(2B) and value (2/((2N+1)π))(π/2 − 1) of the
/// maximum absolute error of the periodic sinc on [0, x*].
pub fn uniform_max_error(b: f64, n: usize) -> (f64, f64) {
    let k = (2 * n + 1) as f64;
    (k * PI / (2.0 * b), 2.0 / (k * PI) * (PI / 2.0 - 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChirpletApprox {
    /// α_m; complex in general (conjugate pairs for this moment row).
    pub weights: Vec<Complex64>,
    /// γ_m with Re γ_m > 0: sinc(Bx) ≈ Σ α_m e^{−γ_m x²}.
    pub gammas: Vec<Complex64>,
    pub b0: f64,
    pub level: u32,
}

impl ChirpletApprox {
    pub fn reduced_band(&self) -> f64 {
        self.b0 / pow3(self.level)
    }
}

/// Same band reduction as [`build_sinc_cosine_approx`], then the complex moment
/// problem h_n = B^{2n} n!/(2n+1)! for the Gaussian parameters.
pub fn build_chirplet_approx(b0: f64, m: usize) -> Result<ChirpletApprox> {
    if !(b0 > 0.0) || !b0.is_finite() || m == 0 {
        return Err(Error::InvalidArgument("need B0 > 0 and M >= 1".into()));
    }
    let level = reduction_level(b0);
    let b = b0 / pow3(level);
    let h = preset_moments(Preset::SincGauss, b, 2 * m - 1)?;
    let sol = solve_moment_problem(&h, m, 1e-8)?;
    if let Some(g) = sol.nodes.iter().find(|g| !(g.re > 0.0)) {
        return Err(Error::Unsupported(alloc::format!("chirplet parameter with Re γ = {} <= 0", g.re)));
    }
    Ok(ChirpletApprox { weights: sol.weights, gammas: sol.nodes, b0, level })
}

/// 3^{−n} Σ_m Σ_l a_{m,l} g_{m,l}(x) with the shifted chirps
/// a_{m,l} = α_m e^{i(Bl)²/Im γ_m},
/// g_{m,l}(x) = e^{−Re γ_m x²} e^{−i Im γ_m (x − Bl/Im γ_m)²}.
/// The product is evaluated through its expanded phase
/// −Im γ_m x² + 2Blx: the two factors carry phases of size (Bl)²/Im γ_m
/// that cancel, which would otherwise cost that many ulps.
pub fn eval_chirplet_sum(c: &ChirpletApprox, x: f64) -> Complex64 {
    let p = pow3(c.level);
    let b = c.b0 / p;
    let lmax = ((p as i64) - 1) / 2;
    let mut acc = Complex64::new(0.0, 0.0);
    for (a, g) in c.weights.iter().zip(&c.gammas) {
        let taper = (-g.re * x * x).exp();
        for l in -lmax..=lmax {
            let phase = -g.im * x * x + 2.0 * b * l as f64 * x;
            acc += a * Complex64::from_polar(taper, phase);
        }
    }
    acc / p
}

/// The shifted-chirp term a_{m,l} g_{m,l}(x) in its literal factored form;
/// needs Im γ ≠ 0.
pub fn shifted_chirp_term(alpha: Complex64, gamma: Complex64, bl: f64, x: f64) -> Result<Complex64> {
    if gamma.im == 0.0 {
        return Err(Error::InvalidArgument("shifted chirp needs Im γ ≠ 0".into()));
    }
    let i = Complex64::new(0.0, 1.0);
    let a = alpha * (i * (bl * bl / gamma.im)).exp();
    let shift = x - bl / gamma.im;
    Ok(a * (-gamma.re * x * x).exp() * (-i * gamma.im * shift * shift).exp())
}

/// Base-level chirp error sinc(Bx) − Σ α_m e^{−γ_m x²}.
pub fn chirplet_base_epsilon(c: &ChirpletApprox, x: f64) -> Complex64 {
    let b = c.reduced_band();
    let s: Complex64 = c.weights.iter().zip(&c.gammas).map(|(a, g)| a * (-g * x * x).exp()).sum();
    Complex64::new(sinc(b * x), 0.0) - s
}

/// Multiplies 1-D samples of an approximant f of sinc(Bx) by
/// Π_{j<n} (2cos(2·3ʲBx) + 1)/3, producing an approximant of sinc(3ⁿBx)
/// whose pointwise error is never larger.
pub fn scale_general(f: &SampledField, b: f64, n: u32) -> Result<SampledField> {
    if f.points.dim() != 1 {
        return Err(Error::Dimension("scale_general needs a 1-D grid".into()));
    }
    let values = f
        .points
        .iter()
        .zip(&f.values)
        .map(|(p, v)| {
            let x = p[0];
            let mut mult = 1.0;
            for j in 0..n {
                mult *= (2.0 * (2.0 * pow3(j) * b * x).cos() + 1.0) / 3.0;
            }
            v * mult
        })
        .collect();
    SampledField::new(f.points.clone(), values, f.label.clone())
}

/// Rows (x, approx, exact, error) of a cosine-sum approximation on a grid.
pub fn cosine_sum_table(a: &CosineSumApprox, xs: &[f64]) -> Vec<[f64; 4]> {
    xs.iter()
        .map(|&x| {
            let v = eval_cosine_sum(a, x);
            let e = sinc(a.b0 * x);
            [x, v, e, e - v]
        })
        .collect()
}

/// Maximum of |sinc(Bx) − periodic_sinc| over a uniform grid on [0, x*].
pub fn measured_uniform_error(b: f64, n: usize, samples: usize) -> f64 {
    let (xs, _) = uniform_max_error(b, n);
    let mut m = 0.0f64;
    for k in 0..=samples {
        let x = xs * k as f64 / samples as f64;
        m = m.max((sinc(b * x) - periodic_sinc(b, n, x)).abs());
    }
    m
}
