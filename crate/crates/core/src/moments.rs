//! Moment problems h_n = Σ α_m γ_m^n and the quadratures they produce.
//!
//! The rows of the classical table (sinc/cos, J0/cos, Gauss/cos, sinc/Gauss,
//! J0/sinc, J1/cosinc) are all even: f(Bx) ≈ Σ α_m g(γ_m x) with moments in
//! γ_m². The generic solver works in the variable z = γ², so a row's nodes are
//! √z (real rules) or z itself (the Gaussian-chirp row).

use alloc::{format, vec, vec::Vec};
#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64;

use crate::linalg::{eig_general, lstsq, svd_sorted, CMat};
use crate::numkit::ln_factorial;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    SincCos,
    J0Cos,
    GaussCos,
    SincGauss,
    J0Sinc,
    J1Cosinc,
}

impl Preset {
    pub const ALL: [Preset; 6] = [Preset::SincCos, Preset::J0Cos, Preset::GaussCos, Preset::SincGauss, Preset::J0Sinc, Preset::J1Cosinc];

    pub fn name(self) -> &'static str {
        match self {
            Preset::SincCos => "sinc_cos",
            Preset::J0Cos => "j0_cos",
            Preset::GaussCos => "gauss_cos",
            Preset::SincGauss => "sinc_gauss",
            Preset::J0Sinc => "j0_sinc",
            Preset::J1Cosinc => "j1_cosinc",
        }
    }

    pub fn from_name(s: &str) -> Option<Preset> {
        let s = s.replace('-', "_");
        Preset::ALL.iter().copied().find(|p| p.name() == s)
    }

    /// ln of the B-independent factor of h_n.
    fn ln_coefficient(self, n: usize) -> f64 {
        let nf = n as f64;
        let ln2 = core::f64::consts::LN_2;
        match self {
            Preset::SincCos => -(2.0 * nf + 1.0).ln(),
            Preset::J0Cos => ln_factorial(2 * n) - 2.0 * (nf * ln2 + ln_factorial(n)),
            Preset::GaussCos => ln_factorial(2 * n) - ln_factorial(n),
            Preset::SincGauss => ln_factorial(n) - ln_factorial(2 * n + 1),
            Preset::J0Sinc => ln_factorial(2 * n + 1) - 2.0 * (nf * ln2 + ln_factorial(n)),
            Preset::J1Cosinc => ln_factorial(2 * n + 2) - (2.0 * nf + 1.0) * ln2 - ln_factorial(n) - ln_factorial(n + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentSequence {
    pub values: Vec<f64>,
    pub preset: Option<Preset>,
}

impl MomentSequence {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("moment sequence"));
        }
        Ok(MomentSequence { values, preset: None })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// h_n for n = 0..=n_mom of a table row at band B, computed in log space.
pub fn preset_moments(preset: Preset, b: f64, n_mom: usize) -> Result<MomentSequence> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::InvalidArgument(format!("band must be positive, got {b}")));
    }
    let lnb = b.ln();
    let mut values = Vec::with_capacity(n_mom + 1);
    for n in 0..=n_mom {
        let v = (2.0 * n as f64 * lnb + preset.ln_coefficient(n)).exp();
        if !v.is_finite() {
            return Err(Error::Overflow("preset moment"));
        }
        values.push(v);
    }
    Ok(MomentSequence { values, preset: Some(preset) })
}

/// A one-dimensional quadrature.
///
/// Half rules (`symmetric == false`) discretize sinc-type even kernels as
/// cosine sums: with nodes ω_m ∈ [0, 1] (or the 3ⁿ-expanded range) and
/// Σ α_m = 1, sinc(B x) ≈ Σ α_m cos(B ω_m x).
///
/// Symmetric rules discretize the band-limited kernel in exponentials:
/// nodes ω_m ∈ [−1, 1] closed under negation, Σ α_m = 2B and
/// 2B sinc(2πB t) ≈ Σ α_m e^{i2πBω_m t}.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature1D {
    pub weights: Vec<f64>,
    pub nodes: Vec<f64>,
    pub band: f64,
    pub symmetric: bool,
}

impl Quadrature1D {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Value of the cosine sum Σ α_m cos(B ω_m x) (half rules) or the
    /// exponential sum Σ α_m e^{i2πBω_m x} (symmetric rules).
    pub fn eval(&self, x: f64) -> Complex64 {
        if self.symmetric {
            let k = 2.0 * core::f64::consts::PI * self.band * x;
            self.weights.iter().zip(&self.nodes).map(|(a, w)| Complex64::from_polar(*a, k * w)).sum()
        } else {
            Complex64::new(self.weights.iter().zip(&self.nodes).map(|(a, w)| a * (self.band * w * x).cos()).sum(), 0.0)
        }
    }

    /// Symmetric exponential rule with the same band from a half (cosine)
    /// rule: each cosine splits into two exponentials of weight Bα_m; a zero
    /// node keeps weight 2Bα_m. Coincident nodes are merged.
    pub fn to_symmetric(&self) -> Quadrature1D {
        if self.symmetric {
            return self.clone();
        }
        let b = self.band;
        let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(2 * self.len());
        for (a, w) in self.weights.iter().zip(&self.nodes) {
            let w = w.abs();
            if w == 0.0 {
                pairs.push((0.0, 2.0 * b * a));
            } else {
                pairs.push((w, b * a));
                pairs.push((-w, b * a));
            }
        }
        let (nodes, weights) = merge_nodes(pairs, 1e-12);
        Quadrature1D { weights, nodes, band: b, symmetric: true }
    }
}

/// Sort (node, weight) pairs and merge nodes closer than `tol`.
pub(crate) fn merge_nodes(mut pairs: Vec<(f64, f64)>, tol: f64) -> (Vec<f64>, Vec<f64>) {
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(core::cmp::Ordering::Equal));
    let mut nodes: Vec<f64> = Vec::with_capacity(pairs.len());
    let mut weights: Vec<f64> = Vec::with_capacity(pairs.len());
    for (x, w) in pairs {
        if let Some(last) = nodes.last() {
            if (x - last).abs() <= tol {
                *weights.last_mut().unwrap() += w;
                continue;
            }
        }
        nodes.push(x);
        weights.push(w);
    }
    (nodes, weights)
}

#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    /// Hankel numerical-rank cut, relative to the largest singular value.
    pub rank_tol: f64,
    /// Largest reduced band accepted by the direct solve.
    pub b_max: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { rank_tol: 1e-12, b_max: 2.0 }
    }
}

/// Output of the generic moment solve: complex weights and nodes in the
/// moment variable z (h_n ≈ Σ α_m z_m^n).
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSolution {
    pub weights: Vec<Complex64>,
    pub nodes: Vec<Complex64>,
    /// Requested number of terms when the Hankel rank forced a smaller rule.
    pub rank_notice: Option<Error>,
    pub residuals: Vec<f64>,
    pub singular_values: Vec<f64>,
}

impl MomentSolution {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(*r))
    }
}

/// Solve h_n = Σ_{m<M} α_m z_m^n from the Hankel matrix of h: SVD, shift
/// invariance of the dominant left singular subspace for the nodes, then a
/// Vandermonde least-squares fit for the weights. Moments are first rescaled
/// geometrically so that the Hankel entries are O(1).
///
/// Fails with `IllConditioned` when max_n |ε_n| > tol·max_n |h_n|.
pub fn solve_moment_problem(h: &MomentSequence, m: usize, tol: f64) -> Result<MomentSolution> {
    let hc: Vec<Complex64> = h.values.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    solve_moment_problem_complex(&hc, m, tol, SolverConfig::default())
}

pub fn solve_moment_problem_complex(h: &[Complex64], m: usize, tol: f64, cfg: SolverConfig) -> Result<MomentSolution> {
    let n = h.len();
    if m == 0 {
        return Err(Error::InvalidArgument("need at least one term".into()));
    }
    if n < 2 * m {
        return Err(Error::InvalidArgument(format!("{} moments cannot determine {} terms (need {})", n, m, 2 * m)));
    }
    if h.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NonFinite("moments"));
    }
    let c = moment_scale(h);
    let hmax = h.iter().fold(0.0f64, |a, v| a.max(v.norm()));
    let mut best = solve_scaled(h, m, c, cfg)?;
    // A second pass centred on the geometric mean of the node magnitudes
    // balances large and small nodes in the Hankel matrix.
    let mags: Vec<f64> = best.1.iter().map(|z| z.norm()).filter(|v| *v > 0.0).collect();
    if let (Some(lo), Some(hi)) = (mags.iter().copied().reduce(f64::min), mags.iter().copied().reduce(f64::max)) {
        let c2 = (lo * hi).sqrt();
        if c2.is_finite() && (c2 / c - 1.0).abs() > 1e-3 {
            if let Ok(alt) = solve_scaled(h, m, c2, cfg) {
                if relative_fit(&alt.2, h) < relative_fit(&best.2, h) {
                    best = alt;
                }
            }
        }
    }
    // Continuation fallback: grow the (M−1)-term solution by one node.
    if best.4 == m && m >= 2 && relative_fit(&best.2, h) > cfg.rank_tol {
        if let Some(alt) = grow_by_one(h, m, cfg) {
            if relative_fit(&alt.2, h) < relative_fit(&best.2, h) {
                best = (alt.0, alt.1, alt.2, alt.3, m, best.5);
            }
        }
    }
    let (weights, nodes, residuals, worst, rank, sv) = best;
    if !(worst <= tol * hmax) {
        return Err(Error::IllConditioned { residual: worst / hmax, tol });
    }
    let rank_notice = (rank < m).then_some(Error::RankDeficient { requested: m, found: rank });
    Ok(MomentSolution { weights, nodes, rank_notice, residuals, singular_values: sv })
}

/// max_n |ε_n| / |h_n| over the non-vanishing moments.
fn relative_fit(res: &[f64], h: &[Complex64]) -> f64 {
    let hmax = h.iter().fold(0.0f64, |a, v| a.max(v.norm()));
    res.iter().zip(h).map(|(r, v)| r / v.norm().max(hmax * 1e-300).max(f64::MIN_POSITIVE)).fold(0.0, f64::max)
}

type ScaledSolve = (Vec<Complex64>, Vec<Complex64>, Vec<f64>, f64, usize, Vec<f64>);

fn solve_scaled(h: &[Complex64], m: usize, c: f64, cfg: SolverConfig) -> Result<ScaledSolve> {
    let n = h.len();
    let hs: Vec<Complex64> = h.iter().enumerate().map(|(k, v)| v / c.powi(k as i32)).collect();
    let rows = m + 1;
    let cols = n - m;
    // Row and column equilibration. Column scaling leaves the column space
    // alone; row scaling d_i is undone in the shift relation
    // U[1:] = diag(d_{i+1}/d_i) U[:-1] Φ.
    let mut hankel = CMat::from_fn(rows, cols, |i, j| hs[i + j]);
    let d: Vec<f64> = (0..rows)
        .map(|i| {
            let mx = hankel.row(i).iter().fold(0.0f64, |a, v| a.max(v.norm()));
            if mx > 0.0 {
                1.0 / mx
            } else {
                1.0
            }
        })
        .collect();
    for i in 0..rows {
        let mut row = hankel.row_mut(i);
        row *= Complex64::new(d[i], 0.0);
    }
    for j in 0..cols {
        let mx = hankel.column(j).iter().fold(0.0f64, |a, v| a.max(v.norm()));
        if mx > 0.0 {
            let mut col = hankel.column_mut(j);
            col /= Complex64::new(mx, 0.0);
        }
    }
    let (sv, u) = svd_sorted(hankel);
    let s0 = sv.first().copied().unwrap_or(0.0);
    if s0 == 0.0 {
        return Err(Error::RankDeficient { requested: m, found: 0 });
    }
    let rank = sv.iter().filter(|s| **s > cfg.rank_tol * s0).count().min(m);
    if rank == 0 {
        return Err(Error::RankDeficient { requested: m, found: 0 });
    }
    let ur = u.columns(0, rank).into_owned();
    let upper = CMat::from_fn(rows - 1, rank, |i, j| ur[(i, j)] * (d[i + 1] / d[i]));
    let lower = ur.rows(1, rows - 1).into_owned();
    let phi = lstsq(upper, lower)?;
    let (zs, _) = eig_general(phi)?;

    let vander = CMat::from_fn(n, rank, |k, j| zs[j].powi(k as i32));
    let rhs = CMat::from_column_slice(n, 1, &hs);
    let alpha = lstsq(vander, rhs)?;
    let (weights, zs) = polish(alpha.iter().copied().collect(), zs, &hs);
    let nodes: Vec<Complex64> = zs.iter().map(|z| z * c).collect();
    let residuals = moment_residuals(&weights, &nodes, h);
    let worst = residuals.iter().fold(0.0f64, |a, r| a.max(*r));
    if !worst.is_finite() {
        return Err(Error::NonFinite("moment residual"));
    }
    Ok((weights, nodes, residuals, worst, rank, sv))
}

/// Solve for M−1 terms on the leading 2M−2 moments, then seed one extra node
/// below, between and above the existing ones and polish on all moments.
fn grow_by_one(h: &[Complex64], m: usize, cfg: SolverConfig) -> Option<(Vec<Complex64>, Vec<Complex64>, Vec<f64>, f64)> {
    let prev = solve_moment_problem_complex(&h[..2 * m - 2], m - 1, f64::INFINITY, cfg).ok()?;
    if prev.nodes.len() != m - 1 {
        return None;
    }
    let c = moment_scale(h);
    let hs: Vec<Complex64> = h.iter().enumerate().map(|(k, v)| v / c.powi(k as i32)).collect();
    let zs: Vec<Complex64> = prev.nodes.iter().map(|z| z / c).collect();
    let mut mags: Vec<Complex64> = zs.clone();
    mags.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap_or(core::cmp::Ordering::Equal));
    let mut seeds = Vec::new();
    seeds.push(mags[0] * 0.5);
    for w in mags.windows(2) {
        seeds.push((w[0] * w[1]).sqrt());
    }
    seeds.push(mags[mags.len() - 1] * 1.5);
    let seed_weight = hs[0] * 1e-3;
    let mut best: Option<(Vec<Complex64>, Vec<Complex64>, Vec<f64>, f64)> = None;
    for seed in seeds {
        let mut a: Vec<Complex64> = prev.weights.clone();
        let mut z = zs.clone();
        a.push(seed_weight);
        z.push(seed);
        let (a, z) = polish(a, z, &hs);
        let nodes: Vec<Complex64> = z.iter().map(|v| v * c).collect();
        let res = moment_residuals(&a, &nodes, h);
        let worst = res.iter().fold(0.0f64, |acc, r| acc.max(*r));
        if !worst.is_finite() {
            continue;
        }
        if best.as_ref().map_or(true, |b| relative_fit(&res, h) < relative_fit(&b.2, h)) {
            best = Some((a, nodes, res, worst));
        }
    }
    best
}

/// Gauss-Newton refinement of (α, z) on the rescaled moment equations;
/// a step is kept only when it lowers the residual.
fn polish(mut alpha: Vec<Complex64>, mut z: Vec<Complex64>, h: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let r = alpha.len();
    let norm = |a: &[Complex64], z: &[Complex64]| -> f64 {
        moment_residuals(a, z, h)
            .iter()
            .zip(h)
            .map(|(e, v)| {
                let w = e / v.norm().max(f64::MIN_POSITIVE);
                w * w
            })
            .sum::<f64>()
            .sqrt()
    };
    let mut current = norm(&alpha, &z);
    for _ in 0..40 {
        if current == 0.0 {
            break;
        }
        let n = h.len();
        let jac = CMat::from_fn(n, 2 * r, |k, j| {
            if j < r {
                z[j].powi(k as i32)
            } else if k == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                alpha[j - r] * (k as f64) * z[j - r].powi(k as i32 - 1)
            }
        });
        let res = CMat::from_fn(n, 1, |k, _| h[k] - alpha.iter().zip(&z).map(|(a, zz)| a * zz.powi(k as i32)).sum::<Complex64>());
        // Rows weighted by 1/|h_k| (relative fit), columns normalised so the
        // least-squares cutoff does not discard badly scaled directions.
        let mut jac = jac;
        let mut res = res;
        for k in 0..n {
            let w = 1.0 / h[k].norm().max(f64::MIN_POSITIVE);
            let mut row = jac.row_mut(k);
            row *= Complex64::new(w, 0.0);
            res[(k, 0)] *= w;
        }
        let colnorm: Vec<f64> = (0..2 * r).map(|j| jac.column(j).norm()).map(|v| if v > 0.0 { v } else { 1.0 }).collect();
        for j in 0..2 * r {
            let mut col = jac.column_mut(j);
            col /= Complex64::new(colnorm[j], 0.0);
        }
        let Ok(mut step) = lstsq(jac, res) else { break };
        for j in 0..2 * r {
            step[j] /= colnorm[j];
        }
        // Damped step: halve until the residual drops.
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            let a2: Vec<Complex64> = (0..r).map(|j| alpha[j] + step[j] * t).collect();
            let z2: Vec<Complex64> = (0..r).map(|j| z[j] + step[r + j] * t).collect();
            let next = norm(&a2, &z2);
            if next < current {
                alpha = a2;
                z = z2;
                current = next;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (alpha, z)
}

fn moment_scale(h: &[Complex64]) -> f64 {
    let n = h.len();
    let h0 = h[0].norm();
    if n >= 2 && h0 > 0.0 {
        let c = (h[n - 1].norm() / h0).powf(1.0 / (n - 1) as f64);
        if c.is_finite() && c > 0.0 {
            return c;
        }
        let c = (1..n).map(|k| (h[k].norm() / h0).powf(1.0 / k as f64)).fold(0.0f64, f64::max);
        if c.is_finite() && c > 0.0 {
            return c;
        }
    }
    1.0
}

/// |h_n − Σ α_m z_m^n| for every n.
pub fn moment_residuals(weights: &[Complex64], nodes: &[Complex64], h: &[Complex64]) -> Vec<f64> {
    h.iter()
        .enumerate()
        .map(|(k, hk)| {
            let s: Complex64 = weights.iter().zip(nodes).map(|(a, z)| a * z.powi(k as i32)).sum();
            (hk - s).norm()
        })
        .collect()
}

/// Real even rule for a table row: f(Bx) ≈ Σ α_m g(ν_m x) with real
/// frequencies ν_m = √z_m. Returned as a half rule with nodes ν_m/B.
pub fn preset_rule(preset: Preset, b: f64, m: usize, tol: f64) -> Result<Quadrature1D> {
    let h = preset_moments(preset, b, 2 * m - 1)?;
    let sol = solve_moment_problem(&h, m, tol)?;
    real_even_rule(&sol, b)
}

pub(crate) fn real_even_rule(sol: &MomentSolution, b: f64) -> Result<Quadrature1D> {
    let mut pairs = Vec::with_capacity(sol.nodes.len());
    for (a, z) in sol.weights.iter().zip(&sol.nodes) {
        let scale = z.norm().max(1e-300);
        if z.im.abs() > 1e-8 * scale || z.re < 0.0 || a.im.abs() > 1e-8 * a.norm().max(1e-300) {
            return Err(Error::Unsupported(format!("moment solve produced a non-real node {z} / weight {a}")));
        }
        pairs.push((z.re.sqrt() / b, a.re));
    }
    pairs.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap_or(core::cmp::Ordering::Equal));
    Ok(Quadrature1D { nodes: pairs.iter().map(|p| p.0).collect(), weights: pairs.iter().map(|p| p.1).collect(), band: b, symmetric: false })
}

/// Positive half of the 2M-point Gauss-Legendre rule: nodes in (0,1),
/// Σα = 1, exact for the moments 1/(2n+1), n ≤ 2M−1.
pub fn gauss_legendre_01(m: usize) -> Quadrature1D {
    let (x, w) = crate::numkit::gauss_legendre(2 * m);
    let nodes: Vec<f64> = x[m..].to_vec();
    let weights: Vec<f64> = w[m..].to_vec();
    Quadrature1D { weights, nodes, band: 1.0, symmetric: false }
}

/// Positive half of the 2M-point Gauss-Chebyshev (first kind) rule:
/// J0(x) ≈ Σ α_m cos(τ_m x) with α_m = 1/M, exact for the moments
/// (2n)!/(2ⁿn!)², n ≤ 2M−1.
pub fn chebyshev_rule_for_j0(m: usize) -> Quadrature1D {
    let mf = m as f64;
    let mut nodes: Vec<f64> = (1..=m).map(|j| ((2 * j - 1) as f64 * core::f64::consts::PI / (4.0 * mf)).cos()).collect();
    nodes.reverse();
    Quadrature1D { weights: vec![1.0 / mf; m], nodes, band: 1.0, symmetric: false }
}

/// Uniform (DFT) rule: α = 2B/(2M+1), ω_m = 2m/(2M+1), m = −M..M.
pub fn uniform_rule(b: f64, m: usize) -> Quadrature1D {
    let n = (2 * m + 1) as f64;
    let nodes = (0..2 * m + 1).map(|k| 2.0 * (k as f64 - m as f64) / n).collect();
    Quadrature1D { weights: vec![2.0 * b / n; 2 * m + 1], nodes, band: b, symmetric: true }
}

/// ε_n = h_n − Σ α_m (Bω_m)^{2n}. Symmetric rules are normalized by their
/// mass 2B so that they are comparable with the half-rule moments.
pub fn verify_moments(q: &Quadrature1D, h: &MomentSequence) -> Vec<f64> {
    let norm = if q.symmetric { 2.0 * q.band } else { 1.0 };
    h.values
        .iter()
        .enumerate()
        .map(|(n, hn)| {
            let s: f64 = q.weights.iter().zip(&q.nodes).map(|(a, w)| a / norm * (q.band * w).powi(2 * n as i32)).sum();
            hn - s
        })
        .collect()
}
