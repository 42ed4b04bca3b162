//! End-to-end checks of every error bound and identity the library relies
//! on, each against an independent brute-force oracle.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rlimit_core::kernels::*;
use rlimit_core::moments::*;
use rlimit_core::numkit::{bessel_j1, integrate, integrate_c, linspace, make_grid, sinc, IntegrationOptions, PointSet, SampledField};
use rlimit_core::projection::*;
use rlimit_core::prolate::*;
use rlimit_core::sincapprox::*;
use rlimit_core::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub criterion: u8,
    pub bound_claimed: f64,
    pub value_measured: f64,
    pub slack: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl Check {
    pub fn new(criterion: u8, name: impl Into<String>, measured: f64, bound: f64, slack: f64) -> Self {
        Check {
            name: name.into(),
            criterion,
            bound_claimed: bound,
            value_measured: measured,
            slack,
            pass: measured <= bound * (1.0 + slack),
            note: String::new(),
        }
    }

    pub fn note(mut self, s: impl Into<String>) -> Self {
        self.note = s.into();
        self
    }

    fn with_slack(mut self, slack: f64) -> Self {
        self.slack = slack;
        self.pass = self.value_measured <= self.bound_claimed * (1.0 + slack);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub runtime_s: f64,
    pub suites: Vec<String>,
    pub seed: u64,
    pub grid: usize,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn criterion_passed(&self, criterion: u8) -> Option<bool> {
        let mut it = self.checks.iter().filter(|c| c.criterion == criterion).peekable();
        it.peek()?;
        Some(it.all(|c| c.pass))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Suite {
    Moments,
    SincPipeline,
    ScalingBound,
    Lattice,
    UniformSampling,
    Pswf,
    EigenCount,
    Projection1d,
    ProjectionRegion,
    Nyquist,
    Triangle,
    Symmetry,
    Cone,
}

impl Suite {
    pub const ALL: [Suite; 13] = [
        Suite::Moments,
        Suite::SincPipeline,
        Suite::ScalingBound,
        Suite::Lattice,
        Suite::UniformSampling,
        Suite::Pswf,
        Suite::EigenCount,
        Suite::Projection1d,
        Suite::ProjectionRegion,
        Suite::Nyquist,
        Suite::Triangle,
        Suite::Symmetry,
        Suite::Cone,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Moments => "moments",
            Suite::SincPipeline => "sinc-pipeline",
            Suite::ScalingBound => "scaling-bound",
            Suite::Lattice => "lattice",
            Suite::UniformSampling => "uniform-sampling",
            Suite::Pswf => "pswf",
            Suite::EigenCount => "eigen-count",
            Suite::Projection1d => "projection-1d",
            Suite::ProjectionRegion => "projection-region",
            Suite::Nyquist => "nyquist",
            Suite::Triangle => "triangle",
            Suite::Symmetry => "symmetry",
            Suite::Cone => "cone",
        }
    }

    pub fn criterion(self) -> u8 {
        match self {
            Suite::Moments => 1,
            Suite::SincPipeline | Suite::ScalingBound => 2,
            Suite::Lattice => 3,
            Suite::UniformSampling => 4,
            Suite::Pswf => 5,
            Suite::EigenCount => 6,
            Suite::Projection1d | Suite::ProjectionRegion => 7,
            Suite::Nyquist => 8,
            Suite::Triangle => 9,
            Suite::Symmetry => 10,
            Suite::Cone => 11,
        }
    }

    /// Suites selected by a name, a group name or a criterion number.
    pub fn parse_selection(s: &str) -> Result<Vec<Suite>, String> {
        let s = s.trim();
        if s == "all" {
            return Ok(Suite::ALL.to_vec());
        }
        if s == "projection" || s == "projection-bounds" {
            return Ok(vec![Suite::Projection1d, Suite::ProjectionRegion]);
        }
        if let Ok(n) = s.parse::<u8>() {
            let v: Vec<Suite> = Suite::ALL.iter().copied().filter(|x| x.criterion() == n).collect();
            return if v.is_empty() { Err(format!("no suite for criterion {n}")) } else { Ok(v) };
        }
        s.parse::<Suite>().map(|x| vec![x])
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Suite::ALL
            .iter()
            .copied()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite `{s}` (known: {})", Suite::ALL.map(|x| x.name()).join(", ")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Points per axis of the sampled test functions of the region check.
    pub grid: usize,
    pub seed: u64,
    /// Replaces the per-check slack when set.
    pub tol: Option<f64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { grid: 41, seed: 2024, tol: None }
    }
}

/// Stated wall-clock budgets in seconds, per criterion.
const BUDGETS: [(u8, f64); 5] = [(1, 1.0), (2, 5.0), (5, 30.0), (7, 180.0), (9, 60.0)];

pub fn run(suites: &[Suite], opts: &VerifyOptions) -> VerifyReport {
    let start = Instant::now();
    let mut list = suites.to_vec();
    list.sort();
    list.dedup();
    let mut checks = Vec::new();
    let mut elapsed = [0.0f64; 12];
    for s in &list {
        let t = Instant::now();
        checks.extend(run_suite(*s, opts));
        elapsed[s.criterion() as usize] += t.elapsed().as_secs_f64();
    }
    for (criterion, limit) in BUDGETS {
        if list.iter().any(|s| s.criterion() == criterion) {
            checks.push(Check::new(criterion, format!("criterion {criterion} runtime [s]"), elapsed[criterion as usize], limit, 0.0));
        }
    }
    if let Some(tol) = opts.tol {
        checks = checks.into_iter().map(|c| c.with_slack(tol)).collect();
    }
    VerifyReport {
        checks,
        runtime_s: start.elapsed().as_secs_f64(),
        suites: list.iter().map(|s| s.name().to_string()).collect(),
        seed: opts.seed,
        grid: opts.grid,
    }
}

pub fn run_suite(s: Suite, opts: &VerifyOptions) -> Vec<Check> {
    let failed =
        |e: rlimit_core::Error| vec![Check::new(s.criterion(), format!("{s}: error"), f64::INFINITY, 0.0, 0.0).note(e.to_string())];
    let r = match s {
        Suite::Moments => Ok(moments()),
        Suite::SincPipeline => sinc_pipeline(),
        Suite::ScalingBound => scaling_bound(),
        Suite::Lattice => lattice(),
        Suite::UniformSampling => Ok(uniform_sampling()),
        Suite::Pswf => pswf(),
        Suite::EigenCount => eigen_count(),
        Suite::Projection1d => projection_1d(opts.seed),
        Suite::ProjectionRegion => projection_region(opts.seed, opts.grid),
        Suite::Nyquist => nyquist(opts.seed),
        Suite::Triangle => triangle(opts.seed),
        Suite::Symmetry => symmetry(),
        Suite::Cone => cone(),
    };
    r.unwrap_or_else(failed)
}

type Checks = rlimit_core::Result<Vec<Check>>;

fn max_abs(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn moments() -> Vec<Check> {
    let mut gl: f64 = 0.0;
    let mut ch: f64 = 0.0;
    for m in 1..=32 {
        let h = preset_moments(Preset::SincCos, 1.0, 2 * m - 1).expect("fixed band");
        gl = gl.max(max_abs(verify_moments(&gauss_legendre_01(m), &h)));
        let h = preset_moments(Preset::J0Cos, 1.0, 2 * m - 1).expect("fixed band");
        ch = ch.max(max_abs(verify_moments(&chebyshev_rule_for_j0(m), &h)));
    }
    vec![
        Check::new(1, "gauss-legendre moments 1/(2n+1), M = 1..32", gl, 1e-13, 0.0),
        Check::new(1, "chebyshev moments (2n)!/(2^n n!)^2, M = 1..32", ch, 1e-13, 0.0),
    ]
}

fn sinc_pipeline() -> Checks {
    let (b0, m) = (20.0, 6);
    let a = build_sinc_cosine_approx(b0, m)?;
    let xs = linspace(-2.0, 2.0, 4001);
    let top = max_abs(xs.iter().map(|x| error_epsilon_b(&a, *x)));
    let base = max_abs(xs.iter().map(|x| base_epsilon(&a, *x)));
    let pointwise = xs.iter().map(|x| error_epsilon_b(&a, *x).abs() - base_epsilon(&a, *x).abs()).fold(0.0, f64::max);
    Ok(vec![
        Check::new(2, "B0 = 20: reduction level is 3", (a.level as f64 - 3.0).abs(), 0.0, 0.0),
        Check::new(2, "B0 = 20: reduced band is 20/27", (a.reduced_band() - 20.0 / 27.0).abs(), 0.0, 0.0),
        Check::new(2, "B0 = 20, M = 6: max level-3 error on [-2,2] <= max level-0 error + 1e-14", top, base + 1e-14, 0.0)
            .note(format!("level-0 max {base:e}")),
        Check::new(2, "B0 = 20, M = 6: pointwise |eps_3| - |eps_0| on [-2,2]", pointwise, 1e-14, 0.0),
    ])
}

fn scaling_bound() -> Checks {
    let b = 0.9;
    let xs = linspace(-30.0, 30.0, 1000);
    let mut out = Vec::new();
    for m in [2, 3, 5] {
        let level0 = build_sinc_cosine_approx(b, m)?;
        let mut worst: f64 = 0.0;
        for n in 0..=4 {
            let a = build_sinc_cosine_approx(b * 3f64.powi(n), m)?;
            for x in &xs {
                worst = worst.max(error_epsilon_b(&a, *x).abs() - error_epsilon_b(&level0, *x).abs());
            }
        }
        out.push(Check::new(2, format!("|eps_(3^n B)| <= |eps_B| pointwise, B = 0.9, M = {m}, n <= 4"), worst, 1e-14, 0.0));
    }
    Ok(out)
}

fn lattice() -> Checks {
    let mut out = Vec::new();
    for (b, m) in [(0.9, 3), (0.6, 6)] {
        let level0 = build_sinc_cosine_approx(b, m)?;
        let mut worst: f64 = 0.0;
        for n in 0..=3 {
            let a = build_sinc_cosine_approx(b * 3f64.powi(n + 1), m)?;
            for k in -5..=5 {
                let x = k as f64 * PI / b;
                worst = worst.max((error_epsilon_b(&a, x) - error_epsilon_b(&level0, x)).abs());
            }
        }
        out.push(Check::new(3, format!("eps on the lattice m*pi/B unchanged, B = {b}, M = {m}, n = 0..3"), worst, 1e-12, 0.0));
    }
    Ok(out)
}

fn uniform_sampling() -> Vec<Check> {
    let mut out = Vec::new();
    for n in [5, 13, 40] {
        for b in [20.0 / 27.0, 1.0] {
            let (_, formula) = uniform_max_error(b, n);
            let measured = measured_uniform_error(b, n, 200_000);
            out.push(Check::new(
                4,
                format!("periodic sinc max error vs formula, N = {n}, B = {b:.4}"),
                ((measured - formula) / formula).abs(),
                1e-6,
                0.0,
            ));
        }
    }
    let x = 0.3;
    let pts: Vec<(f64, f64)> = [5usize, 10, 20, 40, 80, 160]
        .iter()
        .map(|&n| (((2 * n + 1) as f64).ln(), (sinc(x) - periodic_sinc(1.0, n, x)).abs().ln()))
        .collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    out.push(
        Check::new(4, "near-origin error decays like (2N+1)^-2", (slope + 2.0).abs(), 0.1, 0.0).note(format!("fitted exponent {slope:.4}")),
    );
    out
}

fn pipeline_rule(b: f64) -> rlimit_core::Result<Quadrature1D> {
    Ok(build_sinc_cosine_approx(b, (2.0 * b).ceil() as usize + 6)?.symmetric_rule())
}

fn pswf() -> Checks {
    let mut out = Vec::new();
    for b in [2.0, 5.0] {
        let q = pipeline_rule(b)?;
        let e = pswf_exp_eigensystem(&q, b)?;
        let k = pswf_kernel_eigensystem(&q, b)?;
        let own = e
            .eigenvalues_mu
            .iter()
            .zip(&e.eigenvalues_lambda)
            .filter(|(m, _)| **m > 1e-6)
            .map(|(m, l)| (m - b * l.norm_sqr()).abs() / m)
            .fold(0.0, f64::max);
        let cross =
            k.eigenvalues_mu.iter().zip(&e.eigenvalues_mu).filter(|(m, _)| **m > 1e-6).map(|(m, n)| (m - n).abs() / m).fold(0.0, f64::max);
        out.push(Check::new(5, format!("B = {b}: mu = B|lambda|^2 within the exp system"), own, 1e-9, 0.0));
        out.push(
            Check::new(5, format!("B = {b}: kernel-system mu = B|lambda|^2 of the exp system"), cross, 1e-9, 0.0)
                .note(format!("{} nodes; relative, over mu > 1e-6", q.len())),
        );
    }
    for m in 2..=6usize {
        let n = 2 * m + 1;
        let b = n as f64 / 4.0;
        let q = uniform_rule(b, m);
        let k = pswf_kernel_eigensystem(&q, b)?;
        out.push(Check::new(
            5,
            format!("uniform rule M = {m}, B = (2M+1)/4: kernel eigenvalues = 1"),
            max_abs(k.eigenvalues_mu.iter().map(|v| v - 1.0)),
            1e-10,
            0.0,
        ));
        let e = pswf_exp_eigensystem(&q, b)?;
        let c = e.eigenvalues_lambda.iter().map(|l| l.norm()).sum::<f64>() / n as f64;
        let mut distinct: Vec<Complex64> = Vec::new();
        for l in &e.eigenvalues_lambda {
            if !distinct.iter().any(|d| (d - l).norm() <= 1e-8 * c) {
                distinct.push(*l);
            }
        }
        let targets = [Complex64::new(c, 0.0), Complex64::new(-c, 0.0), Complex64::new(0.0, c), Complex64::new(0.0, -c)];
        let dev = e
            .eigenvalues_lambda
            .iter()
            .map(|l| targets.iter().map(|t| (l - t).norm()).fold(f64::INFINITY, f64::min) / c)
            .fold(0.0, f64::max);
        out.push(Check::new(
            5,
            format!("uniform rule M = {m}: exp spectrum has 4 distinct values"),
            (distinct.len() as f64 - 4.0).abs(),
            0.0,
            0.0,
        ));
        out.push(
            Check::new(5, format!("uniform rule M = {m}: exp spectrum is {{+-c, +-ic}}"), dev, 1e-10, 0.0).note(format!("c = {c:.15}")),
        );
    }
    Ok(out)
}

fn eigen_count() -> Checks {
    let b = 5.0;
    let q = pipeline_rule(b)?;
    let k = pswf_kernel_eigensystem(&q, b)?;
    let n = k.count_above(0.5);
    Ok(vec![Check::new(6, "B = 5: number of mu > 1/2 within 20 +- 3", (n as f64 - 20.0).abs(), 3.0, 0.0).note(format!("N = {n}"))])
}

/// Σ a cos(2πνt + φ) on [−T, T], zero outside, with a closed-form transform.
#[derive(Debug, Clone)]
struct CosSum {
    terms: Vec<(f64, f64, f64)>,
    support: f64,
}

impl CosSum {
    fn random(rng: &mut ChaCha8Rng, support: f64, nu_max: f64) -> Self {
        let n = rng.gen_range(1..=4);
        let terms = (0..n).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.0..nu_max), rng.gen_range(0.0..2.0 * PI))).collect();
        CosSum { terms, support }
    }

    fn eval(&self, t: f64) -> f64 {
        if t.abs() > self.support {
            return 0.0;
        }
        self.terms.iter().map(|(a, nu, ph)| a * (2.0 * PI * nu * t + ph).cos()).sum()
    }

    fn fhat(&self, xi: f64) -> Complex64 {
        let t = self.support;
        self.terms
            .iter()
            .map(|(a, nu, ph)| {
                (Complex64::from_polar(1.0, *ph) * sinc(2.0 * PI * (nu - xi) * t)
                    + Complex64::from_polar(1.0, -ph) * sinc(2.0 * PI * (nu + xi) * t))
                    * (a * t)
            })
            .sum()
    }
}

/// The oracle's own absolute accuracy, added to the stated bounds.
pub const ORACLE_SLACK_1D: f64 = 1e-10;
pub const ORACLE_SLACK_REGION: f64 = 1e-9;

fn projection_1d(seed: u64) -> Checks {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let support = 1.0;
    let cases: Vec<(usize, f64, CosSum)> = (0..20)
        .map(|i| {
            let b = rng.gen_range(1.0..3.0);
            (i, b, CosSum::random(&mut rng, support, 3.0 * b))
        })
        .collect();
    cases
        .par_iter()
        .map(|(i, b, f)| -> rlimit_core::Result<Check> {
            let b = *b;
            let base = (2.0 * b).ceil() as usize;
            let (q, label) = match i % 4 {
                0 => (gl_rule(b, base + 1), format!("half GL M = {}", base + 1)),
                1 => (gl_rule(b, base + 3), format!("half GL M = {}", base + 3)),
                2 => (uniform_rule(b, base + 2), format!("uniform M = {}", base + 2)),
                _ => (pipeline_rule(b)?, "reduced-band GL".to_string()),
            };
            let pts: Vec<f64> = q.nodes.iter().map(|w| b * w).collect();
            let vals = pts.iter().map(|xi| f.fhat(*xi)).collect();
            let fhat = SampledField::new(PointSet::new(1, pts)?, vals, "fhat")?;
            let max_f = max_abs(linspace(-support, support, 4001).into_iter().map(|t| f.eval(t)));
            let bound = discrete_fourier_bound_1d(&q, b, support, max_f);
            let mut err: f64 = 0.0;
            for t in linspace(-support, support, 41) {
                let v = discrete_fourier_repr_1d(&fhat, &q, b, t)?;
                let o = bandlimited_projection_oracle(|x| f.eval(x), support, b, t)?;
                err = err.max((v - o).norm());
            }
            Ok(Check::new(
                7,
                format!("1D function {i:02}: discrete Fourier error <= 2T max|f| max|eps_B| + oracle tol"),
                err,
                bound + ORACLE_SLACK_1D,
                0.0,
            )
            .note(format!("B = {b:.4}, {label}, {} nodes, stated bound {bound:e}", q.len())))
        })
        .collect()
}

fn gl_rule(b: f64, m: usize) -> Quadrature1D {
    let mut h = gauss_legendre_01(m);
    h.band = b;
    h.to_symmetric()
}

/// ∫_X f(y) K(x − y) dy for a Gaussian f on X = [−1, 1]², nested adaptive.
fn region_oracle(spec: &TriangleSpec, center: [f64; 2], sigma: f64, x: &[f64]) -> rlimit_core::Result<Complex64> {
    let tight = IntegrationOptions { abs_tol: 1e-11, rel_tol: 0.0, max_segments: 4000 };
    let f = |y0: f64, y1: f64| (-((y0 - center[0]).powi(2) + (y1 - center[1]).powi(2)) / (2.0 * sigma * sigma)).exp();
    let mut inner_err = None;
    let v = integrate_c(
        |y0| match integrate_c(|y1| k_triangle(spec, x[0] - y0, x[1] - y1) * f(y0, y1), -1.0, 1.0, tight) {
            Ok(v) => v,
            Err(e) => {
                inner_err = Some(e);
                Complex64::new(0.0, 0.0)
            }
        },
        -1.0,
        1.0,
        tight,
    )?;
    match inner_err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

fn projection_region(seed: u64, grid: usize) -> Checks {
    let spec = TriangleSpec::new(1.0, 0.5)?.centered();
    let q = triangle_quadrature(&spec, 1, 1, &TargetBox::new(vec![2.0, 2.0])?)?;
    let k = ExpSumKernel::from_quadrature(&q)?;
    let samples = make_grid(&[-1.0, -1.0], &[1.0, 1.0], &[grid, grid])?;
    let eval = make_grid(&[-0.9, -0.9], &[0.9, 0.9], &[6, 6])?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x2d);
    let bumps: Vec<([f64; 2], f64)> =
        (0..5).map(|_| ([rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4)], rng.gen_range(0.1..0.14))).collect();
    let mut out = Vec::new();
    for (i, (center, sigma)) in bumps.iter().enumerate() {
        let f = SampledField::from_fn(samples.clone(), "gauss", |p| {
            Complex64::new((-((p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2)) / (2.0 * sigma * sigma)).exp(), 0.0)
        })?;
        let r = rlimited_discrete_fourier(&f, &k, &eval)?;
        let pts: Vec<&[f64]> = eval.iter().collect();
        let errs: Vec<f64> = pts
            .par_iter()
            .zip(r.field.values.par_iter())
            .map(|(x, v)| region_oracle(&spec, *center, *sigma, x).map(|o| (v - o).norm()))
            .collect::<rlimit_core::Result<_>>()?;
        let err = errs.into_iter().fold(0.0, f64::max);
        out.push(
            Check::new(
                7,
                format!("triangle region, Gaussian {i}: error <= |X| max|f| max|eps_K| + f-hat term + oracle tol"),
                err,
                r.error_bound + ORACLE_SLACK_REGION,
                0.0,
            )
            .note(format!("{grid}x{grid} samples, {} kernel nodes, stated bound {:e}", k.len(), r.error_bound)),
        );
    }
    Ok(out)
}

fn nyquist(seed: u64) -> Checks {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x8);
    let mut out = Vec::new();
    for b in [1.0, 2.5] {
        for k in 0..=8usize {
            let f: Vec<f64> = (0..2 * k + 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut worst: f64 = 0.0;
            for m in k..=k + 4 {
                worst = worst.max(nyquist_delta_train_check_band(&f, m, k, b)?.max_error);
            }
            out.push(Check::new(8, format!("delta train B = {b}, K = {k}, M = K..K+4: f_B(l/2B) = 2B f_l"), worst, 1e-9 * 2.0 * b, 0.0));
        }
    }
    Ok(out)
}

fn triangle(seed: u64) -> Checks {
    let mut out = Vec::new();
    let t = TriangleSpec::new(1.0, 1.0 / 3f64.sqrt())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (x, y) = (rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
        let half = (k_triangle(&t, 0.5 * x, 0.5 * y), k_triangle(&t, -0.5 * x, 0.5 * y));
        worst = worst.max((k_triangle(&t, x, y) - triangle_scaling_refine(&t, x, y, half)).norm() / t.area());
    }
    out.push(Check::new(9, "scaling identity at 1000 random points (relative to the area)", worst, 1e-12, 0.0));

    let t = TriangleSpec::new(1.0, 0.8)?;
    let target = TargetBox::new(vec![2.0, 1.5])?;
    let q = triangle_quadrature(&t, 3, 3, &target)?;
    let prof = q.error_profile.clone().expect("cascaded rules record a profile").max_error;
    let mut off: f64 = 0.0;
    for _ in 0..2000 {
        let p = [rng.gen_range(-2.0..2.0), rng.gen_range(-1.5..1.5)];
        off = off.max((q.eval(&p) - k_triangle(&t, p[0], p[1])).norm());
    }
    out.push(
        Check::new(9, "cascaded surrogate within its recorded profile at 2000 random target points", off, prof, 0.1)
            .note(format!("{} nodes; profile is a grid maximum, 10% slack", q.len())),
    );

    let q = triangle_quadrature(&t, 2, 2, &TargetBox::new(vec![0.25, 0.25])?)?;
    let level0 = q.error_profile.as_ref().expect("profile").max_error;
    let base = |x: f64, y: f64| q.eval(&[x, y]);
    let err = |m: u32, x: f64, y: f64| (triangle_refined_eval(&t, m, x, y, &base) - k_triangle(&t, x, y)).norm();
    let mut excess: f64 = 0.0;
    let mut grid_max: f64 = 0.0;
    for m in 1..=5u32 {
        let w = 0.25 * 2f64.powi(m as i32);
        for i in 0..=20 {
            for j in 0..=20 {
                let (x, y) = (-w + 2.0 * w * i as f64 / 20.0, -w + 2.0 * w * j as f64 / 20.0);
                let e = err(m, x, y);
                let comb = 0.25 * (3.0 * err(m - 1, 0.5 * x, 0.5 * y) + err(m - 1, -0.5 * x, 0.5 * y));
                excess = excess.max(e - comb);
                grid_max = grid_max.max(e);
            }
        }
    }
    out.push(Check::new(9, "refinement m = 1..5: pointwise error <= (3 e(x/2) + e(-x/2, y/2))/4", excess, 1e-13, 0.0));
    out.push(
        Check::new(9, "refinement m = 1..5: grid max error <= level-0 profile", grid_max, level0, 0.1)
            .note("profile is a grid maximum, 10% slack"),
    );
    Ok(out)
}

fn symmetry() -> Checks {
    let mut out = Vec::new();
    let q = equilateral_symmetric_quadrature(3, 3, &TargetBox::new(vec![1.0, 1.0])?)?;
    let group = q.symmetry_group.clone().unwrap_or_default();
    let mut d: f64 = if group.len() == 3 { 0.0 } else { f64::INFINITY };
    for g in &group {
        let moved = map_nodes(&q.nodes, g)?;
        d = d.max(multiset_match_distance(&q.nodes, &q.weights, &moved, &q.weights, 1e-9));
    }
    out.push(Check::new(10, "equilateral nodes invariant under rotation by 2pi/3", d, 1e-12, 0.0));

    let g = tetra_symmetry_group();
    let v = tetra_vertices();
    out.push(Check::new(10, "tetrahedral group has 12 elements", (g.len() as f64 - 12.0).abs(), 0.0, 0.0));
    let orth = g.iter().map(|r| (r * r.transpose() - Matrix3::identity()).norm()).fold(0.0, f64::max);
    let det = g.iter().map(|r| (r.determinant() - 1.0).abs()).fold(0.0, f64::max);
    let perm = g
        .iter()
        .flat_map(|r| v.iter().map(move |vi| v.iter().map(|vj| (r * vi - vj).norm()).fold(f64::INFINITY, f64::min)))
        .fold(0.0, f64::max);
    out.push(Check::new(10, "tetrahedral group: orthogonal", orth, 1e-12, 0.0));
    out.push(Check::new(10, "tetrahedral group: orientation preserving", det, 1e-12, 0.0));
    out.push(Check::new(10, "tetrahedral group: permutes the vertices", perm, 1e-12, 0.0));

    let q = tetra_symmetric_quadrature(2, 2, 2, &TargetBox::new(vec![0.5, 0.5, 0.5])?)?;
    let mut d: f64 = 0.0;
    for g in q.symmetry_group.as_ref().map_or(&[][..], |v| &v[..]) {
        let moved = map_nodes(&q.nodes, g)?;
        d = d.max(multiset_match_distance(&q.nodes, &q.weights, &moved, &q.weights, 1e-9));
    }
    if q.symmetry_group.as_ref().map_or(0, |v| v.len()) != 12 {
        d = f64::INFINITY;
    }
    out.push(Check::new(10, "tetrahedron nodes invariant under all 12 rotations", d, 1e-12, 0.0));
    Ok(out)
}

/// 2∫_0^{ω₀} cos(2πωt) ωp J1(2πωpr)/r dω — the cone kernel for n = 2 from the
/// Fourier transform of a disk.
fn cone_oracle(omega0: f64, pmax: f64, t: f64, r: f64) -> rlimit_core::Result<f64> {
    let opts = IntegrationOptions { abs_tol: 1e-12, rel_tol: 1e-12, max_segments: 4000 };
    integrate(
        |w| {
            let a = w * pmax;
            let disk = if r == 0.0 { PI * a * a } else { a * bessel_j1(2.0 * PI * a * r) / r };
            2.0 * (2.0 * PI * w * t).cos() * disk
        },
        0.0,
        omega0,
        opts,
    )
}

fn cone() -> Checks {
    let mut out = Vec::new();
    let s = ConeSpec::new(1.0, 1.0, 2)?;
    let j1 = preset_rule(Preset::J1Cosinc, 1.0, 6, 1e-8)?;
    let (tw, rw) = (2.0, 2.0);
    let mut sum = 0.0;
    for i in 0..21 {
        for j in 0..21 {
            let t = -tw + 2.0 * tw * i as f64 / 20.0;
            let r = rw * j as f64 / 20.0;
            sum += (tilde_k_cone(&s, &j1, t, r)? - cone_oracle(1.0, 1.0, t, r)?).norm_sqr();
        }
    }
    let rms = (sum / 441.0).sqrt();
    let ls = cone_ls_error(&s, &j1)?;
    let level = (ls / (2.0 * tw * PI * rw * rw)).sqrt();
    out.push(
        Check::new(11, "cone surrogate M = 6: RMS error on 21x21 (t, r) grid <= LS level", rms, level, 0.05)
            .note(format!("LS error {ls:e} over |t| <= {tw}, r <= {rw}")),
    );

    let opts = IntegrationOptions::default();
    let cone_measure = 2.0 * integrate(|w| PI * w * w, 0.0, 1.0, opts)?;
    let cq = cone_quadrature(&s, 3, 3, 10, &TargetBox::new(vec![0.5, 0.4, 0.4])?)?;
    out.push(Check::new(
        11,
        "cone quadrature weights sum to the cone measure",
        (cq.weight_sum() - cone_measure).abs() / cone_measure,
        1e-6,
        0.0,
    ));
    let ball_measure = integrate(|r| 4.0 * PI * r * r, 0.0, 1.0, opts)?;
    let bq = ball_quadrature(1.0, 3, 8, 6, &TargetBox::new(vec![0.6, 0.6, 0.6])?)?;
    out.push(Check::new(
        11,
        "ball quadrature weights sum to the ball volume",
        (bq.weight_sum() - ball_measure).abs() / ball_measure,
        1e-6,
        0.0,
    ));
    Ok(out)
}
