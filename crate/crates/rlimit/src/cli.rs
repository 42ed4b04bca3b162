use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use rlimit_core::kernels::*;
use rlimit_core::moments::*;
use rlimit_core::numkit::{linspace, make_grid, PointSet, SampledField};
use rlimit_core::projection::*;
use rlimit_core::prolate::*;
use rlimit_core::sincapprox::*;
use rlimit_core::Complex64;

use crate::formats::*;
use crate::verify::{self, Suite, VerifyOptions};
use crate::{Error, Result, EXIT_OK, EXIT_VERIFY_FAILED};

#[derive(Debug, Parser)]
#[command(name = "rlimit", version, about = "Quadratures, prolate bases and projections for R-limited functions")]
pub struct Cli {
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Grid points per axis (command specific default).
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Tolerance: moment-solve tolerance for `quad`, check slack for `verify`.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed for generated test functions.
    #[arg(long, global = true, default_value_t = 2024)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a 1D moment quadrature or a multidimensional kernel rule.
    Quad(QuadArgs),
    /// Tabulate the cosine-sum (or chirplet-sum) approximation of sinc(B0 x).
    ApproxSinc(ApproxSincArgs),
    /// Discrete prolate eigenbasis of a band-limited quadrature.
    Pswf(PswfArgs),
    /// Evaluate a region kernel on a grid, optionally with its surrogate.
    KernelEval(KernelEvalArgs),
    /// Project sampled data with a kernel rule.
    Project(ProjectArgs),
    /// Run the verification suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegionKind {
    Interval,
    Triangle,
    Equilateral,
    Tetra,
    Cone,
    Ball,
}

#[derive(Debug, Clone, Args)]
pub struct RegionArgs {
    #[arg(long, value_enum)]
    pub region: Option<RegionKind>,
    /// Triangle/tetrahedron height parameter Δp.
    #[arg(long)]
    pub dp: Option<f64>,
    /// Triangle/tetrahedron slope s.
    #[arg(long)]
    pub s: Option<f64>,
    /// Tetrahedron height h.
    #[arg(long)]
    pub h: Option<f64>,
    /// Translate the triangle so that its centroid is at the origin.
    #[arg(long)]
    pub centered: bool,
    #[arg(long)]
    pub omega0: Option<f64>,
    #[arg(long)]
    pub pmax: Option<f64>,
    /// Spatial dimensions of the cone.
    #[arg(long)]
    pub n: Option<usize>,
    /// Radius of the ball / half width of the interval.
    #[arg(long)]
    pub kmax: Option<f64>,
    /// Use the rotation-invariant construction (equilateral, tetra).
    #[arg(long)]
    pub symmetric: bool,
    #[arg(long, default_value_t = 3)]
    pub m_outer: usize,
    #[arg(long, default_value_t = 3)]
    pub m_inner: usize,
    /// Third order (tetra inner-most, cone/ball angular).
    #[arg(long, default_value_t = 6)]
    pub m3: usize,
    /// Half widths of the target box, comma separated (one value = all axes).
    #[arg(long, value_delimiter = ',')]
    pub target: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct QuadArgs {
    /// 1D rule: gauss-legendre, chebyshev, uniform, sinc-pipeline or a moment
    /// table row (sinc_cos, j0_cos, gauss_cos, sinc_gauss, j0_sinc, j1_cosinc).
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long = "M", alias = "m")]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub band: f64,
    #[command(flatten)]
    pub region: RegionArgs,
}

#[derive(Debug, Args)]
pub struct ApproxSincArgs {
    #[arg(long, default_value_t = 20.0)]
    pub b0: f64,
    #[arg(long = "M", alias = "m", default_value_t = 6)]
    pub m: usize,
    #[arg(long, default_value_t = 2.0)]
    pub xmax: f64,
    /// Gaussian-chirp terms instead of cosines.
    #[arg(long)]
    pub chirplet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleKind {
    Gl,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SystemArg {
    Kernel,
    Exp,
}

#[derive(Debug, Args)]
pub struct PswfArgs {
    #[arg(long, default_value_t = 2.0)]
    pub band: f64,
    /// Rule size; default ⌈2B⌉ + 6 (gl) or ⌈2B⌉ (uniform).
    #[arg(long = "M", alias = "m")]
    pub m: Option<usize>,
    #[arg(long, value_enum, default_value_t = RuleKind::Gl)]
    pub rule: RuleKind,
    #[arg(long, value_enum, default_value_t = SystemArg::Kernel)]
    pub system: SystemArg,
    /// Number of eigenfunctions written as fields on [−1, 1].
    #[arg(long, default_value_t = 4)]
    pub count: usize,
}

#[derive(Debug, Args)]
pub struct KernelEvalArgs {
    #[command(flatten)]
    pub region: RegionArgs,
    /// Half width of the evaluation box (default: a few kernel lobes).
    #[arg(long)]
    pub extent: Option<f64>,
    /// Also build the cascaded surrogate on the evaluation box and report its error.
    #[arg(long)]
    pub surrogate: bool,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    /// Sampled field (CSV).
    #[arg(long)]
    pub input: PathBuf,
    /// Kernel rule (JSON written by `quad`); not needed with --delta-train.
    #[arg(long)]
    pub kernel: Option<PathBuf>,
    /// Evaluation points (CSV field; values ignored). Default: the input points.
    #[arg(long)]
    pub points: Option<PathBuf>,
    /// Treat the input as Nyquist samples f_l at l/(2B) and project the delta train.
    #[arg(long)]
    pub delta_train: bool,
    #[arg(long, default_value_t = 1.0)]
    pub band: f64,
    /// Uniform-rule size for --delta-train (default K).
    #[arg(long = "M", alias = "m")]
    pub m: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Suites to run: names, criterion numbers or `all` (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "all")]
    pub suite: Vec<String>,
}

fn param(msg: impl Into<String>) -> Error {
    Error::Param(msg.into())
}

/// Run a parsed command; returns the process exit code.
pub fn run(cli: &Cli) -> Result<i32> {
    fs::create_dir_all(&cli.out).map_err(|source| Error::Io { path: cli.out.clone(), source })?;
    match &cli.command {
        Command::Quad(a) => cmd_quad(cli, a),
        Command::ApproxSinc(a) => cmd_approx_sinc(cli, a),
        Command::Pswf(a) => cmd_pswf(cli, a),
        Command::KernelEval(a) => cmd_kernel_eval(cli, a),
        Command::Project(a) => cmd_project(cli, a),
        Command::Verify(a) => cmd_verify(cli, a),
    }
}

fn target_box(r: &RegionArgs, dim: usize, default: f64) -> Result<TargetBox> {
    let w = match r.target.len() {
        0 => vec![default; dim],
        1 => vec![r.target[0]; dim],
        n if n == dim => r.target.clone(),
        n => return Err(param(format!("--target has {n} values for a {dim}-d region"))),
    };
    Ok(TargetBox::new(w)?)
}

fn triangle_spec(r: &RegionArgs, figure_default: bool) -> Result<TriangleSpec> {
    let t = match (r.dp, r.s) {
        (None, None) if figure_default => return Ok(TriangleSpec::new(75.0, 1.0 / 3f64.sqrt())?.centered()),
        (dp, s) => TriangleSpec::new(dp.unwrap_or(1.0), s.unwrap_or(0.5))?,
    };
    Ok(if r.centered { t.centered() } else { t })
}

fn tetra_spec(r: &RegionArgs) -> Result<TetraSpec> {
    match (r.h, r.dp, r.s) {
        (None, None, None) => Ok(TetraSpec::preset()),
        (h, dp, s) => {
            let p = TetraSpec::preset();
            Ok(TetraSpec::new(h.unwrap_or(p.h), dp.unwrap_or(p.dp), s.unwrap_or(p.s))?)
        }
    }
}

fn cone_spec(r: &RegionArgs, omega0: f64, n: usize) -> Result<ConeSpec> {
    Ok(ConeSpec::new(r.omega0.unwrap_or(omega0), r.pmax.unwrap_or(1.0), r.n.unwrap_or(n))?)
}

/// The cascaded rule of a region, accurate on `target`.
fn region_rule(kind: RegionKind, r: &RegionArgs, target: &TargetBox, figure_default: bool) -> Result<QuadratureND> {
    Ok(match kind {
        RegionKind::Interval => return Err(param("interval rules are 1D; use --preset")),
        RegionKind::Triangle => triangle_quadrature(&triangle_spec(r, figure_default)?, r.m_outer, r.m_inner, target)?,
        RegionKind::Equilateral if r.symmetric => equilateral_symmetric_quadrature(r.m_outer, r.m_inner, target)?,
        RegionKind::Equilateral => {
            let t = TriangleSpec::equilateral();
            triangle_quadrature(&if r.centered { t.centered() } else { t }, r.m_outer, r.m_inner, target)?
        }
        RegionKind::Tetra if r.symmetric => tetra_symmetric_quadrature(r.m_outer, r.m_inner, r.m3, target)?,
        RegionKind::Tetra => tetra_quadrature(&tetra_spec(r)?, r.m_outer, r.m_inner, r.m3, target)?,
        RegionKind::Cone => cone_quadrature(
            &cone_spec(r, if figure_default { 50.0 } else { 1.0 }, if figure_default { 1 } else { 2 })?,
            r.m_outer,
            r.m_inner,
            r.m3,
            target,
        )?,
        RegionKind::Ball => ball_quadrature(r.kmax.unwrap_or(1.0), r.m_outer, r.m_inner, r.m3, target)?,
    })
}

fn region_dim(kind: RegionKind, r: &RegionArgs, figure_default: bool) -> usize {
    match kind {
        RegionKind::Interval => 1,
        RegionKind::Triangle | RegionKind::Equilateral => 2,
        RegionKind::Tetra | RegionKind::Ball => 3,
        RegionKind::Cone => r.n.unwrap_or(if figure_default { 1 } else { 2 }) + 1,
    }
}

fn cmd_quad(cli: &Cli, a: &QuadArgs) -> Result<i32> {
    let json = cli.out.join("quad.json");
    let csv = cli.out.join("nodes.csv");
    if let Some(name) = &a.preset {
        let m = a.m.ok_or_else(|| param("--M is required with --preset"))?;
        if m == 0 {
            return Err(param("--M must be positive"));
        }
        let tol = cli.tol.unwrap_or(1e-8);
        let (q, residuals, level) = match name.as_str() {
            "gauss-legendre" | "gl" => {
                let q = gauss_legendre_01(m);
                let r = verify_moments(&q, &preset_moments(Preset::SincCos, 1.0, 2 * m - 1)?);
                (q, r, None)
            }
            "chebyshev" => {
                let q = chebyshev_rule_for_j0(m);
                let r = verify_moments(&q, &preset_moments(Preset::J0Cos, 1.0, 2 * m - 1)?);
                (q, r, None)
            }
            "uniform" => (uniform_rule(a.band, m), Vec::new(), None),
            "sinc-pipeline" => {
                let ap = build_sinc_cosine_approx(a.band, m)?;
                let h = preset_moments(Preset::SincCos, ap.reduced_band(), 2 * m - 1)?;
                (ap.rule(), verify_moments(&ap.base_quadrature, &h), Some(ap.level))
            }
            other => {
                let p = Preset::from_name(other).ok_or_else(|| param(format!("unknown preset `{other}`")))?;
                let q = preset_rule(p, a.band, m, tol)?;
                let r = verify_moments(&q, &preset_moments(p, a.band, 2 * m - 1)?);
                (q, r, None)
            }
        };
        let q = if a.region.symmetric { q.to_symmetric() } else { q };
        let worst = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        let prov = RuleProvenance { preset: Some(name.clone()), m: Some(m), residuals, level };
        write_json(&json, &QuadratureFile::from_rule(&q, prov))?;
        let field =
            SampledField::new(PointSet::new(1, q.nodes.clone())?, q.weights.iter().map(|w| Complex64::new(*w, 0.0)).collect(), "nodes")?;
        save_field(&csv, &field)?;
        println!("{name}: {} nodes, band {}, max moment residual {worst:e}", q.len(), q.band);
        return Ok(EXIT_OK);
    }
    let kind = a.region.region.ok_or_else(|| param("give --preset (1D) or --region"))?;
    let dim = region_dim(kind, &a.region, false);
    let target = target_box(&a.region, dim, 1.0)?;
    let q = region_rule(kind, &a.region, &target, false)?;
    let prov = vec![format!("region {kind:?}, orders ({}, {}, {})", a.region.m_outer, a.region.m_inner, a.region.m3)];
    write_json(&json, &QuadratureNdFile::from_quadrature(&q, prov))?;
    let field = SampledField::new(q.nodes.clone(), q.weights.iter().map(|w| Complex64::new(*w, 0.0)).collect(), "nodes")?;
    save_field(&csv, &field)?;
    let err = q.error_profile.as_ref().map_or(f64::NAN, |p| p.max_error);
    println!("{kind:?}: {} nodes, weight sum {:.15}, max kernel error on target {err:e}", q.len(), q.weight_sum());
    Ok(EXIT_OK)
}

fn cmd_approx_sinc(cli: &Cli, a: &ApproxSincArgs) -> Result<i32> {
    let n = cli.grid.unwrap_or(4001);
    if n < 2 || !(a.xmax > 0.0) {
        return Err(param("need --grid >= 2 and --xmax > 0"));
    }
    let xs = linspace(-a.xmax, a.xmax, n);
    let (rows, level, reduced) = if a.chirplet {
        let c = build_chirplet_approx(a.b0, a.m)?;
        let rows: Vec<Vec<f64>> = xs
            .iter()
            .map(|&x| {
                let v = eval_chirplet_sum(&c, x);
                let e = rlimit_core::numkit::sinc(a.b0 * x);
                vec![x, v.re, e, (e - v).norm()]
            })
            .collect();
        (rows, c.level, c.reduced_band())
    } else {
        let c = build_sinc_cosine_approx(a.b0, a.m)?;
        (cosine_sum_table(&c, &xs).into_iter().map(|r| r.to_vec()).collect(), c.level, c.reduced_band())
    };
    let max_error = rows.iter().fold(0.0f64, |m, r| m.max(r[3].abs()));
    save_table(&cli.out.join("approx_sinc.csv"), &["x", "approx", "exact", "error"], &rows)?;
    let side = serde_json::json!({
        "b0": a.b0, "M": a.m, "kind": if a.chirplet { "chirplet" } else { "cosine" },
        "level": level, "reduced_band": reduced, "grid": n, "xmax": a.xmax, "max_error": max_error,
    });
    write_json(&cli.out.join("approx_sinc.json"), &side)?;
    println!("B0 = {}: level {level}, reduced band {reduced}, max error on [-{x}, {x}] = {max_error:e}", a.b0, x = a.xmax);
    Ok(EXIT_OK)
}

fn cmd_pswf(cli: &Cli, a: &PswfArgs) -> Result<i32> {
    let b = a.band;
    if !(b > 0.0) {
        return Err(param("--band must be positive"));
    }
    let q = match a.rule {
        RuleKind::Gl => build_sinc_cosine_approx(b, a.m.unwrap_or((2.0 * b).ceil() as usize + 6))?.symmetric_rule(),
        RuleKind::Uniform => uniform_rule(b, a.m.unwrap_or((2.0 * b).ceil() as usize)),
    };
    let basis = match a.system {
        SystemArg::Kernel => pswf_kernel_eigensystem(&q, b)?,
        SystemArg::Exp => pswf_exp_eigensystem(&q, b)?,
    };
    let prov = vec![format!("band {b}, {:?} rule with {} nodes, {:?} system", a.rule, q.len(), a.system)];
    write_json(&cli.out.join("eigenbasis.json"), &EigenBasisFile::new(&basis, prov))?;
    let rows: Vec<Vec<f64>> = (0..basis.len())
        .map(|n| {
            let l = basis.eigenvalues_lambda.get(n).copied().unwrap_or(Complex64::new(f64::NAN, f64::NAN));
            vec![n as f64, basis.eigenvalues_mu[n], l.re, l.im]
        })
        .collect();
    save_table(&cli.out.join("eigenvalues.csv"), &["n", "mu", "lambda_re", "lambda_im"], &rows)?;
    let ts = linspace(-1.0, 1.0, cli.grid.unwrap_or(201).max(2));
    let mode = match a.system {
        SystemArg::Kernel => ExtensionMode::KernelExtension,
        SystemArg::Exp => ExtensionMode::ExpExtension,
    };
    let ev = ProlateEvaluator::new(basis.clone(), mode);
    for n in 0..a.count.min(basis.len()) {
        if basis.eigenvalues_mu[n] < MU_MIN {
            break;
        }
        let vals = ts.iter().map(|t| extend_prolate(&ev, n, &[*t])).collect::<rlimit_core::Result<Vec<_>>>()?;
        save_field(&cli.out.join(format!("phi_{n}.csv")), &SampledField::new(PointSet::new(1, ts.clone())?, vals, format!("phi_{n}"))?)?;
    }
    let trace: f64 = basis.eigenvalues_mu.iter().sum();
    println!("band {b}: {} nodes, {} eigenvalues above 1/2, trace {trace:.12}", q.len(), basis.count_above(0.5));
    Ok(EXIT_OK)
}

fn cmd_kernel_eval(cli: &Cli, a: &KernelEvalArgs) -> Result<i32> {
    let kind = a.region.region.unwrap_or(RegionKind::Triangle);
    let r = &a.region;
    let region = match kind {
        RegionKind::Interval => Region::Interval { half_width: r.kmax.unwrap_or(1.0) },
        RegionKind::Triangle => Region::Triangle(triangle_spec(r, true)?),
        RegionKind::Equilateral => {
            let t = TriangleSpec::equilateral();
            Region::Triangle(if r.centered { t.centered() } else { t })
        }
        RegionKind::Tetra => Region::Tetrahedron(tetra_spec(r)?),
        RegionKind::Cone => Region::Cone(cone_spec(r, 50.0, 1)?),
        RegionKind::Ball => Region::Ball { dim: 3, k_max: r.kmax.unwrap_or(1.0) },
    };
    let dim = region.dim();
    let (lo, hi) = region.bounding_box();
    let scale = lo.iter().chain(&hi).fold(0.0f64, |m, v| m.max(v.abs()));
    let extent = a.extent.unwrap_or(3.0 / scale);
    let n = cli.grid.unwrap_or(if dim == 3 { 21 } else { 101 });
    let grid = make_grid(&vec![-extent; dim], &vec![extent; dim], &vec![n; dim])?;
    let pts: Vec<&[f64]> = grid.iter().collect();
    let exact: Vec<Complex64> = pts
        .par_iter()
        .map(|x| region_kernel_exact(&region, &x.iter().map(|v| 2.0 * PI * v).collect::<Vec<_>>()))
        .collect::<rlimit_core::Result<_>>()?;
    save_field(&cli.out.join("kernel.csv"), &SampledField::new(grid.clone(), exact.clone(), "kernel")?)?;
    let mut prov = vec![format!("K(x) = integral over the region of exp(i 2 pi k.x), {n}^{dim} grid on [-{extent}, {extent}]^{dim}")];
    if a.surrogate {
        let target = TargetBox::new(vec![extent; dim])?;
        let q = region_rule(kind, r, &target, true)?;
        let approx: Vec<Complex64> = pts.par_iter().map(|x| q.eval(x)).collect();
        let err = approx.iter().zip(&exact).fold(0.0f64, |m, (u, v)| m.max((u - v).norm()));
        save_field(&cli.out.join("kernel_surrogate.csv"), &SampledField::new(grid.clone(), approx, "surrogate")?)?;
        prov.push(format!("surrogate: {} nodes, max error on this grid {err:e}", q.len()));
        println!("surrogate with {} nodes: max error {err:e}", q.len());
    }
    let side = Sidecar { label: "kernel".into(), dim, n_points: grid.len(), error_bound: None, provenance: prov };
    write_json(&cli.out.join("kernel.json"), &side)?;
    println!("{kind:?} kernel on {} points written", grid.len());
    Ok(EXIT_OK)
}

/// Half widths (per axis) of X − X ∪ x − X.
fn required_half_widths(field: &PointSet, eval: &PointSet) -> Vec<f64> {
    let d = field.dim();
    (0..d)
        .map(|i| {
            let (flo, fhi) = field.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p[i]), b.max(p[i])));
            let (elo, ehi) = eval.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p[i]), b.max(p[i])));
            (fhi - flo).max(ehi - flo).max(fhi - elo)
        })
        .collect()
}

fn load_kernel(path: &Path, field: &PointSet, eval: &PointSet) -> Result<ExpSumKernel> {
    match read_json::<RuleFile>(path)? {
        RuleFile::Nd(f) => f.to_kernel(path),
        RuleFile::OneD(f) => {
            let q = f.to_rule(path)?.to_symmetric();
            let mut k = ExpSumKernel::from_rule_1d(&q)?;
            if field.dim() != 1 || eval.dim() != 1 {
                return Err(Error::Format { path: path.to_path_buf(), msg: "1D rule used with multidimensional data".into() });
            }
            let hw = required_half_widths(field, eval)[0] * q.band;
            let reach = hw * q.nodes.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let count = ((64.0 * reach).ceil() as usize).max(400) + 1;
            k.measure_profile(&TargetBox::new(vec![hw])?, &[count])?;
            Ok(k)
        }
    }
}

fn cmd_project(cli: &Cli, a: &ProjectArgs) -> Result<i32> {
    let input = load_field(&a.input)?;
    if a.delta_train {
        let n = input.len();
        if input.points.dim() != 1 || n % 2 == 0 {
            return Err(Error::Format { path: a.input.clone(), msg: "delta-train input must be 1D with 2K+1 samples".into() });
        }
        let k = n / 2;
        for (i, p) in input.points.iter().enumerate() {
            let expected = (i as f64 - k as f64) / (2.0 * a.band);
            if (p[0] - expected).abs() > 1e-9 * expected.abs().max(1.0) {
                return Err(Error::Format { path: a.input.clone(), msg: format!("sample {i} at {} is not at l/(2B) = {expected}", p[0]) });
            }
        }
        let f: Vec<f64> = input.values.iter().map(|v| v.re).collect();
        let rep = nyquist_delta_train_check_band(&f, a.m.unwrap_or(k), k, a.band)?;
        let pts: Vec<f64> = rep.lattice.iter().map(|(l, _, _)| *l as f64 / (2.0 * a.band)).collect();
        let vals = rep.lattice.iter().map(|(_, v, _)| *v).collect();
        save_field(&cli.out.join("projection.csv"), &SampledField::new(PointSet::new(1, pts)?, vals, "lattice")?)?;
        let side = Sidecar {
            label: "delta-train projection".into(),
            dim: 1,
            n_points: n,
            error_bound: Some(rep.max_error),
            provenance: vec![format!("uniform rule M = {}, band {}, max |f_B(l/2B) - 2B f_l| = {:e}", rep.m, rep.band, rep.max_error)],
        };
        write_json(&cli.out.join("projection.json"), &side)?;
        println!("lattice values reproduced to {:e}", rep.max_error);
        return Ok(EXIT_OK);
    }
    let kernel_path = a.kernel.as_ref().ok_or_else(|| param("--kernel is required"))?;
    let eval = match &a.points {
        Some(p) => load_field(p)?.points,
        None => input.points.clone(),
    };
    let k = load_kernel(kernel_path, &input.points, &eval)?;
    let r = rlimited_discrete_fourier(&input, &k, &eval)?;
    save_field(&cli.out.join("projection.csv"), &r.field)?;
    let side = Sidecar {
        label: "projection".into(),
        dim: eval.dim(),
        n_points: eval.len(),
        error_bound: Some(r.error_bound),
        provenance: r.provenance.clone(),
    };
    write_json(&cli.out.join("projection.json"), &side)?;
    println!("projected {} points, error bound {:e}", eval.len(), r.error_bound);
    Ok(EXIT_OK)
}

fn cmd_verify(cli: &Cli, a: &VerifyArgs) -> Result<i32> {
    let mut suites = Vec::new();
    for s in &a.suite {
        suites.extend(Suite::parse_selection(s).map_err(param)?);
    }
    let opts = VerifyOptions { grid: cli.grid.unwrap_or(41), seed: cli.seed, tol: cli.tol };
    if opts.grid < 3 {
        return Err(param("--grid must be at least 3"));
    }
    let report = verify::run(&suites, &opts);
    for c in &report.checks {
        println!(
            "{} [{:>2}] {}: {:e} <= {:e}{}",
            if c.pass { "PASS" } else { "FAIL" },
            c.criterion,
            c.name,
            c.value_measured,
            c.bound_claimed,
            if c.slack > 0.0 { format!(" (slack {})", c.slack) } else { String::new() }
        );
    }
    write_json(&cli.out.join("verify_report.json"), &report)?;
    let failed: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
    println!("{} checks, {} failed, {:.1} s", report.checks.len(), failed.len(), report.runtime_s);
    if failed.is_empty() {
        Ok(EXIT_OK)
    } else {
        eprintln!("failed checks:\n  {}", failed.join("\n  "));
        Ok(EXIT_VERIFY_FAILED)
    }
}
