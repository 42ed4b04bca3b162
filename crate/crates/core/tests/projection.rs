use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rlimit_core::kernels::{k_triangle, triangle_quadrature, TargetBox, TriangleSpec};
use rlimit_core::moments::{gauss_legendre_01, uniform_rule, Quadrature1D};
use rlimit_core::numkit::{
    composite_gauss, gauss_legendre, integrate_c, linspace, make_grid, sinc, IntegrationOptions, PointSet, SampledField,
};
use rlimit_core::projection::*;
use rlimit_core::prolate::*;
use rlimit_core::sincapprox::build_sinc_cosine_approx;
use rlimit_core::Complex64;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Σ a cos(2πνt + φ) on [−T, T], zero outside.
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

    /// ∫_{−T}^{T} f(t) e^{−i2πξt} dt in closed form.
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

    fn max_abs(&self) -> f64 {
        linspace(-self.support, self.support, 4001).iter().fold(0.0, |m, t| m.max(self.eval(*t).abs()))
    }
}

fn plain_gl(b: f64, m: usize) -> Quadrature1D {
    let mut h = gauss_legendre_01(m);
    h.band = b;
    h.to_symmetric()
}

fn pipeline_rule(b: f64) -> Quadrature1D {
    build_sinc_cosine_approx(b, (2.0 * b).ceil() as usize + 6).unwrap().symmetric_rule()
}

fn field_1d(xs: &[f64], mut f: impl FnMut(f64) -> Complex64) -> SampledField {
    SampledField::new(PointSet::new(1, xs.to_vec()).unwrap(), xs.iter().map(|x| f(*x)).collect(), "test").unwrap()
}

mod oracle {
    use super::*;

    #[test]
    fn zero_function() {
        assert_eq!(bandlimited_projection_oracle(|_| 0.0, 1.0, 2.0, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn narrow_bump_gives_the_kernel() {
        let h = 1e-3;
        let b = 1.0;
        for t in [0.0, 0.17, 0.5, 1.3] {
            let v = bandlimited_projection_oracle(|_| 1.0 / (2.0 * h), h, b, t).unwrap();
            assert!((v - 2.0 * b * sinc(2.0 * PI * b * t)).abs() < 1e-4, "t = {t}");
        }
    }

    #[test]
    fn agrees_with_fixed_gauss_integration() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let f = CosSum::random(&mut rng, 1.0, 4.0);
            let b = rng.gen_range(0.5..3.0);
            let t = rng.gen_range(-1.5..1.5);
            let a = bandlimited_projection_oracle(|x| f.eval(x), 1.0, b, t).unwrap();
            let g = composite_gauss(|x| c(f.eval(x) * 2.0 * b * sinc(2.0 * PI * b * (t - x))), -1.0, 1.0, 64, 20);
            assert!((a - g.re).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(bandlimited_projection_oracle(|_| 1.0, 0.0, 1.0, 0.0).is_err());
        assert!(bandlimited_projection_oracle(|_| 1.0, 1.0, -1.0, 0.0).is_err());
    }
}

mod discrete_fourier_1d {
    use super::*;

    /// f_B vs Σ α f̂(Bω) e^{i2πBωt} on [−T, T], bound 2T max|f| max|ε_B| on [−2T, 2T].
    #[test]
    fn random_cosine_sums_within_the_stated_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let support = 1.0;
        let mut worst_ratio: f64 = 0.0;
        for i in 0..20 {
            let b = rng.gen_range(1.0..3.0);
            let f = CosSum::random(&mut rng, support, 3.0 * b);
            let base = (2.0 * b).ceil() as usize;
            let q = match i % 4 {
                0 => plain_gl(b, base + 1),
                1 => plain_gl(b, base + 3),
                2 => uniform_rule(b, base + 2),
                _ => pipeline_rule(b),
            };
            let fhat = field_1d(&q.nodes.iter().map(|w| b * w).collect::<Vec<_>>(), |xi| f.fhat(xi));
            let bound = discrete_fourier_bound_1d(&q, b, support, f.max_abs());
            let mut err: f64 = 0.0;
            for t in linspace(-support, support, 41) {
                let v = discrete_fourier_repr_1d(&fhat, &q, b, t).unwrap();
                let o = bandlimited_projection_oracle(|x| f.eval(x), support, b, t).unwrap();
                err = err.max((v - o).norm());
            }
            // the oracle itself is accurate to 1e-10
            assert!(err <= bound + 1e-10, "function {i}: error {err:e} > bound {bound:e}");
            worst_ratio = worst_ratio.max(err / bound);
        }
        println!("largest error/bound ratio: {worst_ratio:.3}");
    }

    #[test]
    fn zero_transform_gives_zero() {
        let q = pipeline_rule(2.0);
        let fhat = field_1d(&q.nodes.iter().map(|w| 2.0 * w).collect::<Vec<_>>(), |_| c(0.0));
        assert_eq!(discrete_fourier_repr_1d(&fhat, &q, 2.0, 0.4).unwrap(), c(0.0));
    }

    #[test]
    fn uniform_rule_is_an_inverse_dft() {
        let (b, m) = (1.5, 6);
        let q = uniform_rule(b, m);
        let n = 2 * m + 1;
        let vals: Vec<Complex64> = (0..n).map(|k| Complex64::new((k as f64).sin(), (k as f64 * 0.3).cos())).collect();
        let pts: Vec<f64> = q.nodes.iter().map(|w| b * w).collect();
        let fhat = SampledField::new(PointSet::new(1, pts).unwrap(), vals.clone(), "fhat").unwrap();
        for l in -3i32..=3 {
            let t = l as f64 / (2.0 * b);
            let direct: Complex64 = (0..n)
                .map(|k| vals[k] * Complex64::from_polar(2.0 * b / n as f64, 2.0 * PI * (k as f64 - m as f64) * l as f64 / n as f64))
                .sum();
            assert!((discrete_fourier_repr_1d(&fhat, &q, b, t).unwrap() - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_mismatched_samples() {
        let q = pipeline_rule(2.0);
        let wrong = field_1d(&q.nodes, |_| c(1.0));
        assert!(discrete_fourier_repr_1d(&wrong, &q, 2.0, 0.0).is_err());
        let short = field_1d(&[0.0], |_| c(1.0));
        assert!(discrete_fourier_repr_1d(&short, &q, 2.0, 0.0).is_err());
    }

    #[test]
    fn sinc_rule_error_matches_direct_sum() {
        let q = plain_gl(2.0, 6);
        for x in [0.0, 0.3, 1.1, 1.9] {
            let direct = q.eval(x) - 4.0 * sinc(4.0 * PI * x);
            assert!((sinc_rule_error(&q, 2.0, x) - direct).norm() < 1e-13);
        }
    }
}

mod nyquist {
    use super::*;

    #[test]
    fn lattice_reproduces_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for b in [1.0, 2.5] {
            for k in 0..=8usize {
                let f: Vec<f64> = (0..2 * k + 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
                for m in k..=k + 4 {
                    let r =
                        if b == 1.0 { nyquist_delta_train_check(&f, m, k) } else { nyquist_delta_train_check_band(&f, m, k, b) }.unwrap();
                    assert!(r.max_error <= 1e-9 * 2.0 * b, "B = {b}, K = {k}, M = {m}: {:e}", r.max_error);
                    assert!(r.epsilon_f.iter().all(|e| e.norm() <= 1e-9 * 2.0 * b));
                    assert_eq!(r.lattice.len(), 2 * k + 1);
                }
            }
        }
    }

    #[test]
    fn kronecker_delta() {
        let k = 3;
        let mut f = vec![0.0; 2 * k + 1];
        f[k] = 1.0;
        let r = nyquist_delta_train_check(&f, 5, k).unwrap();
        for (l, v, _) in &r.lattice {
            let expected = if *l == 0 { 2.0 } else { 0.0 };
            assert!((v - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn single_sample() {
        let r = nyquist_delta_train_check(&[0.7], 0, 0).unwrap();
        assert!((r.lattice[0].1 - 1.4).norm() < 1e-14);
    }

    #[test]
    fn needs_m_at_least_k() {
        assert!(nyquist_delta_train_check(&[0.0; 7], 2, 3).is_err());
        assert!(nyquist_delta_train_check(&[0.0; 5], 3, 3).is_err());
    }
}

mod sampling_1d {
    use super::*;

    #[test]
    fn nyquist_setup_is_sinc_interpolation() {
        let m = 5;
        let b = (2 * m + 1) as f64 / 4.0;
        let q = uniform_rule(b, m);
        let basis = pswf_kernel_eigensystem(&q, b).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let y = field_1d(&q.nodes, |_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let modes = [
            SamplingOptions::default(),
            SamplingOptions { regularization: Regularization::Spectral, ..Default::default() },
            SamplingOptions { source: SampleSource::Compact, ..Default::default() },
        ];
        for t in linspace(-1.2, 1.2, 25) {
            let direct: Complex64 = q.nodes.iter().zip(&y.values).map(|(w, v)| v * sinc(2.0 * PI * b * (t - w))).sum();
            for o in &modes {
                let v = sampling_interpolation_1d_with(&y, &q, b, &basis, t, o).unwrap();
                assert!((v - direct).norm() < 1e-12, "{o:?} t = {t}");
            }
        }
    }

    #[test]
    fn eigenfunction_round_trip() {
        let b = 2.0;
        let q = pipeline_rule(b);
        let basis = pswf_kernel_eigensystem(&q, b).unwrap();
        let j = basis.count_above(0.99) - 1;
        let mu = basis.eigenvalues_mu[j];
        let ev = ProlateEvaluator::new(basis.clone(), ExtensionMode::KernelExtension);
        let phi = |t: f64| extend_prolate(&ev, j, &[t]).unwrap();
        assert!((0..q.len()).all(|r| basis.eigenvectors[(r, j)].im.abs() < 1e-12));
        let samples =
            SampledField::new(PointSet::new(1, q.nodes.clone()).unwrap(), basis.eigenvectors.column(j).iter().copied().collect(), "phi")
                .unwrap();
        let opts = SamplingOptions { source: SampleSource::Compact, ..Default::default() };
        let max_fb = mu * linspace(-1.0, 1.0, 401).iter().fold(0.0f64, |m, t| m.max(phi(*t).norm()));
        let bound = sampling_bound_1d(&basis, &q, b, max_fb, MU_MIN);
        for t in linspace(-1.0, 1.0, 21) {
            let v = sampling_interpolation_1d_with(&samples, &q, b, &basis, t, &opts).unwrap();
            assert!((v - phi(t) * mu).norm() < 1e-12);
            let o = bandlimited_projection_oracle(|x| phi(x).re, 1.0, b, t).unwrap();
            assert!((v - o).norm() <= bound + 1e-9, "t = {t}: {:e} > {bound:e}", (v - o).norm());
        }
    }

    #[test]
    fn spectral_reconstruction_of_projected_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let b = 2.0;
        let q = pipeline_rule(b);
        let basis = pswf_kernel_eigensystem(&q, b).unwrap();
        let opts = SamplingOptions { regularization: Regularization::Spectral, ..Default::default() };
        for _ in 0..3 {
            let f = CosSum::random(&mut rng, 1.0, 3.0);
            let fb = |t: f64| bandlimited_projection_oracle(|x| f.eval(x), 1.0, b, t).unwrap();
            let samples = field_1d(&q.nodes, |t| c(fb(t)));
            let ts = linspace(-1.0, 1.0, 21);
            let exact: Vec<f64> = ts.iter().map(|t| fb(*t)).collect();
            let max_fb = exact.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let bound = sampling_bound_1d(&basis, &q, b, max_fb, MU_MIN);
            let mut err: f64 = 0.0;
            for (t, e) in ts.iter().zip(&exact) {
                err = err.max((sampling_interpolation_1d_with(&samples, &q, b, &basis, *t, &opts).unwrap() - e).norm());
            }
            println!("spectral reconstruction error {err:e}, bound {bound:e}");
            assert!(err <= bound);
        }
    }

    #[test]
    fn scaled_support_wrapper() {
        // f on [−2, 2] with band 1 is the same problem as [−1, 1] with band 2
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (b, support) = (1.0, 2.0);
        let q = pipeline_rule(b * support);
        let basis = pswf_kernel_eigensystem(&q, b * support).unwrap();
        let f = CosSum::random(&mut rng, support, 2.0);
        let fb = |t: f64| bandlimited_projection_oracle(|x| f.eval(x), support, b, t).unwrap();
        let pts: Vec<f64> = q.nodes.iter().map(|w| w * support).collect();
        let samples = field_1d(&pts, |t| c(fb(t)));
        let opts = SamplingOptions { regularization: Regularization::Spectral, ..Default::default() };
        let max_fb = linspace(-support, support, 41).iter().fold(0.0f64, |m, t| m.max(fb(*t).abs()));
        let bound = sampling_bound_1d(&basis, &q, b * support, max_fb, MU_MIN);
        for t in linspace(-support, support, 9) {
            let v = sampling_interpolation_1d_scaled(&samples, &q, b, support, &basis, t, &opts).unwrap();
            assert!((v - fb(t)).norm() <= bound);
        }
    }

    #[test]
    fn rejects_mismatched_basis_or_samples() {
        let q = pipeline_rule(2.0);
        let other = pswf_kernel_eigensystem(&pipeline_rule(1.5), 1.5).unwrap();
        let basis = pswf_kernel_eigensystem(&q, 2.0).unwrap();
        let y = field_1d(&q.nodes, |_| c(1.0));
        assert!(sampling_interpolation_1d(&y, &q, 2.0, &other, 0.0).is_err());
        let shifted: Vec<f64> = q.nodes.iter().map(|w| w + 1e-3).collect();
        assert!(sampling_interpolation_1d(&field_1d(&shifted, |_| c(1.0)), &q, 2.0, &basis, 0.0).is_err());
        let exp_basis = pswf_exp_eigensystem(&q, 2.0).unwrap();
        let spectral = SamplingOptions { regularization: Regularization::Spectral, ..Default::default() };
        assert!(sampling_interpolation_1d_with(&y, &q, 2.0, &exp_basis, 0.0, &spectral).is_err());
    }
}

/// Collapsed Gauss–Legendre cubature of the simplex with the given vertices.
fn simplex_rule(v: [[f64; 2]; 3], n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let e1 = [v[1][0] - v[0][0], v[1][1] - v[0][1]];
    let e2 = [v[2][0] - v[0][0], v[2][1] - v[0][1]];
    let jac = (e1[0] * e2[1] - e1[1] * e2[0]).abs();
    let mut coords = Vec::new();
    let mut weights = Vec::new();
    for i in 0..n {
        let s = 0.5 * (x[i] + 1.0);
        for j in 0..n {
            let t = 0.5 * (x[j] + 1.0);
            let (a, bb) = (s * (1.0 - t), s * t);
            coords.push(v[0][0] + a * e1[0] + bb * e2[0]);
            coords.push(v[0][1] + a * e1[1] + bb * e2[1]);
            weights.push(jac * s * 0.25 * w[i] * w[j]);
        }
    }
    (coords, weights)
}

fn simplex_kernel(v: [[f64; 2]; 3], n: usize, target: f64) -> ExpSumKernel {
    let (cd, w) = simplex_rule(v, n);
    let region = Region::Simplex(v.iter().map(|p| p.to_vec()).collect());
    let mut k = ExpSumKernel::new(w, PointSet::new(2, cd).unwrap(), region, DMatrix::identity(2, 2), None).unwrap();
    k.measure_profile(&TargetBox::new(vec![target, target]).unwrap(), &[21, 21]).unwrap();
    k
}

fn gaussian_field(grid: &PointSet, center: [f64; 2], sigma: f64) -> SampledField {
    SampledField::from_fn(grid.clone(), "gauss", |p| {
        c((-((p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2)) / (2.0 * sigma * sigma)).exp())
    })
    .unwrap()
}

mod rlimited {
    use super::*;

    fn tight() -> IntegrationOptions {
        IntegrationOptions { abs_tol: 1e-11, rel_tol: 0.0, max_segments: 4000 }
    }

    /// ∫_X f(y) K(x − y) dy, K(z) = ∫_R e^{i2πk·z}dk, by nested adaptive quadrature.
    fn projection_oracle(spec: &TriangleSpec, center: [f64; 2], sigma: f64, x: &[f64]) -> Complex64 {
        let f = |y0: f64, y1: f64| (-((y0 - center[0]).powi(2) + (y1 - center[1]).powi(2)) / (2.0 * sigma * sigma)).exp();
        integrate_c(
            |y0| integrate_c(|y1| k_triangle(spec, x[0] - y0, x[1] - y1) * f(y0, y1), -1.0, 1.0, tight()).unwrap(),
            -1.0,
            1.0,
            tight(),
        )
        .unwrap()
    }

    /// Triangle region, Gaussian bumps sampled on a 41×41 grid over X = [−1, 1]²;
    /// measured error vs the 2D oracle ≤ |X| max|f| max_{X+X}|ε_K| (+ f̂ term).
    #[test]
    fn gaussian_bumps_within_the_stated_bound() {
        let spec = TriangleSpec::new(1.0, 0.5).unwrap().centered();
        let q = triangle_quadrature(&spec, 1, 1, &TargetBox::new(vec![2.0, 2.0]).unwrap()).unwrap();
        let k = ExpSumKernel::from_quadrature(&q).unwrap();
        let grid = make_grid(&[-1.0, -1.0], &[1.0, 1.0], &[41, 41]).unwrap();
        let eval = make_grid(&[-0.9, -0.9], &[0.9, 0.9], &[6, 6]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for i in 0..5 {
            let center = [rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4)];
            let sigma = rng.gen_range(0.1..0.14);
            let f = gaussian_field(&grid, center, sigma);
            let r = rlimited_discrete_fourier(&f, &k, &eval).unwrap();
            let mut err: f64 = 0.0;
            for (x, v) in eval.iter().zip(&r.field.values) {
                err = err.max((v - projection_oracle(&spec, center, sigma, x)).norm());
            }
            println!("bump {i}: error {err:e}, bound {:e}", r.error_bound);
            assert!(err <= r.error_bound + 1e-9, "bump {i}: {err:e} > {:e}", r.error_bound);
        }
    }

    #[test]
    fn one_dimensional_reduction() {
        let b = 2.0;
        let q = pipeline_rule(b);
        let mut k = ExpSumKernel::from_rule_1d(&q).unwrap();
        k.measure_profile(&TargetBox::new(vec![4.0 * b]).unwrap(), &[801]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = CosSum::random(&mut rng, 1.0, 3.0);
        let xs = linspace(-1.0, 1.0, 201);
        let samples = field_1d(&xs, |t| c(f.eval(t)));
        let ts = linspace(-1.0, 1.0, 11);
        let r = rlimited_discrete_fourier(&samples, &k, &PointSet::new(1, ts.clone()).unwrap()).unwrap();
        let freqs = PointSet::new(1, q.nodes.iter().map(|w| b * w).collect()).unwrap();
        let (fhat, _) = fourier_transform_samples(&samples, &freqs).unwrap();
        let fhat = SampledField::new(freqs, fhat, "fhat").unwrap();
        for (t, v) in ts.iter().zip(&r.field.values) {
            assert!((discrete_fourier_repr_1d(&fhat, &q, b, *t).unwrap() - v).norm() < 1e-12);
        }
    }

    #[test]
    fn point_mass_gives_the_kernel_sum() {
        let spec = TriangleSpec::new(1.0, 0.5).unwrap().centered();
        let q = triangle_quadrature(&spec, 1, 1, &TargetBox::new(vec![2.0, 2.0]).unwrap()).unwrap();
        let k = ExpSumKernel::from_quadrature(&q).unwrap();
        let h = 0.1;
        let grid = make_grid(&[-h, -h], &[h, h], &[3, 3]).unwrap();
        let f = SampledField::from_fn(grid, "delta", |p| if p[0] == 0.0 && p[1] == 0.0 { c(1.0 / (h * h)) } else { c(0.0) }).unwrap();
        let eval = make_grid(&[-h, -h], &[h, h], &[5, 5]).unwrap();
        let r = rlimited_discrete_fourier(&f, &k, &eval).unwrap();
        for (x, v) in eval.iter().zip(&r.field.values) {
            assert!((k.eval(&[2.0 * PI * x[0], 2.0 * PI * x[1]]) - v).norm() < 1e-12);
        }
    }

    #[test]
    fn uncovered_verification_set_is_an_error() {
        let spec = TriangleSpec::new(1.0, 0.5).unwrap().centered();
        let q = triangle_quadrature(&spec, 1, 1, &TargetBox::new(vec![2.0, 2.0]).unwrap()).unwrap();
        let k = ExpSumKernel::from_quadrature(&q).unwrap();
        let grid = make_grid(&[-2.0, -2.0], &[2.0, 2.0], &[9, 9]).unwrap();
        let f = gaussian_field(&grid, [0.0, 0.0], 0.3);
        let e = rlimited_discrete_fourier(&f, &k, &grid).unwrap_err();
        assert!(format!("{e}").contains("does not cover"));
    }

    #[test]
    fn trapezoid_transform_of_a_gaussian() {
        let grid = make_grid(&[-1.0, -1.0], &[1.0, 1.0], &[41, 41]).unwrap();
        let sigma: f64 = 0.15;
        let f = gaussian_field(&grid, [0.0, 0.0], sigma);
        let freqs = PointSet::new(2, vec![0.0, 0.0, 0.7, -0.4, 1.5, 1.0]).unwrap();
        let (fh, est) = fourier_transform_samples(&f, &freqs).unwrap();
        for (xi, v) in freqs.iter().zip(&fh) {
            let exact = 2.0 * PI * sigma * sigma * (-2.0 * PI * PI * sigma * sigma * (xi[0] * xi[0] + xi[1] * xi[1])).exp();
            // the Gaussian is truncated at |x| = 1 where it is e^{−22}; the tails carry ≈ 1e-11
            assert!((v - exact).norm() < 1e-10, "{:e}", (v - exact).norm());
        }
        assert!(est.unwrap() < 1e-6);
        let scattered = SampledField::new(PointSet::new(2, vec![0.0, 0.0, 0.5, 0.1, 0.2, 0.9]).unwrap(), vec![c(1.0); 3], "x").unwrap();
        assert!(fourier_transform_samples(&scattered, &freqs).is_err());
    }

    /// P_{AR}[f∘Aᵀ](x) = P_R[f](Aᵀx), each side from its own tensor samples.
    #[test]
    fn equivariance_under_random_transforms() {
        let base = simplex_kernel([[0.0, -0.5], [0.8, 0.2], [-0.4, 0.6]], 12, 4.0);
        let sigma: f64 = 0.12;
        let grid = make_grid(&[-1.0, -1.0], &[1.0, 1.0], &[41, 41]).unwrap();
        let f = gaussian_field(&grid, [0.0, 0.0], sigma);
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        for _ in 0..3 {
            let a = loop {
                let m = DMatrix::from_fn(2, 2, |_, _| rng.gen_range(-1.2..1.2));
                let sv = m.singular_values();
                if sv.min() > 0.6 && sv.max() < 1.5 {
                    break m;
                }
            };
            let mut ka = base.transformed(&a).unwrap();
            ka.measure_profile(&TargetBox::new(vec![8.0, 8.0]).unwrap(), &[5, 5]).unwrap();
            // g(y) = f(Aᵀy), sampled on a tensor grid over the bounding box of A^{−T}X
            let ait = a.transpose().try_inverse().unwrap();
            let reach: Vec<f64> = (0..2).map(|i| ait[(i, 0)].abs() + ait[(i, 1)].abs()).collect();
            let ggrid = make_grid(&[-reach[0], -reach[1]], &[reach[0], reach[1]], &[81, 81]).unwrap();
            let g = SampledField::from_fn(ggrid, "g", |y| {
                let u = a.transpose() * nalgebra::DVector::from_column_slice(y);
                c((-(u[0] * u[0] + u[1] * u[1]) / (2.0 * sigma * sigma)).exp())
            })
            .unwrap();
            let xs = make_grid(&[-0.3, -0.3], &[0.3, 0.3], &[5, 5]).unwrap();
            let mut atx = Vec::new();
            for x in xs.iter() {
                atx.extend((a.transpose() * nalgebra::DVector::from_column_slice(x)).iter());
            }
            let atx = PointSet::new(2, atx).unwrap();
            let lhs = rlimited_discrete_fourier(&g, &ka, &xs).unwrap();
            let rhs = rlimited_discrete_fourier(&f, &base, &atx).unwrap();
            let scale = rhs.field.max_abs();
            for (u, v) in lhs.field.values.iter().zip(&rhs.field.values) {
                assert!((u - v).norm() <= 1e-6 * scale, "{:e}", (u - v).norm() / scale);
            }
        }
    }
}

mod transformed_sampling {
    use super::*;

    fn triangle_k() -> ExpSumKernel {
        simplex_kernel([[0.0, 0.0], [1.0, 0.5], [1.0, -0.5]], 8, 3.0)
    }

    #[test]
    fn scaled_interval_matches_the_1d_reconstruction() {
        // A = [[2]]: B = AᵀA = 4, samples at 2ω_m, f_A(2t) = f_B(t) in 1D with band 4
        let b = 4.0;
        let q = pipeline_rule(b);
        let basis = pswf_kernel_eigensystem(&q, b).unwrap();
        let k = ExpSumKernel::from_rule_1d(&q).unwrap();
        let a = DMatrix::from_element(1, 1, 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let vals: Vec<Complex64> = q.nodes.iter().map(|_| c(rng.gen_range(-1.0..1.0))).collect();
        let s1 = SampledField::new(PointSet::new(1, q.nodes.clone()).unwrap(), vals.clone(), "s").unwrap();
        let s2 = SampledField::new(PointSet::new(1, q.nodes.iter().map(|w| 2.0 * w).collect()).unwrap(), vals, "s").unwrap();
        let ts = linspace(-1.0, 1.0, 9);
        let xs = PointSet::new(1, ts.iter().map(|t| 2.0 * t).collect()).unwrap();
        for o in [SamplingOptions::default(), SamplingOptions { regularization: Regularization::Spectral, ..Default::default() }] {
            let r = ra_sampling_interpolation_with(&s2, &k, &a, &basis, &xs, &o).unwrap();
            for (t, v) in ts.iter().zip(&r.field.values) {
                let direct = sampling_interpolation_1d_with(&s1, &q, b, &basis, *t, &o).unwrap();
                assert!((direct - v).norm() < 1e-10 * direct.norm().max(1.0), "{o:?} t = {t}");
            }
        }
    }

    #[test]
    fn rotation_equivariance() {
        let k = triangle_k();
        let basis = rslepian_kernel_eigensystem(&k, &DMatrix::identity(2, 2)).unwrap();
        let th: f64 = 0.7;
        let a = DMatrix::from_row_slice(2, 2, &[th.cos(), -th.sin(), th.sin(), th.cos()]);
        let h = |p: &[f64]| Complex64::new((1.3 * p[0] - 0.4 * p[1]).sin(), (0.5 * p[0] * p[1]).cos());
        // samples of h at A k_m, and of h∘A at k_m
        let mut ak = Vec::new();
        for km in k.nodes.iter() {
            ak.extend((&a * nalgebra::DVector::from_column_slice(km)).iter());
        }
        let s_rot = SampledField::from_fn(PointSet::new(2, ak).unwrap(), "h", |p| h(p)).unwrap();
        let s_id = SampledField::new(k.nodes.clone(), s_rot.values.clone(), "h∘A").unwrap();
        let xs = make_grid(&[-0.8, -0.8], &[0.8, 0.8], &[5, 5]).unwrap();
        let mut atx = Vec::new();
        for x in xs.iter() {
            atx.extend((a.transpose() * nalgebra::DVector::from_column_slice(x)).iter());
        }
        let atx = PointSet::new(2, atx).unwrap();
        let r1 = ra_sampling_interpolation(&s_rot, &k, &a, &basis, &xs).unwrap();
        let r2 = ra_sampling_interpolation(&s_id, &k, &DMatrix::identity(2, 2), &basis, &atx).unwrap();
        for (u, v) in r1.field.values.iter().zip(&r2.field.values) {
            assert!((u - v).norm() < 1e-12 * u.norm().max(1.0));
        }
    }

    #[test]
    fn identity_is_the_symmetric_band_lemma() {
        // f_B(x) ≈ Σ_m w_m |det B| K(2πB(x − k_m)) g_m with g = S y
        let k = triangle_k();
        let b = DMatrix::identity(2, 2);
        let basis = rslepian_kernel_eigensystem(&k, &b).unwrap();
        let y = SampledField::from_fn(k.nodes.clone(), "y", |p| c(p[0] - 0.3 * p[1])).unwrap();
        let x = [0.2, -0.1];
        let r = ra_sampling_interpolation(&y, &k, &b, &basis, &PointSet::new(2, x.to_vec()).unwrap()).unwrap();
        let w = k.unit_weights();
        let n = k.len();
        let kk = |p: &[f64], q: &[f64]| k_triangle(&TriangleSpec::new(1.0, 0.5).unwrap(), p[0] - q[0], p[1] - q[1]);
        let mut direct = c(0.0);
        for m in 0..n {
            let km = k.nodes.point(m);
            let g: Complex64 = (0..n).map(|l| kk(km, k.nodes.point(l)) * w[l] * y.values[l]).sum();
            direct += kk(&x, km) * w[m] * g;
        }
        assert!((r.field.values[0] - direct).norm() < 1e-12);
        assert!(r.error_bound.is_finite() && r.error_bound >= 0.0);
    }

    #[test]
    fn bound_needs_a_profile() {
        let mut k = triangle_k();
        k.error_profile = None;
        let b = DMatrix::identity(2, 2);
        let basis = rslepian_kernel_eigensystem(&k, &b).unwrap();
        let y = SampledField::from_fn(k.nodes.clone(), "y", |_| c(1.0)).unwrap();
        let r = ra_sampling_interpolation(&y, &k, &b, &basis, &PointSet::new(2, vec![0.0, 0.0]).unwrap()).unwrap();
        assert!(r.error_bound.is_infinite());
        assert!(r.provenance.iter().any(|p| p.contains("no kernel error bound")));
    }

    #[test]
    fn rejects_mismatches() {
        let k = triangle_k();
        let basis = rslepian_kernel_eigensystem(&k, &DMatrix::identity(2, 2)).unwrap();
        let y = SampledField::from_fn(k.nodes.clone(), "y", |_| c(1.0)).unwrap();
        let x = PointSet::new(2, vec![0.0, 0.0]).unwrap();
        let stretch = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        assert!(ra_sampling_interpolation(&y, &k, &stretch, &basis, &x).is_err());
        assert!(ra_sampling_interpolation(&y, &k, &DMatrix::zeros(2, 2), &basis, &x).is_err());
        let partial = SampledField::new(PointSet::new(2, vec![0.0, 0.0]).unwrap(), vec![c(1.0)], "p").unwrap();
        assert!(ra_sampling_interpolation(&partial, &k, &DMatrix::identity(2, 2), &basis, &x).is_err());
    }
}

mod patched {
    use super::*;

    const UNIT: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

    fn unit_simplex() -> Region {
        Region::Simplex(UNIT.iter().map(|p| p.to_vec()).collect())
    }

    /// The square [0,1]² as two images of the unit simplex.
    fn square_parts() -> Vec<DMatrix<f64>> {
        vec![DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]), DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 1.0])]
    }

    /// ∫_{[0,1]²} e^{i2πk·x} dk = Π e^{iπx_j} sinc(πx_j).
    fn square_kernel(x: &[f64]) -> Complex64 {
        x.iter().map(|v| Complex64::from_polar(sinc(PI * v), PI * v)).product()
    }

    #[test]
    fn two_triangles_tile_the_square() {
        let parts: Vec<(DMatrix<f64>, Region)> = square_parts().into_iter().map(|a| (a, unit_simplex())).collect();
        let sk = simplex_kernel(UNIT, 16, 2.0);
        let surr: Vec<(DMatrix<f64>, ExpSumKernel)> = square_parts().into_iter().map(|a| (a, sk.clone())).collect();
        let part_err: f64 = square_parts().iter().map(|a| a.determinant().abs() * sk.error_profile.as_ref().unwrap().max_error).sum();
        for x in make_grid(&[-1.0, -1.0], &[1.0, 1.0], &[9, 9]).unwrap().iter() {
            let exact = square_kernel(x);
            assert!((patched_kernel(&parts, x).unwrap() - exact).norm() < 1e-12);
            let s = patched_kernel_surrogate(&surr, x).unwrap();
            assert!((s - exact).norm() <= part_err + 1e-14, "{x:?}");
        }
        assert_eq!(patched_sample_locations(&surr).unwrap().len(), 2 * sk.len());
    }

    #[test]
    fn mirrored_bowtie_kernel_is_real() {
        let t = Region::Triangle(TriangleSpec::new(1.0, 1.0).unwrap());
        let parts = vec![(DMatrix::identity(2, 2), t.clone()), (-DMatrix::<f64>::identity(2, 2), t)];
        for x in make_grid(&[-1.5, -1.5], &[1.5, 1.5], &[13, 13]).unwrap().iter() {
            let v = patched_kernel(&parts, x).unwrap();
            assert!(v.im.abs() < 1e-12 * v.norm().max(1.0));
        }
    }

    #[test]
    fn single_part_equals_transformed_sampling() {
        let k = simplex_kernel([[0.0, 0.0], [1.0, 0.5], [1.0, -0.5]], 8, 3.0);
        let a = DMatrix::from_row_slice(2, 2, &[1.1, 0.2, -0.3, 0.9]);
        let locs = patched_sample_locations(&[(a.clone(), k.clone())]).unwrap();
        let f = SampledField::from_fn(locs, "f", |p| Complex64::new(p[0].cos(), p[1])).unwrap();
        let xs = make_grid(&[-0.5, -0.5], &[0.5, 0.5], &[4, 4]).unwrap();
        let basis = rslepian_kernel_eigensystem(&k, &(a.transpose() * &a)).unwrap();
        let direct = ra_sampling_interpolation(&f, &k, &a, &basis, &xs).unwrap();
        let p = patched_projection(&[(a, k)], &f, &xs).unwrap();
        for (u, v) in p.field.values.iter().zip(&direct.field.values) {
            assert!((u - v).norm() < 1e-14 * u.norm().max(1.0));
        }
        assert!((p.error_bound - direct.error_bound).abs() <= 1e-14 * direct.error_bound.max(1.0));
        assert!(p.provenance[0].contains("measure zero"));
    }

    #[test]
    fn sum_of_parts() {
        let k = simplex_kernel(UNIT, 6, 3.0);
        let parts: Vec<(DMatrix<f64>, ExpSumKernel)> = square_parts().into_iter().map(|a| (a, k.clone())).collect();
        let locs = patched_sample_locations(&parts).unwrap();
        let f = SampledField::from_fn(locs, "f", |p| c((p[0] - 0.5).powi(2) + p[1])).unwrap();
        let xs = make_grid(&[0.0, 0.0], &[1.0, 1.0], &[3, 3]).unwrap();
        let total = patched_projection(&parts, &f, &xs).unwrap();
        let mut sum = vec![c(0.0); xs.len()];
        for (a, kk) in &parts {
            let basis = rslepian_kernel_eigensystem(kk, &(a.transpose() * a)).unwrap();
            let r = ra_sampling_interpolation(&f, kk, a, &basis, &xs).unwrap();
            for (s, v) in sum.iter_mut().zip(&r.field.values) {
                *s += v;
            }
        }
        for (u, v) in total.field.values.iter().zip(&sum) {
            assert!((u - v).norm() < 1e-13 * u.norm().max(1.0));
        }
    }

    #[test]
    fn empty_parts_are_an_error() {
        let f = SampledField::new(PointSet::new(2, vec![0.0, 0.0]).unwrap(), vec![c(1.0)], "f").unwrap();
        assert!(patched_projection(&[], &f, &PointSet::new(2, vec![0.0, 0.0]).unwrap()).is_err());
        assert!(patched_kernel(&[], &[0.0, 0.0]).is_err());
    }
}

mod kernel_type {
    use super::*;

    #[test]
    fn construction_checks() {
        let region = Region::Interval { half_width: 1.0 };
        let one = DMatrix::identity(1, 1);
        let pts = PointSet::new(1, vec![-0.5, 0.5]).unwrap();
        assert!(ExpSumKernel::new(vec![1.0], pts.clone(), region.clone(), one.clone(), None).is_err());
        assert!(ExpSumKernel::new(vec![1.0, 1.0], PointSet::new(1, vec![0.0, 1.5]).unwrap(), region.clone(), one.clone(), None).is_err());
        assert!(
            ExpSumKernel::new(vec![1.0, 1.0], PointSet::new(1, vec![0.0, 1.0 + 1e-13]).unwrap(), region.clone(), one.clone(), None).is_ok()
        );
        assert!(ExpSumKernel::new(vec![1.0, 1.0], pts, region, DMatrix::zeros(1, 1), None).is_err());
    }

    #[test]
    fn eval_is_the_scaled_kernel_surrogate() {
        let b = 2.0;
        let q = pipeline_rule(b);
        let k = ExpSumKernel::from_rule_1d(&q).unwrap();
        for x in [0.0, 0.4, 1.7, 3.9] {
            // |det B| K(Bx) with K(y) = 2 sinc(y)
            assert!((k.eval(&[x]) - 2.0 * b * sinc(b * x)).norm() < 1e-12);
        }
        let w: f64 = k.unit_weights().iter().sum();
        assert!((w - 2.0).abs() < 1e-13);
    }

    #[test]
    fn transformed_kernel_is_the_kernel_of_the_image() {
        let k = simplex_kernel(UNIT2, 14, 3.0);
        let a = DMatrix::from_row_slice(2, 2, &[0.7, 0.3, -0.2, 1.1]);
        let ka = k.transformed(&a).unwrap();
        assert!(ka.error_profile.is_none());
        let region = Region::Simplex(UNIT2.iter().map(|p| p.to_vec()).collect()).transformed(a.clone()).unwrap();
        for x in [[0.0, 0.0], [0.3, -0.2], [1.0, 0.5]] {
            let y = [2.0 * PI * x[0], 2.0 * PI * x[1]];
            let exact = region_kernel_exact(&region, &y).unwrap();
            assert!((ka.eval(&y) - exact).norm() < 1e-10);
        }
    }

    const UNIT2: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

    #[test]
    fn error_bound_checks_coverage() {
        let k = simplex_kernel(UNIT2, 6, 1.0);
        assert!(k.kernel_error_bound(&[1.0, 1.0]).is_ok());
        assert!(k.kernel_error_bound(&[1.1, 0.5]).is_err());
        let k2 = k.with_band(DMatrix::identity(2, 2) * 2.0).unwrap();
        assert!(k2.kernel_error_bound(&[0.5, 0.5]).is_ok());
        assert!(k2.kernel_error_bound(&[1.0, 1.0]).is_err());
        let e1 = k.kernel_error_bound(&[0.5, 0.5]).unwrap();
        assert!((k2.kernel_error_bound(&[0.5, 0.5]).unwrap() - 4.0 * e1).abs() < 1e-300 + 1e-12 * e1);
    }

    #[test]
    fn region_containment_and_boxes() {
        let t = Region::Triangle(TriangleSpec::new(1.0, 0.5).unwrap());
        assert!(t.contains(&[0.5, 0.2], 0.0));
        assert!(!t.contains(&[0.5, 0.3], 1e-12));
        let a = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let r = t.clone().transformed(a).unwrap();
        assert!(r.contains(&[-0.2, 0.5], 1e-12));
        let (lo, hi) = r.bounding_box();
        assert!((lo[0] + 0.5).abs() < 1e-12 && (hi[0] - 0.5).abs() < 1e-12 && lo[1].abs() < 1e-12 && (hi[1] - 1.0).abs() < 1e-12);
        let (lo, hi) = t.bounding_box();
        assert_eq!((lo, hi), (vec![0.0, -0.5], vec![1.0, 0.5]));
    }
}
