use std::f64::consts::PI;

use proptest::prelude::*;
use rlimit_core::moments::{preset_moments, Preset};
use rlimit_core::numkit::{linspace, sinc, PointSet, SampledField};
use rlimit_core::sincapprox::*;
use rlimit_core::Complex64;

fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    linspace(a, b, n)
}

fn field(xs: &[f64], f: impl Fn(f64) -> f64) -> SampledField {
    let pts: Vec<Vec<f64>> = xs.iter().map(|x| vec![*x]).collect();
    SampledField::from_fn(PointSet::from_points(1, &pts).unwrap(), "f", |p| Complex64::new(f(p[0]), 0.0)).unwrap()
}

#[test]
fn twenty_reduces_three_levels() {
    let a = build_sinc_cosine_approx(20.0, 6).unwrap();
    assert_eq!(a.level, 3);
    assert!((a.reduced_band() - 20.0 / 27.0).abs() < 1e-15);
    assert!(a.reduced_band() <= 2.0);
    let q = a.rule();
    assert_eq!(q.len(), 27 * 6);
    assert!((q.band - 20.0).abs() < 1e-15);
}

#[test]
fn unit_band_eight_nodes_is_accurate_on_four_pi() {
    let a = build_sinc_cosine_approx(1.0, 8).unwrap();
    assert_eq!(a.level, 1);
    let worst = grid(-4.0 * PI, 4.0 * PI, 10_000).into_iter().map(|x| error_epsilon_b(&a, x).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-10, "{worst:e}");
}

#[test]
fn value_at_origin_is_weight_sum() {
    for &(b0, m) in &[(0.7, 3), (5.0, 2), (20.0, 4)] {
        let a = build_sinc_cosine_approx(b0, m).unwrap();
        let v = eval_cosine_sum(&a, 0.0);
        assert!((v - a.rule().weight_sum()).abs() < 1e-14);
        assert!((v - (1.0 - error_epsilon_b(&a, 0.0))).abs() < 1e-14);
        assert!(error_epsilon_b(&a, 0.0).abs() <= base_epsilon(&a, 0.0).abs() + 1e-15);
    }
}

#[test]
fn large_rule_is_exact_near_origin() {
    let a = build_sinc_cosine_approx(20.0, 24).unwrap();
    for x in grid(-0.5, 0.5, 101) {
        assert!(error_epsilon_b(&a, x).abs() < 1e-12);
    }
}

#[test]
fn twenty_band_error_never_exceeds_reduced_band_error() {
    let a = build_sinc_cosine_approx(20.0, 3).unwrap();
    let mut top: f64 = 0.0;
    for x in grid(-2.0, 2.0, 4001) {
        let e = error_epsilon_b(&a, x).abs();
        assert!(e <= base_epsilon(&a, x).abs() + 1e-14, "x={x}");
        top = top.max(e);
    }
    assert!(top < 1e-10, "{top:e}");
}

#[test]
fn pointwise_bound_across_levels() {
    let base_band = 0.9;
    for m in [2, 3, 5] {
        let level0 = build_sinc_cosine_approx(base_band, m).unwrap();
        assert_eq!(level0.level, 0);
        for n in 0..=4u32 {
            let a = build_sinc_cosine_approx(base_band * 3f64.powi(n as i32), m).unwrap();
            assert_eq!(a.level, n);
            assert!((a.reduced_band() - base_band).abs() < 1e-14);
            for x in grid(-30.0, 30.0, 1000) {
                let lhs = error_epsilon_b(&a, x).abs();
                let rhs = error_epsilon_b(&level0, x).abs();
                assert!(lhs <= rhs + 1e-14, "m={m} n={n} x={x}: {lhs:e} > {rhs:e}");
            }
        }
    }
}

#[test]
fn error_is_unchanged_on_the_lattice() {
    let b = 0.9;
    let level0 = build_sinc_cosine_approx(b, 3).unwrap();
    for n in 0..=3 {
        let a = build_sinc_cosine_approx(b * 3f64.powi(n + 1), 3).unwrap();
        for m in -5..=5 {
            let x = m as f64 * PI / b;
            let d = error_epsilon_b(&a, x) - error_epsilon_b(&level0, x);
            assert!(d.abs() < 1e-12, "n={n} m={m}: {d:e}");
        }
    }
}

#[test]
fn cosine_sum_is_even() {
    let a = build_sinc_cosine_approx(7.3, 4).unwrap();
    for x in grid(0.0, 5.0, 51) {
        assert_eq!(eval_cosine_sum(&a, x), eval_cosine_sum(&a, -x));
    }
}

#[test]
fn periodic_sinc_origin_and_period() {
    let b = 20.0 / 27.0;
    let n = 13;
    assert_eq!(periodic_sinc(b, n, 0.0), 1.0);
    let period = PI * (2 * n + 1) as f64 / b;
    for x in grid(-2.0, 2.0, 41) {
        assert!((periodic_sinc(b, n, x) - periodic_sinc(b, n, x + period)).abs() < 1e-12);
    }
    // Exact zeros of the Dirichlet kernel land on the sinc zeros.
    assert!(periodic_sinc(b, n, PI / b).abs() < 1e-14);
}

#[test]
fn uniform_max_error_matches_the_grid_search() {
    let (x13, e13) = uniform_max_error(1.0, 13);
    assert!((e13 - 0.013458).abs() < 1e-6, "{e13}");
    assert!((x13 - 27.0 * PI / 2.0).abs() < 1e-12);
    for n in [5, 13, 40] {
        for b in [20.0 / 27.0, 1.0, 3.0] {
            let (_, formula) = uniform_max_error(b, n);
            let measured = measured_uniform_error(b, n, 200_000);
            assert!(((measured - formula) / formula).abs() < 1e-6, "N={n} B={b}: {measured} vs {formula}");
        }
    }
}

#[test]
fn uniform_max_error_decays_like_one_over_n() {
    let (_, a) = uniform_max_error(1.0, 13);
    let (_, b) = uniform_max_error(1.0, 40);
    assert!((a / b - 81.0 / 27.0).abs() < 1e-12);
}

#[test]
fn periodic_sinc_error_near_origin_is_second_order() {
    let x = 0.3;
    let b = 1.0;
    let pts: Vec<(f64, f64)> = [5usize, 10, 20, 40, 80, 160]
        .iter()
        .map(|&n| (((2 * n + 1) as f64).ln(), (sinc(b * x) - periodic_sinc(b, n, x)).abs().ln()))
        .collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((slope + 2.0).abs() < 0.1, "slope {slope}");
}

#[test]
fn scaled_uniform_sampling_beats_the_reduced_one() {
    // (B, N) = (20/27, 13) versus (20, 27·13): the lifted surrogate is
    // the reduced one times the 3ⁿ multiplier.
    let b = 20.0 / 27.0;
    let xs = grid(-2.0, 2.0, 2001);
    let f = field(&xs, |x| periodic_sinc(b, 13, x));
    let lifted = scale_general(&f, b, 3).unwrap();
    for (x, v) in xs.iter().zip(&lifted.values) {
        let e_lift = (sinc(20.0 * x) - v.re).abs();
        let e_base = (sinc(b * x) - periodic_sinc(b, 13, *x)).abs();
        assert!(e_lift <= e_base + 1e-14);
    }
}

#[test]
fn chirplet_rule_at_twenty() {
    for m in [3, 6] {
        let c = build_chirplet_approx(20.0, m).unwrap();
        assert_eq!(c.level, 3);
        let b = c.reduced_band();
        let h = preset_moments(Preset::SincGauss, b, 2).unwrap();
        assert_eq!(h.values[0], 1.0);
        assert!((h.values[1] - b * b / 6.0).abs() < 1e-16);
        assert!(c.gammas.iter().all(|g| g.re > 0.0));
        let mut worst: f64 = 0.0;
        for x in grid(-2.0, 2.0, 2001) {
            let v = eval_chirplet_sum(&c, x);
            assert!(v.im.abs() <= 1e-10, "M={m} x={x}: {:e}", v.im);
            let err = (sinc(20.0 * x) - v.re).abs();
            assert!(err <= chirplet_base_epsilon(&c, x).norm() + 1e-13, "M={m} x={x}");
            worst = worst.max(err);
        }
        assert!(worst < if m == 3 { 1e-3 } else { 1e-12 }, "M={m}: {worst:e}");
    }
}

#[test]
fn chirplet_at_origin_is_weight_sum() {
    let c = build_chirplet_approx(0.8, 4).unwrap();
    assert_eq!(c.level, 0);
    let s: Complex64 = c.weights.iter().sum();
    assert!((eval_chirplet_sum(&c, 0.0) - s).norm() < 1e-14);
}

#[test]
fn chirplet_and_cosine_sums_agree_within_their_errors() {
    let (b0, m) = (5.0, 6);
    let a = build_sinc_cosine_approx(b0, m).unwrap();
    let c = build_chirplet_approx(b0, m).unwrap();
    let xs = grid(-4.0 * PI, 4.0 * PI, 4001);
    let ea = xs.iter().map(|x| error_epsilon_b(&a, *x).abs()).fold(0.0, f64::max);
    let ec = xs.iter().map(|x| (sinc(b0 * x) - eval_chirplet_sum(&c, *x).re).abs()).fold(0.0, f64::max);
    for x in &xs {
        let d = (eval_cosine_sum(&a, *x) - eval_chirplet_sum(&c, *x).re).abs();
        assert!(d <= ea + ec + 1e-14);
    }
}

#[test]
fn scale_general_identity_and_exact_input() {
    let b = 0.4;
    let xs = grid(-10.0, 10.0, 1001);
    let f = field(&xs, |x| sinc(b * x));
    assert_eq!(scale_general(&f, b, 0).unwrap().values, f.values);
    for n in 1..=4 {
        let out = scale_general(&f, b, n).unwrap();
        let k = 3f64.powi(n as i32);
        for (x, v) in xs.iter().zip(&out.values) {
            assert!((v.re - sinc(k * b * x)).abs() < 1e-12 && v.im == 0.0, "n={n} x={x}");
        }
    }
}

#[test]
fn scale_general_rejects_two_dimensional_grids() {
    let pts = PointSet::from_points(2, &[vec![0.0, 0.0]]).unwrap();
    let f = SampledField::from_fn(pts, "f", |_| Complex64::new(1.0, 0.0)).unwrap();
    assert!(scale_general(&f, 1.0, 1).is_err());
}

#[test]
fn cosine_sum_table_rows() {
    let a = build_sinc_cosine_approx(3.5, 3).unwrap();
    let rows = cosine_sum_table(&a, &[0.0, 0.5, 1.0]);
    for r in rows {
        assert_eq!(r[3], r[2] - r[1]);
        assert_eq!(r[2], sinc(3.5 * r[0]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn scale_general_never_expands_the_error(
        b in 0.1f64..1.5,
        n in 1u32..=3,
        amp in 0.0f64..0.2,
        freq in 0.1f64..5.0,
    ) {
        // An arbitrary perturbed approximant of sinc(Bx).
        let xs = linspace(-8.0, 8.0, 401);
        let f = field(&xs, |x| sinc(b * x) + amp * (freq * x).sin());
        let out = scale_general(&f, b, n).unwrap();
        let k = 3f64.powi(n as i32);
        let before = xs.iter().zip(&f.values).map(|(x, v)| (sinc(b * x) - v.re).abs()).fold(0.0, f64::max);
        let after = xs.iter().zip(&out.values).map(|(x, v)| (sinc(k * b * x) - v.re).abs()).fold(0.0, f64::max);
        prop_assert!(after <= before + 1e-12);
    }

    #[test]
    fn expanded_rule_has_three_power_nodes(b0 in 0.2f64..100.0, m in 1usize..=6) {
        let a = build_sinc_cosine_approx(b0, m).unwrap();
        let q = a.rule();
        prop_assert!(a.reduced_band() <= 2.0 && a.reduced_band() > 0.0);
        prop_assert!((a.reduced_band() * 3f64.powi(a.level as i32) - b0).abs() < 1e-12 * b0);
        prop_assert_eq!(q.len(), 3usize.pow(a.level) * m);
        prop_assert!((q.weight_sum() - a.base_quadrature.weight_sum()).abs() < 1e-13);
    }
}

#[test]
fn shifted_chirp_matches_the_expanded_phase() {
    let alpha = Complex64::new(0.3, -0.2);
    let gamma = Complex64::new(0.05, 0.4);
    for &(bl, x) in &[(0.0, 0.7), (0.74, -1.2), (-2.2, 0.3)] {
        let lit = shifted_chirp_term(alpha, gamma, bl, x).unwrap();
        let direct = alpha * (-gamma * x * x + Complex64::new(0.0, 2.0 * bl * x)).exp();
        assert!((lit - direct).norm() < 1e-14);
    }
    assert!(shifted_chirp_term(alpha, Complex64::new(1.0, 0.0), 1.0, 0.0).is_err());
}
