use alloc::{string::ToString, vec::Vec};
#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::Zero;

use crate::{Error, Result};

pub(crate) type CMat = DMatrix<Complex64>;

/// Thin singular value decomposition A = U Σ Vᴴ by one-sided (Hestenes)
/// Jacobi rotations. Robust for clustered singular values and accurate for
/// small ones. Singular values are returned in descending order.
pub(crate) struct Svd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v: CMat,
}

pub(crate) fn svd(a: &CMat) -> Svd {
    let (m, n) = a.shape();
    if m < n {
        let t = svd(&a.adjoint());
        return Svd { u: t.v, s: t.s, v: t.u };
    }
    let mut w = a.clone();
    let mut v = CMat::identity(n, n);
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = w.column(p).iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = w.column(q).iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex64 = w.column(p).iter().zip(w.column(q).iter()).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g <= f64::EPSILON * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for mat in [&mut w, &mut v] {
                    for i in 0..mat.nrows() {
                        let xp = mat[(i, p)];
                        let xq = mat[(i, q)] * phase.conj();
                        mat[(i, p)] = xp * c - xq * s;
                        mat[(i, q)] = xp * s + xq * c;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap_or(core::cmp::Ordering::Equal));
    let mut u = CMat::zeros(m, n);
    let mut vs = CMat::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        let sj = norms[j];
        s.push(sj);
        if sj > 0.0 {
            u.set_column(k, &(w.column(j) / Complex64::new(sj, 0.0)));
        }
        vs.set_column(k, &v.column(j));
    }
    Svd { u, s, v: vs }
}

/// Least-squares (minimum-norm) solution of A x = b, x = V Σ⁺ Uᴴ b.
pub(crate) fn lstsq(a: CMat, b: CMat) -> Result<CMat> {
    let d = svd(&a);
    let smax = d.s.first().copied().unwrap_or(0.0);
    if !smax.is_finite() {
        return Err(Error::NonFinite("least squares"));
    }
    let mut utb = d.u.adjoint() * b;
    for (i, si) in d.s.iter().enumerate() {
        let inv = if *si > smax * 1e-15 { 1.0 / si } else { 0.0 };
        let mut row = utb.row_mut(i);
        row *= Complex64::new(inv, 0.0);
    }
    Ok(d.v * utb)
}

/// Singular values (descending) and the matching left singular vectors.
pub(crate) fn svd_sorted(a: CMat) -> (Vec<f64>, CMat) {
    let d = svd(&a);
    (d.s, d.u)
}

/// Eigen-decomposition of a general complex matrix through the complex
/// Schur form A = Q T Q*, eigenvectors by back substitution on T.
/// Eigenvectors are returned as unit-norm columns.
pub(crate) fn eig_general(a: CMat) -> Result<(Vec<Complex64>, CMat)> {
    let n = a.nrows();
    if n == 0 {
        return Ok((Vec::new(), CMat::zeros(0, 0)));
    }
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.norm())).max(f64::MIN_POSITIVE);
    let schur = nalgebra::linalg::Schur::try_new(a, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Eigen("Schur iteration did not converge".to_string()))?;
    let (q, t) = schur.unpack();
    let lam: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    let small = scale * f64::EPSILON * n as f64;
    let mut y = CMat::zeros(n, n);
    for k in 0..n {
        y[(k, k)] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut s = Complex64::zero();
            for j in i + 1..=k {
                s += t[(i, j)] * y[(j, k)];
            }
            let mut d = t[(i, i)] - lam[k];
            if d.norm() < small {
                d = Complex64::new(small, 0.0);
            }
            y[(i, k)] = -s / d;
        }
    }
    let mut v = q * y;
    for k in 0..n {
        let nrm = v.column(k).norm();
        if nrm > 0.0 {
            let mut col = v.column_mut(k);
            col /= Complex64::new(nrm, 0.0);
        }
    }
    Ok((lam, v))
}

/// Hermitian eigen-decomposition, eigenvalues real.
pub(crate) fn eig_hermitian(a: CMat) -> (Vec<f64>, CMat) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    // Enforce exact Hermitian symmetry before the solve.
    let h = (&a + a.adjoint()) * Complex64::new(0.5, 0.0);
    let se = h.symmetric_eigen();
    (se.eigenvalues.iter().copied().collect(), se.eigenvectors)
}
