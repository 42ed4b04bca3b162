//! Approximate prolate spheroidal wave functions (1D) and R-Slepian functions
//! (N-D) as eigenvectors of quadrature-discretized projection operators.
//!
//! Both constructions are solved in the α-symmetrized form
//! H = D^{1/2} S D^{−1/2}, D = diag(w), which is Hermitian for the kernel
//! system and complex symmetric for the exponential system. Eigenvectors are
//! mapped back by φ = D^{−1/2}ψ and scaled to unit Euclidean norm.

use alloc::{format, vec, vec::Vec};
use core::cmp::Ordering;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::linalg::{eig_general, eig_hermitian, CMat};
use crate::moments::Quadrature1D;
use crate::numkit::{sinc, PointSet};
use crate::projection::{region_kernel_exact, ExpSumKernel, Region};
use crate::{Error, Result};

/// Floor below which 1/μ operations are refused.
pub const MU_MIN: f64 = 1e-8;

/// Relative gap under which eigenvalues are treated as one degenerate block.
const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemKind {
    ExpSystem,
    KernelSystem,
}

/// The rule the basis was discretized with.
#[derive(Debug, Clone, PartialEq)]
pub enum NodeRule {
    Interval(Quadrature1D),
    Region(ExpSumKernel),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenBasis {
    /// μ_n, sorted descending.
    pub eigenvalues_mu: Vec<f64>,
    /// λ_n of the exponential system (empty for the kernel system).
    pub eigenvalues_lambda: Vec<Complex64>,
    /// Column n holds φ_n at the nodes, unit Euclidean norm, dominant entry
    /// real positive.
    pub eigenvectors: DMatrix<Complex64>,
    pub rule: NodeRule,
    pub band: DMatrix<f64>,
    pub kind: SystemKind,
    /// Positions (in sorted order) of eigenvectors spanning a numerically
    /// degenerate eigenspace; each group was canonicalized together. Groups
    /// of the exponential system need not be contiguous.
    pub degenerate_blocks: Vec<Vec<usize>>,
    nodes: PointSet,
    weights: Vec<f64>,
    /// Orthonormal eigenvectors of the symmetrized matrix, same phase as φ.
    sym: DMatrix<Complex64>,
}

impl EigenBasis {
    pub fn len(&self) -> usize {
        self.eigenvalues_mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues_mu.is_empty()
    }

    pub fn nodes(&self) -> &PointSet {
        &self.nodes
    }

    /// Weights w_m of ∫_R ≈ Σ w_m (unit band).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn det_band(&self) -> f64 {
        self.band.determinant().abs()
    }

    /// ψ_n = D^{1/2}φ_n / ‖·‖; orthonormal whenever the symmetrized matrix
    /// is Hermitian (kernel system, or node sets closed under negation).
    pub fn symmetrized_vectors(&self) -> &DMatrix<Complex64> {
        &self.sym
    }

    /// Count of μ_n > alpha.
    pub fn count_above(&self, alpha: f64) -> usize {
        self.eigenvalues_mu.iter().filter(|m| **m > alpha).count()
    }

    /// det·K(y) for this basis' region, K(y) = ∫_R e^{ik·y}dk.
    pub fn kernel_at(&self, y: &[f64], det: f64) -> Result<Complex64> {
        scaled_kernel(&self.rule, y, det)
    }

    /// |det B| K(2πB(x − k)) for this basis' region.
    pub fn kernel(&self, x: &[f64], k: &[f64]) -> Result<Complex64> {
        let d = self.nodes.dim();
        let diff = DVector::from_fn(d, |i, _| x[i] - k[i]);
        let y = &self.band * diff * (2.0 * PI);
        scaled_kernel(&self.rule, y.as_slice(), self.det_band())
    }
}

fn rule_region(rule: &NodeRule) -> Region {
    match rule {
        NodeRule::Interval(_) => Region::Interval { half_width: 1.0 },
        NodeRule::Region(k) => k.region.clone(),
    }
}

/// det · K(y) with K(y) = ∫_R e^{ik·y}dk; falls back to the exponential-sum
/// surrogate where no closed form is available.
fn scaled_kernel(rule: &NodeRule, y: &[f64], det: f64) -> Result<Complex64> {
    match rule {
        NodeRule::Interval(_) => Ok(Complex64::new(2.0 * det * sinc(y[0]), 0.0)),
        NodeRule::Region(k) => match region_kernel_exact(&k.region, y) {
            Ok(v) => Ok(v * det),
            Err(Error::Unsupported(_)) => {
                let w = k.unit_weights();
                let mut acc = Complex64::new(0.0, 0.0);
                for (wm, km) in w.iter().zip(k.nodes.iter()) {
                    let ph: f64 = km.iter().zip(y).map(|(a, b)| a * b).sum();
                    acc += Complex64::from_polar(*wm, ph);
                }
                Ok(acc * det)
            }
            Err(e) => Err(e),
        },
    }
}

fn check_band(b: &DMatrix<f64>, dim: usize) -> Result<()> {
    if b.nrows() != dim || b.ncols() != dim {
        return Err(Error::Dimension(format!("{}x{} band for {}-d nodes", b.nrows(), b.ncols(), dim)));
    }
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if (b - b.transpose()).iter().any(|v| v.abs() > 1e-12 * scale) {
        return Err(Error::InvalidArgument("band matrix must be symmetric".into()));
    }
    if !(b.determinant().abs() > 0.0) {
        return Err(Error::InvalidArgument("band matrix is singular".into()));
    }
    Ok(())
}

fn check_rule_1d(q: &Quadrature1D, b: f64) -> Result<()> {
    if !q.symmetric {
        return Err(Error::InvalidArgument("eigensystems need a symmetric rule".into()));
    }
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::InvalidArgument("band must be positive".into()));
    }
    if q.is_empty() {
        return Err(Error::InvalidArgument("empty rule".into()));
    }
    Ok(())
}

fn check_weights(w: &[f64]) -> Result<()> {
    if w.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidArgument("symmetrization needs positive weights".into()));
    }
    Ok(())
}

/// Index j with k_j = −k_i and w_j = w_i for every i, if the set is closed
/// under negation.
fn negation_pairs(nodes: &PointSet, w: &[f64]) -> Option<Vec<usize>> {
    let scale = nodes.coords().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let wmax = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let n = nodes.len();
    let mut pair = vec![usize::MAX; n];
    for i in 0..n {
        let ki = nodes.point(i);
        let j = (0..n)
            .find(|&j| nodes.point(j).iter().zip(ki).all(|(a, b)| (a + b).abs() <= 1e-12 * scale) && (w[i] - w[j]).abs() <= 1e-12 * wmax)?;
        pair[i] = j;
    }
    Some(pair)
}

/// Eigenpairs of a real symmetric matrix restricted to span(P).
fn restricted_eigs(a: &DMatrix<f64>, p: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    if p.ncols() == 0 {
        return (Vec::new(), DMatrix::zeros(p.nrows(), 0));
    }
    let r = p.transpose() * a * p;
    let r = (&r + r.transpose()) * 0.5;
    let se = r.symmetric_eigen();
    (se.eigenvalues.iter().copied().collect(), p * se.eigenvectors)
}

fn parity_bases(pair: &[usize]) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = pair.len();
    let mut even = Vec::new();
    let mut odd = Vec::new();
    let s = core::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        let j = pair[i];
        if j == i {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            even.push(v);
        } else if i < j {
            let mut e = vec![0.0; n];
            let mut o = vec![0.0; n];
            e[i] = s;
            e[j] = s;
            o[i] = s;
            o[j] = -s;
            even.push(e);
            odd.push(o);
        }
    }
    let to_mat = |cols: Vec<Vec<f64>>| {
        let c = cols.len();
        DMatrix::from_fn(n, c, |r, k| cols[k][r])
    };
    (to_mat(even), to_mat(odd))
}

/// Raw eigenpairs of the symmetrized exponential system
/// H[l,m] = √w_l e^{i2π k_l·B k_m} √w_m; returns (λ, ψ, ψ orthonormal?).
fn exp_system(nodes: &PointSet, w: &[f64], b: &DMatrix<f64>) -> Result<(Vec<Complex64>, CMat, bool)> {
    let n = nodes.len();
    let d = nodes.dim();
    let pts: Vec<DVector<f64>> = nodes.iter().map(|p| DVector::from_column_slice(p)).collect();
    let bk: Vec<DVector<f64>> = pts.iter().map(|p| b * p).collect();
    let sw: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
    let phase = |l: usize, m: usize| 2.0 * PI * (0..d).map(|i| pts[l][i] * bk[m][i]).sum::<f64>();
    if let Some(pair) = negation_pairs(nodes, w) {
        let c = DMatrix::from_fn(n, n, |l, m| sw[l] * phase(l, m).cos() * sw[m]);
        let s = DMatrix::from_fn(n, n, |l, m| sw[l] * phase(l, m).sin() * sw[m]);
        let (pe, po) = parity_bases(&pair);
        let (le, ve) = restricted_eigs(&c, &pe);
        let (lo, vo) = restricted_eigs(&s, &po);
        let mut lam = Vec::with_capacity(n);
        let mut psi = CMat::zeros(n, n);
        let mut col = 0;
        for (k, l) in le.iter().enumerate() {
            lam.push(Complex64::new(*l, 0.0));
            for r in 0..n {
                psi[(r, col)] = Complex64::new(ve[(r, k)], 0.0);
            }
            col += 1;
        }
        for (k, l) in lo.iter().enumerate() {
            lam.push(Complex64::new(0.0, *l));
            for r in 0..n {
                psi[(r, col)] = Complex64::new(vo[(r, k)], 0.0);
            }
            col += 1;
        }
        Ok((lam, psi, true))
    } else {
        let h = CMat::from_fn(n, n, |l, m| Complex64::from_polar(sw[l] * sw[m], phase(l, m)));
        let (lam, v) = eig_general(h)?;
        Ok((lam, v, false))
    }
}

/// Deterministic orthonormal basis of span(V) (V orthonormal): greedy
/// pivoting on the diagonal of the basis-independent projector V Vᴴ.
fn canonical_block(v: &CMat) -> CMat {
    let n = v.nrows();
    let b = v.ncols();
    let mut proj = v * v.adjoint();
    let mut out = CMat::zeros(n, b);
    for j in 0..b {
        let mut best = 0;
        let mut bv = -1.0;
        for i in 0..n {
            let d = proj[(i, i)].re;
            if d > bv * (1.0 + 1e-10) + 1e-14 {
                best = i;
                bv = d;
            }
        }
        let u = proj.column(best) / Complex64::new(bv.max(f64::MIN_POSITIVE).sqrt(), 0.0);
        proj -= &u * u.adjoint();
        out.set_column(j, &u);
    }
    out
}

fn dominant_index(v: &[Complex64]) -> usize {
    let m = v.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    v.iter().position(|z| z.norm() >= m * (1.0 - 1e-9)).unwrap_or(0)
}

fn same_value(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= DEGENERACY_TOL * a.norm().max(b.norm()).max(1e-300)
}

struct Assembled {
    mu: Vec<f64>,
    lambda: Vec<Complex64>,
    phi: CMat,
    psi: CMat,
    blocks: Vec<Vec<usize>>,
}

/// Canonicalize degenerate eigenspaces, map back to φ, fix phases, sort.
fn assemble(values: Vec<Complex64>, mut psi: CMat, w: &[f64], orthonormal: bool, mu_of: impl Fn(Complex64) -> f64) -> Assembled {
    let n = psi.nrows();
    let m = values.len();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    if orthonormal {
        // cluster equal eigenvalues (in value order, stable)
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| {
            let (x, y) = (values[a], values[b]);
            x.re.partial_cmp(&y.re).unwrap_or(Ordering::Equal).then(x.im.partial_cmp(&y.im).unwrap_or(Ordering::Equal))
        });
        let mut i = 0;
        while i < m {
            let mut j = i + 1;
            while j < m && same_value(values[order[i]], values[order[j]]) {
                j += 1;
            }
            if j - i > 1 {
                let idx: Vec<usize> = order[i..j].to_vec();
                let v = CMat::from_fn(n, idx.len(), |r, c| psi[(r, idx[c])]);
                let cb = canonical_block(&v);
                for (c, &k) in idx.iter().enumerate() {
                    psi.set_column(k, &cb.column(c));
                }
                groups.push(idx);
            }
            i = j;
        }
    }
    let isw: Vec<f64> = w.iter().map(|v| 1.0 / v.sqrt()).collect();
    let mut phi = CMat::zeros(n, m);
    for k in 0..m {
        let mut col: Vec<Complex64> = (0..n).map(|r| psi[(r, k)] * isw[r]).collect();
        let nrm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let di = dominant_index(&col);
        let ph = if col[di].norm() > 0.0 { col[di].conj() / col[di].norm() } else { Complex64::new(1.0, 0.0) };
        for z in col.iter_mut() {
            *z *= ph / nrm;
        }
        let pn = psi.column(k).norm();
        for r in 0..n {
            psi[(r, k)] *= ph / pn;
            phi[(r, k)] = col[r];
        }
    }
    let mu: Vec<f64> = values.iter().map(|l| mu_of(*l)).collect();
    let dom: Vec<usize> = (0..m).map(|k| dominant_index(phi.column(k).as_slice())).collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        let tie = (mu[a] - mu[b]).abs() <= DEGENERACY_TOL * mu[a].max(mu[b]).max(1e-300);
        if tie {
            dom[a].cmp(&dom[b]).then(a.cmp(&b))
        } else {
            mu[b].partial_cmp(&mu[a]).unwrap_or(Ordering::Equal)
        }
    });
    let mu_s: Vec<f64> = order.iter().map(|&k| mu[k]).collect();
    let lam_s: Vec<Complex64> = order.iter().map(|&k| values[k]).collect();
    let phi_s = CMat::from_fn(n, m, |r, c| phi[(r, order[c])]);
    let psi_s = CMat::from_fn(n, m, |r, c| psi[(r, order[c])]);
    let mut pos = vec![0; m];
    for (p, &k) in order.iter().enumerate() {
        pos[k] = p;
    }
    let mut blocks: Vec<Vec<usize>> = groups
        .iter()
        .map(|g| {
            let mut b: Vec<usize> = g.iter().map(|&k| pos[k]).collect();
            b.sort_unstable();
            b
        })
        .collect();
    blocks.sort_unstable();
    Assembled { mu: mu_s, lambda: lam_s, phi: phi_s, psi: psi_s, blocks }
}

fn build_exp(rule: NodeRule, nodes: PointSet, w: Vec<f64>, b: DMatrix<f64>) -> Result<EigenBasis> {
    check_weights(&w)?;
    let det = b.determinant().abs();
    let (lam, psi, ortho) = exp_system(&nodes, &w, &b)?;
    let a = assemble(lam, psi, &w, ortho, |l| det * l.norm_sqr());
    Ok(EigenBasis {
        eigenvalues_mu: a.mu,
        eigenvalues_lambda: a.lambda,
        eigenvectors: a.phi,
        rule,
        band: b,
        kind: SystemKind::ExpSystem,
        degenerate_blocks: a.blocks,
        nodes,
        weights: w,
        sym: a.psi,
    })
}

fn build_kernel(rule: NodeRule, nodes: PointSet, w: Vec<f64>, b: DMatrix<f64>) -> Result<EigenBasis> {
    check_weights(&w)?;
    let det = b.determinant().abs();
    let n = nodes.len();
    let d = nodes.dim();
    let sw: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
    let mut h = CMat::zeros(n, n);
    for l in 0..n {
        for m in 0..=l {
            let diff = DVector::from_fn(d, |i, _| nodes.point(l)[i] - nodes.point(m)[i]);
            let y = &b * diff * (2.0 * PI);
            let k = scaled_kernel(&rule, y.as_slice(), det)?;
            h[(l, m)] = k * (sw[l] * sw[m]);
            h[(m, l)] = h[(l, m)].conj();
        }
    }
    let (mu, psi) = eig_hermitian(h);
    let values: Vec<Complex64> = mu.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    let a = assemble(values, psi, &w, true, |l| l.re);
    Ok(EigenBasis {
        eigenvalues_mu: a.mu,
        eigenvalues_lambda: Vec::new(),
        eigenvectors: a.phi,
        rule,
        band: b,
        kind: SystemKind::KernelSystem,
        degenerate_blocks: a.blocks,
        nodes,
        weights: w,
        sym: a.psi,
    })
}

fn nodes_1d(q: &Quadrature1D) -> Result<PointSet> {
    PointSet::new(1, q.nodes.clone())
}

/// Eigenpairs of (1/B)·[α_m e^{i2πBω_mω_k}]: λ_n φ_n(ω_k) = Σ_m (α_m/B) e^{i2πBω_mω_k} φ_n(ω_m),
/// with μ_n = B|λ_n|².
pub fn pswf_exp_eigensystem(q: &Quadrature1D, b: f64) -> Result<EigenBasis> {
    check_rule_1d(q, b)?;
    let w: Vec<f64> = q.weights.iter().map(|a| a / b).collect();
    build_exp(NodeRule::Interval(q.clone()), nodes_1d(q)?, w, DMatrix::from_element(1, 1, b))
}

/// Eigenpairs of S[m,k] = (α_k/B)·2B sinc(2πB(ω_m − ω_k)) (generalized DPSS).
pub fn pswf_kernel_eigensystem(q: &Quadrature1D, b: f64) -> Result<EigenBasis> {
    check_rule_1d(q, b)?;
    let w: Vec<f64> = q.weights.iter().map(|a| a / b).collect();
    build_kernel(NodeRule::Interval(q.clone()), nodes_1d(q)?, w, DMatrix::from_element(1, 1, b))
}

/// λ_n φ_n(k_l) = Σ_m w_m e^{i2πBk_m·k_l} φ_n(k_m), μ_n = |det B||λ_n|².
pub fn rslepian_exp_eigensystem(k: &ExpSumKernel, b: &DMatrix<f64>) -> Result<EigenBasis> {
    check_band(b, k.nodes.dim())?;
    build_exp(NodeRule::Region(k.clone()), k.nodes.clone(), k.unit_weights(), b.clone())
}

/// μ_n φ_n(k_l) = Σ_m w_m |det B| K(2πB[k_l − k_m]) φ_n(k_m).
pub fn rslepian_kernel_eigensystem(k: &ExpSumKernel, b: &DMatrix<f64>) -> Result<EigenBasis> {
    check_band(b, k.nodes.dim())?;
    build_kernel(NodeRule::Region(k.clone()), k.nodes.clone(), k.unit_weights(), b.clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtensionMode {
    /// φ(t) = (1/λ) Σ w_m e^{i2π t·Bk_m} φ(k_m); needs the exponential system.
    ExpExtension,
    /// φ(t) = (1/μ) Σ w_m |det B| K(2πB(t − k_m)) φ(k_m).
    KernelExtension,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProlateEvaluator {
    pub basis: EigenBasis,
    pub mode: ExtensionMode,
}

impl ProlateEvaluator {
    pub fn new(basis: EigenBasis, mode: ExtensionMode) -> Self {
        ProlateEvaluator { basis, mode }
    }
}

/// Continuous-argument value of φ_n. Exact at the nodes for the extension
/// matching the basis' own eigensystem.
pub fn extend_prolate(ev: &ProlateEvaluator, n: usize, t: &[f64]) -> Result<Complex64> {
    let basis = &ev.basis;
    if n >= basis.len() {
        return Err(Error::InvalidArgument(format!("eigenfunction {n} of {}", basis.len())));
    }
    let d = basis.nodes.dim();
    if t.len() != d {
        return Err(Error::Dimension(format!("point of dimension {} for {}-d nodes", t.len(), d)));
    }
    let mu = basis.eigenvalues_mu[n];
    if !(mu >= MU_MIN) {
        return Err(Error::InvalidArgument(format!("μ_{n} = {mu:e} is below the floor {MU_MIN:e}")));
    }
    let phi = basis.eigenvectors.column(n);
    let mut acc = Complex64::new(0.0, 0.0);
    match ev.mode {
        ExtensionMode::ExpExtension => {
            if basis.kind != SystemKind::ExpSystem {
                return Err(Error::Unsupported("exponential extension needs an exponential-system basis".into()));
            }
            let tb = &basis.band * DVector::from_column_slice(t);
            for (m, km) in basis.nodes.iter().enumerate() {
                let ph: f64 = km.iter().zip(tb.iter()).map(|(a, b)| a * b).sum::<f64>() * 2.0 * PI;
                acc += Complex64::from_polar(basis.weights[m], ph) * phi[m];
            }
            Ok(acc / basis.eigenvalues_lambda[n])
        }
        ExtensionMode::KernelExtension => {
            for (m, km) in basis.nodes.iter().enumerate() {
                acc += basis.kernel(t, km)? * basis.weights[m] * phi[m];
            }
            Ok(acc / mu)
        }
    }
}

/// Region of the basis' rule.
pub fn basis_region(b: &EigenBasis) -> Region {
    rule_region(&b.rule)
}
