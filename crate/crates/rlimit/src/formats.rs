use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use rlimit_core::kernels::{ConeSpec, ErrorProfile, QuadratureND, TargetBox, TetraSpec, TriangleSpec};
use rlimit_core::moments::Quadrature1D;
use rlimit_core::numkit::{PointSet, SampledField};
use rlimit_core::projection::{ExpSumKernel, Region};
use rlimit_core::prolate::{EigenBasis, SystemKind};
use rlimit_core::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

fn format_err(path: &Path, msg: impl Into<String>) -> Error {
    Error::Format { path: path.to_path_buf(), msg: msg.into() }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_path_buf(), source }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| format_err(path, e.to_string()))?;
    s.push('\n');
    fs::write(path, s).map_err(io_err(path))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let s = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&s).map_err(|e| format_err(path, e.to_string()))
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn matrix_from_rows(rows: &[Vec<f64>]) -> std::result::Result<DMatrix<f64>, String> {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    if n == 0 || rows.iter().any(|r| r.len() != m) {
        return Err("matrix rows must be non-empty and of equal length".into());
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

// ---------------------------------------------------------------------------
// One-dimensional quadratures

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Numbers {
    Real(Vec<f64>),
    Complex(Vec<[f64; 2]>),
}

impl Numbers {
    pub fn complex(v: &[Complex64]) -> Self {
        Numbers::Complex(v.iter().map(|z| [z.re, z.im]).collect())
    }

    pub fn len(&self) -> usize {
        match self {
            Numbers::Real(v) => v.len(),
            Numbers::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn real(&self) -> Option<&[f64]> {
        match self {
            Numbers::Real(v) => Some(v),
            Numbers::Complex(_) => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RuleProvenance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default)]
    pub residuals: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<u32>,
}

/// `{"band", "symmetric", "weights", "nodes", "provenance"}`; nodes and weights
/// are plain numbers or `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureFile {
    pub band: f64,
    pub symmetric: bool,
    pub weights: Numbers,
    pub nodes: Numbers,
    #[serde(default)]
    pub provenance: RuleProvenance,
}

impl QuadratureFile {
    pub fn from_rule(q: &Quadrature1D, provenance: RuleProvenance) -> Self {
        QuadratureFile {
            band: q.band,
            symmetric: q.symmetric,
            weights: Numbers::Real(q.weights.clone()),
            nodes: Numbers::Real(q.nodes.clone()),
            provenance,
        }
    }

    pub fn to_rule(&self, path: &Path) -> Result<Quadrature1D> {
        let (Some(w), Some(x)) = (self.weights.real(), self.nodes.real()) else {
            return Err(format_err(path, "complex rules cannot be used as real quadratures"));
        };
        if w.len() != x.len() || w.is_empty() {
            return Err(format_err(path, format!("{} weights for {} nodes", w.len(), x.len())));
        }
        if !(self.band > 0.0) || w.iter().chain(x).any(|v| !v.is_finite()) {
            return Err(format_err(path, "band must be positive and all values finite"));
        }
        Ok(Quadrature1D { weights: w.to_vec(), nodes: x.to_vec(), band: self.band, symmetric: self.symmetric })
    }
}

// ---------------------------------------------------------------------------
// Regions and N-dimensional quadratures

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RegionJson {
    Interval {
        half_width: f64,
    },
    Triangle {
        dp: f64,
        s: f64,
        #[serde(default)]
        phase_shift: Option<f64>,
    },
    Simplex {
        vertices: Vec<Vec<f64>>,
    },
    Tetrahedron {
        h: f64,
        dp: f64,
        s: f64,
    },
    Cone {
        omega0: f64,
        pmax: f64,
        n: usize,
    },
    Ball {
        dim: usize,
        k_max: f64,
    },
    Transformed {
        base: Box<RegionJson>,
        a: Vec<Vec<f64>>,
    },
    Union {
        parts: Vec<RegionJson>,
    },
}

impl From<&Region> for RegionJson {
    fn from(r: &Region) -> Self {
        match r {
            Region::Interval { half_width } => RegionJson::Interval { half_width: *half_width },
            Region::Triangle(t) => RegionJson::Triangle { dp: t.dp, s: t.s, phase_shift: t.phase_shift },
            Region::Simplex(v) => RegionJson::Simplex { vertices: v.clone() },
            Region::Tetrahedron(t) => RegionJson::Tetrahedron { h: t.h, dp: t.dp, s: t.s },
            Region::Cone(c) => RegionJson::Cone { omega0: c.omega0, pmax: c.pmax, n: c.n },
            Region::Ball { dim, k_max } => RegionJson::Ball { dim: *dim, k_max: *k_max },
            Region::Transformed { base, a } => {
                RegionJson::Transformed { base: Box::new(RegionJson::from(base.as_ref())), a: matrix_rows(a) }
            }
            Region::Union(parts) => RegionJson::Union { parts: parts.iter().map(RegionJson::from).collect() },
        }
    }
}

impl RegionJson {
    pub fn to_region(&self) -> std::result::Result<Region, String> {
        let e = |x: rlimit_core::Error| x.to_string();
        Ok(match self {
            RegionJson::Interval { half_width } => Region::Interval { half_width: *half_width },
            RegionJson::Triangle { dp, s, phase_shift } => {
                let mut t = TriangleSpec::new(*dp, *s).map_err(e)?;
                t.phase_shift = *phase_shift;
                Region::Triangle(t)
            }
            RegionJson::Simplex { vertices } => Region::Simplex(vertices.clone()),
            RegionJson::Tetrahedron { h, dp, s } => Region::Tetrahedron(TetraSpec::new(*h, *dp, *s).map_err(e)?),
            RegionJson::Cone { omega0, pmax, n } => Region::Cone(ConeSpec::new(*omega0, *pmax, *n).map_err(e)?),
            RegionJson::Ball { dim, k_max } => Region::Ball { dim: *dim, k_max: *k_max },
            RegionJson::Transformed { base, a } => Region::Transformed { base: Box::new(base.to_region()?), a: matrix_from_rows(a)? },
            RegionJson::Union { parts } => Region::Union(parts.iter().map(|p| p.to_region()).collect::<std::result::Result<_, _>>()?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileJson {
    pub max_error: f64,
    pub target: Vec<f64>,
    pub grid: Vec<usize>,
}

impl From<&ErrorProfile> for ProfileJson {
    fn from(p: &ErrorProfile) -> Self {
        ProfileJson { max_error: p.max_error, target: p.target.half_widths.clone(), grid: p.grid.clone() }
    }
}

impl ProfileJson {
    fn to_profile(&self) -> std::result::Result<ErrorProfile, String> {
        Ok(ErrorProfile {
            max_error: self.max_error,
            target: TargetBox::new(self.target.clone()).map_err(|e| e.to_string())?,
            grid: self.grid.clone(),
        })
    }
}

/// Multidimensional exponential-sum rule with its region, optional band
/// matrix, symmetry group and measured error profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureNdFile {
    pub dim: usize,
    pub weights: Vec<f64>,
    pub nodes: Vec<Vec<f64>>,
    pub region: RegionJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetry_group: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_profile: Option<ProfileJson>,
    #[serde(default)]
    pub provenance: Vec<String>,
}

impl QuadratureNdFile {
    pub fn from_quadrature(q: &QuadratureND, provenance: Vec<String>) -> Self {
        QuadratureNdFile {
            dim: q.dim(),
            weights: q.weights.clone(),
            nodes: q.nodes.iter().map(|p| p.to_vec()).collect(),
            region: RegionJson::from(&q.region_tag),
            band: None,
            symmetry_group: q.symmetry_group.as_ref().map(|g| g.iter().map(matrix_rows).collect()),
            error_profile: q.error_profile.as_ref().map(ProfileJson::from),
            provenance,
        }
    }

    pub fn from_kernel(k: &ExpSumKernel, provenance: Vec<String>) -> Self {
        let det = k.band.determinant().abs();
        QuadratureNdFile {
            dim: k.nodes.dim(),
            weights: k.weights.iter().map(|a| a / det).collect(),
            nodes: k.nodes.iter().map(|p| p.to_vec()).collect(),
            region: RegionJson::from(&k.region),
            band: Some(matrix_rows(&k.band)),
            symmetry_group: None,
            error_profile: k.error_profile.as_ref().map(ProfileJson::from),
            provenance,
        }
    }

    pub fn to_quadrature(&self, path: &Path) -> Result<QuadratureND> {
        let f = |m: String| format_err(path, m);
        if self.nodes.len() != self.weights.len() || self.nodes.iter().any(|p| p.len() != self.dim) {
            return Err(f(format!("{} weights, {} nodes, dim {}", self.weights.len(), self.nodes.len(), self.dim)));
        }
        let nodes = PointSet::from_points(self.dim, &self.nodes).map_err(|e| f(e.to_string()))?;
        let symmetry_group = match &self.symmetry_group {
            Some(g) => Some(g.iter().map(|m| matrix_from_rows(m)).collect::<std::result::Result<Vec<_>, _>>().map_err(f)?),
            None => None,
        };
        Ok(QuadratureND {
            weights: self.weights.clone(),
            nodes,
            region_tag: self.region.to_region().map_err(f)?,
            symmetry_group,
            error_profile: self.error_profile.as_ref().map(|p| p.to_profile()).transpose().map_err(f)?,
        })
    }

    pub fn to_kernel(&self, path: &Path) -> Result<ExpSumKernel> {
        let q = self.to_quadrature(path)?;
        let k = ExpSumKernel::from_quadrature(&q)?;
        match &self.band {
            Some(b) => Ok(k.with_band(matrix_from_rows(b).map_err(|m| format_err(path, m))?)?),
            None => Ok(k),
        }
    }
}

/// Either kind of rule file; distinguished by the `dim`/`region` keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RuleFile {
    Nd(QuadratureNdFile),
    OneD(QuadratureFile),
}

// ---------------------------------------------------------------------------
// Eigenbases, projection sidecars, reports

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenBasisFile {
    pub kind: &'static str,
    pub band: Vec<Vec<f64>>,
    pub eigenvalues_mu: Vec<f64>,
    pub eigenvalues_lambda: Vec<[f64; 2]>,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// Column n of the eigenvector matrix, as `[re, im]` pairs.
    pub eigenvectors: Vec<Vec<[f64; 2]>>,
    pub degenerate_blocks: Vec<Vec<usize>>,
    pub provenance: Vec<String>,
}

impl EigenBasisFile {
    pub fn new(b: &EigenBasis, provenance: Vec<String>) -> Self {
        EigenBasisFile {
            kind: match b.kind {
                SystemKind::ExpSystem => "exp",
                SystemKind::KernelSystem => "kernel",
            },
            band: matrix_rows(&b.band),
            eigenvalues_mu: b.eigenvalues_mu.clone(),
            eigenvalues_lambda: b.eigenvalues_lambda.iter().map(|z| [z.re, z.im]).collect(),
            nodes: b.nodes().iter().map(|p| p.to_vec()).collect(),
            weights: b.weights().to_vec(),
            eigenvectors: b.eigenvectors.column_iter().map(|c| c.iter().map(|z| [z.re, z.im]).collect()).collect(),
            degenerate_blocks: b.degenerate_blocks.clone(),
            provenance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub label: String,
    pub dim: usize,
    pub n_points: usize,
    pub error_bound: Option<f64>,
    pub provenance: Vec<String>,
}

// ---------------------------------------------------------------------------
// SampledField CSV: a `dim,n_points` header line, then `x1,…,xd,re,im` rows.

pub fn write_field_csv<W: Write>(w: W, f: &SampledField) -> std::io::Result<()> {
    let mut out = csv::WriterBuilder::new().flexible(true).from_writer(w);
    let d = f.points.dim();
    out.write_record([d.to_string(), f.len().to_string()])?;
    let mut row = Vec::with_capacity(d + 2);
    for (p, v) in f.points.iter().zip(&f.values) {
        row.clear();
        row.extend(p.iter().map(|x| format!("{x:e}")));
        row.push(format!("{:e}", v.re));
        row.push(format!("{:e}", v.im));
        out.write_record(&row)?;
    }
    out.flush()
}

pub fn read_field_csv<R: Read>(r: R, label: &str, path: &Path) -> Result<SampledField> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(r);
    let mut records = rdr.records();
    let head = records.next().ok_or_else(|| format_err(path, "empty file"))?.map_err(|e| format_err(path, e.to_string()))?;
    let parse_usize = |s: Option<&str>, what: &str| -> Result<usize> {
        s.and_then(|v| v.parse().ok()).ok_or_else(|| format_err(path, format!("header: bad {what}")))
    };
    if head.len() != 2 {
        return Err(format_err(path, "header must be `dim,n_points`"));
    }
    let dim = parse_usize(head.get(0), "dim")?;
    let n = parse_usize(head.get(1), "n_points")?;
    if dim == 0 {
        return Err(format_err(path, "dim must be positive"));
    }
    let mut coords = Vec::with_capacity(n * dim);
    let mut values = Vec::with_capacity(n);
    for (i, rec) in records.enumerate() {
        let rec = rec.map_err(|e| format_err(path, e.to_string()))?;
        if rec.len() != dim + 2 {
            return Err(format_err(path, format!("row {}: expected {} columns, found {}", i + 2, dim + 2, rec.len())));
        }
        let mut nums = Vec::with_capacity(dim + 2);
        for s in rec.iter() {
            let v: f64 = s.parse().map_err(|_| format_err(path, format!("row {}: `{s}` is not a number", i + 2)))?;
            if !v.is_finite() {
                return Err(format_err(path, format!("row {}: non-finite value", i + 2)));
            }
            nums.push(v);
        }
        coords.extend_from_slice(&nums[..dim]);
        values.push(Complex64::new(nums[dim], nums[dim + 1]));
    }
    if values.len() != n {
        return Err(format_err(path, format!("header announces {n} points, found {}", values.len())));
    }
    let points = PointSet::new(dim, coords).map_err(|e| format_err(path, e.to_string()))?;
    SampledField::new(points, values, label).map_err(|e| format_err(path, e.to_string()))
}

pub fn save_field(path: &Path, f: &SampledField) -> Result<()> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    write_field_csv(std::io::BufWriter::new(file), f).map_err(io_err(path))
}

pub fn load_field(path: &Path) -> Result<SampledField> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let label = path.file_stem().and_then(|s| s.to_str()).unwrap_or("field");
    read_field_csv(std::io::BufReader::new(file), label, path)
}

/// Plain CSV table with a header row.
pub fn save_table(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut out = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let wrap = |e: csv::Error| format_err(path, e.to_string());
    out.write_record(header).map_err(wrap)?;
    for r in rows {
        out.write_record(r.iter().map(|v| format!("{v:e}"))).map_err(wrap)?;
    }
    out.flush().map_err(io_err(path))
}
