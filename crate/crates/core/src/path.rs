//! Continuous paths in `Sp(2n, ℝ)` described by generator trees.

use std::sync::Arc;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Config, RefineOptions, Tolerances};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, Mat, PI};
use crate::rotation;
use crate::spectral::{self, SympMatrix};

/// Polynomial coefficients, lowest degree first.
pub type Poly = Vec<f64>;

pub const MAX_POLY_DEGREE: usize = 8;

pub fn poly_eval(p: &[f64], t: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

#[derive(Debug)]
pub enum Generator {
    Samples { ts: Vec<f64>, mats: Vec<Mat> },
    RotationBlocks { theta: Vec<Poly> },
    AngleTable { ts: Vec<f64>, angles: Vec<Vec<f64>> },
    Shear { entry: (usize, usize), coeff: f64 },
    Constant(Mat),
    Catenation(Vec<SympPath>),
    Reverse(SympPath),
    GlobalPerturb(SympPath, f64),
    DirectSum(SympPath, SympPath),
    /// `t ↦ P^{1−t}·O` for `M = P·O`.
    PolarRadial { q: Mat, lambda: Vec<f64>, o: Mat, m: Mat },
    /// `t ↦ U₀·Q·diag(e^{itφ})·Q*`.
    UnitaryGeodesic { u0: CMat, q: CMat, phases: Vec<f64> },
    /// Block rotation whose first angle runs `θ₁ − 2kπt`.
    CorrectionLoop { angles: Vec<f64>, k: i64 },
    Segment(SympPath, f64, f64),
    Conjugate { path: SympPath, t: Mat, t_inv: Mat },
    Reparam(SympPath, Poly),
    Product(SympPath, SympPath),
    /// `exp(J₀·S(t))` with `S(t) = Σ tᵏ Sₖ` symmetric.
    Exponential { s: Vec<Mat> },
}

/// A continuous map `[0, 1] → Sp(2n, ℝ)`. Cheap to clone.
#[derive(Debug, Clone)]
pub struct SympPath {
    n: usize,
    gen: Arc<Generator>,
}

pub(crate) fn schema(msg: impl Into<String>) -> Error {
    Error::Schema(msg.into())
}

fn check_poly(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(schema("empty polynomial"));
    }
    if p.len() > MAX_POLY_DEGREE + 1 {
        return Err(schema(format!(
            "polynomial degree {} exceeds {MAX_POLY_DEGREE}",
            p.len() - 1
        )));
    }
    if p.iter().any(|c| !c.is_finite()) {
        return Err(schema("non-finite polynomial coefficient"));
    }
    Ok(())
}

fn rel_gap(a: &Mat, b: &Mat) -> f64 {
    linalg::max_abs(&(a - b)) / linalg::max_abs(a).max(linalg::max_abs(b)).max(1.0)
}

/// Newton-type pull back onto `Sp(2n)`: `M ← M(3I − A)/2` with
/// `A = −J₀MᵀJ₀M`.
fn project_symplectic(m: &Mat) -> Mat {
    let n = m.nrows() / 2;
    let j = linalg::j0(n);
    let id = Mat::identity(2 * n, 2 * n);
    let mut x = m.clone();
    for _ in 0..8 {
        let a = -(&j * x.transpose() * &j * &x);
        if linalg::max_abs(&(&a - &id)) < 1e-15 {
            break;
        }
        x = &x * (&id * 3.0 - a) * 0.5;
    }
    x
}

impl SympPath {
    fn make(n: usize, gen: Generator) -> Self {
        Self {
            n,
            gen: Arc::new(gen),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generator(&self) -> &Generator {
        &self.gen
    }

    pub fn rotation_blocks(theta: Vec<Poly>) -> Result<Self> {
        if theta.is_empty() {
            return Err(schema("rotation_blocks needs at least one angle polynomial"));
        }
        for p in &theta {
            check_poly(p)?;
        }
        Ok(Self::make(theta.len(), Generator::RotationBlocks { theta }))
    }

    /// Single block `R(c₀ + c₁t + …)`.
    pub fn rotation(coeffs: &[f64]) -> Self {
        Self::rotation_blocks(vec![coeffs.to_vec()]).expect("valid rotation polynomial")
    }

    pub fn angle_table(ts: Vec<f64>, angles: Vec<Vec<f64>>) -> Result<Self> {
        if ts.len() < 2 || ts.len() != angles.len() {
            return Err(schema("angle_table needs matching t and angle rows (at least two)"));
        }
        check_grid(&ts)?;
        let n = angles[0].len();
        if n == 0 || angles.iter().any(|a| a.len() != n) {
            return Err(schema("angle_table rows must all have length n > 0"));
        }
        Ok(Self::make(n, Generator::AngleTable { ts, angles }))
    }

    /// Shear ramping one entry linearly: `I + coeff·t·E_{ij}`, completed to a
    /// symplectic matrix (symmetric partner in the off-diagonal blocks,
    /// inverse transpose in the diagonal ones).
    pub fn shear(n: usize, entry: (usize, usize), coeff: f64) -> Result<Self> {
        if n == 0 {
            return Err(schema("shear needs n > 0"));
        }
        if entry.0 >= 2 * n || entry.1 >= 2 * n {
            return Err(schema(format!("shear entry {entry:?} outside 2n = {}", 2 * n)));
        }
        if entry.0 == entry.1 {
            // a diagonal entry 1 + ct has to stay invertible on [0, 1]
            if coeff <= -1.0 {
                return Err(schema("diagonal shear coefficient must exceed -1"));
            }
        }
        if !coeff.is_finite() {
            return Err(schema("non-finite shear coefficient"));
        }
        Ok(Self::make(n, Generator::Shear { entry, coeff }))
    }

    pub fn constant(m: SympMatrix) -> Self {
        let n = m.n();
        Self::make(n, Generator::Constant(m.into_matrix()))
    }

    pub fn identity(n: usize) -> Self {
        Self::constant(SympMatrix::identity(n))
    }

    /// Samples interpolated linearly and projected back onto `Sp(2n)`.
    pub fn samples(ts: Vec<f64>, mats: Vec<SympMatrix>) -> Result<Self> {
        if ts.len() < 2 || ts.len() != mats.len() {
            return Err(schema("samples need at least two (t, matrix) pairs"));
        }
        check_grid(&ts)?;
        let n = mats[0].n();
        if mats.iter().any(|m| m.n() != n) {
            return Err(Error::DimensionMismatch {
                expected: 2 * n,
                got: mats.iter().find(|m| m.n() != n).map_or(0, |m| 2 * m.n()),
            });
        }
        let mats: Vec<Mat> = mats.into_iter().map(SympMatrix::into_matrix).collect();
        // Reject grids whose midpoints need a large correction.
        for w in mats.windows(2) {
            let mid = (&w[0] + &w[1]) * 0.5;
            let moved = rel_gap(&project_symplectic(&mid), &mid);
            if moved > 1e-5 {
                return Err(schema(format!(
                    "sample grid too coarse: interpolation leaves Sp by {moved:.2e}"
                )));
            }
        }
        Ok(Self::make(n, Generator::Samples { ts, mats }))
    }

    /// `p # q` as in the catenation formula.
    pub fn catenate(&self, other: &SympPath, tol: &Tolerances) -> Result<Self> {
        Self::catenate_all(vec![self.clone(), other.clone()], tol)
    }

    /// Catenation of several paths with equal time shares.
    pub fn catenate_all(paths: Vec<SympPath>, tol: &Tolerances) -> Result<Self> {
        if paths.is_empty() {
            return Err(schema("catenation of zero paths"));
        }
        let n = paths[0].n;
        for p in &paths {
            if p.n != n {
                return Err(Error::DimensionMismatch {
                    expected: 2 * n,
                    got: 2 * p.n,
                });
            }
        }
        for w in paths.windows(2) {
            let gap = rel_gap(&w[0].eval(1.0), &w[1].eval(0.0));
            if gap > tol.symp {
                return Err(Error::EndpointMismatch(gap));
            }
        }
        if paths.len() == 1 {
            return Ok(paths.into_iter().next().expect("one path"));
        }
        Ok(Self::make(n, Generator::Catenation(paths)))
    }

    pub fn reverse(&self) -> Self {
        Self::make(self.n, Generator::Reverse(self.clone()))
    }

    /// `t ↦ e^{−θJ}·p(t)`.
    pub fn perturb_global(&self, theta: f64) -> Self {
        if theta == 0.0 {
            return self.clone();
        }
        Self::make(self.n, Generator::GlobalPerturb(self.clone(), theta))
    }

    pub fn direct_sum(&self, other: &SympPath) -> Self {
        Self::make(self.n + other.n, Generator::DirectSum(self.clone(), other.clone()))
    }

    /// Radial tail from `M` (at `t = 0`) to its orthogonal polar factor.
    pub fn polar_radial(m: &SympMatrix) -> Self {
        let mm = m.matrix() * m.matrix().transpose();
        let eig = SymmetricEigen::new((&mm + mm.transpose()) * 0.5);
        let lambda: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        let q = eig.eigenvectors;
        let p_inv = &q * Mat::from_diagonal(&eig.eigenvalues.map(|x| 1.0 / x.sqrt())) * q.transpose();
        let o = p_inv * m.matrix();
        Self::make(
            m.n(),
            Generator::PolarRadial {
                q,
                lambda,
                o,
                m: m.matrix().clone(),
            },
        )
    }

    /// Shortest unitary path between two orthogonal symplectic matrices.
    pub fn unitary_geodesic(o1: &SympMatrix, o2: &SympMatrix) -> Result<Self> {
        if o1.n() != o2.n() {
            return Err(Error::DimensionMismatch {
                expected: 2 * o1.n(),
                got: 2 * o2.n(),
            });
        }
        let u0 = linalg::unitary_of(o1.matrix());
        let u1 = linalg::unitary_of(o2.matrix());
        let w = u0.adjoint() * &u1;
        let (q, phases) = linalg::unitary_eigen(&w);
        Ok(Self::make(o1.n(), Generator::UnitaryGeodesic { u0, q, phases }))
    }

    /// Loop at `block_rotation(angles)` whose first block turns `−2kπ`.
    pub fn correction_loop(angles: Vec<f64>, k: i64) -> Self {
        Self::make(angles.len(), Generator::CorrectionLoop { angles, k })
    }

    /// Restriction to `[a, b]`, rescaled to `[0, 1]`.
    pub fn segment(&self, a: f64, b: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
            return Err(Error::OutOfDomain(if (0.0..=1.0).contains(&a) { b } else { a }));
        }
        Ok(Self::make(self.n, Generator::Segment(self.clone(), a, b)))
    }

    /// `t ↦ T·p(t)·T⁻¹`.
    pub fn conjugate(&self, t: &SympMatrix) -> Result<Self> {
        if t.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.n,
                got: 2 * t.n(),
            });
        }
        let n = self.n;
        let j = linalg::j0(n);
        let t_inv = -(&j * t.matrix().transpose() * &j);
        Ok(Self::make(
            n,
            Generator::Conjugate {
                path: self.clone(),
                t: t.matrix().clone(),
                t_inv,
            },
        ))
    }

    /// `t ↦ p(σ(t))`; `σ` must map `[0, 1]` into `[0, 1]`.
    pub fn reparam(&self, sigma: Poly) -> Result<Self> {
        check_poly(&sigma)?;
        for k in 0..=64 {
            let s = poly_eval(&sigma, k as f64 / 64.0);
            if !(-1e-12..=1.0 + 1e-12).contains(&s) {
                return Err(Error::OutOfDomain(s));
            }
        }
        Ok(Self::make(self.n, Generator::Reparam(self.clone(), sigma)))
    }

    /// Pointwise product `p(t)·q(t)`.
    pub fn product(&self, other: &SympPath) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.n,
                got: 2 * other.n,
            });
        }
        Ok(Self::make(self.n, Generator::Product(self.clone(), other.clone())))
    }

    /// `exp(J₀·S(t))` for `S(t) = Σ tᵏ Sₖ` with symmetric coefficients.
    pub fn exponential(s: Vec<Mat>) -> Result<Self> {
        if s.is_empty() || s.len() > MAX_POLY_DEGREE + 1 {
            return Err(schema("exp needs between 1 and 9 coefficient matrices"));
        }
        let dim = s[0].nrows();
        if dim == 0 || !dim.is_multiple_of(2) {
            return Err(Error::OddDimension(dim));
        }
        for m in &s {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: m.nrows(),
                });
            }
            if rel_gap(m, &m.transpose()) > 1e-12 {
                return Err(schema("exp coefficient matrices must be symmetric"));
            }
        }
        Ok(Self::make(dim / 2, Generator::Exponential { s }))
    }

    /// Raw evaluation; `t` is clamped to `[0, 1]`.
    pub fn eval(&self, t: f64) -> Mat {
        let t = t.clamp(0.0, 1.0);
        match &*self.gen {
            Generator::Samples { ts, mats } => {
                let k = match ts.binary_search_by(|x| x.total_cmp(&t)) {
                    Ok(k) => return mats[k].clone(),
                    Err(k) => k,
                };
                if k == 0 {
                    return mats[0].clone();
                }
                if k >= ts.len() {
                    return mats[ts.len() - 1].clone();
                }
                let s = (t - ts[k - 1]) / (ts[k] - ts[k - 1]);
                project_symplectic(&(&mats[k - 1] * (1.0 - s) + &mats[k] * s))
            }
            Generator::RotationBlocks { theta } => {
                let a: Vec<f64> = theta.iter().map(|p| poly_eval(p, t)).collect();
                linalg::block_rotation(&a)
            }
            Generator::AngleTable { ts, angles } => {
                let k = ts.partition_point(|&x| x <= t).clamp(1, ts.len() - 1);
                let s = ((t - ts[k - 1]) / (ts[k] - ts[k - 1])).clamp(0.0, 1.0);
                let a: Vec<f64> = angles[k - 1]
                    .iter()
                    .zip(&angles[k])
                    .map(|(x, y)| x + (y - x) * s)
                    .collect();
                linalg::block_rotation(&a)
            }
            Generator::Shear { entry, coeff } => shear_matrix(self.n, *entry, coeff * t),
            Generator::Constant(m) => m.clone(),
            Generator::Catenation(parts) => {
                let k = parts.len();
                let local = t * k as f64;
                let i = ((local.ceil() as usize).max(1) - 1).min(k - 1);
                parts[i].eval(local - i as f64)
            }
            Generator::Reverse(p) => p.eval(1.0 - t),
            Generator::GlobalPerturb(p, theta) => linalg::rotation_minus(self.n, *theta) * p.eval(t),
            Generator::DirectSum(p, q) => linalg::symp_direct_sum(&p.eval(t), &q.eval(t)),
            Generator::PolarRadial { q, lambda, o, m } => {
                if t == 0.0 {
                    return m.clone();
                }
                let s = 1.0 - t;
                let d = Mat::from_diagonal(&nalgebra::DVector::from_iterator(
                    lambda.len(),
                    lambda.iter().map(|x| x.powf(s / 2.0)),
                ));
                q * d * q.transpose() * o
            }
            Generator::UnitaryGeodesic { u0, q, phases } => {
                let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
                    phases.len(),
                    phases.iter().map(|p| Complex64::from_polar(1.0, p * t)),
                ));
                linalg::orthosymp_of(&(u0 * q * d * q.adjoint()))
            }
            Generator::CorrectionLoop { angles, k } => {
                let mut a = angles.clone();
                a[0] -= 2.0 * PI * (*k as f64) * t;
                linalg::block_rotation(&a)
            }
            Generator::Segment(p, a, b) => p.eval(a + (b - a) * t),
            Generator::Conjugate { path, t: tm, t_inv } => tm * path.eval(t) * t_inv,
            Generator::Reparam(p, sigma) => p.eval(poly_eval(sigma, t)),
            Generator::Product(p, q) => p.eval(t) * q.eval(t),
            Generator::Exponential { s } => {
                let mut acc = Mat::zeros(2 * self.n, 2 * self.n);
                for c in s.iter().rev() {
                    acc = acc * t + c;
                }
                (linalg::j0(self.n) * acc).exp()
            }
        }
    }

    /// Checked evaluation.
    pub fn evaluate(&self, t: f64, tol: &Tolerances) -> Result<SympMatrix> {
        if !(0.0..=1.0).contains(&t) || t.is_nan() {
            return Err(Error::OutOfDomain(t));
        }
        let m = self.eval(t);
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numerical(format!("non-finite path value at t = {t}")));
        }
        let residual = linalg::symplectic_residual(&m);
        let scale = linalg::max_abs(&m).max(1.0).powi(2);
        if residual > tol.path * scale {
            return Err(Error::NotSymplectic {
                residual,
                tol: tol.path,
            });
        }
        Ok(SympMatrix::trusted(m))
    }

    pub fn start(&self) -> SympMatrix {
        SympMatrix::trusted(self.eval(0.0))
    }

    pub fn end(&self) -> SympMatrix {
        SympMatrix::trusted(self.eval(1.0))
    }

    /// JSON description in the path-spec format.
    pub fn to_json(&self) -> Value {
        let rows = |m: &Mat| json!(linalg::to_rows(m));
        match &*self.gen {
            Generator::Samples { ts, mats } => json!({
                "kind": "samples",
                "n": self.n,
                "samples": ts.iter().zip(mats).map(|(t, m)| json!({"t": t, "matrix": rows(m)})).collect::<Vec<_>>(),
            }),
            Generator::RotationBlocks { theta } => json!({"kind": "rotation_blocks", "n": self.n, "theta": theta}),
            Generator::AngleTable { ts, angles } => json!({"kind": "angle_table", "n": self.n, "t": ts, "angles": angles}),
            Generator::Shear { entry, coeff } => {
                json!({"kind": "shear", "n": self.n, "entry": [entry.0, entry.1], "coeff": coeff})
            }
            Generator::Constant(m) => json!({"kind": "constant", "n": self.n, "matrix": rows(m)}),
            Generator::Catenation(parts) => json!({
                "kind": "catenation",
                "n": self.n,
                "paths": parts.iter().map(SympPath::to_json).collect::<Vec<_>>(),
            }),
            Generator::Reverse(p) => json!({"kind": "reverse", "n": self.n, "path": p.to_json()}),
            Generator::GlobalPerturb(p, theta) => {
                json!({"kind": "perturb", "n": self.n, "theta": theta, "path": p.to_json()})
            }
            Generator::DirectSum(p, q) => {
                json!({"kind": "direct_sum", "n": self.n, "paths": [p.to_json(), q.to_json()]})
            }
            Generator::PolarRadial { m, .. } => json!({"kind": "polar_radial", "n": self.n, "matrix": rows(m)}),
            Generator::UnitaryGeodesic { .. } => json!({
                "kind": "geodesic",
                "n": self.n,
                "from": rows(&self.eval(0.0)),
                "to": rows(&self.eval(1.0)),
            }),
            Generator::CorrectionLoop { angles, k } => {
                json!({"kind": "correction_loop", "n": self.n, "angles": angles, "k": k})
            }
            Generator::Segment(p, a, b) => json!({"kind": "segment", "n": self.n, "a": a, "b": b, "path": p.to_json()}),
            Generator::Conjugate { path, t, .. } => {
                json!({"kind": "conjugate", "n": self.n, "matrix": rows(t), "path": path.to_json()})
            }
            Generator::Reparam(p, sigma) => json!({"kind": "reparam", "n": self.n, "sigma": sigma, "path": p.to_json()}),
            Generator::Product(p, q) => json!({"kind": "product", "n": self.n, "paths": [p.to_json(), q.to_json()]}),
            Generator::Exponential { s } => {
                json!({"kind": "exp", "n": self.n, "s": s.iter().map(rows).collect::<Vec<_>>()})
            }
        }
    }
}

fn check_grid(ts: &[f64]) -> Result<()> {
    if ts.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(schema("sample times must lie in [0, 1]"));
    }
    if ts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(schema("sample times must be strictly increasing"));
    }
    if ts[0] != 0.0 || *ts.last().expect("non-empty") != 1.0 {
        return Err(schema("sample times must start at 0 and end at 1"));
    }
    Ok(())
}

fn shear_matrix(n: usize, (i, j): (usize, usize), v: f64) -> Mat {
    let mut m = Mat::identity(2 * n, 2 * n);
    let top_i = i < n;
    let top_j = j < n;
    if top_i != top_j {
        m[(i, j)] += v;
        let (pi, pj) = (j % n + if top_i { 0 } else { n }, i % n + if top_j { 0 } else { n });
        if (pi, pj) != (i, j) {
            m[(pi, pj)] += v;
        }
        return m;
    }
    let mut a = Mat::identity(n, n);
    a[(i % n, j % n)] += v;
    let a_it = a
        .clone()
        .try_inverse()
        .expect("shear block stays invertible")
        .transpose();
    let zero = Mat::zeros(n, n);
    if top_i {
        linalg::from_blocks(&a, &zero, &zero, &a_it)
    } else {
        linalg::from_blocks(&a_it, &zero, &zero, &a)
    }
}

// ---------------------------------------------------------------------------
// JSON path specs

pub(crate) fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| schema(format!("missing field \"{key}\"")))
}

pub(crate) fn as_f64(v: &Value, what: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| schema(format!("{what} must be a number")))
}

pub(crate) fn as_usize(v: &Value, what: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| schema(format!("{what} must be a non-negative integer")))
}

fn as_vec(v: &Value, what: &str) -> Result<Vec<f64>> {
    v.as_array()
        .ok_or_else(|| schema(format!("{what} must be a list of numbers")))?
        .iter()
        .map(|x| as_f64(x, what))
        .collect()
}

pub(crate) fn as_matrix(v: &Value, what: &str) -> Result<Mat> {
    let rows: Vec<Vec<f64>> = v
        .as_array()
        .ok_or_else(|| schema(format!("{what} must be a list of rows")))?
        .iter()
        .map(|r| as_vec(r, what))
        .collect::<Result<_>>()?;
    linalg::from_rows(&rows).ok_or_else(|| schema(format!("{what} has ragged rows")))
}

fn as_symp(v: &Value, what: &str, tol: &Tolerances) -> Result<SympMatrix> {
    SympMatrix::new(as_matrix(v, what)?, tol)
}

fn children(v: &Value, tol: &Tolerances) -> Result<Vec<SympPath>> {
    let arr = field(v, "paths")?
        .as_array()
        .ok_or_else(|| schema("\"paths\" must be a list"))?;
    if arr.is_empty() {
        return Err(schema("\"paths\" must not be empty"));
    }
    arr.iter().map(|c| parse_value(c, tol)).collect()
}

/// Parses a path-spec document.
pub fn parse_spec(doc: &str, tol: &Tolerances) -> Result<SympPath> {
    let v: Value = serde_json::from_str(doc).map_err(|e| schema(format!("invalid JSON: {e}")))?;
    parse_value(&v, tol)
}

pub fn parse_value(v: &Value, tol: &Tolerances) -> Result<SympPath> {
    if !v.is_object() {
        return Err(schema("path spec must be a JSON object"));
    }
    let kind = field(v, "kind")?
        .as_str()
        .ok_or_else(|| schema("\"kind\" must be a string"))?;
    let declared_n = v.get("n").map(|x| as_usize(x, "n")).transpose()?;
    let path = match kind {
        "samples" => {
            let arr = field(v, "samples")?
                .as_array()
                .ok_or_else(|| schema("\"samples\" must be a list"))?;
            let mut ts = Vec::with_capacity(arr.len());
            let mut mats = Vec::with_capacity(arr.len());
            for s in arr {
                ts.push(as_f64(field(s, "t")?, "t")?);
                mats.push(SympMatrix::with_tolerance(as_matrix(field(s, "matrix")?, "matrix")?, tol.path)?);
            }
            SympPath::samples(ts, mats)?
        }
        "rotation_blocks" => {
            let theta = field(v, "theta")?
                .as_array()
                .ok_or_else(|| schema("\"theta\" must be a list of coefficient lists"))?
                .iter()
                .map(|p| as_vec(p, "theta"))
                .collect::<Result<Vec<_>>>()?;
            SympPath::rotation_blocks(theta)?
        }
        "angle_table" => {
            let ts = as_vec(field(v, "t")?, "t")?;
            let angles = field(v, "angles")?
                .as_array()
                .ok_or_else(|| schema("\"angles\" must be a list of rows"))?
                .iter()
                .map(|r| as_vec(r, "angles"))
                .collect::<Result<Vec<_>>>()?;
            SympPath::angle_table(ts, angles)?
        }
        "shear" => {
            let n = declared_n.ok_or_else(|| schema("shear needs \"n\""))?;
            let e = field(v, "entry")?
                .as_array()
                .ok_or_else(|| schema("\"entry\" must be [row, col]"))?;
            if e.len() != 2 {
                return Err(schema("\"entry\" must be [row, col]"));
            }
            let coeff = v.get("coeff").map(|c| as_f64(c, "coeff")).transpose()?.unwrap_or(-1.0);
            SympPath::shear(n, (as_usize(&e[0], "entry")?, as_usize(&e[1], "entry")?), coeff)?
        }
        "constant" => SympPath::constant(as_symp(field(v, "matrix")?, "matrix", tol)?),
        "catenation" => SympPath::catenate_all(children(v, tol)?, tol)?,
        "reverse" => parse_value(field(v, "path")?, tol)?.reverse(),
        "perturb" => {
            let theta = as_f64(field(v, "theta")?, "theta")?;
            if theta < 0.0 {
                return Err(schema("perturbation angle must be non-negative"));
            }
            parse_value(field(v, "path")?, tol)?.perturb_global(theta)
        }
        "direct_sum" => {
            let parts = children(v, tol)?;
            let mut it = parts.into_iter();
            let first = it.next().expect("non-empty");
            it.fold(first, |acc, p| acc.direct_sum(&p))
        }
        "product" => {
            let parts = children(v, tol)?;
            let mut it = parts.into_iter();
            let first = it.next().expect("non-empty");
            it.try_fold(first, |acc, p| acc.product(&p))?
        }
        "segment" => {
            let a = as_f64(field(v, "a")?, "a")?;
            let b = as_f64(field(v, "b")?, "b")?;
            parse_value(field(v, "path")?, tol)?.segment(a, b)?
        }
        "conjugate" => {
            let t = as_symp(field(v, "matrix")?, "matrix", tol)?;
            parse_value(field(v, "path")?, tol)?.conjugate(&t)?
        }
        "reparam" => {
            let sigma = as_vec(field(v, "sigma")?, "sigma")?;
            parse_value(field(v, "path")?, tol)?.reparam(sigma)?
        }
        "exp" => {
            let s = field(v, "s")?
                .as_array()
                .ok_or_else(|| schema("\"s\" must be a list of matrices"))?
                .iter()
                .map(|m| as_matrix(m, "s"))
                .collect::<Result<Vec<_>>>()?;
            SympPath::exponential(s)?
        }
        "polar_radial" => SympPath::polar_radial(&as_symp(field(v, "matrix")?, "matrix", tol)?),
        "geodesic" => {
            let a = as_symp(field(v, "from")?, "from", tol)?;
            let b = as_symp(field(v, "to")?, "to", tol)?;
            SympPath::unitary_geodesic(&a, &b)?
        }
        "correction_loop" => {
            let angles = as_vec(field(v, "angles")?, "angles")?;
            if angles.is_empty() {
                return Err(schema("correction_loop needs angles"));
            }
            let k = field(v, "k")?
                .as_i64()
                .ok_or_else(|| schema("\"k\" must be an integer"))?;
            SympPath::correction_loop(angles, k)
        }
        other => return Err(schema(format!("unknown path kind \"{other}\""))),
    };
    if let Some(n) = declared_n {
        if n != path.n() {
            return Err(Error::DimensionMismatch {
                expected: 2 * n,
                got: 2 * path.n(),
            });
        }
    }
    for t in [0.0, 0.5, 1.0] {
        path.evaluate(t, tol)?;
    }
    Ok(path)
}

// ---------------------------------------------------------------------------
// Tails

/// A path from the normalization matrix of `M` to `M` with zero rotation
/// number, plus the numbers measured while building it.
#[derive(Debug, Clone, Serialize)]
pub struct Tail {
    #[serde(skip)]
    pub path: SympPath,
    /// Normalization angles of `M`.
    pub angles: Vec<f64>,
    /// Rotation number of the radial and geodesic stages.
    pub stage_delta: f64,
    /// Number of full turns removed by the correction loop.
    pub k: i64,
    /// Rotation number of the finished tail.
    pub delta: f64,
    pub constant: bool,
}

const TAIL_SAMPLES: usize = 64;

/// Builds a tail ending at `M` and starting at its normalization matrix.
pub fn build_tail(m: &SympMatrix, cfg: &Config) -> Result<Tail> {
    let (o_norm, angles) = spectral::normalization_matrix(m, &cfg.tol)?;
    if rel_gap(m.matrix(), o_norm.matrix()) <= cfg.tol.symp {
        return Ok(Tail {
            path: SympPath::constant(o_norm),
            angles,
            stage_delta: 0.0,
            k: 0,
            delta: 0.0,
            constant: true,
        });
    }
    let radial = SympPath::polar_radial(m);
    let o_m = radial.end();
    let geo = SympPath::unitary_geodesic(&o_m, &o_norm)?;
    let stages = radial.catenate(&geo, &loose(cfg))?;
    // both stages are short and smooth; refinement still bounds each step
    let coarse = Config {
        refine: RefineOptions {
            initial_samples: cfg.refine.initial_samples.min(TAIL_SAMPLES),
            ..cfg.refine
        },
        ..*cfg
    };
    let stage_delta = rotation::lift_delta(&stages, &coarse)?.delta;
    let k = (stage_delta / 2.0).round();
    if (stage_delta - 2.0 * k).abs() > cfg.tol.int {
        return Err(Error::OddRotation(stage_delta));
    }
    let k = k as i64;
    let forward = if k == 0 {
        stages
    } else {
        SympPath::catenate_all(
            vec![radial, geo, SympPath::correction_loop(angles.clone(), k)],
            &loose(cfg),
        )?
    };
    Ok(Tail {
        path: forward.reverse(),
        angles,
        stage_delta,
        k,
        delta: -(stage_delta - 2.0 * k as f64),
        constant: false,
    })
}

/// Tolerances for gluing internally built pieces whose endpoints agree up to
/// eigen-solver accuracy.
pub(crate) fn loose(cfg: &Config) -> Tolerances {
    Tolerances {
        symp: cfg.tol.symp.max(1e-8),
        ..cfg.tol
    }
}
