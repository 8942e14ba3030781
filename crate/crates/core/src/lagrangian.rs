//! Lagrangian frames, crossing forms, the Robbin–Salamon and
//! Cappell–Lee–Miller indices.

use std::fmt;

use serde::{Serialize, Serializer};
use serde_json::{json, Value};

use crate::config::{Config, Execution, Tolerances};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, Mat, PI};
use crate::par;
use crate::path::{self, SympPath};
use crate::spectral::SympMatrix;

/// Finite-difference step for frame derivatives.
pub const FD_STEP: f64 = 1e-6;
/// Restricted crossing forms with an eigenvalue below this are irregular.
pub const REGULARITY_TOL: f64 = 1e-8;
/// Smallest singular value below which two Lagrangians are taken to meet.
pub const INTERSECTION_TOL: f64 = 1e-7;
const BISECTION_TOL: f64 = 1e-10;
const SCAN_SAMPLES: usize = 512;
/// Bound on `|dσ_min/dt|` assumed by the adaptive scan.
const SCAN_SLOPE: f64 = 64.0;
const SCAN_MIN_WIDTH: f64 = 1.0 / (1u64 << 22) as f64;
const ON_GRID: f64 = 1e-9;

/// Half-integer stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct HalfInteger(pub i64);

impl HalfInteger {
    pub fn from_halves(twice: i64) -> Self {
        Self(twice)
    }

    pub fn twice(self) -> i64 {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl std::ops::Add for HalfInteger {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self(self.0 + o.0)
    }
}

impl fmt::Display for HalfInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl Serialize for HalfInteger {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.to_f64())
    }
}

/// A Lagrangian subspace given by a `2n×n` frame `Z = (X; Y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianFrame {
    n: usize,
    z: Mat,
}

impl Serialize for LagrangianFrame {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl LagrangianFrame {
    pub fn new(z: Mat, tol: &Tolerances) -> Result<Self> {
        if z.nrows() != 2 * z.ncols() || z.ncols() == 0 {
            return Err(Error::DimensionMismatch {
                expected: 2 * z.ncols(),
                got: z.nrows(),
            });
        }
        let n = z.ncols();
        let s = linalg::singular_values_ascending(&z);
        if s[0] <= 1e-9 * s[n - 1] {
            return Err(Error::NotLagrangian(f64::INFINITY));
        }
        let residual = isotropy_residual(&z);
        if residual > tol.symp * s[n - 1].powi(2).max(1.0) {
            return Err(Error::NotLagrangian(residual));
        }
        Ok(Self { n, z })
    }

    pub fn from_xy(x: &Mat, y: &Mat, tol: &Tolerances) -> Result<Self> {
        if x.shape() != y.shape() {
            return Err(Error::DimensionMismatch {
                expected: x.nrows(),
                got: y.nrows(),
            });
        }
        let mut z = Mat::zeros(2 * x.nrows(), x.ncols());
        z.view_mut((0, 0), x.shape()).copy_from(x);
        z.view_mut((x.nrows(), 0), y.shape()).copy_from(y);
        Self::new(z, tol)
    }

    /// `ℝⁿ × {0}`.
    pub fn horizontal(n: usize) -> Self {
        let mut z = Mat::zeros(2 * n, n);
        z.view_mut((0, 0), (n, n)).fill_with_identity();
        Self { n, z }
    }

    /// `{0} × ℝⁿ`.
    pub fn vertical(n: usize) -> Self {
        let mut z = Mat::zeros(2 * n, n);
        z.view_mut((n, 0), (n, n)).fill_with_identity();
        Self { n, z }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn z(&self) -> &Mat {
        &self.z
    }

    pub fn x(&self) -> Mat {
        self.z.rows(0, self.n).into_owned()
    }

    pub fn y(&self) -> Mat {
        self.z.rows(self.n, self.n).into_owned()
    }

    /// Orthonormal frame of the same subspace.
    pub fn orthonormal(&self) -> Mat {
        lowdin(&self.z)
    }

    pub fn to_json(&self) -> Value {
        json!({"kind": "constant", "n": self.n, "x": linalg::to_rows(&self.x()), "y": linalg::to_rows(&self.y())})
    }
}

fn isotropy_residual(z: &Mat) -> f64 {
    let n = z.ncols();
    let x = z.rows(0, n);
    let y = z.rows(n, n);
    let s = x.transpose() * y;
    linalg::max_abs(&(&s - s.transpose()))
}

/// Symmetric orthonormalization `Z (ZᵀZ)^{-1/2}`.
fn lowdin(z: &Mat) -> Mat {
    z * linalg::sym_fn(&(z.transpose() * z), |x| 1.0 / x.sqrt())
}

/// Unitary `X + iY` of an orthonormal frame.
fn unitary_of_frame(z: &Mat) -> CMat {
    let n = z.ncols();
    CMat::from_fn(n, n, |i, j| num_complex::Complex64::new(z[(i, j)], z[(n + i, j)]))
}

/// A path of Lagrangian subspaces on `[0, 1]`.
#[derive(Debug, Clone)]
pub enum FramePath {
    Constant(LagrangianFrame),
    /// `t ↦ Φ(t)·L`.
    Image { path: SympPath, base: LagrangianFrame },
    /// Piecewise unitary geodesics through sampled frames.
    Samples { ts: Vec<f64>, legs: Vec<SympPath> },
}

impl FramePath {
    pub fn image(path: SympPath, base: LagrangianFrame) -> Result<Self> {
        if path.n() != base.n() {
            return Err(Error::DimensionMismatch {
                expected: 2 * path.n(),
                got: 2 * base.n(),
            });
        }
        Ok(Self::Image { path, base })
    }

    pub fn samples(ts: Vec<f64>, frames: Vec<LagrangianFrame>) -> Result<Self> {
        if ts.len() < 2 || ts.len() != frames.len() {
            return Err(path::schema("frame samples need matching t and frames (at least two)"));
        }
        if (ts[0]).abs() > 1e-12 || (ts[ts.len() - 1] - 1.0).abs() > 1e-12 || ts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(path::schema("frame sample times must increase from 0 to 1"));
        }
        let n = frames[0].n();
        if frames.iter().any(|f| f.n() != n) {
            return Err(path::schema("frame samples must share n"));
        }
        let mut zs: Vec<Mat> = frames.iter().map(LagrangianFrame::orthonormal).collect();
        // Align consecutive frames so each leg is the short way round.
        for k in 1..zs.len() {
            let m = zs[k].transpose() * &zs[k - 1];
            let svd = m.svd(true, true);
            let r = svd.u.expect("u") * svd.v_t.expect("v_t");
            zs[k] = &zs[k] * r;
        }
        let legs = zs
            .windows(2)
            .map(|w| {
                let a = SympMatrix::trusted(linalg::orthosymp_of(&unitary_of_frame(&w[0])));
                let b = SympMatrix::trusted(linalg::orthosymp_of(&unitary_of_frame(&w[1])));
                SympPath::unitary_geodesic(&a, &b)
            })
            .collect::<Result<_>>()?;
        Ok(Self::Samples { ts, legs })
    }

    pub fn n(&self) -> usize {
        match self {
            FramePath::Constant(f) => f.n(),
            FramePath::Image { base, .. } => base.n(),
            FramePath::Samples { legs, .. } => legs[0].n(),
        }
    }

    /// Orthonormal frame at `t`, clamped to `[0, 1]`.
    pub fn frame(&self, t: f64) -> Mat {
        let t = t.clamp(0.0, 1.0);
        match self {
            FramePath::Constant(f) => f.orthonormal(),
            FramePath::Image { path, base } => lowdin(&(path.eval(t) * base.z())),
            FramePath::Samples { ts, legs } => {
                let k = ts.partition_point(|&x| x <= t).clamp(1, ts.len() - 1);
                let s = ((t - ts[k - 1]) / (ts[k] - ts[k - 1])).clamp(0.0, 1.0);
                let n = legs[0].n();
                legs[k - 1].eval(s).columns(0, n).into_owned()
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, FramePath::Constant(_))
    }

    pub fn to_json(&self) -> Value {
        match self {
            FramePath::Constant(f) => f.to_json(),
            FramePath::Image { path, base } => json!({"kind": "image", "path": path.to_json(), "base": base.to_json()}),
            FramePath::Samples { ts, legs } => {
                let n = legs[0].n();
                let mut frames: Vec<Mat> = legs.iter().map(|l| l.eval(0.0).columns(0, n).into_owned()).collect();
                frames.push(legs[legs.len() - 1].eval(1.0).columns(0, n).into_owned());
                let samples: Vec<Value> = ts
                    .iter()
                    .zip(&frames)
                    .map(|(t, z)| {
                        json!({"t": t, "x": linalg::to_rows(&z.rows(0, n).into_owned()),
                               "y": linalg::to_rows(&z.rows(n, n).into_owned())})
                    })
                    .collect();
                json!({"kind": "samples", "samples": samples})
            }
        }
    }
}

/// Parses a frame-path spec (`constant`, `horizontal`, `vertical`,
/// `image`, `samples`).
pub fn parse_frame_value(v: &Value, tol: &Tolerances) -> Result<FramePath> {
    let kind = path::field(v, "kind")?
        .as_str()
        .ok_or_else(|| path::schema("frame \"kind\" must be a string"))?;
    match kind {
        "horizontal" | "vertical" => {
            let n = path::as_usize(path::field(v, "n")?, "n")?;
            if n == 0 {
                return Err(path::schema("frame needs n > 0"));
            }
            Ok(FramePath::Constant(if kind == "horizontal" {
                LagrangianFrame::horizontal(n)
            } else {
                LagrangianFrame::vertical(n)
            }))
        }
        "constant" => Ok(FramePath::Constant(parse_fixed(v, tol)?)),
        "image" => {
            let p = path::parse_value(path::field(v, "path")?, tol)?;
            let base = match v.get("base") {
                None => LagrangianFrame::horizontal(p.n()),
                Some(b) => match parse_frame_value(b, tol)? {
                    FramePath::Constant(f) => f,
                    _ => return Err(path::schema("\"base\" must be a fixed frame")),
                },
            };
            FramePath::image(p, base)
        }
        "samples" => {
            let arr = path::field(v, "samples")?
                .as_array()
                .ok_or_else(|| path::schema("\"samples\" must be a list"))?;
            let mut ts = Vec::with_capacity(arr.len());
            let mut frames = Vec::with_capacity(arr.len());
            for s in arr {
                ts.push(path::as_f64(path::field(s, "t")?, "t")?);
                frames.push(parse_fixed(s, tol)?);
            }
            FramePath::samples(ts, frames)
        }
        other => Err(path::schema(format!("unknown frame kind \"{other}\""))),
    }
}

fn parse_fixed(v: &Value, tol: &Tolerances) -> Result<LagrangianFrame> {
    let x = path::as_matrix(path::field(v, "x")?, "x")?;
    let y = path::as_matrix(path::field(v, "y")?, "y")?;
    LagrangianFrame::from_xy(&x, &y, tol)
}

/// A pair `(L₁(t), L₂(t))` read from `{"l1": …, "l2": …}`.
pub fn parse_pair(v: &Value, tol: &Tolerances) -> Result<(FramePath, FramePath)> {
    let l1 = parse_frame_value(path::field(v, "l1")?, tol)?;
    let l2 = parse_frame_value(path::field(v, "l2")?, tol)?;
    if l1.n() != l2.n() {
        return Err(Error::DimensionMismatch {
            expected: 2 * l1.n(),
            got: 2 * l2.n(),
        });
    }
    Ok((l1, l2))
}

// ---------------------------------------------------------------------------
// Crossings

trait Frames: Sync {
    fn frame(&self, t: f64) -> Mat;
    fn is_constant(&self) -> bool;
}

impl Frames for FramePath {
    fn frame(&self, t: f64) -> Mat {
        FramePath::frame(self, t)
    }
    fn is_constant(&self) -> bool {
        FramePath::is_constant(self)
    }
}

/// Right column of one 2×2 block of a diagonal path, as a frame in `ℝ²`.
struct BlockImage<'a> {
    path: &'a SympPath,
    block: usize,
}

impl Frames for BlockImage<'_> {
    fn frame(&self, t: f64) -> Mat {
        let b = linalg::sub_block(&self.path.eval(t.clamp(0.0, 1.0)), self.block);
        lowdin(&b.columns(1, 1).into_owned())
    }
    fn is_constant(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Crossing {
    pub t: f64,
    pub intersection_dim: usize,
    pub signature: i64,
    pub regular: bool,
    /// Eigenvalues of the restricted form on unit vectors.
    pub form_eigenvalues: Vec<f64>,
    /// Signature recomputed with a ten times finer difference step.
    pub signature_fine: i64,
}

fn test_matrix(z1: &Mat, z2: &Mat) -> Mat {
    let n = z1.ncols();
    z2.transpose() * linalg::j0(n) * z1
}

fn probe<A: Frames + ?Sized, B: Frames + ?Sized>(l1: &A, l2: &B, t: f64) -> (f64, f64) {
    let m = test_matrix(&l1.frame(t), &l2.frame(t));
    let s = linalg::singular_values_ascending(&m);
    (m.determinant(), s[0])
}

/// Frame derivative: central in the interior, second-order one-sided near
/// the ends.
fn derivative<A: Frames + ?Sized>(l: &A, t: f64, h: f64) -> Mat {
    if t - h < 0.0 {
        (l.frame(t) * -3.0 + l.frame(t + h) * 4.0 - l.frame(t + 2.0 * h)) / (2.0 * h)
    } else if t + h > 1.0 {
        (l.frame(t) * 3.0 - l.frame(t - h) * 4.0 + l.frame(t - 2.0 * h)) / (2.0 * h)
    } else {
        (l.frame(t + h) - l.frame(t - h)) / (2.0 * h)
    }
}

/// `sym(XᵀẎ − YᵀẊ)` for a frame and its derivative.
fn frame_form(z: &Mat, dz: &Mat) -> Mat {
    let n = z.ncols();
    let x = z.rows(0, n);
    let y = z.rows(n, n);
    let dx = dz.rows(0, n);
    let dy = dz.rows(n, n);
    let s = x.transpose() * dy - y.transpose() * dx;
    (&s + s.transpose()) * 0.5
}

/// Basis `(K₁; K₂)` of `{(u₁, u₂) : Z₁u₁ = Z₂u₂}`, scaled so the common
/// vectors `Z₁u₁` are orthonormal.
fn intersection_basis(z1: &Mat, z2: &Mat, thr: f64) -> (Mat, Mat) {
    let n = z1.ncols();
    let mut a = Mat::zeros(2 * n, 2 * n);
    a.view_mut((0, 0), (2 * n, n)).copy_from(z1);
    a.view_mut((0, n), (2 * n, n)).copy_from(&(-z2));
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let cols: Vec<usize> = (0..2 * n).filter(|&k| svd.singular_values[k] <= thr).collect();
    let s2 = std::f64::consts::SQRT_2;
    let k1 = Mat::from_fn(n, cols.len(), |i, j| v_t[(cols[j], i)] * s2);
    let k2 = Mat::from_fn(n, cols.len(), |i, j| v_t[(cols[j], n + i)] * s2);
    (k1, k2)
}

fn restricted_form<A: Frames + ?Sized, B: Frames + ?Sized>(l1: &A, l2: &B, t: f64, h: f64, k1: &Mat, k2: &Mat) -> Mat {
    let g1 = frame_form(&l1.frame(t), &derivative(l1, t, h));
    let mut g = k1.transpose() * g1 * k1;
    if !l2.is_constant() {
        let g2 = frame_form(&l2.frame(t), &derivative(l2, t, h));
        g -= k2.transpose() * g2 * k2;
    }
    (&g + g.transpose()) * 0.5
}

fn signature_of(g: &Mat) -> (i64, Vec<f64>) {
    let mut ev: Vec<f64> = nalgebra::SymmetricEigen::new(g.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    let pos = ev.iter().filter(|&&e| e > REGULARITY_TOL).count() as i64;
    let neg = ev.iter().filter(|&&e| e < -REGULARITY_TOL).count() as i64;
    (pos - neg, ev)
}

fn crossing_at<A: Frames + ?Sized, B: Frames + ?Sized>(l1: &A, l2: &B, t: f64) -> Option<Crossing> {
    let z1 = l1.frame(t);
    let z2 = l2.frame(t);
    let (k1, k2) = intersection_basis(&z1, &z2, 1e-6);
    if k1.ncols() == 0 {
        return None;
    }
    let g = restricted_form(l1, l2, t, FD_STEP, &k1, &k2);
    let (signature, ev) = signature_of(&g);
    let regular = ev.iter().all(|e| e.abs() >= REGULARITY_TOL);
    let fine = restricted_form(l1, l2, t, FD_STEP / 10.0, &k1, &k2);
    let (signature_fine, _) = signature_of(&fine);
    Some(Crossing {
        t,
        intersection_dim: k1.ncols(),
        signature,
        regular,
        form_eigenvalues: ev,
        signature_fine,
    })
}

fn bisect_det<A: Frames + ?Sized, B: Frames + ?Sized>(l1: &A, l2: &B, mut a: f64, mut b: f64, da: f64) -> f64 {
    let sa = da.signum();
    while b - a > BISECTION_TOL {
        let m = 0.5 * (a + b);
        let (dm, _) = probe(l1, l2, m);
        if dm == 0.0 {
            return m;
        }
        if dm.signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn golden_min<A: Frames + ?Sized, B: Frames + ?Sized>(l1: &A, l2: &B, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let f = |t: f64| probe(l1, l2, t).1;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > BISECTION_TOL {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let t = 0.5 * (a + b);
    (t, f(t))
}

fn scan<A: Frames + ?Sized, B: Frames + ?Sized>(l1: &A, l2: &B, exec: Execution) -> Result<Vec<Crossing>> {
    let mut ts: Vec<f64> = (0..=SCAN_SAMPLES).map(|k| k as f64 / SCAN_SAMPLES as f64).collect();
    let mut vals = par::map(exec, &ts, |&t| probe(l1, l2, t));
    // Split intervals where σ_min could dip to zero between the samples, so
    // that close crossings end up in separate intervals.
    loop {
        let mids: Vec<f64> = (0..ts.len() - 1)
            .filter(|&k| {
                let w = ts[k + 1] - ts[k];
                w > SCAN_MIN_WIDTH && vals[k].1 + vals[k + 1].1 < SCAN_SLOPE * w
            })
            .map(|k| 0.5 * (ts[k] + ts[k + 1]))
            .collect();
        if mids.is_empty() {
            break;
        }
        let new_vals = par::map(exec, &mids, |&t| probe(l1, l2, t));
        let mut merged: Vec<(f64, (f64, f64))> = ts.into_iter().zip(vals).chain(mids.into_iter().zip(new_vals)).collect();
        merged.sort_by(|a, b| a.0.total_cmp(&b.0));
        (ts, vals) = merged.into_iter().unzip();
    }
    let last = ts.len() - 1;
    let idx: Vec<usize> = (0..=last).collect();
    let found: Vec<Vec<f64>> = par::map(exec, &idx, |&k| {
        let mut out = Vec::new();
        let (dk, sk) = vals[k];
        if (k == 0 || k == last) && sk < INTERSECTION_TOL {
            out.push(ts[k]);
        }
        if k < last {
            let (dn, sn) = vals[k + 1];
            if sk >= INTERSECTION_TOL && sn >= INTERSECTION_TOL && dk.signum() != dn.signum() {
                out.push(bisect_det(l1, l2, ts[k], ts[k + 1], dk));
            }
        }
        let left = if k > 0 { vals[k - 1].1 } else { f64::INFINITY };
        let right = if k < last { vals[k + 1].1 } else { f64::INFINITY };
        if sk <= left && sk <= right {
            let a = ts[k.saturating_sub(1)];
            let b = ts[(k + 1).min(last)];
            let (t, s) = golden_min(l1, l2, a, b);
            if s < INTERSECTION_TOL {
                out.push(t);
            }
        }
        out
    });
    let mut times: Vec<f64> = found.into_iter().flatten().collect();
    times.sort_by(f64::total_cmp);
    let endpoint = [vals[0].1 < INTERSECTION_TOL, vals[last].1 < INTERSECTION_TOL];
    let mut merged: Vec<f64> = Vec::new();
    for t in times {
        let t = if endpoint[0] && t < INTERSECTION_TOL {
            0.0
        } else if endpoint[1] && t > 1.0 - INTERSECTION_TOL {
            1.0
        } else {
            t
        };
        match merged.last() {
            Some(&p) if (t - p).abs() <= INTERSECTION_TOL => {
                // keep exact endpoints
                if t == 0.0 || t == 1.0 {
                    *merged.last_mut().expect("nonempty") = t;
                }
            }
            _ => merged.push(t),
        }
    }
    let crossings: Vec<Option<Crossing>> = par::map(exec, &merged, |&t| crossing_at(l1, l2, t));
    let crossings: Vec<Crossing> = crossings.into_iter().flatten().collect();
    for c in &crossings {
        if !c.regular {
            return Err(Error::IrregularCrossing {
                t: c.t,
                reason: format!("restricted form eigenvalues {:?}", c.form_eigenvalues),
            });
        }
        if c.signature != c.signature_fine {
            return Err(Error::IrregularCrossing {
                t: c.t,
                reason: format!(
                    "signature {} changes to {} under step refinement",
                    c.signature, c.signature_fine
                ),
            });
        }
    }
    Ok(crossings)
}

fn check_pair(l1: &FramePath, l2: &FramePath) -> Result<()> {
    if l1.n() != l2.n() {
        return Err(Error::DimensionMismatch {
            expected: 2 * l1.n(),
            got: 2 * l2.n(),
        });
    }
    Ok(())
}

/// Crossings of `L₁(t)` with the fixed Lagrangian `L₂`.
pub fn crossings(l1: &FramePath, l2: &LagrangianFrame, cfg: &Config) -> Result<Vec<Crossing>> {
    let l2 = FramePath::Constant(l2.clone());
    check_pair(l1, &l2)?;
    scan(l1, &l2, cfg.execution)
}

/// Crossings of a pair with the relative form `Γ(L₁, L₂(t)) − Γ(L₂, L₁(t))`.
pub fn relative_crossings(l1: &FramePath, l2: &FramePath, cfg: &Config) -> Result<Vec<Crossing>> {
    check_pair(l1, l2)?;
    scan(l1, l2, cfg.execution)
}

fn rs_sum(cs: &[Crossing]) -> HalfInteger {
    HalfInteger(
        cs.iter()
            .map(|c| if c.t == 0.0 || c.t == 1.0 { c.signature } else { 2 * c.signature })
            .sum(),
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct RsReport {
    pub value: HalfInteger,
    pub crossings: Vec<Crossing>,
}

pub fn rs_index(l1: &FramePath, l2: &LagrangianFrame, cfg: &Config) -> Result<RsReport> {
    let cs = crossings(l1, l2, cfg)?;
    Ok(RsReport {
        value: rs_sum(&cs),
        crossings: cs,
    })
}

pub fn relative_rs(l1: &FramePath, l2: &FramePath, cfg: &Config) -> Result<RsReport> {
    let cs = relative_crossings(l1, l2, cfg)?;
    Ok(RsReport {
        value: rs_sum(&cs),
        crossings: cs,
    })
}

/// `μ_RS(Φ)` with `L = {0} × ℝⁿ`.
pub fn rs_index_symp(p: &SympPath, cfg: &Config) -> Result<RsReport> {
    let v = LagrangianFrame::vertical(p.n());
    rs_index(&FramePath::image(p.clone(), v.clone())?, &v, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    Start,
    End,
}

impl Endpoint {
    pub fn t(self) -> f64 {
        match self {
            Endpoint::Start => 0.0,
            Endpoint::End => 1.0,
        }
    }
}

fn block_nondegenerate(f: &BlockImage<'_>, t: f64) -> bool {
    let v = FramePath::Constant(LagrangianFrame::vertical(1));
    crossing_at(f, &v, t).is_some_and(|c| c.regular)
}

/// Number of 2×2 paths whose crossing form against `{0}×ℝ` is
/// nondegenerate at the endpoint.
pub fn s_count(blocks: &[SympPath], at: Endpoint) -> Result<usize> {
    let mut count = 0;
    for (j, b) in blocks.iter().enumerate() {
        if b.n() != 1 {
            return Err(path::schema(format!("block {j} is not 2x2")));
        }
        if block_nondegenerate(&BlockImage { path: b, block: 0 }, at.t()) {
            count += 1;
        }
    }
    Ok(count)
}

/// [`s_count`] for the blocks of a diagonal path.
pub fn s_count_diagonal(p: &SympPath, at: Endpoint, tol: &Tolerances) -> Result<usize> {
    let n = p.n();
    for k in 0..=8 {
        let m = p.eval(k as f64 / 8.0);
        let mut off = m.clone();
        for b in 0..n {
            for (i, j) in [(b, b), (b, n + b), (n + b, b), (n + b, n + b)] {
                off[(i, j)] = 0.0;
            }
        }
        let gap = linalg::max_abs(&off);
        if gap > tol.symp.max(1e-12) * linalg::max_abs(&m).max(1.0) {
            return Err(path::schema(format!("path is not block diagonal (off-block entry {gap:.3e})")));
        }
    }
    Ok((0..n)
        .filter(|&block| block_nondegenerate(&BlockImage { path: p, block }, at.t()))
        .count())
}

// ---------------------------------------------------------------------------
// Orthogonal reduction and CLM counting

/// Angle functions of the orthogonal block path with the same image of
/// `ℝⁿ × {0}`.
#[derive(Debug, Clone, Serialize)]
pub struct OspReduction {
    pub ts: Vec<f64>,
    pub angles: Vec<Vec<f64>>,
    #[serde(skip)]
    pub path: SympPath,
}

impl OspReduction {
    pub fn to_csv(&self) -> String {
        let n = self.angles.first().map_or(0, Vec::len);
        let mut out = String::from("t");
        for j in 1..=n {
            out.push_str(&format!(",theta{j}"));
        }
        out.push('\n');
        for (t, row) in self.ts.iter().zip(&self.angles) {
            out.push_str(&format!("{t:.12}"));
            for a in row {
                out.push_str(&format!(",{a:.12}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Eigenphases of `W = UUᵀ` (each twice an angle), unsorted.
fn double_phases(z: &Mat) -> Vec<f64> {
    let u = unitary_of_frame(z);
    let w = &u * u.transpose();
    linalg::unitary_eigen(&w).1
}

/// Greedy nearest matching of new phases to the running lifts.
fn match_phases(prev: &[f64], new: &[f64]) -> (Vec<f64>, f64) {
    let n = prev.len();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for (i, &p) in prev.iter().enumerate() {
        for (j, &q) in new.iter().enumerate() {
            pairs.push((linalg::wrap_pi(q - p).abs(), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = vec![f64::NAN; n];
    let mut used = vec![false; n];
    let mut worst = 0.0f64;
    for (d, i, j) in pairs {
        if out[i].is_nan() && !used[j] {
            out[i] = prev[i] + linalg::wrap_pi(new[j] - prev[i]);
            used[j] = true;
            worst = worst.max(d);
        }
    }
    (out, worst)
}

const MAX_PHASE_STEP: f64 = PI / 4.0;
const TRACK_DEPTH: u32 = 30;

fn track<A: Frames + ?Sized>(l: &A, exec: Execution) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n0 = 256;
    let grid: Vec<f64> = (0..=n0).map(|k| k as f64 / n0 as f64).collect();
    let phases = par::map(exec, &grid, |&t| double_phases(&l.frame(t)));
    let mut first = phases[0].clone();
    first.sort_by(f64::total_cmp);
    let mut ts = vec![0.0];
    let mut lifts = vec![first];
    for k in 0..n0 {
        // Depth-first refinement of [grid[k], grid[k+1]].
        let mut stack = vec![(grid[k + 1], phases[k + 1].clone(), 0u32)];
        while let Some((t, ph, depth)) = stack.pop() {
            let t0 = *ts.last().expect("nonempty");
            let prev = lifts.last().expect("nonempty");
            let (next, worst) = match_phases(prev, &ph);
            if worst <= MAX_PHASE_STEP {
                ts.push(t);
                lifts.push(next);
                continue;
            }
            if depth >= TRACK_DEPTH {
                return Err(Error::BranchTrackingFailure(t0));
            }
            let mid = 0.5 * (t0 + t);
            stack.push((t, ph, depth + 1));
            stack.push((mid, double_phases(&l.frame(mid)), depth + 1));
        }
    }
    let angles = lifts.into_iter().map(|v| v.into_iter().map(|x| x / 2.0).collect()).collect();
    Ok((ts, angles))
}

fn reduction_of<A: Frames + ?Sized>(l: &A, exec: Execution) -> Result<OspReduction> {
    let (ts, angles) = track(l, exec)?;
    let path = SympPath::angle_table(ts.clone(), angles.clone())?;
    Ok(OspReduction { ts, angles, path })
}

/// Orthogonal block path `O` with `O(t)L₁ = Φ(t)L₁`, `L₁ = ℝⁿ × {0}`.
pub fn sp_to_osp(p: &SympPath, cfg: &Config) -> Result<OspReduction> {
    let l = FramePath::image(p.clone(), LagrangianFrame::horizontal(p.n()))?;
    reduction_of(&l, cfg.execution)
}

/// `L₂(t)` seen from a frame in which `L₁(t)` is `ℝⁿ × {0}`.
struct Relative<'a> {
    l1: &'a FramePath,
    l2: &'a FramePath,
}

impl Frames for Relative<'_> {
    fn frame(&self, t: f64) -> Mat {
        let o = linalg::orthosymp_of(&unitary_of_frame(&self.l1.frame(t)));
        o.transpose() * self.l2.frame(t)
    }
    fn is_constant(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClmCrossing {
    pub t: f64,
    pub block: usize,
    pub anticlockwise: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClmReport {
    pub value: i64,
    pub d: usize,
    pub p: usize,
    pub q: usize,
    pub theta: f64,
    pub crossings: Vec<ClmCrossing>,
    pub reduction: OspReduction,
}

/// Signed grid crossings of `θ(t) − θ_p` between two samples.
fn grid_steps(a: f64, b: f64) -> i64 {
    (b / PI).floor() as i64 - (a / PI).floor() as i64
}

fn count_clm(red: &OspReduction, theta: f64) -> Option<(usize, usize, usize, Vec<ClmCrossing>)> {
    let n = red.angles[0].len();
    let start = &red.angles[0];
    let end = &red.angles[red.angles.len() - 1];
    let dist = |x: f64| (x - PI * (x / PI).round()).abs();
    let d = start.iter().filter(|&&a| dist(a) <= ON_GRID).count();
    // the perturbed endpoints must be off the grid and the shift smaller
    // than every positive endpoint distance
    for &a in start.iter().chain(end) {
        let da = dist(a);
        if da > ON_GRID && theta >= da / 2.0 {
            return None;
        }
    }
    let mut p = 0;
    let mut q = 0;
    let mut crossings = Vec::new();
    // first tail: on-grid directions come down from π/4 above
    for j in 0..n {
        if dist(start[j]) <= ON_GRID {
            q += 1;
            crossings.push(ClmCrossing {
                t: 0.0,
                block: j,
                anticlockwise: false,
            });
        }
    }
    for k in 0..red.ts.len() - 1 {
        for j in 0..n {
            let a = red.angles[k][j] - theta;
            let b = red.angles[k + 1][j] - theta;
            // a sample sitting on the grid means a non-transversal touch
            if dist(b) < 1e-13 {
                return None;
            }
            let s = grid_steps(a, b);
            if s.abs() > 1 {
                return None;
            }
            if s != 0 {
                let t = red.ts[k] + (red.ts[k + 1] - red.ts[k]) * 0.5;
                if s > 0 {
                    p += 1;
                } else {
                    q += 1;
                }
                crossings.push(ClmCrossing {
                    t,
                    block: j,
                    anticlockwise: s > 0,
                });
            }
        }
    }
    // the second tail turns on-grid end directions by −π/4 and never meets
    // the grid after the shift
    Some((d, p, q, crossings))
}

fn clm_of_reduction(red: OspReduction) -> Result<ClmReport> {
    let mut theta = 1e-3;
    for _ in 0..40 {
        if let Some((d, p, q, crossings)) = count_clm(&red, theta) {
            return Ok(ClmReport {
                value: d as i64 + p as i64 - q as i64,
                d,
                p,
                q,
                theta,
                crossings,
                reduction: red,
            });
        }
        theta /= 2.0;
    }
    Err(Error::NonTransversalAfterPerturbation)
}

/// `μ_CLM` of the pair `(ℝⁿ × {0}, Φ(t)·ℝⁿ × {0})`.
pub fn clm_index(p: &SympPath, cfg: &Config) -> Result<ClmReport> {
    clm_of_reduction(sp_to_osp(p, cfg)?)
}

/// `μ_CLM` of a general pair, after moving `L₁(t)` to `ℝⁿ × {0}`.
pub fn clm_index_pair(l1: &FramePath, l2: &FramePath, cfg: &Config) -> Result<ClmReport> {
    check_pair(l1, l2)?;
    let rel = Relative { l1, l2 };
    clm_of_reduction(reduction_of(&rel, cfg.execution)?)
}

/// Distance of an angle vector to the cycle `{kπ}` and the smallest
/// singular value of the `Y` block of the orthonormal frame of `Φ(t)L₁`.
pub fn cycle_distances(p: &SympPath, red: &OspReduction, t: f64) -> (f64, f64) {
    let k = red.ts.partition_point(|&x| x < t).min(red.ts.len() - 1);
    let dist = red.angles[k]
        .iter()
        .map(|&a| (a - PI * (a / PI).round()).abs())
        .fold(f64::INFINITY, f64::min);
    let n = p.n();
    let z = lowdin(&p.eval(red.ts[k]).columns(0, n).into_owned());
    let s = linalg::singular_values_ascending(&z.rows(n, n).into_owned());
    (dist, s[0])
}
