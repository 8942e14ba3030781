//! Spectral classification of a single symplectic matrix.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::config::{Faults, Tolerances};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, Mat, PI, TAU};

/// A real `2n × 2n` matrix that passed the symplecticity check.
#[derive(Debug, Clone, PartialEq)]
pub struct SympMatrix {
    n: usize,
    m: Mat,
    residual: f64,
}

impl Serialize for SympMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        linalg::to_rows(&self.m).serialize(s)
    }
}

impl SympMatrix {
    /// Validates `m` (the `check_symplectic` operation).
    pub fn new(m: Mat, tol: &Tolerances) -> Result<Self> {
        Self::with_tolerance(m, tol.symp)
    }

    pub fn with_tolerance(m: Mat, tol: f64) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() == 0 || !m.nrows().is_multiple_of(2) {
            return Err(Error::OddDimension(m.nrows()));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numerical("non-finite matrix entry".into()));
        }
        let residual = linalg::symplectic_residual(&m);
        if residual > tol {
            return Err(Error::NotSymplectic { residual, tol });
        }
        let scale = linalg::max_abs(&m).max(1.0).powi(m.nrows() as i32);
        let det = m.clone().lu().determinant();
        if (det - 1.0).abs() > tol.max(1e-12) * 1e3 * scale {
            return Err(Error::NotSymplectic {
                residual: (det - 1.0).abs(),
                tol,
            });
        }
        Ok(Self {
            n: m.nrows() / 2,
            m,
            residual,
        })
    }

    /// Wraps a matrix known to be symplectic by construction.
    pub(crate) fn trusted(m: Mat) -> Self {
        let residual = linalg::symplectic_residual(&m);
        Self {
            n: m.nrows() / 2,
            m,
            residual,
        }
    }

    pub fn from_rows(rows: &[Vec<f64>], tol: &Tolerances) -> Result<Self> {
        let m = linalg::from_rows(rows).ok_or_else(|| Error::Schema("ragged matrix rows".into()))?;
        Self::new(m, tol)
    }

    pub fn identity(n: usize) -> Self {
        Self::trusted(Mat::identity(2 * n, 2 * n))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &Mat {
        &self.m
    }

    pub fn into_matrix(self) -> Mat {
        self.m
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        linalg::to_rows(&self.m)
    }
}

pub fn check_symplectic(m: &Mat, tol: &Tolerances) -> Result<SympMatrix> {
    SympMatrix::new(m.clone(), tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterKind {
    PlusOne,
    MinusOne,
    /// On the unit circle, not real.
    Elliptic,
    PositiveReal,
    NegativeReal,
    /// Off the circle and not real.
    Complex,
}

#[derive(Debug, Clone, Serialize)]
pub struct Cluster {
    pub value: Complex64,
    pub multiplicity: usize,
    pub kind: ClusterKind,
    pub on_circle: bool,
    /// Number of positive directions of the Krein form on the eigenspace;
    /// only meaningful for elliptic clusters.
    pub m_plus: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralData {
    pub n: usize,
    pub eigenvalues: Vec<Complex64>,
    pub clusters: Vec<Cluster>,
    /// `(i, j)` with cluster `j` the partner `λ⁻¹` of cluster `i`.
    pub pairs: Vec<(usize, usize)>,
    pub m0: usize,
    pub rho: Complex64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FirstKindSpectrum {
    pub entries: Vec<Complex64>,
    pub angles: Vec<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Strict,
    Robust,
}

/// Eigenvalues this close to `±1` are merged into the `±1` cluster. Jordan
/// blocks at `±1` split by roughly the square root of the rounding error, far
/// beyond the ordinary clustering tolerance.
const PM_ONE_SNAP: f64 = 1e-6;

fn ill(c: Complex64, reason: impl Into<String>) -> Error {
    Error::IllConditioned {
        re: c.re,
        im: c.im,
        reason: reason.into(),
    }
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0)
}

/// Single-linkage clustering of the raw eigenvalues.
fn cluster_eigenvalues(ev: &[Complex64], tol: f64) -> Vec<Vec<Complex64>> {
    let k = ev.len();
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..k {
        for j in i + 1..k {
            let near_same_unit = [1.0, -1.0].iter().any(|&u| {
                (ev[i] - u).norm() <= PM_ONE_SNAP && (ev[j] - u).norm() <= PM_ONE_SNAP
            });
            if near_same_unit || close(ev[i], ev[j], tol) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b] = a;
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<Complex64>)> = Vec::new();
    for i in 0..k {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|(root, _)| *root == r) {
            Some((_, g)) => g.push(ev[i]),
            None => groups.push((r, vec![ev[i]])),
        }
    }
    let mut out: Vec<Vec<Complex64>> = groups.into_iter().map(|(_, g)| g).collect();
    out.sort_by(|a, b| {
        let ca = centroid(a);
        let cb = centroid(b);
        ca.re.total_cmp(&cb.re).then(ca.im.total_cmp(&cb.im))
    });
    out
}

fn centroid(g: &[Complex64]) -> Complex64 {
    g.iter().sum::<Complex64>() / g.len() as f64
}

/// Krein signature count on the invariant subspace belonging to `members`.
fn krein_positive(m: &Mat, members: &[Complex64], mode: Mode) -> Result<usize> {
    let dim = m.nrows();
    let mult = members.len();
    let scale = linalg::max_abs(m).max(1.0);
    let mc = linalg::to_complex(m) / Complex64::new(scale, 0.0);
    let id = CMat::identity(dim, dim);
    let mut prod = id.clone();
    for &lam in members {
        prod = &prod * (&mc - &id * (lam / scale));
    }
    let (s, v) = linalg::svd_ascending(&prod);
    let c = centroid(members);
    if mode == Mode::Strict && mult < dim {
        let ratio = s[mult - 1] / s[mult].max(f64::MIN_POSITIVE);
        if ratio >= 1e-9 {
            return Err(ill(
                c,
                format!("eigenspace rank gap ambiguous (ratio {ratio:.2e})"),
            ));
        }
    }
    let basis = v.columns(0, mult).into_owned();
    let n = dim / 2;
    let ij = linalg::to_complex(&linalg::j0(n)) * Complex64::new(0.0, 1.0);
    let gram = basis.adjoint() * ij * &basis;
    let gram = (&gram + gram.adjoint()) * Complex64::new(0.5, 0.0);
    let ev = SymmetricEigen::new(gram).eigenvalues;
    let big = ev.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if mode == Mode::Strict {
        let small = ev.iter().fold(f64::INFINITY, |a, x| a.min(x.abs()));
        if big == 0.0 || small < 1e-9 * big {
            return Err(ill(c, "Krein form degenerate on eigenspace"));
        }
    }
    Ok(ev.iter().filter(|&&x| x > 0.0).count())
}

fn analyze(m: &Mat, tol: &Tolerances, mode: Mode) -> Result<SpectralData> {
    let dim = m.nrows();
    let n = dim / 2;
    let mut ev = linalg::eigenvalues(m).ok_or_else(|| Error::Numerical("eigenvalue iteration did not converge".into()))?;
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let groups = cluster_eigenvalues(&ev, tol.cluster);
    let centers: Vec<Complex64> = groups.iter().map(|g| centroid(g)).collect();

    let mut clusters = Vec::with_capacity(groups.len());
    for (gi, g) in groups.iter().enumerate() {
        let c = centers[gi];
        let mult = g.len();
        let is_real = 2.0 * c.im.abs() <= tol.cluster * c.norm().max(1.0);
        let off = (c.norm() - 1.0).abs();
        let kind;
        let on_circle;
        if is_real && (c.re - 1.0).abs() <= PM_ONE_SNAP {
            kind = ClusterKind::PlusOne;
            on_circle = true;
        } else if is_real && (c.re + 1.0).abs() <= PM_ONE_SNAP {
            kind = ClusterKind::MinusOne;
            on_circle = true;
        } else if is_real {
            on_circle = false;
            kind = if c.re > 0.0 {
                ClusterKind::PositiveReal
            } else {
                ClusterKind::NegativeReal
            };
        } else {
            on_circle = if off <= tol.circle {
                true
            } else {
                let mirror = Complex64::new(1.0, 0.0) / c.conj();
                let sep = (c - mirror).norm();
                let partner = centers
                    .iter()
                    .enumerate()
                    .any(|(j, &d)| j != gi && (d - mirror).norm() < 0.5 * sep);
                if partner {
                    false
                } else if off < 1e-5 || mode == Mode::Robust {
                    off < 1e-5
                } else {
                    return Err(ill(c, "eigenvalue off the circle without a reciprocal partner"));
                }
            };
            kind = if on_circle {
                ClusterKind::Elliptic
            } else {
                ClusterKind::Complex
            };
        }
        let m_plus = if kind == ClusterKind::Elliptic {
            krein_positive(m, g, mode)?
        } else {
            0
        };
        clusters.push(Cluster {
            value: c,
            multiplicity: mult,
            kind,
            on_circle,
            m_plus,
        });
    }

    if mode == Mode::Strict {
        for c in &clusters {
            if matches!(c.kind, ClusterKind::PlusOne | ClusterKind::MinusOne) && c.multiplicity % 2 != 0 {
                return Err(ill(
                    c.value,
                    format!("eigenvalue ±1 with odd multiplicity {}", c.multiplicity),
                ));
            }
        }
        for (i, c) in clusters.iter().enumerate() {
            if c.kind != ClusterKind::Elliptic || c.value.im <= 0.0 {
                continue;
            }
            let conj = c.value.conj();
            let partner = clusters
                .iter()
                .enumerate()
                .filter(|(j, d)| *j != i && d.kind == ClusterKind::Elliptic)
                .min_by(|a, b| (a.1.value - conj).norm().total_cmp(&(b.1.value - conj).norm()));
            match partner {
                Some((_, d)) if d.multiplicity == c.multiplicity && d.m_plus + c.m_plus == c.multiplicity => {}
                _ => return Err(ill(c.value, "inconsistent Krein signature across conjugate pair")),
            }
        }
    }

    let neg: usize = clusters
        .iter()
        .filter(|c| matches!(c.kind, ClusterKind::NegativeReal | ClusterKind::MinusOne))
        .map(|c| c.multiplicity)
        .sum();
    if mode == Mode::Strict && !neg.is_multiple_of(2) {
        return Err(ill(Complex64::new(-1.0, 0.0), "odd count of negative real eigenvalues"));
    }
    let m0 = neg / 2;

    let mut rho = Complex64::new(if m0.is_multiple_of(2) { 1.0 } else { -1.0 }, 0.0);
    for c in clusters.iter().filter(|c| c.kind == ClusterKind::Elliptic) {
        rho *= (c.value / c.value.norm()).powi(c.m_plus as i32);
    }

    let mut pairs = Vec::new();
    for (i, c) in clusters.iter().enumerate() {
        let inv = Complex64::new(1.0, 0.0) / c.value;
        if let Some((j, _)) = clusters
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1.value - inv).norm().total_cmp(&(b.1.value - inv).norm()))
        {
            pairs.push((i, j));
        }
    }

    Ok(SpectralData {
        n,
        eigenvalues: ev,
        clusters,
        pairs,
        m0,
        rho,
    })
}

/// Full spectral classification with loud failure on ambiguous decisions.
pub fn spectral_data(m: &SympMatrix, tol: &Tolerances) -> Result<SpectralData> {
    analyze(m.matrix(), tol, Mode::Strict)
}

/// `ρ(M)` without the conditioning checks; used on dense sample grids where
/// the continuity of `ρ` makes borderline classifications harmless.
pub fn rho_robust(m: &Mat, tol: &Tolerances) -> Complex64 {
    match analyze(m, tol, Mode::Robust) {
        Ok(d) => d.rho,
        Err(_) => Complex64::new(f64::NAN, f64::NAN),
    }
}

pub fn rho(m: &SympMatrix, tol: &Tolerances) -> Result<Complex64> {
    Ok(spectral_data(m, tol)?.rho)
}

impl SpectralData {
    pub fn first_kind(&self) -> Result<FirstKindSpectrum> {
        let mut items: Vec<(f64, Complex64)> = Vec::with_capacity(self.n);
        for c in &self.clusters {
            match c.kind {
                ClusterKind::PlusOne => {
                    items.extend(std::iter::repeat_n((0.0, Complex64::new(1.0, 0.0)), c.multiplicity / 2))
                }
                ClusterKind::MinusOne => {
                    items.extend(std::iter::repeat_n((PI, Complex64::new(-1.0, 0.0)), c.multiplicity / 2))
                }
                ClusterKind::Elliptic => {
                    let u = c.value / c.value.norm();
                    items.extend(std::iter::repeat_n((linalg::wrap_2pi(u.arg()), u), c.m_plus))
                }
                ClusterKind::PositiveReal | ClusterKind::NegativeReal | ClusterKind::Complex => {
                    if c.value.norm() < 1.0 {
                        // a quadruple ℓe^{±ia} slides through the negative
                        // reals without touching the circle
                        let angle = if c.kind == ClusterKind::PositiveReal { 0.0 } else { PI };
                        items.extend(std::iter::repeat_n((angle, c.value), c.multiplicity));
                    }
                }
            }
        }
        if items.len() != self.n {
            let c = self.clusters.first().map_or(Complex64::new(0.0, 0.0), |c| c.value);
            return Err(ill(
                c,
                format!("found {} first kind eigenvalues, expected {}", items.len(), self.n),
            ));
        }
        items.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(FirstKindSpectrum {
            entries: items.iter().map(|x| x.1).collect(),
            angles: items.iter().map(|x| x.0).collect(),
        })
    }

    /// First kind eigenvalues on the circle minus `-1` with `Im λ ≤ 0`.
    pub fn count_r(&self, faults: &Faults) -> usize {
        self.clusters
            .iter()
            .map(|c| match c.kind {
                ClusterKind::Elliptic if c.value.im < 0.0 => c.m_plus,
                ClusterKind::PlusOne if faults.flip_r_pair_rule => c.multiplicity,
                ClusterKind::PlusOne => c.multiplicity / 2,
                _ => 0,
            })
            .sum()
    }

    /// Whether `M` has an eigenvalue `+1` or `-1`.
    pub fn on_cycle(&self) -> bool {
        self.clusters
            .iter()
            .any(|c| matches!(c.kind, ClusterKind::PlusOne | ClusterKind::MinusOne))
    }

    pub fn has_plus_one(&self) -> bool {
        self.clusters.iter().any(|c| c.kind == ClusterKind::PlusOne)
    }
}

pub fn first_kind(m: &SympMatrix, tol: &Tolerances) -> Result<FirstKindSpectrum> {
    spectral_data(m, tol)?.first_kind()
}

pub fn count_r(m: &SympMatrix, tol: &Tolerances, faults: &Faults) -> Result<usize> {
    Ok(spectral_data(m, tol)?.count_r(faults))
}

/// `M = P·O` with `P = (MMᵀ)^{1/2}`.
pub fn polar_decompose(m: &SympMatrix) -> Result<(SympMatrix, SympMatrix)> {
    let mm = m.matrix() * m.matrix().transpose();
    let p = linalg::sym_fn(&mm, f64::sqrt);
    let p_inv = linalg::sym_fn(&mm, |x| 1.0 / x.sqrt());
    let o = &p_inv * m.matrix();
    let recon = linalg::max_abs(&(&p * &o - m.matrix())) / linalg::max_abs(m.matrix()).max(1.0);
    if !recon.is_finite() || recon > 1e-8 {
        return Err(Error::Numerical(format!("polar reconstruction residual {recon:.3e}")));
    }
    Ok((SympMatrix::trusted(p), SympMatrix::trusted(o)))
}

/// `P^s` for the positive factor of `M`.
pub fn polar_power(m: &Mat, s: f64) -> Mat {
    let mm = m * m.transpose();
    linalg::sym_fn(&mm, |x| x.powf(s / 2.0))
}

/// Block-diagonal orthogonal representative built from the first kind
/// angles, together with those angles (ascending).
pub fn normalization_matrix(m: &SympMatrix, tol: &Tolerances) -> Result<(SympMatrix, Vec<f64>)> {
    let fk = first_kind(m, tol)?;
    Ok((SympMatrix::trusted(linalg::block_rotation(&fk.angles)), fk.angles))
}

/// Whether `m` is exactly a block rotation with the given angles.
pub fn is_block_rotation(m: &Mat, angles: &[f64], tol: f64) -> bool {
    linalg::max_abs(&(m - linalg::block_rotation(angles))) <= tol
}

pub fn angle_distance_to_grid(a: f64) -> f64 {
    let r = a.rem_euclid(PI);
    r.min(PI - r)
}

pub fn unit_phase(z: Complex64) -> f64 {
    let a = z.arg();
    if a < 0.0 {
        a + TAU
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn sm(rows: &[&[f64]]) -> SympMatrix {
        let v: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        SympMatrix::from_rows(&v, &tol()).unwrap()
    }

    fn rot(a: f64) -> SympMatrix {
        SympMatrix::trusted(linalg::block_rotation(&[a]))
    }

    #[test]
    fn symplectic_check() {
        let j = sm(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        assert_eq!(j.residual(), 0.0);
        sm(&[&[1.0, -1.0], &[0.0, 1.0]]);
        let bad = SympMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 1.0]], &tol());
        assert!(matches!(bad, Err(Error::NotSymplectic { .. })));
        let odd = SympMatrix::new(Mat::identity(3, 3), &tol());
        assert!(matches!(odd, Err(Error::OddDimension(3))));
    }

    #[test]
    fn rho_of_rotation() {
        let r = rho(&rot(PI / 3.0), &tol()).unwrap();
        assert_relative_eq!(r.arg(), PI / 3.0, epsilon = 1e-12);
        let r = rho(&rot(3.0 * PI / 2.0), &tol()).unwrap();
        assert_relative_eq!(r.arg(), -PI / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn rho_identity_and_negative_pair() {
        let d = spectral_data(&SympMatrix::identity(2), &tol()).unwrap();
        assert_eq!(d.m0, 0);
        assert_relative_eq!(d.rho.re, 1.0);
        let m = sm(&[&[-2.0, 0.0], &[0.0, -0.5]]);
        let d = spectral_data(&m, &tol()).unwrap();
        assert_eq!(d.m0, 1);
        assert_relative_eq!(d.rho.re, -1.0);
    }

    #[test]
    fn krein_counts_of_block_matrix() {
        let a = SympMatrix::trusted(linalg::block_rotation(&[PI / 4.0, PI / 3.0]));
        let d = spectral_data(&a, &tol()).unwrap();
        for c in d.clusters.iter().filter(|c| c.value.im > 0.0) {
            assert_eq!(c.m_plus, 1);
        }
        for c in d.clusters.iter().filter(|c| c.value.im < 0.0) {
            assert_eq!(c.m_plus, 0);
        }
        let fk = d.first_kind().unwrap();
        assert_relative_eq!(fk.angles[0], PI / 4.0, epsilon = 1e-12);
        assert_relative_eq!(fk.angles[1], PI / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn first_kind_of_hyperbolic() {
        let m = sm(&[&[2.0, 0.0], &[0.0, 0.5]]);
        let fk = first_kind(&m, &tol()).unwrap();
        assert_eq!(fk.angles, vec![0.0]);
        assert_relative_eq!(fk.entries[0].re, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn r_counts() {
        assert_eq!(count_r(&rot(3.0 * PI / 2.0), &tol(), &Faults::default()).unwrap(), 1);
        assert_eq!(count_r(&rot(PI / 3.0), &tol(), &Faults::default()).unwrap(), 0);
        let mut m = Mat::identity(4, 4);
        m[(1, 3)] = -1.0;
        let m = SympMatrix::new(m, &tol()).unwrap();
        assert_eq!(count_r(&m, &tol(), &Faults::default()).unwrap(), 2);
        let flipped = Faults {
            flip_r_pair_rule: true,
            ..Faults::default()
        };
        assert_eq!(count_r(&m, &tol(), &flipped).unwrap(), 4);
    }

    #[test]
    fn polar_of_shear() {
        let m = sm(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let (p, o) = polar_decompose(&m).unwrap();
        let pm = p.matrix();
        assert!(linalg::max_abs(&(pm * pm - m.matrix() * m.matrix().transpose())) < 1e-12);
        assert!(linalg::max_abs(&(pm * o.matrix() - m.matrix())) < 1e-12);
        let oo = o.matrix() * o.matrix().transpose();
        assert!(linalg::max_abs(&(oo - Mat::identity(2, 2))) < 1e-12);
    }

    #[test]
    fn polar_of_orthogonal_and_diagonal() {
        let r = rot(0.7);
        let (p, o) = polar_decompose(&r).unwrap();
        assert!(linalg::max_abs(&(p.matrix() - Mat::identity(2, 2))) < 1e-12);
        assert!(linalg::max_abs(&(o.matrix() - r.matrix())) < 1e-12);
        let d = sm(&[&[-3.0, 0.0], &[0.0, -1.0 / 3.0]]);
        let (p, _) = polar_decompose(&d).unwrap();
        assert_relative_eq!(p.matrix()[(0, 0)], 3.0, epsilon = 1e-12);
        assert_relative_eq!(p.matrix()[(1, 1)], 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn normalization_of_loxodromic() {
        // eigenvalues 2e^{±iπ/3}, ½e^{±iπ/3}
        let c = (PI / 3.0).cos();
        let s = (PI / 3.0).sin();
        let r = Mat::from_row_slice(2, 2, &[c, -s, s, c]);
        let top = &r * 2.0;
        let bottom = &r * 0.5;
        let m = linalg::from_blocks(&top, &Mat::zeros(2, 2), &Mat::zeros(2, 2), &bottom);
        let m = SympMatrix::new(m, &tol()).unwrap();
        let (o, angles) = normalization_matrix(&m, &tol()).unwrap();
        assert_relative_eq!(angles[0], PI, epsilon = 1e-12);
        assert_relative_eq!(angles[1], PI, epsilon = 1e-12);
        assert!(is_block_rotation(o.matrix(), &angles, 1e-12));
    }

    #[test]
    fn normalization_keeps_block_form() {
        let a = linalg::block_rotation(&[PI / 4.0, PI / 3.0]);
        let (o, _) = normalization_matrix(&SympMatrix::trusted(a.clone()), &tol()).unwrap();
        assert!(linalg::max_abs(&(o.matrix() - a)) < 1e-12);
    }
}
