//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, Schur, SymmetricEigen};
use num_complex::Complex64;

pub type Mat = DMatrix<f64>;
pub type CMat = DMatrix<Complex64>;

pub const TAU: f64 = std::f64::consts::TAU;
pub const PI: f64 = std::f64::consts::PI;

/// `J₀ = [[0, I], [-I, 0]]` of size `2n`.
pub fn j0(n: usize) -> Mat {
    let mut j = Mat::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(k, n + k)] = 1.0;
        j[(n + k, k)] = -1.0;
    }
    j
}

/// Orthogonal symplectic block rotation `[[X, -Y], [Y, X]]` with
/// `X = diag cos aⱼ`, `Y = diag sin aⱼ`.
pub fn block_rotation(angles: &[f64]) -> Mat {
    let n = angles.len();
    let mut m = Mat::zeros(2 * n, 2 * n);
    for (k, &a) in angles.iter().enumerate() {
        let (s, c) = a.sin_cos();
        m[(k, k)] = c;
        m[(n + k, n + k)] = c;
        m[(k, n + k)] = -s;
        m[(n + k, k)] = s;
    }
    m
}

/// `e^{-θJ}` for the `J` of the global perturbation, i.e. every block rotated
/// by `-θ`.
pub fn rotation_minus(n: usize, theta: f64) -> Mat {
    block_rotation(&vec![-theta; n])
}

pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Max-norm of `MᵀJ₀M − J₀`.
pub fn symplectic_residual(m: &Mat) -> f64 {
    let n = m.nrows() / 2;
    let j = j0(n);
    max_abs(&(m.transpose() * &j * m - j))
}

pub fn from_rows(rows: &[Vec<f64>]) -> Option<Mat> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return None;
    }
    Some(Mat::from_fn(r, c, |i, j| rows[i][j]))
}

pub fn to_rows(m: &Mat) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Splits a `2n × 2n` matrix into its four `n × n` blocks `(A, B, C, D)` of
/// `[[A, B], [C, D]]`.
pub fn blocks(m: &Mat) -> (Mat, Mat, Mat, Mat) {
    let n = m.nrows() / 2;
    (
        m.view((0, 0), (n, n)).into_owned(),
        m.view((0, n), (n, n)).into_owned(),
        m.view((n, 0), (n, n)).into_owned(),
        m.view((n, n), (n, n)).into_owned(),
    )
}

pub fn from_blocks(a: &Mat, b: &Mat, c: &Mat, d: &Mat) -> Mat {
    let n = a.nrows();
    let mut m = Mat::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(a);
    m.view_mut((0, n), (n, n)).copy_from(b);
    m.view_mut((n, 0), (n, n)).copy_from(c);
    m.view_mut((n, n), (n, n)).copy_from(d);
    m
}

/// Direct sum in the `(x, y)` ordering: blocks are interleaved so that the
/// result is again written as `[[A, B], [C, D]]`.
pub fn symp_direct_sum(p: &Mat, q: &Mat) -> Mat {
    let (n1, n2) = (p.nrows() / 2, q.nrows() / 2);
    let n = n1 + n2;
    let mut m = Mat::zeros(2 * n, 2 * n);
    let map1 = |i: usize| if i < n1 { i } else { n + (i - n1) };
    let map2 = |i: usize| if i < n2 { n1 + i } else { n + n1 + (i - n2) };
    for i in 0..2 * n1 {
        for j in 0..2 * n1 {
            m[(map1(i), map1(j))] = p[(i, j)];
        }
    }
    for i in 0..2 * n2 {
        for j in 0..2 * n2 {
            m[(map2(i), map2(j))] = q[(i, j)];
        }
    }
    m
}

/// Extracts the `k`-th `2 × 2` block (rows/cols `k` and `n + k`).
pub fn sub_block(m: &Mat, k: usize) -> Mat {
    let n = m.nrows() / 2;
    let idx = [k, n + k];
    Mat::from_fn(2, 2, |i, j| m[(idx[i], idx[j])])
}

pub fn to_complex(m: &Mat) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}

/// `X + iY` of the blocks `[[X, ·], [Y, ·]]`.
pub fn unitary_of(o: &Mat) -> CMat {
    let n = o.nrows() / 2;
    CMat::from_fn(n, n, |i, j| Complex64::new(o[(i, j)], o[(n + i, j)]))
}

/// Inverse of [`unitary_of`]: `U = X + iY ↦ [[X, -Y], [Y, X]]`.
pub fn orthosymp_of(u: &CMat) -> Mat {
    let x = u.map(|z| z.re);
    let y = u.map(|z| z.im);
    from_blocks(&x, &(-&y), &y, &x)
}

pub fn det_c(m: &CMat) -> Complex64 {
    if m.nrows() == 0 {
        return Complex64::new(1.0, 0.0);
    }
    m.clone().lu().determinant()
}

/// `f(S)` for symmetric `S` through its spectral decomposition.
pub fn sym_fn(s: &Mat, f: impl Fn(f64) -> f64) -> Mat {
    let sym = (s + s.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let q = &eig.eigenvectors;
    let d = Mat::from_diagonal(&eig.eigenvalues.map(f));
    q * d * q.transpose()
}

const SCHUR_ITERATIONS: usize = 300;

/// Eigenvalues of a real square matrix.
///
/// nalgebra's `Schur` is fast on small matrices but can stall on clustered
/// spectra of near-orthogonal matrices, so its iteration count is capped and
/// faer's QR takes over when it gives up.
pub fn eigenvalues(m: &Mat) -> Option<Vec<Complex64>> {
    let dim = m.nrows();
    if let Some(s) = Schur::try_new(m.clone(), f64::EPSILON, SCHUR_ITERATIONS) {
        return Some(s.complex_eigenvalues().iter().copied().collect());
    }
    let f = faer::Mat::<f64>::from_fn(dim, dim, |i, j| m[(i, j)]);
    if let Ok(ev) = f.eigenvalues() {
        if ev.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Some(ev.iter().map(|z| Complex64::new(z.re, z.im)).collect());
        }
    }
    for shift in [1.3, -2.1, 2.0] {
        let a = m + Mat::identity(dim, dim) * shift;
        if let Some(s) = Schur::try_new(a, 1e-14, SCHUR_ITERATIONS) {
            let c = Complex64::new(shift, 0.0);
            return Some(s.complex_eigenvalues().iter().map(|z| z - c).collect());
        }
    }
    None
}

/// Eigen-decomposition `W = Q·diag(e^{iφ})·Q*` of a unitary matrix through
/// the Hermitian pencil `(W + W*)/2 + γ(W − W*)/2i`.
pub fn unitary_eigen(w: &CMat) -> (CMat, Vec<f64>) {
    let n = w.nrows();
    let wa = w.adjoint();
    let mut best: Option<(f64, CMat, Vec<f64>)> = None;
    for gamma in [0.5772156649, -1.3247179572, 2.4142135623, 0.1415926535] {
        let h = (w + &wa) * Complex64::new(0.5, 0.0) + (w - &wa) * Complex64::new(0.0, -0.5 * gamma);
        let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
        let q = SymmetricEigen::new(h).eigenvectors;
        let d = q.adjoint() * w * &q;
        let phases: Vec<f64> = (0..n).map(|k| d[(k, k)].arg()).collect();
        let mut off = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off = off.max(d[(i, j)].norm());
                }
            }
        }
        if off < 1e-10 {
            return (q, phases);
        }
        if best.as_ref().is_none_or(|b| off < b.0) {
            best = Some((off, q, phases));
        }
    }
    let (_, q, phases) = best.expect("at least one attempt");
    (q, phases)
}

/// Inertia `(positive, negative, zero)` of a real symmetric matrix with a
/// relative threshold.
pub fn inertia(s: &Mat, rel_tol: f64) -> (usize, usize, usize) {
    if s.nrows() == 0 {
        return (0, 0, 0);
    }
    let sym = (s + s.transpose()) * 0.5;
    let ev = SymmetricEigen::new(sym).eigenvalues;
    let scale = ev.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1.0);
    let mut out = (0, 0, 0);
    for &e in ev.iter() {
        if e > rel_tol * scale {
            out.0 += 1;
        } else if e < -rel_tol * scale {
            out.1 += 1;
        } else {
            out.2 += 1;
        }
    }
    out
}

/// Singular values sorted ascending together with the matching right
/// singular vectors (as columns).
pub fn svd_ascending(m: &CMat) -> (Vec<f64>, CMat) {
    let cols = m.ncols();
    // Pad to square so that every right singular vector is returned.
    let padded = if m.nrows() < cols {
        let mut p = CMat::zeros(cols, cols);
        p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let vals = order.iter().map(|&k| svd.singular_values[k]).collect();
    let v = CMat::from_fn(cols, order.len(), |i, j| v_t[(order[j], i)].conj());
    (vals, v)
}

/// Same as [`svd_ascending`] for real matrices, values only.
pub fn singular_values_ascending(m: &Mat) -> Vec<f64> {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(f64::total_cmp);
    s
}

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_2pi(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Reduces an angle to `(-π, π]`.
pub fn wrap_pi(a: f64) -> f64 {
    let r = wrap_2pi(a);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rotation_is_symplectic() {
        let r = block_rotation(&[0.3, 1.7, -2.0]);
        assert!(symplectic_residual(&r) < 1e-14);
        assert!(max_abs(&(r.transpose() * &r - Mat::identity(6, 6))) < 1e-14);
    }

    #[test]
    fn unitary_round_trip() {
        let r = block_rotation(&[0.3, 2.1]);
        let u = unitary_of(&r);
        assert_relative_eq!(max_abs(&(orthosymp_of(&u) - &r)), 0.0, epsilon = 1e-15);
        let d = det_c(&u);
        assert_relative_eq!(d.arg(), 2.4, epsilon = 1e-12);
    }

    #[test]
    fn direct_sum_of_rotations_is_rotation() {
        let a = block_rotation(&[0.5]);
        let b = block_rotation(&[1.0, 2.0]);
        let s = symp_direct_sum(&a, &b);
        assert!(max_abs(&(s - block_rotation(&[0.5, 1.0, 2.0]))) < 1e-15);
    }

    #[test]
    fn sym_sqrt_squares_back() {
        let s = Mat::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let r = sym_fn(&s, f64::sqrt);
        assert!(max_abs(&(&r * &r - s)) < 1e-12);
    }

    #[test]
    fn svd_orders_and_finds_kernel() {
        let m = to_complex(&Mat::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 2.0, 0.0]));
        let (s, v) = svd_ascending(&m);
        assert_eq!(s.len(), 3);
        assert!(s[0] < 1e-14 && (s[2] - 2.0).abs() < 1e-14);
        assert!((v[(2, 0)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wrapping() {
        assert_relative_eq!(wrap_2pi(-0.5), TAU - 0.5);
        assert_relative_eq!(wrap_pi(3.5 * PI), -0.5 * PI, epsilon = 1e-12);
        assert_relative_eq!(wrap_pi(PI), PI);
    }
}
