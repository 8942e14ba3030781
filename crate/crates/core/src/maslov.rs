//! The Maslov-type index `μ` of a general symplectic path.

use serde::Serialize;

use crate::config::{Config, Faults};
use crate::error::{Error, Result};
use crate::linalg::{self, PI};
use crate::path::{self, SympPath, Tail};
use crate::rotation::{self, RotationLift};
use crate::spectral::{self, FirstKindSpectrum, SympMatrix};

/// Angles closer than this to the grid `{kπ}` count as lying on it.
const ON_GRID: f64 = 1e-9;

pub const NORMALIZATION_CONVENTION: &str =
    "off-circle first kind eigenvalues: positive real -> 0, negative real -> pi, l*e^{+-i a} (l<1) -> pi, pi";

#[derive(Debug, Clone, Serialize)]
pub struct IndexReport {
    pub mu: i64,
    pub theta: f64,
    pub delta_main: f64,
    pub delta_beta: f64,
    pub tails_delta: [f64; 2],
    pub integer_residual: f64,
    pub endpoint_spectra: [FirstKindSpectrum; 2],
    /// Block angles of `A`, `B` and `W_{A,B}` after the perturbation.
    pub a_angles: Vec<f64>,
    pub b_angles: Vec<f64>,
    pub w_angles: Vec<f64>,
    pub w_target: SympMatrix,
    pub tails: [Tail; 2],
    pub lift_samples: usize,
    pub normalization_convention: &'static str,
    #[serde(skip)]
    pub lift: RotationLift,
    #[serde(skip)]
    pub perturbed: SympPath,
}

/// `Φ^# = β₁ # Φ # β₂` with both endpoints moved to block-diagonal
/// orthogonal form.
#[derive(Debug, Clone)]
pub struct Orthogonalized {
    pub path: SympPath,
    pub tails: [Tail; 2],
}

pub fn orthogonalize(p: &SympPath, cfg: &Config) -> Result<Orthogonalized> {
    let start = p.evaluate(0.0, &cfg.tol)?;
    let end = p.evaluate(1.0, &cfg.tol)?;
    let t0 = path::build_tail(&start, cfg)?;
    let t1 = path::build_tail(&end, cfg)?;
    let glued = if t0.constant && t1.constant {
        p.clone()
    } else {
        SympPath::catenate_all(
            vec![t0.path.clone(), p.clone(), t1.path.reverse()],
            &path::loose(cfg),
        )?
    };
    Ok(Orthogonalized {
        path: glued,
        tails: [t0, t1],
    })
}

/// `min(θ_max, d/2)` with `d` the smallest positive distance of an endpoint
/// angle to `{kπ}`.
pub fn choose_theta(a: &[f64], b: &[f64], theta_max: f64) -> f64 {
    let d_min = a
        .iter()
        .chain(b)
        .map(|&x| spectral::angle_distance_to_grid(x))
        .filter(|&d| d > ON_GRID)
        .fold(f64::INFINITY, f64::min);
    if d_min.is_finite() {
        theta_max.min(d_min / 2.0)
    } else {
        theta_max
    }
}

/// Angles of `W_{A,B}` from the sorted block angles of `A` and `B`.
pub fn extension_angles(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let mut w = Vec::with_capacity(a.len());
    for (j, (&x, &y)) in a.iter().zip(b).enumerate() {
        for z in [x, y] {
            if spectral::angle_distance_to_grid(z) <= ON_GRID {
                return Err(Error::OnCycle { block: j, angle: z });
            }
        }
        if x.sin() * y.sin() > 0.0 {
            w.push(x);
        } else {
            w.push(linalg::wrap_2pi(x + PI));
        }
    }
    Ok(w)
}

/// `W_{A,B}` for block-diagonal orthogonal `A`, `B` off the cycle.
pub fn extension_target(a: &SympMatrix, b: &SympMatrix, cfg: &Config) -> Result<SympMatrix> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch {
            expected: 2 * a.n(),
            got: 2 * b.n(),
        });
    }
    let fa = spectral::first_kind(a, &cfg.tol)?;
    let fb = spectral::first_kind(b, &cfg.tol)?;
    let w = extension_angles(&fa.angles, &fb.angles)?;
    Ok(SympMatrix::trusted(linalg::block_rotation(&w)))
}

/// Rotation number of the extension from `B` to `W`, each block moving
/// inside its open half-circle.
pub fn delta_beta(b: &[f64], w: &[f64], faults: &Faults) -> Result<f64> {
    let mut total = 0.0;
    for (j, (&x, &y)) in b.iter().zip(w).enumerate() {
        if x.sin() * y.sin() <= 0.0 {
            return Err(Error::HalfCircleMismatch {
                block: j,
                from: x,
                to: y,
            });
        }
        let mut d = linalg::wrap_pi(y - x);
        if faults.flip_delta_beta && d != 0.0 {
            d -= 2.0 * PI * d.signum();
        }
        total += d / PI;
    }
    Ok(total)
}

pub fn maslov_index(p: &SympPath, cfg: &Config) -> Result<IndexReport> {
    maslov_index_with_theta(p, cfg, None)
}

/// Same as [`maslov_index`] with the perturbation angle forced.
pub fn maslov_index_with_theta(p: &SympPath, cfg: &Config, theta: Option<f64>) -> Result<IndexReport> {
    let orth = orthogonalize(p, cfg)?;
    let [t0, t1] = orth.tails;
    let theta = theta.unwrap_or_else(|| choose_theta(&t0.angles, &t1.angles, cfg.theta_max));
    let shift = |angles: &[f64]| {
        let mut v: Vec<f64> = angles.iter().map(|x| linalg::wrap_2pi(x - theta)).collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let a = shift(&t0.angles);
    let b = shift(&t1.angles);
    let perturbed = orth.path.perturb_global(theta);
    let lift = rotation::lift_delta(&perturbed, cfg)?;
    let w = extension_angles(&a, &b)?;
    let db = delta_beta(&b, &w, &cfg.faults)?;
    let total = lift.delta + db;
    let mu = total.round();
    let residual = (total - mu).abs();
    if residual > cfg.tol.int {
        return Err(Error::NonIntegerResidual {
            value: total,
            tol: cfg.tol.int,
        });
    }
    let spectra = [
        spectral::first_kind(&p.evaluate(0.0, &cfg.tol)?, &cfg.tol)?,
        spectral::first_kind(&p.evaluate(1.0, &cfg.tol)?, &cfg.tol)?,
    ];
    Ok(IndexReport {
        mu: mu as i64,
        theta,
        delta_main: lift.delta,
        delta_beta: db,
        tails_delta: [t0.delta, t1.delta],
        integer_residual: residual,
        endpoint_spectra: spectra,
        w_target: SympMatrix::trusted(linalg::block_rotation(&w)),
        a_angles: a,
        b_angles: b,
        w_angles: w,
        tails: [t0, t1],
        lift_samples: lift.grid.len(),
        normalization_convention: NORMALIZATION_CONVENTION,
        lift,
        perturbed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Mat;
    use approx::assert_abs_diff_eq;

    fn cfg() -> Config {
        Config::default()
    }

    #[test]
    fn theta_rule() {
        assert_eq!(choose_theta(&[0.0], &[1.5 * PI], 1e-3), 1e-3);
        assert_eq!(choose_theta(&[PI / 4.0, PI / 3.0], &[PI / 2.0, 1.5 * PI], 1e-3), 1e-3);
        assert_abs_diff_eq!(choose_theta(&[PI / 4.0, PI / 3.0], &[PI / 2.0, 1.5 * PI], 1.0), PI / 8.0);
        assert_eq!(choose_theta(&[0.0, 0.0], &[0.0, 0.0], 1e-3), 1e-3);
        assert_abs_diff_eq!(choose_theta(&[1e-4], &[0.0], 1e-3), 5e-5);
    }

    #[test]
    fn worked_extension_target() {
        let a = SympMatrix::trusted(linalg::block_rotation(&[PI / 4.0, PI / 3.0]));
        let b = SympMatrix::trusted(linalg::block_rotation(&[PI / 2.0, 1.5 * PI]));
        let w = extension_target(&a, &b, &cfg()).unwrap();
        let s2 = 0.5f64.sqrt();
        let s3 = 0.75f64.sqrt();
        let want = Mat::from_row_slice(
            4,
            4,
            &[s2, 0.0, -s2, 0.0, 0.0, -0.5, 0.0, s3, s2, 0.0, s2, 0.0, 0.0, -s3, 0.0, -0.5],
        );
        assert!(linalg::max_abs(&(w.matrix() - want)) < 1e-12);
        let same = extension_target(&a, &a, &cfg()).unwrap();
        assert!(linalg::max_abs(&(same.matrix() - a.matrix())) < 1e-12);
    }

    #[test]
    fn opposite_halves_flip_every_block() {
        let a = [PI / 4.0, PI / 3.0];
        let b = [linalg::wrap_2pi(-PI / 3.0), linalg::wrap_2pi(-PI / 4.0)];
        let w = extension_angles(&a, &b).unwrap();
        assert_abs_diff_eq!(w[0], PI / 4.0 + PI, epsilon = 1e-12);
        assert_abs_diff_eq!(w[1], PI / 3.0 + PI, epsilon = 1e-12);
    }

    #[test]
    fn on_cycle_is_rejected() {
        assert!(matches!(extension_angles(&[0.0], &[1.0]), Err(Error::OnCycle { .. })));
    }

    #[test]
    fn delta_beta_values() {
        let theta = 1e-3;
        let d = delta_beta(&[1.5 * PI - theta], &[2.0 * PI - theta], &Faults::default()).unwrap();
        assert_abs_diff_eq!(d, 0.5, epsilon = 1e-12);
        assert_eq!(delta_beta(&[1.0, 4.0], &[1.0, 4.0], &Faults::default()).unwrap(), 0.0);
        let d = delta_beta(&[PI / 2.0, 1.5 * PI], &[PI / 4.0, 4.0 * PI / 3.0], &Faults::default()).unwrap();
        assert_abs_diff_eq!(d, -5.0 / 12.0, epsilon = 1e-12);
        assert!(matches!(
            delta_beta(&[1.0], &[4.0], &Faults::default()),
            Err(Error::HalfCircleMismatch { .. })
        ));
    }

    #[test]
    fn index_of_shifted_half_turn() {
        let p = SympPath::rotation(&[PI / 2.0, PI]);
        assert_eq!(maslov_index(&p, &cfg()).unwrap().mu, 1);
    }

    #[test]
    fn index_of_three_quarter_turn() {
        let r = maslov_index(&SympPath::rotation(&[0.0, 1.5 * PI]), &cfg()).unwrap();
        assert_eq!(r.mu, 2);
        assert_abs_diff_eq!(r.delta_main, 1.5, epsilon = 1e-9);
        assert_abs_diff_eq!(r.delta_beta, 0.5, epsilon = 1e-9);
    }

    #[test]
    fn index_of_degenerate_shear() {
        let p = SympPath::shear(2, (1, 3), -1.0).unwrap();
        let r = maslov_index(&p, &cfg()).unwrap();
        assert_eq!(r.mu, 0);
        assert!(r.tails_delta.iter().all(|d| d.abs() < 1e-6));
    }

    #[test]
    fn index_of_identity() {
        for n in 1..=3 {
            assert_eq!(maslov_index(&SympPath::identity(n), &cfg()).unwrap().mu, 0);
        }
    }
}
