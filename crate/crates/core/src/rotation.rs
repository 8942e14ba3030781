//! Continuous phase lifts of `ρ` along a path and the rotation number.

use num_complex::Complex64;
use serde::Serialize;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::linalg::{self, Mat, PI};
use crate::par;
use crate::path::SympPath;
use crate::spectral;

#[derive(Debug, Clone, Serialize)]
pub struct RotationLift {
    pub grid: Vec<f64>,
    pub rho: Vec<Complex64>,
    /// `e^{iπα(t)} = ρ(Φ(t))`.
    pub alpha: Vec<f64>,
    pub delta: f64,
    /// Largest phase change between neighbouring samples (radians).
    pub max_step_phase: f64,
}

impl RotationLift {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,rho_re,rho_im,alpha\n");
        for ((t, z), a) in self.grid.iter().zip(&self.rho).zip(&self.alpha) {
            out.push_str(&format!("{t:.12},{:.12},{:.12},{a:.12}\n", z.re, z.im));
        }
        out
    }
}

fn needs_split(a: Complex64, b: Complex64, cfg: &Config) -> bool {
    let step = (b / a).arg().abs();
    step >= cfg.refine.max_phase_step || (b - a).norm() >= cfg.refine.max_chord
}

/// Lifts `t ↦ f(Φ(t))` for a unit-modulus `f` with adaptive bisection.
pub fn lift_with<F>(path: &SympPath, cfg: &Config, f: F) -> Result<RotationLift>
where
    F: Fn(&Mat) -> Complex64 + Sync + Send,
{
    let eval = |t: &f64| -> Result<Complex64> {
        let m = path.evaluate(*t, &cfg.tol)?;
        let z = f(m.matrix());
        if !z.re.is_finite() || !z.im.is_finite() || z.norm() < 0.5 {
            return Err(Error::Numerical(format!("phase undefined at t = {t}")));
        }
        Ok(z / z.norm())
    };
    let n0 = cfg.refine.initial_samples.max(1);
    let mut ts: Vec<f64> = (0..=n0).map(|k| k as f64 / n0 as f64).collect();
    let mut zs = par::try_map(cfg.execution, &ts, eval)?;
    // depth of the interval to the right of each point
    let mut depth = vec![0u32; ts.len()];
    loop {
        let mut mids = Vec::new();
        for k in 0..ts.len() - 1 {
            if needs_split(zs[k], zs[k + 1], cfg) {
                if depth[k] >= cfg.refine.max_depth {
                    return Err(Error::RefinementExhausted {
                        t: ts[k],
                        depth: cfg.refine.max_depth,
                    });
                }
                mids.push(k);
            }
        }
        if mids.is_empty() {
            break;
        }
        let new_t: Vec<f64> = mids.iter().map(|&k| 0.5 * (ts[k] + ts[k + 1])).collect();
        let new_z = par::try_map(cfg.execution, &new_t, eval)?;
        let mut t2 = Vec::with_capacity(ts.len() + mids.len());
        let mut z2 = Vec::with_capacity(ts.len() + mids.len());
        let mut d2 = Vec::with_capacity(ts.len() + mids.len());
        let mut next = 0;
        for k in 0..ts.len() {
            t2.push(ts[k]);
            z2.push(zs[k]);
            if next < mids.len() && mids[next] == k {
                d2.push(depth[k] + 1);
                t2.push(new_t[next]);
                z2.push(new_z[next]);
                d2.push(depth[k] + 1);
                next += 1;
            } else {
                d2.push(depth[k]);
            }
        }
        ts = t2;
        zs = z2;
        depth = d2;
    }
    let mut alpha = Vec::with_capacity(ts.len());
    alpha.push(zs[0].arg() / PI);
    let mut max_step: f64 = 0.0;
    for k in 1..zs.len() {
        let step = (zs[k] / zs[k - 1]).arg();
        max_step = max_step.max(step.abs());
        alpha.push(alpha[k - 1] + step / PI);
    }
    let delta = alpha[alpha.len() - 1] - alpha[0];
    Ok(RotationLift {
        grid: ts,
        rho: zs,
        alpha,
        delta,
        max_step_phase: max_step,
    })
}

/// Rotation number of `ρ` along the path.
pub fn lift_delta(path: &SympPath, cfg: &Config) -> Result<RotationLift> {
    let tol = cfg.tol;
    lift_with(path, cfg, move |m| spectral::rho_robust(m, &tol))
}

/// Rotation number of `det(X + iY)` for the orthogonal polar factor.
pub fn delta_prime(path: &SympPath, cfg: &Config) -> Result<f64> {
    Ok(lift_with(path, cfg, |m| {
        let mm = m * m.transpose();
        let o = linalg::sym_fn(&mm, |x| 1.0 / x.sqrt()) * m;
        linalg::det_c(&linalg::unitary_of(&o))
    })?
    .delta)
}

/// Integer rotation number of a loop.
pub fn check_loop_integral(path: &SympPath, cfg: &Config) -> Result<i64> {
    let a = path.eval(0.0);
    let b = path.eval(1.0);
    let gap = linalg::max_abs(&(&a - &b)) / linalg::max_abs(&a).max(1.0);
    if gap > cfg.tol.symp.max(1e-8) {
        return Err(Error::NotALoop(gap));
    }
    let d = lift_delta(path, cfg)?.delta;
    let k = d.round();
    if (d - k).abs() > cfg.tol.int {
        return Err(Error::NonIntegerResidual {
            value: d,
            tol: cfg.tol.int,
        });
    }
    Ok(k as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::SympMatrix;
    use approx::assert_abs_diff_eq;

    fn cfg() -> Config {
        Config::default()
    }

    #[test]
    fn three_halves_turn() {
        let p = SympPath::rotation(&[0.0, 1.5 * PI]);
        let l = lift_delta(&p, &cfg()).unwrap();
        assert_abs_diff_eq!(l.delta, 1.5, epsilon = 1e-9);
        assert!(l.max_step_phase < PI / 2.0);
    }

    #[test]
    fn constant_has_no_rotation() {
        let p = SympPath::identity(2);
        assert_abs_diff_eq!(lift_delta(&p, &cfg()).unwrap().delta, 0.0);
    }

    #[test]
    fn full_loop() {
        let p = SympPath::rotation(&[0.0, 2.0 * PI]);
        assert_eq!(check_loop_integral(&p, &cfg()).unwrap(), 2);
        assert_eq!(check_loop_integral(&SympPath::identity(1), &cfg()).unwrap(), 0);
        let c = SympPath::correction_loop(vec![0.3, 1.2], 3);
        assert_eq!(check_loop_integral(&c, &cfg()).unwrap(), -6);
    }

    #[test]
    fn open_path_is_not_a_loop() {
        let p = SympPath::rotation(&[0.0, 1.0]);
        assert!(matches!(check_loop_integral(&p, &cfg()), Err(Error::NotALoop(_))));
    }

    #[test]
    fn delta_prime_examples() {
        let p = SympPath::rotation(&[0.0, 1.5 * PI]);
        assert_abs_diff_eq!(delta_prime(&p, &cfg()).unwrap(), 1.5, epsilon = 1e-9);
        let d = SympMatrix::new(Mat::from_row_slice(2, 2, &[-3.0, 0.0, 0.0, -1.0 / 3.0]), &cfg().tol).unwrap();
        let radial = SympPath::polar_radial(&d);
        assert_abs_diff_eq!(delta_prime(&radial, &cfg()).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(delta_prime(&SympPath::identity(1), &cfg()).unwrap(), 0.0);
    }

    #[test]
    fn csv_header() {
        let l = lift_delta(&SympPath::identity(1), &cfg()).unwrap();
        assert!(l.to_csv().starts_with("t,rho_re,rho_im,alpha\n"));
    }
}
