//! Conley–Zehnder, Long, Liu `L₀`, concavity and segment indices.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::linalg::{self, Mat, PI};
use crate::maslov;
use crate::par;
use crate::path::{self, SympPath};
use crate::rotation;
use crate::spectral::{self, ClusterKind, SpectralData, SympMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexKind {
    Cz,
    Long,
    LiuL0,
    SpsLong,
    SpsLiu,
    Concavity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Direct,
    Comparison,
    PerturbationHeuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LongRoute {
    #[default]
    Comparison,
    Heuristic,
    /// Both routes; they must agree.
    Both,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassicalReport {
    pub kind: IndexKind,
    pub value: i64,
    pub route: Route,
    pub details: BTreeMap<String, Value>,
}

impl ClassicalReport {
    fn new(kind: IndexKind, value: i64, route: Route) -> Self {
        Self {
            kind,
            value,
            route,
            details: BTreeMap::new(),
        }
    }

    fn with(mut self, key: &str, v: Value) -> Self {
        self.details.insert(key.to_string(), v);
        self
    }

    pub fn detail_f64(&self, key: &str) -> Option<f64> {
        self.details.get(key).and_then(Value::as_f64)
    }

    pub fn detail_i64(&self, key: &str) -> Option<i64> {
        self.details.get(key).and_then(Value::as_i64)
    }
}

/// Perturbation parameters tried by the heuristic routes.
pub const HEURISTIC_EPSILONS: [f64; 2] = [1e-3, 1e-4];

fn snap(x: f64, cfg: &Config) -> Result<(i64, f64)> {
    let k = x.round();
    let r = (x - k).abs();
    if r > cfg.tol.int {
        return Err(Error::NonIntegerResidual {
            value: x,
            tol: cfg.tol.int,
        });
    }
    Ok((k as i64, r))
}

fn require_identity_start(p: &SympPath, cfg: &Config) -> Result<()> {
    let m = p.eval(0.0);
    let n = p.n();
    let gap = linalg::max_abs(&(m - Mat::identity(2 * n, 2 * n)));
    if gap > cfg.tol.symp.max(1e-12) {
        return Err(Error::NotFromIdentity(gap));
    }
    Ok(())
}

/// `Δ(γ)` for an extension inside `Sp*₁` from the endpoint spectrum.
pub fn delta_gamma(sd: &SpectralData) -> f64 {
    sd.clusters
        .iter()
        .filter(|c| c.kind == ClusterKind::Elliptic)
        .map(|c| {
            let a = spectral::unit_phase(c.value);
            c.m_plus as f64 * (PI - a) / PI
        })
        .sum()
}

pub fn conley_zehnder(p: &SympPath, cfg: &Config) -> Result<ClassicalReport> {
    require_identity_start(p, cfg)?;
    let end = p.evaluate(1.0, &cfg.tol)?;
    let sd = spectral::spectral_data(&end, &cfg.tol)?;
    if sd.has_plus_one() {
        return Err(Error::Degenerate);
    }
    let delta = rotation::lift_delta(p, cfg)?.delta;
    let dg = delta_gamma(&sd);
    let (value, residual) = snap(delta + dg, cfg)?;
    Ok(ClassicalReport::new(IndexKind::Cz, value, Route::Direct)
        .with("delta", json!(delta))
        .with("delta_gamma", json!(dg))
        .with("integer_residual", json!(residual)))
}

/// `t ↦ e^{∓εtJ}·Φ(t)`; `sign = +1` turns clockwise.
pub fn rotational_perturbation(p: &SympPath, epsilon: f64, sign: f64) -> Result<SympPath> {
    let r = SympPath::rotation_blocks(vec![vec![0.0, -sign * epsilon]; p.n()])?;
    r.product(p)
}

#[derive(Debug, Clone, Serialize)]
struct Candidate {
    epsilon: f64,
    sign: &'static str,
    value: Option<i64>,
    skipped: Option<String>,
}

fn candidates<F>(p: &SympPath, cfg: &Config, f: F) -> Result<Vec<Candidate>>
where
    F: Fn(&SympPath) -> Result<i64> + Sync + Send,
{
    let grid: Vec<(f64, f64)> = HEURISTIC_EPSILONS
        .iter()
        .flat_map(|&e| [(e, 1.0), (e, -1.0)])
        .collect();
    par::try_map(cfg.execution, &grid, |&(e, s)| {
        let q = rotational_perturbation(p, e, s)?;
        let sign = if s > 0.0 { "minus" } else { "plus" };
        Ok(match f(&q) {
            Ok(v) => Candidate {
                epsilon: e,
                sign,
                value: Some(v),
                skipped: None,
            },
            Err(err @ (Error::Degenerate | Error::L0Degenerate(_))) => Candidate {
                epsilon: e,
                sign,
                value: None,
                skipped: Some(err.kind().to_string()),
            },
            Err(err) => return Err(err),
        })
    })
}

fn min_candidate(c: &[Candidate], what: &str) -> Result<i64> {
    c.iter()
        .filter_map(|c| c.value)
        .min()
        .ok_or_else(|| Error::NoAdmissiblePerturbation(format!("every {what} candidate was degenerate")))
}

pub fn long_index(p: &SympPath, route: LongRoute, cfg: &Config) -> Result<ClassicalReport> {
    require_identity_start(p, cfg)?;
    let comparison = if route != LongRoute::Heuristic {
        let mu = maslov::maslov_index(p, cfg)?.mu;
        let r = spectral::count_r(&p.evaluate(1.0, &cfg.tol)?, &cfg.tol, &cfg.faults)? as i64;
        Some((mu - r, mu, r))
    } else {
        None
    };
    let heuristic = if route != LongRoute::Comparison {
        let c = candidates(p, cfg, |q| Ok(conley_zehnder(q, cfg)?.value))?;
        Some((min_candidate(&c, "Conley-Zehnder")?, c))
    } else {
        None
    };
    match (comparison, heuristic) {
        (Some((v, mu, r)), None) => Ok(ClassicalReport::new(IndexKind::Long, v, Route::Comparison)
            .with("mu", json!(mu))
            .with("r", json!(r))),
        (None, Some((v, c))) => Ok(
            ClassicalReport::new(IndexKind::Long, v, Route::PerturbationHeuristic).with("candidates", json!(c)),
        ),
        (Some((v, mu, r)), Some((h, c))) => {
            if v != h {
                return Err(Error::RouteMismatch(format!(
                    "Long index: comparison {v}, perturbation {h}"
                )));
            }
            Ok(ClassicalReport::new(IndexKind::Long, v, Route::Comparison)
                .with("mu", json!(mu))
                .with("r", json!(r))
                .with("candidates", json!(c)))
        }
        (None, None) => unreachable!("at least one route is selected"),
    }
}

/// `det(U + iV)` of the lower-right and upper-right blocks.
fn l0_phase(m: &Mat) -> Complex64 {
    let (_, v, _, u) = linalg::blocks(m);
    let z = linalg::det_c(&linalg::to_complex(&u).zip_map(&v, |a, b| a + Complex64::new(0.0, b)));
    z / z.norm()
}

fn l0_threshold() -> f64 {
    1e-10
}

pub fn liu_l0_nondegenerate(p: &SympPath, cfg: &Config) -> Result<ClassicalReport> {
    require_identity_start(p, cfg)?;
    let n = p.n();
    let end = p.evaluate(1.0, &cfg.tol)?;
    let (_, v, _, u) = linalg::blocks(end.matrix());
    let det_v = v.clone().lu().determinant();
    if det_v.abs() < l0_threshold() {
        return Err(Error::L0Degenerate(det_v));
    }
    // E₀ runs from J to I through the cos/sin family; it contributes -1/2
    // per block.
    let e0 = -(n as f64) / 2.0;
    let lift = rotation::lift_with(p, cfg, l0_phase)?;
    let phi = -lift.delta;
    // E₁: straight line of symmetric graphs from U·V⁻¹ to 0.
    let v_inv = v.try_inverse().ok_or(Error::L0Degenerate(det_v))?;
    let s1 = &u * &v_inv;
    let s1 = (&s1 + s1.transpose()) * 0.5;
    let e1: f64 = nalgebra::SymmetricEigen::new(s1)
        .eigenvalues
        .iter()
        .map(|&s| -(PI / 2.0 - 1f64.atan2(s)) / PI)
        .sum();
    let (value, residual) = snap(e0 + phi + e1, cfg)?;
    Ok(ClassicalReport::new(IndexKind::LiuL0, value, Route::Direct)
        .with("component", json!(if det_v > 0.0 { "plus" } else { "minus" }))
        .with("det_v", json!(det_v))
        .with("e0", json!(e0))
        .with("path", json!(phi))
        .with("e1", json!(e1))
        .with("integer_residual", json!(residual)))
}

pub fn l0_index(p: &SympPath, cfg: &Config) -> Result<ClassicalReport> {
    require_identity_start(p, cfg)?;
    match liu_l0_nondegenerate(p, cfg) {
        Err(Error::L0Degenerate(_)) => {}
        other => return other,
    }
    let c = candidates(p, cfg, |q| Ok(liu_l0_nondegenerate(q, cfg)?.value))?;
    let v = min_candidate(&c, "L0")?;
    Ok(ClassicalReport::new(IndexKind::LiuL0, v, Route::PerturbationHeuristic).with("candidates", json!(c)))
}

pub fn l0_concavity(p: &SympPath, cfg: &Config) -> Result<ClassicalReport> {
    let long = long_index(p, LongRoute::Comparison, cfg)?;
    let l0 = l0_index(p, cfg)?;
    let route = if l0.route == Route::PerturbationHeuristic {
        Route::PerturbationHeuristic
    } else {
        Route::Comparison
    };
    Ok(
        ClassicalReport::new(IndexKind::Concavity, long.value - l0.value, route)
            .with("mu_l", json!(long.value))
            .with("i_l0", json!(l0.value)),
    )
}

/// A path from `I` to `M`: geodesic to the orthogonal polar factor, then
/// radially out to `M`.
pub fn path_from_identity(m: &SympMatrix, cfg: &Config) -> Result<SympPath> {
    let radial = SympPath::polar_radial(m);
    let o = radial.end();
    let geo = SympPath::unitary_geodesic(&SympMatrix::identity(m.n()), &o)?;
    geo.catenate(&radial.reverse(), &path::loose(cfg))
}

/// `c(M)` computed on an auxiliary path from the identity.
pub fn concavity_of(m: &SympMatrix, cfg: &Config) -> Result<i64> {
    let aux = path_from_identity(m, cfg).map_err(|e| Error::ConcavityUnavailable(e.to_string()))?;
    l0_concavity(&aux, cfg)
        .map(|r| r.value)
        .map_err(|e| Error::ConcavityUnavailable(e.to_string()))
}

/// Long's and Liu's segment indices, in that order.
pub fn sps_indices(p: &SympPath, cfg: &Config) -> Result<[ClassicalReport; 2]> {
    let start = p.evaluate(0.0, &cfg.tol)?;
    let end = p.evaluate(1.0, &cfg.tol)?;
    let mu = maslov::maslov_index(p, cfg)?.mu;
    let r0 = spectral::count_r(&start, &cfg.tol, &cfg.faults)? as i64;
    let r1 = spectral::count_r(&end, &cfg.tol, &cfg.faults)? as i64;
    let c0 = concavity_of(&start, cfg)?;
    let c1 = concavity_of(&end, cfg)?;
    let mu_hat = mu + r0 - r1;
    let i_hat = mu_hat + c0 - c1;
    let long = ClassicalReport::new(IndexKind::SpsLong, mu_hat, Route::Comparison)
        .with("mu", json!(mu))
        .with("r_start", json!(r0))
        .with("r_end", json!(r1));
    let liu = ClassicalReport::new(IndexKind::SpsLiu, i_hat, Route::Comparison)
        .with("mu", json!(mu))
        .with("r_start", json!(r0))
        .with("r_end", json!(r1))
        .with("c_start", json!(c0))
        .with("c_end", json!(c1));
    Ok([long, liu])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cfg() -> Config {
        Config::default()
    }

    #[test]
    fn cz_three_quarter_turn() {
        let r = conley_zehnder(&SympPath::rotation(&[0.0, 1.5 * PI]), &cfg()).unwrap();
        assert_eq!(r.value, 1);
        assert_abs_diff_eq!(r.detail_f64("delta").unwrap(), 1.5, epsilon = 1e-6);
        assert_abs_diff_eq!(r.detail_f64("delta_gamma").unwrap(), -0.5, epsilon = 1e-6);
    }

    #[test]
    fn cz_half_turn() {
        assert_eq!(conley_zehnder(&SympPath::rotation(&[0.0, PI]), &cfg()).unwrap().value, 1);
    }

    #[test]
    fn cz_preconditions() {
        let p = SympPath::rotation(&[0.5, 1.0]);
        assert!(matches!(conley_zehnder(&p, &cfg()), Err(Error::NotFromIdentity(_))));
        let q = SympPath::rotation(&[0.0, 2.0 * PI]);
        assert!(matches!(conley_zehnder(&q, &cfg()), Err(Error::Degenerate)));
    }

    #[test]
    fn long_full_turn_both_routes() {
        let p = SympPath::rotation(&[0.0, 2.0 * PI]);
        let r = long_index(&p, LongRoute::Both, &cfg()).unwrap();
        assert_eq!(r.value, 1);
        assert_eq!(r.detail_i64("mu"), Some(2));
        assert_eq!(r.detail_i64("r"), Some(1));
    }

    #[test]
    fn long_identity() {
        for n in 1..=3 {
            assert_eq!(long_index(&SympPath::identity(n), LongRoute::Comparison, &cfg()).unwrap().value, -(n as i64));
        }
    }

    #[test]
    fn l0_examples() {
        let quarter = SympPath::rotation(&[0.0, PI / 2.0]);
        assert_eq!(liu_l0_nondegenerate(&quarter, &cfg()).unwrap().value, 0);
        let shear = SympPath::shear(1, (0, 1), -1.0).unwrap();
        assert_eq!(liu_l0_nondegenerate(&shear, &cfg()).unwrap().value, 0);
        let big = SympPath::shear(2, (1, 3), -1.0).unwrap();
        assert!(matches!(liu_l0_nondegenerate(&big, &cfg()), Err(Error::L0Degenerate(_))));
        assert_eq!(l0_index(&big, &cfg()).unwrap().value, -1);
        assert_eq!(l0_index(&SympPath::identity(1), &cfg()).unwrap().value, -1);
    }

    #[test]
    fn concavities() {
        let quarter = SympPath::rotation(&[0.0, PI / 2.0]);
        assert_eq!(l0_concavity(&quarter, &cfg()).unwrap().value, 1);
        assert_eq!(l0_concavity(&SympPath::identity(1), &cfg()).unwrap().value, 0);
        let big = SympPath::shear(2, (1, 3), -1.0).unwrap();
        assert_eq!(l0_concavity(&big, &cfg()).unwrap().value, -1);
    }

    #[test]
    fn segment_indices() {
        let big = SympPath::shear(2, (1, 3), -1.0).unwrap();
        let [long, liu] = sps_indices(&big, &cfg()).unwrap();
        assert_eq!(long.value, 0);
        assert_eq!(liu.value, 1);
        let quarter = SympPath::rotation(&[0.0, PI / 2.0]);
        let [long, liu] = sps_indices(&quarter, &cfg()).unwrap();
        assert_eq!(long.value, 2);
        assert_eq!(liu.value, 1);
    }
}
