use proptest::prelude::*;

use sympindex::classical::{self, LongRoute};
use sympindex::lagrangian::{self, Endpoint, FramePath, LagrangianFrame};
use sympindex::linalg::{self, Mat, PI};
use sympindex::maslov;
use sympindex::par;
use sympindex::path::{self, SympPath};
use sympindex::random::PathGen;
use sympindex::rotation;
use sympindex::spectral::{self, ClusterKind, SympMatrix};
use sympindex::{Config, Error, Execution, Tolerances};

const SWEEP: u64 = 200;

fn cfg() -> Config {
    Config::default()
}

fn tol() -> Tolerances {
    Tolerances::default()
}

/// Runs `f` over `count` seeds in parallel and returns the outcomes.
fn sweep<R: Send>(count: u64, f: impl Fn(u64) -> R + Sync + Send) -> Vec<R> {
    let seeds: Vec<u64> = (0..count).collect();
    par::map(Execution::Parallel, &seeds, |&s| f(s))
}

/// Asserts that at least `min_ok` of the outcomes succeeded and that none
/// failed a check.
fn tally(name: &str, outcomes: Vec<Result<Option<String>, Error>>, min_ok: usize) {
    let mut ok = 0;
    let mut errors = Vec::new();
    let mut broken = Vec::new();
    for (seed, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(None) => ok += 1,
            Ok(Some(msg)) => broken.push(format!("seed {seed}: {msg}")),
            Err(e) => errors.push(format!("seed {seed}: {e}")),
        }
    }
    println!("{name}: {ok} checked, {} skipped on errors", errors.len());
    assert!(broken.is_empty(), "{name}: {broken:#?}");
    assert!(ok >= min_ok, "{name}: only {ok} succeeded; errors {errors:#?}");
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Option<String> {
    if cond {
        None
    } else {
        Some(msg())
    }
}

// ---------------------------------------------------------------------------
// spectral

fn random_matrix(seed: u64, max_n: usize) -> SympMatrix {
    let mut g = PathGen::new(seed);
    let n = g.dim(max_n);
    g.symplectic(n, 1.2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn rho_is_unimodular_and_pairs_close(seed in any::<u64>()) {
        let m = random_matrix(seed, 5);
        let Ok(sd) = spectral::spectral_data(&m, &tol()) else { return Ok(()) };
        prop_assert!((sd.rho.norm() - 1.0).abs() < 1e-9);
        for c in &sd.clusters {
            // λ has partners 1/λ, λ̄, 1/λ̄ of equal multiplicity
            let inv = 1.0 / c.value;
            for partner in [inv, c.value.conj(), inv.conj()] {
                let mult: usize = sd.clusters.iter()
                    .filter(|d| (d.value - partner).norm() <= 1e-5 * partner.norm().max(1.0))
                    .map(|d| d.multiplicity)
                    .sum();
                prop_assert_eq!(mult, c.multiplicity);
            }
        }
    }

    #[test]
    fn rho_naturality(seed in any::<u64>()) {
        let mut g = PathGen::new(seed);
        let n = g.dim(5);
        let m = g.symplectic(n, 1.2);
        let t = g.symplectic(n, 0.6);
        let t_inv = -(linalg::j0(n) * t.matrix().transpose() * linalg::j0(n));
        let conj = SympMatrix::with_tolerance(t.matrix() * m.matrix() * t_inv, 1e-6).unwrap();
        if let (Ok(a), Ok(b)) = (spectral::rho(&m, &tol()), spectral::rho(&conj, &tol())) {
            prop_assert!((a - b).norm() < 1e-6, "{} vs {}", a, b);
        }
    }

    #[test]
    fn rho_product(seed in any::<u64>()) {
        let mut g = PathGen::new(seed);
        let (n1, n2) = (g.dim(3), g.dim(2));
        let a = g.symplectic(n1, 1.2);
        let b = g.symplectic(n2, 1.2);
        let sum = SympMatrix::with_tolerance(linalg::symp_direct_sum(a.matrix(), b.matrix()), 1e-6).unwrap();
        if let (Ok(x), Ok(y), Ok(z)) = (spectral::rho(&a, &tol()), spectral::rho(&b, &tol()), spectral::rho(&sum, &tol())) {
            prop_assert!((x * y - z).norm() < 1e-6);
        }
    }

    #[test]
    fn rho_determinant(seed in any::<u64>()) {
        let mut g = PathGen::new(seed);
        let n = g.dim(5);
        let m = g.symplectic(n, 1.5);
        let (_, o) = spectral::polar_decompose(&m).unwrap();
        let u = linalg::unitary_of(o.matrix());
        if let Ok(r) = spectral::rho(&o, &tol()) {
            prop_assert!((r - linalg::det_c(&u)).norm() < 1e-6);
        }
    }

    #[test]
    fn rho_normalization(seed in any::<u64>()) {
        let mut g = PathGen::new(seed);
        let n = g.dim(5);
        // hyperbolic: T·diag(e^{s}, e^{-s})·T⁻¹ with signs
        let mut d = Mat::zeros(2 * n, 2 * n);
        for k in 0..n {
            let s = g.uniform(0.2, 2.0);
            let sign = if g.uniform(0.0, 1.0) < 0.5 { -1.0 } else { 1.0 };
            d[(k, k)] = sign * s.exp();
            d[(n + k, n + k)] = sign * (-s).exp();
        }
        let t = g.symplectic(n, 0.6);
        let t_inv = -(linalg::j0(n) * t.matrix().transpose() * linalg::j0(n));
        let m = SympMatrix::with_tolerance(t.matrix() * d * t_inv, 1e-6).unwrap();
        if let Ok(r) = spectral::rho(&m, &tol()) {
            prop_assert!(r.im.abs() < 1e-6 && (r.re.abs() - 1.0).abs() < 1e-6, "rho = {}", r);
        }
    }

    #[test]
    fn count_r_matches_recount(seed in any::<u64>()) {
        let m = random_matrix(seed, 5);
        let Ok(sd) = spectral::spectral_data(&m, &tol()) else { return Ok(()) };
        let ev = linalg::eigenvalues(m.matrix()).unwrap();
        let plus_one = ev.iter().filter(|z| (*z - 1.0).norm() < 1e-6).count();
        // elliptic eigenvalues below the real axis of positive Krein type
        let below: usize = sd.clusters.iter()
            .filter(|c| c.kind == ClusterKind::Elliptic && c.value.im < 0.0)
            .map(|c| c.m_plus)
            .sum();
        let r = spectral::count_r(&m, &tol(), &Default::default()).unwrap();
        prop_assert_eq!(r, below + plus_one / 2);
    }

    #[test]
    fn polar_factors(seed in any::<u64>()) {
        let m = random_matrix(seed, 5);
        let (p, o) = spectral::polar_decompose(&m).unwrap();
        let p = p.matrix();
        let o = o.matrix();
        let dim = p.nrows();
        prop_assert!(linalg::max_abs(&(p - p.transpose())) < 1e-8);
        prop_assert!(p.clone().symmetric_eigenvalues().iter().all(|&x| x > 0.0));
        prop_assert!(linalg::symplectic_residual(p) < 1e-8 * linalg::max_abs(p).powi(2).max(1.0));
        prop_assert!(linalg::max_abs(&(o.transpose() * o - Mat::identity(dim, dim))) < 1e-8);
        prop_assert!(linalg::symplectic_residual(o) < 1e-8);
        prop_assert!(linalg::max_abs(&(p * o - m.matrix())) <= 1e-8 * linalg::max_abs(m.matrix()).max(1.0));
    }
}

// ---------------------------------------------------------------------------
// paths

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn catenation_second_half(seed in any::<u64>(), s in 0.0f64..=1.0) {
        let mut g = PathGen::new(seed);
        let n = g.dim(3);
        let p = g.block_path(n);
        let q = SympPath::constant(p.end()).product(&g.from_identity_path(n)).unwrap();
        let c = p.catenate(&q, &tol()).unwrap();
        prop_assert!(linalg::max_abs(&(c.eval(0.5 + s / 2.0) - q.eval(s))) < 1e-12);
    }

    #[test]
    fn double_reverse(seed in any::<u64>()) {
        let mut g = PathGen::new(seed);
        let n = g.dim(3);
        let p = g.general_path(n);
        let rr = p.reverse().reverse();
        for _ in 0..100 {
            let t = g.uniform(0.0, 1.0);
            prop_assert_eq!(rr.eval(t), p.eval(t));
        }
    }

    #[test]
    fn global_perturbation_factor(seed in any::<u64>(), theta in 1e-4f64..0.5) {
        let mut g = PathGen::new(seed);
        let n = g.dim(3);
        let p = g.general_path(n);
        let q = p.perturb_global(theta);
        let want = linalg::rotation_minus(n, theta);
        for _ in 0..100 {
            let t = g.uniform(0.0, 1.0);
            let m = p.eval(t);
            let inv = -(linalg::j0(n) * m.transpose() * linalg::j0(n));
            prop_assert!(linalg::max_abs(&(q.eval(t) * inv - &want)) < 1e-10 * linalg::max_abs(&m).powi(2).max(1.0));
        }
    }
}

#[test]
fn tails_have_zero_rotation() {
    let out = sweep(SWEEP / 2, |seed| {
        let mut g = PathGen::new(seed);
        let n = g.dim(3);
        let m = g.general_path(n).end();
        let tail = path::build_tail(&m, &cfg())?;
        let d = rotation::lift_delta(&tail.path, &cfg())?.delta;
        Ok(check(d.abs() <= 1e-6 && tail.delta.abs() <= 1e-6, || {
            format!("tail rotation {d}, recorded {}", tail.delta)
        }))
    });
    tally("tail rotation", out, 90);
}

// ---------------------------------------------------------------------------
// rotation numbers

#[test]
fn delta_catenation_and_reparam() {
    let out = sweep(SWEEP, |seed| {
        let mut g = PathGen::new(seed);
        let n = g.dim(3);
        let p = g.general_path(n);
        let q = SympPath::constant(p.end()).product(&g.from_identity_path(n))?;
        let c = p.catenate(&q, &tol())?;
        let (dp, dq, dc) = (
            rotation::lift_delta(&p, &cfg())?.delta,
            rotation::lift_delta(&q, &cfg())?.delta,
            rotation::lift_delta(&c, &cfg())?.delta,
        );
        let dr = rotation::lift_delta(&p.reparam(g.reparam())?, &cfg())?.delta;
        Ok(check((dc - dp - dq).abs() < 1e-6 && (dr - dp).abs() < 1e-6, || {
            format!("delta p {dp}, q {dq}, p#q {dc}, reparam {dr}")
        }))
    });
    tally("delta catenation/reparam", out, SWEEP as usize);
}

#[test]
fn delta_conjugation_and_direct_sum() {
    let out = sweep(SWEEP, |seed| {
        let mut g = PathGen::new(seed);
        let n = g.dim(2);
        let p = g.general_path(n);
        let q = g.general_path(1);
        let t = g.symplectic(n, 0.5);
        let dp = rotation::lift_delta(&p, &cfg())?.delta;
        let dq = rotation::lift_delta(&q, &cfg())?.delta;
        let dt = rotation::lift_delta(&p.conjugate(&t)?, &cfg())?.delta;
        let ds = rotation::lift_delta(&p.direct_sum(&q), &cfg())?.delta;
        Ok(check((dt - dp).abs() < 1e-6 && (ds - dp - dq).abs() < 1e-6, || {
            format!("delta p {dp}, conj {dt}, q {dq}, sum {ds}")
        }))
    });
    tally("delta conjugation/direct sum", out, SWEEP as usize);
}

/// `A·R(2πk t)·A⁻¹·M` style loops; with `conjugate_only` the loop is
/// `T(t)·M·T(t)⁻¹` and never meets the cycle when `M` avoids it.
fn conjugation_loop(g: &mut PathGen, n: usize, m: &SympMatrix) -> SympPath {
    let a = g.symplectic(n, 0.4);
    let turns: Vec<Vec<f64>> = (0..n).map(|_| vec![0.0, 2.0 * PI * (g.dim(3) as f64 - 2.0)]).collect();
    let back: Vec<Vec<f64>> = turns.iter().map(|c| c.iter().map(|x| -x).collect()).collect();
    let r = SympPath::rotation_blocks(turns).unwrap().conjugate(&a).unwrap();
    let r_inv = SympPath::rotation_blocks(back).unwrap().conjugate(&a).unwrap();
    r.product(&SympPath::constant(m.clone())).unwrap().product(&r_inv).unwrap()
}

#[test]
fn loops_have_integer_delta() {
    let out = sweep(SWEEP, |seed| {
        let mut g = PathGen::new(seed);
        let n = g.dim(3);
        let a = g.symplectic(n, 0.4);
        let turns: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let s = g.start_angle();
                vec![s, 2.0 * PI * (g.dim(5) as f64 - 3.0)]
            })
            .collect();
        let lp = SympPath::rotation_blocks(turns.clone())?
            .conjugate(&a)?
            .product(&SympPath::constant(g.symplectic(n, 0.3)))?;
        let d = rotation::check_loop_integral(&lp, &cfg())?;
        let want: f64 = turns.iter().map(|c| c[1] / PI).sum();
        Ok(check((d as f64 - want).abs() < 1e-6, || format!("loop delta {d}, expected {want}")))
    });
    tally("loop integrality", out, SWEEP as usize);
}

#[test]
fn loops_off_the_cycle_have_zero_delta() {
    let out = sweep(SWEEP, |seed| {
        let mut g = PathGen::new(seed);
        let n = g.dim(3);
        // elliptic or hyperbolic base point away from ±1
        let angles: Vec<f64> = (0..n).map(|_| g.uniform(0.3, PI - 0.3)).collect();
        let base = SympMatrix::with_tolerance(linalg::block_rotation(&angles), 1e-9)?;
        let t = g.symplectic(n, 0.5);
        let m = SympMatrix::with_tolerance(SympPath::constant(base).conjugate(&t)?.eval(0.0), 1e-6)?;
        let lp = conjugation_loop(&mut g, n, &m);
        let d = rotation::lift_delta(&lp, &cfg())?.delta;
        Ok(check(d.abs() < 1e-6, || format!("off-cycle loop delta {d}")))
    });
    tally("loops off the cycle", out, SWEEP as usize);
}

#[test]
fn delta_prime_on_normal_endpoints() {
    let out = sweep(SWEEP, |seed| {
        let mut g = PathGen::new(seed);
        let n = g.dim(3);
        let p = g.block_path(n);
        let d = rotation::lift_delta(&p, &cfg())?.delta;
        let dp = rotation::delta_prime(&p, &cfg())?;
        Ok(check((d - dp).abs() < 1e-6, || format!("delta {d}, delta' {dp}")))
    });
    tally("delta prime", out, SWEEP as usize);
}

// ---------------------------------------------------------------------------
// Maslov index

#[test]
fn mu_integrality_and_theta_independence() {
    let out = sweep(SWEEP, |seed| {
        let mut g = PathGen::new(seed);
        let n = g.dim(3);
        let p = g.general_path(n);
        let r = maslov::maslov_index(&p, &cfg())?;
        let half = maslov::maslov_index_with_theta(&p, &cfg(), Some(r.theta / 2.0))?;
        let fifth = maslov::maslov_index_with_theta(&p, &cfg(), Some(r.theta / 5.0))?;
        Ok(check(
            r.integer_residual <= 1e-6 && half.mu == r.mu && fifth.mu == r.mu,
            || format!("mu {} / {} / {}, residual {}", r.mu, half.mu, fifth.mu, r.integer_residual),
        ))
    });
    tally("mu integrality/theta", out, 190);
}

#[test]
fn mu_segments_add_up() {
    let out = sweep(SWEEP, |seed| {
        let mut g = PathGen::new(seed);
        let n = g.dim(3);
        let p = g.general_path(n);
        let mu = maslov::maslov_index(&p, &cfg())?.mu;
        // 20 random cuts; additivity at each cut makes the pieces sum to μ
        let mut cuts: Vec<f64> = (0..20).map(|_| g.uniform(0.02, 0.98)).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.insert(0, 0.0);
        cuts.push(1.0);
        let mut pieces = Vec::new();
        for w in cuts.windows(2) {
            pieces.push(maslov::maslov_index(&p.segment(w[0], w[1])?, &cfg())?.mu);
        }
        let total: i64 = pieces.iter().sum();
        Ok(check(total == mu, || format!("pieces {pieces:?} sum to {total}, mu {mu}")))
    });
    tally("mu catenation", out, 190);
}

#[test]
fn mu_reparam_and_direct_sum() {
    let out = sweep(SWEEP, |seed| {
        let mut g = PathGen::new(seed);
        let n = g.dim(2);
        let p = g.general_path(n);
        let q = g.general_path(1);
        let mp = maslov::maslov_index(&p, &cfg())?.mu;
        let mq = maslov::maslov_index(&q, &cfg())?.mu;
        let mr = maslov::maslov_index(&p.reparam(g.reparam())?, &cfg())?.mu;
        let ms = maslov::maslov_index(&p.direct_sum(&q), &cfg())?.mu;
        Ok(check(mr == mp && ms == mp + mq, || {
            format!("mu p {mp}, reparam {mr}, q {mq}, sum {ms}")
        }))
    });
    tally("mu reparam/direct sum", out, 190);
}

// ---------------------------------------------------------------------------
// classical indices

#[test]
fn cz_equals_mu_minus_r() {
    let out = sweep(SWEEP, |seed| {
        let mut g = PathGen::new(seed);
        let n = g.dim(3);
        let p = g.from_identity_path(n);
        let cz = match classical::conley_zehnder(&p, &cfg()) {
            Err(Error::Degenerate) => return Ok(None),
            other => other?.value,
        };
        let mu = maslov::maslov_index(&p, &cfg())?.mu;
        let r = spectral::count_r(&p.end(), &tol(), &Default::default())? as i64;
        Ok(check(cz == mu - r, || format!("cz {cz}, mu {mu}, r {r}")))
    });
    tally("Conley-Zehnder comparison", out, 190);
}

#[test]
fn long_routes_agree_on_elliptic_paths() {
    let mut outs = Vec::new();
    for k in 1..=3 {
        let p = SympPath::rotation(&[0.0, 2.0 * PI * k as f64]);
        let r = classical::long_index(&p, LongRoute::Both, &cfg()).map(|r| r.value);
        assert_eq!(r, Ok(2 * k - 1));
    }
    outs.extend(sweep(SWEEP / 2, |seed| {
        let mut g = PathGen::new(seed);
        let n = g.dim(3);
        let theta = (0..n).map(|_| g.monotone_angle(0.0)).collect();
        let p = SympPath::rotation_blocks(theta)?;
        let t = g.symplectic(n, 0.5);
        let p = p.conjugate(&t)?;
        match classical::long_index(&p, LongRoute::Both, &cfg()) {
            Ok(_) => Ok(None),
            Err(Error::RouteMismatch(m)) => Ok(Some(m)),
            Err(e) => Err(e),
        }
    }));
    tally("Long routes", outs, 90);
}

#[test]
fn segment_indices_from_identity() {
    let out = sweep(SWEEP / 2, |seed| {
        let mut g = PathGen::new(seed);
        let n = g.dim(3);
        let p = g.from_identity_path(n);
        let long = classical::long_index(&p, LongRoute::Comparison, &cfg())?.value;
        let l0 = classical::l0_index(&p, &cfg())?.value;
        let [hat_long, hat_liu] = classical::sps_indices(&p, &cfg())?;
        let n = n as i64;
        Ok(check(hat_long.value == long + n && hat_liu.value == l0 + n, || {
            format!(
                "long {long}, l0 {l0}, hat long {}, hat liu {}",
                hat_long.value, hat_liu.value
            )
        }))
    });
    tally("segment indices", out, 90);
}

#[test]
fn delta_gamma_is_conjugation_invariant() {
    let out = sweep(SWEEP, |seed| {
        let mut g = PathGen::new(seed);
        let n = g.dim(3);
        let m = g.from_identity_path(n).end();
        let t = g.symplectic(n, 0.5);
        let conj = SympPath::constant(m.clone()).conjugate(&t)?.eval(0.0);
        let conj = SympMatrix::with_tolerance(conj, 1e-6)?;
        let a = classical::delta_gamma(&spectral::spectral_data(&m, &tol())?);
        let b = classical::delta_gamma(&spectral::spectral_data(&conj, &tol())?);
        Ok(check((a - b).abs() < 1e-6, || format!("delta gamma {a} vs {b}")))
    });
    tally("delta gamma naturality", out, 190);
}

// ---------------------------------------------------------------------------
// Lagrangian indices

#[test]
fn clm_equals_mu_on_block_paths() {
    let out = sweep(SWEEP, |seed| {
        let mut g = PathGen::new(seed);
        let n = g.dim(3);
        let o = g.block_path(n);
        let clm = lagrangian::clm_index(&o, &cfg())?.value;
        let l1 = FramePath::Constant(LagrangianFrame::horizontal(n));
        let l2 = FramePath::image(o.clone(), LagrangianFrame::horizontal(n))?;
        let pair = lagrangian::clm_index_pair(&l1, &l2, &cfg())?.value;
        let mu = maslov::maslov_index(&o, &cfg())?.mu;
        Ok(check(clm == mu && pair == mu, || format!("clm {clm}, pair {pair}, mu {mu}")))
    });
    tally("CLM comparison", out, SWEEP as usize);
}

#[test]
fn rs_on_diagonal_paths() {
    let out = sweep(SWEEP, |seed| {
        let mut g = PathGen::new(seed);
        let n = g.dim(3);
        let p = g.diagonal_path(n);
        let rs = lagrangian::rs_index_symp(&p, &cfg())?;
        let mu = maslov::maslov_index(&p, &cfg())?.mu;
        let s0 = lagrangian::s_count_diagonal(&p, Endpoint::Start, &tol())? as i64;
        let s1 = lagrangian::s_count_diagonal(&p, Endpoint::End, &tol())? as i64;
        let fine = rs.crossings.iter().all(|c| c.signature == c.signature_fine);
        Ok(check(rs.value.twice() == 2 * mu - (s0 - s1) && fine, || {
            format!("rs {}, mu {mu}, s0 {s0}, s1 {s1}", rs.value)
        }))
    });
    tally("RS comparison", out, SWEEP as usize);
}

#[test]
fn rs_reparam_invariance_and_refinement() {
    let out = sweep(SWEEP / 2, |seed| {
        let mut g = PathGen::new(seed);
        let n = g.dim(3);
        let t = g.symplectic(n, 0.4);
        let p = g.diagonal_path(n).conjugate(&t)?;
        let rs = lagrangian::rs_index_symp(&p, &cfg())?;
        let rr = lagrangian::rs_index_symp(&p.reparam(g.reparam())?, &cfg())?;
        let fine = rs.crossings.iter().all(|c| c.signature == c.signature_fine);
        Ok(check(rs.value == rr.value && fine, || {
            format!("rs {} vs reparam {}", rs.value, rr.value)
        }))
    });
    tally("RS reparam", out, 90);
}

#[test]
fn osp_cycle_correspondence() {
    let out = sweep(SWEEP / 2, |seed| {
        let mut g = PathGen::new(seed);
        let n = g.dim(3);
        let p = g.general_path(n);
        let red = lagrangian::sp_to_osp(&p, &cfg())?;
        let mut bad = Vec::new();
        for &t in red.ts.iter().step_by(7) {
            let (dist, sigma) = lagrangian::cycle_distances(&p, &red, t);
            if (dist < 1e-7) != (sigma < 1e-7) || (dist.sin() - sigma).abs() > 1e-8 {
                bad.push(format!("t = {t}: dist {dist}, sigma {sigma}"));
            }
        }
        Ok(check(bad.is_empty(), || bad.join("; ")))
    });
    tally("cycle correspondence", out, 90);
}
