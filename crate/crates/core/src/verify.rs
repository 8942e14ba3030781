//! Worked examples recomputed end to end, one row per example.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;

use crate::classical::{self, LongRoute};
use crate::config::Config;
use crate::error::Result;
use crate::lagrangian::{self, Endpoint, HalfInteger};
use crate::linalg::{self, Mat, PI};
use crate::maslov;
use crate::path::SympPath;
use crate::spectral::{self, SympMatrix};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub quantity: String,
    pub expected: String,
    pub computed: String,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub name: String,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub rows: Vec<Row>,
}

impl Table {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failed(&self) -> Vec<&str> {
        self.rows.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect()
    }

    pub fn row(&self, name: &str) -> Option<&Row> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            let _ = writeln!(out, "{:<4} {}", if r.pass { "PASS" } else { "FAIL" }, r.name);
            for c in &r.checks {
                let _ = writeln!(
                    out,
                    "       {:<4} {:<28} expected {:<22} computed {}",
                    if c.pass { "ok" } else { "BAD" },
                    c.quantity,
                    c.expected,
                    c.computed
                );
            }
            if let Some(e) = &r.error {
                let _ = writeln!(out, "       error: {e}");
            }
        }
        out
    }
}

#[derive(Default)]
struct Checks(Vec<Check>);

impl Checks {
    fn int(&mut self, q: &str, expected: i64, computed: i64) {
        self.0.push(Check {
            quantity: q.to_string(),
            expected: expected.to_string(),
            computed: computed.to_string(),
            pass: expected == computed,
        });
    }

    fn half(&mut self, q: &str, expected: HalfInteger, computed: HalfInteger) {
        self.0.push(Check {
            quantity: q.to_string(),
            expected: expected.to_string(),
            computed: computed.to_string(),
            pass: expected == computed,
        });
    }

    fn real(&mut self, q: &str, expected: f64, computed: f64, tol: f64) {
        self.0.push(Check {
            quantity: q.to_string(),
            expected: format!("{expected:.9}"),
            computed: format!("{computed:.9}"),
            pass: (expected - computed).abs() <= tol,
        });
    }

    fn text(&mut self, q: &str, expected: String, computed: String) {
        let pass = expected == computed;
        self.0.push(Check {
            quantity: q.to_string(),
            expected,
            computed,
            pass,
        });
    }
}

fn row(name: &str, f: impl FnOnce(&mut Checks) -> Result<()>) -> Row {
    let mut checks = Checks::default();
    let error = f(&mut checks).err().map(|e| format!("{}: {e}", e.kind()));
    let pass = error.is_none() && checks.0.iter().all(|c| c.pass);
    Row {
        name: name.to_string(),
        pass,
        checks: checks.0,
        error,
    }
}

/// `W_{A,B}` as displayed for `A = diag-blocks(π/4, π/3)`,
/// `B = diag-blocks(π/2, 3π/2)`.
pub fn displayed_w() -> Mat {
    let s2 = 0.5f64.sqrt();
    let s3 = 0.75f64.sqrt();
    Mat::from_row_slice(
        4,
        4,
        &[s2, 0.0, -s2, 0.0, 0.0, -0.5, 0.0, s3, s2, 0.0, s2, 0.0, 0.0, -s3, 0.0, -0.5],
    )
}

/// `I₂ ⊕ [[1, −t], [0, 1]]`.
pub fn degenerate_shear() -> SympPath {
    SympPath::shear(2, (1, 3), -1.0).expect("valid shear")
}

/// `I cos(πt/2) + J sin(πt/2)` in dimension `2n`.
pub fn quarter_turn(n: usize) -> SympPath {
    SympPath::rotation_blocks(vec![vec![0.0, PI / 2.0]; n]).expect("valid angles")
}

pub fn verify_paper(cfg: &Config) -> Table {
    let mut rows = Vec::new();

    rows.push(row("Example 3.1", |c| {
        let r = classical::conley_zehnder(&SympPath::rotation(&[0.0, 1.5 * PI]), cfg)?;
        c.int("mu_CZ", 1, r.value);
        c.real("Delta", 1.5, r.detail_f64("delta").unwrap_or(f64::NAN), 1e-6);
        c.real("Delta(gamma)", -0.5, r.detail_f64("delta_gamma").unwrap_or(f64::NAN), 1e-6);
        Ok(())
    }));

    rows.push(row("Remark 3.2", |c| {
        c.int("mu", 1, maslov::maslov_index(&SympPath::rotation(&[PI / 2.0, PI]), cfg)?.mu);
        Ok(())
    }));

    rows.push(row("Example 3.2", |c| {
        let p = SympPath::rotation(&[0.0, 2.0 * PI]);
        let h = classical::long_index(&p, LongRoute::Heuristic, cfg)?;
        let values: BTreeSet<i64> = h
            .details
            .get("candidates")
            .and_then(|v| v.as_array())
            .map(|a| a.iter().filter_map(|x| x.get("value").and_then(|v| v.as_i64())).collect())
            .unwrap_or_default();
        c.text("candidates", "{1, 3}".into(), format!("{values:?}").replace('[', "{").replace(']', "}"));
        c.int("mu_L (perturbation)", 1, h.value);
        let k = classical::long_index(&p, LongRoute::Comparison, cfg)?;
        c.int("mu_L (comparison)", 1, k.value);
        c.int("mu", 2, k.detail_i64("mu").unwrap_or(i64::MIN));
        c.int("r", 1, k.detail_i64("r").unwrap_or(i64::MIN));
        Ok(())
    }));

    rows.push(row("Example 4.1", |c| {
        let a = SympMatrix::trusted(linalg::block_rotation(&[PI / 4.0, PI / 3.0]));
        let b = SympMatrix::trusted(linalg::block_rotation(&[PI / 2.0, 1.5 * PI]));
        let w = maslov::extension_target(&a, &b, cfg)?;
        c.real("max |W - displayed|", 0.0, linalg::max_abs(&(w.matrix() - displayed_w())), 1e-9);
        let db = maslov::delta_beta(&[PI / 2.0, 1.5 * PI], &[PI / 4.0, 4.0 * PI / 3.0], &cfg.faults)?;
        c.real("Delta(beta)", -5.0 / 12.0, db, 1e-6);
        Ok(())
    }));

    rows.push(row("Example 5.1", |c| {
        let p = SympPath::rotation(&[0.0, 1.5 * PI]);
        let mu = maslov::maslov_index(&p, cfg)?.mu;
        c.int("mu", 2, mu);
        c.int("mu_CZ", 1, classical::conley_zehnder(&p, cfg)?.value);
        let end = p.evaluate(1.0, &cfg.tol)?;
        c.int("r(Phi(1))", 1, spectral::count_r(&end, &cfg.tol, &cfg.faults)? as i64);
        let rs = lagrangian::rs_index_symp(&p, cfg)?.value;
        c.half("mu_RS", HalfInteger(3), rs);
        let psi = SympPath::rotation(&[-cfg.theta_max, 1.5 * PI]);
        c.int("mu_CLM(Psi)", 2, lagrangian::clm_index(&psi, cfg)?.value);
        let blocks = [p.clone()];
        let s0 = lagrangian::s_count(&blocks, Endpoint::Start)? as i64;
        let s1 = lagrangian::s_count(&blocks, Endpoint::End)? as i64;
        c.int("s(0)", 1, s0);
        c.int("s(1)", 0, s1);
        c.half("mu - (s(0) - s(1))/2", rs, HalfInteger(2 * mu - (s0 - s1)));
        Ok(())
    }));

    rows.push(row("Example 5.2", |c| {
        let p = degenerate_shear();
        c.int("mu", 0, maslov::maslov_index(&p, cfg)?.mu);
        c.int("mu_L", -2, classical::long_index(&p, LongRoute::Comparison, cfg)?.value);
        c.int("i_L0", -1, classical::l0_index(&p, cfg)?.value);
        let [long, liu] = classical::sps_indices(&p, cfg)?;
        c.int("hat i_L0", 1, liu.value);
        c.int("hat mu_L", 0, long.value);
        Ok(())
    }));

    for n in [1usize, 2] {
        rows.push(row(&format!("Remark 3.3 (n = {n})"), |c| {
            let p = quarter_turn(n);
            let n = n as i64;
            c.int("i_L0", 0, classical::l0_index(&p, cfg)?.value);
            c.int("mu_L", n, classical::long_index(&p, LongRoute::Comparison, cfg)?.value);
            let [long, liu] = classical::sps_indices(&p, cfg)?;
            c.int("hat i_L0", n, liu.value);
            c.int("hat mu_L", 2 * n, long.value);
            Ok(())
        }));
    }

    for n in 1..=3usize {
        rows.push(row(&format!("Constant identity (n = {n})"), |c| {
            let p = SympPath::identity(n);
            c.int("mu_L", -(n as i64), classical::long_index(&p, LongRoute::Comparison, cfg)?.value);
            c.int("i_L0", -(n as i64), classical::l0_index(&p, cfg)?.value);
            Ok(())
        }));
    }

    Table { rows }
}
