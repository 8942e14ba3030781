use serde::{Deserialize, Serialize};

/// Numerical thresholds shared by every module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Max-norm residual of `MᵀJ₀M − J₀` accepted for a symplectic matrix.
    pub symp: f64,
    /// Relative threshold for rank and signature decisions.
    pub eig: f64,
    /// `| |λ| − 1 |` below this counts as the unit circle.
    pub circle: f64,
    /// Eigenvalues closer than this (relative) are merged.
    pub cluster: f64,
    /// Snapping tolerance for integer and half-integer results.
    pub int: f64,
    /// Symplecticity tolerance for points evaluated along a path.
    pub path: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            symp: 1e-9,
            eig: 1e-9,
            circle: 1e-8,
            cluster: 1e-7,
            int: 1e-6,
            path: 1e-7,
        }
    }
}

/// Adaptive sampling of `ρ` along a path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefineOptions {
    pub initial_samples: usize,
    pub max_depth: u32,
    /// Largest accepted phase change between neighbouring samples (radians).
    pub max_phase_step: f64,
    /// Largest accepted `|ρ(a) − ρ(b)|` between neighbouring samples.
    pub max_chord: f64,
}

impl Default for RefineOptions {
    fn default() -> Self {
        Self {
            initial_samples: 256,
            max_depth: 24,
            max_phase_step: std::f64::consts::FRAC_PI_2,
            max_chord: 0.5,
        }
    }
}

/// Whether grid evaluations fan out over the rayon pool.
///
/// `Parallel` silently degrades to `Sequential` when the crate is built
/// without the `parallel` feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

/// Deliberate rule flips used to check that the paper-example table notices
/// a broken build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Faults {
    /// Move the extension the long way round instead of inside its half-circle.
    pub flip_delta_beta: bool,
    /// Count `±1` eigenvalues with multiplicity instead of by pairs in `r`.
    pub flip_r_pair_rule: bool,
}

impl Faults {
    pub fn any(&self) -> bool {
        self.flip_delta_beta || self.flip_r_pair_rule
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub tol: Tolerances,
    pub refine: RefineOptions,
    /// Upper bound for the global perturbation angle.
    pub theta_max: f64,
    pub execution: Execution,
    #[serde(skip_serializing_if = "is_default_faults", default)]
    pub faults: Faults,
}

fn is_default_faults(f: &Faults) -> bool {
    !f.any()
}

impl Default for Config {
    fn default() -> Self {
        Self {
            tol: Tolerances::default(),
            refine: RefineOptions::default(),
            theta_max: 1e-3,
            execution: Execution::default(),
            faults: Faults::default(),
        }
    }
}

impl Config {
    pub fn sequential() -> Self {
        Self {
            execution: Execution::Sequential,
            ..Self::default()
        }
    }
}
