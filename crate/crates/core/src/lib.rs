//! Maslov-type indices for general paths of real symplectic matrices.
//!
//! The crate computes the rotation-number based index `μ` for paths in
//! `Sp(2n, ℝ)` with arbitrary endpoints, together with the classical indices
//! it is compared against (Conley–Zehnder, Long, Liu's `L₀`-index, the
//! segment indices, Robbin–Salamon and Cappell–Lee–Miller).
//!
//! Coordinates on `ℝ^{2n}` are ordered `(x₁,…,xₙ,y₁,…,yₙ)` and the standard
//! form is `J₀ = [[0, I], [-I, 0]]`. Orthogonal symplectic matrices are
//! written `[[X, -Y], [Y, X]]` and identified with the unitary `X + iY`.

pub mod classical;
pub mod config;
pub mod error;
pub mod lagrangian;
pub mod linalg;
pub mod maslov;
pub mod par;
pub mod path;
pub mod random;
pub mod rotation;
pub mod spectral;
pub mod verify;

pub use config::{Config, Execution, Faults, RefineOptions, Tolerances};
pub use error::{Error, Result};
pub use path::SympPath;
pub use spectral::SympMatrix;
