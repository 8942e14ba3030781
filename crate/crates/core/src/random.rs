//! Seeded generators of symplectic matrices and paths.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{self, Mat, PI};
use crate::path::{Poly, SympPath};
use crate::spectral::SympMatrix;

pub struct PathGen {
    rng: ChaCha8Rng,
}

impl PathGen {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    pub fn dim(&mut self, max_n: usize) -> usize {
        self.rng.gen_range(1..=max_n)
    }

    pub fn symmetric(&mut self, dim: usize, scale: f64) -> Mat {
        let a = Mat::from_fn(dim, dim, |_, _| self.rng.gen_range(-scale..scale));
        (&a + a.transpose()) * 0.5
    }

    /// `exp(J₀S)` for a random symmetric `S`.
    pub fn symplectic(&mut self, n: usize, scale: f64) -> SympMatrix {
        let s = self.symmetric(2 * n, scale);
        SympMatrix::trusted((linalg::j0(n) * s).exp())
    }

    /// Strictly monotone angle polynomial of degree ≤ 3 with speed at
    /// least `0.3`.
    pub fn monotone_angle(&mut self, start: f64) -> Poly {
        let sign = if self.rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let c1 = self.rng.gen_range(0.3..3.0);
        let c2 = self.rng.gen_range(0.0..2.0);
        let c3 = self.rng.gen_range(0.0..2.0);
        vec![start, sign * c1, sign * c2, sign * c3]
    }

    /// Start angle: a quarter-grid point half the time, generic otherwise.
    pub fn start_angle(&mut self) -> f64 {
        if self.rng.gen_bool(0.5) {
            self.rng.gen_range(-2i32..=2) as f64 * PI / 2.0
        } else {
            self.rng.gen_range(-PI..PI)
        }
    }

    /// Orthogonal block path with monotone polynomial angles.
    pub fn block_path(&mut self, n: usize) -> SympPath {
        let theta = (0..n)
            .map(|_| {
                let a = self.start_angle();
                self.monotone_angle(a)
            })
            .collect();
        SympPath::rotation_blocks(theta).expect("valid angles")
    }

    /// Direct sum of single-block rotation paths.
    pub fn diagonal_path(&mut self, n: usize) -> SympPath {
        let mut p = self.block_path(1);
        for _ in 1..n {
            p = p.direct_sum(&self.block_path(1));
        }
        p
    }

    /// `exp(J₀(S₁t + S₂t²))`, a path from the identity.
    pub fn hamiltonian_path(&mut self, n: usize, scale: f64) -> SympPath {
        let z = Mat::zeros(2 * n, 2 * n);
        let s1 = self.symmetric(2 * n, scale);
        let s2 = self.symmetric(2 * n, scale / 2.0);
        SympPath::exponential(vec![z, s1, s2]).expect("symmetric coefficients")
    }

    /// One of: conjugated block path, block path times a Hamiltonian flow,
    /// a shear composed with a rotation, or a Hamiltonian path moved off the
    /// identity.
    pub fn general_path(&mut self, n: usize) -> SympPath {
        match self.rng.gen_range(0..4) {
            0 => {
                let t = self.symplectic(n, 0.4);
                self.block_path(n).conjugate(&t).expect("same dimension")
            }
            1 => {
                let h = self.hamiltonian_path(n, 0.8);
                self.block_path(n).product(&h).expect("same dimension")
            }
            2 => {
                let i = self.rng.gen_range(0..n);
                let j = self.rng.gen_range(0..n);
                let coeff = self.rng.gen_range(-2.0..2.0);
                let shear = SympPath::shear(n, (i, n + j), coeff).expect("entry in range");
                shear.product(&self.block_path(n)).expect("same dimension")
            }
            _ => {
                let m = SympPath::constant(self.symplectic(n, 0.5));
                self.hamiltonian_path(n, 1.0).product(&m).expect("same dimension")
            }
        }
    }

    /// Path from the identity: a block path started at zero angles times a
    /// Hamiltonian flow.
    pub fn from_identity_path(&mut self, n: usize) -> SympPath {
        let theta = (0..n).map(|_| self.monotone_angle(0.0)).collect();
        let r = SympPath::rotation_blocks(theta).expect("valid angles");
        let h = self.hamiltonian_path(n, 0.6);
        r.product(&h).expect("same dimension")
    }

    /// Monotone reparameterization `σ(0) = 0`, `σ(1) = 1`.
    pub fn reparam(&mut self) -> Poly {
        let a = self.rng.gen_range(0.2..1.8);
        // σ(t) = a t + (1 − a) t², increasing for a ∈ (0, 2)
        vec![0.0, a, 1.0 - a]
    }
}
