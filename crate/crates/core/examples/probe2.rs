use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use sympindex::random::PathGen;
use sympindex::Config;
fn main() {
    let cfg = Config::default();
    let mut g = PathGen::new(0);
    let n = g.dim(2);
    let p = g.general_path(n);
    let _q = g.general_path(1);
    let t = g.symplectic(n, 0.5);
    let s = p.conjugate(&t).unwrap();
    let m = s.evaluate(0.7890625, &cfg.tol).unwrap().into_matrix();
    let d = m.nrows();
    for eps in [f64::EPSILON, 1e-14, 1e-13, 1e-12] {
        for sh in [0.0, 1.3, -2.1, 2.0] {
            print!("{}", Schur::try_new(&m + DMatrix::identity(d, d) * sh, eps, 2000).is_some() as u8);
        }
        println!();
    }
    println!("T {}", Schur::try_new(m.transpose(), f64::EPSILON, 2000).is_some());
    let c = m.map(|x| Complex64::new(x, 0.0));
    println!("C {:?}", Schur::try_new(c, f64::EPSILON, 2000).map(|s| s.eigenvalues()));
    let h = nalgebra::linalg::Hessenberg::new(m.clone());
    println!("H {}", Schur::try_new(h.h(), f64::EPSILON, 2000).is_some());
}
