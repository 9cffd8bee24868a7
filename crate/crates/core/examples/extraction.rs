//! Coisometric colligation read off a scalar Blaschke factor.
use mhk::numkit::{c, frob, scalar};
use mhk::schur;
use mhk::MatrixPowerSeries;

fn main() -> mhk::Result<()> {
    let a: f64 = 0.5;
    let mut coeffs = vec![scalar(1, c(-a, 0.0))];
    coeffs.extend((1..=60).map(|k| scalar(1, c((1.0 - a * a) * a.powi(k - 1), 0.0))));
    let s = MatrixPowerSeries::new(1, coeffs)?;

    let e = schur::coisometric_extract(&s, 40)?;
    println!("model dimension {}", e.model_dim);
    println!("T = {:.6}, H = {:.6}", e.t_op[(0, 0)], e.h_op[(0, 0)]);
    println!("reconstruction {:.3e}, coisometry defect {:.3e}", e.reconstruction_residual, e.coisometry_defect);
    println!("G F vs S_1: {:.3e}", frob(&(&e.g_op * &e.f_op - s.coeff(1))));
    Ok(())
}
