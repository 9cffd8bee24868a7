//! Schur multiplier test: Toeplitz contraction plus kernel positivity.
use mhk::blaschke::Realization;
use mhk::numkit::{c, scalar};
use mhk::sample::Sampler;
use mhk::schur;
use mhk::{MatrixPowerSeries, Tolerance};

fn main() -> mhk::Result<()> {
    let mut smp = Sampler::new(5);
    let v = smp.contraction(4, 4, 0.9);
    let block = |r: usize, c: usize| v.view((r, c), (2, 2)).into_owned();
    let r = Realization::unweighted(block(0, 0), block(0, 2), block(2, 0), block(2, 2))?;
    let s = r.to_series(2, 120)?;

    let points: Vec<_> = (0..4).map(|_| smp.normal_matrix(2, 0.7)).collect();
    let tol = Tolerance::default();
    let rep = schur::check_multiplier(&s, 60, &points, &tol)?;
    println!("contractive colligation: {:?}, ||T_N|| = {:.6}", rep.verdict, rep.toeplitz_norm);

    let big = MatrixPowerSeries::constant(2, scalar(2, c(1.2, 0.0)))?;
    let rep = schur::check_multiplier(&big, 8, &points, &tol)?;
    println!("constant 1.2 I: {:?}, ||T_N|| = {:.3}", rep.verdict, rep.toeplitz_norm);
    Ok(())
}
