//! Leech factorization Q = P * S via the lurking isometry.
use mhk::blaschke::Realization;
use mhk::interp;
use mhk::sample::Sampler;
use mhk::schur::{self, leech};
use mhk::Tolerance;

fn main() -> mhk::Result<()> {
    let mut smp = Sampler::new(6);
    let n = 80;
    let p = interp::theta(&[smp.normal_matrix(2, 0.3), smp.normal_matrix(2, 0.4)], n)?;
    let v = smp.contraction(3, 3, 0.8);
    let r = Realization::unweighted(
        v.view((0, 0), (1, 1)).into_owned(),
        v.view((0, 1), (1, 2)).into_owned(),
        v.view((1, 0), (2, 1)).into_owned(),
        v.view((1, 1), (2, 2)).into_owned(),
    )?;
    let q = p.star_mul_trunc(&r.to_series(2, n)?, n)?;

    let sample = leech::default_samples(2, 6);
    let sol = schur::leech_solve(&p, &q, &sample, n, &Tolerance::default())?;
    println!("rank {}, gram lambda_min {:.3e}", sol.rank, sol.lambda_min);
    println!("sample residual {:.3e}, ||T_N(S)|| = {:.6}", sol.residual, sol.toeplitz.norm);
    Ok(())
}
