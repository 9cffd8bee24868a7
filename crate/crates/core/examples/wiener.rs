//! Inversion in the Wiener algebra and Ho-Kalman realization.
use mhk::algebra::{self, WienerSeries};
use mhk::numkit::{c, eye};
use mhk::sample::Sampler;
use mhk::MatrixPowerSeries;

fn main() -> mhk::Result<()> {
    let mut smp = Sampler::new(9);
    let f = MatrixPowerSeries::constant(2, eye(2))?.add(&smp.decaying_series(2, 10, 0.3).scale(c(0.3, 0.0)))?;
    let inv = algebra::wplus_invert(&WienerSeries::new(f.clone())?, 40, 256)?;
    println!("residual {:.3e}, min |det| {:.4}, winding {:.2}", inv.residual, inv.min_det, inv.winding);

    // I - 2Z has det vanishing at z = 1/2 inside the disk.
    let bad = MatrixPowerSeries::new(2, vec![eye(2), eye(2) * c(-2.0, 0.0)])?;
    match algebra::wplus_invert(&WienerSeries::new(bad)?, 40, 256) {
        Err(e) => println!("I - 2Z: {e}"),
        Ok(_) => println!("I - 2Z unexpectedly inverted"),
    }

    let v = smp.contraction(5, 5, 0.8);
    let sys = mhk::blaschke::Realization::unweighted(
        v.view((0, 0), (3, 3)).into_owned(),
        v.view((0, 3), (3, 2)).into_owned(),
        v.view((3, 0), (2, 3)).into_owned(),
        v.view((3, 3), (2, 2)).into_owned(),
    )?;
    let hk = algebra::hankel_realize(&sys.to_series(2, 30)?, 1e-9)?;
    println!("recovered McMillan rank {}, residual {:.3e}", hk.rank, hk.residual);
    Ok(())
}
