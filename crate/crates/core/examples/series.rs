//! Star products, inverses and evaluation at a matrix point.
use mhk::numkit::{c, eye, frob};
use mhk::sample::Sampler;
use mhk::MatrixPowerSeries;

fn main() -> mhk::Result<()> {
    let mut smp = Sampler::new(1);
    let f = smp.decaying_series(2, 12, 0.5);
    let g = smp.decaying_series(2, 12, 0.5);

    // Evaluating a star product at A is not F(A)G(A).
    let a = smp.with_spectral_radius(2, 0.6);
    let fg = f.star_mul(&g)?;
    let naive = f.eval(&a)? * g.eval(&a)?;
    println!("(F*G)(A) vs F(A)G(A): {:.3e}", frob(&(fg.eval(&a)? - naive)));
    println!("(F*G)(A) vs F(A G(A)) route: {:.3e}", frob(&(fg.eval(&a)? - f.eval_right_product(&g, &a)?)));

    // An invertible constant term makes F star-invertible.
    let h = f.add(&MatrixPowerSeries::constant(2, eye(2) * c(2.0, 0.0))?)?;
    let inv = h.star_inverse(12)?;
    let one = h.star_mul_trunc(&inv, 12)?;
    let defect = one.coeffs().iter().enumerate().map(|(n, m)| {
        if n == 0 { frob(&(m - eye(2))) } else { frob(m) }
    });
    println!("max |(H*H^-1)_n - delta_n I|: {:.3e}", defect.fold(0.0, f64::max));

    let e = f.eval_with_tail(&a)?;
    let contour = f.contour_eval(&a, 0.8, 128)?;
    println!("tail bound {:?}, contour vs power sum {:.3e}", e.tail_bound, frob(&(contour - &e.value)));

    let r = f.resolvent(&a)?;
    println!("resolvent R_A F has order {}", r.order());
    Ok(())
}
