//! Blaschke factor at a matrix node, its unitary realization and division.
use mhk::blaschke::{self, BlaschkeFactor};
use mhk::numkit::frob;
use mhk::sample::Sampler;

fn main() -> mhk::Result<()> {
    let mut smp = Sampler::new(3);
    let a = smp.with_spectral_radius(2, 0.5);
    let bf = BlaschkeFactor::build(&a, 80)?;

    println!("U_A(A) = {:.3e}", frob(&bf.series.eval(&a)?));
    let (gamma_res, l_res) = bf.invariant_residuals();
    println!("Gamma and L Stein residuals {gamma_res:.3e} {l_res:.3e}");

    let r = bf.realization();
    println!("weighted unitarity defect {:.3e}", blaschke::check_weighted_unitary(&r));
    println!("orthonormality tail at 20 {:.3e}", bf.orthonormality_tail(20));

    // Anything vanishing at A divides by U_A.
    let g = smp.decaying_series(2, 40, 0.5);
    let h = bf.series.star_mul_trunc(&g, 80)?;
    let div = blaschke::divide_blaschke(&h, &bf, None)?;
    println!("quotient residual {:.3e} over {} orders", div.residual, div.retained);
    Ok(())
}
