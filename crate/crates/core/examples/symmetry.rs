//! Quaternionic and split symmetries acting on nodes and Blaschke factors.
use mhk::numkit::from_real_rows;
use mhk::sample::Sampler;
use mhk::symm::{self, Symmetry};

fn main() -> mhk::Result<()> {
    let mut smp = Sampler::new(10);
    for phi in [Symmetry::quaternionic(1), Symmetry::split(1)] {
        let rep = symm::admissible_check(&phi, &symm::sample_pairs(phi.dim(), 20, 10), 1e-12)?;
        let a = symm::random_fixed_node(&phi, &mut smp, 0.5)?;
        let drift = symm::blaschke_symmetry_check(&phi, &a, 40)?;
        println!("{:?}: admissible {}, fixed residual {:.1e}, U_A drift {drift:.3e}", phi.kind, rep.pass, phi.fixed_residual(&a)?);
    }

    let j = from_real_rows(2, 2, &[2.0, 1.0, 0.0, 1.0]);
    let rep = symm::admissible_check(&Symmetry::custom(j)?, &symm::sample_pairs(2, 20, 10), 1e-12)?;
    println!("non-unitary J: admissible {}, {} violated axioms", rep.pass, rep.violations.len());
    Ok(())
}
