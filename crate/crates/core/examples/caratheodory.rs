//! Caratheodory function from a discrete measure: moments, kernel, realization.
use mhk::cara::{self, Atom, HerglotzData};
use mhk::numkit::{c, diag_real, scalar};
use mhk::sample::Sampler;
use mhk::Tolerance;

fn main() -> mhk::Result<()> {
    let mut smp = Sampler::new(8);
    let atoms = vec![
        Atom { t: 0.4, mass: smp.psd(2) },
        Atom { t: 2.1, mass: diag_real(&[0.5, 0.1]) },
        Atom { t: 4.0, mass: smp.psd(2) },
    ];
    let data = HerglotzData::new(scalar(2, c(0.3, 0.0)), atoms)?;
    let phi = cara::herglotz_series(&data, 80)?;
    let tol = Tolerance::default();

    for m in [1, 5, 10] {
        let mc = cara::moment_check(&phi, m, &tol)?;
        println!("Toeplitz moments m={m}: pass {} (lambda_min {:.3e})", mc.pass, mc.lambda_min);
    }
    let points: Vec<_> = (0..3).map(|_| smp.normal_matrix(2, 0.6)).collect();
    println!("kernel: {:?}", cara::cara_kernel_gram(&phi, &points, &tol)?.verdict);

    let rec = cara::realization_recovery(&phi, 40, &tol)?;
    println!("model dim {}, conventions {:?}/{:?}", rec.model_dim, rec.power_convention, rec.zero_convention);
    println!("selected residual {:.3e}", rec.selected_residual());
    Ok(())
}
