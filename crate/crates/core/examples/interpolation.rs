//! Interpolation at matrix nodes: minimal-norm solution and the parametrization.
use mhk::interp::{self, InterpolationData};
use mhk::sample::Sampler;

fn main() -> mhk::Result<()> {
    let mut smp = Sampler::new(4);
    let nodes = vec![smp.with_spectral_radius(2, 0.3), smp.with_spectral_radius(2, 0.5)];
    let values = vec![smp.gaussian(2, 2), smp.gaussian(2, 2)];
    let data = InterpolationData::new(nodes.clone(), values)?;

    let sol = interp::solve_min(&data, 60)?;
    println!("gram lambda_min {:.3e}", sol.lambda_min);
    println!("F_min residual {:.3e}, norm^2 {:.4}", interp::interpolation_residual(&sol.fmin, &data)?, sol.fmin.hardy_norm_sq());

    // Every F_min + Theta * G interpolates the same data.
    for seed in 0..3 {
        let g = Sampler::new(seed).series(2, 5, 1.0);
        let f = interp::parametrize(&sol, &g)?;
        println!("G #{seed}: residual {:.3e}, norm^2 {:.4}", interp::interpolation_residual(&f, &data)?, f.hardy_norm_sq());
    }
    Ok(())
}
