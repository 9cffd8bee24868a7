//! Hardy and Fock inner products, the Szego kernel and Fock quadrature.
use mhk::numkit::{c, frob};
use mhk::sample::Sampler;
use mhk::spaces::{self, FockGrid, WeightSequence};

fn main() -> mhk::Result<()> {
    let mut smp = Sampler::new(2);
    let f = smp.decaying_series(2, 8, 0.6);

    let hardy = spaces::hardy_inner(&f, &f)?;
    println!("Hardy [F, F] trace {:.6}", hardy.trace().re);

    let fock = spaces::weighted_inner(&f, &f, &WeightSequence::fock(f.order()))?;
    let quad = spaces::gaussian_quadrature_fock(&f, FockGrid { radial: 400, angular: 64, cutoff: 6.0 })?;
    println!("Fock norm exact {:.6}, quadrature gap {:.3e}", fock.trace().re, frob(&(quad - &fock)));

    // Reproducing property: [F, K(., W) x] = F(W) x for scalar W.
    let w = mhk::numkit::scalar(2, c(0.3, -0.2));
    let k = spaces::szego_kernel(&w, 40)?;
    println!("kernel K(., W) to order 40, tail bound {:.3e}", k.tail_bound);
    let pairing = spaces::hardy_inner(&f.truncate(8), &k.series.truncate(8))?;
    println!("[F, K_W] vs F(W): {:.3e}", frob(&(pairing - f.eval(&w)?)));
    Ok(())
}
