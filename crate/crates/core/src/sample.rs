//! Seeded random generators for matrices and series.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::mps::MatrixPowerSeries;
use crate::numkit::{self, c, CMat};

/// Reproducible sampler backed by ChaCha8.
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Complex standard normal with `E|z|^2 = 1`.
    pub fn complex_normal(&mut self) -> Complex64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        c(self.normal() * s, self.normal() * s)
    }

    /// Uniform point in the open disk of the given radius.
    pub fn point_in_disk(&mut self, radius: f64) -> Complex64 {
        let r = radius * self.uniform().sqrt();
        let t = 2.0 * std::f64::consts::PI * self.uniform();
        Complex64::from_polar(r, t)
    }

    pub fn gaussian(&mut self, rows: usize, cols: usize) -> CMat {
        DMatrix::from_fn(rows, cols, |_, _| self.complex_normal())
    }

    /// Gaussian matrix rescaled to spectral radius `rho`.
    pub fn with_spectral_radius(&mut self, p: usize, rho: f64) -> CMat {
        loop {
            let m = self.gaussian(p, p);
            let r = numkit::spectral_radius(&m).unwrap_or(0.0);
            if r > 1e-6 {
                return m * c(rho / r, 0.0);
            }
        }
    }

    /// Gaussian matrix rescaled to operator norm `norm`.
    pub fn contraction(&mut self, rows: usize, cols: usize, norm: f64) -> CMat {
        let m = self.gaussian(rows, cols);
        let s = numkit::max_singular_value(&m);
        m * c(norm / s, 0.0)
    }

    /// Haar-like unitary from the QR factorization of a Gaussian matrix.
    pub fn unitary(&mut self, p: usize) -> CMat {
        let m = self.gaussian(p, p);
        let qr = m.qr();
        let (q, r) = (qr.q(), qr.r());
        // Fix the phases so the distribution does not depend on QR conventions.
        let phases = DMatrix::from_fn(p, p, |i, j| {
            if i == j && r[(i, i)].norm() > 0.0 {
                r[(i, i)] / r[(i, i)].norm()
            } else if i == j {
                c(1.0, 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        q * phases
    }

    /// Normal matrix `U diag(λ) U^*` with eigenvalues in the disk of radius `rho`,
    /// the largest having modulus exactly `rho`.
    pub fn normal_matrix(&mut self, p: usize, rho: f64) -> CMat {
        let u = self.unitary(p);
        let mut d = CMat::zeros(p, p);
        for i in 0..p {
            d[(i, i)] = self.point_in_disk(rho);
        }
        if p > 0 {
            let t = 2.0 * std::f64::consts::PI * self.uniform();
            d[(0, 0)] = Complex64::from_polar(rho, t);
        }
        &u * d * u.adjoint()
    }

    /// `X X^*` for Gaussian `X`.
    pub fn psd(&mut self, p: usize) -> CMat {
        let x = self.gaussian(p, p);
        &x * x.adjoint()
    }

    /// Polynomial series with Gaussian coefficients scaled by `scale`.
    pub fn series(&mut self, p: usize, order: usize, scale: f64) -> MatrixPowerSeries {
        let coeffs = (0..=order).map(|_| self.gaussian(p, p) * c(scale, 0.0)).collect();
        MatrixPowerSeries::new(p, coeffs).expect("consistent sizes")
    }

    /// Series with coefficients decaying like `decay^n`.
    pub fn decaying_series(&mut self, p: usize, order: usize, decay: f64) -> MatrixPowerSeries {
        let coeffs = (0..=order)
            .map(|n| self.gaussian(p, p) * c(decay.powi(n as i32), 0.0))
            .collect();
        MatrixPowerSeries::new(p, coeffs).expect("consistent sizes")
    }
}
