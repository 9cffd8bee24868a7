//! An isometric multiplier whose kernel is not positive at a unitary point.
//!
//! `S = (1/√2) [[Z, J], [Z J, I]]` with `J^* = -J`, `J^2 = -I` acts isometrically
//! on pairs of series, yet `I - S(A)S(A)^*` is indefinite when `A J A^* ≠ J`.

use serde::{Deserialize, Serialize};

use super::{kernel_gram, Verdict};
use crate::error::Result;
use crate::mps::MatrixPowerSeries;
use crate::numkit::{self, c, CMat, Tolerance};
use crate::sample::Sampler;

/// `J = i diag(1, -1)`.
pub fn j_matrix() -> CMat {
    numkit::CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.0, 1.0), c(0.0, -1.0)]))
}

/// `(1/√2) [[1, 1], [1, -1]]`.
pub fn hadamard() -> CMat {
    numkit::from_real_rows(2, 2, &[1.0, 1.0, 1.0, -1.0]) * c(std::f64::consts::FRAC_1_SQRT_2, 0.0)
}

/// The 2×2-block multiplier with `p = 2`.
pub fn counterexample_series() -> MatrixPowerSeries {
    let j = j_matrix();
    let (o, i) = (numkit::zeros(2, 2), numkit::eye(2));
    let k = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let s0 = numkit::block2(&o, &j, &o, &i) * k;
    let s1 = numkit::block2(&i, &o, &j, &o) * k;
    MatrixPowerSeries::new_block(2, 2, 2, vec![s0, s1]).expect("block shape")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CounterexampleReport {
    /// `max_n ||[S⋆F, S⋆F] - [F, F]||_F` over the random trials.
    pub isometry_defect: f64,
    /// `λ_min(I - S(A)S(A)^*)` at the Hadamard point.
    pub lambda_min_at_hadamard: f64,
    /// Eigenvector for that eigenvalue.
    pub witness: Vec<[f64; 2]>,
    /// Kernel verdict on the scalar points `{0, 0.3 I, (0.2 + 0.1i) I}`.
    pub scalar_kernel: Verdict,
    pub scalar_kernel_min_eig: f64,
    /// `max ||S(zI)||` over sampled `|z| ≤ 1`.
    pub scalar_slice_max_norm: f64,
}

/// Run the three checks with a seeded sampler (`order` is the degree of the test series).
pub fn counterexample_suite_with(seed: u64, order: usize, trials: usize) -> Result<CounterexampleReport> {
    let s = counterexample_series();
    let mut smp = Sampler::new(seed);

    let mut isometry_defect: f64 = 0.0;
    for _ in 0..trials {
        let coeffs: Vec<CMat> = (0..=order).map(|_| smp.gaussian(4, 2)).collect();
        let f = MatrixPowerSeries::new_block(2, 2, 1, coeffs)?;
        let sf = s.star_mul(&f)?;
        let gram = |g: &MatrixPowerSeries| g.coeffs().iter().fold(numkit::zeros(2, 2), |acc, x| acc + x.adjoint() * x);
        let (a, b) = (gram(&sf), gram(&f));
        isometry_defect = isometry_defect.max((a - &b).norm() / b.norm());
    }

    let sa = s.horner(&hadamard());
    let defect = numkit::hermitian_part(&(numkit::eye(4) - &sa * sa.adjoint()));
    let (vals, vecs) = numkit::hermitian_eigen(&defect);
    let witness = vecs.column(0).iter().map(|z| [z.re, z.im]).collect();

    let points = vec![
        numkit::zeros(2, 2),
        numkit::scalar(2, c(0.3, 0.0)),
        numkit::scalar(2, c(0.2, 0.1)),
    ];
    let kg = kernel_gram(&s, &points, &Tolerance::default())?;

    let mut slice: f64 = 0.0;
    for k in 0..64 {
        let t = std::f64::consts::TAU * k as f64 / 64.0;
        for radius in [0.0, 0.5, 0.9, 1.0] {
            let z = num_complex::Complex64::from_polar(radius, t);
            slice = slice.max(numkit::max_singular_value(&s.horner(&numkit::scalar(2, z))));
        }
    }

    Ok(CounterexampleReport {
        isometry_defect,
        lambda_min_at_hadamard: vals[0],
        witness,
        scalar_kernel: kg.verdict,
        scalar_kernel_min_eig: kg.lambda_min,
        scalar_slice_max_norm: slice,
    })
}

pub fn counterexample_suite() -> Result<CounterexampleReport> {
    counterexample_suite_with(0, 20, 5)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j_is_skew_square_root_of_minus_identity() {
        let j = j_matrix();
        assert!((j.adjoint() + &j).norm() == 0.0);
        assert!((&j * &j + numkit::eye(2)).norm() == 0.0);
        let h = hadamard();
        assert!((&h * &j * h.adjoint() - &j).norm() > 1.0);
    }

    #[test]
    fn suite_outcomes() {
        let r = counterexample_suite().unwrap();
        assert!(r.isometry_defect < 1e-12, "{}", r.isometry_defect);
        // hand computation: the off-diagonal block (A J A^* - J)/2 has singular values √2/2
        assert!((r.lambda_min_at_hadamard + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(r.lambda_min_at_hadamard < -0.1);
        assert_eq!(r.scalar_kernel, Verdict::Pass);
        assert!(r.scalar_slice_max_norm <= 1.0 + 1e-12);
    }

    #[test]
    fn witness_is_negative_direction() {
        let r = counterexample_suite().unwrap();
        let v = CMat::from_iterator(4, 1, r.witness.iter().map(|e| c(e[0], e[1])));
        let sa = counterexample_series().horner(&hadamard());
        let q = (v.adjoint() * (numkit::eye(4) - &sa * sa.adjoint()) * &v)[(0, 0)].re;
        assert!(q < -0.7);
    }
}
