//! Schur multipliers of the Hardy module.
//!
//! Two necessary-condition families are exposed: positivity of the kernel
//! `K_S` on finite point sets and contractivity of truncated block Toeplitz
//! matrices. A failure of either is a certificate; a pass is evidence at the
//! tested points and orders only.

pub mod colligation;
pub mod counterexample;
pub mod leech;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blaschke::Realization;
use crate::error::{Error, Result};
use crate::mps::MatrixPowerSeries;
use crate::numkit::{self, cmat_vec_serde, CMat, Tolerance};

pub use colligation::{coisometric_extract, ExtractedColligation};
pub use counterexample::{counterexample_suite, CounterexampleReport};
pub use leech::{leech_solve, LeechSolution};

/// Slack allowed above 1 in the Toeplitz contraction test.
pub const TOEPLITZ_SLACK: f64 = 1e-9;

/// Slack allowed above 1 for the norm of a colligation.
pub const COLLIGATION_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// Block Gram matrix of a kernel over a point set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelGram {
    #[serde(with = "numkit::cmat_serde")]
    pub gram: CMat,
    pub lambda_min: f64,
    pub verdict: Verdict,
    /// Eigenvector for `lambda_min` as `[re, im]` pairs, present on Fail.
    pub witness: Option<Vec<[f64; 2]>>,
}

impl KernelGram {
    /// Classify an assembled (Hermitian up to rounding) Gram matrix.
    pub fn from_gram(gram: CMat, tol: &Tolerance) -> Self {
        let gram = numkit::hermitian_part(&gram);
        let (vals, vecs) = numkit::hermitian_eigen(&gram);
        let lambda_min = vals.first().copied().unwrap_or(0.0);
        let scale = numkit::max_singular_value(&gram);
        let fail = lambda_min < -tol.abs * (1.0 + scale);
        let witness = fail.then(|| vecs.column(0).iter().map(|z| [z.re, z.im]).collect());
        KernelGram {
            gram,
            lambda_min,
            verdict: if fail { Verdict::Fail } else { Verdict::Pass },
            witness,
        }
    }
}

fn lifted(s: &MatrixPowerSeries, z: &CMat) -> CMat {
    numkit::kron_eye(s.blocks().0, z)
}

/// `K_S(Z, W)`, the solution of `X - Z X W^* = I - S(Z) S(W)^*`.
pub fn kernel_at(s: &MatrixPowerSeries, z: &CMat, w: &CMat) -> Result<CMat> {
    let sz = s.eval(z)?;
    let sw = s.eval(w)?;
    let rhs = numkit::eye(sz.nrows()) - &sz * sw.adjoint();
    numkit::stein_solve_pair(&lifted(s, z), &lifted(s, w), &rhs)
}

/// Assemble `[X_ij]` where `X_ij` solves `X - Z_i X Z_j^* = rhs(i, j)` (`b × b` blocks).
pub fn stein_gram<F>(lifts: &[CMat], b: usize, rhs: F) -> Result<CMat>
where
    F: Fn(usize, usize) -> CMat + Sync,
{
    let m = lifts.len();
    let cells: Vec<CMat> = (0..m * m)
        .into_par_iter()
        .map(|ij| {
            let (i, j) = (ij / m, ij % m);
            numkit::stein_solve_pair(&lifts[i], &lifts[j], &rhs(i, j))
        })
        .collect::<Result<_>>()?;
    let mut gram = numkit::zeros(m * b, m * b);
    for (ij, cell) in cells.iter().enumerate() {
        gram.view_mut(((ij / m) * b, (ij % m) * b), (b, b)).copy_from(cell);
    }
    Ok(gram)
}

/// Gram matrix `[K_S(P_i, P_j)]` with its PSD verdict.
pub fn kernel_gram(s: &MatrixPowerSeries, points: &[CMat], tol: &Tolerance) -> Result<KernelGram> {
    if points.is_empty() {
        return Err(Error::Invalid("kernel_gram needs at least one point".into()));
    }
    let values: Vec<CMat> = points.iter().map(|z| s.eval(z)).collect::<Result<_>>()?;
    let lifts: Vec<CMat> = points.iter().map(|z| lifted(s, z)).collect();
    let b = values[0].nrows();
    let gram = stein_gram(&lifts, b, |i, j| numkit::eye(b) - &values[i] * values[j].adjoint())?;
    Ok(KernelGram::from_gram(gram, tol))
}

/// Largest singular value of the truncated Toeplitz matrix of `M_S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToeplitzCheck {
    pub norm: f64,
    pub pass: bool,
}

/// Lower-triangular block Toeplitz matrix with `n + 1` block rows and columns.
pub fn toeplitz_matrix(s: &MatrixPowerSeries, n: usize) -> CMat {
    let coeffs: Vec<CMat> = (0..=n).map(|k| s.coeff(k)).collect();
    numkit::lower_block_toeplitz(&coeffs, n + 1, n + 1)
}

pub fn toeplitz_contraction(s: &MatrixPowerSeries, n: usize) -> ToeplitzCheck {
    let norm = numkit::max_singular_value(&toeplitz_matrix(s, n));
    ToeplitzCheck { norm, pass: norm <= 1.0 + TOEPLITZ_SLACK }
}

/// Series with coefficients `S_n^*`.
pub fn tilde(s: &MatrixPowerSeries) -> Result<MatrixPowerSeries> {
    let (u, v) = s.blocks();
    MatrixPowerSeries::new_block(s.p(), v, u, s.coeffs().iter().map(|c| c.adjoint()).collect())
}

/// Outcome of the two multiplier tests.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultiplierReport {
    pub toeplitz_norm: f64,
    pub kernel_min_eig: f64,
    #[serde(with = "cmat_vec_serde")]
    pub points_tested: Vec<CMat>,
    pub verdict: Verdict,
    pub witness: Option<Vec<[f64; 2]>>,
}

/// Run the Toeplitz test at order `n` and the kernel test on `points`.
///
/// Points outside the declared radius make the kernel test unavailable, which
/// yields Inconclusive unless the Toeplitz test already failed.
pub fn check_multiplier(s: &MatrixPowerSeries, n: usize, points: &[CMat], tol: &Tolerance) -> Result<MultiplierReport> {
    let toep = toeplitz_contraction(s, n);
    let kernel = if points.is_empty() {
        None
    } else {
        match kernel_gram(s, points, tol) {
            Ok(k) => Some(k),
            Err(Error::OutsideConvergence { .. }) | Err(Error::SpectralRadiusTooLarge { .. }) => None,
            Err(e) => return Err(e),
        }
    };
    let (kernel_min_eig, kernel_fail, witness) = match &kernel {
        Some(k) => (k.lambda_min, k.verdict == Verdict::Fail, k.witness.clone()),
        None => (f64::NAN, false, None),
    };
    let verdict = if !toep.pass || kernel_fail {
        Verdict::Fail
    } else if kernel.is_none() && !points.is_empty() {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };
    Ok(MultiplierReport {
        toeplitz_norm: toep.norm,
        kernel_min_eig,
        points_tested: points.to_vec(),
        verdict,
        witness,
    })
}

/// `D + Σ Z^{k+1} C A^k B` for a contractive colligation `[[A, B], [C, D]]`.
pub fn realization_to_series(r: &Realization, p: usize, n: usize) -> Result<MatrixPowerSeries> {
    let norm = numkit::max_singular_value(&r.colligation());
    if norm > 1.0 + COLLIGATION_SLACK {
        return Err(Error::NotContraction { norm });
    }
    r.to_series(p, n)
}

/// Residual of the kernel decomposition
/// `K_S(Z, W) = Γ(Z)Γ(W)^* + Σ_k Λ_k(Z)(I - UU^*)Λ_k(W)^*`
/// with `Γ(Z) = Σ Z^k C A^k` and `Λ_k(Z) = Z^k [Z Γ(Z), I]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecompositionResidual {
    pub residual: f64,
    pub tail_bound: f64,
}

pub fn kernel_decomposition_residual(
    r: &Realization,
    s: &MatrixPowerSeries,
    z: &CMat,
    w: &CMat,
    n: usize,
) -> Result<DecompositionResidual> {
    let u = r.colligation();
    let defect = numkit::eye(u.nrows()) - &u * u.adjoint();
    let zl = lifted(s, z);
    let wl = lifted(s, w);
    let gamma = |x: &CMat| numkit::stein_solve_general(x, &r.a, &r.c);
    let (gz, gw) = (gamma(&zl)?, gamma(&wl)?);
    let xz = numkit::hcat(&[&(&zl * &gz), &numkit::eye(zl.nrows())]);
    let xw = numkit::hcat(&[&(&wl * &gw), &numkit::eye(wl.nrows())]);
    let middle = &xz * &defect * xw.adjoint();

    let mut rhs = &gz * gw.adjoint();
    let (mut zk, mut wk) = (numkit::eye(zl.nrows()), numkit::eye(wl.nrows()));
    for _ in 0..=n {
        rhs += &zk * &middle * wk.adjoint();
        zk = &zk * &zl;
        wk = &wk * &wl;
    }
    // Remainder Σ_{k>n} Z^k M W^{*k} = Z^{n+1} Y W^{*(n+1)} with Y the full Stein solution.
    let y = numkit::stein_solve_pair(&zl, &wl, &middle)?;
    let tail_bound = numkit::max_singular_value(&zk) * y.norm() * numkit::max_singular_value(&wk);

    let k = kernel_at(s, z, w)?;
    Ok(DecompositionResidual { residual: (k - rhs).norm(), tail_bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{c, eye, scalar, zeros};
    use crate::sample::Sampler;

    fn z_series(p: usize) -> MatrixPowerSeries {
        MatrixPowerSeries::monomial(p, 1, eye(p)).unwrap()
    }

    fn random_contractive(s: &mut Sampler, state: usize, p: usize, norm: f64) -> Realization {
        let u = s.contraction(state + p, state + p, norm);
        Realization::unweighted(
            u.view((0, 0), (state, state)).into_owned(),
            u.view((0, state), (state, p)).into_owned(),
            u.view((state, 0), (p, state)).into_owned(),
            u.view((state, state), (p, p)).into_owned(),
        )
        .unwrap()
    }

    #[test]
    fn kernel_of_shift_is_identity() {
        let mut s = Sampler::new(1);
        let z = s.with_spectral_radius(2, 0.6);
        let w = s.with_spectral_radius(2, 0.5);
        let k = kernel_at(&z_series(2), &z, &w).unwrap();
        assert!((k - eye(2)).norm() < 1e-12);
    }

    #[test]
    fn kernel_of_zero_is_szego() {
        let mut s = Sampler::new(2);
        let z = s.with_spectral_radius(2, 0.6);
        let w = s.with_spectral_radius(2, 0.5);
        let k = kernel_at(&MatrixPowerSeries::zero(2, 0), &z, &w).unwrap();
        let mut direct = zeros(2, 2);
        let (mut zk, mut wk) = (eye(2), eye(2));
        for _ in 0..400 {
            direct += &zk * wk.adjoint();
            zk = &zk * &z;
            wk = &wk * &w;
        }
        assert!((k - direct).norm() < 1e-10);
    }

    #[test]
    fn kernel_at_origin_is_defect() {
        let cm = numkit::from_real_rows(2, 2, &[0.5, 0.2, -0.1, 0.3]);
        let s = MatrixPowerSeries::constant(2, cm.clone()).unwrap();
        let k = kernel_at(&s, &zeros(2, 2), &zeros(2, 2)).unwrap();
        assert!((k - (eye(2) - &cm * cm.adjoint())).norm() < 1e-14);
    }

    #[test]
    fn kernel_at_satisfies_stein_identity() {
        let mut smp = Sampler::new(3);
        let r = random_contractive(&mut smp, 3, 2, 0.95);
        let s = r.to_series(2, 120).unwrap();
        let z = smp.with_spectral_radius(2, 0.5);
        let w = smp.with_spectral_radius(2, 0.4);
        let k = kernel_at(&s, &z, &w).unwrap();
        let rhs = eye(2) - s.eval(&z).unwrap() * s.eval(&w).unwrap().adjoint();
        assert!(numkit::stein_residual(&z, &w, &k, &rhs) < 1e-10);
    }

    #[test]
    fn expansive_constant_fails_with_witness() {
        let s = MatrixPowerSeries::constant(2, numkit::diag_real(&[1.2, 0.3])).unwrap();
        let g = kernel_gram(&s, &[zeros(2, 2)], &Tolerance::default()).unwrap();
        assert_eq!(g.verdict, Verdict::Fail);
        assert!((g.lambda_min - (1.0 - 1.44)).abs() < 1e-12);
        assert!(g.witness.is_some());
    }

    #[test]
    fn shift_gram_passes() {
        let mut smp = Sampler::new(4);
        let pts: Vec<CMat> = (0..4).map(|_| smp.with_spectral_radius(2, 0.7)).collect();
        let g = kernel_gram(&z_series(2), &pts, &Tolerance::default()).unwrap();
        assert_eq!(g.verdict, Verdict::Pass);
        // every block is I, so the Gram is J_4 ⊗ I_2 with eigenvalues {0, 4}
        assert!(g.lambda_min.abs() < 1e-12);
    }

    #[test]
    fn toeplitz_examples() {
        let cm = numkit::diag_real(&[0.9, 0.4]);
        let t = toeplitz_contraction(&MatrixPowerSeries::constant(2, cm).unwrap(), 6);
        assert!((t.norm - 0.9).abs() < 1e-12 && t.pass);
        let t = toeplitz_contraction(&z_series(2), 6);
        assert!((t.norm - 1.0).abs() < 1e-12 && t.pass);
        let t = toeplitz_contraction(&z_series(2).scale(c(2.0, 0.0)), 6);
        assert!((t.norm - 2.0).abs() < 1e-12 && !t.pass);
    }

    #[test]
    fn toeplitz_norms_increase_with_order() {
        let mut smp = Sampler::new(5);
        let s = smp.decaying_series(2, 12, 0.5);
        let norms: Vec<f64> = (0..12).map(|n| toeplitz_contraction(&s, n).norm).collect();
        assert!(norms.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    }

    #[test]
    fn toeplitz_commutes_with_shift_and_right_multiplication() {
        let mut smp = Sampler::new(6);
        let p = 2;
        let n = 9;
        let s = smp.decaying_series(p, n, 0.6);
        let t = toeplitz_matrix(&s, n);
        let tz = toeplitz_matrix(&z_series(p), n);
        assert!((&t * &tz - &tz * &t).norm() < 1e-13);

        let a = smp.gaussian(p, p);
        let h = smp.series(p, n, 1.0);
        let stack = |f: &MatrixPowerSeries| numkit::vcat(&f.coeffs().iter().collect::<Vec<_>>());
        let ha = h.right_mul(&a).unwrap();
        let lhs = &t * stack(&ha);
        let rhs = (&t * stack(&h)) * &a;
        assert!((lhs - rhs).norm() < 1e-12);
        // and it agrees with the star product
        let prod = s.star_mul_trunc(&h, n).unwrap();
        assert!((&t * stack(&h) - stack(&prod)).norm() < 1e-12);
    }

    #[test]
    fn tilde_keeps_toeplitz_norm() {
        let mut smp = Sampler::new(7);
        for n in [4, 10, 16] {
            let r = random_contractive(&mut smp, 3, 2, 0.9);
            let s = r.to_series(2, n).unwrap();
            let a = toeplitz_contraction(&s, n);
            let b = toeplitz_contraction(&tilde(&s).unwrap(), n);
            assert!(a.pass && b.pass);
            assert!((a.norm - b.norm).abs() < 1e-12);
        }
    }

    #[test]
    fn multiplier_is_contractive_on_scalar_slice() {
        let mut smp = Sampler::new(8);
        let r = random_contractive(&mut smp, 3, 2, 1.0);
        let s = r.to_series(2, 400).unwrap();
        assert!(toeplitz_contraction(&s, 30).pass);
        for _ in 0..40 {
            let z = smp.point_in_disk(0.99);
            let v = numkit::max_singular_value(&s.eval(&scalar(2, z)).unwrap());
            assert!(v <= 1.0 + 1e-6, "|S(zI)| = {v}");
        }
    }

    #[test]
    fn swap_colligation_gives_shift() {
        let p = 2;
        let r = Realization::unweighted(zeros(p, p), eye(p), eye(p), zeros(p, p)).unwrap();
        let s = realization_to_series(&r, p, 5).unwrap();
        assert!((s.coeff(1) - eye(p)).norm() == 0.0);
        assert!(s.coeffs().iter().enumerate().all(|(k, c)| k == 1 || c.norm() == 0.0));
        let res = kernel_decomposition_residual(&r, &s, &scalar(p, c(0.3, 0.1)), &zeros(p, p), 10).unwrap();
        assert!(res.residual < 1e-14);
    }

    #[test]
    fn givens_colligation_is_contractive_multiplier() {
        let (a, b) = (0.6, 0.8);
        let r = Realization::unweighted(
            numkit::from_real_rows(1, 1, &[a]),
            numkit::from_real_rows(1, 1, &[b]),
            numkit::from_real_rows(1, 1, &[-b]),
            numkit::from_real_rows(1, 1, &[a]),
        )
        .unwrap();
        let s = realization_to_series(&r, 1, 80).unwrap();
        for n in [5, 20, 40] {
            let t = toeplitz_contraction(&s, n);
            // oracle: singular values of the explicit Toeplitz matrix built from closed-form coefficients
            let coeffs: Vec<CMat> = (0..=n)
                .map(|k| {
                    let v = if k == 0 { a } else { -b * b * a.powi(k as i32 - 1) };
                    numkit::from_real_rows(1, 1, &[v])
                })
                .collect();
            let oracle = numkit::max_singular_value(&numkit::lower_block_toeplitz(&coeffs, n + 1, n + 1));
            assert!((t.norm - oracle).abs() < 1e-12 && t.pass);
        }
    }

    #[test]
    fn expansive_colligation_rejected() {
        let r = Realization::unweighted(eye(1) * c(1.1, 0.0), zeros(1, 1), zeros(1, 1), zeros(1, 1)).unwrap();
        assert!(matches!(realization_to_series(&r, 1, 3), Err(Error::NotContraction { .. })));
    }

    #[test]
    fn random_contractive_realization_passes_kernel_gram() {
        let mut smp = Sampler::new(9);
        let r = random_contractive(&mut smp, 3, 2, 0.97);
        let s = realization_to_series(&r, 2, 200).unwrap();
        let pts: Vec<CMat> = (0..4).map(|_| smp.with_spectral_radius(2, 0.6)).collect();
        let rep = check_multiplier(&s, 25, &pts, &Tolerance::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        assert!(rep.kernel_min_eig > -1e-10);
    }

    #[test]
    fn decomposition_matches_kernel() {
        let mut smp = Sampler::new(10);
        let r = random_contractive(&mut smp, 3, 2, 0.95);
        let s = r.to_series(2, 200).unwrap();
        let z = smp.normal_matrix(2, 0.5);
        let w = smp.normal_matrix(2, 0.5);
        let res = kernel_decomposition_residual(&r, &s, &z, &w, 200).unwrap();
        assert!(res.residual < 1e-8 && res.residual <= res.tail_bound + 1e-9, "{res:?}");
    }

    #[test]
    fn coisometric_colligation_leaves_gamma_term_only() {
        let mut smp = Sampler::new(11);
        let u = smp.unitary(5);
        let r = Realization::unweighted(
            u.view((0, 0), (3, 3)).into_owned(),
            u.view((0, 3), (3, 2)).into_owned(),
            u.view((3, 0), (2, 3)).into_owned(),
            u.view((3, 3), (2, 2)).into_owned(),
        )
        .unwrap();
        let s = r.to_series(2, 300).unwrap();
        let z = smp.normal_matrix(2, 0.5);
        let w = smp.normal_matrix(2, 0.4);
        let gz = numkit::stein_solve_general(&z, &r.a, &r.c).unwrap();
        let gw = numkit::stein_solve_general(&w, &r.a, &r.c).unwrap();
        let k = kernel_at(&s, &z, &w).unwrap();
        assert!((k - &gz * gw.adjoint()).norm() < 1e-9);
    }

    #[test]
    fn report_is_inconclusive_outside_radius() {
        let s = z_series(1).with_radius_hint(0.5).unwrap();
        let rep = check_multiplier(&s, 5, &[scalar(1, c(0.7, 0.0))], &Tolerance::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Inconclusive);
    }
}
