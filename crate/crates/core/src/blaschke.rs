//! Blaschke factors `U_A` and weighted-unitary realizations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mps::MatrixPowerSeries;
use crate::numkit::{self, c, cmat_serde, CMat, Tolerance};
use crate::spaces;

/// Relative complement norm above which a series is not divisible by `U_A`.
pub const DIVISION_TOL: f64 = 1e-7;

/// State-space quadruple with a Hermitian weight on the state space.
///
/// The transfer function is `D + Σ_{n≥0} Z^{n+1} C A^n B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    #[serde(with = "cmat_serde")]
    pub a: CMat,
    #[serde(with = "cmat_serde")]
    pub b: CMat,
    #[serde(with = "cmat_serde")]
    pub c: CMat,
    #[serde(with = "cmat_serde")]
    pub d: CMat,
    #[serde(with = "cmat_serde")]
    pub weight: CMat,
}

impl Realization {
    pub fn new(a: CMat, b: CMat, c: CMat, d: CMat, weight: CMat) -> Result<Self> {
        let n = numkit::ensure_square(&a)?;
        numkit::ensure_square(&weight)?;
        if b.nrows() != n || c.ncols() != n || weight.nrows() != n || d.nrows() != c.nrows() || d.ncols() != b.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "realization blocks A {}x{}, B {}x{}, C {}x{}, D {}x{}, weight {}x{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols(),
                c.nrows(),
                c.ncols(),
                d.nrows(),
                d.ncols(),
                weight.nrows(),
                weight.ncols()
            )));
        }
        Ok(Realization { a, b, c, d, weight })
    }

    /// Unweighted realization (weight `I`).
    pub fn unweighted(a: CMat, b: CMat, c: CMat, d: CMat) -> Result<Self> {
        let n = a.nrows();
        Self::new(a, b, c, d, numkit::eye(n))
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    /// Colligation matrix `[[A, B], [C, D]]`.
    pub fn colligation(&self) -> CMat {
        numkit::block2(&self.a, &self.b, &self.c, &self.d)
    }

    /// Series `D + Σ Z^{n+1} C A^n B` through order `order`, with block size `p`.
    pub fn to_series(&self, p: usize, order: usize) -> Result<MatrixPowerSeries> {
        let mut coeffs = Vec::with_capacity(order + 1);
        coeffs.push(self.d.clone());
        let mut ca = self.c.clone();
        for _ in 1..=order {
            coeffs.push(&ca * &self.b);
            ca = &ca * &self.a;
        }
        let (rows, cols) = (self.d.nrows(), self.d.ncols());
        if rows % p != 0 || cols % p != 0 {
            return Err(Error::DimensionMismatch(format!("{rows}x{cols} transfer function with p={p}")));
        }
        MatrixPowerSeries::new_block(p, rows / p, cols / p, coeffs)
    }
}

/// `||M^* diag(H, I) M - diag(H, I)||_F` for the colligation `M`.
pub fn check_weighted_unitary(r: &Realization) -> f64 {
    let m = r.colligation();
    let w = numkit::block_diag(&[r.weight.clone(), numkit::eye(r.d.nrows())]);
    let wout = numkit::block_diag(&[r.weight.clone(), numkit::eye(r.d.ncols())]);
    if m.nrows() != w.nrows() || wout.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    (m.adjoint() * w * &m - wout).norm()
}

/// Blaschke factor vanishing at `A`.
#[derive(Debug, Clone)]
pub struct BlaschkeFactor {
    pub a: CMat,
    pub gamma: CMat,
    pub gamma_inv: CMat,
    pub l: CMat,
    pub l_sqrt: CMat,
    pub series: MatrixPowerSeries,
}

impl BlaschkeFactor {
    /// Build `U_A` through order `n`:
    /// `-A L^{1/2} + Σ_{n≥1} Z^n A^{*(n-1)} Γ^{-1} L^{1/2}`.
    pub fn build(a: &CMat, n: usize) -> Result<Self> {
        let p = numkit::ensure_square(a)?;
        let gamma = numkit::stein_solve(a)?;
        let gamma_inv = numkit::hermitian_part(&numkit::inverse(&gamma)?);
        let l_inv = a.ad_mul(a) + &gamma_inv;
        let l = numkit::hermitian_part(&numkit::inverse(&l_inv)?);
        let l_sqrt = numkit::sqrt_psd(&l, &Tolerance::default())?;
        let mut coeffs = Vec::with_capacity(n + 1);
        coeffs.push(-(a * &l_sqrt));
        let mut term = &gamma_inv * &l_sqrt;
        let a_star = a.adjoint();
        for _ in 1..=n {
            coeffs.push(term.clone());
            term = &a_star * term;
        }
        Ok(BlaschkeFactor {
            a: a.clone(),
            gamma,
            gamma_inv,
            l,
            l_sqrt,
            series: MatrixPowerSeries::new(p, coeffs)?,
        })
    }

    pub fn p(&self) -> usize {
        self.a.nrows()
    }

    pub fn order(&self) -> usize {
        self.series.order()
    }

    /// `(A^*, Γ^{-1} L^{1/2}, I, -A L^{1/2})` with weight `Γ`.
    pub fn realization(&self) -> Realization {
        Realization {
            a: self.a.adjoint(),
            b: &self.gamma_inv * &self.l_sqrt,
            c: numkit::eye(self.p()),
            d: -(&self.a * &self.l_sqrt),
            weight: self.gamma.clone(),
        }
    }

    /// Residuals of `Γ - AΓA^* = I` and `L^{-1} = A^*A + Γ^{-1}`.
    pub fn invariant_residuals(&self) -> (f64, f64) {
        let p = self.p();
        let stein = numkit::stein_residual(&self.a, &self.a, &self.gamma, &numkit::eye(p));
        let l_inv = numkit::inverse(&self.l).unwrap_or_else(|_| CMat::from_element(p, p, c(f64::NAN, 0.0)));
        let lres = (l_inv - self.a.ad_mul(&self.a) - &self.gamma_inv).norm();
        (stein, lres)
    }

    /// Tail bound `2 ρ^{2(N-m)} / (1 - ρ^2)` for Hardy products of shifts up to `m`.
    pub fn orthonormality_tail(&self, m: usize) -> f64 {
        let rho = numkit::spectral_radius(&self.a).unwrap_or(1.0);
        let n = self.order().saturating_sub(m) as i32;
        2.0 * rho.powi(2 * n) / (1.0 - rho * rho)
    }
}

/// Orthogonal projection onto `H_2 ⊖ U_A ⋆ H_2`: returns `K(·,A) C` and `C = Γ^{-1} F(A)`.
pub fn project_complement(f: &MatrixPowerSeries, a: &CMat) -> Result<(MatrixPowerSeries, CMat)> {
    let gamma = numkit::stein_solve(a)?;
    let fa = f.eval(a)?;
    let cst = numkit::solve(&gamma, &fa)?;
    let k = spaces::szego_kernel(a, f.order())?;
    Ok((k.series.right_mul(&cst)?, cst))
}

/// Outcome of [`divide_blaschke`].
#[derive(Debug, Clone)]
pub struct Division {
    pub quotient: MatrixPowerSeries,
    /// Relative Hardy residual of `U_A ⋆ G - H` through the retained orders.
    pub residual: f64,
    /// Number of retained orders, `N - buffer`.
    pub retained: usize,
}

/// Solve `U_A ⋆ G = H` by least squares on the truncated block-Toeplitz system,
/// with unknown `G` of order `N - buffer` (default buffer `N/4`).
pub fn divide_blaschke(h: &MatrixPowerSeries, bf: &BlaschkeFactor, buffer: Option<usize>) -> Result<Division> {
    if !h.is_square() || h.p() != bf.p() {
        return Err(Error::DimensionMismatch("division needs a p×p series matching the factor".into()));
    }
    let p = h.p();
    let n = h.order();
    let buffer = buffer.unwrap_or(n / 4).min(n);
    let ng = n - buffer;

    // H(A) measures the component in the kernel space: its Hardy norm is ||Γ^{-1/2} H(A)||.
    let ha = h.eval(&bf.a)?;
    let hn = h.hardy_norm_sq().sqrt();
    let comp = ha.ad_mul(&(&bf.gamma_inv * &ha)).trace().re.max(0.0).sqrt();
    let comp_rel = if hn > 0.0 { comp / hn } else { 0.0 };
    if comp_rel > DIVISION_TOL {
        return Err(Error::NotInRange { residual: comp_rel });
    }

    let useries = bf.series.truncate(n);
    let t = numkit::lower_block_toeplitz(useries.coeffs(), n + 1, ng + 1);
    let stacked = numkit::vcat(&h.coeffs().iter().collect::<Vec<_>>());
    let g = numkit::pinv(&t, 1e-12) * &stacked;
    let coeffs: Vec<CMat> = (0..=ng).map(|k| g.rows(k * p, p).into_owned()).collect();
    let quotient = MatrixPowerSeries::new(p, coeffs)?;

    let prod = useries.star_mul_trunc(&quotient, ng)?;
    let diff = prod.sub(&h.truncate(ng))?;
    let base = h.truncate(ng).hardy_norm_sq().sqrt();
    let residual = if base > 0.0 { diff.hardy_norm_sq().sqrt() / base } else { diff.hardy_norm_sq().sqrt() };
    Ok(Division { quotient, residual, retained: ng })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{eye, from_real_rows, scalar};
    use crate::sample::Sampler;
    use crate::spaces::hardy_inner;
    use proptest::prelude::*;

    fn assert_close(a: &CMat, b: &CMat, tol: f64) {
        let d = (a - b).norm();
        assert!(d <= tol, "difference {d:e} exceeds {tol:e}");
    }

    fn shift_n(f: &MatrixPowerSeries, n: usize) -> MatrixPowerSeries {
        (0..n).fold(f.clone(), |g, _| g.shift())
    }

    #[test]
    fn zero_node_is_z() {
        let bf = BlaschkeFactor::build(&CMat::zeros(2, 2), 5).unwrap();
        assert_close(&bf.gamma, &eye(2), 1e-15);
        assert_close(&bf.l, &eye(2), 1e-15);
        assert_close(&bf.series.coeff(0), &CMat::zeros(2, 2), 0.0);
        assert_close(&bf.series.coeff(1), &eye(2), 1e-15);
        for n in 2..=5 {
            assert_close(&bf.series.coeff(n), &CMat::zeros(2, 2), 0.0);
        }
    }

    #[test]
    fn scalar_node_matches_mobius() {
        let a = 0.5;
        let bf = BlaschkeFactor::build(&scalar(2, c(a, 0.0)), 10).unwrap();
        assert_close(&bf.series.coeff(0), &(eye(2) * c(-0.5, 0.0)), 1e-14);
        assert_close(&bf.series.coeff(1), &(eye(2) * c(0.75, 0.0)), 1e-14);
        assert_close(&bf.series.coeff(2), &(eye(2) * c(0.375, 0.0)), 1e-14);
        // (z - a)/(1 - a z) at a sample point
        let z = c(0.2, 0.3);
        let expect = (z - a) / (1.0 - z * a);
        assert_close(&bf.series.eval_scalar(z).unwrap(), &(eye(2) * expect), 1e-6);
    }

    #[test]
    fn quaternion_node() {
        let a = from_real_rows(2, 2, &[0.3, -0.4, 0.4, 0.3]);
        let bf = BlaschkeFactor::build(&a, 20).unwrap();
        assert_close(&bf.gamma, &(eye(2) * c(4.0 / 3.0, 0.0)), 1e-12);
        assert_close(&bf.l, &eye(2), 1e-12);
        // (Z - A) ⋆ (I - Z A^*)^{-⋆}
        let za = MatrixPowerSeries::new(2, vec![-a.clone(), eye(2)]).unwrap();
        let inv = MatrixPowerSeries::new(2, vec![eye(2), -a.adjoint()]).unwrap().star_inverse(20).unwrap();
        let u = za.star_mul_trunc(&inv, 20).unwrap();
        for n in 0..=20 {
            assert_close(&bf.series.coeff(n), &u.coeff(n), 1e-13);
        }
    }

    #[test]
    fn invariants_hold_for_random_nodes() {
        let mut s = Sampler::new(1);
        for _ in 0..10 {
            let a = s.with_spectral_radius(3, 0.8);
            let bf = BlaschkeFactor::build(&a, 200).unwrap();
            let (r1, r2) = bf.invariant_residuals();
            assert!(r1 < 1e-10 && r2 < 1e-10 * (1.0 + bf.l.norm()), "{r1:e} {r2:e}");
            assert!(bf.series.eval(&a).unwrap().norm() < 1e-10);
        }
    }

    #[test]
    fn mobius_form_agrees_with_series() {
        // (Z - A) ⋆ (I - Z Γ A^* Γ^{-1})^{-⋆} L^{1/2}
        let mut s = Sampler::new(2);
        let a = s.with_spectral_radius(2, 0.6);
        let bf = BlaschkeFactor::build(&a, 25).unwrap();
        let za = MatrixPowerSeries::new(2, vec![-a.clone(), eye(2)]).unwrap();
        let inner = &bf.gamma * a.adjoint() * &bf.gamma_inv;
        let inv = MatrixPowerSeries::new(2, vec![eye(2), -inner]).unwrap().star_inverse(25).unwrap();
        let u = za.star_mul_trunc(&inv, 25).unwrap().right_mul(&bf.l_sqrt).unwrap();
        for n in 0..=25 {
            assert_close(&bf.series.coeff(n), &u.coeff(n), 1e-10);
        }
    }

    #[test]
    fn third_displayed_form_disagrees_unless_l_is_identity() {
        // (I - z A^*)^{-1}(zI - A L^{-1}) L^{1/2} at z = 0 gives -A L^{-1/2}, not -A L^{1/2}.
        let mut s = Sampler::new(3);
        let a = s.with_spectral_radius(2, 0.6);
        let bf = BlaschkeFactor::build(&a, 10).unwrap();
        let l_inv = numkit::inverse(&bf.l).unwrap();
        let at_zero = -(&a * &l_inv * &bf.l_sqrt);
        assert!((&at_zero - bf.series.coeff(0)).norm() > 1e-3);
        let q = from_real_rows(2, 2, &[0.3, -0.4, 0.4, 0.3]);
        let bq = BlaschkeFactor::build(&q, 10).unwrap();
        let lq = numkit::inverse(&bq.l).unwrap();
        assert_close(&(-(&q * lq * &bq.l_sqrt)), &bq.series.coeff(0), 1e-12);
    }

    #[test]
    fn realization_examples() {
        let r = BlaschkeFactor::build(&CMat::zeros(2, 2), 4).unwrap().realization();
        assert_close(&r.colligation(), &numkit::block2(&CMat::zeros(2, 2), &eye(2), &eye(2), &CMat::zeros(2, 2)), 1e-15);
        assert!(check_weighted_unitary(&r) < 1e-14);
        let r = BlaschkeFactor::build(&scalar(2, c(0.5, 0.0)), 4).unwrap().realization();
        assert_close(&r.weight, &(eye(2) * c(4.0 / 3.0, 0.0)), 1e-14);
        assert!(check_weighted_unitary(&r) < 1e-12);
        let mut s = Sampler::new(4);
        let a = s.with_spectral_radius(3, 0.8);
        let bf = BlaschkeFactor::build(&a, 30).unwrap();
        let r = bf.realization();
        assert!(check_weighted_unitary(&r) < 1e-10);
        let ser = r.to_series(3, 30).unwrap();
        for n in 0..=30 {
            assert_close(&ser.coeff(n), &bf.series.coeff(n), 1e-12);
        }
    }

    #[test]
    fn shifts_are_orthonormal() {
        let mut s = Sampler::new(5);
        let a = s.with_spectral_radius(2, 0.7);
        let bf = BlaschkeFactor::build(&a, 60).unwrap();
        for n in 0..=5 {
            for k in 0..=5 {
                let g = hardy_inner(&shift_n(&bf.series, n), &shift_n(&bf.series, k)).unwrap();
                let expect = if n == k { eye(2) } else { CMat::zeros(2, 2) };
                let tol = bf.orthonormality_tail(n.max(k)) + 1e-12;
                assert!((g - expect).norm() <= tol);
            }
        }
    }

    #[test]
    fn star_multiplication_is_isometric() {
        let mut s = Sampler::new(6);
        let a = s.with_spectral_radius(2, 0.7);
        let bf = BlaschkeFactor::build(&a, 60).unwrap();
        let f = s.series(2, 15, 1.0);
        let uf = bf.series.star_mul(&f).unwrap();
        let lhs = hardy_inner(&uf, &uf).unwrap();
        assert_close(&lhs, &hardy_inner(&f, &f).unwrap(), 1e-6);
    }

    #[test]
    fn projection_examples() {
        let mut s = Sampler::new(7);
        let a = s.with_spectral_radius(2, 0.5);
        let bf = BlaschkeFactor::build(&a, 40).unwrap();
        let (proj, cst) = project_complement(&bf.series, &a).unwrap();
        assert!(cst.norm() < 1e-12 && proj.max_coeff_norm() < 1e-12);
        let d = s.gaussian(2, 2);
        let kd = spaces::szego_kernel(&a, 60).unwrap().series.right_mul(&d).unwrap();
        let (_, cst) = project_complement(&kd, &a).unwrap();
        assert_close(&cst, &d, 1e-10);
        let (_, cst) = project_complement(&MatrixPowerSeries::identity(2), &scalar(2, c(0.5, 0.0))).unwrap();
        assert_close(&cst, &(eye(2) * c(0.75, 0.0)), 1e-14);
    }

    #[test]
    fn projection_residual_is_orthogonal_to_kernels() {
        let mut s = Sampler::new(8);
        let a = s.with_spectral_radius(2, 0.5);
        let f = s.series(2, 40, 0.5);
        let (proj, _) = project_complement(&f, &a).unwrap();
        let rest = f.sub(&proj).unwrap();
        let kd = spaces::szego_kernel(&a, 40).unwrap().series.right_mul(&s.gaussian(2, 2)).unwrap();
        assert!(hardy_inner(&rest, &kd).unwrap().norm() < 1e-10);
    }

    #[test]
    fn division_examples() {
        let mut s = Sampler::new(9);
        let a = s.with_spectral_radius(2, 0.5);
        let bf = BlaschkeFactor::build(&a, 40).unwrap();
        let q = divide_blaschke(&bf.series, &bf, None).unwrap();
        assert_close(&q.quotient.coeff(0), &eye(2), 1e-9);
        assert!(q.quotient.backward_shift().max_coeff_norm() < 1e-9);
        let q = divide_blaschke(&bf.series.shift().truncate(40), &bf, None).unwrap();
        assert!(q.quotient.coeff(0).norm() < 1e-9);
        assert_close(&q.quotient.coeff(1), &eye(2), 1e-9);
        let g0 = s.series(2, 10, 1.0);
        let h = bf.series.star_mul_trunc(&g0, 40).unwrap();
        let q = divide_blaschke(&h, &bf, None).unwrap();
        for n in 0..=q.retained {
            assert_close(&q.quotient.coeff(n), &g0.coeff(n), 1e-9);
        }
        assert!((q.quotient.hardy_norm_sq() - g0.hardy_norm_sq()).abs() < 1e-8 * g0.hardy_norm_sq());
        assert!(matches!(
            divide_blaschke(&MatrixPowerSeries::identity(2).truncate(40), &bf, None),
            Err(Error::NotInRange { .. })
        ));
    }

    #[test]
    fn decomposition_reassembles() {
        let mut s = Sampler::new(10);
        let a = s.with_spectral_radius(2, 0.5);
        let n = 60;
        let bf = BlaschkeFactor::build(&a, n).unwrap();
        let f = s.series(2, 8, 1.0).truncate(n);
        let (proj, _) = project_complement(&f, &a).unwrap();
        let rest = f.sub(&proj).unwrap();
        let q = divide_blaschke(&rest, &bf, None).unwrap();
        let back = proj.add(&bf.series.star_mul_trunc(&q.quotient, n).unwrap()).unwrap();
        for k in 0..=q.retained {
            assert_close(&back.coeff(k), &f.coeff(k), 1e-8);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn root_property(seed in any::<u64>(), p in 1usize..=4) {
            let a = Sampler::new(seed).with_spectral_radius(p, 0.6);
            let bf = BlaschkeFactor::build(&a, 60).unwrap();
            prop_assert!(bf.series.eval(&a).unwrap().norm() < 1e-10);
        }

        #[test]
        fn weighted_unitary(seed in any::<u64>(), p in 1usize..=4) {
            let a = Sampler::new(seed).with_spectral_radius(p, 0.8);
            let r = BlaschkeFactor::build(&a, 4).unwrap().realization();
            prop_assert!(check_weighted_unitary(&r) < 1e-10);
        }
    }
}
