//! Coisometric colligation of a Schur multiplier read off the truncated
//! operator-range model `ran sqrt(I - T T^*)`.
//!
//! With `T` the lower-triangular Toeplitz truncation of `M_S`,
//! `I - T T^*` is exactly the compression of `I - M_S M_S^*` to the first
//! `N + 1` coefficient blocks. Model elements are written `f = W c` with
//! `W = V_r Λ_r^{1/2}`; their range norm is `||c||`.

use serde::{Deserialize, Serialize};

use super::{toeplitz_contraction, toeplitz_matrix};
use crate::error::{Error, Result};
use crate::mps::MatrixPowerSeries;
use crate::numkit::{self, cmat_serde, CMat};

/// Relative eigenvalue cut defining the model dimension.
pub const MODEL_RANK_REL: f64 = 1e-10;

/// Truncated model of `H(S)`.
#[derive(Debug, Clone)]
pub struct ModelSpace {
    /// `(N+1)p × r` basis, `f = W c`.
    pub w: CMat,
    pub p: usize,
    pub n: usize,
}

impl ModelSpace {
    pub fn build(s: &MatrixPowerSeries, n: usize) -> Result<Self> {
        if !s.is_square() {
            return Err(Error::NonSquare { rows: s.blocks().0, cols: s.blocks().1 });
        }
        let check = toeplitz_contraction(s, n);
        if !check.pass {
            return Err(Error::NotMultiplier { norm: check.norm });
        }
        let t = toeplitz_matrix(s, n);
        let pm = numkit::eye(t.nrows()) - &t * t.adjoint();
        let (vals, vecs) = numkit::hermitian_eigen(&numkit::hermitian_part(&pm));
        let top = vals.last().copied().unwrap_or(0.0).max(0.0);
        let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > MODEL_RANK_REL * top && vals[i] > 0.0).collect();
        let mut w = numkit::zeros(t.nrows(), keep.len());
        for (col, &i) in keep.iter().enumerate() {
            w.set_column(col, &(vecs.column(i) * numkit::c(vals[i].sqrt(), 0.0)));
        }
        Ok(ModelSpace { w, p: s.p(), n })
    }

    pub fn dim(&self) -> usize {
        self.w.ncols()
    }

    /// Rows of coefficient blocks `lo..lo+count`.
    pub fn rows(&self, lo: usize, count: usize) -> CMat {
        self.w.rows(lo * self.p, count * self.p).into_owned()
    }

    /// Least-squares coordinates of a stacked coefficient column.
    pub fn coords(&self, stacked: &CMat) -> CMat {
        numkit::pinv(&self.w, 1e-12) * stacked
    }

    /// Squared model norm `||c||_F^2` of `f = W c`, with the fit residual.
    pub fn norm_sq(&self, stacked: &CMat) -> (f64, f64) {
        let cc = self.coords(stacked);
        let fit = (&self.w * &cc - stacked).norm();
        (cc.norm_squared(), fit)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtractedColligation {
    #[serde(with = "cmat_serde")]
    pub t_op: CMat,
    #[serde(with = "cmat_serde")]
    pub f_op: CMat,
    #[serde(with = "cmat_serde")]
    pub g_op: CMat,
    #[serde(with = "cmat_serde")]
    pub h_op: CMat,
    pub model_dim: usize,
    /// `max ||S_{n+1} - 𝒢 𝒯^n ℱ||_F` for `n + 1 ≤ N/2`, and `||S_0 - ℋ||_F`.
    pub reconstruction_residual: f64,
    /// `||V V^* - I||_F` for `V = [[𝒯, ℱ], [𝒢, ℋ]]`; zero when the model is exact.
    pub coisometry_defect: f64,
    /// `||W_top 𝒯 - W_bottom||_F / ||W||_F`.
    pub invariance_defect: f64,
}

/// Extract `(𝒯, ℱ, 𝒢, ℋ)` with `𝒯 = R_0`, `ℱ x = R_0(S x)`, `𝒢 f = f(0)`, `ℋ = S(0)`.
pub fn coisometric_extract(s: &MatrixPowerSeries, n: usize) -> Result<ExtractedColligation> {
    if n < 2 {
        return Err(Error::Invalid("coisometric_extract needs N ≥ 2".into()));
    }
    let model = ModelSpace::build(s, n)?;
    let p = model.p;
    let r = model.dim();
    let h_op = s.coeff(0);
    if r == 0 {
        let residual = (1..=n / 2).map(|k| s.coeff(k).norm()).fold(0.0, f64::max);
        return Ok(ExtractedColligation {
            t_op: numkit::zeros(0, 0),
            f_op: numkit::zeros(0, p),
            g_op: numkit::zeros(p, 0),
            h_op: h_op.clone(),
            model_dim: 0,
            reconstruction_residual: residual,
            coisometry_defect: (numkit::eye(p) - &h_op * h_op.adjoint()).norm(),
            invariance_defect: 0.0,
        });
    }
    let top = model.rows(0, n);
    let bottom = model.rows(1, n);
    let top_pinv = numkit::pinv(&top, 1e-12);
    let t_op = &top_pinv * &bottom;
    let g_op = model.rows(0, 1);
    let shifted: Vec<CMat> = (1..=n).map(|k| s.coeff(k)).collect();
    let f_op = &top_pinv * numkit::vcat(&shifted.iter().collect::<Vec<_>>());

    let mut residual = (&h_op - s.coeff(0)).norm();
    let mut chain = f_op.clone();
    for k in 0..n / 2 {
        residual = residual.max((s.coeff(k + 1) - &g_op * &chain).norm());
        chain = &t_op * chain;
    }

    let v = numkit::block2(&t_op, &f_op, &g_op, &h_op);
    let coisometry_defect = (&v * v.adjoint() - numkit::eye(v.nrows())).norm();
    let invariance_defect = (&top * &t_op - &bottom).norm() / model.w.norm().max(1e-300);
    Ok(ExtractedColligation {
        t_op,
        f_op,
        g_op,
        h_op,
        model_dim: r,
        reconstruction_residual: residual,
        coisometry_defect,
        invariance_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blaschke::Realization;
    use crate::numkit::{c, eye, zeros};
    use crate::sample::Sampler;

    fn scalar_series(coeffs: &[f64]) -> MatrixPowerSeries {
        MatrixPowerSeries::new(1, coeffs.iter().map(|&x| numkit::from_real_rows(1, 1, &[x])).collect()).unwrap()
    }

    fn blaschke_scalar(a: f64, n: usize) -> MatrixPowerSeries {
        // (z - a)/(1 - a z) = -a + Σ_{k≥1} (1 - a²) a^{k-1} z^k
        let mut v = vec![-a];
        for k in 1..=n {
            v.push((1.0 - a * a) * a.powi(k as i32 - 1));
        }
        scalar_series(&v)
    }

    fn inner_realization(seed: u64, state: usize, p: usize) -> Realization {
        let u = Sampler::new(seed).unitary(state + p);
        Realization::unweighted(
            u.view((0, 0), (state, state)).into_owned(),
            u.view((0, state), (state, p)).into_owned(),
            u.view((state, 0), (p, state)).into_owned(),
            u.view((state, state), (p, p)).into_owned(),
        )
        .unwrap()
    }

    #[test]
    fn shift_has_constant_model() {
        let s = scalar_series(&[0.0, 1.0]);
        let e = coisometric_extract(&s, 10).unwrap();
        assert_eq!(e.model_dim, 1);
        assert!(e.t_op[(0, 0)].norm() < 1e-12);
        assert!((e.g_op[(0, 0)].norm() - 1.0).abs() < 1e-12);
        // 𝒢 and ℱ share the basis phase, so their product is the invariant
        assert!(((e.g_op[(0, 0)] * e.f_op[(0, 0)]) - c(1.0, 0.0)).norm() < 1e-12);
        assert!(e.h_op[(0, 0)].norm() == 0.0);
        assert!(e.reconstruction_residual < 1e-12);
    }

    #[test]
    fn constant_has_no_chain() {
        let cm = numkit::from_real_rows(2, 2, &[0.3, 0.1, 0.0, 0.5]);
        let s = MatrixPowerSeries::constant(2, cm.clone()).unwrap();
        let e = coisometric_extract(&s, 8).unwrap();
        assert!((e.h_op - cm).norm() == 0.0);
        assert!(e.reconstruction_residual < 1e-12);
    }

    #[test]
    fn scalar_blaschke_model() {
        let a = 0.5;
        let s = blaschke_scalar(a, 60);
        let e = coisometric_extract(&s, 40).unwrap();
        assert_eq!(e.model_dim, 1);
        assert!(e.reconstruction_residual < 1e-7);
        assert!((e.t_op[(0, 0)] - c(a, 0.0)).norm() < 1e-10);
        let g = e.g_op[(0, 0)].norm();
        let f = e.f_op[(0, 0)].norm();
        assert!((g - (1.0 - a * a).sqrt()).abs() < 1e-10);
        assert!((f - (1.0 - a * a).sqrt()).abs() < 1e-10);
        assert!((e.h_op[(0, 0)] + c(a, 0.0)).norm() < 1e-14);
        assert!(e.coisometry_defect < 1e-8);
    }

    #[test]
    fn inner_matrix_multiplier_has_unitary_colligation() {
        let r = inner_realization(31, 3, 2);
        let s = r.to_series(2, 60).unwrap();
        let e = coisometric_extract(&s, 40).unwrap();
        assert_eq!(e.model_dim, 3);
        assert!(e.reconstruction_residual < 1e-7);
        assert!(e.coisometry_defect < 1e-8, "{}", e.coisometry_defect);
    }

    #[test]
    fn non_inner_multiplier_reconstructs() {
        let u = Sampler::new(32).contraction(5, 5, 0.9);
        let r = Realization::unweighted(
            u.view((0, 0), (3, 3)).into_owned(),
            u.view((0, 3), (3, 2)).into_owned(),
            u.view((3, 0), (2, 3)).into_owned(),
            u.view((3, 3), (2, 2)).into_owned(),
        )
        .unwrap();
        let s = r.to_series(2, 30).unwrap();
        let e = coisometric_extract(&s, 24).unwrap();
        assert!(e.reconstruction_residual < 1e-7, "{}", e.reconstruction_residual);
    }

    #[test]
    fn expansive_series_rejected() {
        let s = scalar_series(&[0.0, 1.5]);
        assert!(matches!(coisometric_extract(&s, 5), Err(Error::NotMultiplier { .. })));
    }

    #[test]
    fn backward_shift_is_contractive_in_model() {
        let r = inner_realization(33, 3, 2);
        let s = r.to_series(2, 60).unwrap();
        let e = coisometric_extract(&s, 40).unwrap();
        let mut smp = Sampler::new(34);
        for _ in 0..20 {
            let cc = smp.gaussian(e.model_dim, 2);
            let lhs = (&e.t_op * &cc).norm_squared();
            let f0 = &e.g_op * &cc;
            let rhs = cc.norm_squared() - numkit::max_singular_value(&(f0.adjoint() * &f0));
            assert!(lhs <= rhs + 1e-9, "{lhs} > {rhs}");
        }
    }

    // ||R_0(S C)||^2 equals ||C||^2 - ||S_0 C||^2 for inner S with a finite model, which
    // can exceed the trace form Tr(C (I - S_0 S_0^*) C^*) when S_0 is not normal.
    #[test]
    fn shifted_multiplier_norm_uses_right_defect() {
        let r = inner_realization(35, 2, 2);
        let n = 40;
        let s = r.to_series(2, n + 1).unwrap();
        let model = ModelSpace::build(&s, n).unwrap();
        let s0 = s.coeff(0);
        let mut smp = Sampler::new(36);
        let mut violated = false;
        for _ in 0..50 {
            let cm = smp.gaussian(2, 2);
            let stacked: Vec<CMat> = (1..=n + 1).map(|k| s.coeff(k) * &cm).collect();
            let (norm_sq, fit) = model.norm_sq(&numkit::vcat(&stacked.iter().collect::<Vec<_>>()));
            assert!(fit < 1e-9);
            let derived = cm.norm_squared() - (&s0 * &cm).norm_squared();
            let displayed = (&cm * (eye(2) - &s0 * s0.adjoint()) * cm.adjoint()).trace().re;
            assert!(norm_sq <= derived + 1e-8);
            assert!((norm_sq - derived).abs() < 1e-8);
            violated |= norm_sq > displayed + 1e-6;
        }
        assert!(violated);
    }

    // sup over truncated g of ||f + T g||^2 - ||g||^2 equals the range norm.
    #[test]
    fn range_norm_is_sup_of_defect() {
        let u = Sampler::new(37).contraction(4, 4, 0.7);
        let r = Realization::unweighted(
            u.view((0, 0), (2, 2)).into_owned(),
            u.view((0, 2), (2, 2)).into_owned(),
            u.view((2, 0), (2, 2)).into_owned(),
            u.view((2, 2), (2, 2)).into_owned(),
        )
        .unwrap();
        let n = 12;
        let s = r.to_series(2, n).unwrap();
        let t = toeplitz_matrix(&s, n);
        let model = ModelSpace::build(&s, n).unwrap();
        let mut smp = Sampler::new(38);
        let cc = smp.gaussian(model.dim(), 1);
        let f = &model.w * &cc;
        // maximizer of the concave quadratic g ↦ ||f + T g||^2 - ||g||^2
        let dim = t.ncols();
        let g = numkit::solve(&(eye(dim) - t.adjoint() * &t), &(t.adjoint() * &f)).unwrap();
        let sup = (&f + &t * &g).norm_squared() - g.norm_squared();
        assert!((sup - cc.norm_squared()).abs() < 1e-8 * cc.norm_squared().max(1.0));
        let worse = zeros(dim, 1);
        assert!((&f + &t * &worse).norm_squared() <= sup + 1e-12);
    }
}
