//! Leech factorization `Q = P ⋆ S` from a finite point sample.
//!
//! The Gram matrix of `K_{P,Q}(Z, W) = Σ Z^n (P(Z)P(W)^* - Q(Z)Q(W)^*) W^{*n}`
//! is factored as `H H^*`. The lurking isometry
//! `(H_i^* W_i^* x, P_i^* x) ↦ (H_i^* x, Q_i^* x)` is extended by zero and its
//! adjoint is read as a colligation for `S`.

use serde::{Deserialize, Serialize};

use super::{stein_gram, toeplitz_contraction, KernelGram, ToeplitzCheck, Verdict};
use crate::blaschke::Realization;
use crate::error::{Error, Result};
use crate::mps::MatrixPowerSeries;
use crate::numkit::{self, CMat, Tolerance};
use crate::sample::Sampler;

/// Relative eigenvalue cut for the rank of the Gram matrix.
pub const RANK_REL: f64 = 1e-10;

/// Relative singular-value cut on the isometry's domain. The Gram identity
/// only holds to about `RANK_REL`, so directions below its square root carry
/// no reliable information and would be amplified by the inverse.
pub const DOMAIN_REL: f64 = 1e-5;

#[derive(Debug, Clone)]
pub struct LeechSolution {
    pub s: MatrixPowerSeries,
    pub realization: Realization,
    pub rank: usize,
    pub lambda_min: f64,
    /// `max_i ||Q(W_i) - (P⋆S)(W_i)||_F`, with `P⋆S` truncated at the output order.
    pub residual: f64,
    pub toeplitz: ToeplitzCheck,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LeechSummary {
    pub rank: usize,
    pub lambda_min: f64,
    pub residual: f64,
    pub toeplitz_norm: f64,
}

impl LeechSolution {
    pub fn summary(&self) -> LeechSummary {
        LeechSummary {
            rank: self.rank,
            lambda_min: self.lambda_min,
            residual: self.residual,
            toeplitz_norm: self.toeplitz.norm,
        }
    }
}

/// Scalar points `z_k I` on two circles plus random normal matrices with `ρ ≤ 0.6`.
pub fn default_samples(p: usize, seed: u64) -> Vec<CMat> {
    let mut pts = Vec::new();
    for (radius, count) in [(0.3, 4), (0.6, 6)] {
        for k in 0..count {
            let t = std::f64::consts::TAU * (k as f64 + 0.25) / count as f64;
            pts.push(numkit::scalar(p, num_complex::Complex64::from_polar(radius, t)));
        }
    }
    pts.push(numkit::zeros(p, p));
    if p > 1 {
        let mut smp = Sampler::new(seed);
        for _ in 0..4 {
            pts.push(smp.normal_matrix(p, 0.6));
        }
    }
    pts
}

/// Gram of `K_{P,Q}` over the sample.
pub fn leech_gram(p: &MatrixPowerSeries, q: &MatrixPowerSeries, sample: &[CMat], tol: &Tolerance) -> Result<KernelGram> {
    let pv: Vec<CMat> = sample.iter().map(|w| p.eval(w)).collect::<Result<_>>()?;
    let qv: Vec<CMat> = sample.iter().map(|w| q.eval(w)).collect::<Result<_>>()?;
    let b = pv[0].nrows();
    let gram = stein_gram(sample, b, |i, j| &pv[i] * pv[j].adjoint() - &qv[i] * qv[j].adjoint())?;
    Ok(KernelGram::from_gram(gram, tol))
}

/// Solve `Q = P ⋆ S` for a Schur multiplier `S` of order `n`.
pub fn leech_solve(
    p: &MatrixPowerSeries,
    q: &MatrixPowerSeries,
    sample: &[CMat],
    n: usize,
    tol: &Tolerance,
) -> Result<LeechSolution> {
    if !p.is_square() || !q.is_square() || p.p() != q.p() {
        return Err(Error::DimensionMismatch("leech_solve expects square series of equal size".into()));
    }
    if sample.is_empty() {
        return Err(Error::Invalid("leech_solve needs sample points".into()));
    }
    let d = p.p();
    let kg = leech_gram(p, q, sample, tol)?;
    if kg.verdict == Verdict::Fail {
        return Err(Error::KernelNotPsd {
            min_eig: kg.lambda_min,
            witness: kg.witness.unwrap_or_default().into_iter().flatten().collect(),
        });
    }
    let (vals, vecs) = numkit::hermitian_eigen(&kg.gram);
    let top = vals.last().copied().unwrap_or(0.0);
    if top <= tol.abs {
        return Err(Error::RankCollapse);
    }
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > RANK_REL * top).collect();
    let r = keep.len();
    let mut h = numkit::zeros(kg.gram.nrows(), r);
    for (col, &i) in keep.iter().enumerate() {
        h.set_column(col, &(vecs.column(i) * num_complex::Complex64::new(vals[i].sqrt(), 0.0)));
    }

    // Columns of the domain and range of the isometry, one block per sample point.
    let m = sample.len();
    let mut dom = numkit::zeros(r + d, m * d);
    let mut ran = numkit::zeros(r + d, m * d);
    for (i, w) in sample.iter().enumerate() {
        let hi = h.view((i * d, 0), (d, r)).into_owned();
        let pi = p.eval(w)?;
        let qi = q.eval(w)?;
        dom.view_mut((0, i * d), (r, d)).copy_from(&(hi.adjoint() * w.adjoint()));
        dom.view_mut((r, i * d), (d, d)).copy_from(&pi.adjoint());
        ran.view_mut((0, i * d), (r, d)).copy_from(&hi.adjoint());
        ran.view_mut((r, i * d), (d, d)).copy_from(&qi.adjoint());
    }

    let svd = numkit::thin_svd(&dom);
    let smax = svd.s.first().copied().unwrap_or(0.0);
    let k = svd.s.iter().take_while(|&&s| s > DOMAIN_REL * smax.max(1e-300)).count();
    if k == 0 {
        return Err(Error::RankCollapse);
    }
    let ud = svd.u.columns(0, k).into_owned();
    let vd = svd.v.columns(0, k).into_owned();
    let sinv = numkit::diag_real(&svd.s[..k].iter().map(|s| 1.0 / s).collect::<Vec<_>>());
    // Y maps the orthonormal basis of the domain to the range; its polar factor
    // removes rounding so V = Y U_d^* is an exact partial isometry.
    let y = &ran * vd * sinv;
    let ys = numkit::thin_svd(&y);
    let polar = &ys.u * ys.v.adjoint();
    let v = polar * ud.adjoint();

    let u = v.adjoint();
    let realization = Realization::unweighted(
        u.view((0, 0), (r, r)).into_owned(),
        u.view((0, r), (r, d)).into_owned(),
        u.view((r, 0), (d, r)).into_owned(),
        u.view((r, r), (d, d)).into_owned(),
    )?;
    let s = realization.to_series(d, n)?;
    let toeplitz = toeplitz_contraction(&s, n.min(40));

    let ps = p.star_mul_trunc(&s, n)?;
    let residual = sample
        .iter()
        .map(|w| -> Result<f64> { Ok((q.eval(w)? - ps.eval(w)?).norm()) })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    Ok(LeechSolution { s, realization, rank: r, lambda_min: kg.lambda_min, residual, toeplitz })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp;
    use crate::numkit::{c, eye, scalar};

    fn unitary_realization(smp: &mut Sampler, state: usize, p: usize) -> Realization {
        let u = smp.unitary(state + p);
        Realization::unweighted(
            u.view((0, 0), (state, state)).into_owned(),
            u.view((0, state), (state, p)).into_owned(),
            u.view((state, 0), (p, state)).into_owned(),
            u.view((state, state), (p, p)).into_owned(),
        )
        .unwrap()
    }

    #[test]
    fn identity_factor_recovers_inner_q() {
        let mut smp = Sampler::new(21);
        let q = unitary_realization(&mut smp, 2, 2).to_series(2, 120).unwrap();
        let sol = leech_solve(&MatrixPowerSeries::identity(2), &q, &default_samples(2, 5), 120, &Tolerance::default()).unwrap();
        assert!(sol.toeplitz.pass);
        assert!(sol.residual < 1e-10, "{}", sol.residual);
        for k in 0..30 {
            assert!((sol.s.coeff(k) - q.coeff(k)).norm() < 1e-10, "coefficient {k}");
        }
    }

    #[test]
    fn identity_factor_with_contractive_q_matches_at_samples() {
        let mut smp = Sampler::new(22);
        let cm = smp.contraction(4, 4, 0.9);
        let r = Realization::unweighted(
            cm.view((0, 0), (2, 2)).into_owned(),
            cm.view((0, 2), (2, 2)).into_owned(),
            cm.view((2, 0), (2, 2)).into_owned(),
            cm.view((2, 2), (2, 2)).into_owned(),
        )
        .unwrap();
        let q = r.to_series(2, 150).unwrap();
        let sample = default_samples(2, 6);
        let sol = leech_solve(&MatrixPowerSeries::identity(2), &q, &sample, 150, &Tolerance::default()).unwrap();
        assert!(sol.toeplitz.pass);
        assert!(sol.residual < 1e-8, "{}", sol.residual);
    }

    #[test]
    fn shift_factor_halves() {
        let p = 2;
        let pz = MatrixPowerSeries::monomial(p, 1, eye(p)).unwrap();
        let q = MatrixPowerSeries::monomial(p, 2, eye(p) * c(0.5, 0.0)).unwrap();
        let sol = leech_solve(&pz, &q, &default_samples(p, 7), 30, &Tolerance::default()).unwrap();
        assert!(sol.residual < 1e-8, "{}", sol.residual);
        assert!(sol.toeplitz.pass);
        // oracle: Q_n = Σ P_k S_{n-k} forces S_0 = 0 at Z=0 sample and S(Z)W = Z/2 on samples
        let target = MatrixPowerSeries::monomial(p, 1, eye(p) * c(0.5, 0.0)).unwrap();
        for z in [scalar(p, c(0.3, 0.2)), scalar(p, c(-0.5, 0.1))] {
            let e = (sol.s.eval(&z).unwrap() - target.eval(&z).unwrap()).norm();
            assert!(e < 1e-6, "{e}");
        }
    }

    #[test]
    fn theta_round_trip() {
        let mut smp = Sampler::new(23);
        let nodes = vec![scalar(2, c(0.3, 0.0)), smp.normal_matrix(2, 0.4)];
        let theta = interp::theta(&nodes, 80).unwrap();
        let r0 = {
            let cm = smp.contraction(5, 5, 0.8);
            Realization::unweighted(
                cm.view((0, 0), (3, 3)).into_owned(),
                cm.view((0, 3), (3, 2)).into_owned(),
                cm.view((3, 0), (2, 3)).into_owned(),
                cm.view((3, 3), (2, 2)).into_owned(),
            )
            .unwrap()
        };
        let s0 = r0.to_series(2, 80).unwrap();
        let q = theta.star_mul_trunc(&s0, 80).unwrap();
        let sol = leech_solve(&theta, &q, &default_samples(2, 8), 80, &Tolerance::default()).unwrap();
        assert!(sol.residual < 1e-5, "{}", sol.residual);
        assert!(sol.toeplitz.pass);
    }

    #[test]
    fn non_factorable_pair_is_rejected() {
        // Q = 2P cannot be P⋆S with S contractive.
        let p = MatrixPowerSeries::identity(1);
        let q = p.scale(c(2.0, 0.0));
        let err = leech_solve(&p, &q, &default_samples(1, 0), 10, &Tolerance::default()).unwrap_err();
        match err {
            Error::KernelNotPsd { min_eig, witness } => {
                assert!(min_eig < 0.0);
                assert!(!witness.is_empty());
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn zero_gram_collapses() {
        let p = MatrixPowerSeries::zero(1, 0);
        let err = leech_solve(&p, &p, &default_samples(1, 0), 10, &Tolerance::default()).unwrap_err();
        assert!(matches!(err, Error::RankCollapse));
    }
}
