//! Interpolation `F(A_j) = B_j` in the Hardy module: Gram matrix, minimal-norm
//! solution, the divisor `Θ`, its weighted-unitary realization and the
//! parametrization `F = F_min + Θ ⋆ G`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blaschke::Realization;
use crate::error::{Error, Result};
use crate::mps::MatrixPowerSeries;
use crate::numkit::{self, c, cmat_vec_serde, CMat};

/// Relative threshold on `λ_min(𝐆) / ||𝐆||` below which the Gram matrix is treated as singular.
pub const GRAM_PD_REL: f64 = 1e-10;

/// Condition-number ceiling for `I - A_j`.
pub const NODE_AT_ONE_COND: f64 = 1e12;

/// Nodes `A_j` and target values `B_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpolationData {
    #[serde(with = "cmat_vec_serde")]
    pub nodes: Vec<CMat>,
    #[serde(with = "cmat_vec_serde")]
    pub values: Vec<CMat>,
}

impl InterpolationData {
    pub fn new(nodes: Vec<CMat>, values: Vec<CMat>) -> Result<Self> {
        let d = InterpolationData { nodes, values };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<usize> {
        if self.nodes.is_empty() || self.nodes.len() != self.values.len() {
            return Err(Error::Invalid(format!(
                "{} nodes and {} values",
                self.nodes.len(),
                self.values.len()
            )));
        }
        let p = numkit::ensure_square(&self.nodes[0])?;
        for (a, b) in self.nodes.iter().zip(&self.values) {
            if a.nrows() != p || a.ncols() != p || b.nrows() != p || b.ncols() != p {
                return Err(Error::DimensionMismatch("all nodes and values must be p×p".into()));
            }
            let rho = numkit::spectral_radius(a)?;
            if rho >= 1.0 - numkit::STEIN_MARGIN {
                return Err(Error::SpectralRadiusTooLarge { rho, bound: 1.0 - numkit::STEIN_MARGIN });
            }
        }
        Ok(p)
    }

    pub fn p(&self) -> usize {
        self.nodes[0].nrows()
    }
}

/// Minimal solution, divisor and Gram data.
#[derive(Debug, Clone)]
pub struct InterpolationSolution {
    pub fmin: MatrixPowerSeries,
    /// `None` when some `I - A_j` is singular.
    pub theta: Option<MatrixPowerSeries>,
    pub gram: CMat,
    pub lambda_min: f64,
    pub coeffs: Vec<CMat>,
    pub nodes: Vec<CMat>,
}

/// `𝐆` with blocks `Σ_n A_k^n A_j^{*n}`.
pub fn gram(nodes: &[CMat]) -> Result<CMat> {
    if nodes.is_empty() {
        return Err(Error::Invalid("no nodes".into()));
    }
    let p = numkit::ensure_square(&nodes[0])?;
    let m = nodes.len();
    let blocks: Vec<((usize, usize), CMat)> = (0..m * m)
        .into_par_iter()
        .filter(|idx| idx / m <= idx % m)
        .map(|idx| {
            let (k, j) = (idx / m, idx % m);
            Ok(((k, j), numkit::stein_solve_pair(&nodes[k], &nodes[j], &numkit::eye(p))?))
        })
        .collect::<Result<_>>()?;
    let mut g = CMat::zeros(m * p, m * p);
    for ((k, j), b) in blocks {
        g.view_mut((k * p, j * p), (p, p)).copy_from(&b);
        if k != j {
            g.view_mut((j * p, k * p), (p, p)).copy_from(&b.adjoint());
        }
    }
    Ok(numkit::hermitian_part(&g))
}

/// `(𝒜, 𝒞) = (diag(A_j^*), [I ... I])`.
pub fn structure_pair(nodes: &[CMat]) -> (CMat, CMat) {
    let p = nodes[0].nrows();
    let a = numkit::block_diag(&nodes.iter().map(|x| x.adjoint()).collect::<Vec<_>>());
    let eyes = vec![numkit::eye(p); nodes.len()];
    let cm = numkit::hcat(&eyes.iter().collect::<Vec<_>>());
    (a, cm)
}

/// Residual of `𝐆 - 𝒜^* 𝐆 𝒜 = 𝒞^* 𝒞`.
pub fn gram_stein_residual(nodes: &[CMat], g: &CMat) -> f64 {
    let (a, cm) = structure_pair(nodes);
    (g - a.adjoint() * g * &a - cm.adjoint() * &cm).norm()
}

fn gram_checked(nodes: &[CMat]) -> Result<(CMat, f64)> {
    let g = gram(nodes)?;
    let (ev, _) = numkit::hermitian_eigen(&g);
    let lambda_min = ev[0];
    if lambda_min <= GRAM_PD_REL * g.norm() {
        return Err(Error::GramSingular { lambda_min });
    }
    Ok((g, lambda_min))
}

fn split_blocks(stacked: &CMat, p: usize) -> Vec<CMat> {
    (0..stacked.nrows() / p).map(|j| stacked.rows(j * p, p).into_owned()).collect()
}

/// Series `Σ_n Z^n Σ_j A_j^{*n} X_j` through order `n`.
fn kernel_combination(nodes: &[CMat], xs: &[CMat], n: usize) -> Result<MatrixPowerSeries> {
    let p = nodes[0].nrows();
    let mut terms: Vec<CMat> = xs.to_vec();
    let adj: Vec<CMat> = nodes.iter().map(|a| a.adjoint()).collect();
    let mut coeffs = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        let mut acc = CMat::zeros(p, p);
        for t in &terms {
            acc += t;
        }
        coeffs.push(acc);
        for (t, a) in terms.iter_mut().zip(&adj) {
            *t = a * &*t;
        }
    }
    MatrixPowerSeries::new(p, coeffs)
}

/// `X = 𝐆^{-1} col((I - A_j)^{-1})`.
fn theta_weights(nodes: &[CMat], g: &CMat) -> Result<Vec<CMat>> {
    let p = nodes[0].nrows();
    let mut col = Vec::with_capacity(nodes.len());
    for (j, a) in nodes.iter().enumerate() {
        let m = numkit::eye(p) - a;
        let cond = numkit::condition_number(&m);
        if !cond.is_finite() || cond > NODE_AT_ONE_COND {
            return Err(Error::NodeAtOne { index: j });
        }
        col.push(numkit::inverse(&m)?);
    }
    let stacked = numkit::vcat(&col.iter().collect::<Vec<_>>());
    Ok(split_blocks(&numkit::solve(g, &stacked)?, p))
}

/// Minimal-norm interpolant through order `n`, with `Θ` when it exists.
pub fn solve_min(data: &InterpolationData, n: usize) -> Result<InterpolationSolution> {
    let p = data.validate()?;
    let (g, lambda_min) = gram_checked(&data.nodes)?;
    let b = numkit::vcat(&data.values.iter().collect::<Vec<_>>());
    let coeffs = split_blocks(&numkit::solve(&g, &b)?, p);
    let fmin = kernel_combination(&data.nodes, &coeffs, n)?;
    let theta = match theta_from_gram(&data.nodes, &g, n) {
        Ok(t) => Some(t),
        Err(Error::NodeAtOne { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(InterpolationSolution { fmin, theta, gram: g, lambda_min, coeffs, nodes: data.nodes.clone() })
}

fn theta_from_gram(nodes: &[CMat], g: &CMat, n: usize) -> Result<MatrixPowerSeries> {
    let p = nodes[0].nrows();
    let xs = theta_weights(nodes, g)?;
    let y = kernel_combination(nodes, &xs, n)?;
    let mut coeffs = Vec::with_capacity(n + 1);
    coeffs.push(numkit::eye(p) - y.coeff(0));
    for k in 1..=n {
        coeffs.push(y.coeff(k - 1) - y.coeff(k));
    }
    MatrixPowerSeries::new(p, coeffs)
}

/// `Θ(Z) = I - (I - Z) ⋆ Σ_j (I - Z A_j^*)^{-⋆} X_j` through order `n`; vanishes at every node.
pub fn theta(nodes: &[CMat], n: usize) -> Result<MatrixPowerSeries> {
    let (g, _) = gram_checked(nodes)?;
    theta_from_gram(nodes, &g, n)
}

/// Realization of `Θ` with weight `𝐆`:
/// `𝒜 = diag(A_j^*)`, `𝒞 = [I ... I]`, `ℬ = (I - 𝒜) 𝐆^{-1} (I - 𝒜^*)^{-1} 𝒞^*`,
/// `𝒟 = I - 𝒞 𝐆^{-1} (I - 𝒜^*)^{-1} 𝒞^*`.
pub fn psi_realization(nodes: &[CMat]) -> Result<Realization> {
    let (g, _) = gram_checked(nodes)?;
    let p = nodes[0].nrows();
    let xs = theta_weights(nodes, &g)?;
    let x = numkit::vcat(&xs.iter().collect::<Vec<_>>());
    let (a, cm) = structure_pair(nodes);
    let b = (numkit::eye(a.nrows()) - &a) * &x;
    let d = numkit::eye(p) - &cm * &x;
    Realization::new(a, b, cm, d, g)
}

/// `F_min + Θ ⋆ G`, truncated at the order of `F_min`.
pub fn parametrize(sol: &InterpolationSolution, g: &MatrixPowerSeries) -> Result<MatrixPowerSeries> {
    let theta = sol.theta.as_ref().ok_or_else(|| {
        let idx = sol
            .nodes
            .iter()
            .position(|a| numkit::condition_number(&(numkit::eye(a.nrows()) - a)) > NODE_AT_ONE_COND)
            .unwrap_or(0);
        Error::NodeAtOne { index: idx }
    })?;
    let n = sol.fmin.order();
    sol.fmin.add(&theta.star_mul_trunc(g, n)?)
}

/// `max_j ||F(A_j) - B_j||_F`.
pub fn interpolation_residual(f: &MatrixPowerSeries, data: &InterpolationData) -> Result<f64> {
    let mut worst = 0.0_f64;
    for (a, b) in data.nodes.iter().zip(&data.values) {
        worst = worst.max((f.eval(a)? - b).norm());
    }
    Ok(worst)
}

/// Kernel tail bound `(max_j ρ(A_j))^{N+1}`.
pub fn tail_bound(nodes: &[CMat], n: usize) -> f64 {
    let rho = nodes.iter().map(|a| numkit::spectral_radius(a).unwrap_or(1.0)).fold(0.0, f64::max);
    rho.powi(n as i32 + 1)
}

/// Literal reading of the input map, `ℬ = 𝐆^{-1}(I - 𝒜^*)^{-1}𝒞^*`, kept for comparison.
pub fn psi_realization_literal(nodes: &[CMat]) -> Result<Realization> {
    let mut r = psi_realization(nodes)?;
    let (g, _) = gram_checked(nodes)?;
    let xs = theta_weights(nodes, &g)?;
    r.b = numkit::vcat(&xs.iter().collect::<Vec<_>>());
    Ok(r)
}

/// Pointwise kernel of `ψ`: `(I - ψ(z)ψ(w)^*)/(1 - z w̄)`.
pub fn psi_kernel_lhs(r: &Realization, z: num_complex::Complex64, w: num_complex::Complex64) -> Result<CMat> {
    let psi = |x: num_complex::Complex64| -> Result<CMat> {
        let n = r.a.nrows();
        let res = numkit::solve(&(numkit::eye(n) - &r.a * x), &r.b)?;
        Ok(&r.d + &r.c * res * x)
    };
    let (pz, pw) = (psi(z)?, psi(w)?);
    Ok((numkit::eye(pz.nrows()) - pz * pw.adjoint()) / (c(1.0, 0.0) - z * w.conj()))
}

/// `𝒞 (I - z𝒜)^{-1} 𝐆^{-1} (I - w̄ 𝒜^*)^{-1} 𝒞^*`.
pub fn psi_kernel_rhs(r: &Realization, z: num_complex::Complex64, w: num_complex::Complex64) -> Result<CMat> {
    let n = r.a.nrows();
    let left = &r.c * numkit::inverse(&(numkit::eye(n) - &r.a * z))?;
    let right = numkit::inverse(&(numkit::eye(n) - r.a.adjoint() * w.conj()))? * r.c.adjoint();
    Ok(left * numkit::solve(&r.weight, &right)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blaschke::check_weighted_unitary;
    use crate::numkit::{eye, scalar};
    use crate::sample::Sampler;
    use crate::spaces::hardy_inner;

    fn assert_close(a: &CMat, b: &CMat, tol: f64) {
        let d = (a - b).norm();
        assert!(d <= tol, "difference {d:e} exceeds {tol:e}");
    }

    fn half() -> CMat {
        scalar(2, c(0.5, 0.0))
    }

    #[test]
    fn gram_examples() {
        assert_close(&gram(&[CMat::zeros(2, 2)]).unwrap(), &eye(2), 1e-15);
        let g = gram(&[CMat::zeros(2, 2), half()]).unwrap();
        let expect = numkit::block2(&eye(2), &eye(2), &eye(2), &(eye(2) * c(4.0 / 3.0, 0.0)));
        assert_close(&g, &expect, 1e-13);
        let (a, b) = (c(0.3, 0.2), c(-0.5, 0.1));
        let g = gram(&[scalar(1, a), scalar(1, b)]).unwrap();
        let pick = |x: num_complex::Complex64, y: num_complex::Complex64| 1.0 / (1.0 - x * y.conj());
        assert!((g[(0, 1)] - pick(a, b)).norm() < 1e-14);
        assert!((g[(1, 0)] - pick(b, a)).norm() < 1e-14);
        assert!((g[(1, 1)] - pick(b, b)).norm() < 1e-14);
    }

    #[test]
    fn gram_satisfies_structure_identity() {
        let mut s = Sampler::new(1);
        let nodes: Vec<CMat> = (0..3).map(|_| s.with_spectral_radius(2, 0.6)).collect();
        let g = gram(&nodes).unwrap();
        assert!(gram_stein_residual(&nodes, &g) < 1e-9);
    }

    #[test]
    fn minimal_solution_examples() {
        let mut s = Sampler::new(2);
        let b = s.gaussian(2, 2);
        let d = InterpolationData::new(vec![CMat::zeros(2, 2)], vec![b.clone()]).unwrap();
        let sol = solve_min(&d, 10).unwrap();
        assert_close(&sol.fmin.coeff(0), &b, 1e-14);
        assert!(sol.fmin.backward_shift().max_coeff_norm() < 1e-14);

        let d = InterpolationData::new(vec![half()], vec![eye(2)]).unwrap();
        let sol = solve_min(&d, 10).unwrap();
        assert_close(&sol.coeffs[0], &(eye(2) * c(0.75, 0.0)), 1e-14);
        for n in 0..=10 {
            assert_close(&sol.fmin.coeff(n), &(eye(2) * c(0.75 * 0.5f64.powi(n as i32), 0.0)), 1e-14);
        }

        let d = InterpolationData::new(vec![CMat::zeros(2, 2), half()], vec![s.gaussian(2, 2), s.gaussian(2, 2)]).unwrap();
        let sol = solve_min(&d, 60).unwrap();
        assert!(interpolation_residual(&sol.fmin, &d).unwrap() < 1e-8);
    }

    #[test]
    fn coincident_nodes_are_rejected() {
        let d = InterpolationData::new(vec![half(), half()], vec![eye(2), eye(2)]).unwrap();
        assert!(matches!(solve_min(&d, 10), Err(Error::GramSingular { .. })));
    }

    #[test]
    fn theta_examples() {
        let t = theta(&[CMat::zeros(2, 2)], 6).unwrap();
        assert_close(&t.coeff(0), &CMat::zeros(2, 2), 1e-15);
        assert_close(&t.coeff(1), &eye(2), 1e-15);
        assert!(t.backward_shift().backward_shift().max_coeff_norm() < 1e-15);

        let a = c(0.4, -0.3);
        let t = theta(&[scalar(2, a)], 80).unwrap();
        assert!(t.eval(&scalar(2, a)).unwrap().norm() < 1e-9);

        let nodes = [CMat::zeros(2, 2), half()];
        let t = theta(&nodes, 60).unwrap();
        for a in &nodes {
            assert!(t.eval(a).unwrap().norm() < 1e-9);
        }
        assert!(matches!(theta(&[eye(2) * c(0.0, 0.0), scalar(2, c(1.0 - 1e-14, 0.0))], 5), Err(_)));
    }

    #[test]
    fn node_at_one_is_reported() {
        // The radius guard already rejects 1 in the spectrum, so call the weight builder directly.
        let xs = theta_weights(&[scalar(1, c(1.0, 0.0))], &eye(1));
        assert!(matches!(xs, Err(Error::NodeAtOne { index: 0 })));
    }

    #[test]
    fn psi_realization_examples() {
        let r = psi_realization(&[CMat::zeros(2, 2)]).unwrap();
        let ser = r.to_series(2, 5).unwrap();
        assert_close(&ser.coeff(0), &CMat::zeros(2, 2), 1e-15);
        assert_close(&ser.coeff(1), &eye(2), 1e-15);
        assert!(check_weighted_unitary(&r) < 1e-12);

        let nodes = [CMat::zeros(2, 2), half()];
        let r = psi_realization(&nodes).unwrap();
        assert!(check_weighted_unitary(&r) < 1e-9);
        let t = theta(&nodes, 30).unwrap();
        let ser = r.to_series(2, 30).unwrap();
        for n in 0..=30 {
            assert_close(&ser.coeff(n), &t.coeff(n), 1e-9);
        }
    }

    #[test]
    fn literal_input_map_is_not_weighted_unitary() {
        let nodes = [CMat::zeros(2, 2), half()];
        let lit = psi_realization_literal(&nodes).unwrap();
        assert!(check_weighted_unitary(&lit) > 1e-2);
        let t = theta(&nodes, 10).unwrap();
        assert!((lit.to_series(2, 10).unwrap().coeff(2) - t.coeff(2)).norm() > 1e-3);
    }

    #[test]
    fn psi_kernel_identity_for_scalar_nodes() {
        let mut s = Sampler::new(3);
        let nodes: Vec<CMat> = (0..3).map(|_| scalar(1, s.point_in_disk(0.8))).collect();
        let r = psi_realization(&nodes).unwrap();
        assert!(check_weighted_unitary(&r) < 1e-9);
        for _ in 0..5 {
            let (z, w) = (s.point_in_disk(0.9), s.point_in_disk(0.9));
            let lhs = psi_kernel_lhs(&r, z, w).unwrap();
            let rhs = psi_kernel_rhs(&r, z, w).unwrap();
            assert_close(&lhs, &rhs, 1e-8);
        }
    }

    #[test]
    fn parametrized_solutions_interpolate_orthogonally() {
        let mut s = Sampler::new(4);
        let d = InterpolationData::new(vec![CMat::zeros(2, 2), half()], vec![s.gaussian(2, 2), s.gaussian(2, 2)]).unwrap();
        let sol = solve_min(&d, 80).unwrap();
        let f0 = parametrize(&sol, &MatrixPowerSeries::zero(2, 0)).unwrap();
        assert_close(&f0.coeff(3), &sol.fmin.coeff(3), 0.0);
        let g = s.series(2, 10, 1.0);
        let f = parametrize(&sol, &g).unwrap();
        assert!(interpolation_residual(&f, &d).unwrap() < 1e-7);
        let tg = f.sub(&sol.fmin).unwrap();
        let ip = hardy_inner(&sol.fmin, &tg).unwrap().trace().norm();
        let scale = sol.fmin.hardy_norm_sq().sqrt() * tg.hardy_norm_sq().sqrt();
        assert!(ip < 1e-7 * scale);
    }

    #[test]
    fn theta_is_isometric_and_vanishing() {
        let mut s = Sampler::new(5);
        let nodes: Vec<CMat> = (0..2).map(|_| s.with_spectral_radius(2, 0.5)).collect();
        let n = 80;
        let t = theta(&nodes, n).unwrap();
        let g = s.series(2, n / 4, 1.0);
        let tg = t.star_mul_trunc(&g, n + n / 4).unwrap();
        let lhs = tg.hardy_norm_sq();
        assert!((lhs - g.hardy_norm_sq()).abs() < 1e-6 * g.hardy_norm_sq());
        let tgn = t.star_mul_trunc(&g, n).unwrap();
        for a in &nodes {
            assert!(tgn.eval(a).unwrap().norm() < 1e-8);
        }
        let zero = InterpolationData::new(nodes.clone(), vec![CMat::zeros(2, 2); 2]).unwrap();
        assert!(solve_min(&zero, 10).unwrap().fmin.max_coeff_norm() < 1e-15);
    }
}
