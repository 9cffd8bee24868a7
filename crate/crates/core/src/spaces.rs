//! Matrix-valued inner products on series spaces: Hardy, Fock and general
//! radial weights, the Szegő kernel, and quadrature checks of the integral forms.

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mps::MatrixPowerSeries;
use crate::numkit::{self, c, CMat};

/// Weights `γ_0..γ_N` of the form `Σ γ_n G_n^* F_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSequence {
    gammas: Vec<f64>,
}

impl WeightSequence {
    pub fn new(gammas: Vec<f64>) -> Result<Self> {
        if gammas.iter().any(|g| !g.is_finite() || *g < 0.0) {
            return Err(Error::Invalid("weights must be finite and non-negative".into()));
        }
        if gammas.iter().all(|g| *g == 0.0) {
            return Err(Error::Invalid("weights are all zero".into()));
        }
        Ok(WeightSequence { gammas })
    }

    /// All ones.
    pub fn hardy(n: usize) -> Self {
        WeightSequence { gammas: vec![1.0; n + 1] }
    }

    /// `γ_n = n!`.
    pub fn fock(n: usize) -> Self {
        let mut g = Vec::with_capacity(n + 1);
        let mut f = 1.0;
        for k in 0..=n {
            if k > 0 {
                f *= k as f64;
            }
            g.push(f);
        }
        WeightSequence { gammas: g }
    }

    /// `γ_0 = 0`, `γ_n = n`.
    pub fn dirichlet(n: usize) -> Self {
        WeightSequence { gammas: (0..=n).map(|k| k as f64).collect() }
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn order(&self) -> usize {
        self.gammas.len() - 1
    }
}

fn check_pair(f: &MatrixPowerSeries, g: &MatrixPowerSeries) -> Result<()> {
    if f.p() != g.p() || f.blocks().0 != g.blocks().0 {
        return Err(Error::DimensionMismatch(format!(
            "inner product of p={} {:?} and p={} {:?} series",
            f.p(),
            f.blocks(),
            g.p(),
            g.blocks()
        )));
    }
    Ok(())
}

/// `[F, G]_2 = Σ G_n^* F_n`; the scalar inner product is its trace.
pub fn hardy_inner(f: &MatrixPowerSeries, g: &MatrixPowerSeries) -> Result<CMat> {
    check_pair(f, g)?;
    let n = f.order().min(g.order());
    let mut acc = CMat::zeros(g.coeff(0).ncols(), f.coeff(0).ncols());
    for k in 0..=n {
        acc += g.coeffs()[k].ad_mul(&f.coeffs()[k]);
    }
    Ok(acc)
}

/// `Σ γ_n G_n^* F_n`.
pub fn weighted_inner(f: &MatrixPowerSeries, g: &MatrixPowerSeries, w: &WeightSequence) -> Result<CMat> {
    check_pair(f, g)?;
    let n = f.order().min(g.order());
    if w.order() < n {
        return Err(Error::DimensionMismatch(format!(
            "weights cover order {}, series need {n}",
            w.order()
        )));
    }
    let mut acc = CMat::zeros(g.coeff(0).ncols(), f.coeff(0).ncols());
    for k in 0..=n {
        if w.gammas[k] != 0.0 {
            acc += g.coeffs()[k].ad_mul(&f.coeffs()[k]) * c(w.gammas[k], 0.0);
        }
    }
    Ok(acc)
}

/// Szegő kernel `K(·, W)` truncated at order `N`, with its tail bound.
#[derive(Debug, Clone)]
pub struct SzegoKernel {
    pub series: MatrixPowerSeries,
    /// `ρ(W)^{N+1} / (1 - ρ(W))`.
    pub tail_bound: f64,
}

/// `K(Z, W) = Σ Z^n W^{*n}` through order `n`.
pub fn szego_kernel(w: &CMat, n: usize) -> Result<SzegoKernel> {
    let p = numkit::ensure_square(w)?;
    let rho = numkit::spectral_radius(w)?;
    if rho >= 1.0 - numkit::STEIN_MARGIN {
        return Err(Error::SpectralRadiusTooLarge { rho, bound: 1.0 - numkit::STEIN_MARGIN });
    }
    let ws = w.adjoint();
    let mut coeffs = Vec::with_capacity(n + 1);
    let mut pw = numkit::eye(p);
    for _ in 0..=n {
        coeffs.push(pw.clone());
        pw = &pw * &ws;
    }
    Ok(SzegoKernel {
        series: MatrixPowerSeries::new(p, coeffs)?,
        tail_bound: rho.powi(n as i32 + 1) / (1.0 - rho),
    })
}

/// Trapezoid rule for `(1/2π)∫ F(re^{iθ}I)^* F(re^{iθ}I) dθ` with `m` nodes.
pub fn radial_quadrature(f: &MatrixPowerSeries, r: f64, m: usize) -> Result<CMat> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::RadiusOrder { r, lower: 0.0, upper: 1.0 });
    }
    if m < 2 * (f.order() + 1) {
        return Err(Error::Invalid(format!(
            "radial quadrature needs at least {} nodes, got {m}",
            2 * (f.order() + 1)
        )));
    }
    let dim = f.coeff(0).ncols();
    let sum = (0..m)
        .into_par_iter()
        .map(|k| {
            let z = Complex64::from_polar(r, 2.0 * std::f64::consts::PI * k as f64 / m as f64);
            let v = f.horner_scalar(z);
            v.ad_mul(&v)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(CMat::zeros(dim, dim), |a, b| a + b);
    Ok(sum / c(m as f64, 0.0))
}

/// `Σ r^{2n} F_n^* F_n`, the closed form of [`radial_quadrature`].
pub fn radial_closed_form(f: &MatrixPowerSeries, r: f64) -> CMat {
    let dim = f.coeff(0).ncols();
    let mut acc = CMat::zeros(dim, dim);
    for (n, fn_) in f.coeffs().iter().enumerate() {
        acc += fn_.ad_mul(fn_) * c(r.powi(2 * n as i32), 0.0);
    }
    acc
}

/// Polar grid for [`gaussian_quadrature_fock`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FockGrid {
    pub radial: usize,
    pub angular: usize,
    pub cutoff: f64,
}

impl Default for FockGrid {
    fn default() -> Self {
        FockGrid { radial: 400, angular: 64, cutoff: 6.0 }
    }
}

/// `(1/π)∬_{|z|<R} F(zI)^* F(zI) e^{-|z|^2} dx dy` with Gauss-Legendre nodes in the
/// radius and the trapezoid rule in the angle.
pub fn gaussian_quadrature_fock(f: &MatrixPowerSeries, grid: FockGrid) -> Result<CMat> {
    if grid.radial == 0 || grid.angular == 0 || grid.cutoff.is_nan() || grid.cutoff <= 0.0 {
        return Err(Error::Invalid("Fock grid needs positive counts and cutoff".into()));
    }
    let rule = GaussLegendre::new(grid.radial.max(2)).map_err(|e| Error::Invalid(e.to_string()))?;
    let half = grid.cutoff / 2.0;
    let dim = f.coeff(0).ncols();
    let m = grid.angular;
    let sum = rule
        .as_node_weight_pairs()
        .par_iter()
        .map(|&(x, w)| {
            let r = half * (x + 1.0);
            let radial_w = half * w * r * (-r * r).exp();
            let mut ring = CMat::zeros(dim, dim);
            for k in 0..m {
                let z = Complex64::from_polar(r, 2.0 * std::f64::consts::PI * k as f64 / m as f64);
                let v = f.horner_scalar(z);
                ring += v.ad_mul(&v);
            }
            // (1/π) · (2π/m) · Σ_k
            ring * c(2.0 * radial_w / m as f64, 0.0)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(CMat::zeros(dim, dim), |a, b| a + b);
    Ok(sum)
}
