//! Inversion in the Wiener algebra `𝔚₊` and realization of rational series.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blaschke::Realization;
use crate::error::{Error, Result};
use crate::mps::MatrixPowerSeries;
use crate::numkit::{self, c, CMat};
use crate::sample::Sampler;

/// Default number of circle points for the determinant test.
pub const DEFAULT_GRID: usize = 512;

/// A truncated series together with its `ℓ¹` norm `Σ ||F_n||`.
#[derive(Debug, Clone)]
pub struct WienerSeries {
    pub series: MatrixPowerSeries,
    pub l1_norm: f64,
}

impl WienerSeries {
    pub fn new(series: MatrixPowerSeries) -> Result<Self> {
        if !series.is_square() {
            return Err(Error::NonSquare { rows: series.blocks().0, cols: series.blocks().1 });
        }
        let l1_norm = series.coeffs().iter().map(numkit::max_singular_value).sum();
        Ok(WienerSeries { series, l1_norm })
    }
}

fn det(m: &CMat) -> Complex64 {
    m.clone().lu().determinant()
}

/// Coefficients of the polynomial `det F(zI)` and its roots.
#[derive(Debug, Clone)]
pub struct DeterminantPolynomial {
    pub coeffs: Vec<Complex64>,
    pub roots: Vec<Complex64>,
}

/// Interpolate `z ↦ det F(zI)` (degree ≤ p·N) from `m` circle samples.
pub fn determinant_polynomial(f: &MatrixPowerSeries, m: usize) -> Result<DeterminantPolynomial> {
    let deg = f.p() * f.order();
    let m = m.max(deg + 1);
    let samples: Vec<Complex64> = (0..m)
        .into_par_iter()
        .map(|k| {
            let z = Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / m as f64);
            det(&f.horner_scalar(z))
        })
        .collect();
    let mut coeffs: Vec<Complex64> = (0..=deg)
        .map(|n| {
            let s: Complex64 = samples
                .iter()
                .enumerate()
                .map(|(k, v)| v * Complex64::from_polar(1.0, -std::f64::consts::TAU * (n * k) as f64 / m as f64))
                .sum();
            s / m as f64
        })
        .collect();
    let scale = coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    while coeffs.len() > 1 && coeffs.last().map(|z| z.norm() <= 1e-13 * scale).unwrap_or(false) {
        coeffs.pop();
    }
    let d = coeffs.len() - 1;
    let roots = if d == 0 {
        Vec::new()
    } else {
        let lead = coeffs[d];
        let mut comp = numkit::zeros(d, d);
        for i in 1..d {
            comp[(i, i - 1)] = c(1.0, 0.0);
        }
        for i in 0..d {
            comp[(i, d - 1)] = -coeffs[i] / lead;
        }
        numkit::eigenvalues(&comp)?
    };
    Ok(DeterminantPolynomial { coeffs, roots })
}

/// Winding number of `det F(zI)` around 0 along `|z| = 1`, from `m` samples.
pub fn winding_number(f: &MatrixPowerSeries, m: usize) -> f64 {
    let vals: Vec<Complex64> = (0..=m)
        .map(|k| det(&f.horner_scalar(Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / m as f64))))
        .collect();
    let total: f64 = vals.windows(2).map(|w| (w[1] / w[0]).arg()).sum();
    total / std::f64::consts::TAU
}

#[derive(Debug, Clone)]
pub struct WienerInverse {
    pub g: MatrixPowerSeries,
    /// `max_n ||(F⋆G)_n - δ_{n0} I||_F` through the output order.
    pub residual: f64,
    pub l1_norm: f64,
    pub min_det: f64,
    pub winding: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WienerSummary {
    pub residual: f64,
    pub l1_norm: f64,
    pub min_det: f64,
    pub winding: f64,
}

impl WienerInverse {
    pub fn summary(&self) -> WienerSummary {
        WienerSummary { residual: self.residual, l1_norm: self.l1_norm, min_det: self.min_det, winding: self.winding }
    }
}

/// Invert `F` in `𝔚₊` through order `n` after checking `det F(zI) ≠ 0` on the closed disk.
///
/// The check samples `|det F(zI)|` on `grid` circle points, at 0 and at random
/// interior points, and locates the zeros of the determinant polynomial; any zero
/// with `|z| ≤ 1` is returned as the witness.
pub fn wplus_invert(f: &WienerSeries, n: usize, grid: usize) -> Result<WienerInverse> {
    let s = &f.series;
    let p = s.p();
    let det_tol = 1e-8 * f.l1_norm.powi(p as i32);

    let poly = determinant_polynomial(s, grid.max(DEFAULT_GRID))?;
    if let Some(z) = poly
        .roots
        .iter()
        .filter(|z| z.norm() <= 1.0 + 1e-9)
        .min_by(|a, b| a.norm().total_cmp(&b.norm()))
    {
        return Err(Error::DeterminantVanishes { z: *z });
    }

    let mut probes: Vec<Complex64> =
        (0..grid).map(|k| Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / grid as f64)).collect();
    probes.push(c(0.0, 0.0));
    let mut smp = Sampler::new(grid as u64);
    probes.extend((0..32).map(|_| smp.point_in_disk(1.0)));
    let dets: Vec<(Complex64, f64)> = probes.par_iter().map(|&z| (z, det(&s.horner_scalar(z)).norm())).collect();
    let (zmin, min_det) = dets.iter().copied().min_by(|a, b| a.1.total_cmp(&b.1)).expect("non-empty grid");
    if min_det <= det_tol {
        return Err(Error::DeterminantVanishes { z: zmin });
    }
    let winding = winding_number(s, grid);
    if winding.abs() > 0.5 {
        return Err(Error::DeterminantVanishes { z: zmin });
    }

    let g = s.star_inverse(n)?;
    let prod = s.star_mul_trunc(&g, n)?;
    let residual = prod
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, x)| if k == 0 { (x - numkit::eye(p)).norm() } else { x.norm() })
        .fold(0.0, f64::max);
    let l1_norm = g.coeffs().iter().map(numkit::max_singular_value).sum();
    Ok(WienerInverse { g, residual, l1_norm, min_det, winding })
}

/// Ho–Kalman output with the numerical rank.
#[derive(Debug, Clone)]
pub struct HankelRealization {
    pub realization: Realization,
    pub rank: usize,
    pub singular_values: Vec<f64>,
    /// `max_{1 ≤ n ≤ N} ||E_n - C A^{n-1} B||_F`.
    pub residual: f64,
}

/// Block Hankel matrix `[E_{i+j+1}]` with `k` block rows and columns.
pub fn block_hankel(e: &MatrixPowerSeries, k: usize) -> CMat {
    let p = e.p();
    let mut h = numkit::zeros(k * p, k * p);
    for i in 0..k {
        for j in 0..k {
            h.view_mut((i * p, j * p), (p, p)).copy_from(&e.coeff(i + j + 1));
        }
    }
    h
}

/// Minimal realization `E = D + Σ Z^{n+1} C A^n B` from the Hankel SVD.
pub fn hankel_realize(e: &MatrixPowerSeries, tol: f64) -> Result<HankelRealization> {
    if !e.is_square() {
        return Err(Error::NonSquare { rows: e.blocks().0, cols: e.blocks().1 });
    }
    let p = e.p();
    let d = e.coeff(0);
    let k = (e.order() + 1) / 2;
    if k == 0 {
        let r = Realization::unweighted(numkit::zeros(0, 0), numkit::zeros(0, p), numkit::zeros(p, 0), d)?;
        return Ok(HankelRealization { realization: r, rank: 0, singular_values: vec![], residual: 0.0 });
    }
    let h = block_hankel(e, k);
    let svd = numkit::thin_svd(&h);
    let s1 = svd.s.first().copied().unwrap_or(0.0);
    let rank = if s1 == 0.0 { 0 } else { svd.s.iter().take_while(|&&s| s > tol * s1).count() };
    if rank == svd.s.len() && rank > 0 {
        return Err(Error::NoRankPlateau);
    }
    if rank == 0 {
        let r = Realization::unweighted(numkit::zeros(0, 0), numkit::zeros(0, p), numkit::zeros(p, 0), d)?;
        return Ok(HankelRealization { realization: r, rank: 0, singular_values: svd.s, residual: 0.0 });
    }
    if k < 2 {
        return Err(Error::NoRankPlateau);
    }
    let sqrt_s = numkit::diag_real(&svd.s[..rank].iter().map(|x| x.sqrt()).collect::<Vec<_>>());
    let obs = svd.u.columns(0, rank) * &sqrt_s;
    let ctr = &sqrt_s * svd.v.columns(0, rank).adjoint();
    let o_top = obs.rows(0, (k - 1) * p).into_owned();
    let o_bot = obs.rows(p, (k - 1) * p).into_owned();
    let a = numkit::pinv(&o_top, 1e-13) * o_bot;
    let cm = obs.rows(0, p).into_owned();
    let b = ctr.columns(0, p).into_owned();
    let realization = Realization::unweighted(a, b, cm, d)?;

    let mut residual: f64 = 0.0;
    let mut ca = realization.c.clone();
    for n in 1..=e.order() {
        residual = residual.max((e.coeff(n) - &ca * &realization.b).norm());
        ca = &ca * &realization.a;
    }
    Ok(HankelRealization { realization, rank, singular_values: svd.s, residual })
}
