//! Truncated matrix power series `F(Z) = Σ Z^n F_n` and their operator calculus.
//!
//! A series holds coefficients `F_0..F_N`. Square series have `p×p`
//! coefficients; block (rectangular) series have `(u·p)×(v·p)` coefficients
//! and are evaluated with left factor `(I_u ⊗ A)^n`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{self, c, CMat, CMatJson};

/// Window (log-scale) tolerance used when checking a declared radius against the estimate.
const RADIUS_HINT_LOG_TOL: f64 = 1.0;

/// Condition-number ceiling for the leading coefficient in [`MatrixPowerSeries::star_inverse`].
pub const MAX_LEADING_COND: f64 = 1e12;

/// Truncated power series with matrix coefficients in a matrix variable.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPowerSeries {
    p: usize,
    u: usize,
    v: usize,
    coeffs: Vec<CMat>,
    radius_hint: Option<f64>,
}

/// Block series with `(u·p)×(v·p)` coefficients.
pub type RectSeries = MatrixPowerSeries;

/// Value of an evaluation together with the truncation tail bound when one is known.
#[derive(Debug, Clone)]
pub struct Evaluated {
    pub value: CMat,
    pub tail_bound: Option<f64>,
}

impl MatrixPowerSeries {
    /// Square series from `p×p` coefficients.
    pub fn new(p: usize, coeffs: Vec<CMat>) -> Result<Self> {
        Self::new_block(p, 1, 1, coeffs)
    }

    /// Block series with `u×v` blocks of size `p`.
    pub fn new_block(p: usize, u: usize, v: usize, coeffs: Vec<CMat>) -> Result<Self> {
        if p == 0 || u == 0 || v == 0 {
            return Err(Error::Invalid("series dimensions must be positive".into()));
        }
        if coeffs.is_empty() {
            return Err(Error::Invalid("series needs at least one coefficient".into()));
        }
        for (n, f) in coeffs.iter().enumerate() {
            if f.nrows() != u * p || f.ncols() != v * p {
                return Err(Error::DimensionMismatch(format!(
                    "coefficient {n} is {}x{}, expected {}x{}",
                    f.nrows(),
                    f.ncols(),
                    u * p,
                    v * p
                )));
            }
        }
        Ok(MatrixPowerSeries { p, u, v, coeffs, radius_hint: None })
    }

    /// Attach a declared convergence radius, checked against the coefficient tail.
    pub fn with_radius_hint(mut self, r: f64) -> Result<Self> {
        if r.is_nan() || r <= 0.0 {
            return Err(Error::Invalid(format!("radius hint must be positive, got {r}")));
        }
        if self.order() >= 4 {
            let est = self.estimate_radius();
            if est.is_finite() && est.ln() < r.ln() - RADIUS_HINT_LOG_TOL {
                return Err(Error::Invalid(format!(
                    "declared radius {r} exceeds coefficient-tail estimate {est:.6}"
                )));
            }
        }
        self.radius_hint = Some(r);
        Ok(self)
    }

    pub fn zero(p: usize, order: usize) -> Self {
        Self::zero_block(p, 1, 1, order)
    }

    pub fn zero_block(p: usize, u: usize, v: usize, order: usize) -> Self {
        MatrixPowerSeries {
            p,
            u,
            v,
            coeffs: vec![CMat::zeros(u * p, v * p); order + 1],
            radius_hint: None,
        }
    }

    /// Constant series `C` (square or block, inferred from `p`).
    pub fn constant(p: usize, cst: CMat) -> Result<Self> {
        Self::monomial(p, 0, cst)
    }

    /// `Z^n C`.
    pub fn monomial(p: usize, n: usize, cst: CMat) -> Result<Self> {
        if cst.nrows() % p != 0 || cst.ncols() % p != 0 {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} is not a block matrix with block size {p}",
                cst.nrows(),
                cst.ncols()
            )));
        }
        let (u, v) = (cst.nrows() / p, cst.ncols() / p);
        let mut s = Self::zero_block(p, u, v, n);
        s.coeffs[n] = cst;
        Ok(s)
    }

    pub fn identity(p: usize) -> Self {
        Self::constant(p, numkit::eye(p)).expect("square")
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Block shape `(u, v)`.
    pub fn blocks(&self) -> (usize, usize) {
        (self.u, self.v)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[CMat] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> CMat {
        self.coeffs.get(n).cloned().unwrap_or_else(|| CMat::zeros(self.u * self.p, self.v * self.p))
    }

    pub fn radius_hint(&self) -> Option<f64> {
        self.radius_hint
    }

    pub fn is_square(&self) -> bool {
        self.u == 1 && self.v == 1
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.p != other.p || self.u != other.u || self.v != other.v {
            return Err(Error::DimensionMismatch(format!(
                "series shapes differ: p={} {}x{} vs p={} {}x{}",
                self.p, self.u, self.v, other.p, other.u, other.v
            )));
        }
        Ok(())
    }

    fn combine_hint(a: Option<f64>, b: Option<f64>) -> Option<f64> {
        match (a, b) {
            (Some(x), Some(y)) => Some(x.min(y)),
            _ => None,
        }
    }

    /// Keep coefficients `0..=n`, padding with zeros if needed.
    pub fn truncate(&self, n: usize) -> Self {
        let mut out = self.clone();
        out.coeffs.resize(n + 1, CMat::zeros(self.u * self.p, self.v * self.p));
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let n = self.order().max(other.order());
        let coeffs = (0..=n).map(|k| self.coeff(k) + other.coeff(k)).collect();
        let mut out = self.with_coeffs(coeffs);
        out.radius_hint = Self::combine_hint(self.radius_hint, other.radius_hint);
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(c(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        MatrixPowerSeries {
            coeffs: self.coeffs.iter().map(|f| f * s).collect(),
            ..self.clone()
        }
    }

    fn with_coeffs(&self, coeffs: Vec<CMat>) -> Self {
        let (u, v) = (coeffs[0].nrows() / self.p, coeffs[0].ncols() / self.p);
        MatrixPowerSeries { p: self.p, u, v, coeffs, radius_hint: self.radius_hint }
    }

    /// Largest coefficient Frobenius norm.
    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|f| f.norm()).fold(0.0, f64::max)
    }

    /// `Σ ||F_n||_F^2`, the squared Hardy norm (trace form).
    pub fn hardy_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|f| f.norm_squared()).sum()
    }

    // -- ring structure -----------------------------------------------------

    /// Star (Cauchy) product: coefficient `n` is `Σ F_k G_{n-k}`. The result has the
    /// full order `N_F + N_G`, which is exact for the truncated inputs.
    pub fn star_mul(&self, g: &Self) -> Result<Self> {
        self.star_mul_trunc(g, self.order() + g.order())
    }

    /// Star product truncated at order `n`.
    pub fn star_mul_trunc(&self, g: &Self, n: usize) -> Result<Self> {
        if self.p != g.p || self.v != g.u {
            return Err(Error::DimensionMismatch(format!(
                "cannot star-multiply p={} {}x{} by p={} {}x{}",
                self.p, self.u, self.v, g.p, g.u, g.v
            )));
        }
        let (nf, ng) = (self.order(), g.order());
        let coeffs: Vec<CMat> = (0..=n)
            .into_par_iter()
            .map(|k| {
                let mut acc = CMat::zeros(self.u * self.p, g.v * self.p);
                let lo = k.saturating_sub(ng);
                for j in lo..=k.min(nf) {
                    acc += &self.coeffs[j] * &g.coeffs[k - j];
                }
                acc
            })
            .collect();
        Ok(MatrixPowerSeries {
            p: self.p,
            u: self.u,
            v: g.v,
            coeffs,
            radius_hint: Self::combine_hint(self.radius_hint, g.radius_hint),
        })
    }

    /// Star inverse through order `n`: `G_0 = F_0^{-1}`, `G_k = -F_0^{-1} Σ_{j≥1} F_j G_{k-j}`.
    pub fn star_inverse(&self, n: usize) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::NonSquare { rows: self.u, cols: self.v });
        }
        let f0 = &self.coeffs[0];
        let cond = numkit::condition_number(f0);
        if !cond.is_finite() || cond > MAX_LEADING_COND {
            return Err(Error::SingularLeadingCoefficient { cond });
        }
        let f0inv = numkit::inverse(f0).map_err(|_| Error::SingularLeadingCoefficient { cond })?;
        let mut g: Vec<CMat> = Vec::with_capacity(n + 1);
        g.push(f0inv.clone());
        for k in 1..=n {
            let mut acc = CMat::zeros(self.p, self.p);
            for j in 1..=k.min(self.order()) {
                acc += &self.coeffs[j] * &g[k - j];
            }
            g.push(-(&f0inv * acc));
        }
        Ok(MatrixPowerSeries { p: self.p, u: 1, v: 1, coeffs: g, radius_hint: None })
    }

    // -- evaluation ---------------------------------------------------------

    /// Radius used by the convergence guards. A truncated series is a polynomial,
    /// so only a declared radius restricts evaluation.
    pub fn effective_radius(&self) -> f64 {
        self.radius_hint.unwrap_or(f64::INFINITY)
    }

    fn guard(&self, a: &CMat) -> Result<f64> {
        numkit::ensure_square(a)?;
        if a.nrows() != self.p {
            return Err(Error::DimensionMismatch(format!(
                "argument is {}x{}, series has p={}",
                a.nrows(),
                a.ncols(),
                self.p
            )));
        }
        let rho = numkit::spectral_radius(a)?;
        if rho < 1e-12 || numkit::is_nilpotent(a) {
            return Ok(0.0);
        }
        let radius = self.effective_radius();
        if rho >= radius {
            return Err(Error::OutsideConvergence { rho, radius });
        }
        Ok(rho)
    }

    /// `F(A) = Σ (I_u⊗A)^n F_n` by Horner's rule.
    pub fn eval(&self, a: &CMat) -> Result<CMat> {
        Ok(self.eval_with_tail(a)?.value)
    }

    /// Evaluation plus the tail bound `ρ(A)^{N+1} / (1 - ρ(A)/R)` when a radius is declared.
    pub fn eval_with_tail(&self, a: &CMat) -> Result<Evaluated> {
        let rho = self.guard(a)?;
        let value = self.horner(a);
        let tail_bound = if rho == 0.0 {
            Some(0.0)
        } else {
            self.radius_hint.map(|r| rho.powi(self.order() as i32 + 1) / (1.0 - rho / r))
        };
        Ok(Evaluated { value, tail_bound })
    }

    /// Horner evaluation without the convergence guard.
    pub fn horner(&self, a: &CMat) -> CMat {
        let au = numkit::kron_eye(self.u, a);
        let mut acc = self.coeffs[self.order()].clone();
        for f in self.coeffs.iter().rev().skip(1) {
            acc = &au * acc + f;
        }
        acc
    }

    /// `F(zI) = Σ z^n F_n`.
    pub fn eval_scalar(&self, z: Complex64) -> Result<CMat> {
        let radius = self.effective_radius();
        if z.norm() >= radius {
            return Err(Error::OutsideConvergence { rho: z.norm(), radius });
        }
        Ok(self.horner_scalar(z))
    }

    pub fn horner_scalar(&self, z: Complex64) -> CMat {
        let mut acc = self.coeffs[self.order()].clone();
        for f in self.coeffs.iter().rev().skip(1) {
            acc = acc * z + f;
        }
        acc
    }

    /// `Σ A^n F(A) G_n`, the evaluation of `F ⋆ G` at `A` through `F(A)`.
    pub fn eval_right_product(&self, g: &Self, a: &CMat) -> Result<CMat> {
        if self.p != g.p || self.v != g.u {
            return Err(Error::DimensionMismatch("eval_right_product shapes".into()));
        }
        let fa = self.eval(a)?;
        g.guard(a)?;
        let au = numkit::kron_eye(self.u, a);
        let mut acc = &fa * &g.coeffs[g.order()];
        for gn in g.coeffs.iter().rev().skip(1) {
            acc = &au * acc + &fa * gn;
        }
        Ok(acc)
    }

    /// Trapezoid approximation of `(1/2πi)∮ (zI - A)^{-1} F(zI) dz` on `|z| = r`
    /// with `m` nodes.
    pub fn contour_eval(&self, a: &CMat, r: f64, m: usize) -> Result<CMat> {
        numkit::ensure_square(a)?;
        if a.nrows() != self.p {
            return Err(Error::DimensionMismatch("contour argument size".into()));
        }
        let rho = numkit::spectral_radius(a)?;
        let radius = self.effective_radius();
        if r <= rho || r >= radius {
            return Err(Error::RadiusOrder { r, lower: rho, upper: radius });
        }
        if m < 2 * (self.order() + 1) {
            return Err(Error::Invalid(format!(
                "contour needs at least {} nodes, got {m}",
                2 * (self.order() + 1)
            )));
        }
        let au = numkit::kron_eye(self.u, a);
        let dim = au.nrows();
        let parts: Result<Vec<CMat>> = (0..m)
            .into_par_iter()
            .map(|k| {
                let z = Complex64::from_polar(r, 2.0 * std::f64::consts::PI * k as f64 / m as f64);
                let shifted = numkit::scalar(dim, z) - &au;
                let fz = self.horner_scalar(z);
                Ok(numkit::solve(&shifted, &fz)? * z)
            })
            .collect();
        let sum = parts?.into_iter().fold(CMat::zeros(dim, self.v * self.p), |s, t| s + t);
        Ok(sum / c(m as f64, 0.0))
    }

    // -- operators ----------------------------------------------------------

    /// `R_0`: coefficient `n` becomes `F_{n+1}`.
    pub fn backward_shift(&self) -> Self {
        if self.order() == 0 {
            return self.with_coeffs(vec![CMat::zeros(self.u * self.p, self.v * self.p)]);
        }
        self.with_coeffs(self.coeffs[1..].to_vec())
    }

    /// `M_Z`: prepend a zero coefficient.
    pub fn shift(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(CMat::zeros(self.u * self.p, self.v * self.p));
        coeffs.extend(self.coeffs.iter().cloned());
        self.with_coeffs(coeffs)
    }

    /// `M_A`: `F_n ↦ A F_n`.
    pub fn left_mul(&self, a: &CMat) -> Result<Self> {
        if a.ncols() != self.u * self.p || a.nrows() % self.p != 0 {
            return Err(Error::DimensionMismatch("left_mul factor size".into()));
        }
        Ok(self.with_coeffs(self.coeffs.iter().map(|f| a * f).collect()))
    }

    /// `M_A^r`: `F_n ↦ F_n A`.
    pub fn right_mul(&self, a: &CMat) -> Result<Self> {
        if a.nrows() != self.v * self.p || a.ncols() % self.p != 0 {
            return Err(Error::DimensionMismatch("right_mul factor size".into()));
        }
        Ok(self.with_coeffs(self.coeffs.iter().map(|f| f * a).collect()))
    }

    /// `𝐈`: integration `Z^n F_n ↦ Z^{n+1} F_n / (n+1)`, the Fock adjoint of `R_0`.
    pub fn integrate(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(CMat::zeros(self.u * self.p, self.v * self.p));
        coeffs.extend(self.coeffs.iter().enumerate().map(|(n, f)| f / c((n + 1) as f64, 0.0)));
        self.with_coeffs(coeffs)
    }

    /// `R_A`: coefficient `k` is `Σ_{n>k} A^{n-1-k} F_n`.
    pub fn resolvent(&self, a: &CMat) -> Result<Self> {
        self.guard(a)?;
        let n = self.order();
        if n == 0 {
            return Ok(self.with_coeffs(vec![CMat::zeros(self.u * self.p, self.v * self.p)]));
        }
        let au = numkit::kron_eye(self.u, a);
        let mut out = vec![CMat::zeros(0, 0); n];
        out[n - 1] = self.coeffs[n].clone();
        for k in (0..n - 1).rev() {
            out[k] = &self.coeffs[k + 1] + &au * &out[k + 1];
        }
        Ok(self.with_coeffs(out))
    }

    /// Radius estimate `1 / max ||F_n||^{1/n}` over the last `⌈N/2⌉` coefficients;
    /// infinite when that window is identically zero.
    pub fn estimate_radius(&self) -> f64 {
        let n = self.order();
        if n == 0 {
            return f64::INFINITY;
        }
        let window = n.div_ceil(2);
        let start = (n + 1 - window).max(1);
        let mut worst = 0.0_f64;
        for k in start..=n {
            let nrm = numkit::max_singular_value(&self.coeffs[k]);
            if nrm > 0.0 {
                worst = worst.max(nrm.powf(1.0 / k as f64));
            }
        }
        if worst == 0.0 {
            f64::INFINITY
        } else {
            1.0 / worst
        }
    }
}

// -- JSON form --------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct SeriesJson {
    p: usize,
    order: usize,
    coeffs: Vec<CMatJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    radius_hint: Option<f64>,
}

impl Serialize for MatrixPowerSeries {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SeriesJson {
            p: self.p,
            order: self.order(),
            coeffs: self.coeffs.iter().map(CMatJson::from).collect(),
            radius_hint: self.radius_hint,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MatrixPowerSeries {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = SeriesJson::deserialize(d)?;
        if j.coeffs.len() != j.order + 1 {
            return Err(D::Error::custom(format!(
                "order {} needs {} coefficients, got {}",
                j.order,
                j.order + 1,
                j.coeffs.len()
            )));
        }
        let coeffs: Vec<CMat> = j
            .coeffs
            .into_iter()
            .map(CMat::try_from)
            .collect::<Result<_>>()
            .map_err(D::Error::custom)?;
        if j.p == 0 || coeffs[0].nrows() % j.p != 0 || coeffs[0].ncols() % j.p != 0 {
            return Err(D::Error::custom("coefficient size is not a multiple of p"));
        }
        let (u, v) = (coeffs[0].nrows() / j.p, coeffs[0].ncols() / j.p);
        let s = MatrixPowerSeries::new_block(j.p, u, v, coeffs).map_err(D::Error::custom)?;
        match j.radius_hint {
            Some(r) => s.with_radius_hint(r).map_err(D::Error::custom),
            None => Ok(s),
        }
    }
}
