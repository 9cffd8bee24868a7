//! Carathéodory multipliers: Herglotz synthesis from atomic measures,
//! trigonometric moment tests, the kernel `K_Φ` and coefficient recovery from
//! the operator-range model `L(Φ) = ran sqrt(T + T^*)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mps::MatrixPowerSeries;
use crate::numkit::{self, c, cmat_serde, CMat, Tolerance};
use crate::schur::{self, KernelGram};

/// Relative eigenvalue cut defining the model dimension of `L(Φ)`.
pub const MODEL_RANK_REL: f64 = 1e-10;

/// Point mass `M` at angle `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub t: f64,
    #[serde(with = "cmat_serde")]
    pub mass: CMat,
}

/// `Φ(Z) = iX + ∫ (e^{is} + Z)(e^{is} - Z)^{-1} dμ(s)` for an atomic `μ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HerglotzData {
    #[serde(with = "cmat_serde")]
    pub imag_part: CMat,
    pub atoms: Vec<Atom>,
}

impl HerglotzData {
    pub fn new(imag_part: CMat, atoms: Vec<Atom>) -> Result<Self> {
        let d = HerglotzData { imag_part, atoms };
        d.validate()?;
        Ok(d)
    }

    pub fn p(&self) -> usize {
        self.imag_part.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        let p = numkit::ensure_square(&self.imag_part)?;
        let drift = (&self.imag_part - self.imag_part.adjoint()).norm();
        if drift > 1e-12 * (1.0 + self.imag_part.norm()) {
            return Err(Error::NotHermitian { drift });
        }
        for a in &self.atoms {
            if a.mass.nrows() != p || a.mass.ncols() != p {
                return Err(Error::DimensionMismatch(format!(
                    "atom mass is {}x{}, expected {p}x{p}",
                    a.mass.nrows(),
                    a.mass.ncols()
                )));
            }
            let v = numkit::is_psd(&a.mass, &Tolerance::default())?;
            if !v.psd {
                return Err(Error::NotPsd { min_eig: v.min_eig });
            }
        }
        Ok(())
    }

    /// Moment `t_n = Σ_k e^{-i n t_k} M_k`.
    pub fn moment(&self, n: usize) -> CMat {
        self.atoms.iter().fold(numkit::zeros(self.p(), self.p()), |acc, a| {
            acc + &a.mass * num_complex::Complex64::from_polar(1.0, -(n as f64) * a.t)
        })
    }
}

/// `Φ_0 = iX + t_0`, `Φ_n = 2 t_n`.
pub fn herglotz_series(data: &HerglotzData, n: usize) -> Result<MatrixPowerSeries> {
    data.validate()?;
    let mut coeffs = Vec::with_capacity(n + 1);
    coeffs.push(&data.imag_part * c(0.0, 1.0) + data.moment(0));
    for k in 1..=n {
        coeffs.push(data.moment(k) * c(2.0, 0.0));
    }
    MatrixPowerSeries::new(data.p(), coeffs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentCheck {
    pub pass: bool,
    pub lambda_min: f64,
}

/// Block Toeplitz `[T_{j-k}]_{j,k ≤ m}` with `T_0 = Re Φ_0`, `T_n = Φ_n / 2`, `T_{-n} = T_n^*`.
pub fn moment_toeplitz(phi: &MatrixPowerSeries, m: usize) -> CMat {
    let p = phi.p();
    let t = |n: usize| if n == 0 { numkit::hermitian_part(&phi.coeff(0)) } else { phi.coeff(n) * c(0.5, 0.0) };
    let mut out = numkit::zeros((m + 1) * p, (m + 1) * p);
    for j in 0..=m {
        for k in 0..=m {
            let blk = if j >= k { t(j - k) } else { t(k - j).adjoint() };
            out.view_mut((j * p, k * p), (p, p)).copy_from(&blk);
        }
    }
    out
}

/// PSD test of the depth-`m` moment matrix. The skew part of `Φ_0` is split off
/// first, so the diagonal block is Hermitian by construction.
pub fn moment_check(phi: &MatrixPowerSeries, m: usize, tol: &Tolerance) -> Result<MomentCheck> {
    if !phi.is_square() {
        return Err(Error::NonSquare { rows: phi.blocks().0, cols: phi.blocks().1 });
    }
    if phi.order() < m {
        return Err(Error::Invalid(format!("series order {} is below depth {m}", phi.order())));
    }
    let v = numkit::is_psd(&moment_toeplitz(phi, m), tol)?;
    Ok(MomentCheck { pass: v.psd, lambda_min: v.min_eig })
}

/// Gram of `K_Φ(A, B) = Σ A^n (Φ(A) + Φ(B)^*) B^{*n}` over the points.
pub fn cara_kernel_gram(phi: &MatrixPowerSeries, points: &[CMat], tol: &Tolerance) -> Result<KernelGram> {
    if points.is_empty() {
        return Err(Error::Invalid("cara_kernel_gram needs at least one point".into()));
    }
    if !phi.is_square() {
        return Err(Error::NonSquare { rows: phi.blocks().0, cols: phi.blocks().1 });
    }
    let values: Vec<CMat> = points.iter().map(|z| phi.eval(z)).collect::<Result<_>>()?;
    let gram = schur::stein_gram(points, phi.p(), |i, j| &values[i] + values[j].adjoint())?;
    Ok(KernelGram::from_gram(gram, tol))
}

/// Index convention for the coefficient identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PowerConvention {
    /// `Φ_n = C_0 R_0^n C_0^*`.
    Power,
    /// `Φ_n = C_0 R_0^{n-1} C_0^*`.
    PowerMinusOne,
}

/// Normalization of `C_0 C_0^*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ZeroConvention {
    /// `C_0 C_0^* = 2 Re Φ_0`.
    TwiceReal,
    /// `C_0 C_0^* = Re Φ_0 / 2`.
    HalfReal,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecoveryReport {
    /// Evaluation at 0 in model coordinates (`p × r`).
    #[serde(with = "cmat_serde")]
    pub c0_row: CMat,
    /// Backward shift compressed to the model (`r × r`).
    #[serde(with = "cmat_serde")]
    pub r0_model: CMat,
    pub model_dim: usize,
    /// `max_{1 ≤ n ≤ N/2} ||Φ_n - C_0 R_0^n C_0^*||_F`.
    pub residual_power: f64,
    /// `max_{1 ≤ n ≤ N/2} ||Φ_n - C_0 R_0^{n-1} C_0^*||_F`.
    pub residual_power_minus_one: f64,
    /// `||C_0 C_0^* - 2 Re Φ_0||_F`.
    pub residual_twice_real: f64,
    /// `||C_0 C_0^* - Re Φ_0 / 2||_F`.
    pub residual_half_real: f64,
    pub power_convention: PowerConvention,
    pub zero_convention: ZeroConvention,
    /// `||W_top R_0 - W_bottom||_F / ||W||_F`, the shift-invariance defect of the model.
    pub invariance_defect: f64,
}

impl RecoveryReport {
    /// Residual of the selected convention pair.
    pub fn selected_residual(&self) -> f64 {
        let a = match self.power_convention {
            PowerConvention::Power => self.residual_power,
            PowerConvention::PowerMinusOne => self.residual_power_minus_one,
        };
        let b = match self.zero_convention {
            ZeroConvention::TwiceReal => self.residual_twice_real,
            ZeroConvention::HalfReal => self.residual_half_real,
        };
        a.max(b)
    }
}

/// Build the truncated model of `L(Φ)` at order `n` and test both index conventions.
pub fn realization_recovery(phi: &MatrixPowerSeries, n: usize, tol: &Tolerance) -> Result<RecoveryReport> {
    if !phi.is_square() {
        return Err(Error::NonSquare { rows: phi.blocks().0, cols: phi.blocks().1 });
    }
    if n < 2 {
        return Err(Error::Invalid("realization_recovery needs N ≥ 2".into()));
    }
    let p = phi.p();
    let t = schur::toeplitz_matrix(phi, n);
    let pm = numkit::hermitian_part(&(&t + t.adjoint()));
    let (vals, vecs) = numkit::hermitian_eigen(&pm);
    let top = vals.last().copied().unwrap_or(0.0);
    if vals[0] < -tol.abs * (1.0 + top.abs()) {
        return Err(Error::NotCaraMultiplier { min_eig: vals[0] });
    }
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > MODEL_RANK_REL * top && vals[i] > 0.0).collect();
    let r = keep.len();
    let mut w = numkit::zeros(t.nrows(), r);
    for (col, &i) in keep.iter().enumerate() {
        w.set_column(col, &(vecs.column(i) * c(vals[i].sqrt(), 0.0)));
    }

    let c0 = w.rows(0, p).into_owned();
    let wtop = w.rows(0, n * p).into_owned();
    let wbot = w.rows(p, n * p).into_owned();
    let r0 = numkit::pinv(&wtop, 1e-12) * &wbot;
    let invariance_defect = if r == 0 { 0.0 } else { (&wtop * &r0 - &wbot).norm() / w.norm() };

    let re0 = numkit::hermitian_part(&phi.coeff(0));
    let cc = &c0 * c0.adjoint();
    let residual_twice_real = (&cc - &re0 * c(2.0, 0.0)).norm();
    let residual_half_real = (&cc - &re0 * c(0.5, 0.0)).norm();

    // chain[k] = C_0 R_0^k C_0^*
    let mut chain = Vec::with_capacity(n / 2 + 1);
    let mut right = c0.adjoint();
    for _ in 0..=n / 2 {
        chain.push(&c0 * &right);
        right = &r0 * right;
    }
    let (mut residual_power, mut residual_power_minus_one) = (0.0f64, 0.0f64);
    for k in 1..=n / 2 {
        residual_power = residual_power.max((phi.coeff(k) - &chain[k]).norm());
        residual_power_minus_one = residual_power_minus_one.max((phi.coeff(k) - &chain[k - 1]).norm());
    }

    Ok(RecoveryReport {
        c0_row: c0,
        r0_model: r0,
        model_dim: r,
        residual_power,
        residual_power_minus_one,
        residual_twice_real,
        residual_half_real,
        power_convention: if residual_power <= residual_power_minus_one {
            PowerConvention::Power
        } else {
            PowerConvention::PowerMinusOne
        },
        zero_convention: if residual_twice_real <= residual_half_real {
            ZeroConvention::TwiceReal
        } else {
            ZeroConvention::HalfReal
        },
        invariance_defect,
    })
}
