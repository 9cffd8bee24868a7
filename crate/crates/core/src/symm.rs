//! Conjugation symmetries `A ↦ J Ā J^{-1}` of `ℂ^{2h×2h}` and their fixed points.
//!
//! `J₁ = [[0, I], [-I, 0]]` fixes the quaternion embedding `[[a₁, -a₂], [ā₂, ā₁]]`,
//! `J₂ = [[0, I], [I, 0]]` fixes the split form `[[a₁, a₂], [ā₂, ā₁]]`.

use serde::{Deserialize, Serialize};

use crate::blaschke::BlaschkeFactor;
use crate::error::{Error, Result};
use crate::numkit::{self, c, CMat, Tolerance};
use crate::sample::Sampler;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SymmetryKind {
    Quaternionic,
    Split,
    Custom,
}

#[derive(Debug, Clone)]
pub struct Symmetry {
    pub j: CMat,
    j_inv: CMat,
    pub kind: SymmetryKind,
}

impl Symmetry {
    pub fn quaternionic(h: usize) -> Self {
        let i = numkit::eye(h);
        let o = numkit::zeros(h, h);
        let j = numkit::block2(&o, &i, &(-&i), &o);
        Symmetry { j_inv: j.adjoint(), j, kind: SymmetryKind::Quaternionic }
    }

    pub fn split(h: usize) -> Self {
        let i = numkit::eye(h);
        let o = numkit::zeros(h, h);
        let j = numkit::block2(&o, &i, &i, &o);
        Symmetry { j_inv: j.adjoint(), j, kind: SymmetryKind::Split }
    }

    /// Arbitrary invertible `J`; admissibility is not assumed.
    pub fn custom(j: CMat) -> Result<Self> {
        numkit::ensure_square(&j)?;
        let j_inv = numkit::inverse(&j)?;
        Ok(Symmetry { j, j_inv, kind: SymmetryKind::Custom })
    }

    pub fn dim(&self) -> usize {
        self.j.nrows()
    }

    pub fn apply(&self, a: &CMat) -> Result<CMat> {
        if a.nrows() != self.dim() || a.ncols() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "symmetry acts on {0}x{0}, got {1}x{2}",
                self.dim(),
                a.nrows(),
                a.ncols()
            )));
        }
        Ok(&self.j * numkit::conj(a) * &self.j_inv)
    }

    /// `||A - A_φ||_F`.
    pub fn fixed_residual(&self, a: &CMat) -> Result<f64> {
        Ok((a - self.apply(a)?).norm())
    }

    pub fn is_fixed(&self, a: &CMat, tol: f64) -> Result<bool> {
        Ok(self.fixed_residual(a)? <= tol)
    }
}

fn check_blocks(a1: &CMat, a2: &CMat) -> Result<usize> {
    let h = numkit::ensure_square(a1)?;
    if a2.nrows() != h || a2.ncols() != h {
        return Err(Error::DimensionMismatch("embedding blocks must share their size".into()));
    }
    Ok(h)
}

/// `[[a₁, -a₂], [ā₂, ā₁]]`.
pub fn embed_quaternion(a1: &CMat, a2: &CMat) -> Result<CMat> {
    check_blocks(a1, a2)?;
    Ok(numkit::block2(a1, &(-a2), &numkit::conj(a2), &numkit::conj(a1)))
}

/// `[[a₁, a₂], [ā₂, ā₁]]`.
pub fn embed_split(a1: &CMat, a2: &CMat) -> Result<CMat> {
    check_blocks(a1, a2)?;
    Ok(numkit::block2(a1, a2, &numkit::conj(a2), &numkit::conj(a1)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axiom {
    Multiplicative,
    Additive,
    PositivityPreserving,
    AdjointCompatible,
    ScalarConjugation,
    SqrtCompatible,
    InverseCompatible,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AxiomViolation {
    pub axiom: Axiom,
    pub residual: f64,
    /// Index of the offending sample pair.
    pub sample: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdmissibleReport {
    pub pass: bool,
    pub samples: usize,
    /// Largest residual seen for each axiom, in [`Axiom`] order.
    pub max_residuals: Vec<(Axiom, f64)>,
    /// First violation of each failing axiom.
    pub violations: Vec<AxiomViolation>,
}

/// Random sample pairs for [`admissible_check`].
pub fn sample_pairs(dim: usize, count: usize, seed: u64) -> Vec<(CMat, CMat)> {
    let mut smp = Sampler::new(seed);
    (0..count).map(|_| (smp.gaussian(dim, dim), smp.gaussian(dim, dim))).collect()
}

/// Check the five axioms and the square-root and inverse consequences on the sample pairs.
pub fn admissible_check(phi: &Symmetry, samples: &[(CMat, CMat)], tol: f64) -> Result<AdmissibleReport> {
    let axioms = [
        Axiom::Multiplicative,
        Axiom::Additive,
        Axiom::PositivityPreserving,
        Axiom::AdjointCompatible,
        Axiom::ScalarConjugation,
        Axiom::SqrtCompatible,
        Axiom::InverseCompatible,
    ];
    let mut max_res = [0.0f64; 7];
    let mut violations: Vec<AxiomViolation> = Vec::new();
    let psd_tol = Tolerance::new(tol, 0.0);
    let n = phi.dim();

    for (idx, (a, b)) in samples.iter().enumerate() {
        let (pa, pb) = (phi.apply(a)?, phi.apply(b)?);
        let mut res = [0.0f64; 7];
        let scale = 1.0 + a.norm() * b.norm();
        res[0] = (phi.apply(&(a * b))? - &pa * &pb).norm() / scale;
        res[1] = (phi.apply(&(a + b))? - (&pa + &pb)).norm() / (1.0 + a.norm() + b.norm());
        let pos = a * a.adjoint();
        let ppos = phi.apply(&pos)?;
        // distance from the PSD cone: Hermitian drift plus the negative part of the spectrum
        let drift = (&ppos - ppos.adjoint()).norm();
        let (vals, _) = numkit::hermitian_eigen(&numkit::hermitian_part(&ppos));
        res[2] = (drift + (-vals[0]).max(0.0)) / (1.0 + pos.norm());
        res[3] = (pa.adjoint() - phi.apply(&a.adjoint())?).norm() / (1.0 + a.norm());
        let lam = a[(0, 0)];
        res[4] = (phi.apply(&numkit::scalar(n, lam))? - numkit::scalar(n, lam.conj())).norm() / (1.0 + lam.norm());

        // consequences, on a φ-fixed PSD matrix and on A itself
        let fixed = &pos + &ppos;
        if numkit::is_psd(&fixed, &psd_tol).map(|v| v.psd).unwrap_or(false) {
            let s1 = phi.apply(&numkit::sqrt_psd(&fixed, &psd_tol)?)?;
            let s2 = numkit::sqrt_psd(&phi.apply(&fixed)?, &psd_tol).unwrap_or_else(|_| numkit::zeros(n, n));
            res[5] = (s1 - s2).norm() / (1.0 + fixed.norm());
        } else {
            res[5] = f64::INFINITY;
        }
        if let (Ok(ai), Ok(pai)) = (numkit::inverse(a), numkit::inverse(&pa)) {
            res[6] = (phi.apply(&ai)? - pai).norm() / (1.0 + ai.norm());
        }

        for k in 0..7 {
            if res[k] > tol && !violations.iter().any(|v| v.axiom == axioms[k]) {
                violations.push(AxiomViolation { axiom: axioms[k], residual: res[k], sample: idx });
            }
            max_res[k] = max_res[k].max(res[k]);
        }
    }
    Ok(AdmissibleReport {
        pass: violations.is_empty(),
        samples: samples.len(),
        max_residuals: axioms.iter().copied().zip(max_res).collect(),
        violations,
    })
}

/// `max_{n ≤ N} ||φ(U_n) - U_n||_F` for the Blaschke factor at a φ-fixed `A`.
pub fn blaschke_symmetry_check(phi: &Symmetry, a: &CMat, n: usize) -> Result<f64> {
    let residual = phi.fixed_residual(a)?;
    if residual > 1e-10 * (1.0 + a.norm()) {
        return Err(Error::NotFixed { residual });
    }
    let bf = BlaschkeFactor::build(a, n)?;
    bf.series
        .coeffs()
        .iter()
        .map(|u| phi.fixed_residual(u))
        .try_fold(0.0f64, |acc, r| r.map(|x| acc.max(x)))
}

/// Random φ-fixed node with spectral radius at most `rho`.
pub fn random_fixed_node(phi: &Symmetry, smp: &mut Sampler, rho: f64) -> Result<CMat> {
    let h = phi.dim() / 2;
    let (a1, a2) = (smp.gaussian(h, h), smp.gaussian(h, h));
    let a = match phi.kind {
        SymmetryKind::Quaternionic => embed_quaternion(&a1, &a2)?,
        SymmetryKind::Split => embed_split(&a1, &a2)?,
        SymmetryKind::Custom => {
            let x = smp.gaussian(phi.dim(), phi.dim());
            (&x + phi.apply(&x)?) * c(0.5, 0.0)
        }
    };
    let r = numkit::spectral_radius(&a)?;
    Ok(if r > 0.0 { a * c(rho / r, 0.0) } else { a })
}
