//! Dense complex linear-algebra kernel.
//!
//! Everything else in the crate is built from the handful of routines in this
//! module: spectral radius, Hermitian eigen-decomposition, PSD square roots and
//! tests, and the (mixed) Stein equation `X - A X B^* = R`.
//!
//! Matrices are plain [`nalgebra::DMatrix`] values over [`Complex64`]; the
//! decompositions (Schur, Hermitian eigen, SVD, LU) come from nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense complex matrix, the ground type of the crate.
pub type CMat = DMatrix<Complex64>;

/// Safety margin below 1 required of spectral radii in Stein solves.
pub const STEIN_MARGIN: f64 = 1e-8;

const SVD_REFINE_PASSES: usize = 2;

/// Absolute/relative tolerance pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: 1e-10, rel: 1e-8 }
    }
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance { abs, rel }
    }

    /// Threshold for a quantity of the given magnitude.
    pub fn scaled(&self, magnitude: f64) -> f64 {
        self.abs + self.rel * magnitude
    }
}

// ---------------------------------------------------------------------------
// JSON form: {"rows":p,"cols":q,"data":[[re,im],...]} row-major.

/// Serialized form of a [`CMat`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CMatJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl From<&CMat> for CMatJson {
    fn from(m: &CMat) -> Self {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                data.push([z.re, z.im]);
            }
        }
        CMatJson { rows: m.nrows(), cols: m.ncols(), data }
    }
}

impl TryFrom<CMatJson> for CMat {
    type Error = Error;

    fn try_from(j: CMatJson) -> Result<CMat> {
        if j.data.len() != j.rows * j.cols {
            return Err(Error::Invalid(format!(
                "matrix data has {} entries, expected {}x{}",
                j.data.len(),
                j.rows,
                j.cols
            )));
        }
        if j.data.iter().any(|e| !e[0].is_finite() || !e[1].is_finite()) {
            return Err(Error::Invalid("matrix data contains non-finite entries".into()));
        }
        Ok(CMat::from_row_iterator(
            j.rows,
            j.cols,
            j.data.iter().map(|e| Complex64::new(e[0], e[1])),
        ))
    }
}

/// `serde(with = "cmat_serde")` adapter for fields of type [`CMat`].
pub mod cmat_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> std::result::Result<S::Ok, S::Error> {
        CMatJson::from(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMat, D::Error> {
        let j = CMatJson::deserialize(d)?;
        CMat::try_from(j).map_err(serde::de::Error::custom)
    }
}

/// Same as [`cmat_serde`] for `Vec<CMat>`.
pub mod cmat_vec_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[CMat], s: S) -> std::result::Result<S::Ok, S::Error> {
        let js: Vec<CMatJson> = v.iter().map(CMatJson::from).collect();
        js.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<CMat>, D::Error> {
        let js = Vec::<CMatJson>::deserialize(d)?;
        js.into_iter()
            .map(|j| CMat::try_from(j).map_err(serde::de::Error::custom))
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Small helpers.

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> CMat {
    CMat::zeros(r, c)
}

/// Complex scalar times identity.
pub fn scalar(n: usize, z: Complex64) -> CMat {
    CMat::identity(n, n) * z
}

/// Real diagonal matrix.
pub fn diag_real(d: &[f64]) -> CMat {
    let n = d.len();
    CMat::from_fn(n, n, |i, j| if i == j { c(d[i], 0.0) } else { c(0.0, 0.0) })
}

pub fn from_real_rows(rows: usize, cols: usize, data: &[f64]) -> CMat {
    CMat::from_row_iterator(rows, cols, data.iter().map(|&x| c(x, 0.0)))
}

pub fn frob(m: &CMat) -> f64 {
    m.norm()
}

pub fn ensure_square(m: &CMat) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NonSquare { rows: m.nrows(), cols: m.ncols() });
    }
    Ok(m.nrows())
}

/// `(M + M^*) / 2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * c(0.5, 0.0)
}

pub fn mat_pow(m: &CMat, k: usize) -> CMat {
    let mut out = eye(m.nrows());
    for _ in 0..k {
        out = &out * m;
    }
    out
}

/// Entrywise complex conjugate.
pub fn conj(m: &CMat) -> CMat {
    m.map(|z| z.conj())
}

/// Block diagonal matrix from square or rectangular blocks.
pub fn block_diag(blocks: &[CMat]) -> CMat {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let (mut r, mut cc) = (0, 0);
    for b in blocks {
        out.view_mut((r, cc), (b.nrows(), b.ncols())).copy_from(b);
        r += b.nrows();
        cc += b.ncols();
    }
    out
}

/// Horizontal concatenation.
pub fn hcat(blocks: &[&CMat]) -> CMat {
    let rows = blocks[0].nrows();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let mut cc = 0;
    for b in blocks {
        assert_eq!(b.nrows(), rows, "hcat row mismatch");
        out.view_mut((0, cc), (rows, b.ncols())).copy_from(*b);
        cc += b.ncols();
    }
    out
}

/// Vertical concatenation.
pub fn vcat(blocks: &[&CMat]) -> CMat {
    let cols = blocks[0].ncols();
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        assert_eq!(b.ncols(), cols, "vcat column mismatch");
        out.view_mut((r, 0), (b.nrows(), cols)).copy_from(*b);
        r += b.nrows();
    }
    out
}

/// 2x2 block matrix `[[a, b], [c, d]]`.
pub fn block2(a: &CMat, b: &CMat, cm: &CMat, d: &CMat) -> CMat {
    vcat(&[&hcat(&[a, b]), &hcat(&[cm, d])])
}

/// `I_k ⊗ A`.
pub fn kron_eye(k: usize, a: &CMat) -> CMat {
    if k == 1 {
        return a.clone();
    }
    block_diag(&vec![a.clone(); k])
}

/// Lower-triangular block Toeplitz matrix with block diagonals `coeffs[0], coeffs[1], ...`,
/// `n` block rows and `m` block columns.
pub fn lower_block_toeplitz(coeffs: &[CMat], n: usize, m: usize) -> CMat {
    let (br, bc) = (coeffs[0].nrows(), coeffs[0].ncols());
    let mut t = zeros(n * br, m * bc);
    for i in 0..n {
        for j in 0..m.min(i + 1) {
            if let Some(blk) = coeffs.get(i - j) {
                t.view_mut((i * br, j * bc), (br, bc)).copy_from(blk);
            }
        }
    }
    t
}

pub fn solve(a: &CMat, b: &CMat) -> Result<CMat> {
    ensure_square(a)?;
    a.clone().lu().solve(b).ok_or(Error::SingularSystem)
}

pub fn inverse(a: &CMat) -> Result<CMat> {
    ensure_square(a)?;
    a.clone().try_inverse().ok_or(Error::SingularSystem)
}

/// Singular values in descending order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

pub fn max_singular_value(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// 2-norm condition number (infinite for singular input).
pub fn condition_number(m: &CMat) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Thin SVD `M = U diag(s) V^*` with singular values sorted in descending order.
pub struct ThinSvd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v: CMat,
}

pub fn thin_svd(m: &CMat) -> ThinSvd {
    let svd = m.clone().svd(true, true);
    let mut u = svd.u.expect("u requested");
    let mut v = svd.v_t.expect("v_t requested").adjoint();
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    // nalgebra can stop with off-diagonal mass near 1e-10 relative when singular
    // values cluster; re-diagonalizing U^* M V removes it.
    let target = 64.0 * f64::EPSILON * m.norm();
    for _ in 0..SVD_REFINE_PASSES {
        if (&u * diag_real(&sv) * v.adjoint() - m).norm() <= target {
            break;
        }
        let inner = (u.adjoint() * m * &v).svd(true, true);
        u = &u * inner.u.expect("u requested");
        v = &v * inner.v_t.expect("v_t requested").adjoint();
        sv = inner.singular_values.iter().copied().collect();
    }
    let mut idx: Vec<usize> = (0..sv.len()).collect();
    idx.sort_by(|&a, &b| sv[b].partial_cmp(&sv[a]).unwrap());
    let k = sv.len();
    let mut uu = zeros(m.nrows(), k);
    let mut vv = zeros(m.ncols(), k);
    for (dst, &src) in idx.iter().enumerate() {
        uu.set_column(dst, &u.column(src));
        vv.set_column(dst, &v.column(src));
    }
    ThinSvd { u: uu, s: idx.iter().map(|&i| sv[i]).collect(), v: vv }
}

/// Moore-Penrose pseudo-inverse, discarding singular values below `rel * s_max`.
pub fn pinv(m: &CMat, rel: f64) -> CMat {
    let ThinSvd { u, s, v } = thin_svd(m);
    let cutoff = rel * s.first().copied().unwrap_or(0.0);
    let mut out = zeros(m.ncols(), m.nrows());
    for (k, &sk) in s.iter().enumerate() {
        if sk > cutoff && sk > 0.0 {
            out += v.column(k) * u.column(k).adjoint() * c(1.0 / sk, 0.0);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Spectra.

/// Eigenvalues of a general square matrix via complex Schur form.
pub fn eigenvalues(m: &CMat) -> Result<Vec<Complex64>> {
    let n = ensure_square(m)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    if let Some(schur) = m.clone().try_schur(1e-15, 10_000) {
        let (_, t) = schur.unpack();
        return Ok((0..n).map(|i| t[(i, i)]).collect());
    }
    Err(Error::Invalid("Schur iteration did not converge".into()))
}

/// Spectral radius `max |λ|`.
pub fn spectral_radius(m: &CMat) -> Result<f64> {
    let n = ensure_square(m)?;
    if n == 0 {
        return Ok(0.0);
    }
    match eigenvalues(m) {
        Ok(ev) => Ok(ev.iter().map(|z| z.norm()).fold(0.0, f64::max)),
        Err(_) => {
            // Gelfand fallback: ||M^(2^k)||^(1/2^k) by repeated squaring.
            let mut p = m.clone();
            let mut exp = 1.0_f64;
            let mut scale = 0.0_f64;
            for _ in 0..12 {
                let nrm = p.norm();
                if nrm == 0.0 {
                    return Ok(0.0);
                }
                p /= c(nrm, 0.0);
                scale += nrm.ln() / exp;
                p = &p * &p;
                exp *= 2.0;
            }
            Ok((scale + p.norm().ln() / exp).exp())
        }
    }
}

/// True when `A^n` vanishes numerically (`A` nilpotent).
pub fn is_nilpotent(a: &CMat) -> bool {
    let n = a.nrows();
    if n == 0 {
        return true;
    }
    let scale = a.norm().max(1.0).powi(n as i32);
    mat_pow(a, n).norm() <= 1e-12 * scale
}

/// Hermitian eigen-decomposition of `(M + M^*)/2`; eigenvalues ascending,
/// eigenvectors as columns in the same order.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let h = hermitian_part(m);
    let se = h.symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());
    let mut vecs = zeros(n, n);
    for (dst, &src) in idx.iter().enumerate() {
        vecs.set_column(dst, &se.eigenvectors.column(src));
    }
    (idx.iter().map(|&i| se.eigenvalues[i]).collect(), vecs)
}

fn check_hermitian(m: &CMat, tol: &Tolerance) -> Result<()> {
    let drift = (m - m.adjoint()).norm();
    if drift > tol.scaled(m.norm()) {
        return Err(Error::NotHermitian { drift });
    }
    Ok(())
}

/// Outcome of a positive-semidefiniteness test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsdVerdict {
    pub psd: bool,
    pub min_eig: f64,
}

/// PSD test: true iff `λ_min ≥ -tol.abs·(1 + ||M||)`.
pub fn is_psd(m: &CMat, tol: &Tolerance) -> Result<PsdVerdict> {
    ensure_square(m)?;
    check_hermitian(m, tol)?;
    let (ev, _) = hermitian_eigen(m);
    let min_eig = ev.first().copied().unwrap_or(0.0);
    let threshold = -tol.abs * (1.0 + m.norm());
    Ok(PsdVerdict { psd: min_eig >= threshold, min_eig })
}

/// Hermitian PSD square root; eigenvalues in `[-tol.abs, 0)` are clamped to zero.
pub fn sqrt_psd(m: &CMat, tol: &Tolerance) -> Result<CMat> {
    ensure_square(m)?;
    check_hermitian(m, tol)?;
    let (ev, vecs) = hermitian_eigen(m);
    if let Some(&lo) = ev.first() {
        if lo < -tol.abs {
            return Err(Error::NotPsd { min_eig: lo });
        }
    }
    let d: Vec<f64> = ev.iter().map(|&l| l.max(0.0).sqrt()).collect();
    Ok(&vecs * diag_real(&d) * vecs.adjoint())
}

/// Factor a PSD matrix as `L L^*` with `L` of numerical rank `r`, dropping
/// eigenvalues below `rel * λ_max`. Returns `L` (n × r).
pub fn psd_factor(m: &CMat, rel: f64) -> CMat {
    let (ev, vecs) = hermitian_eigen(m);
    let lmax = ev.last().copied().unwrap_or(0.0).max(0.0);
    let keep: Vec<usize> = (0..ev.len()).filter(|&i| ev[i] > rel * lmax && ev[i] > 0.0).collect();
    let mut l = zeros(m.nrows(), keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        l.set_column(dst, &(vecs.column(src) * c(ev[src].sqrt(), 0.0)));
    }
    l
}

// ---------------------------------------------------------------------------
// Stein equations.

/// Solve `Γ - A Γ A^* = I` for `ρ(A) < 1`.
pub fn stein_solve(a: &CMat) -> Result<CMat> {
    let n = ensure_square(a)?;
    let x = stein_solve_pair(a, a, &eye(n))?;
    Ok(hermitian_part(&x))
}

/// Solve the mixed Stein equation `X - A X B^* = R` through its Kronecker form
/// `(I - conj(B) ⊗ A) vec(X) = vec(R)`.
pub fn stein_solve_pair(a: &CMat, b: &CMat, rhs: &CMat) -> Result<CMat> {
    let m = ensure_square(a)?;
    let n = ensure_square(b)?;
    if rhs.nrows() != m || rhs.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "Stein right-hand side is {}x{}, expected {}x{}",
            rhs.nrows(),
            rhs.ncols(),
            m,
            n
        )));
    }
    let rho = spectral_radius(a)? * spectral_radius(b)?;
    if rho >= 1.0 - STEIN_MARGIN {
        return Err(Error::SpectralRadiusTooLarge { rho, bound: 1.0 - STEIN_MARGIN });
    }
    let k = conj(b).kronecker(a);
    let sys = eye(m * n) - k;
    // Column-major storage makes the flat data exactly vec(R).
    let vec_r = CMat::from_column_slice(m * n, 1, rhs.as_slice());
    let vec_x = sys.lu().solve(&vec_r).ok_or(Error::SingularSystem)?;
    Ok(CMat::from_column_slice(m, n, vec_x.as_slice()))
}

/// Solve `X - A X B = R` for `ρ(A)ρ(B) < 1` (rectangular `X` allowed).
pub fn stein_solve_general(a: &CMat, b: &CMat, rhs: &CMat) -> Result<CMat> {
    let m = ensure_square(a)?;
    let n = ensure_square(b)?;
    if rhs.nrows() != m || rhs.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "Stein right-hand side is {}x{}, expected {}x{}",
            rhs.nrows(),
            rhs.ncols(),
            m,
            n
        )));
    }
    let rho = spectral_radius(a)? * spectral_radius(b)?;
    if rho >= 1.0 - STEIN_MARGIN {
        return Err(Error::SpectralRadiusTooLarge { rho, bound: 1.0 - STEIN_MARGIN });
    }
    let sys = eye(m * n) - b.transpose().kronecker(a);
    let vec_r = CMat::from_column_slice(m * n, 1, rhs.as_slice());
    let vec_x = sys.lu().solve(&vec_r).ok_or(Error::SingularSystem)?;
    Ok(CMat::from_column_slice(m, n, vec_x.as_slice()))
}

/// Frobenius residual `||X - A X B^* - R||_F`.
pub fn stein_residual(a: &CMat, b: &CMat, x: &CMat, rhs: &CMat) -> f64 {
    (x - a * x * b.adjoint() - rhs).norm()
}
