//! Dense complex linear-algebra helpers shared by every module.
//!
//! Matrices are `nalgebra` column-major `DMatrix<Complex<f64>>`. The few hot
//! kernels that run inside Monte Carlo loops are written out by hand so that
//! the inner loops walk contiguous memory.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// One circularly-symmetric complex Gaussian draw with unit variance.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `rows × cols` matrix of i.i.d. `CN(0, 1)` entries, filled column by column.
pub fn complex_gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub fn is_finite_matrix(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn is_finite_vector(v: &CVector) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub(crate) fn ensure_finite(m: &CMatrix, what: &str) -> Result<()> {
    if is_finite_matrix(m) {
        Ok(())
    } else {
        Err(Error::domain(format!("{what} has non-finite entries")))
    }
}

pub fn frobenius_sq(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// `Σ_n a_n b_n` without conjugation.
pub fn bilinear_dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).fold(ZERO, |acc, (x, y)| acc + x * y)
}

/// Element-wise `conj(a) ⊙ b`.
pub fn conj_hadamard(a: &[C64], b: &[C64]) -> CVector {
    CVector::from_iterator(a.len(), a.iter().zip(b).map(|(x, y)| x.conj() * y))
}

/// Eigenvalues of `H^H H`, sorted in descending order.
///
/// For a tall `H` these are the squared singular values, i.e. the nonzero
/// eigenvalues of `H H^H`; the Gram matrix is only `cols × cols`.
pub fn gram_eigenvalues(h: &CMatrix) -> Vec<f64> {
    let gram = h.ad_mul(h);
    let eig = SymmetricEigen::new(gram);
    let mut values: Vec<f64> = eig.eigenvalues.iter().map(|&v| v.max(0.0)).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

/// Singular values in descending order.
pub fn singular_values(h: &CMatrix) -> Vec<f64> {
    let mut values: Vec<f64> = h.singular_values().iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

/// `log2 det(A)` for a Hermitian positive-definite `A` via Cholesky.
pub fn log2_det_hpd(a: CMatrix) -> Result<f64> {
    let chol = a
        .cholesky()
        .ok_or_else(|| Error::numeric("matrix is not positive definite"))?;
    let l = chol.l_dirty();
    let sum: f64 = (0..l.nrows()).map(|i| l[(i, i)].re.ln()).sum();
    Ok(2.0 * sum / std::f64::consts::LN_2)
}
