//! SVD bundles and asymptotic singular-value prediction for Ricean links.
//!
//! For an `N_S × N_x` Ricean channel with `N_x ≪ N_S` the squared singular
//! values harden to
//!
//! ```text
//! d²_1 → K/(K+1) · N_S · N_x
//! d²_i → (N_S + 2·r_i·√(N_S·N_x)) / (K+1),   i = 2..N_x
//! ```
//!
//! where `r_i` is the `i`-th largest root, in the variable
//! `x = (y − N_S) / (2√(N_S N_x))`, of the generalized Laguerre polynomial
//! `L_{N_S}^{N_x−N_S}(y)`. Using
//! `L_n^{−m}(y) = (−y)^m · (n−m)!/n! · L_{n−m}^{m}(y)` with `m = N_S − N_x`,
//! the nonzero roots are those of `L_{N_x}^{N_S−N_x}`, which we obtain as the
//! eigenvalues of the symmetric tridiagonal Jacobi matrix of the Laguerre
//! recurrence.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::{DMatrix, SymmetricEigen, SVD};

use crate::error::{Error, Result};
use crate::linalg::{ensure_finite, CMatrix, CVector};

/// Thin SVD `H = U·diag(d)·V^H` with `d` sorted in descending order.
#[derive(Debug, Clone)]
pub struct SvdBundle {
    /// `rows × r` with orthonormal columns `u_i`.
    pub left: CMatrix,
    pub singular_values: Vec<f64>,
    /// `cols × r` with orthonormal columns `v_i`.
    pub right: CMatrix,
}

impl SvdBundle {
    pub fn rank_capacity(&self) -> usize {
        self.singular_values.len()
    }

    pub fn left_vector(&self, i: usize) -> CVector {
        self.left.column(i).into_owned()
    }

    pub fn right_vector(&self, i: usize) -> CVector {
        self.right.column(i).into_owned()
    }

    pub fn reconstruct(&self) -> CMatrix {
        let mut scaled = self.left.clone();
        for (j, &d) in self.singular_values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(d);
        }
        scaled * self.right.adjoint()
    }
}

/// Thin SVD of `h`, singular values descending (ties keep index order).
pub fn svd_bundle(h: &CMatrix) -> Result<SvdBundle> {
    ensure_finite(h, "matrix")?;
    if h.nrows() == 0 || h.ncols() == 0 {
        return Err(Error::domain("cannot decompose an empty matrix"));
    }
    let svd = SVD::new(h.clone(), true, true);
    let u = svd.u.ok_or_else(|| Error::numeric("SVD did not return U"))?;
    let v_t = svd.v_t.ok_or_else(|| Error::numeric("SVD did not return V^H"))?;
    let d = svd.singular_values;

    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&a, &b| d[b].total_cmp(&d[a]).then(a.cmp(&b)));

    let r = order.len();
    let mut left = CMatrix::zeros(h.nrows(), r);
    let mut right = CMatrix::zeros(h.ncols(), r);
    let mut singular_values = Vec::with_capacity(r);
    for (dst, &src) in order.iter().enumerate() {
        left.set_column(dst, &u.column(src));
        right.set_column(dst, &v_t.row(src).adjoint());
        singular_values.push(d[src]);
    }
    Ok(SvdBundle {
        left,
        singular_values,
        right,
    })
}

/// Roots of `L_n^α` for integer `n ≥ 1`, `α > −1`, ascending, via the
/// Jacobi matrix (diagonal `2k + α + 1`, off-diagonal `√(k (k + α))`).
pub fn generalized_laguerre_roots(n: usize, alpha: f64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::domain("Laguerre degree must be positive"));
    }
    if !(alpha > -1.0) {
        return Err(Error::domain(format!("Laguerre parameter must exceed -1, got {alpha}")));
    }
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        jacobi[(k, k)] = 2.0 * k as f64 + alpha + 1.0;
        if k + 1 < n {
            let kk = (k + 1) as f64;
            let off = (kk * (kk + alpha)).sqrt();
            jacobi[(k, k + 1)] = off;
            jacobi[(k + 1, k)] = off;
        }
    }
    let mut roots: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    roots.sort_by(f64::total_cmp);
    Ok(roots)
}

type RootKey = (usize, usize);

fn root_cache() -> &'static RwLock<HashMap<RootKey, Arc<Vec<f64>>>> {
    static CACHE: OnceLock<RwLock<HashMap<RootKey, Arc<Vec<f64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// The `n_small` non-degenerate roots of `L_{n_big}^{n_small − n_big}(2√(n_big·n_small)·x + n_big)`,
/// ascending, in the variable `x`.
///
/// Results are memoised per `(n_big, n_small)`; concurrent callers may both
/// compute an entry, which is harmless since the value is deterministic.
pub fn laguerre_top_roots(n_big: usize, n_small: usize) -> Result<Arc<Vec<f64>>> {
    if n_small == 0 {
        return Err(Error::domain("n_small must be at least 1"));
    }
    if n_small > n_big {
        return Err(Error::domain(format!(
            "n_small ({n_small}) must not exceed n_big ({n_big})"
        )));
    }
    let key = (n_big, n_small);
    if let Some(hit) = root_cache().read().expect("root cache poisoned").get(&key) {
        return Ok(Arc::clone(hit));
    }
    let alpha = (n_big - n_small) as f64;
    let scale = 2.0 * ((n_big as f64) * (n_small as f64)).sqrt();
    let roots: Vec<f64> = generalized_laguerre_roots(n_small, alpha)?
        .into_iter()
        .map(|y| (y - n_big as f64) / scale)
        .collect();
    let roots = Arc::new(roots);
    root_cache()
        .write()
        .expect("root cache poisoned")
        .entry(key)
        .or_insert_with(|| Arc::clone(&roots));
    Ok(roots)
}

/// Predicted squared singular values of an `N_S × N_x` Ricean channel.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticSpectrum {
    /// Descending, length `N_x`.
    pub predicted_sq_singular_values: Vec<f64>,
    pub k_factor: f64,
    pub n_ris: usize,
    pub n_array: usize,
    /// `true` when `K ≥ 1/N_x`, the regime where the LoS spike separates.
    /// Otherwise entry 1 is the top bulk value, not `K/(K+1)·N_S·N_x`.
    pub spike_regime: bool,
}

impl AsymptoticSpectrum {
    pub fn singular_values(&self) -> Vec<f64> {
        self.predicted_sq_singular_values.iter().map(|v| v.sqrt()).collect()
    }
}

pub fn asymptotic_spectrum(n_ris: usize, n_array: usize, k_factor: f64) -> Result<AsymptoticSpectrum> {
    if k_factor.is_nan() || k_factor < 0.0 {
        return Err(Error::domain(format!(
            "K-factor must be non-negative, got {k_factor}"
        )));
    }
    let roots = laguerre_top_roots(n_ris, n_array)?;
    let ns = n_ris as f64;
    let scale = 2.0 * (ns * n_array as f64).sqrt();
    let bulk_div = if k_factor.is_infinite() { f64::INFINITY } else { k_factor + 1.0 };
    // i-th largest root drives the i-th value (1-based), r[N_S - i + 1]
    let bulk = |i: usize| (ns + roots[n_array - i] * scale) / bulk_div;

    let spike_regime = k_factor * n_array as f64 >= 1.0;
    let mut values = Vec::with_capacity(n_array);
    if spike_regime {
        let w = if k_factor.is_infinite() { 1.0 } else { k_factor / (k_factor + 1.0) };
        values.push(w * ns * n_array as f64);
    } else {
        values.push(bulk(1));
    }
    values.extend((2..=n_array).map(bulk));
    Ok(AsymptoticSpectrum {
        predicted_sq_singular_values: values,
        k_factor,
        n_ris,
        n_array,
        spike_regime,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{complex_gaussian_matrix, C64};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn orthonormality_error(m: &CMatrix) -> f64 {
        let g = m.ad_mul(m);
        (g - CMatrix::identity(m.ncols(), m.ncols())).norm()
    }

    #[test]
    fn identity_svd() {
        let b = svd_bundle(&CMatrix::identity(3, 3)).unwrap();
        for &d in &b.singular_values {
            assert_abs_diff_eq!(d, 1.0, epsilon = 1e-14);
        }
        let uv = &b.left * b.right.adjoint();
        assert!(orthonormality_error(&uv) < 1e-12);
    }

    #[test]
    fn rank_one_svd() {
        let a = CVector::from_vec(vec![C64::new(1.0, 2.0), C64::new(-0.5, 0.0), C64::new(0.0, 3.0)]);
        let b = CVector::from_vec(vec![C64::new(2.0, -1.0), C64::new(1.0, 1.0)]);
        let h = &a * b.adjoint();
        let s = svd_bundle(&h).unwrap();
        assert_abs_diff_eq!(s.singular_values[0], a.norm() * b.norm(), epsilon = 1e-12);
        assert!(s.singular_values[1] < 1e-10);
    }

    #[test]
    fn random_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (r, c) in [(6, 4), (4, 6), (50, 3)] {
            let h = complex_gaussian_matrix(r, c, &mut rng);
            let s = svd_bundle(&h).unwrap();
            assert!((s.reconstruct() - &h).norm() / h.norm() < 1e-10);
            assert!(orthonormality_error(&s.left) < 1e-8);
            assert!(orthonormality_error(&s.right) < 1e-8);
            assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn svd_rejects_non_finite() {
        let mut h = CMatrix::identity(2, 2);
        h[(0, 1)] = C64::new(f64::NAN, 0.0);
        assert!(matches!(svd_bundle(&h), Err(Error::Domain(_))));
    }

    #[test]
    fn single_root_is_centered() {
        // L_1^{N-1}(y) = N - y, root y = N, x = 0
        for n in [1, 5, 100] {
            let r = laguerre_top_roots(n, 1).unwrap();
            assert_eq!(r.len(), 1);
            assert_abs_diff_eq!(r[0], 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn roots_vanish_polynomial() {
        // three-term recurrence evaluation of L_n^α at each root
        fn laguerre(n: usize, alpha: f64, y: f64) -> f64 {
            let (mut p0, mut p1) = (1.0, 1.0 + alpha - y);
            if n == 0 {
                return p0;
            }
            for k in 1..n {
                let kf = k as f64;
                let p2 = ((2.0 * kf + 1.0 + alpha - y) * p1 - (kf + alpha) * p0) / (kf + 1.0);
                p0 = p1;
                p1 = p2;
            }
            p1
        }
        let roots = generalized_laguerre_roots(6, 3.0).unwrap();
        for &y in &roots {
            let scale: f64 = roots.iter().map(|r| (r - y).abs().max(1.0)).product();
            assert!(laguerre(6, 3.0, y).abs() / scale < 1e-10);
        }
    }

    #[test]
    fn roots_domain_errors() {
        assert!(laguerre_top_roots(3, 4).is_err());
        assert!(laguerre_top_roots(3, 0).is_err());
    }

    #[test]
    fn tall_roots_in_unit_interval() {
        for (nb, ns) in [(100, 10), (2000, 20), (500, 20)] {
            let r = laguerre_top_roots(nb, ns).unwrap();
            assert!(r.iter().all(|&x| (-1.0 - 1e-6..=1.0 + 1e-6).contains(&x)));
            assert!(r.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn spectrum_principal_entry() {
        let s = asymptotic_spectrum(10_000, 100, 10.0).unwrap();
        assert_abs_diff_eq!(s.predicted_sq_singular_values[0], 10.0 / 11.0 * 1e6, epsilon = 1e-6);
        assert!(s.spike_regime);
        let lo = (1e4 - 2.0 * 1e3) / 11.0;
        let hi = (1e4 + 2.0 * 1e3) / 11.0;
        assert!(s.predicted_sq_singular_values[1..]
            .iter()
            .all(|&v| v >= lo && v <= hi));
        assert!(s
            .predicted_sq_singular_values
            .windows(2)
            .all(|w| w[0] >= w[1]));
    }

    #[test]
    fn rayleigh_spectrum_uses_bulk_branch() {
        let s = asymptotic_spectrum(400, 8, 0.0).unwrap();
        assert!(!s.spike_regime);
        let roots = laguerre_top_roots(400, 8).unwrap();
        let top = 400.0 + roots[7] * 2.0 * (3200.0f64).sqrt();
        assert_abs_diff_eq!(s.predicted_sq_singular_values[0], top, epsilon = 1e-9);
        assert!(asymptotic_spectrum(400, 8, -0.1).is_err());
    }
}
