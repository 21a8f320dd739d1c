//! Channel-gain maximization `max ‖H_R^H Φ H_T‖_F²` over 1-bit `φ`.
//!
//! Under Ricean fading the principal singular vectors of both links harden
//! to the RIS steering vectors, so sign alignment of
//! `b_S = a_S*(outgoing) ⊙ a_S(incoming)` needs only LoS angles.

use crate::align::sign_align;
use crate::channel::{cascaded_channel, LosSpec, RisConfig};
use crate::error::{Error, Result};
use crate::linalg::{bilinear_dot, conj_hadamard, frobenius_sq, CMatrix, CVector};
use crate::spectral::SvdBundle;

/// `‖H̃‖_F²`.
pub fn channel_gain(h_tilde: &CMatrix) -> f64 {
    frobenius_sq(h_tilde)
}

/// Gain expanded over singular pairs,
/// `Σ_ij d²_{R,i} d²_{T,j} |(v*_{R,i} ⊙ u_{T,j})ᵀ φ|²`.
///
/// `bundle_r` decomposes `H_R^H` (its right vectors live on the RIS),
/// `bundle_t` decomposes `H_T` (its left vectors live on the RIS).
pub fn gain_expansion(bundle_r: &SvdBundle, bundle_t: &SvdBundle, phi: &RisConfig) -> Result<f64> {
    Ok(gain_terms(bundle_r, bundle_t, phi)?.iter().flatten().sum())
}

/// Individual terms `d²_{R,i} d²_{T,j} |(v*_{R,i} ⊙ u_{T,j})ᵀ φ|²`, indexed `[i][j]`.
pub fn gain_terms(bundle_r: &SvdBundle, bundle_t: &SvdBundle, phi: &RisConfig) -> Result<Vec<Vec<f64>>> {
    let n_s = phi.len();
    if bundle_r.right.nrows() != n_s || bundle_t.left.nrows() != n_s {
        return Err(Error::shape(
            format!("RIS dimension {n_s}"),
            format!("{} / {}", bundle_r.right.nrows(), bundle_t.left.nrows()),
        ));
    }
    let phases = phi.phases();
    let terms = (0..bundle_r.rank_capacity())
        .map(|i| {
            let v = bundle_r.right.column(i);
            (0..bundle_t.rank_capacity())
                .map(|j| {
                    let u = bundle_t.left.column(j);
                    let c = conj_hadamard(v.as_slice(), u.as_slice());
                    let z = bilinear_dot(c.as_slice(), phases.as_slice());
                    let d = bundle_r.singular_values[i] * bundle_t.singular_values[j];
                    d * d * z.norm_sqr()
                })
                .collect()
        })
        .collect();
    Ok(terms)
}

/// `b_S = a_S*(outgoing) ⊙ a_S(incoming)` from the two LoS descriptions.
pub fn los_alignment_target(los_t: &LosSpec, los_r: &LosSpec) -> Result<CVector> {
    if los_t.ris_geometry != los_r.ris_geometry {
        return Err(Error::shape(
            format!("RIS geometry {:?}", los_t.ris_geometry),
            format!("{:?}", los_r.ris_geometry),
        ));
    }
    let incoming = los_t.ris_steering()?;
    let outgoing = los_r.ris_steering()?;
    Ok(conj_hadamard(outgoing.as_slice(), incoming.as_slice()))
}

/// Sign-align the LoS target; needs no instantaneous CSI.
pub fn configure_gain_los(los_t: &LosSpec, los_r: &LosSpec) -> Result<RisConfig> {
    let b = los_alignment_target(los_t, los_r)?;
    let aligned = sign_align(&b, None)?;
    Ok(RisConfig::Binary(aligned.to_states(b.len())))
}

/// Diagnostic variant aligning the empirical principal pair `v*_{R,1} ⊙ u_{T,1}`.
pub fn configure_gain_principal(bundle_r: &SvdBundle, bundle_t: &SvdBundle) -> Result<RisConfig> {
    let v = bundle_r.right.column(0);
    let u = bundle_t.left.column(0);
    if v.len() != u.len() {
        return Err(Error::shape(format!("RIS dimension {}", u.len()), v.len().to_string()));
    }
    let b = conj_hadamard(v.as_slice(), u.as_slice());
    let aligned = sign_align(&b, None)?;
    Ok(RisConfig::Binary(aligned.to_states(b.len())))
}

/// `0.25 · K_T K_R / ((1+K_T)(1+K_R)) · N_S² · N_T · N_R` (linear K-factors).
pub fn gain_lower_bound(n_ris: usize, n_t: usize, n_r: usize, k_t: f64, k_r: f64) -> f64 {
    let w = |k: f64| if k.is_infinite() { 1.0 } else { k / (1.0 + k) };
    let ns = n_ris as f64;
    0.25 * w(k_t) * w(k_r) * ns * ns * n_t as f64 * n_r as f64
}

#[derive(Debug, Clone)]
pub struct GainReport {
    pub phi: RisConfig,
    pub gain: f64,
    pub lower_bound: f64,
    /// `10·log10(gain / lower_bound)`; `+∞` when the bound is zero.
    pub ratio_db: f64,
}

impl GainReport {
    pub fn evaluate(
        h_r_hermitian: &CMatrix,
        h_t: &CMatrix,
        phi: RisConfig,
        k_t: f64,
        k_r: f64,
    ) -> Result<Self> {
        let gain = channel_gain(&cascaded_channel(h_r_hermitian, &phi, h_t)?);
        let lower_bound = gain_lower_bound(phi.len(), h_t.ncols(), h_r_hermitian.nrows(), k_t, k_r);
        Ok(Self {
            phi,
            gain,
            lower_bound,
            ratio_db: 10.0 * (gain / lower_bound).log10(),
        })
    }

    /// Empirical `α = gain / (LB / 0.25)`.
    pub fn alpha(&self) -> f64 {
        self.gain / (self.lower_bound / 0.25)
    }
}
