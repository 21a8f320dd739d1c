//! Ricean channel sampling and the RIS-parametrized cascaded channel.
//!
//! The TX side channel `H_T` is `N_S × N_T`. The RX side is stored already
//! Hermitian-transposed, `H_R^H` of size `N_R × N_S`, so that the cascade
//! reads `H_R^H · diag(φ) · H_T` without further transposes.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{upa_steering, AnglePair, UpaGeometry};
use crate::linalg::{complex_gaussian, CMatrix, CVector, C64, ONE, ZERO};

/// Line-of-sight description of one RIS link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LosSpec {
    /// Angle at the non-RIS terminal (TX or RX array).
    pub array_side_angles: AnglePair,
    /// Angle at the RIS (incoming for the TX link, outgoing for the RX link).
    pub ris_side_angles: AnglePair,
    pub array_geometry: UpaGeometry,
    pub ris_geometry: UpaGeometry,
}

impl LosSpec {
    pub fn ris_steering(&self) -> Result<CVector> {
        upa_steering(&self.ris_geometry, &self.ris_side_angles)
    }

    pub fn array_steering(&self) -> Result<CVector> {
        upa_steering(&self.array_geometry, &self.array_side_angles)
    }

    /// The rank-one LoS matrix `a_ris · a_array^H` (`N_S × N_x`).
    pub fn los_matrix(&self) -> Result<CMatrix> {
        let a_ris = self.ris_steering()?;
        let a_arr = self.array_steering()?;
        Ok(&a_ris * a_arr.adjoint())
    }

    /// LoS spec with uniformly random angles on both ends.
    pub fn random<R: Rng + ?Sized>(
        array_geometry: UpaGeometry,
        ris_geometry: UpaGeometry,
        rng: &mut R,
    ) -> Self {
        Self {
            array_side_angles: AnglePair::random(rng),
            ris_side_angles: AnglePair::random(rng),
            array_geometry,
            ris_geometry,
        }
    }
}

/// One Ricean link, stored RIS-rows first (`N_S × N_x`).
#[derive(Debug, Clone)]
pub struct RiceanChannel {
    pub matrix: CMatrix,
    /// Linear K-factor; `f64::INFINITY` is pure LoS.
    pub k_factor: f64,
    pub los: LosSpec,
}

impl RiceanChannel {
    /// The same link seen from the receive side: `H^H`, `N_x × N_S`.
    pub fn rx_matrix(&self) -> CMatrix {
        self.matrix.adjoint()
    }

    /// The weighted LoS component `√(K/(K+1))·A`.
    pub fn los_component(&self) -> Result<CMatrix> {
        Ok(self.los.los_matrix()? * C64::from(los_weight(self.k_factor)))
    }
}

fn los_weight(k: f64) -> f64 {
    if k.is_infinite() {
        1.0
    } else {
        (k / (k + 1.0)).sqrt()
    }
}

fn scatter_weight(k: f64) -> f64 {
    if k.is_infinite() {
        0.0
    } else {
        (1.0 / (k + 1.0)).sqrt()
    }
}

/// Draw `√(K/(K+1))·a_ris·a_array^H + √(1/(K+1))·B`, `B` i.i.d. `CN(0, 1)`.
///
/// The scattered part is drawn column by column. At `K = ∞` no random
/// numbers are consumed and the LoS matrix is returned exactly.
pub fn sample_ricean<R: Rng + ?Sized>(
    n_ris: usize,
    n_array: usize,
    k_factor: f64,
    los: &LosSpec,
    rng: &mut R,
) -> Result<RiceanChannel> {
    if k_factor.is_nan() || k_factor < 0.0 {
        return Err(Error::domain(format!(
            "K-factor must be non-negative, got {k_factor}"
        )));
    }
    if los.ris_geometry.len() != n_ris || los.array_geometry.len() != n_array {
        return Err(Error::shape(
            format!("LoS geometry {n_ris}x{n_array}"),
            format!("{}x{}", los.ris_geometry.len(), los.array_geometry.len()),
        ));
    }
    let a_ris = los.ris_steering()?;
    let a_arr = los.array_steering()?;
    let wl = los_weight(k_factor);
    let ws = scatter_weight(k_factor);
    let matrix = if ws == 0.0 {
        CMatrix::from_fn(n_ris, n_array, |i, j| a_ris[i] * a_arr[j].conj())
    } else {
        CMatrix::from_fn(n_ris, n_array, |i, j| {
            a_ris[i] * a_arr[j].conj() * wl + complex_gaussian(rng) * ws
        })
    };
    Ok(RiceanChannel {
        matrix,
        k_factor,
        los: *los,
    })
}

/// RIS reflection configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum RisConfig {
    /// 1-bit states, every entry `+1` or `−1`.
    Binary(Vec<i8>),
    /// Continuous unit-modulus phases.
    Continuous(CVector),
}

impl RisConfig {
    pub fn binary(states: Vec<i8>) -> Result<Self> {
        if let Some(bad) = states.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::domain(format!("1-bit state must be ±1, got {bad}")));
        }
        Ok(RisConfig::Binary(states))
    }

    pub fn all_ones(n: usize) -> Self {
        RisConfig::Binary(vec![1; n])
    }

    pub fn continuous(phases: CVector) -> Result<Self> {
        if let Some(z) = phases.iter().find(|z| (z.norm() - 1.0).abs() > 1e-12) {
            return Err(Error::domain(format!(
                "continuous phase must be unit modulus, got |{z}| = {}",
                z.norm()
            )));
        }
        Ok(RisConfig::Continuous(phases))
    }

    pub fn len(&self) -> usize {
        match self {
            RisConfig::Binary(s) => s.len(),
            RisConfig::Continuous(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Reflection coefficients as complex numbers.
    pub fn phases(&self) -> CVector {
        match self {
            RisConfig::Binary(s) => {
                CVector::from_iterator(s.len(), s.iter().map(|&v| C64::new(v as f64, 0.0)))
            }
            RisConfig::Continuous(p) => p.clone(),
        }
    }

    pub fn states(&self) -> Option<&[i8]> {
        match self {
            RisConfig::Binary(s) => Some(s),
            RisConfig::Continuous(_) => None,
        }
    }
}

/// `H_R^H · diag(φ) · H_T` for `N_R × N_S` and `N_S × N_T` operands.
pub fn cascaded_channel(h_r_hermitian: &CMatrix, phi: &RisConfig, h_t: &CMatrix) -> Result<CMatrix> {
    let phases = phi.phases();
    cascade_with_phases(h_r_hermitian, phases.as_slice(), h_t)
}

pub(crate) fn cascade_with_phases(hrh: &CMatrix, phases: &[C64], ht: &CMatrix) -> Result<CMatrix> {
    let n_s = hrh.ncols();
    if ht.nrows() != n_s || phases.len() != n_s {
        return Err(Error::shape(
            format!("H_R^H ?x{n_s}, phi {n_s}, H_T {n_s}x?"),
            format!(
                "H_R^H {}x{}, phi {}, H_T {}x{}",
                hrh.nrows(),
                hrh.ncols(),
                phases.len(),
                ht.nrows(),
                ht.ncols()
            ),
        ));
    }
    let n_r = hrh.nrows();
    let n_t = ht.ncols();
    let mut out = CMatrix::from_element(n_r, n_t, ZERO);
    let hr = hrh.as_slice();
    for j in 0..n_t {
        let ht_col = ht.column(j);
        let mut col = out.column_mut(j);
        let acc = col.as_mut_slice();
        for n in 0..n_s {
            let coef = phases[n] * ht_col[n];
            if coef == ZERO {
                continue;
            }
            let src = &hr[n * n_r..(n + 1) * n_r];
            for (a, s) in acc.iter_mut().zip(src) {
                *a += s * coef;
            }
        }
    }
    Ok(out)
}

/// Convenience: all-ones configuration of length `n`, as phases.
pub fn unit_phases(n: usize) -> CVector {
    CVector::from_element(n, ONE)
}
