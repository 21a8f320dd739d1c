//! Sign alignment: closed-form 1-bit maximization of `|bᵀφ|`.
//!
//! Over `φ ∈ {±1}^N` the two candidates `sign(Re b)` and `sign(Im b)` make
//! the real (resp. imaginary) part of `bᵀφ` equal to `Σ|Re b_n|` (resp.
//! `Σ|Im b_n|`). Keeping the better of the two guarantees at least half of
//! `Σ|b_n|`, hence at least a quarter of the continuous optimum `(Σ|b_n|)²`.

use crate::error::{Error, Result};
use crate::linalg::{CVector, C64, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Real,
    Imaginary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentResult {
    /// Element indices the signs apply to (the mask, or `0..N`).
    pub indices: Vec<usize>,
    /// `±1` per entry of `indices`.
    pub signs: Vec<i8>,
    /// `|Σ_{n ∈ indices} b_n φ_n|`.
    pub value: f64,
    pub branch: Branch,
}

impl AlignmentResult {
    /// Write the signs into a full-length state vector.
    pub fn scatter_into(&self, states: &mut [i8]) {
        for (&idx, &s) in self.indices.iter().zip(&self.signs) {
            states[idx] = s;
        }
    }

    /// Full-length configuration; only valid without a mask.
    pub fn to_states(&self, n: usize) -> Vec<i8> {
        let mut states = vec![1; n];
        self.scatter_into(&mut states);
        states
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseAlignment {
    pub indices: Vec<usize>,
    /// `exp(−j·∠b_n)` per entry of `indices`.
    pub phases: CVector,
    /// `Σ |b_n|` over the indices.
    pub value: f64,
}

fn effective_indices(b: &CVector, mask: Option<&[usize]>) -> Result<Vec<usize>> {
    if b.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::domain("alignment target has non-finite entries"));
    }
    let indices: Vec<usize> = match mask {
        Some(m) => {
            if let Some(&bad) = m.iter().find(|&&i| i >= b.len()) {
                return Err(Error::domain(format!(
                    "mask index {bad} out of range for length {}",
                    b.len()
                )));
            }
            m.to_vec()
        }
        None => (0..b.len()).collect(),
    };
    if indices.is_empty() {
        return Err(Error::domain("alignment over an empty set of elements"));
    }
    Ok(indices)
}

#[inline]
fn sign_of(x: f64) -> i8 {
    if x < 0.0 {
        -1
    } else {
        1
    }
}

/// Sign-align `b` on `mask` (or on every entry). `sign(0)` is `+1`.
pub fn sign_align(b: &CVector, mask: Option<&[usize]>) -> Result<AlignmentResult> {
    let indices = effective_indices(b, mask)?;
    let mut sum_re = ZERO;
    let mut sum_im = ZERO;
    for &i in &indices {
        let z = b[i];
        sum_re += z * sign_of(z.re) as f64;
        sum_im += z * sign_of(z.im) as f64;
    }
    let (branch, value) = if sum_im.norm() > sum_re.norm() {
        (Branch::Imaginary, sum_im.norm())
    } else {
        (Branch::Real, sum_re.norm())
    };
    let signs = indices
        .iter()
        .map(|&i| match branch {
            Branch::Real => sign_of(b[i].re),
            Branch::Imaginary => sign_of(b[i].im),
        })
        .collect();
    Ok(AlignmentResult {
        indices,
        signs,
        value,
        branch,
    })
}

/// Continuous phase alignment: `φ_n = exp(−j·∠b_n)`, so `Σ b_n φ_n = Σ|b_n|`.
pub fn phase_align(b: &CVector, mask: Option<&[usize]>) -> Result<PhaseAlignment> {
    let indices = effective_indices(b, mask)?;
    let phases = CVector::from_iterator(
        indices.len(),
        indices.iter().map(|&i| C64::from_polar(1.0, -b[i].arg())),
    );
    let value = indices.iter().map(|&i| b[i].norm()).sum();
    Ok(PhaseAlignment {
        indices,
        phases,
        value,
    })
}
