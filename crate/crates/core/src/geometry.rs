//! Uniform planar arrays and unnormalized steering vectors.
//!
//! Element `(m, n)` with `m < n_horizontal`, `n < n_vertical` is stored at
//! flat index `n * n_horizontal + m` (horizontal index fastest). Element
//! `(0, 0)` is the zero-phase reference. Every module uses this order.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{CVector, C64};

pub const DEFAULT_SPACING: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpaGeometry {
    n_horizontal: usize,
    n_vertical: usize,
    /// Element pitch in wavelengths.
    spacing: f64,
}

impl UpaGeometry {
    pub fn new(n_horizontal: usize, n_vertical: usize, spacing: f64) -> Result<Self> {
        if n_horizontal == 0 || n_vertical == 0 {
            return Err(Error::domain(format!(
                "array dimensions must be positive, got {n_horizontal}x{n_vertical}"
            )));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::domain(format!("spacing must be positive, got {spacing}")));
        }
        Ok(Self {
            n_horizontal,
            n_vertical,
            spacing,
        })
    }

    /// Half-wavelength UPA of `n_horizontal × n_vertical` elements.
    pub fn half_wavelength(n_horizontal: usize, n_vertical: usize) -> Result<Self> {
        Self::new(n_horizontal, n_vertical, DEFAULT_SPACING)
    }

    /// The most square half-wavelength UPA with exactly `n` elements.
    ///
    /// The horizontal side is the largest divisor of `n` not exceeding
    /// `√n`; primes therefore degenerate to a `1 × n` line.
    pub fn near_square(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("array must have at least one element"));
        }
        let mut side = (n as f64).sqrt().floor() as usize;
        while side > 1 && !n.is_multiple_of(side) {
            side -= 1;
        }
        let side = side.max(1);
        Self::half_wavelength(side, n / side)
    }

    pub fn n_horizontal(&self) -> usize {
        self.n_horizontal
    }

    pub fn n_vertical(&self) -> usize {
        self.n_vertical
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.n_horizontal * self.n_vertical
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Azimuth in `(−π, π]`, elevation in `[0, π]`, both radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnglePair {
    pub azimuth: f64,
    pub elevation: f64,
}

impl AnglePair {
    pub fn new(azimuth: f64, elevation: f64) -> Result<Self> {
        let pair = Self { azimuth, elevation };
        pair.validate()?;
        Ok(pair)
    }

    pub fn from_degrees(azimuth_deg: f64, elevation_deg: f64) -> Result<Self> {
        Self::new(azimuth_deg.to_radians(), elevation_deg.to_radians())
    }

    /// Uniform draw over the full azimuth circle and elevation range.
    pub fn random<R: rand::Rng + ?Sized>(rng: &mut R) -> Self {
        // (−π, π]
        let azimuth = PI - 2.0 * PI * rng.random::<f64>();
        let elevation = PI * rng.random::<f64>();
        Self { azimuth, elevation }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.azimuth.is_finite() && self.elevation.is_finite()) {
            return Err(Error::domain("angles must be finite"));
        }
        if !(self.azimuth > -PI && self.azimuth <= PI) {
            return Err(Error::domain(format!(
                "azimuth {} outside (-pi, pi]",
                self.azimuth
            )));
        }
        if !(0.0..=PI).contains(&self.elevation) {
            return Err(Error::domain(format!(
                "elevation {} outside [0, pi]",
                self.elevation
            )));
        }
        Ok(())
    }
}

/// Unnormalized UPA steering vector, `‖a‖² = N`.
///
/// Entry `(m, n)` is `exp(j·2π·d·(m·sin(el)·cos(az) + n·sin(el)·sin(az)))`.
pub fn upa_steering(geometry: &UpaGeometry, angles: &AnglePair) -> Result<CVector> {
    if !(angles.azimuth.is_finite() && angles.elevation.is_finite()) {
        return Err(Error::domain("steering angles must be finite"));
    }
    let k = 2.0 * PI * geometry.spacing;
    let step_h = k * angles.elevation.sin() * angles.azimuth.cos();
    let step_v = k * angles.elevation.sin() * angles.azimuth.sin();
    // separable: one row of horizontal phases times one vertical phase
    let row: Vec<C64> = (0..geometry.n_horizontal)
        .map(|m| C64::from_polar(1.0, m as f64 * step_h))
        .collect();
    let mut out = Vec::with_capacity(geometry.len());
    for n in 0..geometry.n_vertical {
        let v = C64::from_polar(1.0, n as f64 * step_v);
        out.extend(row.iter().map(|h| h * v));
    }
    Ok(CVector::from_vec(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_elevation_gives_all_ones() {
        let g = UpaGeometry::half_wavelength(2, 2).unwrap();
        let a = upa_steering(&g, &AnglePair::new(0.3, 0.0).unwrap()).unwrap();
        assert_eq!(a.len(), 4);
        for z in a.iter() {
            assert_abs_diff_eq!(z.re, 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(z.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn two_element_horizontal_line_broadside() {
        // half-wavelength pitch, az = 0, el = π/2: phase step π
        let g = UpaGeometry::half_wavelength(2, 1).unwrap();
        let a = upa_steering(&g, &AnglePair::new(0.0, PI / 2.0).unwrap()).unwrap();
        assert_abs_diff_eq!(a[0].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a[1].re, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a[1].im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn norm_equals_element_count() {
        let g = UpaGeometry::half_wavelength(5, 7).unwrap();
        let a = upa_steering(&g, &AnglePair::new(1.1, 0.7).unwrap()).unwrap();
        assert_abs_diff_eq!(a.norm_squared(), 35.0, epsilon = 1e-10);
    }

    #[test]
    fn non_finite_angles_rejected() {
        let g = UpaGeometry::half_wavelength(2, 2).unwrap();
        let bad = AnglePair {
            azimuth: f64::NAN,
            elevation: 0.1,
        };
        assert!(matches!(upa_steering(&g, &bad), Err(Error::Domain(_))));
        assert!(AnglePair::new(0.0, f64::INFINITY).is_err());
        assert!(AnglePair::new(-PI, 0.5).is_err());
        assert!(AnglePair::new(0.0, 3.5).is_err());
    }

    #[test]
    fn invalid_geometry_rejected() {
        assert!(UpaGeometry::new(0, 3, 0.5).is_err());
        assert!(UpaGeometry::new(2, 3, 0.0).is_err());
        assert!(UpaGeometry::new(2, 3, f64::NAN).is_err());
    }

    #[test]
    fn near_square_factorization() {
        let g = UpaGeometry::near_square(2000).unwrap();
        assert_eq!((g.n_horizontal(), g.n_vertical()), (40, 50));
        let g = UpaGeometry::near_square(4096).unwrap();
        assert_eq!((g.n_horizontal(), g.n_vertical()), (64, 64));
        let g = UpaGeometry::near_square(13).unwrap();
        assert_eq!((g.n_horizontal(), g.n_vertical()), (1, 13));
    }

    #[test]
    fn flattening_is_horizontal_fastest() {
        let g = UpaGeometry::half_wavelength(3, 2).unwrap();
        let angles = AnglePair::new(0.4, 1.2).unwrap();
        let a = upa_steering(&g, &angles).unwrap();
        let k = PI;
        let sh = k * angles.elevation.sin() * angles.azimuth.cos();
        let sv = k * angles.elevation.sin() * angles.azimuth.sin();
        // element (m=2, n=1) sits at flat index 1*3 + 2
        let expect = C64::from_polar(1.0, 2.0 * sh + sv);
        assert_abs_diff_eq!((a[5] - expect).norm(), 0.0, epsilon = 1e-12);
    }
}
