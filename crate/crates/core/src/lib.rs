//! Configuration of 1-bit reconfigurable intelligent surfaces (RIS) in
//! Ricean MIMO links.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: uniform planar arrays and their steering vectors.
//! - [`channel`]: Ricean / Rayleigh / pure-LoS sampling and the cascaded
//!   channel `H_R^H · diag(φ) · H_T`.
//! - [`spectral`]: SVD bundles and the asymptotic singular-value prediction
//!   built from generalized Laguerre roots.
//! - [`align`]: the sign-alignment kernel and its continuous counterpart.
//! - [`gain`]: channel-gain maximization from LoS knowledge only.
//! - [`capacity`]: capacity evaluation, element allocation by successive
//!   convex approximation and per-stream sign alignment (W-SA).
//! - [`rmo`]: the Riemannian manifold optimization baseline with 1-bit
//!   quantization.

pub mod align;
pub mod capacity;
pub mod channel;
pub mod error;
pub mod gain;
pub mod geometry;
pub mod linalg;
pub mod rmo;
pub mod spectral;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, C64};
