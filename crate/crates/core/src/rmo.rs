//! Riemannian gradient ascent on the product of unit circles, followed by
//! 1-bit quantization. This is the full-CSI iterative baseline.
//!
//! Gradients use the real-embedding convention
//! `g_n = ∂f/∂Re φ_n + j ∂f/∂Im φ_n = 2 ∂f/∂φ_n*`, so a first-order change
//! is `δf = Re Σ_n g_n* δφ_n`.

use rand::Rng;

use crate::capacity::INV_LN2;
use crate::channel::{cascade_with_phases, RisConfig};
use crate::error::{Error, Result};
use crate::linalg::{bilinear_dot, conj_hadamard, ensure_finite, CMatrix, CVector, C64, ONE, ZERO};
use crate::spectral::svd_bundle;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// `‖H_R^H Φ H_T‖_F²`.
    Gain,
    /// `log2 det(I + snr/N_T · G G^H)`.
    CapacityExact,
    /// Per-stream diagonal surrogate of the capacity.
    CapacitySurrogate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepRule {
    /// Constant angular step `initial_step / max_n |ξ_n|`.
    Fixed,
    /// Armijo backtracking (factor 0.5, sufficient increase 1e-4).
    Backtracking,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmoSettings {
    pub max_iters: usize,
    pub step_rule: StepRule,
    /// Largest per-element move of the first trial step, in radians.
    pub initial_step: f64,
    /// Stop once `‖ξ‖ ≤ gradient_tolerance · ‖ξ_0‖`.
    pub gradient_tolerance: f64,
    pub objective: Objective,
}

impl RmoSettings {
    pub fn new(objective: Objective) -> Self {
        Self {
            max_iters: 500,
            step_rule: StepRule::Backtracking,
            initial_step: 0.5,
            gradient_tolerance: 1e-6,
            objective,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::domain("max_iters must be positive"));
        }
        for (name, v) in [("initial_step", self.initial_step), ("gradient_tolerance", self.gradient_tolerance)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

const ARMIJO_SHRINK: f64 = 0.5;
const ARMIJO_C: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;

/// Objective together with the channel data it needs.
pub struct Landscape<'a> {
    objective: Objective,
    hrh: &'a CMatrix,
    ht: &'a CMatrix,
    /// `snr / N_T`.
    scale: f64,
    /// `(d²_{R,i} d²_{T,i}, v*_{R,i} ⊙ u_{T,i})` per stream.
    streams: Vec<(f64, CVector)>,
}

impl<'a> Landscape<'a> {
    /// `snr` is linear and ignored by the gain objective.
    pub fn new(objective: Objective, h_r_hermitian: &'a CMatrix, h_t: &'a CMatrix, snr: f64) -> Result<Self> {
        ensure_finite(h_r_hermitian, "H_R^H")?;
        ensure_finite(h_t, "H_T")?;
        if h_r_hermitian.ncols() != h_t.nrows() {
            return Err(Error::shape(
                format!("H_T with {} rows", h_r_hermitian.ncols()),
                h_t.nrows().to_string(),
            ));
        }
        if objective != Objective::Gain && !(snr.is_finite() && snr > 0.0) {
            return Err(Error::domain(format!("SNR must be positive and finite, got {snr}")));
        }
        let streams = if objective == Objective::CapacitySurrogate {
            let br = svd_bundle(h_r_hermitian)?;
            let bt = svd_bundle(h_t)?;
            let n = br.rank_capacity().min(bt.rank_capacity());
            (0..n)
                .map(|i| {
                    let d = br.singular_values[i] * bt.singular_values[i];
                    let c = conj_hadamard(br.right.column(i).as_slice(), bt.left.column(i).as_slice());
                    (d * d, c)
                })
                .collect()
        } else {
            Vec::new()
        };
        Ok(Self {
            objective,
            hrh: h_r_hermitian,
            ht: h_t,
            scale: snr / h_t.ncols() as f64,
            streams,
        })
    }

    pub fn n_ris(&self) -> usize {
        self.hrh.ncols()
    }

    pub fn value(&self, phi: &[C64]) -> Result<f64> {
        match self.objective {
            Objective::Gain => Ok(crate::linalg::frobenius_sq(&cascade_with_phases(self.hrh, phi, self.ht)?)),
            Objective::CapacityExact => {
                let g = cascade_with_phases(self.hrh, phi, self.ht)?;
                crate::linalg::log2_det_hpd(self.capacity_kernel(&g))
            }
            Objective::CapacitySurrogate => Ok(self
                .streams
                .iter()
                .map(|(a, c)| (1.0 + self.scale * a * bilinear_dot(c.as_slice(), phi).norm_sqr()).log2())
                .sum()),
        }
    }

    /// `I + s G G^H`.
    fn capacity_kernel(&self, g: &CMatrix) -> CMatrix {
        let n_r = g.nrows();
        CMatrix::identity(n_r, n_r) + (g * g.adjoint()) * C64::from(self.scale)
    }

    /// Euclidean gradient in the real-embedding convention.
    pub fn gradient(&self, phi: &[C64]) -> Result<CVector> {
        match self.objective {
            Objective::Gain => {
                let g = cascade_with_phases(self.hrh, phi, self.ht)?;
                Ok(self.sandwich_diagonal(&g, 2.0))
            }
            Objective::CapacityExact => {
                let g = cascade_with_phases(self.hrh, phi, self.ht)?;
                let chol = self
                    .capacity_kernel(&g)
                    .cholesky()
                    .ok_or_else(|| Error::numeric("capacity kernel is singular"))?;
                let m = chol.solve(&g);
                Ok(self.sandwich_diagonal(&m, 2.0 * self.scale * INV_LN2))
            }
            Objective::CapacitySurrogate => {
                if phi.len() != self.n_ris() {
                    return Err(Error::shape(self.n_ris().to_string(), phi.len().to_string()));
                }
                let mut grad = CVector::from_element(phi.len(), ZERO);
                for (a, c) in &self.streams {
                    let z = bilinear_dot(c.as_slice(), phi);
                    let w = 2.0 * self.scale * a * INV_LN2 / (1.0 + self.scale * a * z.norm_sqr());
                    for (g, ci) in grad.iter_mut().zip(c.iter()) {
                        *g += z * ci.conj() * w;
                    }
                }
                Ok(grad)
            }
        }
    }

    /// `factor · [H_R M H_T^H]_{nn}`, i.e. `factor · r_n^H M conj(t_n)`
    /// with `r_n` the n-th column of `H_R^H` and `t_n` the n-th row of `H_T`.
    fn sandwich_diagonal(&self, m: &CMatrix, factor: f64) -> CVector {
        let n_r = self.hrh.nrows();
        let n_t = self.ht.ncols();
        let hr = self.hrh.as_slice();
        let mut out = CVector::from_element(self.n_ris(), ZERO);
        for (n, o) in out.iter_mut().enumerate() {
            let r = &hr[n * n_r..(n + 1) * n_r];
            let mut acc = ZERO;
            for k in 0..n_t {
                let col = m.column(k);
                let s: C64 = r.iter().zip(col.iter()).map(|(a, b)| a.conj() * b).sum();
                acc += s * self.ht[(n, k)].conj();
            }
            *o = acc * factor;
        }
        out
    }
}

/// Euclidean gradient of `objective` at `phi`.
pub fn euclidean_gradient(
    objective: Objective,
    h_r_hermitian: &CMatrix,
    h_t: &CMatrix,
    phi: &CVector,
    snr: f64,
) -> Result<CVector> {
    Landscape::new(objective, h_r_hermitian, h_t, snr)?.gradient(phi.as_slice())
}

/// Tangent projection `g − Re{g ⊙ φ*} ⊙ φ`.
pub fn riemannian_gradient(euclidean: &CVector, phi: &CVector) -> CVector {
    euclidean.zip_map(phi, |g, p| g - p * (g * p.conj()).re)
}

fn retract(phi: &CVector, xi: &CVector, step: f64) -> CVector {
    phi.zip_map(xi, |p, x| {
        let z = p + x * step;
        let r = z.norm();
        if r == 0.0 {
            p
        } else {
            z / r
        }
    })
}

/// Nearest point of `{+1, −1}`; `Re φ_n = 0` goes to `+1`.
pub fn quantize_1bit(phi: &CVector) -> RisConfig {
    RisConfig::Binary(phi.iter().map(|z| if z.re >= 0.0 { 1 } else { -1 }).collect())
}

/// Uniformly random phases.
pub fn random_unit_init<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    CVector::from_fn(n, |_, _| C64::from_polar(1.0, rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Gradient norm fell below the relative tolerance.
    Tolerance,
    /// No step along the gradient increases the objective (precision floor).
    Stalled,
    MaxIters,
}

#[derive(Debug, Clone)]
pub struct RmoOutcome {
    pub phi: CVector,
    /// Objective at the initial point and after every accepted step.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub stop: StopReason,
    pub gradient_norm: f64,
}

impl RmoOutcome {
    pub fn objective(&self) -> f64 {
        *self.trace.last().expect("trace holds the initial value")
    }

    pub fn quantized(&self) -> RisConfig {
        quantize_1bit(&self.phi)
    }
}

/// Gradient ascent over unit-modulus `φ`, starting from `init` (all-ones if `None`).
pub fn rmo_optimize(landscape: &Landscape<'_>, settings: &RmoSettings, init: Option<&CVector>) -> Result<RmoOutcome> {
    settings.validate()?;
    let n = landscape.n_ris();
    let mut phi = match init {
        Some(p) => {
            if p.len() != n {
                return Err(Error::shape(format!("{n} phases"), p.len().to_string()));
            }
            if let Some(i) = p.iter().position(|z| !((z.norm() - 1.0).abs() <= 1e-9)) {
                return Err(Error::domain(format!("initial phase {i} is not unit modulus")));
            }
            p.clone()
        }
        None => CVector::from_element(n, ONE),
    };

    let mut value = landscape.value(phi.as_slice())?;
    let mut trace = vec![value];
    let mut step_scale = settings.initial_step;
    let mut reference_norm = None;
    let mut xi_norm = f64::NAN;

    for iter in 0..settings.max_iters {
        let grad = landscape.gradient(phi.as_slice())?;
        if grad.iter().any(|g| !(g.re.is_finite() && g.im.is_finite())) {
            return Err(Error::numeric(format!("non-finite gradient at iteration {iter}")));
        }
        let xi = riemannian_gradient(&grad, &phi);
        let xi_sq = xi.norm_squared();
        xi_norm = xi_sq.sqrt();
        let reference = *reference_norm.get_or_insert(xi_norm);
        if xi_norm == 0.0 || xi_norm <= settings.gradient_tolerance * reference {
            return Ok(RmoOutcome {
                phi,
                trace,
                iterations: iter,
                stop: StopReason::Tolerance,
                gradient_norm: xi_norm,
            });
        }
        let max_entry = xi.iter().map(|z| z.norm()).fold(0.0, f64::max);

        match settings.step_rule {
            StepRule::Fixed => {
                phi = retract(&phi, &xi, settings.initial_step / max_entry);
                value = landscape.value(phi.as_slice())?;
                trace.push(value);
            }
            StepRule::Backtracking => {
                let mut angle = step_scale;
                let mut accepted = None;
                for _ in 0..MAX_BACKTRACKS {
                    let t = angle / max_entry;
                    let cand = retract(&phi, &xi, t);
                    let v = landscape.value(cand.as_slice())?;
                    // strict increase keeps rounding-level steps from being accepted
                    if v > value && v >= value + ARMIJO_C * t * xi_sq {
                        accepted = Some((cand, v));
                        break;
                    }
                    angle *= ARMIJO_SHRINK;
                }
                let Some((cand, v)) = accepted else {
                    return Ok(RmoOutcome {
                        phi,
                        trace,
                        iterations: iter,
                        stop: StopReason::Stalled,
                        gradient_norm: xi_norm,
                    });
                };
                phi = cand;
                value = v;
                trace.push(value);
                step_scale = (angle * 2.0).min(std::f64::consts::PI);
            }
        }
    }
    Ok(RmoOutcome {
        phi,
        trace,
        iterations: settings.max_iters,
        stop: StopReason::MaxIters,
        gradient_norm: xi_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::complex_gaussian_matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rel_err(a: &CVector, b: &CVector) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    fn finite_difference(land: &Landscape<'_>, phi: &CVector) -> CVector {
        let h = 1e-6;
        CVector::from_fn(phi.len(), |n, _| {
            let probe = |delta: C64| {
                let mut p = phi.clone();
                p[n] += delta;
                land.value(p.as_slice()).unwrap()
            };
            let d_re = (probe(C64::new(h, 0.0)) - probe(C64::new(-h, 0.0))) / (2.0 * h);
            let d_im = (probe(C64::new(0.0, h)) - probe(C64::new(0.0, -h))) / (2.0 * h);
            C64::new(d_re, d_im)
        })
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for objective in [Objective::Gain, Objective::CapacityExact, Objective::CapacitySurrogate] {
            let hrh = complex_gaussian_matrix(8, 4, &mut rng);
            let ht = complex_gaussian_matrix(4, 8, &mut rng);
            let land = Landscape::new(objective, &hrh, &ht, 5.0).unwrap();
            let phi = random_unit_init(4, &mut rng);
            let analytic = land.gradient(phi.as_slice()).unwrap();
            let numeric = finite_difference(&land, &phi);
            assert!(rel_err(&analytic, &numeric) < 1e-5, "{objective:?}");
        }
    }

    #[test]
    fn zero_channel_zero_gradient() {
        let z = CMatrix::zeros(2, 5);
        let zt = CMatrix::zeros(5, 3);
        let phi = CVector::from_element(5, ONE);
        for objective in [Objective::Gain, Objective::CapacityExact, Objective::CapacitySurrogate] {
            let g = euclidean_gradient(objective, &z, &zt, &phi, 1.0).unwrap();
            assert_eq!(g.norm(), 0.0);
        }
    }

    #[test]
    fn scalar_gain_gradient_is_parallel() {
        let hrh = CMatrix::from_element(1, 1, C64::new(0.0, 2.0));
        let ht = CMatrix::from_element(1, 1, C64::new(1.0, 1.0));
        let phi = CVector::from_element(1, C64::from_polar(1.0, 0.3));
        let g = euclidean_gradient(Objective::Gain, &hrh, &ht, &phi, 1.0).unwrap();
        assert!((g[0] * phi[0].conj()).im.abs() < 1e-12);
        assert!(riemannian_gradient(&g, &phi).norm() < 1e-12);
    }

    #[test]
    fn tangency_and_feasibility() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let phi = random_unit_init(20, &mut rng);
        let g = CVector::from_fn(20, |_, _| crate::linalg::complex_gaussian(&mut rng));
        let xi = riemannian_gradient(&g, &phi);
        for (x, p) in xi.iter().zip(phi.iter()) {
            assert!((x * p.conj()).re.abs() < 1e-10);
        }
        let next = retract(&phi, &xi, 0.7);
        assert!(next.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn quantization_rule() {
        let q = |a: f64| quantize_1bit(&CVector::from_element(1, C64::from_polar(1.0, a))).states().unwrap()[0];
        assert_eq!(q(std::f64::consts::FRAC_PI_3), 1);
        assert_eq!(q(3.0 * std::f64::consts::FRAC_PI_4), -1);
        assert_eq!(quantize_1bit(&CVector::from_element(1, C64::new(0.0, 1.0))).states().unwrap()[0], 1);
        assert_eq!(quantize_1bit(&CVector::from_element(1, C64::new(0.0, -1.0))).states().unwrap()[0], 1);
    }

    #[test]
    fn rejects_bad_init() {
        let hrh = CMatrix::from_element(1, 2, ONE);
        let ht = CMatrix::from_element(2, 1, ONE);
        let land = Landscape::new(Objective::Gain, &hrh, &ht, 1.0).unwrap();
        let bad = CVector::from_element(2, C64::new(0.5, 0.0));
        let settings = RmoSettings::new(Objective::Gain);
        assert!(matches!(rmo_optimize(&land, &settings, Some(&bad)), Err(Error::Domain(_))));
    }

    #[test]
    fn backtracking_trace_is_nondecreasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let hrh = complex_gaussian_matrix(3, 40, &mut rng);
        let ht = complex_gaussian_matrix(40, 2, &mut rng);
        for objective in [Objective::Gain, Objective::CapacityExact, Objective::CapacitySurrogate] {
            let land = Landscape::new(objective, &hrh, &ht, 10.0).unwrap();
            let out = rmo_optimize(&land, &RmoSettings::new(objective), None).unwrap();
            assert!(out.trace.windows(2).all(|w| w[1] >= w[0] - 1e-12), "{objective:?}");
            assert!(out.phi.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
        }
    }
}
