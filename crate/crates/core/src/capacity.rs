//! Capacity evaluation and waterfilling-inspired sign alignment (W-SA).
//!
//! With identity precoding the capacity is
//! `C(φ) = log2 det(I + SNR/N_T · H̃ H̃^H)`. When the RIS is much larger than
//! the arrays, per-stream sign alignment makes the effective channel
//! `H_eff = D_R V_R^H Φ U_T D_T` nearly diagonal, and the capacity is well
//! approximated by the diagonal surrogate
//!
//! ```text
//! Ĉ(φ) = Σ_i log2(1 + SNR/N_T · d²_{R,i} d²_{T,i} |(v*_{R,i} ⊙ u_{T,i})ᵀ φ|²).
//! ```
//!
//! Giving stream `i` a share `√p_i` of the elements guarantees
//! `|(v*_{R,i} ⊙ u_{T,i})ᵀ φ|² ≥ p_i / 4` asymptotically, which yields a
//! deterministic lower bound whose maximization over `p` (subject to
//! `Σ √p_i = 1`) is solved by successive convex approximation: the
//! constraint is linearized around the current iterate and the resulting
//! generalized waterfilling problem is solved in closed form.

use std::f64::consts::LN_2;

use rand::seq::SliceRandom;
use rand::SeedableRng;

use crate::align::sign_align;
use crate::channel::{cascade_with_phases, cascaded_channel, RisConfig};
use crate::error::{Error, Result};
use crate::linalg::{bilinear_dot, conj_hadamard, ensure_finite, frobenius_sq, gram_eigenvalues, CMatrix};
use crate::spectral::{asymptotic_spectrum, svd_bundle, AsymptoticSpectrum, SvdBundle};

pub const DEFAULT_SCA_EPSILON: f64 = 1e-6;
pub const DEFAULT_SCA_MAX_ITERS: usize = 200;

/// `log2 det(I + snr/n_t · H̃ H̃^H)`, evaluated as `Σ log2(1 + snr/n_t · σ_k²)`.
pub fn capacity_exact(h_tilde: &CMatrix, snr: f64, n_t: usize) -> Result<f64> {
    ensure_finite(h_tilde, "channel")?;
    check_snr(snr)?;
    let s = snr / n_t as f64;
    // eigenvalues of the smaller Gram matrix
    let sq = if h_tilde.nrows() >= h_tilde.ncols() {
        gram_eigenvalues(h_tilde)
    } else {
        gram_eigenvalues(&h_tilde.adjoint())
    };
    Ok(sq.iter().map(|&l| (1.0 + s * l).log2()).sum())
}

fn check_snr(snr: f64) -> Result<()> {
    if snr.is_finite() && snr > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("SNR must be positive and finite, got {snr}")))
    }
}

/// `D_R V_R^H Φ U_T D_T`, an `N_R × N_T` matrix with the nonzero singular
/// values of `H̃`.
pub fn effective_channel(bundle_r: &SvdBundle, phi: &RisConfig, bundle_t: &SvdBundle) -> Result<CMatrix> {
    let phases = phi.phases();
    let vrh = bundle_r.right.adjoint();
    let mut h = cascade_with_phases(&vrh, phases.as_slice(), &bundle_t.left)?;
    for (i, &dr) in bundle_r.singular_values.iter().enumerate() {
        h.row_mut(i).scale_mut(dr);
    }
    for (j, &dt) in bundle_t.singular_values.iter().enumerate() {
        h.column_mut(j).scale_mut(dt);
    }
    Ok(h)
}

/// Per-stream alignment targets `v*_{R,i} ⊙ u_{T,i}`.
fn stream_target(bundle_r: &SvdBundle, bundle_t: &SvdBundle, i: usize) -> crate::linalg::CVector {
    conj_hadamard(bundle_r.right.column(i).as_slice(), bundle_t.left.column(i).as_slice())
}

fn n_streams(bundle_r: &SvdBundle, bundle_t: &SvdBundle) -> usize {
    bundle_r.rank_capacity().min(bundle_t.rank_capacity())
}

/// Diagonal surrogate `Ĉ(φ)`.
pub fn capacity_diag_approx(
    bundle_r: &SvdBundle,
    bundle_t: &SvdBundle,
    phi: &RisConfig,
    snr: f64,
    n_t: usize,
) -> Result<f64> {
    check_snr(snr)?;
    let n_s = phi.len();
    if bundle_r.right.nrows() != n_s || bundle_t.left.nrows() != n_s {
        return Err(Error::shape(
            format!("RIS dimension {n_s}"),
            format!("{} / {}", bundle_r.right.nrows(), bundle_t.left.nrows()),
        ));
    }
    let s = snr / n_t as f64;
    let phases = phi.phases();
    Ok((0..n_streams(bundle_r, bundle_t))
        .map(|i| {
            let c = stream_target(bundle_r, bundle_t, i);
            let z = bilinear_dot(c.as_slice(), phases.as_slice());
            let d = bundle_r.singular_values[i] * bundle_t.singular_values[i];
            (1.0 + s * d * d * z.norm_sqr()).log2()
        })
        .sum())
}

/// Off-diagonal energy share `(‖H‖_F² − Σ_i |H_ii|²) / ‖H‖_F²`.
pub fn offdiag_ratio(h_eff: &CMatrix) -> f64 {
    let total = frobenius_sq(h_eff);
    if total == 0.0 {
        return 0.0;
    }
    let diag: f64 = (0..h_eff.nrows().min(h_eff.ncols()))
        .map(|i| h_eff[(i, i)].norm_sqr())
        .sum();
    ((total - diag) / total).clamp(0.0, 1.0)
}

/// Per-stream products `d²_{R,i} d²_{T,i}`, `i < N_min`.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamGains(Vec<f64>);

impl StreamGains {
    /// From (non-squared) singular values of `H_R^H` and `H_T`.
    pub fn from_singular_values(d_r: &[f64], d_t: &[f64]) -> Self {
        StreamGains(
            d_r.iter()
                .zip(d_t)
                .map(|(r, t)| r * r * t * t)
                .collect(),
        )
    }

    /// Statistical-CSI gains from predicted spectra.
    pub fn from_asymptotic(r: &AsymptoticSpectrum, t: &AsymptoticSpectrum) -> Self {
        StreamGains(
            r.predicted_sq_singular_values
                .iter()
                .zip(&t.predicted_sq_singular_values)
                .map(|(a, b)| a * b)
                .collect(),
        )
    }

    pub fn from_products(products: Vec<f64>) -> Self {
        StreamGains(products)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `0.25 · snr/n_t · d²_R d²_T`, the lower-bound weights per unit `p_i`.
    fn bound_weights(&self, snr: f64, n_t: usize) -> Vec<f64> {
        let s = 0.25 * snr / n_t as f64;
        self.0.iter().map(|g| s * g).collect()
    }
}

/// `Σ log2(1 + 0.25 · snr/n_t · d²_{R,i} d²_{T,i} · p_i)`.
pub fn capacity_lower_bound(fractions: &[f64], gains: &StreamGains, snr: f64, n_t: usize) -> Result<f64> {
    check_snr(snr)?;
    if fractions.len() != gains.len() {
        return Err(Error::shape(
            format!("{} fractions", gains.len()),
            fractions.len().to_string(),
        ));
    }
    Ok(bound_objective(fractions, &gains.bound_weights(snr, n_t)))
}

fn bound_objective(p: &[f64], w: &[f64]) -> f64 {
    p.iter().zip(w).map(|(p, w)| (1.0 + w * p).log2()).sum()
}

/// Water level `η` with `Σ c_i·[1/(η c_i) − 1/a_i]⁺ = γ`.
///
/// With `t = 1/η` the left side is `Σ [t − c_i/a_i]⁺`, piecewise linear in
/// `t`; the active segment is found by sorting the cutoffs `c_i/a_i`.
pub fn water_level_solve(gains: &[f64], weights: &[f64], budget: f64) -> Result<f64> {
    if !(budget.is_finite() && budget > 0.0) {
        return Err(Error::domain(format!("budget must be positive, got {budget}")));
    }
    if gains.is_empty() || gains.len() != weights.len() {
        return Err(Error::shape(
            format!("{} weights", gains.len()),
            weights.len().to_string(),
        ));
    }
    if gains.iter().chain(weights).any(|v| !(*v > 0.0) || v.is_nan()) {
        return Err(Error::domain("gains and weights must be positive"));
    }
    let mut cutoffs: Vec<f64> = gains.iter().zip(weights).map(|(a, c)| c / a).collect();
    cutoffs.sort_by(f64::total_cmp);
    let mut acc = 0.0;
    for k in 0..cutoffs.len() {
        acc += cutoffs[k];
        let level = (budget + acc) / (k + 1) as f64;
        if k + 1 == cutoffs.len() || level <= cutoffs[k + 1] {
            return Ok(1.0 / level);
        }
    }
    unreachable!("the last segment always terminates the search")
}

/// How elements are laid out on the surface once counts are fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arrangement {
    /// Stream `i` takes a consecutive block of indices.
    Contiguous,
    /// Streams are spread across the surface in proportion to their counts.
    Interleaved,
    /// Contiguous blocks of a seeded random permutation.
    Random { seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElementAssignment {
    /// Element count per stream; sums to `N_S`.
    pub counts: Vec<usize>,
    /// Disjoint sorted index sets, `index_sets[i].len() == counts[i]`.
    pub index_sets: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationPlan {
    /// `p_i ≥ 0` with `Σ √p_i = 1`.
    pub fractions: Vec<f64>,
    pub water_level: f64,
    pub iterations_used: usize,
    /// Bound objective after every SCA step, starting with the initial point.
    pub objective_trace: Vec<f64>,
    /// Filled in by [`round_allocation`].
    pub elements: Option<ElementAssignment>,
}

impl AllocationPlan {
    pub fn objective(&self) -> f64 {
        *self.objective_trace.last().unwrap_or(&f64::NAN)
    }

    /// Number of streams with a nonzero share.
    pub fn active_streams(&self) -> usize {
        self.fractions.iter().filter(|&&p| p > 0.0).count()
    }

    pub fn constraint_residual(&self) -> f64 {
        (self.fractions.iter().map(|p| p.sqrt()).sum::<f64>() - 1.0).abs()
    }

    /// Plan with given fractions and no SCA history (e.g. random splits).
    pub fn from_fractions(fractions: Vec<f64>) -> Result<Self> {
        let fractions = normalize_fractions(&fractions)?;
        Ok(Self {
            fractions,
            water_level: f64::NAN,
            iterations_used: 0,
            objective_trace: Vec::new(),
            elements: None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaSettings {
    /// Stop once the objective changes by less than this many bits.
    pub epsilon: f64,
    pub max_iters: usize,
}

impl Default for ScaSettings {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_SCA_EPSILON,
            max_iters: DEFAULT_SCA_MAX_ITERS,
        }
    }
}

fn normalize_fractions(p: &[f64]) -> Result<Vec<f64>> {
    if p.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::domain("fractions must be finite and non-negative"));
    }
    let root_sum: f64 = p.iter().map(|v| v.sqrt()).sum();
    if root_sum <= 0.0 {
        return Err(Error::domain("fractions are all zero"));
    }
    Ok(p.iter().map(|v| v / (root_sum * root_sum)).collect())
}

/// One SCA run on the capacity bound from `init` (default `p_i = 1/N_min²`).
///
/// Streams whose share reaches zero are frozen at zero. A run that does
/// not meet `epsilon` within `max_iters` is reported as
/// [`Error::NotConverged`] carrying the last iterate.
pub fn allocate_sca(
    gains: &StreamGains,
    snr: f64,
    n_t: usize,
    settings: ScaSettings,
    init: Option<&[f64]>,
) -> Result<AllocationPlan> {
    check_snr(snr)?;
    let n = gains.len();
    if n == 0 {
        return Err(Error::domain("no streams to allocate"));
    }
    if gains.as_slice().iter().any(|g| !(g.is_finite() && *g > 0.0)) {
        return Err(Error::domain("stream gains must be positive and finite"));
    }
    if !(settings.epsilon > 0.0) {
        return Err(Error::domain("epsilon must be positive"));
    }
    let w = gains.bound_weights(snr, n_t);
    let mut p = match init {
        Some(init) => {
            if init.len() != n {
                return Err(Error::shape(format!("{n} fractions"), init.len().to_string()));
            }
            normalize_fractions(init)?
        }
        None => vec![1.0 / (n * n) as f64; n],
    };
    let mut trace = vec![bound_objective(&p, &w)];
    let mut water_level = f64::NAN;

    for iter in 1..=settings.max_iters {
        let active: Vec<usize> = (0..n).filter(|&i| p[i] > 0.0).collect();
        let c: Vec<f64> = active.iter().map(|&i| 0.5 / p[i].sqrt()).collect();
        let gamma = 1.0 - active.iter().map(|&i| p[i].sqrt() - p[i] * 0.5 / p[i].sqrt()).sum::<f64>();
        let a: Vec<f64> = active.iter().map(|&i| w[i]).collect();
        let eta = water_level_solve(&a, &c, gamma)?;
        water_level = eta;

        let mut next = vec![0.0; n];
        for (k, &i) in active.iter().enumerate() {
            next[i] = (1.0 / (eta * c[k]) - 1.0 / a[k]).max(0.0);
        }
        p = normalize_fractions(&next)?;

        let obj = bound_objective(&p, &w);
        let prev = *trace.last().expect("trace starts non-empty");
        trace.push(obj);
        if (obj - prev).abs() < settings.epsilon {
            return Ok(AllocationPlan {
                fractions: p,
                water_level,
                iterations_used: iter,
                objective_trace: trace,
                elements: None,
            });
        }
    }
    Err(Error::NotConverged {
        iterations: settings.max_iters,
        last: Box::new(AllocationPlan {
            fractions: p,
            water_level,
            iterations_used: settings.max_iters,
            objective_trace: trace,
            elements: None,
        }),
    })
}

/// SCA restarted from a uniform split over the top `k` streams, for every
/// `k = 1..=N_min`; returns the best converged plan.
pub fn allocate_elements(gains: &StreamGains, snr: f64, n_t: usize, settings: ScaSettings) -> Result<AllocationPlan> {
    let n = gains.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| gains.as_slice()[b].total_cmp(&gains.as_slice()[a]).then(a.cmp(&b)));
    let mut best: Option<AllocationPlan> = None;
    let mut first_err = None;
    for k in (1..=n).rev() {
        let mut init = vec![0.0; n];
        for &i in &order[..k] {
            init[i] = 1.0;
        }
        match allocate_sca(gains, snr, n_t, settings, Some(&init)) {
            Ok(plan) => {
                if best.as_ref().is_none_or(|b| plan.objective() > b.objective()) {
                    best = Some(plan);
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    best.ok_or_else(|| first_err.expect("at least one start ran"))
}

/// Largest-remainder rounding of `√p_i · N_S` and index-set layout.
pub fn round_allocation(plan: &AllocationPlan, n_ris: usize, arrangement: Arrangement) -> Result<AllocationPlan> {
    let roots: Vec<f64> = plan.fractions.iter().map(|p| p.sqrt()).collect();
    if roots.iter().any(|r| !r.is_finite()) {
        return Err(Error::domain("fractions must be finite"));
    }
    let quotas: Vec<f64> = roots.iter().map(|r| r * n_ris as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    if assigned > n_ris {
        return Err(Error::domain("fractions exceed the surface size"));
    }
    let mut by_remainder: Vec<usize> = (0..counts.len()).filter(|&i| plan.fractions[i] > 0.0).collect();
    by_remainder.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    if by_remainder.is_empty() {
        return Err(Error::domain("no stream has a positive share"));
    }
    for k in 0..(n_ris - assigned) {
        counts[by_remainder[k % by_remainder.len()]] += 1;
    }

    let index_sets = layout(&counts, n_ris, arrangement);
    let mut out = plan.clone();
    out.elements = Some(ElementAssignment { counts, index_sets });
    Ok(out)
}

fn layout(counts: &[usize], n_ris: usize, arrangement: Arrangement) -> Vec<Vec<usize>> {
    let blocks = |order: &[usize]| {
        let mut sets = Vec::with_capacity(counts.len());
        let mut start = 0;
        for &c in counts {
            let mut s = order[start..start + c].to_vec();
            s.sort_unstable();
            sets.push(s);
            start += c;
        }
        sets
    };
    match arrangement {
        Arrangement::Contiguous => blocks(&(0..n_ris).collect::<Vec<_>>()),
        Arrangement::Random { seed } => {
            let mut order: Vec<usize> = (0..n_ris).collect();
            let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
            order.shuffle(&mut rng);
            blocks(&order)
        }
        Arrangement::Interleaved => {
            // smooth weighted round-robin: element n goes to the stream
            // furthest behind its proportional share
            let mut sets = vec![Vec::new(); counts.len()];
            let mut taken = vec![0usize; counts.len()];
            for n in 0..n_ris {
                let pos = (n + 1) as f64 / n_ris as f64;
                let pick = (0..counts.len())
                    .filter(|&i| taken[i] < counts[i])
                    .max_by(|&a, &b| {
                        let da = counts[a] as f64 * pos - taken[a] as f64;
                        let db = counts[b] as f64 * pos - taken[b] as f64;
                        da.total_cmp(&db).then(b.cmp(&a))
                    })
                    .expect("counts sum to the surface size");
                sets[pick].push(n);
                taken[pick] += 1;
            }
            sets
        }
    }
}

/// Per-stream sign alignment on the plan's index sets. Elements outside
/// every set stay at `+1`.
pub fn configure_capacity(bundle_r: &SvdBundle, bundle_t: &SvdBundle, plan: &AllocationPlan) -> Result<RisConfig> {
    let elements = plan
        .elements
        .as_ref()
        .ok_or_else(|| Error::domain("allocation plan has no element assignment"))?;
    let n_s = bundle_t.left.nrows();
    if bundle_r.right.nrows() != n_s {
        return Err(Error::shape(format!("RIS dimension {n_s}"), bundle_r.right.nrows().to_string()));
    }
    if elements.index_sets.len() > n_streams(bundle_r, bundle_t) {
        return Err(Error::shape(
            format!("at most {} streams", n_streams(bundle_r, bundle_t)),
            elements.index_sets.len().to_string(),
        ));
    }
    let mut states = vec![1i8; n_s];
    for (i, set) in elements.index_sets.iter().enumerate() {
        if set.is_empty() {
            continue;
        }
        let target = stream_target(bundle_r, bundle_t, i);
        sign_align(&target, Some(set))?.scatter_into(&mut states);
    }
    Ok(RisConfig::Binary(states))
}

/// Source of the singular values used for element allocation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CsiMode {
    /// Predicted spectra from K-factors and array sizes only.
    Statistical,
    /// Empirical singular values of the sampled channels.
    Instantaneous,
}

#[derive(Debug, Clone)]
pub struct WsaDesign {
    pub phi: RisConfig,
    pub plan: AllocationPlan,
    pub gains: StreamGains,
    pub bundle_r: SvdBundle,
    pub bundle_t: SvdBundle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WsaSettings {
    pub snr: f64,
    pub k_r: f64,
    pub k_t: f64,
    pub mode: CsiMode,
    pub arrangement: Arrangement,
    pub sca: ScaSettings,
}

/// Full W-SA pipeline: SVDs, allocation, rounding and per-stream SA.
pub fn design_wsa(h_r_hermitian: &CMatrix, h_t: &CMatrix, settings: &WsaSettings) -> Result<WsaDesign> {
    let bundle_r = svd_bundle(h_r_hermitian)?;
    let bundle_t = svd_bundle(h_t)?;
    let n_s = h_t.nrows();
    let n_min = n_streams(&bundle_r, &bundle_t);
    let gains = match settings.mode {
        CsiMode::Statistical => {
            let r = asymptotic_spectrum(n_s, h_r_hermitian.nrows(), settings.k_r)?;
            let t = asymptotic_spectrum(n_s, h_t.ncols(), settings.k_t)?;
            let g = StreamGains::from_asymptotic(&r, &t);
            StreamGains::from_products(g.as_slice()[..n_min].to_vec())
        }
        CsiMode::Instantaneous => {
            StreamGains::from_singular_values(&bundle_r.singular_values, &bundle_t.singular_values)
        }
    };
    let plan = allocate_elements(&gains, settings.snr, h_t.ncols(), settings.sca)?;
    let plan = round_allocation(&plan, n_s, settings.arrangement)?;
    let phi = configure_capacity(&bundle_r, &bundle_t, &plan)?;
    Ok(WsaDesign {
        phi,
        plan,
        gains,
        bundle_r,
        bundle_t,
    })
}

#[derive(Debug, Clone)]
pub struct CapacityReport {
    pub phi: RisConfig,
    pub capacity_exact: f64,
    pub capacity_diag: f64,
    pub capacity_lb: f64,
    pub offdiag_ratio: f64,
}

impl CapacityReport {
    pub fn evaluate(h_r_hermitian: &CMatrix, h_t: &CMatrix, design: &WsaDesign, snr: f64) -> Result<Self> {
        let n_t = h_t.ncols();
        let h_tilde = cascaded_channel(h_r_hermitian, &design.phi, h_t)?;
        let h_eff = effective_channel(&design.bundle_r, &design.phi, &design.bundle_t)?;
        Ok(Self {
            phi: design.phi.clone(),
            capacity_exact: capacity_exact(&h_tilde, snr, n_t)?,
            capacity_diag: capacity_diag_approx(&design.bundle_r, &design.bundle_t, &design.phi, snr, n_t)?,
            capacity_lb: capacity_lower_bound(&design.plan.fractions, &design.gains, snr, n_t)?,
            offdiag_ratio: offdiag_ratio(&h_eff),
        })
    }
}

/// `log2 det` form of the exact capacity; a second route for testing.
pub fn capacity_exact_logdet(h_tilde: &CMatrix, snr: f64, n_t: usize) -> Result<f64> {
    check_snr(snr)?;
    let s = snr / n_t as f64;
    let n_r = h_tilde.nrows();
    let a = CMatrix::identity(n_r, n_r) + (h_tilde * h_tilde.adjoint()) * crate::linalg::C64::from(s);
    crate::linalg::log2_det_hpd(a)
}

/// Natural-log scale factor used by the gradient code.
pub(crate) const INV_LN2: f64 = 1.0 / LN_2;
