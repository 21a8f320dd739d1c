//! One Monte Carlo trial per task.

use rand::Rng;
use risalign::capacity::{
    capacity_diag_approx, capacity_exact, configure_capacity, design_wsa, effective_channel, offdiag_ratio,
    round_allocation, AllocationPlan, Arrangement, CapacityReport, ScaSettings, WsaSettings,
};
use risalign::channel::{cascaded_channel, sample_ricean, LosSpec};
use risalign::gain::{configure_gain_los, gain_lower_bound, GainReport};
use risalign::geometry::UpaGeometry;
use risalign::linalg::gram_eigenvalues;
use risalign::rmo::{rmo_optimize, Landscape, Objective};
use risalign::spectral::{asymptotic_spectrum, svd_bundle};
use risalign::CMatrix;

use crate::metrics::{aggregate_nmse, nmse};
use crate::spec::{linear_to_db, ExperimentSpec, GridPoint, Method, Task};

/// Metric columns of a task, in CSV order.
pub fn metric_columns(task: Task) -> &'static [&'static str] {
    match task {
        Task::EigenProfile => &["empirical", "predicted", "rel_error"],
        Task::SpectrumNmse => &["aggregate_nmse", "principal_nmse", "bulk_nmse"],
        Task::PrincipalNmse => &["lambda1", "reference", "nmse"],
        Task::CapacityApprox => &["cap_exact", "cap_diag", "nmse", "offdiag_ratio"],
        Task::Gain => &[
            "gain_sa",
            "gain_rmo",
            "gain_rmo_continuous",
            "lower_bound",
            "sa_over_lb_db",
            "rmo_iterations",
        ],
        Task::Capacity => &[
            "cap_wsa",
            "cap_rmo",
            "cap_rmo_continuous",
            "cap_rmo_surrogate",
            "cap_lb",
            "offdiag_ratio",
            "iterations_used",
            "rmo_iterations",
        ],
    }
}

/// Whether rows of the task carry an `index` column.
pub fn has_index(task: Task) -> bool {
    task == Task::EigenProfile
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubRow {
    pub index: Option<usize>,
    pub values: Vec<Option<f64>>,
}

fn single(values: Vec<Option<f64>>) -> Vec<SubRow> {
    vec![SubRow { index: None, values }]
}

type TrialResult = Result<Vec<SubRow>, String>;

fn link<R: Rng + ?Sized>(n_ris: usize, n_arr: usize, k: f64, rng: &mut R) -> Result<(CMatrix, LosSpec), String> {
    let ris = UpaGeometry::near_square(n_ris).map_err(|e| e.to_string())?;
    let arr = UpaGeometry::near_square(n_arr).map_err(|e| e.to_string())?;
    let los = LosSpec::random(arr, ris, rng);
    let ch = sample_ricean(n_ris, n_arr, k, &los, rng).map_err(|e| e.to_string())?;
    Ok((ch.matrix, los))
}

/// `(H_T, LoS_T, H_R^H, LoS_R)`.
fn two_links<R: Rng + ?Sized>(
    spec: &ExperimentSpec,
    point: &GridPoint,
    rng: &mut R,
) -> Result<(CMatrix, LosSpec, CMatrix, LosSpec), String> {
    let (ht, los_t) = link(point.n_ris, spec.n_t, point.k_t(), rng)?;
    let (hr, los_r) = link(point.n_ris, spec.n_r, point.k_r(), rng)?;
    Ok((ht, los_t, hr.adjoint(), los_r))
}

pub fn run_trial<R: Rng + ?Sized>(spec: &ExperimentSpec, point: &GridPoint, rng: &mut R) -> TrialResult {
    match spec.task {
        Task::EigenProfile => eigen_profile(spec, point, rng),
        Task::SpectrumNmse => spectrum_nmse(spec, point, rng),
        Task::PrincipalNmse => principal_nmse(spec, point, rng),
        Task::CapacityApprox => capacity_approx(spec, point, rng),
        Task::Gain => gain(spec, point, rng),
        Task::Capacity => capacity(spec, point, rng),
    }
}

fn spectra<R: Rng + ?Sized>(spec: &ExperimentSpec, point: &GridPoint, rng: &mut R) -> Result<(Vec<f64>, Vec<f64>), String> {
    let (ht, _) = link(point.n_ris, spec.n_t, point.k_t(), rng)?;
    let empirical = gram_eigenvalues(&ht);
    let predicted = asymptotic_spectrum(point.n_ris, spec.n_t, point.k_t())
        .map_err(|e| e.to_string())?
        .predicted_sq_singular_values;
    Ok((empirical, predicted))
}

fn eigen_profile<R: Rng + ?Sized>(spec: &ExperimentSpec, point: &GridPoint, rng: &mut R) -> TrialResult {
    let (empirical, predicted) = spectra(spec, point, rng)?;
    Ok(empirical
        .iter()
        .zip(&predicted)
        .enumerate()
        .map(|(i, (e, p))| SubRow {
            index: Some(i + 1),
            values: vec![Some(*e), Some(*p), Some((p - e).abs() / e)],
        })
        .collect())
}

fn spectrum_nmse<R: Rng + ?Sized>(spec: &ExperimentSpec, point: &GridPoint, rng: &mut R) -> TrialResult {
    let (empirical, predicted) = spectra(spec, point, rng)?;
    let all = aggregate_nmse(&predicted, &empirical).map_err(|e| e.to_string())?;
    let principal = nmse(&predicted[..1], &empirical[..1]).map_err(|e| e.to_string())?;
    let bulk = if empirical.len() > 1 {
        Some(aggregate_nmse(&predicted[1..], &empirical[1..]).map_err(|e| e.to_string())?)
    } else {
        None
    };
    Ok(single(vec![Some(all), Some(principal), bulk]))
}

fn principal_nmse<R: Rng + ?Sized>(spec: &ExperimentSpec, point: &GridPoint, rng: &mut R) -> TrialResult {
    let (ht, _) = link(point.n_ris, spec.n_t, point.k_t(), rng)?;
    let lambda1 = gram_eigenvalues(&ht)[0];
    let k = point.k_t();
    let w = if k.is_infinite() { 1.0 } else { k / (k + 1.0) };
    let reference = w * (point.n_ris * spec.n_t) as f64;
    let err = nmse(&[lambda1], &[reference]).map_err(|e| e.to_string())?;
    Ok(single(vec![Some(lambda1), Some(reference), Some(err)]))
}

/// Random split: `√p_i = u_i / Σu`, `u_i ~ U(0, 1)`, laid out at random.
fn capacity_approx<R: Rng + ?Sized>(spec: &ExperimentSpec, point: &GridPoint, rng: &mut R) -> TrialResult {
    let (ht, _, hrh, _) = two_links(spec, point, rng)?;
    let br = svd_bundle(&hrh).map_err(|e| e.to_string())?;
    let bt = svd_bundle(&ht).map_err(|e| e.to_string())?;
    let n_min = spec.n_t.min(spec.n_r);
    let u: Vec<f64> = (0..n_min).map(|_| rng.random::<f64>()).collect();
    let sum: f64 = u.iter().sum();
    let fractions: Vec<f64> = u.iter().map(|x| (x / sum).powi(2)).collect();
    let plan = AllocationPlan::from_fractions(fractions).map_err(|e| e.to_string())?;
    let plan = round_allocation(&plan, point.n_ris, Arrangement::Random { seed: rng.random() })
        .map_err(|e| e.to_string())?;
    let phi = configure_capacity(&br, &bt, &plan).map_err(|e| e.to_string())?;
    let snr = spec.snr();
    let exact = capacity_exact(&cascaded_channel(&hrh, &phi, &ht).map_err(|e| e.to_string())?, snr, spec.n_t)
        .map_err(|e| e.to_string())?;
    let diag = capacity_diag_approx(&br, &bt, &phi, snr, spec.n_t).map_err(|e| e.to_string())?;
    let off = offdiag_ratio(&effective_channel(&br, &phi, &bt).map_err(|e| e.to_string())?);
    let err = nmse(&[diag], &[exact]).map_err(|e| e.to_string())?;
    Ok(single(vec![Some(exact), Some(diag), Some(err), Some(off)]))
}

fn gain<R: Rng + ?Sized>(spec: &ExperimentSpec, point: &GridPoint, rng: &mut R) -> TrialResult {
    let (ht, los_t, hrh, los_r) = two_links(spec, point, rng)?;
    let (k_t, k_r) = (point.k_t(), point.k_r());
    let lb = gain_lower_bound(point.n_ris, spec.n_t, spec.n_r, k_t, k_r);
    let sa = if spec.has(Method::Sa) {
        let phi = configure_gain_los(&los_t, &los_r).map_err(|e| e.to_string())?;
        Some(GainReport::evaluate(&hrh, &ht, phi, k_t, k_r).map_err(|e| e.to_string())?.gain)
    } else {
        None
    };
    let (rmo, rmo_cont, iters) = if spec.has(Method::Rmo) {
        let land = Landscape::new(Objective::Gain, &hrh, &ht, 1.0).map_err(|e| e.to_string())?;
        let out = rmo_optimize(&land, &spec.rmo.settings(Objective::Gain), None).map_err(|e| e.to_string())?;
        let q = GainReport::evaluate(&hrh, &ht, out.quantized(), k_t, k_r).map_err(|e| e.to_string())?;
        (Some(q.gain), Some(out.objective()), Some(out.iterations as f64))
    } else {
        (None, None, None)
    };
    let lb_col = spec.has(Method::Lb).then_some(lb);
    let ratio = sa.map(|g| linear_to_db(g / lb));
    Ok(single(vec![sa, rmo, rmo_cont, lb_col, ratio, iters]))
}

fn capacity<R: Rng + ?Sized>(spec: &ExperimentSpec, point: &GridPoint, rng: &mut R) -> TrialResult {
    let (ht, _, hrh, _) = two_links(spec, point, rng)?;
    let snr = spec.snr();
    let arrangement_seed: u64 = rng.random();
    let mut values = vec![None; metric_columns(Task::Capacity).len()];

    if spec.has(Method::Wsa) || spec.has(Method::Lb) {
        let settings = WsaSettings {
            snr,
            k_r: point.k_r(),
            k_t: point.k_t(),
            mode: spec.csi.into(),
            arrangement: spec.arrangement.resolve(arrangement_seed),
            sca: ScaSettings::default(),
        };
        let design = design_wsa(&hrh, &ht, &settings).map_err(|e| e.to_string())?;
        let report = CapacityReport::evaluate(&hrh, &ht, &design, snr).map_err(|e| e.to_string())?;
        if spec.has(Method::Wsa) {
            values[0] = Some(report.capacity_exact);
            values[5] = Some(report.offdiag_ratio);
            values[6] = Some(design.plan.iterations_used as f64);
        }
        if spec.has(Method::Lb) {
            values[4] = Some(report.capacity_lb);
        }
    }
    if spec.has(Method::Rmo) {
        let land = Landscape::new(Objective::CapacityExact, &hrh, &ht, snr).map_err(|e| e.to_string())?;
        let out = rmo_optimize(&land, &spec.rmo.settings(Objective::CapacityExact), None).map_err(|e| e.to_string())?;
        let g = cascaded_channel(&hrh, &out.quantized(), &ht).map_err(|e| e.to_string())?;
        values[1] = Some(capacity_exact(&g, snr, spec.n_t).map_err(|e| e.to_string())?);
        values[2] = Some(out.objective());
        values[7] = Some(out.iterations as f64);
    }
    if spec.has(Method::RmoSurrogate) {
        let land = Landscape::new(Objective::CapacitySurrogate, &hrh, &ht, snr).map_err(|e| e.to_string())?;
        let out = rmo_optimize(&land, &spec.rmo.settings(Objective::CapacitySurrogate), None)
            .map_err(|e| e.to_string())?;
        let g = cascaded_channel(&hrh, &out.quantized(), &ht).map_err(|e| e.to_string())?;
        values[3] = Some(capacity_exact(&g, snr, spec.n_t).map_err(|e| e.to_string())?);
    }
    Ok(single(values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::Preset;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn row_widths_match_columns() {
        for preset in [Preset::Fig1a, Preset::Fig1b, Preset::Fig1c, Preset::Fig2a, Preset::Fig2b, Preset::Fig2c] {
            let mut spec = ExperimentSpec::preset(preset, 1.0);
            spec.n_ris = vec![200];
            spec.n_t = 4;
            spec.n_r = 3;
            let point = spec.grid()[0];
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let rows = run_trial(&spec, &point, &mut rng).unwrap();
            for r in &rows {
                assert_eq!(r.values.len(), metric_columns(spec.task).len(), "{preset}");
                assert_eq!(r.index.is_some(), has_index(spec.task));
            }
        }
    }

    #[test]
    fn unselected_methods_are_blank() {
        let mut spec = ExperimentSpec::preset(Preset::Custom, 1.0);
        spec.n_ris = vec![64];
        spec.n_t = 2;
        spec.n_r = 2;
        spec.methods = vec![Method::Sa];
        let point = spec.grid()[0];
        let rows = run_trial(&spec, &point, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert!(rows[0].values[0].is_some());
        assert!(rows[0].values[1].is_none());
        assert!(rows[0].values[3].is_none());
    }
}
