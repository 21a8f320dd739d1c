use crate::HarnessError;

/// `Σ(e − r)² / Σ r²`.
pub fn nmse(estimates: &[f64], references: &[f64]) -> Result<f64, HarnessError> {
    if estimates.len() != references.len() {
        return Err(HarnessError::Metric(format!(
            "length mismatch: {} estimates, {} references",
            estimates.len(),
            references.len()
        )));
    }
    let energy: f64 = references.iter().map(|r| r * r).sum();
    if energy == 0.0 {
        return Err(HarnessError::Metric("reference energy is zero".into()));
    }
    let err: f64 = estimates.iter().zip(references).map(|(e, r)| (e - r) * (e - r)).sum();
    Ok(err / energy)
}

/// Mean of the per-index NMSEs.
pub fn aggregate_nmse(estimates: &[f64], references: &[f64]) -> Result<f64, HarnessError> {
    if estimates.len() != references.len() || estimates.is_empty() {
        return Err(HarnessError::Metric("aggregate NMSE needs equal, nonempty inputs".into()));
    }
    let mut total = 0.0;
    for (e, r) in estimates.iter().zip(references) {
        total += nmse(&[*e], &[*r])?;
    }
    Ok(total / estimates.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation (`n − 1`); zero for a single value.
    pub std: f64,
}

/// Summary of the finite values; `None` if there are none.
pub fn summarize(values: impl IntoIterator<Item = f64>) -> Option<Summary> {
    let v: Vec<f64> = values.into_iter().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let std = if v.len() > 1 {
        (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Some(Summary {
        count: v.len(),
        mean,
        std,
    })
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}
