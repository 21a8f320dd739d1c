//! Fast self-checks behind the `validate` subcommand.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use risalign::align::sign_align;
use risalign::capacity::{allocate_sca, water_level_solve, ScaSettings, StreamGains};
use risalign::linalg::{complex_gaussian, complex_gaussian_matrix, gram_eigenvalues};
use risalign::rmo::{random_unit_init, Landscape, Objective};
use risalign::spectral::asymptotic_spectrum;
use risalign::{CVector, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

pub fn run_all(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    vec![
        sign_align_oracle(&mut rng),
        gradient_check(&mut rng),
        laguerre_oracle(&mut rng),
        waterfilling(&mut rng),
    ]
}

fn exhaustive_max(b: &CVector) -> f64 {
    (0u32..1 << b.len())
        .map(|mask| {
            b.iter()
                .enumerate()
                .map(|(k, z)| if mask >> k & 1 == 1 { -z } else { *z })
                .sum::<C64>()
                .norm()
        })
        .fold(0.0, f64::max)
}

fn sign_align_oracle(rng: &mut ChaCha8Rng) -> Check {
    let mut worst = f64::INFINITY;
    let mut passed = true;
    for _ in 0..200 {
        let n = rng.random_range(1..=10);
        let b = CVector::from_fn(n, |_, _| complex_gaussian(rng));
        let value = sign_align(&b, None).map(|r| r.value).unwrap_or(f64::NAN);
        let best = exhaustive_max(&b);
        let l1: f64 = b.iter().map(|z| z.norm()).sum();
        passed &= value <= best + 1e-12 && value >= 0.5 * best - 1e-12 && value >= 0.5 * l1 - 1e-12;
        worst = worst.min(value / best);
    }
    Check {
        name: "sign-align vs exhaustive search",
        passed,
        detail: format!("worst ratio {worst:.4}"),
    }
}

/// Largest relative error between analytic and central-difference gradients.
pub fn gradient_error(objective: Objective, rng: &mut ChaCha8Rng) -> f64 {
    let hrh = complex_gaussian_matrix(8, 4, rng);
    let ht = complex_gaussian_matrix(4, 8, rng);
    let land = Landscape::new(objective, &hrh, &ht, 5.0).expect("finite random channels");
    let phi = random_unit_init(4, rng);
    let analytic = land.gradient(phi.as_slice()).expect("shapes agree");
    let h = 1e-6;
    let numeric = CVector::from_fn(4, |n, _| {
        let f = |d: C64| {
            let mut p = phi.clone();
            p[n] += d;
            land.value(p.as_slice()).expect("shapes agree")
        };
        C64::new(
            (f(C64::new(h, 0.0)) - f(C64::new(-h, 0.0))) / (2.0 * h),
            (f(C64::new(0.0, h)) - f(C64::new(0.0, -h))) / (2.0 * h),
        )
    });
    (&analytic - &numeric).norm() / numeric.norm()
}

fn gradient_check(rng: &mut ChaCha8Rng) -> Check {
    let errs: Vec<f64> = [Objective::Gain, Objective::CapacityExact, Objective::CapacitySurrogate]
        .into_iter()
        .map(|o| gradient_error(o, rng))
        .collect();
    Check {
        name: "RMO gradients vs finite differences",
        passed: errs.iter().all(|e| *e < 1e-5),
        detail: format!("relative errors {}", errs.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(", ")),
    }
}

fn laguerre_oracle(rng: &mut ChaCha8Rng) -> Check {
    let (n_s, n_x, trials) = (500, 10, 40);
    let mut mean = vec![0.0; n_x];
    for _ in 0..trials {
        let b = complex_gaussian_matrix(n_s, n_x, rng);
        for (m, l) in mean.iter_mut().zip(gram_eigenvalues(&b)) {
            *m += l / trials as f64;
        }
    }
    let predicted = asymptotic_spectrum(n_s, n_x, 0.0)
        .map(|s| s.predicted_sq_singular_values)
        .unwrap_or_default();
    let worst = predicted
        .iter()
        .zip(&mean)
        .map(|(p, e)| (p - e).abs() / e)
        .fold(0.0, f64::max);
    Check {
        name: "Laguerre roots vs sampled Wishart spectrum",
        passed: predicted.len() == n_x && worst < 0.05,
        detail: format!("worst relative error {worst:.4}"),
    }
}

fn waterfilling(rng: &mut ChaCha8Rng) -> Check {
    let mut worst_residual = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(1..8);
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..100.0)).collect();
        let c: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..3.0)).collect();
        let budget = rng.random_range(0.01..5.0);
        let r = match water_level_solve(&a, &c, budget) {
            Ok(eta) => {
                let spent: f64 = a.iter().zip(&c).map(|(a, c)| c * (1.0 / (eta * c) - 1.0 / a).max(0.0)).sum();
                (spent - budget).abs()
            }
            Err(_) => f64::INFINITY,
        };
        worst_residual = worst_residual.max(r);
    }
    let symmetric = allocate_sca(&StreamGains::from_products(vec![10.0; 4]), 10.0, 4, ScaSettings::default(), None)
        .map(|p| p.fractions.iter().all(|f| (f - 1.0 / 16.0).abs() < 1e-6))
        .unwrap_or(false);
    Check {
        name: "water level and SCA symmetry",
        passed: worst_residual <= 1e-10 && symmetric,
        detail: format!("worst residual {worst_residual:.1e}, symmetric point {symmetric}"),
    }
}
