use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use risalign::channel::{sample_ricean, LosSpec, RiceanChannel};
use risalign::geometry::UpaGeometry;
use risalign::linalg::{complex_gaussian_matrix, gram_eigenvalues, singular_values};
use risalign::spectral::{asymptotic_spectrum, laguerre_top_roots, svd_bundle};
use risalign::C64;

fn draw(n_s: usize, n_x: usize, k: f64, rng: &mut ChaCha8Rng) -> RiceanChannel {
    let los = LosSpec::random(
        UpaGeometry::near_square(n_x).unwrap(),
        UpaGeometry::near_square(n_s).unwrap(),
        rng,
    );
    sample_ricean(n_s, n_x, k, &los, rng).unwrap()
}

/// Mean sorted (descending) eigenvalues of `B^H B` over `trials` Rayleigh draws.
fn empirical_wishart_spectrum(n_s: usize, n_x: usize, trials: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut acc = vec![0.0; n_x];
    for _ in 0..trials {
        let b = complex_gaussian_matrix(n_s, n_x, rng);
        for (a, l) in acc.iter_mut().zip(gram_eigenvalues(&b)) {
            *a += l / trials as f64;
        }
    }
    acc
}

#[test]
fn weyl_sandwich_on_principal_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for trial in 0..40 {
        let k = [0.1, 1.0, 10.0][trial % 3];
        let ch = draw(96, 6, k, &mut rng);
        let los = ch.los_component().unwrap();
        let scatter = &ch.matrix - &los;
        let top = singular_values(&ch.matrix)[0];
        let top_los = singular_values(&los)[0];
        let top_scatter = singular_values(&scatter)[0];
        assert!((top - top_los).abs() <= top_scatter * (1.0 + 1e-12));
        assert!((top_los - (k / (k + 1.0) * 96.0 * 6.0).sqrt()).abs() < 1e-9);
    }
}

#[test]
fn rank_one_interlacing() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for trial in 0..40 {
        let k = [0.5, 2.0, 20.0][trial % 3];
        let ch = draw(64, 8, k, &mut rng);
        let scatter = &ch.matrix - ch.los_component().unwrap();
        let h = singular_values(&ch.matrix);
        let b = singular_values(&scatter);
        for i in 1..h.len() {
            if i + 1 < b.len() {
                assert!(b[i + 1] <= h[i] + 1e-8, "lower, trial {trial} index {i}");
            }
            assert!(h[i] <= b[i - 1] + 1e-8, "upper, trial {trial} index {i}");
        }
    }
}

#[test]
fn principal_vector_hardens_to_steering() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let ch = draw(2000, 20, 10.0, &mut rng);
    let a = ch.los.ris_steering().unwrap();
    let bundle = svd_bundle(&ch.matrix).unwrap();
    let u1 = bundle.left.column(0);
    let overlap: C64 = u1.iter().zip(a.iter()).map(|(u, s)| u.conj() * s).sum();
    let overlap = overlap.norm_sqr() / 2000.0;
    assert!(overlap >= 0.95, "overlap {overlap}");
}

#[test]
fn non_principal_vectors_look_gaussian() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let n_s = 2000;
    let ch = draw(n_s, 20, 10.0, &mut rng);
    let bundle = svd_bundle(&ch.matrix).unwrap();
    for i in 1..20 {
        let u = bundle.left.column(i);
        let mean: C64 = u.iter().sum::<C64>() / n_s as f64;
        let var = u.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / n_s as f64;
        assert!(mean.norm() < 3.0 / (n_s as f64).sqrt(), "mean of u_{i}");
        assert!((var * n_s as f64 - 1.0).abs() < 0.2, "variance of u_{i}");
    }
}

#[test]
fn laguerre_roots_track_empirical_wishart_spectrum() {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let (n_s, n_x) = (500, 10);
    let empirical = empirical_wishart_spectrum(n_s, n_x, 60, &mut rng);
    let rayleigh = asymptotic_spectrum(n_s, n_x, 0.0).unwrap();
    assert!(!rayleigh.spike_regime);
    for (i, (p, e)) in rayleigh.predicted_sq_singular_values.iter().zip(&empirical).enumerate() {
        assert!((p - e).abs() / e < 0.05, "index {i}: predicted {p}, empirical {e}");
    }
}

#[test]
fn tall_roots_stay_in_unit_interval() {
    for (n_big, n_small) in [(100, 4), (500, 20), (2000, 20), (10_000, 100)] {
        let roots = laguerre_top_roots(n_big, n_small).unwrap();
        assert!(roots.iter().all(|x| (-1.0..=1.0).contains(x)), "{n_big}x{n_small}");
        assert!(roots.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn spectrum_prediction_close_at_high_k() {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let (n_s, n_x, k) = (1000, 10, 10.0);
    let pred = asymptotic_spectrum(n_s, n_x, k).unwrap().predicted_sq_singular_values;
    let trials = 30;
    let mut mean = vec![0.0; n_x];
    for _ in 0..trials {
        let ch = draw(n_s, n_x, k, &mut rng);
        for (m, l) in mean.iter_mut().zip(gram_eigenvalues(&ch.matrix)) {
            *m += l / trials as f64;
        }
    }
    for (p, e) in pred.iter().zip(&mean) {
        assert!((p - e).abs() / e < 0.1, "predicted {p}, empirical {e}");
    }
}
