use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use risalign::capacity::{capacity_diag_approx, capacity_exact, effective_channel, offdiag_ratio};
use risalign::channel::{cascaded_channel, sample_ricean, LosSpec, RisConfig};
use risalign::geometry::UpaGeometry;
use risalign::linalg::{bilinear_dot, complex_gaussian_matrix, conj_hadamard, singular_values};
use risalign::spectral::svd_bundle;
use risalign::{CMatrix, C64};

fn random_binary(n: usize, rng: &mut ChaCha8Rng) -> RisConfig {
    RisConfig::binary((0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect()).unwrap()
}

#[test]
fn effective_channel_entries_match_stream_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    for _ in 0..10 {
        let hrh = complex_gaussian_matrix(3, 40, &mut rng);
        let ht = complex_gaussian_matrix(40, 4, &mut rng);
        let br = svd_bundle(&hrh).unwrap();
        let bt = svd_bundle(&ht).unwrap();
        let phi = random_binary(40, &mut rng);
        let phases = phi.phases();
        let h_eff = effective_channel(&br, &phi, &bt).unwrap();
        for i in 0..3 {
            for j in 0..4 {
                let c = conj_hadamard(br.right.column(i).as_slice(), bt.left.column(j).as_slice());
                let expected = bilinear_dot(c.as_slice(), phases.as_slice())
                    * (br.singular_values[i] * bt.singular_values[j]);
                let got = h_eff[(i, j)];
                assert!((got - expected).norm() <= 1e-9 * expected.norm().max(1.0));
            }
        }
    }
}

#[test]
fn effective_channel_shares_singular_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let hrh = complex_gaussian_matrix(4, 30, &mut rng);
    let ht = complex_gaussian_matrix(30, 3, &mut rng);
    let phi = random_binary(30, &mut rng);
    let a = singular_values(&cascaded_channel(&hrh, &phi, &ht).unwrap());
    let b = singular_values(&effective_channel(&svd_bundle(&hrh).unwrap(), &phi, &svd_bundle(&ht).unwrap()).unwrap());
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-9 * a[0]);
    }
}

#[test]
fn mirsky_inequality_per_instance() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let ris = UpaGeometry::near_square(160).unwrap();
    let arr = UpaGeometry::near_square(4).unwrap();
    for _ in 0..30 {
        let lt = LosSpec::random(arr, ris, &mut rng);
        let lr = LosSpec::random(arr, ris, &mut rng);
        let ht = sample_ricean(160, 4, 1.0, &lt, &mut rng).unwrap().matrix;
        let hrh = sample_ricean(160, 4, 1.0, &lr, &mut rng).unwrap().rx_matrix();
        let phi = random_binary(160, &mut rng);
        let h = effective_channel(&svd_bundle(&hrh).unwrap(), &phi, &svd_bundle(&ht).unwrap()).unwrap();
        let diag = CMatrix::from_fn(4, 4, |i, j| if i == j { h[(i, j)] } else { C64::new(0.0, 0.0) });
        let sh = singular_values(&h);
        let sd = singular_values(&diag);
        let lhs: f64 = sh.iter().zip(&sd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let rhs = (&h - &diag).norm();
        assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-12);
        assert!((0.0..=1.0).contains(&offdiag_ratio(&h)));
    }
}

#[test]
fn diagonal_matrix_has_no_offdiag_energy() {
    let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(2.0, 1.0), C64::new(0.0, -3.0)]));
    assert_eq!(offdiag_ratio(&d), 0.0);
}

#[test]
fn surrogate_equals_exact_for_diagonal_effective_channel() {
    // orthogonal supports make the effective channel exactly diagonal
    let n_s = 8;
    let mut ht = CMatrix::zeros(n_s, 2);
    let mut hrh = CMatrix::zeros(2, n_s);
    for n in 0..4 {
        ht[(n, 0)] = C64::new(2.0, 0.0);
        hrh[(0, n)] = C64::new(1.5, 0.0);
        ht[(n + 4, 1)] = C64::new(0.0, 1.0);
        hrh[(1, n + 4)] = C64::new(1.0, 0.0);
    }
    let phi = RisConfig::all_ones(n_s);
    let br = svd_bundle(&hrh).unwrap();
    let bt = svd_bundle(&ht).unwrap();
    let exact = capacity_exact(&cascaded_channel(&hrh, &phi, &ht).unwrap(), 10.0, 2).unwrap();
    let approx = capacity_diag_approx(&br, &bt, &phi, 10.0, 2).unwrap();
    assert!((exact - approx).abs() < 1e-9);
    let h_eff = effective_channel(&br, &phi, &bt).unwrap();
    assert!(offdiag_ratio(&h_eff) < 1e-20);
}
