use gbsim::sampler::sample_patterns;
use gbsim::{enumerate_patterns, prob_general, GaussianModeState, Interferometer, OutputQForm};

#[test]
fn squeezed_thermal_frequencies_match_general_engine() {
    let states = [
        GaussianModeState::squeezed_thermal(3.0, 0.2).unwrap(),
        GaussianModeState::thermal(2.0).unwrap(),
        GaussianModeState::squeezed_thermal(1.8, 0.1).unwrap(),
    ];
    let net = Interferometer::haar_random(3, 41).unwrap();
    let q = OutputQForm::build(&states, &net).unwrap();
    let shots = 400_000;
    let rep = sample_patterns(&states, &net, shots, 2024).unwrap();
    for p in enumerate_patterns(3, 3).unwrap() {
        let exact = prob_general(&q, &p).unwrap();
        let est = rep.estimate(&p);
        let se = (exact * (1.0 - exact) / shots as f64).sqrt();
        assert!(
            (est.estimate - exact).abs() <= 5.0 * se,
            "{p}: sampled {} vs exact {exact} (se {se})",
            est.estimate
        );
    }
}

#[test]
fn single_thermal_mode_is_geometric() {
    // mean photon number (V-1)/2 = 1; p(n) = 2^-(n+1)
    let states = [GaussianModeState::thermal(3.0).unwrap()];
    let shots = 200_000;
    let rep = sample_patterns(&states, &Interferometer::identity(1), shots, 5).unwrap();
    for n in 0..6u32 {
        let exact = 0.5f64.powi(n as i32 + 1);
        let freq = rep.count(&[n]) as f64 / shots as f64;
        let se = (exact * (1.0 - exact) / shots as f64).sqrt();
        assert!((freq - exact).abs() <= 5.0 * se, "n={n}: {freq} vs {exact}");
    }
    assert!((rep.mean_total_photons() - 1.0).abs() < 0.02);
}
