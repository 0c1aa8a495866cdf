//! Exact engines against the truncated Fock-space simulator.

use gbsim::fock_oracle::{prepare_input, Cutoff};
use gbsim::{enumerate_patterns, Engine, GaussianModeState, Interferometer, OutputQForm};

const TOL: f64 = 1e-6;

fn check(states: &[GaussianModeState], net: &Interferometer) {
    let m = states.len();
    let q = OutputQForm::build(states, net).unwrap();
    let out = prepare_input(states, Cutoff::Auto).unwrap().apply_network(net).unwrap();
    assert!((out.trace() - 1.0).abs() < TOL);
    for p in enumerate_patterns(m, m).unwrap() {
        let oracle = out.pattern_probability(&p).unwrap();
        for e in Engine::applicable(&q) {
            let v = e.probability(&q, &p).unwrap();
            assert!((v - oracle).abs() <= TOL, "{e} {p}: {v} vs oracle {oracle}");
        }
    }
}

#[test]
fn mixed_thermal_and_squeezed_inputs() {
    for seed in 0..4 {
        let states = [GaussianModeState::squeezed(0.45).unwrap(), GaussianModeState::thermal(2.2).unwrap()];
        check(&states, &Interferometer::haar_random(2, seed).unwrap());
    }
    for seed in 10..13 {
        let states = [
            GaussianModeState::thermal(1.5).unwrap(),
            GaussianModeState::squeezed(0.35).unwrap(),
            GaussianModeState::squeezed(0.2).unwrap(),
        ];
        check(&states, &Interferometer::haar_random(3, seed).unwrap());
    }
}

#[test]
fn thermal_inputs() {
    let states = [
        GaussianModeState::thermal(1.3).unwrap(),
        GaussianModeState::thermal(2.0).unwrap(),
        GaussianModeState::vacuum(),
    ];
    check(&states, &Interferometer::haar_random(3, 77).unwrap());
}

#[test]
fn squeezed_inputs_with_unequal_squeezing() {
    let states = [GaussianModeState::squeezed(0.6).unwrap(), GaussianModeState::squeezed(0.15).unwrap()];
    for seed in 20..24 {
        check(&states, &Interferometer::haar_random(2, seed).unwrap());
    }
}
