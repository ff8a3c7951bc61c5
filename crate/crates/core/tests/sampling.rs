use qss_core::statevector::BellPair;
use qss_core::{run_protocol, BellOutcome, SecretBits, SeededRng, StateLabel, Statevector};

const SAMPLES: u64 = 4096;

/// Counts must sit within four binomial standard deviations of n/4.
fn assert_quarter(counts: [u64; 4]) {
    let n = SAMPLES as f64;
    let sigma = (n * 0.25 * 0.75).sqrt();
    for c in counts {
        assert!(
            (c as f64 - n / 4.0).abs() <= 4.0 * sigma,
            "{counts:?} outside 4σ = {:.1}",
            4.0 * sigma
        );
    }
}

#[test]
fn p1_outcomes_are_uniform() {
    for label in StateLabel::ALL {
        let state = Statevector::prepare(label);
        let mut counts = [0; 4];
        for seed in 0..SAMPLES {
            let (o, _) = state.measure_bell(BellPair::P1, &mut SeededRng::new(seed));
            counts[o as usize] += 1;
        }
        assert_quarter(counts);
    }
}

#[test]
fn random_labels_are_uniform() {
    let bits = SecretBits::new(0b11).unwrap();
    let mut counts = [0; 4];
    for seed in 0..SAMPLES {
        let t = run_protocol(None, bits, None, seed);
        counts[StateLabel::ALL.iter().position(|&l| l == t.true_config.state).unwrap()] += 1;
    }
    assert_quarter(counts);
}

#[test]
fn eigenstate_always_gives_its_outcome() {
    // a+ on (1,6) with qubits 2..5 in |0000>
    let mut amps = [num_complex::Complex64::new(0.0, 0.0); 64];
    amps[0b000000] = 1.0.into();
    amps[0b100001] = 1.0.into();
    let state = Statevector::from_unnormalized(amps).unwrap();
    for seed in 0..256 {
        let (o, post) = state.measure_bell(BellPair::P1, &mut SeededRng::new(seed));
        assert_eq!(o, BellOutcome::AlphaPlus);
        assert!(post.global_phase_equal(&state, qss_core::statevector::TOLERANCE));
    }
}
