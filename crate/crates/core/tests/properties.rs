use proptest::prelude::*;
use proptest::sample::subsequence;

use qss_core::harness::scenario;
use qss_core::render::{to_json, RunReport};
use qss_core::statevector::{BellPair, TOLERANCE};
use qss_core::symbolic::{
    bell_decompose, expand_product, to_statevector, BellEntry, BellProductExpr, QubitSet, Sign, SymbolicState, Term,
};
use qss_core::{
    decode_secret, encode_secret, replay, run_protocol, BellOutcome, PauliGate, Position, Qubit, SecretBits,
    StateLabel, Statevector, Transcript,
};

fn any_state() -> impl Strategy<Value = Statevector> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 64).prop_filter_map("nonzero", |v| {
        Statevector::from_unnormalized(std::array::from_fn(|i| num_complex::Complex64::new(v[i].0, v[i].1)))
    })
}

fn any_gate() -> impl Strategy<Value = PauliGate> {
    prop::sample::select(PauliGate::ALL.to_vec())
}

fn any_qubit() -> impl Strategy<Value = Qubit> {
    (1u8..=6).prop_map(Qubit::of)
}

fn any_pair() -> impl Strategy<Value = BellPair> {
    (1u8..=6, 1u8..=6)
        .prop_filter("distinct", |(a, b)| a != b)
        .prop_map(|(a, b)| BellPair::of(a, b))
}

fn any_label() -> impl Strategy<Value = StateLabel> {
    prop::sample::select(StateLabel::ALL.to_vec())
}

fn any_position() -> impl Strategy<Value = Position> {
    prop::sample::select(Position::ALL.to_vec())
}

fn any_secret() -> impl Strategy<Value = SecretBits> {
    (0u8..4).prop_map(|v| SecretBits::new(v).unwrap())
}

/// A nonempty uniform symbolic state over `qubits`.
fn state_over(qubits: QubitSet) -> impl Strategy<Value = SymbolicState> {
    let patterns: Vec<u8> = (0u8..64).filter(|b| b & !qubits.mask() == 0).collect();
    let n = patterns.len();
    (
        subsequence(patterns, 1..=n),
        prop::collection::vec(any::<bool>(), n),
        0i32..4,
    )
        .prop_map(move |(bits, signs, k)| {
            let terms = bits
                .into_iter()
                .zip(signs)
                .map(|(b, neg)| Term::new(qubits, b, Sign::from_negated(neg)).unwrap());
            SymbolicState::from_terms(qubits, terms, k).unwrap()
        })
}

/// Three disjoint, nonempty qubit sets.
fn partition() -> impl Strategy<Value = [QubitSet; 3]> {
    Just((1u8..=6).collect::<Vec<_>>())
        .prop_shuffle()
        .prop_flat_map(|order| (Just(order), 1usize..=4))
        .prop_flat_map(|(order, a)| (Just(order), Just(a), 1usize..=(5 - a)))
        .prop_map(|(order, a, b)| {
            [
                QubitSet::of(&order[..a]),
                QubitSet::of(&order[a..a + b]),
                QubitSet::of(&order[a + b..]),
            ]
        })
}

fn three_parts() -> impl Strategy<Value = [SymbolicState; 3]> {
    partition().prop_flat_map(|[a, b, c]| (state_over(a), state_over(b), state_over(c)).prop_map(|(x, y, z)| [x, y, z]))
}

fn pairing() -> impl Strategy<Value = (BellPair, BellPair)> {
    prop::sample::select(vec![
        (BellPair::of(2, 3), BellPair::of(4, 5)),
        (BellPair::P2, BellPair::P3),
        (BellPair::of(2, 4), BellPair::of(3, 5)),
    ])
}

/// One-, two- or four-entry Bell product sums whose expansion has uniform
/// coefficients, the only shape the protocol produces.
fn bell_sum() -> impl Strategy<Value = BellProductExpr> {
    let all: Vec<(BellOutcome, BellOutcome)> = BellOutcome::ALL
        .iter()
        .flat_map(|&a| BellOutcome::ALL.iter().map(move |&b| (a, b)))
        .collect();
    (
        pairing(),
        prop::sample::select(vec![1usize, 2, 4]),
        Just(all).prop_shuffle(),
        prop::collection::vec(any::<bool>(), 4),
    )
        .prop_map(|(pairing, n, mut pairs, signs)| {
            pairs.truncate(n);
            pairs.sort();
            BellProductExpr {
                pairing,
                entries: pairs
                    .into_iter()
                    .zip(signs)
                    .map(|((first, second), neg)| BellEntry {
                        first,
                        second,
                        sign: Sign::from_negated(neg),
                    })
                    .collect(),
                norm_exponent: 2,
            }
        })
        .prop_filter("uniform expansion", |e| e.expand().is_ok())
}

proptest! {
    #[test]
    fn gates_preserve_norm(s in any_state(), g in any_gate(), q in any_qubit()) {
        prop_assert!((s.apply_gate(g, q).norm_sqr() - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn x_and_z_are_involutions(s in any_state(), q in any_qubit()) {
        for g in [PauliGate::X, PauliGate::Z, PauliGate::I] {
            let back = s.apply_gate(g, q).apply_gate(g, q);
            prop_assert_eq!(back, s.clone());
        }
    }

    #[test]
    fn iy_squares_to_minus_one(s in any_state(), q in any_qubit()) {
        let twice = s.apply_gate(PauliGate::IY, q).apply_gate(PauliGate::IY, q);
        let negated = s.scaled((-1.0).into());
        prop_assert_eq!(&twice, &negated);
        prop_assert!(twice.global_phase_equal(&s, TOLERANCE));
        let four = twice.apply_gate(PauliGate::IY, q).apply_gate(PauliGate::IY, q);
        prop_assert_eq!(four, s);
    }

    #[test]
    fn bell_probabilities_are_a_distribution(s in any_state(), p in any_pair()) {
        let d = s.bell_probabilities(p);
        prop_assert!((d.total() - 1.0).abs() <= TOLERANCE);
        for b in BellOutcome::ALL.map(|o| d.get(o)) {
            match &b.post_state {
                Some(post) => prop_assert!((post.norm_sqr() - 1.0).abs() <= TOLERANCE),
                None => prop_assert_eq!(b.probability, 0.0),
            }
        }
    }

    #[test]
    fn measurement_is_reproducible(s in any_state(), p in any_pair(), seed in any::<u64>()) {
        let mut a = qss_core::SeededRng::new(seed);
        let mut b = qss_core::SeededRng::new(seed);
        prop_assert_eq!(s.measure_bell(p, &mut a), s.measure_bell(p, &mut b));
    }

    #[test]
    fn product_is_commutative_and_associative(parts in three_parts()) {
        let [a, b, c] = &parts;
        let abc = expand_product([a, b, c]).unwrap();
        prop_assert_eq!(&abc, &expand_product([c, a, b]).unwrap());
        let ab = expand_product([a, b]).unwrap();
        let bc = expand_product([b, c]).unwrap();
        prop_assert_eq!(&abc, &expand_product([&ab, c]).unwrap());
        prop_assert_eq!(&abc, &expand_product([a, &bc]).unwrap());
        prop_assert_eq!(abc.len(), a.len() * b.len() * c.len());
        prop_assert_eq!(abc.norm_exponent(), a.norm_exponent() + b.norm_exponent() + c.norm_exponent());
        prop_assert_eq!(expand_product([a, &SymbolicState::unit()]).unwrap(), a.clone());
    }

    #[test]
    fn overlapping_product_is_rejected(a in state_over(QubitSet::of(&[1, 2])), b in state_over(QubitSet::of(&[2, 3]))) {
        prop_assert!(expand_product([&a, &b]).is_err());
    }

    #[test]
    fn decomposition_round_trips(expr in bell_sum(), target in pairing()) {
        let state = expr.expand().unwrap();
        let back = bell_decompose(&state, expr.pairing).unwrap();
        prop_assert!(back.same_structure(&expr));
        prop_assert_eq!(back.expand().unwrap(), state.clone());
        // other pairings either round-trip or refuse
        if let Ok(other) = bell_decompose(&state, target) {
            prop_assert_eq!(other.expand().unwrap(), state);
        }
    }

    #[test]
    fn canonical_form_ignores_order_and_duplication(s in state_over(QubitSet::ALL), seed in any::<u64>()) {
        let mut terms: Vec<Term> = s.terms().to_vec();
        let n = terms.len();
        terms.rotate_left((seed as usize) % n);
        let doubled: Vec<Term> = terms.iter().chain(terms.iter()).copied().collect();
        let a = SymbolicState::from_terms(QubitSet::ALL, terms, s.norm_exponent()).unwrap();
        prop_assert_eq!(&a, &s);
        let b = SymbolicState::from_terms(QubitSet::ALL, doubled, s.norm_exponent()).unwrap();
        let (va, vb) = (to_statevector(&a).unwrap(), to_statevector(&b).unwrap());
        prop_assert!(va.global_phase_equal(&vb, TOLERANCE));
        prop_assert_eq!(va, vb);
    }

    #[test]
    fn encoding_round_trips(bits in any_secret(), pos in any_position()) {
        let action = encode_secret(bits, pos);
        prop_assert_eq!(action.position, pos);
        prop_assert_eq!(decode_secret(action), bits);
    }

    #[test]
    fn honest_rounds_recover_the_secret(
        label in prop::option::of(any_label()),
        bits in any_secret(),
        pos in prop::option::of(any_position()),
        seed in any::<u64>(),
    ) {
        let t = run_protocol(label, bits, pos, seed);
        prop_assert_eq!(t.announcements.len(), 5);
        let r = replay(&t).unwrap();
        prop_assert_eq!(r.secret, bits);
        prop_assert_eq!(r.action, t.true_config.action);
        prop_assert!(r.tamper.is_none());
        prop_assert_eq!(replay(&t).unwrap(), r);
    }

    #[test]
    fn transcripts_round_trip_through_json(
        label in prop::option::of(any_label()),
        bits in any_secret(),
        pos in prop::option::of(any_position()),
        seed in any::<u64>(),
    ) {
        let t = run_protocol(label, bits, pos, seed);
        let text = t.to_json();
        prop_assert_eq!(Transcript::from_json(&text).unwrap(), t.clone());
        prop_assert_eq!(run_protocol(label, bits, pos, seed).to_json(), text);
        let report = RunReport::new(t);
        let back: RunReport = serde_json::from_str(&to_json(&report)).unwrap();
        prop_assert_eq!(back, report);
    }
}

#[test]
fn scenario_reports_round_trip_through_json() {
    for name in qss_core::harness::SCENARIOS {
        let report = scenario(name).unwrap();
        let back: qss_core::harness::ScenarioReport = serde_json::from_str(&to_json(&report)).unwrap();
        assert_eq!(back, report);
    }
}
