//! Secret reconstruction by selective term discarding.
//!
//! P2 and P3's Bell outcomes are expanded into basis terms, terms that
//! cannot occur for the announced initial state are dropped, P1's outcome is
//! multiplied in, terms whose untouched GHZ half leaves the state's support
//! are dropped again, and the remaining two terms are matched against the
//! four candidate gates applied to the diagonal reference state.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::protocol::{decode_secret, Announcement, GateAction, Party, Position, SecretBits};
use crate::statevector::{BellOutcome, BellPair, PauliGate, Qubit, StateLabel, Statevector, TOLERANCE};
use crate::symbolic::{
    bell_terms, diagonal_reference, expand_product, QubitSet, Sign, SymbolicError, SymbolicState, Term,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReconError {
    #[error("transcript is missing the {0} announcement")]
    IncompleteTranscript(&'static str),
    #[error("announcement {index} is out of order: expected {expected}")]
    OutOfOrder { index: usize, expected: &'static str },
    #[error("{party} announced a result on {pair}, which it does not hold")]
    MismatchedPair { party: Party, pair: BellPair },
    #[error("no filtered terms remain")]
    EmptyState,
    #[error("no candidate gate matches the kept terms ({kept} kept)")]
    NoMatch {
        kept: usize,
        filter: Option<Box<FilterResult>>,
    },
    #[error("several gates match the kept terms: {0:?}")]
    Ambiguous(Vec<GateAction>),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
}

/// Split of a state's terms into those kept and those discarded. Both
/// halves keep the input's qubit set and normalization factor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterResult {
    pub kept: SymbolicState,
    pub discarded: SymbolicState,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TamperReport {
    pub flipped_qubits: BTreeSet<Qubit>,
    pub hypothesized_gate: PauliGate,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReconstructionResult {
    pub action: GateAction,
    pub secret: SecretBits,
    pub tamper: Option<TamperReport>,
}

/// The five announcements reconstruction consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Disclosures {
    pub p2: BellOutcome,
    pub p3: BellOutcome,
    pub state: StateLabel,
    pub p1: BellOutcome,
    pub position: Position,
}

const EXPECTED: [&str; 5] = [
    "P2 measurement",
    "P3 measurement",
    "dealer state",
    "P1 measurement",
    "dealer position",
];

fn slot(a: &Announcement) -> usize {
    match a {
        Announcement::Measurement { party: Party::P2, .. } => 0,
        Announcement::Measurement { party: Party::P3, .. } => 1,
        Announcement::DealerState { .. } => 2,
        Announcement::Measurement { party: Party::P1, .. } => 3,
        Announcement::DealerPosition { .. } => 4,
        Announcement::Measurement {
            party: Party::Dealer, ..
        } => usize::MAX,
    }
}

impl Disclosures {
    /// Requires exactly the honest order: P2, P3, dealer state, P1, dealer
    /// position.
    pub fn from_announcements(announcements: &[Announcement]) -> Result<Self, ReconError> {
        for (i, name) in EXPECTED.iter().enumerate() {
            if !announcements.iter().any(|a| slot(a) == i) {
                return Err(ReconError::IncompleteTranscript(name));
            }
        }
        for (index, a) in announcements.iter().enumerate() {
            if let Announcement::Measurement { party, pair, .. } = a {
                if party.owned_pair() != Some(*pair) {
                    return Err(ReconError::MismatchedPair {
                        party: *party,
                        pair: *pair,
                    });
                }
            }
            if slot(a) != index {
                let expected = EXPECTED.get(index).copied().unwrap_or("end of transcript");
                return Err(ReconError::OutOfOrder { index, expected });
            }
        }
        let outcome = |a: &Announcement| match a {
            Announcement::Measurement { outcome, .. } => *outcome,
            _ => unreachable!("slot checked"),
        };
        let Announcement::DealerState { state } = announcements[2] else {
            unreachable!("slot checked")
        };
        let Announcement::DealerPosition { position } = announcements[4] else {
            unreachable!("slot checked")
        };
        Ok(Self {
            p2: outcome(&announcements[0]),
            p3: outcome(&announcements[1]),
            state,
            p1: outcome(&announcements[3]),
            position,
        })
    }

    pub fn to_announcements(&self) -> Vec<Announcement> {
        vec![
            Announcement::measurement(Party::P2, self.p2),
            Announcement::measurement(Party::P3, self.p3),
            Announcement::DealerState { state: self.state },
            Announcement::measurement(Party::P1, self.p1),
            Announcement::DealerPosition {
                position: self.position,
            },
        ]
    }
}

fn q(label: u8) -> Qubit {
    Qubit::of(label)
}

fn q2345() -> QubitSet {
    QubitSet::of(&[2, 3, 4, 5])
}

/// Keeps terms of a `q2q3q4q5` state whose `(2,3)` bits match the last two
/// bits of a first-half support string and whose `(4,5)` bits match the
/// first two bits of a second-half support string.
pub fn filter_support(state: &SymbolicState, label: StateLabel) -> FilterResult {
    assert_eq!(state.qubits(), q2345(), "support filter acts on qubits 2..5");
    let support = label.half_support();
    let first_half: Vec<u8> = support.iter().map(|h| h & 0b011).collect();
    let second_half: Vec<u8> = support.iter().map(|h| h >> 1).collect();
    let (kept, discarded) = state.filtered(|t| {
        first_half.contains(&t.restrict_bits(&[q(2), q(3)])) && second_half.contains(&t.restrict_bits(&[q(4), q(5)]))
    });
    FilterResult { kept, discarded }
}

/// Multiplies P1's Bell ket on `(1,6)` into the kept four-qubit terms.
pub fn attach_p1(kept: &SymbolicState, p1: BellOutcome) -> Result<SymbolicState, ReconError> {
    if kept.is_empty() {
        return Err(ReconError::EmptyState);
    }
    Ok(expand_product([&bell_terms(p1, BellPair::P1), kept])?)
}

/// Keeps six-qubit terms whose untouched-half triple lies in the label's
/// half support.
pub fn filter_untouched(state: &SymbolicState, label: StateLabel, position: Position) -> FilterResult {
    let untouched = position.untouched_half();
    let support = label.half_support();
    let (kept, discarded) = state.filtered(|t| support.contains(&t.restrict_bits(&untouched)));
    FilterResult { kept, discarded }
}

/// Signed toggled-half triples of a state, sorted.
fn toggled_signature(state: &SymbolicState, position: Position) -> Vec<(u8, Sign)> {
    let half = position.toggled_half();
    let mut sig: Vec<(u8, Sign)> = state
        .terms()
        .iter()
        .map(|t| (t.restrict_bits(&half), t.sign()))
        .collect();
    sig.sort();
    sig
}

fn same_up_to_sign(a: &[(u8, Sign)], b: &[(u8, Sign)]) -> bool {
    a == b || (a.len() == b.len() && a.iter().zip(b).all(|((x, s), (y, t))| x == y && *s == -*t))
}

/// Candidate `g` applied at `position` to the label's diagonal reference.
pub fn reference_state(label: StateLabel, action: GateAction) -> SymbolicState {
    diagonal_reference(label)
        .apply_gate(action.gate, action.position.qubit())
        .expect("reference spans all qubits")
}

/// Finds the single gate whose action on the diagonal reference reproduces
/// the kept pair up to a global sign. Terms are compared on the toggled half,
/// where the gate acts.
pub fn infer_gate(kept: &SymbolicState, label: StateLabel, position: Position) -> Result<GateAction, ReconError> {
    if kept.len() != 2 {
        return Err(ReconError::NoMatch {
            kept: kept.len(),
            filter: None,
        });
    }
    let observed = toggled_signature(kept, position);
    let matches: Vec<GateAction> = PauliGate::ALL
        .into_iter()
        .map(|gate| GateAction { gate, position })
        .filter(|&action| same_up_to_sign(&observed, &toggled_signature(&reference_state(label, action), position)))
        .collect();
    match matches.as_slice() {
        [] => Err(ReconError::NoMatch { kept: 2, filter: None }),
        [one] => Ok(*one),
        _ => Err(ReconError::Ambiguous(matches)),
    }
}

/// Explains discarded untouched-half deviations by a single bit flip, if one
/// qubit accounts for every discarded term.
pub fn tamper_report(untouched_discarded: &[Term], label: StateLabel, position: Position) -> Option<TamperReport> {
    let untouched = position.untouched_half();
    let support = label.half_support();
    let mut flipped: Option<Qubit> = None;
    for t in untouched_discarded {
        let triple = t.restrict_bits(&untouched);
        let deviation = support
            .iter()
            .map(|h| h ^ triple)
            .min_by_key(|d| d.count_ones())
            .expect("two support strings");
        if deviation.count_ones() != 1 {
            return None;
        }
        // bit 2 is the first qubit of the half
        let qubit = untouched[2 - deviation.trailing_zeros() as usize];
        match flipped {
            None => flipped = Some(qubit),
            Some(prev) if prev == qubit => {}
            Some(_) => return None,
        }
    }
    flipped.map(|q| TamperReport {
        flipped_qubits: BTreeSet::from([q]),
        hypothesized_gate: PauliGate::X,
    })
}

/// Every stage of one reconstruction, for diagnostics and cross-checks.
#[derive(Debug, Clone)]
pub struct ReconTrace {
    pub disclosures: Disclosures,
    /// P2 ⊗ P3 expansion over q2..q5.
    pub measured: SymbolicState,
    pub support: FilterResult,
    pub attached: Option<SymbolicState>,
    pub untouched: Option<FilterResult>,
    /// Probability that an honest round with the announced label and the
    /// inferred action yields the announced outcomes; zero when no action
    /// was inferred.
    pub honest_probability: f64,
    pub outcome: Result<ReconstructionResult, ReconError>,
}

/// Born probability of the announced P1, P2, P3 outcomes, measured in that
/// order, for the announced label with `action` applied.
pub fn honest_probability(d: &Disclosures, action: GateAction) -> f64 {
    let mut state = Statevector::prepare(d.state).apply_gate(action.gate, action.position.qubit());
    let mut probability = 1.0;
    for (pair, outcome) in [(BellPair::P1, d.p1), (BellPair::P2, d.p2), (BellPair::P3, d.p3)] {
        let branch = state.bell_probabilities(pair).get(outcome).clone();
        probability *= branch.probability;
        match branch.post_state {
            Some(next) => state = next,
            None => return 0.0,
        }
    }
    probability
}

pub fn reconstruct_disclosures(d: &Disclosures) -> ReconTrace {
    let measured =
        expand_product([&bell_terms(d.p2, BellPair::P2), &bell_terms(d.p3, BellPair::P3)]).expect("pairs are disjoint");
    let support = filter_support(&measured, d.state);
    let mut trace = ReconTrace {
        disclosures: *d,
        measured,
        support: support.clone(),
        attached: None,
        untouched: None,
        honest_probability: 0.0,
        outcome: Err(ReconError::EmptyState),
    };
    if support.kept.len() != 2 {
        trace.outcome = Err(ReconError::NoMatch {
            kept: support.kept.len(),
            filter: Some(Box::new(support)),
        });
        return trace;
    }
    let attached = match attach_p1(&support.kept, d.p1) {
        Ok(s) => s,
        Err(e) => {
            trace.outcome = Err(e);
            return trace;
        }
    };
    let untouched = filter_untouched(&attached, d.state, d.position);
    trace.attached = Some(attached);
    trace.untouched = Some(untouched.clone());
    if untouched.kept.len() != 2 {
        trace.outcome = Err(ReconError::NoMatch {
            kept: untouched.kept.len(),
            filter: Some(Box::new(untouched)),
        });
        return trace;
    }
    trace.outcome = infer_gate(&untouched.kept, d.state, d.position).map(|action| {
        trace.honest_probability = honest_probability(d, action);
        // Outcomes an honest round could not have produced mean the state
        // was disturbed in transit.
        let tamper = if trace.honest_probability > TOLERANCE {
            None
        } else {
            tamper_report(untouched.discarded.terms(), d.state, d.position)
        };
        ReconstructionResult {
            action,
            secret: decode_secret(action),
            tamper,
        }
    });
    trace
}

pub fn reconstruct_traced(announcements: &[Announcement]) -> Result<ReconTrace, ReconError> {
    Ok(reconstruct_disclosures(&Disclosures::from_announcements(
        announcements,
    )?))
}

pub fn reconstruct(announcements: &[Announcement]) -> Result<ReconstructionResult, ReconError> {
    reconstruct_traced(announcements)?.outcome
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::QubitSet;
    use BellOutcome::*;

    fn p2_p3_product() -> SymbolicState {
        SymbolicState::parse(q2345(), "+0000 +0110 -1001 -1111", 2).unwrap()
    }

    fn six(text: &str, k: i32) -> SymbolicState {
        SymbolicState::parse(QubitSet::ALL, text, k).unwrap()
    }

    fn action(gate: PauliGate, position: Position) -> GateAction {
        GateAction { gate, position }
    }

    #[test]
    fn support_filter_keeps_first_and_fourth_for_a() {
        let r = filter_support(&p2_p3_product(), StateLabel::A);
        assert_eq!(r.kept.to_string(), "+|0000> -|1111>");
        assert_eq!(r.discarded.to_string(), "+|0110> -|1001>");
    }

    #[test]
    fn support_filter_for_other_labels() {
        // The same four terms keep the middle pair under D, and nothing under
        // B or C: those terms have zero amplitude for B and C.
        let d = filter_support(&p2_p3_product(), StateLabel::D);
        assert_eq!(d.kept.to_string(), "+|0110> -|1001>");
        assert!(filter_support(&p2_p3_product(), StateLabel::B).kept.is_empty());
        assert!(filter_support(&p2_p3_product(), StateLabel::C).kept.is_empty());
    }

    #[test]
    fn support_filter_identity_case() {
        let s = SymbolicState::parse(q2345(), "+0000 +0011 -1100 +1111", 2).unwrap();
        let r = filter_support(&s, StateLabel::A);
        assert_eq!(r.kept, s);
        assert!(r.discarded.is_empty());
    }

    #[test]
    fn attach_p1_examples() {
        let kept = SymbolicState::parse(q2345(), "+0000 -1111", 1).unwrap();
        let s = attach_p1(&kept, BetaPlus).unwrap();
        assert_eq!(s.to_string(), "+|000001> -|011111> +|100000> -|111110>");
        assert_eq!(s.norm_exponent(), kept.norm_exponent() + 1);

        let single = SymbolicState::parse(q2345(), "+0000", 0).unwrap();
        assert_eq!(
            attach_p1(&single, AlphaPlus).unwrap().to_string(),
            "+|000000> +|100001>"
        );

        let empty = SymbolicState::parse(q2345(), "", 0).unwrap();
        assert_eq!(attach_p1(&empty, AlphaPlus), Err(ReconError::EmptyState));
    }

    #[test]
    fn untouched_filter_examples() {
        let after_p1 = six("+000001 -011111 +100000 -111110", 2);
        let one = filter_untouched(&after_p1, StateLabel::A, Position::One);
        assert_eq!(one.kept.to_string(), "-|011111> +|100000>");
        let six_ = filter_untouched(&after_p1, StateLabel::A, Position::Six);
        assert_eq!(six_.kept.to_string(), "+|000001> -|111110>");

        let violating = six("+000001 +011110", 1);
        assert!(filter_untouched(&violating, StateLabel::A, Position::One)
            .kept
            .is_empty());
    }

    #[test]
    fn infer_gate_examples() {
        let a = StateLabel::A;
        assert_eq!(
            infer_gate(&six("-011111 +100000", 1), a, Position::One),
            Ok(action(PauliGate::IY, Position::One))
        );
        assert_eq!(
            infer_gate(&six("+000000 -111111", 1), a, Position::One),
            Ok(action(PauliGate::Z, Position::One))
        );
        assert_eq!(
            infer_gate(&six("+000000 +111111", 1), a, Position::One),
            Ok(action(PauliGate::I, Position::One))
        );
        assert!(matches!(
            infer_gate(&six("+000000 +000111", 1), a, Position::One),
            Err(ReconError::NoMatch { .. })
        ));
        assert!(matches!(
            infer_gate(&six("+000000", 0), a, Position::One),
            Err(ReconError::NoMatch { kept: 1, .. })
        ));
    }

    #[test]
    fn tamper_report_examples() {
        let eve = six("+000110 -111001", 1);
        let report = tamper_report(eve.terms(), StateLabel::A, Position::One).unwrap();
        assert_eq!(report.flipped_qubits, BTreeSet::from([q(6)]));
        assert_eq!(report.hypothesized_gate, PauliGate::X);

        assert_eq!(tamper_report(&[], StateLabel::A, Position::One), None);

        // deviations on different qubits
        let mixed = six("+000001 -111101", 1);
        assert_eq!(tamper_report(mixed.terms(), StateLabel::A, Position::One), None);
        // a discarded term whose untouched half is in the support
        let inside = six("+001111", 0);
        assert_eq!(tamper_report(inside.terms(), StateLabel::A, Position::One), None);
    }

    #[test]
    fn tamper_report_alone_cannot_tell_honest_discards_apart() {
        // Honest discards of the worked example deviate at qubit 6 as well;
        // reconstruct only consults the report when the kept pair is off the
        // diagonal.
        let honest = six("+000001 -111110", 1);
        assert!(tamper_report(honest.terms(), StateLabel::A, Position::One).is_some());
    }

    #[test]
    fn worked_example_reconstructs_11() {
        let d = Disclosures {
            p2: AlphaMinus,
            p3: AlphaPlus,
            state: StateLabel::A,
            p1: BetaPlus,
            position: Position::One,
        };
        let r = reconstruct(&d.to_announcements()).unwrap();
        assert_eq!(r.action, action(PauliGate::IY, Position::One));
        assert_eq!(r.secret.to_string(), "11");
        assert_eq!(r.tamper, None);
    }

    #[test]
    fn eve_branch_matches_an_honest_branch() {
        // Outcomes of the intercepted run also arise honestly from (A, iY1),
        // so reconstruction cannot tell them apart.
        let d = Disclosures {
            p2: BetaMinus,
            p3: BetaPlus,
            state: StateLabel::A,
            p1: AlphaPlus,
            position: Position::One,
        };
        let trace = reconstruct_disclosures(&d);
        assert!((trace.honest_probability - 0.125).abs() < 1e-12);
        let r = trace.outcome.unwrap();
        assert_eq!(r.action, action(PauliGate::IY, Position::One));
        assert_eq!(r.tamper, None);
        let discarded = trace.untouched.unwrap().discarded;
        let report = tamper_report(discarded.terms(), StateLabel::A, Position::One).unwrap();
        assert_eq!(report.flipped_qubits, BTreeSet::from([q(6)]));
    }

    #[test]
    fn every_decodable_announcement_set_is_an_honest_branch() {
        let (mut decoded, mut rejected) = (0, 0);
        for state in StateLabel::ALL {
            for position in Position::ALL {
                for p1 in BellOutcome::ALL {
                    for p2 in BellOutcome::ALL {
                        for p3 in BellOutcome::ALL {
                            let t = reconstruct_disclosures(&Disclosures {
                                p2,
                                p3,
                                state,
                                p1,
                                position,
                            });
                            match &t.outcome {
                                Ok(r) => {
                                    decoded += 1;
                                    assert!(t.honest_probability > TOLERANCE);
                                    assert_eq!(r.tamper, None);
                                }
                                Err(ReconError::NoMatch { .. }) => rejected += 1,
                                Err(e) => panic!("unexpected {e}"),
                            }
                        }
                    }
                }
            }
        }
        assert_eq!((decoded, rejected), (256, 256));
    }

    #[test]
    fn all_alpha_plus_reconstructs_identity() {
        let d = Disclosures {
            p2: AlphaPlus,
            p3: AlphaPlus,
            state: StateLabel::A,
            p1: AlphaPlus,
            position: Position::One,
        };
        let r = reconstruct(&d.to_announcements()).unwrap();
        assert_eq!(r.action, action(PauliGate::I, Position::One));
        assert_eq!(r.secret.to_string(), "00");
    }

    #[test]
    fn transcript_shape_errors() {
        let d = Disclosures {
            p2: AlphaMinus,
            p3: AlphaPlus,
            state: StateLabel::A,
            p1: BetaPlus,
            position: Position::One,
        };
        let mut missing = d.to_announcements();
        missing.remove(3);
        assert_eq!(
            reconstruct(&missing),
            Err(ReconError::IncompleteTranscript("P1 measurement"))
        );

        let mut swapped = d.to_announcements();
        swapped.swap(0, 1);
        assert!(matches!(
            reconstruct(&swapped),
            Err(ReconError::OutOfOrder { index: 0, .. })
        ));

        let mut extra = d.to_announcements();
        extra.push(Announcement::DealerState { state: StateLabel::B });
        assert!(matches!(
            reconstruct(&extra),
            Err(ReconError::OutOfOrder { index: 5, .. })
        ));

        let mut wrong_pair = d.to_announcements();
        wrong_pair[0] = Announcement::Measurement {
            party: Party::P2,
            pair: BellPair::P3,
            outcome: AlphaMinus,
        };
        assert!(matches!(
            reconstruct(&wrong_pair),
            Err(ReconError::MismatchedPair { .. })
        ));
    }
}
