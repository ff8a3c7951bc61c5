//! Exhaustive verification, the P1 collapse table, and scripted security
//! scenarios.

use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::protocol::{decode_secret, Announcement, GateAction, Position, SecretBits};
use crate::recon::{reconstruct_disclosures, Disclosures, ReconError, ReconTrace, ReconstructionResult};
use crate::statevector::{BellOutcome, BellPair, PauliGate, Qubit, StateLabel, Statevector, DIM, TOLERANCE};
use crate::symbolic::{
    bell_decompose, bell_terms, expand_product, to_statevector, BellEntry, BellProductExpr, QubitSet, Sign,
    SymbolicState,
};

/// Tolerance on branch probabilities and their sums.
pub const PROBABILITY_TOLERANCE: f64 = 1e-9;

const P23: BellPair = BellPair::of(2, 3);
const P45: BellPair = BellPair::of(4, 5);

// ---------------------------------------------------------------------------
// Exhaustive verification

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchChecks {
    pub secret: bool,
    pub probability: bool,
    pub agreement: bool,
    pub tamper_free: bool,
}

impl BranchChecks {
    pub fn all(&self) -> bool {
        self.secret && self.probability && self.agreement && self.tamper_free
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRecord {
    pub state: StateLabel,
    pub action: GateAction,
    pub secret: SecretBits,
    pub p1: BellOutcome,
    pub p2: BellOutcome,
    pub p3: BellOutcome,
    pub probability: f64,
    pub reconstruction: Option<ReconstructionResult>,
    pub error: Option<String>,
    pub checks: BranchChecks,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigRecord {
    pub state: StateLabel,
    pub action: GateAction,
    pub branches: usize,
    pub probability_sum: f64,
    /// Every Bell distribution met while chaining sums to one.
    pub distributions_normalized: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub configurations: usize,
    pub branches: usize,
    pub failures: usize,
    pub secret_failures: usize,
    pub probability_failures: usize,
    pub agreement_failures: usize,
    pub tamper_false_positives: usize,
    pub ambiguous: usize,
    pub unnormalized_configurations: usize,
}

impl VerifySummary {
    pub fn ok(&self) -> bool {
        self.failures == 0 && self.unnormalized_configurations == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub summary: VerifySummary,
    pub configurations: Vec<ConfigRecord>,
    pub branches: Vec<BranchRecord>,
}

fn multiple_of_64th(p: f64) -> bool {
    let scaled = p * DIM as f64;
    p > PROBABILITY_TOLERANCE && (scaled - scaled.round()).abs() <= PROBABILITY_TOLERANCE * DIM as f64
}

/// The prepared state splits into a diagonal pair `Σ|h>|h>` and an
/// off-diagonal pair `Σ|h>|h̄>`. Returns `g` at `position` applied to each,
/// built from amplitudes rather than through the term algebra.
fn numeric_components(label: StateLabel, action: GateAction) -> [Statevector; 2] {
    [0b000, 0b111].map(|flip| {
        let mut amps = [Complex64::new(0.0, 0.0); DIM];
        for h in label.half_support() {
            amps[usize::from((h << 3) | (h ^ flip))] = Complex64::new(1.0, 0.0);
        }
        Statevector::from_unnormalized(amps)
            .expect("two nonzero amplitudes")
            .apply_gate(action.gate, action.position.qubit())
    })
}

fn agrees(symbolic: Option<&SymbolicState>, numeric: &Statevector) -> bool {
    symbolic
        .and_then(|s| to_statevector(s).ok())
        .is_some_and(|v| v.global_phase_equal(numeric, TOLERANCE))
}

/// Symbolic pipeline stages against the oracle: the product of all three
/// announced kets against the final state, P1 attached to the kept pair
/// against the post-P1 state, and the final kept pair against the gate
/// applied to one component of the prepared state.
fn stage_agreement(trace: &ReconTrace, after_p1: &Statevector, final_state: &Statevector, truth: GateAction) -> bool {
    let d = &trace.disclosures;
    let announced = expand_product([
        &bell_terms(d.p1, BellPair::P1),
        &bell_terms(d.p2, BellPair::P2),
        &bell_terms(d.p3, BellPair::P3),
    ])
    .ok();
    let kept = trace.untouched.as_ref().map(|u| &u.kept);
    agrees(announced.as_ref(), final_state)
        && agrees(trace.attached.as_ref(), after_p1)
        && numeric_components(d.state, truth).iter().any(|c| agrees(kept, c))
}

fn verify_branch(
    label: StateLabel,
    action: GateAction,
    outcomes: [BellOutcome; 3],
    probability: f64,
    after_p1: &Statevector,
    final_state: &Statevector,
) -> BranchRecord {
    let [p1, p2, p3] = outcomes;
    let secret = decode_secret(action);
    let trace = reconstruct_disclosures(&Disclosures {
        p2,
        p3,
        state: label,
        p1,
        position: action.position,
    });
    let agreement = stage_agreement(&trace, after_p1, final_state, action);
    let (reconstruction, error) = match &trace.outcome {
        Ok(r) => (Some(r.clone()), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let checks = BranchChecks {
        secret: reconstruction
            .as_ref()
            .is_some_and(|r| r.action == action && r.secret == secret),
        probability: multiple_of_64th(probability),
        agreement,
        tamper_free: reconstruction.as_ref().is_none_or(|r| r.tamper.is_none()),
    };
    BranchRecord {
        state: label,
        action,
        secret,
        p1,
        p2,
        p3,
        probability,
        reconstruction,
        error,
        checks,
        pass: checks.all(),
    }
}

/// All 32 honest configurations and every positive-probability branch,
/// chained exactly through the Bell distributions in protocol order.
pub fn exhaustive_verify() -> VerifyReport {
    let mut configurations = Vec::new();
    let mut branches = Vec::new();
    let mut ambiguous = 0;
    for label in StateLabel::ALL {
        for position in Position::ALL {
            for gate in PauliGate::ALL {
                let action = GateAction { gate, position };
                let encoded = Statevector::prepare(label).apply_gate(gate, position.qubit());
                let first = branches.len();
                let mut normalized = true;
                let d1 = encoded.bell_probabilities(BellPair::P1);
                normalized &= (d1.total() - 1.0).abs() <= PROBABILITY_TOLERANCE;
                for b1 in d1.possible() {
                    let after_p1 = b1.post_state.as_ref().expect("possible branch");
                    let d2 = after_p1.bell_probabilities(BellPair::P2);
                    normalized &= (d2.total() - 1.0).abs() <= PROBABILITY_TOLERANCE;
                    for b2 in d2.possible() {
                        let after_p2 = b2.post_state.as_ref().expect("possible branch");
                        let d3 = after_p2.bell_probabilities(BellPair::P3);
                        normalized &= (d3.total() - 1.0).abs() <= PROBABILITY_TOLERANCE;
                        for b3 in d3.possible() {
                            let final_state = b3.post_state.as_ref().expect("possible branch");
                            let probability = b1.probability * b2.probability * b3.probability;
                            let record = verify_branch(
                                label,
                                action,
                                [b1.outcome, b2.outcome, b3.outcome],
                                probability,
                                after_p1,
                                final_state,
                            );
                            if record.error.as_deref().is_some_and(|e| e.starts_with("several gates")) {
                                ambiguous += 1;
                            }
                            branches.push(record);
                        }
                    }
                }
                let probability_sum = branches[first..].iter().map(|b| b.probability).sum();
                configurations.push(ConfigRecord {
                    state: label,
                    action,
                    branches: branches.len() - first,
                    probability_sum,
                    distributions_normalized: normalized,
                });
            }
        }
    }
    let count = |f: fn(&BranchRecord) -> bool| branches.iter().filter(|b| f(b)).count();
    let summary = VerifySummary {
        configurations: configurations.len(),
        branches: branches.len(),
        failures: count(|b| !b.pass),
        secret_failures: count(|b| !b.checks.secret),
        probability_failures: count(|b| !b.checks.probability),
        agreement_failures: count(|b| !b.checks.agreement),
        tamper_false_positives: count(|b| !b.checks.tamper_free),
        ambiguous,
        unnormalized_configurations: configurations
            .iter()
            .filter(|c| !c.distributions_normalized || (c.probability_sum - 1.0).abs() > PROBABILITY_TOLERANCE)
            .count(),
    };
    VerifyReport {
        summary,
        configurations,
        branches,
    }
}

// ---------------------------------------------------------------------------
// Collapse table

/// A Bell ket with the subscripts as printed, which need not be a valid
/// pairing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrintedKet {
    pub outcome: BellOutcome,
    pub qubits: (u8, u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrintedEntry {
    pub sign: Sign,
    pub first: PrintedKet,
    pub second: PrintedKet,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrintedRow {
    pub gate: PauliGate,
    pub p1: BellOutcome,
    pub entries: Vec<PrintedEntry>,
}

impl PrintedRow {
    /// The pairing shared by all entries, if it is a valid one covering
    /// qubits 2 to 5.
    pub fn pairing(&self) -> Option<(BellPair, BellPair)> {
        let (a, b) = (self.entries[0].first.qubits, self.entries[0].second.qubits);
        if self.entries.iter().any(|e| e.first.qubits != a || e.second.qubits != b) {
            return None;
        }
        let p = BellPair::new(Qubit::new(a.0).ok()?, Qubit::new(a.1).ok()?).ok()?;
        let q = BellPair::new(Qubit::new(b.0).ok()?, Qubit::new(b.1).ok()?).ok()?;
        let covered = QubitSet::from(p).union(QubitSet::from(q));
        (p.is_disjoint(q) && covered == QubitSet::of(&[2, 3, 4, 5])).then_some((p, q))
    }

    /// Signed outcome pairs with the subscripts dropped, sorted.
    pub fn structure(&self) -> Vec<BellEntry> {
        let mut entries: Vec<BellEntry> = self
            .entries
            .iter()
            .map(|e| BellEntry {
                first: e.first.outcome,
                second: e.second.outcome,
                sign: e.sign,
            })
            .collect();
        entries.sort();
        entries
    }

    /// Rendered as printed, subscripts included.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, e) in self.entries.iter().enumerate() {
            match (i, e.sign) {
                (0, Sign::Plus) => {}
                (0, Sign::Minus) => out.push('-'),
                (_, s) => out.push_str(&format!(" {} ", s.symbol())),
            }
            for k in [e.first, e.second] {
                out.push_str(&format!("{}({},{})", k.outcome, k.qubits.0, k.qubits.1));
            }
        }
        out
    }
}

/// Sign, then each ket's outcome and subscript pair as printed.
type RawEntry = (Sign, BellOutcome, (u8, u8), BellOutcome, (u8, u8));

fn printed(gate: PauliGate, p1: BellOutcome, entries: [RawEntry; 2]) -> PrintedRow {
    PrintedRow {
        gate,
        p1,
        entries: entries
            .into_iter()
            .map(|(sign, o1, s1, o2, s2)| PrintedEntry {
                sign,
                first: PrintedKet {
                    outcome: o1,
                    qubits: s1,
                },
                second: PrintedKet {
                    outcome: o2,
                    qubits: s2,
                },
            })
            .collect(),
    }
}

/// Reference collapse table, entry by entry.
pub fn printed_table() -> Vec<PrintedRow> {
    use BellOutcome::{AlphaMinus as Am, AlphaPlus as Ap, BetaMinus as Bm, BetaPlus as Bp};
    use PauliGate::{I, IY, X, Z};
    use Sign::{Minus as M, Plus as P};
    const A: (u8, u8) = (2, 3);
    const B: (u8, u8) = (4, 5);
    const C: (u8, u8) = (2, 5);
    vec![
        printed(I, Ap, [(P, Ap, A, Ap, B), (P, Am, A, Am, B)]),
        printed(I, Am, [(P, Ap, A, Am, B), (P, Am, A, Ap, B)]),
        printed(I, Bp, [(P, Bp, A, Bp, B), (P, Bm, A, Bm, B)]),
        printed(I, Bm, [(P, Bp, A, Bm, B), (P, Bm, A, Bp, B)]),
        printed(X, Ap, [(P, Bp, A, Bp, B), (P, Bm, A, Bm, B)]),
        printed(X, Am, [(M, Bp, A, Bm, B), (M, Bm, A, Bp, B)]),
        printed(X, Bp, [(P, Ap, A, Ap, B), (P, Am, A, Am, B)]),
        // printed with the sign inside the first ket
        printed(X, Bm, [(M, Ap, A, Am, B), (M, Am, A, Ap, B)]),
        printed(IY, Ap, [(M, Bp, A, Bm, B), (M, Bm, A, Bp, B)]),
        printed(IY, Am, [(P, Bp, A, Bp, B), (P, Bm, A, Bm, B)]),
        printed(IY, Bp, [(M, Ap, A, Am, B), (M, Am, A, Ap, B)]),
        printed(IY, Bm, [(P, Ap, A, Ap, B), (P, Am, A, Am, B)]),
        printed(Z, Ap, [(P, Ap, A, Am, B), (P, Am, C, Ap, B)]),
        printed(Z, Am, [(P, Ap, C, Ap, B), (P, Am, C, Am, B)]),
        printed(Z, Bp, [(P, Bp, C, Bm, B), (P, Bm, C, Bp, B)]),
        printed(Z, Bm, [(P, Bp, C, Bp, B), (P, Bm, C, Bm, B)]),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowVerdict {
    /// Printed pairing is valid and the printed entries match the oracle in it.
    Match,
    /// Printed entries match the oracle only under a different pairing.
    SubscriptTypo,
    /// No pairing reproduces the printed entries.
    Mismatch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub gate: PauliGate,
    pub p1: BellOutcome,
    pub probability: f64,
    /// Post-measurement state of qubits 2..5.
    pub collapsed: String,
    pub printed: String,
    pub oracle_23_45: String,
    pub oracle_25_34: String,
    /// Pairing under which the printed entries match, if any.
    pub matching_pairing: Option<[BellPair; 2]>,
    pub verdict: RowVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableReport {
    pub rows: Vec<TableRow>,
    pub matched: usize,
    pub flagged: usize,
    pub mismatched: usize,
}

impl TableReport {
    pub fn ok(&self) -> bool {
        self.mismatched == 0 && self.rows.len() == 16
    }
}

/// State of qubits 2..5 after P1 observes `p1` on `g₁|A>`.
pub fn collapsed_state(label: StateLabel, action: GateAction, p1: BellOutcome) -> Option<(f64, SymbolicState)> {
    let encoded = Statevector::prepare(label).apply_gate(action.gate, action.position.qubit());
    let branch = encoded.bell_probabilities(BellPair::P1).get(p1).clone();
    let post = branch.post_state?;
    let full = SymbolicState::from_statevector(&post).ok()?;
    let rest = full.project_out(&bell_terms(p1, BellPair::P1)).ok()?;
    Some((branch.probability, rest))
}

fn sorted(mut e: BellProductExpr) -> BellProductExpr {
    e.entries.sort();
    e
}

fn structure_matches(expr: &BellProductExpr, entries: &[BellEntry]) -> bool {
    let candidate = BellProductExpr {
        pairing: expr.pairing,
        entries: entries.to_vec(),
        norm_exponent: expr.norm_exponent,
    };
    expr.same_structure(&candidate)
}

pub fn collapse_table() -> TableReport {
    let mut rows = Vec::new();
    for row in printed_table() {
        let action = GateAction {
            gate: row.gate,
            position: Position::One,
        };
        let (probability, state) =
            collapsed_state(StateLabel::A, action, row.p1).expect("every P1 outcome is possible");
        let adjacent = sorted(bell_decompose(&state, (P23, P45)).expect("uniform state"));
        let owners = sorted(bell_decompose(&state, (BellPair::P2, BellPair::P3)).expect("uniform state"));
        let structure = row.structure();
        let printed_pairing = row.pairing();
        let matching = [&adjacent, &owners]
            .into_iter()
            .find(|e| structure_matches(e, &structure))
            .map(|e| e.pairing);
        let verdict = match (printed_pairing, matching) {
            (Some(p), Some(m)) if p == m => RowVerdict::Match,
            (_, Some(_)) => RowVerdict::SubscriptTypo,
            (_, None) => RowVerdict::Mismatch,
        };
        rows.push(TableRow {
            gate: row.gate,
            p1: row.p1,
            probability,
            collapsed: state.to_string(),
            printed: row.render(),
            oracle_23_45: adjacent.to_string(),
            oracle_25_34: owners.to_string(),
            matching_pairing: matching.map(|(p, q)| [p, q]),
            verdict,
        });
    }
    let count = |v: RowVerdict| rows.iter().filter(|r| r.verdict == v).count();
    TableReport {
        matched: count(RowVerdict::Match),
        flagged: count(RowVerdict::SubscriptTypo),
        mismatched: count(RowVerdict::Mismatch),
        rows,
    }
}

// ---------------------------------------------------------------------------
// Scenarios

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub label: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub name: String,
    pub announcements: Vec<Announcement>,
    pub expected: String,
    pub observed: String,
    pub steps: Vec<Step>,
    pub checks: Vec<Check>,
    pub verdict: bool,
}

#[derive(Default)]
struct ReportBuilder {
    steps: Vec<Step>,
    checks: Vec<Check>,
}

impl ReportBuilder {
    fn step(&mut self, label: &str, value: impl ToString) {
        self.steps.push(Step {
            label: label.to_string(),
            value: value.to_string(),
        });
    }

    fn check(&mut self, name: &str, expected: impl ToString, observed: impl ToString) -> bool {
        let (expected, observed) = (expected.to_string(), observed.to_string());
        let pass = expected == observed;
        self.checks.push(Check {
            name: name.to_string(),
            expected,
            observed,
            pass,
        });
        pass
    }

    fn finish(
        self,
        name: &str,
        announcements: Vec<Announcement>,
        expected: String,
        observed: String,
    ) -> ScenarioReport {
        let verdict = self.checks.iter().all(|c| c.pass);
        ScenarioReport {
            name: name.to_string(),
            announcements,
            expected,
            observed,
            steps: self.steps,
            checks: self.checks,
            verdict,
        }
    }
}

pub const SCENARIOS: [&str; 5] = [
    "lie-state",
    "lie-position",
    "p1-withholds",
    "no-collusion",
    "eve-intercept",
];

pub fn scenario(name: &str) -> Option<ScenarioReport> {
    Some(match name {
        "lie-state" => scenario_lie_state(),
        "lie-position" => scenario_lie_position(),
        "p1-withholds" => scenario_p1_withholds(),
        "no-collusion" => scenario_no_collusion(),
        "eve-intercept" => scenario_eve_intercept(),
        _ => return None,
    })
}

fn describe(outcome: &Result<ReconstructionResult, ReconError>) -> String {
    match outcome {
        Ok(r) => format!("{} = \"{}\"", r.action, r.secret),
        Err(ReconError::NoMatch { kept, .. }) => format!("no match ({kept} kept)"),
        Err(ReconError::Ambiguous(_)) => "ambiguous".to_string(),
        Err(e) => e.to_string(),
    }
}

fn action(gate: PauliGate, position: Position) -> GateAction {
    GateAction { gate, position }
}

/// Joint probability of P1, P2, P3 observing the given outcomes, in
/// protocol order, together with the state after each stage.
pub fn branch(state: &Statevector, outcomes: [BellOutcome; 3]) -> (f64, Vec<Statevector>) {
    let mut probability = 1.0;
    let mut states = Vec::new();
    let mut current = state.clone();
    for (pair, outcome) in [BellPair::P1, BellPair::P2, BellPair::P3].into_iter().zip(outcomes) {
        let b = current.bell_probabilities(pair).get(outcome).clone();
        probability *= b.probability;
        match b.post_state {
            Some(s) => {
                states.push(s.clone());
                current = s;
            }
            None => return (0.0, states),
        }
    }
    (probability, states)
}

fn deductions(outcomes: &BTreeSet<String>) -> String {
    outcomes.iter().cloned().collect::<Vec<_>>().join("; ")
}

/// For a true state label and gate, the set of deductions reached when the
/// dealer announces each label instead, over all positive-probability
/// branches. Rows are true labels, columns announced labels.
pub fn misannouncement_matrix(truth: GateAction) -> Vec<(StateLabel, StateLabel, BTreeSet<String>)> {
    let mut cells = Vec::new();
    for true_label in StateLabel::ALL {
        let encoded = Statevector::prepare(true_label).apply_gate(truth.gate, truth.position.qubit());
        for announced in StateLabel::ALL {
            let mut seen = BTreeSet::new();
            for p1 in BellOutcome::ALL {
                for p2 in BellOutcome::ALL {
                    for p3 in BellOutcome::ALL {
                        if branch(&encoded, [p1, p2, p3]).0 <= TOLERANCE {
                            continue;
                        }
                        let d = Disclosures {
                            p2,
                            p3,
                            state: announced,
                            p1,
                            position: truth.position,
                        };
                        seen.insert(describe(&reconstruct_disclosures(&d).outcome));
                    }
                }
            }
            cells.push((true_label, announced, seen));
        }
    }
    cells
}

/// True (C, X₁), P1 observes α⁺, dealer announces A.
pub fn scenario_lie_state() -> ScenarioReport {
    let truth = action(PauliGate::X, Position::One);
    let mut b = ReportBuilder::default();
    b.check("true secret", "01", decode_secret(truth));

    let (p, collapsed) = collapsed_state(StateLabel::C, truth, BellOutcome::AlphaPlus).expect("possible outcome");
    b.step("P1 outcome probability", p);
    b.step("collapsed q2345", &collapsed);
    let adjacent = sorted(bell_decompose(&collapsed, (P23, P45)).expect("uniform"));
    let owners = sorted(bell_decompose(&collapsed, (BellPair::P2, BellPair::P3)).expect("uniform"));
    b.step("collapsed in (2,3),(4,5)", &adjacent);
    b.step("collapsed in (2,5),(3,4)", &owners);
    let claimed = [
        BellEntry {
            first: BellOutcome::AlphaPlus,
            second: BellOutcome::AlphaPlus,
            sign: Sign::Plus,
        },
        BellEntry {
            first: BellOutcome::AlphaMinus,
            second: BellOutcome::AlphaMinus,
            sign: Sign::Minus,
        },
    ];
    let shape_found = [&adjacent, &owners].into_iter().any(|e| structure_matches(e, &claimed));
    b.check("collapsed state is a+a+ - a-a- in some pairing", true, shape_found);

    let encoded = Statevector::prepare(StateLabel::C).apply_gate(truth.gate, truth.position.qubit());
    let mut observed = BTreeSet::new();
    let mut announcements = Vec::new();
    for p2 in BellOutcome::ALL {
        for p3 in BellOutcome::ALL {
            let (prob, _) = branch(&encoded, [BellOutcome::AlphaPlus, p2, p3]);
            if prob <= TOLERANCE {
                continue;
            }
            let d = Disclosures {
                p2,
                p3,
                state: StateLabel::A,
                p1: BellOutcome::AlphaPlus,
                position: Position::One,
            };
            let outcome = describe(&reconstruct_disclosures(&d).outcome);
            b.step(&format!("P2 {p2}, P3 {p3} (p = {prob})"), &outcome);
            if announcements.is_empty() {
                announcements = d.to_announcements();
            }
            observed.insert(outcome);
        }
    }
    let expected = describe(&Ok(ReconstructionResult {
        action: action(PauliGate::I, Position::One),
        secret: "00".parse().expect("valid"),
        tamper: None,
    }));
    let observed = deductions(&observed);
    b.check("deduction with A announced", &expected, &observed);

    for (t, a, seen) in misannouncement_matrix(truth) {
        b.step(&format!("X1 true {t}, announced {a}"), deductions(&seen));
    }
    b.finish("lie-state", announcements, expected, observed)
}

fn worked_example() -> Disclosures {
    Disclosures {
        p2: BellOutcome::AlphaMinus,
        p3: BellOutcome::AlphaPlus,
        state: StateLabel::A,
        p1: BellOutcome::BetaPlus,
        position: Position::One,
    }
}

/// True (A, iY₁) on the worked-example branch, dealer announces position 6.
pub fn scenario_lie_position() -> ScenarioReport {
    let truth = action(PauliGate::IY, Position::One);
    let mut b = ReportBuilder::default();
    let d = worked_example();
    let encoded = Statevector::prepare(StateLabel::A).apply_gate(truth.gate, truth.position.qubit());
    let (prob, _) = branch(&encoded, [d.p1, d.p2, d.p3]);
    b.check("branch is possible", true, prob > TOLERANCE);
    b.step("branch probability", prob);
    b.check("true secret", "11", decode_secret(truth));

    let lied = Disclosures {
        position: Position::Six,
        ..d
    };
    let trace = reconstruct_disclosures(&lied);
    b.step("P2 x P3 expansion", &trace.measured);
    b.step("after support filter", &trace.support.kept);
    if let Some(a) = &trace.attached {
        b.step("with P1 attached", a);
    }
    let kept = trace.untouched.as_ref().map(|u| u.kept.to_string()).unwrap_or_default();
    b.check("kept terms", "+|000001> -|111110>", &kept);
    let observed = describe(&trace.outcome);
    let expected = "(iY,6) = \"00\"".to_string();
    b.check("deduction with position 6 announced", &expected, &observed);
    b.finish("lie-position", lied.to_announcements(), expected, observed)
}

/// P2 and P3 announce the worked-example outcomes; P1 stays silent.
pub fn scenario_p1_withholds() -> ScenarioReport {
    let mut b = ReportBuilder::default();
    let base = worked_example();
    let measured =
        expand_product([&bell_terms(base.p2, BellPair::P2), &bell_terms(base.p3, BellPair::P3)]).expect("disjoint");
    let kept = crate::recon::filter_support(&measured, base.state).kept;
    b.step("kept q2345", &kept);
    if let Ok(e) = bell_decompose(&kept, (P23, P45)) {
        b.step("kept in (2,3),(4,5)", sorted(e));
    }

    let expected_pairs = [
        (BellOutcome::AlphaPlus, PauliGate::Z),
        (BellOutcome::AlphaMinus, PauliGate::I),
        (BellOutcome::BetaPlus, PauliGate::IY),
        (BellOutcome::BetaMinus, PauliGate::X),
    ];
    let mut consistent = BTreeSet::new();
    for (p1, gate) in expected_pairs {
        let d = Disclosures { p1, ..base };
        let outcome = reconstruct_disclosures(&d).outcome;
        let encoded = Statevector::prepare(base.state).apply_gate(gate, Position::One.qubit());
        let (prob, _) = branch(&encoded, [p1, base.p2, base.p3]);
        b.check(
            &format!("P1 {p1} deduction"),
            action(gate, Position::One),
            describe_action(&outcome),
        );
        b.check(&format!("P1 {p1} branch possible under {gate}"), true, prob > TOLERANCE);
        if let Ok(r) = outcome {
            consistent.insert(r.action.gate);
        }
    }
    let observed = format!("{} consistent gates", consistent.len());
    let expected = "4 consistent gates".to_string();
    b.check("ambiguity set size", &expected, &observed);
    let mut announcements = base.to_announcements();
    announcements.remove(3);
    b.finish("p1-withholds", announcements, expected, observed)
}

fn describe_action(outcome: &Result<ReconstructionResult, ReconError>) -> String {
    match outcome {
        Ok(r) => r.action.to_string(),
        Err(_) => describe(outcome),
    }
}

/// P3 withholds; P2's outcome alone leaves several gates open.
pub fn scenario_no_collusion() -> ScenarioReport {
    let mut b = ReportBuilder::default();
    use BellOutcome::{AlphaMinus, AlphaPlus};
    let cases = [
        (
            PauliGate::IY,
            BellOutcome::BetaPlus,
            [(AlphaPlus, AlphaMinus), (AlphaMinus, AlphaPlus)],
        ),
        // printed with a duplicated first term; read as the a-a- completion
        (
            PauliGate::I,
            BellOutcome::AlphaPlus,
            [(AlphaPlus, AlphaPlus), (AlphaMinus, AlphaMinus)],
        ),
    ];
    let mut sizes = Vec::new();
    let mut announcements = Vec::new();
    for (gate, p1, printed_form) in cases {
        let truth = action(gate, Position::One);
        let (_, collapsed) = collapsed_state(StateLabel::A, truth, p1).expect("possible outcome");
        let owners = sorted(bell_decompose(&collapsed, (BellPair::P2, BellPair::P3)).expect("uniform"));
        let expected = BellProductExpr {
            pairing: (BellPair::P2, BellPair::P3),
            entries: printed_form
                .iter()
                .map(|&(first, second)| BellEntry {
                    first,
                    second,
                    sign: Sign::Plus,
                })
                .collect(),
            norm_exponent: owners.norm_exponent,
        };
        b.step(&format!("{gate}1 with P1 {p1}: collapsed in (2,5),(3,4)"), &owners);
        b.check(
            &format!("{gate}1 with P1 {p1}: collapsed equals {expected} up to sign"),
            true,
            owners.same_structure(&sorted(expected.clone())),
        );

        let p2 = BellOutcome::AlphaPlus;
        let encoded = Statevector::prepare(StateLabel::A).apply_gate(gate, Position::One.qubit());
        let mut gates = BTreeSet::new();
        for p3 in BellOutcome::ALL {
            let d = Disclosures {
                p2,
                p3,
                state: StateLabel::A,
                p1,
                position: Position::One,
            };
            let (prob, _) = branch(&encoded, [p1, p2, p3]);
            let outcome = reconstruct_disclosures(&d).outcome;
            b.step(
                &format!("{gate}1, P2 {p2}, guess P3 {p3} (p = {prob})"),
                describe(&outcome),
            );
            if let Ok(r) = outcome {
                gates.insert(r.action.gate);
            }
            if announcements.is_empty() {
                announcements = d.to_announcements();
                announcements.remove(1);
            }
        }
        let names: Vec<&str> = gates.iter().map(|g| g.name()).collect();
        b.step(&format!("{gate}1 consistent gates"), names.join(", "));
        b.check(&format!("{gate}1 ambiguity at least 2"), true, gates.len() >= 2);
        sizes.push(gates.len());
    }
    let observed = format!(
        "consistent gate counts {}",
        sizes.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(", ")
    );
    b.finish(
        "no-collusion",
        announcements,
        "at least 2 consistent gates in each case".into(),
        observed,
    )
}

/// Outcome of the eavesdropping run, shared by the scenario and tests.
pub struct EveRun {
    pub modified: Statevector,
    pub probability: f64,
    pub collapsed: SymbolicState,
    pub honest: ReconTrace,
    pub counterfactual: ReconTrace,
}

pub fn eve_run() -> EveRun {
    let prepared = Statevector::prepare(StateLabel::A);
    let modified = prepared
        .apply_gate(PauliGate::Z, Qubit::of(1))
        .apply_gate(PauliGate::X, Qubit::of(6));
    let outcomes = [BellOutcome::AlphaPlus, BellOutcome::BetaMinus, BellOutcome::BetaPlus];
    let (probability, _) = branch(&modified, outcomes);
    let after_p1 = modified
        .bell_probabilities(BellPair::P1)
        .get(outcomes[0])
        .post_state
        .clone()
        .expect("possible outcome");
    let collapsed = SymbolicState::from_statevector(&after_p1)
        .and_then(|s| s.project_out(&bell_terms(outcomes[0], BellPair::P1)))
        .expect("uniform state");
    let d = Disclosures {
        p2: outcomes[1],
        p3: outcomes[2],
        state: StateLabel::A,
        p1: outcomes[0],
        position: Position::One,
    };
    EveRun {
        modified,
        probability,
        collapsed,
        honest: reconstruct_disclosures(&d),
        counterfactual: reconstruct_disclosures(&Disclosures {
            position: Position::Six,
            ..d
        }),
    }
}

/// True (A, Z₁), Eve applies X to qubit 6 in transit.
pub fn scenario_eve_intercept() -> ScenarioReport {
    let mut b = ReportBuilder::default();
    let run = eve_run();
    let intercepted = SymbolicState::parse(QubitSet::ALL, "+000001 +000110 -111001 -111110", 2).expect("valid");
    let intercepted_vec = to_statevector(&intercepted).expect("nonempty");
    b.step("modified state", &intercepted);
    b.check(
        "modified state",
        true,
        run.modified.global_phase_equal(&intercepted_vec, TOLERANCE),
    );
    b.check("branch is possible", true, run.probability > TOLERANCE);
    b.step("branch probability", run.probability);

    let owners = sorted(bell_decompose(&run.collapsed, (BellPair::P2, BellPair::P3)).expect("uniform"));
    b.check("collapsed after P1", "b+(2,5)b-(3,4) + b-(2,5)b+(3,4)", &owners);
    let h = &run.honest;
    b.check("P2 x P3 expansion", "+|0011> +|0101> -|1010> -|1100>", &h.measured);
    b.check("after support filter", "+|0011> -|1100>", &h.support.kept);
    let attached = h.attached.as_ref().map(ToString::to_string).unwrap_or_default();
    b.check("with P1 attached", "+|000110> -|011000> +|100111> -|111001>", &attached);
    let kept = h.untouched.as_ref().map(|u| u.kept.to_string()).unwrap_or_default();
    b.check("after untouched filter", "-|011000> +|100111>", &kept);

    let observed_action = describe_action(&h.outcome);
    b.check("deduction", "(iY,1)", &observed_action);
    let tamper = h
        .outcome
        .as_ref()
        .ok()
        .and_then(|r| r.tamper.as_ref())
        .map(|t| {
            let qubits: Vec<String> = t.flipped_qubits.iter().map(ToString::to_string).collect();
            format!("qubit {} gate {}", qubits.join(","), t.hypothesized_gate)
        })
        .unwrap_or_else(|| "none".to_string());
    b.step(
        "probability of these outcomes in an honest (A, iY1) round",
        h.honest_probability,
    );
    b.check("tamper report", "qubit 6 gate X", &tamper);

    let c = &run.counterfactual;
    let kept6 = c.untouched.as_ref().map(|u| u.kept.to_string()).unwrap_or_default();
    b.step("position 6 announced: kept", &kept6);
    let counter = describe_action(&c.outcome);
    b.check("deduction with position 6 announced", "(X,6)", &counter);

    b.finish(
        "eve-intercept",
        h.disclosures.to_announcements(),
        "(iY,1), tamper qubit 6 gate X; counterfactual (X,6)".into(),
        format!("{observed_action}, tamper {tamper}; counterfactual {counter}"),
    )
}
