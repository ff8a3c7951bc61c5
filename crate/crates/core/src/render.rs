//! Text and structured renderings shared by the CLI and the web demo.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::harness::{RowVerdict, ScenarioReport, TableReport, VerifyReport};
use crate::protocol::{replay, Transcript};
use crate::recon::ReconstructionResult;

/// A transcript together with its replayed reconstruction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub transcript: Transcript,
    pub reconstruction: Option<ReconstructionResult>,
    pub error: Option<String>,
}

impl RunReport {
    pub fn new(transcript: Transcript) -> Self {
        let (reconstruction, error) = match replay(&transcript) {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        };
        Self {
            transcript,
            reconstruction,
            error,
        }
    }

    /// The reconstructed secret equals the one the dealer encoded.
    pub fn correct(&self) -> bool {
        self.reconstruction
            .as_ref()
            .is_some_and(|r| r.action == self.transcript.true_config.action)
    }
}

/// Pretty JSON with declaration-order keys.
pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data serializes")
}

pub fn run_text(report: &RunReport) -> String {
    let t = &report.transcript;
    let mut out = String::new();
    let truth = &t.true_config;
    let _ = writeln!(out, "seed {}", t.seed);
    let _ = writeln!(
        out,
        "dealer: state {}, gate {} (secret \"{}\")",
        truth.state,
        truth.action,
        crate::protocol::decode_secret(truth.action)
    );
    out.push_str("announcements:\n");
    for (i, a) in t.announcements.iter().enumerate() {
        let _ = writeln!(out, "  {}. {a}", i + 1);
    }
    match (&report.reconstruction, &report.error) {
        (Some(r), _) => {
            let _ = writeln!(out, "reconstructed: {} -> secret \"{}\"", r.action, r.secret);
            match &r.tamper {
                Some(tamper) => {
                    let qubits: Vec<String> = tamper.flipped_qubits.iter().map(ToString::to_string).collect();
                    let _ = writeln!(
                        out,
                        "tamper: bit flip on qubit {}, gate {}",
                        qubits.join(","),
                        tamper.hypothesized_gate
                    );
                }
                None => out.push_str("tamper: none\n"),
            }
        }
        (None, Some(e)) => {
            let _ = writeln!(out, "reconstruction failed: {e}");
        }
        (None, None) => {}
    }
    out
}

pub fn verify_text(report: &VerifyReport) -> String {
    let s = &report.summary;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} configurations, {} branches, {} failures",
        s.configurations, s.branches, s.failures
    );
    let _ = writeln!(out, "  secret mismatches:        {}", s.secret_failures);
    let _ = writeln!(out, "  probability violations:   {}", s.probability_failures);
    let _ = writeln!(out, "  oracle disagreements:     {}", s.agreement_failures);
    let _ = writeln!(out, "  tamper false positives:   {}", s.tamper_false_positives);
    let _ = writeln!(out, "  ambiguous deductions:     {}", s.ambiguous);
    let _ = writeln!(out, "  unnormalized configs:     {}", s.unnormalized_configurations);
    for b in report.branches.iter().filter(|b| !b.pass) {
        let _ = writeln!(
            out,
            "  FAIL {} {} P1 {} P2 {} P3 {}: {:?}",
            b.state, b.action, b.p1, b.p2, b.p3, b.checks
        );
    }
    out
}

pub fn table_text(report: &TableReport) -> String {
    let mut out = String::new();
    for r in &report.rows {
        let flag = match r.verdict {
            RowVerdict::Match => "match",
            RowVerdict::SubscriptTypo => "FLAG subscripts",
            RowVerdict::Mismatch => "MISMATCH",
        };
        let _ = writeln!(out, "{}1  P1 {}  [{flag}]", r.gate, r.p1);
        let _ = writeln!(out, "    q2345:        {}", r.collapsed);
        let _ = writeln!(out, "    printed:      {}", r.printed);
        let _ = writeln!(out, "    (2,3),(4,5):  {}", r.oracle_23_45);
        let _ = writeln!(out, "    (2,5),(3,4):  {}", r.oracle_25_34);
    }
    let _ = writeln!(
        out,
        "{} rows: {} match, {} flagged, {} mismatched",
        report.rows.len(),
        report.matched,
        report.flagged,
        report.mismatched
    );
    out
}

pub fn scenario_text(report: &ScenarioReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario {}", report.name);
    out.push_str("announcements:\n");
    for a in &report.announcements {
        let _ = writeln!(out, "  {a}");
    }
    for s in &report.steps {
        let _ = writeln!(out, "  {}: {}", s.label, s.value);
    }
    for c in &report.checks {
        let mark = if c.pass { "ok  " } else { "FAIL" };
        let _ = writeln!(
            out,
            "  [{mark}] {}: expected {}, observed {}",
            c.name, c.expected, c.observed
        );
    }
    let _ = writeln!(out, "expected: {}", report.expected);
    let _ = writeln!(out, "observed: {}", report.observed);
    let _ = writeln!(out, "verdict: {}", if report.verdict { "pass" } else { "fail" });
    out
}
