//! The (3,3) sharing round: secret encoding, dealer preparation, the three
//! Bell measurements and the announcement transcript.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::recon::{self, ReconError, ReconstructionResult};
use crate::statevector::{BellOutcome, BellPair, ParseError, PauliGate, Qubit, SeededRng, StateLabel, Statevector};

/// A two-bit classical secret such as `"10"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SecretBits(u8);

impl SecretBits {
    pub const ALL: [SecretBits; 4] = [SecretBits(0), SecretBits(1), SecretBits(2), SecretBits(3)];

    /// `value` in `0..4`, first character most significant.
    pub const fn new(value: u8) -> Option<Self> {
        if value < 4 {
            Some(Self(value))
        } else {
            None
        }
    }

    pub const fn value(self) -> u8 {
        self.0
    }
}

impl FromStr for SecretBits {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "00" => Ok(Self(0)),
            "01" => Ok(Self(1)),
            "10" => Ok(Self(2)),
            "11" => Ok(Self(3)),
            _ => Err(ParseError::Unknown {
                kind: "secret",
                value: s.to_owned(),
            }),
        }
    }
}

impl TryFrom<String> for SecretBits {
    type Error = ParseError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<SecretBits> for String {
    fn from(b: SecretBits) -> String {
        b.to_string()
    }
}

impl fmt::Display for SecretBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02b}", self.0)
    }
}

/// Qubit the dealer toggles: 1 or 6.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Position {
    One,
    Six,
}

impl Position {
    pub const ALL: [Position; 2] = [Position::One, Position::Six];

    pub const fn qubit(self) -> Qubit {
        match self {
            Position::One => Qubit::of(1),
            Position::Six => Qubit::of(6),
        }
    }

    /// Qubits of the GHZ half containing the toggled qubit.
    pub const fn toggled_half(self) -> [Qubit; 3] {
        match self {
            Position::One => [Qubit::of(1), Qubit::of(2), Qubit::of(3)],
            Position::Six => [Qubit::of(4), Qubit::of(5), Qubit::of(6)],
        }
    }

    /// Qubits of the other half.
    pub const fn untouched_half(self) -> [Qubit; 3] {
        match self {
            Position::One => [Qubit::of(4), Qubit::of(5), Qubit::of(6)],
            Position::Six => [Qubit::of(1), Qubit::of(2), Qubit::of(3)],
        }
    }
}

impl TryFrom<u8> for Position {
    type Error = ParseError;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            1 => Ok(Position::One),
            6 => Ok(Position::Six),
            _ => Err(ParseError::Unknown {
                kind: "position",
                value: v.to_string(),
            }),
        }
    }
}

impl From<Position> for u8 {
    fn from(p: Position) -> u8 {
        p.qubit().label()
    }
}

impl FromStr for Position {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "1" => Ok(Position::One),
            "6" => Ok(Position::Six),
            _ => Err(ParseError::Unknown {
                kind: "position",
                value: s.to_owned(),
            }),
        }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.qubit())
    }
}

/// The dealer's gate and the qubit it acts on; carries the secret.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GateAction {
    pub gate: PauliGate,
    pub position: Position,
}

impl fmt::Display for GateAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.gate, self.position)
    }
}

// Indexed by secret value; position 6 is the position-1 table reversed.
const POSITION_ONE: [PauliGate; 4] = [PauliGate::I, PauliGate::X, PauliGate::Z, PauliGate::IY];
const POSITION_SIX: [PauliGate; 4] = [PauliGate::IY, PauliGate::Z, PauliGate::X, PauliGate::I];

const fn table(position: Position) -> &'static [PauliGate; 4] {
    match position {
        Position::One => &POSITION_ONE,
        Position::Six => &POSITION_SIX,
    }
}

pub fn encode_secret(bits: SecretBits, position: Position) -> GateAction {
    GateAction {
        gate: table(position)[bits.0 as usize],
        position,
    }
}

pub fn decode_secret(action: GateAction) -> SecretBits {
    let index = table(action.position)
        .iter()
        .position(|&g| g == action.gate)
        .expect("every gate appears once per position");
    SecretBits(index as u8)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Party {
    Dealer,
    P1,
    P2,
    P3,
}

impl Party {
    pub const fn owned_pair(self) -> Option<BellPair> {
        match self {
            Party::Dealer => None,
            Party::P1 => Some(BellPair::P1),
            Party::P2 => Some(BellPair::P2),
            Party::P3 => Some(BellPair::P3),
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Party::Dealer => "D",
            Party::P1 => "P1",
            Party::P2 => "P2",
            Party::P3 => "P3",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Announcement {
    Measurement {
        party: Party,
        pair: BellPair,
        outcome: BellOutcome,
    },
    DealerState {
        state: StateLabel,
    },
    DealerPosition {
        position: Position,
    },
}

impl Announcement {
    /// A measurement announcement on the party's own pair.
    pub fn measurement(party: Party, outcome: BellOutcome) -> Self {
        let pair = party.owned_pair().expect("the dealer holds no qubits");
        Announcement::Measurement { party, pair, outcome }
    }
}

impl fmt::Display for Announcement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Announcement::Measurement { party, pair, outcome } => write!(f, "{party}: {outcome}{pair}"),
            Announcement::DealerState { state } => write!(f, "D: state {state}"),
            Announcement::DealerPosition { position } => write!(f, "D: position {position}"),
        }
    }
}

/// Ground truth kept next to the announcements for verification only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TrueConfig {
    pub state: StateLabel,
    #[serde(flatten)]
    pub action: GateAction,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Transcript {
    pub seed: u64,
    pub true_config: TrueConfig,
    pub announcements: Vec<Announcement>,
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Transcript {
    /// Canonical structured form (pretty JSON, fixed key order).
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transcripts always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, FormatError> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Every intermediate state of one simulated round.
#[derive(Debug, Clone)]
pub struct ProtocolRun {
    pub transcript: Transcript,
    pub prepared: Statevector,
    pub encoded: Statevector,
    pub after_p1: Statevector,
    pub after_p2: Statevector,
    pub final_state: Statevector,
}

/// Simulates one round. `None` picks the label or position uniformly with
/// the seeded source; draws happen in the order label, position, then the
/// P1, P2, P3 measurements.
pub fn simulate(label: Option<StateLabel>, bits: SecretBits, position: Option<Position>, seed: u64) -> ProtocolRun {
    let mut rng = SeededRng::new(seed);
    let label = label.unwrap_or_else(|| StateLabel::ALL[rng.below_pow2(4) as usize]);
    let position = position.unwrap_or_else(|| Position::ALL[rng.below_pow2(2) as usize]);
    let action = encode_secret(bits, position);

    let prepared = Statevector::prepare(label);
    let encoded = prepared.apply_gate(action.gate, action.position.qubit());
    let (p1, after_p1) = encoded.measure_bell(BellPair::P1, &mut rng);
    let (p2, after_p2) = after_p1.measure_bell(BellPair::P2, &mut rng);
    let (p3, final_state) = after_p2.measure_bell(BellPair::P3, &mut rng);

    let announcements = vec![
        Announcement::measurement(Party::P2, p2),
        Announcement::measurement(Party::P3, p3),
        Announcement::DealerState { state: label },
        Announcement::measurement(Party::P1, p1),
        Announcement::DealerPosition { position },
    ];
    ProtocolRun {
        transcript: Transcript {
            seed,
            true_config: TrueConfig { state: label, action },
            announcements,
        },
        prepared,
        encoded,
        after_p1,
        after_p2,
        final_state,
    }
}

pub fn run_protocol(label: Option<StateLabel>, bits: SecretBits, position: Option<Position>, seed: u64) -> Transcript {
    simulate(label, bits, position, seed).transcript
}

/// Reconstructs from the announcements alone; `true_config` is not read.
pub fn replay(transcript: &Transcript) -> Result<ReconstructionResult, ReconError> {
    recon::reconstruct(&transcript.announcements)
}
