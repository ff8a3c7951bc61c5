//! Dense statevector engine for the six shared qubits.
//!
//! Basis index `i` encodes the string `q1q2q3q4q5q6` with q1 as the most
//! significant bit, so `|011000>` lives at index 24. Qubits are addressed by
//! their 1-based labels throughout.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const NUM_QUBITS: u8 = 6;
pub const DIM: usize = 1 << NUM_QUBITS;

/// Absolute tolerance for every numeric equality in the crate.
pub const TOLERANCE: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("qubit label {0} is outside 1..=6")]
    Qubit(u8),
    #[error("bell pair ({0},{1}) must name two distinct qubits")]
    Pair(u8, u8),
    #[error("unknown {kind} `{value}`")]
    Unknown { kind: &'static str, value: String },
}

fn unknown(kind: &'static str, value: &str) -> ParseError {
    ParseError::Unknown {
        kind,
        value: value.to_owned(),
    }
}

/// One of the six qubit labels `1..=6`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Qubit(u8);

impl Qubit {
    pub const fn new(label: u8) -> Result<Self, ParseError> {
        if label >= 1 && label <= NUM_QUBITS {
            Ok(Self(label))
        } else {
            Err(ParseError::Qubit(label))
        }
    }

    /// Panicking constructor for labels known at compile time.
    pub const fn of(label: u8) -> Self {
        assert!(label >= 1 && label <= NUM_QUBITS, "qubit label out of range");
        Self(label)
    }

    pub const fn label(self) -> u8 {
        self.0
    }

    /// Bit of this qubit inside a basis index.
    pub const fn mask(self) -> u8 {
        1 << (NUM_QUBITS - self.0)
    }

    pub fn all() -> impl Iterator<Item = Qubit> {
        (1..=NUM_QUBITS).map(Qubit)
    }
}

impl TryFrom<u8> for Qubit {
    type Error = ParseError;

    fn try_from(label: u8) -> Result<Self, Self::Error> {
        Self::new(label)
    }
}

impl From<Qubit> for u8 {
    fn from(q: Qubit) -> u8 {
        q.0
    }
}

impl fmt::Display for Qubit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The four single-qubit gates the dealer may apply. All are real.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PauliGate {
    I,
    X,
    /// `i·Y`: |0> -> -|1>, |1> -> |0>.
    #[serde(rename = "iY")]
    IY,
    Z,
}

impl PauliGate {
    pub const ALL: [PauliGate; 4] = [PauliGate::I, PauliGate::X, PauliGate::IY, PauliGate::Z];

    /// Matrix as `m[out][in]`.
    pub const fn matrix(self) -> [[f64; 2]; 2] {
        match self {
            PauliGate::I => [[1.0, 0.0], [0.0, 1.0]],
            PauliGate::X => [[0.0, 1.0], [1.0, 0.0]],
            PauliGate::IY => [[0.0, 1.0], [-1.0, 0.0]],
            PauliGate::Z => [[1.0, 0.0], [0.0, -1.0]],
        }
    }

    /// Image of a basis bit as `(new_bit, negated)`. Every gate here maps
    /// basis states to signed basis states.
    pub const fn act(self, bit: bool) -> (bool, bool) {
        match self {
            PauliGate::I => (bit, false),
            PauliGate::X => (!bit, false),
            PauliGate::IY => (!bit, !bit),
            PauliGate::Z => (bit, bit),
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            PauliGate::I => "I",
            PauliGate::X => "X",
            PauliGate::IY => "iY",
            PauliGate::Z => "Z",
        }
    }
}

impl fmt::Display for PauliGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PauliGate {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "I" => Ok(PauliGate::I),
            "X" => Ok(PauliGate::X),
            "iY" | "IY" | "iy" => Ok(PauliGate::IY),
            "Z" => Ok(PauliGate::Z),
            _ => Err(unknown("gate", s)),
        }
    }
}

/// Label of one of the four GHZ product states the dealer can prepare.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StateLabel {
    A,
    B,
    C,
    D,
}

impl StateLabel {
    pub const ALL: [StateLabel; 4] = [StateLabel::A, StateLabel::B, StateLabel::C, StateLabel::D];

    /// The two complementary 3-bit strings of each GHZ half, most
    /// significant bit first (qubit 1 resp. qubit 4).
    pub const fn half_support(self) -> [u8; 2] {
        match self {
            StateLabel::A => [0b000, 0b111],
            StateLabel::B => [0b001, 0b110],
            StateLabel::C => [0b011, 0b100],
            StateLabel::D => [0b101, 0b010],
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            StateLabel::A => "A",
            StateLabel::B => "B",
            StateLabel::C => "C",
            StateLabel::D => "D",
        }
    }
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StateLabel {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "A" | "a" => Ok(StateLabel::A),
            "B" | "b" => Ok(StateLabel::B),
            "C" | "c" => Ok(StateLabel::C),
            "D" | "d" => Ok(StateLabel::D),
            _ => Err(unknown("state label", s)),
        }
    }
}

/// An ordered pair of distinct qubits; `first` is the left qubit of the
/// Bell kets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "[u8; 2]", into = "[u8; 2]")]
pub struct BellPair {
    first: Qubit,
    second: Qubit,
}

impl BellPair {
    /// Pair held by P1.
    pub const P1: BellPair = BellPair::of(1, 6);
    /// Pair held by P2.
    pub const P2: BellPair = BellPair::of(2, 5);
    /// Pair held by P3.
    pub const P3: BellPair = BellPair::of(3, 4);

    pub const fn new(first: Qubit, second: Qubit) -> Result<Self, ParseError> {
        if first.0 == second.0 {
            Err(ParseError::Pair(first.0, second.0))
        } else {
            Ok(Self { first, second })
        }
    }

    pub const fn of(first: u8, second: u8) -> Self {
        assert!(first != second, "degenerate bell pair");
        Self {
            first: Qubit::of(first),
            second: Qubit::of(second),
        }
    }

    pub const fn first(self) -> Qubit {
        self.first
    }

    pub const fn second(self) -> Qubit {
        self.second
    }

    pub const fn mask(self) -> u8 {
        self.first.mask() | self.second.mask()
    }

    pub const fn is_disjoint(self, other: BellPair) -> bool {
        self.mask() & other.mask() == 0
    }
}

impl TryFrom<[u8; 2]> for BellPair {
    type Error = ParseError;

    fn try_from([a, b]: [u8; 2]) -> Result<Self, Self::Error> {
        Self::new(Qubit::new(a)?, Qubit::new(b)?)
    }
}

impl From<BellPair> for [u8; 2] {
    fn from(p: BellPair) -> [u8; 2] {
        [p.first.0, p.second.0]
    }
}

impl fmt::Display for BellPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.first, self.second)
    }
}

/// Bell basis element. `alpha± = (|00> ± |11>)/√2`,
/// `beta± = (|01> ± |10>)/√2`, pair's first qubit leftmost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BellOutcome {
    #[serde(rename = "a+")]
    AlphaPlus,
    #[serde(rename = "a-")]
    AlphaMinus,
    #[serde(rename = "b+")]
    BetaPlus,
    #[serde(rename = "b-")]
    BetaMinus,
}

impl BellOutcome {
    pub const ALL: [BellOutcome; 4] = [
        BellOutcome::AlphaPlus,
        BellOutcome::AlphaMinus,
        BellOutcome::BetaPlus,
        BellOutcome::BetaMinus,
    ];

    /// Unnormalized ket coefficient (`±1` or `0`) on `|first second>`.
    pub const fn coefficient(self, first: bool, second: bool) -> i8 {
        match self {
            BellOutcome::AlphaPlus if first == second => 1,
            BellOutcome::AlphaMinus if first == second => {
                if first {
                    -1
                } else {
                    1
                }
            }
            BellOutcome::BetaPlus if first != second => 1,
            BellOutcome::BetaMinus if first != second => {
                if first {
                    -1
                } else {
                    1
                }
            }
            _ => 0,
        }
    }

    pub const fn ascii(self) -> &'static str {
        match self {
            BellOutcome::AlphaPlus => "a+",
            BellOutcome::AlphaMinus => "a-",
            BellOutcome::BetaPlus => "b+",
            BellOutcome::BetaMinus => "b-",
        }
    }

    pub const fn symbol(self) -> &'static str {
        match self {
            BellOutcome::AlphaPlus => "α⁺",
            BellOutcome::AlphaMinus => "α⁻",
            BellOutcome::BetaPlus => "β⁺",
            BellOutcome::BetaMinus => "β⁻",
        }
    }
}

impl fmt::Display for BellOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.ascii())
    }
}

impl FromStr for BellOutcome {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "a+" | "α⁺" => Ok(BellOutcome::AlphaPlus),
            "a-" | "α⁻" => Ok(BellOutcome::AlphaMinus),
            "b+" | "β⁺" => Ok(BellOutcome::BetaPlus),
            "b-" | "β⁻" => Ok(BellOutcome::BetaMinus),
            _ => Err(unknown("bell outcome", s)),
        }
    }
}

/// Seeded, platform-independent random source (ChaCha8).
#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn unit(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `0..n` for a power-of-two `n`.
    pub fn below_pow2(&mut self, n: u64) -> u64 {
        assert!(n.is_power_of_two(), "n must be a power of two");
        self.inner.next_u64() & (n - 1)
    }
}

/// Renders a basis index as its `q1..q6` bit string.
pub fn basis_string(index: usize) -> String {
    format!("{:06b}", index)
}

/// Parses a six-character bit string into a basis index.
pub fn parse_basis(bits: &str) -> Option<usize> {
    if bits.len() != NUM_QUBITS as usize || !bits.bytes().all(|b| b == b'0' || b == b'1') {
        return None;
    }
    usize::from_str_radix(bits, 2).ok()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    amps: [Complex64; DIM],
}

impl Statevector {
    pub fn basis(index: usize) -> Self {
        let mut amps = [ZERO; DIM];
        amps[index] = Complex64::new(1.0, 0.0);
        Self { amps }
    }

    /// Normalizes `amps`; `None` for the zero vector.
    pub fn from_unnormalized(mut amps: [Complex64; DIM]) -> Option<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm <= TOLERANCE {
            return None;
        }
        for a in &mut amps {
            *a /= norm;
        }
        Some(Self { amps })
    }

    /// The GHZ product state with the given label: four amplitudes of +1/2.
    pub fn prepare(label: StateLabel) -> Self {
        let mut amps = [ZERO; DIM];
        for lo in label.half_support() {
            for hi in label.half_support() {
                amps[((hi << 3) | lo) as usize] = Complex64::new(0.5, 0.0);
            }
        }
        Self { amps }
    }

    pub fn amplitudes(&self) -> &[Complex64; DIM] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Basis indices with nonzero amplitude, ascending.
    pub fn support(&self) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        self.amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > TOLERANCE)
            .map(|(i, a)| (i, *a))
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let mut amps = self.amps;
        for a in &mut amps {
            *a *= c;
        }
        Self { amps }
    }

    pub fn apply_gate(&self, gate: PauliGate, q: Qubit) -> Self {
        let m = gate.matrix();
        let mask = q.mask() as usize;
        let mut out = [ZERO; DIM];
        for i0 in (0..DIM).filter(|i| i & mask == 0) {
            let i1 = i0 | mask;
            let (a0, a1) = (self.amps[i0], self.amps[i1]);
            out[i0] = a0 * m[0][0] + a1 * m[0][1];
            out[i1] = a0 * m[1][0] + a1 * m[1][1];
        }
        Self { amps: out }
    }

    /// Born-rule distribution of a Bell measurement on `pair`, with the
    /// normalized post-measurement state of every possible outcome.
    pub fn bell_probabilities(&self, pair: BellPair) -> BellDistribution {
        let (ma, mb) = (pair.first.mask() as usize, pair.second.mask() as usize);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let corners = [(false, false), (false, true), (true, false), (true, true)];
        let branches = BellOutcome::ALL.map(|outcome| {
            let mut projected = [ZERO; DIM];
            for base in (0..DIM).filter(|i| i & (ma | mb) == 0) {
                let index = |x: bool, y: bool| base | if x { ma } else { 0 } | if y { mb } else { 0 };
                let overlap: Complex64 = corners
                    .iter()
                    .map(|&(x, y)| self.amps[index(x, y)] * (h * f64::from(outcome.coefficient(x, y))))
                    .sum();
                for &(x, y) in &corners {
                    projected[index(x, y)] = overlap * (h * f64::from(outcome.coefficient(x, y)));
                }
            }
            let probability: f64 = projected.iter().map(|a| a.norm_sqr()).sum();
            if probability <= TOLERANCE {
                BellBranch {
                    outcome,
                    probability: 0.0,
                    post_state: None,
                }
            } else {
                BellBranch {
                    outcome,
                    probability,
                    post_state: Statevector::from_unnormalized(projected),
                }
            }
        });
        BellDistribution { pair, branches }
    }

    /// Samples a Bell measurement on `pair`.
    pub fn measure_bell(&self, pair: BellPair, rng: &mut SeededRng) -> (BellOutcome, Statevector) {
        let dist = self.bell_probabilities(pair);
        let u = rng.unit();
        let mut acc = 0.0;
        let mut chosen = None;
        for branch in dist.possible() {
            acc += branch.probability;
            chosen = Some(branch);
            if u < acc {
                break;
            }
        }
        let branch = chosen.expect("a normalized state has at least one possible outcome");
        let post = branch.post_state.clone().expect("possible branch carries a state");
        (branch.outcome, post)
    }

    /// True iff `‖self − c·other‖ ≤ tol` for some unit complex `c`.
    pub fn global_phase_equal(&self, other: &Statevector, tol: f64) -> bool {
        let inner: Complex64 = self.amps.iter().zip(other.amps.iter()).map(|(a, b)| b.conj() * a).sum();
        if inner.norm() <= TOLERANCE {
            return false;
        }
        let phase = inner / inner.norm();
        let dist = self
            .amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| (a - phase * b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        dist <= tol
    }
}

impl fmt::Display for Statevector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, a) in self.support() {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            if a.im.abs() <= TOLERANCE {
                write!(f, "{:+.4}|{}>", a.re, basis_string(i))?;
            } else {
                write!(f, "({:.4}{:+.4}i)|{}>", a.re, a.im, basis_string(i))?;
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BellBranch {
    pub outcome: BellOutcome,
    pub probability: f64,
    /// `None` exactly when the outcome is impossible.
    pub post_state: Option<Statevector>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BellDistribution {
    pub pair: BellPair,
    pub branches: [BellBranch; 4],
}

impl BellDistribution {
    pub fn get(&self, outcome: BellOutcome) -> &BellBranch {
        &self.branches[outcome as usize]
    }

    /// Outcomes with positive probability, in `BellOutcome::ALL` order.
    pub fn possible(&self) -> impl Iterator<Item = &BellBranch> {
        self.branches.iter().filter(|b| b.post_state.is_some())
    }

    pub fn total(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }
}
