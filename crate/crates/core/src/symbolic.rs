//! Exact algebra over signed computational-basis terms.
//!
//! A [`SymbolicState`] is `2^(-k/2) · Σ ±|bits>` over a declared set of
//! qubits. Every state in the protocol has this shape: the gates are real
//! signed permutations and the Bell kets have `±1/√2` entries. Arithmetic is
//! done on integer coefficients and renormalized, so nothing is rounded.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Mul, Neg};

use num_complex::Complex64;
use thiserror::Error;

use crate::statevector::{
    BellOutcome, BellPair, PauliGate, Qubit, StateLabel, Statevector, DIM, NUM_QUBITS, TOLERANCE,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymbolicError {
    #[error("operands share qubits {0}")]
    OverlappingQubits(QubitSet),
    #[error("all terms cancelled")]
    EmptyState,
    #[error("coefficients are not a uniform signed power of √2")]
    NonUniformCoefficients,
    #[error("state is not a uniform sum of Bell products: {0}")]
    NotBellExpressible(&'static str),
    #[error("pairing {0} and {1} does not cover qubits {2}")]
    PairingMismatch(BellPair, BellPair, QubitSet),
    #[error("expected a state over {expected}, got {found}")]
    WrongQubits { expected: QubitSet, found: QubitSet },
    #[error("malformed term `{0}`")]
    MalformedTerm(String),
}

/// Set of qubits, stored with the same bit layout as a basis index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct QubitSet(u8);

impl QubitSet {
    pub const EMPTY: QubitSet = QubitSet(0);
    pub const ALL: QubitSet = QubitSet((1 << NUM_QUBITS) - 1);

    pub fn of(qubits: &[u8]) -> Self {
        qubits.iter().map(|&q| Qubit::of(q)).collect()
    }

    pub const fn mask(self) -> u8 {
        self.0
    }

    pub const fn contains(self, q: Qubit) -> bool {
        self.0 & q.mask() != 0
    }

    pub const fn is_disjoint(self, other: QubitSet) -> bool {
        self.0 & other.0 == 0
    }

    pub const fn union(self, other: QubitSet) -> QubitSet {
        QubitSet(self.0 | other.0)
    }

    pub const fn intersection(self, other: QubitSet) -> QubitSet {
        QubitSet(self.0 & other.0)
    }

    pub const fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Members in ascending label order.
    pub fn iter(self) -> impl Iterator<Item = Qubit> {
        Qubit::all().filter(move |q| self.contains(*q))
    }
}

impl FromIterator<Qubit> for QubitSet {
    fn from_iter<I: IntoIterator<Item = Qubit>>(iter: I) -> Self {
        QubitSet(iter.into_iter().fold(0, |m, q| m | q.mask()))
    }
}

impl From<BellPair> for QubitSet {
    fn from(pair: BellPair) -> Self {
        QubitSet(pair.mask())
    }
}

impl fmt::Display for QubitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("q")?;
        for q in self.iter() {
            write!(f, "{q}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const fn from_negated(negated: bool) -> Self {
        if negated {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub const fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub const fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

impl Neg for Sign {
    type Output = Sign;

    fn neg(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        Sign::from_negated(self != rhs)
    }
}

/// A signed computational-basis ket over a declared qubit set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Term {
    qubits: QubitSet,
    bits: u8,
    sign: Sign,
}

impl Term {
    /// `bits` uses basis-index layout; bits outside `qubits` must be clear.
    pub fn new(qubits: QubitSet, bits: u8, sign: Sign) -> Result<Self, SymbolicError> {
        if bits & !qubits.mask() != 0 {
            return Err(SymbolicError::MalformedTerm(format!("{bits:06b} outside {qubits}")));
        }
        Ok(Self { qubits, bits, sign })
    }

    /// Parses `"+0110"`-style text; digits are read in ascending qubit order.
    pub fn parse(qubits: QubitSet, text: &str) -> Result<Self, SymbolicError> {
        let malformed = || SymbolicError::MalformedTerm(text.to_owned());
        let (sign, digits) = match text.as_bytes().first() {
            Some(b'+') => (Sign::Plus, &text[1..]),
            Some(b'-') => (Sign::Minus, &text[1..]),
            _ => (Sign::Plus, text),
        };
        if digits.len() != qubits.len() as usize {
            return Err(malformed());
        }
        let mut bits = 0;
        for (q, d) in qubits.iter().zip(digits.bytes()) {
            match d {
                b'0' => {}
                b'1' => bits |= q.mask(),
                _ => return Err(malformed()),
            }
        }
        Ok(Self { qubits, bits, sign })
    }

    pub fn qubits(&self) -> QubitSet {
        self.qubits
    }

    pub fn bits(&self) -> u8 {
        self.bits
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn bit(&self, q: Qubit) -> bool {
        assert!(self.qubits.contains(q), "qubit {q} not in term over {}", self.qubits);
        self.bits & q.mask() != 0
    }

    /// Bits at `qubits`, first listed qubit most significant.
    pub fn restrict_bits(&self, qubits: &[Qubit]) -> u8 {
        qubits.iter().fold(0, |acc, &q| (acc << 1) | u8::from(self.bit(q)))
    }

    /// Bit string in ascending qubit order, without sign.
    pub fn bit_string(&self) -> String {
        self.qubits
            .iter()
            .map(|q| if self.bit(q) { '1' } else { '0' })
            .collect()
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{}>", self.sign.symbol(), self.bit_string())
    }
}

/// The term's bits read off at `qubits` in the given order; sign ignored.
pub fn restrict(term: &Term, qubits: &[Qubit]) -> String {
    qubits.iter().map(|&q| if term.bit(q) { '1' } else { '0' }).collect()
}

/// Canonical `2^(-k/2) · Σ ±|bits>`: terms sorted ascending by bit string,
/// no repeated bit assignments.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolicState {
    qubits: QubitSet,
    terms: Vec<Term>,
    norm_exponent: i32,
}

impl SymbolicState {
    /// The empty-qubit-set scalar `1`, identity of [`expand_product`].
    pub fn unit() -> Self {
        Self {
            qubits: QubitSet::EMPTY,
            terms: vec![Term {
                qubits: QubitSet::EMPTY,
                bits: 0,
                sign: Sign::Plus,
            }],
            norm_exponent: 0,
        }
    }

    /// Builds the canonical form, merging duplicate assignments.
    pub fn from_terms<I>(qubits: QubitSet, terms: I, norm_exponent: i32) -> Result<Self, SymbolicError>
    where
        I: IntoIterator<Item = Term>,
    {
        let mut coeffs = BTreeMap::new();
        for t in terms {
            if t.qubits != qubits {
                return Err(SymbolicError::WrongQubits {
                    expected: qubits,
                    found: t.qubits,
                });
            }
            *coeffs.entry(t.bits).or_insert(0) += t.sign.value();
        }
        Self::from_coefficients(qubits, coeffs, norm_exponent)
    }

    /// Parses whitespace-separated terms such as `"+0000 -1111"`.
    pub fn parse(qubits: QubitSet, text: &str, norm_exponent: i32) -> Result<Self, SymbolicError> {
        let terms = text
            .split_whitespace()
            .map(|t| Term::parse(qubits, t))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_terms(qubits, terms, norm_exponent)
    }

    /// Integer coefficients `c_b` meaning `2^(-k/2) Σ c_b |b>`. Nonzero
    /// coefficients must share one power-of-two magnitude, which is folded
    /// into the exponent. All-zero input gives a state with no terms.
    fn from_coefficients(
        qubits: QubitSet,
        coeffs: BTreeMap<u8, i64>,
        norm_exponent: i32,
    ) -> Result<Self, SymbolicError> {
        let nonzero: Vec<(u8, i64)> = coeffs.into_iter().filter(|&(_, c)| c != 0).collect();
        let Some(&(_, first)) = nonzero.first() else {
            return Ok(Self {
                qubits,
                terms: Vec::new(),
                norm_exponent,
            });
        };
        let magnitude = first.unsigned_abs();
        if !magnitude.is_power_of_two() || nonzero.iter().any(|&(_, c)| c.unsigned_abs() != magnitude) {
            return Err(SymbolicError::NonUniformCoefficients);
        }
        let terms = nonzero
            .into_iter()
            .map(|(bits, c)| Term {
                qubits,
                bits,
                sign: Sign::from_negated(c < 0),
            })
            .collect();
        Ok(Self {
            qubits,
            terms,
            norm_exponent: norm_exponent - 2 * magnitude.trailing_zeros() as i32,
        })
    }

    fn coefficients(&self) -> BTreeMap<u8, i64> {
        self.terms.iter().map(|t| (t.bits, t.sign.value())).collect()
    }

    pub fn qubits(&self) -> QubitSet {
        self.qubits
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn norm_exponent(&self) -> i32 {
        self.norm_exponent
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Same terms with a different overall factor.
    pub fn with_norm_exponent(mut self, norm_exponent: i32) -> Self {
        self.norm_exponent = norm_exponent;
        self
    }

    pub fn negated(&self) -> Self {
        let terms = self.terms.iter().map(|t| Term { sign: -t.sign, ..*t }).collect();
        Self { terms, ..self.clone() }
    }

    /// Subset of terms, keeping qubit set and normalization factor.
    pub fn filtered<F: FnMut(&Term) -> bool>(&self, mut keep: F) -> (Self, Self) {
        let (kept, dropped): (Vec<Term>, Vec<Term>) = self.terms.iter().partition(|t| keep(t));
        let part = |terms| Self {
            qubits: self.qubits,
            terms,
            norm_exponent: self.norm_exponent,
        };
        (part(kept), part(dropped))
    }

    /// Equal terms, or all signs flipped. Normalization is ignored.
    pub fn eq_up_to_sign(&self, other: &SymbolicState) -> bool {
        self.qubits == other.qubits && (self.terms == other.terms || self.negated().terms == other.terms)
    }

    pub fn apply_gate(&self, gate: PauliGate, q: Qubit) -> Result<Self, SymbolicError> {
        if !self.qubits.contains(q) {
            return Err(SymbolicError::WrongQubits {
                expected: QubitSet::from_iter([q]),
                found: self.qubits,
            });
        }
        let terms = self.terms.iter().map(|t| {
            let (bit, negated) = gate.act(t.bits & q.mask() != 0);
            Term {
                qubits: t.qubits,
                bits: (t.bits & !q.mask()) | if bit { q.mask() } else { 0 },
                sign: t.sign * Sign::from_negated(negated),
            }
        });
        Self::from_terms(self.qubits, terms.collect::<Vec<_>>(), self.norm_exponent)
    }

    /// Partial inner product `<factor| self>` over `factor`'s qubits; the
    /// result lives on the remaining qubits.
    pub fn project_out(&self, factor: &SymbolicState) -> Result<Self, SymbolicError> {
        if factor.qubits.intersection(self.qubits) != factor.qubits {
            return Err(SymbolicError::WrongQubits {
                expected: self.qubits,
                found: factor.qubits,
            });
        }
        let rest = QubitSet(self.qubits.mask() & !factor.qubits.mask());
        let mut coeffs = BTreeMap::new();
        for t in &self.terms {
            for f in &factor.terms {
                if t.bits & factor.qubits.mask() == f.bits {
                    *coeffs.entry(t.bits & rest.mask()).or_insert(0) += (t.sign * f.sign).value();
                }
            }
        }
        Self::from_coefficients(rest, coeffs, self.norm_exponent + factor.norm_exponent)
    }

    /// Exact conversion of a real statevector whose nonzero amplitudes share
    /// one magnitude. Used to lift oracle states into the term algebra.
    pub fn from_statevector(state: &Statevector) -> Result<Self, SymbolicError> {
        let support: Vec<_> = state.support().collect();
        let Some(&(_, first)) = support.first() else {
            return Err(SymbolicError::EmptyState);
        };
        let magnitude = first.norm();
        let mut terms = Vec::with_capacity(support.len());
        for (index, a) in support {
            if a.im.abs() > TOLERANCE || (a.re.abs() - magnitude).abs() > TOLERANCE {
                return Err(SymbolicError::NonUniformCoefficients);
            }
            terms.push(Term {
                qubits: QubitSet::ALL,
                bits: index as u8,
                sign: Sign::from_negated(a.re < 0.0),
            });
        }
        let n = terms.len();
        if !n.is_power_of_two() {
            return Err(SymbolicError::NonUniformCoefficients);
        }
        Self::from_terms(QubitSet::ALL, terms, n.trailing_zeros() as i32)
    }
}

impl fmt::Display for SymbolicState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// The two-term expansion of a Bell ket on `pair`.
pub fn bell_terms(outcome: BellOutcome, pair: BellPair) -> SymbolicState {
    let qubits = QubitSet::from(pair);
    let mut coeffs = BTreeMap::new();
    for x in [false, true] {
        for y in [false, true] {
            let c = outcome.coefficient(x, y);
            if c != 0 {
                let bits = if x { pair.first().mask() } else { 0 } | if y { pair.second().mask() } else { 0 };
                coeffs.insert(bits, i64::from(c));
            }
        }
    }
    SymbolicState::from_coefficients(qubits, coeffs, 1).expect("bell kets are uniform")
}

/// Distributive product of states over pairwise disjoint qubit sets.
pub fn expand_product<'a, I>(parts: I) -> Result<SymbolicState, SymbolicError>
where
    I: IntoIterator<Item = &'a SymbolicState>,
{
    let mut acc = SymbolicState::unit();
    for part in parts {
        let shared = acc.qubits.intersection(part.qubits);
        if !shared.is_empty() {
            return Err(SymbolicError::OverlappingQubits(shared));
        }
        let qubits = acc.qubits.union(part.qubits);
        let mut coeffs = BTreeMap::new();
        for a in &acc.terms {
            for b in &part.terms {
                *coeffs.entry(a.bits | b.bits).or_insert(0) += (a.sign * b.sign).value();
            }
        }
        acc = SymbolicState::from_coefficients(qubits, coeffs, acc.norm_exponent + part.norm_exponent)?;
    }
    Ok(acc)
}

/// Dense unit vector for a state over all six qubits.
pub fn to_statevector(state: &SymbolicState) -> Result<Statevector, SymbolicError> {
    if state.qubits != QubitSet::ALL {
        return Err(SymbolicError::WrongQubits {
            expected: QubitSet::ALL,
            found: state.qubits,
        });
    }
    let mut amps = [Complex64::new(0.0, 0.0); DIM];
    for t in &state.terms {
        amps[t.bits as usize] = Complex64::new(t.sign.value() as f64, 0.0);
    }
    Statevector::from_unnormalized(amps).ok_or(SymbolicError::EmptyState)
}

/// One signed `|o1>|o2>` product in a [`BellProductExpr`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BellEntry {
    pub first: BellOutcome,
    pub second: BellOutcome,
    pub sign: Sign,
}

/// `2^(-k/2) · Σ ±|o1>_p |o2>_q` for a fixed pairing `(p, q)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BellProductExpr {
    pub pairing: (BellPair, BellPair),
    pub entries: Vec<BellEntry>,
    pub norm_exponent: i32,
}

impl BellProductExpr {
    /// Back to computational-basis terms.
    pub fn expand(&self) -> Result<SymbolicState, SymbolicError> {
        let (p, q) = self.pairing;
        let qubits = QubitSet::from(p).union(QubitSet::from(q));
        let mut coeffs: BTreeMap<u8, i64> = BTreeMap::new();
        for e in &self.entries {
            let product = expand_product([&bell_terms(e.first, p), &bell_terms(e.second, q)])?;
            for (bits, c) in product.coefficients() {
                *coeffs.entry(bits).or_insert(0) += c * e.sign.value();
            }
        }
        let state = SymbolicState::from_coefficients(qubits, coeffs, self.norm_exponent + 2)?;
        if state.is_empty() {
            return Err(SymbolicError::EmptyState);
        }
        Ok(state)
    }

    /// Same pairing and the same signed entries up to one overall sign.
    pub fn same_structure(&self, other: &BellProductExpr) -> bool {
        if self.pairing != other.pairing {
            return false;
        }
        let flipped: Vec<BellEntry> = other
            .entries
            .iter()
            .map(|e| BellEntry { sign: -e.sign, ..*e })
            .collect();
        self.entries == other.entries || self.entries == flipped
    }

    fn write_with(&self, f: &mut fmt::Formatter<'_>, ket: impl Fn(BellOutcome, BellPair) -> String) -> fmt::Result {
        let (p, q) = self.pairing;
        for (i, e) in self.entries.iter().enumerate() {
            match (i, e.sign) {
                (0, Sign::Plus) => {}
                (0, Sign::Minus) => f.write_str("-")?,
                (_, s) => write!(f, " {} ", s.symbol())?,
            }
            write!(f, "{}{}", ket(e.first, p), ket(e.second, q))?;
        }
        Ok(())
    }

    /// Greek-letter rendering such as `α⁺₂₃α⁻₄₅ + α⁻₂₃α⁺₄₅`.
    pub fn unicode(&self) -> String {
        struct Unicode<'a>(&'a BellProductExpr);
        impl fmt::Display for Unicode<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.write_with(f, |o, p| {
                    format!("{}{}{}", o.symbol(), subscript(p.first()), subscript(p.second()))
                })
            }
        }
        Unicode(self).to_string()
    }
}

fn subscript(q: Qubit) -> char {
    char::from_u32(0x2080 + u32::from(q.label())).unwrap_or('?')
}

/// ASCII rendering such as `a+(2,3)a-(4,5) + a-(2,3)a+(4,5)`.
impl fmt::Display for BellProductExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_with(f, |o, p| format!("{o}{p}"))
    }
}

/// Expresses a four-qubit state as a signed sum of Bell products over the
/// given pairing. Only uniform one-, two- or four-entry sums are accepted.
pub fn bell_decompose(state: &SymbolicState, pairing: (BellPair, BellPair)) -> Result<BellProductExpr, SymbolicError> {
    let (p, q) = pairing;
    let covered = QubitSet::from(p).union(QubitSet::from(q));
    if !p.is_disjoint(q) || covered != state.qubits {
        return Err(SymbolicError::PairingMismatch(p, q, state.qubits));
    }
    if state.is_empty() {
        return Err(SymbolicError::EmptyState);
    }
    let pair_bits = |t: &Term, pair: BellPair| (t.bit(pair.first()), t.bit(pair.second()));
    let mut raw = Vec::new();
    for o1 in BellOutcome::ALL {
        for o2 in BellOutcome::ALL {
            let c: i64 = state
                .terms
                .iter()
                .map(|t| {
                    let (a, b) = pair_bits(t, p);
                    let (c, d) = pair_bits(t, q);
                    t.sign.value() * i64::from(o1.coefficient(a, b)) * i64::from(o2.coefficient(c, d))
                })
                .sum();
            if c != 0 {
                raw.push((o1, o2, c));
            }
        }
    }
    let magnitude = raw[0].2.unsigned_abs();
    if raw.iter().any(|&(_, _, c)| c.unsigned_abs() != magnitude) {
        return Err(SymbolicError::NotBellExpressible("entries differ in magnitude"));
    }
    if !matches!(raw.len(), 1 | 2 | 4) {
        return Err(SymbolicError::NotBellExpressible("entry count is not 1, 2 or 4"));
    }
    if !magnitude.is_power_of_two() {
        return Err(SymbolicError::NotBellExpressible("magnitude is not a power of two"));
    }
    // <o1 o2|state> = c · 2^(-k/2) / 2
    let norm_exponent = state.norm_exponent + 2 - 2 * magnitude.trailing_zeros() as i32;
    let entries = raw
        .into_iter()
        .map(|(first, second, c)| BellEntry {
            first,
            second,
            sign: Sign::from_negated(c < 0),
        })
        .collect();
    Ok(BellProductExpr {
        pairing,
        entries,
        norm_exponent,
    })
}

/// `Σ_h +|h>_{123}|h>_{456}` over the label's half support.
pub fn diagonal_reference(label: StateLabel) -> SymbolicState {
    let terms = label.half_support().map(|h| Term {
        qubits: QubitSet::ALL,
        bits: (h << 3) | h,
        sign: Sign::Plus,
    });
    SymbolicState::from_terms(QubitSet::ALL, terms, 1).expect("distinct diagonal terms")
}

#[cfg(test)]
mod tests {
    use super::*;

    const Q2345: QubitSet = QubitSet(0b011110);

    fn q(label: u8) -> Qubit {
        Qubit::of(label)
    }

    #[test]
    fn bell_terms_match_the_worked_example() {
        let a_minus = bell_terms(BellOutcome::AlphaMinus, BellPair::P2);
        assert_eq!(a_minus.to_string(), "+|00> -|11>");
        assert_eq!(a_minus.qubits(), QubitSet::of(&[2, 5]));
        assert_eq!(a_minus.norm_exponent(), 1);

        let b_plus = bell_terms(BellOutcome::BetaPlus, BellPair::P1);
        assert_eq!(b_plus.to_string(), "+|01> +|10>");
        assert!(!b_plus.terms()[0].bit(q(1)));
        assert!(b_plus.terms()[0].bit(q(6)));

        assert_eq!(
            bell_terms(BellOutcome::AlphaPlus, BellPair::P3).to_string(),
            "+|00> +|11>"
        );
        assert_eq!(
            bell_terms(BellOutcome::BetaMinus, BellPair::P3).to_string(),
            "+|01> -|10>"
        );
    }

    #[test]
    fn reversed_pair_puts_first_qubit_left() {
        // beta- on (6,1): |0>_6|1>_1 - |1>_6|0>_1
        let s = bell_terms(BellOutcome::BetaMinus, BellPair::of(6, 1));
        let t = &s.terms()[0];
        assert_eq!((t.bit(q(1)), t.bit(q(6)), t.sign()), (false, true, Sign::Minus));
    }

    #[test]
    fn product_of_p2_and_p3_outcomes() {
        let s = expand_product([
            &bell_terms(BellOutcome::AlphaMinus, BellPair::P2),
            &bell_terms(BellOutcome::AlphaPlus, BellPair::P3),
        ])
        .unwrap();
        assert_eq!(s.qubits(), Q2345);
        assert_eq!(s.to_string(), "+|0000> +|0110> -|1001> -|1111>");
        assert_eq!(s.norm_exponent(), 2);
    }

    #[test]
    fn p1_share_times_kept_pair() {
        let kept = SymbolicState::parse(Q2345, "+0000 -1111", 1).unwrap();
        let s = expand_product([&bell_terms(BellOutcome::BetaPlus, BellPair::P1), &kept]).unwrap();
        assert_eq!(s.to_string(), "+|000001> -|011111> +|100000> -|111110>");
    }

    #[test]
    fn unit_is_identity() {
        let s = SymbolicState::parse(Q2345, "+0000 -1111", 1).unwrap();
        assert_eq!(expand_product([&SymbolicState::unit(), &s]).unwrap(), s);
        assert_eq!(expand_product([&s, &SymbolicState::unit()]).unwrap(), s);
    }

    #[test]
    fn overlapping_product_is_rejected() {
        let a = bell_terms(BellOutcome::AlphaPlus, BellPair::of(2, 3));
        let b = bell_terms(BellOutcome::AlphaPlus, BellPair::of(3, 4));
        assert_eq!(
            expand_product([&a, &b]),
            Err(SymbolicError::OverlappingQubits(QubitSet::of(&[3])))
        );
    }

    #[test]
    fn decompose_ghz_difference_in_halves_pairing() {
        let s = SymbolicState::parse(Q2345, "+0000 -1111", 1).unwrap();
        let e = bell_decompose(&s, (BellPair::of(2, 3), BellPair::of(4, 5))).unwrap();
        assert_eq!(e.to_string(), "a+(2,3)a-(4,5) + a-(2,3)a+(4,5)");
        assert_eq!(e.unicode(), "α⁺₂₃α⁻₄₅ + α⁻₂₃α⁺₄₅");
        assert_eq!(e.norm_exponent, 1);
        assert_eq!(e.expand().unwrap(), s);
    }

    #[test]
    fn decompose_ghz_sum_in_owner_pairing() {
        let s = SymbolicState::parse(Q2345, "+0000 +1111", 1).unwrap();
        let e = bell_decompose(&s, (BellPair::P2, BellPair::P3)).unwrap();
        assert_eq!(e.to_string(), "a+(2,5)a+(3,4) + a-(2,5)a-(3,4)");
    }

    #[test]
    fn decompose_post_p1_state_of_worked_example() {
        let s = SymbolicState::parse(Q2345, "-0000 +1111", 1).unwrap();
        let e = bell_decompose(&s, (BellPair::P2, BellPair::P3)).unwrap();
        assert_eq!(e.to_string(), "-a+(2,5)a-(3,4) - a-(2,5)a+(3,4)");
    }

    #[test]
    fn decompose_single_product() {
        let s = expand_product([
            &bell_terms(BellOutcome::BetaMinus, BellPair::P2),
            &bell_terms(BellOutcome::AlphaPlus, BellPair::P3),
        ])
        .unwrap();
        let e = bell_decompose(&s, (BellPair::P2, BellPair::P3)).unwrap();
        assert_eq!(e.entries.len(), 1);
        assert_eq!(e.norm_exponent, 0);
    }

    #[test]
    fn decompose_rejects_non_bell_states() {
        let s = SymbolicState::parse(Q2345, "+0000 +0001 +0010", 0).unwrap();
        assert!(matches!(
            bell_decompose(&s, (BellPair::P2, BellPair::P3)),
            Err(SymbolicError::NotBellExpressible(_))
        ));
        let wrong = SymbolicState::parse(QubitSet::of(&[1, 2, 3, 4]), "+0000", 0).unwrap();
        assert!(matches!(
            bell_decompose(&wrong, (BellPair::P2, BellPair::P3)),
            Err(SymbolicError::PairingMismatch(..))
        ));
    }

    #[test]
    fn to_statevector_normalizes() {
        let s = SymbolicState::parse(QubitSet::ALL, "+000000 -111111", 1).unwrap();
        let v = to_statevector(&s).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v.amplitude(0).re - h).abs() < TOLERANCE);
        assert!((v.amplitude(63).re + h).abs() < TOLERANCE);

        let four = SymbolicState::parse(QubitSet::ALL, "+000001 -011111 +100000 -111110", 2).unwrap();
        let v = to_statevector(&four).unwrap();
        assert!(v.support().all(|(_, a)| (a.norm() - 0.5).abs() < TOLERANCE));
    }

    #[test]
    fn cancellation_leaves_empty_state() {
        let s = SymbolicState::parse(QubitSet::ALL, "+000000 -000000", 0).unwrap();
        assert!(s.is_empty());
        assert_eq!(to_statevector(&s), Err(SymbolicError::EmptyState));
    }

    #[test]
    fn same_sign_duplicates_merge() {
        let s = SymbolicState::parse(QubitSet::ALL, "+000000 +000000", 0).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.norm_exponent(), -2);
        assert_eq!(
            SymbolicState::parse(QubitSet::ALL, "+000000 +000000 +111111", 0),
            Err(SymbolicError::NonUniformCoefficients)
        );
    }

    #[test]
    fn restrict_reads_bits_in_given_order() {
        let t = Term::parse(QubitSet::ALL, "+011000").unwrap();
        assert_eq!(restrict(&t, &[q(4), q(5), q(6)]), "000");
        let t = Term::parse(QubitSet::ALL, "-100111").unwrap();
        assert_eq!(restrict(&t, &[q(1), q(2), q(3)]), "100");
        assert_eq!(restrict(&t, &[q(6), q(1)]), "11");
        assert_eq!(restrict(&t, &[]), "");
        assert_eq!(t.restrict_bits(&[q(1), q(4)]), 0b11);
    }

    #[test]
    fn symbolic_gate_matches_worked_example() {
        let diag = diagonal_reference(StateLabel::A);
        assert_eq!(diag.to_string(), "+|000000> +|111111>");
        let iy = diag.apply_gate(PauliGate::IY, q(1)).unwrap();
        assert_eq!(iy.to_string(), "+|011111> -|100000>");
        let z = diag.apply_gate(PauliGate::Z, q(1)).unwrap();
        assert_eq!(z.to_string(), "+|000000> -|111111>");
    }

    #[test]
    fn project_out_recovers_factor() {
        let kept = SymbolicState::parse(Q2345, "+0000 -1111", 1).unwrap();
        let p1 = bell_terms(BellOutcome::BetaPlus, BellPair::P1);
        let joint = expand_product([&p1, &kept]).unwrap();
        let rest = joint.project_out(&p1).unwrap();
        assert!(rest.eq_up_to_sign(&kept));
        assert_eq!(rest.qubits(), Q2345);
        let other = joint
            .project_out(&bell_terms(BellOutcome::AlphaPlus, BellPair::P1))
            .unwrap();
        assert!(other.is_empty());
    }

    #[test]
    fn from_statevector_lifts_exactly() {
        let v = Statevector::prepare(StateLabel::C);
        let s = SymbolicState::from_statevector(&v).unwrap();
        assert_eq!(s.to_string(), "+|011011> +|011100> +|100011> +|100100>");
        assert_eq!(s.norm_exponent(), 2);
        assert!(to_statevector(&s).unwrap().global_phase_equal(&v, TOLERANCE));
    }
}
