//! Dense reference model: 64×64 real operators assembled by Kronecker
//! products of 2×2 blocks. Gates and Bell kets are written out here rather
//! than taken from the library.

#![allow(dead_code)]

use qss_core::{BellOutcome, PauliGate, StateLabel, Statevector};

pub const N: usize = 64;

pub type Mat = Vec<f64>;
pub type Vector = Vec<f64>;

pub fn kron(a: &[f64], an: usize, b: &[f64], bn: usize) -> Mat {
    let n = an * bn;
    let mut out = vec![0.0; n * n];
    for i in 0..an {
        for j in 0..an {
            for k in 0..bn {
                for l in 0..bn {
                    out[(i * bn + k) * n + j * bn + l] = a[i * an + j] * b[k * bn + l];
                }
            }
        }
    }
    out
}

/// Kronecker product of six 2×2 factors, qubit 1 first.
pub fn kron6(factors: [[f64; 4]; 6]) -> Mat {
    let mut acc = factors[0].to_vec();
    let mut n = 2;
    for f in &factors[1..] {
        acc = kron(&acc, n, f, 2);
        n *= 2;
    }
    acc
}

pub const ID: [f64; 4] = [1.0, 0.0, 0.0, 1.0];

pub fn gate_matrix(g: PauliGate) -> [f64; 4] {
    match g {
        PauliGate::I => ID,
        PauliGate::X => [0.0, 1.0, 1.0, 0.0],
        // |0> -> -|1>, |1> -> |0>
        PauliGate::IY => [0.0, 1.0, -1.0, 0.0],
        PauliGate::Z => [1.0, 0.0, 0.0, -1.0],
    }
}

/// `|a><b|` as a 2×2 block.
pub fn unit(a: usize, b: usize) -> [f64; 4] {
    let mut m = [0.0; 4];
    m[a * 2 + b] = 1.0;
    m
}

pub fn single(g: PauliGate, qubit: u8) -> Mat {
    let mut f = [ID; 6];
    f[usize::from(qubit) - 1] = gate_matrix(g);
    kron6(f)
}

/// Bell ket amplitudes on `|00>, |01>, |10>, |11>`, unnormalized.
pub fn bell_ket(o: BellOutcome) -> [f64; 4] {
    match o {
        BellOutcome::AlphaPlus => [1.0, 0.0, 0.0, 1.0],
        BellOutcome::AlphaMinus => [1.0, 0.0, 0.0, -1.0],
        BellOutcome::BetaPlus => [0.0, 1.0, 1.0, 0.0],
        BellOutcome::BetaMinus => [0.0, 1.0, -1.0, 0.0],
    }
}

/// `|b><b|` on qubits `(p, q)`: `Σ b_{a1a2} b_{c1c2} |a1><c1|_p ⊗ |a2><c2|_q`.
pub fn bell_projector(o: BellOutcome, p: u8, q: u8) -> Mat {
    let ket = bell_ket(o);
    let mut out = vec![0.0; N * N];
    for a in 0..4 {
        for c in 0..4 {
            let w = ket[a] * ket[c] / 2.0;
            if w == 0.0 {
                continue;
            }
            let mut f = [ID; 6];
            f[usize::from(p) - 1] = unit(a >> 1, c >> 1);
            f[usize::from(q) - 1] = unit(a & 1, c & 1);
            for (o, m) in out.iter_mut().zip(kron6(f)) {
                *o += w * m;
            }
        }
    }
    out
}

pub fn apply(m: &[f64], v: &[f64]) -> Vector {
    (0..N).map(|i| (0..N).map(|j| m[i * N + j] * v[j]).sum()).collect()
}

pub fn norm_sqr(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

pub fn normalized(v: &[f64]) -> Vector {
    let n = norm_sqr(v).sqrt();
    v.iter().map(|x| x / n).collect()
}

/// `|0>` or `|1>` on one qubit.
fn basis1(bit: u8) -> [f64; 2] {
    if bit == 0 {
        [1.0, 0.0]
    } else {
        [0.0, 1.0]
    }
}

fn kron_vec(a: &[f64], b: &[f64]) -> Vector {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// `|s>` for a bit string, first character most significant.
pub fn ket(bits: &str) -> Vector {
    bits.bytes()
        .map(|c| basis1(c - b'0'))
        .fold(vec![1.0], |acc, q| kron_vec(&acc, &q))
}

fn half(label: StateLabel) -> [&'static str; 2] {
    match label {
        StateLabel::A => ["000", "111"],
        StateLabel::B => ["001", "110"],
        StateLabel::C => ["011", "100"],
        StateLabel::D => ["101", "010"],
    }
}

pub fn prepare(label: StateLabel) -> Vector {
    let [h0, h1] = half(label);
    let ghz: Vector = ket(h0).iter().zip(ket(h1)).map(|(x, y)| x + y).collect();
    normalized(&kron_vec(&ghz, &ghz))
}

pub fn to_real(s: &Statevector) -> Vector {
    s.amplitudes()
        .iter()
        .map(|a| {
            assert!(a.im.abs() < 1e-15, "oracle states are real");
            a.re
        })
        .collect()
}

/// `a = ±b` within `tol` (all states here are real).
pub fn equal_up_to_sign(a: &[f64], b: &[f64], tol: f64) -> bool {
    let plus = a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol);
    let minus = a.iter().zip(b).all(|(x, y)| (x + y).abs() <= tol);
    plus || minus
}

/// Born probability and normalized post-state.
pub fn measure(state: &[f64], o: BellOutcome, p: u8, q: u8) -> (f64, Option<Vector>) {
    let projected = apply(&bell_projector(o, p, q), state);
    let prob = norm_sqr(&projected);
    if prob <= 1e-12 {
        (0.0, None)
    } else {
        (prob, Some(normalized(&projected)))
    }
}
