//! Pauli matrices and tensor products of them.

use alloc::string::String;
use alloc::vec::Vec;

use crate::matrix::CMatrix;
use crate::mp::{MpComplex, MpReal, Precision};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_index(k: usize) -> Self {
        Self::ALL[k & 3]
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Pauli::I => "I",
            Pauli::X => "σx",
            Pauli::Y => "σy",
            Pauli::Z => "σz",
        }
    }

    /// Parses `I`, `X`, `x`, `σx`, … with or without the `σ` prefix.
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().trim_start_matches('σ') {
            "I" | "i" => Some(Pauli::I),
            "X" | "x" => Some(Pauli::X),
            "Y" | "y" => Some(Pauli::Y),
            "Z" | "z" => Some(Pauli::Z),
            _ => None,
        }
    }

    /// `(column, phase)` hit by row `bit` of this single-qubit matrix.
    /// Phase is encoded as a power of `i` (0..4).
    fn row(self, bit: usize) -> (usize, u8) {
        match (self, bit) {
            (Pauli::I, b) => (b, 0),
            (Pauli::X, b) => (b ^ 1, 0),
            (Pauli::Y, 0) => (1, 3), // −i
            (Pauli::Y, _) => (0, 1), // +i
            (Pauli::Z, 0) => (0, 0),
            (Pauli::Z, _) => (1, 2), // −1
        }
    }
}

/// Global phase of a Pauli string, a power of `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Phase(pub u8);

impl Phase {
    pub fn symbol(self) -> &'static str {
        ["", "i·", "−", "−i·"][(self.0 & 3) as usize]
    }

    pub fn value(self, prec: Precision) -> MpComplex {
        let (re, im) = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)][(self.0 & 3) as usize];
        MpComplex::from_f64(re, im, prec)
    }
}

/// Matrix of a tensor product of Paulis; `ops[0]` is the left (slowest) factor.
pub fn pauli_string(ops: &[Pauli], prec: Precision) -> CMatrix {
    let n = ops.len();
    let dim = 1usize << n;
    let mut m = CMatrix::zeros(dim, dim, prec);
    for row in 0..dim {
        let (col, phase) = string_row(ops, row);
        m[(row, col)] = Phase(phase).value(prec);
    }
    m
}

/// Adds `c · P` to `acc` for a Pauli string `P`, touching only its nonzeros.
pub fn add_scaled_pauli_string(acc: &mut CMatrix, ops: &[Pauli], c: &MpReal) {
    let dim = 1usize << ops.len();
    let prec = acc.precision();
    for row in 0..dim {
        let (col, phase) = string_row(ops, row);
        let v = Phase(phase).value(prec).scale(c);
        acc[(row, col)] += &v;
    }
}

fn string_row(ops: &[Pauli], row: usize) -> (usize, u8) {
    let n = ops.len();
    let mut col = 0;
    let mut phase = 0u8;
    for (q, p) in ops.iter().enumerate() {
        let bit = (row >> (n - 1 - q)) & 1;
        let (c, ph) = p.row(bit);
        col |= c << (n - 1 - q);
        phase = (phase + ph) & 3;
    }
    (col, phase)
}

pub fn pauli(p: Pauli, prec: Precision) -> CMatrix {
    pauli_string(&[p], prec)
}

/// Every Pauli string on `n` qubits, in base-4 counting order (last factor fastest).
pub fn all_strings(n: usize) -> Vec<Vec<Pauli>> {
    (0..1usize << (2 * n))
        .map(|k| (0..n).map(|q| Pauli::from_index(k >> (2 * (n - 1 - q)))).collect())
        .collect()
}

/// Recognizes `m` as `phase · P` for a Pauli string `P` on `log2(dim)` qubits.
pub fn identify(m: &CMatrix) -> Option<(Phase, Vec<Pauli>)> {
    let dim = m.rows();
    if !m.is_square() || !dim.is_power_of_two() {
        return None;
    }
    let n = dim.trailing_zeros() as usize;
    let prec = m.precision();
    let tol = prec.tolerance(8);
    // Cheap prefilter: row 0 of a Pauli string has its single nonzero at col0.
    for ops in all_strings(n) {
        let (col0, _) = string_row(&ops, 0);
        if m[(0, col0)].abs() < tol {
            continue;
        }
        let p = pauli_string(&ops, prec);
        for ph in 0..4u8 {
            let cand = p.scale(&Phase(ph).value(prec));
            if m.max_abs_diff(&cand).ok()? <= tol {
                return Some((Phase(ph), ops));
            }
        }
    }
    None
}

/// Human-readable label such as `−σx⊗σy`, or `None` if `m` is not a Pauli string.
pub fn label(m: &CMatrix) -> Option<String> {
    let (phase, ops) = identify(m)?;
    let mut s = String::from(phase.symbol());
    for (k, p) in ops.iter().enumerate() {
        if k > 0 {
            s.push('⊗');
        }
        s.push_str(p.symbol());
    }
    Some(s)
}
