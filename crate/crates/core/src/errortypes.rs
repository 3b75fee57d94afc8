//! Error types relative to a mutually orthogonal operation set (MOOS).
//!
//! A MOOS is a list of Hermitian unitaries Ω_1..Ω_ℓ that pairwise commute or
//! anticommute and are independent. An operator `E` has error type
//! `r ∈ {0,1}^ℓ` when `Ω_i E Ω_i = (−1)^{r_i} E` for every i.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::mp::{MpReal, Precision};
use crate::pauli::{pauli_string, Pauli};

/// A binary error vector `r = (r_1, …, r_ℓ)`; bit i stores `r_{i+1}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ErrorVector {
    bits: u32,
    len: u8,
}

impl ErrorVector {
    pub fn new(bits: u32, len: usize) -> Self {
        assert!(len <= 16, "error vectors support at most 16 layers");
        Self { bits: bits & ((1u32 << len) - 1), len: len as u8 }
    }

    pub fn zero(len: usize) -> Self {
        Self::new(0, len)
    }

    /// The unit vector `e_i` (0-based i).
    pub fn unit(i: usize, len: usize) -> Self {
        Self::new(1 << i, len)
    }

    pub fn from_components(c: &[u8]) -> Self {
        let bits = c.iter().enumerate().fold(0, |b, (i, &x)| b | (((x & 1) as u32) << i));
        Self::new(bits, c.len())
    }

    /// All `2^len` vectors in counting order (r_1 fastest).
    pub fn all(len: usize) -> impl Iterator<Item = ErrorVector> {
        (0..1u32 << len).map(move |b| Self::new(b, len))
    }

    pub fn len(self) -> usize {
        self.len as usize
    }

    pub fn is_empty(self) -> bool {
        self.len == 0
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn get(self, i: usize) -> u8 {
        (self.bits >> i & 1) as u8
    }

    pub fn components(self) -> Vec<u8> {
        (0..self.len()).map(|i| self.get(i)).collect()
    }

    pub fn is_zero(self) -> bool {
        self.bits == 0
    }

    pub fn weight(self) -> u32 {
        self.bits.count_ones()
    }

    pub fn xor(self, other: Self) -> Result<Self> {
        if self.len != other.len {
            return Err(Error::LengthMismatch { left: self.len(), right: other.len() });
        }
        Ok(Self { bits: self.bits ^ other.bits, len: self.len })
    }

    /// Drops the last (outermost) component.
    pub fn truncate_last(self) -> Self {
        Self::new(self.bits, self.len() - 1)
    }

    /// Compact form, e.g. `1011` for (1,0,1,1).
    pub fn compact(self) -> String {
        (0..self.len()).map(|i| if self.get(i) == 1 { '1' } else { '0' }).collect()
    }
}

impl fmt::Display for ErrorVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for i in 0..self.len() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", self.get(i))?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for ErrorVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for ErrorVector {
    type Err = Error;

    /// Accepts `1011`, `(1,0,1,1)` or `1,0,1,1`.
    fn from_str(s: &str) -> Result<Self> {
        let body = s.trim().trim_start_matches('(').trim_end_matches(')');
        let digits: Vec<&str> = if body.contains(',') {
            body.split(',').map(str::trim).collect()
        } else {
            body.split("").filter(|c| !c.is_empty()).collect()
        };
        let mut c = Vec::with_capacity(digits.len());
        for d in digits {
            match d {
                "0" => c.push(0),
                "1" => c.push(1),
                _ => return Err(Error::InvalidArgument(format!("bad error vector {s:?}"))),
            }
        }
        if c.is_empty() || c.len() > 16 {
            return Err(Error::InvalidArgument(format!("bad error vector length in {s:?}")));
        }
        Ok(Self::from_components(&c))
    }
}

/// A validated MOOS.
#[derive(Clone, Debug)]
pub struct Moos {
    ops: Vec<CMatrix>,
    labels: Vec<String>,
    /// Bit j of `anticommutes[i]` set iff Ω_i and Ω_j anticommute.
    anticommutes: Vec<u32>,
}

impl Moos {
    pub fn ell(&self) -> usize {
        self.ops.len()
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.ops[0].rows()
    }

    pub fn anticommute(&self, i: usize, j: usize) -> bool {
        self.anticommutes[i] >> j & 1 == 1
    }

    /// The same set acting as `Ω_i ⊗ I_db` (already validated, so not re-checked).
    pub fn embed(&self, db: usize) -> Self {
        let id = CMatrix::identity(db, self.ops[0].precision());
        Self {
            ops: self.ops.iter().map(|o| o.kron(&id)).collect(),
            labels: self.labels.clone(),
            anticommutes: self.anticommutes.clone(),
        }
    }
}

/// Checks the MOOS axioms: square, same dimension, Hermitian, unitary
/// (Ω² = I), pairwise commuting or anticommuting, and independent — no Ω_i
/// equals a phase (±1, ±i) times a product of a subset of the others.
pub fn validate_moos(ops: Vec<CMatrix>, labels: Vec<String>) -> Result<Moos> {
    if ops.is_empty() {
        return Err(Error::InvalidMoos("empty operation set".into()));
    }
    if ops.len() > 16 {
        return Err(Error::InvalidMoos(format!("{} operations exceed the supported 16", ops.len())));
    }
    if labels.len() != ops.len() {
        return Err(Error::InvalidMoos(format!("{} labels for {} operations", labels.len(), ops.len())));
    }
    let dim = ops[0].rows();
    let prec = ops[0].precision();
    let tol = prec.tolerance(8);
    let id = CMatrix::identity(dim, prec);
    for (i, o) in ops.iter().enumerate() {
        let name = &labels[i];
        if !o.is_square() || o.rows() != dim {
            return Err(Error::InvalidMoos(format!("{name} is not {dim}x{dim}")));
        }
        if !o.is_hermitian(8) {
            return Err(Error::InvalidMoos(format!("{name} is not Hermitian")));
        }
        if o.matmul(o)?.max_abs_diff(&id)? > tol {
            return Err(Error::InvalidMoos(format!("{name} does not square to the identity")));
        }
    }
    let mut anticommutes = alloc::vec![0u32; ops.len()];
    for i in 0..ops.len() {
        for j in i + 1..ops.len() {
            let ab = ops[i].matmul(&ops[j])?;
            let ba = ops[j].matmul(&ops[i])?;
            if ab.max_abs_diff(&ba)? <= tol {
                continue;
            }
            if ab.add(&ba)?.max_abs() <= tol {
                anticommutes[i] |= 1 << j;
                anticommutes[j] |= 1 << i;
                continue;
            }
            return Err(Error::InvalidMoos(format!(
                "{} and {} neither commute nor anticommute",
                labels[i], labels[j]
            )));
        }
    }
    let ell = ops.len();
    for i in 0..ell {
        let others: Vec<usize> = (0..ell).filter(|&k| k != i).collect();
        for subset in 0u32..1 << others.len() {
            let mut prod = id.clone();
            for (b, &k) in others.iter().enumerate() {
                if subset >> b & 1 == 1 {
                    prod = prod.matmul(&ops[k])?;
                }
            }
            if proportional_with_unit_phase(&ops[i], &prod)? {
                return Err(Error::InvalidMoos(format!(
                    "{} is a product of other operations (dependent set)",
                    labels[i]
                )));
            }
        }
    }
    Ok(Moos { ops, labels, anticommutes })
}

/// Whether `a = c·b` with |c| = 1, for unitary `a`, `b`.
fn proportional_with_unit_phase(a: &CMatrix, b: &CMatrix) -> Result<bool> {
    let prec = a.precision();
    let d = MpReal::from_i64(a.rows() as i64, prec);
    let c = b.adjoint().matmul(a)?.trace().div_real(&d);
    if (&c.abs() - &MpReal::one(prec)).abs() > prec.tolerance(8) {
        return Ok(false);
    }
    Ok(a.max_abs_diff(&b.scale(&c))? <= prec.tolerance(8))
}

/// `H = Σ_r H_r` with each `H_r` a pure error of type r (indexed by `r.bits()`).
#[derive(Clone, Debug)]
pub struct ErrorDecomposition {
    ell: usize,
    parts: Vec<CMatrix>,
}

impl ErrorDecomposition {
    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn part(&self, r: ErrorVector) -> &CMatrix {
        &self.parts[r.bits() as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = (ErrorVector, &CMatrix)> {
        let ell = self.ell;
        self.parts.iter().enumerate().map(move |(b, m)| (ErrorVector::new(b as u32, ell), m))
    }

    /// `Σ_r H_r`, for checking the decomposition.
    pub fn sum(&self) -> Result<CMatrix> {
        let mut acc = self.parts[0].clone();
        for p in &self.parts[1..] {
            acc = acc.add(p)?;
        }
        Ok(acc)
    }
}

/// Splits `h` into its 2^ℓ pure error components by iterated half-sums
/// `(X ± Ω_i X Ω_i)/2`.
pub fn partition(h: &CMatrix, moos: &Moos) -> Result<ErrorDecomposition> {
    if h.rows() != moos.dim() || !h.is_square() {
        return Err(Error::DimensionMismatch {
            op: "partition",
            detail: format!("{}x{} operator vs {}-dimensional MOOS", h.rows(), h.cols(), moos.dim()),
        });
    }
    let half = MpReal::ratio(1, 2, h.precision());
    let mut parts = alloc::vec![h.clone()];
    for omega in moos.ops() {
        let mut next = Vec::with_capacity(parts.len() * 2);
        let mut odd = Vec::with_capacity(parts.len());
        for p in &parts {
            let c = p.conjugate_by(omega)?;
            next.push(p.add(&c)?.scale_real(&half));
            odd.push(p.sub(&c)?.scale_real(&half));
        }
        next.extend(odd);
        parts = next;
    }
    Ok(ErrorDecomposition { ell: moos.ell(), parts })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    Pure(ErrorVector),
    Mixed,
}

/// Classifies `op` as a pure error type or mixed.
///
/// A half-sum component counts as zero when its largest entry is at most
/// `10^(-digits/2)·‖op‖_max`. The zero operator classifies as pure type 0⃗.
pub fn classify(op: &CMatrix, moos: &Moos) -> Result<Classification> {
    if op.rows() != moos.dim() || !op.is_square() {
        return Err(Error::DimensionMismatch {
            op: "classify",
            detail: format!("{}x{} operator vs {}-dimensional MOOS", op.rows(), op.cols(), moos.dim()),
        });
    }
    let prec = op.precision();
    let scale = op.max_abs();
    if scale.is_zero() {
        return Ok(Classification::Pure(ErrorVector::zero(moos.ell())));
    }
    let thr = &MpReal::pow10(-(prec.digits() as i32) / 2, prec) * &scale;
    let mut bits = 0;
    for (i, omega) in moos.ops().iter().enumerate() {
        let c = op.conjugate_by(omega)?;
        let commuting = op.add(&c)?.max_abs() > thr;
        let anticommuting = op.sub(&c)?.max_abs() > thr;
        match (commuting, anticommuting) {
            (true, false) => {}
            (false, true) => bits |= 1 << i,
            _ => return Ok(Classification::Mixed),
        }
    }
    Ok(Classification::Pure(ErrorVector::new(bits, moos.ell())))
}

/// All 2^ℓ error types realized as products of unit-type generators.
#[derive(Clone, Debug)]
pub struct GeneratorTable {
    ell: usize,
    entries: Vec<CMatrix>,
}

impl GeneratorTable {
    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn get(&self, r: ErrorVector) -> &CMatrix {
        &self.entries[r.bits() as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = (ErrorVector, &CMatrix)> {
        let ell = self.ell;
        self.entries.iter().enumerate().map(move |(b, m)| (ErrorVector::new(b as u32, ell), m))
    }
}

/// Builds the table `Π_{i: r_i=1} g_i` (ascending i) from generators `g_i` of
/// type `e_i`. Every generator and every product is checked to classify as
/// its own key.
pub fn generator_table(moos: &Moos, generators: &[CMatrix]) -> Result<GeneratorTable> {
    let ell = moos.ell();
    if generators.len() != ell {
        return Err(Error::InvalidArgument(format!("{} generators for {ell} layers", generators.len())));
    }
    for (i, g) in generators.iter().enumerate() {
        let want = ErrorVector::unit(i, ell);
        if classify(g, moos)? != Classification::Pure(want) {
            return Err(Error::InvalidArgument(format!("generator {} is not a pure {want} error", i + 1)));
        }
    }
    let prec = generators[0].precision();
    let mut entries = Vec::with_capacity(1 << ell);
    for r in ErrorVector::all(ell) {
        let mut m = CMatrix::identity(moos.dim(), prec);
        for (i, g) in generators.iter().enumerate() {
            if r.get(i) == 1 {
                m = m.matmul(g)?;
            }
        }
        if classify(&m, moos)? != Classification::Pure(r) {
            return Err(Error::InvalidArgument(format!("product for {r} does not classify as {r}")));
        }
        entries.push(m);
    }
    Ok(GeneratorTable { ell, entries })
}

/// Built-in two-qubit control sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MoosPreset {
    /// {I⊗σz, I⊗σx, σz⊗I, σx⊗I}: every layer acts on a single qubit.
    SingleQubit,
    /// {σz⊗σz, I⊗σx, σz⊗I, σx⊗I}: the innermost layer is a two-body pulse.
    TwoBody,
}

impl MoosPreset {
    pub const ALL: [MoosPreset; 2] = [MoosPreset::SingleQubit, MoosPreset::TwoBody];

    pub fn name(self) -> &'static str {
        match self {
            MoosPreset::SingleQubit => "single-qubit-4layer",
            MoosPreset::TwoBody => "two-body-4layer",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s)
    }

    /// Pauli strings of Ω_1..Ω_4 (innermost first).
    pub fn operators(self) -> [[Pauli; 2]; 4] {
        use Pauli::*;
        match self {
            MoosPreset::SingleQubit => [[I, Z], [I, X], [Z, I], [X, I]],
            MoosPreset::TwoBody => [[Z, Z], [I, X], [Z, I], [X, I]],
        }
    }

    /// Generators of the unit error types e_1..e_4.
    pub fn generators(self) -> [[Pauli; 2]; 4] {
        use Pauli::*;
        match self {
            MoosPreset::SingleQubit => [[I, X], [I, Z], [X, I], [Z, I]],
            MoosPreset::TwoBody => [[I, X], [I, Z], [X, X], [Z, I]],
        }
    }

    pub fn moos(self, prec: Precision) -> Result<Moos> {
        let ops = self.operators().iter().map(|s| pauli_string(s, prec)).collect();
        let labels = self.operators().iter().map(|s| pauli_label(s)).collect();
        validate_moos(ops, labels)
    }

    pub fn generator_matrices(self, prec: Precision) -> Vec<CMatrix> {
        self.generators().iter().map(|s| pauli_string(s, prec)).collect()
    }
}

fn pauli_label(s: &[Pauli]) -> String {
    let parts: Vec<&str> = s.iter().map(|p| p.symbol()).collect();
    parts.join("⊗")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mp::MpComplex;
    use crate::pauli::pauli;

    fn p() -> Precision {
        Precision::new(30).unwrap()
    }

    #[test]
    fn vector_parsing_and_xor() {
        let a: ErrorVector = "1011".parse().unwrap();
        let b: ErrorVector = "(0,1,1,0)".parse().unwrap();
        assert_eq!(a.components(), alloc::vec![1, 0, 1, 1]);
        assert_eq!(a.xor(b).unwrap().compact(), "1101");
        assert_eq!(format!("{a}"), "(1,0,1,1)");
        assert!(a.xor(ErrorVector::zero(3)).is_err());
        assert!("10a1".parse::<ErrorVector>().is_err());
    }

    #[test]
    fn presets_validate() {
        for preset in MoosPreset::ALL {
            let m = preset.moos(p()).unwrap();
            assert_eq!(m.ell(), 4);
            let t = generator_table(&m, &preset.generator_matrices(p())).unwrap();
            assert_eq!(t.iter().count(), 16);
        }
    }

    #[test]
    fn rejects_dependent_and_non_involutive_sets() {
        let x = pauli(Pauli::X, p());
        let y = pauli(Pauli::Y, p());
        let z = pauli(Pauli::Z, p());
        let names = |n: usize| (0..n).map(|i| format!("O{i}")).collect::<Vec<_>>();
        assert!(validate_moos(alloc::vec![x.clone(), z.clone(), y], names(3)).is_err());
        assert!(validate_moos(alloc::vec![x.clone(), x.clone()], names(2)).is_err());
        let two = x.scale_real(&MpReal::from_f64(2.0, p()));
        assert!(validate_moos(alloc::vec![two], names(1)).is_err());
        assert!(validate_moos(alloc::vec![x, z], names(2)).is_ok());
    }

    #[test]
    fn classify_examples() {
        let m = MoosPreset::SingleQubit.moos(p()).unwrap();
        let yy = pauli_string(&[Pauli::Y, Pauli::Y], p());
        assert_eq!(classify(&yy, &m).unwrap(), Classification::Pure("1111".parse().unwrap()));
        let mixed = yy.add(&CMatrix::identity(4, p())).unwrap();
        assert_eq!(classify(&mixed, &m).unwrap(), Classification::Mixed);
    }

    #[test]
    fn partition_sums_back() {
        let m = MoosPreset::TwoBody.moos(p()).unwrap();
        let h = CMatrix::from_fn(4, 4, p(), |i, j| {
            MpComplex::from_f64((i + j) as f64 * 0.3, (i as f64 - j as f64) * 0.2, p())
        });
        let dec = partition(&h, &m).unwrap();
        assert!(dec.sum().unwrap().max_abs_diff(&h).unwrap() < p().tolerance(6));
        for (r, part) in dec.iter() {
            let c = classify(part, &m).unwrap();
            assert!(c == Classification::Pure(r) || part.max_abs() < p().tolerance(6));
        }
    }
}
