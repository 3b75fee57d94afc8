//! Nested-integral coefficients of the toggling-frame expansion, their
//! vanishing orders, and the closed-form order predictor.
//!
//! For an error word `r^(1) … r^(n)` the coefficient is
//!
//! ```text
//! F = ∫_0^1 dη_n g_n(η_n) ∫_0^{η_n} dη_{n-1} g_{n-1} … ∫_0^{η_2} dη_1 g_1(η_1),
//! g_p = Π_i f_i^{r_i^(p)}
//! ```
//!
//! where `f_i` is the ±1 modulation function of layer i. Every `g_p` is
//! constant on the atomic intervals, so each partial integral is a piecewise
//! polynomial and the recursion can be carried exactly.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::errortypes::ErrorVector;
use crate::mp::{MathCtx, MpReal, Precision};
use crate::schedule::{build_timeline, NuddSpec};

/// Default cap on coefficient evaluations in one [`vanishing_order`] call.
pub const DEFAULT_BUDGET: u128 = 10_000_000;

/// An ordered product of error vectors, `r^(1)` applied first (earliest time).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ErrorWord {
    vectors: Vec<ErrorVector>,
}

impl ErrorWord {
    pub fn new(vectors: Vec<ErrorVector>) -> Result<Self> {
        let Some(first) = vectors.first() else {
            return Err(Error::InvalidArgument("error word must be non-empty".into()));
        };
        let ell = first.len();
        if let Some(v) = vectors.iter().find(|v| v.len() != ell) {
            return Err(Error::LengthMismatch { left: ell, right: v.len() });
        }
        Ok(Self { vectors })
    }

    pub fn vectors(&self) -> &[ErrorVector] {
        &self.vectors
    }

    /// Word length n.
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn ell(&self) -> usize {
        self.vectors[0].len()
    }

    /// `r^(1) ⊕ … ⊕ r^(n)`, the error type the word contributes to.
    pub fn resultant(&self) -> ErrorVector {
        let bits = self.vectors.iter().fold(0, |b, v| b ^ v.bits());
        ErrorVector::new(bits, self.ell())
    }

    /// The word restricted to the first ℓ−1 components.
    pub fn truncate_last(&self) -> Self {
        Self { vectors: self.vectors.iter().map(|v| v.truncate_last()).collect() }
    }
}

impl fmt::Display for ErrorWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.vectors.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            f.write_str(&v.compact())?;
        }
        Ok(())
    }
}

impl fmt::Debug for ErrorWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

impl FromStr for ErrorWord {
    type Err = Error;

    /// Compact vectors separated by spaces or semicolons: `"10 01 11"`.
    fn from_str(s: &str) -> Result<Self> {
        let vectors = s
            .split(|c: char| c.is_whitespace() || c == ';')
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<ErrorVector>>>()?;
        Self::new(vectors)
    }
}

#[inline]
fn parity(x: u64) -> bool {
    x.count_ones() & 1 == 1
}

/// Evaluates coefficients for one sequence.
///
/// The state after `p` vectors is the list of start values of `A_p` on every
/// atomic interval (plus its value at η = 1). On interval k the Taylor
/// coefficients of `A_p` are `±A_{p-j}(t_k)`, with the sign fixed by prefix
/// XORs of the word, so extending a prefix by one vector costs O(K·p).
pub struct CoefficientEngine {
    spec: NuddSpec,
    prec: Precision,
    signs: Vec<u64>,
    /// `weights[k][j] = L_k^j / j!`.
    weights: Vec<Vec<MpReal>>,
}

impl CoefficientEngine {
    /// Prepares an engine able to evaluate words up to `max_len` vectors.
    pub fn new(spec: &NuddSpec, prec: Precision, max_len: usize) -> Self {
        let tl = build_timeline(spec, prec);
        let signs = tl.intervals.iter().map(|iv| iv.signs).collect();
        let weights = tl
            .intervals
            .iter()
            .map(|iv| {
                let mut w = Vec::with_capacity(max_len + 2);
                w.push(MpReal::one(prec));
                for j in 1..=max_len + 1 {
                    let next = (&w[j - 1] * &iv.length).div_i64(j as i64);
                    w.push(next);
                }
                w
            })
            .collect();
        Self { spec: spec.clone(), prec, signs, weights }
    }

    pub fn spec(&self) -> &NuddSpec {
        &self.spec
    }

    pub fn max_len(&self) -> usize {
        self.weights[0].len() - 2
    }

    fn check_word(&self, word: &ErrorWord) -> Result<()> {
        if word.ell() != self.spec.ell() {
            return Err(Error::LengthMismatch { left: self.spec.ell(), right: word.ell() });
        }
        if word.len() > self.max_len() {
            return Err(Error::InvalidArgument(format!(
                "word of length {} exceeds engine capacity {}",
                word.len(),
                self.max_len()
            )));
        }
        Ok(())
    }

    fn ones(&self) -> Vec<MpReal> {
        alloc::vec![MpReal::one(self.prec); self.signs.len() + 1]
    }

    /// `∫ g_{p+1} A_p` over interval k, given the stored start values.
    fn step_integral(&self, k: usize, values: &[Vec<MpReal>], xs: &[u64], x_next: u64) -> MpReal {
        let p = values.len() - 1;
        let s = self.signs[k];
        let w = &self.weights[k];
        let mut acc = MpReal::zero(self.prec);
        for j in 0..=p {
            let q = p - j;
            let term = &values[q][k] * &w[j + 1];
            if parity(s & (x_next ^ xs[q])) {
                acc -= &term;
            } else {
                acc += &term;
            }
        }
        acc
    }

    /// Start values of `A_{p+1}` on every interval, followed by `A_{p+1}(1)`.
    fn extend(&self, values: &[Vec<MpReal>], xs: &[u64], x_next: u64) -> Vec<MpReal> {
        let k_count = self.signs.len();
        let mut out = Vec::with_capacity(k_count + 1);
        let mut run = MpReal::zero(self.prec);
        out.push(run.clone());
        for k in 0..k_count {
            run += &self.step_integral(k, values, xs, x_next);
            out.push(run.clone());
        }
        out
    }

    /// `A_{p+1}(1)` only.
    fn complete(&self, values: &[Vec<MpReal>], xs: &[u64], x_next: u64) -> MpReal {
        let mut total = MpReal::zero(self.prec);
        for k in 0..self.signs.len() {
            total += &self.step_integral(k, values, xs, x_next);
        }
        total
    }

    pub fn coefficient(&self, word: &ErrorWord) -> Result<MpReal> {
        self.check_word(word)?;
        let mut values = alloc::vec![self.ones()];
        let mut xs = alloc::vec![0u64];
        let n = word.len();
        for (p, v) in word.vectors().iter().enumerate() {
            let x_next = xs[p] ^ v.bits() as u64;
            if p + 1 == n {
                return Ok(self.complete(&values, &xs, x_next));
            }
            let next = self.extend(&values, &xs, x_next);
            values.push(next);
            xs.push(x_next);
        }
        unreachable!("words are non-empty")
    }

    /// Scans every word of length `n` whose resultant is `r`, reporting the
    /// largest |F|. Words are enumerated depth-first sharing prefixes.
    pub fn scan_level(&self, r: ErrorVector, n: usize) -> Result<LevelScan> {
        if r.len() != self.spec.ell() {
            return Err(Error::LengthMismatch { left: self.spec.ell(), right: r.len() });
        }
        if n == 0 || n > self.max_len() {
            return Err(Error::InvalidArgument(format!("word length {n} outside 1..={}", self.max_len())));
        }
        let mut state = Scan {
            values: alloc::vec![self.ones()],
            xs: alloc::vec![0u64],
            max_abs: MpReal::zero(self.prec),
            argmax: Vec::new(),
            path: Vec::new(),
            words: 0,
        };
        self.scan_rec(r.bits() as u64, n, &mut state);
        let ell = self.spec.ell();
        let mut vectors: Vec<ErrorVector> = state.argmax.iter().map(|&b| ErrorVector::new(b as u32, ell)).collect();
        if vectors.is_empty() {
            vectors.push(r);
        }
        Ok(LevelScan {
            n,
            words: state.words,
            max_abs: state.max_abs,
            argmax: ErrorWord::new(vectors)?,
        })
    }

    fn scan_rec(&self, r: u64, n: usize, st: &mut Scan) {
        let d = st.xs.len() - 1;
        if d + 1 == n {
            let f = self.complete(&st.values, &st.xs, r).abs();
            st.words += 1;
            if f > st.max_abs || st.argmax.is_empty() {
                st.max_abs = f;
                st.argmax.clone_from(&st.path);
                let last = st.xs[d] ^ r;
                st.argmax.push(last);
            }
            return;
        }
        for v in 0..1u64 << self.spec.ell() {
            let x_next = st.xs[d] ^ v;
            let next = self.extend(&st.values, &st.xs, x_next);
            st.values.push(next);
            st.xs.push(x_next);
            st.path.push(v);
            self.scan_rec(r, n, st);
            st.path.pop();
            st.xs.pop();
            st.values.pop();
        }
    }
}

struct Scan {
    values: Vec<Vec<MpReal>>,
    xs: Vec<u64>,
    max_abs: MpReal,
    argmax: Vec<u64>,
    path: Vec<u64>,
    words: u64,
}

/// Largest coefficient among all words of one length and resultant.
#[derive(Clone, Debug)]
pub struct LevelScan {
    pub n: usize,
    pub words: u64,
    pub max_abs: MpReal,
    /// A word attaining `max_abs`.
    pub argmax: ErrorWord,
}

/// `F(word)` for the given sequence.
pub fn coefficient(spec: &NuddSpec, word: &ErrorWord, prec: Precision) -> Result<MpReal> {
    CoefficientEngine::new(spec, prec, word.len()).coefficient(word)
}

/// Independent check of [`coefficient`]: nested composite trapezoid rule on a
/// grid that splits every atomic interval into `refine` equal cells.
///
/// The rule is exact for n ≤ 2 and converges as O(h²) beyond.
pub fn oracle_coefficient(spec: &NuddSpec, word: &ErrorWord, prec: Precision, refine: usize) -> Result<MpReal> {
    if word.ell() != spec.ell() {
        return Err(Error::LengthMismatch { left: spec.ell(), right: word.ell() });
    }
    if refine == 0 {
        return Err(Error::InvalidArgument("refinement must be >= 1".into()));
    }
    let tl = build_timeline(spec, prec);
    let half = MpReal::ratio(1, 2, prec);
    let mut cells: Vec<(MpReal, u64)> = Vec::with_capacity(tl.intervals.len() * refine);
    for iv in &tl.intervals {
        let h = iv.length.div_i64(refine as i64);
        for _ in 0..refine {
            cells.push((h.clone(), iv.signs));
        }
    }
    let mut prev = alloc::vec![MpReal::one(prec); cells.len() + 1];
    for v in word.vectors() {
        let mask = v.bits() as u64;
        let mut cur = Vec::with_capacity(cells.len() + 1);
        let mut run = MpReal::zero(prec);
        cur.push(run.clone());
        for (c, (h, s)) in cells.iter().enumerate() {
            let area = &(&(&prev[c] + &prev[c + 1]) * &half) * h;
            if parity(s & mask) {
                run -= &area;
            } else {
                run += &area;
            }
            cur.push(run.clone());
        }
        prev = cur;
    }
    Ok(prev.pop().expect("grid is non-empty"))
}

/// Per-length statistics from a vanishing-order scan.
#[derive(Clone, Debug)]
pub struct LevelVerdict {
    pub n: usize,
    pub words: u64,
    pub max_abs: MpReal,
    pub threshold: MpReal,
    pub vanishes: bool,
}

#[derive(Clone, Debug)]
pub struct VanishingOrder {
    pub r: ErrorVector,
    /// Largest ň such that every word of length ≤ ň with resultant r vanishes.
    pub order: u32,
    /// True when every scanned length vanished, so `order` is only a lower bound.
    pub saturated: bool,
    pub levels: Vec<LevelVerdict>,
}

/// Zero threshold for words of length n: `10^(-digits+15) / n!`.
///
/// `1/n!` is the value of the all-trivial word, the largest |F| possible.
pub fn zero_threshold(n: usize, prec: Precision) -> MpReal {
    let mut f = prec.tolerance(15);
    for k in 2..=n as i64 {
        f = f.div_i64(k);
    }
    f
}

/// Numerical decoupling order of error type `r`, scanning lengths 1..=n_max.
pub fn vanishing_order(spec: &NuddSpec, r: ErrorVector, n_max: usize, prec: Precision) -> Result<VanishingOrder> {
    vanishing_order_with_budget(spec, r, n_max, prec, DEFAULT_BUDGET)
}

pub fn vanishing_order_with_budget(
    spec: &NuddSpec,
    r: ErrorVector,
    n_max: usize,
    prec: Precision,
    budget: u128,
) -> Result<VanishingOrder> {
    if r.len() != spec.ell() {
        return Err(Error::LengthMismatch { left: spec.ell(), right: r.len() });
    }
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be >= 1".into()));
    }
    let engine = CoefficientEngine::new(spec, prec, n_max);
    let branch = 1u128 << spec.ell();
    let mut spent = 0u128;
    let mut levels = Vec::new();
    for n in 1..=n_max {
        let words = branch.saturating_pow(n as u32 - 1);
        if spent.saturating_add(words) > budget {
            return Err(Error::BudgetExceeded { attempted: spent.saturating_add(words), limit: budget });
        }
        spent += words;
        let scan = engine.scan_level(r, n)?;
        let threshold = zero_threshold(n, prec);
        let vanishes = scan.max_abs <= threshold;
        levels.push(LevelVerdict { n, words: scan.words, max_abs: scan.max_abs, threshold, vanishes });
        if !vanishes {
            return Ok(VanishingOrder { r, order: n as u32 - 1, saturated: false, levels });
        }
    }
    Ok(VanishingOrder { r, order: n_max as u32, saturated: true, levels })
}

/// Both sides of the outer-layer decomposition identity for one word.
#[derive(Clone, Debug)]
pub struct OuterDecomposition {
    pub direct: MpReal,
    pub decomposed: MpReal,
    pub compositions: usize,
}

impl OuterDecomposition {
    pub fn abs_diff(&self) -> MpReal {
        (&self.direct - &self.decomposed).abs()
    }
}

/// Evaluates F both directly and by splitting the word into contiguous
/// clusters, one per occupied outermost sub-interval:
///
/// `F = Σ_{compositions} Π_a F_inner(cluster_a) · Σ_{j_1<…<j_m} Π_a (−1)^{(j_a−1)ρ_a} s_{j_a}^{n_a}`
///
/// with `ρ_a` the parity of the outermost components in cluster a.
pub fn outer_decomposition(spec: &NuddSpec, word: &ErrorWord, prec: Precision) -> Result<OuterDecomposition> {
    if word.ell() != spec.ell() {
        return Err(Error::LengthMismatch { left: spec.ell(), right: word.ell() });
    }
    let n = word.len();
    if n > 24 {
        return Err(Error::InvalidArgument(format!("word length {n} too long for composition enumeration")));
    }
    let direct = coefficient(spec, word, prec)?;
    let ell = spec.ell();
    let outer = ell - 1;
    let inner_spec = spec.inner();
    let inner_engine = inner_spec.as_ref().map(|s| CoefficientEngine::new(s, prec, n));
    let inner_word = (ell >= 2).then(|| word.truncate_last());
    let s = crate::schedule::udd_intervals(spec.order(outer), prec)?;
    let slots = s.len();

    // Inner coefficients of every contiguous sub-word, memoized by (start, len).
    let mut inner = alloc::vec![alloc::vec![None::<MpReal>; n + 1]; n];
    let mut inner_coeff = |a: usize, len: usize| -> Result<MpReal> {
        if let Some(v) = &inner[a][len] {
            return Ok(v.clone());
        }
        let v = match (&inner_engine, &inner_word) {
            (Some(e), Some(w)) => e.coefficient(&ErrorWord::new(w.vectors()[a..a + len].to_vec())?)?,
            _ => {
                let mut f = MpReal::one(prec);
                for k in 2..=len as i64 {
                    f = f.div_i64(k);
                }
                f
            }
        };
        inner[a][len] = Some(v.clone());
        Ok(v)
    };

    let mut total = MpReal::zero(prec);
    let mut count = 0;
    for cuts in 0u32..1 << (n - 1) {
        // Bit b of `cuts` set ⇒ a cluster boundary after vector b.
        let mut clusters = Vec::new();
        let mut start = 0;
        for b in 0..n {
            if b == n - 1 || cuts >> b & 1 == 1 {
                clusters.push((start, b + 1 - start));
                start = b + 1;
            }
        }
        if clusters.len() > slots {
            continue;
        }
        count += 1;
        let mut prod = MpReal::one(prec);
        for &(a, len) in &clusters {
            prod *= &inner_coeff(a, len)?;
        }
        if prod.is_zero() {
            continue;
        }
        // sums[j]: total over increasing slot placements of the clusters so
        // far, with the latest cluster in slot j.
        let mut sums: Vec<MpReal> = Vec::new();
        for (ci, &(a, len)) in clusters.iter().enumerate() {
            let rho = word.vectors()[a..a + len].iter().fold(0, |x, v| x ^ v.get(outer));
            let mut below = MpReal::zero(prec);
            let mut next = Vec::with_capacity(slots);
            for j in 0..slots {
                let mut t = s[j].powi(len);
                if rho == 1 && j % 2 == 1 {
                    t = -t;
                }
                next.push(if ci == 0 { t } else { &below * &t });
                if ci > 0 {
                    below += &sums[j];
                }
            }
            sums = next;
        }
        let mut outer_sum = MpReal::zero(prec);
        for v in &sums {
            outer_sum += v;
        }
        total += &(&prod * &outer_sum);
    }
    Ok(OuterDecomposition { direct, decomposed: total, compositions: count })
}

/// Which modulation-related function to expand in the outer angle θ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FourierTarget {
    /// `f_i` for a layer index (0-based); the last index is the outermost layer.
    Layer(usize),
    /// `dη/dθ`, the Jacobian of the outer-layer angle map.
    Jacobian,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Harmonic {
    Cos(u32),
    Sin(u32),
}

impl fmt::Display for Harmonic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Harmonic::Cos(m) => write!(f, "cos({m}θ)"),
            Harmonic::Sin(m) => write!(f, "sin({m}θ)"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FourierTerm {
    pub harmonic: Harmonic,
    pub coefficient: MpReal,
    pub allowed: bool,
}

/// Fourier content of one expanded function.
#[derive(Clone, Debug)]
pub struct FourierReport {
    pub target: FourierTarget,
    /// The allowed family, as a human-readable description.
    pub expected: String,
    /// Terms whose relative magnitude exceeds 1e-20.
    pub populated: Vec<FourierTerm>,
    /// Largest forbidden |coefficient| relative to the largest allowed one.
    pub max_forbidden_relative: f64,
}

impl FourierReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_forbidden_relative < tol
    }
}

/// Expands the target function in harmonics `0..=m_max` of the outer angle
///
/// `θ = π/(N_ℓ+1) · ((η − η_{j−1})/s_j + j − 1)` on sub-interval j,
///
/// continued to [0, 2π) by running the outer index on to 2(N_ℓ+1). Every
/// target is piecewise constant on a known partition, so the projections are
/// integrated in closed form.
pub fn fourier_profile(spec: &NuddSpec, target: FourierTarget, m_max: u32, prec: Precision) -> Result<FourierReport> {
    let ell = spec.ell();
    let outer = ell - 1;
    let big_n = spec.order(outer);
    let slots = 2 * (big_n as usize + 1);
    let mut ctx = MathCtx::new();
    let pi = ctx.pi(prec);
    let width = pi.div_i64(big_n as i64 + 1);

    // Pieces (θ_start, θ_end, value).
    let mut pieces: Vec<(MpReal, MpReal, MpReal)> = Vec::new();
    let expected: String;
    let allowed: fn(Harmonic, u32) -> bool;
    match target {
        FourierTarget::Layer(i) if i == outer => {
            for j in 0..slots {
                let v = if j % 2 == 0 { MpReal::one(prec) } else { -MpReal::one(prec) };
                pieces.push((width.mul_i64(j as i64), width.mul_i64(j as i64 + 1), v));
            }
            expected = format!("sin((2k+1)·{}θ)", big_n + 1);
            allowed = |h, m1| matches!(h, Harmonic::Sin(m) if m % m1 == 0 && (m / m1) % 2 == 1);
        }
        FourierTarget::Layer(i) if i < outer => {
            let inner = spec.inner().expect("ℓ ≥ 2 when an inner layer exists");
            let tl = build_timeline(&inner, prec);
            for j in 0..slots {
                let base = width.mul_i64(j as i64);
                for iv in &tl.intervals {
                    let a = &base + &(&width * &iv.start);
                    let b = &base + &(&width * &(&iv.start + &iv.length));
                    let v = if iv.signs >> i & 1 == 1 { -MpReal::one(prec) } else { MpReal::one(prec) };
                    pieces.push((a, b, v));
                }
            }
            if spec.order(i) % 2 == 0 {
                expected = format!("cos(2k·{}θ), k ≥ 0", big_n + 1);
                allowed = |h, m1| matches!(h, Harmonic::Cos(m) if m % (2 * m1) == 0);
            } else {
                expected = format!("sin(2k·{}θ), k ≥ 1", big_n + 1);
                allowed = |h, m1| matches!(h, Harmonic::Sin(m) if m > 0 && m % (2 * m1) == 0);
            }
        }
        FourierTarget::Layer(i) => {
            return Err(Error::InvalidArgument(format!("layer {i} out of range for ℓ = {ell}")));
        }
        FourierTarget::Jacobian => {
            let den = 2 * (big_n as i64 + 1);
            let s1 = ctx.sin(&pi.div_i64(den));
            let norm = (&s1 * &MpReal::from_i64(big_n as i64 + 1, prec)) / &pi;
            for j in 0..slots as i64 {
                let v = &norm * &ctx.sin(&pi.mul_i64(2 * j + 1).div_i64(den));
                pieces.push((width.mul_i64(j), width.mul_i64(j + 1), v));
            }
            expected = format!("sin((2k·{} ± 1)θ)", big_n + 1);
            allowed = |h, m1| matches!(h, Harmonic::Sin(m) if m % (2 * m1) == 1 || m % (2 * m1) == 2 * m1 - 1);
        }
    }

    // Accumulate ∫ v·cos(mθ) and ∫ v·sin(mθ) piece by piece using the
    // Chebyshev recurrences for cos(mθ), sin(mθ) at each breakpoint.
    let m_count = m_max as usize + 1;
    let mut cos_acc = alloc::vec![MpReal::zero(prec); m_count];
    let mut sin_acc = alloc::vec![MpReal::zero(prec); m_count];
    let mut add_point = |theta: &MpReal, weight: &MpReal, ctx: &mut MathCtx, at_start: bool| {
        // Antiderivatives: ∫cos(mθ) = sin(mθ)/m, ∫sin(mθ) = −cos(mθ)/m.
        let c1 = ctx.cos(theta);
        let s1 = ctx.sin(theta);
        let two_c = c1.mul_i64(2);
        let (mut c_prev, mut s_prev) = (MpReal::one(prec), MpReal::zero(prec));
        let (mut c_cur, mut s_cur) = (c1, s1);
        let w = if at_start { -weight } else { weight.clone() };
        for m in 1..m_count {
            let inv = MpReal::one(prec).div_i64(m as i64);
            cos_acc[m] += &(&(&w * &s_cur) * &inv);
            sin_acc[m] -= &(&(&w * &c_cur) * &inv);
            let c_next = &(&two_c * &c_cur) - &c_prev;
            let s_next = &(&two_c * &s_cur) - &s_prev;
            c_prev = core::mem::replace(&mut c_cur, c_next);
            s_prev = core::mem::replace(&mut s_cur, s_next);
        }
    };
    let mut mean = MpReal::zero(prec);
    for (a, b, v) in &pieces {
        mean += &(v * &(b - a));
        add_point(b, v, &mut ctx, false);
        add_point(a, v, &mut ctx, true);
    }
    cos_acc[0] = mean;

    let m1 = big_n + 1;
    let mut terms = Vec::with_capacity(2 * m_count);
    for m in 0..m_count {
        let norm = if m == 0 { pi.mul_i64(2) } else { pi.clone() };
        terms.push(FourierTerm {
            harmonic: Harmonic::Cos(m as u32),
            coefficient: &cos_acc[m] / &norm,
            allowed: allowed(Harmonic::Cos(m as u32), m1),
        });
        if m > 0 {
            terms.push(FourierTerm {
                harmonic: Harmonic::Sin(m as u32),
                coefficient: &sin_acc[m] / &pi,
                allowed: allowed(Harmonic::Sin(m as u32), m1),
            });
        }
    }
    let max_of = |want: bool| {
        terms
            .iter()
            .filter(|t| t.allowed == want)
            .map(|t| t.coefficient.abs())
            .fold(MpReal::zero(prec), |a, b| a.max(&b))
    };
    let max_allowed = max_of(true);
    let max_forbidden = max_of(false);
    let max_forbidden_relative = if max_allowed.is_zero() {
        if max_forbidden.is_zero() { 0.0 } else { f64::INFINITY }
    } else {
        (&max_forbidden / &max_allowed).to_f64()
    };
    let floor = if max_allowed.is_zero() { MpReal::zero(prec) } else { &max_allowed * &MpReal::pow10(-20, prec) };
    let populated = terms.into_iter().filter(|t| t.coefficient.abs() > floor).collect();
    Ok(FourierReport { target, expected, populated, max_forbidden_relative })
}

/// Effective per-layer orders Ñ_i: layers up to and including the first odd
/// one keep N_i; later layers are capped at (smallest odd order below) + 1.
pub fn suppression_orders(spec: &NuddSpec) -> Vec<u32> {
    let mut out = Vec::with_capacity(spec.ell());
    let mut min_odd: Option<u32> = None;
    for &n in spec.orders() {
        out.push(match min_odd {
            Some(o) => n.min(o + 1),
            None => n,
        });
        if n % 2 == 1 {
            min_odd = Some(min_odd.map_or(n, |o| o.min(n)));
        }
    }
    out
}

/// Predicted decoupling order of error type r:
///
/// `Ň(r) = max_i [ r_i·(p⊕(1,i−1) ⊕ 1)·Ñ_i + p₊(i+1,ℓ) ]`
///
/// with `p⊕(a,b)` the parity and `p₊(a,b)` the plain sum of `r_k·[N_k]₂` over
/// layers a..b — i.e. how many of those layers have odd order and anticommute
/// with the error.
pub fn predict_order(spec: &NuddSpec, r: ErrorVector) -> Result<u32> {
    if r.len() != spec.ell() {
        return Err(Error::LengthMismatch { left: spec.ell(), right: r.len() });
    }
    let tilde = suppression_orders(spec);
    let n = spec.orders();
    let ell = spec.ell();
    let mut best = 0;
    let mut parity_below = 0u32;
    for i in 0..ell {
        let ri = r.get(i) as u32;
        let sum_above: u32 = ((i + 1)..ell).map(|k| r.get(k) as u32 * (n[k] & 1)).sum();
        let term = ri * (parity_below ^ 1) * tilde[i] + sum_above;
        best = best.max(term);
        parity_below ^= ri * (n[i] & 1);
    }
    Ok(best)
}

/// Order of the sequence as a whole: the smallest predicted order over r ≠ 0.
pub fn predict_overall(spec: &NuddSpec) -> u32 {
    ErrorVector::all(spec.ell())
        .skip(1)
        .map(|r| predict_order(spec, r).expect("lengths agree"))
        .min()
        .unwrap_or(0)
}

/// The naive expectation `max_i r_i·N_i`.
pub fn naive_order(spec: &NuddSpec, r: ErrorVector) -> Result<u32> {
    if r.len() != spec.ell() {
        return Err(Error::LengthMismatch { left: spec.ell(), right: r.len() });
    }
    Ok((0..spec.ell()).map(|i| r.get(i) as u32 * spec.order(i)).max().unwrap_or(0))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Lemma4Status {
    /// min over inner r of odd parity of Ň equals the smallest odd inner order.
    Checked { minimum: u32, expected: u32 },
    /// No inner layer has odd order, so the statement is vacuous.
    Skipped,
}

impl Lemma4Status {
    pub fn holds(&self) -> bool {
        match self {
            Lemma4Status::Checked { minimum, expected } => minimum == expected,
            Lemma4Status::Skipped => true,
        }
    }
}

/// Outcome of the two structural checks on the predictor, applied to the
/// sequence of the first ℓ−1 layers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaReport {
    /// Subadditivity: Ň(⊕_a r^a) ≤ Σ_a Ň(r^a) on random decompositions.
    pub subadditivity_trials: usize,
    pub subadditivity_violations: usize,
    /// First violating decomposition, if any.
    pub first_violation: Option<Vec<ErrorVector>>,
    pub odd_parity_minimum: Lemma4Status,
}

impl LemmaReport {
    pub fn holds(&self) -> bool {
        self.subadditivity_violations == 0 && self.odd_parity_minimum.holds()
    }
}

pub fn lemma_checks(spec: &NuddSpec, trials: usize, seed: u64) -> Result<LemmaReport> {
    let inner = spec
        .inner()
        .ok_or_else(|| Error::InvalidSpec("lemma checks need at least two layers".into()))?;
    let ell = inner.ell();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut first = None;
    for _ in 0..trials {
        let m = rng.random_range(2..=6usize);
        let parts: Vec<ErrorVector> =
            (0..m).map(|_| ErrorVector::new(rng.random_range(0..1u32 << ell), ell)).collect();
        let total = parts.iter().fold(ErrorVector::zero(ell), |a, b| a.xor(*b).expect("same length"));
        let lhs = predict_order(&inner, total)?;
        let mut rhs = 0;
        for p in &parts {
            rhs += predict_order(&inner, *p)?;
        }
        if lhs > rhs {
            violations += 1;
            first.get_or_insert(parts);
        }
    }
    let odd_min = inner.orders().iter().copied().filter(|n| n % 2 == 1).min();
    let odd_parity_minimum = match odd_min {
        None => Lemma4Status::Skipped,
        Some(expected) => {
            let mut minimum = u32::MAX;
            for r in ErrorVector::all(ell) {
                let par = (0..ell).fold(0, |p, k| p ^ (r.get(k) as u32 * (inner.order(k) & 1)));
                if par == 1 {
                    minimum = minimum.min(predict_order(&inner, r)?);
                }
            }
            Lemma4Status::Checked { minimum, expected }
        }
    };
    Ok(LemmaReport {
        subadditivity_trials: trials,
        subadditivity_violations: violations,
        first_violation: first,
        odd_parity_minimum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Precision {
        Precision::new(40).unwrap()
    }

    fn spec(n: &[u32]) -> NuddSpec {
        NuddSpec::new(n).unwrap()
    }

    fn ev(s: &str) -> ErrorVector {
        s.parse().unwrap()
    }

    #[test]
    fn trivial_word_is_inverse_factorial() {
        let s = spec(&[2, 3]);
        let w: ErrorWord = "00 00 00".parse().unwrap();
        let f = coefficient(&s, &w, p()).unwrap();
        assert!((f.to_f64() - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn udd1_first_order_vanishes() {
        let s = spec(&[1]);
        let f = coefficient(&s, &"1".parse().unwrap(), p()).unwrap();
        assert!(f.abs() < p().tolerance(2));
    }

    #[test]
    fn engine_matches_oracle_low_order() {
        let s = spec(&[2, 1]);
        for w in ["10", "01 11", "11 01"] {
            let w: ErrorWord = w.parse().unwrap();
            let a = coefficient(&s, &w, p()).unwrap();
            let b = oracle_coefficient(&s, &w, p(), 1).unwrap();
            assert!((&a - &b).abs() < p().tolerance(4), "{w}");
        }
    }

    #[test]
    fn predictor_examples() {
        let s = spec(&[7, 5, 3, 1]);
        assert_eq!(predict_order(&s, ev("1111")).unwrap(), 10);
        assert_eq!(naive_order(&s, ev("1111")).unwrap(), 7);
        let s = spec(&[2, 4, 1, 6]);
        assert_eq!(suppression_orders(&s), alloc::vec![2, 4, 1, 2]);
        assert_eq!(predict_order(&s, ev("1001")).unwrap(), 2);
        assert_eq!(predict_order(&s, ev("0101")).unwrap(), 4);
        assert_eq!(predict_order(&s, ev("0011")).unwrap(), 1);
        assert_eq!(predict_order(&s, ev("0000")).unwrap(), 0);
        assert_eq!(predict_overall(&s), 1);
    }

    #[test]
    fn word_parsing() {
        let w: ErrorWord = "10;01 11".parse().unwrap();
        assert_eq!(w.len(), 3);
        assert_eq!(w.resultant(), ev("00"));
        assert!("10 011".parse::<ErrorWord>().is_err());
        assert!("".parse::<ErrorWord>().is_err());
    }

    #[test]
    fn budget_guard() {
        let s = spec(&[1, 1, 1, 1]);
        let e = vanishing_order_with_budget(&s, ev("1111"), 8, p(), 1000).unwrap_err();
        assert!(matches!(e, Error::BudgetExceeded { .. }));
    }
}
