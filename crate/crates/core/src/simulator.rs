//! Two-qubit + spin-bath model under ideal-pulse NUDD.
//!
//! Free evolution uses the cached eigendecomposition, `e^{−iHt} = V e^{−iΛt} V†`.
//! The nested propagator exploits the recursive structure of the schedule:
//! a layer-i cycle is a product of layer-(i−1) cycles separated by Ω_i, and
//! UDD time symmetry (`s_j = s_{N+2−j}`) makes many of those sub-cycles
//! identical, so each distinct one is built once.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eig::{hermitian_eig, hermitian_spectral_norm, nuclear_norm, Eigen};
use crate::error::{Error, Result};
use crate::errortypes::{partition, ErrorDecomposition, ErrorVector, Moos};
use crate::matrix::CMatrix;
use crate::mp::{MathCtx, MpComplex, MpReal, Precision};
use crate::pauli::{add_scaled_pauli_string, all_strings, pauli_string, Pauli};
use crate::schedule::{build_timeline_with, min_pulse_interval, LayerTables, NuddSpec};

/// Dimension of the two-qubit system.
pub const SYSTEM_DIM: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct BathSpec {
    pub n_bath_spins: usize,
    /// System–bath coupling `J`.
    pub j: f64,
    /// Pure-bath strength `J00`.
    pub j00: f64,
    pub seed: u64,
    /// Rescale every bath operator to unit spectral norm.
    pub normalize_bath: bool,
}

impl BathSpec {
    pub fn new(seed: u64) -> Self {
        Self { n_bath_spins: 4, j: 1.0, j00: 1e-3, seed, normalize_bath: true }
    }

    pub fn bath_dim(&self) -> usize {
        1 << self.n_bath_spins
    }

    pub fn validate(&self) -> Result<()> {
        // J = 0 is allowed as a degenerate pure-bath model.
        if !(self.j >= 0.0) || !self.j.is_finite() {
            return Err(Error::InvalidArgument(alloc::format!("J must be >= 0, got {}", self.j)));
        }
        if !(self.j00 >= 0.0) || !self.j00.is_finite() {
            return Err(Error::InvalidArgument(alloc::format!("J00 must be >= 0, got {}", self.j00)));
        }
        if self.n_bath_spins == 0 || self.n_bath_spins > 6 {
            return Err(Error::InvalidArgument(alloc::format!(
                "bath spin count {} outside 1..=6",
                self.n_bath_spins
            )));
        }
        Ok(())
    }
}

/// Independent random stream for bath operator `label` (= 4λ₁+λ₂) of
/// realization `realization`. Streams never overlap, so a realization draws
/// identical coefficients however the sweep is scheduled.
pub fn bath_stream(seed: u64, realization: u64, label: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((realization << 8) | label as u64);
    rng
}

/// `B = Σ c_s · (Pauli string s)` over all `4^n` strings, `c_s ~ U[0,1)`.
pub fn build_bath_operator<R: Rng>(rng: &mut R, n_spins: usize, normalize: bool, prec: Precision) -> Result<CMatrix> {
    let strings = all_strings(n_spins);
    let coeffs: Vec<f64> = strings.iter().map(|_| rng.random::<f64>()).collect();
    bath_from_coefficients(&strings, &coeffs, normalize, prec)
}

/// Bath operator with explicit coefficients (one per entry of `all_strings`).
pub fn bath_from_coefficients(strings: &[Vec<Pauli>], coeffs: &[f64], normalize: bool, prec: Precision) -> Result<CMatrix> {
    if strings.len() != coeffs.len() || strings.is_empty() {
        return Err(Error::LengthMismatch { left: strings.len(), right: coeffs.len() });
    }
    let dim = 1 << strings[0].len();
    let mut b = CMatrix::zeros(dim, dim, prec);
    for (s, &c) in strings.iter().zip(coeffs) {
        if c != 0.0 {
            add_scaled_pauli_string(&mut b, s, &MpReal::from_f64(c, prec));
        }
    }
    if normalize {
        let norm = hermitian_spectral_norm(&b)?;
        if !norm.is_zero() {
            b = b.scale_real(&norm.recip());
        }
    }
    Ok(b)
}

/// `H` on system ⊗ bath together with its eigendecomposition.
#[derive(Clone, Debug)]
pub struct ModelHamiltonian {
    h: CMatrix,
    ds: usize,
    db: usize,
    eig: Eigen,
    v_adj: CMatrix,
}

impl ModelHamiltonian {
    /// `H = Σ_{(λ₁,λ₂)≠(0,0)} J σ_{λ₁}⊗σ_{λ₂}⊗B_{λ₁λ₂} + J00 I⊗B₀₀` for one realization.
    pub fn assemble(bath: &BathSpec, realization: u64, prec: Precision) -> Result<Self> {
        bath.validate()?;
        let db = bath.bath_dim();
        let j = MpReal::from_f64(bath.j, prec);
        let j00 = MpReal::from_f64(bath.j00, prec);
        let mut h = CMatrix::zeros(SYSTEM_DIM * db, SYSTEM_DIM * db, prec);
        for label in 0..16u32 {
            let sys = [Pauli::from_index((label >> 2) as usize), Pauli::from_index(label as usize)];
            let strength = if label == 0 { &j00 } else { &j };
            if strength.is_zero() {
                continue;
            }
            let mut rng = bath_stream(bath.seed, realization, label);
            let b = build_bath_operator(&mut rng, bath.n_bath_spins, bath.normalize_bath, prec)?;
            let term = pauli_string(&sys, prec).kron(&b.scale_real(strength));
            h = h.add(&term)?;
        }
        Self::from_matrix(h, SYSTEM_DIM, db)
    }

    /// Wraps an arbitrary Hermitian `ds·db` operator.
    pub fn from_matrix(h: CMatrix, ds: usize, db: usize) -> Result<Self> {
        if !h.is_square() || h.rows() != ds * db {
            return Err(Error::DimensionMismatch {
                op: "ModelHamiltonian",
                detail: alloc::format!("{}x{} is not {ds}x{db}-bipartite", h.rows(), h.cols()),
            });
        }
        let eig = hermitian_eig(&h)?;
        let v_adj = eig.vectors.adjoint();
        Ok(Self { h, ds, db, eig, v_adj })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.h
    }

    pub fn ds(&self) -> usize {
        self.ds
    }

    pub fn db(&self) -> usize {
        self.db
    }

    pub fn eigen(&self) -> &Eigen {
        &self.eig
    }

    pub fn precision(&self) -> Precision {
        self.h.precision()
    }

    /// Error-type decomposition against a system-level (or embedded) MOOS.
    pub fn partition(&self, moos: &Moos) -> Result<ErrorDecomposition> {
        partition(&self.h, &self.embedded(moos)?)
    }

    fn embedded(&self, moos: &Moos) -> Result<Moos> {
        if moos.dim() == self.ds * self.db {
            Ok(moos.clone())
        } else if moos.dim() == self.ds {
            Ok(moos.embed(self.db))
        } else {
            Err(Error::DimensionMismatch {
                op: "moos",
                detail: alloc::format!("operators of dim {} on a {}x{} model", moos.dim(), self.ds, self.db),
            })
        }
    }

    /// `e^{−iHt}`.
    pub fn free_evolution(&self, t: &MpReal, ctx: &mut MathCtx) -> Result<CMatrix> {
        let phases: Vec<MpComplex> = self.eig.values.iter().map(|l| ctx.cis(&-(l * t))).collect();
        let mut vd = self.eig.vectors.clone();
        vd.scale_cols(&phases);
        vd.matmul(&self.v_adj)
    }
}

/// Builds `U(T)` for one spec on one model.
#[derive(Clone, Debug)]
pub struct Propagator<'a> {
    model: &'a ModelHamiltonian,
    spec: NuddSpec,
    tables: LayerTables,
    pulses: Vec<CMatrix>,
}

impl<'a> Propagator<'a> {
    pub fn new(model: &'a ModelHamiltonian, spec: &NuddSpec, moos: &Moos) -> Result<Self> {
        if moos.ell() != spec.ell() {
            return Err(Error::LengthMismatch { left: moos.ell(), right: spec.ell() });
        }
        let pulses = model.embedded(moos)?.ops().to_vec();
        let tables = LayerTables::new(spec, model.precision());
        Ok(Self { model, spec: spec.clone(), tables, pulses })
    }

    pub fn spec(&self) -> &NuddSpec {
        &self.spec
    }

    /// Nested, memoized propagation over total time `t_total`.
    pub fn evolve(&self, t_total: &MpReal) -> Result<CMatrix> {
        let mut st = NestState::default();
        let top = self.spec.ell() - 1;
        self.cycle(top, &mut Vec::new(), t_total, &mut st)
    }

    /// Straight walk over every atomic interval and pulse event.
    pub fn evolve_reference(&self, t_total: &MpReal) -> Result<CMatrix> {
        let prec = self.model.precision();
        let timeline = build_timeline_with(&self.spec, &self.tables, prec);
        let mut ctx = MathCtx::new();
        let mut u = CMatrix::identity(self.model.ds * self.model.db, prec);
        for iv in &timeline.intervals {
            let e = self.model.free_evolution(&(t_total * &iv.length), &mut ctx)?;
            u = e.matmul(&u)?;
            for layer in 0..self.spec.ell() {
                if iv.fires >> layer & 1 == 1 {
                    u = self.pulses[layer].matmul(&u)?;
                }
            }
        }
        Ok(u)
    }

    /// Layer-`i` cycle of duration `scale`; `outer` holds the symmetry-reduced
    /// indices of layers `i+1..` (innermost first), which determine `scale`.
    fn cycle(&self, i: usize, outer: &mut Vec<u32>, scale: &MpReal, st: &mut NestState) -> Result<CMatrix> {
        let key = (i, outer.clone());
        if let Some(u) = st.cycles.get(&key) {
            return Ok(u.clone());
        }
        let n = self.spec.order(i);
        let mut u: Option<CMatrix> = None;
        for j in 1..=n + 1 {
            let sub = scale * &self.tables.intervals[i][j as usize - 1];
            outer.insert(0, j.min(n + 2 - j));
            let block = if i == 0 {
                self.free(outer, &sub, st)
            } else {
                self.cycle(i - 1, outer, &sub, st)
            };
            outer.remove(0);
            let block = block?;
            u = Some(match u {
                None => block,
                Some(prev) => block.matmul(&self.pulses[i].matmul(&prev)?)?,
            });
        }
        let mut u = u.expect("order >= 1");
        if n % 2 == 1 {
            u = self.pulses[i].matmul(&u)?;
        }
        st.cycles.insert(key, u.clone());
        Ok(u)
    }

    fn free(&self, idx: &[u32], t: &MpReal, st: &mut NestState) -> Result<CMatrix> {
        if let Some(u) = st.free.get(idx) {
            return Ok(u.clone());
        }
        let u = self.model.free_evolution(t, &mut st.ctx)?;
        st.free.insert(idx.to_vec(), u.clone());
        Ok(u)
    }
}

#[derive(Default)]
struct NestState {
    ctx: MathCtx,
    cycles: BTreeMap<(usize, Vec<u32>), CMatrix>,
    free: BTreeMap<Vec<u32>, CMatrix>,
}

/// `(1/√(dS·dB)) ‖U − I⊗Φ*‖_F` with `Φ* = Tr_S(U)/dS`, the Frobenius-optimal bath factor.
pub fn distance_d(u: &CMatrix, ds: usize, db: usize) -> Result<MpReal> {
    let prec = u.precision();
    let phi = u.partial_trace_system(ds, db)?.scale_real(&MpReal::ratio(1, ds as i64, prec));
    let diff = u.sub(&CMatrix::identity(ds, prec).kron(&phi))?;
    Ok(&diff.frobenius() / &MpReal::from_i64((ds * db) as i64, prec).sqrt())
}

/// Trace norm of `Tr_S(U · H_r)`.
pub fn error_measure_e(u: &CMatrix, part: &CMatrix, ds: usize, db: usize) -> Result<MpReal> {
    nuclear_norm(&u.partial_trace_system_of_product(part, ds, db)?)
}

/// `τ / min_pulse_interval`, the total time giving minimum pulse interval `τ`.
pub fn total_time(spec: &NuddSpec, tau: &MpReal, prec: Precision) -> MpReal {
    tau / &min_pulse_interval(spec, prec)
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub tau: MpReal,
    pub t: MpReal,
    pub u: CMatrix,
    pub d: MpReal,
    /// One entry per error type, in `ErrorVector::all` order (including 0⃗);
    /// empty when error measures were not requested.
    pub e: Vec<(ErrorVector, MpReal)>,
}

/// Evolves for minimum pulse interval `tau` and measures D, plus every E_r
/// when a decomposition is given.
pub fn run_point(prop: &Propagator<'_>, parts: Option<&ErrorDecomposition>, tau: &MpReal) -> Result<RunResult> {
    let t = total_time(prop.spec(), tau, prop.model.precision());
    let u = prop.evolve(&t)?;
    let (ds, db) = (prop.model.ds, prop.model.db);
    let d = distance_d(&u, ds, db)?;
    let e = match parts {
        Some(parts) => parts
            .iter()
            .map(|(r, part)| Ok((r, error_measure_e(&u, part, ds, db)?)))
            .collect::<Result<Vec<_>>>()?,
        None => Vec::new(),
    };
    Ok(RunResult { tau: tau.clone(), t, u, d, e })
}
