//! UDD and nested-UDD pulse schedules.
//!
//! Layer indices are 0-based throughout (`0` is the innermost, fastest layer);
//! pulse indices `j` within a layer are 1-based, as in the usual UDD formulas.
//! Times are normalized to the total evolution time, η ∈ [0, 1].

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::mp::{MathCtx, MpReal, Precision};

/// Refuse timelines that would not fit in memory anyway.
pub const MAX_ATOMIC_INTERVALS: u64 = 1 << 24;

/// A nested UDD sequence: one UDD order per layer, innermost first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NuddSpec {
    orders: Vec<u32>,
    labels: Vec<String>,
}

impl NuddSpec {
    pub fn new(orders: &[u32]) -> Result<Self> {
        let labels = (1..=orders.len()).map(|i| format!("Ω{i}")).collect();
        Self::with_labels(orders, labels)
    }

    pub fn with_labels(orders: &[u32], labels: Vec<String>) -> Result<Self> {
        if orders.is_empty() {
            return Err(Error::InvalidSpec("at least one layer is required".into()));
        }
        if orders.len() > 16 {
            return Err(Error::InvalidSpec(format!("{} layers exceed the supported 16", orders.len())));
        }
        if let Some(i) = orders.iter().position(|&n| n == 0) {
            return Err(Error::InvalidSpec(format!("layer {} has order 0; orders must be >= 1", i + 1)));
        }
        if labels.len() != orders.len() {
            return Err(Error::InvalidSpec(format!(
                "{} labels for {} layers",
                labels.len(),
                orders.len()
            )));
        }
        let spec = Self { orders: orders.to_vec(), labels };
        let count = spec.atomic_interval_count();
        if count > MAX_ATOMIC_INTERVALS {
            return Err(Error::InvalidSpec(format!(
                "{count} atomic intervals exceed the limit of {MAX_ATOMIC_INTERVALS}"
            )));
        }
        Ok(spec)
    }

    /// Number of layers ℓ.
    pub fn ell(&self) -> usize {
        self.orders.len()
    }

    pub fn orders(&self) -> &[u32] {
        &self.orders
    }

    pub fn order(&self, layer: usize) -> u32 {
        self.orders[layer]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// The sequence formed by the first ℓ−1 layers, if ℓ ≥ 2.
    pub fn inner(&self) -> Option<Self> {
        (self.ell() >= 2).then(|| Self {
            orders: self.orders[..self.ell() - 1].to_vec(),
            labels: self.labels[..self.ell() - 1].to_vec(),
        })
    }

    /// Pulses fired by `layer` per cycle: N if even, N+1 if odd (the extra one
    /// restores the control frame at the end of the cycle).
    pub fn pulses_per_cycle(&self, layer: usize) -> u32 {
        let n = self.orders[layer];
        n + (n & 1)
    }

    /// `Π (N_i + 1)` — the number of pulse-free atomic intervals.
    pub fn atomic_interval_count(&self) -> u64 {
        self.orders.iter().fold(1u64, |acc, &n| acc.saturating_mul(n as u64 + 1))
    }

    /// How often `layer`'s cycle repeats: `Π_{k>layer} (N_k + 1)`.
    pub fn cycle_repetitions(&self, layer: usize) -> u64 {
        self.orders[layer + 1..].iter().map(|&n| n as u64 + 1).product()
    }
}

impl core::fmt::Display for NuddSpec {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str("(")?;
        for (i, n) in self.orders.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{n}")?;
        }
        f.write_str(")")
    }
}

/// UDD pulse fractions `sin²(jπ / (2(N+1)))` for `j = 1..=N`.
pub fn udd_fractions(n: u32, prec: Precision) -> Result<Vec<MpReal>> {
    check_order(n)?;
    let mut ctx = MathCtx::new();
    Ok(fractions_with(&mut ctx, n, prec)[1..=n as usize].to_vec())
}

/// UDD interval lengths `s_j = sin(π/(2(N+1))) · sin((2j−1)π/(2(N+1)))`, `j = 1..=N+1`.
pub fn udd_intervals(n: u32, prec: Precision) -> Result<Vec<MpReal>> {
    check_order(n)?;
    Ok(intervals_with(&mut MathCtx::new(), n, prec))
}

fn check_order(n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidSpec("UDD order must be >= 1".into()));
    }
    Ok(())
}

/// Fractions for `j = 0..=N+1`, with the endpoints exact.
fn fractions_with(ctx: &mut MathCtx, n: u32, prec: Precision) -> Vec<MpReal> {
    let den = 2 * (n as i64 + 1);
    let pi = ctx.pi(prec);
    let mut out = Vec::with_capacity(n as usize + 2);
    out.push(MpReal::zero(prec));
    for j in 1..=n as i64 {
        let s = ctx.sin(&pi.mul_i64(j).div_i64(den));
        out.push(&s * &s);
    }
    out.push(MpReal::one(prec));
    out
}

fn intervals_with(ctx: &mut MathCtx, n: u32, prec: Precision) -> Vec<MpReal> {
    let den = 2 * (n as i64 + 1);
    let pi = ctx.pi(prec);
    let base = ctx.sin(&pi.div_i64(den));
    (1..=n as i64 + 1)
        .map(|j| &base * &ctx.sin(&pi.mul_i64(2 * j - 1).div_i64(den)))
        .collect()
}

/// Per-layer fractions and intervals, computed once per spec.
#[derive(Clone, Debug)]
pub struct LayerTables {
    /// `fractions[i][j]`, `j = 0..=N_i+1`.
    pub fractions: Vec<Vec<MpReal>>,
    /// `intervals[i][j-1]`, `j = 1..=N_i+1`.
    pub intervals: Vec<Vec<MpReal>>,
}

impl LayerTables {
    pub fn new(spec: &NuddSpec, prec: Precision) -> Self {
        let mut ctx = MathCtx::new();
        let fractions = spec.orders().iter().map(|&n| fractions_with(&mut ctx, n, prec)).collect();
        let intervals = spec.orders().iter().map(|&n| intervals_with(&mut ctx, n, prec)).collect();
        Self { fractions, intervals }
    }
}

/// Pulse time η for the multi-index `idx` (`idx[i]` = j for layer i, 1-based).
///
/// Walks the nesting from the outermost layer: entering sub-interval `j` of a
/// cycle spanning `[base, base+scale]` moves to
/// `[base + scale·sin²((j−1)π/2(N+1)), … + scale·s_j]`; the innermost index
/// then selects a pulse inside the innermost cycle.
pub fn nudd_timing(spec: &NuddSpec, idx: &[u32], prec: Precision) -> Result<MpReal> {
    let tables = LayerTables::new(spec, prec);
    timing_with(spec, &tables, idx, prec)
}

fn timing_with(spec: &NuddSpec, t: &LayerTables, idx: &[u32], prec: Precision) -> Result<MpReal> {
    if idx.len() != spec.ell() {
        return Err(Error::InvalidArgument(format!(
            "multi-index has {} entries for {} layers",
            idx.len(),
            spec.ell()
        )));
    }
    for (i, &j) in idx.iter().enumerate() {
        if j == 0 || j > spec.order(i) + 1 {
            return Err(Error::InvalidArgument(format!(
                "index {j} out of range 1..={} for layer {}",
                spec.order(i) + 1,
                i + 1
            )));
        }
    }
    let mut base = MpReal::zero(prec);
    let mut scale = MpReal::one(prec);
    for i in (1..spec.ell()).rev() {
        let j = idx[i] as usize;
        base += &(&scale * &t.fractions[i][j - 1]);
        scale *= &t.intervals[i][j - 1];
    }
    Ok(&base + &(&scale * &t.fractions[0][idx[0] as usize]))
}

/// A maximal pulse-free interval of the nested sequence.
#[derive(Clone, Debug)]
pub struct AtomicInterval {
    pub start: MpReal,
    pub length: MpReal,
    /// `index[i]` = sub-interval number (1-based) within layer i's cycle.
    pub index: Vec<u32>,
    /// Bit i set iff the modulation function `f_i` is −1 on this interval.
    pub signs: u64,
    /// Bit i set iff layer i pulses at the end of this interval.
    pub fires: u64,
}

/// Merged pulses at a single instant, applied in ascending layer order.
#[derive(Clone, Debug)]
pub struct PulseEvent {
    pub time: MpReal,
    pub layers: Vec<usize>,
}

/// The full pulse timeline on η ∈ [0, 1].
#[derive(Clone, Debug)]
pub struct Timeline {
    spec: NuddSpec,
    pub intervals: Vec<AtomicInterval>,
    pub events: Vec<PulseEvent>,
}

pub fn build_timeline(spec: &NuddSpec, prec: Precision) -> Timeline {
    let tables = LayerTables::new(spec, prec);
    build_timeline_with(spec, &tables, prec)
}

pub fn build_timeline_with(spec: &NuddSpec, tables: &LayerTables, prec: Precision) -> Timeline {
    let ell = spec.ell();
    let mut intervals = Vec::with_capacity(spec.atomic_interval_count() as usize);
    let mut idx = alloc::vec![0u32; ell];
    walk(spec, tables, ell - 1, MpReal::zero(prec), MpReal::one(prec), &mut idx, &mut intervals);

    let mut events = Vec::new();
    for k in 0..intervals.len() {
        let fires = intervals[k].fires;
        if fires == 0 {
            continue;
        }
        let time = match intervals.get(k + 1) {
            Some(next) => next.start.clone(),
            None => MpReal::one(prec),
        };
        let layers = (0..ell).filter(|i| fires >> i & 1 == 1).collect();
        events.push(PulseEvent { time, layers });
    }
    Timeline { spec: spec.clone(), intervals, events }
}

fn walk(
    spec: &NuddSpec,
    t: &LayerTables,
    layer: usize,
    base: MpReal,
    scale: MpReal,
    idx: &mut Vec<u32>,
    out: &mut Vec<AtomicInterval>,
) {
    let n = spec.order(layer);
    for j in 1..=n + 1 {
        idx[layer] = j;
        let sub_base = &base + &(&scale * &t.fractions[layer][j as usize - 1]);
        let sub_scale = &scale * &t.intervals[layer][j as usize - 1];
        if layer == 0 {
            out.push(AtomicInterval {
                start: sub_base,
                length: sub_scale,
                index: idx.clone(),
                signs: signs_of(idx),
                fires: fires_after(spec, idx),
            });
        } else {
            walk(spec, t, layer - 1, sub_base, sub_scale, idx, out);
        }
    }
}

fn signs_of(idx: &[u32]) -> u64 {
    idx.iter().enumerate().fold(0, |m, (i, &j)| m | (((j as u64 - 1) & 1) << i))
}

/// Layers pulsing at the end of the interval `idx`: layer i fires when every
/// inner layer has just finished its cycle and layer i's own sub-interval is
/// followed by a pulse (any but the last, or the last when N_i is odd).
fn fires_after(spec: &NuddSpec, idx: &[u32]) -> u64 {
    let mut mask = 0;
    for i in 0..spec.ell() {
        let n = spec.order(i);
        if idx[i] <= n || n % 2 == 1 {
            mask |= 1 << i;
        }
        if idx[i] != n + 1 {
            break;
        }
    }
    mask
}

impl Timeline {
    pub fn spec(&self) -> &NuddSpec {
        &self.spec
    }

    /// Index of the atomic interval containing η (half-open), if η ∈ [0, 1).
    pub fn locate(&self, eta: &MpReal) -> Option<usize> {
        if eta.is_negative() || self.intervals.is_empty() {
            return None;
        }
        let k = self.intervals.partition_point(|iv| &iv.start <= eta);
        let k = k.checked_sub(1)?;
        let iv = &self.intervals[k];
        if eta >= &(&iv.start + &iv.length) && k + 1 == self.intervals.len() {
            return None;
        }
        Some(k)
    }

    /// `f_layer(η) ∈ {+1, −1}`.
    pub fn modulation(&self, layer: usize, eta: &MpReal) -> Result<i8> {
        if layer >= self.spec.ell() {
            return Err(Error::InvalidArgument(format!("layer {layer} out of range")));
        }
        let k = self
            .locate(eta)
            .ok_or_else(|| Error::InvalidArgument(format!("η = {eta} outside [0, 1)")))?;
        Ok(sign(self.intervals[k].signs, layer))
    }

    /// Number of pulses of `layer` across the whole timeline.
    pub fn pulse_count(&self, layer: usize) -> usize {
        self.events.iter().filter(|e| e.layers.contains(&layer)).count()
    }

    /// Shortest atomic interval.
    pub fn min_interval(&self) -> MpReal {
        let mut it = self.intervals.iter().map(|iv| &iv.length);
        let first = it.next().expect("timeline is never empty").clone();
        it.fold(first, |m, l| m.min(l))
    }
}

fn sign(mask: u64, layer: usize) -> i8 {
    if mask >> layer & 1 == 1 {
        -1
    } else {
        1
    }
}

/// `f_layer(η)` for a one-off query; build a [`Timeline`] for repeated use.
pub fn modulation(spec: &NuddSpec, layer: usize, eta: &MpReal, prec: Precision) -> Result<i8> {
    build_timeline(spec, prec).modulation(layer, eta)
}

/// The shortest pulse interval, `Π_i s_1^{(i)}` (the first sub-interval of
/// every layer).
pub fn min_pulse_interval(spec: &NuddSpec, prec: Precision) -> MpReal {
    let mut ctx = MathCtx::new();
    let mut m = MpReal::one(prec);
    for &n in spec.orders() {
        m *= &intervals_with(&mut ctx, n, prec)[0];
    }
    m
}
