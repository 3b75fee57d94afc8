//! Parameter sweeps over the minimum pulse interval τ.
//!
//! Work is fanned out over (realization, τ) pairs on scoped threads. Each item
//! writes into its own slot and realizations are averaged in index order, so
//! the output does not depend on the worker count.

use std::io::{self, Write};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use nudd_core::errortypes::{ErrorDecomposition, ErrorVector};
use nudd_core::simulator::{run_point, BathSpec, ModelHamiltonian, Propagator};
use nudd_core::{MathCtx, MpReal, Precision};

use crate::config::SweepConfig;

/// First line of every sweep CSV; bump when columns change.
pub const CSV_VERSION_LINE: &str = "# nudd sweep v1";

#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub log10_jtau: f64,
    pub tau: MpReal,
    pub t: MpReal,
    pub d_mean: MpReal,
    /// Mean E_r over realizations, in `ErrorVector::all` order.
    pub e_mean: Vec<(ErrorVector, MpReal)>,
}

#[derive(Clone, Debug)]
pub struct SweepResults {
    pub points: Vec<SweepPoint>,
    pub realizations: usize,
    pub digits: u32,
}

impl SweepResults {
    pub fn ell(&self) -> usize {
        self.points.first().and_then(|p| p.e_mean.first()).map(|(r, _)| r.len()).unwrap_or(0)
    }
}

/// Runs `f(0..n)` on up to `workers` threads; results come back in index order.
pub fn parallel_map<T, F>(n: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = workers.clamp(1, n.max(1));
    if workers == 1 {
        return (0..n).map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..n).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= n {
                    break;
                }
                let v = f(k);
                slots.lock().expect("no worker panicked while holding the lock")[k] = Some(v);
            });
        }
    });
    slots.into_inner().expect("workers joined").into_iter().map(|v| v.expect("every slot filled")).collect()
}

pub fn bath_spec(cfg: &SweepConfig) -> BathSpec {
    BathSpec {
        n_bath_spins: cfg.n_bath_spins,
        j: cfg.j,
        j00: cfg.j00,
        seed: cfg.seed,
        normalize_bath: cfg.normalize_bath,
    }
}

pub fn precision(cfg: &SweepConfig) -> nudd_core::Result<Precision> {
    Precision::new(cfg.digits)
}

/// One Hamiltonian (with eigendecomposition) per realization. These depend only
/// on the bath settings, seed and precision, so they can be reused across
/// sequence orders and control sets.
pub fn build_models(cfg: &SweepConfig) -> nudd_core::Result<Vec<ModelHamiltonian>> {
    let prec = precision(cfg)?;
    let bath = bath_spec(cfg);
    parallel_map(cfg.realizations, cfg.worker_count(), |k| ModelHamiltonian::assemble(&bath, k as u64, prec))
        .into_iter()
        .collect()
}

/// τ for each grid abscissa, `10^x · unit`.
pub fn taus(cfg: &SweepConfig, prec: Precision) -> Vec<MpReal> {
    let mut ctx = MathCtx::new();
    let ln10 = ctx.ln(&MpReal::from_i64(10, prec));
    let unit = MpReal::from_f64(cfg.time_unit(), prec);
    cfg.grid()
        .into_iter()
        .map(|x| &ctx.exp(&(&MpReal::from_f64(x, prec) * &ln10)) * &unit)
        .collect()
}

pub fn run_sweep(cfg: &SweepConfig) -> nudd_core::Result<SweepResults> {
    let models = build_models(cfg)?;
    run_sweep_with_models(cfg, &models)
}

/// Sweep on prebuilt models (`models[k]` is realization k).
pub fn run_sweep_with_models(cfg: &SweepConfig, models: &[ModelHamiltonian]) -> nudd_core::Result<SweepResults> {
    if models.len() != cfg.realizations {
        return Err(nudd_core::Error::LengthMismatch { left: models.len(), right: cfg.realizations });
    }
    let prec = precision(cfg)?;
    let moos = cfg.moos.moos(prec)?;
    let workers = cfg.worker_count();
    let parts: Vec<ErrorDecomposition> = if cfg.error_measures {
        parallel_map(models.len(), workers, |k| models[k].partition(&moos)).into_iter().collect::<nudd_core::Result<_>>()?
    } else {
        Vec::new()
    };
    let props: Vec<Propagator<'_>> =
        models.iter().map(|m| Propagator::new(m, &cfg.spec, &moos)).collect::<nudd_core::Result<_>>()?;

    let taus = taus(cfg, prec);
    let np = taus.len();
    let runs = parallel_map(models.len() * np, workers, |item| {
        let (k, p) = (item / np, item % np);
        run_point(&props[k], parts.get(k), &taus[p])
    });
    let runs: Vec<_> = runs.into_iter().collect::<nudd_core::Result<_>>()?;

    let inv = MpReal::ratio(1, models.len() as i64, prec);
    let grid = cfg.grid();
    let points = (0..np)
        .map(|p| {
            let mut d = MpReal::zero(prec);
            let mut e: Vec<(ErrorVector, MpReal)> =
                runs[p].e.iter().map(|(r, _)| (*r, MpReal::zero(prec))).collect();
            for k in 0..models.len() {
                let run = &runs[k * np + p];
                d += &run.d;
                for (acc, (_, v)) in e.iter_mut().zip(&run.e) {
                    acc.1 += v;
                }
            }
            SweepPoint {
                log10_jtau: grid[p],
                tau: taus[p].clone(),
                t: runs[p].t.clone(),
                d_mean: &d * &inv,
                e_mean: e.into_iter().map(|(r, v)| (r, &v * &inv)).collect(),
            }
        })
        .collect();
    Ok(SweepResults { points, realizations: models.len(), digits: cfg.digits })
}

/// Significant digits written per value (the text rendering goes through f64).
pub const CSV_SIG_DIGITS: usize = 16;

pub fn write_csv<W: Write>(res: &SweepResults, mut w: W) -> io::Result<()> {
    writeln!(w, "{CSV_VERSION_LINE}")?;
    write!(w, "log10_Jtau,tau,T,D_mean")?;
    if let Some(p) = res.points.first() {
        for (r, _) in &p.e_mean {
            write!(w, ",E_{}", r.compact())?;
        }
    }
    writeln!(w)?;
    for p in &res.points {
        write!(
            w,
            "{},{},{},{}",
            p.log10_jtau,
            p.tau.to_sci(CSV_SIG_DIGITS),
            p.t.to_sci(CSV_SIG_DIGITS),
            p.d_mean.to_sci(CSV_SIG_DIGITS)
        )?;
        for (_, v) in &p.e_mean {
            write!(w, ",{}", v.to_sci(CSV_SIG_DIGITS))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn csv_string(res: &SweepResults) -> String {
    let mut buf = Vec::new();
    write_csv(res, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ASCII output")
}
