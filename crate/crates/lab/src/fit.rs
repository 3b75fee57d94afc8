//! Log-log slope fits and decoupling-order reports.

use nudd_core::coefficients::{naive_order, predict_order, predict_overall};
use nudd_core::errortypes::ErrorVector;
use nudd_core::{MpReal, NuddSpec, Precision};

use crate::sweep::SweepResults;

/// A fit is confident when the slope is this close to an integer...
pub const SLOPE_SLACK: f64 = 0.2;
/// ...and the RMS residual is at most this many decades.
pub const RESIDUAL_SLACK: f64 = 0.05;

#[derive(Clone, Debug, PartialEq)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    /// RMS deviation from the line, in decades.
    pub residual: f64,
    pub points: usize,
}

impl Fit {
    /// Decoupling order: the measure scales as `(Jτ)^(order+1)`.
    pub fn order(&self) -> i64 {
        self.slope.round() as i64 - 1
    }

    pub fn confident(&self) -> bool {
        (self.slope - self.slope.round()).abs() <= SLOPE_SLACK && self.residual <= RESIDUAL_SLACK
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FitOutcome {
    Fitted(Fit),
    /// Fewer than three usable points above the precision floor.
    BelowFloor { usable: usize },
}

impl FitOutcome {
    pub fn fit(&self) -> Option<&Fit> {
        match self {
            FitOutcome::Fitted(f) => Some(f),
            FitOutcome::BelowFloor { .. } => None,
        }
    }
}

/// Ordinary least squares of `y` on `x`.
pub fn least_squares(x: &[f64], y: &[f64]) -> Option<Fit> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    Some(Fit { slope, intercept, residual: (ss / nf).sqrt(), points: n })
}

/// Values at or below `10^(−digits+20)` are precision noise and are dropped.
pub fn precision_floor(digits: u32) -> MpReal {
    Precision::new(digits).map(|p| p.tolerance(20)).unwrap_or_else(|_| MpReal::zero(Precision::default()))
}

/// Fits `log10(y)` against `x` over the points with `x` in `window`.
pub fn fit_series(x: &[f64], y: &[&MpReal], window: (f64, f64), floor: &MpReal) -> FitOutcome {
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (&a, b) in x.iter().zip(y) {
        if a < window.0 - 1e-9 || a > window.1 + 1e-9 {
            continue;
        }
        if b.is_zero() || !b.is_finite() || b.abs() <= *floor {
            continue;
        }
        xs.push(a);
        ys.push(b.log10_abs_f64());
    }
    if xs.len() < 3 {
        return FitOutcome::BelowFloor { usable: xs.len() };
    }
    FitOutcome::Fitted(least_squares(&xs, &ys).expect("three distinct abscissae"))
}

#[derive(Clone, Debug)]
pub struct ErrorEntry {
    pub r: ErrorVector,
    pub fit: FitOutcome,
    pub predicted: u32,
    pub naive: u32,
}

impl ErrorEntry {
    pub fn numeric(&self) -> Option<i64> {
        self.fit.fit().map(Fit::order)
    }

    /// The lower-bound law is broken: a fitted order below the prediction.
    pub fn violates(&self) -> bool {
        self.numeric().is_some_and(|n| n < self.predicted as i64)
    }
}

#[derive(Clone, Debug)]
pub struct OrderReport {
    pub spec: NuddSpec,
    pub window: (f64, f64),
    /// Fit of D, and the predicted overall order min N_i.
    pub overall: FitOutcome,
    pub overall_predicted: u32,
    /// Every nontrivial error type, in `ErrorVector::all` order.
    pub per_error: Vec<ErrorEntry>,
}

impl OrderReport {
    pub fn violations(&self) -> Vec<ErrorVector> {
        self.per_error.iter().filter(|e| e.violates()).map(|e| e.r).collect()
    }

    pub fn overall_violates(&self) -> bool {
        self.overall.fit().is_some_and(|f| f.order() < self.overall_predicted as i64)
    }
}

pub fn fit_orders(res: &SweepResults, spec: &NuddSpec, window: (f64, f64)) -> nudd_core::Result<OrderReport> {
    let x: Vec<f64> = res.points.iter().map(|p| p.log10_jtau).collect();
    let floor = precision_floor(res.digits);
    let d: Vec<&MpReal> = res.points.iter().map(|p| &p.d_mean).collect();
    let overall = fit_series(&x, &d, window, &floor);
    let mut per_error = Vec::new();
    if let Some(first) = res.points.first() {
        for (k, (r, _)) in first.e_mean.iter().enumerate() {
            if r.is_zero() {
                continue;
            }
            let y: Vec<&MpReal> = res.points.iter().map(|p| &p.e_mean[k].1).collect();
            per_error.push(ErrorEntry {
                r: *r,
                fit: fit_series(&x, &y, window, &floor),
                predicted: predict_order(spec, *r)?,
                naive: naive_order(spec, *r)?,
            });
        }
    }
    Ok(OrderReport { spec: spec.clone(), window, overall, overall_predicted: predict_overall(spec), per_error })
}
