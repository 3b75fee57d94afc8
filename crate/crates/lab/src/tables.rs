//! Error-type grids rendered as Markdown and CSV.
//!
//! Rows enumerate the inner components (r₁,r₂), columns the outer ones
//! (r₃,r₄), each in the order 00, 10, 01, 11. Other ℓ split the bits the same
//! way: the first ⌊ℓ/2⌋ components index rows.

use std::fmt::Write as _;

use nudd_core::coefficients::{naive_order, predict_order};
use nudd_core::errortypes::{ErrorVector, GeneratorTable};
use nudd_core::pauli::label;
use nudd_core::NuddSpec;

use crate::fit::{FitOutcome, OrderReport};

/// `(row vectors, column vectors)`; cell `(a, b)` is the error type `a ⊕ b`.
pub fn layout(ell: usize) -> (Vec<u32>, Vec<u32>) {
    let rb = ell / 2;
    let rows = (0..1u32 << rb).collect();
    let cols = (0..1u32 << (ell - rb)).map(|c| c << rb).collect();
    (rows, cols)
}

fn bits_label(bits: u32, from: usize, to: usize) -> String {
    (from..to).map(|i| if bits >> i & 1 == 1 { '1' } else { '0' }).collect()
}

fn grid_markdown<F: FnMut(ErrorVector) -> String>(ell: usize, mut cell: F) -> String {
    let rb = ell / 2;
    let (rows, cols) = layout(ell);
    let mut s = String::new();
    let row_head: String = (1..=rb).map(|i| format!("r{i}")).collect();
    let col_head: String = (rb + 1..=ell).map(|i| format!("r{i}")).collect();
    let _ = write!(s, "| {} \\ {} |", if row_head.is_empty() { "-" } else { &row_head }, col_head);
    for &c in &cols {
        let _ = write!(s, " {} |", bits_label(c, rb, ell));
    }
    s.push('\n');
    s.push_str("|---|");
    for _ in &cols {
        s.push_str("---|");
    }
    s.push('\n');
    for &r in &rows {
        let _ = write!(s, "| {} |", if rb == 0 { "-".to_string() } else { bits_label(r, 0, rb) });
        for &c in &cols {
            let _ = write!(s, " {} |", cell(ErrorVector::new(r | c, ell)));
        }
        s.push('\n');
    }
    s
}

fn grid_order(ell: usize) -> Vec<ErrorVector> {
    let (rows, cols) = layout(ell);
    rows.iter().flat_map(|&r| cols.iter().map(move |&c| ErrorVector::new(r | c, ell))).collect()
}

/// Theorem-1 predictions, cells `predicted (naive)`.
pub fn predict_markdown(spec: &NuddSpec) -> nudd_core::Result<String> {
    let mut err = None;
    let body = grid_markdown(spec.ell(), |r| match (predict_order(spec, r), naive_order(spec, r)) {
        (Ok(p), Ok(n)) => format!("{p} ({n})"),
        (Err(e), _) | (_, Err(e)) => {
            err.get_or_insert(e);
            "?".into()
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(format!("Predicted decoupling orders for N = {spec}; cells are `predicted (naive)`.\n\n{body}"))
}

pub fn predict_csv(spec: &NuddSpec) -> nudd_core::Result<String> {
    let mut s = String::from("r,predicted,naive\n");
    for r in grid_order(spec.ell()) {
        let _ = writeln!(s, "{},{},{}", r.compact(), predict_order(spec, r)?, naive_order(spec, r)?);
    }
    Ok(s)
}

fn overall_line(report: &OrderReport) -> String {
    match &report.overall {
        FitOutcome::Fitted(f) => format!(
            "slope {:.3}, order {} (predicted min N = {}), residual {:.3}",
            f.slope,
            f.order(),
            report.overall_predicted,
            f.residual
        ),
        FitOutcome::BelowFloor { usable } => format!("below precision floor ({usable} usable points)"),
    }
}

/// Overall order only, for sweeps run without error measures.
pub fn overall_markdown(report: &OrderReport) -> String {
    format!(
        "Fitted overall decoupling order for N = {}, window log10(Jτ) ∈ [{}, {}].\nOverall (D): {}.\n",
        report.spec,
        report.window.0,
        report.window.1,
        overall_line(report)
    )
}

/// Fitted orders; cells `numeric/predicted/naive`, `!` marks numeric < predicted
/// (a broken lower bound) and `+` marks numeric > predicted.
pub fn report_markdown(report: &OrderReport) -> nudd_core::Result<String> {
    if report.per_error.is_empty() {
        return Err(nudd_core::Error::InvalidArgument("order report has no error types".into()));
    }
    let ell = report.spec.ell();
    let body = grid_markdown(ell, |r| {
        if r.is_zero() {
            return "–".into();
        }
        let Some(e) = report.per_error.iter().find(|e| e.r == r) else {
            return "?".into();
        };
        let num = match e.numeric() {
            Some(n) => n.to_string(),
            None => "floor".into(),
        };
        let mark = match e.numeric() {
            Some(n) if n < e.predicted as i64 => " !",
            Some(n) if n > e.predicted as i64 => " +",
            _ => "",
        };
        format!("{num}/{}/{}{mark}", e.predicted, e.naive)
    });
    let overall = overall_line(report);
    Ok(format!(
        "Fitted decoupling orders for N = {}, window log10(Jτ) ∈ [{}, {}].\n\
         Overall (D): {overall}.\n\
         Cells are `numeric/predicted/naive`; `+` numeric above prediction, `!` numeric below prediction.\n\n{body}",
        report.spec, report.window.0, report.window.1
    ))
}

pub fn report_csv(report: &OrderReport) -> String {
    let mut s = String::from("r,slope,numeric,predicted,naive,residual,status\n");
    let mut row = |name: &str, fit: &FitOutcome, predicted: u32, naive: Option<u32>| {
        let naive = naive.map(|n| n.to_string()).unwrap_or_default();
        match fit {
            FitOutcome::Fitted(f) => {
                let status = if f.order() < predicted as i64 {
                    "below-prediction"
                } else if !f.confident() {
                    "unconfident"
                } else {
                    "ok"
                };
                let _ = writeln!(
                    s,
                    "{name},{:.6},{},{predicted},{naive},{:.6},{status}",
                    f.slope,
                    f.order(),
                    f.residual
                );
            }
            FitOutcome::BelowFloor { .. } => {
                let _ = writeln!(s, "{name},,,{predicted},{naive},,below-floor");
            }
        }
    };
    row("D", &report.overall, report.overall_predicted, None);
    for r in grid_order(report.spec.ell()) {
        if let Some(e) = report.per_error.iter().find(|e| e.r == r) {
            row(&r.compact(), &e.fit, e.predicted, Some(e.naive));
        }
    }
    s
}

/// Generator-table contents as Pauli labels.
pub fn generator_markdown(table: &GeneratorTable) -> String {
    grid_markdown(table.ell(), |r| label(table.get(r)).unwrap_or_else(|| "(not a Pauli string)".into()))
}
