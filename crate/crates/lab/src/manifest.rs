//! JSON run manifest: config echo, versions and the conventions behind every number.

use serde_json::{json, Map, Value};

use crate::config::RawConfig;
use crate::fit::{FitOutcome, OrderReport};

pub fn conventions() -> Value {
    json!({
        "D": "Frobenius norm ||U - I(x)Phi*||_F / sqrt(dS*dB), Phi* = Tr_S(U)/dS",
        "E": "trace (nuclear) norm of Tr_S(U * H_r)",
        "order": "round(least-squares slope of log10(measure) vs log10(J*tau)) - 1",
        "precision_floor": "points with measure <= 10^(-digits+20) are excluded from fits",
        "tau": "minimum pulse interval; T = tau / prod_i s_1(N_i)",
        "rng": "ChaCha8 seeded with `seed`, stream (realization << 8) | (4*l1 + l2) per bath operator",
        "pulse_order": "coincident pulses applied in ascending layer index",
    })
}

fn fit_json(f: &FitOutcome) -> Value {
    match f {
        FitOutcome::Fitted(f) => json!({
            "slope": f.slope,
            "order": f.order(),
            "residual": f.residual,
            "points": f.points,
            "confident": f.confident(),
        }),
        FitOutcome::BelowFloor { usable } => json!({ "below_floor": true, "usable_points": usable }),
    }
}

pub fn report_json(report: &OrderReport) -> Value {
    let per_error: Vec<Value> = report
        .per_error
        .iter()
        .map(|e| {
            json!({
                "r": e.r.compact(),
                "fit": fit_json(&e.fit),
                "predicted": e.predicted,
                "naive": e.naive,
            })
        })
        .collect();
    json!({
        "orders": report.spec.orders(),
        "window": [report.window.0, report.window.1],
        "overall": { "fit": fit_json(&report.overall), "predicted": report.overall_predicted },
        "per_error": per_error,
        "violations": report.violations().iter().map(|r| r.compact()).collect::<Vec<_>>(),
    })
}

pub fn manifest(command: &str, raw: &RawConfig, outputs: &[String], report: Option<&OrderReport>) -> Value {
    let config: Map<String, Value> = raw.entries().map(|(k, v)| (k.to_string(), Value::from(v))).collect();
    let mut m = json!({
        "tool": "nudd",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
        "seed": raw.get("seed"),
        "digits": raw.get("digits"),
        "conventions": conventions(),
        "outputs": outputs,
    });
    if let Some(r) = report {
        m["report"] = report_json(r);
    }
    m
}
