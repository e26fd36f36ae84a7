//! The explicit-constant inequalities over every catalog model and state.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::{check_interference_inequality, estim_with, prop_decay1_with, BoundPoint, Verdict};
use crate::error::{Error, Result};
use crate::lab::conjugate_image;
use crate::propagator::{check_membership, log_grid};
use crate::spectral::{build_model, catalog_state, ModelSpec, SpectralState, Symbol};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub model: String,
    pub state: String,
    pub check: &'static str,
    pub verdict: Verdict,
    /// Largest lhs/rhs seen; below 1 means slack.
    pub worst_ratio: f64,
    pub note: Option<String>,
}

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

pub fn sweep_models() -> Vec<ModelSpec> {
    let specs: [(&str, &[(&str, f64)]); 11] = [
        ("laplacian", &[("n", 3.0)]),
        ("laplacian", &[("n", 1.0)]),
        ("ultrahyperbolic", &[]),
        ("electric_field", &[]),
        ("homogeneous", &[("theta", 0.5)]),
        ("fractional", &[("s", 1.0)]),
        ("weighted_multiplication", &[("n", 1.0)]),
        ("dirac", &[("m", 1.0)]),
        ("wave", &[("n", 3.0)]),
        ("klein_gordon", &[("m", 1.0)]),
        ("saturating", &[]),
    ];
    specs.iter().map(|(id, p)| build_model(id, &params(p)).expect("catalog model")).collect()
}

pub fn sweep_states(model: &ModelSpec) -> Vec<SpectralState> {
    let specs: [(&str, &[(&str, f64)]); 8] = [
        ("exponential", &[]),
        ("gamma", &[("a", 2.0)]),
        ("gaussian_laplacian", &[("n", 3.0)]),
        ("power_counterexample", &[("theta", 0.25)]),
        ("kzero_family", &[("k", 3.0)]),
        ("bump", &[]),
        ("bump", &[("width", 0.5)]),
        ("zero", &[]),
    ];
    specs.iter().filter_map(|(id, p)| catalog_state(model, id, &params(p)).ok()).collect()
}

fn worst(points: &[BoundPoint]) -> f64 {
    points
        .iter()
        .map(|b| if b.rhs > 0.0 { b.lhs / b.rhs } else if b.lhs > 0.0 { f64::INFINITY } else { 0.0 })
        .fold(0.0, f64::max)
}

/// Hypothesis failures are not violations; any other error is.
pub fn hypothesis_verdict(e: &Error) -> Verdict {
    match e {
        Error::ANormDiverges | Error::MomentDiverges | Error::TailUnbounded(_) => Verdict::NotApplicable,
        _ => Verdict::Fail,
    }
}

fn row(model: &ModelSpec, state: &SpectralState, check: &'static str, r: Result<(Verdict, f64)>) -> SweepRow {
    let (verdict, worst_ratio, note) = match r {
        Ok((v, w)) => (v, w, None),
        Err(e) => (hypothesis_verdict(&e), f64::NAN, Some(e.to_string())),
    };
    SweepRow { model: model.id.to_string(), state: state.id.to_string(), check, verdict, worst_ratio, note }
}

fn checks_for(model: &ModelSpec, state: &SpectralState, reference: &SpectralState, tol: f64) -> Vec<SweepRow> {
    let ts = log_grid(0.1, 1e3, 60);
    // One image of A serves both first-order checks.
    let img = check_membership(model, state).and_then(|_| conjugate_image(model, state, tol));
    let mut rows = vec![row(
        model,
        state,
        "prop_decay1",
        img.clone()
            .and_then(|img| prop_decay1_with(model, state, &img, &ts, tol))
            .map(|r| (r.verdict, worst(&r.points))),
    )];
    if matches!(model.symbol, Symbol::Linear(_)) {
        rows.push(row(
            model,
            state,
            "estim",
            img.and_then(|img| estim_with(model, state, &img)).map(|r| {
                let ratio = if r.rhs > 0.0 { r.lhs / r.rhs } else { 0.0 };
                (r.verdict, ratio)
            }),
        ));
    }
    let horizons = [1.0, 10.0, 100.0, 1000.0];
    for (check, v) in [("interference_self", state), ("interference_cross", reference)] {
        rows.push(row(
            model,
            state,
            check,
            check_interference_inequality(model, v, state, &horizons, tol).map(|r| (r.verdict, worst(&r.points))),
        ));
    }
    rows
}

/// Every inequality on every (model, state) pair, in catalog order.
pub fn catalog_sweep(tol: f64) -> Vec<SweepRow> {
    let pairs: Vec<(ModelSpec, SpectralState, SpectralState)> = sweep_models()
        .into_iter()
        .flat_map(|m| {
            let states = sweep_states(&m);
            let reference = states[0].clone();
            states.into_iter().map(move |s| (m.clone(), s, reference.clone())).collect::<Vec<_>>()
        })
        .collect();
    pairs.par_iter().flat_map_iter(|(m, s, r)| checks_for(m, s, r, tol)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_model_has_states() {
        for m in sweep_models() {
            assert!(sweep_states(&m).len() >= 3, "{}", m.id);
        }
    }
}
