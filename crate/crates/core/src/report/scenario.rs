use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use super::config::{CheckKind, ScenarioConfig};
use super::suites::{default_symbol_cases, matrix_suite, symbol_suite};
use super::{write_json, write_text};
use crate::checks::sweep::hypothesis_verdict;
use crate::checks::{
    check_appendix_lemma, check_corollary_psidecay, check_estim_inequality, check_interference_inequality,
    check_prop_decay1, AppendixFunction, BoundPoint, Verdict,
};
use crate::decay::{expected_exponent, fit_decay_exponent, verify_decay_bound, DEFAULT_WINDOW, TREND_SLACK};
use crate::error::{Error, Result};
use crate::lab::commutator_obstruction;
use crate::propagator::{log_grid, survival_series, AmplitudeSeries};
use crate::quad::derivative_series;
use crate::spectral::{density_of, ModelSpec, SpectralState, Symbol};

pub const INTERFERENCE_HORIZONS: [f64; 4] = [1.0, 10.0, 100.0, 1000.0];
pub const APPENDIX_P: [f64; 3] = [1.5, 2.0, 3.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub check: CheckKind,
    pub status: Verdict,
    /// Scalar summary; full arrays go to checks.json.
    pub summary: Value,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub config_hash: String,
    pub crate_version: &'static str,
    pub model: String,
    pub state: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub provenance: Provenance,
    pub status: Verdict,
    pub checks: Vec<CheckOutcome>,
}

/// Wall-clock seconds, kept apart from the report so that stays reproducible.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub checks: BTreeMap<&'static str, f64>,
    pub total: f64,
}

#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub report: RunReport,
    pub timing: Timing,
    pub out_dir: PathBuf,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.status.ok()
    }
}

fn columns(points: &[BoundPoint]) -> Value {
    json!({
        "t": points.iter().map(|b| b.t).collect::<Vec<_>>(),
        "lhs": points.iter().map(|b| b.lhs).collect::<Vec<_>>(),
        "rhs": points.iter().map(|b| b.rhs).collect::<Vec<_>>(),
        "margin": points.iter().map(|b| b.margin).collect::<Vec<_>>(),
    })
}

fn combine(vs: impl IntoIterator<Item = Verdict>) -> Verdict {
    let vs: Vec<Verdict> = vs.into_iter().collect();
    if vs.contains(&Verdict::Fail) {
        Verdict::Fail
    } else if !vs.is_empty() && vs.iter().all(|v| *v == Verdict::NotApplicable) {
        Verdict::NotApplicable
    } else {
        Verdict::Pass
    }
}

fn error_outcome(check: CheckKind, e: &Error) -> CheckOutcome {
    CheckOutcome { check, status: hypothesis_verdict(e), summary: Value::Null, note: Some(e.to_string()) }
}

/// Fit window: the default two decades when the grid covers them, else the last two.
fn fit_window(t_grid: &[f64]) -> (f64, f64) {
    let t_max = t_grid.last().copied().unwrap_or(0.0);
    if t_max >= DEFAULT_WINDOW.1 {
        DEFAULT_WINDOW
    } else {
        (t_max / 100.0, t_max)
    }
}

pub fn amplitudes_csv(series: &AmplitudeSeries) -> String {
    let mut out = String::from("t,re,im,abs,err_est,flag\n");
    for i in 0..series.len() {
        let v = series.values[i];
        let flag = if series.converged[i] { "ok" } else { "unconverged" };
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{flag}",
            series.t_grid[i],
            v.re,
            v.im,
            v.norm(),
            series.error_estimates[i]
        )
        .unwrap();
    }
    out
}

struct Context<'a> {
    model: &'a ModelSpec,
    state: &'a SpectralState,
    cfg: &'a ScenarioConfig,
    t_grid: Vec<f64>,
    series: Option<Result<AmplitudeSeries>>,
    details: BTreeMap<&'static str, Value>,
}

impl Context<'_> {
    fn series(&mut self) -> Result<AmplitudeSeries> {
        if self.series.is_none() {
            let s = survival_series(self.model, self.state, &self.t_grid, self.cfg.run.tol)
                .map(|s| s.with_provenance(self.model.id.to_string(), self.state.id.to_string()));
            self.series = Some(s);
        }
        self.series.clone().expect("just filled")
    }

    fn run(&mut self, check: CheckKind) -> CheckOutcome {
        let r = match check {
            CheckKind::Simulate => self.simulate(),
            CheckKind::Fit => self.fit(),
            CheckKind::Bounds => self.bounds(),
            CheckKind::Ineq => self.ineq(),
            CheckKind::Appendix => self.appendix(),
            CheckKind::OperatorLab => self.operator_lab(),
        };
        r.unwrap_or_else(|e| error_outcome(check, &e))
    }

    fn simulate(&mut self) -> Result<CheckOutcome> {
        let s = self.series()?;
        let unconverged = s.converged.iter().filter(|c| !**c).count();
        let max_err = s.error_estimates.iter().copied().fold(0.0, f64::max);
        Ok(CheckOutcome {
            check: CheckKind::Simulate,
            status: Verdict::from_bool(unconverged == 0),
            summary: json!({ "points": s.len(), "unconverged": unconverged, "max_err_est": max_err }),
            note: None,
        })
    }

    fn fit(&mut self) -> Result<CheckOutcome> {
        let s = self.series()?;
        let expected = expected_exponent(self.model, self.state);
        let (exp_s, tag) = match expected {
            Some((e, t)) => (Some(e), Some(t.code())),
            None => (None, None),
        };
        let fit = match fit_decay_exponent(&s, fit_window(&self.t_grid)) {
            Ok(f) => f,
            Err(e @ Error::ZeroSeries) => {
                self.details.insert("fit", json!({ "expected_exponent": exp_s, "theorem": tag, "note": e.to_string() }));
                return Ok(CheckOutcome { check: CheckKind::Fit, status: Verdict::NotApplicable, summary: Value::Null, note: Some(e.to_string()) });
            }
            Err(e) => return Err(e),
        };
        let status = match exp_s {
            Some(e) => Verdict::from_bool(fit.exponent >= e - TREND_SLACK),
            None => Verdict::NotApplicable,
        };
        let mut body = serde_json::to_value(fit).expect("plain data");
        body["expected_exponent"] = json!(exp_s);
        body["theorem"] = json!(tag);
        self.details.insert("fit", body.clone());
        Ok(CheckOutcome { check: CheckKind::Fit, status, summary: body, note: None })
    }

    fn bounds(&mut self) -> Result<CheckOutcome> {
        let tol = self.cfg.run.tol;
        let mut verdicts = Vec::new();
        let mut detail = serde_json::Map::new();
        let mut summary = serde_json::Map::new();
        match check_prop_decay1(self.model, self.state, &self.t_grid, tol) {
            Ok(r) => {
                verdicts.push(r.verdict);
                summary.insert("prop_decay1".into(), json!({ "verdict": r.verdict, "a_norm": r.a_norm, "u_norm": r.u_norm }));
                let mut body = columns(&r.points);
                body["a_norm"] = json!(r.a_norm);
                body["u_norm"] = json!(r.u_norm);
                body["grid_margin"] = json!(r.grid_margin);
                detail.insert("prop_decay1".into(), body);
            }
            Err(e) => {
                verdicts.push(hypothesis_verdict(&e));
                summary.insert("prop_decay1".into(), json!({ "note": e.to_string() }));
            }
        }
        if let Some((s, tag)) = expected_exponent(self.model, self.state) {
            let series = self.series()?;
            let b = verify_decay_bound(&series, s);
            verdicts.push(Verdict::from_bool(b.pass));
            summary.insert("decay_bound".into(), json!({ "exponent": s, "theorem": tag.code(), "check": b }));
        }
        if let Some((k, _)) = self.state.kzero {
            let psi = self.series()?;
            let dpsi = derivative_series(&density_of(self.state, self.model), &self.t_grid, tol)?;
            let t_dpsi = AmplitudeSeries { values: dpsi.values.iter().zip(&self.t_grid).map(|(v, t)| v * t).collect(), ..dpsi };
            let c = check_corollary_psidecay(&psi, &t_dpsi, k)?;
            verdicts.push(c.verdict);
            summary.insert("corollary".into(), json!(c));
        }
        self.details.insert("bounds", Value::Object(detail));
        Ok(CheckOutcome { check: CheckKind::Bounds, status: combine(verdicts), summary: Value::Object(summary), note: None })
    }

    fn ineq(&mut self) -> Result<CheckOutcome> {
        let tol = self.cfg.run.tol;
        let mut verdicts = Vec::new();
        let mut detail = serde_json::Map::new();
        if matches!(self.model.symbol, Symbol::Linear(_)) {
            match check_estim_inequality(self.model, self.state, tol) {
                Ok(r) => {
                    verdicts.push(r.verdict);
                    detail.insert("estim".into(), json!(r));
                }
                Err(e) => {
                    verdicts.push(hypothesis_verdict(&e));
                    detail.insert("estim".into(), json!({ "note": e.to_string() }));
                }
            }
        }
        match check_interference_inequality(self.model, self.state, self.state, &INTERFERENCE_HORIZONS, tol) {
            Ok(r) => {
                verdicts.push(r.verdict);
                let mut body = columns(&r.points);
                body["v_bracket"] = json!(r.v_bracket);
                body["u_bracket"] = json!(r.u_bracket);
                body["verdict"] = json!(r.verdict);
                detail.insert("interference".into(), body);
            }
            Err(e) => {
                verdicts.push(hypothesis_verdict(&e));
                detail.insert("interference".into(), json!({ "note": e.to_string() }));
            }
        }
        let summary: serde_json::Map<String, Value> = detail
            .iter()
            .map(|(k, v)| (k.clone(), v.get("verdict").cloned().unwrap_or_else(|| v.clone())))
            .collect();
        self.details.insert("ineq", Value::Object(detail));
        Ok(CheckOutcome { check: CheckKind::Ineq, status: combine(verdicts), summary: Value::Object(summary), note: None })
    }

    fn appendix(&mut self) -> Result<CheckOutcome> {
        let ts = log_grid(0.1, 100.0, 50);
        let mut rows = Vec::new();
        for af in AppendixFunction::catalog() {
            for p in APPENDIX_P {
                rows.push(check_appendix_lemma(&af, p, &ts, self.cfg.run.tol)?);
            }
        }
        let violations = rows.iter().filter(|r| r.verdict == Verdict::Fail).count();
        let detail: Vec<Value> = rows
            .iter()
            .map(|r| {
                let mut body = columns(&r.points);
                body["function"] = json!(r.function);
                body["p"] = json!(r.p);
                body["constant"] = json!(r.constant);
                body
            })
            .collect();
        self.details.insert("appendix", Value::Array(detail));
        Ok(CheckOutcome {
            check: CheckKind::Appendix,
            status: Verdict::from_bool(violations == 0),
            summary: json!({ "cases": rows.len(), "violations": violations }),
            note: None,
        })
    }

    fn operator_lab(&mut self) -> Result<CheckOutcome> {
        let seed = self.cfg.run.seed;
        let matrix = matrix_suite(&[seed])?;
        let symbols = symbol_suite(&default_symbol_cases()?)?;
        let h = crate::lab::random_hermitian(8, seed);
        let obstruction = commutator_obstruction(&h, |_| 1.0)?;
        let ok = matrix.iter().all(|r| r.pass) && symbols.iter().all(|r| r.pass) && obstruction.residual >= obstruction.trace_bound * (1.0 - 1e-9);
        let worst = |rows: &[f64]| rows.iter().copied().fold(0.0, f64::max);
        let summary = json!({
            "duhamel_worst": worst(&matrix.iter().filter(|r| r.t.is_some()).map(|r| r.error_norm).collect::<Vec<_>>()),
            "resolvent_worst": worst(&matrix.iter().filter(|r| r.t.is_none()).map(|r| r.error_norm).collect::<Vec<_>>()),
            "refinement_ratios": symbols.iter().map(|r| r.ratio).collect::<Vec<_>>(),
            "obstruction": obstruction,
        });
        self.details.insert("operator_lab", json!({ "matrix": matrix, "refinement": symbols, "obstruction": obstruction }));
        Ok(CheckOutcome { check: CheckKind::OperatorLab, status: Verdict::from_bool(ok), summary, note: None })
    }
}

/// Runs the requested checks and writes every artefact into `out`.
pub fn run_scenario(cfg: &ScenarioConfig, out: &Path) -> Result<ScenarioRun> {
    cfg.validate()?;
    let (model, state) = cfg.resolve()?;
    let start = Instant::now();
    std::fs::create_dir_all(out).map_err(|e| Error::Io(format!("{}: {e}", out.display())))?;
    let t_grid = log_grid(cfg.grid.start, cfg.grid.stop, cfg.grid.points);
    let mut ctx = Context { model: &model, state: &state, cfg, t_grid, series: None, details: BTreeMap::new() };
    let mut checks = Vec::new();
    let mut timing = BTreeMap::new();
    for &check in &cfg.run.checks {
        let t0 = Instant::now();
        checks.push(ctx.run(check));
        timing.insert(check.name(), t0.elapsed().as_secs_f64());
    }
    if let Some(Ok(series)) = &ctx.series {
        write_text(&out.join("amplitudes.csv"), &amplitudes_csv(series))?;
    }
    if let Some(fit) = ctx.details.remove("fit") {
        write_json(&out.join("fit.json"), &fit)?;
    }
    write_json(&out.join("checks.json"), &ctx.details)?;
    let report = RunReport {
        provenance: Provenance {
            config_hash: cfg.hash(),
            crate_version: env!("CARGO_PKG_VERSION"),
            model: model.id.to_string(),
            state: state.id.to_string(),
        },
        status: combine(checks.iter().map(|c| c.status)),
        checks,
    };
    write_json(&out.join("report.json"), &report)?;
    let timing = Timing { checks: timing, total: start.elapsed().as_secs_f64() };
    write_json(&out.join("timing.json"), &timing)?;
    Ok(ScenarioRun { report, timing, out_dir: out.to_path_buf() })
}
