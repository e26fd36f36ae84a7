use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use decaylab::report::suites::{default_symbol_cases, flow_oracle, matrix_suite, symbol_suite};
use decaylab::report::{exit, exit_code, list_catalog, run_acceptance, run_scenario, CheckKind, ScenarioConfig};
use decaylab::{Error, Result};

#[derive(Parser)]
#[command(name = "decaylab", version, about = "Survival-amplitude decay experiments and checks")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    /// Scenario file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the config.
    #[arg(long, global = true, env = "DECAYLAB_OUT")]
    out: Option<PathBuf>,
    /// Quadrature tolerance; overrides the config.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed for random matrices; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Verb {
    /// Sample the survival amplitude on the configured grid.
    Simulate,
    /// Fit the decay exponent and compare with the guaranteed rate.
    Fit,
    /// Run exactly the checks listed in the config.
    Check,
    /// Grid symbol calculus, conjugation flow and flow oracles.
    Lab,
    /// Duhamel and resolvent identities on random matrices.
    Matrix,
    /// List models, states, decay rules and checks.
    Catalog,
    /// Run the full acceptance matrix.
    Acceptance {
        /// Skip the second run used for the determinism criterion.
        #[arg(long)]
        once: bool,
    },
}

const DEFAULT_OUT: &str = "decaylab-out";

fn emit<T: Serialize>(json: bool, value: &T, text: impl FnOnce() -> String) {
    if json {
        println!("{}", serde_json::to_string_pretty(value).expect("plain data"));
    } else {
        print!("{}", text());
    }
}

fn out_dir(cli: &Cli, cfg: Option<&ScenarioConfig>) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| cfg.and_then(|c| c.run.out.clone()))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn load_config(cli: &Cli) -> Result<ScenarioConfig> {
    let path = cli.config.as_deref().ok_or_else(|| Error::ConfigInvalid("this verb needs --config".into()))?;
    let mut cfg = ScenarioConfig::load(path)?;
    if let Some(t) = cli.tol {
        cfg.run.tol = t;
    }
    if let Some(s) = cli.seed {
        cfg.run.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn scenario(cli: &Cli, checks: Option<Vec<CheckKind>>) -> Result<i32> {
    let mut cfg = load_config(cli)?;
    if let Some(c) = checks {
        cfg.run.checks = c;
    }
    let out = out_dir(cli, Some(&cfg));
    let run = run_scenario(&cfg, &out)?;
    emit(cli.json, &run.report, || {
        let mut s = format!("{} / {} -> {}\n", run.report.provenance.model, run.report.provenance.state, out.display());
        for c in &run.report.checks {
            s += &format!("{:<12} {:<14} {}\n", c.check.name(), c.status, c.note.as_deref().unwrap_or(""));
        }
        s
    });
    Ok(if run.report.passed() { exit::OK } else { exit::CHECK_FAILED })
}

fn write_out(dir: &Path, name: &str, value: &impl Serialize) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))? + "\n";
    std::fs::write(dir.join(name), text).map_err(|e| Error::Io(format!("{name}: {e}")))
}

fn seed(cli: &Cli) -> Result<u64> {
    match (cli.seed, &cli.config) {
        (Some(s), _) => Ok(s),
        (None, Some(_)) => Ok(load_config(cli)?.run.seed),
        (None, None) => Ok(0),
    }
}

fn run(cli: &Cli) -> Result<i32> {
    match &cli.verb {
        Verb::Simulate => scenario(cli, Some(vec![CheckKind::Simulate])),
        Verb::Fit => scenario(cli, Some(vec![CheckKind::Fit])),
        Verb::Check => scenario(cli, None),
        Verb::Lab => {
            let rows = symbol_suite(&default_symbol_cases()?)?;
            let flow = flow_oracle()?;
            let ok = rows.iter().all(|r| r.pass) && flow.pass;
            let body = serde_json::json!({ "refinement": rows, "flow": flow });
            write_out(&out_dir(cli, None), "lab.json", &body)?;
            emit(cli.json, &body, || {
                let mut s: String = rows
                    .iter()
                    .map(|r| format!("{:<16} k={:<4} ratio {:.4} {}\n", r.symbol, r.k.map_or("flow".into(), |k| k.to_string()), r.ratio, r.pass))
                    .collect();
                s += &format!("flow: linear rel err {:.2e}, group defect {:.3}×rtol\n", flow.linear_rel_error, flow.group_defect_over_rtol);
                s
            });
            Ok(if ok { exit::OK } else { exit::CHECK_FAILED })
        }
        Verb::Matrix => {
            let rows = matrix_suite(&[seed(cli)?])?;
            write_out(&out_dir(cli, None), "matrix.json", &rows)?;
            emit(cli.json, &rows, || {
                rows.iter()
                    .map(|r| {
                        let what = r.t.map_or("resolvent".to_string(), |t| format!("duhamel t={t}"));
                        format!("seed {} n {:>2} {what:<16} err {:.3e} {}\n", r.seed, r.dim, r.error_norm, r.pass)
                    })
                    .collect()
            });
            Ok(if rows.iter().all(|r| r.pass) { exit::OK } else { exit::CHECK_FAILED })
        }
        Verb::Catalog => {
            let text = list_catalog();
            emit(cli.json, &text.lines().collect::<Vec<_>>(), || text.clone());
            Ok(exit::OK)
        }
        Verb::Acceptance { once } => {
            let report = run_acceptance(&out_dir(cli, None), !once)?;
            emit(cli.json, &report, || report.lines());
            Ok(if report.passed() { exit::OK } else { exit::CHECK_FAILED })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = run(&cli).unwrap_or_else(|e| {
        eprintln!("decaylab: {e}");
        exit_code(&e)
    });
    ExitCode::from(code as u8)
}
