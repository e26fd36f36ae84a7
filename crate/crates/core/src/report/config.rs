//! Scenario configuration: TOML sections, validation and a canonical hash.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::spectral::{build_model, catalog_state, ModelSpec, SpectralState};

pub const MIN_GRID_POINTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Simulate,
    Fit,
    Bounds,
    Ineq,
    Appendix,
    OperatorLab,
}

impl CheckKind {
    pub const ALL: [CheckKind; 6] =
        [CheckKind::Simulate, CheckKind::Fit, CheckKind::Bounds, CheckKind::Ineq, CheckKind::Appendix, CheckKind::OperatorLab];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Simulate => "simulate",
            CheckKind::Fit => "fit",
            CheckKind::Bounds => "bounds",
            CheckKind::Ineq => "ineq",
            CheckKind::Appendix => "appendix",
            CheckKind::OperatorLab => "operator_lab",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogEntry {
    pub id: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

/// Log-spaced time grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { start: 0.1, stop: 1e4, points: 400 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub checks: Vec<CheckKind>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_tol() -> f64 {
    1e-10
}

impl Default for RunSpec {
    fn default() -> Self {
        Self { tol: default_tol(), checks: Vec::new(), seed: 0, out: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: CatalogEntry,
    pub state: CatalogEntry,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub run: RunSpec,
}

impl ScenarioConfig {
    pub fn new(model: &str, state: &str) -> Self {
        let entry = |id: &str| CatalogEntry { id: id.to_string(), params: BTreeMap::new() };
        Self { model: entry(model), state: entry(state), grid: GridSpec::default(), run: RunSpec::default() }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::ConfigInvalid(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.grid;
        if !(g.start > 0.0 && g.start < g.stop && g.stop.is_finite()) {
            return Err(Error::ConfigInvalid(format!("grid needs 0 < start < stop, got [{}, {}]", g.start, g.stop)));
        }
        if g.points < MIN_GRID_POINTS {
            return Err(Error::ConfigInvalid(format!("grid needs at least {MIN_GRID_POINTS} points, got {}", g.points)));
        }
        let tol = self.run.tol;
        if !(tol > 1e-14 && tol < 1e-2) {
            return Err(Error::ConfigInvalid(format!("tol {tol:e} outside (1e-14, 1e-2)")));
        }
        let mut seen = self.run.checks.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.run.checks.len() {
            return Err(Error::ConfigInvalid("a check is listed twice".into()));
        }
        Ok(())
    }

    /// Builds the catalog objects; unknown ids and bad parameters are config errors.
    pub fn resolve(&self) -> Result<(ModelSpec, SpectralState)> {
        let invalid = |e: Error| Error::ConfigInvalid(e.to_string());
        let model = build_model(&self.model.id, &self.model.params).map_err(invalid)?;
        let state = catalog_state(&model, &self.state.id, &self.state.params).map_err(invalid)?;
        Ok((model, state))
    }

    /// Sorted-key TOML of every field except the output directory.
    pub fn canonical_text(&self) -> String {
        let mut c = self.clone();
        c.run.out = None;
        let value = toml::Value::try_from(&c).expect("config is plain data");
        toml::to_string(&value).expect("config is plain data")
    }

    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_text().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = r#"
        [model]
        id = "laplacian"
        params = { n = 3 }

        [state]
        id = "gaussian_laplacian"
        params = { n = 3 }

        [grid]
        start = 0.1
        stop = 1e4
        points = 64

        [run]
        tol = 1e-9
        checks = ["fit", "simulate"]
        out = "somewhere"
    "#;

    #[test]
    fn parses_and_resolves() {
        let cfg = ScenarioConfig::from_toml(TEXT).unwrap();
        assert_eq!(cfg.run.checks, vec![CheckKind::Fit, CheckKind::Simulate]);
        let (m, s) = cfg.resolve().unwrap();
        assert_eq!(m.id.to_string(), "laplacian(3)");
        assert_eq!(s.id.to_string(), "gaussian_laplacian(3)");
    }

    #[test]
    fn hash_ignores_layout_and_output_dir() {
        let a = ScenarioConfig::from_toml(TEXT).unwrap();
        let squashed = TEXT.replace("        ", "").replace("out = \"somewhere\"", "out = \"elsewhere\"");
        let b = ScenarioConfig::from_toml(&squashed).unwrap();
        assert_eq!(a.hash(), b.hash());
        let mut c = a.clone();
        c.run.tol = 1e-8;
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn rejects_bad_values() {
        let bad = |from: &str, to: &str| ScenarioConfig::from_toml(&TEXT.replace(from, to)).unwrap_err();
        assert!(matches!(bad("points = 64", "points = 8"), Error::ConfigInvalid(_)));
        assert!(matches!(bad("stop = 1e4", "stop = 0.01"), Error::ConfigInvalid(_)));
        assert!(matches!(bad("tol = 1e-9", "tol = 0.5"), Error::ConfigInvalid(_)));
        assert!(matches!(bad("\"fit\", \"simulate\"", "\"fit\", \"fit\""), Error::ConfigInvalid(_)));
        assert!(matches!(bad("\"fit\", \"simulate\"", "\"plot\""), Error::ConfigInvalid(_)));
        assert!(matches!(bad("[grid]", "[grid]\nextra = 1"), Error::ConfigInvalid(_)));
        let unknown = ScenarioConfig::from_toml(&TEXT.replace("\"laplacian\"", "\"nope\"")).unwrap();
        assert!(matches!(unknown.resolve(), Err(Error::ConfigInvalid(_))));
    }
}
