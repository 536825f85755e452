//! Run specification: TOML config file plus command-line overrides.

use std::path::{Path, PathBuf};

use corridor_bo::bo::EiVariant;
use corridor_bo::{BoSettings, Error, Result, ScenarioConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Optimize,
    Baseline,
    Eval,
    Report,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Optimize => "optimize",
            Mode::Baseline => "baseline",
            Mode::Eval => "eval",
            Mode::Report => "report",
        }
    }
}

/// Config file layout. Every key is optional; unknown keys are rejected.
///
/// ```toml
/// seed = 7
/// lambda = 0.5
/// output_dir = "runs/lambda-0.5"
///
/// [scenario]
/// isd_m = 500.0
///
/// [bo]
/// ei_variant = "textbook"
/// ```
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConfigFile {
    pub seed: u64,
    pub lambda: f64,
    pub output_dir: PathBuf,
    pub scenario: ScenarioConfig,
    pub bo: BoSettings,
}

impl Default for ConfigFile {
    fn default() -> Self {
        Self {
            seed: 1,
            lambda: 0.5,
            output_dir: PathBuf::from("out"),
            scenario: ScenarioConfig::default(),
            bo: BoSettings::default(),
        }
    }
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub lambda: Option<f64>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub ei_variant: Option<EiVariant>,
    pub max_iterations: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSpec {
    pub scenario: ScenarioConfig,
    pub lambda: f64,
    pub bo: BoSettings,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub mode: Mode,
}

impl RunSpec {
    pub fn new(mode: Mode, file: ConfigFile, ov: &Overrides) -> Result<Self> {
        let mut bo = file.bo;
        if let Some(v) = ov.ei_variant {
            bo.ei_variant = v;
        }
        if let Some(n) = ov.max_iterations {
            bo.max_iterations = n;
        }
        let spec = Self {
            scenario: file.scenario,
            lambda: ov.lambda.unwrap_or(file.lambda),
            bo,
            seed: ov.seed.unwrap_or(file.seed),
            output_dir: ov.output_dir.clone().unwrap_or(file.output_dir),
            mode,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(mode: Mode, config: Option<&Path>, ov: &Overrides) -> Result<Self> {
        let file = match config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        Self::new(mode, file, ov)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::Config(format!("lambda {} outside [0, 1]", self.lambda)));
        }
        self.scenario.validate()?;
        self.bo.validate()
    }

    /// Everything that determines the optimizer's trajectory. A checkpoint
    /// is only resumed under an identical fingerprint.
    pub fn fingerprint(&self) -> serde_json::Value {
        serde_json::json!({
            "scenario": self.scenario,
            "lambda": self.lambda,
            "bo": self.bo,
            "seed": self.seed,
        })
    }
}
