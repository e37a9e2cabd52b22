//! Configuration files for the command-line tool.
//!
//! A config file is TOML restricted to flat `key = value` pairs grouped in
//! one section per command:
//!
//! ```toml
//! [fit]
//! method = "lkplo-svm"   # plo | kplo | lkplo-rz | lkplo-svm
//! loss = "svm"           # rz | svm, overrides the method's loss
//! gamma = 0.5
//! q = 10
//! k = 5
//! c = 2.0
//! n_random = 100
//! include_basis = true
//! n_one_point = 50
//! n_two_points = 50
//! seed = 42
//!
//! [benchmark]
//! data = "synth:three_gaussians"
//! method = "lkplo-svm"
//! folds = 5
//! trials = 50
//! val_fraction = 0.25
//! seed = 42
//!
//! [ablation]
//! data = ["synth:inside_outside", "synth:three_gaussians"]
//! folds = 5
//! trials = 50
//!
//! [grid]
//! bounds = [-3.0, 8.0, -3.0, 8.0]
//! resolution = 100
//!
//! [generate]
//! seed = 7
//! ```
//!
//! Every key is optional. Command-line flags override file values. Unknown
//! sections or keys are rejected. `[benchmark]` and `[ablation]` also accept
//! `n_random`, `include_basis`, `n_one_point` and `n_two_points`.

use std::path::Path;

use serde::Deserialize;

use crate::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    pub method: Option<String>,
    pub loss: Option<String>,
    pub gamma: Option<f64>,
    pub q: Option<usize>,
    pub k: Option<usize>,
    pub c: Option<f64>,
    pub n_random: Option<usize>,
    pub include_basis: Option<bool>,
    pub n_one_point: Option<usize>,
    pub n_two_points: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkSection {
    pub data: Option<String>,
    pub method: Option<String>,
    pub loss: Option<String>,
    pub folds: Option<usize>,
    pub trials: Option<usize>,
    pub val_fraction: Option<f64>,
    pub seed: Option<u64>,
    pub n_random: Option<usize>,
    pub include_basis: Option<bool>,
    pub n_one_point: Option<usize>,
    pub n_two_points: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AblationSection {
    pub data: Option<Vec<String>>,
    pub folds: Option<usize>,
    pub trials: Option<usize>,
    pub val_fraction: Option<f64>,
    pub seed: Option<u64>,
    pub n_random: Option<usize>,
    pub include_basis: Option<bool>,
    pub n_one_point: Option<usize>,
    pub n_two_points: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub bounds: Option<[f64; 4]>,
    pub resolution: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateSection {
    pub seed: Option<u64>,
}

/// Parsed config file.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub fit: FitSection,
    #[serde(default)]
    pub benchmark: BenchmarkSection,
    #[serde(default)]
    pub ablation: AblationSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub generate: GenerateSection,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text)
            .map_err(|e| Error::InvalidParameter(format!("config: {}", e.message())))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::parse(path, e.message().to_string()))
    }

    /// Loads `path` when given, otherwise an empty config.
    pub fn load_optional(path: Option<&Path>) -> Result<Self> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }
}
