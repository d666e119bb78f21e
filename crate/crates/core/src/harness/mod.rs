//! Experiment driver: configuration, persistence, statistics and the
//! command implementations behind the CLI.

mod commands;
mod io;
mod stats;

use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DistanceMode;
use crate::magic::{LogBase, SreConfig};
use crate::optimize::OptimizerConfig;

pub use commands::{
    cmd_evolve, cmd_qft_demo, cmd_sat_gen, cmd_spectrum, cmd_stats, instance_tag, EvolveSummary,
    InstanceSummary, ManifestEntry, QftDemoOutput, SatGenOutput, SpectrumSource,
};
pub use io::{
    format_float, read_trace_csv, spectrum_csv_string, trace_csv_string, trace_rows, write_trace_csv, TraceRow,
    SPECTRUM_COLUMNS, TRACE_COLUMNS,
};
pub use stats::{pearson, quartiles, StepStats, SRE_FILTER, ZERO_TOLERANCE};

/// Which circuit family `evolve` runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ansatz {
    /// QAOA with the clause-sum cost layer.
    Structured,
    /// Hardware-efficient RY/RZ/CNOT-ladder layers.
    Unstructured,
}

impl Ansatz {
    pub const ALL: [Ansatz; 2] = [Ansatz::Structured, Ansatz::Unstructured];

    pub fn name(self) -> &'static str {
        match self {
            Ansatz::Structured => "structured",
            Ansatz::Unstructured => "unstructured",
        }
    }
}

impl std::fmt::Display for Ansatz {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Ansatz {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "structured" | "qaoa" => Ok(Ansatz::Structured),
            "unstructured" | "hea" => Ok(Ansatz::Unstructured),
            _ => Err(Error::input(format!(
                "ansatz must be `structured` or `unstructured`, got `{s}`"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub p: usize,
    pub ratio: f64,
    pub instances: usize,
    pub seed: u64,
    pub alpha: f64,
    pub log_base: LogBase,
    pub distance_mode: DistanceMode,
    pub permutation_min: bool,
    pub output_dir: PathBuf,
    /// DIMACS files to use instead of generated instances.
    pub instance_files: Vec<PathBuf>,
    pub optimizer: OptimizerConfig,
    /// Ramp endpoints for the QAOA starting schedule.
    pub gamma_max: f64,
    pub beta_max: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 7,
            p: 7,
            ratio: 3.0,
            instances: 20,
            seed: 2024,
            alpha: 2.0,
            log_base: LogBase::Two,
            distance_mode: DistanceMode::Literal,
            permutation_min: true,
            output_dir: PathBuf::from("out"),
            instance_files: Vec::new(),
            optimizer: OptimizerConfig::default(),
            gamma_max: 1.0,
            beta_max: 1.0,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::input(format!("n = {} is below 3; clauses need three variables", self.n)));
        }
        if self.n > crate::state::MAX_QUBITS {
            return Err(Error::Capability(format!(
                "n = {} exceeds the {}-qubit simulator limit",
                self.n,
                crate::state::MAX_QUBITS
            )));
        }
        if !self.ratio.is_finite() || self.ratio <= 0.0 {
            return Err(Error::input(format!("ratio must be positive, got {}", self.ratio)));
        }
        if self.instances == 0 && self.instance_files.is_empty() {
            return Err(Error::input("instances must be at least 1"));
        }
        for (name, v) in [("gamma_max", self.gamma_max), ("beta_max", self.beta_max)] {
            if !v.is_finite() {
                return Err(Error::input(format!("{name} must be finite")));
            }
        }
        self.sre_config()?;
        Ok(())
    }

    pub fn sre_config(&self) -> Result<SreConfig> {
        SreConfig::new(self.alpha, self.log_base)
    }
}
