//! Experiment configuration: one JSON document describing the systems,
//! directions, grids, sample sizes and seed of a run.
//!
//! Slopes are given as strings (`"1/2"`, `"sqrt2"`) or numbers. A manifest
//! written by a previous run is accepted in place of a config; its `config`
//! entry is used.

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use dircomplex::metrics::Family;
use dircomplex::systems::PermutationSystem;
use dircomplex::Slope;
use serde::{Deserialize, Serialize};

/// One reference system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SystemSpec {
    Rotation {
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default = "default_gamma")]
        gamma: f64,
    },
    Fullshift {
        #[serde(default = "default_alphabet")]
        alphabet: usize,
        /// Window radius; sized from the grids when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radius: Option<i64>,
    },
    Skewshift {
        #[serde(default = "default_alphabet")]
        alphabet: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radius: Option<i64>,
    },
    Permutation {
        #[serde(default = "default_states")]
        states: usize,
        /// Commuting permutations; two cyclic shifts by 1 and 3 when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        generators: Option<Vec<Vec<usize>>>,
    },
}

fn default_alpha() -> f64 {
    std::f64::consts::SQRT_2 - 1.0
}

fn default_gamma() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

fn default_alphabet() -> usize {
    2
}

fn default_states() -> usize {
    7
}

impl SystemSpec {
    pub fn name(&self) -> &'static str {
        match self {
            SystemSpec::Rotation { .. } => "rotation",
            SystemSpec::Fullshift { .. } => "fullshift",
            SystemSpec::Skewshift { .. } => "skewshift",
            SystemSpec::Permutation { .. } => "permutation",
        }
    }

    /// The four reference systems with default parameters.
    pub fn zoo() -> Vec<SystemSpec> {
        vec![
            SystemSpec::Rotation {
                alpha: default_alpha(),
                gamma: default_gamma(),
            },
            SystemSpec::Skewshift {
                alphabet: 2,
                radius: None,
            },
            SystemSpec::Fullshift {
                alphabet: 2,
                radius: None,
            },
            SystemSpec::Permutation {
                states: default_states(),
                generators: None,
            },
        ]
    }

    /// Known boundedness of directional complexity along `β`.
    pub fn bounded_along(&self, beta: Slope) -> bool {
        match self {
            SystemSpec::Rotation { .. } | SystemSpec::Permutation { .. } => true,
            SystemSpec::Fullshift { .. } => false,
            SystemSpec::Skewshift { .. } => beta.as_f64() == 1.0,
        }
    }

    pub fn generators(&self) -> Option<Vec<Vec<usize>>> {
        match self {
            SystemSpec::Permutation { states, generators } => Some(generators.clone().unwrap_or_else(|| {
                PermutationSystem::cyclic(*states, 1, 3)
                    .map(|p| p.generators().to_vec())
                    .unwrap_or_default()
            })),
            _ => None,
        }
    }
}

/// Net and grid for topological spanning numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopologicalGrid {
    pub eps: Vec<f64>,
    pub k: Vec<usize>,
    /// Approximate size of the net standing in for the whole space.
    pub net_size: usize,
    /// Finest perturbation level inside the net's clusters.
    pub max_level: u32,
    /// Also solve every cell at `ε/2`; reported in the summary only.
    pub half_eps: bool,
}

impl Default for TopologicalGrid {
    fn default() -> Self {
        TopologicalGrid {
            eps: vec![0.5, 0.25, 0.125],
            k: vec![1, 2, 4, 8, 16, 32],
            net_size: 264,
            max_level: 31,
            half_eps: false,
        }
    }
}

/// Grid for measure spanning numbers, and the `b` values compared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasureGrid {
    pub eps: Vec<f64>,
    pub k: Vec<usize>,
    pub samples: usize,
    pub b: Vec<f64>,
}

impl Default for MeasureGrid {
    fn default() -> Self {
        MeasureGrid {
            eps: vec![0.5, 0.3, 0.2],
            k: vec![1, 2, 4, 8, 16, 32, 64],
            samples: 384,
            b: vec![0.5, 1.0, 2.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralGrid {
    pub eps: Vec<f64>,
    pub k: Vec<usize>,
    pub samples: usize,
}

impl Default for SpectralGrid {
    fn default() -> Self {
        SpectralGrid {
            eps: vec![0.5, 0.3],
            k: vec![1, 2, 4, 8, 16, 32, 64, 128, 256],
            samples: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EquicontGrid {
    pub eps: Vec<f64>,
    /// Deepest window; defaults to the largest topological `k`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    /// Number of perturbation clusters; each holds `max_level + 2` points.
    pub clusters: usize,
    pub max_level: u32,
    /// Candidate `δ` values, which should stay coarser than the strip's
    /// reach at `k_max`; `2^-1 … 2^-16` when empty.
    pub deltas: Vec<f64>,
    /// Discard fraction for the measure-theoretic probe.
    pub tau: f64,
}

impl Default for EquicontGrid {
    fn default() -> Self {
        EquicontGrid {
            eps: vec![0.5, 0.25, 0.125],
            k_max: None,
            clusters: 8,
            max_level: 24,
            deltas: (1..=10).map(|i| 0.5f64.powi(i)).collect(),
            tau: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// System for single-system subcommands.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemSpec>,
    /// Systems for `zoo-check`; the four reference systems when empty.
    #[serde(default)]
    pub systems: Vec<SystemSpec>,
    #[serde(default = "default_betas")]
    pub betas: Vec<Slope>,
    /// Half-widths for topological spans, equicontinuity and spectral probes.
    #[serde(default = "default_b")]
    pub b: Vec<f64>,
    #[serde(default = "default_families")]
    pub families: Vec<Family>,
    #[serde(default)]
    pub topological: TopologicalGrid,
    #[serde(default)]
    pub measure: MeasureGrid,
    #[serde(default)]
    pub spectral: SpectralGrid,
    #[serde(default)]
    pub equicont: EquicontGrid,
    /// Shared-fiber pairs drawn for the suspension domination check.
    #[serde(default = "default_pairs")]
    pub domination_pairs: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_cap")]
    pub exact_cap: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

fn default_betas() -> Vec<Slope> {
    vec![Slope::integer(0), Slope::integer(1), Slope::Float(std::f64::consts::SQRT_2)]
}

fn default_b() -> Vec<f64> {
    vec![1.0]
}

fn default_families() -> Vec<Family> {
    Family::ALL.to_vec()
}

fn default_pairs() -> usize {
    1_000
}

fn default_cap() -> u64 {
    2_000
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config uses defaults")
    }
}

fn check_eps(name: &str, eps: &[f64]) -> Result<()> {
    ensure!(!eps.is_empty(), "{name}.eps must be nonempty");
    ensure!(
        eps.iter().all(|e| e.is_finite() && *e > 0.0),
        "{name}.eps values must be positive"
    );
    let up = eps.windows(2).all(|w| w[0] < w[1]);
    let down = eps.windows(2).all(|w| w[0] > w[1]);
    ensure!(up || down, "{name}.eps must be strictly monotone");
    Ok(())
}

fn check_k(name: &str, k: &[usize]) -> Result<()> {
    ensure!(!k.is_empty(), "{name}.k must be nonempty");
    ensure!(k[0] >= 1, "{name}.k values must be at least 1");
    ensure!(
        k.windows(2).all(|w| w[0] < w[1]),
        "{name}.k must be strictly increasing"
    );
    Ok(())
}

/// A config that failed to parse or validate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid config: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.check()
            .map_err(|e| anyhow::Error::new(ConfigError(format!("{e:#}"))))
    }

    fn check(&self) -> Result<()> {
        ensure!(!self.betas.is_empty(), "betas must be nonempty");
        ensure!(!self.families.is_empty(), "families must be nonempty");
        for (name, bs) in [("b", &self.b), ("measure.b", &self.measure.b)] {
            ensure!(!bs.is_empty(), "{name} must be nonempty");
            ensure!(
                bs.iter().all(|b| b.is_finite() && *b > 0.0),
                "{name} values must be positive"
            );
        }
        check_eps("topological", &self.topological.eps)?;
        check_k("topological", &self.topological.k)?;
        check_eps("measure", &self.measure.eps)?;
        check_k("measure", &self.measure.k)?;
        check_eps("spectral", &self.spectral.eps)?;
        check_k("spectral", &self.spectral.k)?;
        check_eps("equicont", &self.equicont.eps)?;
        ensure!(self.topological.net_size >= 2, "topological.net_size must be at least 2");
        ensure!(self.measure.samples >= 2, "measure.samples must be at least 2");
        ensure!(self.spectral.samples >= 2, "spectral.samples must be at least 2");
        ensure!(self.equicont.clusters >= 1, "equicont.clusters must be at least 1");
        ensure!(self.equicont.k_max != Some(0), "equicont.k_max must be at least 1");
        ensure!(
            self.equicont.tau > 0.0 && self.equicont.tau < 1.0,
            "equicont.tau must lie in (0, 1)"
        );
        ensure!(
            self.equicont.deltas.iter().all(|d| d.is_finite() && *d > 0.0),
            "equicont.deltas must be positive"
        );
        ensure!(self.exact_cap >= 1, "exact_cap must be at least 1");
        for spec in self.systems.iter().chain(&self.system) {
            validate_system(spec)?;
        }
        Ok(())
    }

    pub fn equicont_k_max(&self) -> usize {
        self.equicont
            .k_max
            .unwrap_or_else(|| *self.topological.k.last().expect("validated"))
    }

    pub fn deltas(&self) -> Vec<f64> {
        if self.equicont.deltas.is_empty() {
            dircomplex::equicont::default_deltas()
        } else {
            self.equicont.deltas.clone()
        }
    }

    /// The system of a single-system subcommand.
    pub fn single_system(&self) -> Result<&SystemSpec> {
        match (&self.system, self.systems.as_slice()) {
            (Some(s), _) => Ok(s),
            (None, [s]) => Ok(s),
            (None, []) => bail!("config names no `system`"),
            (None, _) => bail!("config lists several `systems`; set `system` for this subcommand"),
        }
    }

    pub fn zoo_systems(&self) -> Vec<SystemSpec> {
        if self.systems.is_empty() {
            SystemSpec::zoo()
        } else {
            self.systems.clone()
        }
    }

    /// Canonical JSON used for hashing and the manifest.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

fn validate_system(spec: &SystemSpec) -> Result<()> {
    match spec {
        SystemSpec::Rotation { alpha, gamma } => {
            ensure!(alpha.is_finite() && gamma.is_finite(), "rotation angles must be finite")
        }
        SystemSpec::Fullshift { alphabet, radius } | SystemSpec::Skewshift { alphabet, radius } => {
            ensure!((2..=256).contains(alphabet), "shift alphabet must be in 2..=256");
            ensure!(radius.map_or(true, |r| r >= 1), "shift radius must be positive");
        }
        SystemSpec::Permutation { states, .. } => {
            ensure!(*states >= 1, "permutation needs at least one state");
        }
    }
    Ok(())
}

/// Reads a config, or the `config` entry of a manifest.
pub fn load(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn parse(text: &str) -> Result<ExperimentConfig> {
    let invalid = |e: serde_json::Error| anyhow::Error::new(ConfigError(e.to_string()));
    let value: serde_json::Value = serde_json::from_str(text).map_err(invalid)?;
    let body = match value.get("config") {
        Some(inner) if value.get("command").is_some() => inner.clone(),
        _ => value,
    };
    let config: ExperimentConfig = serde_json::from_value(body).map_err(invalid)?;
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn empty_k_grid_is_rejected() {
        let err = parse(r#"{"topological": {"k": []}}"#).unwrap_err();
        assert!(format!("{err:#}").contains("nonempty"));
    }

    #[test]
    fn slopes_parse_from_strings() {
        let c = parse(r#"{"betas": ["0", "1/2", "sqrt2", 1]}"#).unwrap();
        assert_eq!(c.betas[1], Slope::rational(1, 2).unwrap());
        assert_eq!(c.betas[3], Slope::integer(1));
    }

    #[test]
    fn unsorted_grids_are_rejected() {
        assert!(parse(r#"{"measure": {"k": [1, 4, 2]}}"#).is_err());
        assert!(parse(r#"{"spectral": {"eps": [0.5, 0.1, 0.3]}}"#).is_err());
    }

    #[test]
    fn system_tags() {
        let c = parse(r#"{"system": {"kind": "skewshift"}}"#).unwrap();
        assert_eq!(c.single_system().unwrap().name(), "skewshift");
        assert!(parse(r#"{"system": {"kind": "torus"}}"#).is_err());
    }
}
