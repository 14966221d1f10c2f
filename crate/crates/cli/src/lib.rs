//! Experiment runner for directional complexity.
//!
//! A run takes an [`config::ExperimentConfig`], executes one subcommand and
//! emits CSV tables, a JSON summary and a manifest. Identical configs and
//! seeds produce byte-identical outputs regardless of the worker count.

pub mod config;
pub mod runner;
pub mod zoo;

pub use config::{ExperimentConfig, SystemSpec};
pub use runner::{manifest, run, write_artifacts, Artifacts, Command};

/// Structured record printed on failure.
pub fn error_record(err: &anyhow::Error) -> serde_json::Value {
    let kind = err
        .chain()
        .find_map(|e| {
            if let Some(core) = e.downcast_ref::<dircomplex::Error>() {
                Some(core_kind(core))
            } else if e.is::<config::ConfigError>() {
                Some("config")
            } else if e.is::<std::io::Error>() {
                Some("io")
            } else {
                None
            }
        })
        .unwrap_or("invalid-input");
    serde_json::json!({
        "error": {
            "kind": kind,
            "message": format!("{err:#}"),
        }
    })
}

fn core_kind(e: &dircomplex::Error) -> &'static str {
    use dircomplex::Error::*;
    match e {
        InvalidDirection(_) => "invalid-direction",
        InvalidDepth(_) => "invalid-depth",
        DimensionMismatch { .. } => "dimension-mismatch",
        ResolutionExceeded { .. } => "resolution-exceeded",
        EmptyWindow => "empty-window",
        InvalidSystem(_) => "invalid-system",
        InvalidArgument(_) => "invalid-argument",
    }
}
