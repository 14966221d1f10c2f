//! Directional complexity of Z^q-actions.
//!
//! Strips `Λ_k^v(b)` along a direction `v = (1, β)` drive three families of
//! metrics (Bowen, max-mean, mean). Spanning numbers of finite samples under
//! those metrics, together with equicontinuity and spectral probes, give
//! finite-scale evidence of bounded or growing directional complexity.

pub mod covering;
pub mod equicont;
pub mod error;
pub mod lattice;
pub mod metrics;
pub mod rng;
pub mod spectral;
pub mod suspension;
pub mod systems;

pub use error::{Error, Result};
pub use lattice::{strip_contains, strip_ratio, strip_window, Direction, Slope, StripWindow};
pub use systems::ActionSystem;
