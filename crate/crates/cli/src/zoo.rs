//! Building concrete systems from their descriptors.

use anyhow::Result;
use dircomplex::systems::{FullShift, PermutationSystem, RotationSystem, SkewShift};
use dircomplex::{ActionSystem, Direction, Slope};

use crate::config::{ExperimentConfig, SystemSpec};

/// Extra window radius beyond the deepest strip and perturbation level.
const RADIUS_MARGIN: i64 = 16;

/// A reference system of any kind.
#[derive(Debug, Clone)]
pub enum AnySystem {
    Rotation(RotationSystem),
    FullShift(FullShift),
    SkewShift(SkewShift),
    Permutation(PermutationSystem),
}

/// Evaluates `$body` with `$sys` bound to the concrete system inside `$any`.
#[macro_export]
macro_rules! with_system {
    ($any:expr, $sys:ident => $body:expr) => {
        match $any {
            $crate::zoo::AnySystem::Rotation($sys) => $body,
            $crate::zoo::AnySystem::FullShift($sys) => $body,
            $crate::zoo::AnySystem::SkewShift($sys) => $body,
            $crate::zoo::AnySystem::Permutation($sys) => $body,
        }
    };
}

impl AnySystem {
    pub fn build(spec: &SystemSpec, config: &ExperimentConfig) -> Result<Self> {
        Ok(match spec {
            SystemSpec::Rotation { alpha, gamma } => AnySystem::Rotation(RotationSystem::new(&[*alpha, *gamma])?),
            SystemSpec::Fullshift { alphabet, radius } => {
                AnySystem::FullShift(FullShift::new(*alphabet, radius.unwrap_or_else(|| auto_radius(config)))?)
            }
            SystemSpec::Skewshift { alphabet, radius } => {
                AnySystem::SkewShift(SkewShift::new(*alphabet, radius.unwrap_or_else(|| auto_radius(config)))?)
            }
            SystemSpec::Permutation { states, .. } => {
                let generators = spec.generators().unwrap_or_default();
                AnySystem::Permutation(PermutationSystem::new(*states, generators)?)
            }
        })
    }

    pub fn describe(&self) -> String {
        with_system!(self, s => s.describe())
    }
}

/// What a sample is drawn for; shift windows are sized per purpose.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Net,
    Measure,
    Spectral,
    Close,
}

impl Purpose {
    const ALL: [Purpose; 4] = [Purpose::Net, Purpose::Measure, Purpose::Spectral, Purpose::Close];

    /// Deepest window and finest perturbation level the purpose needs.
    fn demand(self, config: &ExperimentConfig) -> (usize, u32) {
        let last = |k: &[usize]| k.last().copied().unwrap_or(1);
        match self {
            Purpose::Net => (last(&config.topological.k), config.topological.max_level),
            Purpose::Measure => (last(&config.measure.k), 0),
            Purpose::Spectral => (last(&config.spectral.k), 0),
            Purpose::Close => (config.equicont_k_max(), config.equicont.max_level),
        }
    }
}

/// Shift window radius covering every strip a purpose can request, plus
/// room for the finest perturbation.
pub fn radius_for(config: &ExperimentConfig, purpose: Purpose) -> i64 {
    let (k_max, level) = purpose.demand(config);
    let b_max = config
        .b
        .iter()
        .chain(&config.measure.b)
        .copied()
        .fold(1.0, f64::max);
    let reach = config
        .betas
        .iter()
        .filter_map(|&beta| Direction::planar(beta, b_max).ok())
        .map(|d| d.reach(k_max))
        .max()
        .unwrap_or(k_max as i64);
    reach + level as i64 + RADIUS_MARGIN
}

/// Radius large enough for every purpose.
pub fn auto_radius(config: &ExperimentConfig) -> i64 {
    Purpose::ALL
        .iter()
        .map(|&p| radius_for(config, p))
        .max()
        .unwrap_or(RADIUS_MARGIN)
}

/// Systems whose sampled points carry a finite window.
pub trait Windowed: ActionSystem + Clone {
    /// The same system drawing points with window radius `radius`.
    fn with_radius(&self, radius: i64) -> Self;
}

impl Windowed for RotationSystem {
    fn with_radius(&self, _radius: i64) -> Self {
        self.clone()
    }
}

impl Windowed for PermutationSystem {
    fn with_radius(&self, _radius: i64) -> Self {
        self.clone()
    }
}

impl Windowed for FullShift {
    fn with_radius(&self, radius: i64) -> Self {
        FullShift::new(self.alphabet(), radius).expect("alphabet already validated")
    }
}

impl Windowed for SkewShift {
    fn with_radius(&self, radius: i64) -> Self {
        SkewShift::new(self.alphabet(), radius).expect("alphabet already validated")
    }
}

/// `sys` resized for `purpose`, unless the config fixes the radius.
pub fn sized<S: Windowed>(sys: &S, spec: &SystemSpec, config: &ExperimentConfig, purpose: Purpose) -> S {
    match spec {
        SystemSpec::Fullshift { radius: None, .. } | SystemSpec::Skewshift { radius: None, .. } => {
            sys.with_radius(radius_for(config, purpose))
        }
        _ => sys.clone(),
    }
}

/// `(1, β)` with half-width `b`.
pub fn direction(beta: Slope, b: f64) -> Result<Direction> {
    Ok(Direction::planar(beta, b)?)
}
