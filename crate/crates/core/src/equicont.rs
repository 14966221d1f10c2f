//! Finite-scale equicontinuity probes along a strip.
//!
//! Close pairs come from clusters of perturbations around sample points.
//! For each pair the base distance `d0` is compared with the family value
//! over all depths up to `k_max`:
//!
//! * bowen and maxmean: the value at `k_max` (both are nondecreasing in `k`);
//! * mean-limsup: the largest mean over depths in `(k_max/2, k_max]`, a
//!   finite stand-in for the limit superior.
//!
//! The modulus at `ε` is the largest grid `δ` such that every pair with
//! `d0 < δ` has family value `< ε`, or `0` when no grid `δ` works.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Direction;
use crate::metrics::{MetricSeq, Family};
use crate::rng::SampleRng;
use crate::systems::ActionSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EquiFamily {
    Bowen,
    MaxMean,
    MeanLimsup,
}

impl EquiFamily {
    pub const ALL: [EquiFamily; 3] = [EquiFamily::Bowen, EquiFamily::MaxMean, EquiFamily::MeanLimsup];

    pub fn name(self) -> &'static str {
        match self {
            EquiFamily::Bowen => "bowen",
            EquiFamily::MaxMean => "maxmean",
            EquiFamily::MeanLimsup => "mean-limsup",
        }
    }

    /// Metric family the probe is paired with in covering runs.
    pub fn metric(self) -> Family {
        match self {
            EquiFamily::Bowen => Family::Bowen,
            EquiFamily::MaxMean => Family::MaxMean,
            EquiFamily::MeanLimsup => Family::Mean,
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for EquiFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EquiFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bowen" => Ok(EquiFamily::Bowen),
            "maxmean" | "max-mean" => Ok(EquiFamily::MaxMean),
            "mean" | "mean-limsup" | "meanlimsup" => Ok(EquiFamily::MeanLimsup),
            _ => Err(Error::InvalidArgument(format!("unknown equicontinuity family `{s}`"))),
        }
    }
}

/// `2^{-1}, …, 2^{-16}`.
pub fn default_deltas() -> Vec<f64> {
    (1..=16).map(|i| 0.5f64.powi(i)).collect()
}

/// Points grouped into clusters; pairs are formed within clusters only.
#[derive(Debug, Clone)]
pub struct CloseSample<P> {
    pub points: Vec<P>,
    pub clusters: Vec<Range<usize>>,
}

impl<P> CloseSample<P> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `clusters` measure draws, each followed by its perturbations at levels
/// `0..=max_level`.
pub fn close_sample<S: ActionSystem>(
    sys: &S,
    clusters: usize,
    max_level: u32,
    rng: &mut SampleRng,
) -> CloseSample<S::Point> {
    let mut points = Vec::new();
    let mut ranges = Vec::with_capacity(clusters);
    for _ in 0..clusters {
        let start = points.len();
        let centre = sys.sample_point(rng);
        for level in 0..=max_level {
            points.push(sys.perturb(&centre, level, rng));
        }
        points.push(centre);
        ranges.push(start..points.len());
    }
    CloseSample {
        points,
        clusters: ranges,
    }
}

/// Base distance and family values of one within-cluster pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairRecord {
    pub i: usize,
    pub j: usize,
    pub d0: f64,
    values: [f64; 3],
}

impl PairRecord {
    pub fn value(&self, family: EquiFamily) -> f64 {
        self.values[family.index()]
    }
}

/// Evaluates every within-cluster pair once, for all three families.
pub fn pair_records<S: ActionSystem>(
    sys: &S,
    direction: &Direction,
    sample: &CloseSample<S::Point>,
    k_max: usize,
) -> Result<Vec<PairRecord>> {
    if k_max == 0 {
        return Err(Error::InvalidDepth(0));
    }
    let ms = MetricSeq::directional(sys, Family::Bowen, direction.clone());
    let pairs: Vec<(usize, usize)> = sample
        .clusters
        .iter()
        .flat_map(|r| r.clone().flat_map(move |i| (i + 1..r.end).map(move |j| (i, j))))
        .collect();
    let tail_start = k_max / 2;
    pairs
        .par_iter()
        .map(|&(i, j)| {
            let (x, y) = (&sample.points[i], &sample.points[j]);
            let trace = ms.trace(x, y, k_max)?;
            let limsup = trace.mean[tail_start..].iter().copied().fold(0.0, f64::max);
            Ok(PairRecord {
                i,
                j,
                d0: sys.distance(x, y),
                values: [trace.bowen[k_max - 1], trace.maxmean[k_max - 1], limsup],
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusCurve {
    pub family: EquiFamily,
    pub eps: Vec<f64>,
    /// `delta[e]` for `eps[e]`; `0` when no grid value works.
    pub delta: Vec<f64>,
}

impl ModulusCurve {
    /// A positive `δ` for every `ε`.
    pub fn passes(&self) -> bool {
        self.delta.iter().all(|&d| d > 0.0)
    }
}

/// Largest grid `δ` with no failing pair among retained points.
fn delta_for(records: &[PairRecord], family: EquiFamily, eps: f64, deltas: &[f64], keep: &[bool]) -> f64 {
    deltas
        .iter()
        .copied()
        .filter(|&delta| {
            records
                .iter()
                .filter(|r| keep[r.i] && keep[r.j] && r.d0 < delta)
                .all(|r| r.value(family) < eps)
        })
        .fold(0.0, f64::max)
}

pub fn modulus_from_records(
    records: &[PairRecord],
    n: usize,
    family: EquiFamily,
    eps: &[f64],
    deltas: &[f64],
) -> ModulusCurve {
    let keep = vec![true; n];
    ModulusCurve {
        family,
        eps: eps.to_vec(),
        delta: eps.iter().map(|&e| delta_for(records, family, e, deltas, &keep)).collect(),
    }
}

/// Modulus of `family` along `direction` over all within-cluster pairs.
pub fn modulus<S: ActionSystem>(
    sys: &S,
    direction: &Direction,
    family: EquiFamily,
    sample: &CloseSample<S::Point>,
    k_max: usize,
    eps: &[f64],
    deltas: &[f64],
) -> Result<ModulusCurve> {
    let records = pair_records(sys, direction, sample, k_max)?;
    Ok(modulus_from_records(&records, sample.len(), family, eps, deltas))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProbeVerdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

impl fmt::Display for ProbeVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProbeVerdict::Pass => "PASS",
            ProbeVerdict::Fail => "FAIL",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MuReport {
    pub family: EquiFamily,
    pub tau: f64,
    pub population: usize,
    /// `⌈τ·n⌉`, shared by all `ε`.
    pub budget: usize,
    pub eps: Vec<f64>,
    /// Modulus on the retained set after processing each `ε`.
    pub delta: Vec<f64>,
    /// Points discarded so far when `eps[e]` was processed.
    pub discarded: Vec<usize>,
    pub verdict: ProbeVerdict,
}

/// Measure-theoretic variant: discard up to `⌈τ·n⌉` points to make the
/// modulus positive at every `ε`.
///
/// `ε` values are processed from largest to smallest on one shared retained
/// set. While a failing pair remains at the finest `δ`, the point in the most
/// failing pairs (lowest index on ties) is dropped. A PASS is a certificate
/// for the sample; a FAIL only says this greedy search found none.
pub fn mu_report_from_records(
    records: &[PairRecord],
    n: usize,
    family: EquiFamily,
    tau: f64,
    eps: &[f64],
    deltas: &[f64],
) -> Result<MuReport> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidArgument(format!("τ = {tau} is not in (0, 1)")));
    }
    let budget = (tau * n as f64).ceil() as usize;
    let finest = deltas.iter().copied().fold(f64::INFINITY, f64::min);
    let mut keep = vec![true; n];
    let mut dropped = 0;
    let mut order: Vec<usize> = (0..eps.len()).collect();
    order.sort_by(|&a, &b| eps[b].total_cmp(&eps[a]));
    let mut delta = vec![0.0; eps.len()];
    let mut discarded = vec![0; eps.len()];
    for e in order {
        loop {
            let mut degree = vec![0usize; n];
            let mut any = false;
            for r in records {
                if keep[r.i] && keep[r.j] && r.d0 < finest && r.value(family) >= eps[e] {
                    degree[r.i] += 1;
                    degree[r.j] += 1;
                    any = true;
                }
            }
            if !any || dropped >= budget {
                break;
            }
            let worst = (0..n).fold(0, |best, i| if degree[i] > degree[best] { i } else { best });
            keep[worst] = false;
            dropped += 1;
        }
        delta[e] = delta_for(records, family, eps[e], deltas, &keep);
        discarded[e] = dropped;
    }
    // a later discard can only help earlier ε; report the final retained set
    for (e, d) in delta.iter_mut().enumerate() {
        *d = delta_for(records, family, eps[e], deltas, &keep);
    }
    let verdict = if delta.iter().all(|&d| d > 0.0) {
        ProbeVerdict::Pass
    } else {
        ProbeVerdict::Fail
    };
    Ok(MuReport {
        family,
        tau,
        population: n,
        budget,
        eps: eps.to_vec(),
        delta,
        discarded,
        verdict,
    })
}

/// Knobs shared by the equicontinuity probes.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeConfig {
    pub k_max: usize,
    pub eps: Vec<f64>,
    pub deltas: Vec<f64>,
    pub max_level: u32,
}

/// Draws `n` points (in clusters of `max_level + 2`) and runs the
/// measure-theoretic probe.
pub fn mu_equicontinuity_report<S: ActionSystem>(
    sys: &S,
    direction: &Direction,
    family: EquiFamily,
    tau: f64,
    n: usize,
    seed: u64,
    config: &ProbeConfig,
) -> Result<MuReport> {
    let cluster = config.max_level as usize + 2;
    let mut rng = crate::rng::seeded(seed);
    let sample = close_sample(sys, n.div_ceil(cluster).max(1), config.max_level, &mut rng);
    let records = pair_records(sys, direction, &sample, config.k_max)?;
    mu_report_from_records(&records, sample.len(), family, tau, &config.eps, &config.deltas)
}
