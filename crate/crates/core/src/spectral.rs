//! Empirical probe of directional discrete spectrum.
//!
//! For a test function `f` and a fixed sample `z_1, …, z_n` from the
//! measure, the translates `f ∘ T^w` (`w` in the truncated strip) are vectors
//! `(f(T^w z_i))_i` compared in empirical `L²`. The ε-covering numbers of
//! this orbit set stay bounded in `k` when `f` behaves like an element of the
//! directional Kronecker algebra.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::covering::{classify, combine, solve_cell, CoverResult, DistanceMatrix, Sampling, Verdict};
use crate::error::{Error, Result};
use crate::lattice::Direction;
use crate::metrics::Geometry;
use crate::systems::{orbit_over, ActionSystem, Observable};

/// Distances below this are reported as zero.
pub const CLAMP: f64 = 1e-12;

/// Values of one observable on a fixed sample.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalFunction {
    pub id: String,
    pub values: Vec<Complex64>,
}

impl EmpiricalFunction {
    pub fn new<P>(f: &Observable<P>, sample: &[P]) -> Self {
        EmpiricalFunction {
            id: f.id.clone(),
            values: sample.iter().map(|z| f.eval(z)).collect(),
        }
    }

    pub fn norm(&self) -> f64 {
        l2(&self.values, None)
    }
}

fn l2(a: &[Complex64], b: Option<&[Complex64]>) -> f64 {
    let n = a.len() as f64;
    let s: f64 = match b {
        Some(b) => a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum(),
        None => a.iter().map(|x| x.norm_sqr()).sum(),
    };
    (s / n).sqrt()
}

/// Translates `f ∘ T^w` on a fixed sample, in window order.
pub struct OrbitTable {
    pub function: String,
    /// `values[j][i] = f(T^{w_j} z_i)`.
    pub values: Vec<Vec<Complex64>>,
    /// `prefix[k]` translates belong to the depth-`k` window.
    prefix: Vec<usize>,
}

impl OrbitTable {
    pub fn build<S: ActionSystem>(
        sys: &S,
        f: &Observable<S::Point>,
        direction: &Direction,
        sample: &[S::Point],
        k_max: usize,
    ) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::InvalidArgument("spectral probe needs a sample".into()));
        }
        let window = Geometry::Directional(direction.clone()).window(k_max, sys.rank())?;
        let orbits: Vec<Vec<S::Point>> = sample
            .par_iter()
            .map(|z| orbit_over(sys, z, window.elements()))
            .collect::<Result<_>>()?;
        let m = window.elements().len();
        let values = (0..m)
            .map(|j| orbits.iter().map(|o| f.eval(&o[j])).collect())
            .collect();
        Ok(OrbitTable {
            function: f.id.clone(),
            values,
            prefix: (0..=k_max).map(|k| window.len_at(k)).collect(),
        })
    }

    /// Distance matrix of the depth-`k` orbit.
    pub fn matrix(&self, k: usize) -> Result<DistanceMatrix> {
        if k == 0 || k >= self.prefix.len() {
            return Err(Error::InvalidDepth(k));
        }
        let m = self.prefix[k];
        if m == 0 {
            return Err(Error::EmptyWindow);
        }
        Ok(DistanceMatrix::from_fn(m, |i, j| {
            let d = l2(&self.values[i], Some(&self.values[j]));
            if d < CLAMP {
                0.0
            } else {
                d
            }
        }))
    }

    pub fn norms(&self) -> Vec<f64> {
        self.values.iter().map(|v| l2(v, None)).collect()
    }
}

/// ε-covering number of `{f ∘ T^w : w ∈ Λ_k^v(b)}` in empirical `L²`.
pub fn orbit_cover_number<S: ActionSystem>(
    sys: &S,
    f: &Observable<S::Point>,
    direction: &Direction,
    sample: &[S::Point],
    k: usize,
    eps: f64,
    cap: u64,
) -> Result<CoverResult> {
    let table = OrbitTable::build(sys, f, direction, sample, k)?;
    let dm = table.matrix(k)?;
    Ok(solve_cell(&dm, eps, k, dm.len(), cap))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SpectrumVerdict {
    #[serde(rename = "DISCRETE-LIKE")]
    DiscreteLike,
    #[serde(rename = "NON-DISCRETE")]
    NonDiscrete,
    #[serde(rename = "INCONCLUSIVE")]
    Inconclusive,
}

impl fmt::Display for SpectrumVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpectrumVerdict::DiscreteLike => "DISCRETE-LIKE",
            SpectrumVerdict::NonDiscrete => "NON-DISCRETE",
            SpectrumVerdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

/// Orbit covers of one test function over the `(ε, k)` grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionProfile {
    pub function: String,
    /// `cells[e][j]` for `eps[e]`, `k[j]`.
    pub cells: Vec<Vec<CoverResult>>,
    pub verdicts: Vec<Verdict>,
    pub overall: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralReport {
    pub direction: String,
    pub eps: Vec<f64>,
    pub k: Vec<usize>,
    pub functions: Vec<FunctionProfile>,
    pub verdict: SpectrumVerdict,
}

/// DISCRETE-LIKE when every test-function orbit is bounded, NON-DISCRETE
/// when any grows.
pub fn spectrum_verdict<S: ActionSystem>(
    sys: &S,
    direction: &Direction,
    functions: &[Observable<S::Point>],
    sample: &[S::Point],
    eps: &[f64],
    ks: &[usize],
    cap: u64,
) -> Result<SpectralReport> {
    if functions.is_empty() || eps.is_empty() || ks.is_empty() {
        return Err(Error::InvalidArgument("spectral probe needs functions, ε and k grids".into()));
    }
    let k_max = *ks.iter().max().expect("nonempty");
    let mut profiles = Vec::with_capacity(functions.len());
    for f in functions {
        let table = OrbitTable::build(sys, f, direction, sample, k_max)?;
        let mats: Vec<DistanceMatrix> = ks.iter().map(|&k| table.matrix(k)).collect::<Result<_>>()?;
        let cells: Vec<Vec<CoverResult>> = eps
            .par_iter()
            .map(|&e| {
                ks.iter()
                    .zip(&mats)
                    .map(|(&k, dm)| solve_cell(dm, e, k, dm.len(), cap))
                    .collect()
            })
            .collect();
        let verdicts: Vec<Verdict> = cells.iter().map(|row| classify(row, Sampling::Net)).collect();
        let overall = combine(&verdicts);
        profiles.push(FunctionProfile {
            function: f.id.clone(),
            cells,
            verdicts,
            overall,
        });
    }
    let verdict = if profiles.iter().any(|p| p.overall.is_growing()) {
        SpectrumVerdict::NonDiscrete
    } else if profiles.iter().all(|p| p.overall.is_bounded()) {
        SpectrumVerdict::DiscreteLike
    } else {
        SpectrumVerdict::Inconclusive
    };
    Ok(SpectralReport {
        direction: direction.to_string(),
        eps: eps.to_vec(),
        k: ks.to_vec(),
        functions: profiles,
        verdict,
    })
}
