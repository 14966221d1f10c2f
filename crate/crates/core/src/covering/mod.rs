//! Spanning numbers of finite samples and their boundedness in `k`.
//!
//! A sample stands in for the space (topological spanning numbers) or for
//! the measure (measure spanning numbers, where balls must capture at least
//! `⌈(1−ε)·n⌉` points). Each `(k, ε)` cell records an optimal count when
//! branch and bound finishes within its node budget, a greedy upper bound,
//! and certified lower bounds.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::{eval_matrices, Family, Geometry, MetricSeq};
use crate::systems::ActionSystem;

mod classify;
mod solver;

pub use classify::{classify, combine, Evidence, Sampling, Verdict};
pub use solver::{
    certified_lower, cover_exact, cover_exact_partial, cover_greedy, cover_greedy_partial, improve_cover, packing_set,
    separated_lower, separated_set, Cover,
};

/// Default branch-and-bound node budget per cell.
pub const DEFAULT_EXACT_CAP: u64 = 20_000;

/// Dense symmetric matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn zeros(n: usize) -> Self {
        DistanceMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Builds from `f(i, j)` evaluated for `i < j`.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut dm = DistanceMatrix::zeros(n);
        for i in 0..n {
            for j in i + 1..n {
                dm.set(i, j, f(i, j));
            }
        }
        dm
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn max_distance(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }
}

/// How much of the sample the balls must capture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Coverage {
    /// Every point (topological spanning numbers).
    Full,
    /// At least `⌈(1−ε)·n⌉` points (measure spanning numbers).
    Measure,
}

impl Coverage {
    pub fn target(self, n: usize, eps: f64) -> usize {
        match self {
            Coverage::Full => n,
            Coverage::Measure => {
                let t = ((1.0 - eps) * n as f64 - 1e-9).ceil();
                t.clamp(0.0, n as f64) as usize
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverResult {
    pub epsilon: f64,
    pub k: usize,
    /// Points that must be covered.
    pub target: usize,
    /// Sample size.
    pub population: usize,
    /// Optimal count with sample centres, when the search finished.
    pub exact: Option<usize>,
    /// Greedy cover after local search; a valid upper bound.
    pub greedy_upper: usize,
    /// Greedy `2ε`-separated set size.
    pub separated_lower: usize,
    /// Certified lower bound for this coverage target.
    pub lower: usize,
    pub centers: Vec<usize>,
}

impl CoverResult {
    /// Best known upper bound.
    pub fn upper(&self) -> usize {
        self.exact.unwrap_or(self.greedy_upper)
    }
}

/// Solves one cell: covering `target` points of `dm` by `eps`-balls.
pub fn solve_cell(dm: &DistanceMatrix, eps: f64, k: usize, target: usize, cap: u64) -> CoverResult {
    let greedy = improve_cover(dm, eps, target, &cover_greedy_partial(dm, eps, target));
    let lower = certified_lower(dm, eps, target);
    // a greedy cover meeting the certified bound is already optimal
    let exact = if lower == greedy.size {
        Some(greedy.clone())
    } else {
        cover_exact_partial(dm, eps, target, cap)
    };
    let centers = exact.as_ref().map_or_else(|| greedy.centers.clone(), |c| c.centers.clone());
    CoverResult {
        epsilon: eps,
        k,
        target: target.min(dm.len()),
        population: dm.len(),
        exact: exact.map(|c| c.size),
        greedy_upper: greedy.size,
        separated_lower: separated_lower(dm, 2.0 * eps),
        lower,
        centers,
    }
}

/// Covering the whole sample under one depth-`k` metric.
pub fn span_topological<S: ActionSystem>(
    ms: &MetricSeq<'_, S>,
    sample: &[S::Point],
    k: usize,
    eps: f64,
    cap: u64,
) -> Result<CoverResult> {
    let dm = ms.eval_matrix(sample, k)?;
    Ok(solve_cell(&dm, eps, k, dm.len(), cap))
}

/// Covering `⌈(1−ε)·n⌉` of `n` measure draws.
pub fn span_measure<S: ActionSystem>(
    ms: &MetricSeq<'_, S>,
    k: usize,
    eps: f64,
    n_samples: usize,
    seed: u64,
    cap: u64,
) -> Result<CoverResult> {
    let sample = crate::systems::sample_measure(ms.system, n_samples, seed)?;
    let dm = ms.eval_matrix(&sample, k)?;
    let target = Coverage::Measure.target(dm.len(), eps);
    Ok(solve_cell(&dm, eps, k, target, cap))
}

/// Grid specification shared by all profile builders.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub eps: Vec<f64>,
    pub k: Vec<usize>,
    pub coverage: Coverage,
    pub cap: u64,
    /// Also solve every cell at `ε/2` (sample-centre restriction check).
    pub half_eps: bool,
}

impl Grid {
    pub fn validate(&self) -> Result<()> {
        if self.eps.is_empty() || self.k.is_empty() {
            return Err(Error::InvalidArgument("ε and k grids must be nonempty".into()));
        }
        if self.eps.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(Error::InvalidArgument("ε values must be positive".into()));
        }
        if self.k.contains(&0) {
            return Err(Error::InvalidDepth(0));
        }
        if self.k.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("k grid must be strictly increasing".into()));
        }
        Ok(())
    }
}

/// Cover results and verdicts of one metric family over an `(ε, k)` grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityProfile {
    pub family: Family,
    pub geometry: String,
    pub coverage: Coverage,
    pub eps: Vec<f64>,
    pub k: Vec<usize>,
    /// `cells[e][j]` is the result for `eps[e]` and `k[j]`.
    pub cells: Vec<Vec<CoverResult>>,
    pub verdicts: Vec<Verdict>,
    /// Same grid with ball radius `ε/2` and the coverage target of `ε`.
    pub half_cells: Vec<Vec<CoverResult>>,
    pub half_verdicts: Vec<Verdict>,
    pub overall: Verdict,
}

/// Profiles for several families from one sample, sharing orbit work.
pub fn profiles<S: ActionSystem>(
    sys: &S,
    geometry: &Geometry,
    families: &[Family],
    sample: &[S::Point],
    grid: &Grid,
) -> Result<Vec<ComplexityProfile>> {
    grid.validate()?;
    let tables = eval_matrices(sys, geometry, sample, families, &grid.k, None)?;
    let sampling = match grid.coverage {
        Coverage::Measure => Sampling::Measure,
        Coverage::Full if covers_space(sys, sample) => Sampling::Exhaustive,
        Coverage::Full => Sampling::Net,
    };
    Ok(families
        .iter()
        .zip(&tables)
        .map(|(&family, mats)| profile_from_matrices(family, &geometry.to_string(), mats, grid, sampling))
        .collect())
}

/// The sample lists every point of a finite space exactly once.
fn covers_space<S: ActionSystem>(sys: &S, sample: &[S::Point]) -> bool {
    sys.cardinality() == Some(sample.len())
        && (0..sample.len()).all(|i| (i + 1..sample.len()).all(|j| sys.distance(&sample[i], &sample[j]) > 0.0))
}

/// Builds a profile from per-depth distance matrices (`mats[j]` for `grid.k[j]`).
pub fn profile_from_matrices(
    family: Family,
    geometry: &str,
    mats: &[DistanceMatrix],
    grid: &Grid,
    sampling: Sampling,
) -> ComplexityProfile {
    let solve = |radius_of: &(dyn Fn(f64) -> f64 + Sync)| -> Vec<Vec<CoverResult>> {
        grid.eps
            .par_iter()
            .map(|&eps| {
                grid.k
                    .par_iter()
                    .zip(mats)
                    .map(|(&k, dm)| {
                        let target = grid.coverage.target(dm.len(), eps);
                        let mut cell = solve_cell(dm, radius_of(eps), k, target, grid.cap);
                        cell.epsilon = radius_of(eps);
                        cell
                    })
                    .collect()
            })
            .collect()
    };
    let cells = solve(&|e| e);
    let verdicts: Vec<Verdict> = cells.iter().map(|row| classify(row, sampling)).collect();
    let (half_cells, half_verdicts) = if grid.half_eps {
        let h = solve(&|e| e / 2.0);
        let v = h.iter().map(|row| classify(row, sampling)).collect();
        (h, v)
    } else {
        (Vec::new(), Vec::new())
    };
    let overall = combine(&verdicts);
    ComplexityProfile {
        family,
        geometry: geometry.to_string(),
        coverage: grid.coverage,
        eps: grid.eps.clone(),
        k: grid.k.clone(),
        cells,
        verdicts,
        half_cells,
        half_verdicts,
        overall,
    }
}
