//! Finite-scale boundedness verdicts for one row of cover results (fixed ε,
//! increasing k).
//!
//! Rules, in order:
//!
//! 1. When every cell covers the same sample and that sample is not the
//!    whole space, cells past the first
//!    *saturated* one (certified lower bound already at the coverage target,
//!    so the sample has no finer structure left) are ignored.
//! 2. GROWING when at least three cells remain, the certified lower bound
//!    is strictly increasing along the tail (the last half, at least three
//!    cells) and ends at `≥ 1.5×` its value in the first cell.
//! 3. INCONCLUSIVE when the sample saturated, or (for measure covers) when
//!    some cell needs `≥ 90%` of a target of at least 10 points: the scale is
//!    too fine for the sample.
//! 4. BOUNDED(C) when the greedy counts over the last `⌊len/2⌋` cells of
//!    the grid are flat: the largest is at most `⌈1.25×⌉` the smallest. `C` is the
//!    largest greedy count overall.
//! 5. INCONCLUSIVE otherwise.

use std::fmt;

use serde::Serialize;

use super::CoverResult;

const GROWTH_FACTOR: f64 = 1.5;
const BOUNDED_SLACK: f64 = 1.25;
const UNRESOLVED_FRACTION: f64 = 0.9;
const UNRESOLVED_MIN_TARGET: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Verdict {
    Bounded { c: usize },
    Growing { trend: Vec<usize> },
    Inconclusive { reason: String },
}

impl Verdict {
    pub fn is_bounded(&self) -> bool {
        matches!(self, Verdict::Bounded { .. })
    }

    pub fn is_growing(&self) -> bool {
        matches!(self, Verdict::Growing { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Bounded { .. } => "BOUNDED",
            Verdict::Growing { .. } => "GROWING",
            Verdict::Inconclusive { .. } => "INCONCLUSIVE",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Bounded { c } => write!(f, "BOUNDED({c})"),
            _ => f.write_str(self.label()),
        }
    }
}

/// The cells and the rule that decided a verdict, for reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evidence {
    pub lower: Vec<usize>,
    pub upper: Vec<usize>,
    pub effective_len: usize,
}

impl Evidence {
    pub fn of(row: &[CoverResult]) -> Self {
        Evidence {
            lower: row.iter().map(|c| c.lower).collect(),
            upper: row.iter().map(|c| c.greedy_upper).collect(),
            effective_len: effective_len(row),
        }
    }
}

fn saturated(c: &CoverResult) -> bool {
    c.target > 0 && c.lower >= c.target
}

fn effective_len(row: &[CoverResult]) -> usize {
    if row.iter().any(|c| c.population != row[0].population) {
        return row.len();
    }
    row.iter().position(saturated).map_or(row.len(), |i| i + 1)
}

/// What the covered points stand for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    /// Every point of the space; saturation is the true answer.
    Exhaustive,
    /// A finite net standing in for a compact space.
    Net,
    /// Measure draws; the sample size bounds the resolvable scale.
    Measure,
}

/// Verdict for one ε.
pub fn classify(row: &[CoverResult], sampling: Sampling) -> Verdict {
    if row.is_empty() {
        return Verdict::Inconclusive {
            reason: "empty grid".into(),
        };
    }
    let eff = if sampling == Sampling::Exhaustive {
        row
    } else {
        &row[..effective_len(row)]
    };
    if eff.len() >= 3 {
        let tail_len = 3.max(eff.len().div_ceil(2)).min(eff.len());
        let tail = &eff[eff.len() - tail_len..];
        let rising = tail.windows(2).all(|w| w[1].lower > w[0].lower);
        let first = eff[0].lower as f64;
        let last = tail[tail_len - 1].lower as f64;
        if rising && last >= GROWTH_FACTOR * first {
            return Verdict::Growing {
                trend: eff.iter().map(|c| c.lower).collect(),
            };
        }
    }
    if eff.len() < row.len() {
        return Verdict::Inconclusive {
            reason: "sample saturated".into(),
        };
    }
    let exhausted = |c: &CoverResult| {
        c.target >= UNRESOLVED_MIN_TARGET && c.upper() as f64 >= UNRESOLVED_FRACTION * c.target as f64
    };
    if sampling == Sampling::Measure && row.iter().any(exhausted) {
        return Verdict::Inconclusive {
            reason: "scale unresolved by sample".into(),
        };
    }
    let greedy: Vec<usize> = row.iter().map(|c| c.greedy_upper).collect();
    let late = if greedy.len() > 1 {
        &greedy[greedy.len().div_ceil(2)..]
    } else {
        &greedy[..]
    };
    let lo = late.iter().copied().min().unwrap_or(0);
    let hi = late.iter().copied().max().unwrap_or(0);
    if hi as f64 <= (BOUNDED_SLACK * lo as f64).ceil() {
        Verdict::Bounded {
            c: greedy.iter().copied().max().unwrap_or(0),
        }
    } else {
        Verdict::Inconclusive {
            reason: "upper bounds still rising".into(),
        }
    }
}

/// GROWING if any ε grows, BOUNDED if every ε is bounded, else INCONCLUSIVE.
pub fn combine(verdicts: &[Verdict]) -> Verdict {
    if let Some(g) = verdicts.iter().find(|v| v.is_growing()) {
        return g.clone();
    }
    if !verdicts.is_empty() && verdicts.iter().all(Verdict::is_bounded) {
        let c = verdicts
            .iter()
            .map(|v| match v {
                Verdict::Bounded { c } => *c,
                _ => 0,
            })
            .max()
            .unwrap_or(0);
        return Verdict::Bounded { c };
    }
    Verdict::Inconclusive {
        reason: "mixed verdicts across ε".into(),
    }
}
