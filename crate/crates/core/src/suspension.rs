//! Suspension of a `Z²`-action along a slope `β`.
//!
//! `X̃ = X × [0,1)²` carries the `R²`-flow
//! `φ_{s,t}(x, u, v) = (T^{([s+u], [t+v])} x, {s+u}, {t+v})`, and the
//! suspension map is `W = φ_{1,β}`, so that
//!
//! ```text
//! W^n(x, u, v) = (T^{(n, [nβ+v])} x, u, {nβ+v}).
//! ```
//!
//! Only the integer powers of `W` are implemented. The third coordinate is
//! kept as an integer numerator over a fixed denominator `D` (`den·2^64` for
//! `β = num/den`, `2^64` for float slopes) and advanced by an integer step,
//! so `W^{n+m} = W^n ∘ W^m` holds exactly.

use rand::Rng;
use serde::Serialize;

use crate::covering::{profiles, ComplexityProfile, Coverage, Grid};
use crate::error::{Error, Result};
use crate::lattice::{Direction, Slope};
use crate::metrics::{fold_trace, Family, Geometry, MetricSeq};
use crate::rng::{derive_seed, SampleRng};
use crate::systems::{sample_measure, ActionSystem, Observable};

const TWO_64: f64 = 18_446_744_073_709_551_616.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SuspPoint<P> {
    pub x: P,
    /// `u = raw / 2^64`.
    pub u: u64,
    /// `v = raw / D`.
    pub v: u128,
}

#[derive(Debug, Clone)]
pub struct SuspensionSystem<S> {
    base: S,
    beta: Slope,
    denom: u128,
    step: i128,
}

/// The suspension of `base` along `beta`.
pub fn suspend<S: ActionSystem>(base: S, beta: Slope) -> Result<SuspensionSystem<S>> {
    SuspensionSystem::new(base, beta)
}

impl<S: ActionSystem> SuspensionSystem<S> {
    pub fn new(base: S, beta: Slope) -> Result<Self> {
        if base.rank() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: base.rank(),
            });
        }
        let (denom, step) = match beta {
            Slope::Rational { num, den } => ((den as u128) << 64, (num as i128) << 64),
            Slope::Float(b) => {
                if b.abs() >= 2f64.powi(60) {
                    return Err(Error::InvalidDirection(format!("slope {b} too large for suspension")));
                }
                (1u128 << 64, (b * TWO_64).round() as i128)
            }
        };
        Ok(SuspensionSystem {
            base,
            beta,
            denom,
            step,
        })
    }

    pub fn base(&self) -> &S {
        &self.base
    }

    pub fn beta(&self) -> Slope {
        self.beta
    }

    /// Point with `u, v ∈ [0, 1)` given as reals.
    pub fn point(&self, x: S::Point, u: f64, v: f64) -> SuspPoint<S::Point> {
        let u = crate::systems::CirclePoint::from_f64(u).0;
        let v_raw = (v.rem_euclid(1.0) * self.denom as f64) as u128;
        SuspPoint {
            x,
            u,
            v: v_raw.min(self.denom - 1),
        }
    }

    pub fn v_f64(&self, p: &SuspPoint<S::Point>) -> f64 {
        p.v as f64 / self.denom as f64
    }

    /// `([nβ+v], {nβ+v})` in the fixed-point representation.
    pub fn advance(&self, v: u128, n: i64) -> (i64, u128) {
        let total = v as i128 + n as i128 * self.step;
        let d = self.denom as i128;
        (total.div_euclid(d) as i64, total.rem_euclid(d) as u128)
    }

    /// Base element `(n, [nβ+v])` reached by `W^n` from a point with phase `v`.
    pub fn base_element(&self, v: u128, n: i64) -> [i64; 2] {
        [n, self.advance(v, n).0]
    }

    fn circle(&self, a: u128, b: u128) -> f64 {
        let d = a.abs_diff(b);
        d.min(self.denom - d) as f64 / self.denom as f64
    }

    /// `(1/k) Σ_{i<k} d(T^{(i,[iβ+v])} x, T^{(i,[iβ+v])} y)` over a shared
    /// fiber `v`, summed exactly as the Z-action mean metric is.
    pub fn fiber_average(&self, x: &S::Point, y: &S::Point, v: u128, k: usize) -> Result<f64> {
        let window = Geometry::ZAction.window(k, 1)?;
        let dists = (0..k as i64)
            .map(|i| {
                let w = self.base_element(v, i);
                Ok(self.base.distance(&self.base.act(&w, x)?, &self.base.act(&w, y)?))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(fold_trace(&dists, &window).mean[k - 1])
    }
}

impl<S: ActionSystem> ActionSystem for SuspensionSystem<S> {
    type Point = SuspPoint<S::Point>;

    fn rank(&self) -> usize {
        1
    }

    fn act(&self, w: &[i64], p: &Self::Point) -> Result<Self::Point> {
        self.check_rank(w)?;
        let (carry, v) = self.advance(p.v, w[0]);
        Ok(SuspPoint {
            x: self.base.act(&[w[0], carry], &p.x)?,
            u: p.u,
            v,
        })
    }

    /// `max(d(x, y), |u − u'|_circle, |v − v'|_circle)`.
    fn distance(&self, a: &Self::Point, b: &Self::Point) -> f64 {
        let du = crate::systems::circle_distance(
            crate::systems::CirclePoint(a.u),
            crate::systems::CirclePoint(b.u),
        );
        self.base.distance(&a.x, &b.x).max(du).max(self.circle(a.v, b.v))
    }

    fn diameter(&self) -> f64 {
        self.base.diameter().max(0.5)
    }

    fn sample_point(&self, rng: &mut SampleRng) -> Self::Point {
        SuspPoint {
            x: self.base.sample_point(rng),
            u: rng.gen(),
            v: rng.gen_range(0..self.denom),
        }
    }

    fn perturb(&self, p: &Self::Point, level: u32, rng: &mut SampleRng) -> Self::Point {
        let du: u64 = if level >= 63 { 0 } else { rng.gen::<u64>() >> (level + 1) };
        let u = if rng.gen() { p.u.wrapping_add(du) } else { p.u.wrapping_sub(du) };
        let span = if level >= 126 { 0 } else { self.denom >> (level + 1) };
        let dv = if span == 0 { 0 } else { rng.gen_range(0..span) };
        let v = if rng.gen() {
            (p.v + dv) % self.denom
        } else {
            (p.v + self.denom - dv) % self.denom
        };
        SuspPoint {
            x: self.base.perturb(&p.x, level, rng),
            u,
            v,
        }
    }

    /// The base battery, read off the first coordinate.
    fn observables(&self) -> Vec<Observable<Self::Point>> {
        self.base
            .observables()
            .into_iter()
            .map(|f| {
                let id = f.id.clone();
                Observable::new(id, move |p: &Self::Point| f.eval(&p.x))
            })
            .collect()
    }

    fn describe(&self) -> String {
        format!("suspension({}, beta={})", self.base.describe(), self.beta)
    }
}

/// Z-action mean metric of the suspension at depth `k`.
pub fn suspension_mean_metric<S: ActionSystem>(
    ss: &SuspensionSystem<S>,
    p1: &SuspPoint<S::Point>,
    p2: &SuspPoint<S::Point>,
    k: usize,
) -> Result<f64> {
    MetricSeq::new(ss, Family::Mean, Geometry::ZAction).eval(p1, p2, k)
}

/// Outcome of comparing the suspension mean metric with fiber averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DominationReport {
    pub pairs: usize,
    /// `pairs × depths` comparisons.
    pub checks: usize,
    pub violations: usize,
}

/// Draws `pairs` pairs `(x, u, v), (y, u, v)` sharing their fiber and checks
/// that the suspension mean metric dominates the base fiber average at
/// every depth in `ks`.
pub fn shared_fiber_domination<S: ActionSystem>(
    ss: &SuspensionSystem<S>,
    pairs: usize,
    ks: &[usize],
    seed: u64,
) -> Result<DominationReport> {
    let k_max = ks.iter().copied().max().ok_or(Error::InvalidDepth(0))?;
    let ms = MetricSeq::new(ss, Family::Mean, Geometry::ZAction);
    let mut rng = crate::rng::seeded(seed);
    let mut violations = 0;
    for _ in 0..pairs {
        let p = ss.sample_point(&mut rng);
        let q = SuspPoint {
            x: ss.base.sample_point(&mut rng),
            u: p.u,
            v: p.v,
        };
        let trace = ms.trace(&p, &q, k_max)?;
        for &k in ks {
            if trace.get(Family::Mean, k)? < ss.fiber_average(&p.x, &q.x, p.v, k)? {
                violations += 1;
            }
        }
    }
    Ok(DominationReport {
        pairs,
        checks: pairs * ks.len(),
        violations,
    })
}

/// Half-widths compared against the suspension.
pub const CROSS_B: [f64; 3] = [0.5, 1.0, 2.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossValidation {
    pub beta: String,
    /// `(b, profile)` for the base directional mean family, measure covers.
    pub base: Vec<(f64, ComplexityProfile)>,
    /// Z-action mean family of the suspension, measure covers.
    pub suspension: ComplexityProfile,
    /// Base verdicts coincide across all `b`.
    pub base_consistent: bool,
    /// Every verdict (base and suspension) has the same label.
    pub agreement: bool,
    /// Agreement on a decisive (non-INCONCLUSIVE) label.
    pub decisive: bool,
    pub note: String,
}

fn measure_grid(eps: &[f64], ks: &[usize], cap: u64) -> Grid {
    Grid {
        eps: eps.to_vec(),
        k: ks.to_vec(),
        coverage: Coverage::Measure,
        cap,
        half_eps: false,
    }
}

/// Z-action mean-family measure profile of the suspension of `base` along
/// `β`, on `n_samples` draws seeded by `seed`.
pub fn suspension_profile<S: ActionSystem + Clone>(
    base: &S,
    beta: Slope,
    eps: &[f64],
    ks: &[usize],
    n_samples: usize,
    seed: u64,
    cap: u64,
) -> Result<ComplexityProfile> {
    let ss = SuspensionSystem::new(base.clone(), beta)?;
    let sample = sample_measure(&ss, n_samples, seed)?;
    Ok(profiles(&ss, &Geometry::ZAction, &[Family::Mean], &sample, &measure_grid(eps, ks, cap))?.remove(0))
}

/// Compares base mean profiles (one per `b`) with the suspension profile.
pub fn compare_profiles(
    beta: Slope,
    base: Vec<(f64, ComplexityProfile)>,
    suspension: ComplexityProfile,
    note: String,
) -> Result<CrossValidation> {
    let first = base
        .first()
        .ok_or_else(|| Error::InvalidArgument("no base profiles to compare".into()))?
        .1
        .overall
        .label();
    let base_consistent = base.iter().all(|(_, p)| p.overall.label() == first);
    let agreement = base_consistent && suspension.overall.label() == first;
    let decisive = agreement && first != "INCONCLUSIVE";
    Ok(CrossValidation {
        beta: beta.to_string(),
        base,
        suspension,
        base_consistent,
        agreement,
        decisive,
        note,
    })
}

/// Diameter remark attached to every cross-validation.
pub fn diameter_note<S: ActionSystem>(base: &S) -> String {
    let susp = base.diameter().max(0.5);
    if base.diameter() == susp {
        "equal diameters".into()
    } else {
        format!(
            "base diameter {} vs suspension diameter {susp}; verdicts compare boundedness only",
            base.diameter()
        )
    }
}

/// Measure-complexity verdicts of the base along `β` (mean family, each `b`
/// of [`CROSS_B`]) beside the suspension's Z-mean verdict on a shared grid.
///
/// The base sample is seeded by `derive_seed(seed, 0)` and the suspension
/// sample by `derive_seed(seed, 1)`.
pub fn cross_validate<S: ActionSystem + Clone>(
    base: &S,
    beta: Slope,
    eps: &[f64],
    ks: &[usize],
    n_samples: usize,
    seed: u64,
    cap: u64,
) -> Result<CrossValidation> {
    let grid = measure_grid(eps, ks, cap);
    let sample = sample_measure(base, n_samples, derive_seed(seed, 0))?;
    let mut base_profiles = Vec::new();
    for &b in &CROSS_B {
        let geom = Geometry::Directional(Direction::planar(beta, b)?);
        let mut p = profiles(base, &geom, &[Family::Mean], &sample, &grid)?;
        base_profiles.push((b, p.remove(0)));
    }
    let suspension = suspension_profile(base, beta, eps, ks, n_samples, derive_seed(seed, 1), cap)?;
    compare_profiles(beta, base_profiles, suspension, diameter_note(base))
}
