//! Z^q-actions and the reference systems used to exercise the directional
//! machinery.
//!
//! | system        | action                          | measure          | ground truth                          |
//! |---------------|---------------------------------|------------------|---------------------------------------|
//! | rotation      | `x + m·α + n·γ (mod 1)`         | Lebesgue         | bounded in every direction            |
//! | full shift    | translation of `A^{Z²}`         | uniform Bernoulli| unbounded in every direction          |
//! | skew shift    | `σ^{m−n}` on `A^Z`              | uniform Bernoulli| bounded along `(1,1)` only            |
//! | permutation   | commuting permutations of `N`   | uniform          | bounded everywhere                    |

use std::fmt::Debug;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::lattice::StripWindow;
use crate::rng::{seeded, SampleRng};

mod permutation;
mod rotation;
mod shift;

pub use permutation::PermutationSystem;
pub use rotation::{circle_distance, CirclePoint, RotationSystem};
pub use shift::{Fill, FullShift, ShiftPoint, SkewShift};

/// A bounded complex observable on the points of a system.
#[derive(Clone)]
pub struct Observable<P> {
    pub id: String,
    func: Arc<dyn Fn(&P) -> Complex64 + Send + Sync>,
}

impl<P> Observable<P> {
    pub fn new(id: impl Into<String>, func: impl Fn(&P) -> Complex64 + Send + Sync + 'static) -> Self {
        Observable {
            id: id.into(),
            func: Arc::new(func),
        }
    }

    pub fn eval(&self, x: &P) -> Complex64 {
        (self.func)(x)
    }
}

impl<P> Debug for Observable<P> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Observable").field("id", &self.id).finish()
    }
}

/// How to build a sample approximating the whole space for topological
/// spanning numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetSpec {
    /// Approximate number of points.
    pub size: usize,
    /// Finest perturbation level used for clustered samples.
    pub max_level: u32,
}

/// A Z^q topological dynamical system with a designated invariant measure.
pub trait ActionSystem: Send + Sync {
    type Point: Clone + Debug + PartialEq + Send + Sync + 'static;

    /// `q`, the rank of the acting group.
    fn rank(&self) -> usize;

    /// `T^w x`.
    fn act(&self, w: &[i64], x: &Self::Point) -> Result<Self::Point>;

    fn distance(&self, x: &Self::Point, y: &Self::Point) -> f64;

    fn diameter(&self) -> f64;

    /// One draw from the invariant measure.
    fn sample_point(&self, rng: &mut SampleRng) -> Self::Point;

    /// A point close to `x`; larger levels give closer points.
    fn perturb(&self, x: &Self::Point, level: u32, rng: &mut SampleRng) -> Self::Point;

    /// Sample used as a stand-in for the whole compact space. Defaults to
    /// clusters of perturbations around measure draws.
    fn net(&self, spec: NetSpec, rng: &mut SampleRng) -> Vec<Self::Point> {
        clustered_sample(self, spec, rng)
    }

    /// Number of points when the space is finite.
    fn cardinality(&self) -> Option<usize> {
        None
    }

    /// Fixed battery of test functions for spectral probes.
    fn observables(&self) -> Vec<Observable<Self::Point>>;

    fn describe(&self) -> String;

    fn check_rank(&self, w: &[i64]) -> Result<()> {
        if w.len() != self.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.rank(),
                found: w.len(),
            });
        }
        Ok(())
    }
}

/// Seeds drawn from the measure, each followed by perturbations at levels
/// `0..=max_level`.
pub fn clustered_sample<S: ActionSystem + ?Sized>(
    sys: &S,
    spec: NetSpec,
    rng: &mut SampleRng,
) -> Vec<S::Point> {
    let cluster = spec.max_level as usize + 2;
    let seeds = spec.size.div_ceil(cluster).max(1);
    let mut out = Vec::with_capacity(seeds * cluster);
    for _ in 0..seeds {
        let centre = sys.sample_point(rng);
        for level in 0..=spec.max_level {
            out.push(sys.perturb(&centre, level, rng));
        }
        out.push(centre);
    }
    out
}

/// `T^w x` for every `w` of the window, in window order.
pub fn orbit_segment<S: ActionSystem>(
    sys: &S,
    x: &S::Point,
    window: &StripWindow,
) -> Result<Vec<S::Point>> {
    if window.is_empty() {
        return Err(Error::EmptyWindow);
    }
    orbit_over(sys, x, window.points())
}

pub(crate) fn orbit_over<S: ActionSystem>(
    sys: &S,
    x: &S::Point,
    elements: &[Vec<i64>],
) -> Result<Vec<S::Point>> {
    elements.iter().map(|w| sys.act(w, x)).collect()
}

/// `n` independent draws from the system's invariant measure.
pub fn sample_measure<S: ActionSystem>(sys: &S, n: usize, seed: u64) -> Result<Vec<S::Point>> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample size must be positive".into()));
    }
    let mut rng = seeded(seed);
    Ok((0..n).map(|_| sys.sample_point(&mut rng)).collect())
}

/// Random lattice vector with entries in `[-bound, bound]`.
pub fn random_vector(rng: &mut SampleRng, q: usize, bound: i64) -> Vec<i64> {
    (0..q).map(|_| rng.gen_range(-bound..=bound)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{strip_window, Direction, Slope};

    #[test]
    fn rotation_orbit_values() {
        let sys = RotationSystem::planar(0.3, 0.1);
        let x = CirclePoint::from_f64(0.0);
        let d = Direction::planar(Slope::integer(0), 0.5).unwrap();
        let w = strip_window(&d, 2).unwrap();
        let orbit = orbit_segment(&sys, &x, &w).unwrap();
        assert_eq!(orbit.len(), 2);
        assert!(orbit[0].to_f64().abs() < 1e-15);
        assert!((orbit[1].to_f64() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn identity_permutation_orbit_is_constant() {
        let sys = PermutationSystem::new(4, vec![vec![0, 1, 2, 3], vec![0, 1, 2, 3]]).unwrap();
        let d = Direction::planar(Slope::Float(0.37), 1.0).unwrap();
        let w = strip_window(&d, 6).unwrap();
        let orbit = orbit_segment(&sys, &2, &w).unwrap();
        assert!(orbit.iter().all(|&p| p == 2));
    }

    #[test]
    fn skew_shift_along_diagonal_visits_three_translates() {
        let sys = SkewShift::new(2, 16).unwrap();
        let x = sample_measure(&sys, 1, 3).unwrap().remove(0);
        let d = Direction::planar(Slope::integer(1), 1.0).unwrap();
        let w = strip_window(&d, 5).unwrap();
        let orbit = orbit_segment(&sys, &x, &w).unwrap();
        let allowed: Vec<ShiftPoint> = [-1i64, 0, 1]
            .iter()
            .map(|&j| sys.act(&[j, 0], &x).unwrap())
            .collect();
        assert!(orbit.iter().all(|p| allowed.contains(p)));
    }

    #[test]
    fn first_column_is_never_empty() {
        // 0 ∈ [−b, b] for every b > 0, so narrow strips still contain the origin.
        let d = Direction::planar(Slope::rational(1, 2).unwrap(), 0.2).unwrap();
        let w = strip_window(&d, 4).unwrap();
        assert_eq!(w.points(), &[vec![0, 0], vec![2, 1]]);
        let sys = RotationSystem::planar(0.3, 0.1);
        assert_eq!(orbit_segment(&sys, &CirclePoint::from_f64(0.2), &w).unwrap().len(), 2);
    }

    #[test]
    fn sampler_is_reproducible() {
        let sys = RotationSystem::planar(0.3, 0.1);
        let a = sample_measure(&sys, 4, 7).unwrap();
        let b = sample_measure(&sys, 4, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|p| (0.0..1.0).contains(&p.to_f64())));
        assert!(sample_measure(&sys, 0, 7).is_err());
    }

    #[test]
    fn full_shift_sample_window_shape() {
        let sys = FullShift::new(2, 3).unwrap();
        let x = sample_measure(&sys, 1, 11).unwrap().remove(0);
        assert_eq!(x.cells().len(), 49);
        assert!(x.cells().iter().all(|&s| s < 2));
    }

    #[test]
    fn permutation_sampler_is_uniform() {
        let sys = PermutationSystem::cyclic(5, 1, 2).unwrap();
        let pts = sample_measure(&sys, 1000, 5).unwrap();
        for s in 0..5 {
            let freq = pts.iter().filter(|&&p| p == s).count() as f64 / 1000.0;
            assert!((freq - 0.2).abs() < 0.05, "state {s}: {freq}");
        }
    }
}
