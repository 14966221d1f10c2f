//! Bowen, max-mean and mean metrics along a strip, and their Z-action
//! counterparts.
//!
//! For a window `W_k` (the truncated strip, or `{0, …, k−1}` for a Z-action)
//!
//! * bowen:   `max_{w ∈ W_k} d(T^w x, T^w y)`
//! * mean:    `(1/#W_k) Σ_{w ∈ W_k} d(T^w x, T^w y)`
//! * maxmean: `max_{i ≤ k} mean_i(x, y)`
//!
//! Windows are sorted by first coordinate, so the depth-`i` window is a
//! prefix of the depth-`k` one and a single pass over one orbit yields every
//! depth at once.

use std::fmt;
use std::num::NonZeroUsize;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use lru::LruCache;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covering::DistanceMatrix;
use crate::error::{Error, Result};
use crate::lattice::{strip_window, Direction};
use crate::systems::{orbit_over, ActionSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Bowen,
    MaxMean,
    Mean,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Bowen, Family::MaxMean, Family::Mean];

    pub fn name(self) -> &'static str {
        match self {
            Family::Bowen => "bowen",
            Family::MaxMean => "maxmean",
            Family::Mean => "mean",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bowen" => Ok(Family::Bowen),
            "maxmean" | "max-mean" => Ok(Family::MaxMean),
            "mean" => Ok(Family::Mean),
            _ => Err(Error::InvalidArgument(format!("unknown metric family `{s}`"))),
        }
    }
}

/// Which lattice elements a depth-`k` metric ranges over.
#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    /// The truncated strip `Λ_k^v(b)` of a `Z^q`-action.
    Directional(Direction),
    /// `{0, 1, …, k−1}` for a `Z`-action.
    ZAction,
}

impl Geometry {
    pub fn window(&self, k: usize, rank: usize) -> Result<Window> {
        if k == 0 {
            return Err(Error::InvalidDepth(0));
        }
        match self {
            Geometry::Directional(d) => {
                if d.q() != rank {
                    return Err(Error::DimensionMismatch {
                        expected: rank,
                        found: d.q(),
                    });
                }
                let w = strip_window(d, k)?;
                let mut prefix = vec![0; k + 1];
                for p in w.points() {
                    prefix[p[0] as usize + 1] += 1;
                }
                for i in 1..=k {
                    prefix[i] += prefix[i - 1];
                }
                Ok(Window {
                    elements: w.points().to_vec(),
                    prefix,
                })
            }
            Geometry::ZAction => {
                if rank != 1 {
                    return Err(Error::DimensionMismatch {
                        expected: 1,
                        found: rank,
                    });
                }
                Ok(Window {
                    elements: (0..k as i64).map(|i| vec![i]).collect(),
                    prefix: (0..=k).collect(),
                })
            }
        }
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Geometry::Directional(d) => write!(f, "{d}"),
            Geometry::ZAction => f.write_str("z-action"),
        }
    }
}

/// Lattice elements ordered by depth; `prefix[i]` of them have depth `< i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    elements: Vec<Vec<i64>>,
    prefix: Vec<usize>,
}

impl Window {
    pub fn elements(&self) -> &[Vec<i64>] {
        &self.elements
    }

    pub fn depth(&self) -> usize {
        self.prefix.len() - 1
    }

    /// Number of elements of the depth-`i` window.
    pub fn len_at(&self, i: usize) -> usize {
        self.prefix[i]
    }
}

/// Per-depth values of all three families for one pair of orbits.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthTrace {
    pub bowen: Vec<f64>,
    pub maxmean: Vec<f64>,
    pub mean: Vec<f64>,
}

impl DepthTrace {
    /// Value of `family` at depth `k ≥ 1`.
    pub fn get(&self, family: Family, k: usize) -> Result<f64> {
        if k == 0 || k > self.bowen.len() {
            return Err(Error::InvalidDepth(k));
        }
        let v = match family {
            Family::Bowen => self.bowen[k - 1],
            Family::MaxMean => self.maxmean[k - 1],
            Family::Mean => self.mean[k - 1],
        };
        if v.is_nan() {
            Err(Error::EmptyWindow)
        } else {
            Ok(v)
        }
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Folds element-wise distances (in window order) into per-depth values.
///
/// The mean is clamped into `[min, max]` of the averaged values so that
/// `bowen ≥ maxmean ≥ mean` holds exactly in floating point.
pub fn fold_trace(dists: &[f64], window: &Window) -> DepthTrace {
    let k = window.depth();
    let mut trace = DepthTrace {
        bowen: Vec::with_capacity(k),
        maxmean: Vec::with_capacity(k),
        mean: Vec::with_capacity(k),
    };
    let mut acc = Compensated::default();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut best_mean = f64::NAN;
    let mut at = 0;
    for i in 1..=k {
        let end = window.prefix[i];
        for &d in &dists[at..end] {
            acc.add(d);
            lo = lo.min(d);
            hi = hi.max(d);
        }
        at = end;
        if end == 0 {
            trace.bowen.push(f64::NAN);
            trace.mean.push(f64::NAN);
        } else {
            trace.bowen.push(hi);
            let m = (acc.value() / end as f64).clamp(lo, hi);
            trace.mean.push(m);
            best_mean = if best_mean.is_nan() { m } else { best_mean.max(m) };
        }
        trace.maxmean.push(best_mean);
    }
    trace
}

fn pair_trace<S: ActionSystem>(sys: &S, a: &[S::Point], b: &[S::Point], window: &Window) -> DepthTrace {
    let dists: Vec<f64> = a.iter().zip(b).map(|(p, q)| sys.distance(p, q)).collect();
    fold_trace(&dists, window)
}

/// One metric family evaluated along one geometry of one system.
#[derive(Debug, Clone)]
pub struct MetricSeq<'a, S> {
    pub system: &'a S,
    pub family: Family,
    pub geometry: Geometry,
}

impl<'a, S: ActionSystem> MetricSeq<'a, S> {
    pub fn new(system: &'a S, family: Family, geometry: Geometry) -> Self {
        MetricSeq {
            system,
            family,
            geometry,
        }
    }

    pub fn directional(system: &'a S, family: Family, direction: Direction) -> Self {
        MetricSeq::new(system, family, Geometry::Directional(direction))
    }

    pub fn window(&self, k: usize) -> Result<Window> {
        self.geometry.window(k, self.system.rank())
    }

    /// Full per-depth trace for one pair, up to depth `k`.
    pub fn trace(&self, x: &S::Point, y: &S::Point, k: usize) -> Result<DepthTrace> {
        let window = self.window(k)?;
        let ox = orbit_over(self.system, x, window.elements())?;
        let oy = orbit_over(self.system, y, window.elements())?;
        Ok(pair_trace(self.system, &ox, &oy, &window))
    }

    pub fn eval(&self, x: &S::Point, y: &S::Point, k: usize) -> Result<f64> {
        self.trace(x, y, k)?.get(self.family, k)
    }

    pub fn eval_matrix(&self, pts: &[S::Point], k: usize) -> Result<DistanceMatrix> {
        let mut tables = eval_matrices(self.system, &self.geometry, pts, &[self.family], &[k], None)?;
        Ok(tables.remove(0).remove(0))
    }
}

/// Every family × depth distance matrix of `pts` in one pass.
///
/// Orbits are computed once per point at the largest depth (optionally via
/// `cache`, keyed by point index) and every pair is folded once. Rows are
/// processed in parallel; the result is identical to the sequential run.
/// The output is indexed `[family][depth]` in argument order.
pub fn eval_matrices<S: ActionSystem>(
    sys: &S,
    geometry: &Geometry,
    pts: &[S::Point],
    families: &[Family],
    depths: &[usize],
    cache: Option<&OrbitCache<S::Point>>,
) -> Result<Vec<Vec<DistanceMatrix>>> {
    if pts.is_empty() {
        return Err(Error::InvalidArgument("distance matrix needs at least one point".into()));
    }
    let k_max = depths.iter().copied().max().ok_or(Error::InvalidDepth(0))?;
    if depths.contains(&0) {
        return Err(Error::InvalidDepth(0));
    }
    let window = geometry.window(k_max, sys.rank())?;
    let orbits: Vec<Arc<Vec<S::Point>>> = pts
        .par_iter()
        .enumerate()
        .map(|(i, x)| match cache {
            Some(c) => c.get_or_try_insert(i, k_max, || orbit_over(sys, x, window.elements())),
            None => orbit_over(sys, x, window.elements()).map(Arc::new),
        })
        .collect::<Result<_>>()?;

    let n = pts.len();
    // rows[i] holds traces for pairs (i, j), j > i
    let rows: Vec<Vec<DepthTrace>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .map(|j| pair_trace(sys, &orbits[i], &orbits[j], &window))
                .collect()
        })
        .collect();

    let mut out = Vec::with_capacity(families.len());
    for &family in families {
        let mut per_depth = Vec::with_capacity(depths.len());
        for &k in depths {
            let mut dm = DistanceMatrix::zeros(n);
            for (i, row) in rows.iter().enumerate() {
                for (off, trace) in row.iter().enumerate() {
                    dm.set(i, i + 1 + off, trace.get(family, k)?);
                }
            }
            per_depth.push(dm);
        }
        out.push(per_depth);
    }
    Ok(out)
}

/// Least-recently-used store of orbit segments keyed by `(point id, depth)`.
///
/// An entry for depth `k` serves any request of depth `≤ k` for the same
/// geometry; callers keep one cache per geometry and point set.
pub struct OrbitCache<P> {
    inner: Mutex<LruCache<usize, (usize, Arc<Vec<P>>)>>,
}

impl<P: Clone> OrbitCache<P> {
    pub fn new(capacity: usize) -> Self {
        let cap = NonZeroUsize::new(capacity.max(1)).expect("positive capacity");
        OrbitCache {
            inner: Mutex::new(LruCache::new(cap)),
        }
    }

    pub fn len(&self) -> usize {
        self.inner.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn get_or_try_insert(
        &self,
        id: usize,
        k: usize,
        compute: impl FnOnce() -> Result<Vec<P>>,
    ) -> Result<Arc<Vec<P>>> {
        if let Some((depth, orbit)) = self.inner.lock().expect("cache lock").get(&id) {
            if *depth == k {
                return Ok(orbit.clone());
            }
        }
        // computed outside the lock; a racing insert for the same id is identical
        let orbit = Arc::new(compute()?);
        self.inner.lock().expect("cache lock").put(id, (k, orbit.clone()));
        Ok(orbit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Slope;
    use crate::systems::{CirclePoint, FullShift, PermutationSystem, RotationSystem, ShiftPoint, SkewShift};
    use crate::rng::seeded;

    #[test]
    fn rotation_metrics_equal_base_distance() {
        let sys = RotationSystem::planar(0.3, 0.1);
        let d = Direction::planar(Slope::Float(2f64.sqrt()), 1.0).unwrap();
        let x = CirclePoint::from_f64(0.1);
        let y = CirclePoint::from_f64(0.35);
        for family in Family::ALL {
            let ms = MetricSeq::directional(&sys, family, d.clone());
            for k in [1, 3, 10] {
                assert!((ms.eval(&x, &y, k).unwrap() - 0.25).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn constant_shift_points_are_at_distance_one() {
        let sys = FullShift::new(2, 12).unwrap();
        let d = Direction::planar(Slope::integer(0), 1.0).unwrap();
        let ms = MetricSeq::directional(&sys, Family::Mean, d);
        let x = ShiftPoint::constant(2, 12, 0);
        let y = ShiftPoint::constant(2, 12, 1);
        for k in [1, 4, 8] {
            assert_eq!(ms.eval(&x, &y, k).unwrap(), 1.0);
        }
    }

    #[test]
    fn skew_bowen_along_diagonal() {
        let sys = SkewShift::new(2, 20).unwrap();
        let d = Direction::planar(Slope::integer(1), 1.0).unwrap();
        let ms = MetricSeq::directional(&sys, Family::Bowen, d);
        let mut rng = seeded(8);
        let x = sys.sample_point(&mut rng);
        let y = sys.perturb(&x, 3, &mut rng);
        let expected = (-1i64..=1)
            .map(|j| sys.distance(&sys.act(&[j, 0], &x).unwrap(), &sys.act(&[j, 0], &y).unwrap()))
            .fold(0.0, f64::max);
        for k in [1, 2, 5, 9] {
            assert_eq!(ms.eval(&x, &y, k).unwrap(), expected);
        }
    }

    #[test]
    fn matrix_matches_pointwise_eval() {
        let sys = SkewShift::new(2, 24).unwrap();
        let d = Direction::planar(Slope::rational(1, 2).unwrap(), 1.0).unwrap();
        let mut rng = seeded(3);
        let pts: Vec<_> = (0..6).map(|_| sys.sample_point(&mut rng)).collect();
        for family in Family::ALL {
            let ms = MetricSeq::directional(&sys, family, d.clone());
            let dm = ms.eval_matrix(&pts, 7).unwrap();
            for i in 0..6 {
                for j in 0..6 {
                    assert_eq!(dm.get(i, j), ms.eval(&pts[i], &pts[j], 7).unwrap());
                }
            }
        }
    }

    #[test]
    fn single_point_matrix() {
        let sys = PermutationSystem::cyclic(3, 1, 1).unwrap();
        let ms = MetricSeq::new(&sys, Family::Bowen, Geometry::Directional(Direction::planar(Slope::integer(0), 1.0).unwrap()));
        let dm = ms.eval_matrix(&[1], 4).unwrap();
        assert_eq!(dm.len(), 1);
        assert_eq!(dm.get(0, 0), 0.0);
    }

    #[test]
    fn z_action_needs_rank_one() {
        let sys = RotationSystem::planar(0.3, 0.1);
        let ms = MetricSeq::new(&sys, Family::Mean, Geometry::ZAction);
        let x = CirclePoint(0);
        assert!(matches!(ms.eval(&x, &x, 2), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn compensated_sum_is_exact_on_cancellation() {
        let mut acc = Compensated::default();
        for x in [1e16, 1.0, -1e16, 1.0] {
            acc.add(x);
        }
        assert_eq!(acc.value(), 2.0);
    }

    #[test]
    fn cache_serves_repeat_requests() {
        let sys = RotationSystem::planar(0.3, 0.1);
        let geom = Geometry::Directional(Direction::planar(Slope::integer(1), 1.0).unwrap());
        let pts = RotationSystem::grid(5);
        let cache = OrbitCache::new(3);
        let a = eval_matrices(&sys, &geom, &pts, &[Family::Mean], &[4], Some(&cache)).unwrap();
        let b = eval_matrices(&sys, &geom, &pts, &[Family::Mean], &[4], None).unwrap();
        assert_eq!(a, b);
        assert_eq!(cache.len(), 3);
    }
}
