use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;

use super::{ActionSystem, NetSpec, Observable};
use crate::error::Result;
use crate::rng::SampleRng;

const SCALE: f64 = 18_446_744_073_709_551_616.0; // 2^64

/// A point of the circle `R/Z` in 64-bit fixed point (`x = raw / 2^64`).
///
/// Rotations act by wrapping addition, so the group law holds exactly and
/// every rotation is an exact isometry of [`circle_distance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CirclePoint(pub u64);

impl CirclePoint {
    pub fn from_f64(x: f64) -> Self {
        let frac = x.rem_euclid(1.0);
        // `frac * 2^64` can round up to exactly 2^64 for frac just below 1.
        let raw = frac * SCALE;
        CirclePoint(if raw >= SCALE { 0 } else { raw as u64 })
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / SCALE
    }
}

/// `min(|s − u|, 1 − |s − u|)`.
pub fn circle_distance(a: CirclePoint, b: CirclePoint) -> f64 {
    let d = a.0.wrapping_sub(b.0);
    d.min(d.wrapping_neg()) as f64 / SCALE
}

/// `T^w x = x + Σ w_i·α_i (mod 1)` with Lebesgue measure.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationSystem {
    angles: Vec<CirclePoint>,
}

impl RotationSystem {
    pub fn new(angles: &[f64]) -> Result<Self> {
        if angles.is_empty() || angles.iter().any(|a| !a.is_finite()) {
            return Err(crate::error::Error::InvalidSystem(
                "rotation needs at least one finite angle".into(),
            ));
        }
        Ok(RotationSystem {
            angles: angles.iter().map(|&a| CirclePoint::from_f64(a)).collect(),
        })
    }

    /// `T^{(m,n)} x = x + m·α + n·γ`.
    pub fn planar(alpha: f64, gamma: f64) -> Self {
        RotationSystem {
            angles: vec![CirclePoint::from_f64(alpha), CirclePoint::from_f64(gamma)],
        }
    }

    pub fn angles(&self) -> Vec<f64> {
        self.angles.iter().map(|a| a.to_f64()).collect()
    }

    /// `n` equally spaced points `i/n`.
    pub fn grid(n: usize) -> Vec<CirclePoint> {
        (0..n).map(|i| CirclePoint::from_f64(i as f64 / n as f64)).collect()
    }
}

impl ActionSystem for RotationSystem {
    type Point = CirclePoint;

    fn rank(&self) -> usize {
        self.angles.len()
    }

    fn act(&self, w: &[i64], x: &CirclePoint) -> Result<CirclePoint> {
        self.check_rank(w)?;
        let shift = w
            .iter()
            .zip(&self.angles)
            .fold(0u64, |acc, (&c, a)| acc.wrapping_add((c as u64).wrapping_mul(a.0)));
        Ok(CirclePoint(x.0.wrapping_add(shift)))
    }

    fn distance(&self, x: &CirclePoint, y: &CirclePoint) -> f64 {
        circle_distance(*x, *y)
    }

    fn diameter(&self) -> f64 {
        0.5
    }

    fn sample_point(&self, rng: &mut SampleRng) -> CirclePoint {
        CirclePoint(rng.gen())
    }

    fn perturb(&self, x: &CirclePoint, level: u32, rng: &mut SampleRng) -> CirclePoint {
        // offset uniform in (−2^{−level−1}, 2^{−level−1})
        let shift = if level >= 63 { 0 } else { rng.gen::<u64>() >> (level + 1) };
        if rng.gen::<bool>() {
            CirclePoint(x.0.wrapping_add(shift))
        } else {
            CirclePoint(x.0.wrapping_sub(shift))
        }
    }

    fn net(&self, spec: NetSpec, _rng: &mut SampleRng) -> Vec<CirclePoint> {
        RotationSystem::grid(spec.size.max(1))
    }

    /// Characters `e^{2πijx}` for `j = 1, 2, 3`.
    fn observables(&self) -> Vec<Observable<CirclePoint>> {
        (1..=3)
            .map(|j| {
                Observable::new(format!("char{j}"), move |x: &CirclePoint| {
                    // reduce j·x in fixed point before converting
                    let phase = CirclePoint(x.0.wrapping_mul(j)).to_f64();
                    Complex64::from_polar(1.0, TAU * phase)
                })
            })
            .collect()
    }

    fn describe(&self) -> String {
        let a: Vec<String> = self.angles().iter().map(|a| format!("{a}")).collect();
        format!("rotation(angles=[{}])", a.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn fixed_point_round_trip() {
        for x in [0.0, 0.25, 0.3, 0.999_999_999, -0.25] {
            let p = CirclePoint::from_f64(x);
            assert!((p.to_f64() - x.rem_euclid(1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn distance_wraps() {
        let a = CirclePoint::from_f64(0.05);
        let b = CirclePoint::from_f64(0.95);
        assert!((circle_distance(a, b) - 0.1).abs() < 1e-12);
        assert_eq!(circle_distance(a, a), 0.0);
    }

    #[test]
    fn translates_are_exact_isometries() {
        let sys = RotationSystem::planar(std::f64::consts::SQRT_2 - 1.0, 0.1);
        let mut rng = seeded(1);
        for _ in 0..100 {
            let x = sys.sample_point(&mut rng);
            let y = sys.sample_point(&mut rng);
            let w = [rng.gen_range(-1000..1000), rng.gen_range(-1000..1000)];
            let d0 = sys.distance(&x, &y);
            let d1 = sys.distance(&sys.act(&w, &x).unwrap(), &sys.act(&w, &y).unwrap());
            assert_eq!(d0, d1);
        }
    }

    #[test]
    fn perturbation_scales() {
        let sys = RotationSystem::planar(0.3, 0.1);
        let mut rng = seeded(4);
        let x = sys.sample_point(&mut rng);
        for level in 0..20 {
            let y = sys.perturb(&x, level, &mut rng);
            assert!(sys.distance(&x, &y) < 0.5f64.powi(level as i32 + 1));
        }
    }

    #[test]
    fn characters_have_unit_modulus() {
        let sys = RotationSystem::planar(0.3, 0.1);
        let obs = sys.observables();
        assert_eq!(obs.len(), 3);
        let v = obs[1].eval(&CirclePoint::from_f64(0.25));
        assert!((v - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
    }
}
