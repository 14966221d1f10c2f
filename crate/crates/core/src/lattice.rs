//! Direction vectors `v = (1, β_2, …, β_q)` with half-widths `b`, and the
//! lattice strips
//!
//! ```text
//! Λ^v(b)   = { m ∈ Z^q : β_i·m_1 − b_i ≤ m_i ≤ β_i·m_1 + b_i, i = 2..q }
//! Λ_k^v(b) = Λ^v(b) ∩ ([0, k−1] × Z^{q−1})
//! ```
//!
//! Bounds are inclusive on both sides. Rational slopes are evaluated with
//! integer arithmetic so that lattice points lying exactly on the strip
//! boundary are always included; float slopes use `floor`/`ceil` of
//! `β·m ± b` and may differ from the real strip only on exact boundaries.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A slope component `β_i` of a direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Slope {
    /// Exact rational `num/den`, always stored in lowest terms with `den > 0`.
    Rational { num: i64, den: i64 },
    /// A real slope known only as a double, typically irrational.
    Float(f64),
}

impl Slope {
    pub fn rational(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidDirection("zero denominator in slope".into()));
        }
        let g = num.gcd(&den).max(1);
        let sign = if den < 0 { -1 } else { 1 };
        Ok(Slope::Rational {
            num: sign * num / g,
            den: sign * den / g,
        })
    }

    pub fn integer(n: i64) -> Self {
        Slope::Rational { num: n, den: 1 }
    }

    pub fn float(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::InvalidDirection(format!("non-finite slope {value}")));
        }
        Ok(Slope::Float(value))
    }

    pub fn as_f64(&self) -> f64 {
        match *self {
            Slope::Rational { num, den } => num as f64 / den as f64,
            Slope::Float(v) => v,
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, Slope::Rational { .. })
    }

    /// Inclusive integer range `[lo, hi]` of `n` with `|n − β·m| ≤ b`.
    /// Empty when `lo > hi`.
    pub fn column_range(&self, m: i64, half_width: f64) -> (i64, i64) {
        match *self {
            Slope::Rational { num, den } => {
                // |n·den − num·m| ≤ b·den, and the left side is an integer.
                // Decimal half-widths such as 0.29 can land a hair below the
                // integer b·den in binary, so snap within a relative 1e-9.
                let scaled = half_width * den as f64;
                let slack = (scaled + 1e-9 * scaled.max(1.0)).floor() as i64;
                let centre = num * m;
                (
                    Integer::div_ceil(&(centre - slack), &den),
                    Integer::div_floor(&(centre + slack), &den),
                )
            }
            Slope::Float(beta) => {
                let c = beta * m as f64;
                ((c - half_width).ceil() as i64, (c + half_width).floor() as i64)
            }
        }
    }

    /// `floor(β·m)`.
    pub fn floor_mul(&self, m: i64) -> i64 {
        match *self {
            Slope::Rational { num, den } => Integer::div_floor(&(num * m), &den),
            Slope::Float(beta) => (beta * m as f64).floor() as i64,
        }
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Slope::Rational { num, den: 1 } => write!(f, "{num}"),
            Slope::Rational { num, den } => write!(f, "{num}/{den}"),
            Slope::Float(v) => write!(f, "{v}"),
        }
    }
}

impl FromStr for Slope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidDirection(format!("cannot parse slope {s:?}"));
        if let Some((p, r)) = s.split_once('/') {
            let p: i64 = p.trim().parse().map_err(|_| bad())?;
            let r: i64 = r.trim().parse().map_err(|_| bad())?;
            return Slope::rational(p, r);
        }
        if let Ok(n) = s.parse::<i64>() {
            return Ok(Slope::integer(n));
        }
        match s {
            "sqrt2" | "sqrt(2)" => return Slope::float(std::f64::consts::SQRT_2),
            "-sqrt2" | "-sqrt(2)" => return Slope::float(-std::f64::consts::SQRT_2),
            _ => {}
        }
        s.parse::<f64>().map_err(|_| bad()).and_then(Slope::float)
    }
}

impl Serialize for Slope {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            Slope::Rational { .. } => serializer.serialize_str(&self.to_string()),
            Slope::Float(v) => serializer.serialize_f64(v),
        }
    }
}

impl<'de> Deserialize<'de> for Slope {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(deserializer)?;
        match value {
            serde_json::Value::String(s) => s.parse().map_err(de::Error::custom),
            serde_json::Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Ok(Slope::integer(i))
                } else {
                    let v = n
                        .as_f64()
                        .ok_or_else(|| de::Error::custom("slope out of range"))?;
                    Slope::float(v).map_err(de::Error::custom)
                }
            }
            other => Err(de::Error::custom(format!("invalid slope {other}"))),
        }
    }
}

/// Direction `v = (1, β)` together with the strip half-widths `b`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Direction {
    q: usize,
    beta: Vec<Slope>,
    b: Vec<f64>,
}

impl Direction {
    pub fn new(beta: Vec<Slope>, b: Vec<f64>) -> Result<Self> {
        if beta.is_empty() {
            return Err(Error::InvalidDirection("q must be at least 2".into()));
        }
        if beta.len() != b.len() {
            return Err(Error::InvalidDirection(format!(
                "{} slopes but {} half-widths",
                beta.len(),
                b.len()
            )));
        }
        if let Some(bad) = b.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidDirection(format!(
                "half-widths must be positive and finite, got {bad}"
            )));
        }
        Ok(Direction {
            q: beta.len() + 1,
            beta,
            b,
        })
    }

    /// Planar direction `(1, β)` with half-width `b`.
    pub fn planar(beta: Slope, b: f64) -> Result<Self> {
        Direction::new(vec![beta], vec![b])
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn beta(&self) -> &[Slope] {
        &self.beta
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// Same slopes, different half-widths.
    pub fn with_b(&self, b: Vec<f64>) -> Result<Self> {
        Direction::new(self.beta.clone(), b)
    }

    /// Membership in the untruncated strip `Λ^v(b)`.
    pub fn contains(&self, w: &[i64]) -> Result<bool> {
        if w.len() != self.q {
            return Err(Error::DimensionMismatch {
                expected: self.q,
                found: w.len(),
            });
        }
        let m = w[0];
        Ok(self
            .beta
            .iter()
            .zip(&self.b)
            .zip(&w[1..])
            .all(|((beta, &b), &n)| {
                let (lo, hi) = beta.column_range(m, b);
                lo <= n && n <= hi
            }))
    }

    /// Largest Chebyshev norm of a point of `Λ_k^v(b)`; used to size shift
    /// windows.
    pub fn reach(&self, k: usize) -> i64 {
        let mut reach = k.saturating_sub(1) as i64;
        for m in 0..k as i64 {
            for (beta, &b) in self.beta.iter().zip(&self.b) {
                let (lo, hi) = beta.column_range(m, b);
                if lo <= hi {
                    reach = reach.max(lo.abs()).max(hi.abs());
                }
            }
        }
        reach
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let beta: Vec<String> = self.beta.iter().map(|s| s.to_string()).collect();
        let b: Vec<String> = self.b.iter().map(|w| w.to_string()).collect();
        write!(f, "v=(1,{}) b=({})", beta.join(","), b.join(","))
    }
}

#[derive(Deserialize)]
struct DirectionRepr {
    q: Option<usize>,
    beta: Vec<Slope>,
    b: Vec<f64>,
}

impl<'de> Deserialize<'de> for Direction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = DirectionRepr::deserialize(deserializer)?;
        let d = Direction::new(repr.beta, repr.b).map_err(de::Error::custom)?;
        if let Some(q) = repr.q {
            if q != d.q {
                return Err(de::Error::custom(format!(
                    "q = {q} but {} slopes given",
                    d.q - 1
                )));
            }
        }
        Ok(d)
    }
}

/// The truncated strip `Λ_k^v(b)`, points in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct StripWindow {
    direction: Direction,
    k: usize,
    points: Vec<Vec<i64>>,
    /// `prefix[i]` = number of points with first coordinate `< i`, so the
    /// depth-`i` window is `points[..prefix[i]]`.
    prefix: Vec<usize>,
}

impl StripWindow {
    pub fn direction(&self) -> &Direction {
        &self.direction
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn points(&self) -> &[Vec<i64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `#Λ_i^v(b)` for `0 ≤ i ≤ k`.
    pub fn depth_len(&self, i: usize) -> usize {
        self.prefix[i.min(self.k)]
    }

    /// Column indices `m_1` that contain no lattice point.
    pub fn empty_columns(&self) -> Vec<usize> {
        (0..self.k)
            .filter(|&m| self.prefix[m] == self.prefix[m + 1])
            .collect()
    }

    /// Truncation of this window to a smaller depth.
    pub fn truncate(&self, k: usize) -> Result<StripWindow> {
        if k == 0 || k > self.k {
            return Err(Error::InvalidDepth(k));
        }
        Ok(StripWindow {
            direction: self.direction.clone(),
            k,
            points: self.points[..self.prefix[k]].to_vec(),
            prefix: self.prefix[..=k].to_vec(),
        })
    }
}

/// Enumerates `Λ_k^v(b)`.
pub fn strip_window(direction: &Direction, k: usize) -> Result<StripWindow> {
    if k == 0 {
        return Err(Error::InvalidDepth(k));
    }
    let mut points = Vec::new();
    let mut prefix = Vec::with_capacity(k + 1);
    prefix.push(0);
    for m in 0..k as i64 {
        let ranges: Vec<(i64, i64)> = direction
            .beta
            .iter()
            .zip(&direction.b)
            .map(|(beta, &b)| beta.column_range(m, b))
            .collect();
        if ranges.iter().all(|(lo, hi)| lo <= hi) {
            // Odometer over the remaining coordinates; the last coordinate
            // varies fastest, which yields lexicographic order.
            let mut current: Vec<i64> = ranges.iter().map(|r| r.0).collect();
            'column: loop {
                let mut p = Vec::with_capacity(direction.q);
                p.push(m);
                p.extend_from_slice(&current);
                points.push(p);
                let mut i = current.len();
                loop {
                    if i == 0 {
                        break 'column;
                    }
                    i -= 1;
                    if current[i] < ranges[i].1 {
                        current[i] += 1;
                        for j in i + 1..current.len() {
                            current[j] = ranges[j].0;
                        }
                        break;
                    }
                }
            }
        }
        prefix.push(points.len());
    }
    Ok(StripWindow {
        direction: direction.clone(),
        k,
        points,
        prefix,
    })
}

/// Membership in `Λ^v(b)`.
pub fn strip_contains(direction: &Direction, w: &[i64]) -> Result<bool> {
    direction.contains(w)
}

/// `#Λ_k^v(b_small) / #Λ_k^v(1)` for a planar direction whose half-width is 1.
pub fn strip_ratio(direction: &Direction, b_small: f64, k: usize) -> Result<f64> {
    if direction.q() != 2 {
        return Err(Error::InvalidDirection("strip_ratio needs q = 2".into()));
    }
    if direction.b()[0] != 1.0 {
        return Err(Error::InvalidDirection(
            "strip_ratio needs a direction with b = 1".into(),
        ));
    }
    if !(b_small > 0.0 && b_small <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "b_small must lie in (0, 1], got {b_small}"
        )));
    }
    let full = strip_window(direction, k)?;
    if full.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let small = strip_window(&direction.with_b(vec![b_small])?, k)?;
    Ok(small.len() as f64 / full.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn planar(beta: Slope, b: f64) -> Direction {
        Direction::planar(beta, b).unwrap()
    }

    #[test]
    fn axis_direction_window() {
        let w = strip_window(&planar(Slope::integer(0), 0.5), 3).unwrap();
        assert_eq!(w.points(), &[vec![0, 0], vec![1, 0], vec![2, 0]]);
    }

    #[test]
    fn half_slope_window() {
        let w = strip_window(&planar(Slope::rational(1, 2).unwrap(), 1.0), 2).unwrap();
        assert_eq!(
            w.points(),
            &[vec![0, -1], vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]
        );
        assert_eq!(w.depth_len(1), 3);
    }

    #[test]
    fn three_dimensional_axis() {
        let d = Direction::new(
            vec![Slope::integer(0), Slope::integer(0)],
            vec![0.5, 0.5],
        )
        .unwrap();
        let w = strip_window(&d, 2).unwrap();
        assert_eq!(w.points(), &[vec![0, 0, 0], vec![1, 0, 0]]);
    }

    #[test]
    fn three_dimensional_is_product_of_columns() {
        let d = Direction::new(
            vec![Slope::rational(1, 2).unwrap(), Slope::Float(-0.3)],
            vec![1.0, 1.5],
        )
        .unwrap();
        let w = strip_window(&d, 4).unwrap();
        let mut sorted = w.points().to_vec();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted, w.points());
        for p in w.points() {
            assert!(d.contains(p).unwrap());
        }
    }

    #[test]
    fn containment_examples() {
        let d = planar(Slope::rational(1, 2).unwrap(), 1.0);
        assert!(strip_contains(&d, &[2, 2]).unwrap());
        assert!(strip_contains(&planar(Slope::Float(0.77), 0.1), &[0, 0]).unwrap());
        assert!(!strip_contains(&planar(Slope::integer(0), 0.5), &[3, 1]).unwrap());
        assert!(matches!(
            strip_contains(&d, &[1, 2, 3]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(strip_window(&planar(Slope::integer(0), 1.0), 0).is_err());
        assert!(Direction::planar(Slope::integer(0), 0.0).is_err());
        assert!(Direction::planar(Slope::integer(0), -1.0).is_err());
        assert!(Direction::new(vec![], vec![]).is_err());
        assert!(Direction::new(vec![Slope::integer(1)], vec![1.0, 1.0]).is_err());
        assert!(Slope::rational(1, 0).is_err());
    }

    #[test]
    fn rationals_reduce() {
        assert_eq!(
            Slope::rational(4, -6).unwrap(),
            Slope::Rational { num: -2, den: 3 }
        );
        assert_eq!("6/4".parse::<Slope>().unwrap(), Slope::Rational { num: 3, den: 2 });
    }

    #[test]
    fn narrow_strip_reports_empty_columns() {
        let w = strip_window(&planar(Slope::rational(1, 2).unwrap(), 0.2), 4).unwrap();
        // β·m = 0, 0.5, 1, 1.5: odd columns have no integer within 0.2.
        assert_eq!(w.empty_columns(), vec![1, 3]);
        assert_eq!(w.len(), 2);
    }

    #[test]
    fn ratio_examples() {
        let d = planar(Slope::integer(0), 1.0);
        // b = 1 has three points per column, b = 0.5 one.
        assert!((strip_ratio(&d, 0.5, 10).unwrap() - 10.0 / 30.0).abs() < 1e-15);
        assert_eq!(strip_ratio(&d, 1.0, 7).unwrap(), 1.0);
        let irr = planar(Slope::Float(std::f64::consts::SQRT_2), 1.0);
        assert!(strip_ratio(&irr, 0.5, 200).unwrap() > 0.25);
        assert!(strip_ratio(&planar(Slope::integer(0), 0.5), 0.5, 3).is_err());
    }

    #[test]
    fn irrational_unit_strip_has_two_points_per_column() {
        let d = planar(Slope::Float(std::f64::consts::SQRT_2), 1.0);
        let w = strip_window(&d, 50).unwrap();
        assert_eq!(w.len(), 2 * 50 + 1);
    }

    #[test]
    fn direction_json_round_trip() {
        let d: Direction = serde_json::from_str(r#"{ "q": 2, "beta": ["1/2"], "b": [1.0] }"#).unwrap();
        assert_eq!(d.beta()[0], Slope::Rational { num: 1, den: 2 });
        let f: Direction =
            serde_json::from_str(r#"{ "q": 2, "beta": [0.7071067811865476], "b": [1.0] }"#).unwrap();
        assert_eq!(f.beta()[0], Slope::Float(0.7071067811865476));
        let back: Direction = serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
        assert_eq!(back, d);
        assert!(serde_json::from_str::<Direction>(r#"{ "q": 3, "beta": [0], "b": [1.0] }"#).is_err());
    }
}
