//! Shift spaces over `{0, …, a−1}` with finite point windows.
//!
//! A point stores its restriction to the Chebyshev ball of radius `R`
//! around the base origin plus a translation offset. Translating only moves
//! the offset, so the group law is exact and cheap; with [`Fill::Truncate`]
//! a translate by `w` leaves `R − |w|_∞` cells of known context around the
//! new origin and fails once nothing is left.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;

use super::{ActionSystem, Observable};
use crate::error::{Error, Result};
use crate::rng::SampleRng;

/// How a point is extended beyond its stored window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fill {
    /// Unknown outside the window.
    Truncate,
    /// Every cell outside the window holds this symbol.
    Constant(u8),
    /// The window repeats with period `2R + 1` in every coordinate.
    Periodic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftPoint {
    cells: Arc<[u8]>,
    dim: usize,
    radius: i64,
    offset: [i64; 2],
    fill: Fill,
}

impl ShiftPoint {
    /// Window of side `2·radius + 1` in `dim` coordinates, row-major.
    pub fn from_cells(dim: usize, radius: i64, cells: Vec<u8>, fill: Fill) -> Result<Self> {
        if !(1..=2).contains(&dim) || radius < 0 {
            return Err(Error::InvalidArgument(format!(
                "unsupported shift window dim={dim} radius={radius}"
            )));
        }
        let side = (2 * radius + 1) as usize;
        if cells.len() != side.pow(dim as u32) {
            return Err(Error::InvalidArgument(format!(
                "expected {} cells, got {}",
                side.pow(dim as u32),
                cells.len()
            )));
        }
        Ok(ShiftPoint {
            cells: cells.into(),
            dim,
            radius,
            offset: [0, 0],
            fill,
        })
    }

    pub fn constant(dim: usize, radius: i64, symbol: u8) -> Self {
        let side = (2 * radius + 1) as usize;
        ShiftPoint::from_cells(dim, radius, vec![symbol; side.pow(dim as u32)], Fill::Constant(symbol))
            .expect("valid constant window")
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn offset(&self) -> &[i64] {
        &self.offset[..self.dim]
    }

    /// Radius of known context around the current origin; `None` when the
    /// fill rule defines every cell.
    pub fn known_radius(&self) -> Option<i64> {
        match self.fill {
            Fill::Truncate => Some(self.radius - self.shift_norm()),
            _ => None,
        }
    }

    fn shift_norm(&self) -> i64 {
        self.offset[..self.dim].iter().map(|o| o.abs()).max().unwrap_or(0)
    }

    fn side(&self) -> i64 {
        2 * self.radius + 1
    }

    /// Symbol at coordinate `u` relative to the current origin.
    pub fn value(&self, u: [i64; 2]) -> Option<u8> {
        let r = self.radius;
        let mut abs = [0i64; 2];
        let mut inside = true;
        for i in 0..self.dim {
            abs[i] = u[i] + self.offset[i];
            inside &= abs[i].abs() <= r;
        }
        if !inside {
            match self.fill {
                Fill::Truncate => return None,
                Fill::Constant(s) => return Some(s),
                Fill::Periodic => {
                    for a in abs.iter_mut().take(self.dim) {
                        *a = (*a + r).rem_euclid(self.side()) - r;
                    }
                }
            }
        }
        let side = self.side();
        let idx = if self.dim == 1 {
            abs[0] + r
        } else {
            (abs[0] + r) * side + (abs[1] + r)
        };
        Some(self.cells[idx as usize])
    }

    fn translated(&self, w: [i64; 2]) -> Result<Self> {
        let mut out = self.clone();
        for i in 0..self.dim {
            out.offset[i] += w[i];
        }
        if self.fill == Fill::Truncate {
            let needed = out.shift_norm();
            if needed > self.radius {
                return Err(Error::ResolutionExceeded {
                    needed,
                    available: self.radius,
                });
            }
        }
        Ok(out)
    }
}

/// Shared machinery of the two shift systems.
#[derive(Debug, Clone, PartialEq)]
struct ShiftSpace {
    dim: usize,
    alphabet: u8,
    radius: i64,
}

impl ShiftSpace {
    fn new(dim: usize, alphabet: usize, radius: i64) -> Result<Self> {
        if !(2..=256).contains(&alphabet) {
            return Err(Error::InvalidSystem(format!("alphabet size {alphabet} not in 2..=256")));
        }
        if radius < 1 {
            return Err(Error::InvalidSystem("shift window radius must be at least 1".into()));
        }
        Ok(ShiftSpace {
            dim,
            alphabet: (alphabet - 1) as u8,
            radius,
        })
    }

    fn cell_count(&self) -> usize {
        ((2 * self.radius + 1) as usize).pow(self.dim as u32)
    }

    fn coords(&self, idx: usize) -> [i64; 2] {
        let side = (2 * self.radius + 1) as usize;
        if self.dim == 1 {
            [idx as i64 - self.radius, 0]
        } else {
            [(idx / side) as i64 - self.radius, (idx % side) as i64 - self.radius]
        }
    }

    fn symbol(&self, rng: &mut SampleRng) -> u8 {
        rng.gen_range(0..=self.alphabet)
    }

    fn sample(&self, rng: &mut SampleRng) -> ShiftPoint {
        let cells = (0..self.cell_count()).map(|_| self.symbol(rng)).collect();
        ShiftPoint::from_cells(self.dim, self.radius, cells, Fill::Truncate).expect("valid window")
    }

    /// Agrees with `x` on the ball of radius `level`, fresh symbols elsewhere.
    fn perturb(&self, x: &ShiftPoint, level: u32, rng: &mut SampleRng) -> ShiftPoint {
        let level = level as i64;
        let cells = (0..self.cell_count())
            .map(|idx| {
                let u = self.coords(idx);
                let norm = u[0].abs().max(u[1].abs());
                let fresh = self.symbol(rng);
                if norm <= level {
                    x.value(u).unwrap_or(fresh)
                } else {
                    fresh
                }
            })
            .collect();
        ShiftPoint::from_cells(self.dim, self.radius, cells, Fill::Truncate).expect("valid window")
    }

    /// `2^{−r}` with `r` the least Chebyshev radius of disagreement, `0` if
    /// none within the common known radius.
    fn distance(&self, x: &ShiftPoint, y: &ShiftPoint) -> f64 {
        if Arc::ptr_eq(&x.cells, &y.cells) && x.offset == y.offset {
            return 0.0;
        }
        let limit = match (x.known_radius(), y.known_radius()) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => self.radius,
        };
        let differs = |u: [i64; 2]| x.value(u) != y.value(u);
        for r in 0..=limit {
            let hit = if self.dim == 1 {
                differs([-r, 0]) || differs([r, 0])
            } else if r == 0 {
                differs([0, 0])
            } else {
                (-r..=r).any(|i| differs([i, -r]) || differs([i, r]))
                    || (-r + 1..r).any(|j| differs([-r, j]) || differs([r, j]))
            };
            if hit {
                return 0.5f64.powi(r as i32);
            }
        }
        0.0
    }

    /// Indicators of the all-zero cylinder of radius 0, 1, 2 at the origin.
    fn observables(&self) -> Vec<Observable<ShiftPoint>> {
        let dim = self.dim;
        (0..=2i64)
            .map(|r| {
                Observable::new(format!("cyl{r}"), move |x: &ShiftPoint| {
                    let ys: Vec<i64> = if dim == 1 { vec![0] } else { (-r..=r).collect() };
                    let all_zero = (-r..=r).all(|i| ys.iter().all(|&j| x.value([i, j]) == Some(0)));
                    Complex64::new(if all_zero { 1.0 } else { 0.0 }, 0.0)
                })
            })
            .collect()
    }
}

/// Translation action of `Z²` on `{0, …, a−1}^{Z²}` with the uniform
/// Bernoulli measure.
#[derive(Debug, Clone, PartialEq)]
pub struct FullShift {
    space: ShiftSpace,
}

impl FullShift {
    pub fn new(alphabet: usize, radius: i64) -> Result<Self> {
        Ok(FullShift {
            space: ShiftSpace::new(2, alphabet, radius)?,
        })
    }

    pub fn radius(&self) -> i64 {
        self.space.radius
    }

    pub fn alphabet(&self) -> usize {
        self.space.alphabet as usize + 1
    }
}

impl ActionSystem for FullShift {
    type Point = ShiftPoint;

    fn rank(&self) -> usize {
        2
    }

    fn act(&self, w: &[i64], x: &ShiftPoint) -> Result<ShiftPoint> {
        self.check_rank(w)?;
        x.translated([w[0], w[1]])
    }

    fn distance(&self, x: &ShiftPoint, y: &ShiftPoint) -> f64 {
        self.space.distance(x, y)
    }

    fn diameter(&self) -> f64 {
        1.0
    }

    fn sample_point(&self, rng: &mut SampleRng) -> ShiftPoint {
        self.space.sample(rng)
    }

    fn perturb(&self, x: &ShiftPoint, level: u32, rng: &mut SampleRng) -> ShiftPoint {
        self.space.perturb(x, level, rng)
    }

    fn observables(&self) -> Vec<Observable<ShiftPoint>> {
        self.space.observables()
    }

    fn describe(&self) -> String {
        format!("fullshift(alphabet={}, radius={})", self.alphabet(), self.radius())
    }
}

/// `T^{(m,n)} = σ^{m−n}` on `{0, …, a−1}^Z` with the uniform Bernoulli
/// measure.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewShift {
    space: ShiftSpace,
}

impl SkewShift {
    pub fn new(alphabet: usize, radius: i64) -> Result<Self> {
        Ok(SkewShift {
            space: ShiftSpace::new(1, alphabet, radius)?,
        })
    }

    pub fn radius(&self) -> i64 {
        self.space.radius
    }

    pub fn alphabet(&self) -> usize {
        self.space.alphabet as usize + 1
    }
}

impl ActionSystem for SkewShift {
    type Point = ShiftPoint;

    fn rank(&self) -> usize {
        2
    }

    fn act(&self, w: &[i64], x: &ShiftPoint) -> Result<ShiftPoint> {
        self.check_rank(w)?;
        x.translated([w[0] - w[1], 0])
    }

    fn distance(&self, x: &ShiftPoint, y: &ShiftPoint) -> f64 {
        self.space.distance(x, y)
    }

    fn diameter(&self) -> f64 {
        1.0
    }

    fn sample_point(&self, rng: &mut SampleRng) -> ShiftPoint {
        self.space.sample(rng)
    }

    fn perturb(&self, x: &ShiftPoint, level: u32, rng: &mut SampleRng) -> ShiftPoint {
        self.space.perturb(x, level, rng)
    }

    fn observables(&self) -> Vec<Observable<ShiftPoint>> {
        self.space.observables()
    }

    fn describe(&self) -> String {
        format!("skewshift(alphabet={}, radius={})", self.alphabet(), self.radius())
    }
}
