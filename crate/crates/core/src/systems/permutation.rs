use num_complex::Complex64;
use rand::Rng;

use super::{ActionSystem, NetSpec, Observable};
use crate::error::{Error, Result};
use crate::rng::SampleRng;

/// Cycle decomposition of one permutation, so that powers are O(1).
#[derive(Debug, Clone, PartialEq)]
struct Cycles {
    cycles: Vec<Vec<usize>>,
    /// (cycle index, position in cycle) for every state.
    place: Vec<(usize, usize)>,
}

impl Cycles {
    fn new(perm: &[usize]) -> Self {
        let mut place = vec![(usize::MAX, 0); perm.len()];
        let mut cycles = Vec::new();
        for start in 0..perm.len() {
            if place[start].0 != usize::MAX {
                continue;
            }
            let mut cycle = Vec::new();
            let mut s = start;
            while place[s].0 == usize::MAX {
                place[s] = (cycles.len(), cycle.len());
                cycle.push(s);
                s = perm[s];
            }
            cycles.push(cycle);
        }
        Cycles { cycles, place }
    }

    fn power(&self, x: usize, n: i64) -> usize {
        let (c, pos) = self.place[x];
        let cycle = &self.cycles[c];
        let len = cycle.len() as i64;
        cycle[(pos as i64 + n).rem_euclid(len) as usize]
    }
}

/// Finite system of `N` states acted on by commuting permutations
/// (`T^w = π_1^{w_1} ∘ … ∘ π_q^{w_q}`) with the discrete metric and the
/// uniform measure.
#[derive(Debug, Clone, PartialEq)]
pub struct PermutationSystem {
    states: usize,
    generators: Vec<Vec<usize>>,
    cycles: Vec<Cycles>,
}

impl PermutationSystem {
    pub fn new(states: usize, generators: Vec<Vec<usize>>) -> Result<Self> {
        if states == 0 {
            return Err(Error::InvalidSystem("permutation system needs states".into()));
        }
        if generators.is_empty() {
            return Err(Error::InvalidSystem("permutation system needs generators".into()));
        }
        for g in &generators {
            let mut seen = vec![false; states];
            if g.len() != states || g.iter().any(|&s| s >= states || std::mem::replace(&mut seen[s], true)) {
                return Err(Error::InvalidSystem(format!("{g:?} is not a permutation of {states} states")));
            }
        }
        for (i, a) in generators.iter().enumerate() {
            for b in &generators[i + 1..] {
                if (0..states).any(|s| a[b[s]] != b[a[s]]) {
                    return Err(Error::InvalidSystem("generators do not commute".into()));
                }
            }
        }
        let cycles = generators.iter().map(|g| Cycles::new(g)).collect();
        Ok(PermutationSystem {
            states,
            generators,
            cycles,
        })
    }

    /// Two powers of the cyclic shift `s ↦ s + 1 (mod N)`.
    pub fn cyclic(states: usize, first: usize, second: usize) -> Result<Self> {
        let shift = |by: usize| (0..states).map(|s| (s + by) % states).collect::<Vec<_>>();
        PermutationSystem::new(states, vec![shift(first), shift(second)])
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn generators(&self) -> &[Vec<usize>] {
        &self.generators
    }
}

impl ActionSystem for PermutationSystem {
    type Point = usize;

    fn rank(&self) -> usize {
        self.generators.len()
    }

    fn act(&self, w: &[i64], x: &usize) -> Result<usize> {
        self.check_rank(w)?;
        if *x >= self.states {
            return Err(Error::InvalidArgument(format!("state {x} out of range")));
        }
        Ok(w.iter()
            .zip(&self.cycles)
            .fold(*x, |s, (&n, c)| c.power(s, n)))
    }

    fn distance(&self, x: &usize, y: &usize) -> f64 {
        if x == y {
            0.0
        } else {
            1.0
        }
    }

    fn diameter(&self) -> f64 {
        1.0
    }

    fn sample_point(&self, rng: &mut SampleRng) -> usize {
        rng.gen_range(0..self.states)
    }

    fn perturb(&self, x: &usize, _level: u32, _rng: &mut SampleRng) -> usize {
        *x
    }

    fn net(&self, _spec: NetSpec, _rng: &mut SampleRng) -> Vec<usize> {
        (0..self.states).collect()
    }

    fn cardinality(&self) -> Option<usize> {
        Some(self.states)
    }

    /// Indicators of the individual states.
    fn observables(&self) -> Vec<Observable<usize>> {
        (0..self.states)
            .map(|s| {
                Observable::new(format!("state{s}"), move |x: &usize| {
                    Complex64::new(if *x == s { 1.0 } else { 0.0 }, 0.0)
                })
            })
            .collect()
    }

    fn describe(&self) -> String {
        format!("permutation(states={}, rank={})", self.states, self.rank())
    }
}
