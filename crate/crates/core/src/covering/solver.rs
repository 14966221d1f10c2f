//! Exact, greedy and packing solvers for covering a finite sample by open
//! balls `B(c, ε) = {y : d(c, y) < ε}` centred at sample points.

use super::DistanceMatrix;

/// A set of ball centres (sample indices, ascending) and its size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cover {
    pub size: usize,
    pub centers: Vec<usize>,
}

type Bits = Vec<u64>;

fn words(n: usize) -> usize {
    n.div_ceil(64)
}

fn test_bit(bits: &[u64], i: usize) -> bool {
    bits[i / 64] >> (i % 64) & 1 == 1
}

fn set_bit(bits: &mut [u64], i: usize) {
    bits[i / 64] |= 1 << (i % 64);
}

fn clear_bit(bits: &mut [u64], i: usize) {
    bits[i / 64] &= !(1 << (i % 64));
}

fn ball_bits(dm: &DistanceMatrix, eps: f64) -> Vec<Bits> {
    let n = dm.len();
    (0..n)
        .map(|c| {
            let mut b = vec![0u64; words(n)];
            for j in 0..n {
                if dm.get(c, j) < eps {
                    set_bit(&mut b, j);
                }
            }
            b
        })
        .collect()
}

/// Number of points a full cover must reach for coverage target `target`.
fn check_target(n: usize, target: usize) -> usize {
    target.min(n)
}

/// Greedy maximum coverage until `target` points are covered; ties go to
/// the lowest index.
pub fn cover_greedy_partial(dm: &DistanceMatrix, eps: f64, target: usize) -> Cover {
    let n = dm.len();
    let target = check_target(n, target);
    let balls = ball_bits(dm, eps);
    let mut covered = vec![0u64; words(n)];
    let mut count = 0;
    let mut centers = Vec::new();
    while count < target {
        let (best, gain) = balls
            .iter()
            .enumerate()
            .map(|(c, b)| (c, gain(b, &covered)))
            .fold((0, 0), |acc, x| if x.1 > acc.1 { x } else { acc });
        debug_assert!(gain > 0, "every point lies in its own ball");
        for (w, b) in covered.iter_mut().zip(&balls[best]) {
            *w |= b;
        }
        count += gain;
        centers.push(best);
    }
    centers.sort_unstable();
    Cover {
        size: centers.len(),
        centers,
    }
}

pub fn cover_greedy(dm: &DistanceMatrix, eps: f64) -> Cover {
    cover_greedy_partial(dm, eps, dm.len())
}

/// Pair evaluations allowed per call of [`improve_cover`].
const LOCAL_SEARCH_PAIRS: usize = 20_000;

fn count(bits: &[u64]) -> usize {
    bits.iter().map(|w| w.count_ones() as usize).sum()
}

/// Local search on a cover reaching `target` points: drops redundant
/// centres and replaces two centres by one while the target stays met.
/// Deterministic (lowest indices first) and never returns a larger cover.
pub fn improve_cover(dm: &DistanceMatrix, eps: f64, target: usize, cover: &Cover) -> Cover {
    let n = dm.len();
    let target = check_target(n, target);
    let balls = ball_bits(dm, eps);
    let w = words(n);
    let sizes: Vec<usize> = balls.iter().map(|b| count(b)).collect();
    let mut centers = cover.centers.clone();
    let mut budget = LOCAL_SEARCH_PAIRS;
    'search: loop {
        // covered at least once, exactly once, exactly twice
        let mut any = vec![0u64; w];
        let mut once = vec![0u64; w];
        let mut twice = vec![0u64; w];
        for &c in &centers {
            for i in 0..w {
                let b = balls[c][i];
                twice[i] = (twice[i] & !b) | (once[i] & b);
                once[i] = (once[i] & !b) | (!any[i] & b);
                any[i] |= b;
            }
        }
        let total = count(&any);
        for (pos, &c) in centers.iter().enumerate() {
            let lost: usize = (0..w).map(|i| (once[i] & balls[c][i]).count_ones() as usize).sum();
            if total - lost >= target {
                centers.remove(pos);
                continue 'search;
            }
        }
        let mut lost = vec![0u64; w];
        for a in 0..centers.len() {
            for b in a + 1..centers.len() {
                if budget == 0 {
                    break 'search;
                }
                budget -= 1;
                let (ba, bb) = (&balls[centers[a]], &balls[centers[b]]);
                for i in 0..w {
                    lost[i] = (once[i] & (ba[i] | bb[i])) | (twice[i] & ba[i] & bb[i]);
                }
                let kept = total - count(&lost);
                let need = target.saturating_sub(kept);
                let open: Vec<u64> = (0..w).map(|i| lost[i] | !any[i]).collect();
                let found = (0..n).find(|&p| {
                    sizes[p] >= need
                        && balls[p].iter().zip(&open).map(|(x, o)| (x & o).count_ones() as usize).sum::<usize>() >= need
                });
                if let Some(p) = found {
                    let (ca, cb) = (centers[a], centers[b]);
                    centers.retain(|&c| c != ca && c != cb);
                    if !centers.contains(&p) {
                        centers.push(p);
                    }
                    centers.sort_unstable();
                    continue 'search;
                }
            }
        }
        break;
    }
    Cover {
        size: centers.len(),
        centers,
    }
}

fn gain(ball: &[u64], covered: &[u64]) -> usize {
    ball.iter().zip(covered).map(|(b, c)| (b & !c).count_ones() as usize).sum()
}

/// Size of a greedily built set (by index) with pairwise distances `≥ eps`.
/// No open ball of radius `eps/2` holds two of its points.
pub fn separated_lower(dm: &DistanceMatrix, eps: f64) -> usize {
    separated_set(dm, eps).len()
}

pub fn separated_set(dm: &DistanceMatrix, eps: f64) -> Vec<usize> {
    let mut set: Vec<usize> = Vec::new();
    for i in 0..dm.len() {
        if set.iter().all(|&s| dm.get(i, s) >= eps) {
            set.push(i);
        }
    }
    set
}

/// Larger `eps`-separated set: repeatedly keeps the point with the fewest
/// remaining points within `eps` (lowest index on ties) and removes those.
pub fn packing_set(dm: &DistanceMatrix, eps: f64) -> Vec<usize> {
    let n = dm.len();
    let close = ball_bits(dm, eps);
    let mut alive = vec![0u64; words(n)];
    for i in 0..n {
        set_bit(&mut alive, i);
    }
    let mut set = Vec::new();
    loop {
        let pick = (0..n)
            .filter(|&i| test_bit(&alive, i))
            .map(|i| (close[i].iter().zip(&alive).map(|(a, b)| (a & b).count_ones()).sum::<u32>(), i))
            .min();
        let Some((_, v)) = pick else { break };
        set.push(v);
        for (w, c) in alive.iter_mut().zip(&close[v]) {
            *w &= !c;
        }
    }
    set.sort_unstable();
    set
}

/// Lower bound on the number of open `eps`-balls, with arbitrary centres,
/// needed to contain `target` of the sample points.
///
/// Two bounds are combined: a `2ε`-separated set `S` (the larger of the
/// index-greedy and fewest-neighbours-first constructions) meets each ball at
/// most once and at most `n − target` of its points go uncovered; and a ball
/// containing sample point `p` lies inside `B(p, 2ε)`, so no ball holds more
/// than `max_p |B(p, 2ε)|` points.
pub fn certified_lower(dm: &DistanceMatrix, eps: f64, target: usize) -> usize {
    let n = dm.len();
    let target = check_target(n, target);
    if target == 0 {
        return 0;
    }
    let separated = separated_lower(dm, 2.0 * eps).max(packing_set(dm, 2.0 * eps).len());
    let packing = separated.saturating_sub(n - target);
    let largest = (0..n)
        .map(|p| (0..n).filter(|&j| dm.get(p, j) < 2.0 * eps).count())
        .max()
        .unwrap_or(1);
    packing.max(target.div_ceil(largest)).max(1)
}

struct Search<'a> {
    balls: &'a [Bits],
    n: usize,
    target: usize,
    /// Points neither covered nor given up.
    open: Bits,
    covered_count: usize,
    dropped_count: usize,
    /// Balls still admissible in this subtree.
    allowed: Bits,
    chosen: Vec<usize>,
    best: Vec<usize>,
    nodes: u64,
    cap: u64,
    aborted: bool,
}

fn and_count(a: &[u64], b: &[u64]) -> usize {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones() as usize).sum()
}

impl Search<'_> {
    fn lower_bound(&self, need: usize) -> Option<usize> {
        let mut gains: Vec<usize> = (0..self.n)
            .filter(|&c| test_bit(&self.allowed, c))
            .map(|c| and_count(&self.balls[c], &self.open))
            .filter(|&g| g > 0)
            .collect();
        gains.sort_unstable_by(|a, b| b.cmp(a));
        let mut total = 0;
        for (j, g) in gains.iter().enumerate() {
            total += g;
            if total >= need {
                return Some(j + 1);
            }
        }
        None
    }

    fn run(&mut self) {
        self.nodes += 1;
        if self.nodes > self.cap {
            self.aborted = true;
            return;
        }
        if self.covered_count >= self.target {
            if self.chosen.len() < self.best.len() {
                self.best = self.chosen.clone();
            }
            return;
        }
        let need = self.target - self.covered_count;
        match self.lower_bound(need) {
            Some(lb) if self.chosen.len() + lb < self.best.len() => {}
            _ => return,
        }

        // branch on the open point with the fewest admissible balls; by
        // symmetry the balls containing `e` are those centred in `B(e, ε)`
        let mut pick = (usize::MAX, usize::MAX);
        for e in (0..self.n).filter(|&e| test_bit(&self.open, e)) {
            let count = and_count(&self.balls[e], &self.allowed);
            if count < pick.1 {
                pick = (e, count);
                if count <= 1 {
                    break;
                }
            }
        }
        let e = pick.0;
        let mut cands: Vec<(usize, usize)> = (0..self.n)
            .filter(|&c| test_bit(&self.allowed, c) && test_bit(&self.balls[e], c))
            .map(|c| (c, and_count(&self.balls[c], &self.open)))
            .collect();
        cands.sort_by_key(|&(c, g)| (std::cmp::Reverse(g), c));

        for &(c, g) in &cands {
            let before = self.open.clone();
            for (w, b) in self.open.iter_mut().zip(&self.balls[c]) {
                *w &= !b;
            }
            self.covered_count += g;
            self.chosen.push(c);
            self.run();
            self.chosen.pop();
            self.covered_count -= g;
            self.open = before;
            clear_bit(&mut self.allowed, c);
            if self.aborted {
                break;
            }
        }
        if !self.aborted && self.dropped_count < self.n - self.target {
            clear_bit(&mut self.open, e);
            self.dropped_count += 1;
            self.run();
            self.dropped_count -= 1;
            set_bit(&mut self.open, e);
        }
        for &(c, _) in &cands {
            set_bit(&mut self.allowed, c);
        }
    }
}

/// Minimum number of sample-centred open balls covering at least `target`
/// points, by branch and bound. `None` when more than `cap` nodes would be
/// needed; a returned value is always optimal.
pub fn cover_exact_partial(dm: &DistanceMatrix, eps: f64, target: usize, cap: u64) -> Option<Cover> {
    let n = dm.len();
    let target = check_target(n, target);
    if target == 0 {
        return Some(Cover {
            size: 0,
            centers: Vec::new(),
        });
    }
    let balls = ball_bits(dm, eps);
    let greedy = cover_greedy_partial(dm, eps, target);
    let mut all = vec![0u64; words(n)];
    for i in 0..n {
        set_bit(&mut all, i);
    }
    let mut search = Search {
        balls: &balls,
        n,
        target,
        open: all.clone(),
        covered_count: 0,
        dropped_count: 0,
        allowed: all,
        chosen: Vec::new(),
        best: greedy.centers,
        nodes: 0,
        cap,
        aborted: false,
    };
    search.run();
    if search.aborted {
        return None;
    }
    let mut centers = search.best;
    centers.sort_unstable();
    Some(Cover {
        size: centers.len(),
        centers,
    })
}

pub fn cover_exact(dm: &DistanceMatrix, eps: f64, cap: u64) -> Option<Cover> {
    cover_exact_partial(dm, eps, dm.len(), cap)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> DistanceMatrix {
        DistanceMatrix::from_fn(xs.len(), |i, j| (xs[i] - xs[j]).abs())
    }

    fn discrete(n: usize) -> DistanceMatrix {
        DistanceMatrix::from_fn(n, |i, j| if i == j { 0.0 } else { 1.0 })
    }

    #[test]
    fn four_point_line() {
        let dm = line(&[0.0, 0.3, 0.6, 0.9]);
        let exact = cover_exact(&dm, 0.35, 10_000).unwrap();
        assert_eq!(exact.size, 2);
        // {0.3, 0.9} and {0.3, 0.6} both work; lowest-index search finds the latter
        assert_eq!(exact.centers, vec![1, 2]);
        assert_eq!(cover_greedy(&dm, 0.35).size, 2);
        assert_eq!(separated_lower(&dm, 0.7), 2);
    }

    fn covers(dm: &DistanceMatrix, eps: f64, centers: &[usize]) -> usize {
        (0..dm.len()).filter(|&j| centers.iter().any(|&c| dm.get(c, j) < eps)).count()
    }

    #[test]
    fn local_search_merges_greedy_centres() {
        // greedy takes the dense middle first and then needs both ends
        let dm = line(&[0.0, 0.1, 0.2, 0.35, 0.5, 0.6, 0.7]);
        let greedy = cover_greedy(&dm, 0.25);
        let better = improve_cover(&dm, 0.25, dm.len(), &greedy);
        assert!(better.size <= greedy.size);
        assert_eq!(covers(&dm, 0.25, &better.centers), dm.len());
        assert_eq!(better.size, cover_exact(&dm, 0.25, 10_000).unwrap().size);
    }

    #[test]
    fn local_search_keeps_partial_targets() {
        let xs: Vec<f64> = (0..40).map(|i| (i as f64 * 0.618).fract()).collect();
        let dm = line(&xs);
        for target in [10, 25, 40] {
            let greedy = cover_greedy_partial(&dm, 0.07, target);
            let better = improve_cover(&dm, 0.07, target, &greedy);
            assert!(better.size <= greedy.size);
            assert!(covers(&dm, 0.07, &better.centers) >= target);
        }
    }

    #[test]
    fn extreme_radii() {
        let dm = line(&[0.0, 0.3, 0.6, 0.9]);
        assert_eq!(cover_exact(&dm, 1.0, 100).unwrap().size, 1);
        assert_eq!(cover_exact(&dm, 0.3, 100).unwrap().size, 4);
        assert_eq!(separated_lower(&dm, 2.0), 1);
    }

    #[test]
    fn discrete_metric() {
        let dm = discrete(7);
        assert_eq!(cover_greedy(&dm, 0.5).size, 7);
        assert_eq!(cover_exact(&dm, 0.5, 1000).unwrap().size, 7);
        assert_eq!(separated_lower(&dm, 0.5), 7);
        assert_eq!(cover_exact_partial(&dm, 0.5, 5, 1000).unwrap().size, 5);
        assert_eq!(certified_lower(&dm, 0.25, 5), 5);
    }

    #[test]
    fn packing_beats_index_order_on_a_star() {
        // point 0 is close to everything else, which are mutually far apart
        let dm = DistanceMatrix::from_fn(5, |i, _| if i == 0 { 0.4 } else { 1.0 });
        assert_eq!(separated_lower(&dm, 0.5), 1);
        assert_eq!(packing_set(&dm, 0.5), vec![1, 2, 3, 4]);
    }

    #[test]
    fn singleton() {
        let dm = discrete(1);
        assert_eq!(cover_greedy(&dm, 0.1).size, 1);
        assert_eq!(cover_exact(&dm, 0.1, 10).unwrap().size, 1);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let xs: Vec<f64> = (0..40).map(|i| (i as f64 * 0.618_033_988_7).fract()).collect();
        let dm = line(&xs);
        assert_eq!(cover_exact(&dm, 0.05, 1), None);
    }

    #[test]
    fn partial_cover_can_skip_outliers() {
        let dm = line(&[0.0, 0.1, 0.2, 5.0, 10.0]);
        assert_eq!(cover_exact(&dm, 0.25, 1000).unwrap().size, 3);
        assert_eq!(cover_exact_partial(&dm, 0.25, 3, 1000).unwrap().size, 1);
        assert_eq!(cover_exact_partial(&dm, 0.25, 4, 1000).unwrap().size, 2);
        assert_eq!(cover_greedy_partial(&dm, 0.25, 3).centers, vec![0]);
    }
}
