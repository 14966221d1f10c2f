//! Covering solvers against exhaustive enumeration of centre subsets.

use dircomplex::covering::{
    certified_lower, cover_exact_partial, cover_greedy_partial, improve_cover, packing_set, separated_lower,
    solve_cell, DistanceMatrix,
};
use proptest::prelude::*;

fn covered(dm: &DistanceMatrix, eps: f64, centers: &[usize]) -> usize {
    (0..dm.len()).filter(|&j| centers.iter().any(|&c| dm.get(c, j) < eps)).count()
}

fn brute_force(dm: &DistanceMatrix, eps: f64, target: usize) -> usize {
    let n = dm.len();
    (0u32..1 << n)
        .filter(|&mask| {
            let centers: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            covered(dm, eps, &centers) >= target
        })
        .map(u32::count_ones)
        .min()
        .unwrap() as usize
}

/// Points in the unit square under the sup norm.
fn plane() -> impl Strategy<Value = DistanceMatrix> {
    prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..=11).prop_map(|pts| {
        DistanceMatrix::from_fn(pts.len(), |a, b| (pts[a].0 - pts[b].0).abs().max((pts[a].1 - pts[b].1).abs()))
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, ..ProptestConfig::default() })]

    #[test]
    fn exact_matches_enumeration(dm in plane(), eps in 0.05f64..0.7, frac in 0.0f64..=1.0) {
        let n = dm.len();
        let target = (frac * n as f64).round() as usize;
        let exact = cover_exact_partial(&dm, eps, target, 1_000_000).unwrap();
        prop_assert_eq!(exact.size, brute_force(&dm, eps, target));
        prop_assert!(covered(&dm, eps, &exact.centers) >= target);
        prop_assert!(certified_lower(&dm, eps, target) <= exact.size);

        let greedy = cover_greedy_partial(&dm, eps, target);
        let improved = improve_cover(&dm, eps, target, &greedy);
        prop_assert!(exact.size <= improved.size && improved.size <= greedy.size);
        prop_assert!(covered(&dm, eps, &improved.centers) >= target);
    }

    #[test]
    fn full_cover_sandwich(dm in plane(), eps in 0.05f64..0.7) {
        let n = dm.len();
        let cell = solve_cell(&dm, eps, 1, n, 1_000_000);
        let exact = cell.exact.unwrap();
        prop_assert_eq!(exact, brute_force(&dm, eps, n));
        prop_assert!(cell.separated_lower <= exact && exact <= cell.greedy_upper);
        prop_assert!(packing_set(&dm, 2.0 * eps).len() <= exact);
        prop_assert_eq!(cell.separated_lower, separated_lower(&dm, 2.0 * eps));
    }
}
