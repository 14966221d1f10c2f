use approx::assert_abs_diff_eq;
use dircomplex::metrics::{Family, MetricSeq};
use dircomplex::rng::seeded;
use dircomplex::systems::{circle_distance, FullShift, PermutationSystem, RotationSystem, SkewShift};
use dircomplex::{strip_window, ActionSystem, Direction, Slope};
use proptest::prelude::*;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 64,
        ..ProptestConfig::default()
    }
}

fn slope() -> impl Strategy<Value = Slope> {
    prop_oneof![
        (-5i64..=5).prop_map(Slope::integer),
        (-9i64..=9, 1i64..=7).prop_map(|(p, q)| Slope::rational(p, q).unwrap()),
        (-3.0f64..3.0).prop_map(|x| Slope::float(x).unwrap()),
    ]
}

fn group_law<S: ActionSystem>(sys: &S, seed: u64, v: [i64; 2], w: [i64; 2]) {
    let x = sys.sample_point(&mut seeded(seed));
    let sum = [v[0] + w[0], v[1] + w[1]];
    let composed = sys.act(&v, &sys.act(&w, &x).unwrap()).unwrap();
    assert_eq!(sys.distance(&composed, &sys.act(&sum, &x).unwrap()), 0.0);
    assert_eq!(sys.distance(&sys.act(&[0, 0], &x).unwrap(), &x), 0.0);
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn actions_compose(seed in any::<u64>(), v in prop::array::uniform2(-6i64..=6), w in prop::array::uniform2(-6i64..=6)) {
        group_law(&RotationSystem::planar(0.414_213_562_373, 0.618_033_988_75), seed, v, w);
        group_law(&FullShift::new(3, 16).unwrap(), seed, v, w);
        group_law(&SkewShift::new(2, 24).unwrap(), seed, v, w);
        group_law(&PermutationSystem::cyclic(7, 1, 3).unwrap(), seed, v, w);
    }

    #[test]
    fn strips_nest_in_depth_and_width(beta in slope(), b in 0.2f64..2.5, extra in 0.0f64..1.5, k in 1usize..24) {
        let narrow = Direction::planar(beta, b).unwrap();
        let wide = Direction::planar(beta, b + extra).unwrap();
        let shallow = strip_window(&narrow, k).unwrap();
        let deep = strip_window(&narrow, k + 1).unwrap();
        prop_assert!(shallow.points().iter().all(|p| deep.points().contains(p)));
        prop_assert!(shallow.points().iter().all(|p| wide.contains(p).unwrap()));
        prop_assert!(shallow.points().iter().all(|p| narrow.contains(p).unwrap()));
        prop_assert_eq!(deep.truncate(k).unwrap(), shallow);
    }

    #[test]
    fn rational_and_float_slopes_agree(p in -9i64..=9, q in 1i64..=7, k in 1usize..40) {
        // an irrational half-width never lands on a column boundary
        let b = std::f64::consts::FRAC_1_SQRT_2;
        let exact = strip_window(&Direction::planar(Slope::rational(p, q).unwrap(), b).unwrap(), k).unwrap();
        let float = strip_window(&Direction::planar(Slope::float(p as f64 / q as f64).unwrap(), b).unwrap(), k).unwrap();
        prop_assert_eq!(exact.points(), float.points());
    }

    #[test]
    fn metric_families_are_ordered(seed in any::<u64>(), beta in slope(), b in 0.3f64..2.0, level in 0u32..6) {
        let sys = SkewShift::new(2, 120).unwrap();
        let mut rng = seeded(seed);
        let x = sys.sample_point(&mut rng);
        let y = sys.perturb(&x, level, &mut rng);
        let d = Direction::planar(beta, b).unwrap();
        let t = MetricSeq::directional(&sys, Family::Mean, d).trace(&x, &y, 10).unwrap();
        for i in 0..10 {
            prop_assert!(t.bowen[i] >= t.maxmean[i] && t.maxmean[i] >= t.mean[i]);
            if i > 0 {
                prop_assert!(t.bowen[i] >= t.bowen[i - 1] && t.maxmean[i] >= t.maxmean[i - 1]);
            }
        }
    }
}

#[test]
fn rotation_metrics_reduce_to_arc_length() {
    let sys = RotationSystem::planar(0.3, 0.7);
    let mut rng = seeded(5);
    let d = Direction::planar(Slope::float(std::f64::consts::SQRT_2).unwrap(), 1.0).unwrap();
    for _ in 0..50 {
        let x = sys.sample_point(&mut rng);
        let y = sys.sample_point(&mut rng);
        for family in Family::ALL {
            let m = MetricSeq::directional(&sys, family, d.clone()).eval(&x, &y, 8).unwrap();
            assert_abs_diff_eq!(m, circle_distance(x, y), epsilon = 1e-12);
        }
    }
}
