use hamfcm_core::clustering::{run_fcm, run_hamfcm, ClusterConfig, Dataset};
use hamfcm_core::evaluation::{clustering_accuracy, minmax_normalize};
use hamfcm_core::hedge_algebra::{HedgeAlgebra, HedgeParams, LinguisticTerm};
use hamfcm_core::imaging::{downscale, ImageBuffer};
use proptest::prelude::*;

fn hedge_params() -> impl Strategy<Value = HedgeParams> {
    (0.05f64..0.95, prop::array::uniform4(0.05f64..1.0), 1usize..=3).prop_map(|(fm_small, mu, depth)| {
        let total: f64 = mu.iter().sum();
        HedgeParams {
            fm_small,
            fm_big: 1.0 - fm_small,
            mu_less: mu[0] / total,
            mu_possibly: mu[1] / total,
            mu_more: mu[2] / total,
            mu_very: mu[3] / total,
            depth_bound: depth,
        }
        .normalized()
        .unwrap()
    })
}

fn dataset() -> impl Strategy<Value = (Dataset, usize)> {
    (6usize..30, 1usize..=3, 2usize..=3).prop_flat_map(|(n, d, c)| {
        prop::collection::vec(prop::collection::vec(-10.0f64..10.0, d), n)
            .prop_map(move |rows| (Dataset::from_rows(rows).unwrap(), c))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fm_is_a_partition_of_unity_at_every_depth(params in hedge_params()) {
        let algebra = HedgeAlgebra::new(params).unwrap();
        for depth in 0..=params.depth_bound {
            let sum: f64 = algebra.terms().iter().filter(|t| t.term.depth() == depth).map(|t| t.fm).sum();
            prop_assert!((sum - 1.0).abs() < 1e-9, "depth {} sums to {}", depth, sum);
        }
    }

    #[test]
    fn intervals_tile_the_unit_interval(params in hedge_params()) {
        let algebra = HedgeAlgebra::new(params).unwrap();
        for depth in 0..=params.depth_bound {
            let mut level: Vec<_> = algebra.terms().iter().filter(|t| t.term.depth() == depth).collect();
            level.sort_by(|a, b| a.lo.total_cmp(&b.lo));
            prop_assert!(level[0].lo.abs() < 1e-12);
            prop_assert!((level.last().unwrap().hi - 1.0).abs() < 1e-12);
            for pair in level.windows(2) {
                prop_assert!((pair[0].hi - pair[1].lo).abs() < 1e-12);
            }
            for t in &level {
                prop_assert!((t.hi - t.lo - t.fm).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn values_lie_in_their_intervals_and_children_nest(params in hedge_params()) {
        let algebra = HedgeAlgebra::new(params).unwrap();
        for t in algebra.terms() {
            prop_assert!(t.lo <= t.v && t.v <= t.hi);
            if t.term.depth() < params.depth_bound {
                for h in hamfcm_core::hedge_algebra::Hedge::ALL {
                    let (lo, hi, _) = algebra.semantics(&t.term.modified(h)).unwrap();
                    prop_assert!(t.lo - 1e-12 <= lo && hi <= t.hi + 1e-12);
                }
            }
        }
    }

    #[test]
    fn inverse_matches_a_full_scan(params in hedge_params(), q in 0.0f64..=1.0) {
        let algebra = HedgeAlgebra::new(params).unwrap();
        let found = algebra.inverse_quantify(q).unwrap();
        let best = algebra
            .terms()
            .iter()
            .map(|t| (t.v - q).abs())
            .fold(f64::INFINITY, f64::min);
        prop_assert_eq!((found.v - q).abs(), best);
        let err = algebra.mapping_error(q).unwrap();
        prop_assert!((0.0..=0.5).contains(&err));
    }

    #[test]
    fn term_text_round_trips(params in hedge_params(), q in 0.0f64..=1.0) {
        let algebra = HedgeAlgebra::new(params).unwrap();
        let term = &algebra.inverse_quantify(q).unwrap().term;
        let parsed: LinguisticTerm = term.to_string().parse().unwrap();
        prop_assert_eq!(&parsed, term);
    }

    #[test]
    fn error_update_keeps_parameters_valid(params in hedge_params(), q in 0.0f64..=1.0, e in 0.0f64..2.0) {
        let algebra = HedgeAlgebra::new(params).unwrap();
        let term = algebra.inverse_quantify(q).unwrap().term.clone();
        let updated = params.with_error_update(&term, e).unwrap().normalized().unwrap();
        prop_assert!(updated.validate().is_ok());
        for (_, v) in updated.named() {
            prop_assert!(v > 0.0 && v < 1.0);
        }
    }

    #[test]
    fn accuracy_ignores_label_names(
        truth in prop::collection::vec(0usize..4, 1..40),
        predicted_seed in prop::collection::vec(0usize..4, 40),
        perm in Just([0usize, 1, 2, 3]).prop_shuffle(),
    ) {
        let predicted: Vec<usize> = predicted_seed[..truth.len()].to_vec();
        let renamed: Vec<usize> = predicted.iter().map(|&k| perm[k]).collect();
        let a = clustering_accuracy(&predicted, &truth).unwrap();
        prop_assert_eq!(a, clustering_accuracy(&renamed, &truth).unwrap());
        prop_assert!((0.0..=1.0).contains(&a));
        let relabeled_truth: Vec<usize> = truth.iter().map(|&k| perm[k]).collect();
        prop_assert_eq!(clustering_accuracy(&relabeled_truth, &truth).unwrap(), 1.0);
    }

    #[test]
    fn minmax_maps_into_unit_cube((data, _) in dataset()) {
        let scaled = minmax_normalize(&data);
        prop_assert!(scaled.values().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn fcm_objective_never_increases((data, c) in dataset(), m in 1.2f64..4.0, seed in 0u64..1000) {
        let result = run_fcm(&data, c, m, 1e-9, 100, seed).unwrap();
        for w in result.objective_trace.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9, "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn collapsed_range_reduces_to_fcm((data, c) in dataset(), m in 1.2f64..4.0, seed in 0u64..1000) {
        let fcm = run_fcm(&data, c, m, 1e-6, 300, seed).unwrap();
        let config = ClusterConfig { clusters: c, m_min: m, m_max: m, seed, ..ClusterConfig::default() };
        let ha = run_hamfcm(&data, &config).unwrap();
        prop_assert_eq!(&ha.labels, &fcm.labels);
        for (a, b) in ha.centroids.iter().zip(fcm.centroids.iter()) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn hamfcm_memberships_and_exponents_stay_in_range((data, c) in dataset(), seed in 0u64..1000) {
        let config = ClusterConfig { clusters: c, m_min: 1.5, m_max: 20.0, seed, ..ClusterConfig::default() };
        let result = run_hamfcm(&data, &config).unwrap();
        // Per-entry exponents do not preserve row sums; only bounds hold.
        prop_assert!(result.membership.as_array().iter().all(|u| (0.0..=1.0).contains(u)));
        for g in &result.exponent_fuzzy_set {
            prop_assert!((1.5..=20.0).contains(&g.m) && g.membership > 0.0 && g.membership <= 1.0);
        }
        for p in &result.ha_trace {
            prop_assert!(p.validate().is_ok());
        }
    }

    #[test]
    fn downscale_keeps_mean_color(
        w in 1usize..120,
        h in 1usize..120,
        bytes in prop::collection::vec(any::<u8>(), 3 * 120 * 120),
    ) {
        let pixels: Vec<[u8; 3]> = bytes.chunks(3).take(w * h).map(|c| [c[0], c[1], c[2]]).collect();
        let img = ImageBuffer::new(w, h, pixels).unwrap();
        let (before, after) = (img.mean_color(), downscale(&img).mean_color());
        for ch in 0..3 {
            prop_assert!((before[ch] - after[ch]).abs() <= 1.0);
        }
    }
}
