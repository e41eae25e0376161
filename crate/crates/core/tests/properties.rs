use fdrelay::benchmarks::benchmark_suite;
use fdrelay::numerics::{mixture_entropy, GaussianMixture, MixtureComponent, QuadratureSpec};
use fdrelay::relay_opt::{amplitude_grid, discrete_rates};
use fdrelay::scalar::{awgn_capacity, gaussian_entropy};
use fdrelay::source_policy::{
    allocated_power, mi_source_relay, solve_xth_discrete, transmit_probability,
};
use fdrelay::{
    capacity, normalize_scenario, DiscreteDistribution, LinkScenario, MassPoint, NormalizedChannel,
    RelayInputDistribution, SolverConfig,
};
use proptest::prelude::*;

/// A relay input with up to six amplitudes in `[0, 3]` and a zero symbol.
fn discrete() -> impl Strategy<Value = DiscreteDistribution> {
    (
        prop::collection::btree_set(1u32..300, 1..6),
        prop::collection::vec(0.05f64..1.0, 7),
    )
        .prop_map(|(xs, w)| {
            let xs: Vec<f64> = xs.into_iter().map(|k| f64::from(k) * 0.01).collect();
            let total: f64 = w[..=xs.len()].iter().sum();
            let mut points = vec![MassPoint {
                x: 0.0,
                p: w[0] / total,
            }];
            points.extend(
                xs.iter()
                    .zip(&w[1..])
                    .map(|(&x, &p)| MassPoint { x, p: p / total }),
            );
            DiscreteDistribution::new(points).unwrap()
        })
}

fn channel() -> impl Strategy<Value = NormalizedChannel> {
    (
        0.05f64..5.0,
        0.05f64..5.0,
        0.01f64..1.0,
        0.01f64..1.0,
        1e-3f64..1.0,
    )
        .prop_map(|(p_s, p_r, sr, sd, alpha)| {
            NormalizedChannel::new(p_s, p_r, sr, sd, alpha).unwrap()
        })
}

fn scenario() -> impl Strategy<Value = LinkScenario> {
    (
        300.0f64..700.0,
        300.0f64..700.0,
        15.0f64..35.0,
        15.0f64..35.0,
        110.0f64..150.0,
    )
        .prop_map(
            |(d_sr, d_rd, p_s_dbm, p_r_dbm, si_suppression_db)| LinkScenario {
                d_sr,
                d_rd,
                p_s_dbm,
                p_r_dbm,
                si_suppression_db,
                ..LinkScenario::reference()
            },
        )
}

proptest! {
    #[test]
    fn threshold_spends_the_source_power(d in discrete(), alpha in 1e-3f64..10.0, p_s in 1e-3f64..10.0) {
        let x_th = solve_xth_discrete(&d, alpha, p_s).unwrap();
        let dist = RelayInputDistribution::Discrete { points: d };
        let spent = allocated_power(&dist, x_th, alpha);
        prop_assert!((spent - p_s).abs() <= 1e-9 * p_s, "{spent} vs {p_s}");
    }

    #[test]
    fn source_rate_is_bounded_by_the_interference_free_link(d in discrete(), ch in channel()) {
        let x_th = solve_xth_discrete(&d, ch.alpha, ch.p_s).unwrap();
        let dist = RelayInputDistribution::Discrete { points: d };
        let rate = mi_source_relay(&dist, x_th, ch.alpha, ch.sigma_r_sq, ch.p_s, &QuadratureSpec::default()).unwrap();
        prop_assert!(rate >= 0.0);
        prop_assert!(rate <= awgn_capacity(ch.p_s / ch.sigma_r_sq) + 1e-12);
    }

    #[test]
    fn transmit_probability_grows_with_threshold(d in discrete(), a in 0.0f64..3.0, b in 0.0f64..3.0) {
        let dist = RelayInputDistribution::Discrete { points: d };
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (p_lo, p_hi) = (transmit_probability(&dist, lo), transmit_probability(&dist, hi));
        let unit = 0.0..=1.0 + 1e-12;
        prop_assert!(unit.contains(&p_lo) && unit.contains(&p_hi));
        prop_assert!(p_lo <= p_hi);
    }

    #[test]
    fn mixture_entropy_lies_between_gaussian_bounds(
        comps in prop::collection::vec((0.05f64..1.0, -3.0f64..3.0, 0.05f64..2.0), 1..5)
    ) {
        let total: f64 = comps.iter().map(|c| c.0).sum();
        let m = GaussianMixture::new(
            comps.iter().map(|&(w, mean, variance)| MixtureComponent { weight: w / total, mean, variance }).collect(),
        ).unwrap();
        let h = mixture_entropy(&m, &QuadratureSpec::adaptive(1e-10)).unwrap();
        prop_assert!(h >= gaussian_entropy(m.min_variance()) - 1e-9);
        prop_assert!(h <= gaussian_entropy(m.variance()) + 1e-9);
    }

    #[test]
    fn suppression_scales_alpha(s in scenario(), extra in 0.0f64..30.0) {
        let a: NormalizedChannel = normalize_scenario(&s).unwrap();
        let s2 = LinkScenario { si_suppression_db: s.si_suppression_db + extra, ..s };
        let b: NormalizedChannel = normalize_scenario(&s2).unwrap();
        prop_assert!((b.alpha / a.alpha - 10f64.powf(-extra / 10.0)).abs() < 1e-12);
        prop_assert_eq!((a.p_s, a.p_r, a.sigma_r_sq), (b.p_s, b.p_r, b.sigma_r_sq));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn reference_schemes_are_ordered(s in scenario()) {
        let ch: NormalizedChannel = normalize_scenario(&s).unwrap();
        let b = benchmark_suite(&ch, &SolverConfig::default()).unwrap();
        prop_assert!(b.r_hd_conv <= b.c_hd + 1e-6);
        prop_assert!(b.c_hd <= b.c_fd_ideal + 1e-9);
        prop_assert!(b.r_fd_conv <= b.c_fd_ideal + 1e-9);
    }



    #[test]
    fn no_grid_input_beats_the_capacity(s in scenario(), seed in proptest::collection::vec(0.0f64..1.0, 81)) {
        let cfg = SolverConfig { grid_points: 81, ..SolverConfig::default() };
        let ch: NormalizedChannel = normalize_scenario(&s).unwrap();
        let c = capacity(&ch, &cfg).unwrap().capacity;
        let grid = amplitude_grid(ch.p_r, &cfg);
        let total: f64 = seed.iter().sum();
        let m2: f64 = seed.iter().zip(&grid).map(|(w, x)| w / total * x * x).sum();
        let scale = (ch.p_r / m2).min(1.0);
        let mut p: Vec<f64> = seed.iter().map(|w| scale * w / total).collect();
        p[0] += 1.0 - scale;
        let d = DiscreteDistribution::from_grid(&grid, &p, 0.0).unwrap();
        let (sr, rd) = discrete_rates(&ch, &d, &cfg).unwrap();
        prop_assert!(sr.min(rd) <= c + 1e-6, "{} > {c}", sr.min(rd));
    }

    #[test]
    fn capacity_grows_with_source_power(s in scenario(), extra in 1.0f64..10.0) {
        let cfg = SolverConfig { grid_points: 81, ..SolverConfig::default() };
        let lo: NormalizedChannel = normalize_scenario(&s).unwrap();
        let hi: NormalizedChannel = normalize_scenario(&LinkScenario { p_s_dbm: s.p_s_dbm + extra, ..s }).unwrap();
        let (c_lo, c_hi) = (capacity(&lo, &cfg).unwrap().capacity, capacity(&hi, &cfg).unwrap().capacity);
        prop_assert!(c_lo <= c_hi + 1e-6, "{c_lo} > {c_hi}");
    }
}
