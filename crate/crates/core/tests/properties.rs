//! Invariants checked on randomly generated inputs.

use proptest::prelude::*;

use truncext::k_select::{search_window, DEFAULT_BETA};
use truncext::lynden_bell::{lynden_bell_eval, lynden_bell_product};
use truncext::tail_estimation::{interval_from_plugins, TailCopula};
use truncext::{
    burr_quantile, burr_survival, confidence_interval, delta_functional, lambda_n, lynden_bell_survival,
    premium_estimate, select_k, truncated_tail_index, weissman_tail, BurrTruncationModel, ConfidenceSettings, Margin,
    RngSeed, TauSource, TruncatedSample,
};

fn burr_sample(p: f64, gamma1: f64, n_total: usize, seed: u64) -> TruncatedSample {
    BurrTruncationModel::from_p(p, gamma1, 1.0).unwrap().sample(n_total, RngSeed(seed)).unwrap()
}

fn sample_strategy() -> impl Strategy<Value = TruncatedSample> {
    (0.6..0.95f64, 0.3..1.0f64, 200usize..1500, any::<u64>())
        .prop_map(|(p, g1, n, seed)| burr_sample(p, g1, n, seed))
        .prop_filter("need a few observations", |s| s.n() >= 40)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quantile_inverts_survival(u in 0.0..0.999f64, delta in 0.25..4.0f64, g in 0.2..3.0f64) {
        let x = burr_quantile(u, delta, g).unwrap();
        let back = burr_survival(x, delta, g).unwrap();
        prop_assert!((back - (1.0 - u)).abs() <= 1e-12, "u={u} back={back}");
    }

    #[test]
    fn observation_probability_reads_back(p in 0.01..0.99f64, g1 in 0.05..3.0f64) {
        let m = BurrTruncationModel::from_p(p, g1, 1.0).unwrap();
        prop_assert_eq!(m.p(), p);
        prop_assert!((m.gamma2() / (m.gamma1() + m.gamma2()) - p).abs() < 1e-14);
    }

    #[test]
    fn overlap_is_tail_difference(s in sample_strategy(), q in prop::collection::vec(0.0..1.0f64, 30)) {
        let xs = s.sorted(Margin::X);
        let hi = *s.sorted(Margin::Y).last().unwrap();
        let n = s.n();
        let mut probes: Vec<f64> = q.iter().map(|&u| u * hi * 1.1).collect();
        probes.extend(xs.iter().step_by(7).copied());
        probes.extend(s.sorted(Margin::Y).iter().step_by(7).copied());
        for x in probes {
            let y_at_or_above = n - s.count_lt(Margin::Y, x);
            let x_above = n - s.count_le(Margin::X, x);
            prop_assert_eq!(s.overlap_count(x), y_at_or_above - x_above);
            let diff = s.empirical_tail_inclusive(Margin::Y, x) - s.empirical_tail(Margin::X, x);
            prop_assert!((s.c_n(x) - diff).abs() <= f64::EPSILON);
            prop_assert!((0.0..=1.0).contains(&s.c_n(x)));
        }
    }

    #[test]
    fn overlap_constant_between_coordinates(s in sample_strategy(), u in 0.01..0.99f64) {
        let mut coords: Vec<f64> = s.pairs().iter().flat_map(|&(x, y)| [x, y]).collect();
        coords.sort_by(f64::total_cmp);
        coords.dedup();
        for w in coords.windows(2).step_by(5) {
            let (a, b) = (w[0], w[1]);
            let inside = a + u * (b - a);
            if inside > a && inside < b {
                let mid = 0.5 * (a + b);
                if mid > a && mid < b {
                    prop_assert_eq!(s.c_n(inside), s.c_n(mid));
                }
            }
        }
    }

    #[test]
    fn ratio_identity(s in sample_strategy(), frac in 0.02..0.5f64) {
        let n = s.n();
        let k = ((n as f64 * frac) as usize).clamp(2, n - 1);
        if let Ok(est) = truncated_tail_index(&s, k) {
            let (xs, ys) = (s.sorted(Margin::X), s.sorted(Margin::Y));
            let (xk, yk) = (xs[n - k - 1], ys[n - k - 1]);
            let mut num_x = 0.0;
            let mut num_y = 0.0;
            let mut den = 0.0;
            for i in 1..=k {
                let (xi, yi) = (xs[n - i], ys[n - i]);
                num_x += (xi / xk).ln();
                num_y += (yi / yk).ln();
                den += (xk * yi / (yk * xi)).ln();
            }
            let direct = num_x * num_y / (k as f64 * den);
            let ratio = est.gamma_hat * est.gamma2_hat / (est.gamma2_hat - est.gamma_hat);
            prop_assert!(((direct - est.gamma1_hat) / direct).abs() < 1e-12, "{direct} vs {}", est.gamma1_hat);
            prop_assert!(((ratio - est.gamma1_hat) / ratio).abs() < 1e-12);
        }
    }

    #[test]
    fn scaling_leaves_estimates_unchanged(s in sample_strategy(), pow in -20i32..20, frac in 0.02..0.25f64) {
        let c = 2f64.powi(pow);
        let scaled = s.scaled(c).unwrap();
        let k = ((s.n() as f64 * frac) as usize).max(2);
        let a = truncated_tail_index(&s, k);
        let b = truncated_tail_index(&scaled, k);
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
        }
        let ka = select_k(&s, DEFAULT_BETA).map(|r| r.k_star).ok();
        let kb = select_k(&scaled, DEFAULT_BETA).map(|r| r.k_star).ok();
        prop_assert_eq!(ka, kb);
    }

    #[test]
    fn premium_is_homogeneous(s in sample_strategy(), pow in -10i32..10, stretch in 1.0..20.0f64) {
        let c = 2f64.powi(pow);
        let Ok(sel) = select_k(&s, DEFAULT_BETA) else { return Ok(()) };
        let Ok(est) = truncated_tail_index(&s, sel.k_star) else { return Ok(()) };
        if est.gamma1_hat >= 1.0 {
            return Ok(());
        }
        let pivot = s.sorted(Margin::X)[s.n() - sel.k_star - 1];
        let u = pivot * stretch;
        let a = premium_estimate(&s, sel.k_star, u, est.gamma1_hat).unwrap();
        let b = premium_estimate(&s.scaled(c).unwrap(), sel.k_star, u * c, est.gamma1_hat).unwrap();
        prop_assert!((b.pi_hat - c * a.pi_hat).abs() <= 1e-12 * c * a.pi_hat);
    }

    #[test]
    fn copula_monotone_and_bounded(s in sample_strategy(), frac in 0.02..0.4f64, grid in prop::collection::vec(0.001..1.0f64, 12)) {
        let k = ((s.n() as f64 * frac) as usize).max(1);
        let r = TailCopula::new(&s, k).unwrap();
        let mut pts = grid.clone();
        pts.sort_by(f64::total_cmp);
        let step = 1.0 / k as f64;
        for (i, &a) in pts.iter().enumerate() {
            for (j, &b) in pts.iter().enumerate() {
                let v = r.eval(a, b).unwrap();
                prop_assert!(v >= 0.0 && v <= a.min(b) + step, "R({a},{b})={v}");
                if i > 0 {
                    prop_assert!(v >= r.eval(pts[i - 1], b).unwrap());
                }
                if j > 0 {
                    prop_assert!(v >= r.eval(a, pts[j - 1]).unwrap());
                }
            }
        }
    }

    #[test]
    fn delta_bounded_on_admissible_copulas(
        w in prop::collection::vec(0.0..1.0f64, 4),
        shrink in 0.0..1.0f64,
        seed in any::<u64>(),
    ) {
        // convex mixture of admissible pieces stays admissible
        let total: f64 = w.iter().sum::<f64>().max(1e-9);
        let w: Vec<f64> = w.iter().map(|v| v / total).collect();
        let r = |s: f64, t: f64| {
            w[0] * s.min(t) + w[1] * s * t + w[2] * (shrink * s).min(t) + w[3] * s.min(shrink * t)
        };
        let d = delta_functional(r, 4_000, RngSeed(seed)).unwrap();
        prop_assert!(d.value.abs() <= 4.0, "delta={}", d.value);
    }

    #[test]
    fn k_selection_deterministic_and_windowed(s in sample_strategy(), beta in 0.0..0.5f64) {
        let a = select_k(&s, beta);
        let b = select_k(&s, beta);
        prop_assert_eq!(&a.as_ref().ok(), &b.as_ref().ok());
        if let Ok(sel) = a {
            let (lo, hi) = search_window(s.n());
            prop_assert!(lo <= sel.k_star && sel.k_star <= hi);
        }
    }

    #[test]
    fn lynden_bell_nonincreasing(s in sample_strategy()) {
        let mut prev = f64::INFINITY;
        let xs = s.sorted(Margin::X);
        let mut probes: Vec<f64> = xs.iter().flat_map(|&x| [x * 0.999, x]).collect();
        probes.sort_by(f64::total_cmp);
        for x in probes {
            let v = lynden_bell_survival(&s, x);
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert!(v <= prev, "rose to {v} from {prev} at {x}");
            prev = v;
        }
    }

    #[test]
    fn lynden_bell_without_truncation_is_ecdf(xs in prop::collection::vec(0.1..100.0f64, 5..200)) {
        let top = xs.iter().cloned().fold(0.0, f64::max);
        let s = TruncatedSample::from_pairs(xs.iter().map(|&x| (x, top)).collect()).unwrap();
        for &x in s.sorted(Margin::X) {
            prop_assert_eq!(lynden_bell_survival(&s, x), s.empirical_tail(Margin::X, x));
        }
    }

    #[test]
    fn product_close_to_exponential_form(s in sample_strategy()) {
        let xs = s.sorted(Margin::X);
        let has_ties = xs.windows(2).any(|w| w[0] == w[1]);
        prop_assume!(!has_ties);
        for &x in xs.iter().step_by(3) {
            let upper: Vec<f64> = xs.iter().copied().filter(|&v| v > x).collect();
            let counts: Vec<usize> = upper.iter().map(|&v| s.overlap_count(v)).collect();
            if counts.iter().any(|&m| m < 5) {
                continue;
            }
            let lambda = lambda_n(&s, x);
            let max_term = counts.iter().map(|&m| 1.0 / m as f64).fold(0.0, f64::max);
            let product = lynden_bell_product(&s, x);
            prop_assert!((product - (-lambda).exp()).abs() <= lambda * max_term + 1e-15);
            prop_assert!(!lynden_bell_eval(&s, x).exponential_form);
        }
    }

    #[test]
    fn weissman_continuous_and_decreasing(s in sample_strategy(), g in 0.1..2.0f64, frac in 0.02..0.3f64) {
        let n = s.n();
        let k = ((n as f64 * frac) as usize).clamp(1, n - 1);
        let pivot = s.sorted(Margin::X)[n - k - 1];
        let at = weissman_tail(&s, k, g, pivot).unwrap();
        prop_assert_eq!(at, lynden_bell_survival(&s, pivot));
        let just_above = weissman_tail(&s, k, g, pivot * (1.0 + 1e-12)).unwrap();
        prop_assert!((just_above - at).abs() <= 1e-10 * at.max(1e-300));
        let mut prev = at;
        for m in [1.01, 1.5, 2.0, 10.0, 1e3] {
            let v = weissman_tail(&s, k, g, pivot * m).unwrap();
            if at > 0.0 {
                prop_assert!(v < prev);
            }
            prev = v;
        }
    }

    #[test]
    fn intervals_nest_in_level(g in 0.1..2.0f64, k in 5usize..500, mu in -2.0..2.0f64, sigma in 0.0..3.0f64, a in 0.5..0.99f64, b in 0.5..0.99f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let narrow = interval_from_plugins(g, k, mu, sigma, lo).unwrap();
        let wide = interval_from_plugins(g, k, mu, sigma, hi).unwrap();
        prop_assert!(wide.lcb <= narrow.lcb && narrow.ucb <= wide.ucb);
    }
}

/// Top X values sit on pairs whose Y values stay below the top Y values, so the
/// empirical tail copula vanishes on the unit square.
fn tail_independent_sample() -> TruncatedSample {
    let mut pairs = Vec::new();
    for i in 0..100 {
        let x = 1000.0 * 1.01f64.powi(i);
        pairs.push((x, x * 1.001));
    }
    for i in 0..100 {
        pairs.push((1.0 + 0.01 * i as f64, 1e6 * 1.1f64.powi(i)));
    }
    for i in 0..200 {
        let x = 2.0 + i as f64;
        pairs.push((x, x + 10.0));
    }
    TruncatedSample::from_pairs(pairs).unwrap()
}

#[test]
fn variance_without_tail_dependence() {
    let s = tail_independent_sample();
    let k = 50;
    let copula = TailCopula::new(&s, k).unwrap();
    for a in [0.1, 0.5, 1.0] {
        for b in [0.1, 0.5, 1.0] {
            assert_eq!(copula.eval(a, b).unwrap(), 0.0);
        }
    }
    let settings =
        ConfidenceSettings { mc_points: 10_000, tau: TauSource::Fixed { tau: -1.0, tau2: -1.0 }, ..Default::default() };
    let rep = confidence_interval(&s, k, &settings).unwrap();
    assert_eq!(rep.delta_hat, 0.0);
    let expected = 2.0 * rep.c_hat * rep.c_hat + 2.0 * rep.c2_hat * rep.c2_hat;
    assert!((rep.sigma2_hat - expected).abs() <= 1e-12 * expected);
}
