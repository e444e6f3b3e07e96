use certbound_core::gauss::{gaussian_q, log_exp_times_q, normal_cdf};
use certbound_core::oracle::{convolve_sum, exact_cdf, ClosedForm};
use certbound_core::saddlepoint::{berry_esseen_envelope, eta, thm2_envelope, thm3_envelope};
use certbound_core::tilt::{cgf, C1, C2};
use certbound_core::{tilt_distribution, tilted_moments, DistKind, Distribution};
use proptest::prelude::*;

/// Small discrete laws on a 1/8 lattice, so convolution merges exactly.
fn small_dist() -> impl Strategy<Value = Distribution> {
    prop::collection::vec((-24i32..=24, 0.05f64..1.0), 2..6).prop_filter_map("needs two distinct points", |pts| {
        let pts: Vec<(f64, f64)> = pts.into_iter().map(|(k, w)| (k as f64 / 8.0, w)).collect();
        Distribution::from_probs(&pts).ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn cgf_is_strictly_convex(d in small_dist()) {
        let thetas: Vec<f64> = (0..=40).map(|i| -2.0 + 0.1 * i as f64).collect();
        let ms: Vec<_> = thetas.iter().map(|&t| tilted_moments(&d, t).unwrap()).collect();
        for w in ms.windows(2) {
            prop_assert!(w[1].k1 > w[0].k1);
        }
        for m in &ms {
            prop_assert!(m.k2 > 0.0);
            prop_assert!(m.t3_abs >= m.c3.abs());
            prop_assert!(m.t3_abs > 0.0);
            prop_assert!((m.xi / (C1 * (m.t3_abs / m.k2.powf(1.5) + C2)) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn untilted_moments_are_mean_and_variance(d in small_dist()) {
        let m = tilted_moments(&d, 0.0).unwrap();
        let mean = d.mean();
        let var: f64 = d.iter().map(|(v, lw)| lw.exp() * (v - mean).powi(2)).sum();
        prop_assert_eq!(m.k, 0.0);
        prop_assert!((m.k1 - mean).abs() < 1e-12);
        prop_assert!((m.k2 - var).abs() < 1e-12);
    }

    #[test]
    fn tilting_commutes_with_convolution(d in small_dist(), theta in -1.5f64..1.5, n in 1usize..=6) {
        let a = tilt_distribution(&convolve_sum(&d, n).unwrap(), theta).unwrap();
        let b = convolve_sum(&tilt_distribution(&d, theta).unwrap(), n).unwrap();
        prop_assert_eq!(a.len(), b.len());
        for ((va, pa), (vb, pb)) in a.values().iter().zip(a.probs()).zip(b.values().iter().zip(b.probs())) {
            prop_assert!((va - vb).abs() < 1e-12);
            prop_assert!((pa - pb).abs() < 1e-12);
        }
    }

    #[test]
    fn finite_differences_match_derivatives(d in small_dist(), theta in -1.5f64..1.5) {
        let h = 1e-5;
        let m = tilted_moments(&d, theta).unwrap();
        let (kp, km) = (cgf(&d, theta + h).unwrap(), cgf(&d, theta - h).unwrap());
        // The central difference has O(h^2) truncation and O(eps/h) rounding error.
        let scale = 1.0 + m.k1.abs() + m.c3.abs();
        prop_assert!(((kp - km) / (2.0 * h) - m.k1).abs() < 1e-8 * scale);
        prop_assert!(((kp - 2.0 * m.k + km) / (h * h) - m.k2).abs() < 1e-3 * scale);
    }

    #[test]
    fn log_exp_times_q_matches_naive(u in -50.0f64..50.0, v in -5.0f64..5.0) {
        let naive = u + gaussian_q(v).ln();
        prop_assert!((log_exp_times_q(u, v) - naive).abs() < 1e-12 * naive.abs().max(1.0));
    }

    #[test]
    fn eta_at_zero_tilt_is_the_normal_approximation(d in small_dist(), n in 1usize..300, frac in 0.01f64..0.99) {
        let a = n as f64 * (d.min_value() + frac * (d.max_value() - d.min_value()));
        let m = tilted_moments(&d, 0.0).unwrap();
        let want = normal_cdf((a - n as f64 * m.k1) / (n as f64 * m.k2).sqrt());
        prop_assert!((eta(&d, 0.0, a, n).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn envelopes_contain_the_binomial_cdf(p in 0.05f64..0.95, n in 5usize..200, frac in 0.0f64..1.0) {
        let b = Distribution::bernoulli(p).unwrap();
        let a = (1.0 + frac * (n as f64 - 2.0)).floor();
        let exact = exact_cdf(&ClosedForm::Binomial { n: n as u64, p }, a).unwrap();
        let t3 = thm3_envelope(&b, n, a).unwrap();
        let be = berry_esseen_envelope(&b, n, a).unwrap();
        let t2 = thm2_envelope(&b, 0.0, a, n).unwrap();
        prop_assert!(t3.contains(exact), "thm3 {:?} vs {}", t3, exact);
        prop_assert!(be.contains(exact), "berry-esseen {:?} vs {}", be, exact);
        prop_assert!(t2.contains(exact), "thm2 {:?} vs {}", t2, exact);
    }

    #[test]
    fn envelopes_contain_the_gamma_cdf(n in 5usize..80, frac in 0.05f64..3.0) {
        let c = Distribution::chi_squared_1(2001, 20.0).unwrap();
        let a = frac * n as f64;
        let exact = exact_cdf(&ClosedForm::Gamma { shape: n as f64 / 2.0, scale: 2.0 }, a).unwrap();
        let t3 = thm3_envelope(&c, n, a).unwrap();
        let be = berry_esseen_envelope(&c, n, a).unwrap();
        prop_assert!(t3.contains(exact), "thm3 {:?} vs {}", t3, exact);
        prop_assert!(be.contains(exact), "berry-esseen {:?} vs {}", be, exact);
    }

    #[test]
    fn envelopes_contain_the_gaussian_cdf(n in 1usize..50, z in -4.0f64..4.0) {
        let g = Distribution::gaussian(0.0, 1.0, 2001, 20.0).unwrap();
        let a = z * (n as f64).sqrt();
        let exact = normal_cdf(z);
        for env in [thm3_envelope(&g, n, a).unwrap(), berry_esseen_envelope(&g, n, a).unwrap()] {
            prop_assert!(env.contains(exact));
        }
        prop_assert!((thm3_envelope(&g, n, a).unwrap().center - exact).abs() < 1e-9);
    }

    #[test]
    fn thm3_is_twice_berry_esseen_at_the_mean(p in 0.05f64..0.95, n in 10usize..500) {
        let b = Distribution::bernoulli(p).unwrap();
        let a = n as f64 * p;
        let t3 = thm3_envelope(&b, n, a).unwrap();
        let be = berry_esseen_envelope(&b, n, a).unwrap();
        prop_assert!((t3.radius() - 2.0 * be.radius()).abs() < 1e-12);
    }

    #[test]
    fn distributions_are_normalized_and_sorted(d in small_dist()) {
        let total: f64 = d.probs().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(d.values().windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(d.kind(), DistKind::ExactDiscrete);
    }
}

#[test]
fn thm3_beats_berry_esseen_away_from_the_mean() {
    let b = Distribution::bernoulli(0.2).unwrap();
    for a in [5.0, 8.0, 30.0, 35.0] {
        assert!(thm3_envelope(&b, 100, a).unwrap().radius() < berry_esseen_envelope(&b, 100, a).unwrap().radius());
    }
}

/// Monotonicity of the saddlepoint CDF in `a` is not guaranteed, so this only
/// reports dips instead of failing on them.
#[test]
fn saddlepoint_cdf_monotonicity_diagnostic() {
    let b = Distribution::bernoulli(0.2).unwrap();
    let xs: Vec<f64> = (1..2000).map(|i| 100.0 * i as f64 / 2000.0).collect();
    let ys: Vec<f64> = xs.iter().map(|&a| certbound_core::saddlepoint::saddlepoint_cdf(&b, 100, a).unwrap()).collect();
    let dips = ys.windows(2).filter(|w| w[1] < w[0] - 1e-12).count();
    println!("saddlepoint cdf dips over 1999 grid points: {dips}");
}
