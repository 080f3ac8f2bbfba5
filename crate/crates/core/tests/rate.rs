#![allow(clippy::excessive_precision)]

use noma_oqc::coherent::{DetectionConfig, ReceiverVariant, UserSignal};
use noma_oqc::poisson::truncation_bound;
use noma_oqc::rate::calibration::{calibrate_xi, mixture_entropy_integral};
use noma_oqc::rate::objective::{log_spread, positional_ln_weights};
use noma_oqc::rate::{
    asymptotic_limit, bounds_and_asymptotic, entropy_oracle_sum_rate, exact_sum_rate, holevo_binary, holevo_capacity,
    reference_capacities,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn signals(amps: &[f64]) -> Vec<UserSignal<f64>> {
    UserSignal::from_amplitudes(amps).unwrap()
}

// 40-digit direct summation over outcomes
#[test]
fn exact_rate_matches_high_precision_sums() {
    let cases: [(&[f64], f64, f64, ReceiverVariant, f64); 6] = [
        (&[1.5], 1.0, 0.5, ReceiverVariant::IdealPnrd, 0.45197482812736382886),
        (
            &[2.0, 1.0],
            0.9,
            1.7,
            ReceiverVariant::IdealPnrd,
            0.75269087208662539448,
        ),
        (
            &[1.0, 0.5, 2.0],
            0.7,
            3.0,
            ReceiverVariant::IdealPnrd,
            0.59548819402918984927,
        ),
        (
            &[2.0, 1.0],
            0.9,
            1.7,
            ReceiverVariant::FinitePnrd { max_count: 25 },
            0.75269087207148319285,
        ),
        (
            &[2.0, 1.0, 0.5],
            0.9,
            1.7,
            ReceiverVariant::FinitePnrd { max_count: 3 },
            0.36363907233865979686,
        ),
        (
            &[2.0, 1.0],
            0.9,
            1.7,
            ReceiverVariant::OnOffKennedy,
            0.070455493615699143969,
        ),
    ];
    for (amps, eta, n_b, rx, want) in cases {
        let det = DetectionConfig::new(eta, n_b, rx).unwrap();
        let got = exact_sum_rate(&signals(amps), &det, 1e-14).unwrap();
        assert!((got - want).abs() < 1e-11, "{amps:?} {rx:?}: {got} vs {want}");
        let oracle = entropy_oracle_sum_rate(&signals(amps), &det, 1e-14).unwrap();
        assert!(
            (oracle - want).abs() < 1e-11,
            "oracle {amps:?} {rx:?}: {oracle} vs {want}"
        );
    }
}

#[test]
fn truncation_bound_matches_high_precision_tails() {
    for (lambda, eps, want) in [(1.7, 1e-12, 17), (30.0, 1e-12, 76), (500.0, 1e-9, 640), (0.01, 1e-6, 2)] {
        assert_eq!(truncation_bound(lambda, eps).unwrap(), want, "λ = {lambda}");
    }
}

#[test]
fn random_instances_agree_with_entropy_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let k = rng.gen_range(1..=3);
        let amps: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..5.0)).collect();
        let det = DetectionConfig::ideal(rng.gen_range(0.5..1.0), rng.gen_range(0.5..5.0)).unwrap();
        let a = exact_sum_rate(&signals(&amps), &det, 1e-13).unwrap();
        let b = entropy_oracle_sum_rate(&signals(&amps), &det, 1e-13).unwrap();
        assert!((a - b).abs() <= 1e-9, "{amps:?}: {a} vs {b}");
        let r = bounds_and_asymptotic(&signals(&amps), &det).unwrap();
        assert!(r.strictly_ordered(), "{amps:?}: {r:?}");
        let mid = 0.5 * (r.lower_ga + r.upper_ga);
        assert!((r.asymptotic - mid).abs() <= 1e-12 * mid.abs().max(1.0));
    }
}

#[test]
fn bound_gap_closes_with_noise() {
    let amps = [2.0, 1.0];
    let mut last = f64::INFINITY;
    for n_b in [1.7, 10.0, 100.0, 1000.0] {
        let det = DetectionConfig::ideal(0.9, n_b).unwrap();
        let r = bounds_and_asymptotic(&signals(&amps), &det).unwrap();
        let gap = r.upper_ga - r.lower_ga;
        assert!(gap < last, "n_b = {n_b}: gap {gap} after {last}");
        last = gap;
        if n_b == 1000.0 {
            let lim = asymptotic_limit(&signals(&amps), &det).unwrap();
            assert!((r.lower_ga - lim).abs() < 1e-2 && (r.upper_ga - lim).abs() < 1e-2);
        }
    }
}

#[test]
fn calibrated_spread_tracks_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for users in 2..=6 {
        let n = 1usize << users;
        let (xi, _) = calibrate_xi::<f64>(users, None).unwrap();
        let w = positional_ln_weights::<f64>(n);
        let zero = vec![0.0; n];
        assert_eq!(log_spread(&w, &zero) + xi, mixture_entropy_integral(&zero).unwrap());
        for _ in 0..50 {
            let omega: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.1..=0.1)).collect();
            let g = mixture_entropy_integral(&omega).unwrap();
            let approx = log_spread(&w, &omega) + xi;
            assert!(((approx - g) / g).abs() <= 1e-2, "K = {users}: {approx} vs {g}");
        }
    }
}

#[test]
fn capacity_references() {
    for (n, g, binary) in [
        (0.5f64, 1.3774437510817342722, 0.90004559152353509567),
        (2.0, 2.7548875021634685444, 0.99975800133385007657),
        (100.0, 8.0937407804587988803, 1.0),
    ] {
        assert!(
            (holevo_capacity(n).unwrap() - g).abs() < 1e-13,
            "{n}: {}",
            holevo_capacity(n).unwrap() - g
        );
        assert!((holevo_binary(n).unwrap() - binary).abs() < 1e-13);
    }
    let det = DetectionConfig::ideal(1.0f64, 0.0).unwrap();
    let (shannon, awgn) = reference_capacities(3.0f64, &det, 1.0).unwrap();
    assert!((shannon - 2.0).abs() < 1e-15 && (awgn - 1.0).abs() < 1e-15);
}

#[test]
fn exact_rate_is_invariant_under_user_permutation() {
    let det = DetectionConfig::ideal(0.8, 2.0).unwrap();
    let a = exact_sum_rate(&signals(&[0.4, 1.9, 3.1]), &det, 1e-13).unwrap();
    let b = exact_sum_rate(&signals(&[3.1, 0.4, 1.9]), &det, 1e-13).unwrap();
    assert!((a - b).abs() < 1e-13);
}

#[test]
fn single_precision_smoke() {
    let det = DetectionConfig::ideal(0.9f32, 1.7).unwrap();
    let s = UserSignal::from_amplitudes(&[2.0f32, 1.0]).unwrap();
    let r = exact_sum_rate(&s, &det, 1e-6).unwrap();
    assert!((r - 0.752_690_9).abs() < 1e-4, "{r}");
    let b = bounds_and_asymptotic(&s, &det).unwrap();
    assert!(b.lower_ga <= b.upper_ga);
}
