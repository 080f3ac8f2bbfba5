use noma_oqc::alloc::PowerAllocation;
use noma_oqc::coherent::{DetectionConfig, UserSignal};
use noma_oqc::poisson::{pmf, truncation_bound};
use noma_oqc::rate::{bounds_and_asymptotic, exact_sum_rate, GaussianObjective, SurrogateAnchor};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_rate_within_user_count(amps in prop::collection::vec(0.0f64..6.0, 1..=4), eta in 0.0f64..=1.0, n_b in 0.0f64..8.0) {
        let det = DetectionConfig::ideal(eta, n_b).unwrap();
        let r = exact_sum_rate(&UserSignal::from_amplitudes(&amps).unwrap(), &det, 1e-12).unwrap();
        prop_assert!(r >= 0.0 && r <= amps.len() as f64);
    }

    #[test]
    fn bounds_ordered_on_oracle_domain(amps in prop::collection::vec(0.0f64..5.0, 1..=3), eta in 0.5f64..=1.0, n_b in 0.5f64..5.0) {
        let det = DetectionConfig::ideal(eta, n_b).unwrap();
        let r = bounds_and_asymptotic(&UserSignal::from_amplitudes(&amps).unwrap(), &det).unwrap();
        prop_assert!(r.strictly_ordered(), "{:?}", r);
    }

    #[test]
    fn truncated_mass_within_tolerance(lambda in 0.01f64..400.0) {
        let n = truncation_bound(lambda, 1e-12).unwrap();
        let mass: f64 = (0..=n).map(|y| pmf(lambda, y)).sum();
        prop_assert!(1.0 - mass <= 1e-12 + 1e-13 * n as f64);
    }

    #[test]
    fn surrogate_tight_at_anchor(amps in prop::collection::vec(0.0f64..4.0, 1..=4), n_b in 0.2f64..6.0) {
        let det = DetectionConfig::ideal(0.9, n_b).unwrap();
        let obj = GaussianObjective::full(amps.len(), &det).unwrap();
        let anchor = SurrogateAnchor { ln_mu: obj.ln_mu_bound(&amps, None), upsilon: obj.upsilon_bound(&amps, None) };
        let s = obj.surrogate(&amps, anchor.ln_mu, anchor.upsilon, &anchor, None);
        let v = obj.value(&amps).unwrap();
        prop_assert!((s - v).abs() <= 1e-11 * v.abs().max(1.0));
    }

    #[test]
    fn allocation_round_trip(powers in prop::collection::vec(0.0f64..100.0, 1..=8)) {
        let a = PowerAllocation::new(powers.clone()).unwrap();
        let b = PowerAllocation::from_amplitudes(&a.amplitudes()).unwrap();
        for (x, y) in powers.iter().zip(b.powers()) {
            prop_assert!((x - y).abs() <= 1e-12 * x.max(1.0));
        }
    }
}
