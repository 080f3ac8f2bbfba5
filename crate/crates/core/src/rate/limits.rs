//! Reference capacities for coherent-state links.

use crate::coherent::DetectionConfig;
use crate::error::{domain, Result};
use crate::scalar::Real;

fn binary_entropy_bits<T: Real>(p: T) -> T {
    let term = |x: T| if x > T::zero() { -x * x.log2() } else { T::zero() };
    term(p) + term(T::one() - p)
}

/// Holevo quantity of the equiprobable pair `{|α⟩, |-α⟩}`, bits.
pub fn holevo_binary<T: Real>(alpha_sq: T) -> Result<T> {
    if !(alpha_sq >= T::zero()) {
        return Err(domain(format!("|α|² = {alpha_sq} must be nonnegative")));
    }
    // mixture eigenvalues (1 ± e^{-2|α|²}) / 2
    let low = -(-T::lit(2.0) * alpha_sq).exp_m1() * T::lit(0.5);
    Ok(binary_entropy_bits(low))
}

/// Holevo capacity of a pure-loss bosonic channel delivering `n` mean photons,
/// `g(n) = (n+1) log₂(n+1) - n log₂ n`.
pub fn holevo_capacity<T: Real>(mean_photons: T) -> Result<T> {
    if !(mean_photons >= T::zero()) {
        return Err(domain(format!("mean photon number {mean_photons} must be nonnegative")));
    }
    if mean_photons == T::zero() {
        return Ok(T::zero());
    }
    let n = mean_photons;
    // log₂(n+1) + n log₂(1 + 1/n), free of cancellation
    Ok((n.ln_1p() + n * n.recip().ln_1p()) / T::LN_2())
}

/// `(SQL, Shannon-AWGN)` capacities in bits at `mean_photons` transmitted photons.
///
/// The SQL curve is the two-quadrature coherent-detection capacity
/// `log₂(1 + ηn)`; the AWGN curve is `½ log₂(1 + ηn / noise_power)`.
pub fn reference_capacities<T: Real>(mean_photons: T, det: &DetectionConfig<T>, noise_power: T) -> Result<(T, T)> {
    if !(mean_photons >= T::zero()) {
        return Err(domain(format!("mean photon number {mean_photons} must be nonnegative")));
    }
    if !(noise_power > T::zero()) {
        return Err(domain(format!("noise power {noise_power} must be positive")));
    }
    let received = det.eta() * mean_photons;
    let sql = received.ln_1p() / T::LN_2();
    let awgn = T::lit(0.5) * (received / noise_power).ln_1p() / T::LN_2();
    Ok((sql, awgn))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_holevo_values() {
        assert_eq!(holevo_binary(0.0f64).unwrap(), 0.0);
        assert!((holevo_binary(50.0f64).unwrap() - 1.0).abs() < 1e-12);
        assert!(holevo_binary(-1.0f64).is_err());
    }

    #[test]
    fn zero_power() {
        let det = DetectionConfig::ideal(0.9f64, 1.7).unwrap();
        assert_eq!(reference_capacities(0.0, &det, 1.0).unwrap(), (0.0, 0.0));
        assert_eq!(holevo_capacity(0.0f64).unwrap(), 0.0);
    }
}
