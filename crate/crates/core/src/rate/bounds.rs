//! Gaussian-approximation lower/upper bounds and their midpoint.

use crate::coherent::{amplitudes_of, DetectionConfig, UserSignal};
use crate::error::{domain, Result};
use crate::poisson::DEFAULT_TAIL_EPS;
use crate::rate::exact::{check_users, exact_sum_rate_of};
use crate::rate::objective::{log_spread, positional_ln_weights, tail_term, GaussianObjective};
use crate::scalar::Real;

/// Exact rate, Gaussian bounds and their internals for one instance.
#[derive(Clone, Debug, PartialEq)]
pub struct RateBreakdown<T> {
    pub exact: T,
    pub lower_ga: T,
    pub upper_ga: T,
    pub asymptotic: T,
    pub omega_low: Vec<T>,
    pub omega_up: Vec<T>,
    pub xi_low: T,
    pub xi_up: T,
    /// The closed form labelled "lower" evaluated above the one labelled "upper".
    pub bounds_swapped: bool,
}

impl<T: Real> RateBreakdown<T> {
    pub fn strictly_ordered(&self) -> bool {
        self.lower_ga < self.asymptotic && self.asymptotic < self.upper_ga
    }
}

/// Normal density with mean and variance `λ = η|Φ|² + n_b`, at `y`.
pub fn gaussian_pmf<T: Real>(mean_signal_photons: T, det: &DetectionConfig<T>, y: T) -> Result<T> {
    let lambda = det.mean_count(mean_signal_photons);
    if !(lambda > T::zero()) || !lambda.is_finite() {
        return Err(domain(format!(
            "Gaussian approximation needs a positive rate, got {lambda}"
        )));
    }
    let z = y - lambda;
    Ok((-z * z / (T::lit(2.0) * lambda)).exp() / (T::TAU() * lambda).sqrt())
}

/// `(ω_low, ω_up)` over all configurations.
pub fn omega_terms<T: Real>(signals: &[UserSignal<T>], det: &DetectionConfig<T>) -> Result<(Vec<T>, Vec<T>)> {
    check_users(signals.len())?;
    let obj = GaussianObjective::full(signals.len(), det)?;
    let t = obj.terms(&amplitudes_of(signals))?;
    Ok((t.omega_low, t.omega_up))
}

/// `ln{√(π/2) Σ_i Σ_j C(N,i) C(N,j) e^{ω_i - ω_j}} + ξ + tail`, weights by position.
pub fn f_bound<T: Real>(omegas: &[T], xi: T, tail_term: T) -> Result<T> {
    if omegas.is_empty() {
        return Err(domain("empty ω vector"));
    }
    if omegas.iter().any(|w| !w.is_finite()) {
        return Err(domain("non-finite ω entry"));
    }
    Ok(log_spread(&positional_ln_weights::<T>(omegas.len()), omegas) + xi + tail_term)
}

/// Tail term of the lower bound, `-(N/2) ln(2π n_b) / √(2 n_b)`.
pub fn lower_tail_term<T: Real>(users: usize, n_b: T) -> T {
    tail_term(1usize << users, n_b)
}

/// Tail term of the upper bound, with `n_b` replaced by `η(Σφ_k)² + n_b`.
pub fn upper_tail_term<T: Real>(users: usize, det: &DetectionConfig<T>, amplitude_sum: T) -> T {
    tail_term(1usize << users, det.eta() * amplitude_sum * amplitude_sum + det.n_b())
}

/// `φ(Φ) = -½[N ln 2π + ln n_b + Σ_i ln(η|Φ_i|² + n_b)] - N/2`.
pub fn phi_closed_form<T: Real>(signals: &[UserSignal<T>], det: &DetectionConfig<T>) -> Result<T> {
    check_users(signals.len())?;
    let obj = GaussianObjective::full(signals.len(), det)?;
    Ok(obj.terms(&amplitudes_of(signals))?.phi)
}

/// Common large-noise limit of both bounds, `K + [φ(Φ) - f(0)]/(N ln 2)`,
/// with `f(0)` taken at the lower-bound tail term.
pub fn asymptotic_limit<T: Real>(signals: &[UserSignal<T>], det: &DetectionConfig<T>) -> Result<T> {
    check_users(signals.len())?;
    let users = signals.len();
    let obj = GaussianObjective::full(users, det)?;
    let terms = obj.terms(&amplitudes_of(signals))?;
    let n = 1usize << users;
    let f0 = f_bound(&vec![T::zero(); n], obj.patterns().xi(), terms.tail_low)?;
    let c = T::one() / (T::from_count(n as u64) * T::LN_2());
    Ok(T::from_count(users as u64) + c * (terms.phi - f0))
}

/// Exact sum-rate together with the Gaussian bounds and their midpoint.
///
/// The two closed forms are reported as `min`/`max`; `bounds_swapped`
/// records when the expression labelled "lower" came out on top.
pub fn bounds_and_asymptotic<T: Real>(signals: &[UserSignal<T>], det: &DetectionConfig<T>) -> Result<RateBreakdown<T>> {
    check_users(signals.len())?;
    let amps = amplitudes_of(signals);
    let obj = GaussianObjective::full(signals.len(), det)?;
    let t = obj.terms(&amps)?;
    let exact = exact_sum_rate_of(&amps, det, T::lit(DEFAULT_TAIL_EPS))?;
    let xi = obj.patterns().xi();
    Ok(RateBreakdown {
        exact,
        lower_ga: t.lower_closed.min(t.upper_closed),
        upper_ga: t.lower_closed.max(t.upper_closed),
        asymptotic: t.midpoint(),
        omega_low: t.omega_low,
        omega_up: t.omega_up,
        xi_low: xi,
        xi_up: xi,
        bounds_swapped: t.lower_closed > t.upper_closed,
    })
}
