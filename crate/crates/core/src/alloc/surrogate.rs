//! First-order surrogates of the two nonconcave pieces of the objective.
//!
//! `μ` is carried as `ln μ` everywhere; `(2π)^N` overflows any float for
//! moderate `N`.

use crate::alloc::constraints::{PowerAllocation, PowerConstraints};
use crate::error::{domain, Error, Result};
use crate::rate::objective::{tail_in_upsilon, tail_in_upsilon_slope};
use crate::rate::{GaussianObjective, SurrogateAnchor};
use crate::scalar::Real;

/// Epigraph variables and their previous-iterate anchors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurrogateState<T> {
    pub ln_mu: T,
    pub upsilon: T,
    pub ln_mu_prev: T,
    pub upsilon_prev: T,
    pub t: usize,
}

impl<T: Real> SurrogateState<T> {
    /// State with both variables and anchors at their tight values for `amplitudes`.
    pub fn anchored(objective: &GaussianObjective<T>, amplitudes: &[T], t: usize) -> Self {
        let ln_mu = objective.ln_mu_bound(amplitudes, None);
        let upsilon = objective.upsilon_bound(amplitudes, None);
        Self {
            ln_mu,
            upsilon,
            ln_mu_prev: ln_mu,
            upsilon_prev: upsilon,
            t,
        }
    }

    pub fn anchor(&self) -> SurrogateAnchor<T> {
        SurrogateAnchor {
            ln_mu: self.ln_mu_prev,
            upsilon: self.upsilon_prev,
        }
    }
}

/// `-½ ln μ_p - N/2 - (μ - μ_p)/(2μ_p)` for `count = N` patterns, arguments as logarithms.
pub fn surrogate_phi<T: Real>(ln_mu: T, ln_mu_prev: T, count: usize) -> Result<T> {
    if !ln_mu.is_finite() || !ln_mu_prev.is_finite() {
        return Err(domain("μ and its anchor must be positive and finite"));
    }
    let half = T::lit(0.5);
    let n = T::from_count(count as u64);
    Ok(-half * ln_mu_prev - half * n - half * (ln_mu - ln_mu_prev).exp_m1())
}

/// `h(υ) = -(N/2) √π ln υ / √υ`.
pub fn h_function<T: Real>(upsilon: T, count: usize) -> Result<T> {
    if !(upsilon > T::zero()) {
        return Err(domain(format!("υ = {upsilon} must be positive")));
    }
    Ok(tail_in_upsilon(count, upsilon))
}

/// Tangent of [`h_function`] at `upsilon_prev`, evaluated at `upsilon`.
pub fn surrogate_h<T: Real>(upsilon: T, upsilon_prev: T, count: usize) -> Result<T> {
    if !(upsilon_prev > T::zero()) || !(upsilon > T::zero()) {
        return Err(domain("υ and its anchor must be positive"));
    }
    Ok(tail_in_upsilon(count, upsilon_prev) + tail_in_upsilon_slope(count, upsilon_prev) * (upsilon - upsilon_prev))
}

/// Surrogate objective at `alloc` with epigraph values and anchors from `state`, bits.
pub fn surrogate_objective<T: Real>(
    alloc: &PowerAllocation<T>,
    state: &SurrogateState<T>,
    objective: &GaussianObjective<T>,
    constraints: &PowerConstraints<T>,
) -> Result<T> {
    constraints.check(alloc, T::lit(1e-9))?;
    let amps = alloc.amplitudes();
    if amps.len() != objective.users() {
        return Err(Error::Dimension {
            expected: objective.users(),
            got: amps.len(),
        });
    }
    let slack = T::lit(1e-9);
    let ln_mu_min = objective.ln_mu_bound(&amps, None);
    let upsilon_min = objective.upsilon_bound(&amps, None);
    if state.ln_mu < ln_mu_min - slack * ln_mu_min.abs().max(T::one())
        || state.upsilon < upsilon_min * (T::one() - slack)
    {
        return Err(Error::Infeasible("epigraph variables below their bounds".into()));
    }
    Ok(objective.surrogate(&amps, state.ln_mu, state.upsilon, &state.anchor(), None))
}
