use crate::coherent::{amplitudes_of, superposed_amplitudes, DetectionConfig, UserSignal};
use crate::error::{domain, Error, Result};
use crate::rate::objective::ENUMERATION_CAP;
use crate::scalar::{LogSumExp, Real};

pub(crate) fn check_users(users: usize) -> Result<()> {
    if users == 0 {
        return Err(domain("at least one user is required"));
    }
    if users > ENUMERATION_CAP {
        return Err(Error::Capacity {
            what: "user count",
            requested: users as u64,
            limit: ENUMERATION_CAP as u64,
            advice: "use the importance-sampled estimator for larger systems",
        });
    }
    Ok(())
}

/// Distinct Poisson rates of the given amplitudes with their multiplicities.
pub(crate) fn rate_classes<T: Real>(
    amplitudes: impl IntoIterator<Item = T>,
    det: &DetectionConfig<T>,
) -> Vec<(T, u64)> {
    let mut lambdas: Vec<T> = amplitudes.into_iter().map(|phi| det.mean_count(phi * phi)).collect();
    lambdas.sort_by(|a, b| a.partial_cmp(b).expect("finite rates"));
    let mut classes: Vec<(T, u64)> = Vec::new();
    for l in lambdas {
        match classes.last_mut() {
            Some((v, m)) if *v == l => *m += 1,
            _ => classes.push((l, 1)),
        }
    }
    classes
}

/// Sum-rate of all users under SIC, bits, by direct summation over outcomes.
///
/// `I = (1/N) Σ_i Σ_y p_i(y) log₂(p_i(y) / ((1/N) Σ_j p_j(y)))` with `N = 2^K`
/// equiprobable configurations; the outcome sum is truncated where every
/// configuration has lost at most `tail_eps` of its mass.
pub fn exact_sum_rate<T: Real>(signals: &[UserSignal<T>], det: &DetectionConfig<T>, tail_eps: T) -> Result<T> {
    check_users(signals.len())?;
    exact_sum_rate_of(&amplitudes_of(signals), det, tail_eps)
}

pub(crate) fn exact_sum_rate_of<T: Real>(amplitudes: &[T], det: &DetectionConfig<T>, tail_eps: T) -> Result<T> {
    check_users(amplitudes.len())?;
    equiprobable_information(&superposed_amplitudes(amplitudes), det, tail_eps)
}

/// Mutual information, bits, between an equiprobable choice among the received
/// amplitudes `phis` and the detector output.
pub fn equiprobable_information<T: Real>(phis: &[T], det: &DetectionConfig<T>, tail_eps: T) -> Result<T> {
    if phis.is_empty() {
        return Err(domain("at least one amplitude is required"));
    }
    if let Some(a) = phis.iter().find(|a| !a.is_finite()) {
        return Err(domain(format!("amplitude {a} must be finite")));
    }
    let classes = rate_classes(phis.iter().copied(), det);
    if classes.len() == 1 {
        return Ok(T::zero());
    }
    let max_lambda = classes.last().map(|c| c.0).unwrap_or(T::zero());
    let outcomes = det.outcome_count(max_lambda, tail_eps)?;
    let n = T::from_count(phis.len() as u64);
    let ln_n = n.ln();
    let ln_mult: Vec<T> = classes.iter().map(|&(_, m)| T::from_count(m).ln()).collect();
    let mut lp = vec![T::zero(); classes.len()];
    let mut total = T::zero();
    for y in 0..outcomes {
        let mut mix = LogSumExp::new();
        for (d, &(lambda, _)) in classes.iter().enumerate() {
            lp[d] = det.ln_outcome_probability(lambda, y);
            mix.push(lp[d] + ln_mult[d]);
        }
        // ln of the equiprobable mixture
        let ln_mix = mix.value() - ln_n;
        for (d, &(_, m)) in classes.iter().enumerate() {
            if lp[d] == T::neg_infinity() {
                continue;
            }
            total += T::from_count(m) * lp[d].exp() * (lp[d] - ln_mix);
        }
    }
    let bits = total / (n * T::LN_2());
    Ok(bits.max(T::zero()).min(n.log2()))
}
