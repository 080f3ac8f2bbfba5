//! Independent entropy-difference evaluation of the sum-rate, used to
//! cross-check [`crate::rate::exact_sum_rate`]. Shares no pmf code with it:
//! probabilities come from `exp(-λ + y ln λ - ln Γ(y+1))` in `f64`.

use statrs::function::gamma::ln_gamma;

use crate::coherent::{amplitudes_of, DetectionConfig, ReceiverVariant, UserSignal};
use crate::error::{domain, Result};
use crate::rate::exact::check_users;
use crate::scalar::Real;

fn poisson(lambda: f64, y: u64) -> f64 {
    if lambda == 0.0 {
        return if y == 0 { 1.0 } else { 0.0 };
    }
    let yf = y as f64;
    (-lambda + yf * lambda.ln() - ln_gamma(yf + 1.0)).exp()
}

fn ideal_support(lambda_max: f64) -> u64 {
    (lambda_max + 20.0 * lambda_max.sqrt() + 40.0).ceil() as u64
}

/// Outcome distribution of one configuration.
fn outcome_distribution(lambda: f64, receiver: ReceiverVariant, lambda_max: f64) -> Vec<f64> {
    match receiver {
        ReceiverVariant::IdealPnrd => (0..=ideal_support(lambda_max)).map(|y| poisson(lambda, y)).collect(),
        ReceiverVariant::FinitePnrd { max_count } => {
            let n = u64::from(max_count);
            let mut out: Vec<f64> = (0..n).map(|y| poisson(lambda, y)).collect();
            let tail: f64 = (n..=ideal_support(lambda_max).max(n)).map(|y| poisson(lambda, y)).sum();
            out.push(tail);
            out
        }
        ReceiverVariant::OnOffKennedy => vec![(-lambda).exp(), -(-lambda).exp_m1()],
    }
}

fn entropy_nats(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum()
}

/// `H(Y) - H(Y | X_1..X_K)` with equiprobable configurations, bits.
pub fn entropy_oracle_sum_rate<T: Real>(signals: &[UserSignal<T>], det: &DetectionConfig<T>, tail_eps: T) -> Result<T> {
    check_users(signals.len())?;
    if !(tail_eps > T::zero() && tail_eps < T::one()) {
        return Err(domain(format!("tail mass {tail_eps} outside (0, 1)")));
    }
    let users = signals.len();
    let amps: Vec<f64> = amplitudes_of(signals).iter().map(|a| a.as_f64()).collect();
    let eta = det.eta().as_f64();
    let n_b = det.n_b().as_f64();
    let lambdas: Vec<f64> = (0..1u64 << users)
        .map(|code| {
            let phi: f64 = (0..users)
                .filter(|&k| (code >> (users - 1 - k)) & 1 == 1)
                .map(|k| amps[k])
                .sum();
            eta * phi * phi + n_b
        })
        .collect();
    let lambda_max = lambdas.iter().copied().fold(0.0, f64::max);
    let dists: Vec<Vec<f64>> = lambdas
        .iter()
        .map(|&l| outcome_distribution(l, det.receiver(), lambda_max))
        .collect();
    let n = dists.len() as f64;
    let len = dists[0].len();
    let marginal: Vec<f64> = (0..len).map(|y| dists.iter().map(|d| d[y]).sum::<f64>() / n).collect();
    let h_y = entropy_nats(&marginal);
    let h_y_given_x = dists.iter().map(|d| entropy_nats(d)).sum::<f64>() / n;
    Ok(T::lit((h_y - h_y_given_x) / std::f64::consts::LN_2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dark_vacuum_is_zero() {
        let det = DetectionConfig::ideal(0.9f64, 0.0).unwrap();
        let s = UserSignal::from_amplitudes(&[0.0]).unwrap();
        assert_eq!(entropy_oracle_sum_rate(&s, &det, 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn near_disjoint_supports_give_one_bit() {
        let det = DetectionConfig::ideal(1.0f64, 0.5).unwrap();
        let s = UserSignal::from_amplitudes(&[6.0]).unwrap();
        let r = entropy_oracle_sum_rate(&s, &det, 1e-12).unwrap();
        assert!((r - 1.0).abs() < 1e-3, "{r}");
    }
}
