//! Log-domain Poisson probabilities (saddle-point form) and tail truncation.

use crate::error::{domain, Result};
use crate::scalar::{bd0, stirling_error, LogSumExp, Real};

/// Default upper-tail mass discarded when truncating outcome sums.
pub const DEFAULT_TAIL_EPS: f64 = 1e-12;

/// `ln P(Y = y)` for `Y ~ Poisson(lambda)`.
pub fn ln_pmf<T: Real>(lambda: T, y: u64) -> T {
    if lambda == T::zero() {
        return if y == 0 { T::zero() } else { T::neg_infinity() };
    }
    if y == 0 {
        return -lambda;
    }
    let yf = T::from_count(y);
    -stirling_error::<T>(y) - bd0(yf, lambda) - T::lit(0.5) * (T::TAU() * yf).ln()
}

pub fn pmf<T: Real>(lambda: T, y: u64) -> T {
    ln_pmf(lambda, y).exp()
}

/// `ln P(Y >= n)`.
pub fn ln_upper_tail<T: Real>(lambda: T, n: u64) -> T {
    if n == 0 {
        return T::zero();
    }
    if lambda == T::zero() {
        return T::neg_infinity();
    }
    // terms past the mode decay geometrically; stop once they are e^-50 below the largest seen
    let cutoff = T::lit(50.0);
    let mut acc = LogSumExp::new();
    let mut peak = T::neg_infinity();
    let mut y = n;
    loop {
        let lp = ln_pmf(lambda, y);
        acc.push(lp);
        peak = peak.max(lp);
        if T::from_count(y) > lambda && lp < peak - cutoff {
            break;
        }
        y += 1;
    }
    acc.value().min(T::zero())
}

/// Smallest `n` with `P(Y > n) <= tail_eps`.
pub fn truncation_bound<T: Real>(lambda: T, tail_eps: T) -> Result<u64> {
    if !(tail_eps > T::zero() && tail_eps < T::one()) {
        return Err(domain(format!("tail mass {tail_eps} outside (0, 1)")));
    }
    if !(lambda >= T::zero()) || !lambda.is_finite() {
        return Err(domain(format!("Poisson rate {lambda} must be finite and nonnegative")));
    }
    if lambda == T::zero() {
        return Ok(0);
    }
    // far end: geometric bound P(Y > m) <= p(m + 1) / (1 - lambda / (m + 2))
    let target = (tail_eps * T::lit(1e-10)).ln();
    let mut end = lambda.ceil().to_u64().unwrap_or(0) + 1;
    let bound = |m: u64| {
        let ratio = lambda / T::from_count(m + 2);
        ln_pmf(lambda, m + 1) - (T::one() - ratio).ln()
    };
    while bound(end) > target {
        end += 1;
    }
    let mut tail = bound(end).exp();
    let mut n = end;
    while n > 0 {
        let wider = tail + pmf(lambda, n);
        if wider > tail_eps {
            break;
        }
        tail = wider;
        n -= 1;
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rate() {
        assert_eq!(ln_pmf(0.0f64, 0), 0.0);
        assert_eq!(ln_pmf(0.0f64, 2), f64::NEG_INFINITY);
        assert_eq!(truncation_bound(0.0f64, 1e-3).unwrap(), 0);
        assert_eq!(ln_upper_tail(0.0f64, 1), f64::NEG_INFINITY);
    }

    #[test]
    fn rejects_bad_eps() {
        assert!(truncation_bound(1.0f64, 0.0).is_err());
        assert!(truncation_bound(1.0f64, 1.0).is_err());
        assert!(truncation_bound(-1.0f64, 0.5).is_err());
    }

    #[test]
    fn ln_pmf_matches_high_precision_values() {
        let cases: [(f64, u64, f64); 10] = [
            (3.7, 0, -3.7),
            (3.7, 1, -2.391_667_180_349_821_239_6),
            (3.7, 7, -3.066_831_623_514_162_977_7),
            (3.7, 28, -34.956_424_186_976_529_693),
            (0.001, 3, -22.516_025_306_174_466_157),
            (125.5, 100, -6.008_799_698_379_632_463_9),
            (125.5, 125, -3.334_759_408_408_112_128_3),
            (10000.0, 9800, -7.527_484_157_244_767_579_6),
            (10000.0, 10000, -5.524_117_052_526_094_665_4),
            (10000.0, 10500, -17.845_235_516_821_446_406),
        ];
        for (lambda, y, want) in cases {
            let got = ln_pmf(lambda, y);
            assert!(
                (got - want).abs() <= 1e-13 * want.abs().max(1.0),
                "λ={lambda} y={y}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn tail_complements_head() {
        let lambda = 12.5f64;
        for n in [1u64, 5, 12, 13, 30] {
            let head: f64 = (0..n).map(|y| pmf(lambda, y)).sum();
            let tail = ln_upper_tail(lambda, n).exp();
            assert!((head + tail - 1.0).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn monotone_in_rate() {
        let mut last = 0;
        for i in 0..200 {
            let lambda = 0.5 * i as f64;
            let b = truncation_bound(lambda, 1e-12).unwrap();
            assert!(b >= last);
            last = b;
        }
    }
}
