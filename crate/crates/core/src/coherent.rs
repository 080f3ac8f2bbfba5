//! Coherent-state signalling: symbol configurations, superposed received
//! amplitudes and photon-counting detection statistics.
//!
//! After the Kennedy displacement a user sending `-1` contributes vacuum and a
//! user sending `+1` contributes its received on-amplitude `φ_k`, so every
//! configuration is described by the subset of users that are "on".
//! Configurations are indexed lexicographically with user 1 as the most
//! significant bit: index `i` (1-based) has code `i - 1`, and user `k` is on
//! when bit `K - k` of the code is set. Index 1 is the all-off configuration.

use crate::error::{domain, Error, Result};
use crate::poisson;
use crate::scalar::Real;

/// Largest user count for which configurations are enumerated (2^K codes in a `u64`).
pub const MAX_USERS: usize = 63;

/// BPSK symbol per user, each entry `-1` or `+1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymbolConfig {
    bits: Vec<i8>,
}

impl SymbolConfig {
    pub fn new(bits: Vec<i8>) -> Result<Self> {
        if bits.is_empty() || bits.len() > MAX_USERS {
            return Err(domain(format!(
                "configuration length {} outside 1..={MAX_USERS}",
                bits.len()
            )));
        }
        if let Some(b) = bits.iter().find(|&&b| b != 1 && b != -1) {
            return Err(domain(format!("symbol {b} is not -1 or +1")));
        }
        Ok(Self { bits })
    }

    /// Configuration with 1-based lexicographic `index` among the `2^users` configurations.
    pub fn from_index(index: u64, users: usize) -> Result<Self> {
        if users == 0 || users > MAX_USERS {
            return Err(domain(format!("user count {users} outside 1..={MAX_USERS}")));
        }
        if index == 0 || index > 1u64 << users {
            return Err(domain(format!("index {index} outside 1..=2^{users}")));
        }
        Ok(Self::from_code(index - 1, users))
    }

    pub(crate) fn from_code(code: u64, users: usize) -> Self {
        let bits = (0..users)
            .map(|k| if user_on(code, k, users) { 1 } else { -1 })
            .collect();
        Self { bits }
    }

    /// 1-based lexicographic index.
    pub fn index(&self) -> u64 {
        self.code() + 1
    }

    /// Bit pattern with user 1 as the most significant bit.
    pub fn code(&self) -> u64 {
        self.bits.iter().fold(0u64, |acc, &b| (acc << 1) | u64::from(b == 1))
    }

    pub fn bits(&self) -> &[i8] {
        &self.bits
    }

    pub fn users(&self) -> usize {
        self.bits.len()
    }
}

/// Whether user `k` (0-based) is on in configuration `code` of `users` users.
#[inline]
pub fn user_on(code: u64, k: usize, users: usize) -> bool {
    (code >> (users - 1 - k)) & 1 == 1
}

/// All `2^users` configurations in index order.
pub fn configurations(users: usize) -> Result<impl Iterator<Item = SymbolConfig>> {
    if users == 0 || users > MAX_USERS {
        return Err(domain(format!("user count {users} outside 1..={MAX_USERS}")));
    }
    Ok((0..1u64 << users).map(move |c| SymbolConfig::from_code(c, users)))
}

/// Received signal of one user.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UserSignal<T> {
    amplitude_on: T,
}

impl<T: Real> UserSignal<T> {
    pub fn new(amplitude_on: T) -> Result<Self> {
        if !(amplitude_on >= T::zero()) || !amplitude_on.is_finite() {
            return Err(domain(format!(
                "amplitude {amplitude_on} must be finite and nonnegative"
            )));
        }
        Ok(Self { amplitude_on })
    }

    pub fn from_amplitudes(amplitudes: &[T]) -> Result<Vec<Self>> {
        amplitudes.iter().map(|&a| Self::new(a)).collect()
    }

    pub fn amplitude_on(&self) -> T {
        self.amplitude_on
    }

    pub fn amplitude_off(&self) -> T {
        T::zero()
    }
}

pub(crate) fn amplitudes_of<T: Real>(signals: &[UserSignal<T>]) -> Vec<T> {
    signals.iter().map(|s| s.amplitude_on).collect()
}

/// Sum of on-amplitudes over the users that send `+1` in `config`.
pub fn superposed_amplitude<T: Real>(config: &SymbolConfig, signals: &[UserSignal<T>]) -> Result<T> {
    if config.users() != signals.len() {
        return Err(Error::Dimension {
            expected: config.users(),
            got: signals.len(),
        });
    }
    Ok(config
        .bits()
        .iter()
        .zip(signals)
        .filter(|(&b, _)| b == 1)
        .map(|(_, s)| s.amplitude_on)
        .fold(T::zero(), |a, b| a + b))
}

/// Superposed amplitudes `Φ_i` of all `2^K` configurations in index order.
pub fn superposed_amplitudes<T: Real>(amplitudes: &[T]) -> Vec<T> {
    let users = amplitudes.len();
    let n = 1usize << users;
    let mut out = vec![T::zero(); n];
    for code in 1..n {
        let low = code.trailing_zeros() as usize;
        // lowest set bit belongs to user K - 1 - low
        out[code] = out[code & (code - 1)] + amplitudes[users - 1 - low];
    }
    out
}

/// Photon-counting receiver model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ReceiverVariant {
    /// Ideal photon-number-resolving detector.
    IdealPnrd,
    /// Resolves counts up to `max_count`; larger counts read as `max_count`.
    FinitePnrd { max_count: u32 },
    /// Click/no-click detection.
    OnOffKennedy,
}

impl ReceiverVariant {
    pub fn label(&self) -> String {
        match self {
            Self::IdealPnrd => "ideal_pnrd".to_string(),
            Self::FinitePnrd { max_count } => format!("finite_pnrd_{max_count}"),
            Self::OnOffKennedy => "on_off_kennedy".to_string(),
        }
    }
}

/// Lossy channel transmittance, background noise and receiver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectionConfig<T> {
    eta: T,
    n_b: T,
    receiver: ReceiverVariant,
}

impl<T: Real> DetectionConfig<T> {
    pub fn new(eta: T, n_b: T, receiver: ReceiverVariant) -> Result<Self> {
        if !(eta >= T::zero() && eta <= T::one()) {
            return Err(domain(format!("transmittance {eta} outside [0, 1]")));
        }
        if !(n_b >= T::zero()) || !n_b.is_finite() {
            return Err(domain(format!("background noise {n_b} must be finite and nonnegative")));
        }
        if let ReceiverVariant::FinitePnrd { max_count } = receiver {
            if max_count == 0 {
                return Err(domain("finite PNRD needs a maximum count of at least 1"));
            }
        }
        Ok(Self { eta, n_b, receiver })
    }

    pub fn ideal(eta: T, n_b: T) -> Result<Self> {
        Self::new(eta, n_b, ReceiverVariant::IdealPnrd)
    }

    pub fn eta(&self) -> T {
        self.eta
    }

    pub fn n_b(&self) -> T {
        self.n_b
    }

    pub fn receiver(&self) -> ReceiverVariant {
        self.receiver
    }

    pub fn with_receiver(self, receiver: ReceiverVariant) -> Result<Self> {
        Self::new(self.eta, self.n_b, receiver)
    }

    pub fn with_noise(self, n_b: T) -> Result<Self> {
        Self::new(self.eta, n_b, self.receiver)
    }

    /// Poisson rate `η|Φ|² + n_b`.
    pub fn mean_count(&self, signal_photons: T) -> T {
        self.eta * signal_photons + self.n_b
    }

    /// Number of detector outcomes needed so that every rate up to
    /// `max_lambda` loses at most `tail_eps` of mass.
    pub fn outcome_count(&self, max_lambda: T, tail_eps: T) -> Result<u64> {
        Ok(match self.receiver {
            ReceiverVariant::IdealPnrd => poisson::truncation_bound(max_lambda, tail_eps)? + 1,
            ReceiverVariant::FinitePnrd { max_count } => u64::from(max_count) + 1,
            ReceiverVariant::OnOffKennedy => 2,
        })
    }

    /// Natural log of the outcome probability at rate `lambda`.
    pub fn ln_outcome_probability(&self, lambda: T, y: u64) -> T {
        match self.receiver {
            ReceiverVariant::IdealPnrd => poisson::ln_pmf(lambda, y),
            ReceiverVariant::FinitePnrd { max_count } => {
                let n = u64::from(max_count);
                if y < n {
                    poisson::ln_pmf(lambda, y)
                } else if y == n {
                    poisson::ln_upper_tail(lambda, n)
                } else {
                    T::neg_infinity()
                }
            }
            ReceiverVariant::OnOffKennedy => match y {
                0 => -lambda,
                1 => (-(-lambda).exp_m1()).ln(),
                _ => T::neg_infinity(),
            },
        }
    }
}

fn check_photons<T: Real>(mean_signal_photons: T) -> Result<()> {
    if !(mean_signal_photons >= T::zero()) || !mean_signal_photons.is_finite() {
        return Err(domain(format!(
            "mean signal photon number {mean_signal_photons} must be finite and nonnegative"
        )));
    }
    Ok(())
}

/// Probability of detector outcome `y` given `|Φ|² = mean_signal_photons`.
pub fn detection_pmf<T: Real>(mean_signal_photons: T, det: &DetectionConfig<T>, y: u64) -> Result<T> {
    Ok(detection_ln_pmf(mean_signal_photons, det, y)?.exp())
}

pub fn detection_ln_pmf<T: Real>(mean_signal_photons: T, det: &DetectionConfig<T>, y: u64) -> Result<T> {
    check_photons(mean_signal_photons)?;
    Ok(det.ln_outcome_probability(det.mean_count(mean_signal_photons), y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn superposition_examples() {
        let s = UserSignal::from_amplitudes(&[2.0f64, 3.0]).unwrap();
        let all_off = SymbolConfig::new(vec![-1, -1]).unwrap();
        assert_eq!(superposed_amplitude(&all_off, &s).unwrap(), 0.0);
        let both = SymbolConfig::new(vec![1, 1]).unwrap();
        assert_eq!(superposed_amplitude(&both, &s).unwrap(), 5.0);
        let s3 = UserSignal::from_amplitudes(&[1.0f64, 1.0, 1.0]).unwrap();
        let c = SymbolConfig::new(vec![1, -1, 1]).unwrap();
        assert_eq!(superposed_amplitude(&c, &s3).unwrap(), 2.0);
    }

    #[test]
    fn superposition_length_mismatch() {
        let s = UserSignal::from_amplitudes(&[1.0f64]).unwrap();
        let c = SymbolConfig::new(vec![1, 1]).unwrap();
        assert_eq!(
            superposed_amplitude(&c, &s),
            Err(Error::Dimension { expected: 2, got: 1 })
        );
    }

    #[test]
    fn enumeration_is_lexicographic_and_complete() {
        let all: Vec<_> = configurations(3).unwrap().collect();
        assert_eq!(all.len(), 8);
        assert_eq!(all[0].bits(), &[-1, -1, -1]);
        assert_eq!(all[1].bits(), &[-1, -1, 1]);
        assert_eq!(all[4].bits(), &[1, -1, -1]);
        assert_eq!(all[7].bits(), &[1, 1, 1]);
        for (i, c) in all.iter().enumerate() {
            assert_eq!(c.index(), i as u64 + 1);
            assert_eq!(SymbolConfig::from_index(c.index(), 3).unwrap(), *c);
        }
        let distinct: std::collections::HashSet<_> = all.iter().collect();
        assert_eq!(distinct.len(), 8);
    }

    #[test]
    fn fast_enumeration_matches_direct_sum() {
        let amps = [0.7f64, 1.9, 0.05, 3.3];
        let signals = UserSignal::from_amplitudes(&amps).unwrap();
        let fast = superposed_amplitudes(&amps);
        for (c, f) in configurations(4).unwrap().zip(fast) {
            assert_eq!(superposed_amplitude(&c, &signals).unwrap(), f);
        }
    }

    #[test]
    fn invalid_inputs() {
        assert!(SymbolConfig::new(vec![1, 0]).is_err());
        assert!(UserSignal::new(-1.0f64).is_err());
        assert!(UserSignal::new(f64::NAN).is_err());
        assert!(DetectionConfig::ideal(1.2f64, 1.0).is_err());
        assert!(DetectionConfig::ideal(0.5f64, -1.0).is_err());
        assert!(DetectionConfig::new(0.5f64, 1.0, ReceiverVariant::FinitePnrd { max_count: 0 }).is_err());
        let det = DetectionConfig::ideal(0.9f64, 1.7).unwrap();
        assert!(detection_pmf(-1.0, &det, 0).is_err());
    }

    #[test]
    fn vacuum_pmf_at_zero() {
        let det = DetectionConfig::ideal(0.9f64, 1.7).unwrap();
        let p = detection_pmf(0.0, &det, 0).unwrap();
        assert!((p - 0.182_683_524_052_734_6).abs() < 1e-15);
        let dark = DetectionConfig::ideal(0.9f64, 0.0).unwrap();
        assert_eq!(detection_pmf(0.0, &dark, 0).unwrap(), 1.0);
        assert_eq!(detection_pmf(0.0, &dark, 3).unwrap(), 0.0);
    }

    #[test]
    fn zero_transmittance_ignores_signal() {
        let det = DetectionConfig::ideal(0.0f64, 1.7).unwrap();
        for y in 0..20 {
            assert_eq!(
                detection_pmf(0.0, &det, y).unwrap(),
                detection_pmf(37.5, &det, y).unwrap()
            );
        }
    }
}
