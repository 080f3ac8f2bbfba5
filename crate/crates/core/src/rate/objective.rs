//! Gaussian-approximation sum-rate objective with analytic gradients.
//!
//! The objective is evaluated over a [`PatternSet`]: either every one of the
//! `2^K` on/off patterns, or a weighted subset produced by the importance
//! sampler. Pattern `s` has superposed amplitude
//! `Φ_s = scale_s · Σ_{k on in s} φ_k` and carries the positional binomial
//! weight `C(N, s)` (1-based `s`) in the log-spread term.

use crate::coherent::{superposed_amplitudes, user_on, DetectionConfig, MAX_USERS};
use crate::error::{domain, Error, Result};
use crate::rate::calibration::xi_for_count;
use crate::scalar::{exp_relative, ln_binomial, log_sum_exp, Real};

/// Largest user count for full enumeration of the Gaussian bounds and the exact rate.
pub const ENUMERATION_CAP: usize = 14;

/// `ln C(N, i)` for `i = 1..=N`.
pub fn positional_ln_weights<T: Real>(count: usize) -> Vec<T> {
    (1..=count as u64).map(|i| ln_binomial::<T>(count as u64, i)).collect()
}

/// `ln √(π/2) + ln Σ_i w_i e^{ω_i} + ln Σ_j w_j e^{-ω_j}`.
pub fn log_spread<T: Real>(ln_weights: &[T], omegas: &[T]) -> T {
    let plus: Vec<T> = ln_weights.iter().zip(omegas).map(|(&w, &o)| w + o).collect();
    let minus: Vec<T> = ln_weights.iter().zip(omegas).map(|(&w, &o)| w - o).collect();
    T::lit(0.5) * T::FRAC_PI_2().ln() + log_sum_exp(&plus) + log_sum_exp(&minus)
}

/// [`log_spread`] plus `∂/∂ω_j` written into `grad`.
fn log_spread_with_gradient<T: Real>(ln_weights: &[T], omegas: &[T], grad: &mut [T]) -> T {
    let plus: Vec<T> = ln_weights.iter().zip(omegas).map(|(&w, &o)| w + o).collect();
    let minus: Vec<T> = ln_weights.iter().zip(omegas).map(|(&w, &o)| w - o).collect();
    let lp = log_sum_exp(&plus);
    let lm = log_sum_exp(&minus);
    for ((g, &p), &m) in grad.iter_mut().zip(&plus).zip(&minus) {
        *g = exp_relative(p - lp) - exp_relative(m - lm);
    }
    T::lit(0.5) * T::FRAC_PI_2().ln() + lp + lm
}

/// Closed-form tail term `-(N/2) ln(2πx) / √(2x)`.
pub fn tail_term<T: Real>(count: usize, x: T) -> T {
    let half_n = T::from_count(count as u64) * T::lit(0.5);
    -half_n * (T::TAU() * x).ln() / (T::lit(2.0) * x).sqrt()
}

fn tail_term_slope<T: Real>(count: usize, x: T) -> T {
    let half_n = T::from_count(count as u64) * T::lit(0.5);
    let two_x = T::lit(2.0) * x;
    -half_n * (T::lit(2.0) - (T::TAU() * x).ln()) / (two_x * two_x.sqrt())
}

/// Tail term as a function of `υ = 2πx`: `-(N/2) √π ln υ / √υ`.
pub fn tail_in_upsilon<T: Real>(count: usize, upsilon: T) -> T {
    let half_n = T::from_count(count as u64) * T::lit(0.5);
    -half_n * T::PI().sqrt() * upsilon.ln() / upsilon.sqrt()
}

/// `d/dυ` of [`tail_in_upsilon`]: `-(N/4) √π (2 - ln υ) / υ^{3/2}`.
pub fn tail_in_upsilon_slope<T: Real>(count: usize, upsilon: T) -> T {
    let quarter_n = T::from_count(count as u64) * T::lit(0.25);
    -quarter_n * T::PI().sqrt() * (T::lit(2.0) - upsilon.ln()) / (upsilon * upsilon.sqrt())
}

/// Patterns the objective sums over.
#[derive(Clone, Debug)]
pub struct PatternSet<T> {
    users: usize,
    codes: Vec<u64>,
    scales: Vec<T>,
    full: bool,
    ln_weights: Vec<T>,
    xi: T,
}

impl<T: Real> PatternSet<T> {
    /// All `2^users` patterns with unit scale.
    pub fn full(users: usize) -> Result<Self> {
        if users == 0 {
            return Err(domain("at least one user is required"));
        }
        if users > ENUMERATION_CAP {
            return Err(Error::Capacity {
                what: "user count",
                requested: users as u64,
                limit: ENUMERATION_CAP as u64,
                advice: "use the importance-sampled allocator for larger systems",
            });
        }
        let n = 1usize << users;
        Self::build(users, (0..n as u64).collect(), vec![T::one(); n], true)
    }

    /// Weighted subset; `codes` are 0-based pattern codes (index - 1).
    pub fn sampled(users: usize, codes: Vec<u64>, scales: Vec<T>) -> Result<Self> {
        if users == 0 || users > MAX_USERS {
            return Err(domain(format!("user count {users} outside 1..={MAX_USERS}")));
        }
        if codes.is_empty() {
            return Err(domain("empty pattern set"));
        }
        if codes.len() != scales.len() {
            return Err(Error::Dimension {
                expected: codes.len(),
                got: scales.len(),
            });
        }
        let limit = (1u64 << users) - 1;
        if let Some(c) = codes.iter().find(|&&c| c > limit) {
            return Err(domain(format!("pattern code {c} out of range for {users} users")));
        }
        if let Some(s) = scales.iter().find(|s| !(**s >= T::zero()) || !s.is_finite()) {
            return Err(domain(format!("pattern scale {s} must be finite and nonnegative")));
        }
        Self::build(users, codes, scales, false)
    }

    fn build(users: usize, codes: Vec<u64>, scales: Vec<T>, full: bool) -> Result<Self> {
        let n = codes.len();
        Ok(Self {
            users,
            codes,
            scales,
            full,
            ln_weights: positional_ln_weights(n),
            xi: T::lit(xi_for_count(n)?),
        })
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn codes(&self) -> &[u64] {
        &self.codes
    }

    pub fn scales(&self) -> &[T] {
        &self.scales
    }

    pub fn ln_weights(&self) -> &[T] {
        &self.ln_weights
    }

    /// Calibrated shift ξ for this pattern count.
    pub fn xi(&self) -> T {
        self.xi
    }

    pub fn is_full(&self) -> bool {
        self.full
    }

    /// Superposed amplitude of every pattern.
    pub fn superposed(&self, amplitudes: &[T]) -> Vec<T> {
        if self.full {
            return superposed_amplitudes(amplitudes);
        }
        let top = self.users - 1;
        self.codes
            .iter()
            .zip(&self.scales)
            .map(|(&code, &scale)| {
                let mut bits = code;
                let mut sum = T::zero();
                while bits != 0 {
                    let b = bits.trailing_zeros() as usize;
                    sum += amplitudes[top - b];
                    bits &= bits - 1;
                }
                scale * sum
            })
            .collect()
    }
}

/// Terms of the objective at one amplitude vector.
#[derive(Clone, Debug)]
pub struct ObjectiveTerms<T> {
    /// `φ(Φ) = -½ ln μ - N/2`.
    pub phi: T,
    /// `ln μ = N ln 2π + ln n_b + Σ ln(η|Φ_s|² + n_b)`.
    pub ln_mu: T,
    pub omega_low: Vec<T>,
    pub omega_up: Vec<T>,
    pub f_low: T,
    pub f_up: T,
    pub tail_low: T,
    pub tail_up: T,
    /// `K + (φ - f_low)/(N ln 2)` before ordering.
    pub lower_closed: T,
    /// `K + (φ - f_up)/(N ln 2)` before ordering.
    pub upper_closed: T,
}

impl<T: Real> ObjectiveTerms<T> {
    pub fn midpoint(&self) -> T {
        T::lit(0.5) * (self.lower_closed + self.upper_closed)
    }
}

/// Previous-iterate anchors of the surrogate: `ln μ^(t-1)` and `υ^(t-1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurrogateAnchor<T> {
    pub ln_mu: T,
    pub upsilon: T,
}

struct Pass<T> {
    phis: Vec<T>,
    powers: Vec<T>,
    ln_mu: T,
    omega_low: Vec<T>,
    omega_up: Vec<T>,
    spread_low: T,
    spread_up: T,
    d_low: Vec<T>,
    d_up: Vec<T>,
    amp_sum: T,
    x_up: T,
    c_low: T,
    c_up: T,
    total_power: T,
}

/// Asymptotic (midpoint) Gaussian-approximation sum-rate over a pattern set.
#[derive(Clone, Debug)]
pub struct GaussianObjective<T> {
    patterns: PatternSet<T>,
    eta: T,
    n_b: T,
}

impl<T: Real> GaussianObjective<T> {
    pub fn new(patterns: PatternSet<T>, eta: T, n_b: T) -> Result<Self> {
        if !(n_b > T::zero()) || !n_b.is_finite() {
            return Err(domain(format!(
                "Gaussian bounds need positive background noise, got {n_b}"
            )));
        }
        if !(eta >= T::zero() && eta <= T::one()) {
            return Err(domain(format!("transmittance {eta} outside [0, 1]")));
        }
        Ok(Self { patterns, eta, n_b })
    }

    /// Full enumeration for `users` users.
    pub fn full(users: usize, det: &DetectionConfig<T>) -> Result<Self> {
        Self::new(PatternSet::full(users)?, det.eta(), det.n_b())
    }

    pub fn patterns(&self) -> &PatternSet<T> {
        &self.patterns
    }

    pub fn users(&self) -> usize {
        self.patterns.users
    }

    pub fn count(&self) -> usize {
        self.patterns.len()
    }

    pub fn eta(&self) -> T {
        self.eta
    }

    pub fn n_b(&self) -> T {
        self.n_b
    }

    /// `1 / (N ln 2)`.
    fn scale(&self) -> T {
        T::one() / (T::from_count(self.count() as u64) * T::LN_2())
    }

    fn check(&self, amplitudes: &[T]) -> Result<()> {
        if amplitudes.len() != self.users() {
            return Err(Error::Dimension {
                expected: self.users(),
                got: amplitudes.len(),
            });
        }
        Ok(())
    }

    fn pass(&self, amplitudes: &[T], with_gradient: bool) -> Pass<T> {
        let n = self.count();
        let eta = self.eta;
        let n_b = self.n_b;
        let phis = self.patterns.superposed(amplitudes);
        let powers: Vec<T> = phis.iter().map(|&p| p * p).collect();
        let total_power: T = powers.iter().copied().sum();
        let nf = T::from_count(n as u64);
        let ln_mu = nf * T::TAU().ln() + n_b.ln() + powers.iter().map(|&p| (eta * p + n_b).ln()).sum::<T>();
        let amp_sum: T = amplitudes.iter().copied().sum();
        let x_up = eta * amp_sum * amp_sum + n_b;
        let two = T::lit(2.0);
        let c_low = eta / (two * (two * n_b).sqrt());
        let c_up = eta / (two * (two * x_up).sqrt());
        let omega_low: Vec<T> = powers.iter().map(|&p| c_low * (total_power - two * p)).collect();
        let omega_up: Vec<T> = powers.iter().map(|&p| c_up * (total_power - two * p)).collect();
        let w = &self.patterns.ln_weights;
        let (spread_low, spread_up, d_low, d_up) = if with_gradient {
            let mut d_low = vec![T::zero(); n];
            let mut d_up = vec![T::zero(); n];
            let sl = log_spread_with_gradient(w, &omega_low, &mut d_low);
            let su = log_spread_with_gradient(w, &omega_up, &mut d_up);
            (sl, su, d_low, d_up)
        } else {
            (
                log_spread(w, &omega_low),
                log_spread(w, &omega_up),
                Vec::new(),
                Vec::new(),
            )
        };
        Pass {
            phis,
            powers,
            ln_mu,
            omega_low,
            omega_up,
            spread_low,
            spread_up,
            d_low,
            d_up,
            amp_sum,
            x_up,
            c_low,
            c_up,
            total_power,
        }
    }

    /// `out_k = common + Σ_s adj_s · ∂|Φ_s|²/∂φ_k`.
    fn distribute(&self, phis: &[T], adj: impl Fn(usize) -> T, common: T, out: &mut [T]) {
        let users = self.users();
        out.iter_mut().for_each(|g| *g = common);
        let two = T::lit(2.0);
        for (s, (&code, &scale)) in self.patterns.codes.iter().zip(&self.patterns.scales).enumerate() {
            let w = two * phis[s] * scale * adj(s);
            if w == T::zero() {
                continue;
            }
            for (k, g) in out.iter_mut().enumerate() {
                if user_on(code, k, users) {
                    *g += w;
                }
            }
        }
    }

    /// `Σ_j (∂spread_up/∂ω_j) (S - 2P_j) · ∂c_up/∂s`, shared by every user.
    fn up_denominator_term(&self, p: &Pass<T>) -> T {
        let two = T::lit(2.0);
        let lever: T = p
            .d_up
            .iter()
            .zip(&p.powers)
            .map(|(&d, &q)| d * (p.total_power - two * q))
            .sum();
        let dc_ds = -self.eta * self.eta * p.amp_sum / (two * two.sqrt() * p.x_up * p.x_up.sqrt());
        lever * dc_ds
    }

    fn terms_from(&self, p: Pass<T>) -> ObjectiveTerms<T> {
        let n = self.count();
        let k = T::from_count(self.users() as u64);
        let xi = self.patterns.xi;
        let phi = -T::lit(0.5) * p.ln_mu - T::lit(0.5) * T::from_count(n as u64);
        let tail_low = tail_term(n, self.n_b);
        let tail_up = tail_term(n, p.x_up);
        let f_low = p.spread_low + xi + tail_low;
        let f_up = p.spread_up + xi + tail_up;
        let c = self.scale();
        ObjectiveTerms {
            phi,
            ln_mu: p.ln_mu,
            omega_low: p.omega_low,
            omega_up: p.omega_up,
            f_low,
            f_up,
            tail_low,
            tail_up,
            lower_closed: k + c * (phi - f_low),
            upper_closed: k + c * (phi - f_up),
        }
    }

    pub fn terms(&self, amplitudes: &[T]) -> Result<ObjectiveTerms<T>> {
        self.check(amplitudes)?;
        Ok(self.terms_from(self.pass(amplitudes, false)))
    }

    /// Midpoint of the two closed-form bounds, bits.
    pub fn value(&self, amplitudes: &[T]) -> Result<T> {
        Ok(self.terms(amplitudes)?.midpoint())
    }

    /// Midpoint value with its amplitude gradient written to `grad`.
    pub fn value_and_gradient(&self, amplitudes: &[T], grad: &mut [T]) -> Result<T> {
        self.check(amplitudes)?;
        if grad.len() != self.users() {
            return Err(Error::Dimension {
                expected: self.users(),
                got: grad.len(),
            });
        }
        let p = self.pass(amplitudes, true);
        let c = self.scale();
        let half = T::lit(0.5);
        let two = T::lit(2.0);
        let eta = self.eta;
        let n_b = self.n_b;
        let common =
            c * -half * (self.up_denominator_term(&p) + tail_term_slope(self.count(), p.x_up) * two * eta * p.amp_sum);
        let adj = |s: usize| {
            let a_phi = -half * eta / (eta * p.powers[s] + n_b);
            let a_low = -two * p.c_low * p.d_low[s];
            let a_up = -two * p.c_up * p.d_up[s];
            c * (a_phi - half * (a_low + a_up))
        };
        self.distribute(&p.phis, adj, common, grad);
        let terms = self.terms_from(p);
        Ok(terms.midpoint())
    }

    /// `ln μ` lower bound `N ln 2π + ln n_b + Σ ln(η|Φ_s|² + n_b)` and its amplitude gradient.
    pub fn ln_mu_bound(&self, amplitudes: &[T], grad: Option<&mut [T]>) -> T {
        let eta = self.eta;
        let n_b = self.n_b;
        let phis = self.patterns.superposed(amplitudes);
        let ln_mu = T::from_count(phis.len() as u64) * T::TAU().ln()
            + n_b.ln()
            + phis.iter().map(|&p| (eta * p * p + n_b).ln()).sum::<T>();
        if let Some(g) = grad {
            self.distribute(&phis, |s| eta / (eta * phis[s] * phis[s] + n_b), T::zero(), g);
        }
        ln_mu
    }

    /// `ln μ_bound(amplitudes) - ln μ_bound(reference)` without cancellation, with gradient in `amplitudes`.
    pub fn ln_mu_shift(&self, amplitudes: &[T], reference: &[T], grad: Option<&mut [T]>) -> T {
        let eta = self.eta;
        let n_b = self.n_b;
        let phis = self.patterns.superposed(amplitudes);
        let refs = self.patterns.superposed(reference);
        let shift = phis
            .iter()
            .zip(&refs)
            .map(|(&p, &q)| (eta * (p - q) * (p + q) / (eta * q * q + n_b)).ln_1p())
            .sum();
        if let Some(g) = grad {
            self.distribute(&phis, |s| eta / (eta * phis[s] * phis[s] + n_b), T::zero(), g);
        }
        shift
    }

    /// `υ_bound(amplitudes) - υ_bound(reference)` without cancellation, with gradient in `amplitudes`.
    pub fn upsilon_shift(&self, amplitudes: &[T], reference: &[T], grad: Option<&mut [T]>) -> T {
        let s: T = amplitudes.iter().copied().sum();
        let r: T = reference.iter().copied().sum();
        if let Some(g) = grad {
            let d = T::lit(2.0) * T::TAU() * self.eta * s;
            g.iter_mut().for_each(|x| *x = d);
        }
        T::TAU() * self.eta * (s - r) * (s + r)
    }

    /// `υ` lower bound `2π(η(Σφ)² + n_b)` and its amplitude gradient.
    pub fn upsilon_bound(&self, amplitudes: &[T], grad: Option<&mut [T]>) -> T {
        let s: T = amplitudes.iter().copied().sum();
        if let Some(g) = grad {
            let d = T::lit(2.0) * T::TAU() * self.eta * s;
            g.iter_mut().for_each(|x| *x = d);
        }
        T::TAU() * (self.eta * s * s + self.n_b)
    }

    /// Concave surrogate at `(amplitudes, ln μ, υ)` around `anchor`, bits.
    ///
    /// When `grad` is given it receives `K + 2` entries ordered
    /// `(∂/∂φ_1, …, ∂/∂φ_K, ∂/∂ln μ, ∂/∂υ)`.
    pub fn surrogate(
        &self,
        amplitudes: &[T],
        ln_mu: T,
        upsilon: T,
        anchor: &SurrogateAnchor<T>,
        grad: Option<&mut [T]>,
    ) -> T {
        let n = self.count();
        let nf = T::from_count(n as u64);
        let half = T::lit(0.5);
        let two = T::lit(2.0);
        let c = self.scale();
        let k = T::from_count(self.users() as u64);
        let with_gradient = grad.is_some();
        let p = self.pass(amplitudes, with_gradient);
        let rel = (ln_mu - anchor.ln_mu).exp();
        let phi_sca = -half * anchor.ln_mu - half * nf - half * (rel - T::one());
        let h_slope = tail_in_upsilon_slope(n, anchor.upsilon);
        let h_sca = tail_in_upsilon(n, anchor.upsilon) + h_slope * (upsilon - anchor.upsilon);
        let xi = self.patterns.xi;
        let f_low = p.spread_low + xi + tail_term(n, self.n_b);
        let f_up = p.spread_up + xi + h_sca;
        if let Some(g) = grad {
            let users = self.users();
            let common = c * -half * self.up_denominator_term(&p);
            let adj = |s: usize| {
                let a_low = -two * p.c_low * p.d_low[s];
                let a_up = -two * p.c_up * p.d_up[s];
                c * -half * (a_low + a_up)
            };
            self.distribute(&p.phis, adj, common, &mut g[..users]);
            g[users] = c * -half * rel;
            g[users + 1] = c * -half * h_slope;
        }
        k + c * (phi_sca - half * (f_low + f_up))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherent::ReceiverVariant;

    fn objective(users: usize, n_b: f64) -> GaussianObjective<f64> {
        let det = DetectionConfig::new(0.9, n_b, ReceiverVariant::IdealPnrd).unwrap();
        GaussianObjective::full(users, &det).unwrap()
    }

    fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
        (0..x.len())
            .map(|i| {
                let h = 1e-6 * x[i].abs().max(1.0);
                let mut a = x.to_vec();
                let mut b = x.to_vec();
                a[i] += h;
                b[i] -= h;
                (f(&a) - f(&b)) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for (users, amps) in [(1, vec![1.3]), (2, vec![2.0, 0.7]), (3, vec![0.4, 1.1, 2.5])] {
            let obj = objective(users, 1.7);
            let mut g = vec![0.0; users];
            obj.value_and_gradient(&amps, &mut g).unwrap();
            let fd = fd_gradient(|x| obj.value(x).unwrap(), &amps);
            for (a, b) in g.iter().zip(&fd) {
                assert!((a - b).abs() < 1e-6 * b.abs().max(1e-3), "{g:?} vs {fd:?}");
            }
        }
    }

    #[test]
    fn epigraph_gradients_match_finite_differences() {
        let obj = objective(3, 2.5);
        let amps = [0.9, 1.4, 0.3];
        let mut g = [0.0; 3];
        obj.ln_mu_bound(&amps, Some(&mut g));
        let fd = fd_gradient(|x| obj.ln_mu_bound(x, None), &amps);
        for (a, b) in g.iter().zip(&fd) {
            assert!((a - b).abs() < 1e-7 * b.abs().max(1.0));
        }
        obj.upsilon_bound(&amps, Some(&mut g));
        let fd = fd_gradient(|x| obj.upsilon_bound(x, None), &amps);
        for (a, b) in g.iter().zip(&fd) {
            assert!((a - b).abs() < 1e-6 * b.abs().max(1.0));
        }
    }

    #[test]
    fn surrogate_gradient_matches_finite_differences() {
        let obj = objective(2, 1.7);
        let anchor_amps = [1.0, 0.5];
        let anchor = SurrogateAnchor {
            ln_mu: obj.ln_mu_bound(&anchor_amps, None),
            upsilon: obj.upsilon_bound(&anchor_amps, None),
        };
        let x = [1.3, 0.2, anchor.ln_mu + 0.4, anchor.upsilon + 3.0];
        let mut g = [0.0; 4];
        obj.surrogate(&x[..2], x[2], x[3], &anchor, Some(&mut g));
        let fd = fd_gradient(|v| obj.surrogate(&v[..2], v[2], v[3], &anchor, None), &x);
        for (a, b) in g.iter().zip(&fd) {
            assert!((a - b).abs() < 1e-6 * b.abs().max(1e-3), "{g:?} vs {fd:?}");
        }
    }

    #[test]
    fn shifts_match_differences() {
        let obj = objective(3, 1.7);
        let a = [0.9, 1.4, 0.3];
        let b = [0.8, 1.5, 0.0];
        let d = obj.ln_mu_bound(&a, None) - obj.ln_mu_bound(&b, None);
        assert!((obj.ln_mu_shift(&a, &b, None) - d).abs() < 1e-12);
        let d = obj.upsilon_bound(&a, None) - obj.upsilon_bound(&b, None);
        assert!((obj.upsilon_shift(&a, &b, None) - d).abs() < 1e-12);
    }

    #[test]
    fn surrogate_is_tight_at_anchor() {
        let obj = objective(3, 1.7);
        let amps = [0.8, 1.6, 0.1];
        let anchor = SurrogateAnchor {
            ln_mu: obj.ln_mu_bound(&amps, None),
            upsilon: obj.upsilon_bound(&amps, None),
        };
        let s = obj.surrogate(&amps, anchor.ln_mu, anchor.upsilon, &anchor, None);
        let v = obj.value(&amps).unwrap();
        assert!((s - v).abs() < 1e-12, "{s} vs {v}");
    }

    #[test]
    fn sampled_full_matches_full() {
        let users = 3;
        let full = objective(users, 1.7);
        let set = PatternSet::sampled(users, (0..8).collect(), vec![1.0; 8]).unwrap();
        let sampled = GaussianObjective::new(set, 0.9, 1.7).unwrap();
        let amps = [0.3, 1.2, 2.2];
        assert!((full.value(&amps).unwrap() - sampled.value(&amps).unwrap()).abs() < 1e-13);
    }

    #[test]
    fn tail_forms_agree() {
        for x in [0.5f64, 1.7, 10.0, 300.0] {
            let a = tail_term(8, x);
            let b = tail_in_upsilon(8, std::f64::consts::TAU * x);
            assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn rejects_zero_noise_and_bad_sets() {
        let det = DetectionConfig::ideal(0.9f64, 0.0).unwrap();
        assert!(GaussianObjective::full(2, &det).is_err());
        assert!(matches!(PatternSet::<f64>::full(15), Err(Error::Capacity { .. })));
        assert!(PatternSet::<f64>::sampled(2, vec![4], vec![1.0]).is_err());
        assert!(PatternSet::<f64>::sampled(2, vec![1, 2], vec![1.0]).is_err());
    }
}
