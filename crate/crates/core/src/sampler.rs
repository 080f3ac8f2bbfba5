//! Adaptive importance sampling of on/off patterns for large user counts.
//!
//! A pattern is summarized by its superposed amplitude `a`, standardized as
//! `z = (a - ā)/σ_a` with the exact moments of `a` under uniform patterns:
//! `ā = ½Σφ_k` and `σ_a² = ¼Σφ_k²`. The proposal is a Student-t density in
//! `z`; the target is the Gaussian-approximation density `N(ȳ; λ, λ)` at the
//! mean count `ȳ`. Selection is Gumbel-top-S over the 50/50 mixture of the
//! current normalized weights and the normalized proposal, with one Gumbel
//! draw per pool entry held fixed for the whole run.

use std::collections::BTreeSet;

use rand::Rng;
use rand_distr::{Distribution, Gumbel};
use statrs::function::gamma::ln_gamma;

use crate::alloc::{
    baseline_enp, check_gains, descending_order, sca_loop, PowerAllocation, PowerConstraints, ScaOutcome, SolverConfig,
};
use crate::coherent::{user_on, DetectionConfig, MAX_USERS};
use crate::error::{domain, Error, Result};
use crate::rate::{GaussianObjective, PatternSet};
use crate::scalar::{log_sum_exp, Real};

/// Largest candidate pool; larger pattern spaces are subsampled uniformly.
pub const POOL_CAP: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplerConfig<T> {
    pub sample_size: usize,
    /// Degrees of freedom of the Student-t proposal.
    pub theta: T,
    /// Stop once the total weight change between rounds is at most this.
    pub r_threshold: T,
    pub max_rounds: usize,
}

impl<T: Real> SamplerConfig<T> {
    /// `S = min(16K, 2^K)`, `θ = 3`, `r_thre = 1e-3`, 50 rounds.
    pub fn default_for(users: usize) -> Self {
        let all = if users >= 63 { usize::MAX } else { 1usize << users };
        Self {
            sample_size: (16 * users).min(all),
            theta: T::lit(3.0),
            r_threshold: T::lit(1e-3),
            max_rounds: 50,
        }
    }

    pub fn validate(&self, users: usize) -> Result<()> {
        if users == 0 || users > MAX_USERS {
            return Err(domain(format!("user count {users} outside 1..={MAX_USERS}")));
        }
        let all = 1u64 << users;
        if self.sample_size == 0 || self.sample_size as u64 > all {
            return Err(domain(format!(
                "sample size {} outside 1..={all} for {users} users",
                self.sample_size
            )));
        }
        if self.sample_size > POOL_CAP {
            return Err(Error::Capacity {
                what: "sample size",
                requested: self.sample_size as u64,
                limit: POOL_CAP as u64,
                advice: "reduce the sample size",
            });
        }
        if !(self.theta > T::zero()) || !self.theta.is_finite() {
            return Err(domain(format!("degrees of freedom {} must be positive", self.theta)));
        }
        if !(self.r_threshold > T::zero()) {
            return Err(domain("weight-change threshold must be positive"));
        }
        if self.max_rounds == 0 {
            return Err(domain("max_rounds must be positive"));
        }
        Ok(())
    }
}

/// `ln` of the Student-t density with `theta` degrees of freedom at `z`.
pub fn proposal_ln_density<T: Real>(z: T, theta: T) -> T {
    let th = theta.as_f64();
    let norm = ln_gamma(0.5 * (th + 1.0)) - ln_gamma(0.5 * th) - 0.5 * (th * std::f64::consts::PI).ln();
    T::lit(norm) - T::lit(0.5) * (theta + T::one()) * (z * z / theta).ln_1p()
}

/// Student-t density with `theta` degrees of freedom at `z`.
pub fn proposal_density<T: Real>(z: T, theta: T) -> Result<T> {
    if !(theta > T::zero()) {
        return Err(domain(format!("degrees of freedom {theta} must be positive")));
    }
    Ok(proposal_ln_density(z, theta).exp())
}

/// Mean and standard deviation of the superposed amplitude over uniform patterns.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PatternStatistic<T> {
    pub mean: T,
    pub std: T,
}

impl<T: Real> PatternStatistic<T> {
    pub fn from_amplitudes(amplitudes: &[T]) -> Self {
        let half = T::lit(0.5);
        let sum: T = amplitudes.iter().copied().sum();
        let sq: T = amplitudes.iter().map(|&a| a * a).sum();
        Self {
            mean: half * sum,
            std: half * sq.sqrt(),
        }
    }

    /// Standardized statistic, or `None` when every amplitude is zero.
    pub fn standardize(&self, a: T) -> Option<T> {
        (self.std > T::zero()).then(|| (a - self.mean) / self.std)
    }

    /// Proposal log-density of a pattern with superposed amplitude `a`; constant when degenerate.
    pub fn ln_proposal(&self, a: T, theta: T) -> T {
        proposal_ln_density(self.standardize(a).unwrap_or(T::zero()), theta)
    }
}

/// Mean count `ȳ = η E[a²] + n_b` over uniform patterns.
pub fn evaluation_point<T: Real>(amplitudes: &[T], det: &DetectionConfig<T>) -> T {
    let stat = PatternStatistic::from_amplitudes(amplitudes);
    det.eta() * (stat.std * stat.std + stat.mean * stat.mean) + det.n_b()
}

/// `ln N(ȳ; λ, λ)`.
pub fn target_ln_density<T: Real>(lambda: T, y_bar: T) -> T {
    let d = y_bar - lambda;
    -T::lit(0.5) * (T::TAU() * lambda).ln() - d * d / (T::lit(2.0) * lambda)
}

/// Gaussian-approximation density of a pattern with rate `lambda` at `y_bar`.
pub fn target_density<T: Real>(lambda: T, y_bar: T) -> Result<T> {
    if !(lambda > T::zero()) {
        return Err(domain(format!("rate {lambda} must be positive")));
    }
    Ok(target_ln_density(lambda, y_bar).exp())
}

/// Selected patterns and their importance weights after one round.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplerState<T> {
    codes: Vec<u64>,
    ln_weights: Vec<T>,
    normalized: Vec<T>,
    round: usize,
    last_r: T,
    reset: bool,
}

impl<T: Real> SamplerState<T> {
    /// 0-based pattern codes, ascending and distinct.
    pub fn codes(&self) -> &[u64] {
        &self.codes
    }

    /// 1-based configuration indices.
    pub fn indices(&self) -> Vec<u64> {
        self.codes.iter().map(|c| c + 1).collect()
    }

    /// `ln W_s = ln P(ȳ | pattern) - ln Ξ(z_s)`.
    pub fn ln_weights(&self) -> &[T] {
        &self.ln_weights
    }

    pub fn normalized_weights(&self) -> &[T] {
        &self.normalized
    }

    pub fn round(&self) -> usize {
        self.round
    }

    /// `Σ|Ŵ^(z) - Ŵ^(z-1)|` over the union of both selections.
    pub fn last_r(&self) -> T {
        self.last_r
    }

    /// Weights degenerated in this round and were reset to uniform.
    pub fn was_reset(&self) -> bool {
        self.reset
    }

    /// Amplitude scales `S · Ŵ_s` applied to the sampled patterns.
    pub fn scales(&self) -> Vec<T> {
        let s = T::from_count(self.codes.len() as u64);
        self.normalized.iter().map(|&w| s * w).collect()
    }
}

/// Weight change over the union of two ascending code lists.
fn weight_change<T: Real>(a_codes: &[u64], a: &[T], b_codes: &[u64], b: &[T]) -> T {
    let (mut i, mut j) = (0, 0);
    let mut r = T::zero();
    while i < a_codes.len() || j < b_codes.len() {
        match (a_codes.get(i), b_codes.get(j)) {
            (Some(x), Some(y)) if x == y => {
                r += (a[i] - b[j]).abs();
                i += 1;
                j += 1;
            }
            (Some(x), Some(y)) if x < y => {
                r += a[i];
                i += 1;
            }
            (Some(_), None) => {
                r += a[i];
                i += 1;
            }
            _ => {
                r += b[j];
                j += 1;
            }
        }
    }
    r
}

/// Sampler bound to one amplitude vector and one rng draw of pool and Gumbel noise.
#[derive(Clone, Debug)]
pub struct ImportanceSampler<T> {
    users: usize,
    amplitudes: Vec<T>,
    cfg: SamplerConfig<T>,
    eta: T,
    n_b: T,
    y_bar: T,
    stat: PatternStatistic<T>,
    pool: Vec<u64>,
    gumbel: Vec<T>,
    /// Proposal normalized over the pool.
    proposal: Vec<T>,
}

impl<T: Real> ImportanceSampler<T> {
    pub fn new<R: Rng + ?Sized>(
        amplitudes: &[T],
        det: &DetectionConfig<T>,
        cfg: &SamplerConfig<T>,
        rng: &mut R,
    ) -> Result<Self> {
        let users = amplitudes.len();
        cfg.validate(users)?;
        if let Some(a) = amplitudes.iter().find(|a| !(**a >= T::zero()) || !a.is_finite()) {
            return Err(domain(format!("amplitude {a} must be finite and nonnegative")));
        }
        let all = 1u64 << users;
        let pool: Vec<u64> = if all <= POOL_CAP as u64 {
            (0..all).collect()
        } else {
            let mut set = BTreeSet::new();
            while set.len() < POOL_CAP {
                set.insert(rng.gen_range(0..all));
            }
            set.into_iter().collect()
        };
        let gumbel_dist = Gumbel::new(0.0, 1.0).expect("standard Gumbel");
        let gumbel: Vec<T> = pool.iter().map(|_| T::lit(gumbel_dist.sample(rng))).collect();
        let stat = PatternStatistic::from_amplitudes(amplitudes);
        let mut sampler = Self {
            users,
            amplitudes: amplitudes.to_vec(),
            cfg: *cfg,
            eta: det.eta(),
            n_b: det.n_b(),
            y_bar: evaluation_point(amplitudes, det),
            stat,
            pool,
            gumbel,
            proposal: Vec::new(),
        };
        let ln_prop: Vec<T> = sampler
            .pool
            .iter()
            .map(|&c| stat.ln_proposal(sampler.superposed(c), cfg.theta))
            .collect();
        let total = log_sum_exp(&ln_prop);
        sampler.proposal = ln_prop.iter().map(|&l| (l - total).exp()).collect();
        Ok(sampler)
    }

    pub fn pool_size(&self) -> usize {
        self.pool.len()
    }

    pub fn evaluation_point(&self) -> T {
        self.y_bar
    }

    fn superposed(&self, code: u64) -> T {
        (0..self.users)
            .filter(|&k| user_on(code, k, self.users))
            .fold(T::zero(), |acc, k| acc + self.amplitudes[k])
    }

    /// Top-`S` pool entries by `ln ρ_i + G_i`, returned ascending.
    fn select(&self, rho: &[T]) -> Vec<u64> {
        let mut keyed: Vec<(T, usize)> = rho
            .iter()
            .zip(&self.gumbel)
            .enumerate()
            .map(|(i, (&r, &g))| (r.ln() + g, i))
            .collect();
        keyed.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite keys").then(a.1.cmp(&b.1)));
        let mut codes: Vec<u64> = keyed[..self.cfg.sample_size]
            .iter()
            .map(|&(_, i)| self.pool[i])
            .collect();
        codes.sort_unstable();
        codes
    }

    fn weigh(&self, codes: Vec<u64>, previous: Option<&SamplerState<T>>) -> SamplerState<T> {
        let ln_weights: Vec<T> = codes
            .iter()
            .map(|&c| {
                let a = self.superposed(c);
                let lambda = self.eta * a * a + self.n_b;
                target_ln_density(lambda, self.y_bar) - self.stat.ln_proposal(a, self.cfg.theta)
            })
            .collect();
        let total = log_sum_exp(&ln_weights);
        let mut normalized: Vec<T> = ln_weights.iter().map(|&l| (l - total).exp()).collect();
        let reset = !total.is_finite() || normalized.iter().any(|w| !w.is_finite());
        if reset {
            let u = T::one() / T::from_count(codes.len() as u64);
            normalized.iter_mut().for_each(|w| *w = u);
        }
        let (round, last_r) = match previous {
            Some(p) => (p.round + 1, weight_change(&codes, &normalized, &p.codes, &p.normalized)),
            None => (1, normalized.iter().copied().sum()),
        };
        SamplerState {
            codes,
            ln_weights,
            normalized,
            round,
            last_r,
            reset,
        }
    }

    /// Uniform distinct draw of `S` patterns, weighted.
    pub fn cold_start(&self) -> SamplerState<T> {
        let u = T::one() / T::from_count(self.pool.len() as u64);
        self.weigh(self.select(&vec![u; self.pool.len()]), None)
    }

    /// One resampling round from `state`.
    pub fn resample_and_weight(&self, state: &SamplerState<T>) -> SamplerState<T> {
        let half = T::lit(0.5);
        let mut rho: Vec<T> = self.proposal.iter().map(|&p| half * p).collect();
        for (&c, &w) in state.codes.iter().zip(&state.normalized) {
            if let Ok(i) = self.pool.binary_search(&c) {
                rho[i] += half * w;
            }
        }
        self.weigh(self.select(&rho), Some(state))
    }

    /// Rounds until the weight change drops to the threshold; `true` if it did.
    pub fn run(&self) -> (SamplerState<T>, bool, usize) {
        let mut state = self.cold_start();
        let mut resets = usize::from(state.reset);
        while state.round < self.cfg.max_rounds {
            state = self.resample_and_weight(&state);
            resets += usize::from(state.reset);
            if state.last_r <= self.cfg.r_threshold {
                return (state, true, resets);
            }
        }
        (state, false, resets)
    }
}

/// Sampled-surrogate allocation and sampler diagnostics.
#[derive(Clone, Debug)]
pub struct SampledOutcome<T> {
    pub sca: ScaOutcome<T>,
    pub sampler: SamplerState<T>,
    pub sampler_converged: bool,
    pub weight_resets: usize,
    pub warnings: Vec<String>,
}

impl<T: Real> SampledOutcome<T> {
    pub fn allocation(&self) -> &PowerAllocation<T> {
        &self.sca.allocation
    }
}

/// SCA power allocation over an importance-sampled pattern set.
///
/// The sampler runs once at the starting point and the resulting patterns and
/// scales stay fixed for every SCA iteration, so the trace is monotone in the
/// sampled objective.
pub fn allocate_sampled<T: Real, R: Rng + ?Sized>(
    det: &DetectionConfig<T>,
    constraints: &PowerConstraints<T>,
    gains: &[T],
    cfg: &SolverConfig<T>,
    scfg: &SamplerConfig<T>,
    rng: &mut R,
) -> Result<SampledOutcome<T>> {
    let users = constraints.users();
    check_gains(gains, users)?;
    scfg.validate(users)?;
    let order = descending_order(gains);
    let sorted = constraints.permuted(&order);
    let start: Vec<T> = baseline_enp(&sorted)
        .amplitudes()
        .iter()
        .map(|&a| a * T::lit(0.9))
        .collect();
    let sampler = ImportanceSampler::new(&start, det, scfg, rng)?;
    let (state, sampler_converged, weight_resets) = sampler.run();
    let mut warnings = Vec::new();
    if !sampler_converged {
        warnings.push(format!(
            "sampler stopped after {} rounds with weight change {}",
            state.round, state.last_r
        ));
    }
    if weight_resets > 0 {
        warnings.push(format!("sampler weights reset to uniform {weight_resets} time(s)"));
    }
    let patterns = PatternSet::sampled(users, state.codes.clone(), state.scales())?;
    let objective = GaussianObjective::new(patterns, det.eta(), det.n_b())?;
    let mut sca = sca_loop(&objective, &sorted, &start, cfg)?;
    sca.allocation = sca.allocation.unpermuted(&order);
    if !sca.subproblems_converged {
        warnings.push("a subproblem hit the Newton step cap".into());
    }
    Ok(SampledOutcome {
        sca,
        sampler: state,
        sampler_converged,
        weight_resets,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::stream_rng;

    #[test]
    fn t_density_is_even_and_normalized() {
        for theta in [1.0f64, 3.0, 10.0] {
            assert_eq!(
                proposal_density(1.3, theta).unwrap(),
                proposal_density(-1.3, theta).unwrap()
            );
        }
        let d = proposal_density(0.0f64, 1.0).unwrap();
        assert!((d - 1.0 / std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn exact_moments() {
        let amps = [0.5f64, 1.0, 2.0];
        let stat = PatternStatistic::from_amplitudes(&amps);
        let (mut m, mut v) = (0.0, 0.0);
        for code in 0..8u64 {
            let a: f64 = (0..3).filter(|&k| user_on(code, k, 3)).map(|k| amps[k]).sum();
            m += a / 8.0;
            v += a * a / 8.0;
        }
        assert!((stat.mean - m).abs() < 1e-15);
        assert!((stat.std * stat.std - (v - m * m)).abs() < 1e-14);
    }

    #[test]
    fn weight_change_counts_unmatched() {
        let r: f64 = weight_change(&[1, 3], &[0.5, 0.5], &[1, 4], &[0.25, 0.75]);
        assert!((r - (0.25 + 0.5 + 0.75)).abs() < 1e-15);
    }

    #[test]
    fn selections_are_distinct_and_sorted() {
        let det = DetectionConfig::ideal(0.9f64, 1.7).unwrap();
        let cfg = SamplerConfig::default_for(10);
        let amps = [0.4; 10];
        let s = ImportanceSampler::new(&amps, &det, &cfg, &mut stream_rng(3, 0)).unwrap();
        let (state, _, _) = s.run();
        assert_eq!(state.codes().len(), 160);
        assert!(state.codes().windows(2).all(|w| w[0] < w[1]));
        let total: f64 = state.normalized_weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        let mut cfg = SamplerConfig::<f64>::default_for(3);
        assert_eq!(cfg.sample_size, 8);
        cfg.sample_size = 9;
        assert!(cfg.validate(3).is_err());
        cfg.sample_size = 4;
        cfg.theta = 0.0;
        assert!(cfg.validate(3).is_err());
    }
}
