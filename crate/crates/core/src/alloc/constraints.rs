use crate::coherent::UserSignal;
use crate::error::{domain, Error, Result};
use crate::scalar::Real;

/// Aggregate and per-user caps on received power, photons.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerConstraints<T> {
    max_bs_power: T,
    max_user_power: Vec<T>,
}

impl<T: Real> PowerConstraints<T> {
    pub fn new(max_bs_power: T, max_user_power: Vec<T>) -> Result<Self> {
        if max_user_power.is_empty() {
            return Err(domain("at least one user is required"));
        }
        let positive = |x: T| x > T::zero() && x.is_finite();
        if !positive(max_bs_power) {
            return Err(domain(format!("aggregate power cap {max_bs_power} must be positive")));
        }
        if let Some(c) = max_user_power.iter().find(|&&c| !positive(c)) {
            return Err(domain(format!("per-user power cap {c} must be positive")));
        }
        Ok(Self {
            max_bs_power,
            max_user_power,
        })
    }

    pub fn uniform(users: usize, max_bs_power: T, max_user_power: T) -> Result<Self> {
        Self::new(max_bs_power, vec![max_user_power; users])
    }

    pub fn users(&self) -> usize {
        self.max_user_power.len()
    }

    pub fn max_bs_power(&self) -> T {
        self.max_bs_power
    }

    pub fn max_user_power(&self) -> &[T] {
        &self.max_user_power
    }

    /// Same caps with users reordered so that entry `i` is old user `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            max_bs_power: self.max_bs_power,
            max_user_power: order.iter().map(|&k| self.max_user_power[k]).collect(),
        }
    }

    /// Checks `(Σφ_k)² ≤ cap` and `φ_k² ≤ cap_k`, each with relative slack `tol`.
    pub fn check(&self, alloc: &PowerAllocation<T>, tol: T) -> Result<()> {
        if alloc.users() != self.users() {
            return Err(Error::Dimension {
                expected: self.users(),
                got: alloc.users(),
            });
        }
        let s = alloc.amplitude_sum();
        if s * s > self.max_bs_power * (T::one() + tol) {
            return Err(Error::Infeasible(format!(
                "aggregate power {} exceeds cap {}",
                s * s,
                self.max_bs_power
            )));
        }
        for (k, (&p, &cap)) in alloc.powers().iter().zip(&self.max_user_power).enumerate() {
            if p > cap * (T::one() + tol) {
                return Err(Error::Infeasible(format!("user {} power {p} exceeds cap {cap}", k + 1)));
            }
        }
        Ok(())
    }
}

/// Received power of every user, photons.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerAllocation<T> {
    powers: Vec<T>,
}

impl<T: Real> PowerAllocation<T> {
    pub fn new(powers: Vec<T>) -> Result<Self> {
        if let Some(p) = powers.iter().find(|p| !(**p >= T::zero()) || !p.is_finite()) {
            return Err(domain(format!("power {p} must be finite and nonnegative")));
        }
        Ok(Self { powers })
    }

    pub fn from_amplitudes(amplitudes: &[T]) -> Result<Self> {
        if let Some(a) = amplitudes.iter().find(|a| !(**a >= T::zero())) {
            return Err(domain(format!("amplitude {a} must be nonnegative")));
        }
        Self::new(amplitudes.iter().map(|&a| a * a).collect())
    }

    pub fn users(&self) -> usize {
        self.powers.len()
    }

    pub fn powers(&self) -> &[T] {
        &self.powers
    }

    pub fn amplitudes(&self) -> Vec<T> {
        self.powers.iter().map(|p| p.sqrt()).collect()
    }

    pub fn amplitude_sum(&self) -> T {
        self.powers.iter().map(|p| p.sqrt()).sum()
    }

    pub fn signals(&self) -> Vec<UserSignal<T>> {
        UserSignal::from_amplitudes(&self.amplitudes()).expect("validated powers")
    }

    /// Entry `order[i]` of the result is entry `i` of `self`.
    pub fn unpermuted(&self, order: &[usize]) -> Self {
        let mut powers = vec![T::zero(); self.powers.len()];
        for (i, &k) in order.iter().enumerate() {
            powers[k] = self.powers[i];
        }
        Self { powers }
    }
}
