//! Reference allocations: orthogonal access, equal photon numbers, and
//! interference treated as noise.

use crate::alloc::constraints::{PowerAllocation, PowerConstraints};
use crate::alloc::sca::{allocate_sca, check_gains, SolverConfig};
use crate::alloc::solver::{solve_barrier, BarrierProblem};
use crate::coherent::DetectionConfig;
use crate::error::Result;
use crate::poisson::DEFAULT_TAIL_EPS;
use crate::rate::{exact_sum_rate_of, GaussianObjective};
use crate::scalar::Real;

/// Largest common power satisfying both cap families.
pub fn baseline_enp<T: Real>(constraints: &PowerConstraints<T>) -> PowerAllocation<T> {
    let k = T::from_count(constraints.users() as u64);
    let per_user = constraints
        .max_user_power()
        .iter()
        .copied()
        .fold(constraints.max_bs_power() / (k * k), T::min);
    PowerAllocation::new(vec![per_user; constraints.users()]).expect("positive caps")
}

fn single_user_rate<T: Real>(amplitude: T, det: &DetectionConfig<T>) -> Result<T> {
    exact_sum_rate_of(&[amplitude], det, T::lit(DEFAULT_TAIL_EPS))
}

/// Aggregate power split in proportion to the gains, and the orthogonal-access
/// sum-rate `(1/K) Σ_k I_1(φ_k)`, bits.
pub fn baseline_oma<T: Real>(
    det: &DetectionConfig<T>,
    constraints: &PowerConstraints<T>,
    gains: &[T],
) -> Result<(PowerAllocation<T>, T)> {
    let users = constraints.users();
    check_gains(gains, users)?;
    let total: T = gains.iter().copied().sum();
    let powers: Vec<T> = if total > T::zero() {
        gains.iter().map(|&h| constraints.max_bs_power() * h / total).collect()
    } else {
        vec![constraints.max_bs_power() / T::from_count(users as u64); users]
    };
    let alloc = PowerAllocation::new(powers)?;
    let mut rate = T::zero();
    for a in alloc.amplitudes() {
        rate += single_user_rate(a, det)?;
    }
    Ok((alloc, rate / T::from_count(users as u64)))
}

/// Background noise seen by each user when the others are mean-photon noise.
pub fn interference_noise<T: Real>(amplitudes: &[T], det: &DetectionConfig<T>) -> Vec<T> {
    let half = T::lit(0.5);
    let total: T = amplitudes.iter().map(|&a| half * a * a).sum();
    amplitudes
        .iter()
        .map(|&a| det.n_b() + det.eta() * (total - half * a * a))
        .collect()
}

struct IaProblem<'a, T> {
    det: &'a DetectionConfig<T>,
    sqrt_bs: T,
    sqrt_caps: Vec<T>,
}

impl<T: Real> IaProblem<'_, T> {
    fn single(&self, n_b: T) -> GaussianObjective<T> {
        let det = self.det.with_noise(n_b).expect("noise above the base level");
        GaussianObjective::full(1, &det).expect("single-user objective")
    }
}

impl<T: Real> BarrierProblem<T> for IaProblem<'_, T> {
    fn dim(&self) -> usize {
        self.sqrt_caps.len()
    }

    fn constraint_count(&self) -> usize {
        2 * self.dim() + 1
    }

    fn objective(&self, x: &[T], grad: &mut [T]) -> T {
        let noise = interference_noise(x, self.det);
        let mut total = T::zero();
        let mut g1 = [T::zero()];
        // ∂/∂n of each user's rate, then spread over the interferers
        let mut noise_slopes = vec![T::zero(); x.len()];
        for (k, &n) in noise.iter().enumerate() {
            let obj = self.single(n);
            total += obj.value_and_gradient(&[x[k]], &mut g1).unwrap_or(T::nan());
            grad[k] = g1[0];
            let h = T::lit(1e-6) * n;
            let up = self.single(n + h).value(&[x[k]]).unwrap_or(T::nan());
            let down = self.single(n - h).value(&[x[k]]).unwrap_or(T::nan());
            noise_slopes[k] = (up - down) / (h + h);
        }
        let slope_sum: T = noise_slopes.iter().copied().sum();
        for (k, g) in grad.iter_mut().enumerate() {
            *g += (slope_sum - noise_slopes[k]) * self.det.eta() * x[k];
            *g = -*g;
        }
        -total
    }

    fn constraint(&self, i: usize, x: &[T], grad: &mut [T]) -> T {
        let k = self.dim();
        grad.iter_mut().for_each(|g| *g = T::zero());
        if i == 0 {
            grad.iter_mut().for_each(|g| *g = T::one());
            x.iter().copied().sum::<T>() - self.sqrt_bs
        } else if i <= k {
            grad[i - 1] = T::one();
            x[i - 1] - self.sqrt_caps[i - 1]
        } else {
            grad[i - k - 1] = -T::one();
            -x[i - k - 1]
        }
    }

    fn constraint_is_affine(&self, _i: usize) -> bool {
        true
    }
}

/// Allocation maximizing `Σ_k Ĩ_1(φ_k; n_b'_k)` with the interferers folded
/// into each user's noise, and the resulting sum of exact single-user rates, bits.
pub fn baseline_ia<T: Real>(
    det: &DetectionConfig<T>,
    constraints: &PowerConstraints<T>,
    gains: &[T],
    cfg: &SolverConfig<T>,
) -> Result<(PowerAllocation<T>, T)> {
    let users = constraints.users();
    check_gains(gains, users)?;
    cfg.validate()?;
    if users == 1 {
        let out = allocate_sca(det, constraints, gains, cfg)?;
        let rate = single_user_rate(out.allocation.amplitudes()[0], det)?;
        return Ok((out.allocation, rate));
    }
    let problem = IaProblem {
        det,
        sqrt_bs: constraints.max_bs_power().sqrt(),
        sqrt_caps: constraints.max_user_power().iter().map(|c| c.sqrt()).collect(),
    };
    let start: Vec<T> = baseline_enp(constraints)
        .amplitudes()
        .iter()
        .map(|&a| a * T::lit(0.9))
        .collect();
    let out = solve_barrier(&problem, &start, &cfg.barrier())?;
    let amps: Vec<T> = out.x.iter().map(|&a| a.max(T::zero())).collect();
    let alloc = PowerAllocation::from_amplitudes(&amps)?;
    let mut rate = T::zero();
    for (&a, &n) in amps.iter().zip(&interference_noise(&amps, det)) {
        rate += single_user_rate(a, &det.with_noise(n)?)?;
    }
    Ok((alloc, rate))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enp_binding_cap() {
        let c = PowerConstraints::uniform(4, 16.0f64, 0.5).unwrap();
        assert_eq!(baseline_enp(&c).powers(), &[0.5; 4]);
        let c = PowerConstraints::uniform(4, 16.0f64, 5.0).unwrap();
        assert_eq!(baseline_enp(&c).powers(), &[1.0; 4]);
    }

    #[test]
    fn oma_proportional_split() {
        let det = DetectionConfig::ideal(0.9f64, 1.7).unwrap();
        let c = PowerConstraints::uniform(2, 10.0f64, 10.0).unwrap();
        let (a, _) = baseline_oma(&det, &c, &[1.0, 1.0]).unwrap();
        assert_eq!(a.powers(), &[5.0, 5.0]);
        let (a, _) = baseline_oma(&det, &c, &[3.0, 1.0]).unwrap();
        assert!((a.powers().iter().sum::<f64>() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn interference_vanishes_without_interferers() {
        let det = DetectionConfig::ideal(0.9f64, 1.7).unwrap();
        let n = interference_noise(&[2.0, 0.0, 0.0], &det);
        assert_eq!(n[0], 1.7);
        assert!(n[1] > 1.7 && n[2] > 1.7);
    }
}
