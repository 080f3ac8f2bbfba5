//! Successive convex approximation over the epigraph variables `(φ, ln μ, υ)`.

use crate::alloc::baselines::baseline_enp;
use crate::alloc::constraints::{PowerAllocation, PowerConstraints};
use crate::alloc::solver::{solve_barrier, BarrierConfig, BarrierProblem};
use crate::alloc::surrogate::SurrogateState;
use crate::coherent::DetectionConfig;
use crate::error::{domain, Error, Result};
use crate::rate::objective::tail_in_upsilon_slope;
use crate::rate::{GaussianObjective, SurrogateAnchor};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig<T> {
    pub t_max: usize,
    /// Stop once an iteration gains no more than this, bits.
    pub eps_sca: T,
    /// Subproblem duality-gap and stationarity tolerance.
    pub tolerance: T,
    pub barrier_t0: T,
    pub barrier_growth: T,
    pub max_newton_steps: usize,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            t_max: 100,
            eps_sca: T::lit(1e-4),
            tolerance: T::lit(1e-8),
            barrier_t0: T::one(),
            barrier_growth: T::lit(10.0),
            max_newton_steps: 100,
        }
    }
}

impl<T: Real> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.t_max == 0 {
            return Err(domain("t_max must be positive"));
        }
        if !(self.eps_sca > T::zero() && self.eps_sca < T::one()) {
            return Err(domain(format!("eps_sca {} outside (0, 1)", self.eps_sca)));
        }
        if !(self.tolerance > T::zero()) {
            return Err(domain("subproblem tolerance must be positive"));
        }
        if !(self.barrier_t0 > T::zero()) || !(self.barrier_growth > T::one()) {
            return Err(domain("barrier needs t0 > 0 and growth > 1"));
        }
        if self.max_newton_steps == 0 {
            return Err(domain("max_newton_steps must be positive"));
        }
        Ok(())
    }

    pub(crate) fn barrier(&self) -> BarrierConfig<T> {
        BarrierConfig {
            tolerance: self.tolerance,
            t0: self.barrier_t0,
            growth: self.barrier_growth,
            max_newton_steps: self.max_newton_steps,
        }
    }
}

/// Epigraph form of one surrogate maximization.
///
/// The epigraph variables are stored as offsets from their tight values at
/// `reference`, which keeps the barrier slacks free of cancellation.
struct EpigraphProblem<'a, T> {
    objective: &'a GaussianObjective<T>,
    anchor: SurrogateAnchor<T>,
    reference: Vec<T>,
    ln_mu_ref: T,
    upsilon_ref: T,
    sqrt_bs: T,
    sqrt_caps: Vec<T>,
    upsilon_max: T,
}

impl<'a, T: Real> EpigraphProblem<'a, T> {
    fn new(
        objective: &'a GaussianObjective<T>,
        anchor: SurrogateAnchor<T>,
        constraints: &PowerConstraints<T>,
        reference: Vec<T>,
    ) -> Self {
        Self {
            objective,
            anchor,
            ln_mu_ref: objective.ln_mu_bound(&reference, None),
            upsilon_ref: objective.upsilon_bound(&reference, None),
            reference,
            sqrt_bs: constraints.max_bs_power().sqrt(),
            sqrt_caps: constraints.max_user_power().iter().map(|c| c.sqrt()).collect(),
            upsilon_max: T::TAU() * (objective.eta() * constraints.max_bs_power() + objective.n_b()),
        }
    }

    fn users(&self) -> usize {
        self.sqrt_caps.len()
    }

    /// Surrogate with the epigraph variables at their best feasible values for `amps`.
    fn reduced(&self, amps: &[T]) -> T {
        let ln_mu = self.objective.ln_mu_bound(amps, None);
        let slope = tail_in_upsilon_slope(self.objective.count(), self.anchor.upsilon);
        let upsilon = if slope < T::zero() {
            self.upsilon_max
        } else {
            self.objective.upsilon_bound(amps, None)
        };
        self.objective.surrogate(amps, ln_mu, upsilon, &self.anchor, None)
    }

    /// Strictly interior start near `amps`.
    fn interior_start(&self, amps: &[T]) -> Vec<T> {
        let shrink = T::one() - T::lit(1e-6);
        let mut phi: Vec<T> = amps
            .iter()
            .zip(&self.sqrt_caps)
            .map(|(&a, &cap)| a.max(T::lit(1e-6) * cap).min(shrink * cap))
            .collect();
        let sum: T = phi.iter().copied().sum();
        if sum > shrink * self.sqrt_bs {
            let f = shrink * self.sqrt_bs / sum;
            phi.iter_mut().for_each(|p| *p *= f);
        }
        let ln_mu = self.objective.ln_mu_shift(&phi, &self.reference, None) + T::lit(0.1);
        let ub = self.objective.upsilon_shift(&phi, &self.reference, None);
        let upsilon = ub + T::lit(0.01) * (self.upsilon_max - self.upsilon_ref - ub);
        phi.push(ln_mu);
        phi.push(upsilon);
        phi
    }

    /// Absolute `(ln μ, υ)` of a solver point.
    fn epigraph(&self, x: &[T]) -> (T, T) {
        let k = self.users();
        (self.ln_mu_ref + x[k], self.upsilon_ref + x[k + 1])
    }
}

impl<T: Real> BarrierProblem<T> for EpigraphProblem<'_, T> {
    fn dim(&self) -> usize {
        self.users() + 2
    }

    fn constraint_count(&self) -> usize {
        2 * self.users() + 4
    }

    fn objective(&self, x: &[T], grad: &mut [T]) -> T {
        let k = self.users();
        let (ln_mu, upsilon) = self.epigraph(x);
        let v = self
            .objective
            .surrogate(&x[..k], ln_mu, upsilon, &self.anchor, Some(grad));
        grad.iter_mut().for_each(|g| *g = -*g);
        -v
    }

    fn constraint(&self, i: usize, x: &[T], grad: &mut [T]) -> T {
        let k = self.users();
        grad.iter_mut().for_each(|g| *g = T::zero());
        if i == 0 {
            grad[..k].iter_mut().for_each(|g| *g = T::one());
            x[..k].iter().copied().sum::<T>() - self.sqrt_bs
        } else if i <= k {
            grad[i - 1] = T::one();
            x[i - 1] - self.sqrt_caps[i - 1]
        } else if i <= 2 * k {
            grad[i - k - 1] = -T::one();
            -x[i - k - 1]
        } else if i == 2 * k + 1 {
            let v = self
                .objective
                .ln_mu_shift(&x[..k], &self.reference, Some(&mut grad[..k]));
            grad[k] = -T::one();
            v - x[k]
        } else if i == 2 * k + 2 {
            let v = self
                .objective
                .upsilon_shift(&x[..k], &self.reference, Some(&mut grad[..k]));
            grad[k + 1] = -T::one();
            v - x[k + 1]
        } else {
            grad[k + 1] = T::one();
            x[k + 1] - (self.upsilon_max - self.upsilon_ref)
        }
    }

    fn constraint_is_affine(&self, i: usize) -> bool {
        let k = self.users();
        i <= 2 * k || i == 2 * k + 3
    }
}

/// Result of one surrogate maximization.
#[derive(Clone, Debug)]
pub struct SubproblemSolution<T> {
    pub allocation: PowerAllocation<T>,
    /// Epigraph variables at the solution, anchors unchanged.
    pub state: SurrogateState<T>,
    pub surrogate_value: T,
    pub kkt_residual: T,
    pub converged: bool,
    /// `ln μ - ln μ_bound(φ)`; near zero when the constraint is active.
    pub ln_mu_slack: T,
    /// `υ - υ_bound(φ)`.
    pub upsilon_slack: T,
    pub newton_steps: usize,
    /// The warm start beat the barrier solution and was returned instead.
    pub kept_warm_start: bool,
}

/// Maximizes the surrogate anchored at `state` over the feasible set.
pub fn solve_subproblem_p2<T: Real>(
    objective: &GaussianObjective<T>,
    state: &SurrogateState<T>,
    constraints: &PowerConstraints<T>,
    cfg: &SolverConfig<T>,
    warm_start: &PowerAllocation<T>,
) -> Result<SubproblemSolution<T>> {
    cfg.validate()?;
    if constraints.users() != objective.users() {
        return Err(Error::Dimension {
            expected: objective.users(),
            got: constraints.users(),
        });
    }
    constraints.check(warm_start, T::lit(1e-9))?;
    let warm = warm_start.amplitudes();
    let problem = EpigraphProblem::new(objective, state.anchor(), constraints, warm.clone());
    let k = problem.users();
    let out = solve_barrier(&problem, &problem.interior_start(&warm), &cfg.barrier())?;
    let amps: Vec<T> = out.x[..k].iter().map(|&a| a.max(T::zero())).collect();
    let kept_warm_start = problem.reduced(&warm) > problem.reduced(&amps);
    let (amps, ln_mu, upsilon) = if kept_warm_start {
        let ln_mu = objective.ln_mu_bound(&warm, None);
        let upsilon = if tail_in_upsilon_slope(objective.count(), state.upsilon_prev) < T::zero() {
            problem.upsilon_max
        } else {
            objective.upsilon_bound(&warm, None)
        };
        (warm, ln_mu, upsilon)
    } else {
        let (ln_mu, upsilon) = problem.epigraph(&out.x);
        (amps, ln_mu, upsilon)
    };
    let new_state = SurrogateState {
        ln_mu,
        upsilon,
        ..*state
    };
    Ok(SubproblemSolution {
        surrogate_value: objective.surrogate(&amps, ln_mu, upsilon, &state.anchor(), None),
        ln_mu_slack: ln_mu - objective.ln_mu_bound(&amps, None),
        upsilon_slack: upsilon - objective.upsilon_bound(&amps, None),
        allocation: PowerAllocation::from_amplitudes(&amps)?,
        state: new_state,
        kkt_residual: out.kkt_residual,
        converged: out.converged,
        newton_steps: out.newton_steps,
        kept_warm_start,
    })
}

/// Final allocation and per-iteration diagnostics of an SCA run.
#[derive(Clone, Debug)]
pub struct ScaOutcome<T> {
    pub allocation: PowerAllocation<T>,
    /// Objective after each accepted iteration, starting with the initial point.
    pub trace: Vec<T>,
    pub iterations: usize,
    /// Terminated on the gain threshold rather than the iteration cap.
    pub converged: bool,
    /// An iteration lowered the objective and was discarded.
    pub decrease_rejected: bool,
    pub kkt_residual: T,
    pub subproblems_converged: bool,
    /// Barrier Newton steps summed over all subproblems.
    pub newton_steps: usize,
}

impl<T: Real> ScaOutcome<T> {
    pub fn objective(&self) -> T {
        *self.trace.last().expect("trace holds the initial point")
    }
}

/// Indices sorting `gains` in descending order, ties by lower index.
pub(crate) fn descending_order<T: Real>(gains: &[T]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..gains.len()).collect();
    order.sort_by(|&a, &b| gains[b].partial_cmp(&gains[a]).expect("finite gains"));
    order
}

pub(crate) fn check_gains<T: Real>(gains: &[T], users: usize) -> Result<()> {
    if gains.len() != users {
        return Err(Error::Dimension {
            expected: users,
            got: gains.len(),
        });
    }
    if let Some(h) = gains.iter().find(|h| !(**h >= T::zero()) || !h.is_finite()) {
        return Err(domain(format!("channel gain {h} must be finite and nonnegative")));
    }
    Ok(())
}

/// SCA iterations on `objective` from `start`, all in the objective's user order.
pub(crate) fn sca_loop<T: Real>(
    objective: &GaussianObjective<T>,
    constraints: &PowerConstraints<T>,
    start: &[T],
    cfg: &SolverConfig<T>,
) -> Result<ScaOutcome<T>> {
    cfg.validate()?;
    let mut alloc = PowerAllocation::from_amplitudes(start)?;
    let mut trace = vec![objective.value(start)?];
    let mut converged = false;
    let mut decrease_rejected = false;
    let mut kkt_residual = T::infinity();
    let mut subproblems_converged = true;
    let mut iterations = 0;
    let mut newton_steps = 0;
    for t in 1..=cfg.t_max {
        iterations = t;
        let amps = alloc.amplitudes();
        let state = SurrogateState::anchored(objective, &amps, t);
        let sol = solve_subproblem_p2(objective, &state, constraints, cfg, &alloc)?;
        subproblems_converged &= sol.converged;
        newton_steps += sol.newton_steps;
        kkt_residual = sol.kkt_residual;
        let value = objective.value(&sol.allocation.amplitudes())?;
        let last = *trace.last().expect("nonempty trace");
        if value < last {
            decrease_rejected = true;
            break;
        }
        trace.push(value);
        alloc = sol.allocation;
        if value - last <= cfg.eps_sca {
            converged = true;
            break;
        }
    }
    Ok(ScaOutcome {
        allocation: alloc,
        trace,
        iterations,
        converged,
        decrease_rejected,
        kkt_residual,
        subproblems_converged,
        newton_steps,
    })
}

/// Power allocation maximizing the asymptotic sum-rate.
///
/// Users are processed in descending order of `gains`; the returned
/// allocation is in the caller's order.
pub fn allocate_sca<T: Real>(
    det: &DetectionConfig<T>,
    constraints: &PowerConstraints<T>,
    gains: &[T],
    cfg: &SolverConfig<T>,
) -> Result<ScaOutcome<T>> {
    let users = constraints.users();
    check_gains(gains, users)?;
    let order = descending_order(gains);
    let sorted = constraints.permuted(&order);
    let objective = GaussianObjective::full(users, det)?;
    let start: Vec<T> = baseline_enp(&sorted)
        .amplitudes()
        .iter()
        .map(|&a| a * T::lit(0.9))
        .collect();
    let mut out = sca_loop(&objective, &sorted, &start, cfg)?;
    out.allocation = out.allocation.unpermuted(&order);
    Ok(out)
}
