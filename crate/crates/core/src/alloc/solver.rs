//! Log-barrier interior-point method for small dense inequality-constrained problems.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `minimize f(x)` subject to `g_i(x) < 0`.
pub trait BarrierProblem<T: Real> {
    fn dim(&self) -> usize;
    fn constraint_count(&self) -> usize;
    /// `f(x)`, with `∇f` written into `grad`.
    fn objective(&self, x: &[T], grad: &mut [T]) -> T;
    /// `g_i(x)`, with `∇g_i` written into `grad`.
    fn constraint(&self, i: usize, x: &[T], grad: &mut [T]) -> T;
    /// Affine constraints contribute no curvature.
    fn constraint_is_affine(&self, _i: usize) -> bool {
        false
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BarrierConfig<T> {
    /// Target duality gap and stationarity residual.
    pub tolerance: T,
    pub t0: T,
    pub growth: T,
    pub max_newton_steps: usize,
}

impl<T: Real> Default for BarrierConfig<T> {
    fn default() -> Self {
        Self {
            tolerance: T::lit(1e-8),
            t0: T::one(),
            growth: T::lit(10.0),
            max_newton_steps: 100,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BarrierOutcome<T> {
    pub x: Vec<T>,
    pub objective: T,
    /// `max(‖∇f + Σλ_i∇g_i‖∞, m/t)` with `λ_i = -1/(t g_i)`. The stationarity
    /// part carries rounding of order `ε t λ²` when an active slack is
    /// computed by cancellation.
    pub kkt_residual: T,
    pub constraint_values: Vec<T>,
    pub newton_steps: usize,
    /// Every centering step met the Newton-decrement test within the step cap.
    pub converged: bool,
}

struct Eval<T> {
    psi: T,
    grad: Vec<T>,
}

fn barrier_eval<T: Real, P: BarrierProblem<T> + ?Sized>(p: &P, x: &[T], t: T) -> Option<Eval<T>> {
    let n = p.dim();
    let mut grad = vec![T::zero(); n];
    let f = p.objective(x, &mut grad);
    if !f.is_finite() {
        return None;
    }
    grad.iter_mut().for_each(|g| *g *= t);
    let mut psi = t * f;
    let mut cg = vec![T::zero(); n];
    for i in 0..p.constraint_count() {
        let g = p.constraint(i, x, &mut cg);
        if !(g < T::zero()) {
            return None;
        }
        psi -= (-g).ln();
        for (a, &b) in grad.iter_mut().zip(&cg) {
            *a -= b / g;
        }
    }
    psi.is_finite().then_some(Eval { psi, grad })
}

/// Symmetrized central-difference Jacobian of `grad_fn`, accumulated as `scale · J` into `h`.
fn add_fd_hessian<T: Real>(x: &[T], grad_fn: &mut dyn FnMut(&[T], &mut [T]), scale: T, h: &mut [T]) {
    let n = x.len();
    let step0 = T::epsilon().cbrt();
    let mut xp = x.to_vec();
    let mut gp = vec![T::zero(); n];
    let mut gm = vec![T::zero(); n];
    let mut jac = vec![T::zero(); n * n];
    for j in 0..n {
        let step = step0 * x[j].abs().max(T::one());
        xp[j] = x[j] + step;
        grad_fn(&xp, &mut gp);
        xp[j] = x[j] - step;
        grad_fn(&xp, &mut gm);
        xp[j] = x[j];
        for i in 0..n {
            jac[i * n + j] = (gp[i] - gm[i]) / (step + step);
        }
    }
    let half = T::lit(0.5);
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += scale * half * (jac[i * n + j] + jac[j * n + i]);
        }
    }
}

fn barrier_hessian<T: Real, P: BarrierProblem<T> + ?Sized>(p: &P, x: &[T], t: T) -> Vec<T> {
    let n = p.dim();
    let mut h = vec![T::zero(); n * n];
    add_fd_hessian(
        x,
        &mut |y, g| {
            p.objective(y, g);
        },
        t,
        &mut h,
    );
    let mut cg = vec![T::zero(); n];
    for i in 0..p.constraint_count() {
        let g = p.constraint(i, x, &mut cg);
        for a in 0..n {
            for b in 0..n {
                h[a * n + b] += cg[a] * cg[b] / (g * g);
            }
        }
        if !p.constraint_is_affine(i) {
            add_fd_hessian(
                x,
                &mut |y, gr| {
                    p.constraint(i, y, gr);
                },
                -T::one() / g,
                &mut h,
            );
        }
    }
    h
}

/// In-place Cholesky factor of `a + δI` (lower triangle); `false` if not positive definite.
fn cholesky<T: Real>(a: &[T], n: usize, delta: T, l: &mut [T]) -> bool {
    l.iter_mut().for_each(|v| *v = T::zero());
    for j in 0..n {
        let mut d = a[j * n + j] + delta;
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if !(d > T::zero()) || !d.is_finite() {
            return false;
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }
    true
}

fn cholesky_solve<T: Real>(l: &[T], n: usize, rhs: &[T]) -> Vec<T> {
    let mut y = rhs.to_vec();
    for i in 0..n {
        for k in 0..i {
            let v = l[i * n + k] * y[k];
            y[i] -= v;
        }
        y[i] /= l[i * n + i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            let v = l[k * n + i] * y[k];
            y[i] -= v;
        }
        y[i] /= l[i * n + i];
    }
    y
}

/// Newton direction on `H d = -g`, regularizing `H` until it factors.
fn newton_direction<T: Real>(h: &[T], grad: &[T], n: usize) -> Result<Vec<T>> {
    let mut l = vec![T::zero(); n * n];
    let scale = (0..n).map(|i| h[i * n + i].abs()).fold(T::one(), T::max);
    let mut delta = T::zero();
    for _ in 0..40 {
        if cholesky(h, n, delta, &mut l) {
            let neg: Vec<T> = grad.iter().map(|&g| -g).collect();
            return Ok(cholesky_solve(&l, n, &neg));
        }
        delta = if delta == T::zero() {
            T::epsilon().sqrt() * scale
        } else {
            delta * T::lit(10.0)
        };
    }
    Err(Error::Numeric("barrier Hessian could not be regularized".into()))
}

fn inf_norm<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

/// Minimizes `problem` from the strictly feasible point `x0`.
pub fn solve_barrier<T: Real, P: BarrierProblem<T> + ?Sized>(
    problem: &P,
    x0: &[T],
    cfg: &BarrierConfig<T>,
) -> Result<BarrierOutcome<T>> {
    let n = problem.dim();
    let m = T::from_count(problem.constraint_count() as u64);
    if x0.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: x0.len(),
        });
    }
    let mut t = cfg.t0;
    let mut x = x0.to_vec();
    let mut cur = barrier_eval(problem, &x, t)
        .ok_or_else(|| Error::Infeasible("barrier start point is not strictly feasible".into()))?;
    let mut steps = 0usize;
    let mut converged = true;
    let armijo = T::lit(0.25);
    loop {
        // centering
        let mut inner = 0usize;
        loop {
            if inner >= cfg.max_newton_steps {
                converged = false;
                break;
            }
            let h = barrier_hessian(problem, &x, t);
            let d = newton_direction(&h, &cur.grad, n)?;
            let slope: T = d.iter().zip(&cur.grad).map(|(&a, &b)| a * b).sum();
            // half the squared Newton decrement
            if -slope * T::lit(0.5) <= T::lit(1e-12) {
                break;
            }
            // ψ is only known to a few ulps of its magnitude
            let noise = T::lit(8.0) * T::epsilon() * cur.psi.abs();
            let mut alpha = T::one();
            let mut accepted = None;
            for _ in 0..60 {
                let trial: Vec<T> = x.iter().zip(&d).map(|(&a, &b)| a + alpha * b).collect();
                if let Some(e) = barrier_eval(problem, &trial, t) {
                    if e.psi <= cur.psi + armijo * alpha * slope + noise {
                        accepted = Some((trial, e));
                        break;
                    }
                }
                alpha *= T::lit(0.5);
            }
            inner += 1;
            steps += 1;
            match accepted {
                Some((trial, e)) => {
                    let moved = trial.iter().zip(&x).any(|(a, b)| a != b);
                    x = trial;
                    cur = e;
                    if !moved {
                        break;
                    }
                }
                None => break,
            }
        }
        if m / t <= cfg.tolerance {
            break;
        }
        t *= cfg.growth;
        cur = barrier_eval(problem, &x, t).expect("strictly feasible iterate");
    }
    let mut grad = vec![T::zero(); n];
    let objective = problem.objective(&x, &mut grad);
    let constraint_values: Vec<T> = (0..problem.constraint_count())
        .map(|i| problem.constraint(i, &x, &mut grad))
        .collect();
    let kkt_residual = (inf_norm(&cur.grad) / t).max(m / t);
    Ok(BarrierOutcome {
        x,
        objective,
        kkt_residual,
        constraint_values,
        newton_steps: steps,
        converged,
    })
}
