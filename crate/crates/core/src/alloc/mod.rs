//! Power allocation: successive convex approximation and reference schemes.

mod baselines;
mod constraints;
mod sca;
pub mod solver;
mod surrogate;

pub use baselines::{baseline_enp, baseline_ia, baseline_oma, interference_noise};
pub use constraints::{PowerAllocation, PowerConstraints};
pub use sca::{allocate_sca, solve_subproblem_p2, ScaOutcome, SolverConfig, SubproblemSolution};
pub(crate) use sca::{check_gains, descending_order, sca_loop};
pub use surrogate::{h_function, surrogate_h, surrogate_objective, surrogate_phi, SurrogateState};
