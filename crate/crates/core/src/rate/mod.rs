//! Sum-rate evaluation: exact, Gaussian bounds, and reference capacities.

mod bounds;
pub mod calibration;
mod exact;
mod limits;
pub mod objective;
mod oracle;
mod region;

pub use bounds::{
    asymptotic_limit, bounds_and_asymptotic, f_bound, gaussian_pmf, lower_tail_term, omega_terms, phi_closed_form,
    upper_tail_term, RateBreakdown,
};
pub(crate) use exact::exact_sum_rate_of;
pub use exact::{equiprobable_information, exact_sum_rate};
pub use limits::{holevo_binary, holevo_capacity, reference_capacities};
pub use objective::{GaussianObjective, ObjectiveTerms, PatternSet, SurrogateAnchor, ENUMERATION_CAP};
pub use oracle::entropy_oracle_sum_rate;
pub use region::{oma_point, two_user_region, TwoUserRegion};
