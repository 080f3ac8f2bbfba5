//! Sum-rate analysis and power allocation for coherent-state NOMA over
//! photon-counting receivers.
//!
//! Numeric code is generic over [`scalar::Real`]; the aliases below fix `f64`.

// `!(x > 0)` guards reject NaN; coefficient tables keep their published digits.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod alloc;
pub mod channel;
pub mod coherent;
pub mod error;
pub mod poisson;
pub mod rate;
pub mod sampler;
pub mod scalar;
pub mod srm;

pub use error::{Error, Result};
pub use scalar::Real;

pub type DetectionConfig = coherent::DetectionConfig<f64>;
pub type UserSignal = coherent::UserSignal<f64>;
pub type ChannelParams = channel::ChannelParams<f64>;
pub type ChannelRealization = channel::ChannelRealization<f64>;
pub type PowerConstraints = alloc::PowerConstraints<f64>;
pub type PowerAllocation = alloc::PowerAllocation<f64>;
pub type SolverConfig = alloc::SolverConfig<f64>;
pub type ScaOutcome = alloc::ScaOutcome<f64>;
pub type GaussianObjective = rate::GaussianObjective<f64>;
pub type RateBreakdown = rate::RateBreakdown<f64>;
pub type SamplerConfig = sampler::SamplerConfig<f64>;
pub type SampledOutcome = sampler::SampledOutcome<f64>;
