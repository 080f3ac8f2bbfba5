//! Two-user rate region under both decoding orders.

use crate::coherent::DetectionConfig;
use crate::error::{domain, Result};
use crate::rate::exact::{equiprobable_information, exact_sum_rate_of};
use crate::scalar::Real;

/// Corner points of the two-user region, bits.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoUserRegion<T> {
    /// `I(X_1; Y | X_2)`.
    pub user1_max: T,
    /// `I(X_2; Y | X_1)`.
    pub user2_max: T,
    pub sum: T,
    /// User 2 decoded last: `(I_sum - I_2,max, I_2,max)`.
    pub a: (T, T),
    /// User 1 decoded last: `(I_1,max, I_sum - I_1,max)`.
    pub b: (T, T),
}

impl<T: Real> TwoUserRegion<T> {
    /// Boundary from the user-2 axis to the user-1 axis.
    pub fn polyline(&self) -> Vec<(T, T)> {
        vec![(T::zero(), self.user2_max), self.a, self.b, (self.user1_max, T::zero())]
    }

    /// Whether `point` is componentwise below some point of segment AB, up to `tol`.
    pub fn dominates(&self, point: (T, T), tol: T) -> bool {
        point.0 >= -tol
            && point.1 >= -tol
            && point.0 <= self.user1_max + tol
            && point.1 <= self.user2_max + tol
            && point.0 + point.1 <= self.sum + tol
    }
}

fn conditional<T: Real>(own: T, other: T, det: &DetectionConfig<T>, tail_eps: T) -> Result<T> {
    let other_off = equiprobable_information(&[T::zero(), own], det, tail_eps)?;
    let other_on = equiprobable_information(&[other, other + own], det, tail_eps)?;
    Ok(T::lit(0.5) * (other_off + other_on))
}

pub fn two_user_region<T: Real>(amplitudes: &[T], det: &DetectionConfig<T>, tail_eps: T) -> Result<TwoUserRegion<T>> {
    if amplitudes.len() != 2 {
        return Err(domain(format!(
            "the rate region needs exactly two users, got {}",
            amplitudes.len()
        )));
    }
    let (a1, a2) = (amplitudes[0], amplitudes[1]);
    let sum = exact_sum_rate_of(amplitudes, det, tail_eps)?;
    let user1_max = conditional(a1, a2, det, tail_eps)?;
    let user2_max = conditional(a2, a1, det, tail_eps)?;
    Ok(TwoUserRegion {
        user1_max,
        user2_max,
        sum,
        a: (sum - user2_max, user2_max),
        b: (user1_max, sum - user1_max),
    })
}

/// Time-shared point: each user alone for half the time at its own power, bits.
pub fn oma_point<T: Real>(amplitudes: &[T], det: &DetectionConfig<T>, tail_eps: T) -> Result<(T, T)> {
    if amplitudes.len() != 2 {
        return Err(domain(format!(
            "the rate region needs exactly two users, got {}",
            amplitudes.len()
        )));
    }
    let half = T::lit(0.5);
    let r = |a: T| equiprobable_information(&[T::zero(), a], det, tail_eps);
    Ok((half * r(amplitudes[0])?, half * r(amplitudes[1])?))
}
