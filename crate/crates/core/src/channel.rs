//! Free-space link model: log-normal turbulence and aperture path loss.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};

use crate::error::{domain, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelParams<T> {
    /// Turbulence intensity (std of ln h_t).
    pub sigma_x: T,
    /// Link distance, m.
    pub distance: T,
    /// Transmitter aperture diameter, m.
    pub tx_aperture: T,
    /// Receiver aperture diameter, m.
    pub rx_aperture: T,
    /// Wavelength, m.
    pub wavelength: T,
}

impl<T: Real> ChannelParams<T> {
    pub fn new(sigma_x: T, distance: T, tx_aperture: T, rx_aperture: T, wavelength: T) -> Result<Self> {
        let p = Self {
            sigma_x,
            distance,
            tx_aperture,
            rx_aperture,
            wavelength,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("sigma_x", self.sigma_x),
            ("distance", self.distance),
            ("tx_aperture", self.tx_aperture),
            ("rx_aperture", self.rx_aperture),
            ("wavelength", self.wavelength),
        ] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(domain(format!("{name} = {v} must be finite and positive")));
            }
        }
        Ok(())
    }
}

/// `(1/d²)(π D_T D_R / (2ν))²`. Not clamped to 1.
pub fn path_loss<T: Real>(params: &ChannelParams<T>) -> Result<T> {
    params.validate()?;
    let g = T::PI() * params.tx_aperture * params.rx_aperture / (T::lit(2.0) * params.wavelength);
    Ok(g * g / (params.distance * params.distance))
}

/// Turbulence draw with `ln h_t ~ N(-σ²/2, σ²)`, so `E[h_t] = 1`.
pub fn sample_turbulence<T: Real, R: Rng + ?Sized>(params: &ChannelParams<T>, rng: &mut R) -> Result<T> {
    params.validate()?;
    let sigma = params.sigma_x.as_f64();
    let dist = LogNormal::new(-0.5 * sigma * sigma, sigma).map_err(|e| domain(e.to_string()))?;
    Ok(T::lit(dist.sample(rng)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelRealization<T> {
    h_t: T,
    h_l: T,
}

impl<T: Real> ChannelRealization<T> {
    pub fn new(h_t: T, h_l: T) -> Result<Self> {
        if !(h_t > T::zero() && h_l > T::zero()) || !(h_t * h_l).is_finite() {
            return Err(domain(format!(
                "channel factors ({h_t}, {h_l}) must be finite and positive"
            )));
        }
        Ok(Self { h_t, h_l })
    }

    pub fn draw<R: Rng + ?Sized>(params: &ChannelParams<T>, rng: &mut R) -> Result<Self> {
        Self::new(sample_turbulence(params, rng)?, path_loss(params)?)
    }

    pub fn turbulence(&self) -> T {
        self.h_t
    }

    pub fn path_loss(&self) -> T {
        self.h_l
    }

    /// Overall fading coefficient `h_t · h_l`.
    pub fn gain(&self) -> T {
        self.h_t * self.h_l
    }
}

/// Independent reproducible stream `stream` derived from one run seed.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
