//! Quadrature calibration of the constant shift ξ in the log-spread term.
//!
//! The exact mixture integral
//! `g(ω) = ∫ s(u) ln s(u) du` with `s(u) = Σ_i exp(-(u + ω_i)²)`
//! is evaluated by adaptive Gauss-Kronrod quadrature; ξ is chosen so that
//! `spread(ω) + ξ` reproduces `g(ω)` at a reference point (zero by default).

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use crate::error::{domain, Error, Result};
use crate::rate::objective::{log_spread, positional_ln_weights};
use crate::scalar::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn kronrod15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss-Kronrod (7, 15) quadrature with absolute tolerance `tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    const MAX_INTERVALS: usize = 4000;
    let (v, e) = kronrod15(&f, a, b);
    let mut parts = vec![(a, b, v, e)];
    loop {
        let (total, err) = parts.iter().fold((0.0, 0.0), |(t, r), p| (t + p.2, r + p.3));
        if err <= tol || err <= 1e-15 * total.abs() {
            return Ok(total);
        }
        if parts.len() >= MAX_INTERVALS {
            return Err(Error::Numeric(format!(
                "quadrature on [{a}, {b}] stalled at error estimate {err:e} after {} intervals",
                parts.len()
            )));
        }
        let worst = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let (lo, hi, _, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = kronrod15(&f, lo, mid);
        let (v2, e2) = kronrod15(&f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
}

/// `g(ω) = ∫ s ln s du` over a window extending 10 units past every centre.
pub fn mixture_entropy_integral(omegas: &[f64]) -> Result<f64> {
    if omegas.is_empty() {
        return Err(domain("empty ω vector"));
    }
    if omegas.iter().any(|w| !w.is_finite()) {
        return Err(domain("non-finite ω entry"));
    }
    let hi = omegas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = omegas.iter().copied().fold(f64::INFINITY, f64::min);
    let (a, b) = (-hi - 10.0, -lo + 10.0);
    let mut sorted = omegas.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut centres: Vec<(f64, f64)> = Vec::new();
    for w in sorted {
        match centres.last_mut() {
            Some((c, m)) if *c == w => *m += 1.0,
            _ => centres.push((w, 1.0)),
        }
    }
    let integrand = |u: f64| {
        let s: f64 = centres.iter().map(|(w, m)| m * (-(u + w) * (u + w)).exp()).sum();
        if s > 0.0 {
            s * s.ln()
        } else {
            0.0
        }
    };
    let n = omegas.len() as f64;
    let scale = n * (1.0 + n.ln().abs());
    integrate(integrand, a, b, 1e-13 * scale)
}

fn cache() -> &'static Mutex<HashMap<usize, f64>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// ξ at the zero reference for a spread over `count` Gaussians, cached per count.
pub fn xi_for_count(count: usize) -> Result<f64> {
    if count == 0 {
        return Err(domain("ξ needs at least one configuration"));
    }
    if let Some(&xi) = cache().lock().expect("xi cache poisoned").get(&count) {
        return Ok(xi);
    }
    let zeros = vec![0.0; count];
    let xi = mixture_entropy_integral(&zeros)? - log_spread(&positional_ln_weights::<f64>(count), &zeros);
    cache().lock().expect("xi cache poisoned").insert(count, xi);
    Ok(xi)
}

/// `(ξ_low, ξ_up)` for `users` users; both bounds share the calibration point.
///
/// With `probe = None` the zero reference is used and the result is cached.
pub fn calibrate_xi<T: Real>(users: usize, probe: Option<&[T]>) -> Result<(T, T)> {
    if users == 0 || users > 24 {
        return Err(domain(format!("user count {users} outside 1..=24")));
    }
    let count = 1usize << users;
    let xi = match probe {
        None => xi_for_count(count)?,
        Some(p) => {
            if p.len() != count {
                return Err(Error::Dimension {
                    expected: count,
                    got: p.len(),
                });
            }
            let w: Vec<f64> = p.iter().map(|x| x.as_f64()).collect();
            mixture_entropy_integral(&w)? - log_spread(&positional_ln_weights::<f64>(count), &w)
        }
    };
    Ok((T::lit(xi), T::lit(xi)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_integral() {
        let v = integrate(|u: f64| (-u * u).exp(), -10.0, 10.0, 1e-14).unwrap();
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn zero_reference_closed_form() {
        // N coincident unit Gaussians: N√π (ln N - 1/2)
        for n in [1usize, 2, 4, 16, 256] {
            let nf = n as f64;
            let closed = nf * std::f64::consts::PI.sqrt() * (nf.ln() - 0.5);
            let q = mixture_entropy_integral(&vec![0.0; n]).unwrap();
            assert!(
                (q - closed).abs() < 1e-11 * closed.abs().max(1.0),
                "n={n}: {q} vs {closed}"
            );
        }
    }

    #[test]
    fn probe_length_checked() {
        assert!(calibrate_xi::<f64>(2, Some(&[0.0; 3])).is_err());
        assert!(calibrate_xi::<f64>(0, None).is_err());
    }

    #[test]
    fn probe_at_zero_matches_cached() {
        let (a, b) = calibrate_xi::<f64>(3, None).unwrap();
        let (c, _) = calibrate_xi::<f64>(3, Some(&[0.0; 8])).unwrap();
        assert_eq!(a, b);
        assert!((a - c).abs() < 1e-13);
    }
}
