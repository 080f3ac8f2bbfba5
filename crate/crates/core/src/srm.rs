//! Square-root measurement of coherent-state QAM constellations.
//!
//! Linear algebra runs in `f64` complex arithmetic.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{domain, Error, Result};

/// Largest number of superposed configurations `m^K` accepted.
pub const QAM_STATE_CAP: usize = 4096;

/// Relative eigenvalue floor for the Gram pseudo-inverse square root.
pub const EIGEN_FLOOR: f64 = 1e-12;

/// Square grid `α(p + qi)` with `p, q ∈ {-(L-1), -(L-3), …, L-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct QamConstellation {
    side: usize,
    alpha: f64,
    points: Vec<Complex64>,
}

impl QamConstellation {
    /// Constellation of `order = L²` points at scale `alpha`.
    pub fn new(order: usize, alpha: f64) -> Result<Self> {
        let side = (order as f64).sqrt().round() as usize;
        if side < 2 || side * side != order {
            return Err(domain(format!("QAM order {order} is not a square of a side ≥ 2")));
        }
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(domain(format!("scale {alpha} must be finite and nonnegative")));
        }
        let omega = omega_set(side);
        let points = omega
            .iter()
            .flat_map(|&p| {
                omega
                    .iter()
                    .map(move |&q| Complex64::new(alpha * p as f64, alpha * q as f64))
            })
            .collect();
        Ok(Self { side, alpha, points })
    }

    /// Scale giving `mean_photons` average photons per symbol.
    pub fn with_mean_photons(order: usize, mean_photons: f64) -> Result<Self> {
        if !(mean_photons >= 0.0) {
            return Err(domain(format!("mean photon number {mean_photons} must be nonnegative")));
        }
        let probe = Self::new(order, 1.0)?;
        Self::new(order, (mean_photons / probe.mean_photons()).sqrt())
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn order(&self) -> usize {
        self.side * self.side
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Points in lexicographic `(p, q)` order.
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// `α² · 2(L² - 1)/3`.
    pub fn mean_photons(&self) -> f64 {
        let l = self.side as f64;
        self.alpha * self.alpha * 2.0 * (l * l - 1.0) / 3.0
    }
}

/// `{-(L-1) + 2(j-1) : j = 1..L}`.
pub fn omega_set(side: usize) -> Vec<i64> {
    (0..side as i64).map(|j| 2 * j - (side as i64 - 1)).collect()
}

/// `⟨β|β'⟩ = exp(-½|β - β'|² + i Im(β̄ β'))`.
pub fn coherent_overlap(beta: Complex64, beta_prime: Complex64) -> Complex64 {
    let d = beta - beta_prime;
    let phase = (beta.conj() * beta_prime).im;
    Complex64::from_polar((-0.5 * d.norm_sqr()).exp(), phase)
}

/// Gram matrix of a set of coherent states with its eigendecomposition.
#[derive(Clone, Debug)]
pub struct SrmMeasurement {
    gram: DMatrix<Complex64>,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<Complex64>,
    floored: usize,
}

impl SrmMeasurement {
    pub fn from_states(states: &[Complex64]) -> Self {
        let n = states.len();
        let gram = DMatrix::from_fn(n, n, |i, j| coherent_overlap(states[i], states[j]));
        let eig = SymmetricEigen::new(gram.clone());
        let max = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
        let floored = eig.eigenvalues.iter().filter(|&&v| v < EIGEN_FLOOR * max).count();
        Self {
            gram,
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
            floored,
        }
    }

    pub fn gram(&self) -> &DMatrix<Complex64> {
        &self.gram
    }

    /// Eigenvalues before flooring.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<Complex64> {
        &self.eigenvectors
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Eigenvalues treated as zero by the pseudo-inverse.
    pub fn floored_count(&self) -> usize {
        self.floored
    }

    /// `G^{1/2}` with eigenvalues below the floor set to zero.
    pub fn sqrt_gram(&self) -> DMatrix<Complex64> {
        let max = self.eigenvalues.iter().copied().fold(0.0, f64::max);
        let roots = self
            .eigenvalues
            .map(|v| if v < EIGEN_FLOOR * max { 0.0 } else { v.sqrt() });
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= Complex64::new(roots[j], 0.0);
        }
        scaled * v.adjoint()
    }
}

/// Gram matrix of the constellation points.
pub fn gram_matrix(constellation: &QamConstellation) -> SrmMeasurement {
    SrmMeasurement::from_states(constellation.points())
}

/// `Pr(y | i) = |(G^{1/2})_{yi}|²`; row `i` is the sent state, column `y` the outcome.
pub fn srm_probabilities(meas: &SrmMeasurement) -> DMatrix<f64> {
    meas.sqrt_gram().map(|z| z.norm_sqr()).transpose()
}

/// Per-user amplitude gains of the superposed constellation.
#[derive(Clone, Debug, PartialEq)]
pub enum QamGains {
    /// Unit gain for every user.
    Uniform,
    /// User `k` scaled by `L^{k-1}`, which keeps every superposition distinct.
    Nested,
    Explicit(Vec<f64>),
}

impl QamGains {
    fn resolve(&self, users: usize, side: usize) -> Result<Vec<f64>> {
        match self {
            Self::Uniform => Ok(vec![1.0; users]),
            Self::Nested => Ok((0..users).map(|k| (side as f64).powi(k as i32)).collect()),
            Self::Explicit(g) => {
                if g.len() != users {
                    return Err(Error::Dimension {
                        expected: users,
                        got: g.len(),
                    });
                }
                if let Some(x) = g.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
                    return Err(domain(format!("gain {x} must be finite and nonnegative")));
                }
                Ok(g.clone())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QamRate {
    pub bits: f64,
    /// Distinct superposed states after merging coincident ones.
    pub distinct_states: usize,
    pub floored_eigenvalues: usize,
}

fn entropy_bits(p: impl Iterator<Item = f64>) -> f64 {
    p.filter(|&x| x > 0.0).map(|x| -x * x.log2()).sum()
}

/// Sum-rate of `users` users sending equiprobable symbols of `constellation`
/// through the superposition `Σ_k g_k β_k`, decoded jointly by the SRM, bits.
pub fn qam_sum_rate(constellation: &QamConstellation, users: usize, gains: &QamGains) -> Result<QamRate> {
    if users == 0 {
        return Err(domain("at least one user is required"));
    }
    let m = constellation.order();
    let total = (m as u128).checked_pow(users as u32).unwrap_or(u128::MAX);
    if total > QAM_STATE_CAP as u128 {
        return Err(Error::Capacity {
            what: "superposed configuration count",
            requested: total.min(u64::MAX as u128) as u64,
            limit: QAM_STATE_CAP as u64,
            advice: "lower the order or the user count",
        });
    }
    let g = gains.resolve(users, constellation.side())?;
    let quantum = 1e-9 * constellation.alpha() * g.iter().copied().fold(0.0, f64::max);
    let key = |z: Complex64| {
        if quantum > 0.0 {
            ((z.re / quantum).round() as i64, (z.im / quantum).round() as i64)
        } else {
            (0, 0)
        }
    };
    // distinct superpositions with their multiplicities
    let mut classes: BTreeMap<(i64, i64), (Complex64, usize)> = BTreeMap::new();
    let points = constellation.points();
    for config in 0..total as usize {
        let mut rest = config;
        let mut z = Complex64::new(0.0, 0.0);
        for gk in &g {
            z += points[rest % m] * *gk;
            rest /= m;
        }
        classes.entry(key(z)).or_insert((z, 0)).1 += 1;
    }
    let states: Vec<Complex64> = classes.values().map(|c| c.0).collect();
    let weights: Vec<f64> = classes.values().map(|c| c.1 as f64 / total as f64).collect();
    let meas = SrmMeasurement::from_states(&states);
    let kernel = srm_probabilities(&meas);
    let d = states.len();
    let marginal = (0..d).map(|y| (0..d).map(|i| weights[i] * kernel[(i, y)]).sum::<f64>());
    let h_y = entropy_bits(marginal);
    let h_y_given_x: f64 = (0..d)
        .map(|i| weights[i] * entropy_bits((0..d).map(|y| kernel[(i, y)])))
        .sum();
    let bound = users as f64 * (m as f64).log2();
    Ok(QamRate {
        bits: (h_y - h_y_given_x).clamp(0.0, bound),
        distinct_states: d,
        floored_eigenvalues: meas.floored_count(),
    })
}
