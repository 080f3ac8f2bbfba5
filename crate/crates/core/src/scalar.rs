//! Scalar abstraction and the log-domain helpers shared by every module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating-point scalar the analytic core is generic over (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
}

/// `exp(d)` for `d ≤ 0`, flushed to zero once it is below the scalar's
/// resolution relative to one (avoids slow subnormal arithmetic).
#[inline]
pub fn exp_relative<T: Real>(d: T) -> T {
    if d < T::epsilon().ln() - T::lit(2.0) {
        T::zero()
    } else {
        d.exp()
    }
}

/// `ln(Σ exp(x_i))`, returning `-inf` for an empty slice or all `-inf` entries.
pub fn log_sum_exp<T: Real>(xs: &[T]) -> T {
    let max = xs.iter().copied().fold(T::neg_infinity(), T::max);
    if max == T::neg_infinity() {
        return max;
    }
    if max == T::infinity() {
        return max;
    }
    let s: T = xs.iter().map(|&x| exp_relative(x - max)).sum();
    max + s.ln()
}

/// Streaming log-sum-exp accumulator.
#[derive(Clone, Copy, Debug)]
pub struct LogSumExp<T> {
    max: T,
    scaled: T,
}

impl<T: Real> Default for LogSumExp<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> LogSumExp<T> {
    pub fn new() -> Self {
        Self {
            max: T::neg_infinity(),
            scaled: T::zero(),
        }
    }

    pub fn push(&mut self, x: T) {
        if x == T::neg_infinity() {
            return;
        }
        if x <= self.max {
            self.scaled += exp_relative(x - self.max);
        } else {
            self.scaled = self.scaled * exp_relative(self.max - x) + T::one();
            self.max = x;
        }
    }

    pub fn value(&self) -> T {
        if self.max == T::neg_infinity() {
            self.max
        } else {
            self.max + self.scaled.ln()
        }
    }
}

// ln n! - (n + 1/2) ln n + n - ln(2 pi)/2 for n = 1..=15
const STIRLING_ERR: [f64; 15] = [
    0.081_061_466_795_327_258_219_67,
    0.041_340_695_955_409_294_093_82,
    0.027_677_925_684_998_339_148_79,
    0.020_790_672_103_765_093_111_52,
    0.016_644_691_189_821_192_163_19,
    0.013_876_128_823_070_747_998_75,
    0.011_896_709_945_891_770_095_06,
    0.010_411_265_261_972_096_497_48,
    0.009_255_462_182_712_732_917_729,
    0.008_330_563_433_362_871_256_469,
    0.007_573_675_487_951_840_794_972,
    0.006_942_840_107_209_529_865_664,
    0.006_408_994_188_004_207_068_44,
    0.005_951_370_112_758_847_735_624,
    0.005_554_733_551_962_801_371_039,
];

/// Error of Stirling's approximation to `ln n!`.
pub fn stirling_error<T: Real>(n: u64) -> T {
    if n == 0 {
        return T::zero();
    }
    if n <= 15 {
        return T::lit(STIRLING_ERR[(n - 1) as usize]);
    }
    let s0 = T::lit(1.0 / 12.0);
    let s1 = T::lit(1.0 / 360.0);
    let s2 = T::lit(1.0 / 1260.0);
    let s3 = T::lit(1.0 / 1680.0);
    let s4 = T::lit(1.0 / 1188.0);
    let nf = T::from_count(n);
    let nn = nf * nf;
    if n > 500 {
        (s0 - s1 / nn) / nf
    } else if n > 80 {
        (s0 - (s1 - s2 / nn) / nn) / nf
    } else if n > 35 {
        (s0 - (s1 - (s2 - s3 / nn) / nn) / nn) / nf
    } else {
        (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / nf
    }
}

/// `ln n!` for integer `n`.
pub fn ln_factorial<T: Real>(n: u64) -> T {
    if n < 2 {
        return T::zero();
    }
    let nf = T::from_count(n);
    (nf + T::lit(0.5)) * nf.ln() - nf + T::lit(0.5) * T::TAU().ln() + stirling_error(n)
}

/// `ln C(n, k)`; `-inf` when `k > n`.
pub fn ln_binomial<T: Real>(n: u64, k: u64) -> T {
    if k > n {
        return T::neg_infinity();
    }
    ln_factorial::<T>(n) - ln_factorial::<T>(k) - ln_factorial::<T>(n - k)
}

/// Deviance term `x ln(x/m) + m - x`, accurate when `x` is close to `m`.
pub fn bd0<T: Real>(x: T, m: T) -> T {
    if (x - m).abs() < T::lit(0.1) * (x + m) {
        let v = (x - m) / (x + m);
        let mut s = (x - m) * v;
        let mut ej = T::lit(2.0) * x * v;
        let v2 = v * v;
        let mut j = 1u32;
        loop {
            ej *= v2;
            let s1 = s + ej / T::from_u32(2 * j + 1).unwrap();
            if s1 == s {
                return s1;
            }
            s = s1;
            j += 1;
            if j > 1000 {
                return s;
            }
        }
    }
    x * (x / m).ln() + m - x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lse_matches_naive() {
        let xs = [0.1f64, -2.0, 3.5, 1.25];
        let naive = xs.iter().map(|x| x.exp()).sum::<f64>().ln();
        assert!((log_sum_exp(&xs) - naive).abs() < 1e-14);
        let mut acc = LogSumExp::new();
        for &x in &xs {
            acc.push(x);
        }
        assert!((acc.value() - naive).abs() < 1e-14);
    }

    #[test]
    fn lse_handles_neg_infinity() {
        assert_eq!(log_sum_exp::<f64>(&[]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY, 0.0]), 0.0);
        let mut acc = LogSumExp::<f64>::new();
        acc.push(f64::NEG_INFINITY);
        assert_eq!(acc.value(), f64::NEG_INFINITY);
    }

    #[test]
    fn factorials_match_products() {
        let mut prod = 1.0f64;
        for n in 1..=40u64 {
            prod *= n as f64;
            let rel = (ln_factorial::<f64>(n) - prod.ln()).abs() / prod.ln().max(1.0);
            assert!(rel < 1e-14, "n={n}");
        }
    }

    #[test]
    fn binomials() {
        assert!((ln_binomial::<f64>(10, 3) - 120f64.ln()).abs() < 1e-13);
        assert_eq!(ln_binomial::<f64>(4, 0), 0.0);
        assert_eq!(ln_binomial::<f64>(3, 5), f64::NEG_INFINITY);
    }
}
