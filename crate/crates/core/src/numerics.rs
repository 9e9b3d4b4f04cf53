//! Exact combinatorial kernels and the terminating Gauss hypergeometric sum.
//!
//! Every closed form in the crate reduces to finite sums of binomial
//! products. Binomials are built in `u128` and converted once, and all sums
//! go through [`CompensatedSum`].

use crate::error::{Error, Result};

/// Largest `n` accepted by [`binomial`].
pub const BINOMIAL_CAP: u32 = 64;

/// Exact `C(n, k)`; zero when `k > n`.
pub fn binomial_exact(n: u32, k: u32) -> Result<u128> {
    if n > BINOMIAL_CAP {
        return Err(Error::PhotonCap { value: n, cap: BINOMIAL_CAP });
    }
    Ok(binomial_u128(n, k))
}

/// `C(n, k)` as a float. Zero when `k > n`, error when `n` exceeds the cap.
pub fn binomial(n: u32, k: u32) -> Result<f64> {
    binomial_exact(n, k).map(|c| c as f64)
}

pub(crate) fn binomial_u128(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k) as u128;
    let n = n as u128;
    // Each partial product is itself a binomial, so the division is exact.
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// Caller guarantees `n <= BINOMIAL_CAP` (enforced at state construction).
pub(crate) fn binom(n: u32, k: u32) -> f64 {
    debug_assert!(n <= BINOMIAL_CAP);
    binomial_u128(n, k) as f64
}

/// Rising factorial `(x)_n = x (x + 1) ... (x + n - 1)`, with `(x)_0 = 1`.
pub fn pochhammer(x: f64, n: u32) -> f64 {
    (0..n).map(|i| x + i as f64).product()
}

/// `2F1(-a, -b; c; z)` for non-negative integers `a`, `b`.
///
/// The series truncates at `min(a, b)` because `(-a)_n` vanishes for `n > a`,
/// so this is an exact finite sum. Terms are generated by the ratio
/// recurrence and accumulated with compensation.
pub fn hyp2f1_terminating(a_neg: u32, b_neg: u32, c: f64, z: f64) -> f64 {
    debug_assert!(c > 0.0, "c must be positive");
    let a = -(a_neg as f64);
    let b = -(b_neg as f64);
    let mut term = 1.0;
    let mut sum = CompensatedSum::new();
    sum.add(term);
    for n in 0..a_neg.min(b_neg) {
        let n = n as f64;
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z;
        sum.add(term);
    }
    sum.value()
}

/// Power restricted to `base` in `[0, 1]` and `exponent >= 0`, with `0^0 = 1`.
pub fn safe_pow(base: f64, exponent: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&base), "base {base} outside [0, 1]");
    debug_assert!(exponent >= 0.0, "negative exponent {exponent}");
    if exponent == 0.0 {
        1.0
    } else if exponent.fract() == 0.0 && exponent <= i32::MAX as f64 {
        base.powi(exponent as i32)
    } else {
        base.powf(exponent)
    }
}

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        iter.into_iter().for_each(|x| s.add(x));
        s
    }
}

/// Compensated sum of an iterator of terms.
pub fn sum_compensated<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    terms.into_iter().collect::<CompensatedSum>().value()
}
