//! Parity detection transformed back through the output beam splitter.
//!
//! In the number basis the transformed parity is
//! `Q = sum_n i^n sum_k (-1)^k |k, n-k><n-k, k|`, and for the twin Fock
//! density matrix `Tr(Q rho) = K1 + K2 cos(dm (phi - pi/2))`. The `pi/2`
//! offset comes from the `i^n` factors acting on the coherence blocks.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{binom, hyp2f1_terminating, safe_pow, sum_compensated, BINOMIAL_CAP};
use crate::sparse::{truncated_basis, ModePair, SparseOperator};
use crate::state_channel::{LossPair, Phase, TwinFockState, TwoModeDensityMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct ParityOperator {
    entries: SparseOperator,
    n_max: u32,
}

impl ParityOperator {
    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn operator(&self) -> &SparseOperator {
        &self.entries
    }

    pub fn squared(&self) -> SparseOperator {
        self.entries.matmul(&self.entries)
    }

    /// Entrywise distance of `Q^2` from the identity on the cutoff space.
    pub fn involution_defect(&self) -> f64 {
        self.squared().max_abs_diff(&SparseOperator::identity(self.n_max))
    }
}

/// Builds `Q` on all states with at most `n_max` photons.
pub fn parity_operator(n_max: u32) -> Result<ParityOperator> {
    if n_max > BINOMIAL_CAP {
        return Err(Error::PhotonCap { value: n_max, cap: BINOMIAL_CAP });
    }
    let i_pow = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, -1.0),
    ];
    let mut entries = SparseOperator::new();
    for n in 0..=n_max {
        for k in 0..=n {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            entries.add(ModePair::new(k, n - k), ModePair::new(n - k, k), i_pow[(n % 4) as usize] * sign);
        }
    }
    debug_assert_eq!(entries.len(), truncated_basis(n_max).len());
    Ok(ParityOperator { entries, n_max })
}

/// Offset `K1` and amplitude `K2` of the parity fringe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FringeCoefficients {
    pub k1: f64,
    pub k2: f64,
}

/// Fringe coefficients as finite binomial sums; regular at zero loss.
pub fn fringe_coefficients(state: TwinFockState, loss: LossPair) -> FringeCoefficients {
    let (m, mp, dm) = (state.m(), state.m_prime(), state.delta_m());
    let (ta, ra) = (loss.transmission_a(), loss.reflectance_a());
    let (tb, rb) = (loss.transmission_b(), loss.reflectance_b());
    let p = |base: f64, exp: u32| safe_pow(base, exp as f64);
    let tt = ta * tb;

    let k1 = 0.5
        * sum_compensated((0..=mp).map(|k| {
            binom(m, k)
                * binom(mp, k)
                * p(tt, k)
                * (p(ra, m - k) * p(rb, mp - k) + p(ra, mp - k) * p(rb, m - k))
        }));

    let half_dm = 0.5 * dm as f64;
    let k2 = safe_pow(ta, half_dm)
        * safe_pow(tb, half_dm)
        * sum_compensated((0..=mp).map(|k| {
            binom(m, dm + k) * binom(mp, k) * p(tt, k) * p(ra * rb, mp - k)
        }));

    FringeCoefficients { k1, k2 }
}

/// Same coefficients through `2F1(.; .; T_a T_b / (R_a R_b))`.
///
/// The argument diverges when either arm is lossless, so this returns `None`
/// unless both reflectances are positive.
pub fn fringe_coefficients_hypergeometric(
    state: TwinFockState,
    loss: LossPair,
) -> Option<FringeCoefficients> {
    let (ra, rb) = (loss.reflectance_a(), loss.reflectance_b());
    if ra <= 0.0 || rb <= 0.0 {
        return None;
    }
    let (m, mp, dm) = (state.m(), state.m_prime(), state.delta_m());
    let (ta, tb) = (loss.transmission_a(), loss.transmission_b());
    let z = ta * tb / (ra * rb);
    let p = |base: f64, exp: u32| safe_pow(base, exp as f64);

    let k1 = 0.5 * (p(ra, mp) * p(rb, m) + p(ra, m) * p(rb, mp)) * hyp2f1_terminating(m, mp, 1.0, z);
    let k2 = p(ra * rb, mp)
        * safe_pow(ta * tb, 0.5 * dm as f64)
        * binom(m, dm)
        * hyp2f1_terminating(mp, mp, 1.0 + dm as f64, z);
    Some(FringeCoefficients { k1, k2 })
}

/// Fringe argument `dm (phi - pi/2)`.
pub(crate) fn fringe_angle(state: TwinFockState, phase: Phase) -> f64 {
    state.delta_m() as f64 * (phase.radians() - FRAC_PI_2)
}

/// `<Q> = K1 + K2 cos(dm (phi - pi/2))`.
pub fn parity_expectation(state: TwinFockState, loss: LossPair, phase: Phase) -> f64 {
    let FringeCoefficients { k1, k2 } = fringe_coefficients(state, loss);
    k1 + k2 * fringe_angle(state, phase).cos()
}

/// `Re Tr(Q rho)` evaluated entry by entry.
pub fn parity_expectation_trace(rho: &TwoModeDensityMatrix, op: &ParityOperator) -> Result<f64> {
    let required = rho.max_photons();
    if op.n_max() < required {
        return Err(Error::CutoffTooSmall { cutoff: op.n_max(), required });
    }
    let value = op.operator().trace_product(rho.operator());
    debug_assert!(value.im.abs() <= 1e-12, "imaginary parity expectation {}", value.im);
    Ok(value.re)
}
