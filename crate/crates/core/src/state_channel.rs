//! Twin Fock inputs `|m::m'>`, the lossy two-arm channel, and the resulting
//! stage-III density matrix.
//!
//! Loss in each arm is a fictitious beam splitter with real coefficients
//! `t = sqrt(T)`, `r = sqrt(R)`. The closed form below carries the factor
//! one half inside each `d_i`; the branch amplitudes only contribute phases,
//! which keeps the trace at one.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{binom, safe_pow, BINOMIAL_CAP};
use crate::sparse::{ModePair, SparseOperator};

/// `(|m, m'> + |m', m>) / sqrt(2)` with `m > m'`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct TwinFockState {
    m: u32,
    #[serde(rename = "mprime")]
    m_prime: u32,
}

impl TwinFockState {
    pub fn new(m: u32, m_prime: u32) -> Result<Self> {
        if m <= m_prime {
            return Err(Error::DegenerateState { m, m_prime });
        }
        if m > BINOMIAL_CAP {
            return Err(Error::PhotonCap { value: m, cap: BINOMIAL_CAP });
        }
        Ok(Self { m, m_prime })
    }

    /// `|n::0>`, the N00N state.
    pub fn noon(n: u32) -> Result<Self> {
        Self::new(n, 0)
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn m_prime(&self) -> u32 {
        self.m_prime
    }

    pub fn delta_m(&self) -> u32 {
        self.m - self.m_prime
    }

    pub fn total(&self) -> u32 {
        self.m + self.m_prime
    }
}

impl fmt::Display for TwinFockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{}::{}>", self.m, self.m_prime)
    }
}

/// Per-arm loss rates. Transmission is `1 - L`, reflectance is `L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossPair {
    loss_a: f64,
    loss_b: f64,
}

impl LossPair {
    pub fn new(loss_a: f64, loss_b: f64) -> Result<Self> {
        for (arm, value) in [('a', loss_a), ('b', loss_b)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::LossOutOfRange { arm, value });
            }
        }
        Ok(Self { loss_a, loss_b })
    }

    pub fn equal(loss: f64) -> Result<Self> {
        Self::new(loss, loss)
    }

    pub fn lossless() -> Self {
        Self { loss_a: 0.0, loss_b: 0.0 }
    }

    pub fn loss_a(&self) -> f64 {
        self.loss_a
    }

    pub fn loss_b(&self) -> f64 {
        self.loss_b
    }

    pub fn transmission_a(&self) -> f64 {
        1.0 - self.loss_a
    }

    pub fn transmission_b(&self) -> f64 {
        1.0 - self.loss_b
    }

    pub fn reflectance_a(&self) -> f64 {
        self.loss_a
    }

    pub fn reflectance_b(&self) -> f64 {
        self.loss_b
    }

    /// Arms exchanged.
    pub fn swapped(&self) -> Self {
        Self { loss_a: self.loss_b, loss_b: self.loss_a }
    }

    /// `(1 - L_a, 1 - L_b)`.
    pub fn complement(&self) -> Self {
        Self { loss_a: 1.0 - self.loss_a, loss_b: 1.0 - self.loss_b }
    }
}

/// Phase accumulated on arm b, in radians.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct Phase(pub(crate) f64);

impl Phase {
    pub fn new(phi: f64) -> Result<Self> {
        if !phi.is_finite() {
            return Err(Error::NonFinitePhase(phi));
        }
        Ok(Self(phi))
    }

    pub fn zero() -> Self {
        Self(0.0)
    }

    pub fn radians(&self) -> f64 {
        self.0
    }
}

/// Which of the four block coefficients of the output density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coefficient {
    /// `|k, k'><k, k'|` from the `|m, m'>` branch.
    D1,
    /// `|k', k><k', k|` from the `|m', m>` branch.
    D2,
    /// `|dm + k, k'><k, dm + k'|` coherence.
    D3,
    /// `|k', dm + k><dm + k', k|` coherence.
    D4,
}

/// Block coefficient `d_i(k, k')`. Indices outside the summation range give zero.
pub fn coefficient_d(
    which: Coefficient,
    state: TwinFockState,
    loss: LossPair,
    k: u32,
    k_prime: u32,
) -> f64 {
    let (m, mp, dm) = (state.m, state.m_prime, state.delta_m());
    let (ta, ra) = (loss.transmission_a(), loss.reflectance_a());
    let (tb, rb) = (loss.transmission_b(), loss.reflectance_b());
    let p = |base: f64, exp: u32| safe_pow(base, exp as f64);

    match which {
        Coefficient::D1 | Coefficient::D2 => {
            if k > m || k_prime > mp {
                return 0.0;
            }
            let weight = 0.5 * binom(m, k) * binom(mp, k_prime);
            match which {
                Coefficient::D1 => weight * p(ta, k) * p(ra, m - k) * p(tb, k_prime) * p(rb, mp - k_prime),
                _ => weight * p(ta, k_prime) * p(ra, mp - k_prime) * p(tb, k) * p(rb, m - k),
            }
        }
        Coefficient::D3 | Coefficient::D4 => {
            if k > mp || k_prime > mp {
                return 0.0;
            }
            let weight = 0.5
                * (binom(m, dm + k) * binom(m, dm + k_prime) * binom(mp, k) * binom(mp, k_prime)).sqrt();
            // d4(k, k') is d3 with the two indices exchanged.
            let (ka, kb) = match which {
                Coefficient::D3 => (k, k_prime),
                _ => (k_prime, k),
            };
            weight
                * safe_pow(ta, 0.5 * (dm + 2 * ka) as f64)
                * p(ra, mp - ka)
                * safe_pow(tb, 0.5 * (dm + 2 * kb) as f64)
                * p(rb, mp - kb)
        }
    }
}

/// Stage-III two-mode density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeDensityMatrix {
    entries: SparseOperator,
    dim_hint: u32,
}

impl TwoModeDensityMatrix {
    fn from_operator(entries: SparseOperator, dim_hint: u32) -> Self {
        Self { entries, dim_hint }
    }

    pub fn entry(&self, row: ModePair, col: ModePair) -> Complex64 {
        self.entries.get(row, col)
    }

    pub fn operator(&self) -> &SparseOperator {
        &self.entries
    }

    /// Photon number of the lossless input, an upper bound on any occupied total.
    pub fn dim_hint(&self) -> u32 {
        self.dim_hint
    }

    pub fn max_photons(&self) -> u32 {
        self.entries.max_photons()
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.entries.hermiticity_defect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.entries.hermitian_eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn max_abs_diff(&self, other: &TwoModeDensityMatrix) -> f64 {
        self.entries.max_abs_diff(&other.entries)
    }

    /// Conjugates by `exp(i phi b^dagger b)`.
    pub fn with_phase_shift(&self, phase: Phase) -> TwoModeDensityMatrix {
        let phi = phase.radians();
        let mut shifted = SparseOperator::new();
        for (r, c, v) in self.entries.iter() {
            let angle = phi * (r.b as f64 - c.b as f64);
            shifted.add(r, c, v * Complex64::from_polar(1.0, angle));
        }
        Self::from_operator(shifted, self.dim_hint)
    }
}

/// Closed-form output density matrix built from the block coefficients.
pub fn lossy_density_matrix(
    state: TwinFockState,
    loss: LossPair,
    phase: Phase,
) -> TwoModeDensityMatrix {
    let (m, mp, dm) = (state.m, state.m_prime, state.delta_m());
    let mut rho = SparseOperator::new();
    let mut push = |row: ModePair, col: ModePair, value: Complex64| {
        if value != Complex64::default() {
            rho.add(row, col, value);
        }
    };

    for k in 0..=m {
        for kp in 0..=mp {
            let d1 = coefficient_d(Coefficient::D1, state, loss, k, kp);
            let d2 = coefficient_d(Coefficient::D2, state, loss, k, kp);
            let x = ModePair::new(k, kp);
            let y = ModePair::new(kp, k);
            push(x, x, d1.into());
            push(y, y, d2.into());
        }
    }

    // alpha beta^* = exp(-i dm phi) / 2; the 1/2 already sits in d3, d4.
    let coherence = Complex64::from_polar(1.0, -(dm as f64) * phase.radians());
    for k in 0..=mp {
        for kp in 0..=mp {
            let d3 = coefficient_d(Coefficient::D3, state, loss, k, kp);
            let d4 = coefficient_d(Coefficient::D4, state, loss, k, kp);
            push(ModePair::new(dm + k, kp), ModePair::new(k, dm + kp), coherence * d3);
            push(ModePair::new(kp, dm + k), ModePair::new(dm + kp, k), coherence.conj() * d4);
        }
    }

    TwoModeDensityMatrix::from_operator(rho, state.total())
}

/// Largest `m + m'` accepted by [`oracle_density_matrix`].
pub const ORACLE_CAP: u32 = 12;

/// Output density matrix by explicit purification.
///
/// Each arm's Fock ket is split at its beam splitter into output and
/// environment modes, the four-mode pure state is assembled for both
/// branches, and the environment is traced out. Nothing here uses the block
/// coefficients of [`coefficient_d`].
pub fn oracle_density_matrix(
    state: TwinFockState,
    loss: LossPair,
    phase: Phase,
) -> Result<TwoModeDensityMatrix> {
    if state.total() > ORACLE_CAP {
        return Err(Error::OracleCap { total: state.total(), cap: ORACLE_CAP });
    }
    let (m, mp) = (state.m, state.m_prime);
    let phi = phase.radians();
    let norm = std::f64::consts::FRAC_1_SQRT_2;
    let branches = [
        ((m, mp), Complex64::from_polar(norm, mp as f64 * phi)),
        ((mp, m), Complex64::from_polar(norm, m as f64 * phi)),
    ];

    // Amplitude for an n-photon ket to leave k photons in the output port.
    let split = |n: u32, k: u32, transmission: f64| -> f64 {
        (binom(n, k) * safe_pow(transmission, k as f64) * safe_pow(1.0 - transmission, (n - k) as f64))
            .sqrt()
    };

    // (environment occupation) -> [(output occupation, amplitude)]
    let mut purified: BTreeMap<ModePair, BTreeMap<ModePair, Complex64>> = BTreeMap::new();
    for ((na, nb), branch_amp) in branches {
        for ka in 0..=na {
            let amp_a = split(na, ka, loss.transmission_a());
            for kb in 0..=nb {
                let amp = branch_amp * amp_a * split(nb, kb, loss.transmission_b());
                if amp.norm() == 0.0 {
                    continue;
                }
                let env = ModePair::new(na - ka, nb - kb);
                *purified
                    .entry(env)
                    .or_default()
                    .entry(ModePair::new(ka, kb))
                    .or_default() += amp;
            }
        }
    }

    let mut rho = SparseOperator::new();
    for outputs in purified.values() {
        for (&row, &u) in outputs {
            for (&col, &v) in outputs {
                rho.add(row, col, u * v.conj());
            }
        }
    }
    Ok(TwoModeDensityMatrix::from_operator(rho, state.total()))
}
