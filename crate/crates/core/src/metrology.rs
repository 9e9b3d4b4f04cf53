//! Visibility, phase sensitivity, and the shot-noise / Heisenberg benchmarks.

use std::f64::consts::PI;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numerics::binom;
use crate::parity::{fringe_angle, fringe_coefficients, FringeCoefficients};
use crate::state_channel::{LossPair, Phase, TwinFockState};

/// Denominators below this are treated as a fringe extremum.
pub const DIVERGENCE_THRESHOLD: f64 = 1e-14;

/// Default bracket width at which the optimal-phase search stops.
pub const PHASE_TOLERANCE: f64 = 1e-10;

/// A phase uncertainty or limit that may diverge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Uncertainty {
    Finite(f64),
    Divergent,
}

impl Uncertainty {
    pub fn value(self) -> Option<f64> {
        match self {
            Uncertainty::Finite(v) => Some(v),
            Uncertainty::Divergent => None,
        }
    }

    pub fn is_divergent(self) -> bool {
        matches!(self, Uncertainty::Divergent)
    }

    /// `+inf` for the sentinel, so values can be ordered.
    pub fn as_f64(self) -> f64 {
        self.value().unwrap_or(f64::INFINITY)
    }
}

impl Serialize for Uncertainty {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Uncertainty::Finite(v) => serializer.serialize_f64(*v),
            Uncertainty::Divergent => serializer.serialize_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VisibilityReport {
    pub signal: f64,
    pub visibility: f64,
    pub loss: LossPair,
    pub state: TwinFockState,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SensitivityPoint {
    pub phi: Phase,
    pub delta_phi: Uncertainty,
    pub shot_noise_limit: Uncertainty,
    pub heisenberg_limit: Uncertainty,
    pub effective_photons: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Limits {
    pub snl: f64,
    pub hl: f64,
}

fn signal(fringe: FringeCoefficients) -> f64 {
    let total = fringe.k1 + fringe.k2;
    assert!(total > 0.0, "K1 + K2 vanished");
    fringe.k2 / total
}

/// Signal `K2 / (K1 + K2)` and its value relative to the lossless signal.
pub fn visibility(state: TwinFockState, loss: LossPair) -> VisibilityReport {
    let s = signal(fringe_coefficients(state, loss));
    let s0 = signal(fringe_coefficients(state, LossPair::lossless()));
    VisibilityReport { signal: s, visibility: s / s0, loss, state }
}

/// Transmitted photon number `(m + m') (1 - L_a/2 - L_b/2)`.
pub fn effective_photons(state: TwinFockState, loss: LossPair) -> f64 {
    state.total() as f64 * (1.0 - 0.5 * loss.loss_a() - 0.5 * loss.loss_b())
}

/// Shot-noise limit `1/sqrt(N)` and Heisenberg limit `1/N`.
pub fn limits(state: TwinFockState, loss: LossPair) -> Result<Limits> {
    let n = effective_photons(state, loss);
    if n <= 0.0 {
        return Err(Error::NoTransmittedPhotons);
    }
    Ok(Limits { snl: 1.0 / n.sqrt(), hl: 1.0 / n })
}

/// `dm^2 > m + m'`, the condition for parity detection to reach below the
/// shot-noise limit.
pub fn beats_snl_criterion(state: TwinFockState) -> bool {
    let dm = state.delta_m() as u64;
    dm * dm > state.total() as u64
}

fn delta_phi(state: TwinFockState, fringe: FringeCoefficients, phase: Phase) -> Uncertainty {
    let FringeCoefficients { k1, k2 } = fringe;
    let angle = fringe_angle(state, phase);
    let slope = k2 * state.delta_m() as f64 * angle.sin().abs();
    if slope < DIVERGENCE_THRESHOLD {
        return Uncertainty::Divergent;
    }
    // Q^2 = 1, so the variance is 1 - <Q>^2 = (1 - <Q>)(1 + <Q>). The half-angle
    // form avoids cancellation next to the divergence walls.
    let (s, c) = (0.5 * angle).sin_cos();
    let below = (1.0 - k1 - k2) + 2.0 * k2 * s * s;
    let above = (1.0 + k1 - k2) + 2.0 * k2 * c * c;
    Uncertainty::Finite((below * above).max(0.0).sqrt() / slope)
}

fn point(state: TwinFockState, loss: LossPair, phase: Phase, value: Uncertainty) -> SensitivityPoint {
    let (snl, hl) = match limits(state, loss) {
        Ok(l) => (Uncertainty::Finite(l.snl), Uncertainty::Finite(l.hl)),
        Err(_) => (Uncertainty::Divergent, Uncertainty::Divergent),
    };
    SensitivityPoint {
        phi: phase,
        delta_phi: value,
        shot_noise_limit: snl,
        heisenberg_limit: hl,
        effective_photons: effective_photons(state, loss),
    }
}

/// Linear error propagation `sqrt(1 - <Q>^2) / |d<Q>/dphi|`.
pub fn sensitivity(state: TwinFockState, loss: LossPair, phase: Phase) -> SensitivityPoint {
    let fringe = fringe_coefficients(state, loss);
    point(state, loss, phase, delta_phi(state, fringe, phase))
}

/// Phases of lossless optimal sensitivity in `(0, 2 pi / dm]`.
///
/// These sit midway between the divergences at the fringe extrema:
/// `(2n - 1) pi / (2 dm)` for even `dm`, `n pi / dm` for odd `dm`.
pub fn analytic_optimal_phases(state: TwinFockState) -> [f64; 2] {
    let dm = state.delta_m() as f64;
    if state.delta_m().is_multiple_of(2) {
        [PI / (2.0 * dm), 3.0 * PI / (2.0 * dm)]
    } else {
        [PI / dm, 2.0 * PI / dm]
    }
}

pub fn optimal_sensitivity(state: TwinFockState, loss: LossPair) -> SensitivityPoint {
    optimal_sensitivity_with_tolerance(state, loss, PHASE_TOLERANCE)
}

/// Minimum of `delta_phi` over one fringe period.
///
/// Each of the two inter-divergence windows in a period is scanned on a
/// coarse grid centred on its analytic optimum, then refined by golden-section
/// search around the best grid point. The analytic seed is kept unless the
/// refinement improves on it, which pins the answer on the flat lossless
/// landscape.
pub fn optimal_sensitivity_with_tolerance(
    state: TwinFockState,
    loss: LossPair,
    tolerance: f64,
) -> SensitivityPoint {
    const GRID: usize = 64;
    let fringe = fringe_coefficients(state, loss);
    let objective = |phi: f64| delta_phi(state, fringe, Phase(phi)).as_f64();
    let half_window = PI / (2.0 * state.delta_m() as f64);
    let step = 2.0 * half_window / GRID as f64;

    let mut best: Option<(f64, f64)> = None;
    for seed in analytic_optimal_phases(state) {
        let seed_value = objective(seed);
        let (grid_phi, grid_value) = (1..GRID)
            .map(|i| seed - half_window + i as f64 * step)
            .map(|phi| (phi, objective(phi)))
            .fold((seed, seed_value), |acc, cand| if cand.1 < acc.1 { cand } else { acc });
        let (mut phi, mut value) = golden_section_minimize(objective, grid_phi - step, grid_phi + step, tolerance);
        if grid_value < value {
            (phi, value) = (grid_phi, grid_value);
        }
        // Below this margin the improvement is rounding noise.
        if value >= seed_value * (1.0 - 1e-12) {
            (phi, value) = (seed, seed_value);
        }
        if best.is_none_or(|(_, v)| value < v * (1.0 - 1e-12)) {
            best = Some((phi, value));
        }
    }

    let (phi, _) = best.expect("two windows per period");
    let phase = Phase(phi);
    point(state, loss, phase, delta_phi(state, fringe, phase))
}

/// Golden-section search for the minimum of `f` on `[a, b]`; returns `(x, f(x))`.
pub fn golden_section_minimize(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tolerance: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while (b - a).abs() > tolerance {
        if f1 <= f2 {
            b = x2;
            (x2, f2) = (x1, f1);
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            (x1, f1) = (x2, f2);
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpansionRegime {
    NearZero,
    NearHalf,
    NearOne,
}

/// Leading-order expansion of `1 - V` for equal-arm loss `loss`.
pub fn visibility_complement_expansion(state: TwinFockState, loss: f64, regime: ExpansionRegime) -> f64 {
    let dm = state.delta_m();
    let total = state.total() as f64;
    let c = binom(state.m(), dm);
    match regime {
        ExpansionRegime::NearZero => c * loss.powi(dm as i32),
        ExpansionRegime::NearHalf => 0.5 + (dm * dm) as f64 / total * (loss - 0.5),
        ExpansionRegime::NearOne => 1.0 - c * (1.0 - loss).powi(dm as i32),
    }
}

/// First-order small-loss formula
/// `1/dm + (m + m')/dm * trig(dm phi) * L`, with `trig = csc` for even `dm`
/// and `sec` for odd `dm`, evaluated at the phase exactly as given.
///
/// The trig factor is signed, so the formula tracks [`sensitivity`] only
/// where `|trig| = 1`; elsewhere the true first-order coefficient is
/// `1 / sin^2(dm (phi - pi/2))`.
pub fn sensitivity_smallloss_expansion(state: TwinFockState, loss: f64, phase: Phase) -> f64 {
    let dm = state.delta_m() as f64;
    let arg = dm * phase.radians();
    let trig = if state.delta_m().is_multiple_of(2) { 1.0 / arg.sin() } else { 1.0 / arg.cos() };
    1.0 / dm + state.total() as f64 / dm * trig * loss
}
