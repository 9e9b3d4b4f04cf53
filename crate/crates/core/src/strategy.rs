//! Grid sweeps and state recommendation under a loss budget.

use std::cmp::Ordering;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrology::{
    beats_snl_criterion, optimal_sensitivity_with_tolerance, sensitivity, visibility, Uncertainty,
    PHASE_TOLERANCE,
};
use crate::parity::parity_expectation;
use crate::state_channel::{LossPair, Phase, TwinFockState};

/// Default bound on `m + m'` for enumerated candidates.
pub const DEFAULT_MAX_TOTAL: u32 = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    states: Vec<TwinFockState>,
    losses: Vec<LossPair>,
    phases: Vec<Phase>,
}

impl SweepGrid {
    /// Equal loss in both arms for each value of `losses`.
    pub fn equal_arms(states: Vec<TwinFockState>, losses: &[f64], phases: Vec<Phase>) -> Result<Self> {
        let losses = losses.iter().map(|&l| LossPair::equal(l)).collect::<Result<Vec<_>>>()?;
        Self::from_parts(states, losses, phases)
    }

    /// Every `(loss_a, loss_b)` combination, `loss_a` varying slowest.
    pub fn product(
        states: Vec<TwinFockState>,
        loss_a: &[f64],
        loss_b: &[f64],
        phases: Vec<Phase>,
    ) -> Result<Self> {
        let mut losses = Vec::with_capacity(loss_a.len() * loss_b.len());
        for &la in loss_a {
            for &lb in loss_b {
                losses.push(LossPair::new(la, lb)?);
            }
        }
        Self::from_parts(states, losses, phases)
    }

    pub fn from_parts(states: Vec<TwinFockState>, losses: Vec<LossPair>, phases: Vec<Phase>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidGrid("no states".into()));
        }
        if losses.is_empty() {
            return Err(Error::InvalidGrid("no loss values".into()));
        }
        Ok(Self { states, losses, phases })
    }

    pub fn states(&self) -> &[TwinFockState] {
        &self.states
    }

    pub fn losses(&self) -> &[LossPair] {
        &self.losses
    }

    pub fn phases(&self) -> &[Phase] {
        &self.phases
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Visibility,
    Expectation,
    Sensitivity,
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "visibility" => Ok(Quantity::Visibility),
            "expectation" => Ok(Quantity::Expectation),
            "sensitivity" => Ok(Quantity::Sensitivity),
            _ => Err(Error::UnknownName { kind: "quantity", name: s.to_string() }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub state: TwinFockState,
    pub loss: LossPair,
    /// `None` for visibility, which does not depend on phase.
    pub phi: Option<Phase>,
    pub value: Uncertainty,
}

/// Evaluates `quantity` at every grid point.
///
/// Rows come out ordered by state, then loss, then phase, regardless of how
/// the points were scheduled.
pub fn sweep(grid: &SweepGrid, quantity: Quantity) -> Result<Vec<SweepRow>> {
    let mut points = Vec::new();
    for &state in &grid.states {
        for &loss in &grid.losses {
            if quantity == Quantity::Visibility {
                points.push((state, loss, None));
            } else {
                points.extend(grid.phases.iter().map(|&p| (state, loss, Some(p))));
            }
        }
    }
    if points.is_empty() {
        return Err(Error::InvalidGrid(format!("{quantity:?} sweep needs at least one phase")));
    }

    Ok(points
        .into_par_iter()
        .map(|(state, loss, phi)| {
            let value = match (quantity, phi) {
                (Quantity::Visibility, _) => Uncertainty::Finite(visibility(state, loss).visibility),
                (Quantity::Expectation, Some(p)) => Uncertainty::Finite(parity_expectation(state, loss, p)),
                (Quantity::Sensitivity, Some(p)) => sensitivity(state, loss, p).delta_phi,
                _ => unreachable!("phase-dependent quantity without a phase"),
            };
            SweepRow { state, loss, phi, value }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    /// `m - m' = delta_m` and `m + m' <= max_total`.
    FixedDeltaM { delta_m: u32, max_total: u32 },
    /// Every `m > m' >= 0` with `m + m' <= n`.
    MaxTotal(u32),
}

impl Constraint {
    pub fn candidates(&self) -> Result<Vec<TwinFockState>> {
        let pairs: Vec<(u32, u32)> = match *self {
            Constraint::FixedDeltaM { delta_m, max_total } if delta_m > 0 => (0..)
                .map(|mp| (mp + delta_m, mp))
                .take_while(|&(m, mp)| m + mp <= max_total)
                .collect(),
            Constraint::FixedDeltaM { .. } => Vec::new(),
            Constraint::MaxTotal(n) => (1..=n)
                .flat_map(|m| (0..m).map(move |mp| (m, mp)))
                .filter(|&(m, mp)| m + mp <= n)
                .collect(),
        };
        if pairs.is_empty() {
            return Err(Error::EmptyCandidates);
        }
        pairs.into_iter().map(|(m, mp)| TwinFockState::new(m, mp)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Visibility,
    OptimalSensitivity,
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "visibility" => Ok(Objective::Visibility),
            "optimal_sensitivity" | "sensitivity" => Ok(Objective::OptimalSensitivity),
            _ => Err(Error::UnknownName { kind: "objective", name: s.to_string() }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecommendationEntry {
    pub state: TwinFockState,
    pub objective_value: Uncertainty,
    pub objective: Objective,
    pub rank: usize,
    pub beats_snl: bool,
}

pub fn recommend(loss: LossPair, constraint: Constraint, objective: Objective) -> Result<Vec<RecommendationEntry>> {
    recommend_with_tolerance(loss, constraint, objective, PHASE_TOLERANCE)
}

/// Ranks every candidate; the first entry is the recommendation.
///
/// Visibility ranks descending and sensitivity ascending. Ties go to the
/// state with fewer photons, then smaller `m`.
pub fn recommend_with_tolerance(
    loss: LossPair,
    constraint: Constraint,
    objective: Objective,
    tolerance: f64,
) -> Result<Vec<RecommendationEntry>> {
    let mut scored: Vec<(TwinFockState, Uncertainty)> = constraint
        .candidates()?
        .into_par_iter()
        .map(|state| {
            let value = match objective {
                Objective::Visibility => Uncertainty::Finite(visibility(state, loss).visibility),
                Objective::OptimalSensitivity => {
                    optimal_sensitivity_with_tolerance(state, loss, tolerance).delta_phi
                }
            };
            (state, value)
        })
        .collect();

    scored.sort_by(|(sa, va), (sb, vb)| {
        let (ka, kb) = (tie_key(*va), tie_key(*vb));
        let by_value = match objective {
            Objective::Visibility => kb.total_cmp(&ka),
            Objective::OptimalSensitivity => ka.total_cmp(&kb),
        };
        by_value
            .then_with(|| sa.total().cmp(&sb.total()))
            .then_with(|| sa.m().cmp(&sb.m()))
    });

    Ok(scored
        .into_iter()
        .enumerate()
        .map(|(i, (state, objective_value))| RecommendationEntry {
            state,
            objective_value,
            objective,
            rank: i + 1,
            beats_snl: beats_snl_criterion(state),
        })
        .collect())
}

/// Objective values agreeing to 12 significant digits count as tied.
fn tie_key(value: Uncertainty) -> f64 {
    match value {
        Uncertainty::Finite(v) => format!("{v:.11e}").parse().unwrap_or(v),
        Uncertainty::Divergent => f64::INFINITY,
    }
}

/// Equal-arm loss at which the optimal sensitivity of `state` meets the
/// shot-noise limit `1 / sqrt((m + m') (1 - L))`.
///
/// The root is bracketed by doubling from `L = 0.01` and refined by
/// bisection to `1e-6`. The gap is checked to be monotone inside the final
/// bracket before bisecting.
pub fn snl_crossover_loss(state: TwinFockState) -> Result<f64> {
    const TOLERANCE: f64 = 1e-6;
    const MONOTONE_SAMPLES: usize = 16;
    if !beats_snl_criterion(state) {
        return Err(Error::NoSnlAdvantage { m: state.m(), m_prime: state.m_prime() });
    }

    let gap = |l: f64| -> Result<f64> {
        let loss = LossPair::equal(l)?;
        let best = optimal_sensitivity_with_tolerance(state, loss, PHASE_TOLERANCE).delta_phi.as_f64();
        Ok(best - 1.0 / (state.total() as f64 * (1.0 - l)).sqrt())
    };

    let (mut lo, mut hi) = (0.0, 0.01);
    while gap(hi)? < 0.0 {
        lo = hi;
        if hi >= 0.999 {
            return Err(Error::CrossoverNotBracketed(hi));
        }
        hi = (2.0 * hi).min(0.999);
    }

    let samples = (0..=MONOTONE_SAMPLES)
        .map(|i| gap(lo + (hi - lo) * i as f64 / MONOTONE_SAMPLES as f64))
        .collect::<Result<Vec<_>>>()?;
    if samples.windows(2).any(|w| w[1].partial_cmp(&w[0]) == Some(Ordering::Less)) {
        return Err(Error::NonMonotoneCrossover { lo, hi });
    }

    while hi - lo > TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if gap(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(m: u32, mp: u32) -> TwinFockState {
        TwinFockState::new(m, mp).unwrap()
    }

    fn loss_steps(n: usize) -> Vec<f64> {
        (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn visibility_sweep_single_photon() {
        let grid = SweepGrid::equal_arms(vec![state(1, 0)], &loss_steps(11), vec![]).unwrap();
        let rows = sweep(&grid, Quantity::Visibility).unwrap();
        assert_eq!(rows.len(), 11);
        for row in rows {
            assert!(row.phi.is_none());
            assert!((row.value.as_f64() - (1.0 - row.loss.loss_a())).abs() < 1e-14);
        }
    }

    #[test]
    fn expectation_sweep_full_loss() {
        let phases = (0..7).map(|i| Phase::new(0.4 * i as f64).unwrap()).collect();
        let grid = SweepGrid::equal_arms(vec![state(3, 1), state(6, 0)], &[1.0], phases).unwrap();
        let rows = sweep(&grid, Quantity::Expectation).unwrap();
        assert_eq!(rows.len(), 14);
        assert!(rows.iter().all(|r| r.value == Uncertainty::Finite(1.0)));
    }

    #[test]
    fn sensitivity_sweep_at_extremum() {
        let phases = vec![Phase::new(std::f64::consts::PI / 6.0).unwrap()];
        let grid = SweepGrid::equal_arms(vec![state(6, 0)], &loss_steps(6), phases).unwrap();
        let rows = sweep(&grid, Quantity::Sensitivity).unwrap();
        assert!(rows.iter().all(|r| r.value.is_divergent()));
    }

    #[test]
    fn sweep_order_is_row_major() {
        let phases = vec![Phase::new(0.1).unwrap(), Phase::new(0.2).unwrap()];
        let grid = SweepGrid::product(vec![state(2, 1), state(3, 0)], &[0.1, 0.2], &[0.3, 0.4, 0.5], phases).unwrap();
        let rows = sweep(&grid, Quantity::Expectation).unwrap();
        assert_eq!(rows.len(), 2 * 6 * 2);
        let keys: Vec<_> = rows
            .iter()
            .map(|r| (r.state.m(), r.loss.loss_a(), r.loss.loss_b(), r.phi.unwrap().radians()))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(keys, sorted);
    }

    #[test]
    fn grid_errors() {
        assert!(SweepGrid::equal_arms(vec![], &[0.1], vec![]).is_err());
        assert!(SweepGrid::equal_arms(vec![state(2, 1)], &[], vec![]).is_err());
        assert!(SweepGrid::equal_arms(vec![state(2, 1)], &[1.2], vec![]).is_err());
        let grid = SweepGrid::equal_arms(vec![state(2, 1)], &[0.1], vec![]).unwrap();
        assert!(matches!(sweep(&grid, Quantity::Sensitivity), Err(Error::InvalidGrid(_))));
        assert!(matches!("fidelity".parse::<Quantity>(), Err(Error::UnknownName { .. })));
    }

    #[test]
    fn candidate_enumeration() {
        let c = Constraint::FixedDeltaM { delta_m: 6, max_total: 14 }.candidates().unwrap();
        assert_eq!(c, vec![state(6, 0), state(7, 1), state(8, 2), state(9, 3), state(10, 4)]);
        let c = Constraint::MaxTotal(3).candidates().unwrap();
        assert_eq!(c, vec![state(1, 0), state(2, 0), state(2, 1), state(3, 0)]);
        assert_eq!(Constraint::MaxTotal(0).candidates(), Err(Error::EmptyCandidates));
        assert_eq!(Constraint::FixedDeltaM { delta_m: 0, max_total: 9 }.candidates(), Err(Error::EmptyCandidates));
        assert_eq!(Constraint::FixedDeltaM { delta_m: 5, max_total: 4 }.candidates(), Err(Error::EmptyCandidates));
    }

    #[test]
    fn recommendation_examples() {
        let loss = LossPair::equal(0.05).unwrap();
        let ranked = recommend(loss, Constraint::FixedDeltaM { delta_m: 6, max_total: 22 }, Objective::OptimalSensitivity)
            .unwrap();
        let order: Vec<_> = ranked.iter().map(|e| (e.state.m(), e.state.m_prime())).collect();
        let expected: Vec<_> = (0..=8).map(|mp| (mp + 6, mp)).collect();
        assert_eq!(order, expected);
        assert_eq!(ranked.iter().map(|e| e.rank).collect::<Vec<_>>(), (1..=9).collect::<Vec<_>>());
        assert!((ranked[0].objective_value.as_f64() - 0.227).abs() < 5e-4);
        assert!((ranked[2].objective_value.as_f64() - 0.266).abs() < 5e-4);
        assert!((ranked[8].objective_value.as_f64() - 0.387).abs() < 5e-4);

        let ranked = recommend(
            LossPair::equal(0.35).unwrap(),
            Constraint::FixedDeltaM { delta_m: 6, max_total: 10 },
            Objective::OptimalSensitivity,
        )
        .unwrap();
        assert_eq!(ranked[0].state, state(8, 2));

        let ranked = recommend(LossPair::equal(0.75).unwrap(), Constraint::MaxTotal(5), Objective::Visibility).unwrap();
        assert_eq!(ranked[0].state, state(3, 2));
        assert!(ranked.windows(2).all(|w| w[0].objective_value.as_f64() >= w[1].objective_value.as_f64()));
    }

    #[test]
    fn ties_prefer_fewer_photons() {
        // At L = 1/2 every visibility is exactly one half.
        let ranked = recommend(LossPair::equal(0.5).unwrap(), Constraint::MaxTotal(4), Objective::Visibility).unwrap();
        let order: Vec<_> = ranked.iter().map(|e| (e.state.m(), e.state.m_prime())).collect();
        assert_eq!(order, vec![(1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (4, 0)]);
    }

    #[test]
    fn crossover_brackets() {
        let l = snl_crossover_loss(state(6, 0)).unwrap();
        assert!((0.13..=0.17).contains(&l), "{l}");
        let l = snl_crossover_loss(state(8, 2)).unwrap();
        assert!((0.06..=0.09).contains(&l), "{l}");
        assert_eq!(snl_crossover_loss(state(3, 1)), Err(Error::NoSnlAdvantage { m: 3, m_prime: 1 }));
        assert!(snl_crossover_loss(state(2, 1)).is_err());
    }
}
