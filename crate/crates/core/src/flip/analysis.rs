use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::Serialize;

use super::{FlipError, FlipFamily, FlipSolution};
use crate::scenarios::{JointTable, OutcomeDistribution, Party, Time};

pub(crate) fn effective_from_table(q: &[[f64; 2]; 2], bob: &[f64; 2]) -> [f64; 2] {
    [0, 1].map(|n| (bob[0] * q[n][0] + bob[1] * q[n][1]).clamp(0.0, 1.0))
}

/// `q̄ⁿ = p(B₂=0) qⁿ⁰ + p(B₂=1) qⁿ¹`: what a party blind to Bob's result can see.
pub fn effective_flip(solution: &FlipSolution, bob_marginal: &OutcomeDistribution) -> Result<[f64; 2], FlipError> {
    if solution.family != FlipFamily::Four {
        return Err(FlipError::WrongFamily {
            expected: "four",
            found: solution.family,
        });
    }
    if bob_marginal.party != Party::Bob {
        return Err(FlipError::Scenario(crate::scenarios::ScenarioError::UndefinedQuery {
            party: bob_marginal.party,
            time: bob_marginal.time,
        }));
    }
    Ok(effective_from_table(
        &solution.flip_table(),
        &bob_marginal.probabilities,
    ))
}

/// Pushes the table before Wigner's measurement through the flip model:
/// Bob's record is kept and the friend's record `n` flips with probability `qⁿᵐ`.
pub fn reconstruct_joint(solution: &FlipSolution, before: &JointTable) -> Result<JointTable, FlipError> {
    if !solution.is_feasible() {
        return Err(FlipError::Infeasible);
    }
    let q = solution.flip_table();
    let mut cells = [[0.0; 2]; 2];
    for m in 0..2 {
        for n in 0..2 {
            let mass = before.get(n, m);
            cells[n][m] += mass * (1.0 - q[n][m]);
            cells[1 - n][m] += mass * q[n][m];
        }
    }
    Ok(JointTable::new(Time::T3, cells)?)
}

/// Simple-scenario analog of [`reconstruct_joint`] on the friend's marginal.
pub fn reconstruct_marginal(
    solution: &FlipSolution,
    before: &OutcomeDistribution,
) -> Result<OutcomeDistribution, FlipError> {
    if !solution.is_feasible() {
        return Err(FlipError::Infeasible);
    }
    let q = solution.flip_table();
    let p = before.probabilities;
    let after = [
        p[0] * (1.0 - q[0][0]) + p[1] * q[1][0],
        p[0] * q[0][0] + p[1] * (1.0 - q[1][0]),
    ];
    Ok(OutcomeDistribution::new(before.party, Time::T2, after)?)
}

/// Value of `q⁰⁰ = q¹¹` required by no-signaling between Bob's computational
/// and tilted (`|μ|² = 1/3`) settings, with `a = sin x`, `b = cos x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeasibilityPoint {
    pub x: f64,
    pub cos_delta_phi: f64,
    /// May be negative: then no flip model exists.
    pub q00: f64,
    pub feasible: bool,
}

/// `q⁰⁰ = 2|a|²|b|² - (2√2/3)(|a|³|b| - |a||b|³) cos Δφ`.
pub fn no_signaling_feasibility(x: f64, cos_delta_phi: f64) -> Result<FeasibilityPoint, FlipError> {
    if !(0.0..=FRAC_PI_2).contains(&x) {
        return Err(FlipError::InvalidAngle(x));
    }
    if !(-1.0..=1.0).contains(&cos_delta_phi) {
        return Err(FlipError::InvalidCosine(cos_delta_phi));
    }
    let (a, b) = (x.sin(), x.cos());
    let imbalance = a * b * (a * a - b * b);
    let q00 = 2.0 * a * a * b * b - 2.0 * 2f64.sqrt() / 3.0 * imbalance * cos_delta_phi;
    Ok(FeasibilityPoint {
        x,
        cos_delta_phi,
        q00,
        feasible: (-1e-12..=1.0 + 1e-12).contains(&q00),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilitySweep {
    pub cos_delta_phi: f64,
    pub points: Vec<FeasibilityPoint>,
}

impl FeasibilitySweep {
    pub fn any_infeasible(&self) -> bool {
        self.points.iter().any(|p| !p.feasible)
    }
}

/// [`no_signaling_feasibility`] on `steps` evenly spaced angles covering `[0, π/2]`.
pub fn feasibility_sweep(steps: usize, cos_delta_phi: f64) -> Result<FeasibilitySweep, FlipError> {
    if steps < 2 {
        return Err(FlipError::InvalidSteps(steps));
    }
    let points = (0..steps)
        .into_par_iter()
        .map(|k| {
            let x = if k == steps - 1 {
                FRAC_PI_2
            } else {
                FRAC_PI_2 * k as f64 / (steps - 1) as f64
            };
            no_signaling_feasibility(x, cos_delta_phi)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FeasibilitySweep { cos_delta_phi, points })
}
