//! Closed-form record probabilities and their projector-evaluated counterparts.

use super::evolution::{record_projector, wigner_record_projector, BOB, FRIEND, WIGNER_REMAINDER};
use super::tables::wigner_imbalance;
use super::{DerivedInterference, JointTable, OutcomeDistribution, Party, ScenarioConfig, ScenarioError, Time};
use crate::quantum::{joint_outcome_probability, outcome_probability, StateVector};

/// Friend's record distribution in the simple scenario at `t1` or `t2`.
pub fn simple_friend_marginal(config: &ScenarioConfig, time: Time) -> Result<OutcomeDistribution, ScenarioError> {
    config.validate()?;
    let (wa, wb) = (config.alpha().weight(), config.beta().weight());
    let probabilities = match time {
        Time::T1 => [wa, wb],
        Time::T2 => {
            let (sa, sb) = (config.a().weight(), config.b().weight());
            let keep = sa * sa + sb * sb;
            let cross = 2.0 * sa * sb;
            let chi = DerivedInterference::from_config(config).chi;
            [wa * keep + wb * cross + 2.0 * chi, wb * keep + wa * cross - 2.0 * chi]
        }
        _ => {
            return Err(ScenarioError::UndefinedQuery {
                party: Party::Friend,
                time,
            })
        }
    };
    OutcomeDistribution::new(Party::Friend, time, probabilities)
}

/// Single-party record distributions in the extended scenario.
///
/// The friend is defined from `t1` on, Bob from `t2` on.
pub fn extended_marginals(
    config: &ScenarioConfig,
    party: Party,
    time: Time,
) -> Result<OutcomeDistribution, ScenarioError> {
    config.validate()?;
    let bob = config.bob()?;
    let (wa, wb) = (config.alpha().weight(), config.beta().weight());
    let (wm, wn) = (bob.first.weight(), bob.second.weight());
    let probabilities = match (party, time) {
        (Party::Friend, Time::T1 | Time::T2) => [wa, wb],
        (Party::Friend, Time::T3) => {
            let (sa, sb) = (config.a().weight(), config.b().weight());
            let keep = sa * sa + sb * sb;
            let cross = 2.0 * sa * sb;
            [wa * keep + wb * cross, wb * keep + wa * cross]
        }
        (Party::Bob, Time::T2 | Time::T3) => [wa * wn + wb * wm, wa * wm + wb * wn],
        _ => return Err(ScenarioError::UndefinedQuery { party, time }),
    };
    OutcomeDistribution::new(party, time, probabilities)
}

/// Joint table `p(f, B)` before (`t2`) or after (`t3`) Wigner's measurement.
pub fn extended_joint_table(config: &ScenarioConfig, time: Time) -> Result<JointTable, ScenarioError> {
    config.validate()?;
    let bob = config.bob()?;
    let (wa, wb) = (config.alpha().weight(), config.beta().weight());
    let (wm, wn) = (bob.first.weight(), bob.second.weight());
    let before = [[wa * wn, wa * wm], [wb * wm, wb * wn]];
    let cells = match time {
        Time::T2 => before,
        Time::T3 => {
            let (sa, sb) = (config.a().weight(), config.b().weight());
            let keep = sa * sa + sb * sb;
            let cross = 2.0 * sa * sb;
            let xi = DerivedInterference::from_config(config).xi.unwrap_or(0.0);
            // the sign of ξ alternates like a checkerboard
            [
                [
                    keep * before[0][0] + cross * before[1][0] + 2.0 * xi,
                    keep * before[0][1] + cross * before[1][1] - 2.0 * xi,
                ],
                [
                    keep * before[1][0] + cross * before[0][0] - 2.0 * xi,
                    keep * before[1][1] + cross * before[0][1] + 2.0 * xi,
                ],
            ]
        }
        _ => {
            return Err(ScenarioError::UndefinedQuery {
                party: Party::Friend,
                time,
            })
        }
    };
    JointTable::new(time, cells)
}

fn time_index(time: Time) -> usize {
    match time {
        Time::T0 => 0,
        Time::T1 => 1,
        Time::T2 => 2,
        Time::T3 => 3,
    }
}

fn marginal_of(
    state: &StateVector,
    observer: &str,
    party: Party,
    time: Time,
) -> Result<OutcomeDistribution, ScenarioError> {
    let p0 = outcome_probability(state, &record_projector(observer, 0))?;
    let p1 = outcome_probability(state, &record_projector(observer, 1))?;
    OutcomeDistribution::new(party, time, [p0, p1])
}

/// Friend's distribution read off the evolved simple-scenario states.
pub fn evaluate_simple_friend_marginal(
    states: &[StateVector; 3],
    time: Time,
) -> Result<OutcomeDistribution, ScenarioError> {
    match time {
        Time::T1 | Time::T2 => marginal_of(&states[time_index(time)], FRIEND, Party::Friend, time),
        _ => Err(ScenarioError::UndefinedQuery {
            party: Party::Friend,
            time,
        }),
    }
}

/// Single-party distribution read off the evolved extended-scenario states.
pub fn evaluate_extended_marginal(
    states: &[StateVector; 4],
    party: Party,
    time: Time,
) -> Result<OutcomeDistribution, ScenarioError> {
    match (party, time) {
        (Party::Friend, Time::T1 | Time::T2 | Time::T3) => marginal_of(&states[time_index(time)], FRIEND, party, time),
        (Party::Bob, Time::T2 | Time::T3) => marginal_of(&states[time_index(time)], BOB, party, time),
        _ => Err(ScenarioError::UndefinedQuery { party, time }),
    }
}

/// Joint table read off the evolved extended-scenario states.
pub fn evaluate_extended_joint_table(states: &[StateVector; 4], time: Time) -> Result<JointTable, ScenarioError> {
    if !matches!(time, Time::T2 | Time::T3) {
        return Err(ScenarioError::UndefinedQuery {
            party: Party::Friend,
            time,
        });
    }
    let state = &states[time_index(time)];
    let mut cells = [[0.0; 2]; 2];
    for (f, row) in cells.iter_mut().enumerate() {
        for (b, cell) in row.iter_mut().enumerate() {
            *cell = joint_outcome_probability(state, &record_projector(FRIEND, f), &record_projector(BOB, b))?;
        }
    }
    JointTable::new(time, cells)
}

/// Weight of Wigner's remainder record `Π_⊥` after his measurement.
pub fn wigner_remainder_weight(state: &StateVector) -> Result<f64, ScenarioError> {
    Ok(outcome_probability(state, &wigner_record_projector(WIGNER_REMAINDER))?)
}

/// `(|a|³|b| - |a||b|³)`, exposed for the feasibility analysis.
pub fn wigner_interference_amplitude(config: &ScenarioConfig) -> f64 {
    wigner_imbalance(config)
}
