use rand::Rng;
use serde::Serialize;

use super::evolution::{extended_states, record_projector, BOB, FRIEND};
use super::{ScenarioConfig, ScenarioError, Time};
use crate::quantum::{lueders_collapse, outcome_probability, QuantumError, StateVector};

/// Which records are read in a run. Wigner cannot have both in the same run:
/// either the friend and Bob are asked before his measurement, or after it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Arrangement {
    AskBeforeWigner,
    WignerThenAsk,
}

impl Arrangement {
    pub fn time(self) -> Time {
        match self {
            Arrangement::AskBeforeWigner => Time::T2,
            Arrangement::WignerThenAsk => Time::T3,
        }
    }
}

/// Sampled counts of `(f, B)` record pairs, indexed `[f][B]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EmpiricalTable {
    pub time: Time,
    pub counts: [[u64; 2]; 2],
    pub runs: u64,
}

impl EmpiricalTable {
    pub fn frequencies(&self) -> [[f64; 2]; 2] {
        let n = self.runs as f64;
        self.counts.map(|row| row.map(|c| c as f64 / n))
    }
}

/// A two-step Born tree: friend's record first, then Bob's on the collapsed state.
struct BornTree {
    friend: [f64; 2],
    bob_given_friend: [[f64; 2]; 2],
}

impl BornTree {
    fn build(state: &StateVector) -> Result<Self, ScenarioError> {
        let mut friend = [0.0; 2];
        let mut bob_given_friend = [[0.0; 2]; 2];
        for f in 0..2 {
            let projector = record_projector(FRIEND, f);
            friend[f] = outcome_probability(state, &projector)?;
            if friend[f] <= 0.0 {
                continue;
            }
            let collapsed = match lueders_collapse(state, &projector) {
                Ok(s) => s,
                Err(QuantumError::ZeroProbability) => {
                    friend[f] = 0.0;
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            for (b, slot) in bob_given_friend[f].iter_mut().enumerate() {
                *slot = outcome_probability(&collapsed, &record_projector(BOB, b))?;
            }
        }
        Ok(BornTree {
            friend,
            bob_given_friend,
        })
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, usize) {
        let f = pick(&self.friend, rng.random());
        let b = pick(&self.bob_given_friend[f], rng.random());
        (f, b)
    }
}

fn pick(weights: &[f64; 2], u: f64) -> usize {
    let total = weights[0] + weights[1];
    if u * total < weights[0] {
        0
    } else {
        1
    }
}

/// Samples `runs` record pairs in the given arrangement. The friend's record
/// is drawn first with the Born rule, the state collapsed, then Bob's record
/// is drawn from the collapsed state.
pub fn sample_arrangement<R: Rng + ?Sized>(
    config: &ScenarioConfig,
    arrangement: Arrangement,
    runs: u64,
    rng: &mut R,
) -> Result<EmpiricalTable, ScenarioError> {
    if runs == 0 {
        return Err(ScenarioError::InvalidRuns);
    }
    let states = extended_states(config)?;
    let state = match arrangement {
        Arrangement::AskBeforeWigner => &states[2],
        Arrangement::WignerThenAsk => &states[3],
    };
    let tree = BornTree::build(state)?;
    let mut counts = [[0u64; 2]; 2];
    for _ in 0..runs {
        let (f, b) = tree.draw(rng);
        counts[f][b] += 1;
    }
    Ok(EmpiricalTable {
        time: arrangement.time(),
        counts,
        runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::scenarios::{extended_joint_table, Coefficients};
    use crate::stats::within_standard_errors;
    use std::f64::consts::FRAC_PI_8;

    fn tilted() -> ScenarioConfig {
        ScenarioConfig::extended(
            Coefficients::from_weight(0.5).unwrap(),
            Coefficients::from_angle(FRAC_PI_8),
            Coefficients::from_weight(1.0 / 3.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn single_run_has_one_unit_cell() {
        let table = sample_arrangement(&tilted(), Arrangement::WignerThenAsk, 1, &mut stream(1, 0)).unwrap();
        let freq = table.frequencies();
        assert_eq!(freq.as_flattened().iter().filter(|&&p| p == 1.0).count(), 1);
        assert_eq!(freq.as_flattened().iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn zero_runs_rejected() {
        assert_eq!(
            sample_arrangement(&tilted(), Arrangement::AskBeforeWigner, 0, &mut stream(1, 0)),
            Err(ScenarioError::InvalidRuns)
        );
    }

    #[test]
    fn frequencies_track_tables() {
        let config = tilted();
        for (k, arrangement) in [Arrangement::AskBeforeWigner, Arrangement::WignerThenAsk]
            .into_iter()
            .enumerate()
        {
            let n = 20_000;
            let table = sample_arrangement(&config, arrangement, n, &mut stream(5, k as u64)).unwrap();
            let exact = extended_joint_table(&config, arrangement.time()).unwrap();
            let freq = table.frequencies();
            for (f, row) in freq.iter().enumerate() {
                for (b, &observed) in row.iter().enumerate() {
                    assert!(within_standard_errors(observed, exact.get(f, b), n, 5.0));
                }
            }
        }
    }
}
