use std::fmt;

use serde::Serialize;

use super::{ScenarioConfig, ScenarioError};

/// Instants at which records are read. `T3` only exists in the extended scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Time {
    T0,
    T1,
    T2,
    T3,
}

impl fmt::Display for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self {
            Time::T0 => "t0",
            Time::T1 => "t1",
            Time::T2 => "t2",
            Time::T3 => "t3",
        };
        f.write_str(label)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    Friend,
    Bob,
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Party::Friend => "friend",
            Party::Bob => "bob",
        })
    }
}

const TABLE_TOLERANCE: f64 = 1e-12;

/// Distribution of one party's record over `{0, 1}` at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutcomeDistribution {
    pub party: Party,
    pub time: Time,
    pub probabilities: [f64; 2],
}

impl OutcomeDistribution {
    pub fn new(party: Party, time: Time, probabilities: [f64; 2]) -> Result<Self, ScenarioError> {
        check_distribution(&probabilities)?;
        Ok(OutcomeDistribution {
            party,
            time,
            probabilities,
        })
    }

    pub fn get(&self, outcome: usize) -> f64 {
        self.probabilities[outcome]
    }

    pub fn max_abs_diff(&self, other: &OutcomeDistribution) -> f64 {
        max_diff(&self.probabilities, &other.probabilities)
    }
}

/// Joint distribution `p(f, B)` of the friend's and Bob's records, indexed `[f][B]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JointTable {
    pub time: Time,
    pub cells: [[f64; 2]; 2],
}

impl JointTable {
    pub fn new(time: Time, cells: [[f64; 2]; 2]) -> Result<Self, ScenarioError> {
        check_distribution(cells.as_flattened())?;
        Ok(JointTable { time, cells })
    }

    pub fn get(&self, friend: usize, bob: usize) -> f64 {
        self.cells[friend][bob]
    }

    pub fn friend_marginal(&self) -> [f64; 2] {
        [self.cells[0][0] + self.cells[0][1], self.cells[1][0] + self.cells[1][1]]
    }

    pub fn bob_marginal(&self) -> [f64; 2] {
        [self.cells[0][0] + self.cells[1][0], self.cells[0][1] + self.cells[1][1]]
    }

    pub fn max_abs_diff(&self, other: &JointTable) -> f64 {
        max_diff(self.cells.as_flattened(), other.cells.as_flattened())
    }
}

fn check_distribution(values: &[f64]) -> Result<(), ScenarioError> {
    let sum: f64 = values.iter().sum();
    if values.iter().any(|&p| !p.is_finite() || p < -TABLE_TOLERANCE) || (sum - 1.0).abs() > TABLE_TOLERANCE {
        return Err(ScenarioError::InvalidDistribution(values.to_vec()));
    }
    Ok(())
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Phases and interference strengths that enter the closed-form probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedInterference {
    /// `φ_α - φ_β + φ_b - φ_a`
    pub theta: f64,
    /// `|α||β|(|a|³|b| - |a||b|³) cos θ`
    pub chi: f64,
    /// `φ_α - φ_β + φ_μ - φ_ν + φ_b - φ_a`; extended scenario only.
    pub vartheta: Option<f64>,
    /// `(|a|³|b| - |a||b|³)|α||β||μ||ν| cos ϑ`; extended scenario only.
    pub xi: Option<f64>,
}

impl DerivedInterference {
    pub fn from_config(config: &ScenarioConfig) -> Self {
        let (alpha, beta, a, b) = (config.alpha(), config.beta(), config.a(), config.b());
        let theta = alpha.phase - beta.phase + b.phase - a.phase;
        let imbalance = wigner_imbalance(config);
        let chi = alpha.magnitude * beta.magnitude * imbalance * theta.cos();
        let (vartheta, xi) = match config.bob {
            Some(bob) => {
                let vartheta = theta + bob.first.phase - bob.second.phase;
                let xi = imbalance
                    * alpha.magnitude
                    * beta.magnitude
                    * bob.first.magnitude
                    * bob.second.magnitude
                    * vartheta.cos();
                (Some(vartheta), Some(xi))
            }
            None => (None, None),
        };
        DerivedInterference {
            theta,
            chi,
            vartheta,
            xi,
        }
    }
}

/// `|a|³|b| - |a||b|³`
pub(crate) fn wigner_imbalance(config: &ScenarioConfig) -> f64 {
    let (a, b) = (config.a().magnitude, config.b().magnitude);
    a * b * (a * a - b * b)
}
