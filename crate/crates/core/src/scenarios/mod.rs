//! The simple and extended Wigner's-friend scenarios.
//!
//! In the simple scenario a friend `F` measures a qubit `S` and Wigner `W`
//! then measures `S` and `F` together. The extended scenario adds a second
//! qubit, entangled with the first, that a distant observer Bob `B`
//! measures before Wigner acts.
//!
//! Each quantity comes in two flavors: a closed form in the configuration
//! parameters, and an evaluation of projectors on the explicitly evolved
//! states. The two are compared in the test suite.

mod config;
mod evolution;
mod formulas;
mod sampling;
mod tables;

use thiserror::Error;

use crate::quantum::QuantumError;

pub use config::{random_config, Amplitude, Coefficients, ScenarioConfig};
pub use evolution::{
    bob_measurement, extended_states, record_projector, simple_states, wigner_measurement, wigner_record_projector,
    BOB, FRIEND, SYSTEM, SYSTEM_1, SYSTEM_2, WIGNER, WIGNER_FIRST, WIGNER_MEMORY_DIM, WIGNER_REMAINDER, WIGNER_SECOND,
};
pub use formulas::{
    evaluate_extended_joint_table, evaluate_extended_marginal, evaluate_simple_friend_marginal, extended_joint_table,
    extended_marginals, simple_friend_marginal, wigner_interference_amplitude, wigner_remainder_weight,
};
pub use sampling::{sample_arrangement, Arrangement, EmpiricalTable};
pub use tables::{DerivedInterference, JointTable, OutcomeDistribution, Party, Time};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("{name} is not normalized: squared norm {norm}")]
    NotNormalized { name: &'static str, norm: f64 },
    #[error("{name} has an invalid coefficient {amplitude:?}")]
    InvalidAmplitude { name: &'static str, amplitude: Amplitude },
    #[error("squared magnitude {0} is outside [0, 1]")]
    InvalidWeight(f64),
    #[error("the extended scenario needs Bob's setting")]
    MissingBob,
    #[error("not a probability distribution: {0:?}")]
    InvalidDistribution(Vec<f64>),
    #[error("{party}'s record is not defined at {time}")]
    UndefinedQuery { party: Party, time: Time },
    #[error("at least one run is required")]
    InvalidRuns,
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}
