//! Classical flip models for the friend's memory across Wigner's measurement.
//!
//! A flip model assigns definite records before and after Wigner acts and
//! lets the record change with a probability that may depend on the old
//! record `n` and on Bob's result `m`. Each family below is a linear system
//! in its parameters; the solvers intersect the solution set with the unit
//! box, certify when the intersection is empty, and otherwise pick one
//! representative with a fixed sequence of tie-breaking objectives.

mod analysis;
mod polytope;
mod solvers;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::scenarios::ScenarioError;

pub use analysis::{
    effective_flip, feasibility_sweep, no_signaling_feasibility, reconstruct_joint, reconstruct_marginal,
    FeasibilityPoint, FeasibilitySweep,
};
pub use solvers::{
    flip_equations, solve, solve_conditional_flip, solve_joint_flip, solve_outcome_flip, solve_single_flip,
};

/// Slack on the unit box and on equation residuals.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlipError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("a {found} model was given where a {expected} model is required")]
    WrongFamily { expected: &'static str, found: FlipFamily },
    #[error("the flip model is infeasible and cannot reproduce any statistics")]
    Infeasible,
    #[error("angle {0} is outside [0, pi/2]")]
    InvalidAngle(f64),
    #[error("cos(delta phi) = {0} is outside [-1, 1]")]
    InvalidCosine(f64),
    #[error("a sweep needs at least two points, got {0}")]
    InvalidSteps(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlipFamily {
    /// One flip probability `q` for both records (simple scenario).
    Single,
    /// `q⁰, q¹` depending on the old record (simple scenario).
    Two,
    /// `q⁰, q¹` fitted to the joint tables with Bob (extended scenario).
    JointTwo,
    /// `qⁿᵐ` depending on the old record and Bob's result.
    Four,
}

impl FlipFamily {
    pub fn name(self) -> &'static str {
        match self {
            FlipFamily::Single => "single",
            FlipFamily::Two => "two",
            FlipFamily::JointTwo => "joint-two",
            FlipFamily::Four => "four",
        }
    }

    pub fn parameter_names(self) -> &'static [&'static str] {
        match self {
            FlipFamily::Single => &["q"],
            FlipFamily::Two | FlipFamily::JointTwo => &["q0", "q1"],
            FlipFamily::Four => &["q00", "q01", "q10", "q11"],
        }
    }

    pub fn needs_bob(self) -> bool {
        matches!(self, FlipFamily::JointTwo | FlipFamily::Four)
    }
}

impl fmt::Display for FlipFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlipStatus {
    /// Exactly one parameter assignment in the box solves the equations.
    Feasible,
    /// No assignment in the box solves the equations.
    Infeasible,
    /// Many assignments solve the equations; the tie-break picked one.
    UnderdeterminedResolved,
}

impl FlipStatus {
    pub fn is_feasible(self) -> bool {
        !matches!(self, FlipStatus::Infeasible)
    }
}

/// How the freedom left after the asymmetry objectives is resolved.
///
/// Both rules first minimize the record asymmetry `|q¹ - q⁰|` and, for the
/// four-parameter family, the dependence on Bob's result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    /// Closest point to `2|a|²|b|²` in every parameter, the flip rate of a
    /// definite record under Wigner's measurement.
    #[default]
    MinEps,
    /// Smallest total flip mass, then closest to `2|a|²|b|²`.
    MinMass,
}

/// One linear constraint `coefficients · q = rhs` on the flip parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlipEquation {
    pub label: String,
    pub coefficients: Vec<f64>,
    pub rhs: f64,
}

impl FlipEquation {
    pub fn residual(&self, q: &[f64]) -> f64 {
        (self.coefficients.iter().zip(q).map(|(a, b)| a * b).sum::<f64>() - self.rhs).abs()
    }
}

/// Witness that no parameter assignment in the box satisfies the equations:
/// at every point of the box some equation is violated by at least `floor`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    /// Label of the equation violated most at the least-violating point.
    pub equation: String,
    /// Its violation there.
    pub violation: f64,
    /// Minimum over the box of the largest violation.
    pub floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlipSolution {
    pub family: FlipFamily,
    /// Values in the order of [`FlipFamily::parameter_names`], clamped to `[0, 1]`.
    pub parameters: Vec<f64>,
    pub status: FlipStatus,
    /// `q¹ - q⁰` for the two-parameter families, the largest dependence on
    /// Bob's result for the four-parameter family, 0 for the single family.
    pub epsilon: f64,
    /// Largest equation violation at the reported parameters.
    pub residual: f64,
    /// Largest amount by which a parameter was clamped into `[0, 1]`.
    pub clamp: f64,
    pub certificate: Option<Certificate>,
    /// Bob-averaged `(q̄⁰, q̄¹)`; four-parameter family only.
    pub effective: Option<[f64; 2]>,
    pub tie_break: TieBreak,
    /// The point the final tie-break is measured from.
    pub reference: f64,
    pub equations: Vec<FlipEquation>,
}

impl FlipSolution {
    pub fn is_feasible(&self) -> bool {
        self.status.is_feasible()
    }

    /// Flip probability `qⁿᵐ` for old record `n` and Bob result `m`.
    pub fn flip_table(&self) -> [[f64; 2]; 2] {
        let p = &self.parameters;
        match self.family {
            FlipFamily::Single => [[p[0]; 2]; 2],
            FlipFamily::Two | FlipFamily::JointTwo => [[p[0]; 2], [p[1]; 2]],
            FlipFamily::Four => [[p[0], p[1]], [p[2], p[3]]],
        }
    }

    pub fn parameter(&self, name: &str) -> Option<f64> {
        self.family
            .parameter_names()
            .iter()
            .position(|n| *n == name)
            .map(|i| self.parameters[i])
    }
}
