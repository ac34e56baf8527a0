//! Exact simulation of observer memory in Wigner's-friend scenarios.
//!
//! - [`quantum`]: labeled tensor-product states, observer measurements,
//!   Born probabilities and Lüders collapse.
//! - [`scenarios`]: the simple and extended scenarios, their closed-form
//!   record probabilities and a Born-rule sampler.
//! - [`flip`]: classical flip models of the friend's memory, their
//!   feasibility and the no-signaling condition.
//! - [`protocol`]: a signaling protocol for a friend aware of memory flips.
//! - [`report`]: JSON and CSV output.
//!
//! ```
//! use wigner_memory::scenarios::{simple_friend_marginal, Coefficients, ScenarioConfig, Time};
//!
//! let config = ScenarioConfig::simple(
//!     Coefficients::from_weight(0.5)?,
//!     Coefficients::from_angle(std::f64::consts::FRAC_PI_8),
//! )?;
//! let after = simple_friend_marginal(&config, Time::T2)?;
//! assert!((after.get(0) - 0.25).abs() < 1e-12);
//! # Ok::<(), wigner_memory::scenarios::ScenarioError>(())
//! ```

pub mod flip;
pub mod protocol;
pub mod quantum;
pub mod report;
pub mod rng;
pub mod scenarios;
pub mod stats;
pub mod verification;

/// The guide's code blocks, run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/states.md")]
    mod states {}
    #[doc = include_str!("../../../book/src/scenarios.md")]
    mod scenarios {}
    #[doc = include_str!("../../../book/src/flip-models.md")]
    mod flip_models {}
    #[doc = include_str!("../../../book/src/protocol.md")]
    mod protocol {}
    #[doc = include_str!("../../../book/src/reports.md")]
    mod reports {}
}
