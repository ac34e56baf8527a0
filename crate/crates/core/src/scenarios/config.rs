use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ScenarioError;
use crate::quantum::NORM_TOLERANCE;

/// A complex coefficient written as `|z| e^{iφ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Amplitude {
    pub magnitude: f64,
    pub phase: f64,
}

impl Amplitude {
    pub const fn new(magnitude: f64, phase: f64) -> Self {
        Amplitude { magnitude, phase }
    }

    pub const fn real(magnitude: f64) -> Self {
        Amplitude { magnitude, phase: 0.0 }
    }

    pub fn complex(self) -> Complex64 {
        Complex64::from_polar(self.magnitude, self.phase)
    }

    /// `|z|²`
    pub fn weight(self) -> f64 {
        self.magnitude * self.magnitude
    }
}

/// The two coefficients of a normalized two-term superposition, e.g. `(α, β)`
/// of the source state, `(a, b)` of Wigner's first basis vector or `(μ, ν)`
/// of Bob's first basis vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub first: Amplitude,
    pub second: Amplitude,
}

impl Coefficients {
    pub const fn new(first: Amplitude, second: Amplitude) -> Self {
        Coefficients { first, second }
    }

    /// Real coefficients with `|first|² = weight` and `|second|² = 1 - weight`.
    pub fn from_weight(weight: f64) -> Result<Self, ScenarioError> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(ScenarioError::InvalidWeight(weight));
        }
        Ok(Coefficients {
            first: Amplitude::real(weight.sqrt()),
            second: Amplitude::real((1.0 - weight).sqrt()),
        })
    }

    /// `(sin x, cos x)`. A negative sine or cosine becomes a phase of π.
    pub fn from_angle(x: f64) -> Self {
        let signed = |v: f64| Amplitude::new(v.abs(), if v < 0.0 { PI } else { 0.0 });
        Coefficients {
            first: signed(x.sin()),
            second: signed(x.cos()),
        }
    }

    /// Adds the given phases on top of the current ones.
    pub fn with_phases(self, first: f64, second: f64) -> Self {
        Coefficients {
            first: Amplitude::new(self.first.magnitude, self.first.phase + first),
            second: Amplitude::new(self.second.magnitude, self.second.phase + second),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.first.weight() + self.second.weight()
    }

    fn validate(&self, name: &'static str) -> Result<(), ScenarioError> {
        for amp in [self.first, self.second] {
            if !(amp.magnitude >= 0.0 && amp.magnitude.is_finite() && amp.phase.is_finite()) {
                return Err(ScenarioError::InvalidAmplitude { name, amplitude: amp });
            }
        }
        let norm = self.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(ScenarioError::NotNormalized { name, norm });
        }
        Ok(())
    }
}

/// All parameters of a scenario. The simple scenario has no Bob.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub initial: Coefficients,
    pub wigner: Coefficients,
    pub bob: Option<Coefficients>,
}

impl ScenarioConfig {
    pub fn simple(initial: Coefficients, wigner: Coefficients) -> Result<Self, ScenarioError> {
        let config = ScenarioConfig {
            initial,
            wigner,
            bob: None,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn extended(initial: Coefficients, wigner: Coefficients, bob: Coefficients) -> Result<Self, ScenarioError> {
        let config = ScenarioConfig {
            initial,
            wigner,
            bob: Some(bob),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.initial.validate("initial state (alpha, beta)")?;
        self.wigner.validate("Wigner setting (a, b)")?;
        if let Some(bob) = &self.bob {
            bob.validate("Bob setting (mu, nu)")?;
        }
        Ok(())
    }

    pub fn alpha(&self) -> Amplitude {
        self.initial.first
    }

    pub fn beta(&self) -> Amplitude {
        self.initial.second
    }

    pub fn a(&self) -> Amplitude {
        self.wigner.first
    }

    pub fn b(&self) -> Amplitude {
        self.wigner.second
    }

    pub fn bob(&self) -> Result<&Coefficients, ScenarioError> {
        self.bob.as_ref().ok_or(ScenarioError::MissingBob)
    }

    /// Same source and Wigner setting, different Bob setting.
    pub fn with_bob(&self, bob: Coefficients) -> Result<Self, ScenarioError> {
        Self::extended(self.initial, self.wigner, bob)
    }

    /// `2|a|²|b|²`: the flip rate of a definite record under Wigner's measurement.
    pub fn record_flip_rate(&self) -> f64 {
        2.0 * self.a().weight() * self.b().weight()
    }
}

/// Draws a random configuration: every squared magnitude `|first|²` uniform
/// in `[0, 1]`, every phase uniform in `[0, 2π)`.
pub fn random_config<R: Rng + ?Sized>(rng: &mut R, with_bob: bool) -> ScenarioConfig {
    let mut draw = || {
        let weight: f64 = rng.random();
        Coefficients::new(
            Amplitude::new(weight.sqrt(), rng.random_range(0.0..TAU)),
            Amplitude::new((1.0 - weight).sqrt(), rng.random_range(0.0..TAU)),
        )
    };
    let initial = draw();
    let wigner = draw();
    let bob = with_bob.then(draw);
    ScenarioConfig { initial, wigner, bob }
}
