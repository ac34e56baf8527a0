use nalgebra::DVector;
use num_complex::Complex64;

use super::{Coefficients, ScenarioConfig, ScenarioError};
use crate::quantum::{apply_observer_unitary, tensor_product, ProjectiveMeasurement, Projector, StateVector};

/// Measured system of the simple scenario.
pub const SYSTEM: &str = "S";
/// First qubit of the shared pair; the friend measures it.
pub const SYSTEM_1: &str = "S1";
/// Second qubit of the shared pair; Bob measures it.
pub const SYSTEM_2: &str = "S2";
pub const FRIEND: &str = "F";
pub const BOB: &str = "B";
pub const WIGNER: &str = "W";

/// Wigner records `W=1`, `W=2` and the remainder outcome.
pub const WIGNER_MEMORY_DIM: usize = 3;
/// Record index of `W=1` in Wigner's memory.
pub const WIGNER_FIRST: usize = 0;
/// Record index of `W=2`.
pub const WIGNER_SECOND: usize = 1;
/// Record index of the remainder outcome `Π_⊥`.
pub const WIGNER_REMAINDER: usize = 2;

/// `|W=1⟩ = a|0,0⟩ + b|1,1⟩`, `|W=2⟩ = b*|0,0⟩ - a*|1,1⟩` on `(system, friend)`,
/// completed by the rank-two remainder.
pub fn wigner_measurement(config: &ScenarioConfig, system: &str) -> Result<ProjectiveMeasurement, ScenarioError> {
    let (a, b) = (config.a().complex(), config.b().complex());
    let zero = Complex64::new(0.0, 0.0);
    let first = DVector::from_vec(vec![a, zero, zero, b]);
    let second = DVector::from_vec(vec![b.conj(), zero, zero, -a.conj()]);
    Ok(ProjectiveMeasurement::from_vectors(
        vec![(system.to_owned(), 2), (FRIEND.to_owned(), 2)],
        vec![("1".to_owned(), first), ("2".to_owned(), second)],
    )?)
}

/// `|B=0⟩ = μ|0⟩ + ν|1⟩`, `|B=1⟩ = ν*|0⟩ - μ*|1⟩` on Bob's qubit.
pub fn bob_measurement(bob: &Coefficients) -> Result<ProjectiveMeasurement, ScenarioError> {
    let (mu, nu) = (bob.first.complex(), bob.second.complex());
    Ok(ProjectiveMeasurement::from_vectors(
        vec![(SYSTEM_2.to_owned(), 2)],
        vec![
            ("0".to_owned(), DVector::from_vec(vec![mu, nu])),
            ("1".to_owned(), DVector::from_vec(vec![nu.conj(), -mu.conj()])),
        ],
    )?)
}

/// Perception-basis projector `|x⟩⟨x|` on a two-level memory register.
pub fn record_projector(observer: &str, outcome: usize) -> Projector {
    Projector::basis_state(observer, 2, outcome).expect("outcome is 0 or 1")
}

/// Projector onto one of Wigner's three record states.
pub fn wigner_record_projector(record: usize) -> Projector {
    Projector::basis_state(WIGNER, WIGNER_MEMORY_DIM, record).expect("record index below memory dimension")
}

/// `|Ψ(t₀)⟩, |Ψ(t₁)⟩, |Ψ(t₂)⟩` of the single-friend scenario: the friend
/// measures `S` in the computational basis, then Wigner measures `S+F`.
pub fn simple_states(config: &ScenarioConfig) -> Result<[StateVector; 3], ScenarioError> {
    config.validate()?;
    let system = StateVector::system(SYSTEM, vec![config.alpha().complex(), config.beta().complex()])?;
    let t0 = tensor_product(
        &tensor_product(&system, &StateVector::ready_register(FRIEND, 2)?)?,
        &StateVector::ready_register(WIGNER, WIGNER_MEMORY_DIM)?,
    )?;
    let t1 = apply_observer_unitary(&t0, &ProjectiveMeasurement::computational(SYSTEM, 2)?, FRIEND)?;
    let t2 = apply_observer_unitary(&t1, &wigner_measurement(config, SYSTEM)?, WIGNER)?;
    Ok([t0, t1, t2])
}

/// `|Ψ(t₀)⟩ … |Ψ(t₃)⟩` of the extended scenario. The source emits
/// `α|0,1⟩ + β|1,0⟩`; the friend measures the first qubit, Bob the second,
/// then Wigner measures the friend together with her qubit.
///
/// Factor order: `S1, S2, F, B, W`.
pub fn extended_states(config: &ScenarioConfig) -> Result<[StateVector; 4], ScenarioError> {
    config.validate()?;
    let bob = config.bob()?;
    let zero = Complex64::new(0.0, 0.0);
    let pair = StateVector::systems(
        &[(SYSTEM_1, 2), (SYSTEM_2, 2)],
        vec![zero, config.alpha().complex(), config.beta().complex(), zero],
    )?;
    let t0 = [
        StateVector::ready_register(FRIEND, 2)?,
        StateVector::ready_register(BOB, 2)?,
        StateVector::ready_register(WIGNER, WIGNER_MEMORY_DIM)?,
    ]
    .iter()
    .try_fold(pair, |acc, reg| tensor_product(&acc, reg))?;
    let t1 = apply_observer_unitary(&t0, &ProjectiveMeasurement::computational(SYSTEM_1, 2)?, FRIEND)?;
    let t2 = apply_observer_unitary(&t1, &bob_measurement(bob)?, BOB)?;
    let t3 = apply_observer_unitary(&t2, &wigner_measurement(config, SYSTEM_1)?, WIGNER)?;
    Ok([t0, t1, t2, t3])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::outcome_probability;
    use crate::rng::stream;
    use crate::scenarios::{random_config, Amplitude};

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn deterministic_source_gives_single_branch() {
        let config =
            ScenarioConfig::simple(Coefficients::from_weight(1.0).unwrap(), Coefficients::from_angle(0.4)).unwrap();
        let [_, t1, _] = simple_states(&config).unwrap();
        assert!(close(
            t1.amplitude_by_label(&[(SYSTEM, 0), (FRIEND, 0), (WIGNER, 0)]).unwrap(),
            Complex64::new(1.0, 0.0)
        ));
        assert!((t1.amplitudes().iter().map(|a| a.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn simple_branches_match_closed_coefficients() {
        let mut rng = stream(11, 0);
        for _ in 0..50 {
            let config = random_config(&mut rng, false);
            let [t0, t1, t2] = simple_states(&config).unwrap();
            for s in [&t0, &t1, &t2] {
                assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
            }
            let (alpha, beta) = (config.alpha().complex(), config.beta().complex());
            let (a, b) = (config.a().complex(), config.b().complex());
            assert!(close(t1.amplitude(&[0, 0, 0]), alpha));
            assert!(close(t1.amplitude(&[1, 1, 0]), beta));
            let first = alpha * a.conj() + beta * b.conj();
            let second = alpha * b - beta * a;
            assert!(close(t2.amplitude(&[0, 0, WIGNER_FIRST]), a * first));
            assert!(close(t2.amplitude(&[1, 1, WIGNER_FIRST]), b * first));
            assert!(close(t2.amplitude(&[0, 0, WIGNER_SECOND]), b.conj() * second));
            assert!(close(t2.amplitude(&[1, 1, WIGNER_SECOND]), -a.conj() * second));
            let p = outcome_probability(&t2, &wigner_record_projector(WIGNER_FIRST)).unwrap();
            assert!((p - first.norm_sqr()).abs() < 1e-12);
        }
    }

    #[test]
    fn extended_branch_coefficients() {
        let mut rng = stream(12, 0);
        for _ in 0..50 {
            let config = random_config(&mut rng, true);
            let states = extended_states(&config).unwrap();
            for s in &states {
                assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
            }
            let t3 = &states[3];
            let (alpha, beta) = (config.alpha().complex(), config.beta().complex());
            let (a, b) = (config.a().complex(), config.b().complex());
            let bob = config.bob.unwrap();
            let (mu, nu) = (bob.first.complex(), bob.second.complex());
            let w1_b0 = alpha * nu.conj() * a.conj() + beta * mu.conj() * b.conj();
            // S1,S2,F,B,W with S+F in |0,0⟩ and Bob's qubit in |B=0⟩ projected on its |0⟩ component
            let amp = t3
                .amplitude_by_label(&[(SYSTEM_1, 0), (FRIEND, 0), (SYSTEM_2, 0), (BOB, 0), (WIGNER, 0)])
                .unwrap();
            assert!(close(amp, w1_b0 * a * mu));
            let branch_weight = crate::quantum::joint_outcome_probability(
                t3,
                &wigner_record_projector(WIGNER_FIRST),
                &record_projector(BOB, 0),
            )
            .unwrap();
            assert!((branch_weight - w1_b0.norm_sqr()).abs() < 1e-12);
        }
    }

    #[test]
    fn computational_bob_kills_a_branch() {
        let config = ScenarioConfig::extended(
            Coefficients::from_weight(0.5).unwrap(),
            Coefficients::from_angle(0.3),
            Coefficients::new(Amplitude::real(1.0), Amplitude::real(0.0)),
        )
        .unwrap();
        let [_, _, t2, _] = extended_states(&config).unwrap();
        let p = crate::quantum::joint_outcome_probability(&t2, &record_projector(FRIEND, 0), &record_projector(BOB, 0))
            .unwrap();
        assert_eq!(p, 0.0);
    }

    #[test]
    fn extended_requires_bob() {
        let config =
            ScenarioConfig::simple(Coefficients::from_weight(0.5).unwrap(), Coefficients::from_angle(0.3)).unwrap();
        assert_eq!(extended_states(&config).unwrap_err(), ScenarioError::MissingBob);
    }
}
