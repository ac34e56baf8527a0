//! Finite-dimensional pure-state quantum mechanics for observers.
//!
//! States live on a labeled tensor product of small factors. Observers are
//! memory factors; a measurement by an observer is the entangling unitary
//! that copies each eigenbranch of the measured factors into a record state
//! of the observer's memory. Probabilities are expectation values of
//! projectors, and state update after a definite outcome follows the Lüders
//! rule.

mod measurement;
mod state;

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

pub use measurement::{Outcome, ProjectiveMeasurement, Projector, REMAINDER_LABEL};
pub use state::{Factor, FactorRole, StateVector};

/// Absolute tolerance on norms, idempotence and orthogonality.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Below this weight an outcome is treated as impossible when collapsing.
const ZERO_PROBABILITY: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantumError {
    #[error("factor label {0:?} appears twice")]
    DuplicateFactor(String),
    #[error("no factor labeled {0:?}")]
    UnknownFactor(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid factor dimension {0}")]
    InvalidDimension(usize),
    #[error("basis index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("squared norm {0} differs from 1")]
    NotNormalized(f64),
    #[error("not a projector: {0}")]
    NotAProjector(String),
    #[error("duplicate outcome label {0:?}")]
    DuplicateOutcome(String),
    #[error("observer {0:?} is not in its ready state")]
    ObserverNotReady(String),
    #[error("measurement needs {needed} record states but observer {observer:?} has {available}")]
    IncompleteBasis {
        observer: String,
        needed: usize,
        available: usize,
    },
    #[error("operators overlap on factor {0:?}")]
    OverlappingFactors(String),
    #[error("outcome has zero probability")]
    ZeroProbability,
}

/// `left ⊗ right`. Factor labels must be disjoint.
pub fn tensor_product(left: &StateVector, right: &StateVector) -> Result<StateVector, QuantumError> {
    left.tensor_unchecked(right)
}

fn targets_for(state: &StateVector, projector: &Projector) -> Result<Vec<usize>, QuantumError> {
    projector
        .factors()
        .iter()
        .zip(projector.dims())
        .map(|(label, &dim)| {
            let pos = state.require_position(label)?;
            let found = state.factors()[pos].dim();
            if found != dim {
                return Err(QuantumError::DimensionMismatch { expected: dim, found });
            }
            Ok(pos)
        })
        .collect()
}

/// The measurement interaction `|i⟩|r⟩ ↦ |i⟩|Iᵢ⟩`.
///
/// Outcome `k` of `basis` (in listed order) is recorded as basis state `k`
/// of the observer's memory; a nonzero remainder gets the next record. The
/// observer must be a ready memory register and is marked as used afterwards.
pub fn apply_observer_unitary(
    state: &StateVector,
    basis: &ProjectiveMeasurement,
    observer: &str,
) -> Result<StateVector, QuantumError> {
    let obs = state.require_position(observer)?;
    let obs_factor = &state.factors()[obs];
    if obs_factor.role() != (FactorRole::Memory { ready: true }) {
        return Err(QuantumError::ObserverNotReady(observer.to_owned()));
    }
    if basis.factors().iter().any(|f| f == observer) {
        return Err(QuantumError::OverlappingFactors(observer.to_owned()));
    }
    let needed = basis.record_slots();
    if needed > obs_factor.dim() {
        return Err(QuantumError::IncompleteBasis {
            observer: observer.to_owned(),
            needed,
            available: obs_factor.dim(),
        });
    }
    let targets = targets_for(state, &basis.remainder().projector)?;
    let stride = state.strides()[obs];
    let obs_dim = obs_factor.dim();
    let record_digit = |i: usize| (i / stride) % obs_dim;

    let off_ready = state
        .amplitudes()
        .iter()
        .enumerate()
        .any(|(i, a)| record_digit(i) != 0 && a.norm() > NORM_TOLERANCE);
    if off_ready {
        return Err(QuantumError::ObserverNotReady(observer.to_owned()));
    }

    let mut out = vec![Complex64::new(0.0, 0.0); state.amplitudes().len()];
    let branches = basis
        .outcomes()
        .iter()
        .chain((basis.remainder().projector.rank() > 0).then_some(basis.remainder()));
    for (record, outcome) in branches.enumerate() {
        let branch = state.apply_local(&targets, outcome.projector.matrix());
        for (i, amp) in branch.into_iter().enumerate() {
            if record_digit(i) == 0 {
                out[i + record * stride] += amp;
            }
        }
    }
    let mut next = state.with_amplitudes(out);
    next.set_role(obs, FactorRole::Memory { ready: false });
    debug_assert!((next.norm_sqr() - 1.0).abs() <= 1e-10);
    Ok(next)
}

/// `⟨Ψ|Π|Ψ⟩`.
pub fn outcome_probability(state: &StateVector, projector: &Projector) -> Result<f64, QuantumError> {
    let targets = targets_for(state, projector)?;
    let projected = state.apply_local(&targets, projector.matrix());
    let value: Complex64 = state
        .amplitudes()
        .iter()
        .zip(&projected)
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok(value.re.clamp(0.0, 1.0))
}

/// `⟨Ψ|Π_a ⊗ Π_b|Ψ⟩` for projectors on disjoint factor sets.
pub fn joint_outcome_probability(state: &StateVector, a: &Projector, b: &Projector) -> Result<f64, QuantumError> {
    if let Some(shared) = a.factors().iter().find(|f| b.factors().contains(f)) {
        return Err(QuantumError::OverlappingFactors(shared.clone()));
    }
    let ta = targets_for(state, a)?;
    let tb = targets_for(state, b)?;
    let after_b = state.with_amplitudes(state.apply_local(&tb, b.matrix()));
    let after_ab = after_b.apply_local(&ta, a.matrix());
    let value: Complex64 = state
        .amplitudes()
        .iter()
        .zip(&after_ab)
        .map(|(x, y)| x.conj() * y)
        .sum();
    Ok(value.re.clamp(0.0, 1.0))
}

/// Projects onto `projector` and renormalizes.
pub fn lueders_collapse(state: &StateVector, projector: &Projector) -> Result<StateVector, QuantumError> {
    let targets = targets_for(state, projector)?;
    let projected = state.apply_local(&targets, projector.matrix());
    let weight: f64 = projected.iter().map(|a| a.norm_sqr()).sum();
    if weight < ZERO_PROBABILITY {
        return Err(QuantumError::ZeroProbability);
    }
    let scale = weight.sqrt().recip();
    Ok(state.with_amplitudes(projected.into_iter().map(|a| a * scale).collect()))
}

/// Draws an outcome with Born probabilities and returns it with the collapsed state.
pub fn sample_outcome<R: Rng + ?Sized>(
    state: &StateVector,
    measurement: &ProjectiveMeasurement,
    rng: &mut R,
) -> Result<(String, StateVector), QuantumError> {
    let weighted = measurement
        .all_outcomes()
        .map(|o| Ok((o, outcome_probability(state, &o.projector)?)))
        .collect::<Result<Vec<_>, QuantumError>>()?;
    let draw: f64 = rng.random();
    let mut cumulative = 0.0;
    let mut chosen = None;
    for &(outcome, p) in &weighted {
        if p <= ZERO_PROBABILITY {
            continue;
        }
        chosen = Some(outcome);
        cumulative += p;
        if draw < cumulative {
            break;
        }
    }
    let outcome = chosen.ok_or(QuantumError::ZeroProbability)?;
    let collapsed = lueders_collapse(state, &outcome.projector)?;
    Ok((outcome.label.clone(), collapsed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use nalgebra::DVector;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn friend_setup(alpha: Complex64, beta: Complex64) -> StateVector {
        let system = StateVector::system("S", vec![alpha, beta]).unwrap();
        let friend = StateVector::ready_register("F", 2).unwrap();
        tensor_product(&system, &friend).unwrap()
    }

    #[test]
    fn basis_tensor_ready_register() {
        let s = StateVector::basis("S", 2, 0).unwrap();
        let r = StateVector::ready_register("F", 2).unwrap();
        let joint = tensor_product(&s, &r).unwrap();
        assert_eq!(joint.amplitude(&[0, 0]), c(1.0));
        assert_eq!(joint.norm_sqr(), 1.0);
    }

    #[test]
    fn superposition_tensor_ready_register() {
        let alpha = Complex64::from_polar(0.6, 0.3);
        let beta = Complex64::from_polar(0.8, -1.1);
        let joint = friend_setup(alpha, beta);
        assert_eq!(joint.amplitude(&[0, 0]), alpha);
        assert_eq!(joint.amplitude(&[1, 0]), beta);
        assert_eq!(joint.amplitude(&[0, 1]), c(0.0));
        assert!((joint.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn duplicate_label_is_rejected() {
        let s = StateVector::basis("S", 2, 0).unwrap();
        assert_eq!(tensor_product(&s, &s), Err(QuantumError::DuplicateFactor("S".into())));
    }

    #[test]
    fn unnormalized_input_is_rejected() {
        let err = StateVector::system("S", vec![c(1.0), c(1.0)]).unwrap_err();
        assert!(matches!(err, QuantumError::NotNormalized(_)));
    }

    #[test]
    fn observer_records_eigenbranches() {
        let basis = ProjectiveMeasurement::computational("S", 2).unwrap();
        let start = friend_setup(c(1.0), c(0.0));
        let after = apply_observer_unitary(&start, &basis, "F").unwrap();
        assert_eq!(after.amplitude(&[0, 0]), c(1.0));

        let (alpha, beta) = (Complex64::from_polar(0.6, 0.2), Complex64::from_polar(0.8, 2.0));
        let after = apply_observer_unitary(&friend_setup(alpha, beta), &basis, "F").unwrap();
        assert_eq!(after.amplitude(&[0, 0]), alpha);
        assert_eq!(after.amplitude(&[1, 1]), beta);
        assert_eq!(after.amplitude(&[1, 0]), c(0.0));
        assert!((after.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn observer_cannot_measure_twice() {
        let basis = ProjectiveMeasurement::computational("S", 2).unwrap();
        let once = apply_observer_unitary(&friend_setup(c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)), &basis, "F").unwrap();
        assert_eq!(
            apply_observer_unitary(&once, &basis, "F"),
            Err(QuantumError::ObserverNotReady("F".into()))
        );
        // a system factor is never a ready observer
        assert!(matches!(
            apply_observer_unitary(&once, &ProjectiveMeasurement::computational("F", 2).unwrap(), "S"),
            Err(QuantumError::ObserverNotReady(_))
        ));
    }

    #[test]
    fn incomplete_basis_needs_a_remainder_record() {
        let v = DVector::from_vec(vec![c(FRAC_1_SQRT_2), c(0.0), c(0.0), c(FRAC_1_SQRT_2)]);
        let w = DVector::from_vec(vec![c(FRAC_1_SQRT_2), c(0.0), c(0.0), c(-FRAC_1_SQRT_2)]);
        let basis = ProjectiveMeasurement::from_vectors(
            vec![("S".into(), 2), ("F".into(), 2)],
            vec![("1".into(), v), ("2".into(), w)],
        )
        .unwrap();
        assert_eq!(basis.record_slots(), 3);
        let sf = apply_observer_unitary(
            &friend_setup(c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)),
            &ProjectiveMeasurement::computational("S", 2).unwrap(),
            "F",
        )
        .unwrap();
        let small = tensor_product(&sf, &StateVector::ready_register("W", 2).unwrap()).unwrap();
        assert!(matches!(
            apply_observer_unitary(&small, &basis, "W"),
            Err(QuantumError::IncompleteBasis {
                needed: 3,
                available: 2,
                ..
            })
        ));
        let big = tensor_product(&sf, &StateVector::ready_register("W", 3).unwrap()).unwrap();
        let after = apply_observer_unitary(&big, &basis, "W").unwrap();
        let perp = Projector::basis_state("W", 3, 2).unwrap();
        assert!(outcome_probability(&after, &perp).unwrap() < 1e-12);
    }

    #[test]
    fn probabilities_of_recorded_state() {
        let (alpha, beta) = (Complex64::from_polar(0.6, 0.7), Complex64::from_polar(0.8, 0.0));
        let basis = ProjectiveMeasurement::computational("S", 2).unwrap();
        let state = apply_observer_unitary(&friend_setup(alpha, beta), &basis, "F").unwrap();
        let zero = Projector::basis_state("F", 2, 0).unwrap();
        assert!((outcome_probability(&state, &zero).unwrap() - 0.36).abs() < 1e-12);
        let id = Projector::identity(vec![("S".into(), 2), ("F".into(), 2)]).unwrap();
        assert!((outcome_probability(&state, &id).unwrap() - 1.0).abs() < 1e-12);
        // |0,1⟩⟨0,1| on (S, F) has no support on a recorded state
        let mut m = nalgebra::DMatrix::zeros(4, 4);
        m[(1, 1)] = c(1.0);
        let mixed = Projector::new(vec![("S".into(), 2), ("F".into(), 2)], m).unwrap();
        assert_eq!(outcome_probability(&state, &mixed).unwrap(), 0.0);
        let missing = Projector::basis_state("X", 2, 0).unwrap();
        assert_eq!(
            outcome_probability(&state, &missing),
            Err(QuantumError::UnknownFactor("X".into()))
        );
    }

    #[test]
    fn joint_probability_rejects_overlap() {
        let state = friend_setup(c(1.0), c(0.0));
        let p = Projector::basis_state("S", 2, 0).unwrap();
        assert_eq!(
            joint_outcome_probability(&state, &p, &p),
            Err(QuantumError::OverlappingFactors("S".into()))
        );
    }

    #[test]
    fn lueders_rule() {
        let basis = ProjectiveMeasurement::computational("S", 2).unwrap();
        let (alpha, beta) = (c(0.6), Complex64::new(0.0, 0.8));
        let state = apply_observer_unitary(&friend_setup(alpha, beta), &basis, "F").unwrap();
        let zero = Projector::basis_state("F", 2, 0).unwrap();
        let collapsed = lueders_collapse(&state, &zero).unwrap();
        assert!((collapsed.amplitude(&[0, 0]) - c(1.0)).norm() < 1e-12);
        assert!((outcome_probability(&collapsed, &zero).unwrap() - 1.0).abs() < 1e-12);

        let id = Projector::identity(vec![("F".into(), 2)]).unwrap();
        let same = lueders_collapse(&state, &id).unwrap();
        for (x, y) in same.amplitudes().iter().zip(state.amplitudes()) {
            assert!((x - y).norm() < 1e-12);
        }

        let never = lueders_collapse(&collapsed, &Projector::basis_state("F", 2, 1).unwrap());
        assert_eq!(never, Err(QuantumError::ZeroProbability));
    }

    #[test]
    fn sampling_deterministic_branch() {
        let state = StateVector::basis("S", 2, 0).unwrap();
        let m = ProjectiveMeasurement::computational("S", 2).unwrap();
        let mut rng = stream(3, 0);
        for _ in 0..100 {
            let (label, after) = sample_outcome(&state, &m, &mut rng).unwrap();
            assert_eq!(label, "0");
            assert_eq!(after, state);
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        let state = StateVector::system("S", vec![c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)]).unwrap();
        let m = ProjectiveMeasurement::computational("S", 2).unwrap();
        let run = |sub| {
            let mut rng = stream(99, sub);
            (0..64)
                .map(|_| sample_outcome(&state, &m, &mut rng).unwrap().0)
                .collect::<Vec<_>>()
        };
        assert_eq!(run(4), run(4));
        assert_ne!(run(4), run(5));
    }

    #[test]
    fn sampling_frequency_matches_born_rule() {
        let state = StateVector::system("S", vec![c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)]).unwrap();
        let m = ProjectiveMeasurement::computational("S", 2).unwrap();
        let mut rng = stream(2024, 1);
        let n = 100_000;
        let zeros = (0..n)
            .filter(|_| sample_outcome(&state, &m, &mut rng).unwrap().0 == "0")
            .count();
        let se = (0.25f64 / n as f64).sqrt();
        assert!((zeros as f64 / n as f64 - 0.5).abs() <= 5.0 * se);
    }

    #[test]
    fn overlapping_outcomes_are_rejected() {
        let v = DVector::from_vec(vec![c(1.0), c(0.0)]);
        let w = DVector::from_vec(vec![c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)]);
        let err = ProjectiveMeasurement::from_vectors(vec![("S".into(), 2)], vec![("a".into(), v), ("b".into(), w)])
            .unwrap_err();
        assert!(matches!(err, QuantumError::NotAProjector(_)));
    }
}
