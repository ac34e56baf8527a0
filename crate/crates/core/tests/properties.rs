use std::f64::consts::TAU;

use num_complex::Complex64;
use proptest::prelude::*;
use serde_json::json;
use wigner_memory::flip::{
    reconstruct_joint, reconstruct_marginal, solve, FlipFamily, FlipStatus, TieBreak, FEASIBILITY_TOLERANCE,
};
use wigner_memory::protocol::{run_protocol, ProtocolConfig};
use wigner_memory::quantum::{apply_observer_unitary, tensor_product, ProjectiveMeasurement, StateVector};
use wigner_memory::report::{decimal, flip_payload, Manifest, Report};
use wigner_memory::scenarios::{
    evaluate_extended_joint_table, evaluate_extended_marginal, extended_joint_table, extended_marginals,
    extended_states, simple_friend_marginal, simple_states, Amplitude, Coefficients, Party, ScenarioConfig, Time,
};

fn coefficients() -> impl Strategy<Value = Coefficients> {
    (0.0..=1.0f64, 0.0..TAU, 0.0..TAU)
        .prop_map(|(w, p0, p1)| Coefficients::new(Amplitude::new(w.sqrt(), p0), Amplitude::new((1.0 - w).sqrt(), p1)))
}

fn simple_config() -> impl Strategy<Value = ScenarioConfig> {
    (coefficients(), coefficients()).prop_map(|(i, w)| ScenarioConfig::simple(i, w).unwrap())
}

fn extended_config() -> impl Strategy<Value = ScenarioConfig> {
    (coefficients(), coefficients(), coefficients()).prop_map(|(i, w, b)| ScenarioConfig::extended(i, w, b).unwrap())
}

fn qubit() -> impl Strategy<Value = StateVector> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
        .prop_filter("nonzero", |(a, b, c, d)| a * a + b * b + c * c + d * d > 1e-3)
        .prop_map(|(a, b, c, d)| {
            let n = (a * a + b * b + c * c + d * d).sqrt();
            StateVector::system("S", vec![Complex64::new(a / n, b / n), Complex64::new(c / n, d / n)]).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn measurement_interaction_preserves_norm_and_weights(s in qubit()) {
        let memory = StateVector::ready_register("F", 2).unwrap();
        let joint = tensor_product(&s, &memory).unwrap();
        prop_assert!((joint.norm_sqr() - 1.0).abs() < 1e-12);
        let basis = ProjectiveMeasurement::computational("S", 2).unwrap();
        let after = apply_observer_unitary(&joint, &basis, "F").unwrap();
        prop_assert!((after.norm_sqr() - 1.0).abs() < 1e-12);
        for k in 0..2 {
            let recorded = after.amplitude(&[k, k]);
            prop_assert!((recorded - s.amplitudes()[k]).norm() < 1e-12);
            prop_assert!(after.amplitude(&[k, 1 - k]).norm() < 1e-15);
        }
        // a used memory cannot record again
        prop_assert!(apply_observer_unitary(&after, &basis, "F").is_err());
    }

    #[test]
    fn evolution_is_unitary(config in extended_config()) {
        for state in simple_states(&ScenarioConfig { bob: None, ..config }).unwrap().iter() {
            prop_assert!((state.norm_sqr() - 1.0).abs() < 1e-12);
        }
        for state in extended_states(&config).unwrap().iter() {
            prop_assert!((state.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_forms_agree_with_projectors(config in extended_config()) {
        let states = extended_states(&config).unwrap();
        for (party, time) in [(Party::Friend, Time::T1), (Party::Friend, Time::T2), (Party::Friend, Time::T3), (Party::Bob, Time::T2), (Party::Bob, Time::T3)] {
            let closed = extended_marginals(&config, party, time).unwrap();
            let direct = evaluate_extended_marginal(&states, party, time).unwrap();
            prop_assert!(closed.max_abs_diff(&direct) < 1e-10);
            prop_assert!((closed.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(closed.probabilities.iter().all(|p| (0.0..=1.0).contains(p)));
        }
        for time in [Time::T2, Time::T3] {
            let closed = extended_joint_table(&config, time).unwrap();
            prop_assert!(closed.max_abs_diff(&evaluate_extended_joint_table(&states, time).unwrap()) < 1e-10);
        }
    }

    #[test]
    fn bob_cannot_signal_to_wigner_side(config in extended_config(), other in coefficients()) {
        let moved = config.with_bob(other).unwrap();
        let f = extended_marginals(&config, Party::Friend, Time::T3).unwrap();
        let g = extended_marginals(&moved, Party::Friend, Time::T3).unwrap();
        prop_assert!(f.max_abs_diff(&g) < 1e-12);
        let b2 = extended_marginals(&config, Party::Bob, Time::T2).unwrap();
        let b3 = extended_marginals(&config, Party::Bob, Time::T3).unwrap();
        prop_assert!(b2.max_abs_diff(&b3) < 1e-12);
    }

    #[test]
    fn simple_flip_solutions_are_sound(config in simple_config(), mass in any::<bool>()) {
        let tie = if mass { TieBreak::MinMass } else { TieBreak::MinEps };
        let before = simple_friend_marginal(&config, Time::T1).unwrap();
        let after = simple_friend_marginal(&config, Time::T2).unwrap();
        for family in [FlipFamily::Single, FlipFamily::Two] {
            let s = solve(family, &config, tie).unwrap();
            prop_assert!(s.parameters.iter().all(|q| (0.0..=1.0).contains(q)));
            if s.is_feasible() {
                prop_assert!(s.clamp <= FEASIBILITY_TOLERANCE);
                prop_assert!(s.residual <= FEASIBILITY_TOLERANCE);
                let rebuilt = reconstruct_marginal(&s, &before).unwrap();
                prop_assert!(rebuilt.max_abs_diff(&after) < 1e-8);
            } else {
                let cert = s.certificate.as_ref().unwrap();
                prop_assert!(cert.floor > FEASIBILITY_TOLERANCE);
                prop_assert!(reconstruct_marginal(&s, &before).is_err());
            }
        }
    }

    #[test]
    fn extended_flip_solutions_are_sound(config in extended_config()) {
        let before = extended_joint_table(&config, Time::T2).unwrap();
        let after = extended_joint_table(&config, Time::T3).unwrap();
        let joint = solve(FlipFamily::JointTwo, &config, TieBreak::MinEps).unwrap();
        let four = solve(FlipFamily::Four, &config, TieBreak::MinEps).unwrap();
        // the finer model is at least as expressive
        if joint.is_feasible() {
            prop_assert!(four.is_feasible());
        }
        for s in [&joint, &four] {
            prop_assert!(s.clamp <= FEASIBILITY_TOLERANCE || !s.is_feasible());
            if s.is_feasible() {
                let rebuilt = reconstruct_joint(s, &before).unwrap();
                prop_assert!(rebuilt.max_abs_diff(&after) < 1e-8);
            } else {
                prop_assert_eq!(s.status, FlipStatus::Infeasible);
                prop_assert!(s.certificate.as_ref().unwrap().floor > FEASIBILITY_TOLERANCE);
            }
        }
    }

    #[test]
    fn decimals_are_bit_exact(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        prop_assert_eq!(decimal(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
    }

    #[test]
    fn reports_round_trip(config in simple_config(), x in -10.0..10.0f64) {
        let solution = solve(FlipFamily::Two, &config, TieBreak::MinEps).unwrap();
        let manifest = Manifest::new("flip-solve").number("x", x).seed(7).stamped();
        let report = Report::new(manifest, flip_payload(&solution)).unwrap();
        let text = report.to_json().unwrap();
        let back: Report = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&back, &report);
        prop_assert_eq!(back.payload_text().unwrap(), report.payload_text().unwrap());
        prop_assert!(back.verify_checksum().unwrap());
        prop_assert_eq!(back.manifest.parameter_value("x").unwrap().to_bits(), x.to_bits());
        let params = back.payload["solution"]["parameters"].as_array().unwrap();
        for (p, q) in params.iter().zip(&solution.parameters) {
            prop_assert_eq!(p.as_f64().unwrap().to_bits(), q.to_bits());
        }
    }

    #[test]
    fn tampered_payload_fails_checksum(q in 0.0..1.0f64, r in 0.0..1.0f64) {
        prop_assume!(q != r);
        let mut report = Report::new(Manifest::new("fig5"), json!({"kind": "fig5", "q": q})).unwrap();
        prop_assert!(report.verify_checksum().unwrap());
        report.payload["q"] = json!(r);
        prop_assert!(!report.verify_checksum().unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn protocol_is_deterministic(seed in any::<u64>(), bits in prop::collection::vec(any::<bool>(), 1..8), n in 1u64..200) {
        let config = ProtocolConfig::new(n, bits, seed);
        let a = run_protocol(&config).unwrap();
        let b = run_protocol(&config).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.repetitions.iter().all(|r| r.flip_count <= n && r.friend_zero_after <= n));
    }
}
