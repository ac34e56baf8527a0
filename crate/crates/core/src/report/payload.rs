use serde_json::{json, Value};

use super::ReportError;
use crate::flip::{FeasibilitySweep, FlipSolution};
use crate::protocol::{format_bits, ProtocolResult};
use crate::rng::stream;
use crate::scenarios::{
    evaluate_extended_joint_table, evaluate_extended_marginal, evaluate_simple_friend_marginal, extended_joint_table,
    extended_marginals, extended_states, sample_arrangement, simple_friend_marginal, simple_states,
    wigner_remainder_weight, Arrangement, DerivedInterference, Party, ScenarioConfig, Time,
};
use crate::verification::CriterionOutcome;

/// Sampling request for the extended report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampledRuns {
    pub runs: u64,
    pub seed: u64,
}

pub fn simple_payload(config: &ScenarioConfig) -> Result<Value, ReportError> {
    let states = simple_states(config)?;
    let mut marginals = Vec::new();
    let mut deviation: f64 = 0.0;
    for time in [Time::T1, Time::T2] {
        let closed = simple_friend_marginal(config, time)?;
        deviation = deviation.max(closed.max_abs_diff(&evaluate_simple_friend_marginal(&states, time)?));
        marginals.push(closed);
    }
    let interference = DerivedInterference::from_config(config);
    Ok(json!({
        "kind": "simple",
        "config": config,
        "interference": {"theta": interference.theta, "chi": interference.chi},
        "marginals": marginals,
        "projector_check": {
            "max_deviation": deviation,
            "remainder_weight": wigner_remainder_weight(&states[2])?,
        },
    }))
}

pub fn extended_payload(config: &ScenarioConfig, sampled: Option<SampledRuns>) -> Result<Value, ReportError> {
    let states = extended_states(config)?;
    let mut marginals = Vec::new();
    let mut deviation: f64 = 0.0;
    for (party, time) in [
        (Party::Friend, Time::T1),
        (Party::Friend, Time::T2),
        (Party::Friend, Time::T3),
        (Party::Bob, Time::T2),
        (Party::Bob, Time::T3),
    ] {
        let closed = extended_marginals(config, party, time)?;
        deviation = deviation.max(closed.max_abs_diff(&evaluate_extended_marginal(&states, party, time)?));
        marginals.push(closed);
    }
    let mut tables = Vec::new();
    for time in [Time::T2, Time::T3] {
        let closed = extended_joint_table(config, time)?;
        deviation = deviation.max(closed.max_abs_diff(&evaluate_extended_joint_table(&states, time)?));
        tables.push(closed);
    }
    let sampled = match sampled {
        Some(request) => {
            let before = sample_arrangement(
                config,
                Arrangement::AskBeforeWigner,
                request.runs,
                &mut stream(request.seed, 0),
            )?;
            let after = sample_arrangement(
                config,
                Arrangement::WignerThenAsk,
                request.runs,
                &mut stream(request.seed, 1),
            )?;
            json!({
                "runs": request.runs,
                "seed": request.seed,
                "ask_before_wigner": before.counts,
                "wigner_then_ask": after.counts,
            })
        }
        None => Value::Null,
    };
    let interference = DerivedInterference::from_config(config);
    Ok(json!({
        "kind": "extended",
        "config": config,
        "interference": interference,
        "marginals": marginals,
        "joint_tables": tables,
        "projector_check": {
            "max_deviation": deviation,
            "remainder_weight": wigner_remainder_weight(&states[3])?,
        },
        "sampled": sampled,
    }))
}

pub fn flip_payload(solution: &FlipSolution) -> Value {
    let named: serde_json::Map<String, Value> = solution
        .family
        .parameter_names()
        .iter()
        .zip(&solution.parameters)
        .map(|(name, v)| ((*name).to_owned(), json!(v)))
        .collect();
    json!({
        "kind": "flip-solve",
        "solution": solution,
        "named_parameters": named,
    })
}

pub fn protocol_payload(result: &ProtocolResult, message: &[bool]) -> Value {
    let rate = if message.is_empty() {
        0.0
    } else {
        result.bit_errors as f64 / message.len() as f64
    };
    json!({
        "kind": "protocol",
        "n_registers": result.n_registers,
        "seed": result.seed,
        "message": format_bits(message),
        "decoded": format_bits(&result.decoded),
        "bit_errors": result.bit_errors,
        "error_rate": rate,
        "theoretical_q": result.theoretical_q,
        "repetitions": result.repetitions,
    })
}

pub fn fig5_payload(sweep: &FeasibilitySweep) -> Value {
    json!({
        "kind": "fig5",
        "cos_delta_phi": sweep.cos_delta_phi,
        "any_infeasible": sweep.any_infeasible(),
        "points": sweep.points,
    })
}

pub fn verification_payload(outcomes: &[CriterionOutcome]) -> Value {
    json!({
        "kind": "verify-paper",
        "passed": outcomes.iter().all(|o| o.passed),
        "criteria": outcomes,
    })
}
