use std::fs::File;
use std::io::Write;
use std::path::Path;

use super::{csv_decimal, ReportError};
use crate::flip::{feasibility_sweep, FeasibilitySweep, FlipSolution};
use crate::protocol::ProtocolResult;
use crate::scenarios::{extended_joint_table, extended_marginals, simple_friend_marginal, Party, ScenarioConfig, Time};
use crate::verification::CriterionOutcome;

/// A header row plus string cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    fn new(header: &[&str]) -> Self {
        CsvTable {
            header: header.iter().map(|s| (*s).to_owned()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn simple(config: &ScenarioConfig) -> Result<Self, ReportError> {
        let mut table = CsvTable::new(&["party", "time", "outcome", "probability"]);
        for time in [Time::T1, Time::T2] {
            let d = simple_friend_marginal(config, time)?;
            for (k, p) in d.probabilities.iter().enumerate() {
                table.push(vec![
                    d.party.to_string(),
                    time.to_string(),
                    k.to_string(),
                    csv_decimal(*p),
                ]);
            }
        }
        Ok(table)
    }

    pub fn extended(config: &ScenarioConfig) -> Result<Self, ReportError> {
        let mut table = CsvTable::new(&["time", "friend", "bob", "probability"]);
        for time in [Time::T2, Time::T3] {
            let joint = extended_joint_table(config, time)?;
            for f in 0..2 {
                for b in 0..2 {
                    table.push(vec![
                        time.to_string(),
                        f.to_string(),
                        b.to_string(),
                        csv_decimal(joint.get(f, b)),
                    ]);
                }
            }
        }
        for (party, time) in [(Party::Friend, Time::T3), (Party::Bob, Time::T3)] {
            let d = extended_marginals(config, party, time)?;
            for (k, p) in d.probabilities.iter().enumerate() {
                let (f, b) = match party {
                    Party::Friend => (k.to_string(), String::new()),
                    Party::Bob => (String::new(), k.to_string()),
                };
                table.push(vec![time.to_string(), f, b, csv_decimal(*p)]);
            }
        }
        Ok(table)
    }

    pub fn flip(solution: &FlipSolution) -> Self {
        let mut table = CsvTable::new(&["family", "status", "parameter", "value"]);
        let mut row = |name: &str, value: String| {
            table.push(vec![
                solution.family.to_string(),
                status_name(solution),
                name.to_owned(),
                value,
            ]);
        };
        for (name, v) in solution.family.parameter_names().iter().zip(&solution.parameters) {
            row(name, csv_decimal(*v));
        }
        row("epsilon", csv_decimal(solution.epsilon));
        row("residual", csv_decimal(solution.residual));
        if let Some([q0, q1]) = solution.effective {
            row("effective_q0", csv_decimal(q0));
            row("effective_q1", csv_decimal(q1));
        }
        if let Some(cert) = &solution.certificate {
            row("certificate_floor", csv_decimal(cert.floor));
        }
        table
    }

    pub fn protocol(result: &ProtocolResult) -> Self {
        let mut table = CsvTable::new(&[
            "repetition",
            "sent_bit",
            "basis",
            "flip_count",
            "flip_fraction",
            "verdict",
            "decoded_bit",
            "friend_zero_after",
        ]);
        for (i, r) in result.repetitions.iter().enumerate() {
            table.push(vec![
                i.to_string(),
                (r.sent_bit as u8).to_string(),
                serde_plain(&r.basis),
                r.flip_count.to_string(),
                csv_decimal(r.flip_fraction),
                serde_plain(&r.verdict),
                (r.decoded_bit as u8).to_string(),
                r.friend_zero_after.to_string(),
            ]);
        }
        table
    }

    pub fn fig5(sweep: &FeasibilitySweep) -> Self {
        let mut table = CsvTable::new(&["x", "q00", "feasible"]);
        for p in &sweep.points {
            table.push(vec![csv_decimal(p.x), csv_decimal(p.q00), p.feasible.to_string()]);
        }
        table
    }

    pub fn verification(outcomes: &[CriterionOutcome]) -> Self {
        let mut table = CsvTable::new(&["criterion", "name", "passed", "detail"]);
        for o in outcomes {
            table.push(vec![
                o.id.to_string(),
                o.name.clone(),
                o.passed.to_string(),
                o.detail.clone(),
            ]);
        }
        table
    }
}

fn status_name(solution: &FlipSolution) -> String {
    serde_plain(&solution.status)
}

/// Serde name of a unit enum variant.
fn serde_plain<T: serde::Serialize>(value: &T) -> String {
    match serde_json::to_value(value) {
        Ok(serde_json::Value::String(s)) => s,
        _ => String::new(),
    }
}

pub fn write_csv<W: Write>(table: &CsvTable, writer: W) -> Result<(), ReportError> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(&table.header)?;
    for row in &table.rows {
        out.write_record(row)?;
    }
    out.flush()?;
    Ok(())
}

/// Writes the feasibility sweep as CSV with columns `x, q00, feasible`.
pub fn emit_fig5_sweep(steps: usize, cos_delta_phi: f64, path: &Path) -> Result<FeasibilitySweep, ReportError> {
    let sweep = feasibility_sweep(steps, cos_delta_phi)?;
    let file = File::create(path)?;
    write_csv(&CsvTable::fig5(&sweep), file)?;
    Ok(sweep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig5_endpoints() {
        let sweep = feasibility_sweep(2, 1.0).unwrap();
        let mut buf = Vec::new();
        write_csv(&CsvTable::fig5(&sweep), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,q00,feasible");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("0.00000000000e0,"));
        assert!(lines[2].starts_with("1.57079632679e0,"));
    }
}
