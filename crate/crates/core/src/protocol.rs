//! A signaling protocol built on a flip-aware friend.
//!
//! The source emits `N` pairs in the state `(|0,1⟩ + |1,0⟩)/√2`. For every
//! bit of his message Bob measures all his qubits either in the
//! computational basis (bit 0) or in the tilted basis `μ = 1/√3` (bit 1).
//! Wigner always measures with `a = sin(π/8)`, `b = cos(π/8)`. The flip
//! probabilities that reproduce the statistics differ between Bob's two
//! settings (1/4 against 1/4 + 1/√2), so a friend who can tell whether most
//! of her records changed reads off Bob's bit.
//!
//! The simulation runs at the hidden-variable level: each register draws
//! definite records `(f₂, B₂)` before Wigner's measurement, then the
//! friend's record flips with the solved `q^{f₂B₂}`.

use std::f64::consts::FRAC_PI_8;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::flip::{solve_conditional_flip, FlipError, FlipSolution, TieBreak};
use crate::rng::stream;
use crate::scenarios::{
    extended_joint_table, Amplitude, Coefficients, JointTable, ScenarioConfig, ScenarioError, Time,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("at least one register per repetition is required")]
    NoRegisters,
    #[error("the message is empty")]
    EmptyMessage,
    #[error("invalid bit {0:?}; expected 0 or 1")]
    InvalidBit(char),
    #[error("length mismatch: expected {expected} bits, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("at least one sample is required")]
    NoSamples,
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Flip(#[from] FlipError),
}

/// Bob's two measurement settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BobBasis {
    /// `μ = 1, ν = 0`; encodes bit 0.
    Computational,
    /// `μ = 1/√3, ν = √(2/3)`; encodes bit 1.
    Tilted,
}

impl BobBasis {
    pub fn for_bit(bit: bool) -> Self {
        if bit {
            BobBasis::Tilted
        } else {
            BobBasis::Computational
        }
    }

    pub fn coefficients(self) -> Coefficients {
        match self {
            BobBasis::Computational => Coefficients::new(Amplitude::real(1.0), Amplitude::real(0.0)),
            BobBasis::Tilted => Coefficients::new(
                Amplitude::real(3f64.sqrt().recip()),
                Amplitude::real((2.0f64 / 3.0).sqrt()),
            ),
        }
    }
}

/// Wigner's fixed setting `a = sin(π/8)`, `b = cos(π/8)`.
pub fn default_wigner_setting() -> Coefficients {
    Coefficients::from_angle(FRAC_PI_8)
}

/// The maximally entangled source with the given Wigner and Bob settings.
pub fn protocol_scenario(basis: BobBasis, wigner: Coefficients) -> Result<ScenarioConfig, ScenarioError> {
    let half = Amplitude::real(std::f64::consts::FRAC_1_SQRT_2);
    ScenarioConfig::extended(Coefficients::new(half, half), wigner, basis.coefficients())
}

/// Analytic description of one setting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolTables {
    pub basis: BobBasis,
    pub before: JointTable,
    pub after: JointTable,
    pub flip: FlipSolution,
    /// Flip probability averaged over the table before Wigner's measurement.
    pub q: f64,
}

/// Tables and flip probability for a setting with Wigner's default measurement.
pub fn theoretical_protocol_tables(basis: BobBasis) -> Result<ProtocolTables, ProtocolError> {
    protocol_tables(basis, default_wigner_setting())
}

pub fn protocol_tables(basis: BobBasis, wigner: Coefficients) -> Result<ProtocolTables, ProtocolError> {
    let config = protocol_scenario(basis, wigner)?;
    let before = extended_joint_table(&config, Time::T2)?;
    let after = extended_joint_table(&config, Time::T3)?;
    let flip = solve_conditional_flip(&config, TieBreak::default())?;
    let table = flip.flip_table();
    let q = (0..2)
        .flat_map(|n| (0..2).map(move |m| (n, m)))
        .map(|(n, m)| before.get(n, m) * table[n][m])
        .sum();
    Ok(ProtocolTables {
        basis,
        before,
        after,
        flip,
        q,
    })
}

/// Parses a string of `0`/`1` characters.
pub fn parse_bits(text: &str) -> Result<Vec<bool>, ProtocolError> {
    text.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(ProtocolError::InvalidBit(other)),
        })
        .collect()
}

pub fn format_bits(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    /// Registers measured per repetition, `N`.
    pub n_registers: u64,
    /// One bit per repetition.
    pub message: Vec<bool>,
    pub wigner: Coefficients,
    pub seed: u64,
}

impl ProtocolConfig {
    pub fn new(n_registers: u64, message: Vec<bool>, seed: u64) -> Self {
        ProtocolConfig {
            n_registers,
            message,
            wigner: default_wigner_setting(),
            seed,
        }
    }

    pub fn repetitions(&self) -> usize {
        self.message.len()
    }

    fn validate(&self) -> Result<(), ProtocolError> {
        if self.n_registers == 0 {
            return Err(ProtocolError::NoRegisters);
        }
        if self.message.is_empty() {
            return Err(ProtocolError::EmptyMessage);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    MostlyFlipped,
    MostlyUnflipped,
    Tie,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Repetition {
    pub sent_bit: bool,
    pub basis: BobBasis,
    pub flip_count: u64,
    pub flip_fraction: f64,
    pub verdict: Verdict,
    pub decoded_bit: bool,
    /// Registers whose record reads 0 after Wigner's measurement.
    pub friend_zero_after: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolResult {
    pub n_registers: u64,
    pub seed: u64,
    pub repetitions: Vec<Repetition>,
    pub decoded: Vec<bool>,
    pub bit_errors: usize,
    /// Averaged flip probability for bit 0 and bit 1.
    pub theoretical_q: [f64; 2],
}

/// One register: draw `(f₂, B₂)` from the table, then flip the friend's record.
fn draw_register<R: Rng + ?Sized>(before: &JointTable, q: &[[f64; 2]; 2], rng: &mut R) -> (usize, usize, bool) {
    let u: f64 = rng.random();
    let mut cumulative = 0.0;
    let mut cell = (1, 1);
    'search: for f in 0..2 {
        for b in 0..2 {
            cumulative += before.get(f, b);
            if u < cumulative {
                cell = (f, b);
                break 'search;
            }
        }
    }
    let (f, b) = cell;
    let flipped = rng.random::<f64>() < q[f][b];
    (f, b, flipped)
}

/// Runs every repetition on its own random substream `(seed, index)`.
pub fn run_protocol(config: &ProtocolConfig) -> Result<ProtocolResult, ProtocolError> {
    config.validate()?;
    let settings = [
        protocol_tables(BobBasis::Computational, config.wigner)?,
        protocol_tables(BobBasis::Tilted, config.wigner)?,
    ];
    let n = config.n_registers;
    let repetitions: Vec<Repetition> = config
        .message
        .par_iter()
        .enumerate()
        .map(|(index, &bit)| {
            let tables = &settings[bit as usize];
            let q = tables.flip.flip_table();
            let mut rng = stream(config.seed, index as u64);
            let mut flip_count = 0;
            let mut friend_zero_after = 0;
            for _ in 0..n {
                let (f, _, flipped) = draw_register(&tables.before, &q, &mut rng);
                flip_count += flipped as u64;
                let after = if flipped { 1 - f } else { f };
                friend_zero_after += (after == 0) as u64;
            }
            let (verdict, decoded_bit) = match (2 * flip_count).cmp(&n) {
                std::cmp::Ordering::Greater => (Verdict::MostlyFlipped, true),
                std::cmp::Ordering::Less => (Verdict::MostlyUnflipped, false),
                std::cmp::Ordering::Equal => (Verdict::Tie, rng.random::<bool>()),
            };
            Repetition {
                sent_bit: bit,
                basis: tables.basis,
                flip_count,
                flip_fraction: flip_count as f64 / n as f64,
                verdict,
                decoded_bit,
                friend_zero_after,
            }
        })
        .collect();
    let decoded: Vec<bool> = repetitions.iter().map(|r| r.decoded_bit).collect();
    let bit_errors = decoded.iter().zip(&config.message).filter(|(a, b)| a != b).count();
    Ok(ProtocolResult {
        n_registers: n,
        seed: config.seed,
        repetitions,
        decoded,
        bit_errors,
        theoretical_q: [settings[0].q, settings[1].q],
    })
}

/// Fraction of decoded bits that differ from `truth`.
pub fn channel_error_rate(result: &ProtocolResult, truth: &[bool]) -> Result<f64, ProtocolError> {
    if truth.len() != result.decoded.len() {
        return Err(ProtocolError::LengthMismatch {
            expected: result.decoded.len(),
            found: truth.len(),
        });
    }
    if truth.is_empty() {
        return Ok(0.0);
    }
    let wrong = result.decoded.iter().zip(truth).filter(|(a, b)| a != b).count();
    Ok(wrong as f64 / truth.len() as f64)
}

/// Empirical record pairs of the hidden-variable process.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HiddenVariableCheck {
    pub samples: u64,
    /// Counts of `(f₂, B₂)`.
    pub before: [[u64; 2]; 2],
    /// Counts of `(f₃, B₃)`.
    pub after: [[u64; 2]; 2],
    /// Largest cell-wise gap between the `(f₃, B₃)` frequencies and the quantum table.
    pub max_deviation: f64,
}

/// Counts indexed by the friend's record, then Bob's result.
pub type Counts = [[u64; 2]; 2];

/// Samples the hidden-variable process with an explicit flip table `qⁿᵐ`.
pub fn hidden_variable_sample<R: Rng + ?Sized>(
    before: &JointTable,
    q: &[[f64; 2]; 2],
    samples: u64,
    rng: &mut R,
) -> Result<(Counts, Counts), ProtocolError> {
    if samples == 0 {
        return Err(ProtocolError::NoSamples);
    }
    let mut counts_before = [[0u64; 2]; 2];
    let mut counts_after = [[0u64; 2]; 2];
    for _ in 0..samples {
        let (f, b, flipped) = draw_register(before, q, rng);
        counts_before[f][b] += 1;
        counts_after[if flipped { 1 - f } else { f }][b] += 1;
    }
    Ok((counts_before, counts_after))
}

/// Runs the hidden-variable process with the solved four-parameter model and
/// compares its `(f₃, B₃)` frequencies with the quantum table.
pub fn hidden_variable_consistency<R: Rng + ?Sized>(
    config: &ScenarioConfig,
    samples: u64,
    rng: &mut R,
) -> Result<HiddenVariableCheck, ProtocolError> {
    let before = extended_joint_table(config, Time::T2)?;
    let after = extended_joint_table(config, Time::T3)?;
    let flip = solve_conditional_flip(config, TieBreak::default())?;
    let (counts_before, counts_after) = hidden_variable_sample(&before, &flip.flip_table(), samples, rng)?;
    let n = samples as f64;
    let max_deviation = (0..4)
        .map(|k| (counts_after[k / 2][k % 2] as f64 / n - after.get(k / 2, k % 2)).abs())
        .fold(0.0, f64::max);
    Ok(HiddenVariableCheck {
        samples,
        before: counts_before,
        after: counts_after,
        max_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn protocol_values() {
        let c = theoretical_protocol_tables(BobBasis::Computational).unwrap();
        assert!((c.q - 0.25).abs() < 1e-12);
        let t = theoretical_protocol_tables(BobBasis::Tilted).unwrap();
        assert!((t.q - (0.25 + FRAC_1_SQRT_2)).abs() < 1e-12, "{:?} {}", t.flip, t.q);
        let expected = JointTable::new(Time::T2, [[1.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 1.0 / 3.0]]).unwrap();
        assert!(t.before.max_abs_diff(&expected) < 1e-12);
        for tables in [&c, &t] {
            let m = tables.after.friend_marginal();
            assert!((m[0] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn bits_round_trip() {
        let bits = parse_bits("0110").unwrap();
        assert_eq!(bits, vec![false, true, true, false]);
        assert_eq!(format_bits(&bits), "0110");
        assert_eq!(parse_bits("01x"), Err(ProtocolError::InvalidBit('x')));
    }

    #[test]
    fn single_register_verdict_is_the_flip() {
        let result = run_protocol(&ProtocolConfig::new(1, parse_bits("0101100111").unwrap(), 9)).unwrap();
        for r in &result.repetitions {
            assert_eq!(r.decoded_bit, r.flip_count == 1);
            assert_ne!(r.verdict, Verdict::Tie);
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let config = ProtocolConfig::new(200, parse_bits("0110").unwrap(), 3);
        assert_eq!(run_protocol(&config).unwrap(), run_protocol(&config).unwrap());
    }

    #[test]
    fn error_rates() {
        let result = run_protocol(&ProtocolConfig::new(500, parse_bits("0101").unwrap(), 42)).unwrap();
        assert_eq!(channel_error_rate(&result, &result.decoded).unwrap(), 0.0);
        let flipped: Vec<bool> = result.decoded.iter().map(|b| !b).collect();
        assert_eq!(channel_error_rate(&result, &flipped).unwrap(), 1.0);
        assert!(channel_error_rate(&result, &[true]).is_err());
    }

    #[test]
    fn zero_flip_keeps_table() {
        let t = theoretical_protocol_tables(BobBasis::Tilted).unwrap();
        let (before, after) = hidden_variable_sample(&t.before, &[[0.0; 2]; 2], 1000, &mut stream(1, 0)).unwrap();
        assert_eq!(before, after);
    }

    #[test]
    fn invalid_configs() {
        assert_eq!(
            run_protocol(&ProtocolConfig::new(0, vec![true], 1)),
            Err(ProtocolError::NoRegisters)
        );
        assert_eq!(
            run_protocol(&ProtocolConfig::new(5, vec![], 1)),
            Err(ProtocolError::EmptyMessage)
        );
    }
}
