//! Command-line front end.
//!
//! [`run`] parses arguments, executes one subcommand and writes its report.
//! Exit codes: 0 success (a certified infeasible flip model included),
//! 1 i/o failure or a failed regression check, 2 usage error, 3 domain error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use wigner_memory::flip::{feasibility_sweep, solve, FlipFamily, TieBreak};
use wigner_memory::protocol::{default_wigner_setting, parse_bits, run_protocol, ProtocolConfig, ProtocolError};
use wigner_memory::report::{
    extended_payload, fig5_payload, flip_payload, protocol_payload, simple_payload, verification_payload, write_csv,
    CsvTable, Manifest, Report, ReportError, SampledRuns,
};
use wigner_memory::rng::{stream, DEFAULT_SEED};
use wigner_memory::scenarios::{Coefficients, ScenarioConfig};
use wigner_memory::verification;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "wigner-memory",
    version,
    about = "Observer memories in Wigner's-friend scenarios"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    report: Format,
    /// Write the report here instead of stdout. CSV reports also get `<PATH>.manifest.json`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for every random stream of the run.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Model {
    Single,
    Two,
    JointTwo,
    Four,
}

impl From<Model> for FlipFamily {
    fn from(m: Model) -> Self {
        match m {
            Model::Single => FlipFamily::Single,
            Model::Two => FlipFamily::Two,
            Model::JointTwo => FlipFamily::JointTwo,
            Model::Four => FlipFamily::Four,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Tie {
    MinEps,
    MinMass,
}

impl From<Tie> for TieBreak {
    fn from(t: Tie) -> Self {
        match t {
            Tie::MinEps => TieBreak::MinEps,
            Tie::MinMass => TieBreak::MinMass,
        }
    }
}

/// Source `α|01⟩ + β|10⟩` (or `α|0⟩ + β|1⟩` without Bob). Default `|α|² = 1/2`.
#[derive(Debug, Clone, Args)]
struct SourceArgs {
    /// `|α|²`; `|β|² = 1 - |α|²`.
    #[arg(long, allow_negative_numbers = true, conflicts_with = "state_angle")]
    alpha2: Option<f64>,
    /// `α = sin x`, `β = cos x`.
    #[arg(long, allow_negative_numbers = true)]
    state_angle: Option<f64>,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    alpha_phase: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    beta_phase: f64,
}

/// Wigner's setting `(a, b)`. Default `a = sin(π/8)`, `b = cos(π/8)`.
#[derive(Debug, Clone, Args)]
struct WignerArgs {
    /// `|a|²`; `|b|² = 1 - |a|²`.
    #[arg(long, allow_negative_numbers = true, conflicts_with = "wigner_angle")]
    a2: Option<f64>,
    /// `a = sin x`, `b = cos x`.
    #[arg(long, allow_negative_numbers = true)]
    wigner_angle: Option<f64>,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    a_phase: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    b_phase: f64,
}

/// Bob's setting `(μ, ν)`. Default `μ = 1`, `ν = 0`.
#[derive(Debug, Clone, Args)]
struct BobArgs {
    /// `|μ|²`; `|ν|² = 1 - |μ|²`.
    #[arg(long, allow_negative_numbers = true, conflicts_with = "bob_angle")]
    mu2: Option<f64>,
    /// `μ = sin x`, `ν = cos x`.
    #[arg(long, allow_negative_numbers = true)]
    bob_angle: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    mu_phase: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    nu_phase: Option<f64>,
}

impl BobArgs {
    fn given(&self) -> bool {
        self.mu2.is_some() || self.bob_angle.is_some() || self.mu_phase.is_some() || self.nu_phase.is_some()
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Friend's record before and after Wigner's measurement.
    Simple {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        wigner: WignerArgs,
    },
    /// Entangled source shared with Bob: marginals, joint tables, optional sampling.
    Extended {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        wigner: WignerArgs,
        #[command(flatten)]
        bob: BobArgs,
        /// Simulated runs per measurement arrangement.
        #[arg(long)]
        samples: Option<u64>,
    },
    /// Solve a memory-flip model for the given configuration.
    FlipSolve {
        #[arg(long, value_enum)]
        model: Model,
        #[arg(long, value_enum, default_value_t = Tie::MinEps)]
        tie_break: Tie,
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        wigner: WignerArgs,
        #[command(flatten)]
        bob: BobArgs,
    },
    /// Send a bit string through Bob's choice of basis.
    Protocol {
        /// Registers per repetition.
        #[arg(long)]
        n: u64,
        /// Bits to send, e.g. 0101. Without it, `--reps` random bits are sent.
        #[arg(long)]
        message: Option<String>,
        /// Number of repetitions; must equal the message length when both are given.
        #[arg(long)]
        reps: Option<usize>,
        #[command(flatten)]
        wigner: WignerArgs,
    },
    /// Sweep of the no-signaling flip parameter over Wigner's angle.
    Fig5 {
        #[arg(long, default_value_t = 200)]
        steps: usize,
        #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
        cosdphi: f64,
    },
    /// Run the regression suite; exits 1 on any mismatch.
    VerifyPaper,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Domain(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Domain(_) => EXIT_DOMAIN,
            Failure::Io(_) => EXIT_FAILURE,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Domain(m) | Failure::Io(m) => m,
        }
    }
}

impl From<ReportError> for Failure {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::Io(_) | ReportError::Csv(_) | ReportError::Json(_) => Failure::Io(e.to_string()),
            ReportError::Flip(_) | ReportError::Scenario(_) => Failure::Domain(e.to_string()),
        }
    }
}

fn domain(e: impl std::fmt::Display) -> Failure {
    Failure::Domain(e.to_string())
}

/// Runs one invocation. `args` includes the program name.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.code()
        }
    }
}

/// Coefficients from a squared magnitude or an angle plus phases.
fn coefficients(
    weight: Option<f64>,
    angle: Option<f64>,
    default: Coefficients,
    phases: (f64, f64),
) -> Result<Coefficients, Failure> {
    let base = match (weight, angle) {
        (Some(_), Some(_)) => return Err(Failure::Usage("magnitude and angle forms cannot be mixed".into())),
        (Some(w), None) => Coefficients::from_weight(w).map_err(domain)?,
        (None, Some(x)) if x.is_finite() => Coefficients::from_angle(x),
        (None, Some(x)) => return Err(Failure::Domain(format!("angle must be finite, got {x}"))),
        (None, None) => default,
    };
    Ok(base.with_phases(phases.0, phases.1))
}

fn source(args: &SourceArgs) -> Result<Coefficients, Failure> {
    let half = Coefficients::from_weight(0.5).map_err(domain)?;
    coefficients(args.alpha2, args.state_angle, half, (args.alpha_phase, args.beta_phase))
}

fn wigner(args: &WignerArgs) -> Result<Coefficients, Failure> {
    coefficients(
        args.a2,
        args.wigner_angle,
        default_wigner_setting(),
        (args.a_phase, args.b_phase),
    )
}

fn bob(args: &BobArgs) -> Result<Coefficients, Failure> {
    let computational = Coefficients::from_weight(1.0).map_err(domain)?;
    let phases = (args.mu_phase.unwrap_or(0.0), args.nu_phase.unwrap_or(0.0));
    coefficients(args.mu2, args.bob_angle, computational, phases)
}

/// Raw inputs plus every normalized magnitude and phase.
fn echo(mut manifest: Manifest, config: &ScenarioConfig, raw: &[(&str, Option<f64>)]) -> Manifest {
    for (name, value) in raw {
        if let Some(v) = value {
            manifest = manifest.number(name, *v);
        }
    }
    let mut amps = vec![
        ("alpha", config.alpha()),
        ("beta", config.beta()),
        ("a", config.a()),
        ("b", config.b()),
    ];
    if let Some(b) = &config.bob {
        amps.push(("mu", b.first));
        amps.push(("nu", b.second));
    }
    for (name, amp) in amps {
        manifest = manifest
            .number(&format!("{name}_magnitude"), amp.magnitude)
            .number(&format!("{name}_phase"), amp.phase);
    }
    manifest
}

fn source_raw(s: &SourceArgs) -> [(&'static str, Option<f64>); 2] {
    [("alpha2", s.alpha2), ("state_angle", s.state_angle)]
}

fn wigner_raw(w: &WignerArgs) -> [(&'static str, Option<f64>); 2] {
    [("a2", w.a2), ("wigner_angle", w.wigner_angle)]
}

fn bob_raw(b: &BobArgs) -> [(&'static str, Option<f64>); 2] {
    [("mu2", b.mu2), ("bob_angle", b.bob_angle)]
}

/// What a subcommand produced, before it is written out.
struct Output {
    manifest: Manifest,
    payload: serde_json::Value,
    table: CsvTable,
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let seed = cli.common.seed.unwrap_or(DEFAULT_SEED);
    let mut code = EXIT_OK;
    let output = match &cli.command {
        Command::Simple { source: s, wigner: w } => {
            let config = ScenarioConfig::simple(source(s)?, wigner(w)?).map_err(domain)?;
            let raw: Vec<_> = source_raw(s).into_iter().chain(wigner_raw(w)).collect();
            Output {
                manifest: echo(Manifest::new("simple"), &config, &raw),
                payload: simple_payload(&config)?,
                table: CsvTable::simple(&config)?,
            }
        }
        Command::Extended {
            source: s,
            wigner: w,
            bob: b,
            samples,
        } => {
            let config = ScenarioConfig::extended(source(s)?, wigner(w)?, bob(b)?).map_err(domain)?;
            let raw: Vec<_> = source_raw(s)
                .into_iter()
                .chain(wigner_raw(w))
                .chain(bob_raw(b))
                .collect();
            let mut manifest = echo(Manifest::new("extended"), &config, &raw);
            let sampled = samples.map(|runs| SampledRuns { runs, seed });
            if let Some(runs) = samples {
                manifest = manifest.text("samples", runs.to_string()).seed(seed);
            }
            Output {
                manifest,
                payload: extended_payload(&config, sampled)?,
                table: CsvTable::extended(&config)?,
            }
        }
        Command::FlipSolve {
            model,
            tie_break,
            source: s,
            wigner: w,
            bob: b,
        } => {
            let family = FlipFamily::from(*model);
            let config = if family.needs_bob() {
                ScenarioConfig::extended(source(s)?, wigner(w)?, bob(b)?)
            } else if b.given() {
                return Err(Failure::Usage(format!("model {} takes no Bob setting", family.name())));
            } else {
                ScenarioConfig::simple(source(s)?, wigner(w)?)
            }
            .map_err(domain)?;
            let solution = solve(family, &config, TieBreak::from(*tie_break)).map_err(domain)?;
            if !solution.is_feasible() {
                let _ = writeln!(err, "model {} is infeasible for this configuration", family.name());
            }
            let raw: Vec<_> = source_raw(s)
                .into_iter()
                .chain(wigner_raw(w))
                .chain(bob_raw(b))
                .collect();
            let manifest = echo(Manifest::new("flip-solve"), &config, &raw)
                .text("model", family.name())
                .text("tie_break", tie_name(*tie_break));
            Output {
                manifest,
                payload: flip_payload(&solution),
                table: CsvTable::flip(&solution),
            }
        }
        Command::Protocol {
            n,
            message,
            reps,
            wigner: w,
        } => {
            let bits = match (message, reps) {
                (Some(text), reps) => {
                    let bits = parse_bits(text).map_err(domain)?;
                    if let Some(r) = reps.filter(|&r| r != bits.len()) {
                        return Err(domain(ProtocolError::LengthMismatch {
                            expected: bits.len(),
                            found: r,
                        }));
                    }
                    bits
                }
                (None, Some(r)) => random_message(seed, *r),
                (None, None) => return Err(Failure::Usage("protocol needs --message or --reps".into())),
            };
            let mut config = ProtocolConfig::new(*n, bits.clone(), seed);
            config.wigner = wigner(w)?;
            let result = run_protocol(&config).map_err(domain)?;
            let mut manifest = Manifest::new("protocol")
                .text("n", n.to_string())
                .text("message", wigner_memory::protocol::format_bits(&bits))
                .seed(seed)
                .number("a_magnitude", config.wigner.first.magnitude)
                .number("a_phase", config.wigner.first.phase)
                .number("b_magnitude", config.wigner.second.magnitude)
                .number("b_phase", config.wigner.second.phase);
            for (name, v) in wigner_raw(w) {
                if let Some(v) = v {
                    manifest = manifest.number(name, v);
                }
            }
            Output {
                manifest,
                payload: protocol_payload(&result, &bits),
                table: CsvTable::protocol(&result),
            }
        }
        Command::Fig5 { steps, cosdphi } => {
            let sweep = feasibility_sweep(*steps, *cosdphi).map_err(domain)?;
            Output {
                manifest: Manifest::new("fig5")
                    .text("steps", steps.to_string())
                    .number("cosdphi", *cosdphi),
                payload: fig5_payload(&sweep),
                table: CsvTable::fig5(&sweep),
            }
        }
        Command::VerifyPaper => {
            let outcomes = verification::run_all();
            for o in &outcomes {
                let _ = writeln!(err, "{}", o.line());
            }
            if !outcomes.iter().all(|o| o.passed) {
                code = EXIT_FAILURE;
            }
            Output {
                manifest: Manifest::new("verify-paper").seed(DEFAULT_SEED),
                payload: verification_payload(&outcomes),
                table: CsvTable::verification(&outcomes),
            }
        }
    };
    emit(output, cli.common.report, cli.common.out.as_deref(), out)?;
    Ok(code)
}

fn tie_name(t: Tie) -> &'static str {
    match t {
        Tie::MinEps => "min-eps",
        Tie::MinMass => "min-mass",
    }
}

fn random_message(seed: u64, len: usize) -> Vec<bool> {
    use rand::Rng;
    // substream u64::MAX is never used by a repetition
    let mut rng = stream(seed, u64::MAX);
    (0..len).map(|_| rng.random()).collect()
}

fn emit(output: Output, format: Format, path: Option<&Path>, out: &mut dyn Write) -> Result<(), Failure> {
    let manifest = output.manifest.stamped();
    let io = |e: std::io::Error| Failure::Io(e.to_string());
    match format {
        Format::Json => {
            let text = Report::new(manifest, output.payload)?.to_json()?;
            match path {
                Some(p) => fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?,
                None => out.write_all(text.as_bytes()).map_err(io)?,
            }
        }
        Format::Csv => {
            let mut buf = Vec::new();
            write_csv(&output.table, &mut buf)?;
            match path {
                Some(p) => {
                    fs::write(p, &buf).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?;
                    let sidecar = manifest_path(p);
                    let text = manifest.checksum("csv", &buf).to_json()?;
                    fs::write(&sidecar, text).map_err(|e| Failure::Io(format!("{}: {e}", sidecar.display())))?;
                }
                None => out.write_all(&buf).map_err(io)?,
            }
        }
    }
    Ok(())
}

fn manifest_path(p: &Path) -> PathBuf {
    let mut name = p.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn mixed_forms_are_usage_errors() {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            ["wm", "simple", "--alpha2", "0.5", "--state-angle", "0.3"],
            &mut out,
            &mut err,
        );
        assert_eq!(code, EXIT_USAGE);
    }
}
