//! Argument parsing and the run driver behind the `rtdevs` binary.
//!
//! The system's wiring follows the flags: `--pin-script` selects the
//! deployment wiring (digital input → blinky → digital output), anything
//! else the simulation wiring (generator → blinky). Either wiring runs
//! under `simulate` (virtual time) or `run-rt` (wall clock).

use std::ffi::OsString;
use std::path::PathBuf;

use anyhow::Context;
use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use rtdevs_core::blinky::{blinky_system, BlinkyParams, GeneratorConfig, PinBackends, SystemMode};
use rtdevs_core::coordinator::DEFAULT_EVENT_CAP;
use rtdevs_core::hal::{NullPin, PinSource, ScriptedPinSource, TimeCursor};
use rtdevs_core::logging::{LogSink, TraceLogger};
use rtdevs_core::rt::{execute_realtime, mock_clock_script, RunOutcome, SlipLedger, Tolerance, WallClock};
use rtdevs_core::time::{parse_secs_to_micros, TimeSpan, VirtualTime};
use rtdevs_core::Coordinator;

use crate::clock::HostClock;
use crate::pins::{parse_pin_script, stdin_pin};
use crate::sink::{file_sink, stdout_sink};

#[derive(Parser, Debug)]
#[command(
    name = "rtdevs",
    version,
    about = "Run DEVS models in virtual time or against the wall clock"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run in virtual time as fast as possible.
    Simulate(RunArgs),
    /// Run against the wall clock with deadline-slip accounting.
    #[command(name = "run-rt")]
    RunRt(RunArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// System to build.
    #[arg(value_enum)]
    system: SystemName,

    /// Run length in seconds (> 0).
    #[arg(long, value_parser = parse_positive_secs, allow_hyphen_values = true)]
    duration: u64,

    /// Halt once accumulated slip exceeds this many microseconds, or `unlimited`.
    #[arg(long = "tolerance-us", value_parser = parse_tolerance, default_value = "unlimited")]
    tolerance: Tolerance,

    /// Fast blink period in seconds.
    #[arg(long, value_parser = parse_positive_secs, default_value = "0.5")]
    sigma1: u64,

    /// Slow blink period in seconds.
    #[arg(long, value_parser = parse_positive_secs, default_value = "1")]
    sigma2: u64,

    /// Generator firing instants in seconds, comma separated and increasing.
    #[arg(long = "gen-script", value_parser = parse_secs, value_delimiter = ',')]
    gen_script: Option<Vec<u64>>,

    /// Seed for a random generator (replaces --gen-script).
    #[arg(long = "gen-seed")]
    gen_seed: Option<u64>,

    /// Smallest random generator gap in seconds.
    #[arg(long = "gen-min", value_parser = parse_positive_secs, default_value = "1")]
    gen_min: u64,

    /// Largest random generator gap in seconds.
    #[arg(long = "gen-max", value_parser = parse_positive_secs, default_value = "10")]
    gen_max: u64,

    /// Pin-script file (`<seconds> <0|1>` per line), or `stdin` to toggle the
    /// input pin on every newline. Selects the deployment wiring.
    #[arg(long = "pin-script")]
    pin_script: Option<String>,

    /// Digital input polling period in seconds.
    #[arg(long, value_parser = parse_positive_secs, default_value = "0.1")]
    poll: u64,

    /// Trace destination: a file path, or `-` for stdout.
    #[arg(long, default_value = "-")]
    log: String,

    /// Maximum number of processed instants.
    #[arg(long = "event-cap", default_value_t = DEFAULT_EVENT_CAP)]
    event_cap: u64,

    /// Wall clock for run-rt.
    #[arg(long, value_enum, default_value = "host")]
    clock: ClockKind,

    /// Per-step execution costs in microseconds for the mock clock.
    #[arg(long = "mock-costs-us", value_delimiter = ',')]
    mock_costs: Option<Vec<u64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SystemName {
    Blinky,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ClockKind {
    Host,
    Mock,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExecMode {
    Simulate,
    RunRt,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PinInput {
    Script(PathBuf),
    Stdin,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LogDest {
    Stdout,
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClockChoice {
    Host,
    Mock { costs: Vec<u64> },
}

/// A fully validated invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub mode: ExecMode,
    pub system: SystemName,
    pub duration: VirtualTime,
    pub tolerance: Tolerance,
    pub sigma1: TimeSpan,
    pub sigma2: TimeSpan,
    /// Simulation wiring only.
    pub generator: Option<GeneratorConfig>,
    /// Deployment wiring only.
    pub pin_input: Option<PinInput>,
    pub poll: TimeSpan,
    pub log: LogDest,
    pub event_cap: u64,
    pub clock: ClockChoice,
}

impl RunConfig {
    pub fn wiring(&self) -> SystemMode {
        match self.pin_input {
            Some(_) => SystemMode::Deployment,
            None => SystemMode::Simulation,
        }
    }
}

fn parse_secs(text: &str) -> Result<u64, String> {
    parse_secs_to_micros(text).map_err(|e| e.to_string())
}

fn parse_positive_secs(text: &str) -> Result<u64, String> {
    match parse_secs(text)? {
        0 => Err("must be greater than zero".into()),
        us => Ok(us),
    }
}

fn parse_tolerance(text: &str) -> Result<Tolerance, String> {
    if text.eq_ignore_ascii_case("unlimited") {
        return Ok(Tolerance::Unlimited);
    }
    text.parse::<u64>()
        .map(Tolerance::Micros)
        .map_err(|_| "expected a non-negative integer or `unlimited`".into())
}

fn usage(kind: ErrorKind, message: impl std::fmt::Display) -> clap::Error {
    Cli::command().error(kind, message)
}

/// Parses a full argument vector, program name included.
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    let (mode, args) = match cli.command {
        Command::Simulate(a) => (ExecMode::Simulate, a),
        Command::RunRt(a) => (ExecMode::RunRt, a),
    };

    let generator = match (args.gen_script, args.gen_seed) {
        (Some(_), Some(_)) => {
            return Err(usage(
                ErrorKind::ArgumentConflict,
                "--gen-script and --gen-seed are mutually exclusive",
            ))
        }
        (Some(script), None) => {
            if script.windows(2).any(|w| w[1] <= w[0]) {
                return Err(usage(
                    ErrorKind::ValueValidation,
                    "--gen-script instants must strictly increase",
                ));
            }
            Some(GeneratorConfig::Scripted(
                script.into_iter().map(VirtualTime::Finite).collect(),
            ))
        }
        (None, Some(seed)) => {
            if args.gen_min > args.gen_max {
                return Err(usage(ErrorKind::ValueValidation, "--gen-min must not exceed --gen-max"));
            }
            Some(GeneratorConfig::Random {
                seed,
                min_gap: args.gen_min,
                max_gap: args.gen_max,
            })
        }
        (None, None) => None,
    };

    let pin_input = args.pin_script.map(|p| match p.as_str() {
        "stdin" => PinInput::Stdin,
        _ => PinInput::Script(PathBuf::from(p)),
    });
    if pin_input.is_some() && generator.is_some() {
        return Err(usage(
            ErrorKind::ArgumentConflict,
            "--pin-script selects the deployment wiring, which has no generator",
        ));
    }

    let clock = match (args.clock, args.mock_costs) {
        (ClockKind::Host, Some(_)) => {
            return Err(usage(ErrorKind::ArgumentConflict, "--mock-costs-us needs --clock mock"))
        }
        (ClockKind::Host, None) => ClockChoice::Host,
        (ClockKind::Mock, costs) => ClockChoice::Mock {
            costs: costs.unwrap_or_default(),
        },
    };

    Ok(RunConfig {
        mode,
        system: args.system,
        duration: VirtualTime::Finite(args.duration),
        tolerance: args.tolerance,
        sigma1: TimeSpan::Finite(args.sigma1),
        sigma2: TimeSpan::Finite(args.sigma2),
        generator,
        pin_input,
        poll: TimeSpan::Finite(args.poll),
        log: match args.log.as_str() {
            "-" => LogDest::Stdout,
            path => LogDest::File(PathBuf::from(path)),
        },
        event_cap: args.event_cap,
        clock,
    })
}

/// How a run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Finish {
    Completed { last: VirtualTime },
    Halted { total_slip: u64, tolerance: Tolerance },
}

impl Finish {
    pub fn exit_code(&self) -> i32 {
        match self {
            Finish::Completed { .. } => 0,
            Finish::Halted { .. } => 1,
        }
    }
}

fn pin_source(input: &PinInput, cursor: &TimeCursor) -> anyhow::Result<Box<dyn PinSource>> {
    Ok(match input {
        PinInput::Stdin => Box::new(stdin_pin()),
        PinInput::Script(path) => {
            let text =
                std::fs::read_to_string(path).with_context(|| format!("reading pin script {}", path.display()))?;
            let schedule = parse_pin_script(&text).with_context(|| format!("in pin script {}", path.display()))?;
            Box::new(ScriptedPinSource::new(false, schedule, cursor.clone())?)
        }
    })
}

fn build(config: &RunConfig) -> anyhow::Result<Coordinator> {
    let cursor = TimeCursor::new();
    let SystemName::Blinky = config.system;
    let pins = match &config.pin_input {
        Some(input) => Some(PinBackends {
            input: pin_source(input, &cursor)?,
            output: Box::new(NullPin),
        }),
        None => None,
    };
    let params = BlinkyParams {
        sigma1: config.sigma1,
        sigma2: config.sigma2,
        generator: config.generator.clone(),
        pins,
        poll_period: config.poll,
    };
    let spec = blinky_system(config.wiring(), params)?;
    Ok(Coordinator::new(spec.into())?
        .with_time_cursor(cursor)
        .with_event_cap(config.event_cap))
}

/// Runs `config`, writing the trace to `sink`.
pub fn execute(config: &RunConfig, sink: impl LogSink) -> anyhow::Result<Finish> {
    let mut coordinator = build(config)?;
    let mut logger = TraceLogger::new(sink)?;
    match config.mode {
        ExecMode::Simulate => {
            let last = coordinator.simulate(config.duration, &mut logger)?;
            Ok(Finish::Completed { last })
        }
        ExecMode::RunRt => {
            let mut ledger = SlipLedger::new(config.tolerance);
            let report = match &config.clock {
                ClockChoice::Host => realtime(
                    &mut coordinator,
                    config,
                    &mut HostClock::new(),
                    &mut ledger,
                    &mut logger,
                )?,
                ClockChoice::Mock { costs } => realtime(
                    &mut coordinator,
                    config,
                    &mut mock_clock_script(costs.iter().copied()),
                    &mut ledger,
                    &mut logger,
                )?,
            };
            Ok(match report {
                RunOutcome::Completed { last } => Finish::Completed { last },
                RunOutcome::Halted { total_slip, .. } => Finish::Halted {
                    total_slip,
                    tolerance: config.tolerance,
                },
            })
        }
    }
}

fn realtime<S: LogSink>(
    coordinator: &mut Coordinator,
    config: &RunConfig,
    clock: &mut impl WallClock,
    ledger: &mut SlipLedger,
    logger: &mut TraceLogger<S>,
) -> anyhow::Result<RunOutcome> {
    Ok(execute_realtime(coordinator, config.duration, clock, ledger, logger)?.outcome)
}

/// Runs `config` with its configured log destination and returns the
/// process exit status: 0 completed, 1 halted or failed.
pub fn run(config: &RunConfig) -> i32 {
    let result = match &config.log {
        LogDest::Stdout => execute(config, stdout_sink()),
        LogDest::File(path) => file_sink(path)
            .with_context(|| format!("opening log file {}", path.display()))
            .and_then(|sink| execute(config, sink)),
    };
    match result {
        Ok(finish @ Finish::Halted { total_slip, tolerance }) => {
            let limit = match tolerance {
                Tolerance::Micros(us) => us.to_string(),
                Tolerance::Unlimited => "unlimited".into(),
            };
            eprintln!("halted: accumulated scheduler slip {total_slip} us exceeds tolerance {limit} us");
            finish.exit_code()
        }
        Ok(finish) => finish.exit_code(),
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
