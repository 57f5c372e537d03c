//! The blinky case study: an LED toggling with one of two periods, where
//! every input switches to the other period.
//!
//! ```text
//!          δint (σ1)                    δint (σ2)
//!     S1 ◄────────────► S2         S3 ◄────────────► S4
//!      ▲                 ▲          ▲                 ▲
//!      └──── δext ───────┼──────────┘                 │
//!                        └───────── δext ─────────────┘
//! ```
//!
//! `lambda` emits 1 from S1/S3 and 0 from S2/S4, so outputs alternate
//! whatever the inputs do. An input changes only the period.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::hal::{digital_input_atomic, digital_output_atomic, PinSink, PinSource};
use crate::logging::render_time;
use crate::model::{Atomic, CoupledSpec, Model, ModelError};
use crate::port::{MessageBag, PortId, Value, ValueKind};
use crate::time::{TimeSpan, VirtualTime};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    S1,
    S2,
    S3,
    S4,
}

impl Phase {
    /// Swap within the current period branch.
    pub fn internal(self) -> Phase {
        match self {
            Phase::S1 => Phase::S2,
            Phase::S2 => Phase::S1,
            Phase::S3 => Phase::S4,
            Phase::S4 => Phase::S3,
        }
    }

    /// Swap to the other branch, keeping parity.
    pub fn external(self) -> Phase {
        match self {
            Phase::S1 => Phase::S3,
            Phase::S3 => Phase::S1,
            Phase::S2 => Phase::S4,
            Phase::S4 => Phase::S2,
        }
    }

    pub fn is_fast(self) -> bool {
        matches!(self, Phase::S1 | Phase::S2)
    }

    /// Value emitted before leaving this phase.
    pub fn output(self) -> bool {
        matches!(self, Phase::S1 | Phase::S3)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlinkyState {
    pub phase: Phase,
    pub sigma1: TimeSpan,
    pub sigma2: TimeSpan,
}

#[derive(Clone, Copy, Debug)]
pub struct Blinky {
    sigma1: TimeSpan,
    sigma2: TimeSpan,
}

fn positive(span: TimeSpan, what: &str) -> Result<TimeSpan, Error> {
    match span {
        TimeSpan::Finite(us) if us > 0 => Ok(span),
        _ => Err(Error::Config(format!("{what} must be finite and positive"))),
    }
}

/// Blinky with fast period `sigma1` and slow period `sigma2`.
pub fn blinky_atomic(sigma1: TimeSpan, sigma2: TimeSpan) -> Result<Blinky, Error> {
    Ok(Blinky {
        sigma1: positive(sigma1, "sigma1")?,
        sigma2: positive(sigma2, "sigma2")?,
    })
}

impl Atomic for Blinky {
    type State = BlinkyState;

    fn input_ports(&self) -> Vec<PortId> {
        vec![PortId::input("in", ValueKind::Bool)]
    }

    fn output_ports(&self) -> Vec<PortId> {
        vec![PortId::output("out", ValueKind::Bool)]
    }

    fn initial_state(&self) -> BlinkyState {
        BlinkyState {
            phase: Phase::S1,
            sigma1: self.sigma1,
            sigma2: self.sigma2,
        }
    }

    fn ta(&self, s: &BlinkyState) -> TimeSpan {
        if s.phase.is_fast() {
            s.sigma1
        } else {
            s.sigma2
        }
    }

    fn delta_int(&self, s: &mut BlinkyState) -> Result<(), ModelError> {
        s.phase = s.phase.internal();
        Ok(())
    }

    // Payload values are ignored: any input switches the branch.
    fn delta_ext(&self, s: &mut BlinkyState, _: TimeSpan, input: &MessageBag) -> Result<(), ModelError> {
        if !input.values("in").is_empty() {
            s.phase = s.phase.external();
        }
        Ok(())
    }

    fn lambda(&self, s: &BlinkyState, output: &mut MessageBag) {
        output.add("out", Value::Bool(s.phase.output()));
    }

    /// `Status:, <led>, sigma: <ta>`, where led is the level last driven
    /// (off until the first output).
    fn state_text(&self, s: &BlinkyState) -> Option<String> {
        let led = if s.phase.output() { 0 } else { 1 };
        Some(format!("Status:, {led}, sigma: {}", render_time(self.ta(s).into())))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GeneratorConfig {
    /// Fire once at each instant (strictly increasing), then go passive.
    Scripted(Vec<VirtualTime>),
    /// Fire forever with gaps uniform in `[min_gap, max_gap]` µs.
    Random { seed: u64, min_gap: u64, max_gap: u64 },
}

#[derive(Clone, Debug)]
pub struct Generator {
    config: GeneratorConfig,
}

#[derive(Clone, Debug)]
pub struct GeneratorState {
    now: u64,
    next: usize,
    gap: u64,
    value: bool,
    rng: Option<ChaCha8Rng>,
}

pub fn generator_atomic(config: GeneratorConfig) -> Result<Generator, Error> {
    match &config {
        GeneratorConfig::Scripted(instants) => {
            if instants.iter().any(|t| t.is_infinite()) {
                return Err(Error::Config("generator instants must be finite".into()));
            }
            if instants.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Config("generator instants must strictly increase".into()));
            }
        }
        GeneratorConfig::Random { min_gap, max_gap, .. } => {
            if *min_gap == 0 || min_gap > max_gap {
                return Err(Error::Config("generator gaps need 0 < min <= max".into()));
            }
        }
    }
    Ok(Generator { config })
}

impl Generator {
    fn draw(&self, state: &mut GeneratorState) {
        if let (GeneratorConfig::Random { min_gap, max_gap, .. }, Some(rng)) = (&self.config, state.rng.as_mut()) {
            state.gap = rng.gen_range(*min_gap..=*max_gap);
            state.value = rng.gen_bool(0.5);
        }
    }
}

impl Atomic for Generator {
    type State = GeneratorState;

    fn output_ports(&self) -> Vec<PortId> {
        vec![PortId::output("out", ValueKind::Bool)]
    }

    fn initial_state(&self) -> GeneratorState {
        let rng = match self.config {
            GeneratorConfig::Random { seed, .. } => Some(ChaCha8Rng::seed_from_u64(seed)),
            GeneratorConfig::Scripted(_) => None,
        };
        let mut state = GeneratorState {
            now: 0,
            next: 0,
            gap: 0,
            value: false,
            rng,
        };
        self.draw(&mut state);
        state
    }

    fn ta(&self, s: &GeneratorState) -> TimeSpan {
        match &self.config {
            GeneratorConfig::Scripted(instants) => match instants.get(s.next) {
                Some(VirtualTime::Finite(at)) => TimeSpan::Finite(at - s.now),
                _ => TimeSpan::Infinity,
            },
            GeneratorConfig::Random { .. } => TimeSpan::Finite(s.gap),
        }
    }

    fn delta_int(&self, s: &mut GeneratorState) -> Result<(), ModelError> {
        match &self.config {
            GeneratorConfig::Scripted(instants) => {
                if let Some(at) = instants.get(s.next).and_then(|t| t.as_micros()) {
                    s.now = at;
                    s.next += 1;
                }
            }
            GeneratorConfig::Random { .. } => {
                s.now += s.gap;
                self.draw(s);
            }
        }
        Ok(())
    }

    fn delta_ext(&self, _: &mut GeneratorState, _: TimeSpan, _: &MessageBag) -> Result<(), ModelError> {
        Err(ModelError::new("generator has no input ports"))
    }

    fn lambda(&self, s: &GeneratorState, output: &mut MessageBag) {
        output.add("out", Value::Bool(s.value));
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SystemMode {
    /// Generator feeding blinky.
    Simulation,
    /// Digital input feeding blinky, blinky driving a digital output.
    Deployment,
}

pub struct PinBackends {
    pub input: Box<dyn PinSource>,
    pub output: Box<dyn PinSink>,
}

impl core::fmt::Debug for PinBackends {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str("PinBackends")
    }
}

#[derive(Debug)]
pub struct BlinkyParams {
    pub sigma1: TimeSpan,
    pub sigma2: TimeSpan,
    /// Simulation mode only. `None` means a generator that never fires.
    pub generator: Option<GeneratorConfig>,
    /// Deployment mode only; required there.
    pub pins: Option<PinBackends>,
    pub poll_period: TimeSpan,
}

impl Default for BlinkyParams {
    fn default() -> Self {
        BlinkyParams {
            sigma1: TimeSpan::from_millis(500),
            sigma2: TimeSpan::from_secs(1),
            generator: None,
            pins: None,
            poll_period: TimeSpan::from_millis(100),
        }
    }
}

/// Builds the blinky system for `mode`. Model ids follow registration
/// order: simulation gives blinky=1, generator=2; deployment gives
/// blinky=1, digitalOutput=2, digitalInput=3.
pub fn blinky_system(mode: SystemMode, params: BlinkyParams) -> Result<CoupledSpec, Error> {
    let blinky = blinky_atomic(params.sigma1, params.sigma2)?;
    let spec = CoupledSpec::new("blinkySystem").component(Model::atomic("blinky", blinky));
    match mode {
        SystemMode::Simulation => {
            if params.pins.is_some() {
                return Err(Error::Config("pin backends are only used in deployment mode".into()));
            }
            let config = params.generator.unwrap_or(GeneratorConfig::Scripted(Vec::new()));
            Ok(spec
                .component(Model::atomic("generator", generator_atomic(config)?))
                .ic("generator", "out", "blinky", "in"))
        }
        SystemMode::Deployment => {
            if params.generator.is_some() {
                return Err(Error::Config("the generator is only used in simulation mode".into()));
            }
            let pins = params
                .pins
                .ok_or_else(|| Error::Config("deployment mode needs pin backends".into()))?;
            Ok(spec
                .component(Model::atomic("digitalOutput", digital_output_atomic(pins.output)))
                .component(Model::atomic(
                    "digitalInput",
                    digital_input_atomic(pins.input, params.poll_period)?,
                ))
                .ic("digitalInput", "out", "blinky", "in")
                .ic("blinky", "out", "digitalOutput", "in"))
        }
    }
}
