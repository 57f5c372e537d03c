#![allow(dead_code)]

use proptest::prelude::*;
use rtdevs_core::coordinator::TraceEvent;
use rtdevs_core::model::default_confluent;
use rtdevs_core::{Atomic, CoupledSpec, MessageBag, Model, ModelError, PortId, TimeSpan, Value, ValueKind};

/// Periodic source of a running counter on `out`; adds `in` values to the
/// counter without disturbing its schedule. State text records which
/// transition ran last.
#[derive(Clone, Debug)]
pub struct Ticker {
    pub first: u64,
    pub period: u64,
}

#[derive(Clone, Debug)]
pub struct TickerState {
    pub count: i64,
    pub sigma: u64,
    pub last: &'static str,
}

impl Atomic for Ticker {
    type State = TickerState;

    fn input_ports(&self) -> Vec<PortId> {
        vec![PortId::input("in", ValueKind::Int)]
    }

    fn output_ports(&self) -> Vec<PortId> {
        vec![PortId::output("out", ValueKind::Int)]
    }

    fn initial_state(&self) -> TickerState {
        TickerState {
            count: 0,
            sigma: self.first,
            last: "init",
        }
    }

    fn ta(&self, s: &TickerState) -> TimeSpan {
        TimeSpan::Finite(s.sigma)
    }

    fn delta_int(&self, s: &mut TickerState) -> Result<(), ModelError> {
        s.count += 1;
        s.sigma = self.period;
        s.last = "int";
        Ok(())
    }

    fn delta_ext(&self, s: &mut TickerState, e: TimeSpan, input: &MessageBag) -> Result<(), ModelError> {
        let TimeSpan::Finite(e) = e else {
            return Err(ModelError::new("infinite elapsed"));
        };
        if e >= s.sigma {
            return Err(ModelError::new(format!("elapsed {e} not below sigma {}", s.sigma)));
        }
        s.sigma -= e;
        for v in input.values("in") {
            if let Value::Int(n) = v {
                s.count += n;
            }
        }
        s.last = "ext";
        Ok(())
    }

    fn delta_con(&self, s: &mut TickerState, input: &MessageBag) -> Result<(), ModelError> {
        default_confluent(self, s, input)?;
        s.last = "con";
        Ok(())
    }

    fn lambda(&self, s: &TickerState, out: &mut MessageBag) {
        out.add("out", Value::Int(s.count));
    }

    fn state_text(&self, s: &TickerState) -> Option<String> {
        Some(format!("{} {} {}", s.last, s.count, s.sigma))
    }
}

/// Pseudo-random atomic driven by an LCG held in its state. Its schedule
/// and outputs depend on every input it receives.
#[derive(Clone, Debug)]
pub struct Wanderer {
    pub seed: u64,
    pub max_gap: u64,
}

fn lcg(x: u64) -> u64 {
    x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407)
}

impl Atomic for Wanderer {
    type State = (u64, u64);

    fn input_ports(&self) -> Vec<PortId> {
        vec![PortId::input("in", ValueKind::Int)]
    }

    fn output_ports(&self) -> Vec<PortId> {
        vec![PortId::output("out", ValueKind::Int)]
    }

    fn initial_state(&self) -> (u64, u64) {
        let x = lcg(self.seed);
        (x, x % self.max_gap + 1)
    }

    fn ta(&self, s: &(u64, u64)) -> TimeSpan {
        TimeSpan::Finite(s.1)
    }

    fn delta_int(&self, s: &mut (u64, u64)) -> Result<(), ModelError> {
        s.0 = lcg(s.0);
        s.1 = s.0 % self.max_gap + 1;
        Ok(())
    }

    fn delta_ext(&self, s: &mut (u64, u64), e: TimeSpan, input: &MessageBag) -> Result<(), ModelError> {
        let e = e.as_micros().ok_or_else(|| ModelError::new("infinite elapsed"))?;
        for v in input.values("in") {
            if let Value::Int(n) = v {
                s.0 = lcg(s.0 ^ *n as u64);
            }
        }
        // half the time keep the old deadline, otherwise reschedule
        s.1 = if s.0 & 1 == 0 { s.1 - e } else { s.0 % self.max_gap + 1 };
        Ok(())
    }

    fn lambda(&self, s: &(u64, u64), out: &mut MessageBag) {
        out.add("out", Value::Int((s.0 >> 40) as i64));
    }

    fn state_text(&self, s: &(u64, u64)) -> Option<String> {
        Some(format!("{:x}/{}", s.0, s.1))
    }
}

pub fn ticker(name: &str, first: u64, period: u64) -> Model {
    Model::atomic(name, Ticker { first, period })
}

/// Wraps `inner` in `depth` pass-through coupled layers exposing the same
/// `in`/`out` ports.
pub fn wrap(inner: Model, depth: usize) -> Model {
    let mut model = inner;
    for level in 0..depth {
        let child = model.name().to_string();
        model = CoupledSpec::new(format!("wrap{level}"))
            .input("in", ValueKind::Int)
            .output("out", ValueKind::Int)
            .component(model)
            .eic("in", &child, "in")
            .eoc(&child, "out", "out")
            .into();
    }
    model
}

pub fn wanderer() -> impl Strategy<Value = Wanderer> {
    (any::<u64>(), 1u64..5_000).prop_map(|(seed, max_gap)| Wanderer { seed, max_gap })
}

/// Groups a trace by instant, keeping record order.
pub fn instants(trace: &[TraceEvent]) -> Vec<&[TraceEvent]> {
    trace.chunk_by(|a, b| a.time == b.time).collect()
}
