//! Pin abstraction and the digital input/output driver atomics.
//!
//! Drivers bridge a pin backend into the DEVS layer. The backends here
//! are host-side stand-ins: a scripted source in place of a button and a
//! recording sink in place of an LED.

use alloc::rc::Rc;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::RefCell;
use core::sync::atomic::{AtomicU64, Ordering};

use crate::error::Error;
use crate::model::{Atomic, ModelError};
use crate::port::{MessageBag, PortId, Value, ValueKind};
use crate::time::{TimeSpan, VirtualTime};

/// Shared view of "now" in microseconds since execution start.
///
/// Virtual-time runs keep it at the instant being processed; real-time
/// runs keep it at the wall offset from the start anchor. Time-aware
/// backends read it so one script works in both modes.
#[derive(Clone, Debug, Default)]
pub struct TimeCursor(Arc<AtomicU64>);

impl TimeCursor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self) -> u64 {
        self.0.load(Ordering::Acquire)
    }

    pub fn set(&self, us: u64) {
        self.0.store(us, Ordering::Release);
    }
}

/// A readable digital pin. `read` never blocks and returns the same level
/// until the pin changes.
pub trait PinSource {
    fn read(&self) -> bool;
}

/// A writable digital pin. The last write wins.
pub trait PinSink {
    fn write(&mut self, level: bool);
}

impl<P: PinSource + ?Sized> PinSource for alloc::boxed::Box<P> {
    fn read(&self) -> bool {
        (**self).read()
    }
}

impl<P: PinSink + ?Sized> PinSink for alloc::boxed::Box<P> {
    fn write(&mut self, level: bool) {
        (**self).write(level)
    }
}

/// A pin that holds a fixed level.
#[derive(Clone, Copy, Debug)]
pub struct ConstantPin(pub bool);

impl PinSource for ConstantPin {
    fn read(&self) -> bool {
        self.0
    }
}

/// Replays a list of `(instant, level)` changes against a [`TimeCursor`].
#[derive(Clone, Debug)]
pub struct ScriptedPinSource {
    initial: bool,
    schedule: Vec<(u64, bool)>,
    cursor: TimeCursor,
}

impl ScriptedPinSource {
    /// `schedule` instants are microseconds and must strictly increase.
    pub fn new(initial: bool, schedule: Vec<(u64, bool)>, cursor: TimeCursor) -> Result<Self, Error> {
        if schedule.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Config("pin script instants must strictly increase".into()));
        }
        Ok(ScriptedPinSource {
            initial,
            schedule,
            cursor,
        })
    }

    /// Level in effect at `us`.
    pub fn level_at(&self, us: u64) -> bool {
        let applied = self.schedule.partition_point(|(t, _)| *t <= us);
        match applied {
            0 => self.initial,
            n => self.schedule[n - 1].1,
        }
    }
}

impl PinSource for ScriptedPinSource {
    fn read(&self) -> bool {
        self.level_at(self.cursor.get())
    }
}

/// Records every write with the cursor time. Clones share one record.
#[derive(Clone, Debug)]
pub struct RecordingPinSink {
    records: Rc<RefCell<Vec<(u64, bool)>>>,
    cursor: TimeCursor,
}

impl RecordingPinSink {
    pub fn new(cursor: TimeCursor) -> Self {
        RecordingPinSink {
            records: Rc::default(),
            cursor,
        }
    }

    pub fn records(&self) -> Vec<(u64, bool)> {
        self.records.borrow().clone()
    }

    pub fn levels(&self) -> Vec<bool> {
        self.records.borrow().iter().map(|(_, l)| *l).collect()
    }
}

impl PinSink for RecordingPinSink {
    fn write(&mut self, level: bool) {
        self.records.borrow_mut().push((self.cursor.get(), level));
    }
}

/// Discards writes.
#[derive(Clone, Copy, Debug, Default)]
pub struct NullPin;

impl PinSink for NullPin {
    fn write(&mut self, _: bool) {}
}

fn pin_text(level: bool) -> String {
    String::from(if level { "Pin: 1" } else { "Pin: 0" })
}

/// Polls a [`PinSource`] every `poll_period` and emits the level on `out`
/// whenever it differs from the last emitted level.
#[derive(Debug)]
pub struct DigitalInput<P> {
    source: P,
    poll_period: TimeSpan,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DigitalInputState {
    pub level: bool,
}

pub fn digital_input_atomic<P: PinSource>(source: P, poll_period: TimeSpan) -> Result<DigitalInput<P>, Error> {
    match poll_period {
        TimeSpan::Finite(us) if us > 0 => Ok(DigitalInput { source, poll_period }),
        _ => Err(Error::Config("poll period must be finite and positive".into())),
    }
}

impl<P: PinSource> Atomic for DigitalInput<P> {
    type State = DigitalInputState;

    fn output_ports(&self) -> Vec<PortId> {
        vec![PortId::output("out", ValueKind::Bool)]
    }

    fn initial_state(&self) -> DigitalInputState {
        DigitalInputState {
            level: self.source.read(),
        }
    }

    fn ta(&self, _: &DigitalInputState) -> TimeSpan {
        self.poll_period
    }

    fn delta_int(&self, state: &mut DigitalInputState) -> Result<(), ModelError> {
        state.level = self.source.read();
        Ok(())
    }

    fn delta_ext(&self, _: &mut DigitalInputState, _: TimeSpan, _: &MessageBag) -> Result<(), ModelError> {
        Err(ModelError::new("digital input has no input ports"))
    }

    fn lambda(&self, state: &DigitalInputState, output: &mut MessageBag) {
        let level = self.source.read();
        if level != state.level {
            output.add("out", Value::Bool(level));
        }
    }

    fn state_text(&self, state: &DigitalInputState) -> Option<String> {
        Some(pin_text(state.level))
    }
}

/// Passive model that writes every boolean received on `in` to a
/// [`PinSink`].
#[derive(Debug)]
pub struct DigitalOutput<K> {
    sink: RefCell<K>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DigitalOutputState {
    pub level: bool,
}

pub fn digital_output_atomic<K: PinSink>(sink: K) -> DigitalOutput<K> {
    DigitalOutput {
        sink: RefCell::new(sink),
    }
}

impl<K: PinSink> Atomic for DigitalOutput<K> {
    type State = DigitalOutputState;

    fn input_ports(&self) -> Vec<PortId> {
        vec![PortId::input("in", ValueKind::Bool)]
    }

    fn initial_state(&self) -> DigitalOutputState {
        DigitalOutputState { level: false }
    }

    fn ta(&self, _: &DigitalOutputState) -> TimeSpan {
        TimeSpan::Infinity
    }

    fn delta_int(&self, _: &mut DigitalOutputState) -> Result<(), ModelError> {
        Ok(())
    }

    fn delta_ext(&self, state: &mut DigitalOutputState, _: TimeSpan, input: &MessageBag) -> Result<(), ModelError> {
        let mut sink = self.sink.borrow_mut();
        for value in input.values("in") {
            let level = value
                .as_bool()
                .ok_or_else(|| ModelError::new("digital output expects booleans"))?;
            sink.write(level);
            state.level = level;
        }
        Ok(())
    }

    fn lambda(&self, _: &DigitalOutputState, _: &mut MessageBag) {}

    fn state_text(&self, state: &DigitalOutputState) -> Option<String> {
        Some(pin_text(state.level))
    }
}

/// Virtual instants of the first poll at or after each level change in
/// `schedule`, for a poll grid starting at zero. Changes that are undone
/// before the next poll are not observable and are skipped.
pub fn observed_edges(initial: bool, schedule: &[(u64, bool)], poll_period_us: u64) -> Vec<(VirtualTime, bool)> {
    let mut edges = Vec::new();
    let mut seen = initial;
    let mut i = 0;
    while i < schedule.len() {
        let first_poll = schedule[i].0.div_ceil(poll_period_us) * poll_period_us;
        // Level in effect at that poll: last change at or before it.
        while i + 1 < schedule.len() && schedule[i + 1].0 <= first_poll {
            i += 1;
        }
        let level = schedule[i].1;
        if level != seen {
            edges.push((VirtualTime::Finite(first_poll), level));
            seen = level;
        }
        i += 1;
    }
    edges
}
