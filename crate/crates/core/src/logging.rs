//! Trace rendering in the semicolon-delimited device log format:
//!
//! ```text
//! time;model_id;model_name;port_name;data
//! 0.75;1;blink;out;0
//! 0.75;1;blink;;Status:, 1, sigma: 0.75
//! MISSED SCHEDULED TIME ADVANCE DEADLINE BY:85629 microseconds
//! ```

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::coordinator::TraceEvent;
use crate::model::ModelId;
use crate::time::{parse_secs_to_micros, write_secs, VirtualTime};

pub const HEADER: &str = "time;model_id;model_name;port_name;data";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogError(pub String);

impl fmt::Display for LogError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl core::error::Error for LogError {}

/// Destination for rendered lines. Lines arrive without a terminator.
pub trait LogSink {
    fn write_line(&mut self, line: &str) -> Result<(), LogError>;
}

impl LogSink for Vec<String> {
    fn write_line(&mut self, line: &str) -> Result<(), LogError> {
        self.push(line.to_string());
        Ok(())
    }
}

impl<S: LogSink + ?Sized> LogSink for &mut S {
    fn write_line(&mut self, line: &str) -> Result<(), LogError> {
        (**self).write_line(line)
    }
}

/// Receiver of coordinator trace events and real-time miss notifications.
pub trait TraceSink {
    fn record(&mut self, event: &TraceEvent) -> Result<(), LogError>;

    fn deadline_miss(&mut self, _by_us: u64) -> Result<(), LogError> {
        Ok(())
    }
}

/// Collects events; miss notifications are dropped.
impl TraceSink for Vec<TraceEvent> {
    fn record(&mut self, event: &TraceEvent) -> Result<(), LogError> {
        self.push(event.clone());
        Ok(())
    }
}

impl<T: TraceSink + ?Sized> TraceSink for &mut T {
    fn record(&mut self, event: &TraceEvent) -> Result<(), LogError> {
        (**self).record(event)
    }

    fn deadline_miss(&mut self, by_us: u64) -> Result<(), LogError> {
        (**self).deadline_miss(by_us)
    }
}

/// Discards everything.
#[derive(Clone, Copy, Debug, Default)]
pub struct NullTrace;

impl TraceSink for NullTrace {
    fn record(&mut self, _: &TraceEvent) -> Result<(), LogError> {
        Ok(())
    }
}

/// Renders events into a [`LogSink`], header first.
#[derive(Debug)]
pub struct TraceLogger<S: LogSink> {
    sink: S,
}

impl<S: LogSink> TraceLogger<S> {
    /// Wraps `sink` and writes the header line.
    pub fn new(mut sink: S) -> Result<Self, LogError> {
        write_header(&mut sink)?;
        Ok(TraceLogger { sink })
    }

    pub fn sink(&self) -> &S {
        &self.sink
    }

    pub fn into_inner(self) -> S {
        self.sink
    }
}

impl<S: LogSink> TraceSink for TraceLogger<S> {
    fn record(&mut self, event: &TraceEvent) -> Result<(), LogError> {
        self.sink.write_line(&render_event(event))
    }

    fn deadline_miss(&mut self, by_us: u64) -> Result<(), LogError> {
        self.sink.write_line(&render_deadline_miss(by_us))
    }
}

pub fn write_header(sink: &mut impl LogSink) -> Result<(), LogError> {
    sink.write_line(HEADER)
}

/// Decimal seconds, up to six fractional digits, trailing zeros dropped.
/// Infinity never appears in a log; it renders as `inf`.
pub fn render_time(t: VirtualTime) -> String {
    let mut out = String::new();
    match t {
        VirtualTime::Finite(us) => write_secs(&mut out, us).expect("writing to a String"),
        VirtualTime::Infinity => out.push_str("inf"),
    }
    out
}

/// `<time>;<model_id>;<model_name>;<port_name>;<data>`
pub fn render_output_event(ev: &TraceEvent) -> String {
    format!(
        "{};{};{};{};{}",
        render_time(ev.time),
        ev.model_id,
        ev.model_name,
        ev.port.as_deref().unwrap_or(""),
        ev.data
    )
}

/// `<time>;<model_id>;<model_name>;;<state text>`
pub fn render_state_event(ev: &TraceEvent) -> String {
    format!(
        "{};{};{};;{}",
        render_time(ev.time),
        ev.model_id,
        ev.model_name,
        ev.data
    )
}

pub fn render_event(ev: &TraceEvent) -> String {
    match ev.port {
        Some(_) => render_output_event(ev),
        None => render_state_event(ev),
    }
}

pub fn render_deadline_miss(by_us: u64) -> String {
    format!("MISSED SCHEDULED TIME ADVANCE DEADLINE BY:{by_us} microseconds")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseError {
    FieldCount(usize),
    Time(String),
    ModelId(String),
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::FieldCount(n) => write!(f, "expected 5 fields, found {n}"),
            ParseError::Time(t) => write!(f, "bad time field `{t}`"),
            ParseError::ModelId(t) => write!(f, "bad model id `{t}`"),
        }
    }
}

impl core::error::Error for ParseError {}

/// Parses an output or state record back into an event. An empty port
/// field marks a state record.
pub fn parse_record(line: &str) -> Result<TraceEvent, ParseError> {
    let fields: Vec<&str> = line.splitn(5, ';').collect();
    if fields.len() != 5 {
        return Err(ParseError::FieldCount(fields.len()));
    }
    let time = parse_secs_to_micros(fields[0]).map_err(|_| ParseError::Time(fields[0].into()))?;
    let id: u32 = fields[1].parse().map_err(|_| ParseError::ModelId(fields[1].into()))?;
    Ok(TraceEvent {
        time: VirtualTime::Finite(time),
        model_id: ModelId(id),
        model_name: fields[2].into(),
        port: (!fields[3].is_empty()).then(|| fields[3].into()),
        data: fields[4].into(),
    })
}
