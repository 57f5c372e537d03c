use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::logging::LogError;
use crate::model::{ModelError, ModelId, StructuralError};
use crate::time::{TimeError, VirtualTime};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    /// The model structure failed validation; it must not be executed.
    Invalid(Vec<StructuralError>),
    /// A transition raised an error.
    Model {
        id: ModelId,
        name: String,
        source: ModelError,
    },
    /// Scheduling `t + ta(s)` overflowed; the model returned an absurd σ.
    TimeOverflow {
        id: ModelId,
        name: String,
    },
    Time(TimeError),
    /// The processed-instant safety cap was reached.
    EventCapExceeded(u64),
    /// A step was requested for an instant that is not the next event time.
    NotImminent {
        requested: VirtualTime,
        next: VirtualTime,
    },
    /// An external input names an unknown root port, has the wrong kind, or
    /// is scheduled in the past.
    BadInput(String),
    Log(LogError),
    Config(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Invalid(errors) => {
                write!(f, "invalid model structure ({} problem(s))", errors.len())?;
                for e in errors {
                    write!(f, "\n  {e}")?;
                }
                Ok(())
            }
            Error::Model { id, name, source } => write!(f, "model {name} (id {id}): {source}"),
            Error::TimeOverflow { id, name } => {
                write!(f, "model {name} (id {id}): next event time overflows the time base")
            }
            Error::Time(e) => write!(f, "{e}"),
            Error::EventCapExceeded(cap) => write!(f, "event cap of {cap} processed instants exceeded"),
            Error::NotImminent { requested, next } => {
                write!(f, "step requested at {requested} but the next event is at {next}")
            }
            Error::BadInput(msg) => write!(f, "bad external input: {msg}"),
            Error::Log(e) => write!(f, "log sink: {e}"),
            Error::Config(msg) => write!(f, "configuration: {msg}"),
        }
    }
}

impl From<LogError> for Error {
    fn from(e: LogError) -> Self {
        Error::Log(e)
    }
}

impl From<TimeError> for Error {
    fn from(e: TimeError) -> Self {
        Error::Time(e)
    }
}

impl core::error::Error for Error {}
