//! Host pin backends and the pin-script file format.
//!
//! A pin script holds one `<seconds> <0|1>` pair per line, with strictly
//! increasing times. Blank lines and lines starting with `#` are skipped.

use std::fmt;
use std::io::BufRead;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use rtdevs_core::hal::PinSource;
use rtdevs_core::time::{parse_secs_to_micros, TimeError};

#[derive(Debug, PartialEq, Eq)]
pub enum PinScriptError {
    Syntax { line: usize, text: String },
    Time { line: usize, source: TimeError },
    NotIncreasing { line: usize },
}

impl fmt::Display for PinScriptError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PinScriptError::Syntax { line, text } => {
                write!(f, "line {line}: expected `<seconds> <0|1>`, got `{text}`")
            }
            PinScriptError::Time { line, source } => write!(f, "line {line}: {source}"),
            PinScriptError::NotIncreasing { line } => {
                write!(f, "line {line}: time does not increase")
            }
        }
    }
}

impl std::error::Error for PinScriptError {}

/// Parses pin-script text into `(microseconds, level)` pairs.
pub fn parse_pin_script(text: &str) -> Result<Vec<(u64, bool)>, PinScriptError> {
    let mut out: Vec<(u64, bool)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let (Some(time), Some(level), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(PinScriptError::Syntax { line, text: raw.into() });
        };
        let level = match level {
            "0" => false,
            "1" => true,
            _ => return Err(PinScriptError::Syntax { line, text: raw.into() }),
        };
        let us = parse_secs_to_micros(time).map_err(|source| PinScriptError::Time { line, source })?;
        if out.last().is_some_and(|(prev, _)| *prev >= us) {
            return Err(PinScriptError::NotIncreasing { line });
        }
        out.push((us, level));
    }
    Ok(out)
}

/// A pin toggled from outside the executor. Clones share the level.
#[derive(Clone, Debug, Default)]
pub struct SharedPin(Arc<AtomicBool>);

impl SharedPin {
    pub fn new(level: bool) -> Self {
        SharedPin(Arc::new(AtomicBool::new(level)))
    }

    pub fn set(&self, level: bool) {
        self.0.store(level, Ordering::Release);
    }

    pub fn toggle(&self) {
        self.0.fetch_xor(true, Ordering::AcqRel);
    }
}

impl PinSource for SharedPin {
    fn read(&self) -> bool {
        self.0.load(Ordering::Acquire)
    }
}

/// Toggles `pin` once per line read from `input` until end of input.
pub fn feed_toggles(pin: &SharedPin, input: impl BufRead) {
    for line in input.lines() {
        if line.is_err() {
            break;
        }
        pin.toggle();
    }
}

/// Starts a background reader that toggles the returned pin on every
/// newline typed on stdin.
pub fn stdin_pin() -> SharedPin {
    let pin = SharedPin::new(false);
    let feeder = pin.clone();
    std::thread::spawn(move || feed_toggles(&feeder, std::io::stdin().lock()));
    pin
}
