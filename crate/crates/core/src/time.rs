//! Integer-microsecond virtual time.
//!
//! Every instant and duration in the kernel is an exact count of
//! microseconds, with a distinguished infinity for passive models.
//! Nothing here touches floating point.

use core::fmt;

/// Microseconds per second.
pub const MICROS_PER_SEC: u64 = 1_000_000;

/// An instant on the simulation time axis, measured from execution start.
///
/// Variant order matters: the derived `Ord` places every `Finite` value
/// below `Infinity`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VirtualTime {
    Finite(u64),
    Infinity,
}

/// A non-negative duration (a time advance, σ). May be infinite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TimeSpan {
    Finite(u64),
    Infinity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeError {
    /// The 64-bit microsecond count overflowed.
    Overflow,
    /// Subtraction would produce a negative duration.
    Negative,
    /// A decimal seconds value could not be parsed.
    Parse,
    /// More than six fractional digits.
    TooPrecise,
}

impl fmt::Display for TimeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeError::Overflow => f.write_str("time arithmetic overflowed the microsecond counter"),
            TimeError::Negative => f.write_str("negative time span"),
            TimeError::Parse => f.write_str("not a non-negative decimal number of seconds"),
            TimeError::TooPrecise => f.write_str("more than 6 fractional digits (1 us resolution)"),
        }
    }
}

impl core::error::Error for TimeError {}

impl VirtualTime {
    pub const ZERO: VirtualTime = VirtualTime::Finite(0);

    pub const fn from_micros(us: u64) -> Self {
        VirtualTime::Finite(us)
    }

    pub const fn from_millis(ms: u64) -> Self {
        VirtualTime::Finite(ms * 1_000)
    }

    pub const fn from_secs(s: u64) -> Self {
        VirtualTime::Finite(s * MICROS_PER_SEC)
    }

    /// Parses decimal seconds such as `"28.5947"`.
    pub fn parse_secs(text: &str) -> Result<Self, TimeError> {
        parse_secs_to_micros(text).map(VirtualTime::Finite)
    }

    pub fn as_micros(self) -> Option<u64> {
        match self {
            VirtualTime::Finite(us) => Some(us),
            VirtualTime::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, VirtualTime::Infinity)
    }

    /// `t + d`. Any infinite operand yields `Infinity`.
    pub fn checked_add(self, d: TimeSpan) -> Result<VirtualTime, TimeError> {
        match (self, d) {
            (VirtualTime::Finite(t), TimeSpan::Finite(d)) => {
                t.checked_add(d).map(VirtualTime::Finite).ok_or(TimeError::Overflow)
            }
            _ => Ok(VirtualTime::Infinity),
        }
    }

    /// Elapsed time from `earlier` to `self`.
    pub fn since(self, earlier: VirtualTime) -> Result<TimeSpan, TimeError> {
        match (self, earlier) {
            (VirtualTime::Finite(a), VirtualTime::Finite(b)) => {
                a.checked_sub(b).map(TimeSpan::Finite).ok_or(TimeError::Negative)
            }
            (VirtualTime::Infinity, VirtualTime::Finite(_)) => Ok(TimeSpan::Infinity),
            _ => Err(TimeError::Negative),
        }
    }
}

/// Adds a duration to an instant: exact integer addition on finite values,
/// `Infinity` if either side is infinite, an error on overflow.
pub fn time_add(t: VirtualTime, d: TimeSpan) -> Result<VirtualTime, TimeError> {
    t.checked_add(d)
}

impl TimeSpan {
    pub const ZERO: TimeSpan = TimeSpan::Finite(0);

    pub const fn from_micros(us: u64) -> Self {
        TimeSpan::Finite(us)
    }

    pub const fn from_millis(ms: u64) -> Self {
        TimeSpan::Finite(ms * 1_000)
    }

    pub const fn from_secs(s: u64) -> Self {
        TimeSpan::Finite(s * MICROS_PER_SEC)
    }

    pub fn parse_secs(text: &str) -> Result<Self, TimeError> {
        parse_secs_to_micros(text).map(TimeSpan::Finite)
    }

    pub fn as_micros(self) -> Option<u64> {
        match self {
            TimeSpan::Finite(us) => Some(us),
            TimeSpan::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, TimeSpan::Infinity)
    }

    pub fn is_zero(self) -> bool {
        self == TimeSpan::ZERO
    }
}

impl From<TimeSpan> for VirtualTime {
    fn from(d: TimeSpan) -> Self {
        match d {
            TimeSpan::Finite(us) => VirtualTime::Finite(us),
            TimeSpan::Infinity => VirtualTime::Infinity,
        }
    }
}

impl fmt::Display for VirtualTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VirtualTime::Finite(us) => write_secs(f, *us),
            VirtualTime::Infinity => f.write_str("inf"),
        }
    }
}

impl fmt::Display for TimeSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeSpan::Finite(us) => write_secs(f, *us),
            TimeSpan::Infinity => f.write_str("inf"),
        }
    }
}

/// Writes `us` as decimal seconds with trailing fractional zeros (and a
/// bare trailing point) removed: 4_000_000 -> "4", 28_594_700 -> "28.5947".
pub(crate) fn write_secs(out: &mut impl fmt::Write, us: u64) -> fmt::Result {
    let whole = us / MICROS_PER_SEC;
    let mut frac = us % MICROS_PER_SEC;
    write!(out, "{whole}")?;
    if frac == 0 {
        return Ok(());
    }
    let mut digits = 6;
    while frac.is_multiple_of(10) {
        frac /= 10;
        digits -= 1;
    }
    write!(out, ".{frac:0digits$}")
}

/// Parses non-negative decimal seconds into whole microseconds, exactly.
pub fn parse_secs_to_micros(text: &str) -> Result<u64, TimeError> {
    let text = text.trim();
    let (whole, frac) = match text.split_once('.') {
        Some((w, f)) => (w, f),
        None => (text, ""),
    };
    if whole.is_empty() && frac.is_empty() {
        return Err(TimeError::Parse);
    }
    if !whole.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return Err(TimeError::Parse);
    }
    if frac.len() > 6 {
        return Err(TimeError::TooPrecise);
    }
    let whole: u64 = if whole.is_empty() {
        0
    } else {
        whole.parse().map_err(|_| TimeError::Overflow)?
    };
    let mut frac_us: u64 = 0;
    for (i, b) in frac.bytes().enumerate() {
        frac_us += u64::from(b - b'0') * 10u64.pow(5 - i as u32);
    }
    whole
        .checked_mul(MICROS_PER_SEC)
        .and_then(|w| w.checked_add(frac_us))
        .ok_or(TimeError::Overflow)
}
