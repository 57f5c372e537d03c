//! Ports, payload values and message bags.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// Payload type carried by a port.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ValueKind {
    Bool,
    Int,
}

/// A message payload.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Bool(bool),
    Int(i64),
}

impl Value {
    pub fn kind(&self) -> ValueKind {
        match self {
            Value::Bool(_) => ValueKind::Bool,
            Value::Int(_) => ValueKind::Int,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            Value::Int(_) => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            Value::Bool(_) => None,
        }
    }
}

/// Booleans render as `1`/`0`.
impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(true) => f.write_str("1"),
            Value::Bool(false) => f.write_str("0"),
            Value::Int(i) => write!(f, "{i}"),
        }
    }
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueKind::Bool => f.write_str("bool"),
            ValueKind::Int => f.write_str("int"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Input,
    Output,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::Input => f.write_str("input"),
            Direction::Output => f.write_str("output"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PortId {
    pub name: String,
    pub direction: Direction,
    pub kind: ValueKind,
}

impl PortId {
    pub fn input(name: impl Into<String>, kind: ValueKind) -> Self {
        PortId {
            name: name.into(),
            direction: Direction::Input,
            kind,
        }
    }

    pub fn output(name: impl Into<String>, kind: ValueKind) -> Self {
        PortId {
            name: name.into(),
            direction: Direction::Output,
            kind,
        }
    }
}

/// The values present on each port at one instant.
///
/// A multiset per port: the same value may appear several times when it
/// arrives from several sources. Ports keep first-insertion order so output
/// events render deterministically.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MessageBag {
    ports: Vec<(String, Vec<Value>)>,
}

impl MessageBag {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, port: &str, value: Value) {
        match self.ports.iter_mut().find(|(name, _)| name == port) {
            Some((_, values)) => values.push(value),
            None => self.ports.push((port.to_string(), alloc::vec![value])),
        }
    }

    /// Values on `port`, in arrival order. Empty if the port is absent.
    pub fn values(&self, port: &str) -> &[Value] {
        self.ports
            .iter()
            .find(|(name, _)| name == port)
            .map_or(&[], |(_, values)| values.as_slice())
    }

    /// Non-empty ports with their values.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[Value])> {
        self.ports
            .iter()
            .filter(|(_, v)| !v.is_empty())
            .map(|(name, values)| (name.as_str(), values.as_slice()))
    }

    pub fn is_empty(&self) -> bool {
        self.ports.iter().all(|(_, v)| v.is_empty())
    }

    /// Total number of values across all ports.
    pub fn len(&self) -> usize {
        self.ports.iter().map(|(_, v)| v.len()).sum()
    }

    pub fn clear(&mut self) {
        self.ports.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn bag_is_a_multiset() {
        let mut bag = MessageBag::new();
        bag.add("in", Value::Bool(true));
        bag.add("in", Value::Bool(true));
        bag.add("other", Value::Int(3));
        assert_eq!(bag.values("in"), &[Value::Bool(true), Value::Bool(true)]);
        assert_eq!(bag.len(), 3);
        assert_eq!(bag.values("missing"), &[]);
        let names: Vec<_> = bag.iter().map(|(p, _)| p).collect();
        assert_eq!(names, vec!["in", "other"]);
        bag.clear();
        assert!(bag.is_empty());
    }

    #[test]
    fn values_render_as_digits() {
        assert_eq!(Value::Bool(true).to_string(), "1");
        assert_eq!(Value::Bool(false).to_string(), "0");
        assert_eq!(Value::Int(-12).to_string(), "-12");
    }
}
