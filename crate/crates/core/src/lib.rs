//! A Parallel DEVS kernel for virtual-time simulation and wall-clock
//! execution of hierarchical discrete-event models.
//!
//! The crate is `no_std` (it needs `alloc`). Clocks, pins and log sinks are
//! traits; host backends live in a companion crate.
//!
//! * [`time`]: integer-microsecond instants and durations with infinity.
//! * [`port`], [`model`]: ports, message bags, the [`Atomic`] trait and
//!   [`CoupledSpec`] structure with validation.
//! * [`coordinator`]: the abstract simulator and the virtual-time loop.
//! * [`rt`]: real-time execution with scheduler slip accounting.
//! * [`hal`]: pin traits and the digital input/output driver models.
//! * [`logging`]: the `time;model_id;model_name;port_name;data` trace format.
//! * [`blinky`]: the blinky case-study models.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod blinky;
pub mod coordinator;
mod error;
pub mod hal;
pub mod logging;
pub mod model;
pub mod port;
pub mod rt;
pub mod time;

pub use coordinator::{Coordinator, TraceEvent, Transition};
pub use error::Error;
pub use model::{Atomic, AtomicModel, CoupledSpec, Model, ModelError, ModelId};
pub use port::{MessageBag, PortId, Value, ValueKind};
pub use time::{TimeSpan, VirtualTime};
