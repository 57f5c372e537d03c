//! Host-side companion to `rtdevs-core`: wall clock, trace sinks, pin
//! backends and the `rtdevs` command line.

pub mod cli;
pub mod clock;
pub mod pins;
pub mod sink;
