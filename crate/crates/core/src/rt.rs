//! Wall-clock execution with scheduler slip accounting.
//!
//! Each event has a wall deadline `anchor + virtual time`, where the
//! anchor is the wall instant execution started. After a step finishes,
//! its finish instant is reconciled against the next event's deadline:
//!
//! * finished late: the overshoot is added to the accumulated slip and
//!   reported. If the slip now exceeds the tolerance, execution halts.
//!   Otherwise the next event starts immediately.
//! * finished early or on time: the time left before the deadline is
//!   subtracted from the accumulated slip (never below zero). Execution
//!   then waits for the deadline.
//!
//! Deadlines never re-baseline on a miss. The schedule stays tied to the
//! anchor, so slip is always measured against the ideal timeline.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::coordinator::Coordinator;
use crate::error::Error;
use crate::logging::TraceSink;
use crate::time::{TimeError, VirtualTime};

/// A monotonic microsecond clock.
pub trait WallClock {
    /// Current instant in microseconds. Never decreases.
    fn now(&self) -> u64;

    /// Blocks until `now() >= deadline`. Returns at once if already past.
    fn wait_until(&mut self, deadline: u64);

    /// Called when a step's work is done, before its finish instant is
    /// read. Hardware and host clocks ignore it; the mock clock charges
    /// the step's scripted cost here.
    fn end_step(&mut self) {}
}

impl<C: WallClock + ?Sized> WallClock for &mut C {
    fn now(&self) -> u64 {
        (**self).now()
    }

    fn wait_until(&mut self, deadline: u64) {
        (**self).wait_until(deadline)
    }

    fn end_step(&mut self) {
        (**self).end_step()
    }
}

/// Deterministic clock for tests. Time moves only when a step is charged
/// its scripted cost or when `wait_until` jumps forward. Not thread-safe.
#[derive(Clone, Debug, Default)]
pub struct MockClock {
    now: u64,
    costs: VecDeque<u64>,
}

impl MockClock {
    /// A clock on which every step is free.
    pub fn zero_cost() -> Self {
        Self::default()
    }

    /// Starts at `now` and charges `costs[k]` µs to the k-th step.
    pub fn starting_at(now: u64, costs: impl IntoIterator<Item = u64>) -> Self {
        MockClock {
            now,
            costs: costs.into_iter().collect(),
        }
    }

    /// Moves time forward without a step, e.g. to model background load.
    pub fn advance(&mut self, us: u64) {
        self.now += us;
    }
}

/// Mock clock charging `costs[k]` µs to step k; steps past the end of the
/// script cost nothing.
pub fn mock_clock_script(costs: impl IntoIterator<Item = u64>) -> MockClock {
    MockClock::starting_at(0, costs)
}

impl WallClock for MockClock {
    fn now(&self) -> u64 {
        self.now
    }

    fn wait_until(&mut self, deadline: u64) {
        self.now = self.now.max(deadline);
    }

    fn end_step(&mut self) {
        self.now += self.costs.pop_front().unwrap_or(0);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tolerance {
    Unlimited,
    Micros(u64),
}

/// Accumulated scheduler slip and the bound beyond which execution halts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SlipLedger {
    accumulated: u64,
    tolerance: Tolerance,
}

impl Default for SlipLedger {
    fn default() -> Self {
        SlipLedger::new(Tolerance::Unlimited)
    }
}

impl SlipLedger {
    pub fn new(tolerance: Tolerance) -> Self {
        SlipLedger {
            accumulated: 0,
            tolerance,
        }
    }

    pub fn with_slip(tolerance: Tolerance, accumulated: u64) -> Self {
        SlipLedger { accumulated, tolerance }
    }

    pub fn accumulated(&self) -> u64 {
        self.accumulated
    }

    pub fn tolerance(&self) -> Tolerance {
        self.tolerance
    }

    fn exceeded(&self) -> bool {
        match self.tolerance {
            Tolerance::Unlimited => false,
            Tolerance::Micros(limit) => self.accumulated > limit,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeadlineOutcome {
    /// Finished `waited` µs before the deadline (possibly 0).
    OnTime { waited: u64 },
    /// Finished `by` µs late; the slip stayed within tolerance.
    Missed { by: u64 },
    /// The slip exceeded the tolerance.
    Halt { total_slip: u64 },
}

/// Updates `ledger` for a step that finished at `finish_wall` against the
/// next event's deadline `scheduled_next_wall`.
pub fn reconcile_deadline(ledger: &mut SlipLedger, scheduled_next_wall: u64, finish_wall: u64) -> DeadlineOutcome {
    if finish_wall > scheduled_next_wall {
        let miss = finish_wall - scheduled_next_wall;
        ledger.accumulated = ledger.accumulated.saturating_add(miss);
        if ledger.exceeded() {
            DeadlineOutcome::Halt {
                total_slip: ledger.accumulated,
            }
        } else {
            DeadlineOutcome::Missed { by: miss }
        }
    } else {
        let remaining = scheduled_next_wall - finish_wall;
        ledger.accumulated = ledger.accumulated.saturating_sub(remaining);
        DeadlineOutcome::OnTime { waited: remaining }
    }
}

/// Measures one step from before output collection to after the state
/// advance.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExecutionTimer {
    started: Option<u64>,
}

impl ExecutionTimer {
    pub fn start(&mut self, clock: &impl WallClock) -> u64 {
        let now = clock.now();
        self.started = Some(now);
        now
    }

    /// Returns `(start, finish)`.
    pub fn stop(&mut self, clock: &mut impl WallClock) -> (u64, u64) {
        clock.end_step();
        let finish = clock.now();
        let start = self.started.take().unwrap_or(finish);
        (start, finish)
    }
}

/// Timing of one processed instant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepRecord {
    pub time: VirtualTime,
    /// Wall deadline: anchor + virtual time.
    pub deadline: u64,
    /// Reconciliation of the previous step's finish against this deadline.
    pub gate: DeadlineOutcome,
    /// Ledger after `gate`.
    pub slip: u64,
    pub start: u64,
    pub finish: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunOutcome {
    /// Reached `t_end` or passivity; `last` is the last processed instant.
    Completed { last: VirtualTime },
    /// The ledger exceeded tolerance before the event at `before` ran.
    Halted { before: VirtualTime, total_slip: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RtReport {
    pub anchor: u64,
    pub outcome: RunOutcome,
    pub steps: Vec<StepRecord>,
}

impl RtReport {
    pub fn halted(&self) -> bool {
        matches!(self.outcome, RunOutcome::Halted { .. })
    }
}

/// Runs `coordinator` against `clock` until `t_end`, the system goes
/// passive, or the slip ledger exceeds its tolerance.
///
/// Virtual time 0 is anchored to `clock.now()` at entry. The coordinator's
/// time cursor, if any, tracks the wall offset from the anchor. Missed
/// deadlines are reported through `sink` as they happen.
pub fn execute_realtime(
    coordinator: &mut Coordinator,
    t_end: VirtualTime,
    clock: &mut impl WallClock,
    ledger: &mut SlipLedger,
    sink: &mut dyn TraceSink,
) -> Result<RtReport, Error> {
    coordinator.begin(sink)?;
    let cursor = coordinator.time_cursor().cloned();
    let anchor = clock.now();
    let mut last_finish = anchor;
    let mut last = VirtualTime::ZERO;
    let mut steps = Vec::new();
    let mut timer = ExecutionTimer::default();

    loop {
        let t = coordinator.next_event_time();
        let VirtualTime::Finite(offset) = t else { break };
        if t > t_end {
            break;
        }
        if coordinator.instants_processed() >= coordinator.event_cap() {
            return Err(Error::EventCapExceeded(coordinator.event_cap()));
        }
        let deadline = anchor.checked_add(offset).ok_or(TimeError::Overflow)?;
        let gate = reconcile_deadline(ledger, deadline, last_finish);
        match gate {
            DeadlineOutcome::OnTime { waited } => {
                if waited > 0 {
                    clock.wait_until(deadline);
                }
            }
            DeadlineOutcome::Missed { by } => sink.deadline_miss(by)?,
            DeadlineOutcome::Halt { total_slip } => {
                sink.deadline_miss(last_finish - deadline)?;
                return Ok(RtReport {
                    anchor,
                    outcome: RunOutcome::Halted { before: t, total_slip },
                    steps,
                });
            }
        }

        let start = timer.start(clock);
        if let Some(cursor) = &cursor {
            cursor.set(start - anchor);
        }
        coordinator.step(t, sink)?;
        let (start, finish) = timer.stop(clock);
        steps.push(StepRecord {
            time: t,
            deadline,
            gate,
            slip: ledger.accumulated(),
            start,
            finish,
        });
        last_finish = finish;
        last = t;
    }

    if let VirtualTime::Finite(end) = t_end {
        if let Some(end_wall) = anchor.checked_add(end) {
            clock.wait_until(end_wall);
        }
    }
    Ok(RtReport {
        anchor,
        outcome: RunOutcome::Completed { last },
        steps,
    })
}
