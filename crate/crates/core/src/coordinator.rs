//! The abstract simulator shared by virtual-time and real-time execution.
//!
//! Each processed instant has two phases. Output collection runs `lambda`
//! on every imminent atomic and routes the produced values through the
//! coupling tables into destination inboxes. State advance then applies
//! exactly one transition to each component that is imminent or has input:
//!
//! | imminent | inbox     | transition  |
//! |----------|-----------|-------------|
//! | yes      | empty     | `delta_int` |
//! | no       | non-empty | `delta_ext` |
//! | yes      | non-empty | `delta_con` |

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::Error;
use crate::hal::TimeCursor;
use crate::logging::TraceSink;
use crate::model::{validate_coupled, AtomicModel, Coupling, Model, ModelId};
use crate::port::{MessageBag, Value};
use crate::time::{time_add, VirtualTime};

pub const DEFAULT_EVENT_CAP: u64 = 10_000_000;

/// One log record: an output on a port (`port` is `Some`) or a state
/// rendering (`port` is `None`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TraceEvent {
    pub time: VirtualTime,
    pub model_id: ModelId,
    pub model_name: String,
    pub port: Option<String>,
    pub data: String,
}

impl TraceEvent {
    pub fn is_output(&self) -> bool {
        self.port.is_some()
    }
}

/// Which transition was applied to a component at an instant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Transition {
    Internal,
    External,
    Confluent,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Target {
    leaf: usize,
    port: String,
}

/// Runtime record of one atomic component.
#[derive(Debug)]
pub struct ComponentRuntime {
    id: ModelId,
    model: AtomicModel,
    t_last: VirtualTime,
    t_next: VirtualTime,
    inbox: MessageBag,
    routes: Vec<(String, Vec<Target>)>,
    lambda_calls: u64,
    last_transition: Option<(VirtualTime, Transition)>,
}

impl ComponentRuntime {
    pub fn id(&self) -> ModelId {
        self.id
    }

    pub fn name(&self) -> &str {
        self.model.name()
    }

    pub fn t_last(&self) -> VirtualTime {
        self.t_last
    }

    pub fn t_next(&self) -> VirtualTime {
        self.t_next
    }

    pub fn inbox(&self) -> &MessageBag {
        &self.inbox
    }

    /// Total number of `lambda` invocations so far.
    pub fn lambda_calls(&self) -> u64 {
        self.lambda_calls
    }

    pub fn last_transition(&self) -> Option<(VirtualTime, Transition)> {
        self.last_transition
    }

    fn schedule(&mut self, now: VirtualTime) -> Result<(), Error> {
        self.t_last = now;
        self.t_next = time_add(now, self.model.ta()).map_err(|_| Error::TimeOverflow {
            id: self.id,
            name: self.model.name().into(),
        })?;
        Ok(())
    }

    fn state_event(&self, time: VirtualTime) -> Option<TraceEvent> {
        self.model.state_text().map(|data| TraceEvent {
            time,
            model_id: self.id,
            model_name: self.model.name().into(),
            port: None,
            data,
        })
    }
}

/// Smallest scheduled internal event time; `Infinity` when every component
/// is passive or there are none.
pub fn next_event_time(runtimes: &[ComponentRuntime]) -> VirtualTime {
    runtimes.iter().map(|r| r.t_next).min().unwrap_or(VirtualTime::Infinity)
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct ExternalInput {
    time: VirtualTime,
    port: String,
    value: Value,
}

/// Executes a validated model hierarchy.
pub struct Coordinator {
    runtimes: Vec<ComponentRuntime>,
    root_name: String,
    root_inputs: Vec<(String, crate::port::ValueKind, Vec<Target>)>,
    pending: VecDeque<ExternalInput>,
    /// Inputs injected at the instant currently being processed.
    injecting: Vec<ExternalInput>,
    cursor: Option<TimeCursor>,
    event_cap: u64,
    instants: u64,
    last_instant: Option<VirtualTime>,
    started: bool,
    collected_at: Option<VirtualTime>,
}

impl core::fmt::Debug for Coordinator {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Coordinator")
            .field("root", &self.root_name)
            .field("components", &self.runtimes.len())
            .field("instants", &self.instants)
            .finish_non_exhaustive()
    }
}

// Structure of the hierarchy, kept only while routes are computed.
struct Node {
    name: String,
    parent: Option<usize>,
    kind: NodeKind,
}

enum NodeKind {
    Leaf(usize),
    Coupled {
        children: Vec<usize>,
        eic: Vec<Coupling>,
        eoc: Vec<Coupling>,
        ic: Vec<Coupling>,
    },
}

fn build_tree(model: Model, parent: Option<usize>, nodes: &mut Vec<Node>, leaves: &mut Vec<AtomicModel>) -> usize {
    let index = nodes.len();
    match model {
        Model::Atomic(atomic) => {
            nodes.push(Node {
                name: atomic.name().into(),
                parent,
                kind: NodeKind::Leaf(leaves.len()),
            });
            leaves.push(atomic);
        }
        Model::Coupled(spec) => {
            nodes.push(Node {
                name: spec.name,
                parent,
                kind: NodeKind::Coupled {
                    children: Vec::new(),
                    eic: spec.eic,
                    eoc: spec.eoc,
                    ic: spec.ic,
                },
            });
            let children: Vec<usize> = spec
                .components
                .into_iter()
                .map(|c| build_tree(c, Some(index), nodes, leaves))
                .collect();
            if let NodeKind::Coupled { children: slot, .. } = &mut nodes[index].kind {
                *slot = children;
            }
        }
    }
    index
}

fn child_named(nodes: &[Node], parent: usize, name: &str) -> Option<usize> {
    match &nodes[parent].kind {
        NodeKind::Coupled { children, .. } => children.iter().copied().find(|&c| nodes[c].name == name),
        NodeKind::Leaf(_) => None,
    }
}

/// Atomic input ports reached when a value enters `node` on input `port`,
/// following EIC couplings downward.
fn resolve_input(nodes: &[Node], node: usize, port: &str, out: &mut Vec<Target>) {
    match &nodes[node].kind {
        NodeKind::Leaf(leaf) => out.push(Target {
            leaf: *leaf,
            port: port.into(),
        }),
        NodeKind::Coupled { eic, .. } => {
            for c in eic.iter().filter(|c| c.from.port == port) {
                let child = c.to.component.as_deref().and_then(|n| child_named(nodes, node, n));
                if let Some(child) = child {
                    resolve_input(nodes, child, &c.to.port, out);
                }
            }
        }
    }
}

/// Atomic input ports reached when `node` emits on output `port`: IC
/// couplings in the parent, and EOC couplings that continue upward. Values
/// leaving the root have no consumer and are dropped.
fn resolve_output(nodes: &[Node], node: usize, port: &str, out: &mut Vec<Target>) {
    let Some(parent) = nodes[node].parent else {
        return;
    };
    let NodeKind::Coupled { eoc, ic, .. } = &nodes[parent].kind else {
        return;
    };
    let me = nodes[node].name.as_str();
    let from_me = |c: &&Coupling| c.from.component.as_deref() == Some(me) && c.from.port == port;
    for c in ic.iter().filter(from_me) {
        if let Some(dst) = c.to.component.as_deref().and_then(|n| child_named(nodes, parent, n)) {
            resolve_input(nodes, dst, &c.to.port, out);
        }
    }
    for c in eoc.iter().filter(from_me) {
        resolve_output(nodes, parent, &c.to.port, out);
    }
}

impl Coordinator {
    /// Validates `root`, numbers its atomics depth-first from 1, and places
    /// every component at `t_last = 0`, `t_next = ta(initial state)`.
    pub fn new(root: Model) -> Result<Self, Error> {
        validate_coupled(&root).map_err(Error::Invalid)?;
        let root_name = root.name().to_string();
        let root_ports: Vec<_> = root.inputs().iter().map(|p| (p.name.clone(), p.kind)).collect();

        let mut nodes = Vec::new();
        let mut leaves = Vec::new();
        build_tree(root, None, &mut nodes, &mut leaves);

        let mut leaf_nodes = alloc::vec![0; leaves.len()];
        for (i, n) in nodes.iter().enumerate() {
            if let NodeKind::Leaf(l) = n.kind {
                leaf_nodes[l] = i;
            }
        }

        let root_inputs = root_ports
            .into_iter()
            .map(|(port, kind)| {
                let mut targets = Vec::new();
                resolve_input(&nodes, 0, &port, &mut targets);
                (port, kind, targets)
            })
            .collect();

        let mut runtimes = Vec::with_capacity(leaves.len());
        for (i, model) in leaves.into_iter().enumerate() {
            let routes = model
                .outputs()
                .iter()
                .map(|p| {
                    let mut targets = Vec::new();
                    resolve_output(&nodes, leaf_nodes[i], &p.name, &mut targets);
                    (p.name.clone(), targets)
                })
                .collect();
            let mut rt = ComponentRuntime {
                id: ModelId(i as u32 + 1),
                model,
                t_last: VirtualTime::ZERO,
                t_next: VirtualTime::ZERO,
                inbox: MessageBag::new(),
                routes,
                lambda_calls: 0,
                last_transition: None,
            };
            rt.schedule(VirtualTime::ZERO)?;
            runtimes.push(rt);
        }

        Ok(Coordinator {
            runtimes,
            root_name,
            root_inputs,
            pending: VecDeque::new(),
            injecting: Vec::new(),
            cursor: None,
            event_cap: DEFAULT_EVENT_CAP,
            instants: 0,
            last_instant: None,
            started: false,
            collected_at: None,
        })
    }

    /// Maximum number of instants `simulate` may process.
    pub fn with_event_cap(mut self, cap: u64) -> Self {
        self.event_cap = cap;
        self
    }

    /// Cursor that `simulate` keeps at the current virtual instant, for
    /// models (such as scripted pins) that need to know the time.
    pub fn with_time_cursor(mut self, cursor: TimeCursor) -> Self {
        self.cursor = Some(cursor);
        self
    }

    pub fn event_cap(&self) -> u64 {
        self.event_cap
    }

    pub fn time_cursor(&self) -> Option<&TimeCursor> {
        self.cursor.as_ref()
    }

    pub fn runtimes(&self) -> &[ComponentRuntime] {
        &self.runtimes
    }

    pub fn model_ids(&self) -> Vec<(ModelId, String)> {
        self.runtimes.iter().map(|r| (r.id, r.name().into())).collect()
    }

    pub fn instants_processed(&self) -> u64 {
        self.instants
    }

    /// Schedules `value` to arrive on root input `port` at `time`.
    pub fn schedule_input(&mut self, time: VirtualTime, port: &str, value: Value) -> Result<(), Error> {
        let Some((_, kind, _)) = self.root_inputs.iter().find(|(p, _, _)| p == port) else {
            return Err(Error::BadInput(format!(
                "{} has no input port `{port}`",
                self.root_name
            )));
        };
        if *kind != value.kind() {
            return Err(Error::BadInput(format!(
                "port `{port}` expects {kind}, got {}",
                value.kind()
            )));
        }
        if time.is_infinite() || self.last_instant.is_some_and(|last| time <= last) {
            return Err(Error::BadInput(format!("input at {time} is not in the future")));
        }
        let at = self.pending.partition_point(|e| e.time <= time);
        self.pending.insert(
            at,
            ExternalInput {
                time,
                port: port.into(),
                value,
            },
        );
        Ok(())
    }

    /// Earliest of the components' next internal events and pending
    /// external inputs.
    pub fn next_event_time(&self) -> VirtualTime {
        let internal = next_event_time(&self.runtimes);
        match self.pending.front() {
            Some(e) if e.time < internal => e.time,
            _ => internal,
        }
    }

    /// Emits the initial state of every component at t = 0. Idempotent.
    pub fn begin(&mut self, sink: &mut dyn TraceSink) -> Result<(), Error> {
        if self.started {
            return Ok(());
        }
        self.started = true;
        for rt in &self.runtimes {
            if let Some(ev) = rt.state_event(VirtualTime::ZERO) {
                sink.record(&ev)?;
            }
        }
        Ok(())
    }

    /// Runs `lambda` once on each imminent component and routes the values
    /// into inboxes, along with any external inputs due at `t`. Returns one
    /// event per non-empty output port, in model-id order.
    pub fn collect_outputs(&mut self, t: VirtualTime) -> Result<Vec<TraceEvent>, Error> {
        let next = self.next_event_time();
        if t != next || t.is_infinite() {
            return Err(Error::NotImminent { requested: t, next });
        }
        while self.pending.front().is_some_and(|e| e.time == t) {
            let input = self.pending.pop_front().expect("front checked");
            self.injecting.push(input);
        }
        for input in &self.injecting {
            let (_, _, targets) = self
                .root_inputs
                .iter()
                .find(|(p, _, _)| *p == input.port)
                .expect("port checked when scheduled");
            for target in targets {
                self.runtimes[target.leaf].inbox.add(&target.port, input.value);
            }
        }

        let mut events = Vec::new();
        for i in 0..self.runtimes.len() {
            if self.runtimes[i].t_next != t {
                continue;
            }
            let rt = &mut self.runtimes[i];
            let bag = rt.model.lambda();
            rt.lambda_calls += 1;
            let id = rt.id;
            let name = rt.model.name().to_string();
            let mut deliveries = Vec::new();
            for (port, values) in bag.iter() {
                let data = values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
                events.push(TraceEvent {
                    time: t,
                    model_id: id,
                    model_name: name.clone(),
                    port: Some(port.into()),
                    data,
                });
                if let Some((_, targets)) = rt.routes.iter().find(|(p, _)| p == port) {
                    for target in targets {
                        deliveries.extend(values.iter().map(|v| (target.clone(), *v)));
                    }
                }
            }
            for (target, value) in deliveries {
                self.runtimes[target.leaf].inbox.add(&target.port, value);
            }
        }
        self.collected_at = Some(t);
        Ok(events)
    }

    /// Applies the selected transition to each affected component, then
    /// reschedules it and clears its inbox. Returns state events for the
    /// transitioned components.
    pub fn advance_state(&mut self, t: VirtualTime) -> Result<Vec<TraceEvent>, Error> {
        if self.collected_at != Some(t) {
            return Err(Error::NotImminent {
                requested: t,
                next: self.next_event_time(),
            });
        }
        self.collected_at = None;
        self.injecting.clear();
        let mut events = Vec::new();
        for rt in &mut self.runtimes {
            let imminent = rt.t_next == t;
            let has_input = !rt.inbox.is_empty();
            let transition = match (imminent, has_input) {
                (true, false) => Transition::Internal,
                (false, true) => Transition::External,
                (true, true) => Transition::Confluent,
                (false, false) => continue,
            };
            let result = match transition {
                Transition::Internal => rt.model.delta_int(),
                Transition::External => {
                    let elapsed = t.since(rt.t_last)?;
                    rt.model.delta_ext(elapsed, &rt.inbox)
                }
                Transition::Confluent => rt.model.delta_con(&rt.inbox),
            };
            result.map_err(|source| Error::Model {
                id: rt.id,
                name: rt.model.name().into(),
                source,
            })?;
            rt.inbox.clear();
            rt.last_transition = Some((t, transition));
            rt.schedule(t)?;
            events.extend(rt.state_event(t));
        }
        self.instants += 1;
        self.last_instant = Some(t);
        Ok(events)
    }

    /// Processes instant `t` and forwards its events to `sink`, ordered by
    /// model id with a component's outputs before its state line.
    pub fn step(&mut self, t: VirtualTime, sink: &mut dyn TraceSink) -> Result<(), Error> {
        let mut events = self.collect_outputs(t)?;
        events.extend(self.advance_state(t)?);
        events.sort_by_key(|e| e.model_id);
        for ev in &events {
            sink.record(ev)?;
        }
        Ok(())
    }

    /// Virtual-time loop: processes instants in order until the next one
    /// lies beyond `t_end` or the system is passive. Returns the last
    /// processed instant (zero if none).
    pub fn simulate(&mut self, t_end: VirtualTime, sink: &mut dyn TraceSink) -> Result<VirtualTime, Error> {
        self.begin(sink)?;
        let mut last = self.last_instant.unwrap_or(VirtualTime::ZERO);
        loop {
            let t = self.next_event_time();
            if t.is_infinite() || t > t_end {
                return Ok(last);
            }
            if self.instants >= self.event_cap {
                return Err(Error::EventCapExceeded(self.event_cap));
            }
            if let (Some(cursor), VirtualTime::Finite(us)) = (&self.cursor, t) {
                cursor.set(us);
            }
            self.step(t, sink)?;
            last = t;
        }
    }
}
