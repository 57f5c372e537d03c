#![allow(dead_code)]

//! Test models, a random hierarchy generator and a flat reference
//! executor used to check the coordinator.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rtdevs_core::coordinator::TraceEvent;
use rtdevs_core::model::{default_confluent, PortRef};
use rtdevs_core::{
    Atomic, AtomicModel, CoupledSpec, MessageBag, Model, ModelError, ModelId, PortId, TimeSpan, Value, ValueKind,
    VirtualTime,
};

fn lcg(x: u64) -> u64 {
    x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407)
}

/// Counter/toggle atomic with a pseudo-random schedule. Reactions depend
/// only on the sum of a bag, so delivery order inside a bag is irrelevant.
/// Goes passive now and then until the next input.
#[derive(Clone, Debug)]
pub struct Mixer {
    pub seed: u64,
    pub max_gap: u64,
    pub quiet: bool,
}

#[derive(Clone, Debug)]
pub struct MixerState {
    x: u64,
    count: i64,
    sigma: Option<u64>,
    last: &'static str,
}

impl Mixer {
    fn gap(&self, x: u64) -> Option<u64> {
        if x.is_multiple_of(11) {
            None
        } else {
            Some((x >> 8) % self.max_gap + 1)
        }
    }
}

impl Atomic for Mixer {
    type State = MixerState;

    fn input_ports(&self) -> Vec<PortId> {
        vec![PortId::input("in", ValueKind::Int)]
    }

    fn output_ports(&self) -> Vec<PortId> {
        vec![PortId::output("out", ValueKind::Int)]
    }

    fn initial_state(&self) -> MixerState {
        let x = lcg(self.seed);
        MixerState {
            x,
            count: 0,
            sigma: Some((x >> 8) % self.max_gap + 1),
            last: "init",
        }
    }

    fn ta(&self, s: &MixerState) -> TimeSpan {
        s.sigma.map_or(TimeSpan::Infinity, TimeSpan::Finite)
    }

    fn delta_int(&self, s: &mut MixerState) -> Result<(), ModelError> {
        s.x = lcg(s.x);
        s.count += 1;
        s.sigma = self.gap(s.x);
        s.last = "int";
        Ok(())
    }

    fn delta_ext(&self, s: &mut MixerState, e: TimeSpan, input: &MessageBag) -> Result<(), ModelError> {
        let e = e.as_micros().ok_or_else(|| ModelError::new("infinite elapsed"))?;
        let sum = input.values("in").iter().fold(0i64, |acc, v| match v {
            Value::Int(n) => acc.wrapping_add(*n),
            Value::Bool(b) => acc.wrapping_add(*b as i64),
        });
        s.count = s.count.wrapping_add(sum);
        s.x = lcg(s.x ^ sum as u64);
        s.sigma = match s.sigma {
            Some(sigma) if s.x & 1 == 0 => {
                if e >= sigma {
                    return Err(ModelError::new(format!("elapsed {e} reached sigma {sigma}")));
                }
                Some(sigma - e)
            }
            _ => Some((s.x >> 8) % self.max_gap + 1),
        };
        s.last = "ext";
        Ok(())
    }

    fn delta_con(&self, s: &mut MixerState, input: &MessageBag) -> Result<(), ModelError> {
        default_confluent(self, s, input)?;
        s.last = "con";
        Ok(())
    }

    fn lambda(&self, s: &MixerState, out: &mut MessageBag) {
        out.add("out", Value::Int(s.count));
        if s.x & 2 != 0 {
            out.add("out", Value::Int((s.x >> 48) as i64));
        }
    }

    fn state_text(&self, s: &MixerState) -> Option<String> {
        (!self.quiet).then(|| format!("{} {} {:x}", s.last, s.count, s.x))
    }
}

/// Periodic atomic that logs the transition calls of its latest instant,
/// e.g. `con,int,ext@0`.
#[derive(Clone, Debug)]
pub struct Probe {
    pub period: u64,
}

#[derive(Clone, Debug, Default)]
pub struct ProbeState {
    pub calls: Vec<String>,
    pub sigma: u64,
    pub received: i64,
    in_con: bool,
}

impl Atomic for Probe {
    type State = ProbeState;

    fn input_ports(&self) -> Vec<PortId> {
        vec![PortId::input("in", ValueKind::Int)]
    }

    fn output_ports(&self) -> Vec<PortId> {
        vec![PortId::output("out", ValueKind::Int)]
    }

    fn initial_state(&self) -> ProbeState {
        ProbeState {
            sigma: self.period,
            ..ProbeState::default()
        }
    }

    fn ta(&self, s: &ProbeState) -> TimeSpan {
        TimeSpan::Finite(s.sigma)
    }

    fn delta_int(&self, s: &mut ProbeState) -> Result<(), ModelError> {
        if !s.in_con {
            s.calls.clear();
        }
        s.calls.push("int".into());
        s.sigma = self.period;
        Ok(())
    }

    fn delta_ext(&self, s: &mut ProbeState, e: TimeSpan, input: &MessageBag) -> Result<(), ModelError> {
        if !s.in_con {
            s.calls.clear();
        }
        let e = e.as_micros().unwrap();
        s.calls.push(format!("ext@{e}"));
        s.sigma -= e;
        for v in input.values("in") {
            if let Value::Int(n) = v {
                s.received += n;
            }
        }
        Ok(())
    }

    fn delta_con(&self, s: &mut ProbeState, input: &MessageBag) -> Result<(), ModelError> {
        s.calls.clear();
        s.calls.push("con".into());
        s.in_con = true;
        let result = default_confluent(self, s, input);
        s.in_con = false;
        result
    }

    fn lambda(&self, s: &ProbeState, out: &mut MessageBag) {
        out.add("out", Value::Int(s.received + 1));
    }

    fn state_text(&self, s: &ProbeState) -> Option<String> {
        Some(format!("{} r={} s={}", s.calls.join(","), s.received, s.sigma))
    }
}

/// Wraps `inner` in `depth` pass-through layers with `in`/`out` ports.
pub fn wrap(inner: Model, depth: usize) -> Model {
    let mut model = inner;
    for level in 0..depth {
        let child = model.name().to_string();
        model = CoupledSpec::new(format!("wrap{level}"))
            .input("in", ValueKind::Int)
            .output("out", ValueKind::Int)
            .component(model)
            .eic("in", &child, "in")
            .eoc(&child, "out", "out")
            .into();
    }
    model
}

pub fn random_mixer(rng: &mut impl Rng, name: &str) -> Model {
    let mixer = Mixer {
        seed: rng.gen(),
        max_gap: rng.gen_range(1..400),
        quiet: rng.gen_bool(0.2),
    };
    Model::atomic(name, mixer)
}

/// A random hierarchy of 2–4 atomics nested at most `max_depth` coupled
/// levels deep, with random EIC/EOC/IC couplings over `in`/`out` ports,
/// plus a random schedule of external inputs to the root. Equal seeds
/// give equal models.
pub fn random_system(seed: u64, max_depth: usize) -> (Model, Vec<(u64, i64)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let atomics = rng.gen_range(2..=4);
    let mut names = 0;
    let model = random_coupled(&mut rng, atomics, max_depth, &mut names);
    let inputs: BTreeSet<u64> = (0..rng.gen_range(0..20)).map(|_| rng.gen_range(1..50_000)).collect();
    let inputs = inputs.into_iter().map(|t| (t, rng.gen_range(-50..50))).collect();
    (model, inputs)
}

fn random_coupled(rng: &mut impl Rng, atomics: usize, depth: usize, names: &mut u32) -> Model {
    *names += 1;
    let mut spec = CoupledSpec::new(format!("c{names}"))
        .input("in", ValueKind::Int)
        .output("out", ValueKind::Int);

    // split the atomics over 1..=atomics children
    let mut children: Vec<Model> = Vec::new();
    let mut left = atomics;
    while left > 0 {
        let take = if depth > 1 && left > 1 && rng.gen_bool(0.4) {
            rng.gen_range(1..=left)
        } else {
            1
        };
        left -= take;
        if take == 1 && (depth <= 1 || rng.gen_bool(0.7)) {
            *names += 1;
            children.push(random_mixer(rng, &format!("a{names}")));
        } else {
            children.push(random_coupled(rng, take, depth - 1, names));
        }
    }
    let names_here: Vec<String> = children.iter().map(|c| c.name().to_string()).collect();
    for child in children {
        spec = spec.component(child);
    }
    for n in &names_here {
        if rng.gen_bool(0.5) {
            spec = spec.eic("in", n, "in");
        }
        if rng.gen_bool(0.4) {
            spec = spec.eoc(n, "out", "out");
        }
    }
    for src in &names_here {
        for dst in &names_here {
            if src != dst && rng.gen_bool(0.35) {
                spec = spec.ic(src, "out", dst, "in");
            }
        }
    }
    spec.into()
}

/// Port node in the flattened graph: component path from the root, port.
type Node = (Vec<String>, String);

/// Reference executor: the hierarchy flattened to a port graph and run
/// with one global event queue. Knows nothing of the coordinator.
pub struct FlatOracle {
    leaves: Vec<FlatLeaf>,
    /// (from, to) edges between port nodes.
    edges: Vec<(Node, Node)>,
    queue: BTreeSet<(VirtualTime, usize)>,
    external: Vec<(u64, i64)>,
}

struct FlatLeaf {
    path: Vec<String>,
    model: AtomicModel,
    t_last: VirtualTime,
    t_next: VirtualTime,
    inbox: MessageBag,
}

fn node(scope: &[String], r: &PortRef) -> Node {
    let mut path = scope.to_vec();
    if let Some(c) = &r.component {
        path.push(c.clone());
    }
    (path, r.port.clone())
}

fn flatten(model: Model, path: Vec<String>, leaves: &mut Vec<FlatLeaf>, edges: &mut Vec<(Node, Node)>) {
    match model {
        Model::Atomic(model) => leaves.push(FlatLeaf {
            path,
            model,
            t_last: VirtualTime::ZERO,
            t_next: VirtualTime::ZERO,
            inbox: MessageBag::new(),
        }),
        Model::Coupled(spec) => {
            for c in spec.eic.iter().chain(&spec.eoc).chain(&spec.ic) {
                edges.push((node(&path, &c.from), node(&path, &c.to)));
            }
            for child in spec.components {
                let mut child_path = path.clone();
                child_path.push(child.name().to_string());
                flatten(child, child_path, leaves, edges);
            }
        }
    }
}

impl FlatOracle {
    pub fn new(root: Model, external: Vec<(u64, i64)>) -> Self {
        let mut leaves = Vec::new();
        let mut edges = Vec::new();
        // the root's own ports live at the empty path
        flatten(root, Vec::new(), &mut leaves, &mut edges);
        let mut oracle = FlatOracle {
            leaves,
            edges,
            queue: BTreeSet::new(),
            external,
        };
        for i in 0..oracle.leaves.len() {
            oracle.reschedule(i, VirtualTime::ZERO);
        }
        oracle
    }

    fn reschedule(&mut self, i: usize, t: VirtualTime) {
        let leaf = &mut self.leaves[i];
        self.queue.remove(&(leaf.t_next, i));
        leaf.t_last = t;
        leaf.t_next = t.checked_add(leaf.model.ta()).unwrap();
        if !leaf.t_next.is_infinite() {
            self.queue.insert((leaf.t_next, i));
        }
    }

    /// Every leaf input reached from `from`, once per distinct path.
    fn destinations(&self, from: &Node, out: &mut Vec<(usize, String)>) {
        if let Some(i) = self.leaves.iter().position(|l| l.path == from.0) {
            if self.leaves[i].model.inputs().iter().any(|p| p.name == from.1) {
                out.push((i, from.1.clone()));
                return;
            }
        }
        for (a, b) in &self.edges {
            if a == from {
                self.destinations(b, out);
            }
        }
    }

    fn deliver(&mut self, from: Node, values: &[Value]) {
        let mut targets = Vec::new();
        self.destinations(&from, &mut targets);
        for (leaf, port) in targets {
            for v in values {
                self.leaves[leaf].inbox.add(&port, *v);
            }
        }
    }

    fn state_event(&self, i: usize, t: VirtualTime) -> Option<TraceEvent> {
        let leaf = &self.leaves[i];
        leaf.model.state_text().map(|data| TraceEvent {
            time: t,
            model_id: ModelId(i as u32 + 1),
            model_name: leaf.model.name().into(),
            port: None,
            data,
        })
    }

    /// Runs up to `max_instants` instants (or to passivity) and returns the
    /// trace and the last instant processed.
    pub fn run(mut self, max_instants: usize) -> (Vec<TraceEvent>, VirtualTime) {
        let mut trace: Vec<TraceEvent> = (0..self.leaves.len())
            .filter_map(|i| self.state_event(i, VirtualTime::ZERO))
            .collect();
        let mut last = VirtualTime::ZERO;
        self.external.reverse();
        for _ in 0..max_instants {
            let internal = self.queue.first().map(|(t, _)| *t).unwrap_or(VirtualTime::Infinity);
            let external = self
                .external
                .last()
                .map_or(VirtualTime::Infinity, |(t, _)| VirtualTime::from_micros(*t));
            let t = internal.min(external);
            if t.is_infinite() {
                break;
            }
            last = t;
            let imminent: Vec<usize> = self
                .queue
                .iter()
                .take_while(|(tn, _)| *tn == t)
                .map(|(_, i)| *i)
                .collect();

            let mut events = Vec::new();
            for &i in &imminent {
                let bag = self.leaves[i].model.lambda();
                for (port, values) in bag.iter() {
                    let data: Vec<String> = values.iter().map(|v| v.to_string()).collect();
                    events.push(TraceEvent {
                        time: t,
                        model_id: ModelId(i as u32 + 1),
                        model_name: self.leaves[i].model.name().into(),
                        port: Some(port.to_string()),
                        data: data.join(","),
                    });
                    let from = (self.leaves[i].path.clone(), port.to_string());
                    let values = values.to_vec();
                    self.deliver(from, &values);
                }
            }
            while self
                .external
                .last()
                .is_some_and(|(te, _)| VirtualTime::from_micros(*te) == t)
            {
                let (_, v) = self.external.pop().unwrap();
                self.deliver((Vec::new(), "in".into()), &[Value::Int(v)]);
            }

            for i in 0..self.leaves.len() {
                let is_imminent = imminent.contains(&i);
                let bag = std::mem::take(&mut self.leaves[i].inbox);
                let leaf = &mut self.leaves[i];
                match (is_imminent, bag.is_empty()) {
                    (true, true) => leaf.model.delta_int().unwrap(),
                    (true, false) => leaf.model.delta_con(&bag).unwrap(),
                    (false, false) => {
                        let e = t.since(leaf.t_last).unwrap();
                        leaf.model.delta_ext(e, &bag).unwrap()
                    }
                    (false, true) => continue,
                }
                self.reschedule(i, t);
                events.extend(self.state_event(i, t));
            }
            events.sort_by_key(|e| (e.model_id, !e.is_output()));
            trace.extend(events);
        }
        (trace, last)
    }
}

/// Trace with model ids dropped.
pub fn without_ids(trace: &[TraceEvent]) -> Vec<(VirtualTime, String, Option<String>, String)> {
    trace
        .iter()
        .map(|e| (e.time, e.model_name.clone(), e.port.clone(), e.data.clone()))
        .collect()
}
