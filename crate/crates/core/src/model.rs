//! Atomic behaviors and coupled structure.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::port::{Direction, MessageBag, PortId, ValueKind};
use crate::time::TimeSpan;

/// Error raised by a model's own transition logic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModelError {
    /// The confluent transition was invoked with no input.
    EmptyConfluentBag,
    Failed(String),
}

impl ModelError {
    pub fn new(message: impl Into<String>) -> Self {
        ModelError::Failed(message.into())
    }
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::EmptyConfluentBag => f.write_str("confluent transition invoked with an empty bag"),
            ModelError::Failed(msg) => f.write_str(msg),
        }
    }
}

impl core::error::Error for ModelError {}

/// The behavior of an atomic DEVS model.
///
/// The behavior object holds parameters; the mutable state `S` is owned by
/// whoever executes the model. `lambda` sees the state immutably.
pub trait Atomic {
    type State;

    fn input_ports(&self) -> Vec<PortId> {
        Vec::new()
    }

    fn output_ports(&self) -> Vec<PortId> {
        Vec::new()
    }

    fn initial_state(&self) -> Self::State;

    fn ta(&self, state: &Self::State) -> TimeSpan;

    fn delta_int(&self, state: &mut Self::State) -> Result<(), ModelError>;

    /// Called with `0 <= elapsed < ta(state)`.
    fn delta_ext(&self, state: &mut Self::State, elapsed: TimeSpan, input: &MessageBag) -> Result<(), ModelError>;

    /// Internal expiry and input at the same instant. Defaults to
    /// [`default_confluent`].
    fn delta_con(&self, state: &mut Self::State, input: &MessageBag) -> Result<(), ModelError> {
        default_confluent(self, state, input)
    }

    fn lambda(&self, state: &Self::State, output: &mut MessageBag);

    /// Text for the state log line, or `None` to log no state line.
    fn state_text(&self, _state: &Self::State) -> Option<String> {
        None
    }
}

/// Internal transition first, then the external transition with zero
/// elapsed time.
pub fn default_confluent<A: Atomic + ?Sized>(
    behavior: &A,
    state: &mut A::State,
    input: &MessageBag,
) -> Result<(), ModelError> {
    if input.is_empty() {
        return Err(ModelError::EmptyConfluentBag);
    }
    behavior.delta_int(state)?;
    behavior.delta_ext(state, TimeSpan::ZERO, input)
}

trait ErasedAtomic {
    fn ta(&self) -> TimeSpan;
    fn delta_int(&mut self) -> Result<(), ModelError>;
    fn delta_ext(&mut self, elapsed: TimeSpan, input: &MessageBag) -> Result<(), ModelError>;
    fn delta_con(&mut self, input: &MessageBag) -> Result<(), ModelError>;
    fn lambda(&self, output: &mut MessageBag);
    fn state_text(&self) -> Option<String>;
}

struct Instance<A: Atomic> {
    behavior: A,
    state: A::State,
}

impl<A: Atomic> ErasedAtomic for Instance<A> {
    fn ta(&self) -> TimeSpan {
        self.behavior.ta(&self.state)
    }

    fn delta_int(&mut self) -> Result<(), ModelError> {
        self.behavior.delta_int(&mut self.state)
    }

    fn delta_ext(&mut self, elapsed: TimeSpan, input: &MessageBag) -> Result<(), ModelError> {
        self.behavior.delta_ext(&mut self.state, elapsed, input)
    }

    fn delta_con(&mut self, input: &MessageBag) -> Result<(), ModelError> {
        self.behavior.delta_con(&mut self.state, input)
    }

    fn lambda(&self, output: &mut MessageBag) {
        self.behavior.lambda(&self.state, output)
    }

    fn state_text(&self) -> Option<String> {
        self.behavior.state_text(&self.state)
    }
}

/// A named atomic model paired with its current state.
pub struct AtomicModel {
    name: String,
    inputs: Vec<PortId>,
    outputs: Vec<PortId>,
    inner: Box<dyn ErasedAtomic>,
}

impl AtomicModel {
    /// Instantiates `behavior` in its initial state.
    pub fn new<A: Atomic + 'static>(name: impl Into<String>, behavior: A) -> Self {
        let inputs = behavior.input_ports();
        let outputs = behavior.output_ports();
        let state = behavior.initial_state();
        AtomicModel {
            name: name.into(),
            inputs,
            outputs,
            inner: Box::new(Instance { behavior, state }),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn inputs(&self) -> &[PortId] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[PortId] {
        &self.outputs
    }

    pub fn ta(&self) -> TimeSpan {
        self.inner.ta()
    }

    pub fn delta_int(&mut self) -> Result<(), ModelError> {
        self.inner.delta_int()
    }

    pub fn delta_ext(&mut self, elapsed: TimeSpan, input: &MessageBag) -> Result<(), ModelError> {
        self.inner.delta_ext(elapsed, input)
    }

    pub fn delta_con(&mut self, input: &MessageBag) -> Result<(), ModelError> {
        self.inner.delta_con(input)
    }

    pub fn lambda(&self) -> MessageBag {
        let mut bag = MessageBag::new();
        self.inner.lambda(&mut bag);
        bag
    }

    pub fn state_text(&self) -> Option<String> {
        self.inner.state_text()
    }
}

impl fmt::Debug for AtomicModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AtomicModel")
            .field("name", &self.name)
            .field("inputs", &self.inputs)
            .field("outputs", &self.outputs)
            .finish_non_exhaustive()
    }
}

/// A node of a model hierarchy.
#[derive(Debug)]
pub enum Model {
    Atomic(AtomicModel),
    Coupled(CoupledSpec),
}

impl Model {
    pub fn atomic<A: Atomic + 'static>(name: impl Into<String>, behavior: A) -> Self {
        Model::Atomic(AtomicModel::new(name, behavior))
    }

    pub fn name(&self) -> &str {
        match self {
            Model::Atomic(a) => a.name(),
            Model::Coupled(c) => &c.name,
        }
    }

    pub fn inputs(&self) -> &[PortId] {
        match self {
            Model::Atomic(a) => a.inputs(),
            Model::Coupled(c) => &c.inputs,
        }
    }

    pub fn outputs(&self) -> &[PortId] {
        match self {
            Model::Atomic(a) => a.outputs(),
            Model::Coupled(c) => &c.outputs,
        }
    }

    fn port(&self, name: &str, direction: Direction) -> Option<&PortId> {
        let ports = match direction {
            Direction::Input => self.inputs(),
            Direction::Output => self.outputs(),
        };
        ports.iter().find(|p| p.name == name)
    }
}

impl From<CoupledSpec> for Model {
    fn from(spec: CoupledSpec) -> Self {
        Model::Coupled(spec)
    }
}

impl From<AtomicModel> for Model {
    fn from(atomic: AtomicModel) -> Self {
        Model::Atomic(atomic)
    }
}

/// One side of a coupling. `component == None` names a port of the
/// enclosing coupled model itself.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PortRef {
    pub component: Option<String>,
    pub port: String,
}

impl PortRef {
    pub fn own(port: impl Into<String>) -> Self {
        PortRef {
            component: None,
            port: port.into(),
        }
    }

    pub fn child(component: impl Into<String>, port: impl Into<String>) -> Self {
        PortRef {
            component: Some(component.into()),
            port: port.into(),
        }
    }
}

impl fmt::Display for PortRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.component {
            Some(c) => write!(f, "{c}.{}", self.port),
            None => write!(f, "self.{}", self.port),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Coupling {
    pub from: PortRef,
    pub to: PortRef,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CouplingKind {
    Eic,
    Eoc,
    Ic,
}

impl fmt::Display for CouplingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CouplingKind::Eic => "EIC",
            CouplingKind::Eoc => "EOC",
            CouplingKind::Ic => "IC",
        })
    }
}

/// A coupled model: children plus the three coupling tables.
#[derive(Debug, Default)]
pub struct CoupledSpec {
    pub name: String,
    pub inputs: Vec<PortId>,
    pub outputs: Vec<PortId>,
    pub components: Vec<Model>,
    pub eic: Vec<Coupling>,
    pub eoc: Vec<Coupling>,
    pub ic: Vec<Coupling>,
}

impl CoupledSpec {
    pub fn new(name: impl Into<String>) -> Self {
        CoupledSpec {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn input(mut self, name: impl Into<String>, kind: ValueKind) -> Self {
        self.inputs.push(PortId::input(name, kind));
        self
    }

    pub fn output(mut self, name: impl Into<String>, kind: ValueKind) -> Self {
        self.outputs.push(PortId::output(name, kind));
        self
    }

    pub fn component(mut self, model: impl Into<Model>) -> Self {
        self.components.push(model.into());
        self
    }

    /// Own input `port` feeds `child.child_port`.
    pub fn eic(mut self, port: &str, child: &str, child_port: &str) -> Self {
        self.eic.push(Coupling {
            from: PortRef::own(port),
            to: PortRef::child(child, child_port),
        });
        self
    }

    /// `child.child_port` feeds own output `port`.
    pub fn eoc(mut self, child: &str, child_port: &str, port: &str) -> Self {
        self.eoc.push(Coupling {
            from: PortRef::child(child, child_port),
            to: PortRef::own(port),
        });
        self
    }

    pub fn ic(mut self, src: &str, src_port: &str, dst: &str, dst_port: &str) -> Self {
        self.ic.push(Coupling {
            from: PortRef::child(src, src_port),
            to: PortRef::child(dst, dst_port),
        });
        self
    }

    pub fn child(&self, name: &str) -> Option<&Model> {
        self.components.iter().find(|c| c.name() == name)
    }
}

/// A structural defect found by [`validate_coupled`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StructuralError {
    DuplicateComponent {
        coupled: String,
        component: String,
    },
    DuplicatePort {
        model: String,
        port: String,
        direction: Direction,
    },
    UnknownComponent {
        coupled: String,
        kind: CouplingKind,
        component: String,
    },
    UnknownPort {
        coupled: String,
        kind: CouplingKind,
        endpoint: String,
        direction: Direction,
    },
    /// An endpoint sits on the wrong side for its coupling kind (e.g. an EIC
    /// whose source is a child).
    IllegalEndpoint {
        coupled: String,
        kind: CouplingKind,
        endpoint: String,
    },
    KindMismatch {
        coupled: String,
        from: String,
        to: String,
        from_kind: ValueKind,
        to_kind: ValueKind,
    },
    SelfCoupling {
        coupled: String,
        component: String,
    },
}

impl fmt::Display for StructuralError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StructuralError::DuplicateComponent { coupled, component } => {
                write!(f, "{coupled}: duplicate component name `{component}`")
            }
            StructuralError::DuplicatePort { model, port, direction } => {
                write!(f, "{model}: duplicate {direction} port `{port}`")
            }
            StructuralError::UnknownComponent {
                coupled,
                kind,
                component,
            } => {
                write!(f, "{coupled}: {kind} names unknown component `{component}`")
            }
            StructuralError::UnknownPort {
                coupled,
                kind,
                endpoint,
                direction,
            } => {
                write!(f, "{coupled}: {kind} endpoint `{endpoint}` is not an {direction} port")
            }
            StructuralError::IllegalEndpoint {
                coupled,
                kind,
                endpoint,
            } => {
                write!(
                    f,
                    "{coupled}: endpoint `{endpoint}` is not legal for an {kind} coupling"
                )
            }
            StructuralError::KindMismatch {
                coupled,
                from,
                to,
                from_kind,
                to_kind,
            } => {
                write!(
                    f,
                    "{coupled}: `{from}` carries {from_kind} but `{to}` expects {to_kind}"
                )
            }
            StructuralError::SelfCoupling { coupled, component } => {
                write!(f, "{coupled}: IC couples `{component}` to itself")
            }
        }
    }
}

impl core::error::Error for StructuralError {}

/// Checks every coupling of `root` and of all nested coupled models.
/// Returns every violation found, not just the first.
pub fn validate_coupled(root: &Model) -> Result<(), Vec<StructuralError>> {
    let mut errors = Vec::new();
    validate_model(root, &mut errors);
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

fn validate_model(model: &Model, errors: &mut Vec<StructuralError>) {
    for (i, p) in model.inputs().iter().enumerate() {
        if model.inputs()[..i].iter().any(|q| q.name == p.name) {
            errors.push(StructuralError::DuplicatePort {
                model: model.name().into(),
                port: p.name.clone(),
                direction: Direction::Input,
            });
        }
    }
    for (i, p) in model.outputs().iter().enumerate() {
        if model.outputs()[..i].iter().any(|q| q.name == p.name) {
            errors.push(StructuralError::DuplicatePort {
                model: model.name().into(),
                port: p.name.clone(),
                direction: Direction::Output,
            });
        }
    }
    let Model::Coupled(spec) = model else {
        return;
    };
    for (i, c) in spec.components.iter().enumerate() {
        if spec.components[..i].iter().any(|d| d.name() == c.name()) {
            errors.push(StructuralError::DuplicateComponent {
                coupled: spec.name.clone(),
                component: c.name().into(),
            });
        }
    }
    for coupling in &spec.eic {
        check_coupling(spec, model, CouplingKind::Eic, coupling, errors);
    }
    for coupling in &spec.eoc {
        check_coupling(spec, model, CouplingKind::Eoc, coupling, errors);
    }
    for coupling in &spec.ic {
        check_coupling(spec, model, CouplingKind::Ic, coupling, errors);
    }
    for child in &spec.components {
        validate_model(child, errors);
    }
}

fn check_coupling(
    spec: &CoupledSpec,
    this: &Model,
    kind: CouplingKind,
    coupling: &Coupling,
    errors: &mut Vec<StructuralError>,
) {
    // (source must be a child?, destination must be a child?)
    let (src_child, dst_child) = match kind {
        CouplingKind::Eic => (false, true),
        CouplingKind::Eoc => (true, false),
        CouplingKind::Ic => (true, true),
    };
    // A child's output or the parent's input feeds a coupling; a child's
    // input or the parent's output receives from it.
    let src = resolve_endpoint(spec, this, kind, &coupling.from, src_child, Direction::Output, errors);
    let dst = resolve_endpoint(spec, this, kind, &coupling.to, dst_child, Direction::Input, errors);
    if kind == CouplingKind::Ic && coupling.from.component == coupling.to.component {
        if let Some(name) = &coupling.from.component {
            errors.push(StructuralError::SelfCoupling {
                coupled: spec.name.clone(),
                component: name.clone(),
            });
        }
    }
    if let (Some(a), Some(b)) = (src, dst) {
        if a != b {
            errors.push(StructuralError::KindMismatch {
                coupled: spec.name.clone(),
                from: format!("{}", coupling.from),
                to: format!("{}", coupling.to),
                from_kind: a,
                to_kind: b,
            });
        }
    }
}

fn resolve_endpoint(
    spec: &CoupledSpec,
    this: &Model,
    kind: CouplingKind,
    endpoint: &PortRef,
    expect_child: bool,
    child_direction: Direction,
    errors: &mut Vec<StructuralError>,
) -> Option<ValueKind> {
    let (owner, direction) = match (&endpoint.component, expect_child) {
        (Some(name), true) => match spec.child(name) {
            Some(child) => (child, child_direction),
            None => {
                errors.push(StructuralError::UnknownComponent {
                    coupled: spec.name.clone(),
                    kind,
                    component: name.clone(),
                });
                return None;
            }
        },
        // The parent's own port: the opposite direction of a child's.
        (None, false) => (
            this,
            match child_direction {
                Direction::Output => Direction::Input,
                Direction::Input => Direction::Output,
            },
        ),
        _ => {
            errors.push(StructuralError::IllegalEndpoint {
                coupled: spec.name.clone(),
                kind,
                endpoint: format!("{endpoint}"),
            });
            return None;
        }
    };
    match owner.port(&endpoint.port, direction) {
        Some(p) => Some(p.kind),
        None => {
            errors.push(StructuralError::UnknownPort {
                coupled: spec.name.clone(),
                kind,
                endpoint: format!("{endpoint}"),
                direction,
            });
            None
        }
    }
}

/// Identifier of an atomic model within one execution, 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModelId(pub u32);

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Numbers the atomic models of `root` depth-first in registration order,
/// starting at 1. Coupled models get no id.
pub fn assign_model_ids(root: &Model) -> Vec<(ModelId, String)> {
    fn walk(model: &Model, out: &mut Vec<(ModelId, String)>) {
        match model {
            Model::Atomic(a) => {
                let id = ModelId(out.len() as u32 + 1);
                out.push((id, a.name().into()));
            }
            Model::Coupled(c) => c.components.iter().for_each(|child| walk(child, out)),
        }
    }
    let mut out = Vec::new();
    walk(root, &mut out);
    out
}
