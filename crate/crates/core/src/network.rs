//! Network model: nodes with SPAM, gate and memory noise, directed links with
//! channel-valued noise, and a per-run logical clock.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channels::{self, ChannelError};
use crate::cliffords::{gates, CliffordElement, CliffordError, CliffordGroup};
use crate::{Channel, DensityMatrix, Effect};

/// Orthogonality tolerance for the flip gate, `tr[P ρ P† ρ]`.
const FLIP_TOL: f64 = 1e-10;
const PROB_TOL: f64 = 1e-10;

/// Time in integer nanoseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Duration(pub u64);

impl Duration {
    pub const ZERO: Duration = Duration(0);

    pub fn from_nanos(ns: u64) -> Self {
        Duration(ns)
    }

    pub fn from_micros(us: u64) -> Self {
        Duration(us * 1_000)
    }

    pub fn from_millis(ms: u64) -> Self {
        Duration(ms * 1_000_000)
    }

    pub fn nanos(self) -> u64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 * 1e-9
    }
}

impl std::ops::Add for Duration {
    type Output = Duration;
    fn add(self, rhs: Duration) -> Duration {
        Duration(self.0 + rhs.0)
    }
}

impl fmt::Display for Duration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}ns", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("no link {from:?} -> {to:?}")]
    MissingLink { from: String, to: String },
    #[error("duplicate link {from:?} -> {to:?}")]
    DuplicateLink { from: String, to: String },
    #[error("duplicate node {0:?}")]
    DuplicateNode(String),
    #[error("node {node:?}: {reason}")]
    InvalidNode { node: String, reason: String },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Clifford(#[from] CliffordError),
}

/// Configuration of one processing node.
#[derive(Debug, Clone)]
pub struct NodeConfig {
    pub name: String,
    pub dim: usize,
    /// Preparation noise `Λ^SP`.
    pub sp_noise: Channel,
    /// Measurement noise `Λ^M`, applied to the effect in the Heisenberg picture.
    pub meas_noise: Channel,
    /// Gate-independent gate noise `Λ^U`.
    pub gate_noise: Channel,
    pub gate_duration: Duration,
    /// `None` is an infinite lifetime.
    pub t1: Option<Duration>,
    pub t2: Option<Duration>,
    pub initial_state: DensityMatrix,
    pub effect: Effect,
    /// Ending gate `P` that maps the initial state to an orthogonal one.
    pub flip_unitary: CliffordElement,
}

impl NodeConfig {
    /// A noiseless node on `group`'s register: `|0…0⟩`, effect `|0…0⟩⟨0…0|`, `P = X^{⊗n}`.
    pub fn noiseless(name: impl Into<String>, group: &CliffordGroup) -> Result<Self, NetworkError> {
        let dim = group.dim();
        let x_all = gates::tensor_power(&gates::pauli_x(), group.n_qubits());
        let flip = group.index_of(&x_all).ok_or(CliffordError::LookupMiss)?;
        Ok(Self {
            name: name.into(),
            dim,
            sp_noise: Channel::identity(dim),
            meas_noise: Channel::identity(dim),
            gate_noise: Channel::identity(dim),
            gate_duration: Duration::ZERO,
            t1: None,
            t2: None,
            initial_state: DensityMatrix::basis(dim, 0),
            effect: Effect::basis(dim, 0),
            flip_unitary: group.element(flip)?.clone(),
        })
    }

    fn validate(&self) -> Result<(), NetworkError> {
        let invalid = |reason: String| NetworkError::InvalidNode { node: self.name.clone(), reason };
        for (what, d) in [
            ("sp_noise", self.sp_noise.dim()),
            ("meas_noise", self.meas_noise.dim()),
            ("gate_noise", self.gate_noise.dim()),
            ("initial_state", self.initial_state.dim()),
            ("effect", self.effect.dim()),
            ("flip_unitary", self.flip_unitary.unitary().nrows()),
        ] {
            if d != self.dim {
                return Err(invalid(format!("{what} has dimension {d}, node has {}", self.dim)));
            }
        }
        if let (Some(t1), Some(t2)) = (self.t1, self.t2) {
            if t2.0 > 2 * t1.0 {
                return Err(invalid(format!("T2 = {t2} exceeds 2·T1 = {}", Duration(2 * t1.0))));
            }
        } else if self.t1.is_some() && self.t2.is_none() {
            return Err(invalid("finite T1 requires a finite T2 ≤ 2·T1".into()));
        }
        let flipped = self.initial_state.conjugate(&self.flip_unitary.unitary_as::<f64>());
        let overlap = flipped.overlap(self.initial_state.matrix());
        if overlap.abs() >= FLIP_TOL {
            return Err(invalid(format!("flip gate is not orthogonalizing (overlap {overlap:e})")));
        }
        Ok(())
    }

    /// Memory decoherence over `t` with this node's lifetimes.
    pub fn memory_channel(&self, t: Duration) -> Result<Channel, ChannelError> {
        if self.t1.is_none() && self.t2.is_none() || t == Duration::ZERO {
            return Ok(Channel::identity(self.dim));
        }
        if self.dim != 2 {
            return Err(ChannelError::UnsupportedDimension(self.dim));
        }
        channels::decoherence_channel(t.0 as f64, self.t1.map(|v| v.0 as f64), self.t2.map(|v| v.0 as f64))
    }
}

/// How a directed link's noise is specified.
#[derive(Debug, Clone)]
pub enum LinkChannel {
    Explicit(Channel),
    /// Teleportation through this resource state (first factor at the sender).
    Teleportation(DensityMatrix),
    Depolarizing(f64),
}

impl LinkChannel {
    pub fn resolve(&self, dim: usize) -> Result<Channel, ChannelError> {
        match self {
            LinkChannel::Explicit(ch) => Ok(ch.clone()),
            LinkChannel::Teleportation(resource) => channels::teleportation_channel(resource),
            LinkChannel::Depolarizing(f) => channels::depolarizing_channel(dim, *f),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LinkConfig {
    pub from: String,
    pub to: String,
    pub channel: LinkChannel,
    /// Time the qubit spends in transit. The sender's memory decoherence over this interval
    /// is applied before the link channel; zero by default.
    pub transmit_duration: Duration,
}

impl LinkConfig {
    pub fn new(from: impl Into<String>, to: impl Into<String>, channel: LinkChannel) -> Self {
        Self { from: from.into(), to: to.into(), channel, transmit_duration: Duration::ZERO }
    }
}

#[derive(Debug, Clone)]
struct Node {
    config: NodeConfig,
    /// `Λ^SP(ρ_A)`.
    prepared: DensityMatrix,
    /// Decoherence over one gate after `Λ^U`.
    gate_step: Channel,
    /// `Λ^M†(E)`.
    noisy_effect: Effect,
}

#[derive(Debug, Clone)]
struct Link {
    config: LinkConfig,
    /// Link channel after sender-side transit decoherence.
    effective: Channel,
}

/// Immutable network description; simulations run in a [`Session`].
#[derive(Debug, Clone)]
pub struct Network {
    nodes: BTreeMap<String, Node>,
    links: BTreeMap<(String, String), Link>,
}

impl Network {
    pub fn new(nodes: Vec<NodeConfig>, links: Vec<LinkConfig>) -> Result<Self, NetworkError> {
        let mut node_map = BTreeMap::new();
        for config in nodes {
            config.validate()?;
            let prepared = config.sp_noise.apply(&config.initial_state)?;
            let memory = config.memory_channel(config.gate_duration)?;
            let gate_step = memory.compose(&config.gate_noise)?;
            let noisy_effect = config.meas_noise.apply_dual(&config.effect)?;
            let name = config.name.clone();
            let node = Node { config, prepared, gate_step, noisy_effect };
            if node_map.insert(name.clone(), node).is_some() {
                return Err(NetworkError::DuplicateNode(name));
            }
        }
        let mut link_map = BTreeMap::new();
        for config in links {
            let sender = node_map.get(&config.from).ok_or_else(|| NetworkError::UnknownNode(config.from.clone()))?;
            let receiver = node_map.get(&config.to).ok_or_else(|| NetworkError::UnknownNode(config.to.clone()))?;
            let dim = sender.config.dim;
            if receiver.config.dim != dim {
                return Err(NetworkError::DimensionMismatch { expected: dim, found: receiver.config.dim });
            }
            let channel = config.channel.resolve(dim)?;
            if channel.dim() != dim {
                return Err(NetworkError::DimensionMismatch { expected: dim, found: channel.dim() });
            }
            let transit = sender.config.memory_channel(config.transmit_duration)?;
            let effective = channel.compose(&transit)?;
            let key = (config.from.clone(), config.to.clone());
            if link_map.contains_key(&key) {
                return Err(NetworkError::DuplicateLink { from: key.0, to: key.1 });
            }
            link_map.insert(key, Link { config, effective });
        }
        Ok(Self { nodes: node_map, links: link_map })
    }

    fn node(&self, name: &str) -> Result<&Node, NetworkError> {
        self.nodes.get(name).ok_or_else(|| NetworkError::UnknownNode(name.to_string()))
    }

    fn link(&self, from: &str, to: &str) -> Result<&Link, NetworkError> {
        self.links
            .get(&(from.to_string(), to.to_string()))
            .ok_or_else(|| NetworkError::MissingLink { from: from.to_string(), to: to.to_string() })
    }

    pub fn node_config(&self, name: &str) -> Result<&NodeConfig, NetworkError> {
        Ok(&self.node(name)?.config)
    }

    pub fn link_config(&self, from: &str, to: &str) -> Result<&LinkConfig, NetworkError> {
        Ok(&self.link(from, to)?.config)
    }

    /// The channel a state experiences on `from -> to`, transit decoherence included.
    pub fn link_channel(&self, from: &str, to: &str) -> Result<&Channel, NetworkError> {
        Ok(&self.link(from, to)?.effective)
    }

    /// Noise following each gate at `node`: memory decoherence after `Λ^U`.
    pub fn gate_channel(&self, node: &str) -> Result<&Channel, NetworkError> {
        Ok(&self.node(node)?.gate_step)
    }

    pub fn has_link(&self, from: &str, to: &str) -> bool {
        self.links.contains_key(&(from.to_string(), to.to_string()))
    }

    pub fn node_names(&self) -> impl Iterator<Item = &str> {
        self.nodes.keys().map(String::as_str)
    }

    /// Checks that `path` is a chain with links in both directions between neighbours.
    pub fn check_path(&self, path: &[String]) -> Result<usize, NetworkError> {
        let first = path.first().ok_or_else(|| NetworkError::UnknownNode(String::new()))?;
        let dim = self.node(first)?.config.dim;
        for name in path {
            let d = self.node(name)?.config.dim;
            if d != dim {
                return Err(NetworkError::DimensionMismatch { expected: dim, found: d });
            }
        }
        for pair in path.windows(2) {
            self.link(&pair[0], &pair[1])?;
            self.link(&pair[1], &pair[0])?;
        }
        Ok(dim)
    }

    pub fn session(&self) -> Session<'_> {
        Session { network: self, clock: Duration::ZERO }
    }
}

/// One simulation pass over a [`Network`], owning its logical clock.
#[derive(Debug, Clone)]
pub struct Session<'a> {
    network: &'a Network,
    clock: Duration,
}

impl Session<'_> {
    pub fn clock(&self) -> Duration {
        self.clock
    }

    /// `Λ^SP(ρ_A)`; preparation time is folded into the noise, so the clock does not move.
    pub fn prepare(&self, node: &str) -> Result<DensityMatrix, NetworkError> {
        Ok(self.network.node(node)?.prepared.clone())
    }

    /// `Λ^U(G ρ G†)` followed by memory decoherence over one gate duration.
    pub fn apply_gate(&mut self, node: &str, gate: &CliffordElement, rho: &DensityMatrix) -> Result<DensityMatrix, NetworkError> {
        let n = self.network.node(node)?;
        if gate.unitary().nrows() != rho.dim() || rho.dim() != n.config.dim {
            return Err(NetworkError::DimensionMismatch { expected: n.config.dim, found: rho.dim() });
        }
        let rotated = rho.conjugate(gate.unitary());
        let out = n.gate_step.apply(&rotated)?;
        self.clock = self.clock + n.config.gate_duration;
        Ok(out)
    }

    pub fn transmit(&mut self, from: &str, to: &str, rho: &DensityMatrix) -> Result<DensityMatrix, NetworkError> {
        let link = self.network.link(from, to)?;
        let out = link.effective.apply(rho)?;
        self.clock = self.clock + link.config.transmit_duration;
        Ok(out)
    }

    /// `tr[Λ^M†(E) ρ]`, clamped into `[0, 1]`.
    pub fn measure_expectation(&self, node: &str, rho: &DensityMatrix) -> Result<f64, NetworkError> {
        let n = self.network.node(node)?;
        if rho.dim() != n.config.dim {
            return Err(NetworkError::DimensionMismatch { expected: n.config.dim, found: rho.dim() });
        }
        let p = n.noisy_effect.expectation(rho);
        debug_assert!((-PROB_TOL..=1.0 + PROB_TOL).contains(&p), "probability {p} out of range");
        Ok(p.clamp(0.0, 1.0))
    }
}
