//! TOML experiment description and its translation into a simulated network.

use anyhow::{anyhow, bail, ensure, Context, Result};
use netbench::channels::{
    amplitude_damping, bit_flip, bright_state_resource, depolarizing_channel, pauli_channel, phase_damping,
};
use netbench::network::{Duration, LinkChannel, LinkConfig, Network, NodeConfig};
use netbench::protocol::{FlipMode, ProtocolConfig, ShotModel};
use netbench::{Channel, CliffordGroup, DensityMatrix};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::duration::Span;

/// Complex entry written as `[re, im]`.
pub type ComplexEntry = [f64; 2];
/// Row-major matrix of complex entries.
pub type MatrixSpec = Vec<Vec<ComplexEntry>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "one")]
    pub qubits: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<NetworkSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainSpec>,
    pub protocol: ProtocolSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub nodes: Vec<NodeSpec>,
    pub links: Vec<LinkSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub name: String,
    #[serde(flatten)]
    pub params: NodeParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeParams {
    #[serde(default)]
    pub sp_noise: ChannelSpec,
    #[serde(default)]
    pub meas_noise: ChannelSpec,
    #[serde(default)]
    pub gate_noise: ChannelSpec,
    #[serde(default = "zero_span")]
    pub gate_duration: Span,
    #[serde(default)]
    pub t1: Span,
    #[serde(default)]
    pub t2: Span,
}

impl Default for NodeParams {
    fn default() -> Self {
        Self {
            sp_noise: ChannelSpec::Identity,
            meas_noise: ChannelSpec::Identity,
            gate_noise: ChannelSpec::Identity,
            gate_duration: zero_span(),
            t1: Span::Infinite,
            t2: Span::Infinite,
        }
    }
}

fn zero_span() -> Span {
    Span::Finite(Duration::ZERO)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSpec {
    pub from: String,
    pub to: String,
    #[serde(flatten)]
    pub params: LinkParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkParams {
    pub channel: ChannelSpec,
    #[serde(default = "zero_span")]
    pub transmit_duration: Span,
}

/// Homogeneous line of nodes `N0 … N{K−1}` with identical nodes and links.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpec {
    pub nodes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_min: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[serde(default)]
    pub node: NodeParams,
    pub link: LinkParams,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ChannelSpec {
    #[default]
    Identity,
    Depolarizing {
        f: f64,
    },
    /// Teleportation through the bright-state resource or an explicit two-qubit state.
    Teleportation {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        resource: Option<MatrixSpec>,
    },
    AmplitudeDamping {
        gamma: f64,
    },
    PhaseDamping {
        lambda: f64,
    },
    BitFlip {
        p: f64,
    },
    Pauli {
        probs: [f64; 4],
    },
    Kraus {
        operators: Vec<MatrixSpec>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSpec {
    /// Defaults to every node in declaration order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<Vec<String>>,
    pub m_values: MValues,
    pub sequences: usize,
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default)]
    pub shot_model: ShotModel,
    #[serde(default)]
    pub flip: FlipMode,
    #[serde(default)]
    pub seed: u64,
}

fn default_shots() -> u64 {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MValues {
    List(Vec<u32>),
    Range {
        start: u32,
        end: u32,
        #[serde(default = "one_u32")]
        step: u32,
    },
    Geometric {
        start: u32,
        end: u32,
        factor: f64,
    },
}

fn one_u32() -> u32 {
    1
}

impl MValues {
    pub fn values(&self) -> Result<Vec<u32>> {
        let v = match self {
            MValues::List(v) => v.clone(),
            MValues::Range { start, end, step } => {
                ensure!(*step > 0, "m range step must be positive");
                (*start..=*end).step_by(*step as usize).collect()
            }
            MValues::Geometric { start, end, factor } => {
                ensure!(*start > 0 && *factor > 1.0, "geometric m grid needs start ≥ 1 and factor > 1");
                let mut out = vec![];
                let mut x = *start as f64;
                while x.round() as u32 <= *end {
                    let m = x.round() as u32;
                    if out.last() != Some(&m) {
                        out.push(m);
                    }
                    x *= factor;
                }
                out
            }
        };
        ensure!(!v.is_empty(), "empty m grid");
        Ok(v)
    }

    /// `1,2,5`, `1..20` or `1..20:2`.
    pub fn parse(text: &str) -> Result<Self> {
        if let Some((range, step)) = text.split_once("..").map(|(a, b)| (a, b.split_once(':'))) {
            let start = range.trim().parse().context("bad m range start")?;
            let (end, step) = match step {
                Some((end, step)) => (end, step.trim().parse().context("bad m range step")?),
                None => (text.split_once("..").expect("checked").1, 1),
            };
            return Ok(MValues::Range { start, end: end.trim().parse().context("bad m range end")?, step });
        }
        let list = text
            .split(',')
            .map(|s| s.trim().parse::<u32>().with_context(|| format!("bad m value `{s}`")))
            .collect::<Result<Vec<_>>>()?;
        Ok(MValues::List(list))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
    /// Bootstrap resamples; 0 disables the bootstrap interval.
    #[serde(default = "default_bootstrap")]
    pub bootstrap: usize,
}

fn default_bootstrap() -> usize {
    500
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { out_dir: None, bootstrap: default_bootstrap() }
    }
}

/// A network ready to run together with its gate group and path.
pub struct Experiment {
    pub group: CliffordGroup,
    pub network: Network,
    pub path: Vec<String>,
    pub protocol: ProtocolConfig,
    pub config_hash: String,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<()> {
        ensure!(matches!(self.qubits, 1 | 2), "qubits must be 1 or 2, got {}", self.qubits);
        match (&self.network, &self.chain) {
            (Some(_), Some(_)) => bail!("give either [network] or [chain], not both"),
            (None, None) => bail!("missing [network] or [chain] section"),
            _ => Ok(()),
        }
    }

    /// SHA-256 over everything that influences the simulated data.
    pub fn config_hash(&self) -> String {
        let view = (self.qubits, &self.network, &self.chain, &self.protocol);
        let canonical = serde_json::to_string(&view).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    /// The same experiment on a chain of `k` nodes.
    pub fn with_chain_length(&self, k: usize) -> Result<Self> {
        let mut out = self.clone();
        let chain = out.chain.as_mut().ok_or_else(|| anyhow!("a sweep needs a [chain] section"))?;
        chain.nodes = k;
        out.protocol.path = None;
        Ok(out)
    }

    pub fn build(&self) -> Result<Experiment> {
        self.check()?;
        let group = CliffordGroup::generate(self.qubits)?;
        let d = group.dim();
        let (nodes, links) = match (&self.network, &self.chain) {
            (Some(net), _) => {
                let nodes = net.nodes.iter().map(|n| n.params.node(&n.name, &group)).collect::<Result<Vec<_>>>()?;
                let links = net.links.iter().map(|l| l.params.link(&l.from, &l.to, d)).collect::<Result<Vec<_>>>()?;
                (nodes, links)
            }
            (None, Some(chain)) => {
                ensure!(chain.nodes >= 2, "a chain needs at least 2 nodes");
                let names = chain_names(chain.nodes);
                let nodes = names.iter().map(|n| chain.node.node(n, &group)).collect::<Result<Vec<_>>>()?;
                let mut links = Vec::new();
                for w in names.windows(2) {
                    links.push(chain.link.link(&w[0], &w[1], d)?);
                    links.push(chain.link.link(&w[1], &w[0], d)?);
                }
                (nodes, links)
            }
            (None, None) => unreachable!("checked above"),
        };
        let path = match &self.protocol.path {
            Some(p) => p.clone(),
            None => nodes.iter().map(|n| n.name.clone()).collect(),
        };
        let network = Network::new(nodes, links)?;
        let p = &self.protocol;
        let mut protocol = ProtocolConfig::new(p.m_values.values()?, p.sequences, p.shots, p.shot_model, p.seed);
        protocol.flip_mode = p.flip;
        protocol.validate()?;
        Ok(Experiment { group, network, path, protocol, config_hash: self.config_hash() })
    }
}

pub fn chain_names(k: usize) -> Vec<String> {
    (0..k).map(|i| format!("N{i}")).collect()
}

impl NodeParams {
    fn node(&self, name: &str, group: &CliffordGroup) -> Result<NodeConfig> {
        let d = group.dim();
        let mut node = NodeConfig::noiseless(name, group)?;
        let ctx = |what: &str| format!("node {name}: {what}");
        node.sp_noise = self.sp_noise.resolve(d).with_context(|| ctx("sp_noise"))?;
        node.meas_noise = self.meas_noise.resolve(d).with_context(|| ctx("meas_noise"))?;
        node.gate_noise = self.gate_noise.resolve(d).with_context(|| ctx("gate_noise"))?;
        node.gate_duration = self.gate_duration.finite().ok_or_else(|| anyhow!(ctx("gate_duration must be finite")))?;
        node.t1 = self.t1.finite();
        node.t2 = self.t2.finite();
        Ok(node)
    }
}

impl LinkParams {
    fn link(&self, from: &str, to: &str, d: usize) -> Result<LinkConfig> {
        let channel = match &self.channel {
            ChannelSpec::Depolarizing { f } => LinkChannel::Depolarizing(*f),
            ChannelSpec::Teleportation { alpha, resource } => {
                LinkChannel::Teleportation(teleport_resource(*alpha, resource.as_ref())?)
            }
            other => LinkChannel::Explicit(other.resolve(d)?),
        };
        let mut link = LinkConfig::new(from, to, channel);
        link.transmit_duration =
            self.transmit_duration.finite().ok_or_else(|| anyhow!("link {from}->{to}: transmit_duration must be finite"))?;
        Ok(link)
    }
}

fn teleport_resource(alpha: Option<f64>, resource: Option<&MatrixSpec>) -> Result<DensityMatrix> {
    match (alpha, resource) {
        (Some(a), None) => Ok(bright_state_resource(a)?),
        (None, Some(m)) => Ok(DensityMatrix::new(matrix(m)?)?),
        _ => bail!("teleportation needs exactly one of `alpha` or `resource`"),
    }
}

fn matrix(spec: &MatrixSpec) -> Result<netbench::linalg::CMatrix<f64>> {
    let n = spec.len();
    ensure!(n > 0 && spec.iter().all(|r| r.len() == n), "matrix must be square and non-empty");
    let entries: Vec<(f64, f64)> = spec.iter().flatten().map(|&[re, im]| (re, im)).collect();
    Ok(netbench::linalg::from_rows(n, &entries))
}

impl ChannelSpec {
    pub fn resolve(&self, d: usize) -> Result<Channel> {
        let qubit_only = |name: &str| -> Result<()> {
            ensure!(d == 2, "{name} is defined for a single qubit, node dimension is {d}");
            Ok(())
        };
        Ok(match self {
            ChannelSpec::Identity => Channel::identity(d),
            ChannelSpec::Depolarizing { f } => depolarizing_channel(d, *f)?,
            ChannelSpec::Teleportation { alpha, resource } => {
                qubit_only("teleportation")?;
                netbench::channels::teleportation_channel(&teleport_resource(*alpha, resource.as_ref())?)?
            }
            ChannelSpec::AmplitudeDamping { gamma } => {
                qubit_only("amplitude-damping")?;
                amplitude_damping(*gamma)?
            }
            ChannelSpec::PhaseDamping { lambda } => {
                qubit_only("phase-damping")?;
                phase_damping(*lambda)?
            }
            ChannelSpec::BitFlip { p } => {
                qubit_only("bit-flip")?;
                bit_flip(*p)?
            }
            ChannelSpec::Pauli { probs } => {
                qubit_only("pauli")?;
                pauli_channel(*probs)?
            }
            ChannelSpec::Kraus { operators } => {
                let ops = operators.iter().map(matrix).collect::<Result<Vec<_>>>()?;
                let ch = Channel::from_kraus(ops)?;
                ensure!(ch.dim() == d, "Kraus operators act on dimension {}, node dimension is {d}", ch.dim());
                ch
            }
        })
    }
}
