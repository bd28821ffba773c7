//! Executors for the 2-node and multi-node network benchmarking protocols.
//!
//! One bounce over a path `A_1 … A_K` applies a random gate at each of `A_1 … A_{K−1}`
//! before hopping forward, then a random gate at each of `A_K … A_2` before hopping back.
//! After `m` bounces node `A_1` applies `P_A·(ideal product)†` and measures `{E, 1 − E}`;
//! outcomes of sequences ending with `P_A = P` are negated.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cliffords::{CliffordError, CliffordGroup};
use crate::network::{Network, NetworkError};
use crate::seed::derive_seed;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Clifford(#[from] CliffordError),
    #[error("path needs at least two nodes, got {0}")]
    PathTooShort(usize),
    #[error("group acts on dimension {group}, nodes on {nodes}")]
    GroupDimension { group: usize, nodes: usize },
    #[error("invalid protocol setting: {0}")]
    InvalidSetting(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed dataset: {0}")]
    Malformed(String),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ShotModel {
    /// Noise-free expectation values; the flip coin is averaged analytically.
    Exact,
    /// Gaussian approximation with variance `p(1 − p)/shots`.
    #[default]
    Gaussian,
    /// Binomial counts.
    Binomial,
}

impl std::str::FromStr for ShotModel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(ShotModel::Exact),
            "gaussian" => Ok(ShotModel::Gaussian),
            "binomial" => Ok(ShotModel::Binomial),
            other => Err(format!("unknown shot model {other:?} (exact, gaussian, binomial)")),
        }
    }
}

/// Where the `P_A ∈ {1, P}` coin is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum FlipMode {
    /// One coin per random sequence.
    #[default]
    PerSequence,
    /// A fresh coin for every shot of a sequence.
    PerShot,
}

impl std::str::FromStr for FlipMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "per-sequence" => Ok(FlipMode::PerSequence),
            "per-shot" => Ok(FlipMode::PerShot),
            other => Err(format!("unknown flip mode {other:?} (per-sequence, per-shot)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub m_values: Vec<u32>,
    pub sequences: usize,
    pub shots: u64,
    pub shot_model: ShotModel,
    pub flip_mode: FlipMode,
    pub master_seed: u64,
    /// Worker threads; `None` uses the global pool. Never affects results.
    #[serde(skip)]
    pub jobs: Option<usize>,
}

impl ProtocolConfig {
    pub fn new(m_values: Vec<u32>, sequences: usize, shots: u64, shot_model: ShotModel, master_seed: u64) -> Self {
        Self { m_values, sequences, shots, shot_model, flip_mode: FlipMode::PerSequence, master_seed, jobs: None }
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        if self.m_values.is_empty() {
            return Err(ProtocolError::InvalidSetting("empty list of bounce counts".into()));
        }
        if self.sequences == 0 {
            return Err(ProtocolError::InvalidSetting("need at least one sequence per m".into()));
        }
        if self.shots == 0 {
            return Err(ProtocolError::InvalidSetting("need at least one shot per sequence".into()));
        }
        if self.jobs == Some(0) {
            return Err(ProtocolError::InvalidSetting("jobs must be positive".into()));
        }
        Ok(())
    }
}

/// One random sequence: gate indices in application order and the ending-gate coin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceSpec {
    pub m: u32,
    /// `2·m·(K − 1)` group indices, bounce by bounce, forward hops before backward hops.
    pub gate_indices: Vec<usize>,
    pub flip_chosen: bool,
    pub seed: u64,
}

impl SequenceSpec {
    /// Draws the gates, then the coin, from a stream seeded by `seed`; returns the stream
    /// so shot noise continues from the same source.
    pub fn random(m: u32, path_len: usize, group: &CliffordGroup, seed: u64) -> Result<(Self, ChaCha8Rng), ProtocolError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 2 * m as usize * path_len.saturating_sub(1);
        let gate_indices = (0..n).map(|_| group.sample(&mut rng).map(|e| e.index())).collect::<Result<_, _>>()?;
        let flip_chosen = rng.random_bool(0.5);
        Ok((Self { m, gate_indices, flip_chosen, seed }, rng))
    }
}

/// The two measurement expectations of a sequence, for `P_A = 1` and `P_A = P`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequenceOutcome {
    pub p_keep: f64,
    pub p_flip: f64,
}

impl SequenceOutcome {
    /// Coin-averaged signed expectation `½(p₊ − p₋)`.
    pub fn expected(&self) -> f64 {
        0.5 * (self.p_keep - self.p_flip)
    }

    /// Signed expectation of one coin branch.
    pub fn branch(&self, flip: bool) -> f64 {
        if flip {
            -self.p_flip
        } else {
            self.p_keep
        }
    }
}

fn check_path(network: &Network, group: &CliffordGroup, path: &[String]) -> Result<(), ProtocolError> {
    if path.len() < 2 {
        return Err(ProtocolError::PathTooShort(path.len()));
    }
    let dim = network.check_path(path)?;
    if dim != group.dim() {
        return Err(ProtocolError::GroupDimension { group: group.dim(), nodes: dim });
    }
    Ok(())
}

/// Simulates one sequence on the density-matrix level and returns both coin branches.
pub fn run_sequence(
    network: &Network,
    group: &CliffordGroup,
    path: &[String],
    spec: &SequenceSpec,
) -> Result<SequenceOutcome, ProtocolError> {
    check_path(network, group, path)?;
    let k = path.len();
    let expected = 2 * spec.m as usize * (k - 1);
    if spec.gate_indices.len() != expected {
        return Err(ProtocolError::InvalidSetting(format!(
            "sequence has {} gates, expected {expected}",
            spec.gate_indices.len()
        )));
    }
    let origin = path[0].as_str();
    let mut session = network.session();
    let mut rho = session.prepare(origin)?;
    let mut gates = spec.gate_indices.iter();
    for _ in 0..spec.m {
        for hop in 0..k - 1 {
            let g = group.element(*gates.next().expect("length checked"))?;
            rho = session.apply_gate(&path[hop], g, &rho)?;
            rho = session.transmit(&path[hop], &path[hop + 1], &rho)?;
        }
        for hop in (1..k).rev() {
            let g = group.element(*gates.next().expect("length checked"))?;
            rho = session.apply_gate(&path[hop], g, &rho)?;
            rho = session.transmit(&path[hop], &path[hop - 1], &rho)?;
        }
    }
    let inverse = if spec.gate_indices.is_empty() {
        group.element(0)?.unitary().clone()
    } else {
        group.invert_sequence(spec.gate_indices.iter().copied())?.unitary().clone()
    };
    let flip = network.node_config(origin)?.flip_unitary.unitary();
    let keep_gate = group.element(group.index_of(&inverse).ok_or(CliffordError::LookupMiss)?)?;
    let flip_gate = group.element(group.index_of(&(flip * &inverse)).ok_or(CliffordError::LookupMiss)?)?;

    let mut keep_session = session.clone();
    let rho_keep = keep_session.apply_gate(origin, keep_gate, &rho)?;
    let p_keep = keep_session.measure_expectation(origin, &rho_keep)?;
    let rho_flip = session.apply_gate(origin, flip_gate, &rho)?;
    let p_flip = session.measure_expectation(origin, &rho_flip)?;
    Ok(SequenceOutcome { p_keep, p_flip })
}

pub fn run_sequence_2node(
    network: &Network,
    group: &CliffordGroup,
    node_a: &str,
    node_b: &str,
    spec: &SequenceSpec,
) -> Result<SequenceOutcome, ProtocolError> {
    run_sequence(network, group, &[node_a.to_string(), node_b.to_string()], spec)
}

/// Sample mean of `shots` outcomes of a sequence whose signed expectation is `p_signed`
/// (negative for the flipped branch). Results stay in `[−1, 1]`.
pub fn apply_shot_noise<G: Rng + ?Sized>(p_signed: f64, shots: u64, model: ShotModel, rng: &mut G) -> Result<f64, ProtocolError> {
    if shots == 0 {
        return Err(ProtocolError::InvalidSetting("shots must be at least 1".into()));
    }
    if p_signed.is_nan() || p_signed.abs() > 1.0 {
        return Err(ProtocolError::InvalidSetting(format!("signed probability {p_signed} outside [-1, 1]")));
    }
    let sign = if p_signed.is_sign_negative() { -1.0 } else { 1.0 };
    let p = p_signed.abs();
    let noisy = match model {
        ShotModel::Exact => p,
        ShotModel::Gaussian => {
            let z: f64 = rng.sample(StandardNormal);
            (p + z * (p * (1.0 - p) / shots as f64).sqrt()).clamp(0.0, 1.0)
        }
        ShotModel::Binomial => {
            let k = Binomial::new(shots, p).expect("p in [0, 1]").sample(rng);
            k as f64 / shots as f64
        }
    };
    // `+ 0.0` turns a negated zero into a positive one
    Ok(sign * noisy + 0.0)
}

/// Sample mean when every shot draws its own coin.
fn per_shot_mean<G: Rng + ?Sized>(outcome: &SequenceOutcome, shots: u64, model: ShotModel, rng: &mut G) -> f64 {
    match model {
        ShotModel::Exact => outcome.expected(),
        ShotModel::Gaussian => {
            let mean = outcome.expected();
            let second = 0.5 * (outcome.p_keep + outcome.p_flip);
            let var = (second - mean * mean).max(0.0) / shots as f64;
            let z: f64 = rng.sample(StandardNormal);
            (mean + z * var.sqrt()).clamp(-1.0, 1.0)
        }
        ShotModel::Binomial => {
            let kept = Binomial::new(shots, 0.5).expect("valid").sample(rng);
            let plus = Binomial::new(kept, outcome.p_keep).expect("valid").sample(rng);
            let minus = Binomial::new(shots - kept, outcome.p_flip).expect("valid").sample(rng);
            (plus as f64 - minus as f64) / shots as f64
        }
    }
}

/// Per-sequence result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceRecord {
    pub m: u32,
    pub sequence_index: usize,
    pub seed: u64,
    pub b_value: f64,
    /// Coin outcome; `None` in exact mode (coin averaged) or for loaded data.
    #[serde(default)]
    pub flip_chosen: Option<bool>,
    /// Exact branch expectations, when the run was simulated here.
    #[serde(default)]
    pub outcome: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayDataset {
    pub path: Vec<String>,
    pub m_values: Vec<u32>,
    pub sequences: usize,
    pub shots: u64,
    pub shot_model: ShotModel,
    pub flip_mode: FlipMode,
    pub master_seed: u64,
    /// `b_m`, aligned with `m_values`.
    pub means: Vec<f64>,
    pub records: Vec<SequenceRecord>,
}

impl DecayDataset {
    /// Recomputes `means` from the records.
    pub fn from_records(
        path: Vec<String>,
        m_values: Vec<u32>,
        shots: u64,
        shot_model: ShotModel,
        flip_mode: FlipMode,
        master_seed: u64,
        records: Vec<SequenceRecord>,
    ) -> Result<Self, ProtocolError> {
        let mut means = Vec::with_capacity(m_values.len());
        let mut sequences = None;
        for &m in &m_values {
            let vals: Vec<f64> = records.iter().filter(|r| r.m == m).map(|r| r.b_value).collect();
            if vals.is_empty() {
                return Err(ProtocolError::Malformed(format!("no sequences for m = {m}")));
            }
            match sequences {
                None => sequences = Some(vals.len()),
                Some(n) if n != vals.len() => {
                    return Err(ProtocolError::Malformed(format!("m = {m} has {} sequences, expected {n}", vals.len())))
                }
                _ => {}
            }
            means.push(vals.iter().sum::<f64>() / vals.len() as f64);
        }
        if let Some(r) = records.iter().find(|r| r.b_value.is_nan() || r.b_value.abs() > 1.0) {
            return Err(ProtocolError::Malformed(format!("value {} outside [-1, 1]", r.b_value)));
        }
        Ok(Self {
            path,
            m_values,
            sequences: sequences.unwrap_or(0),
            shots,
            shot_model,
            flip_mode,
            master_seed,
            means,
            records,
        })
    }

    /// Per-sequence values grouped by `m`, aligned with `m_values`.
    pub fn values_by_m(&self) -> Vec<Vec<f64>> {
        self.m_values
            .iter()
            .map(|&m| self.records.iter().filter(|r| r.m == m).map(|r| r.b_value).collect())
            .collect()
    }

    pub fn records_for(&self, m: u32) -> impl Iterator<Item = &SequenceRecord> {
        self.records.iter().filter(move |r| r.m == m)
    }

    /// CSV with columns `m,sequence_index,seed,b_value`; values use 17 significant digits.
    /// A leading `#` line carries the provenance string when one is given.
    pub fn write_csv<W: Write>(&self, mut out: W, provenance: Option<&str>) -> Result<(), ProtocolError> {
        if let Some(p) = provenance {
            writeln!(out, "# {p}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["m", "sequence_index", "seed", "b_value"])?;
        for r in &self.records {
            w.write_record([
                r.m.to_string(),
                r.sequence_index.to_string(),
                r.seed.to_string(),
                format!("{:.16e}", r.b_value),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the CSV written by [`write_csv`](Self::write_csv). Run metadata not present in
    /// the file is supplied by the caller.
    pub fn read_csv<R: Read>(input: R, shots: u64, shot_model: ShotModel) -> Result<Self, ProtocolError> {
        let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
        let mut records = Vec::new();
        let mut m_values = Vec::new();
        for row in reader.records() {
            let row = row?;
            if row.len() != 4 {
                return Err(ProtocolError::Malformed(format!("expected 4 columns, found {}", row.len())));
            }
            let parse_err = |what: &str| ProtocolError::Malformed(format!("bad {what} in row {:?}", row));
            let m: u32 = row[0].parse().map_err(|_| parse_err("m"))?;
            let record = SequenceRecord {
                m,
                sequence_index: row[1].parse().map_err(|_| parse_err("sequence_index"))?,
                seed: row[2].parse().map_err(|_| parse_err("seed"))?,
                b_value: row[3].parse().map_err(|_| parse_err("b_value"))?,
                flip_chosen: None,
                outcome: None,
            };
            if !m_values.contains(&m) {
                m_values.push(m);
            }
            records.push(record);
        }
        Self::from_records(Vec::new(), m_values, shots, shot_model, FlipMode::PerSequence, 0, records)
    }
}

fn evaluate_record(
    network: &Network,
    group: &CliffordGroup,
    path: &[String],
    config: &ProtocolConfig,
    m: u32,
    sequence_index: usize,
) -> Result<SequenceRecord, ProtocolError> {
    let seed = derive_seed(config.master_seed, &[m as u64, sequence_index as u64]);
    let (spec, mut rng) = SequenceSpec::random(m, path.len(), group, seed)?;
    let outcome = run_sequence(network, group, path, &spec)?;
    let (b_value, flip_chosen) = match (config.shot_model, config.flip_mode) {
        (ShotModel::Exact, _) => (outcome.expected(), None),
        (model, FlipMode::PerSequence) => {
            let signed = outcome.branch(spec.flip_chosen);
            (apply_shot_noise(signed, config.shots, model, &mut rng)?, Some(spec.flip_chosen))
        }
        (model, FlipMode::PerShot) => (per_shot_mean(&outcome, config.shots, model, &mut rng), None),
    };
    Ok(SequenceRecord {
        m,
        sequence_index,
        seed,
        b_value,
        flip_chosen,
        outcome: Some((outcome.p_keep, outcome.p_flip)),
    })
}

/// Runs the protocol along `path` (`K ≥ 2` nodes). Sequences are independent work items
/// seeded from `(master_seed, m, index)`, so results do not depend on the worker count.
pub fn run_protocol_multinode(
    network: &Network,
    group: &CliffordGroup,
    path: &[String],
    config: &ProtocolConfig,
) -> Result<DecayDataset, ProtocolError> {
    config.validate()?;
    check_path(network, group, path)?;
    let tasks: Vec<(u32, usize)> = config
        .m_values
        .iter()
        .flat_map(|&m| (0..config.sequences).map(move |n| (m, n)))
        .collect();
    let run = || -> Result<Vec<SequenceRecord>, ProtocolError> {
        tasks
            .par_iter()
            .map(|&(m, n)| evaluate_record(network, group, path, config, m, n))
            .collect()
    };
    let records = match config.jobs {
        Some(1) => tasks
            .iter()
            .map(|&(m, n)| evaluate_record(network, group, path, config, m, n))
            .collect::<Result<Vec<_>, _>>()?,
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| ProtocolError::ThreadPool(e.to_string()))?
            .install(run)?,
        None => run()?,
    };
    DecayDataset::from_records(
        path.to_vec(),
        config.m_values.clone(),
        config.shots,
        config.shot_model,
        config.flip_mode,
        config.master_seed,
        records,
    )
}

pub fn run_protocol_2node(
    network: &Network,
    group: &CliffordGroup,
    node_a: &str,
    node_b: &str,
    config: &ProtocolConfig,
) -> Result<DecayDataset, ProtocolError> {
    run_protocol_multinode(network, group, &[node_a.to_string(), node_b.to_string()], config)
}
