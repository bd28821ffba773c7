//! Built-in experiment configurations.

use anyhow::{anyhow, Result};

use crate::config::ExperimentConfig;

pub const PRESETS: &[(&str, &str)] = &[
    ("noiseless", include_str!("../presets/noiseless.toml")),
    ("paper-2node", include_str!("../presets/paper-2node.toml")),
    ("paper-multinode", include_str!("../presets/paper-multinode.toml")),
    ("depol-0.81", include_str!("../presets/depol-0.81.toml")),
    ("noiseless-local", include_str!("../presets/noiseless-local.toml")),
];

pub fn preset_source(name: &str) -> Result<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| *s)
        .ok_or_else(|| anyhow!("unknown preset `{name}`; available: {}", names().join(", ")))
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    ExperimentConfig::from_toml(preset_source(name)?)
}

pub fn names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}
