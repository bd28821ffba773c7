use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use netbench::protocol::{FlipMode, ShotModel};
use netbench_cli::config::{ExperimentConfig, MValues};
use netbench_cli::{cmd_plan, cmd_run, cmd_sweep, presets, Overrides};

#[derive(Parser)]
#[command(name = "netbench", version, about = "Benchmark the links of a simulated noisy quantum network")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and fit its decay.
    Run(ExperimentArgs),
    /// Repeat a chain experiment over a range of node counts.
    Sweep {
        #[command(flatten)]
        experiment: ExperimentArgs,
        #[arg(long)]
        k_min: Option<usize>,
        #[arg(long)]
        k_max: Option<usize>,
    },
    /// Optimal bounce count and Fisher-information curves for a guessed decay.
    Plan {
        #[arg(long)]
        f: f64,
        #[arg(long = "a", default_value_t = 0.5)]
        a: f64,
        #[arg(long)]
        m_max: Option<u32>,
        #[arg(long, default_value = "netbench-out")]
        out_dir: PathBuf,
    },
    /// List presets, or print one as TOML.
    Presets { name: Option<String> },
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// `1,2,5`, `1..20` or `1..20:2`.
    #[arg(long)]
    m_list: Option<String>,
    #[arg(long)]
    sequences: Option<usize>,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(ShotModel))]
    shot_model: Option<ShotModel>,
    /// `per-sequence` or `per-shot`.
    #[arg(long, value_parser = clap::value_parser!(FlipMode))]
    flip: Option<FlipMode>,
    /// Bootstrap resamples (0 disables).
    #[arg(long)]
    bootstrap: Option<usize>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl ExperimentArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                ExperimentConfig::from_toml(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            (None, Some(name)) => presets::preset(name)?,
            (None, None) => bail!("give --config <file> or --preset <name>"),
        };
        let overrides = Overrides {
            seed: self.seed,
            m_values: self.m_list.as_deref().map(MValues::parse).transpose()?,
            sequences: self.sequences,
            shots: self.shots,
            shot_model: self.shot_model,
            flip: self.flip,
            bootstrap: self.bootstrap,
            out_dir: self.out_dir.clone(),
        };
        overrides.apply(&mut cfg);
        if self.jobs == Some(0) {
            bail!("--jobs must be at least 1");
        }
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            cmd_run(&args.load()?, args.jobs)?;
        }
        Command::Sweep { experiment, k_min, k_max } => {
            let cfg = experiment.load()?;
            let range = match (k_min, k_max) {
                (None, None) => None,
                (lo, hi) => {
                    let chain = cfg.chain.as_ref().context("a sweep needs a homogeneous [chain] section")?;
                    Some((lo.or(chain.k_min).unwrap_or(2), hi.or(chain.k_max).unwrap_or(chain.nodes)))
                }
            };
            cmd_sweep(&cfg, range, experiment.jobs)?;
        }
        Command::Plan { f, a, m_max, out_dir } => {
            cmd_plan(f, a, m_max, &out_dir)?;
        }
        Command::Presets { name: None } => {
            for n in presets::names() {
                println!("{n}");
            }
        }
        Command::Presets { name: Some(name) } => print!("{}", presets::preset_source(&name)?),
    }
    Ok(())
}
