//! The `run`, `sweep` and `plan` commands and the files they write.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use netbench::estimate::{
    bootstrap_ci, depolarizing_to_average, fit_decay, optimal_bounce_count, plan, symmetric_link_fidelity,
    BootstrapInterval, FitResult, StatReport,
};
use netbench::protocol::{run_protocol_multinode, DecayDataset, FlipMode, ShotModel};
use netbench::seed::derive_seed;
use serde::Serialize;

use crate::config::{ExperimentConfig, MValues};

/// Command-line settings that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub m_values: Option<MValues>,
    pub sequences: Option<usize>,
    pub shots: Option<u64>,
    pub shot_model: Option<ShotModel>,
    pub flip: Option<FlipMode>,
    pub bootstrap: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        let p = &mut cfg.protocol;
        if let Some(v) = self.seed {
            p.seed = v;
        }
        if let Some(v) = &self.m_values {
            p.m_values = v.clone();
        }
        if let Some(v) = self.sequences {
            p.sequences = v;
        }
        if let Some(v) = self.shots {
            p.shots = v;
        }
        if let Some(v) = self.shot_model {
            p.shot_model = v;
        }
        if let Some(v) = self.flip {
            p.flip = v;
        }
        if let Some(v) = self.bootstrap {
            cfg.output.bootstrap = v;
        }
        if let Some(v) = &self.out_dir {
            cfg.output.out_dir = Some(v.display().to_string());
        }
    }
}

pub fn out_dir(cfg: &ExperimentConfig) -> PathBuf {
    PathBuf::from(cfg.output.out_dir.as_deref().unwrap_or("netbench-out"))
}

/// Fidelity of one directed link when both directions are identical.
#[derive(Debug, Clone, Serialize)]
pub struct LinkEstimate {
    pub f_link: f64,
    pub average_fidelity: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub config_hash: String,
    pub master_seed: u64,
    pub path: Vec<String>,
    pub dim: usize,
    pub fit: FitResult,
    pub bootstrap: Option<BootstrapInterval>,
    /// Average fidelity of the depolarizing channel with decay `f`.
    pub average_fidelity: f64,
    pub symmetric_link: Option<LinkEstimate>,
}

pub struct RunOutput {
    pub dataset: DecayDataset,
    pub report: FitReport,
}

pub fn provenance(hash: &str, seed: u64) -> String {
    format!("netbench config_hash={hash} master_seed={seed}")
}

/// Simulates and fits one configured experiment.
pub fn run_experiment(cfg: &ExperimentConfig, jobs: Option<usize>) -> Result<RunOutput> {
    let mut exp = cfg.build()?;
    exp.protocol.jobs = jobs;
    let dataset = run_protocol_multinode(&exp.network, &exp.group, &exp.path, &exp.protocol)?;
    let fit = fit_decay(&dataset).context("fitting the decay")?;
    let resamples = cfg.output.bootstrap;
    let bootstrap = if resamples > 0 && dataset.sequences >= 5 {
        let seed = derive_seed(exp.protocol.master_seed, &[u64::MAX]);
        Some(bootstrap_ci(&dataset, &fit, resamples, seed)?)
    } else {
        None
    };
    let dim = exp.group.dim();
    let symmetric_link = if exp.path.len() == 2 && fit.f > 0.0 {
        symmetric_link_fidelity(fit.f, dim).ok().map(|(f_link, average_fidelity)| LinkEstimate { f_link, average_fidelity })
    } else {
        None
    };
    let report = FitReport {
        config_hash: exp.config_hash,
        master_seed: exp.protocol.master_seed,
        path: exp.path,
        dim,
        average_fidelity: depolarizing_to_average(fit.f, dim),
        fit,
        bootstrap,
        symmetric_link,
    };
    Ok(RunOutput { dataset, report })
}

pub fn decay_csv(out: &RunOutput) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    out.dataset.write_csv(&mut buf, Some(&provenance(&out.report.config_hash, out.report.master_seed)))?;
    Ok(buf)
}

pub fn summary_text(out: &RunOutput) -> String {
    let r = &out.report;
    let mut s = String::new();
    let _ = writeln!(s, "path          {} ({} nodes, d = {})", r.path.join(" -> "), r.path.len(), r.dim);
    let _ = writeln!(s, "f             {:.5}  (95% CI {:.5} to {:.5})", r.fit.f, r.fit.ci_f.0, r.fit.ci_f.1);
    if let Some(b) = &r.bootstrap {
        let _ = writeln!(s, "bootstrap f   {:.5} to {:.5}  ({} resamples)", b.ci_f.0, b.ci_f.1, b.resamples);
    }
    let _ = writeln!(s, "A             {:.5}  (95% CI {:.5} to {:.5})", r.fit.a, r.fit.ci_a.0, r.fit.ci_a.1);
    let _ = writeln!(s, "F_avg         {:.5}", r.average_fidelity);
    if let Some(l) = &r.symmetric_link {
        let _ = writeln!(s, "link f        {:.5}  F_avg {:.5}  (symmetric split)", l.f_link, l.average_fidelity);
    }
    let _ = writeln!(s, "config hash   {}", r.config_hash);
    let _ = writeln!(s, "master seed   {}", r.master_seed);
    s
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

pub fn write_run(dir: &Path, out: &RunOutput) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write(&dir.join("decay.csv"), decay_csv(out)?)?;
    let sidecar = serde_json::json!({
        "config_hash": out.report.config_hash,
        "master_seed": out.report.master_seed,
        "path": out.dataset.path,
        "m_values": out.dataset.m_values,
        "sequences": out.dataset.sequences,
        "shots": out.dataset.shots,
        "shot_model": out.dataset.shot_model,
        "flip_mode": out.dataset.flip_mode,
        "means": out.dataset.means,
    });
    write(&dir.join("decay.json"), serde_json::to_string_pretty(&sidecar)?)?;
    write(&dir.join("fit.json"), serde_json::to_string_pretty(&out.report)?)?;
    write(&dir.join("summary.txt"), summary_text(out))?;
    Ok(())
}

pub fn cmd_run(cfg: &ExperimentConfig, jobs: Option<usize>) -> Result<RunOutput> {
    let out = run_experiment(cfg, jobs)?;
    let dir = out_dir(cfg);
    write_run(&dir, &out)?;
    print!("{}", summary_text(&out));
    println!("wrote         {}", dir.display());
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub k: usize,
    pub f: f64,
    pub se_f: f64,
    pub ci_f: (f64, f64),
    pub a: f64,
    pub config_hash: String,
}

/// Least-squares line through `(K, ln f)`.
#[derive(Debug, Clone, Serialize)]
pub struct LogLinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub master_seed: u64,
    pub rows: Vec<SweepRow>,
    pub log_f_vs_k: Option<LogLinearFit>,
}

pub fn log_linear(points: &[(f64, f64)]) -> Option<LogLinearFit> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|p| p.1 > 0.0).map(|&(x, y)| (x, y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Some(LogLinearFit { slope, intercept, r_squared })
}

/// Runs the configured chain for every length in `k_min..=k_max`.
pub fn run_sweep(cfg: &ExperimentConfig, k_min: usize, k_max: usize, jobs: Option<usize>) -> Result<Vec<(usize, RunOutput)>> {
    ensure!(cfg.chain.is_some(), "a sweep needs a homogeneous [chain] section");
    ensure!(2 <= k_min && k_min <= k_max, "need 2 ≤ k_min ≤ k_max, got {k_min}..{k_max}");
    (k_min..=k_max).map(|k| Ok((k, run_experiment(&cfg.with_chain_length(k)?, jobs)?))).collect()
}

pub fn sweep_report(runs: &[(usize, RunOutput)], master_seed: u64) -> SweepReport {
    let rows: Vec<SweepRow> = runs
        .iter()
        .map(|(k, out)| {
            let fit = &out.report.fit;
            let ci_f = out.report.bootstrap.as_ref().map(|b| b.ci_f).unwrap_or(fit.ci_f);
            SweepRow { k: *k, f: fit.f, se_f: fit.se_f, ci_f, a: fit.a, config_hash: out.report.config_hash.clone() }
        })
        .collect();
    let log_f_vs_k = log_linear(&rows.iter().map(|r| (r.k as f64, r.f)).collect::<Vec<_>>());
    SweepReport { master_seed, rows, log_f_vs_k }
}

pub fn cmd_sweep(cfg: &ExperimentConfig, k_range: Option<(usize, usize)>, jobs: Option<usize>) -> Result<SweepReport> {
    let Some(chain) = &cfg.chain else { bail!("a sweep needs a homogeneous [chain] section") };
    let (k_min, k_max) = k_range.unwrap_or((chain.k_min.unwrap_or(2), chain.k_max.unwrap_or(chain.nodes)));
    let runs = run_sweep(cfg, k_min, k_max, jobs)?;
    let report = sweep_report(&runs, cfg.protocol.seed);
    let dir = out_dir(cfg);
    fs::create_dir_all(&dir)?;
    for (k, out) in &runs {
        write_run(&dir.join(format!("K{k}")), out)?;
    }
    let mut csv = format!("# {}\nK,f,se_f,ci_f_low,ci_f_high,A,config_hash\n", provenance(&cfg.config_hash(), cfg.protocol.seed));
    for r in &report.rows {
        let _ = writeln!(csv, "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}", r.k, r.f, r.se_f, r.ci_f.0, r.ci_f.1, r.a, r.config_hash);
    }
    write(&dir.join("sweep.csv"), csv)?;
    write(&dir.join("sweep.json"), serde_json::to_string_pretty(&report)?)?;
    let mut summary = String::from("K   f         95% CI\n");
    for r in &report.rows {
        let _ = writeln!(summary, "{:<3} {:.5}   {:.5} to {:.5}", r.k, r.f, r.ci_f.0, r.ci_f.1);
    }
    if let Some(fit) = &report.log_f_vs_k {
        let _ = writeln!(summary, "ln f = {:.5} + {:.5}·K   (R² = {:.6})", fit.intercept, fit.slope, fit.r_squared);
    }
    let _ = writeln!(summary, "master seed {}", cfg.protocol.seed);
    write(&dir.join("summary.txt"), &summary)?;
    print!("{summary}");
    println!("wrote {}", dir.display());
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct PlanOutput {
    pub config_hash: String,
    #[serde(flatten)]
    pub report: StatReport,
}

pub fn plan_report(f: f64, a: f64, m_max: Option<u32>) -> Result<PlanOutput> {
    let m_star = optimal_bounce_count(f)?;
    let m_max = m_max.unwrap_or_else(|| ((4.0 * m_star).ceil() as u32).clamp(100, 100_000));
    let report = plan(f, a, m_max)?;
    let view = serde_json::to_string(&(f, a, m_max))?;
    let config_hash = hex::encode(<sha2::Sha256 as sha2::Digest>::digest(view.as_bytes()));
    Ok(PlanOutput { config_hash, report })
}

pub fn cmd_plan(f: f64, a: f64, m_max: Option<u32>, dir: &Path) -> Result<PlanOutput> {
    let out = plan_report(f, a, m_max)?;
    let r = &out.report;
    fs::create_dir_all(dir)?;
    let mut csv = format!("# netbench config_hash={}\nm,fisher_per_sample,fisher_per_cost\n", out.config_hash);
    for ((m, i), c) in r.m_grid.iter().zip(&r.fisher_per_sample).zip(&r.fisher_per_cost) {
        let _ = writeln!(csv, "{m},{i:.16e},{c:.16e}");
    }
    write(&dir.join("plan.csv"), csv)?;
    write(&dir.join("plan.json"), serde_json::to_string_pretty(&out)?)?;
    println!("optimal bounce count   {:.3} (best grid point {})", r.m_star, r.m_star_grid);
    println!("max Fisher per cost    {:.6e}", 1.0 / r.crb_variance_lower_bound);
    println!("variance floor         {:.6e} per transmission", r.crb_variance_lower_bound);
    println!("wrote                  {}", dir.display());
    Ok(out)
}
