//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use netbench::channels::random::{random_channel, random_density_matrix};
use netbench::channels::{
    bright_state_resource, depolarizing_channel, depolarizing_fidelity, entanglement_fidelity, singlet_fraction,
    teleportation_channel, twirl,
};
use netbench::cliffords::frame_potential_2;
use netbench::estimate::{crb_cost_bound, fit_decay, optimal_bounce_count};
use netbench::network::{LinkChannel, LinkConfig, Network, NodeConfig};
use netbench::protocol::{run_protocol_2node, ProtocolConfig, ShotModel};
use netbench::{Channel, CliffordGroup, DensityMatrix};
use netbench_cli::commands::{run_experiment, run_sweep, sweep_report};
use netbench_cli::config::{ChannelSpec, ExperimentConfig};
use netbench_cli::presets;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = fn() -> Result<String, String>;

fn ensure(ok: bool, detail: String) -> Result<String, String> {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn twirl_equivalence() -> Result<String, String> {
    let group = CliffordGroup::generate(1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n_kraus = rng.random_range(1..=4);
        let ch: Channel = random_channel(2, n_kraus, &mut rng);
        let target = depolarizing_channel(2, depolarizing_fidelity(&ch)).unwrap();
        worst = worst.max(twirl(&ch, &group).unwrap().distance(&target));
    }
    ensure(worst < 1e-9, format!("max entry distance {worst:.2e} over 100 channels"))
}

fn teleportation_chain() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let resource: DensityMatrix = random_density_matrix(4, &mut rng);
        let fe = entanglement_fidelity(&teleportation_channel(&resource).unwrap());
        worst = worst.max((fe - singlet_fraction(&resource).unwrap()).abs());
    }
    let link: Channel = teleportation_channel(&bright_state_resource(0.95).unwrap()).unwrap();
    let fe = entanglement_fidelity(&link);
    let f = depolarizing_fidelity(&link);
    let ok = worst < 1e-10 && (fe - 0.975).abs() < 1e-10 && (f - 0.96667).abs() < 1e-5;
    ensure(ok, format!("max |F_e − F_s| {worst:.2e}; bright state F_e {fe:.12}, f {f:.6}"))
}

fn exact_oracle() -> Result<String, String> {
    let group = CliffordGroup::generate(1).unwrap();
    let nodes = ["A", "B"].iter().map(|n| NodeConfig::noiseless(*n, &group).unwrap()).collect();
    let links = vec![
        LinkConfig::new("A", "B", LinkChannel::Depolarizing(0.9)),
        LinkConfig::new("B", "A", LinkChannel::Depolarizing(0.9)),
    ];
    let net = Network::new(nodes, links).unwrap();
    let cfg = ProtocolConfig::new((1..=20).collect(), 5, 1, ShotModel::Exact, 3);
    let ds = run_protocol_2node(&net, &group, "A", "B", &cfg).unwrap();
    let worst = ds
        .m_values
        .iter()
        .zip(&ds.means)
        .map(|(&m, b)| (b - 0.5 * 0.81f64.powi(m as i32)).abs())
        .fold(0.0, f64::max);
    let f = fit_decay(&ds).unwrap().f;
    ensure(worst < 1e-10 && (f - 0.81).abs() < 1e-9, format!("max |b_m − 0.5·0.81^m| {worst:.2e}; fitted f {f:.12}"))
}

fn noiseless_local() -> Result<String, String> {
    let out = run_experiment(&presets::preset("noiseless-local").unwrap(), None).unwrap();
    let f = out.report.fit.f;
    let target = ((4.0 * 0.975 - 1.0) / 3.0f64).powi(2);
    ensure((f - target).abs() <= 0.01, format!("fitted f {f:.5}, analytic {target:.5}"))
}

fn two_node_hardware() -> Result<String, String> {
    let out = run_experiment(&presets::preset("paper-2node").unwrap(), None).unwrap();
    let fit = &out.report.fit;
    let ci = out.report.bootstrap.as_ref().map(|b| b.ci_f).unwrap_or(fit.ci_f);
    ensure(
        (0.88..=0.92).contains(&fit.f),
        format!("fitted f {:.5} (95% CI {:.5} to {:.5}), window [0.88, 0.92]", fit.f, ci.0, ci.1),
    )
}

const DEPOL_CHAIN: &str = r#"
[chain]
nodes = 6
[chain.link]
channel = { type = "depolarizing", f = 0.93 }
[protocol]
m_values = [1, 2, 3, 5, 8]
sequences = 3
shot_model = "exact"
seed = 5
"#;

fn multinode_decay() -> Result<String, String> {
    let cfg = presets::preset("paper-multinode").unwrap();
    let report = sweep_report(&run_sweep(&cfg, 2, 6, None).unwrap(), cfg.protocol.seed);
    let fs: Vec<f64> = report.rows.iter().map(|r| r.f).collect();
    let monotone = fs.windows(2).all(|w| w[1] < w[0]);
    let k6 = *fs.last().unwrap();

    let exact = ExperimentConfig::from_toml(DEPOL_CHAIN).unwrap();
    let exact_report = sweep_report(&run_sweep(&exact, 2, 6, None).unwrap(), 5);
    let r2 = exact_report.log_f_vs_k.as_ref().unwrap().r_squared;
    let listed: Vec<String> = fs.iter().map(|f| format!("{f:.4}")).collect();
    ensure(
        monotone && (0.50..=0.62).contains(&k6) && r2 > 0.9999,
        format!("f(K=2..6) = [{}]; exact depolarizing chain R² = {r2:.12}", listed.join(", ")),
    )
}

fn spam_robustness() -> Result<String, String> {
    let clean_cfg = presets::preset("paper-2node").unwrap();
    let mut noisy_cfg = clean_cfg.clone();
    for node in &mut noisy_cfg.network.as_mut().unwrap().nodes {
        node.params.sp_noise = ChannelSpec::Depolarizing { f: 0.8 };
        node.params.meas_noise = ChannelSpec::Depolarizing { f: 0.8 };
    }
    let clean = run_experiment(&clean_cfg, None).unwrap().report;
    let noisy = run_experiment(&noisy_cfg, None).unwrap().report;
    let half_width = |r: &netbench_cli::commands::FitReport| {
        let ci = r.bootstrap.as_ref().expect("bootstrap enabled").ci_f;
        0.5 * (ci.1 - ci.0)
    };
    let shift_a = (noisy.fit.a - clean.fit.a).abs() / clean.fit.a;
    let shift_f = (noisy.fit.f - clean.fit.f).abs();
    let hw = half_width(&clean).min(half_width(&noisy));
    ensure(
        shift_a > 0.10 && shift_f < hw,
        format!("A {:.4} -> {:.4} ({:.1}%); f {:.5} -> {:.5}, shift {shift_f:.5} vs half-width {hw:.5}",
            clean.fit.a, noisy.fit.a, 100.0 * shift_a, clean.fit.f, noisy.fit.f),
    )
}

fn statistics() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for f in [0.5, 0.8, 0.9, 0.95, 0.99] {
        let grid_best = (1..=10_000u32)
            .max_by(|&x, &y| {
                let g = |m: u32| m as f64 * f64::powf(f, 2.0 * m as f64 - 2.0);
                g(x).total_cmp(&g(y))
            })
            .unwrap();
        worst = worst.max((optimal_bounce_count(f).unwrap() - grid_best as f64).abs());
    }
    let pts: Vec<(f64, f64)> = [0.1, 0.01, 0.001]
        .iter()
        .map(|&r: &f64| (r.ln(), (1.0 / crb_cost_bound(1.0 - r, 0.5).unwrap()).ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    ensure(worst <= 1.0 && (slope - 1.0).abs() <= 0.05, format!("max |m* − grid argmax| {worst:.3}; floor log-log slope {slope:.4}"))
}

fn group_correctness() -> Result<String, String> {
    let one = CliffordGroup::generate(1).unwrap();
    let two = CliffordGroup::generate(2).unwrap();
    let fp = frame_potential_2(&one);
    ensure(
        one.len() == 24 && two.len() == 11520 && (fp - 2.0).abs() < 1e-9,
        format!("|C1| = {}, |C2| = {}, frame potential {fp:.12}", one.len(), two.len()),
    )
}

fn determinism() -> Result<String, String> {
    let exe = env!("CARGO_BIN_EXE_netbench");
    let dir = tempfile::tempdir().unwrap();
    let mut checked = Vec::new();
    for name in presets::names() {
        let mut reference: Option<Vec<u8>> = None;
        for jobs in ["1", "3", "8"] {
            let out = dir.path().join(format!("{name}-{jobs}"));
            let status = Command::new(exe)
                .args(["run", "--preset", name, "--seed", "99", "--jobs", jobs, "--bootstrap", "0", "--out-dir"])
                .arg(&out)
                .output()
                .unwrap();
            if !status.status.success() {
                return Err(format!("{name}: {}", String::from_utf8_lossy(&status.stderr)));
            }
            let csv = std::fs::read(out.join("decay.csv")).unwrap();
            match &reference {
                None => reference = Some(csv),
                Some(r) if *r != csv => return Err(format!("{name}: decay.csv differs with --jobs {jobs}")),
                _ => {}
            }
        }
        checked.push(name);
    }
    Ok(format!("identical decay.csv for --jobs 1, 3, 8 on {}", checked.join(", ")))
}

fn main() {
    let criteria: [(&str, Check, u64); 10] = [
        ("twirl equals depolarizing channel", twirl_equivalence, 10),
        ("teleportation fidelity chain", teleportation_chain, 10),
        ("exact-mode oracle", exact_oracle, 30),
        ("noiseless-local teleportation", noiseless_local, 120),
        ("two-node hardware regime", two_node_hardware, 300),
        ("multi-node decay", multinode_decay, 600),
        ("SPAM robustness", spam_robustness, 180),
        ("statistics", statistics, 5),
        ("group correctness", group_correctness, 120),
        ("determinism", determinism, 120),
    ];
    let mut failures = 0;
    for (i, (name, check, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let result = match result {
            Ok(detail) if elapsed > Duration::from_secs(limit) => Err(format!("{detail}; too slow (limit {limit} s)")),
            r => r,
        };
        let (tag, detail) = match &result {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        if result.is_err() {
            failures += 1;
        }
        println!("{tag} {:>2} {name}: {detail} [{:.2} s]", i + 1, elapsed.as_secs_f64());
    }
    println!("acceptance: {} of 10 passed", 10 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
