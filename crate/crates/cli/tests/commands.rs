use std::fs;
use std::process::Command;

use netbench_cli::commands::{plan_report, run_experiment, run_sweep, sweep_report, write_run};
use netbench_cli::config::{ExperimentConfig, MValues};
use netbench_cli::presets;

fn netbench() -> Command {
    Command::new(env!("CARGO_BIN_EXE_netbench"))
}

#[test]
fn every_preset_parses_and_builds() {
    for name in presets::names() {
        presets::preset(name).unwrap().build().unwrap();
    }
    assert!(presets::preset("nope").is_err());
}

#[test]
fn noiseless_preset_is_flat() {
    let out = run_experiment(&presets::preset("noiseless").unwrap(), None).unwrap();
    assert!(out.dataset.means.iter().all(|&b| (b - 0.5).abs() < 1e-12));
    assert!((out.report.fit.f - 1.0).abs() < 1e-9);
    assert!((out.report.fit.a - 0.5).abs() < 1e-9);
}

#[test]
fn depolarizing_preset_recovers_product() {
    let out = run_experiment(&presets::preset("depol-0.81").unwrap(), None).unwrap();
    let ci = out.report.bootstrap.as_ref().unwrap().ci_f;
    assert!(ci.0 - 0.005 <= 0.81 && 0.81 <= ci.1 + 0.005, "{ci:?}");
    assert!((out.report.fit.f - 0.81).abs() < 0.03);
}

#[test]
fn sweep_at_two_nodes_matches_run() {
    let cfg = presets::preset("paper-multinode").unwrap();
    let runs = run_sweep(&cfg, 2, 2, None).unwrap();
    let single = run_experiment(&cfg.with_chain_length(2).unwrap(), None).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_run(&dir.path().join("sweep"), &runs[0].1).unwrap();
    write_run(&dir.path().join("run"), &single).unwrap();
    let a = fs::read(dir.path().join("sweep/decay.csv")).unwrap();
    let b = fs::read(dir.path().join("run/decay.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn sweep_regression_on_exact_chain() {
    let cfg = ExperimentConfig::from_toml(
        r#"
        [chain]
        nodes = 4
        [chain.link]
        channel = { type = "depolarizing", f = 0.9 }
        [protocol]
        m_values = [1, 2, 4]
        sequences = 2
        shot_model = "exact"
        "#,
    )
    .unwrap();
    let report = sweep_report(&run_sweep(&cfg, 2, 4, None).unwrap(), 0);
    let fit = report.log_f_vs_k.unwrap();
    assert!((fit.slope - 2.0 * 0.9f64.ln()).abs() < 1e-9);
    assert!(fit.r_squared > 1.0 - 1e-12);
}

#[test]
fn plan_examples() {
    assert!((plan_report(0.9, 0.5, None).unwrap().report.m_star - 4.746).abs() < 1e-3);
    assert!((plan_report(0.99, 0.5, None).unwrap().report.m_star - 49.75).abs() < 0.01);
    assert!(plan_report(1.0, 0.5, None).is_err());
    assert!(plan_report(1.2, 0.5, None).is_err());
}

#[test]
fn m_grid_syntax() {
    assert_eq!(MValues::parse("1,2,5").unwrap().values().unwrap(), vec![1, 2, 5]);
    assert_eq!(MValues::parse("1..4").unwrap().values().unwrap(), vec![1, 2, 3, 4]);
    assert_eq!(MValues::parse("2..10:4").unwrap().values().unwrap(), vec![2, 6, 10]);
    let geo = MValues::Geometric { start: 1, end: 20, factor: 2.0 };
    assert_eq!(geo.values().unwrap(), vec![1, 2, 4, 8, 16]);
    assert!(MValues::parse("a,b").is_err());
}

#[test]
fn explicit_kraus_and_two_qubit_configs() {
    let text = r#"
        [[network.nodes]]
        name = "A"
        gate_noise = { type = "kraus", operators = [
            [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.8660254037844386, 0.0]]],
            [[[0.0, 0.0], [0.5, 0.0]], [[0.0, 0.0], [0.0, 0.0]]],
        ] }
        [[network.nodes]]
        name = "B"
        [[network.links]]
        from = "A"
        to = "B"
        channel = { type = "amplitude-damping", gamma = 0.1 }
        [[network.links]]
        from = "B"
        to = "A"
        channel = { type = "teleportation", resource = [
            [[0.5, 0.0], [0.0, 0.0], [0.0, 0.0], [0.5, 0.0]],
            [[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
            [[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
            [[0.5, 0.0], [0.0, 0.0], [0.0, 0.0], [0.5, 0.0]],
        ] }
        [protocol]
        m_values = [1, 2, 3]
        sequences = 2
        shot_model = "exact"
    "#;
    ExperimentConfig::from_toml(text).unwrap().build().unwrap();

    let two = r#"
        qubits = 2
        [chain]
        nodes = 2
        [chain.link]
        channel = { type = "depolarizing", f = 0.95 }
        [protocol]
        m_values = [1, 2, 3]
        sequences = 2
        shot_model = "exact"
    "#;
    let out = run_experiment(&ExperimentConfig::from_toml(two).unwrap(), None).unwrap();
    assert!((out.report.fit.f - 0.9025).abs() < 1e-9);
    assert_eq!(out.report.dim, 4);
}

#[test]
fn invalid_configs_are_rejected() {
    let base = |link: &str, node_extra: &str| {
        format!(
            "[chain]\nnodes = 2\n[chain.node]\n{node_extra}\n[chain.link]\nchannel = {link}\n[protocol]\nm_values = [1, 2, 3]\nsequences = 2\n"
        )
    };
    let cases = [
        base("{ type = \"depolarizing\", f = 1.5 }", ""),
        base("{ type = \"warp\" }", ""),
        base("{ type = \"teleportation\" }", ""),
        base("{ type = \"identity\" }", "t1 = \"1ms\"\nt2 = \"3ms\""),
        base("{ type = \"identity\" }", "gate_duration = \"39\""),
        base("{ type = \"identity\" }", "gate_duration = \"inf\""),
        "[protocol]\nm_values = [1]\nsequences = 1\n".to_string(),
    ];
    for text in cases {
        let parsed = ExperimentConfig::from_toml(&text).and_then(|c| c.build().map(|_| ()));
        assert!(parsed.is_err(), "accepted:\n{text}");
    }
}

#[test]
fn binary_writes_outputs_with_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let status = netbench()
        .args(["run", "--preset", "depol-0.81", "--seed", "5", "--m-list", "1..10", "--sequences", "8", "--out-dir"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let stdout = String::from_utf8(status.stdout).unwrap();
    assert!(stdout.contains("F_avg") && stdout.contains("95% CI"));

    let mut cfg = presets::preset("depol-0.81").unwrap();
    cfg.protocol.seed = 5;
    cfg.protocol.m_values = MValues::parse("1..10").unwrap();
    cfg.protocol.sequences = 8;
    let hash = cfg.config_hash();
    for file in ["decay.csv", "decay.json", "fit.json", "summary.txt"] {
        let text = fs::read_to_string(out.join(file)).unwrap();
        assert!(text.contains(&hash), "{file} lacks the config hash");
        assert!(text.contains('5'), "{file} lacks the seed");
    }
    let fit: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("fit.json")).unwrap()).unwrap();
    assert_eq!(fit["master_seed"], 5);
    assert!(fit["fit"]["f"].as_f64().unwrap() > 0.7);
}

#[test]
fn binary_sweep_and_plan() {
    let dir = tempfile::tempdir().unwrap();
    let status = netbench()
        .args(["sweep", "--preset", "paper-multinode", "--k-max", "3", "--sequences", "6", "--bootstrap", "0", "--out-dir"])
        .arg(dir.path().join("sweep"))
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let csv = fs::read_to_string(dir.path().join("sweep/sweep.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 3);
    assert!(dir.path().join("sweep/K3/fit.json").exists());

    let status = netbench().args(["plan", "--f", "0.9", "--out-dir"]).arg(dir.path().join("plan")).output().unwrap();
    assert!(status.status.success());
    assert!(String::from_utf8(status.stdout).unwrap().contains("4.746"));
    assert!(fs::read_to_string(dir.path().join("plan/plan.csv")).unwrap().lines().count() > 100);

    let bad = netbench().args(["plan", "--f", "1.0"]).output().unwrap();
    assert!(!bad.status.success());
}

#[test]
fn binary_reports_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("flat.toml");
    fs::write(&cfg, "[chain]\nnodes = 2\n[chain.link]\nchannel = { type = \"depolarizing\", f = 0.0 }\n[protocol]\nm_values = [1, 2, 3]\nsequences = 2\nshot_model = \"exact\"\n").unwrap();
    let out = netbench().args(["run", "--config"]).arg(&cfg).arg("--out-dir").arg(dir.path()).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no signal"));

    let missing = netbench().args(["run", "--config", "/nonexistent.toml"]).output().unwrap();
    assert!(!missing.status.success());
    let unknown = netbench().args(["run", "--preset", "warp"]).output().unwrap();
    assert!(!unknown.status.success());
}
