use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dstcons(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dstcons"))
        .args(args)
        .current_dir(cwd)
        .env_remove("DSTCONS_WORKERS")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_writes_a_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let out = dstcons(
        &[
            "run", "--operator", "dubois_prade", "--states", "3", "--agents", "100",
            "--evidence-rate", "0.05", "--noise", "0.1", "--seed", "42", "--stride", "10",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "iteration,mean_bel_s1,mean_bel_s2,mean_bel_s3,mean_pl_best"
    );
    assert_eq!(lines.next().unwrap(), "0,0,0,0,1");
    assert!(lines.count() > 10);
}

#[test]
fn run_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.csv", "b.csv"] {
        let out = dstcons(&["run", "--operator", "yager", "--seed", "3", "--out", name], dir.path());
        assert!(out.status.success());
    }
    assert_eq!(
        fs::read(dir.path().join("a.csv")).unwrap(),
        fs::read(dir.path().join("b.csv")).unwrap()
    );
}

#[test]
fn unknown_operator_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dstcons(&["run", "--operator", "bogus"], dir.path());
    assert!(!out.status.success());
    assert!(stderr(&out).contains("unknown operator"), "{}", stderr(&out));
}

#[test]
fn out_of_range_parameters_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["run", "--evidence-rate", "1.5"][..],
        &["run", "--noise", "-1"],
        &["run", "--states", "1"],
        &["sweep", "--runs", "0"],
        &["sweep", "--evidence-rate", "2"],
    ] {
        let out = dstcons(args, dir.path());
        assert!(!out.status.success(), "{args:?} succeeded");
        assert!(!stderr(&out).is_empty());
    }
}

#[test]
fn malformed_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "operators = [\"dempster\"\nk = \n").unwrap();
    fs::write(dir.path().join("unknown.toml"), "agents = 3\n").unwrap();
    for file in ["bad.toml", "unknown.toml", "missing.toml"] {
        let out = dstcons(&["sweep", "--config", file], dir.path());
        assert!(!out.status.success(), "{file}");
        assert!(stderr(&out).contains(file), "{}", stderr(&out));
    }
}

#[test]
fn sweep_from_config_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("sweep.toml"),
        "operators = [\"dempster\"]\nr_values = [0.01, 0.3]\nsigma_values = [0.1]\nk = 20\nruns_per_cell = 5\nroot_seed = 4\n",
    )
    .unwrap();
    let args = [
        "sweep", "--config", "sweep.toml", "--operator", "dubois_prade,yager", "--runs", "2",
        "--max-iterations", "800",
    ];
    let mut outputs = Vec::new();
    for (out_name, workers) in [("one.csv", "1"), ("eight.csv", "8")] {
        let mut a = args.to_vec();
        a.extend(["--out", out_name, "--workers", workers]);
        let out = dstcons(&a, dir.path());
        assert!(out.status.success(), "{}", stderr(&out));
        outputs.push(fs::read_to_string(dir.path().join(out_name)).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let lines: Vec<&str> = outputs[0].lines().collect();
    assert_eq!(lines.len(), 1 + 2 * 2);
    assert!(lines[1].starts_with("dubois_prade,3,20,0.01,0.1,true,2,"));
    assert!(lines[4].starts_with("yager,3,20,0.3,0.1,true,2,"));
    assert!(dir.path().join("one_runs.csv").exists());
}

#[test]
fn sweep_json_format() {
    let dir = tempfile::tempdir().unwrap();
    let out = dstcons(
        &["sweep", "--runs", "1", "--agents", "10", "--format", "json", "--out", "s.json"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(dir.path().join("s.json")).unwrap();
    assert!(text.trim_start().starts_with('['));
    assert!(text.contains("\"mean_bel_best\""));
    assert!(dir.path().join("s_runs.json").exists());
}

#[test]
fn fixedpoints_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dstcons(&["fixedpoints", "--states", "3", "--operator", "dubois_prade"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 1 + 7);
    assert!(lines[0].starts_with("operator,n,mass,residual,spectral_radius"));
    assert!(lines[1].starts_with("dubois_prade,3,\"{s1}:1\",0,"));
    assert!(lines[1].contains(",stable,"));
    assert!(lines[7].contains(",unstable,"));
}

#[test]
fn reproduce_writes_figure_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dstcons(&["reproduce", "fig1", "--runs", "1", "--out-dir", "res"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    for f in ["fig1.csv", "fig1_runs.csv", "fig1_trajectory.csv"] {
        assert!(dir.path().join("res").join(f).exists(), "{f}");
    }
    let summary = fs::read_to_string(dir.path().join("res/fig1.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 4);

    let out = dstcons(&["reproduce", "fig9"], dir.path());
    assert!(!out.status.success());
    assert!(stderr(&out).contains("unknown figure"));
}
