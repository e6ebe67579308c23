use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;

use wscma::baselines::OptimizerKind;
use wscma::runner::{mean_stderr, run_experiment, write_experiment, ExperimentConfig};
use wscma::space::TrialArchive;

fn tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn config(jobs: usize) -> ExperimentConfig {
    ExperimentConfig {
        methods: OptimizerKind::ALL.to_vec(),
        reps: 4,
        budget: 24,
        source_budget: 40,
        jobs,
        ..ExperimentConfig::default()
    }
}

#[test]
fn artifacts_are_byte_identical_across_runs_and_thread_counts() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    write_experiment(&run_experiment(&config(1)).unwrap(), a.path()).unwrap();
    write_experiment(&run_experiment(&config(3)).unwrap(), b.path()).unwrap();
    let (ta, tb) = (tree(a.path()), tree(b.path()));
    assert_eq!(ta.len(), 8 * 4 + 6);
    assert_eq!(ta, tb);
}

#[test]
fn summary_matches_the_per_run_archives() {
    let dir = tempfile::tempdir().unwrap();
    let config = config(2);
    write_experiment(&run_experiment(&config).unwrap(), dir.path()).unwrap();
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let mut lines = summary.lines();
    assert_eq!(lines.next(), Some("method,mean_best,stderr_best"));
    let mut rows = 0;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let bests: Vec<f64> = (0..config.reps)
            .map(|k| {
                let archive =
                    TrialArchive::<f64>::load(dir.path().join("runs").join(format!("{}_{k}.csv", f[0]))).unwrap();
                assert_eq!(archive.len(), config.budget);
                archive.trials().iter().map(|t| t.value).fold(f64::INFINITY, f64::min)
            })
            .collect();
        let (mean, se) = mean_stderr(&bests);
        assert!((mean - f[1].parse::<f64>().unwrap()).abs() <= 1e-12);
        assert!((se - f[2].parse::<f64>().unwrap()).abs() <= 1e-12);
        rows += 1;
    }
    assert_eq!(rows, 8);
}

fn wscma(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_wscma")).args(args).output().unwrap()
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ok");
    let ok = wscma(&["run", "--reps", "2", "--budget", "16", "--out", out.to_str().unwrap()]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("ws_cma"));
    assert!(out.join("trajectory.csv").exists());

    let partial = dir.path().join("partial");
    let code = wscma(&["run", "--reps", "2", "--budget", "16", "--gamma", "0.005", "--out", partial.to_str().unwrap()]);
    assert_eq!(code.status.code(), Some(2));
    let errors = fs::read_to_string(partial.join("errors.csv")).unwrap();
    assert!(errors.lines().nth(1).unwrap().starts_with("ws_cma,"));

    let bad = wscma(&["run", "--method", "nope"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("nope"));
    assert_eq!(wscma(&["run", "--reps", "0"]).status.code(), Some(1));
    assert_eq!(wscma(&["run", "--config", "/nonexistent/cfg"]).status.code(), Some(1));
}

#[test]
fn cli_overrides_win_over_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    let out = dir.path().join("out");
    fs::write(&cfg, format!("reps=5\nbudget=16\nmethods=cma\nout={}\n", out.display())).unwrap();
    let run = wscma(&["run", "--config", cfg.to_str().unwrap(), "--reps", "2"]);
    assert_eq!(run.status.code(), Some(0));
    assert_eq!(fs::read_dir(out.join("runs")).unwrap().count(), 2);
}

#[test]
fn generated_source_can_be_reused() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("src");
    assert_eq!(wscma(&["gen-source", "--offset-source", "0.5", "--out", src.to_str().unwrap()]).status.code(), Some(0));
    let archive = TrialArchive::<f64>::load(src.join("source_archive.csv")).unwrap();
    assert_eq!(archive.len(), 100);

    let base = ExperimentConfig {
        offset_source: 0.5,
        methods: vec![OptimizerKind::WsCma, OptimizerKind::ReuseNormal],
        reps: 2,
        budget: 16,
        ..ExperimentConfig::default()
    };
    let loaded = ExperimentConfig {
        source_archive: Some(src.join("source_archive.csv")),
        source_state: Some(src.join("source_state.mgd")),
        ..base.clone()
    };
    assert_eq!(run_experiment(&loaded).unwrap().cells, run_experiment(&base).unwrap().cells);
}

#[test]
fn cli_sweep_and_similarity() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = dir.path().join("sweep");
    let run = wscma(&[
        "sweep",
        "--param",
        "gamma",
        "--values",
        "0.1,0.2",
        "--reps",
        "2",
        "--budget",
        "16",
        "--out",
        sweep.to_str().unwrap(),
    ]);
    assert_eq!(run.status.code(), Some(0));
    let csv = fs::read_to_string(sweep.join("sweep_trajectory.csv")).unwrap();
    assert!(csv.starts_with("param,param_value,method,run,eval_index,value,best_so_far\n"));
    assert!(csv.lines().nth(1).unwrap().starts_with("gamma,0.1,cma,0,0,"));

    let sim = dir.path().join("sim");
    let run = wscma(&[
        "similarity",
        "--problem",
        "rotated_ellipsoid",
        "--offsets",
        "0.6,0.8",
        "--samples",
        "2000",
        "--reps",
        "2",
        "--budget",
        "16",
        "--out",
        sim.to_str().unwrap(),
    ]);
    assert_eq!(run.status.code(), Some(2));
    let report = fs::read_to_string(sim.join("similarity.csv")).unwrap();
    assert_eq!(report.lines().count(), 2);
    assert!(report.lines().nth(1).unwrap().starts_with("0.6,"));
    assert!(fs::read_to_string(sim.join("errors.csv")).unwrap().contains("0.8,"));
}
