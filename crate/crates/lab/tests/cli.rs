use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn lab(args: &[&str], root: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qwork-lab"))
        .args(args)
        .env("QWORK_LAB_OUTPUT", root)
        .output()
        .expect("spawn qwork-lab")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn header(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()))
        .lines()
        .next()
        .unwrap_or_default()
        .to_string()
}

#[test]
fn list_shows_ten_tagged_experiments() {
    let tmp = TempDir::new().unwrap();
    let o = lab(&["list"], tmp.path());
    assert!(o.status.success());
    let text = stdout(&o);
    let names: Vec<&str> = text.lines().filter(|l| l.starts_with("exp-")).collect();
    assert_eq!(names.len(), 10, "{text}");
    assert!(names.iter().all(|l| l.contains('[') && l.contains(']')));
}

#[test]
fn ngt_run_reports_unit_offdiagonal() {
    let tmp = TempDir::new().unwrap();
    let o = lab(&["run", "exp-ngt", "--eps", "1", "--eps-prime", "2"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let dir = tmp.path().join("exp-ngt");
    let summary = fs::read_to_string(dir.join("summary.json")).unwrap();
    let line = summary.lines().find(|l| l.contains("\"offdiag_norm\"")).unwrap();
    let value: f64 = line
        .split(':')
        .nth(1)
        .unwrap()
        .trim()
        .trim_end_matches(',')
        .parse()
        .unwrap();
    assert!((value - 1.0).abs() < 1e-12, "{value}");
    assert!(summary.contains("\"passed\": true"));
    assert_eq!(
        header(&dir.join("random_pairs.csv")),
        "eps,eps_prime,offdiag_norm,expected_offdiag"
    );
}

#[test]
fn ngt_with_zero_eps_prime_reports_identical_operators() {
    let tmp = TempDir::new().unwrap();
    let o = lab(&["exp-ngt", "--eps-prime", "0"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary = fs::read_to_string(tmp.path().join("exp-ngt/summary.json")).unwrap();
    assert!(summary.contains("\"operators_identical\": true"));
    assert!(summary.contains("\"notes\""));
}

#[test]
fn stationary_run_passes() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("stationary");
    let o = lab(
        &[
            "run",
            "exp-stationary",
            "--n-traj",
            "10",
            &format!("--out={}", out.display()),
        ],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}\n{}", stdout(&o), stderr(&o));
    assert!(!stdout(&o).contains("FAIL"));
    assert_eq!(header(&out.join("trajectories.csv")), "traj_id,t,x,v,V,Q,E_local");
    assert_eq!(header(&out.join("work.csv")), "traj_id,W_M,W_E,dK,dV,dQ");
    assert_eq!(header(&out.join("psi_final.csv")), "x,re,im,density");
    assert!(out.join("config.txt").exists());
}

#[test]
fn validate_accepts_complete_config() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("ok.cfg");
    fs::write(
        &cfg,
        "# classical drag\nexperiment = exp-jarzynski-classical\nbeta = 1\nn = 500\n",
    )
    .unwrap();
    let o = lab(&["validate", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("ok:"));
}

#[test]
fn validate_names_missing_beta() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("bad.cfg");
    fs::write(&cfg, "experiment = exp-jarzynski-classical\n").unwrap();
    let o = lab(&["validate", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).lines().any(|l| l.starts_with("beta:")),
        "{}",
        stderr(&o)
    );
    // Nothing was run.
    assert!(!tmp.path().join("exp-jarzynski-classical").exists());
}

#[test]
fn configuration_errors_exit_two() {
    let tmp = TempDir::new().unwrap();
    let o = lab(&["exp-nonexistent"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("experiment"));

    let o = lab(&["exp-ngt", "--eps", "abc"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("eps"));

    let o = lab(&["exp-ngt", "--no-such-key", "1"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failed_check_exits_one() {
    let tmp = TempDir::new().unwrap();
    // Far below the rounding error of the traces.
    let o = lab(
        &["exp-dephasing", "--n-pairs", "5", "--tol", "1e-300"],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn overrides_win_over_config_file() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("ngt.cfg");
    fs::write(&cfg, "experiment = exp-ngt\neps_prime = 4\n").unwrap();
    let o = lab(
        &["--config", cfg.to_str().unwrap(), "run", "--eps-prime", "6"],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let echo = fs::read_to_string(tmp.path().join("exp-ngt/config.txt")).unwrap();
    assert!(echo.contains("eps-prime = 6"), "{echo}");
}

#[test]
fn csv_output_is_byte_identical_across_runs_and_exec_modes() {
    let tmp = TempDir::new().unwrap();
    let mut dirs = Vec::new();
    for (k, exec) in ["parallel", "parallel", "sequential"].into_iter().enumerate() {
        let out = tmp.path().join(format!("run{k}"));
        let o = lab(
            &[
                "exp-jarzynski-classical",
                "--beta",
                "1",
                "--n",
                "200",
                "--seed",
                "9",
                "--exec",
                exec,
                "--out",
                out.to_str().unwrap(),
            ],
            tmp.path(),
        );
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        dirs.push(out);
    }
    let mut csvs: Vec<_> = fs::read_dir(&dirs[0])
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .filter(|n| n.to_string_lossy().ends_with(".csv"))
        .collect();
    csvs.sort();
    assert!(!csvs.is_empty());
    for name in &csvs {
        let a = fs::read(dirs[0].join(name)).unwrap();
        for other in &dirs[1..] {
            assert_eq!(
                a,
                fs::read(other.join(name)).unwrap(),
                "{name:?} differs in {}",
                other.display()
            );
        }
    }
    assert_eq!(
        header(&dirs[0].join("drag0_samples.csv")),
        "n,traj_id,W,exp_minus_beta_W"
    );
}
