//! End-to-end runs of the `orlicz-ergodic` binary and of `cli::run_command`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command as Process, Output};

use orlicz_ergodic::cli::{self, Command};
use orlicz_ergodic::config::Config;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_orlicz-ergodic");

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join("data")
}

fn run(args: &[&str]) -> Output {
    Process::new(BIN).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.cfg");
    fs::write(&path, text).unwrap();
    path
}

/// Rows of a CSV as header-keyed maps.
fn read_csv(path: &Path) -> Vec<std::collections::HashMap<String, String>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    lines
        .map(|l| header.iter().cloned().zip(l.split(',').map(String::from)).collect())
        .collect()
}

fn num(row: &std::collections::HashMap<String, String>, key: &str) -> f64 {
    row[key].parse().unwrap()
}

const SMALL: &str = "n_max = 300\nsamples = 200\nbase_atoms = 3\nfiber_atoms = 5\n";

#[test]
fn repeated_runs_write_identical_bytes() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    for cmd in ["conjugate", "norms", "verify", "converge"] {
        let (a, b) = (dir.path().join("a"), dir.path().join("b"));
        for out in [&a, &b] {
            let o = run(&[cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--quiet"]);
            assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        }
        let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        assert!(!names.is_empty());
        for name in names {
            let (x, y) = (fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap());
            assert_eq!(x, y, "{cmd}: {name:?} differs between runs");
            assert!(!x.contains(&b'\r'));
        }
        fs::remove_dir_all(&a).unwrap();
        fs::remove_dir_all(&b).unwrap();
    }
}

#[test]
fn seed_flag_overrides_the_config() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let mut tables = Vec::new();
    for seed in ["1", "2"] {
        let out = dir.path().join(seed);
        let o = run(&["norms", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", seed, "--quiet"]);
        assert!(o.status.success());
        tables.push(fs::read_to_string(out.join("norms.csv")).unwrap());
    }
    assert_ne!(tables[0], tables[1]);
}

#[test]
fn floats_carry_seventeen_significant_digits() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "nfunction = exp_type\nconjugate_points = 7\n");
    let o = run(&["conjugate", "--config", cfg.to_str().unwrap(), "--quiet"]);
    assert!(o.status.success());
    let text = fs::read_to_string(dir.path().join("out").join("conjugate.csv")).unwrap();
    assert!(text.ends_with('\n'));
    for line in text.lines().skip(1) {
        for field in line.split(',') {
            let mantissa = field.trim_start_matches('-').split('e').next().unwrap();
            assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17, "{field}");
        }
    }
}

#[test]
fn quadratic_conjugate_column_is_half_square() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "nfunction = power:r=2,c=0.5\nconjugate_points = 40\n");
    let out = dir.path().join("out");
    let o = run(&["conjugate", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("conjugate.csv"));
    let rows = read_csv(&out.join("conjugate.csv"));
    assert_eq!(rows.len(), 41);
    for r in &rows {
        let t = num(r, "t");
        assert!((num(r, "N_t") - t * t / 2.0).abs() <= 1e-9, "t={t}");
        assert!((num(r, "M_t") - t * t / 2.0).abs() <= 1e-12);
        assert!(num(r, "young_gap_at_p").abs() <= 1e-9);
    }
}

#[test]
fn identity_residuals_are_sup_norm_over_n() {
    let dir = TempDir::new().unwrap();
    let text = format!(
        "bundle = {}\noperator = identity\nn_max = 500\nemit_values = true\nsamples = 100\n",
        data_dir().join("bundle.txt").display()
    );
    let cfg = Config::parse(&text).unwrap();
    let out = dir.path().join("out");
    let outcome = cli::run_command(Command::Converge, &cfg, dir.path(), &out).unwrap();
    assert!(outcome.success);
    let inst = cli::load_instance(&cfg, dir.path()).unwrap();
    let rows = read_csv(&out.join("converge.csv"));
    assert!(!rows.is_empty());
    for r in &rows {
        let (name, n, omega, atom) = (&r["section"], num(r, "n"), num(r, "omega") as usize, num(r, "atom") as usize);
        let f = &inst.sections.iter().find(|(s, _)| s == name).unwrap().1;
        let comp = f.component(omega);
        let sup = comp.values().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!((num(r, "residual_envelope") - sup / n).abs() <= 1e-12, "{name} n={n} ω={omega}");
        let expected = (n - 1.0) / n * comp.values()[atom];
        assert!((num(r, "A_n_value") - expected).abs() <= 1e-12);
    }
    for r in read_csv(&out.join("converge_summary.csv")) {
        assert_eq!(r["reference"], "spectral");
        assert_eq!(r["admissible"], "true");
    }
}

#[test]
fn every_command_runs_on_the_example_files() {
    let dir = TempDir::new().unwrap();
    let cfg = data_dir().join("experiment.cfg");
    for cmd in ["conjugate", "norms", "verify", "converge"] {
        let out = dir.path().join(cmd);
        let o = run(&[cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--quiet"]);
        assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let verify = read_csv(&dir.path().join("verify").join("verify.csv"));
    assert!(verify.iter().all(|r| r["status"] == "pass"));
    let norms = read_csv(&dir.path().join("norms").join("norms.csv"));
    assert_eq!(norms.len(), 2 * 2 * 2);
}

#[test]
fn malformed_config_exits_two_with_the_line() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "seed = 4\n\nn_max = 1\n");
    let o = run(&["conjugate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("run.cfg:3:"), "{err}");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn malformed_data_file_exits_two_with_the_line() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("m.txt"), "nfunction tabulated tail_slope=1\n0 0\n1 oops\n").unwrap();
    let cfg = write_config(dir.path(), "nfunction = tabulated:m.txt\n");
    let o = run(&["conjugate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3") && err.contains("m.txt"), "{err}");
}

#[test]
fn unknown_command_is_a_usage_error() {
    let o = run(&["plot"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn inadmissible_operator_is_refused_unless_forced() {
    let dir = TempDir::new().unwrap();
    fs::copy(data_dir().join("bundle.txt"), dir.path().join("bundle.txt")).unwrap();
    // fiber 1 rows sum to 1.2, so the L1 contraction fails
    let op = "operator @0:\n1 0 0\n0 1 0\n0 0 1\nfixedpoint @0: 1 1 1\n\
              operator @1:\n0.6 0.6 0\n0 0.6 0.6\n0.6 0 0.6\nfixedpoint @1: 1 1 1\n";
    fs::write(dir.path().join("op.txt"), op).unwrap();
    let base = "bundle = bundle.txt\noperator = op.txt\nn_max = 200\nsamples = 100\n";

    let cfg = write_config(dir.path(), base);
    let o = run(&["verify", "--config", cfg.to_str().unwrap(), "--quiet"]);
    assert!(o.status.success());
    let rows = read_csv(&dir.path().join("out").join("verify.csv"));
    assert!(rows.iter().any(|r| r["omega"] == "1" && r["status"] == "fail"));
    assert!(rows.iter().filter(|r| r["omega"] == "0").all(|r| r["status"] == "pass"));

    let o = run(&["converge", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("allow_inadmissible"));
    assert!(!dir.path().join("out").join("converge.csv").exists());

    let cfg = write_config(dir.path(), &format!("{base}allow_inadmissible = true\n"));
    let o = run(&["converge", "--config", cfg.to_str().unwrap(), "--quiet"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = read_csv(&dir.path().join("out").join("converge_summary.csv"));
    assert!(summary.iter().any(|r| r["omega"] == "1" && r["admissible"] == "false"));
}
