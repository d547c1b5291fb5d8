//! End-to-end checks of the `mch` binary: artifact layout, exit codes,
//! error wording, determinism, and the echo round trip.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::tempdir;

const HARMONIC: &str = "\
model.kind = point
model.potential = harmonic
model.omega = 1
time.t_total = 2
time.n_slices = 16
basis.kind = regular
basis.counts = 8
basis.box_low = -4
basis.box_high = 4
mc.n_paths = 500
mc.seed = 9
output.beta_grid = 0.5,1
oracle.enabled = true
oracle.n_levels = 4
";

fn mch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mch")).args(args).output().expect("binary runs")
}

fn write_cfg(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.conf");
    std::fs::write(&path, body).unwrap();
    path
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

const ARTIFACTS: [&str; 9] = [
    "config_echo.conf",
    "basis.txt",
    "matrix.bin",
    "matrix.csv",
    "spectrum.csv",
    "wavefunctions.csv",
    "thermo.csv",
    "oracle.csv",
    "diagnostics.txt",
];

#[test]
fn run_writes_all_artifacts_and_reports() {
    let tmp = tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), HARMONIC);
    let out_dir = tmp.path().join("out");
    let out = mch(&["--output-dir", out_dir.to_str().unwrap(), "run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("spectrum:"), "{text}");
    assert!(text.contains("E_0"), "{text}");
    assert!(text.contains("reference"), "{text}");
    assert!(text.contains("elapsed:"), "{text}");
    for name in ARTIFACTS {
        assert!(out_dir.join(name).is_file(), "missing artifact {name}");
        assert!(text.contains(name), "stdout does not mention {name}: {text}");
    }
}

#[test]
fn rerun_is_byte_identical() {
    let tmp = tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), HARMONIC);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let out = mch(&["--output-dir", dir.to_str().unwrap(), "run", cfg.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    }
    for name in ARTIFACTS {
        assert_eq!(read(&a, name), read(&b, name), "artifact {name} differs between reruns");
    }
}

/// Running on the echoed config reproduces both the echo and the physics
/// byte for byte: the echo is a canonical fixed point.
#[test]
fn echoed_config_is_a_fixed_point() {
    let tmp = tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), HARMONIC);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let out = mch(&["--output-dir", a.to_str().unwrap(), "run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let echoed = a.join("config_echo.conf");
    let out = mch(&["--output-dir", b.to_str().unwrap(), "run", echoed.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    for name in ARTIFACTS {
        assert_eq!(read(&a, name), read(&b, name), "artifact {name} differs under the echo");
    }
}

#[test]
fn value_error_reports_line_and_key() {
    let tmp = tempdir().unwrap();
    let cfg = write_cfg(
        tmp.path(),
        "model.kind = point\nmodel.potential = harmonic\nmodel.omega = fast\ntime.t_total = 2\n",
    );
    let out = mch(&["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let text = stderr(&out);
    assert!(text.contains("line 3"), "{text}");
    assert!(text.contains("model.omega"), "{text}");
}

#[test]
fn unknown_key_reports_line() {
    let tmp = tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), &format!("{HARMONIC}mc.bogus = 1\n"));
    let out = mch(&["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let text = stderr(&out);
    assert!(text.contains("mc.bogus"), "{text}");
    assert!(text.contains("line 15"), "{text}");
}

/// A key that only applies to the other basis kind is rejected, not
/// silently ignored.
#[test]
fn inapplicable_key_is_rejected() {
    let tmp = tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), &format!("{HARMONIC}basis.n_nodes = 10\n"));
    let out = mch(&["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("basis.n_nodes"), "{}", stderr(&out));
}

#[test]
fn duplicate_key_reports_first_occurrence() {
    let tmp = tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), &format!("{HARMONIC}mc.seed = 10\n"));
    let out = mch(&["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("already set on line"), "{}", stderr(&out));
}

#[test]
fn missing_sigma_rule_names_the_key() {
    let tmp = tempdir().unwrap();
    let cfg = write_cfg(
        tmp.path(),
        "model.kind = chain\nmodel.n_osc = 3\nmodel.omega_coupling = 1\n\
         model.omega_onsite = 2\ntime.t_total = 2\nbasis.kind = stochastic\n\
         basis.n_nodes = 50\n",
    );
    let out = mch(&["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let text = stderr(&out);
    assert!(text.contains("basis.sigma_rule"), "{text}");
    assert!(text.contains("sinh or kernel_width"), "{text}");
}

#[test]
fn missing_config_file_exits_two() {
    let out = mch(&["run", "/nonexistent/run.conf"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("cannot read"), "{}", stderr(&out));
}

#[test]
fn oracle_subcommand_prints_chain_levels() {
    let tmp = tempdir().unwrap();
    let cfg = write_cfg(
        tmp.path(),
        "model.kind = chain\nmodel.n_osc = 9\nmodel.omega_coupling = 1\n\
         model.omega_onsite = 2\ntime.t_total = 2\nbasis.kind = regular\n\
         basis.counts = 1,1,1,1,1,1,1,1,1\n\
         basis.box_low = -1,-1,-1,-1,-1,-1,-1,-1,-1\n\
         basis.box_high = 1,1,1,1,1,1,1,1,1\noracle.n_levels = 5\n",
    );
    let out_dir = tmp.path().join("out");
    let out = mch(&["--output-dir", out_dir.to_str().unwrap(), "oracle", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("10.9440604807"), "{}", stdout(&out));
    assert!(out_dir.join("oracle.csv").is_file());
}

/// The shipped full-scale chain configuration must parse, echo to a fixed
/// point, and drive the reference spectrum (the Monte Carlo run itself is
/// an hours-long job and is not exercised here).
#[test]
fn full_scale_chain_config_is_valid() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/chain_nine_site.conf");
    let text = std::fs::read_to_string(&path).unwrap();
    let echoed = mch::config::echo_config(&mch::config::parse_config(&text).unwrap());
    let again = mch::config::echo_config(&mch::config::parse_config(&echoed).unwrap());
    assert_eq!(echoed, again, "echo is not a fixed point");

    let tmp = tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let out = mch(&["--output-dir", out_dir.to_str().unwrap(), "oracle", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("10.9440604807"), "{}", stdout(&out));
}

#[test]
fn remaining_shipped_configs_parse() {
    for name in ["harmonic_1d.conf", "chain_three_site.conf"] {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
        let text = std::fs::read_to_string(&path).unwrap();
        let echoed = mch::config::echo_config(&mch::config::parse_config(&text).unwrap());
        let again = mch::config::echo_config(&mch::config::parse_config(&echoed).unwrap());
        assert_eq!(echoed, again, "{name}: echo is not a fixed point");
    }
}

#[test]
fn compare_reports_relative_deviations() {
    let tmp = tempdir().unwrap();
    let left = tmp.path().join("spectrum.csv");
    let right = tmp.path().join("reference.csv");
    std::fs::write(&left, "level,energy\n0,1.0\n1,2.0\n").unwrap();
    std::fs::write(&right, "level,energy\n0,1.0\n1,2.1\n2,3.0\n").unwrap();
    let out = mch(&["compare", left.to_str().unwrap(), right.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("-4.762e-2"), "{text}");
    assert!(text.contains("max |rel deviation| over 2 levels: 4.762e-2"), "{text}");
    assert!(text.contains("inputs hold 2 and 3 levels"), "{text}");
}

#[test]
fn compare_missing_file_exits_three() {
    let out = mch(&["compare", "/nonexistent/a.csv", "/nonexistent/b.csv"]);
    assert_eq!(out.status.code(), Some(3));
}

/// A single free-particle cell of width 2√π at T = 2 has transfer
/// eigenvalue exactly one, so the whole pipeline must report E_0 = 0 to
/// round-off through the CLI.
#[test]
fn free_particle_unit_cell_is_exact() {
    let tmp = tempdir().unwrap();
    let cfg = write_cfg(
        tmp.path(),
        "model.kind = point\nmodel.potential = zero\ntime.t_total = 2\n\
         time.n_slices = 4\nbasis.kind = regular\nbasis.counts = 1\n\
         basis.box_low = -1.7724538509055159\nbasis.box_high = 1.7724538509055159\n\
         mc.n_paths = 50\noutput.write_matrix = false\n",
    );
    let out_dir = tmp.path().join("out");
    let out = mch(&["--output-dir", out_dir.to_str().unwrap(), "run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let csv = String::from_utf8(read(&out_dir, "spectrum.csv")).unwrap();
    let energy: f64 = csv.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!(energy.abs() <= 1e-12, "E_0 = {energy}");
}

/// Worker count must not change the numbers, only the wall clock.
#[test]
fn thread_count_does_not_change_results() {
    let tmp = tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), HARMONIC);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for (dir, threads) in [(&a, "1"), (&b, "3")] {
        let out = mch(&[
            "--threads",
            threads,
            "--output-dir",
            dir.to_str().unwrap(),
            "run",
            cfg.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    }
    for name in ARTIFACTS {
        assert_eq!(read(&a, name), read(&b, name), "artifact {name} depends on thread count");
    }
}
