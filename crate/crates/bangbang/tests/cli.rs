use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bangbang::io::read_table;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bangbang"))
}

fn run(config: &Path) -> Output {
    bin().arg("run").arg(config).output().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

const RATES: &str = r#"schema_version = 1
scenario = "rates-parallel"
output = "rates.csv"

[model]
T2 = 1.0
tau_c = 0.5

[sweep]
parameter = "Omega"
start = 0.1
stop = 100.0
points = 25
spacing = "log"
"#;

#[test]
fn rates_run_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "rates.toml", RATES);
    let out = run(&cfg);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let first = fs::read(dir.path().join("rates.csv")).unwrap();
    let out = run(&cfg);
    assert!(out.status.success());
    assert_eq!(first, fs::read(dir.path().join("rates.csv")).unwrap());

    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with("# bangbang"));
    assert!(text.contains("#   tau_c = 0.5"));
    assert!(text.contains("# units: Omega [rad/time], T [time], gamma_par [1/time]"));
    let (names, rows) = read_table(&text).unwrap();
    assert_eq!(names, ["Omega", "T", "gamma_par", "eta_par", "eta_par_generator"]);
    assert_eq!(rows.len(), 25);
    for r in &rows {
        assert!((r[3] - r[4]).abs() <= 1e-8 * r[3]);
    }
}

#[test]
fn output_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "rates.toml", RATES);
    let target = dir.path().join("elsewhere.csv");
    let out = bin().arg("run").arg(&cfg).arg("--output").arg(&target).output().unwrap();
    assert!(out.status.success());
    assert!(target.exists());
    assert!(!dir.path().join("rates.csv").exists());
}

#[test]
fn empty_sweep_is_a_config_error_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", &RATES.replace("points = 25", "points = 0"));
    let out = run(&cfg);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 13"), "{err}");
    let check = bin().arg("check").arg(&cfg).output().unwrap();
    assert_eq!(check.status.code(), Some(2));
}

#[test]
fn syntax_and_schema_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", &RATES.replace("T2 = 1.0", "T2 = = 1.0"));
    let out = run(&cfg);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 6"));

    let cfg = write(dir.path(), "v.toml", &RATES.replace("schema_version = 1", "schema_version = 2"));
    assert_eq!(run(&cfg).status.code(), Some(2));

    let cfg = write(dir.path(), "s.toml", &RATES.replace("rates-parallel", "rates-sideways"));
    let out = run(&cfg);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    assert_eq!(run(&dir.path().join("missing.toml")).status.code(), Some(2));
    let ok = bin().arg("check").arg(write(dir.path(), "ok.toml", RATES)).output().unwrap();
    assert!(ok.status.success());
}

#[test]
fn tabulated_bath_without_coverage_is_numeric_failure() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "gamma.txt", "# omega gamma\n-10 0.1\n0 1\n10 0.1\n");
    let cfg = write(
        dir.path(),
        "traj.toml",
        r#"schema_version = 1
scenario = "trajectory"
output = "traj.csv"

[model]
spectral_file = "gamma.txt"
T = 1.0

[trajectory]
t_end = 1.0
points = 3
x0 = [0.0, 0.0, 1.0]
"#,
    );
    let out = run(&cfg);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("trajectory"), "{err}");
}

#[test]
fn extract_round_trip_and_inconsistent_data() {
    let dir = tempfile::tempdir().unwrap();
    let (t2, tau_c) = (3.0, 0.2);
    let eta = |t: f64| {
        let x = t / (2.0 * tau_c);
        (1.0 - x.tanh() / x) / t2
    };
    let rows = format!("# T eta\n{:e} {:e}\n{:e} {:e}\n", 1e12, eta(1e12), 0.15, eta(0.15));
    write(dir.path(), "m.txt", &rows);
    let cfg = write(
        dir.path(),
        "x.toml",
        "schema_version = 1\nscenario = \"extract-tauc\"\noutput = \"x.csv\"\n\n[extract]\nmeasurements = \"m.txt\"\n",
    );
    let out = run(&cfg);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (names, rows) = read_table(&fs::read_to_string(dir.path().join("x.csv")).unwrap()).unwrap();
    assert_eq!(names[3], "tau_c");
    assert!((rows[0][2] - t2).abs() < 1e-9 * t2);
    assert!((rows[0][3] - tau_c).abs() < 1e-9 * tau_c);

    write(dir.path(), "m.txt", "1e6 0.1\n0.5 0.3\n");
    assert_eq!(run(&cfg).status.code(), Some(3));
    write(dir.path(), "m.txt", "1e6 0.1\n0.5 abc\n");
    let out = run(&cfg);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("m.txt:2"));
}

#[test]
fn echo_and_audit_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let echo = write(
        dir.path(),
        "echo.toml",
        r#"schema_version = 1
scenario = "echo"
output = "echo.csv"
seed = 3

[model]
T2 = 10.0
tau_c = 0.5
omega0 = 8.0
T = 1.0

[echo]
ensemble = "discrete"
samples = [[-1.0, 1.0], [0.0, 2.0], [1.5, 1.0]]
monte_carlo = 1000
t_end = 4.0
points = 9
x0 = [1.0, 0.0, 0.0]
"#,
    );
    let out = run(&echo);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (_, rows) = read_table(&fs::read_to_string(dir.path().join("echo.csv")).unwrap()).unwrap();
    // t = 0.5, 1.5, ... are echo peaks
    for r in rows.iter().filter(|r| (r[0] % 1.0 - 0.5).abs() < 1e-12) {
        assert!((r[1] - (8.0 * r[0]).cos()).abs() < 1e-12);
    }

    let audit = write(
        dir.path(),
        "audit.toml",
        r#"schema_version = 1
scenario = "generator-audit"
output = "audit.csv"

[model]
coupling = "transverse"
A = 0.5
omega_cut = 2.0

[sweep]
parameter = "Omega"
start = 1.0
stop = 20.0
points = 4
"#,
    );
    let out = run(&audit);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (names, rows) = read_table(&fs::read_to_string(dir.path().join("audit.csv")).unwrap()).unwrap();
    let idx = |n: &str| names.iter().position(|x| x == n).unwrap();
    for r in &rows {
        assert!(r[idx("generator_rel_residual")] < 1e-8);
        assert!(r[idx("series_rel_residual")] < 1e-8);
        assert!(r[idx("trace_defect")] <= 1e-10);
        assert!(r[idx("choi_min_eig")] >= -1e-10);
    }
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "toml") {
            let out = bin().arg("check").arg(&p).output().unwrap();
            assert!(out.status.success(), "{}: {}", p.display(), String::from_utf8_lossy(&out.stderr));
            n += 1;
        }
    }
    assert!(n >= 8);
}
