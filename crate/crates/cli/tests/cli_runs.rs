//! End-to-end CLI checks: reproducible output bytes, exit codes, and the
//! compile/verify round trip.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_speclift"))
}

fn write_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(
        &path,
        r#"
[prior]
family = "gaussian"
mean = 0.0
sigma = 1.0

[bounds]
levels = 3
t_max = 4.0
t_points = 9

[qubit_opt]

[onthefly]
steps = 2
seed = 11

[sequential]
v0 = 1.0
a = 0.63
steps = 5

[compile]
cutoff = 4
t = 1.5
field = 0.6
spectrum = [1.0, 0.2, -1.0]
state = [0.6, 0.64031242374328, 0.48]
schedule_file = "schedule.json"

[verify_pulses]
schedule_file = "schedule.json"
"#,
    )
    .unwrap();
    path
}

fn run(cmd: &str, config: &Path, out: &Path) -> std::process::Output {
    bin()
        .args([cmd, "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    for cmd in ["bounds", "qubit-opt", "sequential", "onthefly"] {
        let out_a = dir.path().join(format!("{cmd}-a"));
        let out_b = dir.path().join(format!("{cmd}-b"));
        assert!(run(cmd, &config, &out_a).status.success(), "{cmd} failed");
        assert!(run(cmd, &config, &out_b).status.success());
        for entry in std::fs::read_dir(&out_a).unwrap() {
            let name = entry.unwrap().file_name();
            let a = std::fs::read(out_a.join(&name)).unwrap();
            let b = std::fs::read(out_b.join(&name)).unwrap();
            assert_eq!(a, b, "{cmd}: {name:?} differs between reruns");
        }
    }
}

#[test]
fn csv_outputs_carry_provenance_and_header() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out = dir.path().join("bounds");
    assert!(run("bounds", &config, &out).status.success());
    let text = std::fs::read_to_string(out.join("bounds.csv")).unwrap();
    let mut lines = text.lines();
    let comment = lines.next().unwrap();
    assert!(comment.starts_with("# speclift="), "comment line: {comment}");
    assert!(comment.contains("config="));
    assert_eq!(lines.next().unwrap(), "t,bcrb,entropic_d,mse");
}

#[test]
fn bounds_rows_respect_both_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out = dir.path().join("bounds");
    assert!(run("bounds", &config, &out).status.success());
    let text = std::fs::read_to_string(out.join("bounds.csv")).unwrap();
    let mut rows = 0;
    for line in text.lines().skip(2) {
        let cols: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        let (bcrb, entropic, mse) = (cols[1], cols[2], cols[3]);
        assert!(mse >= bcrb - 1e-9, "row {line}");
        assert!(mse >= entropic - 1e-9, "row {line}");
        rows += 1;
    }
    assert_eq!(rows, 9);
    // the t = 0 row carries no information yet
    let first: Vec<f64> = text
        .lines()
        .nth(2)
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert!((first[3] - 1.0).abs() < 1e-12);
}

#[test]
fn single_level_bound_equals_prior_variance() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.toml");
    std::fs::write(
        &path,
        "[prior]\nfamily = \"gaussian\"\nsigma = 1.0\n\n[bounds]\nlevels = 1\nt_max = 2.0\nt_points = 3\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    assert!(run("bounds", &path, &out).status.success());
    let text = std::fs::read_to_string(out.join("bounds.csv")).unwrap();
    for line in text.lines().skip(2) {
        let cols: Vec<&str> = line.split(',').collect();
        // no estimation is possible with one level: the entropy bound and
        // the error both sit at the prior variance
        assert_eq!(cols[2].parse::<f64>().unwrap(), 1.0);
        assert_eq!(cols[3].parse::<f64>().unwrap(), 1.0);
    }
}

#[test]
fn compile_then_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out = dir.path().join("pulses");
    assert!(run("compile", &config, &out).status.success());
    assert!(run("verify-pulses", &config, &out).status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("verify_pulses.json")).unwrap())
            .unwrap();
    let dev = report["max_deviation"].as_f64().unwrap();
    assert!(dev < 1e-9, "max deviation {dev}");
    let meas = report["measurement_deviation"].as_f64().unwrap();
    assert!(meas < 1e-12, "measurement deviation {meas}");
}

#[test]
fn small_sweep_emits_table_and_envelope() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.toml");
    std::fs::write(
        &path,
        "[prior]\nfamily = \"gaussian\"\nsigma = 1.0\n\n[nlevel_sweep]\nn_min = 2\nn_max = 3\nt_points = 6\nseed = 0\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    assert!(run("nlevel-sweep", &path, &out).status.success());

    let table = std::fs::read_to_string(out.join("nlevel_sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 2 + 2 * 6);
    assert_eq!(
        table.lines().nth(1).unwrap(),
        "n,t,mse,bound_entropic,bound_bcrb,converged"
    );
    for line in table.lines().skip(2) {
        let cols: Vec<&str> = line.split(',').collect();
        let mse: f64 = cols[2].parse().unwrap();
        let entropic: f64 = cols[3].parse().unwrap();
        let bcrb: f64 = cols[4].parse().unwrap();
        assert!(mse >= entropic - 1e-9 && mse >= bcrb - 1e-9, "row {line}");
    }

    // the envelope file is the per-time minimum of the table
    let envelope = std::fs::read_to_string(out.join("nlevel_envelope.csv")).unwrap();
    assert_eq!(envelope.lines().nth(1).unwrap(), "t,mse,best_n");
    for line in envelope.lines().skip(2) {
        let cols: Vec<&str> = line.split(',').collect();
        let (t, mse) = (cols[0], cols[1].parse::<f64>().unwrap());
        let best = table
            .lines()
            .skip(2)
            .filter(|r| r.split(',').nth(1).unwrap() == t)
            .map(|r| r.split(',').nth(2).unwrap().parse::<f64>().unwrap())
            .fold(f64::INFINITY, f64::min);
        assert_eq!(mse, best, "envelope row {line}");
    }
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(
        &path,
        "[prior]\nfamily = \"gaussian\"\nsigma = 1.0\nbanana = 3\n\n[qubit_opt]\n",
    )
    .unwrap();
    let output = run("qubit-opt", &path, dir.path());
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn missing_section_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sparse.toml");
    std::fs::write(&path, "[prior]\nfamily = \"gaussian\"\nsigma = 1.0\n").unwrap();
    let output = run("sequential", &path, dir.path());
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn missing_seed_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("noseed.toml");
    std::fs::write(
        &path,
        "[prior]\nfamily = \"gaussian\"\nsigma = 1.0\n\n[onthefly]\nsteps = 2\n",
    )
    .unwrap();
    let output = run("onthefly", &path, dir.path());
    assert_eq!(output.status.code(), Some(2));
    // and the --seed flag satisfies the requirement
    let output = bin()
        .args(["onthefly", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(dir.path())
        .args(["--seed", "3"])
        .output()
        .unwrap();
    assert!(output.status.success());
}

#[test]
fn infeasible_input_exits_with_numerical_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad_spectrum.toml");
    std::fs::write(
        &path,
        r#"
[prior]
family = "gaussian"
sigma = 1.0

[compile]
cutoff = 4
t = 1.5
field = 0.6
spectrum = [2.0, -1.0]
state = [0.8, 0.6]
schedule_file = "schedule.json"
"#,
    )
    .unwrap();
    let output = run("compile", &path, dir.path());
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn grid_csv_prior_loads() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("prior.csv");
    std::fs::write(&csv, "omega,weight\n-1.0,0.25\n0.0,0.5\n1.0,0.25\n").unwrap();
    let path = dir.path().join("grid.toml");
    std::fs::write(
        &path,
        format!(
            "[prior]\nfamily = \"grid-csv\"\npath = \"{}\"\n\n[bounds]\nlevels = 2\nt_max = 2.0\nt_points = 5\n",
            csv.display()
        ),
    )
    .unwrap();
    let out = dir.path().join("out");
    let output = run("bounds", &path, &out);
    assert!(output.status.success());
    let text = std::fs::read_to_string(out.join("bounds.csv")).unwrap();
    // grid priors have no defined Fisher information here: bcrb column empty
    let row = text.lines().nth(2).unwrap();
    assert!(row.split(',').nth(1).unwrap().is_empty(), "row: {row}");
}
