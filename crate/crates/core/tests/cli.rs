use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn sim(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sim"))
        .args(args)
        .env("LMG_OUTPUT_DIR", out)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .output()
        .expect("sim binary runs")
}

fn write_config(dir: &TempDir, text: &str) -> String {
    let path = dir.path().join("run.toml");
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

const QUENCH: &str = r#"protocol = "quench"

[model]
n = 12
h_i = 0.5

[quench]
h_c = [0.0, 2.0]
subsystems = [6]

[time]
t_max = 5.0
points = 21

[output]
name = "small"
"#;

#[test]
fn run_writes_csv_with_metadata() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, QUENCH);
    let out = dir.path().join("out");
    let result = sim(&["run", &config], &out);
    assert_eq!(
        result.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&result.stderr)
    );

    let text = std::fs::read_to_string(out.join("small.csv")).unwrap();
    assert!(text.starts_with("# generator: "));
    assert!(text.contains("# timestamp: 1700000000\n"));
    assert!(text.contains("# protocol: quench\n"));
    assert!(text.contains("#   h_c = [0.0, 2.0]"));
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert!(
        header.starts_with("h_i[energy],h_c[energy],t[time],W[energy]"),
        "{header}"
    );
    let rows = text.lines().filter(|l| !l.starts_with('#')).count() - 1;
    assert_eq!(rows, 2 * 21);
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, QUENCH);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(sim(&["run", &config, "--threads", "1"], &a).status.success());
    assert!(sim(&["run", &config, "--threads", "2"], &b).status.success());
    let read = |d: &Path| std::fs::read(d.join("small.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn json_format_mirrors_rows() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, QUENCH);
    let out = dir.path().join("out");
    assert!(sim(&["run", &config, "--format", "json"], &out).status.success());
    let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("small.json")).unwrap()).unwrap();
    assert_eq!(doc["rows"].as_array().unwrap().len(), 42);
    assert_eq!(doc["metadata"]["protocol"], "quench");
    assert_eq!(doc["columns"][2]["unit"], "time");
}

#[test]
fn output_dir_flag_overrides_env() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, QUENCH);
    let flag = dir.path().join("flag");
    let result = sim(
        &["run", &config, "--output-dir", flag.to_str().unwrap()],
        &dir.path().join("env"),
    );
    assert!(result.status.success());
    assert!(flag.join("small.csv").exists());
    assert!(!dir.path().join("env").exists());
}

#[test]
fn unknown_key_exits_2_with_line() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, &QUENCH.replace("h_i = 0.5", "h_i = 0.5\nspin = 3"));
    let result = sim(&["run", &config], &dir.path().join("out"));
    assert_eq!(result.status.code(), Some(2));
    let err = String::from_utf8_lossy(&result.stderr);
    assert!(err.contains("spin") && err.contains("line 6"), "{err}");
}

#[test]
fn semantic_error_names_key() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, &QUENCH.replace("subsystems = [6]", "subsystems = [13]"));
    let result = sim(&["validate", &config], &dir.path().join("out"));
    assert_eq!(result.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&result.stderr).contains("quench.subsystems"));
}

#[test]
fn numeric_failure_exits_3() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        &dir,
        "protocol = \"wpd\"\n[model]\nn = 100\nh_i = 1.7e308\n[quench]\nh_c = 0.5\n",
    );
    let out = dir.path().join("out");
    let result = sim(&["run", &config], &out);
    assert_eq!(result.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&result.stderr).contains("non-finite"));
    assert!(!out.exists());
}

#[test]
fn missing_file_exits_1() {
    let dir = TempDir::new().unwrap();
    let result = sim(&["run", "no-such-config.toml"], &dir.path().join("out"));
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn recipes_are_listed_and_runnable_by_name() {
    let dir = TempDir::new().unwrap();
    let list = sim(&["recipes"], dir.path());
    let text = String::from_utf8(list.stdout).unwrap();
    for name in ["fig2a", "fig3c", "fig5a", "fig6", "fig8b", "fig9"] {
        assert!(text.contains(name), "{name} missing from catalog");
    }
    let show = sim(&["recipes", "--show", "fig8b"], dir.path());
    assert!(String::from_utf8(show.stdout).unwrap().contains("protocol = \"wpd\""));

    let out = dir.path().join("out");
    assert!(sim(&["run", "fig8b"], &out).status.success());
    let text = std::fs::read_to_string(out.join("fig8b.csv")).unwrap();
    // Every (h_i, h_c) pair puts all weight on a single work value.
    let mut peaks: std::collections::BTreeMap<(String, String), f64> = Default::default();
    for line in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        let p: f64 = cells[3].parse().unwrap();
        let peak = peaks.entry((cells[0].into(), cells[1].into())).or_default();
        *peak = peak.max(p);
    }
    assert_eq!(peaks.len(), 8);
    assert!(peaks.values().all(|&p| (p - 1.0).abs() < 1e-10), "{peaks:?}");
}
