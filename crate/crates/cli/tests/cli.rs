use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn beamsched(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beamsched"))
        .args(args)
        .env_remove("MMWAVE_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn small_config(dir: &Path) -> String {
    let text = String::from_utf8(beamsched(&["default-config"]).stdout).unwrap()
        .replace("num_bs = 10", "num_bs = 3")
        .replace("num_ues = 100", "num_ues = 6")
        .replace("epochs = 2000", "epochs = 20");
    let path = dir.join("small.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_writes_trace_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("out");
    let o = beamsched(&["run", "--config", &cfg, "--protocol", "game", "--epochs", "15", "--seed", "7", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 16);
    assert!(trace.starts_with("epoch,utility,mean_power_bs0,mean_power_bs1,mean_power_bs2,ne_iterations_mean"));
    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains("game"));
    let manifest = fs::read_to_string(out.join("manifest.csv")).unwrap();
    assert!(manifest.contains("trace.csv,game,game,7,15,"));
    assert!(!out.join("ne_dump.csv").exists());
}

#[test]
fn same_seed_same_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let mut traces = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let o = beamsched(&["run", "--config", &cfg, "--protocol", "csma", "--out", out.to_str().unwrap()]);
        assert!(o.status.success());
        traces.push(fs::read(out.join("trace.csv")).unwrap());
    }
    assert_eq!(traces[0], traces[1]);
}

#[test]
fn ne_dump_written_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("out");
    let o = beamsched(&["run", "--config", &cfg, "--ne-dump", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let dump = fs::read_to_string(out.join("ne_dump.csv")).unwrap();
    assert_eq!(dump.lines().count(), 1 + 20 * 8);
    assert!(dump.starts_with("epoch,block,iterations,converged,residual,p_matrix,power_bs0"));
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("env_out");
    let o = Command::new(env!("CARGO_BIN_EXE_beamsched"))
        .args(["run", "--config", &cfg, "--epochs", "2"])
        .env("MMWAVE_OUT_DIR", &out)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(out.join("trace.csv").exists());
}

#[test]
fn sweep_writes_one_trace_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("sweep");
    let o = beamsched(&["sweep", "--config", &cfg, "--axis", "beam_width", "--values", "pi/9,pi/36,pi/72", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let traces: Vec<_> = fs::read_dir(&out)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().starts_with("trace_"))
        .collect();
    assert_eq!(traces.len(), 3);
    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    for v in ["pi/9", "pi/36", "pi/72"] {
        assert!(summary.contains(&format!("beam_width={v}")));
    }
}

#[test]
fn default_config_round_trips_through_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("default.toml");
    let o = beamsched(&["default-config", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.contains("p_avg = \"38.13 dBm\""));
    assert!(text.contains("bs_beam_width = \"pi/9\""));
    let parsed = beamsched::parse_config(&text).unwrap();
    assert_eq!(beamsched::emit_config(&parsed), text);
}

#[test]
fn missing_config_names_the_path() {
    let o = beamsched(&["run", "--config", "/no/such/scenario.toml", "--out", "/tmp/unused"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/no/such/scenario.toml"));
}

#[test]
fn malformed_config_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, "[network\nnum_bs = ").unwrap();
    let o = beamsched(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));

    let unitless = String::from_utf8(beamsched(&["default-config"]).stdout)
        .unwrap()
        .replace("grid_side = \"800 m\"", "grid_side = 800");
    fs::write(&path, unitless).unwrap();
    let o = beamsched(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no unit"));
}

#[test]
fn invalid_flags_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = beamsched(&["run", "--protocol", "aloha", "--out", out]);
    assert_eq!(o.status.code(), Some(5));
    let o = beamsched(&["run", "--protocol", "csma", "--ne-dump", "--out", out]);
    assert_eq!(o.status.code(), Some(5));
    let o = beamsched(&["sweep", "--axis", "colour", "--values", "1", "--out", out]);
    assert_eq!(o.status.code(), Some(5));
    let o = beamsched(&["sweep", "--axis", "msr", "--values", "twenty", "--out", out]);
    assert_eq!(o.status.code(), Some(5));
    let o = beamsched(&["sweep", "--axis", "protocol", "--values", "game", "--protocol", "csma", "--out", out]);
    assert_eq!(o.status.code(), Some(5));
    let o = beamsched(&["sweep", "--axis", "msr"]);
    assert_eq!(o.status.code(), Some(2));
    let o = beamsched(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}
