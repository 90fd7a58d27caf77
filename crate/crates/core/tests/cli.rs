use std::process::{Command, Output};

use serde_json::Value;

fn microlim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_microlim"))
        .args(args)
        .env_remove("MICROLIM_RATIONAL")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn derive_maxwell_cattaneo_json() {
    let o = microlim(&[
        "derive",
        "maxwell-cattaneo",
        "--D",
        "1",
        "--tau",
        "1",
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(
        doc["weights"],
        serde_json::json!({"plus": "1/2", "zero": "0", "minus": "1/2"})
    );
    assert_eq!(doc["values"]["dt"], "2");
    assert_eq!(doc["values"]["dx2"], "4");
}

#[test]
fn derive_rejects_p_outside_the_band() {
    let o = microlim(&["derive", "standard-heat", "--p", "0.6"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("p must lie in (0, 1/2]"));
}

#[test]
fn derive_symmetry_weights() {
    let o = microlim(&["derive", "symmetry", "--D", "1", "--tau", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("p_plus = 1/3, p_zero = 1/3, p_minus = 1/3"));
}

#[test]
fn derive_trace_lists_steps_in_order() {
    let o = microlim(&["derive", "symmetry", "--trace"]);
    let text = stdout(&o);
    let one = text.find("step 1:").unwrap();
    let two = text.find("step 2:").unwrap();
    assert!(one < two);
}

#[test]
fn unsolvable_scheme_exits_with_reduction_failure() {
    let dir = std::env::temp_dir().join(format!("microlim-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("backward.scheme");
    // Fully implicit time step: no explicit walk exists.
    std::fs::write(
        &path,
        "template be for ut { (0,0): 1/dt; (-1,0): -1/dt; }\n\
         scheme { be - D * central_xx = 0 }\n",
    )
    .unwrap();
    let o = microlim(&["derive", "--scheme-file", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn bad_scheme_file_reports_a_position() {
    let dir = std::env::temp_dir().join(format!("microlim-cli-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("typo.scheme");
    std::fs::write(&path, "scheme { forward_euler_t - K * central_xx = 0 }\n").unwrap();
    let o = microlim(&["derive", "--scheme-file", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("1:"), "{}", stderr(&o));
}

#[test]
fn simulate_output_is_nonnegative() {
    let o = microlim(&[
        "simulate",
        "maxwell-cattaneo",
        "--D",
        "1",
        "--tau",
        "0.01",
        "--sites",
        "512",
        "--steps",
        "200",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = csv_rows(&stdout(&o));
    assert_eq!(header, ["step", "site", "x", "value"]);
    assert_eq!(rows.len(), 2 * 512);
    assert!(rows.iter().all(|r| r[3].parse::<f64>().unwrap() >= 0.0));
}

#[test]
fn exact_simulation_prints_fractions() {
    let o = Command::new(env!("CARGO_BIN_EXE_microlim"))
        .args([
            "simulate", "symmetry", "--tau", "1", "--sites", "5", "--steps", "1",
        ])
        .env("MICROLIM_RATIONAL", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let (_, rows) = csv_rows(&stdout(&o));
    let last: Vec<&str> = rows[5..].iter().map(|r| r[3].as_str()).collect();
    assert_eq!(last, ["0", "1/3", "1/3", "1/3", "0"]);
}

#[test]
fn converge_standard_heat_ratios_near_four() {
    let o = microlim(&["converge", "standard-heat", "--p", "0.5", "--levels", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = csv_rows(&stdout(&o));
    assert_eq!(header, ["level", "dx", "dt", "l1_error", "ratio"]);
    assert_eq!(rows.len(), 4);
    for r in &rows[1..] {
        let ratio: f64 = r[4].parse().unwrap();
        assert!((3.0..=5.0).contains(&ratio), "{ratio}");
    }
}

#[test]
fn converge_reports_non_convergence() {
    let o = microlim(&["converge", "symmetry", "--tau", "0.01", "--levels", "2"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn chain_dispersion_is_accurate() {
    let o = microlim(&[
        "chain", "--c", "1", "--dx", "0.1", "--N", "256", "--mode", "3",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = csv_rows(&stdout(&o));
    assert_eq!(
        header,
        ["mode", "omega_measured", "omega_theory", "rel_err"]
    );
    let rel: f64 = rows[0][3].parse().unwrap();
    assert!(rel < 1e-3);
}

#[test]
fn chain_rejects_unstable_steps() {
    let o = microlim(&["chain", "--dx", "0.1", "--dt", "0.2", "--mode", "1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn out_flag_writes_a_metadata_sidecar() {
    let dir = std::env::temp_dir().join(format!("microlim-cli-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("walk.csv");
    let p = path.to_str().unwrap();
    let args = [
        "simulate",
        "standard-heat",
        "--p",
        "1/2",
        "--sites",
        "9",
        "--steps",
        "3",
        "--out",
        p,
    ];
    assert_eq!(microlim(&args).status.code(), Some(0));
    let first = std::fs::read(&path).unwrap();
    let meta: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("walk.csv.meta.json")).unwrap())
            .unwrap();
    assert_eq!(meta["command"], "simulate");
    // Data files are deterministic; timing lives only in the sidecar.
    assert_eq!(microlim(&args).status.code(), Some(0));
    assert_eq!(std::fs::read(&path).unwrap(), first);
}

#[test]
fn list_models_json_covers_the_catalog() {
    let o = microlim(&["list-models", "--json"]);
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let ids: Vec<&str> = doc
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m["id"].as_str().unwrap())
        .collect();
    assert_eq!(
        ids,
        [
            "standard-heat",
            "maxwell-cattaneo",
            "standard-heat-dff",
            "symmetry"
        ]
    );
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(microlim(&[]).status.code(), Some(1));
    assert_eq!(
        microlim(&["derive", "no-such-model"]).status.code(),
        Some(1)
    );
    assert_eq!(
        microlim(&["derive", "symmetry", "--tau", "abc"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn check_passes() {
    let o = microlim(&["check"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
}
