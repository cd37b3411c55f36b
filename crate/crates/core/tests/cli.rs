use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use goodput_core::experiment::ExperimentSpec;

const SMALL: &str = "n_channel_sets = 1\nmc_samples = 0\na_grid = [1.0, 4.0]\n[rate_grid]\npoints = 5\n";

fn sim(args: &[&str], config: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_goodput-sim"))
        .args(args)
        .arg("--config")
        .arg(config)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn validate_reports_success_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let ok = sim(&["validate"], &write(dir.path(), "ok.toml", ""));
    assert!(ok.status.success());

    let bad = sim(&["validate"], &write(dir.path(), "bad.toml", "[scenario]\nanttenas = 8\n"));
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("anttenas"));

    let invalid = sim(&["validate"], &write(dir.path(), "inv.toml", "n_channel_sets = 0\n"));
    assert!(!invalid.status.success());
    assert!(String::from_utf8_lossy(&invalid.stderr).contains("n_channel_sets"));

    let missing = sim(&["validate"], &dir.path().join("nope.toml"));
    assert!(!missing.status.success());
}

fn check_csv(path: &Path, outage_cols: &[&str]) {
    let bytes = std::fs::read(path).unwrap();
    assert!(!bytes.contains(&b'\r'), "CRLF in {}", path.display());
    assert_eq!(bytes.last(), Some(&b'\n'));
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let headers = rdr.headers().unwrap().clone();
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        rows += 1;
        for (h, field) in headers.iter().zip(rec.iter()) {
            if let Ok(v) = field.parse::<f64>() {
                assert!(v.is_finite(), "{h} = {field}");
                if outage_cols.contains(&h) {
                    assert!((0.0..=1.0).contains(&v), "{h} = {v}");
                }
            }
        }
    }
    assert!(rows > 0);
}

#[test]
fn small_runs_emit_well_formed_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let out = dir.path().join("out");
    let outs = out.to_str().unwrap();
    for preset in ["fig1", "fig2", "fig3", "table1"] {
        let t = Instant::now();
        let o = sim(&["run", "--preset", preset, "--out", outs, "--seed", "4"], &cfg);
        assert!(o.status.success(), "{preset}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(t.elapsed().as_secs_f64() < 5.0);
        check_csv(
            &out.join(format!("{preset}.csv")),
            &["outage_mean", "outage_min", "outage_max"],
        );
        let meta: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join(format!("{preset}.meta.json"))).unwrap()).unwrap();
        assert_eq!(meta["seed"], 4);
        assert_eq!(meta["preset"], preset);
    }
    let header = std::fs::read_to_string(out.join("table1.csv")).unwrap();
    assert!(header.starts_with("method,goodput,claimed_rate,a,n_sets\n"));
    let methods: Vec<String> = header.lines().skip(1).map(|l| l.split(',').next().unwrap().to_owned()).collect();
    assert_eq!(
        methods,
        ["alg1_best", "nested_heuristic", "best_fixed_a", "a1", "estimated_a", "naive"]
    );
}

#[test]
fn metadata_reruns_the_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let first = dir.path().join("first");
    let o = sim(&["run", "--preset", "table1", "--seed", "12", "--out", first.to_str().unwrap()], &cfg);
    assert!(o.status.success());

    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(first.join("table1.meta.json")).unwrap()).unwrap();
    let mut spec: ExperimentSpec = serde_json::from_value(meta["spec"].clone()).unwrap();
    let second = dir.path().join("second");
    spec.output_path = second.clone();
    let again = write(dir.path(), "again.toml", &spec.to_toml().unwrap());
    let o = sim(&["run"], &again);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        std::fs::read(first.join("table1.csv")).unwrap(),
        std::fs::read(second.join("table1.csv")).unwrap()
    );
}
