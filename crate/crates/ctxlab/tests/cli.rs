//! Black-box tests of the `ctxlab` binary: flag contracts, exit codes and
//! file outputs.

use std::path::Path;
use std::process::{Command, Output};

fn ctxlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctxlab"))
        .args(args)
        .output()
        .expect("spawn ctxlab")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn bounds_prints_bound_and_assignment_count() {
    for (name, expect) in [
        ("pm", "bound=4 assignments=512"),
        ("c", "bound=4 assignments=256"),
        ("chsh", "bound=2 assignments=16"),
        ("cabello18", "bound=7 assignments=262144"),
    ] {
        let out = ctxlab(&["bounds", "--inequality", name]);
        assert!(out.status.success(), "{name}");
        assert_eq!(stdout(&out).trim(), expect, "{name}");
    }
    let bad = ctxlab(&["bounds", "--inequality", "nope"]);
    assert!(!bad.status.success());
}

#[test]
fn help_works_everywhere() {
    for sub in [
        "bounds", "eval", "sample", "cscan", "bmax", "stats", "scatter", "plot",
    ] {
        let out = ctxlab(&[sub, "--help"]);
        assert!(out.status.success(), "{sub} --help");
        assert!(stdout(&out).contains("Usage"), "{sub}");
    }
}

#[test]
fn cscan_bmax_stats_scatter_plot_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let records = p("r.csv");
    let hist = p("h.csv");
    let summary = p("s.json");

    let out = ctxlab(&[
        "cscan", "--n", "3000", "--seed", "7", "--out", &records, "--hist", &hist, "--summary",
        &summary,
    ]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    for key in [
        "mean",
        "variance",
        "skewness",
        "kurtosis",
        "median",
        "fraction_above",
        "n",
    ] {
        assert!(json.get(key).is_some(), "summary key {key}");
    }
    assert_eq!(json["n"], 3000);
    let mean = json["mean"].as_f64().unwrap();
    assert!((3.8..=4.2).contains(&mean), "mean {mean}");
    assert!(Path::new(&hist).exists() && Path::new(&summary).exists());

    // idempotence: identical flags give byte-identical records
    let first = std::fs::read(&records).unwrap();
    let out = ctxlab(&[
        "cscan", "--n", "3000", "--seed", "7", "--out", &records, "--hist", &hist, "--summary",
        &summary,
    ]);
    assert!(out.status.success());
    assert_eq!(std::fs::read(&records).unwrap(), first);

    // bmax over the contextual subensemble
    let augmented = p("b.csv");
    let out = ctxlab(&[
        "bmax", "--in", &records, "--out", &augmented, "--cap", "60",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let line = stdout(&out);
    assert!(line.contains("60 records"), "{line}");

    // empty filter window
    let empty = p("empty.csv");
    let out = ctxlab(&["bmax", "--in", &records, "--filter-c", "6.1", "--out", &empty]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("0 records"));

    // stats over the optimized field
    let out = ctxlab(&[
        "stats", "--in", &augmented, "--field", "b-max", "--threshold", "2.0",
    ]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["fraction_above"], 1.0);

    // scatter table
    let scatter = p("scatter.csv");
    let out = ctxlab(&["scatter", "--in", &augmented, "--out", &scatter]);
    assert!(out.status.success());
    let table = std::fs::read_to_string(&scatter).unwrap();
    assert!(table.starts_with("c_value,b_max\n"));
    assert_eq!(table.lines().count(), 61);

    // plots
    for (kind, input) in [("hist-c", &records), ("hist-b", &augmented), ("scatter", &augmented)] {
        let svg = p(&format!("{kind}.svg"));
        let out = ctxlab(&["plot", "--in", input, "--kind", kind, "--out", &svg]);
        assert!(out.status.success(), "plot {kind}");
        let body = std::fs::read_to_string(&svg).unwrap();
        assert!(body.starts_with("<svg") && body.contains("stroke-dasharray"));
    }

    // hist-b on records without b_max is a usage error
    let out = ctxlab(&["plot", "--in", &records, "--kind", "hist-b", "--out", &p("x.svg")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.path().join("x.svg").exists());
}

#[test]
fn sample_and_eval() {
    let dir = tempfile::tempdir().unwrap();
    let states = dir.path().join("states.txt");
    let states_s = states.to_str().unwrap();
    let out = ctxlab(&["sample", "--n", "5", "--seed", "3", "--out", states_s]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&states).unwrap();
    assert!(text.starts_with("# master_seed=3\n"));
    assert_eq!(text.lines().count(), 6);

    // PM evaluates to 6 on every sampled state
    let out = ctxlab(&["eval", "--inequality", "pm", "--states", states_s]);
    assert!(out.status.success());
    for line in stdout(&out).lines() {
        let v: f64 = line.parse().unwrap();
        assert!((v - 6.0).abs() < 1e-9);
    }

    // CHSH at the textbook singlet angles needs the eight-angle flag
    let out = ctxlab(&["eval", "--inequality", "chsh", "--states", states_s]);
    assert_eq!(out.status.code(), Some(1));
    let out = ctxlab(&[
        "eval",
        "--inequality",
        "chsh",
        "--states",
        states_s,
        "--angles",
        "0,0,1.5707963267948966,0,2.356194490192345,3.141592653589793,2.356194490192345,0",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn usage_and_io_exit_codes() {
    let out = ctxlab(&["cscan", "--n", "0", "--out", "/tmp/никогда.csv"]);
    assert_eq!(out.status.code(), Some(1));

    let out = ctxlab(&[
        "cscan",
        "--n",
        "5",
        "--out",
        "/nonexistent-dir/deep/r.csv",
    ]);
    assert_eq!(out.status.code(), Some(2));

    let out = ctxlab(&["stats", "--in", "/nonexistent-dir/none.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cscan_resume_matches_full_run() {
    let dir = tempfile::tempdir().unwrap();
    let full = dir.path().join("full.csv");
    let part = dir.path().join("part.csv");
    let full_s = full.to_str().unwrap();
    let part_s = part.to_str().unwrap();
    assert!(ctxlab(&["cscan", "--n", "300", "--seed", "9", "--out", full_s])
        .status
        .success());
    // fake an interrupted checkpoint: keep header + 120 rows, torn tail
    let text = std::fs::read_to_string(&full).unwrap();
    let prefix: String = text.lines().take(122).map(|l| format!("{l}\n")).collect();
    std::fs::write(&part, format!("{prefix}55,0.3")).unwrap();
    assert!(ctxlab(&[
        "cscan", "--n", "300", "--seed", "9", "--out", part_s, "--resume"
    ])
    .status
    .success());
    assert_eq!(std::fs::read(&part).unwrap(), std::fs::read(&full).unwrap());
}
