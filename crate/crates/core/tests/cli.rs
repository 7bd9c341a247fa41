use proptest::prelude::*;
use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

use relinfo::cli::StudyTable;
use relinfo::{StudyConfig, VariableRecord};

const TABLE: &str = "id,n,n0,x0,p0,unit_cost,setup_cost\n\
rs1,1000,800,440,0.5,1,0\n\
full,800,800,440,0.5,1,0\n\
flat,100,80,40,0.5,1,0\n\
rs2,300,250,160,0.5,2,5\n";

fn relinfo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relinfo")).args(args).output().expect("binary runs")
}

fn json(out: &[u8]) -> Value {
    serde_json::from_slice(out).expect("valid json")
}

fn table_file(dir: &Path, text: &str) -> String {
    let path = dir.join("table.csv");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn row<'a>(doc: &'a Value, id: &str) -> &'a Value {
    doc["rows"].as_array().unwrap().iter().find(|r| r["id"] == id).unwrap()
}

#[test]
fn estimate_reports_plugin_values() {
    let dir = tempfile::tempdir().unwrap();
    let t = table_file(dir.path(), TABLE);
    let out = relinfo(&["estimate", &t]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&out.stdout);
    assert_eq!(doc["schema"], "relinfo/1");

    let rs1 = row(&doc, "rs1");
    assert_eq!(rs1["n1"], 200);
    assert!((rs1["plugin_ri1"].as_f64().unwrap() - 0.8).abs() < 1e-12);
    assert!((rs1["expected_inverse_ri"].as_f64().unwrap() - 1.25).abs() < 1e-12);
    assert!((rs1["equivalent_additional_individuals"].as_f64().unwrap() - 250.0).abs() < 1e-9);

    let full = row(&doc, "full");
    assert_eq!(full["n1"], 0);
    assert_eq!(full["plugin_ri1"], 1.0);
    assert_eq!(full["sd_inverse_ri"], 0.0);

    let flat = row(&doc, "flat");
    assert_eq!(flat["stable"], false);
    assert!(flat["error"].as_str().unwrap().contains("flat"));
    assert!(flat["expected_inverse_ri"].is_null());
    assert_eq!(doc["hard_failures"], 0);
}

#[test]
fn estimate_csv_and_count() {
    let dir = tempfile::tempdir().unwrap();
    let t = table_file(dir.path(), TABLE);
    let out = relinfo(&["estimate", &t, "--n1", "100", "--format", "csv"]);
    // "full" has nothing missing, so a count of 100 fails that row and the exit code.
    assert!(!out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    let idx = |h: &str| headers.iter().position(|x| x == h).unwrap();
    let recs: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(recs.len(), 4);
    let rs1 = recs.iter().find(|r| &r[0] == "rs1").unwrap();
    assert_eq!(&rs1[idx("n1")], "100");
    let e: f64 = rs1[idx("expected_inverse_ri")].parse().unwrap();
    assert!((e - 1.125).abs() < 1e-12);
    // A count above the missing total is a hard failure for that row.
    let full = recs.iter().find(|r| &r[0] == "full").unwrap();
    assert!(!full[idx("error")].is_empty());
}

#[test]
fn estimate_fails_on_boundary_mle() {
    let dir = tempfile::tempdir().unwrap();
    let t = table_file(dir.path(), "id,n,n0,x0\nzero,100,80,0\n");
    let out = relinfo(&["estimate", &t, "--p0", "0.5"]);
    assert!(!out.status.success());
    assert_eq!(json(&out.stdout)["hard_failures"], 1);

    let out = relinfo(&["--continuity-correction", "estimate", &t, "--p0", "0.5"]);
    assert!(out.status.success());
    assert_eq!(row(&json(&out.stdout), "zero")["stable"], true);
}

#[test]
fn log_base_only_changes_lod_column() {
    let dir = tempfile::tempdir().unwrap();
    let t = table_file(dir.path(), TABLE);
    let e = json(&relinfo(&["estimate", &t]).stdout);
    let ten = json(&relinfo(&["--log-base", "10", "estimate", &t]).stdout);
    let (a, b) = (row(&e, "rs1"), row(&ten, "rs1"));
    let ratio = a["lod_ob"].as_f64().unwrap() / b["lod_ob"].as_f64().unwrap();
    assert!((ratio - std::f64::consts::LN_10).abs() < 1e-12);
    assert_eq!(a["expected_inverse_ri"], b["expected_inverse_ri"]);
    assert_eq!(a["sd_inverse_ri"], b["sd_inverse_ri"]);
}

#[test]
fn design_budget_extremes() {
    let dir = tempfile::tempdir().unwrap();
    let t = table_file(dir.path(), TABLE);

    let out = relinfo(&["design", &t, "--budget", "0"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&out.stdout);
    assert!(doc["allocations"].as_object().unwrap().values().all(|v| v == 0));
    assert!((doc["objective"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(doc["excluded"][0]["id"], "flat");

    // Everything resolvable: 200 + 0 + 2 * 50 + 5 setup.
    let out = relinfo(&["design", &t, "--budget", "305"]);
    let doc = json(&out.stdout);
    assert_eq!(doc["allocations"]["rs1"], 200);
    assert_eq!(doc["allocations"]["rs2"], 50);
    assert_eq!(doc["optimal"], true);
    assert!((doc["budget_used"].as_f64().unwrap() - 305.0).abs() < 1e-9);
}

#[test]
fn design_matches_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let t = table_file(
        dir.path(),
        "id,n,n0,x0,p0,unit_cost,setup_cost,max_resolvable\n\
         a,60,50,32,0.5,1,3,10\n\
         b,40,30,21,0.5,0.5,4,10\n\
         c,80,70,40,0.5,2,0,10\n",
    );
    for budget in ["0", "3.5", "7", "12", "20", "40"] {
        let exact = json(&relinfo(&["design", &t, "--budget", budget]).stdout);
        let brute = json(&relinfo(&["design", &t, "--budget", budget, "--oracle"]).stdout);
        let (x, y) = (exact["objective"].as_f64().unwrap(), brute["objective"].as_f64().unwrap());
        assert!((x - y).abs() <= 1e-12, "budget {budget}: {x} vs {y}");
        assert_ne!(exact["solver"], brute["solver"]);
    }
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let out_dir = dir.path().join(name);
        let out = relinfo(&[
            "simulate", "--reps", "5000", "--seed", seed, "--bins", "20", "--ratios", "2,4",
            "--out-dir", out_dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        ["contour.csv", "reference_lines.csv", "ratio_stats.json"]
            .map(|f| std::fs::read(out_dir.join(f)).unwrap())
    };
    let a = run("a", "9");
    let b = run("b", "9");
    let c = run("c", "10");
    assert_eq!(a, b);
    assert_ne!(a[0], c[0]);

    let stats = json(&a[2]);
    assert_eq!(stats["config"]["seed"], 9);
    let lines = String::from_utf8(a[1].clone()).unwrap();
    assert_eq!(lines.lines().count(), 5);
    let contour = String::from_utf8(a[0].clone()).unwrap();
    assert_eq!(contour.lines().count(), 401);
}

#[test]
fn simulate_complete_data_stays_on_diagonal() {
    let dir = tempfile::tempdir().unwrap();
    let out = relinfo(&[
        "simulate", "--n", "500", "--n0", "500", "--reps", "3000", "--seed", "1", "--bins", "15",
        "--out-dir", dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let stats = json(&std::fs::read(dir.path().join("ratio_stats.json")).unwrap());
    let rs = &stats["ratio_stats"];
    assert!((rs["max"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((stats["correlation"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn curves_are_symmetric_and_normalized() {
    let out = relinfo(&["curves", "--n", "100", "--true-p", "0.6"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), ["x0", "sd", "density_p=0.6"]);
    let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 81);
    assert!(rows[40][1].is_empty());
    for x0 in 1..40 {
        let a: f64 = rows[x0][1].parse().unwrap();
        let b: f64 = rows[80 - x0][1].parse().unwrap();
        assert!((a - b).abs() <= 1e-9 * a.max(1.0), "x0 {x0}: {a} vs {b}");
    }
    let mass: f64 = rows.iter().map(|r| r[2].parse::<f64>().unwrap()).sum();
    assert!((mass - 1.0).abs() <= 1e-9);
}

#[test]
fn errors_are_structured() {
    let out = relinfo(&["curves", "--n", "100", "--p0", "1.5"]);
    assert!(!out.status.success());
    let doc = json(&out.stderr);
    assert_eq!(doc["schema"], "relinfo/1");
    assert!(doc["error"]["kind"].is_string());

    let dir = tempfile::tempdir().unwrap();
    let t = table_file(dir.path(), "id,n,n0,x0,p0\na,10,20,3,0.5\n");
    let out = relinfo(&["estimate", &t]);
    assert!(!out.status.success());
    let msg = json(&out.stderr)["error"]["message"].as_str().unwrap().to_owned();
    assert!(msg.contains("line 2"), "{msg}");

    let out = relinfo(&["estimate", "/nonexistent/table.csv"]);
    assert!(!out.status.success());
    assert!(json(&out.stderr)["error"].is_object());
}

fn record() -> impl Strategy<Value = VariableRecord> {
    (1u64..5000, 0u64..500, 0.01f64..0.99, 0u32..100, 0u32..100).prop_flat_map(
        |(n0, missing, p0, unit, setup)| {
            (0..=n0, 0..=missing).prop_map(move |(x0, max_res)| {
                VariableRecord::new("x", StudyConfig::new(n0 + missing, n0, x0, p0).unwrap())
                    .with_costs(unit as f64 / 4.0, setup as f64 / 8.0)
                    .with_max_resolvable(max_res)
            })
        },
    )
}

proptest! {
    #[test]
    fn study_table_round_trips(records in prop::collection::vec(record(), 1..6)) {
        let records: Vec<_> = records
            .into_iter()
            .enumerate()
            .map(|(i, mut r)| { r.id = format!("var,{i}"); r })
            .collect();
        let table = StudyTable::from_records(records);
        let text = table.to_csv().unwrap();
        let back = StudyTable::parse(&text, None).unwrap();
        prop_assert_eq!(back.records, table.records);
    }
}
