use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn trilayer(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trilayer")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn gen_is_deterministic_and_matches_committed_case() {
    let spec = data("case9_desk.gen.toml");
    let a = trilayer(&["gen", p(&spec), "--seed", "1"]);
    let b = trilayer(&["gen", p(&spec), "--seed", "1"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let committed = fs::read_to_string(data("case9_desk.toml")).unwrap();
    let body: String = committed.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    assert_eq!(String::from_utf8(a.stdout).unwrap(), body);
    let c = trilayer(&["gen", p(&spec), "--seed", "2"]);
    assert_ne!(c.stdout, b.stdout);
}

#[test]
fn solve_writes_reports_and_validate_accepts_them() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("desk");
    let case = data("case9_desk.toml");
    let o = trilayer(&["solve", p(&case), "--out", p(&prefix)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(prefix.with_extension("csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "area,bus,alpha,beta,bid_energy,bid_reserve,lmp,energy,reserve,profit");
    assert_eq!(lines.count(), 3);
    assert!(!csv.contains(';'));
    let txt = fs::read_to_string(prefix.with_extension("txt")).unwrap();
    assert!(txt.contains("profit       3270.850"), "{txt}");
    assert_eq!(String::from_utf8(o.stdout).unwrap(), txt);

    let json = prefix.with_extension("json");
    let v = trilayer(&["validate", p(&case), p(&json)]);
    assert_eq!(code(&v), 0, "{}", String::from_utf8_lossy(&v.stdout));
}

#[test]
fn tampered_profit_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("desk");
    let case = data("case9_desk.toml");
    assert_eq!(code(&trilayer(&["solve", p(&case), "--out", p(&prefix)])), 0);
    let json = prefix.with_extension("json");
    let mut report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    let profit = report["result"]["profit"].as_f64().unwrap();
    report["result"]["profit"] = (profit + 1.0).into();
    fs::write(&json, serde_json::to_string(&report).unwrap()).unwrap();

    let v = trilayer(&["validate", p(&case), p(&json)]);
    assert_eq!(code(&v), 4);
    let out = String::from_utf8(v.stdout).unwrap();
    let line = out.lines().find(|l| l.contains("profit identity")).unwrap();
    assert!(line.starts_with("FAIL"), "{line}");
    let residual: f64 = line.split_whitespace().nth(3).unwrap().parse().unwrap();
    assert!((residual - 1.0 / (1.0 + profit)).abs() < 1e-6, "{line}");
    for ok in ["kkt", "embedded clearing", "embedded response"] {
        assert!(out.lines().any(|l| l.starts_with("pass") && l.contains(ok)), "{ok}: {out}");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let desk = fs::read_to_string(data("case9_desk.toml")).unwrap();

    let short = trilayer(&["solve", p(&data("case9_desk.toml")), "--node-limit", "250"]);
    assert_eq!(code(&short), 3);
    assert!(String::from_utf8(short.stdout).unwrap().contains("LimitReached"));

    let infeasible = dir.path().join("short.toml");
    fs::write(&infeasible, desk.replace("reserve_req = 60.0", "reserve_req = 100000.0")).unwrap();
    assert_eq!(code(&trilayer(&["solve", p(&infeasible)])), 2);

    let broken = dir.path().join("broken.toml");
    fs::write(&broken, desk.replace("slack_bus = 1", "slack_bus = 42")).unwrap();
    let o = trilayer(&["solve", p(&broken)]);
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));

    let nonprofit = trilayer(&["solve", p(&data("case9_desk.toml")), "--variant", "nonprofit"]);
    assert_eq!(code(&nonprofit), 0);
    assert!(String::from_utf8(nonprofit.stdout).unwrap().contains("profit       0.000"));
}

#[test]
fn export_lists_every_binary() {
    let dir = tempfile::tempdir().unwrap();
    let spec = data("case9_large.gen.toml");
    let full = dir.path().join("full.mps");
    let np = dir.path().join("nonprofit.mps");
    assert_eq!(code(&trilayer(&["export", p(&spec), "--seed", "1", "--out", p(&full)])), 0);
    assert_eq!(code(&trilayer(&["export", p(&spec), "--seed", "1", "--variant", "nonprofit", "--out", p(&np)])), 0);
    let text = fs::read_to_string(&full).unwrap();
    assert_eq!(text.lines().filter(|l| l.trim_start().starts_with("BV ")).count(), 415);
    assert!(text.trim_end().ends_with("ENDATA"));
    let eq_rows = |t: &str| {
        t.lines()
            .skip_while(|l| !l.starts_with("ROWS"))
            .take_while(|l| !l.starts_with("COLUMNS"))
            .filter(|l| l.trim_start().starts_with("E "))
            .count()
    };
    // nonprofit pins energy and reserve prices in each of the three areas
    assert_eq!(eq_rows(&fs::read_to_string(&np).unwrap()), eq_rows(&text) + 6);
    let names = fs::read_to_string(full.with_extension("mps.names")).unwrap();
    assert!(names.lines().count() > 415);
    let again = dir.path().join("again.mps");
    trilayer(&["export", p(&spec), "--seed", "1", "--out", p(&again)]);
    assert_eq!(fs::read(&again).unwrap(), text.into_bytes());
}

#[test]
fn sweep_writes_one_row_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = trilayer(&[
        "sweep",
        p(&data("case9_desk.toml")),
        "--target",
        "rival-bid-offset",
        "--from",
        "-2",
        "--to",
        "2",
        "--points",
        "5",
        "--workers",
        "2",
        "--out",
        p(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert!(rows[0].starts_with("offset,status,profit,welfare,welfare_total,gap,alpha_1"));
    assert_eq!(rows.len(), 6);
    let offsets: Vec<f64> = rows[1..].iter().map(|r| r.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(offsets, vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
    let mid: Vec<&str> = rows[3].split(',').collect();
    assert_eq!(mid[1], "Optimal");
    assert!((mid[2].parse::<f64>().unwrap() - 3270.850).abs() < 1e-3, "{}", rows[3]);
}
