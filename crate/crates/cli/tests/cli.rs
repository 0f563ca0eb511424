use std::process::{Command, Output};

fn nilcollect(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nilcollect"))
        .args(args)
        .env("NILCOLLECT_CACHE", std::env::temp_dir().join("nilcollect-cli-tests"))
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn basis_lists_weight_four() {
    let o = nilcollect(&["basis", "--class", "4", "--json"]);
    assert!(o.status.success());
    let rows: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 8);
    assert_eq!(rows[7]["element"], "[b,a,b,b]");
}

#[test]
fn collect_and_oracle() {
    let o = nilcollect(&["collect", "--class", "3", "ba"]);
    assert_eq!(stdout(&o).trim(), "a b [b,a]");
    let o = nilcollect(&["collect", "--gens", "c:2,d:3", "--class", "7", "dc"]);
    assert_eq!(stdout(&o).trim(), "c d [d,c]");
    let o = nilcollect(&["oracle-check", "--class", "6", "(ab)^5 [b^2,a]"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("ok"));
}

#[test]
fn binres_reports_stable_residue() {
    let o = nilcollect(&["binres", "--p", "2", "--d", "8", "--scale", "3", "--mod", "8", "--krange", "5:12"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("stable: 7"));
}

#[test]
fn rv_prints_nonzero_coordinates() {
    let o = nilcollect(&["rv", "--class", "7", "[b,a]^128"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "([b,a], 4)");
    let o = nilcollect(&["rv", "--class", "7", "b^3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_exit_codes() {
    let o = nilcollect(&["verify", "--filter", "basis-c*"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("PASS"));
    let o = nilcollect(&["verify", "--filter", "nonexistent-*"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).is_empty());
    let o = nilcollect(&["verify", "--filter", "rv-tail8q", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let rec: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(rec["verdict"], "skipped");
    let o = nilcollect(&["verify", "--frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_writes_json_lines() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("claims.jsonl");
    let o = nilcollect(&["verify", "--filter", "binres-*", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let ids: Vec<String> = text
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["id"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(ids, ["binres-2power", "binres-3power", "binres-bands"]);
}

#[test]
fn span_report_with_query() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("span.json");
    let o = nilcollect(&["span", "--class", "5", "--len", "1", "--query", "[b,a]^128", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(r["pairs"], 16);
    assert!(["in sampled span", "not in sampled span"].contains(&r["query"]["answer"].as_str().unwrap()));
}
