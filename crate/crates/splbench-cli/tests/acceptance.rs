//! CLI-level acceptance: repeating `generate` and `bench` with identical
//! flags must produce byte-identical outputs, and exit codes follow the
//! 0/1/2 contract.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_splbench")
}

fn asset(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../assets/game").join(name)
}

fn scratch_dir(label: &str) -> PathBuf {
    static COUNTER: AtomicUsize = AtomicUsize::new(0);
    let dir = std::env::temp_dir().join(format!(
        "splbench-test-{}-{label}-{}",
        std::process::id(),
        COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(binary())
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_exit(output: &Output, code: i32) {
    assert_eq!(
        output.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

fn dir_contents(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|entry| {
            let path = entry.unwrap().path();
            (
                path.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&path).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn criterion_07_cli_generate_and_bench_are_byte_deterministic() {
    let fm = asset("model.xml");
    let out_a = scratch_dir("gen-a");
    let out_b = scratch_dir("gen-b");
    for out in [&out_a, &out_b] {
        let output = run(&[
            "generate",
            "--fm",
            fm.to_str().unwrap(),
            "--seed",
            "42",
            "--states",
            "10",
            "--inputs",
            "a,b,c",
            "--outputs",
            "0,1",
            "-o",
            out.to_str().unwrap(),
        ]);
        assert_exit(&output, 0);
    }
    let files_a = dir_contents(&out_a);
    let files_b = dir_contents(&out_b);
    assert!(files_a.len() >= 6, "ffsm, manifest and four products");
    assert_eq!(files_a, files_b, "generate is not byte-deterministic");

    let bench_dir = scratch_dir("bench");
    let mut reports = Vec::new();
    for tag in ["first", "second"] {
        let report = bench_dir.join(format!("report-{tag}.json"));
        let csv = bench_dir.join(format!("report-{tag}.csv"));
        let output = run(&[
            "bench",
            "--fm",
            fm.to_str().unwrap(),
            "--ffsm",
            asset("game.ffsm.dot").to_str().unwrap(),
            "--report",
            report.to_str().unwrap(),
            "--csv",
            csv.to_str().unwrap(),
        ]);
        assert_exit(&output, 0);
        reports.push((fs::read(&report).unwrap(), fs::read(&csv).unwrap()));
    }
    assert_eq!(reports[0], reports[1], "bench is not byte-deterministic");
    println!("criterion 7: PASS - generate and bench reruns are byte-identical");
}

#[test]
fn validate_passes_on_the_bundled_game_spl() {
    let output = run(&[
        "validate",
        "--fm",
        asset("model.xml").to_str().unwrap(),
        "--ffsm",
        asset("game.ffsm.dot").to_str().unwrap(),
    ]);
    assert_exit(&output, 0);
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("4 valid configurations"));
    assert!(stdout.contains("validation: PASS"));
}

#[test]
fn derive_rejects_an_invalid_configuration_with_exit_1() {
    let out = scratch_dir("derive").join("bad.dot");
    let output = run(&[
        "derive",
        "--fm",
        asset("model.xml").to_str().unwrap(),
        "--ffsm",
        asset("game.ffsm.dot").to_str().unwrap(),
        "--config",
        "Game,Services,Start,Pause,Game_Type,Ping_Pong,Brick_Game",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_exit(&output, 1);
}

#[test]
fn derive_emits_the_bundled_product_bytes() {
    let out = scratch_dir("derive").join("pp.dot");
    let output = run(&[
        "derive",
        "--fm",
        asset("model.xml").to_str().unwrap(),
        "--ffsm",
        asset("game.ffsm.dot").to_str().unwrap(),
        "--config",
        "Game,Services,Start,Pause,Game_Type,Ping_Pong",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_exit(&output, 0);
    assert_eq!(
        fs::read(&out).unwrap(),
        fs::read(asset("product_2_Ping_Pong.dot")).unwrap()
    );
}

#[test]
fn usage_errors_exit_2() {
    // Unknown oracle spelling.
    let output = run(&[
        "learn",
        "--fsm",
        asset("product_2_Ping_Pong.dot").to_str().unwrap(),
        "--oracle",
        "psychic",
    ]);
    assert_exit(&output, 2);
    // Missing file.
    let output = run(&["validate", "--fm", "/nonexistent/model.xml"]);
    assert_exit(&output, 2);
    // Clap-level: bench without a source.
    let output = run(&["bench", "--report", "/tmp/never.json"]);
    assert_exit(&output, 2);
}

#[test]
fn learn_prints_metrics_and_writes_the_report() {
    let report = scratch_dir("learn").join("learn.json");
    let output = run(&[
        "learn",
        "--fsm",
        asset("product_1_Brick_Game_Save.dot").to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_exit(&output, 0);
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("learned_states: 7"));
    assert!(stdout.contains("equivalent: true"));
    let json: serde_json::Value = serde_json::from_slice(&fs::read(&report).unwrap()).unwrap();
    assert_eq!(json["learned_states"], 7);
    assert_eq!(json["equivalent"], true);
    assert!(json["metrics"]["rounds"].as_u64().unwrap() >= 2);
}

#[test]
fn bench_over_a_products_directory_matches_the_ffsm_run() {
    // The bundled products are exactly the FFSM's derivations, so both
    // sources must measure identical totals.
    let dir = scratch_dir("bench-products");
    let products_dir = dir.join("products");
    fs::create_dir_all(&products_dir).unwrap();
    for file in [
        "product_0_Brick_Game.dot",
        "product_1_Brick_Game_Save.dot",
        "product_2_Ping_Pong.dot",
        "product_3_Ping_Pong_Save.dot",
    ] {
        fs::copy(asset(file), products_dir.join(file)).unwrap();
    }
    let ffsm_report = dir.join("ffsm.json");
    let products_report = dir.join("products.json");
    assert_exit(
        &run(&[
            "bench",
            "--fm",
            asset("model.xml").to_str().unwrap(),
            "--ffsm",
            asset("game.ffsm.dot").to_str().unwrap(),
            "--report",
            ffsm_report.to_str().unwrap(),
        ]),
        0,
    );
    assert_exit(
        &run(&[
            "bench",
            "--products",
            products_dir.to_str().unwrap(),
            "--report",
            products_report.to_str().unwrap(),
        ]),
        0,
    );
    let ffsm_json: serde_json::Value =
        serde_json::from_slice(&fs::read(&ffsm_report).unwrap()).unwrap();
    let products_json: serde_json::Value =
        serde_json::from_slice(&fs::read(&products_report).unwrap()).unwrap();
    for key in ["total_rounds", "total_mq_count", "total_resets", "sum_product_states"] {
        assert_eq!(
            ffsm_json["family"][key], products_json["family"][key],
            "family totals differ on {key}"
        );
    }
    // Only the FFSM source knows the family model size.
    assert_eq!(ffsm_json["family"]["ffsm_cond_states"], 9);
    assert!(products_json["family"].get("ffsm_cond_states").is_none());
}

#[test]
fn analyze_reports_merged_pairs_for_a_save_product() {
    let report = scratch_dir("analyze").join("analysis.json");
    let output = run(&[
        "analyze",
        "--fsm",
        asset("product_3_Ping_Pong_Save.dot").to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_exit(&output, 0);
    let json: serde_json::Value = serde_json::from_slice(&fs::read(&report).unwrap()).unwrap();
    assert!(json["rounds"].as_u64().unwrap() >= 2);
    assert!(!json["merged_pairs"].as_array().unwrap().is_empty());
}
