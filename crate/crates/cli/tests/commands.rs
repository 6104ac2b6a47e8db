use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ngdbf::analysis::{lml_flip_matrix, LmlParams, TailMode};
use ngdbf::QuantizerSpec;

fn ngdbf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ngdbf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    assert!(!out.status.success());
    String::from_utf8(out.stderr.clone()).unwrap()
}

const SMALL_CAMPAIGN: &str = r#"{
  "decoder": { "kind": "m-ngdbf", "theta": -0.9, "lambda": 0.99, "eta": 0.95, "max_iterations": 100 },
  "ebn0_db": [3.0, 3.5],
  "max_frames": 150,
  "target_frame_errors": 20
}"#;

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("campaign.json");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn adapt_table_lists_threshold_events() {
    let out = ngdbf(&[
        "adapt-table",
        "--theta",
        "-0.9",
        "--lambda",
        "0.99",
        "--q",
        "4",
        "--ymax",
        "2.5",
        "--t",
        "300",
    ]);
    assert_eq!(
        stdout(&out),
        "i,theta_level,tau\n0,-0.78125,0\n1,-0.46875,37\n2,-0.15625,106\n"
    );
}

#[test]
fn flip_matrix_prints_csv_then_grid() {
    let out = ngdbf(&[
        "flip-matrix",
        "--mode",
        "lml",
        "--sigma",
        "0.668",
        "--q",
        "4",
        "--ymax",
        "1.5",
        "--dv",
        "3",
        "--dc",
        "6",
        "--pe",
        "0.0672",
    ]);
    let text = stdout(&out);
    let expected = lml_flip_matrix(&LmlParams {
        sigma: 0.668,
        quantizer: QuantizerSpec::new(4, 1.5).unwrap(),
        dv: 3,
        dc: 6,
        pe: 0.0672,
        tails: TailMode::Saturated,
    })
    .unwrap();
    let (csv, grid) = text.split_once("\n\n").unwrap();
    assert_eq!(format!("{csv}\n"), expected.to_csv());
    assert_eq!(grid, expected.to_string());
    assert!(csv.starts_with("level,S=3,S=1,S=-1,S=-3\n"));
}

#[test]
fn flip_matrix_gdbf_mode() {
    let out = ngdbf(&[
        "flip-matrix",
        "--mode",
        "gdbf",
        "--theta",
        "-0.3",
        "--w",
        "0.5",
        "--q",
        "4",
        "--ymax",
        "1.5",
        "--dv",
        "3",
    ]);
    let text = stdout(&out);
    assert_eq!(text.lines().nth(1).unwrap(), "1.40625,1,1,1,1");
}

#[test]
fn flip_matrix_lml_requires_sigma() {
    let out = ngdbf(&[
        "flip-matrix",
        "--mode",
        "lml",
        "--q",
        "4",
        "--ymax",
        "1.5",
        "--dv",
        "3",
        "--dc",
        "6",
    ]);
    assert!(stderr(&out).contains("requires --sigma"));
}

#[test]
fn code_info_reports_bundled_code() {
    let text = stdout(&ngdbf(&["code-info"]));
    assert!(text.contains("n = 1008\n"));
    assert!(text.contains("m = 504\n"));
    assert!(text.contains("rate = 1/2"));
    assert!(text.contains("  3: 1008\n"));
    assert!(text.contains("  6: 504\n"));
}

#[test]
fn simulate_is_reproducible_across_runs_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_CAMPAIGN);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    stdout(&ngdbf(&[
        "simulate",
        "--config",
        &config,
        "--seed",
        "7",
        "--out",
        a.to_str().unwrap(),
        "--workers",
        "1",
    ]));
    stdout(&ngdbf(&[
        "simulate",
        "--config",
        &config,
        "--seed",
        "7",
        "--out",
        b.to_str().unwrap(),
        "--workers",
        "3",
    ]));
    let a = fs::read(a).unwrap();
    assert_eq!(a, fs::read(b).unwrap());
    let text = String::from_utf8(a).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "ebn0_db,frames,bit_errors,frame_errors,ber,fer,avg_iters,smooth_frac,ci_low,ci_high"
    );
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("3,"));

    let other = stdout(&ngdbf(&["simulate", "--config", &config, "--seed", "8"]));
    assert_ne!(other, text);
}

#[test]
fn simulate_json_mirrors_campaign_stats() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_CAMPAIGN);
    let text = stdout(&ngdbf(&[
        "simulate", "--config", &config, "--seed", "7", "--json",
    ]));
    let stats: ngdbf::harness::CampaignStats = serde_json::from_str(&text).unwrap();
    assert_eq!(stats.seed, 7);
    assert_eq!(stats.n, 1008);
    assert_eq!(stats.points.len(), 2);
}

#[test]
fn sweep_prefixes_rows_with_parameter_value() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_CAMPAIGN);
    let text = stdout(&ngdbf(&[
        "sweep",
        "--config",
        &config,
        "--seed",
        "7",
        "--param",
        "theta",
        "--values",
        "-0.9,-0.7",
    ]));
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("theta,ebn0_db,"));
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("-0.9,3,"));
    assert!(lines[4].starts_with("-0.7,3.5,"));
}

#[test]
fn convergence_reports_each_decoder() {
    let dir = tempfile::tempdir().unwrap();
    let list = dir.path().join("decoders.json");
    fs::write(
        &list,
        r#"[{"kind":"s-gdbf","max_iterations":100},{"kind":"min-sum","max_iterations":10}]"#,
    )
    .unwrap();
    let text = stdout(&ngdbf(&[
        "convergence",
        "--decoders",
        list.to_str().unwrap(),
        "--frames",
        "20",
        "--seed",
        "1",
    ]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "decoder,frames,epsilon,frame_errors");
    assert!(lines[1].starts_with("s-gdbf,20,"));
    assert!(lines[2].starts_with("min-sum,20,"));
}

#[test]
fn config_code_path_is_relative_to_config() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("tiny.alist"), ngdbf::PEG_504X1008_ALIST).unwrap();
    let config = write_config(
        dir.path(),
        r#"{"code":"tiny.alist","decoder":{"kind":"s-gdbf","max_iterations":10},"ebn0_db":[4.0],"max_frames":5}"#,
    );
    let text = stdout(&ngdbf(&["simulate", "--config", &config, "--seed", "1"]));
    assert!(text.lines().nth(1).unwrap().starts_with("4,5,"));
}

#[test]
fn seed_is_mandatory_for_stochastic_commands() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_CAMPAIGN);
    assert!(stderr(&ngdbf(&["simulate", "--config", &config])).contains("--seed"));
    assert!(stderr(&ngdbf(&[
        "sweep", "--config", &config, "--param", "eta", "--values", "1"
    ]))
    .contains("--seed"));
}

#[test]
fn errors_are_distinct() {
    let dir = tempfile::tempdir().unwrap();
    let unknown_flag = stderr(&ngdbf(&["code-info", "--bogus"]));
    assert!(unknown_flag.contains("--bogus"));

    let missing = dir.path().join("missing.json");
    let unreadable = stderr(&ngdbf(&[
        "simulate",
        "--config",
        missing.to_str().unwrap(),
        "--seed",
        "1",
    ]));
    assert!(unreadable.contains("cannot read config"));

    let bad = write_config(
        dir.path(),
        r#"{"decoder":{"kind":"s-gdbf","max_iterations":10},"ebn0_db":[3],"max_frames":5,"colour":1}"#,
    );
    let invalid = stderr(&ngdbf(&["simulate", "--config", &bad, "--seed", "1"]));
    assert!(invalid.contains("invalid config") && invalid.contains("colour"));

    let out_of_range = write_config(
        dir.path(),
        r#"{"decoder":{"kind":"m-ngdbf","theta":0.5,"eta":1,"max_iterations":10},"ebn0_db":[3],"max_frames":5}"#,
    );
    assert!(stderr(&ngdbf(&[
        "simulate",
        "--config",
        &out_of_range,
        "--seed",
        "1"
    ]))
    .contains("invalid config"));

    let no_code = stderr(&ngdbf(&["code-info", "--code", missing.to_str().unwrap()]));
    assert!(no_code.contains("cannot load code"));
}

#[test]
fn example_configs_are_valid() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut campaigns = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        if path.file_name().unwrap() == "convergence_decoders.json" {
            let list: Vec<ngdbf::strategy::DecoderSpec> = serde_json::from_str(&text).unwrap();
            assert!(list.iter().all(|d| d.validate().is_ok()));
            continue;
        }
        let config: ngdbf::harness::CampaignConfig =
            serde_json::from_str(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        config.validate().unwrap();
        if let Some(code) = &config.code {
            assert!(dir.join(code).exists(), "{}", path.display());
        }
        campaigns += 1;
    }
    assert!(campaigns >= 4);
}
