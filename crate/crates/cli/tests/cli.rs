//! End-to-end CLI behavior: exit codes, flags, and format equivalence.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_adscore")
}

fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn workdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("adscore-cli-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(binary())
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn fit_reference(dir: &Path) -> PathBuf {
    let model = dir.join("model.json");
    let out = run_in(
        dir,
        &[
            "fit",
            data_path("reference_deployments.csv").to_str().unwrap(),
            "-o",
            model.to_str().unwrap(),
        ],
    );
    assert!(
        out.status.success(),
        "fit failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    model
}

#[test]
fn unknown_flag_exits_with_usage_code() {
    let dir = workdir("usage");
    let out = run_in(&dir, &["fit", "--definitely-not-a-flag"]);
    assert_eq!(out.status.code(), Some(1));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn help_and_version_exit_zero() {
    let dir = workdir("help");
    assert_eq!(run_in(&dir, &["--help"]).status.code(), Some(0));
    assert_eq!(run_in(&dir, &["--version"]).status.code(), Some(0));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn fit_summary_flags_negative_discrimination() {
    let dir = workdir("fit-summary");
    let model = dir.join("model.json");
    let out = run_in(
        &dir,
        &[
            "fit",
            data_path("reference_deployments.csv").to_str().unwrap(),
            "-o",
            model.to_str().unwrap(),
        ],
    );
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let flagged: Vec<&str> = stdout
        .lines()
        .filter(|line| line.contains("negative discrimination"))
        .collect();
    assert_eq!(flagged.len(), 1, "summary was:\n{stdout}");
    assert!(flagged[0].contains("control_d"));
    assert!(model.exists());
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn fit_on_two_rows_exits_with_data_code() {
    let dir = workdir("fit-short");
    let short = dir.join("short.csv");
    fs::write(&short, "deployment_id,a,b\nd1,1,0\nd2,0,1\n").unwrap();
    let out = run_in(&dir, &["fit", short.to_str().unwrap(), "-o", "model.json"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("insufficient"), "stderr: {stderr}");
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn fit_one_pl_reports_unit_discriminations() {
    let dir = workdir("fit-1pl");
    let model_path = dir.join("model.json");
    let out = run_in(
        &dir,
        &[
            "fit",
            data_path("reference_deployments.csv").to_str().unwrap(),
            "-o",
            model_path.to_str().unwrap(),
            "--model",
            "1pl",
        ],
    );
    assert!(out.status.success());
    let parsed: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&model_path).unwrap()).unwrap();
    assert_eq!(parsed["model_kind"], "1pl");
    for item in parsed["items"].as_array().unwrap() {
        assert_eq!(item["a"], 1.0);
    }
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn score_formats_carry_identical_numbers() {
    let dir = workdir("score-formats");
    let model = fit_reference(&dir);
    let responses = data_path("reference_deployments.csv");

    let json_out = run_in(
        &dir,
        &[
            "score",
            responses.to_str().unwrap(),
            model.to_str().unwrap(),
            "--format",
            "json",
            "--gaps",
        ],
    );
    assert!(json_out.status.success());
    let parsed: serde_json::Value = serde_json::from_slice(&json_out.stdout).unwrap();
    let rows = parsed["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 43);

    let csv_out = run_in(
        &dir,
        &[
            "score",
            responses.to_str().unwrap(),
            model.to_str().unwrap(),
            "--format",
            "csv",
            "--gaps",
        ],
    );
    assert!(csv_out.status.success());
    let csv_text = String::from_utf8(csv_out.stdout).unwrap();
    let mut lines = csv_text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let theta_col = header.iter().position(|h| *h == "theta").unwrap();
    let ads_col = header.iter().position(|h| *h == "ads").unwrap();
    assert!(header.iter().any(|h| h.starts_with("gap:")));

    for (line, row) in lines.zip(rows) {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[0], row["deployment_id"].as_str().unwrap());
        let csv_theta: f64 = cells[theta_col].parse().unwrap();
        let csv_ads: f64 = cells[ads_col].parse().unwrap();
        assert_eq!(
            csv_theta.to_bits(),
            row["theta"].as_f64().unwrap().to_bits()
        );
        assert_eq!(csv_ads.to_bits(), row["ads"].as_f64().unwrap().to_bits());
    }
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn score_without_gap_flag_has_no_gap_columns() {
    let dir = workdir("score-nogaps");
    let model = fit_reference(&dir);
    let out = run_in(
        &dir,
        &[
            "score",
            data_path("reference_deployments.csv").to_str().unwrap(),
            model.to_str().unwrap(),
            "--format",
            "csv",
        ],
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(!text.lines().next().unwrap().contains("gap:"));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn score_with_mismatched_items_exits_with_data_code() {
    let dir = workdir("score-mismatch");
    let model = fit_reference(&dir);
    let other = dir.join("other.csv");
    fs::write(
        &other,
        "deployment_id,x,y\nd1,1,0\nd2,0,1\nd3,1,1\nd4,0,0\n",
    )
    .unwrap();
    let out = run_in(
        &dir,
        &["score", other.to_str().unwrap(), model.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(2));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn report_emits_per_item_detail_and_round_trips() {
    let dir = workdir("report");
    let model = fit_reference(&dir);
    let report_path = dir.join("report.json");
    let out = run_in(
        &dir,
        &[
            "report",
            data_path("reference_deployments.csv").to_str().unwrap(),
            model.to_str().unwrap(),
            "-o",
            report_path.to_str().unwrap(),
        ],
    );
    assert!(out.status.success());
    let reports =
        adscore_core::store::load_score_reports(fs::File::open(&report_path).unwrap()).unwrap();
    assert_eq!(reports.len(), 43);
    assert_eq!(reports[0].per_item.len(), 5);
    for report in &reports {
        // recommendations list exactly the failed items, cheapest win first
        let failed = report
            .per_item
            .iter()
            .filter(|item| item.response.map(|r| !r.is_pass()).unwrap_or(false))
            .count();
        assert_eq!(report.recommendations.len(), failed);
    }
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn curves_rejects_degenerate_grid() {
    let dir = workdir("curves-bad");
    let model = fit_reference(&dir);
    let out = run_in(
        &dir,
        &[
            "curves",
            model.to_str().unwrap(),
            "--min",
            "0",
            "--max",
            "0",
            "--step",
            "0.1",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn curves_emits_81_rows_for_default_grid() {
    let dir = workdir("curves");
    let model = fit_reference(&dir);
    let out = run_in(
        &dir,
        &["curves", model.to_str().unwrap(), "--format", "csv"],
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 82); // header + 81 grid rows
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn budget_rejects_out_of_range_slo() {
    let dir = workdir("budget-range");
    let out = run_in(&dir, &["budget", "--slo", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run_in(&dir, &["budget", "--slo", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn soft_budget_selects_service_and_rejects_unknown() {
    let dir = workdir("soft-budget");
    let mesh = data_path("mesh.json");
    let out = run_in(
        &dir,
        &["soft-budget", mesh.to_str().unwrap(), "--service", "svc-1"],
    );
    assert!(out.status.success());
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let services = parsed["services"].as_array().unwrap();
    assert_eq!(services.len(), 1);
    assert_eq!(services[0]["service_id"], "svc-1");
    assert_eq!(services[0]["results"].as_array().unwrap().len(), 2);

    let out = run_in(
        &dir,
        &["soft-budget", mesh.to_str().unwrap(), "--service", "ghost"],
    );
    assert_eq!(out.status.code(), Some(2));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn deploy_index_reports_each_application() {
    let dir = workdir("deploy-index");
    let out = run_in(
        &dir,
        &[
            "deploy-index",
            data_path("outcomes.json").to_str().unwrap(),
            "--format",
            "csv",
        ],
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("storefront,4,pearson,"));
    assert!(lines[2].starts_with("payments,3,pearson,"));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn deploy_index_with_too_few_versions_names_the_application() {
    let dir = workdir("deploy-index-short");
    let outcomes = dir.join("outcomes.json");
    fs::write(
        &outcomes,
        r#"{
  "format": "adscore.outcomes/1",
  "applications": [
    {
      "application_id": "lonely",
      "versions": [
        { "version": "v1", "ads": 1.0, "window": { "start": "2024-01-01T00:00:00Z", "end": "2024-02-01T00:00:00Z" }, "achieved_slo": 0.99 },
        { "version": "v2", "ads": 2.0, "window": { "start": "2024-02-01T00:00:00Z", "end": "2024-03-01T00:00:00Z" }, "achieved_slo": 0.995 }
      ]
    }
  ]
}"#,
    )
    .unwrap();
    let out = run_in(&dir, &["deploy-index", outcomes.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("lonely"));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn deploy_index_zero_variance_is_a_numerical_error() {
    let dir = workdir("deploy-index-flat");
    let outcomes = dir.join("outcomes.json");
    fs::write(
        &outcomes,
        r#"{
  "format": "adscore.outcomes/1",
  "applications": [
    {
      "application_id": "flat",
      "versions": [
        { "version": "v1", "ads": 2.0, "window": { "start": "2024-01-01T00:00:00Z", "end": "2024-02-01T00:00:00Z" }, "achieved_slo": 0.99 },
        { "version": "v2", "ads": 2.0, "window": { "start": "2024-02-01T00:00:00Z", "end": "2024-03-01T00:00:00Z" }, "achieved_slo": 0.995 },
        { "version": "v3", "ads": 2.0, "window": { "start": "2024-03-01T00:00:00Z", "end": "2024-04-01T00:00:00Z" }, "achieved_slo": 0.999 }
      ]
    }
  ]
}"#,
    )
    .unwrap();
    let out = run_in(&dir, &["deploy-index", outcomes.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn trend_pipeline_works_from_bundled_history() {
    let dir = workdir("trend");
    let model = fit_reference(&dir);
    let out = run_in(
        &dir,
        &[
            "trend",
            data_path("history.csv").to_str().unwrap(),
            model.to_str().unwrap(),
        ],
    );
    assert!(out.status.success());
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let reports = parsed["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 2);
    // applications sorted by id: payments then storefront
    assert_eq!(reports[0]["application_id"], "payments");
    assert_eq!(reports[1]["application_id"], "storefront");
    let steps = reports[1]["steps"].as_array().unwrap();
    assert!(steps.iter().all(|step| step["direction"] == "improving"));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn malformed_cell_location_reaches_stderr() {
    let dir = workdir("bad-cell");
    let bad = dir.join("bad.csv");
    fs::write(&bad, "deployment_id,a,b\nd1,1,0\nd2,2,1\nd3,0,1\n").unwrap();
    let out = run_in(&dir, &["fit", bad.to_str().unwrap(), "-o", "model.json"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("row 2"), "stderr: {stderr}");
    assert!(stderr.contains("column 2"), "stderr: {stderr}");
    let _ = fs::remove_dir_all(&dir);
}
