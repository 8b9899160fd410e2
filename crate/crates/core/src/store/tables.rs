//! CSV formats: the response-matrix and history inputs, and flat table
//! renderings of the reports for spreadsheet use.
//!
//! Numbers are written with shortest round-trip formatting so identical
//! inputs always produce byte-identical tables.

use std::io::{Read, Write};

use chrono::{DateTime, SecondsFormat, Utc};

use crate::effectiveness::DeploymentIndexResult;
use crate::error::{Error, Result};
use crate::irt::{CurveTable, Response, ResponseMatrix};
use crate::scoring::{DeploymentScoreReport, TrendObservation, TrendReport};
use crate::store::BudgetReport;

const RESPONSES_ID_COLUMN: &str = "deployment_id";

fn parse_cell(text: &str, row: usize, column: usize) -> Result<Option<Response>> {
    match text {
        "1" => Ok(Some(Response::Pass)),
        "0" => Ok(Some(Response::Fail)),
        "" => Ok(None),
        other => Err(Error::InvalidCell {
            row,
            column,
            found: other.to_string(),
        }),
    }
}

fn response_cell(response: &Option<Response>) -> &'static str {
    match response {
        Some(Response::Pass) => "1",
        Some(Response::Fail) => "0",
        None => "",
    }
}

fn float_cell(value: f64) -> String {
    format!("{value}")
}

/// Loads a response matrix from CSV: a `deployment_id` column followed by
/// one column per checklist item, cells in {"0", "1", ""}.
pub fn load_responses<R: Read>(reader: R) -> Result<ResponseMatrix> {
    let mut csv_reader = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = csv_reader.headers()?.clone();
    if headers.is_empty() || &headers[0] != RESPONSES_ID_COLUMN {
        return Err(Error::schema_mismatch(format!(
            "first header column must be {RESPONSES_ID_COLUMN:?}"
        )));
    }
    let item_ids: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    if item_ids.is_empty() {
        return Err(Error::insufficient_data("no item columns in header"));
    }

    let mut rows = Vec::new();
    for (index, record) in csv_reader.records().enumerate() {
        let record = record?;
        let row_number = index + 1;
        if record.len() != headers.len() {
            return Err(Error::schema_mismatch(format!(
                "row {row_number} has {} cells, header has {}",
                record.len(),
                headers.len()
            )));
        }
        let deployment_id = record[0].to_string();
        let mut responses = Vec::with_capacity(item_ids.len());
        for j in 0..item_ids.len() {
            responses.push(parse_cell(&record[j + 1], row_number, j + 2)?);
        }
        rows.push((deployment_id, responses));
    }
    if rows.is_empty() {
        return Err(Error::insufficient_data("response CSV has no body rows"));
    }
    ResponseMatrix::new(item_ids, rows)
}

/// Loads a deployment history CSV with columns
/// `application_id,timestamp,version,<item ids...>`.
///
/// Returns the item ids plus per-application observation lists, applications
/// sorted by id.
#[allow(clippy::type_complexity)]
pub fn load_history<R: Read>(
    reader: R,
) -> Result<(Vec<String>, Vec<(String, Vec<TrendObservation>)>)> {
    let mut csv_reader = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = csv_reader.headers()?.clone();
    let fixed = ["application_id", "timestamp", "version"];
    if headers.len() < 4 || (0..3).any(|i| &headers[i] != fixed[i]) {
        return Err(Error::schema_mismatch(
            "history header must be application_id,timestamp,version,<item ids...>".to_string(),
        ));
    }
    let item_ids: Vec<String> = headers.iter().skip(3).map(str::to_string).collect();

    let mut grouped: Vec<(String, Vec<TrendObservation>)> = Vec::new();
    for (index, record) in csv_reader.records().enumerate() {
        let record = record?;
        let row_number = index + 1;
        if record.len() != headers.len() {
            return Err(Error::schema_mismatch(format!(
                "row {row_number} has {} cells, header has {}",
                record.len(),
                headers.len()
            )));
        }
        let application_id = record[0].to_string();
        let timestamp = DateTime::parse_from_rfc3339(&record[1])
            .map_err(|e| {
                Error::invalid_argument(format!(
                    "row {row_number}: bad timestamp {:?}: {e}",
                    &record[1]
                ))
            })?
            .with_timezone(&Utc);
        let version = record[2].to_string();
        let mut responses = Vec::with_capacity(item_ids.len());
        for j in 0..item_ids.len() {
            responses.push(parse_cell(&record[j + 3], row_number, j + 4)?);
        }
        let observation = TrendObservation {
            timestamp,
            version,
            responses,
        };
        match grouped.iter_mut().find(|(id, _)| *id == application_id) {
            Some((_, list)) => list.push(observation),
            None => grouped.push((application_id, vec![observation])),
        }
    }
    if grouped.is_empty() {
        return Err(Error::insufficient_data("history CSV has no body rows"));
    }
    grouped.sort_by(|x, y| x.0.cmp(&y.0));
    Ok((item_ids, grouped))
}

/// Writes the score table: one row per deployment, response columns
/// mirroring the input matrix, then theta, total score, and the deployment
/// score, plus per-item gap columns when requested.
pub fn write_scores_csv<W: Write>(
    item_ids: &[String],
    reports: &[DeploymentScoreReport<f64>],
    include_gaps: bool,
    writer: &mut W,
) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = vec![RESPONSES_ID_COLUMN.to_string()];
    header.extend(item_ids.iter().cloned());
    header.extend(["theta", "total_score", "ads"].map(String::from));
    if include_gaps {
        header.extend(item_ids.iter().map(|id| format!("gap:{id}")));
    }
    out.write_record(&header)?;

    for report in reports {
        let mut record: Vec<String> = vec![report.deployment_id.clone()];
        record.extend(
            report
                .per_item
                .iter()
                .map(|item| response_cell(&item.response).to_string()),
        );
        record.push(float_cell(report.theta));
        record.push(report.total_raw_score.to_string());
        record.push(float_cell(report.ads));
        if include_gaps {
            record.extend(report.per_item.iter().map(|item| float_cell(item.gap)));
        }
        out.write_record(&record)?;
    }
    out.flush()?;
    Ok(())
}

/// Writes the long-format per-item report: one row per (deployment, item).
pub fn write_report_csv<W: Write>(
    reports: &[DeploymentScoreReport<f64>],
    writer: &mut W,
) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record([
        "deployment_id",
        "item_id",
        "response",
        "success_probability",
        "gap",
        "theta",
        "total_score",
        "ads",
    ])?;
    for report in reports {
        for item in &report.per_item {
            out.write_record([
                report.deployment_id.as_str(),
                item.item_id.as_str(),
                response_cell(&item.response),
                &float_cell(item.success_probability),
                &float_cell(item.gap),
                &float_cell(report.theta),
                &report.total_raw_score.to_string(),
                &float_cell(report.ads),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Writes the curve table: theta, per-item ICC and information columns,
/// test information, and the expected true score.
pub fn write_curves_csv<W: Write>(table: &CurveTable<f64>, writer: &mut W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    let mut header = vec!["theta".to_string()];
    header.extend(table.item_ids.iter().map(|id| format!("icc:{id}")));
    header.extend(table.item_ids.iter().map(|id| format!("info:{id}")));
    header.push("test_information".to_string());
    header.push("expected_true_score".to_string());
    out.write_record(&header)?;
    for point in &table.points {
        let mut record = vec![float_cell(point.theta)];
        record.extend(point.icc.iter().map(|&p| float_cell(p)));
        record.extend(point.information.iter().map(|&i| float_cell(i)));
        record.push(float_cell(point.test_information));
        record.push(float_cell(point.expected_true_score));
        out.write_record(&record)?;
    }
    out.flush()?;
    Ok(())
}

/// Writes trend entries with the direction of each step into a version.
pub fn write_trend_csv<W: Write>(reports: &[TrendReport<f64>], writer: &mut W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record([
        "application_id",
        "timestamp",
        "version",
        "theta",
        "ads",
        "direction",
    ])?;
    for report in reports {
        for (i, entry) in report.entries.iter().enumerate() {
            let direction = if i == 0 {
                String::new()
            } else {
                serde_plain_direction(&report.steps[i - 1].direction)
            };
            out.write_record([
                report.application_id.as_str(),
                &entry.timestamp.to_rfc3339_opts(SecondsFormat::AutoSi, true),
                entry.version.as_str(),
                &float_cell(entry.theta),
                &float_cell(entry.ads),
                &direction,
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

fn serde_plain_direction(direction: &crate::scoring::TrendDirection) -> String {
    match direction {
        crate::scoring::TrendDirection::Improving => "improving".to_string(),
        crate::scoring::TrendDirection::Degrading => "degrading".to_string(),
        crate::scoring::TrendDirection::Flat => "flat".to_string(),
    }
}

/// Writes one row per (service, product) soft-budget result; the
/// `recommended` column marks each service's min-over-products row.
pub fn write_budget_csv<W: Write>(report: &BudgetReport, writer: &mut W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record([
        "service_id",
        "product_id",
        "plain_budget",
        "soft_budget",
        "soft_budget_clamped",
        "penalty_total",
        "recommended",
    ])?;
    for service in &report.services {
        for result in &service.results {
            let penalty: f64 = result.penalty_terms.iter().map(|t| t.contribution).sum();
            let recommended = result.product_id == service.recommended.product_id;
            out.write_record([
                result.service_id.as_str(),
                result.product_id.as_str(),
                &float_cell(result.plain_budget),
                &float_cell(result.soft_budget),
                &float_cell(result.soft_budget_clamped),
                &float_cell(penalty),
                if recommended { "true" } else { "false" },
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Writes one deployment-index row per application.
pub fn write_index_csv<W: Write>(
    results: &[DeploymentIndexResult<f64>],
    writer: &mut W,
) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["application_id", "n_versions", "method", "index"])?;
    for result in results {
        out.write_record([
            result.application_id.as_str(),
            &result.n_versions.to_string(),
            &result.method.to_string(),
            &float_cell(result.index),
        ])?;
    }
    out.flush()?;
    Ok(())
}
