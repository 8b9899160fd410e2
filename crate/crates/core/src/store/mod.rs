//! On-disk formats: the response-matrix CSV, JSON schemas for models,
//! meshes, reports, and outcomes, and the CSV table renderings.
//!
//! Every loader is total: malformed input yields a structured error with a
//! location, never a panic. Floats serialize at full shortest-round-trip
//! precision so saved artifacts reload bit-exactly.

mod tables;

pub use tables::{
    load_history, load_responses, write_budget_csv, write_curves_csv, write_index_csv,
    write_report_csv, write_scores_csv, write_trend_csv,
};

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::budgets::{
    BudgetResult, MeshWindow, Product, ServiceWindowStats, SloKind, SloRecord, SloTarget,
};
use crate::effectiveness::{achieved_slo, DeploymentIndexResult, SliInterval, VersionOutcome};
use crate::error::{Error, Result};
use crate::irt::{FitDiagnostics, FittedModel, ItemParameters, ModelKind};
use crate::scoring::{DeploymentScoreReport, TrendReport};
use crate::time::TimeWindow;

pub const CURVES_FORMAT: &str = "adscore.curves/1";
pub const MODEL_FORMAT: &str = "adscore.model/1";
pub const MESH_FORMAT: &str = "adscore.mesh/1";
pub const REPORTS_FORMAT: &str = "adscore.reports/1";
pub const TREND_FORMAT: &str = "adscore.trend/1";
pub const BUDGET_FORMAT: &str = "adscore.budget/1";
pub const INDEX_FORMAT: &str = "adscore.index/1";
pub const OUTCOMES_FORMAT: &str = "adscore.outcomes/1";

fn check_format(found: &str, expected: &'static str) -> Result<()> {
    if found != expected {
        return Err(Error::FormatVersion {
            found: found.to_string(),
            expected: expected.to_string(),
        });
    }
    Ok(())
}

fn write_pretty_json<W: Write, T: Serialize>(writer: &mut W, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    writer.write_all(&bytes)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// fitted models

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    model_kind: ModelKind,
    items: Vec<ItemParameters<f64>>,
    quadrature_nodes: usize,
    fit: FitDiagnostics<f64>,
}

pub fn save_model<W: Write>(model: &FittedModel<f64>, writer: &mut W) -> Result<()> {
    let file = ModelFile {
        format: MODEL_FORMAT.to_string(),
        model_kind: model.kind(),
        items: model.items().to_vec(),
        quadrature_nodes: model.quadrature().len(),
        fit: model.diagnostics().clone(),
    };
    write_pretty_json(writer, &file)
}

pub fn load_model<R: Read>(reader: R) -> Result<FittedModel<f64>> {
    let file: ModelFile = serde_json::from_reader(reader)?;
    check_format(&file.format, MODEL_FORMAT)?;
    FittedModel::from_parts(file.model_kind, file.items, file.fit, file.quadrature_nodes)
}

// ---------------------------------------------------------------------------
// service mesh

#[derive(Serialize, Deserialize)]
struct MeshSlo {
    kind: SloKind,
    #[serde(flatten)]
    target: SloTarget<f64>,
}

#[derive(Serialize, Deserialize)]
struct MeshProduct {
    product_id: String,
    slo: MeshSlo,
    services: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct MeshService {
    service_id: String,
    unavailability: f64,
    latest_ads: f64,
    total_items: usize,
}

#[derive(Serialize, Deserialize)]
struct MeshFile {
    format: String,
    window: TimeWindow,
    products: Vec<MeshProduct>,
    services: Vec<MeshService>,
}

pub fn load_mesh<R: Read>(reader: R) -> Result<MeshWindow<f64>> {
    let file: MeshFile = serde_json::from_reader(reader)?;
    check_format(&file.format, MESH_FORMAT)?;
    let window = file.window;
    let mesh = MeshWindow {
        window,
        products: file
            .products
            .into_iter()
            .map(|product| Product {
                slo: SloRecord {
                    subject_id: product.product_id.clone(),
                    kind: product.slo.kind,
                    target: product.slo.target,
                    window,
                },
                product_id: product.product_id,
                services: product.services,
            })
            .collect(),
        services: file
            .services
            .into_iter()
            .map(|service| ServiceWindowStats {
                service_id: service.service_id,
                window,
                unavailability: service.unavailability,
                latest_ads: service.latest_ads,
                total_items: service.total_items,
            })
            .collect(),
    };
    mesh.validate()?;
    Ok(mesh)
}

pub fn save_mesh<W: Write>(mesh: &MeshWindow<f64>, writer: &mut W) -> Result<()> {
    mesh.validate()?;
    let file = MeshFile {
        format: MESH_FORMAT.to_string(),
        window: mesh.window,
        products: mesh
            .products
            .iter()
            .map(|product| MeshProduct {
                product_id: product.product_id.clone(),
                slo: MeshSlo {
                    kind: product.slo.kind,
                    target: product.slo.target.clone(),
                },
                services: product.services.clone(),
            })
            .collect(),
        services: mesh
            .services
            .iter()
            .map(|service| MeshService {
                service_id: service.service_id.clone(),
                unavailability: service.unavailability,
                latest_ads: service.latest_ads,
                total_items: service.total_items,
            })
            .collect(),
    };
    write_pretty_json(writer, &file)
}

// ---------------------------------------------------------------------------
// curve tables

#[derive(Serialize, Deserialize)]
struct CurveFile {
    format: String,
    #[serde(flatten)]
    table: crate::irt::CurveTable<f64>,
}

pub fn save_curve_table<W: Write>(
    table: &crate::irt::CurveTable<f64>,
    writer: &mut W,
) -> Result<()> {
    let file = CurveFile {
        format: CURVES_FORMAT.to_string(),
        table: table.clone(),
    };
    write_pretty_json(writer, &file)
}

pub fn load_curve_table<R: Read>(reader: R) -> Result<crate::irt::CurveTable<f64>> {
    let file: CurveFile = serde_json::from_reader(reader)?;
    check_format(&file.format, CURVES_FORMAT)?;
    Ok(file.table)
}

// ---------------------------------------------------------------------------
// deployment score reports

#[derive(Serialize, Deserialize)]
struct ReportsFile {
    format: String,
    reports: Vec<DeploymentScoreReport<f64>>,
}

pub fn save_score_reports<W: Write>(
    reports: &[DeploymentScoreReport<f64>],
    writer: &mut W,
) -> Result<()> {
    let file = ReportsFile {
        format: REPORTS_FORMAT.to_string(),
        reports: reports.to_vec(),
    };
    write_pretty_json(writer, &file)
}

pub fn load_score_reports<R: Read>(reader: R) -> Result<Vec<DeploymentScoreReport<f64>>> {
    let file: ReportsFile = serde_json::from_reader(reader)?;
    check_format(&file.format, REPORTS_FORMAT)?;
    Ok(file.reports)
}

// ---------------------------------------------------------------------------
// trend reports

#[derive(Serialize, Deserialize)]
struct TrendFile {
    format: String,
    reports: Vec<TrendReport<f64>>,
}

pub fn save_trend_reports<W: Write>(reports: &[TrendReport<f64>], writer: &mut W) -> Result<()> {
    let file = TrendFile {
        format: TREND_FORMAT.to_string(),
        reports: reports.to_vec(),
    };
    write_pretty_json(writer, &file)
}

pub fn load_trend_reports<R: Read>(reader: R) -> Result<Vec<TrendReport<f64>>> {
    let file: TrendFile = serde_json::from_reader(reader)?;
    check_format(&file.format, TREND_FORMAT)?;
    Ok(file.reports)
}

// ---------------------------------------------------------------------------
// budget reports

/// Soft budgets of one service across every product it serves, plus the
/// min-over-products recommendation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceBudgetReport {
    pub service_id: String,
    pub results: Vec<BudgetResult<f64>>,
    pub recommended: BudgetResult<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetReport {
    pub window: TimeWindow,
    pub services: Vec<ServiceBudgetReport>,
}

#[derive(Serialize, Deserialize)]
struct BudgetFile {
    format: String,
    #[serde(flatten)]
    report: BudgetReport,
}

pub fn save_budget_report<W: Write>(report: &BudgetReport, writer: &mut W) -> Result<()> {
    let file = BudgetFile {
        format: BUDGET_FORMAT.to_string(),
        report: report.clone(),
    };
    write_pretty_json(writer, &file)
}

pub fn load_budget_report<R: Read>(reader: R) -> Result<BudgetReport> {
    let file: BudgetFile = serde_json::from_reader(reader)?;
    check_format(&file.format, BUDGET_FORMAT)?;
    Ok(file.report)
}

// ---------------------------------------------------------------------------
// deployment index reports

#[derive(Serialize, Deserialize)]
struct IndexFile {
    format: String,
    results: Vec<DeploymentIndexResult<f64>>,
}

pub fn save_index_report<W: Write>(
    results: &[DeploymentIndexResult<f64>],
    writer: &mut W,
) -> Result<()> {
    let file = IndexFile {
        format: INDEX_FORMAT.to_string(),
        results: results.to_vec(),
    };
    write_pretty_json(writer, &file)
}

pub fn load_index_report<R: Read>(reader: R) -> Result<Vec<DeploymentIndexResult<f64>>> {
    let file: IndexFile = serde_json::from_reader(reader)?;
    check_format(&file.format, INDEX_FORMAT)?;
    Ok(file.results)
}

// ---------------------------------------------------------------------------
// version outcomes (deployment index input)

#[derive(Serialize, Deserialize)]
struct OutcomeSli {
    start: chrono::DateTime<chrono::Utc>,
    end: chrono::DateTime<chrono::Utc>,
    value: f64,
}

#[derive(Serialize, Deserialize)]
struct OutcomeVersion {
    version: String,
    ads: f64,
    window: TimeWindow,
    #[serde(skip_serializing_if = "Option::is_none")]
    achieved_slo: Option<f64>,
    /// Raw SLI intervals; aggregated to a duration-weighted mean at load.
    #[serde(skip_serializing_if = "Option::is_none")]
    sli: Option<Vec<OutcomeSli>>,
}

#[derive(Serialize, Deserialize)]
struct OutcomesApplication {
    application_id: String,
    versions: Vec<OutcomeVersion>,
}

#[derive(Serialize, Deserialize)]
struct OutcomesFile {
    format: String,
    applications: Vec<OutcomesApplication>,
}

/// Loads version outcomes grouped per application, aggregating raw SLI
/// series where present. Each version must carry either `achieved_slo` or
/// `sli`, not both.
pub fn load_outcomes<R: Read>(reader: R) -> Result<Vec<(String, Vec<VersionOutcome<f64>>)>> {
    let file: OutcomesFile = serde_json::from_reader(reader)?;
    check_format(&file.format, OUTCOMES_FORMAT)?;
    let mut applications = Vec::with_capacity(file.applications.len());
    for app in file.applications {
        let mut outcomes = Vec::with_capacity(app.versions.len());
        for version in app.versions {
            version.window.validate()?;
            let slo = match (version.achieved_slo, &version.sli) {
                (Some(value), None) => value,
                (None, Some(series)) => {
                    let intervals: Result<Vec<SliInterval<f64>>> = series
                        .iter()
                        .map(|raw| {
                            Ok(SliInterval {
                                window: TimeWindow::new(raw.start, raw.end)?,
                                value: raw.value,
                            })
                        })
                        .collect();
                    achieved_slo(&intervals?, &version.window)?
                }
                (Some(_), Some(_)) => {
                    return Err(Error::schema_mismatch(format!(
                        "version {}/{} has both achieved_slo and sli",
                        app.application_id, version.version
                    )))
                }
                (None, None) => {
                    return Err(Error::schema_mismatch(format!(
                        "version {}/{} needs achieved_slo or sli",
                        app.application_id, version.version
                    )))
                }
            };
            let outcome = VersionOutcome {
                application_id: app.application_id.clone(),
                version: version.version,
                ads: version.ads,
                achieved_slo: slo,
                live_minutes: version.window.duration_minutes(),
            };
            outcome.validate()?;
            outcomes.push(outcome);
        }
        applications.push((app.application_id, outcomes));
    }
    Ok(applications)
}
