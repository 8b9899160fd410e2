//! Subcommand implementations.

use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use adscore_core::budgets::{self, exact_budget_breakdown};
use adscore_core::effectiveness::{self, CorrelationMethod};
use adscore_core::irt::{self, curve_table, ThetaGrid};
use adscore_core::scoring::{self, DeploymentScoreReport};
use adscore_core::store;
use adscore_core::{Error, FitConfig, FittedModel, ModelKind, Result, ScoringMethod};

use crate::output::{open_input, write_output, Format};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ModelKindArg {
    #[value(name = "1pl")]
    OnePl,
    #[value(name = "2pl")]
    TwoPl,
}

impl From<ModelKindArg> for ModelKind {
    fn from(value: ModelKindArg) -> Self {
        match value {
            ModelKindArg::OnePl => ModelKind::OnePl,
            ModelKindArg::TwoPl => ModelKind::TwoPl,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum MethodArg {
    Eb,
    Eap,
    Ml,
}

impl From<MethodArg> for ScoringMethod {
    fn from(value: MethodArg) -> Self {
        match value {
            MethodArg::Eb => ScoringMethod::Eb,
            MethodArg::Eap => ScoringMethod::Eap,
            MethodArg::Ml => ScoringMethod::Ml,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum CorrelationArg {
    Pearson,
    Spearman,
}

impl From<CorrelationArg> for CorrelationMethod {
    fn from(value: CorrelationArg) -> Self {
        match value {
            CorrelationArg::Pearson => CorrelationMethod::Pearson,
            CorrelationArg::Spearman => CorrelationMethod::Spearman,
        }
    }
}

fn load_model(path: &std::path::Path) -> Result<FittedModel> {
    store::load_model(open_input(path)?)
}

// ---------------------------------------------------------------------------
// fit

#[derive(Args)]
pub struct FitArgs {
    /// Response CSV: deployment_id column then one 0/1 column per item.
    pub responses: PathBuf,
    /// Where to write the fitted model JSON.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Model to fit.
    #[arg(long = "model", value_enum, default_value = "2pl")]
    pub model_kind: ModelKindArg,
    /// Gauss-Hermite quadrature nodes.
    #[arg(long, default_value_t = 21)]
    pub nodes: usize,
    /// Convergence tolerance on the largest parameter change.
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    /// EM iteration cap.
    #[arg(long = "max-iter", default_value_t = 500)]
    pub max_iterations: usize,
}

pub fn fit(args: FitArgs) -> Result<()> {
    let matrix = store::load_responses(open_input(&args.responses)?)?;
    let config = FitConfig {
        nodes: args.nodes,
        tolerance: args.tol,
        max_iterations: args.max_iterations,
        ..FitConfig::default()
    };
    let model = irt::fit(&matrix, args.model_kind.into(), &config)?;

    let mut file = std::fs::File::create(&args.output)?;
    store::save_model(&model, &mut file)?;

    println!(
        "fitted {} model on {} deployments x {} items",
        model.kind(),
        matrix.n_rows(),
        matrix.n_items()
    );
    let width = model
        .items()
        .iter()
        .map(|item| item.item_id.len())
        .max()
        .unwrap_or(4)
        .max(4);
    println!(
        "  {:<width$}  {:>14}  {:>12}",
        "item", "discrimination", "difficulty"
    );
    for item in model.items() {
        let note = if item.discrimination < 0.0 {
            "  <- negative discrimination"
        } else {
            ""
        };
        println!(
            "  {:<width$}  {:>14.6}  {:>12.6}{note}",
            item.item_id, item.discrimination, item.difficulty
        );
    }
    let diagnostics = model.diagnostics();
    println!(
        "{} in {} iterations; log-likelihood {:.6}; {} quadrature nodes",
        if diagnostics.converged {
            "converged"
        } else {
            "stopped"
        },
        diagnostics.iterations,
        diagnostics.log_likelihood,
        model.quadrature().len()
    );
    if !diagnostics.converged {
        eprintln!(
            "warning: fit did not converge within {} iterations; model saved with converged = false",
            diagnostics.max_iterations
        );
    }
    if diagnostics.bound_hit {
        eprintln!(
            "warning: a fitted parameter sits on the optimization bound (|a|, |b| <= {})",
            diagnostics.parameter_bound
        );
    }
    println!("wrote model to {}", args.output.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// score

#[derive(Args)]
pub struct ScoreArgs {
    pub responses: PathBuf,
    pub model: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long, value_enum, default_value = "eb")]
    pub method: MethodArg,
    /// Include per-item gap columns.
    #[arg(long)]
    pub gaps: bool,
}

#[derive(Serialize)]
struct ScoreRow {
    deployment_id: String,
    responses: Vec<Option<u8>>,
    theta: f64,
    total_score: usize,
    ads: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    gaps: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct ScoresFile {
    format: &'static str,
    method: String,
    items: Vec<String>,
    rows: Vec<ScoreRow>,
}

pub fn score(args: ScoreArgs) -> Result<()> {
    let matrix = store::load_responses(open_input(&args.responses)?)?;
    let model = load_model(&args.model)?;
    let reports = scoring::score_report(&matrix, &model, args.method.into())?;

    let bytes = match args.format {
        Format::Json => {
            let rows = reports
                .iter()
                .map(|report| ScoreRow {
                    deployment_id: report.deployment_id.clone(),
                    responses: report
                        .per_item
                        .iter()
                        .map(|item| item.response.map(|r| r.as_u8()))
                        .collect(),
                    theta: report.theta,
                    total_score: report.total_raw_score,
                    ads: report.ads,
                    gaps: args
                        .gaps
                        .then(|| report.per_item.iter().map(|item| item.gap).collect()),
                })
                .collect();
            let file = ScoresFile {
                format: "adscore.scores/1",
                method: ScoringMethod::from(args.method).to_string(),
                items: matrix.item_ids().to_vec(),
                rows,
            };
            let mut bytes = serde_json::to_vec_pretty(&file)?;
            bytes.push(b'\n');
            bytes
        }
        Format::Csv => {
            let mut bytes = Vec::new();
            store::write_scores_csv(matrix.item_ids(), &reports, args.gaps, &mut bytes)?;
            bytes
        }
    };
    write_output(args.output.as_ref(), &bytes)
}

// ---------------------------------------------------------------------------
// report

#[derive(Args)]
pub struct ReportArgs {
    pub responses: PathBuf,
    pub model: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long, value_enum, default_value = "eb")]
    pub method: MethodArg,
}

pub fn report(args: ReportArgs) -> Result<()> {
    let matrix = store::load_responses(open_input(&args.responses)?)?;
    let model = load_model(&args.model)?;
    let reports: Vec<DeploymentScoreReport<f64>> =
        scoring::score_report(&matrix, &model, args.method.into())?;

    let mut bytes = Vec::new();
    match args.format {
        Format::Json => store::save_score_reports(&reports, &mut bytes)?,
        Format::Csv => store::write_report_csv(&reports, &mut bytes)?,
    }
    write_output(args.output.as_ref(), &bytes)
}

// ---------------------------------------------------------------------------
// trend

#[derive(Args)]
pub struct TrendArgs {
    /// History CSV: application_id,timestamp,version,<item ids...>.
    pub history: PathBuf,
    pub model: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long, value_enum, default_value = "eb")]
    pub method: MethodArg,
}

pub fn trend(args: TrendArgs) -> Result<()> {
    let (item_ids, histories) = store::load_history(open_input(&args.history)?)?;
    let model = load_model(&args.model)?;
    let model_ids: Vec<&str> = model.item_ids().collect();
    let got: Vec<&str> = item_ids.iter().map(String::as_str).collect();
    if got != model_ids {
        return Err(Error::schema_mismatch(format!(
            "history items {got:?} do not match model items {model_ids:?}"
        )));
    }

    let mut reports = Vec::with_capacity(histories.len());
    for (application_id, observations) in &histories {
        reports.push(scoring::trend(
            application_id,
            observations,
            &model,
            args.method.into(),
        )?);
    }

    let mut bytes = Vec::new();
    match args.format {
        Format::Json => store::save_trend_reports(&reports, &mut bytes)?,
        Format::Csv => store::write_trend_csv(&reports, &mut bytes)?,
    }
    write_output(args.output.as_ref(), &bytes)
}

// ---------------------------------------------------------------------------
// curves

#[derive(Args)]
pub struct CurvesArgs {
    pub model: PathBuf,
    #[arg(long, default_value_t = -4.0, allow_hyphen_values = true)]
    pub min: f64,
    #[arg(long, default_value_t = 4.0, allow_hyphen_values = true)]
    pub max: f64,
    #[arg(long, default_value_t = 0.1)]
    pub step: f64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

pub fn curves(args: CurvesArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let table = curve_table(&model, &ThetaGrid::new(args.min, args.max, args.step))?;

    let mut bytes = Vec::new();
    match args.format {
        Format::Json => store::save_curve_table(&table, &mut bytes)?,
        Format::Csv => store::write_curves_csv(&table, &mut bytes)?,
    }
    write_output(args.output.as_ref(), &bytes)
}

// ---------------------------------------------------------------------------
// budget

#[derive(Args)]
pub struct BudgetArgs {
    /// SLO as a decimal string, e.g. 0.9999.
    #[arg(long)]
    pub slo: String,
    /// Window length in days for the downtime rendering.
    #[arg(long = "window-days", default_value_t = 30)]
    pub window_days: u32,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Serialize)]
struct BudgetBreakdownFile {
    format: &'static str,
    #[serde(flatten)]
    breakdown: budgets::ExactBudgetBreakdown,
}

pub fn budget(args: BudgetArgs) -> Result<()> {
    let breakdown = exact_budget_breakdown(&args.slo, args.window_days)?;
    let bytes = match args.format {
        Format::Json => {
            let file = BudgetBreakdownFile {
                format: "adscore.budget-breakdown/1",
                breakdown,
            };
            let mut bytes = serde_json::to_vec_pretty(&file)?;
            bytes.push(b'\n');
            bytes
        }
        Format::Csv => {
            let mut text = String::from(
                "slo,error_budget,error_budget_percent,window_days,allowed_downtime_minutes\n",
            );
            text.push_str(&format!(
                "{},{},{},{},{}\n",
                breakdown.slo,
                breakdown.error_budget,
                breakdown.error_budget_percent,
                breakdown.window_days,
                breakdown.allowed_downtime_minutes
            ));
            text.into_bytes()
        }
    };
    write_output(args.output.as_ref(), &bytes)
}

// ---------------------------------------------------------------------------
// soft-budget

#[derive(Args)]
pub struct SoftBudgetArgs {
    pub mesh: PathBuf,
    /// Restrict the report to one service.
    #[arg(long)]
    pub service: Option<String>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

pub fn soft_budget(args: SoftBudgetArgs) -> Result<()> {
    let mesh = store::load_mesh(open_input(&args.mesh)?)?;

    let targets: Vec<String> = match &args.service {
        Some(service) => {
            if mesh.stats_for(service).is_none() {
                return Err(Error::UnknownService(service.clone()));
            }
            vec![service.clone()]
        }
        None => mesh
            .services
            .iter()
            .map(|stats| stats.service_id.clone())
            .collect(),
    };

    let mut services = Vec::new();
    for service_id in &targets {
        let mut products = mesh.products_of(service_id);
        if products.is_empty() {
            if args.service.is_some() {
                return Err(Error::UnknownService(format!(
                    "{service_id} is not a member of any product"
                )));
            }
            eprintln!("warning: service {service_id:?} belongs to no product; skipped");
            continue;
        }
        products.sort_by(|x, y| x.product_id.cmp(&y.product_id));
        let results: Result<Vec<_>> = products
            .iter()
            .map(|product| budgets::soft_error_budget(service_id, &product.product_id, &mesh))
            .collect();
        let recommended = budgets::min_soft_budget(service_id, &mesh)?;
        services.push(store::ServiceBudgetReport {
            service_id: service_id.clone(),
            results: results?,
            recommended,
        });
    }

    let report = store::BudgetReport {
        window: mesh.window,
        services,
    };
    let mut bytes = Vec::new();
    match args.format {
        Format::Json => store::save_budget_report(&report, &mut bytes)?,
        Format::Csv => store::write_budget_csv(&report, &mut bytes)?,
    }
    write_output(args.output.as_ref(), &bytes)
}

// ---------------------------------------------------------------------------
// deploy-index

#[derive(Args)]
pub struct DeployIndexArgs {
    pub outcomes: PathBuf,
    #[arg(long, value_enum, default_value = "pearson")]
    pub method: CorrelationArg,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

pub fn deploy_index(args: DeployIndexArgs) -> Result<()> {
    let applications = store::load_outcomes(open_input(&args.outcomes)?)?;
    let mut results = Vec::with_capacity(applications.len());
    for (_, outcomes) in &applications {
        results.push(effectiveness::deployment_index(
            outcomes,
            args.method.into(),
        )?);
    }

    let mut bytes = Vec::new();
    match args.format {
        Format::Json => store::save_index_report(&results, &mut bytes)?,
        Format::Csv => store::write_index_csv(&results, &mut bytes)?,
    }
    write_output(args.output.as_ref(), &bytes)
}
