//! Deployment checklist analytics built on item response theory.
//!
//! The crate fits dichotomous 1PL/2PL models to pass/fail checklist records,
//! scores each deployment's latent adherence and expected true score, and
//! derives the reliability metrics that build on those scores: soft error
//! budgets over a service mesh and the deployment index that correlates
//! scores with achieved SLOs.
//!
//! Numeric code is generic over the scalar type ([`num::Real`] for the
//! model math, [`budgets::Fraction`] for budget arithmetic, which also
//! accepts exact rationals). The aliases at the crate root pin everything
//! to `f64`, which is what the CLI and the on-disk formats use.

pub mod budgets;
pub mod effectiveness;
pub mod error;
pub mod irt;
pub mod num;
pub mod quadrature;
pub mod scoring;
pub mod store;
pub mod time;

pub use error::{Error, ErrorClass, Result};
pub use irt::{ModelKind, Response, ResponseMatrix, ScoringMethod};
pub use time::TimeWindow;

/// `f64` concrete aliases for the generic core types.
pub type ItemParameters = irt::ItemParameters<f64>;
pub type FitConfig = irt::FitConfig<f64>;
pub type FitDiagnostics = irt::FitDiagnostics<f64>;
pub type FittedModel = irt::FittedModel<f64>;
pub type AbilityEstimate = irt::AbilityEstimate<f64>;
pub type ThetaGrid = irt::ThetaGrid<f64>;
pub type CurveTable = irt::CurveTable<f64>;
pub type GaussHermite = quadrature::GaussHermite<f64>;
pub type DeploymentScoreReport = scoring::DeploymentScoreReport<f64>;
pub type TrendReport = scoring::TrendReport<f64>;
pub type SloRecord = budgets::SloRecord<f64>;
pub type ServiceWindowStats = budgets::ServiceWindowStats<f64>;
pub type MeshWindow = budgets::MeshWindow<f64>;
pub type BudgetResult = budgets::BudgetResult<f64>;
pub type VersionOutcome = effectiveness::VersionOutcome<f64>;
pub type DeploymentIndexResult = effectiveness::DeploymentIndexResult<f64>;
