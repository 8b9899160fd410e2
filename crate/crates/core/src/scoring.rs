//! Application deployment scoring: expected true scores, per-item progress
//! reports, and trends over a deployment history.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::irt::{self, icc, FittedModel, Response, ResponseMatrix, ScoringMethod};
use crate::num::{real, Real};

/// Per-item outcome inside a deployment score report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemScore<R> {
    pub item_id: String,
    /// Observed response; `None` when the response was missing.
    pub response: Option<Response>,
    pub success_probability: R,
    /// 1 - success probability: how much of this item is still unrealized.
    pub gap: R,
}

/// Score report for one deployment: ability, expected true score, raw score,
/// and the per-item breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeploymentScoreReport<R> {
    pub deployment_id: String,
    pub theta: R,
    pub posterior_sd: Option<R>,
    pub method: ScoringMethod,
    /// Expected true score: sum of per-item success probabilities.
    pub ads: R,
    /// Count of observed passes.
    pub total_raw_score: usize,
    pub per_item: Vec<ItemScore<R>>,
    /// Failed items ordered cheapest-win first (ascending gap): items the
    /// model expected this deployment to pass come before long shots.
    pub recommendations: Vec<String>,
}

/// Expected true score at `theta`: the sum of every item's pass
/// probability. Strictly between 0 and the item count.
pub fn ads<R: Real>(theta: R, model: &FittedModel<R>) -> Result<R> {
    model.expected_true_score(theta)
}

/// Builds a report for every row of `matrix`, scored against `model`.
pub fn score_report<R: Real>(
    matrix: &ResponseMatrix,
    model: &FittedModel<R>,
    method: ScoringMethod,
) -> Result<Vec<DeploymentScoreReport<R>>> {
    irt::check_item_alignment(matrix.item_ids(), model)?;
    matrix
        .rows()
        .iter()
        .map(|row| score_new_deployment(row.deployment_id(), row.responses(), model, method))
        .collect()
}

/// Scores a single new deployment against a frozen model. The model is
/// never refit here; refitting is an explicit, separate action so scores
/// stay comparable within a model generation.
pub fn score_new_deployment<R: Real>(
    deployment_id: &str,
    responses: &[Option<Response>],
    model: &FittedModel<R>,
    method: ScoringMethod,
) -> Result<DeploymentScoreReport<R>> {
    let estimate = irt::score_response_vector(deployment_id, responses, model, method)?;
    let theta = estimate.theta;

    let mut per_item = Vec::with_capacity(model.n_items());
    let mut total = R::zero();
    let mut raw = 0usize;
    for (item, response) in model.items().iter().zip(responses) {
        let p = icc(theta, item)?;
        total += p;
        if matches!(response, Some(Response::Pass)) {
            raw += 1;
        }
        per_item.push(ItemScore {
            item_id: item.item_id.clone(),
            response: *response,
            success_probability: p,
            gap: R::one() - p,
        });
    }

    let mut failed: Vec<&ItemScore<R>> = per_item
        .iter()
        .filter(|score| matches!(score.response, Some(Response::Fail)))
        .collect();
    // ascending gap, ties kept in model item order
    failed.sort_by(|x, y| {
        x.gap
            .partial_cmp(&y.gap)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let recommendations = failed.into_iter().map(|s| s.item_id.clone()).collect();

    Ok(DeploymentScoreReport {
        deployment_id: deployment_id.to_string(),
        theta,
        posterior_sd: estimate.posterior_sd,
        method,
        ads: total,
        total_raw_score: raw,
        per_item,
        recommendations,
    })
}

/// Direction of the score between two consecutive deployments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrendDirection {
    Improving,
    Degrading,
    Flat,
}

/// One observed deployment in an application's history.
#[derive(Debug, Clone, PartialEq)]
pub struct TrendObservation {
    pub timestamp: DateTime<Utc>,
    pub version: String,
    pub responses: Vec<Option<Response>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendEntry<R> {
    pub timestamp: DateTime<Utc>,
    pub version: String,
    pub theta: R,
    pub ads: R,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendStep<R> {
    pub from_version: String,
    pub to_version: String,
    pub delta: R,
    pub direction: TrendDirection,
}

/// Score trend of one application over its deployment calendar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendReport<R> {
    pub application_id: String,
    pub entries: Vec<TrendEntry<R>>,
    pub steps: Vec<TrendStep<R>>,
}

/// Distinguishes genuine score movement from floating-point noise.
const TREND_EPSILON: f64 = 1e-6;

/// Scores a deployment history and classifies each consecutive pair as
/// improving, degrading, or flat. Entries are ordered by timestamp;
/// duplicate versions or timestamps are rejected.
pub fn trend<R: Real>(
    application_id: &str,
    history: &[TrendObservation],
    model: &FittedModel<R>,
    method: ScoringMethod,
) -> Result<TrendReport<R>> {
    if history.is_empty() {
        return Err(Error::insufficient_data(format!(
            "application {application_id:?} has an empty deployment history"
        )));
    }
    let mut ordered: Vec<&TrendObservation> = history.iter().collect();
    ordered.sort_by_key(|obs| obs.timestamp);
    for pair in ordered.windows(2) {
        if pair[0].timestamp == pair[1].timestamp {
            return Err(Error::invalid_argument(format!(
                "versions {:?} and {:?} share timestamp {}",
                pair[0].version, pair[1].version, pair[0].timestamp
            )));
        }
    }
    for (i, obs) in ordered.iter().enumerate() {
        if ordered[..i].iter().any(|prev| prev.version == obs.version) {
            return Err(Error::DuplicateId(obs.version.clone()));
        }
    }

    let mut entries = Vec::with_capacity(ordered.len());
    for obs in &ordered {
        let report = score_new_deployment(&obs.version, &obs.responses, model, method)?;
        entries.push(TrendEntry {
            timestamp: obs.timestamp,
            version: obs.version.clone(),
            theta: report.theta,
            ads: report.ads,
        });
    }

    let epsilon: R = real(TREND_EPSILON);
    let steps = entries
        .windows(2)
        .map(|pair| {
            let delta = pair[1].ads - pair[0].ads;
            let direction = if delta > epsilon {
                TrendDirection::Improving
            } else if delta < -epsilon {
                TrendDirection::Degrading
            } else {
                TrendDirection::Flat
            };
            TrendStep {
                from_version: pair[0].version.clone(),
                to_version: pair[1].version.clone(),
                delta,
                direction,
            }
        })
        .collect();

    Ok(TrendReport {
        application_id: application_id.to_string(),
        entries,
        steps,
    })
}
