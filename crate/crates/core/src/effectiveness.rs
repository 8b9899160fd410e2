//! Deployment index: the correlation between per-version deployment scores
//! and the SLO each version actually achieved while live.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{real, Real};
use crate::time::TimeWindow;

/// One version's outcome: its deployment score and the duration-weighted
/// SLO it achieved while customer-facing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VersionOutcome<R> {
    pub application_id: String,
    pub version: String,
    pub ads: R,
    pub achieved_slo: R,
    /// Time the version was live, in minutes.
    pub live_minutes: R,
}

impl<R: Real> VersionOutcome<R> {
    pub fn validate(&self) -> Result<()> {
        if !(self.achieved_slo >= R::zero() && self.achieved_slo <= R::one()) {
            return Err(Error::out_of_range(format!(
                "achieved slo for {}/{} must lie in [0, 1]",
                self.application_id, self.version
            )));
        }
        if self.live_minutes.partial_cmp(&R::zero()) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::out_of_range(format!(
                "live duration for {}/{} must be positive",
                self.application_id, self.version
            )));
        }
        if !self.ads.is_finite() {
            return Err(Error::invalid_argument(format!(
                "ads for {}/{} must be finite",
                self.application_id, self.version
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationMethod {
    #[default]
    Pearson,
    Spearman,
}

impl std::fmt::Display for CorrelationMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CorrelationMethod::Pearson => write!(f, "pearson"),
            CorrelationMethod::Spearman => write!(f, "spearman"),
        }
    }
}

/// Deployment index of one application.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeploymentIndexResult<R> {
    pub application_id: String,
    pub index: R,
    pub n_versions: usize,
    pub method: CorrelationMethod,
}

/// One SLI measurement over a sub-interval of a version's live window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliInterval<R> {
    pub window: TimeWindow,
    pub value: R,
}

/// Duration-weighted mean SLI over `version_window`. Intervals must be
/// non-overlapping, contained in the window, and cover a positive duration.
pub fn achieved_slo<R: Real>(series: &[SliInterval<R>], version_window: &TimeWindow) -> Result<R> {
    version_window.validate()?;
    if series.is_empty() {
        return Err(Error::insufficient_data(
            "sli series is empty; zero covered duration",
        ));
    }
    let mut intervals: Vec<&SliInterval<R>> = series.iter().collect();
    intervals.sort_by_key(|interval| interval.window.start);
    for interval in &intervals {
        interval.window.validate()?;
        if !version_window.contains(&interval.window) {
            return Err(Error::out_of_range(format!(
                "sli interval [{}, {}] leaves the version window",
                interval.window.start, interval.window.end
            )));
        }
        if !(interval.value >= R::zero() && interval.value <= R::one()) {
            return Err(Error::out_of_range("sli value must lie in [0, 1]"));
        }
    }
    for pair in intervals.windows(2) {
        if pair[0].window.overlaps(&pair[1].window) {
            return Err(Error::invalid_argument(format!(
                "sli intervals overlap at {}",
                pair[1].window.start
            )));
        }
    }
    let mut weighted = R::zero();
    let mut total = R::zero();
    for interval in &intervals {
        let weight: R = real(interval.window.duration_seconds());
        weighted += interval.value * weight;
        total += weight;
    }
    if total.partial_cmp(&R::zero()) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::insufficient_data("sli series covers zero duration"));
    }
    Ok(weighted / total)
}

/// Deployment index: correlation between per-version deployment scores and
/// achieved SLOs for one application. Needs at least 3 versions and nonzero
/// variance in both series; a degenerate series is an explicit error, never
/// a silent zero.
pub fn deployment_index<R: Real>(
    outcomes: &[VersionOutcome<R>],
    method: CorrelationMethod,
) -> Result<DeploymentIndexResult<R>> {
    if outcomes.is_empty() {
        return Err(Error::insufficient_data("no version outcomes"));
    }
    let application_id = outcomes[0].application_id.clone();
    for outcome in outcomes {
        outcome.validate()?;
        if outcome.application_id != application_id {
            return Err(Error::schema_mismatch(format!(
                "outcomes mix applications {application_id:?} and {:?}",
                outcome.application_id
            )));
        }
    }
    if outcomes.len() < 3 {
        return Err(Error::insufficient_data(format!(
            "application {application_id:?} has {} versions; the index needs at least 3",
            outcomes.len()
        )));
    }
    let ads: Vec<R> = outcomes.iter().map(|o| o.ads).collect();
    let slo: Vec<R> = outcomes.iter().map(|o| o.achieved_slo).collect();
    let index = match method {
        CorrelationMethod::Pearson => pearson(&ads, &slo)?,
        CorrelationMethod::Spearman => spearman(&ads, &slo)?,
    };
    Ok(DeploymentIndexResult {
        application_id,
        index,
        n_versions: outcomes.len(),
        method,
    })
}

/// Pearson correlation coefficient of two equal-length series.
pub fn pearson<R: Real>(xs: &[R], ys: &[R]) -> Result<R> {
    if xs.len() != ys.len() {
        return Err(Error::invalid_argument(format!(
            "series lengths differ: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::insufficient_data(
            "correlation needs at least 2 pairs",
        ));
    }
    let n: R = real(xs.len() as f64);
    let mean_x = xs.iter().copied().sum::<R>() / n;
    let mean_y = ys.iter().copied().sum::<R>() / n;
    let mut sxx = R::zero();
    let mut syy = R::zero();
    let mut sxy = R::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx.is_zero() || syy.is_zero() {
        return Err(Error::UndefinedCorrelation(
            "a series has zero variance".into(),
        ));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Spearman rank correlation: Pearson over average ranks.
pub fn spearman<R: Real>(xs: &[R], ys: &[R]) -> Result<R> {
    if xs.len() != ys.len() {
        return Err(Error::invalid_argument(format!(
            "series lengths differ: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    pearson(&rx, &ry)
}

/// Average (fractional) ranks, ties sharing their mean rank.
fn average_ranks<R: Real>(values: &[R]) -> Vec<R> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| {
        values[i]
            .partial_cmp(&values[j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut ranks = vec![R::zero(); values.len()];
    let mut pos = 0;
    while pos < order.len() {
        let mut end = pos + 1;
        while end < order.len() && values[order[end]] == values[order[pos]] {
            end += 1;
        }
        // ranks are 1-based; tied entries share the mean rank of their block
        let mean_rank: R = real(((pos + 1 + end) as f64) / 2.0);
        for &idx in &order[pos..end] {
            ranks[idx] = mean_rank;
        }
        pos = end;
    }
    ranks
}
