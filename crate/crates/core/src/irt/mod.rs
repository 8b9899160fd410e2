//! Dichotomous item response theory: item characteristic curves, marginal
//! maximum-likelihood fitting, ability scoring, and information functions.
//!
//! The latent trait is identified by a fixed standard-normal prior; fitting
//! integrates it out with Gauss-Hermite quadrature and maximizes the marginal
//! likelihood by EM.

mod ability;
mod curves;
mod fit;

pub(crate) use ability::check_item_alignment;
pub use ability::{score_abilities, score_response_vector};
pub use curves::{curve_table, CurvePoint, CurveTable, ThetaGrid};
pub use fit::fit;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{real, sigmoid, Real};
use crate::quadrature::GaussHermite;

/// A single pass/fail response to one checklist item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Response {
    Fail,
    Pass,
}

impl Response {
    pub fn is_pass(self) -> bool {
        matches!(self, Response::Pass)
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Response::Fail => 0,
            Response::Pass => 1,
        }
    }

    pub fn from_u8(value: u8) -> Result<Self> {
        match value {
            0 => Ok(Response::Fail),
            1 => Ok(Response::Pass),
            other => Err(Error::invalid_argument(format!(
                "response must be 0 or 1, got {other}"
            ))),
        }
    }
}

impl Serialize for Response {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_u8(self.as_u8())
    }
}

impl<'de> Deserialize<'de> for Response {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let value = u8::deserialize(deserializer)?;
        Response::from_u8(value).map_err(serde::de::Error::custom)
    }
}

/// Which logistic model to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    /// Rasch model: every item shares discrimination 1.
    #[serde(rename = "1pl")]
    OnePl,
    /// Two-parameter logistic: per-item discrimination and difficulty.
    #[serde(rename = "2pl")]
    TwoPl,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelKind::OnePl => write!(f, "1pl"),
            ModelKind::TwoPl => write!(f, "2pl"),
        }
    }
}

/// Ability scoring method.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoringMethod {
    /// Posterior mode under the standard-normal prior (default; finite for
    /// every response pattern).
    #[default]
    Eb,
    /// Posterior mean under the standard-normal prior.
    Eap,
    /// Plain maximum likelihood, no prior; perfect patterns run to the
    /// parameter bound.
    Ml,
}

impl std::fmt::Display for ScoringMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScoringMethod::Eb => write!(f, "eb"),
            ScoringMethod::Eap => write!(f, "eap"),
            ScoringMethod::Ml => write!(f, "ml"),
        }
    }
}

/// Fitted parameters of one checklist item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemParameters<R> {
    pub item_id: String,
    /// Slope of the characteristic curve; negative values are legitimate and
    /// are reported as fitted, never sign-flipped.
    #[serde(rename = "a")]
    pub discrimination: R,
    /// Latent-trait location where the pass probability crosses one half.
    #[serde(rename = "b")]
    pub difficulty: R,
}

impl<R: Real> ItemParameters<R> {
    pub fn new(item_id: impl Into<String>, discrimination: R, difficulty: R) -> Self {
        Self {
            item_id: item_id.into(),
            discrimination,
            difficulty,
        }
    }
}

/// One deployment's responses, aligned with the matrix item order.
/// `None` marks a missing response.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseRow {
    deployment_id: String,
    responses: Vec<Option<Response>>,
}

impl ResponseRow {
    pub fn deployment_id(&self) -> &str {
        &self.deployment_id
    }

    pub fn responses(&self) -> &[Option<Response>] {
        &self.responses
    }

    /// Count of observed passes.
    pub fn raw_score(&self) -> usize {
        self.responses
            .iter()
            .filter(|r| matches!(r, Some(Response::Pass)))
            .count()
    }
}

/// Binary pass/fail records of deployments against a checklist.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseMatrix {
    item_ids: Vec<String>,
    rows: Vec<ResponseRow>,
}

impl ResponseMatrix {
    /// Validates structure: unique non-empty identifiers, rectangular rows,
    /// and at least one observed response per row.
    pub fn new(item_ids: Vec<String>, rows: Vec<(String, Vec<Option<Response>>)>) -> Result<Self> {
        if item_ids.is_empty() {
            return Err(Error::insufficient_data("response matrix has no items"));
        }
        for (i, id) in item_ids.iter().enumerate() {
            if id.is_empty() {
                return Err(Error::invalid_argument(format!(
                    "item {} has an empty id",
                    i + 1
                )));
            }
            if item_ids[..i].contains(id) {
                return Err(Error::DuplicateId(id.clone()));
            }
        }
        if rows.is_empty() {
            return Err(Error::insufficient_data("response matrix has no rows"));
        }
        let mut seen: Vec<&str> = Vec::with_capacity(rows.len());
        for (deployment_id, responses) in &rows {
            if deployment_id.is_empty() {
                return Err(Error::invalid_argument("empty deployment id"));
            }
            if seen.contains(&deployment_id.as_str()) {
                return Err(Error::DuplicateId(deployment_id.clone()));
            }
            seen.push(deployment_id);
            if responses.len() != item_ids.len() {
                return Err(Error::schema_mismatch(format!(
                    "row {deployment_id:?} has {} responses for {} items",
                    responses.len(),
                    item_ids.len()
                )));
            }
            if responses.iter().all(Option::is_none) {
                return Err(Error::invalid_argument(format!(
                    "row {deployment_id:?} has no observed responses"
                )));
            }
        }
        Ok(Self {
            item_ids,
            rows: rows
                .into_iter()
                .map(|(deployment_id, responses)| ResponseRow {
                    deployment_id,
                    responses,
                })
                .collect(),
        })
    }

    pub fn item_ids(&self) -> &[String] {
        &self.item_ids
    }

    pub fn rows(&self) -> &[ResponseRow] {
        &self.rows
    }

    pub fn n_items(&self) -> usize {
        self.item_ids.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }
}

/// EM fitting configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig<R> {
    /// Gauss-Hermite node count for the latent integral.
    pub nodes: usize,
    /// Convergence threshold on the largest absolute parameter change.
    pub tolerance: R,
    pub max_iterations: usize,
    /// Box bound applied to |a| and |b| during optimization; keeps
    /// quasi-separable data from running away.
    pub parameter_bound: R,
}

impl<R: Real> Default for FitConfig<R> {
    fn default() -> Self {
        Self {
            nodes: 21,
            tolerance: real(1e-4),
            max_iterations: 500,
            parameter_bound: real(10.0),
        }
    }
}

/// Fit metadata carried by a fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics<R> {
    pub log_likelihood: R,
    pub iterations: usize,
    pub converged: bool,
    /// True when a fitted parameter sits on the optimization box.
    pub bound_hit: bool,
    pub tolerance: R,
    pub max_iterations: usize,
    pub parameter_bound: R,
    /// Marginal log-likelihood at the start of each EM iteration plus the
    /// final value; non-decreasing up to quadrature noise.
    pub log_likelihood_history: Vec<R>,
}

/// An immutable fitted IRT model.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel<R> {
    kind: ModelKind,
    items: Vec<ItemParameters<R>>,
    diagnostics: FitDiagnostics<R>,
    quadrature: GaussHermite<R>,
}

impl<R: Real> FittedModel<R> {
    /// Assembles a model from parts, revalidating the invariants a fit
    /// guarantees. The quadrature table is rebuilt deterministically from
    /// the node count.
    pub fn from_parts(
        kind: ModelKind,
        items: Vec<ItemParameters<R>>,
        diagnostics: FitDiagnostics<R>,
        quadrature_nodes: usize,
    ) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::invalid_argument("model has no items"));
        }
        for item in &items {
            if !item.discrimination.is_finite() || !item.difficulty.is_finite() {
                return Err(Error::invalid_argument(format!(
                    "item {:?} has non-finite parameters",
                    item.item_id
                )));
            }
            if item.discrimination.is_zero() {
                return Err(Error::invalid_argument(format!(
                    "item {:?} has zero discrimination",
                    item.item_id
                )));
            }
            if kind == ModelKind::OnePl && item.discrimination != R::one() {
                return Err(Error::invalid_argument(format!(
                    "1pl model requires discrimination 1, item {:?} has {}",
                    item.item_id, item.discrimination
                )));
            }
        }
        let quadrature = GaussHermite::new(quadrature_nodes)?;
        Ok(Self {
            kind,
            items,
            diagnostics,
            quadrature,
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn items(&self) -> &[ItemParameters<R>] {
        &self.items
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    pub fn item_ids(&self) -> impl Iterator<Item = &str> {
        self.items.iter().map(|item| item.item_id.as_str())
    }

    pub fn diagnostics(&self) -> &FitDiagnostics<R> {
        &self.diagnostics
    }

    pub fn quadrature(&self) -> &GaussHermite<R> {
        &self.quadrature
    }

    /// Sum of item information at `theta`.
    pub fn test_information(&self, theta: R) -> Result<R> {
        let mut total = R::zero();
        for item in &self.items {
            total += item_information(theta, item)?;
        }
        Ok(total)
    }

    /// Expected true score: sum of every item's pass probability at `theta`.
    pub fn expected_true_score(&self, theta: R) -> Result<R> {
        let mut total = R::zero();
        for item in &self.items {
            total += icc(theta, item)?;
        }
        Ok(total)
    }
}

/// Latent-trait estimate for one deployment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbilityEstimate<R> {
    pub deployment_id: String,
    pub theta: R,
    pub method: ScoringMethod,
    /// Posterior standard deviation; absent for plain maximum likelihood.
    pub posterior_sd: Option<R>,
}

/// Item characteristic curve: pass probability at `theta`.
///
/// The value is kept strictly inside (0, 1) even where the logistic
/// saturates in floating point.
pub fn icc<R: Real>(theta: R, item: &ItemParameters<R>) -> Result<R> {
    if !theta.is_finite() {
        return Err(Error::invalid_argument(format!(
            "theta must be finite, got {theta}"
        )));
    }
    if !item.discrimination.is_finite() || !item.difficulty.is_finite() {
        return Err(Error::invalid_argument(format!(
            "item {:?} has non-finite parameters",
            item.item_id
        )));
    }
    Ok(icc_unchecked(theta, item.discrimination, item.difficulty))
}

#[inline]
pub(crate) fn icc_unchecked<R: Real>(theta: R, a: R, b: R) -> R {
    let p = sigmoid(a * (theta - b));
    let max = R::one() - R::epsilon() / real(2.0);
    p.max(R::min_positive_value()).min(max)
}

/// Fisher information one item contributes at `theta`: a^2 P (1 - P).
pub fn item_information<R: Real>(theta: R, item: &ItemParameters<R>) -> Result<R> {
    let p = icc(theta, item)?;
    Ok(item.discrimination * item.discrimination * p * (R::one() - p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn item(a: f64, b: f64) -> ItemParameters<f64> {
        ItemParameters::new("item", a, b)
    }

    #[test]
    fn icc_midpoint_at_difficulty() {
        for &a in &[0.3, 1.0, 2.0, -1.5] {
            for &b in &[-2.0, 0.0, 1.7] {
                assert_eq!(icc(b, &item(a, b)).unwrap(), 0.5);
            }
        }
    }

    #[test]
    fn icc_rasch_midpoint() {
        assert_eq!(icc(0.0, &item(1.0, 0.0)).unwrap(), 0.5);
    }

    #[test]
    fn icc_direct_evaluation() {
        // a = 2, b = 1, theta = 3 -> 1 / (1 + e^-4)
        let expected = 1.0 / (1.0 + (-4.0_f64).exp());
        let got = icc(3.0, &item(2.0, 1.0)).unwrap();
        assert!((got - expected).abs() < 1e-15);
        assert!((got - 0.98201).abs() < 1e-5);
    }

    #[test]
    fn icc_rejects_non_finite() {
        assert!(icc(f64::NAN, &item(1.0, 0.0)).is_err());
        assert!(icc(f64::INFINITY, &item(1.0, 0.0)).is_err());
        assert!(icc(0.0, &item(f64::NAN, 0.0)).is_err());
        assert!(icc(0.0, &item(1.0, f64::NEG_INFINITY)).is_err());
    }

    #[test]
    fn icc_strictly_inside_unit_interval_at_extremes() {
        let p_hi = icc(1e300, &item(1e3, 0.0)).unwrap();
        let p_lo = icc(-1e300, &item(1e3, 0.0)).unwrap();
        assert!(p_hi < 1.0 && p_hi > 0.0);
        assert!(p_lo > 0.0 && p_lo < 1.0);
    }

    #[test]
    fn information_at_difficulty() {
        assert_eq!(item_information(0.5, &item(1.0, 0.5)).unwrap(), 0.25);
        assert_eq!(item_information(-1.0, &item(2.0, -1.0)).unwrap(), 1.0);
    }

    #[test]
    fn information_direct_evaluation() {
        // a = 1, b = 0, theta = 2: P = sigmoid(2), info = P(1-P)
        let p = 1.0 / (1.0 + (-2.0_f64).exp());
        let expected = p * (1.0 - p);
        let got = item_information(2.0, &item(1.0, 0.0)).unwrap();
        assert!((got - expected).abs() < 1e-15);
        assert!((got - 0.10499).abs() < 1e-5);
        assert!((p - 0.88080).abs() < 1e-5);
    }

    #[test]
    fn test_information_is_additive() {
        let diag = FitDiagnostics {
            log_likelihood: 0.0,
            iterations: 0,
            converged: true,
            bound_hit: false,
            tolerance: 1e-4,
            max_iterations: 500,
            parameter_bound: 10.0,
            log_likelihood_history: vec![],
        };
        let single = FittedModel::from_parts(
            ModelKind::TwoPl,
            vec![ItemParameters::new("x", 1.4, 0.3)],
            diag.clone(),
            21,
        )
        .unwrap();
        let double = FittedModel::from_parts(
            ModelKind::TwoPl,
            vec![
                ItemParameters::new("x", 1.4, 0.3),
                ItemParameters::new("y", 1.4, 0.3),
            ],
            diag,
            21,
        )
        .unwrap();
        for theta in [-2.5, -0.4, 0.0, 0.3, 1.9] {
            let one = single.test_information(theta).unwrap();
            let item = item_information(theta, &single.items()[0]).unwrap();
            assert_eq!(one, item);
            assert_eq!(double.test_information(theta).unwrap(), 2.0 * one);
        }
    }

    #[test]
    fn matrix_rejects_ragged_rows() {
        let err = ResponseMatrix::new(
            vec!["a".into(), "b".into()],
            vec![("d1".into(), vec![Some(Response::Pass)])],
        )
        .unwrap_err();
        assert!(matches!(err, Error::SchemaMismatch(_)));
    }

    #[test]
    fn matrix_rejects_duplicate_ids() {
        let err = ResponseMatrix::new(
            vec!["a".into(), "a".into()],
            vec![("d1".into(), vec![Some(Response::Pass), None])],
        )
        .unwrap_err();
        assert!(matches!(err, Error::DuplicateId(_)));

        let err = ResponseMatrix::new(
            vec!["a".into(), "b".into()],
            vec![
                ("d1".into(), vec![Some(Response::Pass), None]),
                ("d1".into(), vec![None, Some(Response::Fail)]),
            ],
        )
        .unwrap_err();
        assert!(matches!(err, Error::DuplicateId(_)));
    }

    #[test]
    fn matrix_rejects_all_missing_row() {
        let err = ResponseMatrix::new(
            vec!["a".into(), "b".into()],
            vec![("d1".into(), vec![None, None])],
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn one_pl_from_parts_enforces_unit_discrimination() {
        let diag = FitDiagnostics {
            log_likelihood: -1.0,
            iterations: 1,
            converged: true,
            bound_hit: false,
            tolerance: 1e-4,
            max_iterations: 500,
            parameter_bound: 10.0,
            log_likelihood_history: vec![-1.0],
        };
        let err = FittedModel::from_parts(
            ModelKind::OnePl,
            vec![ItemParameters::new("x", 2.0, 0.0)],
            diag,
            21,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }
}
