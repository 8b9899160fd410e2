//! Latent-trait scoring for response vectors against a fitted model.

use crate::error::{Error, Result};
use crate::num::{log_sigmoid, real, sigmoid, Real};

use super::{AbilityEstimate, FittedModel, Response, ResponseMatrix, ScoringMethod};

/// Scores every row of `matrix`. Row order is preserved and byte-identical
/// response vectors yield bitwise-identical estimates.
pub fn score_abilities<R: Real>(
    matrix: &ResponseMatrix,
    model: &FittedModel<R>,
    method: ScoringMethod,
) -> Result<Vec<AbilityEstimate<R>>> {
    check_item_alignment(matrix.item_ids(), model)?;
    matrix
        .rows()
        .iter()
        .map(|row| score_response_vector(row.deployment_id(), row.responses(), model, method))
        .collect()
}

/// Scores a single response vector (aligned with the model's item order)
/// against a frozen model; no refitting happens here.
pub fn score_response_vector<R: Real>(
    deployment_id: &str,
    responses: &[Option<Response>],
    model: &FittedModel<R>,
    method: ScoringMethod,
) -> Result<AbilityEstimate<R>> {
    if responses.len() != model.n_items() {
        return Err(Error::schema_mismatch(format!(
            "response vector has {} entries for a {}-item model",
            responses.len(),
            model.n_items()
        )));
    }
    if responses.iter().all(Option::is_none) {
        return Err(Error::invalid_argument(format!(
            "deployment {deployment_id:?} has no observed responses"
        )));
    }

    let (theta, posterior_sd) = match method {
        ScoringMethod::Eb => {
            let (theta, sd) = posterior_mode(responses, model);
            (theta, Some(sd))
        }
        ScoringMethod::Eap => {
            let (theta, sd) = posterior_mean(responses, model);
            (theta, Some(sd))
        }
        ScoringMethod::Ml => (maximum_likelihood(responses, model), None),
    };

    Ok(AbilityEstimate {
        deployment_id: deployment_id.to_string(),
        theta,
        method,
        posterior_sd,
    })
}

pub(crate) fn check_item_alignment<R: Real>(
    item_ids: &[String],
    model: &FittedModel<R>,
) -> Result<()> {
    let model_ids: Vec<&str> = model.item_ids().collect();
    let matrix_ids: Vec<&str> = item_ids.iter().map(String::as_str).collect();
    if matrix_ids != model_ids {
        return Err(Error::schema_mismatch(format!(
            "item sets differ: data has {matrix_ids:?}, model has {model_ids:?}"
        )));
    }
    Ok(())
}

/// Log of the posterior kernel (up to a constant): N(0,1) prior times the
/// response likelihood, with missing entries excluded.
fn log_posterior<R: Real>(responses: &[Option<Response>], model: &FittedModel<R>, theta: R) -> R {
    let mut value = -theta * theta / real(2.0);
    for (item, response) in model.items().iter().zip(responses) {
        if let Some(r) = response {
            let z = item.discrimination * (theta - item.difficulty);
            value += if r.is_pass() {
                log_sigmoid(z)
            } else {
                log_sigmoid(-z)
            };
        }
    }
    value
}

/// Posterior score function and curvature at `theta`.
fn posterior_derivatives<R: Real>(
    responses: &[Option<Response>],
    model: &FittedModel<R>,
    theta: R,
) -> (R, R) {
    let mut gradient = -theta;
    let mut curvature = -R::one();
    for (item, response) in model.items().iter().zip(responses) {
        if let Some(r) = response {
            let a = item.discrimination;
            let p = sigmoid(a * (theta - item.difficulty));
            let u = if r.is_pass() { R::one() } else { R::zero() };
            gradient += a * (u - p);
            curvature -= a * a * p * (R::one() - p);
        }
    }
    (gradient, curvature)
}

/// Empirical Bayes: the posterior mode, located by damped Newton. The
/// posterior is strictly log-concave so the mode is unique and finite for
/// every pattern, including all-zero and all-one vectors.
fn posterior_mode<R: Real>(responses: &[Option<Response>], model: &FittedModel<R>) -> (R, R) {
    let mut theta = R::zero();
    let tol: R = real(1e-12);
    for _ in 0..100 {
        let (gradient, curvature) = posterior_derivatives(responses, model, theta);
        let step = gradient / curvature;
        let mut t = R::one();
        let f0 = log_posterior(responses, model, theta);
        let mut next = theta - step;
        for _ in 0..60 {
            next = theta - t * step;
            if log_posterior(responses, model, next) >= f0 {
                break;
            }
            t /= real(2.0);
        }
        let moved = (next - theta).abs();
        theta = next;
        if moved < tol {
            break;
        }
    }
    let (_, curvature) = posterior_derivatives(responses, model, theta);
    (theta, (-curvature).recip().sqrt())
}

/// Expected a posteriori: quadrature-weighted posterior mean and SD.
fn posterior_mean<R: Real>(responses: &[Option<Response>], model: &FittedModel<R>) -> (R, R) {
    let quadrature = model.quadrature();
    let log_kernel: Vec<R> = quadrature
        .iter()
        .map(|(x, w)| {
            let mut s = w.ln();
            for (item, response) in model.items().iter().zip(responses) {
                if let Some(r) = response {
                    let z = item.discrimination * (x - item.difficulty);
                    s += if r.is_pass() {
                        log_sigmoid(z)
                    } else {
                        log_sigmoid(-z)
                    };
                }
            }
            s
        })
        .collect();
    let peak = log_kernel.iter().copied().fold(R::neg_infinity(), R::max);
    let weights: Vec<R> = log_kernel.iter().map(|&v| (v - peak).exp()).collect();
    let total: R = weights.iter().copied().sum();
    let mean = quadrature
        .nodes()
        .iter()
        .zip(&weights)
        .map(|(&x, &w)| x * w)
        .sum::<R>()
        / total;
    let variance = quadrature
        .nodes()
        .iter()
        .zip(&weights)
        .map(|(&x, &w)| (x - mean) * (x - mean) * w)
        .sum::<R>()
        / total;
    (mean, variance.max(R::zero()).sqrt())
}

/// Plain maximum likelihood, clamped to the model's parameter box so that
/// perfect patterns (whose MLE diverges) come back at the box edge.
fn maximum_likelihood<R: Real>(responses: &[Option<Response>], model: &FittedModel<R>) -> R {
    let bound = model.diagnostics().parameter_bound;
    let objective = |theta: R| -> R {
        let mut value = R::zero();
        for (item, response) in model.items().iter().zip(responses) {
            if let Some(r) = response {
                let z = item.discrimination * (theta - item.difficulty);
                value += if r.is_pass() {
                    log_sigmoid(z)
                } else {
                    log_sigmoid(-z)
                };
            }
        }
        value
    };

    let mut theta = R::zero();
    let tol: R = real(1e-12);
    for _ in 0..200 {
        let mut gradient = R::zero();
        let mut curvature = R::zero();
        for (item, response) in model.items().iter().zip(responses) {
            if let Some(r) = response {
                let a = item.discrimination;
                let p = sigmoid(a * (theta - item.difficulty));
                let u = if r.is_pass() { R::one() } else { R::zero() };
                gradient += a * (u - p);
                curvature -= a * a * p * (R::one() - p);
            }
        }
        if !curvature.is_finite() || curvature.abs() < R::min_positive_value() {
            // flat likelihood: walk toward the gradient sign until clamped
            let target = if gradient > R::zero() { bound } else { -bound };
            theta = target;
            break;
        }
        let target = (theta - gradient / curvature).max(-bound).min(bound);
        let f0 = objective(theta);
        let mut t = R::one();
        let mut next = target;
        for _ in 0..60 {
            next = theta + t * (target - theta);
            if objective(next) >= f0 {
                break;
            }
            t /= real(2.0);
        }
        let moved = (next - theta).abs();
        theta = next;
        if moved < tol {
            break;
        }
    }
    theta
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::irt::{fit, FitConfig, ModelKind, ResponseMatrix};

    fn demo_model() -> (ResponseMatrix, FittedModel<f64>) {
        let rows: Vec<(String, Vec<Option<Response>>)> = [
            [1, 0, 1],
            [0, 1, 0],
            [1, 1, 0],
            [0, 0, 1],
            [1, 1, 1],
            [0, 0, 0],
            [1, 0, 0],
            [0, 1, 1],
            [1, 1, 0],
            [0, 0, 1],
        ]
        .iter()
        .enumerate()
        .map(|(i, cells)| {
            (
                format!("d{}", i + 1),
                cells
                    .iter()
                    .map(|&c| Some(Response::from_u8(c).unwrap()))
                    .collect(),
            )
        })
        .collect();
        let matrix = ResponseMatrix::new(vec!["a".into(), "b".into(), "c".into()], rows).unwrap();
        let model = fit(&matrix, ModelKind::TwoPl, &FitConfig::default()).unwrap();
        (matrix, model)
    }

    #[test]
    fn identical_patterns_get_bitwise_identical_estimates() {
        let (_, model) = demo_model();
        let pattern = vec![
            Some(Response::Pass),
            Some(Response::Fail),
            Some(Response::Pass),
        ];
        for method in [ScoringMethod::Eb, ScoringMethod::Eap, ScoringMethod::Ml] {
            let first = score_response_vector("x", &pattern, &model, method).unwrap();
            let second = score_response_vector("y", &pattern, &model, method).unwrap();
            assert_eq!(first.theta.to_bits(), second.theta.to_bits());
        }
    }

    #[test]
    fn eb_and_eap_finite_for_perfect_patterns() {
        let (_, model) = demo_model();
        let all_pass = vec![Some(Response::Pass); 3];
        let all_fail = vec![Some(Response::Fail); 3];
        for method in [ScoringMethod::Eb, ScoringMethod::Eap] {
            for pattern in [&all_pass, &all_fail] {
                let estimate = score_response_vector("d", pattern, &model, method).unwrap();
                assert!(estimate.theta.is_finite());
                assert!(estimate.posterior_sd.unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn ml_perfect_pattern_sits_on_the_box() {
        // all-positive discriminations: the all-pass likelihood is strictly
        // increasing, so the MLE runs to the parameter box
        let diag = crate::irt::FitDiagnostics {
            log_likelihood: 0.0,
            iterations: 0,
            converged: true,
            bound_hit: false,
            tolerance: 1e-4,
            max_iterations: 500,
            parameter_bound: 10.0,
            log_likelihood_history: vec![],
        };
        let model = FittedModel::from_parts(
            crate::irt::ModelKind::TwoPl,
            vec![
                crate::irt::ItemParameters::new("x", 1.5_f64, -0.3),
                crate::irt::ItemParameters::new("y", 1.0, 0.2),
                crate::irt::ItemParameters::new("z", 0.8, 0.9),
            ],
            diag,
            21,
        )
        .unwrap();
        let all_pass = vec![Some(Response::Pass); 3];
        let estimate = score_response_vector("d", &all_pass, &model, ScoringMethod::Ml).unwrap();
        assert!(estimate.theta.is_finite());
        assert!(estimate.posterior_sd.is_none());
        assert!(
            (estimate.theta - 10.0).abs() < 1e-6,
            "expected the box edge, got {}",
            estimate.theta
        );

        let all_fail = vec![Some(Response::Fail); 3];
        let estimate = score_response_vector("d", &all_fail, &model, ScoringMethod::Ml).unwrap();
        assert!((estimate.theta + 10.0).abs() < 1e-6);
    }

    #[test]
    fn item_set_mismatch_is_a_schema_error() {
        let (matrix, model) = demo_model();
        let wrong = ResponseMatrix::new(
            vec!["a".into(), "b".into(), "zzz".into()],
            matrix
                .rows()
                .iter()
                .map(|r| (r.deployment_id().to_string(), r.responses().to_vec()))
                .collect(),
        )
        .unwrap();
        let err = score_abilities(&wrong, &model, ScoringMethod::Eb).unwrap_err();
        assert!(matches!(err, Error::SchemaMismatch(_)));
    }

    #[test]
    fn eap_matches_direct_quadrature_recomputation() {
        let (_, model) = demo_model();
        let pattern = vec![
            Some(Response::Pass),
            Some(Response::Fail),
            Some(Response::Fail),
        ];
        let estimate = score_response_vector("d", &pattern, &model, ScoringMethod::Eap).unwrap();

        // independent recomputation straight from icc values
        let mut numerator = 0.0;
        let mut denominator = 0.0;
        for (x, w) in model.quadrature().iter() {
            let mut like = 1.0;
            for (item, response) in model.items().iter().zip(&pattern) {
                let p = crate::irt::icc(x, item).unwrap();
                like *= if response.unwrap().is_pass() {
                    p
                } else {
                    1.0 - p
                };
            }
            numerator += x * w * like;
            denominator += w * like;
        }
        assert!((estimate.theta - numerator / denominator).abs() < 1e-8);
    }

    #[test]
    fn eb_mode_has_zero_posterior_gradient() {
        let (_, model) = demo_model();
        let pattern = vec![
            Some(Response::Fail),
            Some(Response::Pass),
            Some(Response::Fail),
        ];
        let estimate = score_response_vector("d", &pattern, &model, ScoringMethod::Eb).unwrap();
        let (gradient, _) = posterior_derivatives(&pattern, &model, estimate.theta);
        assert!(gradient.abs() < 1e-9, "gradient at mode: {gradient}");
    }
}
