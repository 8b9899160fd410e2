//! Marginal maximum-likelihood fitting by EM.
//!
//! The E-step integrates the latent trait out against the standard-normal
//! prior with Gauss-Hermite quadrature; the M-step maximizes each item's
//! expected complete-data log-likelihood by Newton-Raphson with step-halving,
//! in slope/intercept space where that objective is concave.
//!
//! Parameter boxes (|a|, |b| bounded) are enforced without breaking EM
//! monotonicity: when the unconstrained Newton optimum leaves the box, the
//! M-step instead maximizes over the two feasible wedges in (a, c) space and
//! keeps the incoming parameters if neither wedge improves on them.

use crate::error::{Error, Result};
use crate::num::{inverse_normal_cdf, log_sigmoid, log_sum_exp, real, sigmoid, Real};
use crate::quadrature::GaussHermite;

use super::{
    FitConfig, FitDiagnostics, FittedModel, ItemParameters, ModelKind, Response, ResponseMatrix,
};

/// Fits a 1PL or 2PL model to `matrix` under a standard-normal latent prior.
///
/// Returns the model with fit diagnostics; non-convergence is reported via
/// `diagnostics.converged`, never silently. Constant items and undersized
/// matrices are rejected.
pub fn fit<R: Real>(
    matrix: &ResponseMatrix,
    kind: ModelKind,
    config: &FitConfig<R>,
) -> Result<FittedModel<R>> {
    validate_for_fit(matrix)?;
    validate_config(config)?;

    let quadrature = GaussHermite::<R>::new(config.nodes)?;
    let nodes: Vec<R> = quadrature.nodes().to_vec();
    let log_weights: Vec<R> = quadrature.weights().iter().map(|w| w.ln()).collect();
    let bound = config.parameter_bound;

    let mut params = initial_parameters(matrix, kind, bound);

    let mut history: Vec<R> = Vec::with_capacity(32);
    let mut converged = false;
    let mut iterations = 0;

    for iteration in 1..=config.max_iterations {
        iterations = iteration;
        let estep = e_step(matrix, &params, &nodes, &log_weights);
        history.push(estep.log_likelihood);

        let mut max_change = R::zero();
        for (j, state) in params.iter_mut().enumerate() {
            let (a_new, b_new) = match kind {
                ModelKind::OnePl => {
                    let b = mstep_rasch(&nodes, &estep.nbar[j], &estep.rbar[j], state.1, bound);
                    (R::one(), b)
                }
                ModelKind::TwoPl => mstep_item(
                    &nodes,
                    &estep.nbar[j],
                    &estep.rbar[j],
                    state.0,
                    state.1,
                    bound,
                ),
            };
            max_change = max_change
                .max((a_new - state.0).abs())
                .max((b_new - state.1).abs());
            *state = (a_new, b_new);
        }

        if max_change < config.tolerance {
            converged = true;
            break;
        }
    }

    let final_ll = marginal_log_likelihood(matrix, &params, &nodes, &log_weights);
    history.push(final_ll);

    let edge = bound - real(1e-9);
    let bound_hit = params
        .iter()
        .any(|&(a, b)| a.abs() >= edge || b.abs() >= edge);

    let items = matrix
        .item_ids()
        .iter()
        .zip(&params)
        .map(|(id, &(a, b))| ItemParameters::new(id.clone(), a, b))
        .collect();

    Ok(FittedModel {
        kind,
        items,
        diagnostics: FitDiagnostics {
            log_likelihood: final_ll,
            iterations,
            converged,
            bound_hit,
            tolerance: config.tolerance,
            max_iterations: config.max_iterations,
            parameter_bound: bound,
            log_likelihood_history: history,
        },
        quadrature,
    })
}

fn validate_for_fit(matrix: &ResponseMatrix) -> Result<()> {
    if matrix.n_items() < 2 {
        return Err(Error::insufficient_data(format!(
            "fitting needs at least 2 items, got {}",
            matrix.n_items()
        )));
    }
    if matrix.n_rows() < 3 {
        return Err(Error::insufficient_data(format!(
            "fitting needs at least 3 rows, got {}",
            matrix.n_rows()
        )));
    }
    for (j, item_id) in matrix.item_ids().iter().enumerate() {
        let mut observed = 0usize;
        let mut passes = 0usize;
        for row in matrix.rows() {
            if let Some(response) = row.responses()[j] {
                observed += 1;
                if response.is_pass() {
                    passes += 1;
                }
            }
        }
        if observed == 0 {
            return Err(Error::degenerate_item(item_id, "no observed responses"));
        }
        if passes == 0 {
            return Err(Error::degenerate_item(
                item_id,
                "all observed responses are 0",
            ));
        }
        if passes == observed {
            return Err(Error::degenerate_item(
                item_id,
                "all observed responses are 1",
            ));
        }
    }
    Ok(())
}

fn validate_config<R: Real>(config: &FitConfig<R>) -> Result<()> {
    if config.nodes == 0 {
        return Err(Error::invalid_argument(
            "quadrature node count must be positive",
        ));
    }
    if !config.tolerance.is_finite() || config.tolerance <= R::zero() {
        return Err(Error::invalid_argument(
            "tolerance must be a positive finite number",
        ));
    }
    if config.max_iterations == 0 {
        return Err(Error::invalid_argument("max_iterations must be positive"));
    }
    if !config.parameter_bound.is_finite() || config.parameter_bound <= R::zero() {
        return Err(Error::invalid_argument(
            "parameter bound must be a positive finite number",
        ));
    }
    Ok(())
}

/// Difficulty from the inverse-normal transform of the pass rate, unit slope.
fn initial_parameters<R: Real>(matrix: &ResponseMatrix, kind: ModelKind, bound: R) -> Vec<(R, R)> {
    let cap = bound * real(0.99);
    let a0 = match kind {
        ModelKind::OnePl => R::one(),
        ModelKind::TwoPl => R::one().min(cap),
    };
    (0..matrix.n_items())
        .map(|j| {
            let mut observed = 0usize;
            let mut passes = 0usize;
            for row in matrix.rows() {
                if let Some(response) = row.responses()[j] {
                    observed += 1;
                    if response.is_pass() {
                        passes += 1;
                    }
                }
            }
            let rate = real::<R>(passes as f64) / real(observed as f64);
            let b0 = inverse_normal_cdf(R::one() - rate).max(-cap).min(cap);
            (a0, b0)
        })
        .collect()
}

struct EStep<R> {
    log_likelihood: R,
    /// Expected count of observed responses per item per node.
    nbar: Vec<Vec<R>>,
    /// Expected count of passes per item per node.
    rbar: Vec<Vec<R>>,
}

fn e_step<R: Real>(
    matrix: &ResponseMatrix,
    params: &[(R, R)],
    nodes: &[R],
    log_weights: &[R],
) -> EStep<R> {
    let n_nodes = nodes.len();
    let n_items = params.len();

    let mut log_p = vec![vec![R::zero(); n_nodes]; n_items];
    let mut log_q = vec![vec![R::zero(); n_nodes]; n_items];
    for (j, &(a, b)) in params.iter().enumerate() {
        for (k, &x) in nodes.iter().enumerate() {
            let z = a * (x - b);
            log_p[j][k] = log_sigmoid(z);
            log_q[j][k] = log_sigmoid(-z);
        }
    }

    let mut nbar = vec![vec![R::zero(); n_nodes]; n_items];
    let mut rbar = vec![vec![R::zero(); n_nodes]; n_items];
    let mut log_likelihood = R::zero();
    let mut joint = vec![R::zero(); n_nodes];

    for row in matrix.rows() {
        for k in 0..n_nodes {
            let mut s = log_weights[k];
            for (j, response) in row.responses().iter().enumerate() {
                match response {
                    Some(Response::Pass) => s += log_p[j][k],
                    Some(Response::Fail) => s += log_q[j][k],
                    None => {}
                }
            }
            joint[k] = s;
        }
        let log_marginal = log_sum_exp(&joint);
        log_likelihood += log_marginal;
        for k in 0..n_nodes {
            let w = (joint[k] - log_marginal).exp();
            for (j, response) in row.responses().iter().enumerate() {
                if let Some(r) = response {
                    nbar[j][k] += w;
                    if r.is_pass() {
                        rbar[j][k] += w;
                    }
                }
            }
        }
    }

    EStep {
        log_likelihood,
        nbar,
        rbar,
    }
}

pub(crate) fn marginal_log_likelihood<R: Real>(
    matrix: &ResponseMatrix,
    params: &[(R, R)],
    nodes: &[R],
    log_weights: &[R],
) -> R {
    let n_nodes = nodes.len();
    let mut log_p = vec![vec![R::zero(); n_nodes]; params.len()];
    let mut log_q = vec![vec![R::zero(); n_nodes]; params.len()];
    for (j, &(a, b)) in params.iter().enumerate() {
        for (k, &x) in nodes.iter().enumerate() {
            let z = a * (x - b);
            log_p[j][k] = log_sigmoid(z);
            log_q[j][k] = log_sigmoid(-z);
        }
    }
    let mut total = R::zero();
    let mut joint = vec![R::zero(); n_nodes];
    for row in matrix.rows() {
        for k in 0..n_nodes {
            let mut s = log_weights[k];
            for (j, response) in row.responses().iter().enumerate() {
                match response {
                    Some(Response::Pass) => s += log_p[j][k],
                    Some(Response::Fail) => s += log_q[j][k],
                    None => {}
                }
            }
            joint[k] = s;
        }
        total += log_sum_exp(&joint);
    }
    total
}

/// Expected complete-data log-likelihood for one item at slope `a`,
/// intercept `c` (logit = a * theta + c).
fn q_objective<R: Real>(nodes: &[R], nbar: &[R], rbar: &[R], a: R, c: R) -> R {
    let mut q = R::zero();
    for (k, &x) in nodes.iter().enumerate() {
        let z = a * x + c;
        q += rbar[k] * log_sigmoid(z) + (nbar[k] - rbar[k]) * log_sigmoid(-z);
    }
    q
}

/// Unconstrained 2-D Newton ascent with step-halving; the objective is
/// concave in (a, c), so this converges to its global maximum.
fn newton_slope_intercept<R: Real>(
    nodes: &[R],
    nbar: &[R],
    rbar: &[R],
    mut a: R,
    mut c: R,
) -> (R, R) {
    let move_tol: R = real(1e-11);
    for _ in 0..100 {
        let mut g_a = R::zero();
        let mut g_c = R::zero();
        let mut h_aa = R::zero();
        let mut h_ac = R::zero();
        let mut h_cc = R::zero();
        for (k, &x) in nodes.iter().enumerate() {
            let p = sigmoid(a * x + c);
            let d = rbar[k] - nbar[k] * p;
            g_a += d * x;
            g_c += d;
            let w = nbar[k] * p * (R::one() - p);
            h_aa -= w * x * x;
            h_ac -= w * x;
            h_cc -= w;
        }
        let det = h_aa * h_cc - h_ac * h_ac;
        if !det.is_finite() || det.abs() < R::min_positive_value() {
            break;
        }
        let step_a = (h_cc * g_a - h_ac * g_c) / det;
        let step_c = (h_aa * g_c - h_ac * g_a) / det;

        let f0 = q_objective(nodes, nbar, rbar, a, c);
        let mut t = R::one();
        let mut accepted = false;
        let mut next = (a, c);
        for _ in 0..60 {
            next = (a - t * step_a, c - t * step_c);
            if q_objective(nodes, nbar, rbar, next.0, next.1) >= f0 {
                accepted = true;
                break;
            }
            t /= real(2.0);
        }
        if !accepted {
            break;
        }
        let moved = (next.0 - a).abs().max((next.1 - c).abs());
        a = next.0;
        c = next.1;
        if moved < move_tol {
            break;
        }
    }
    (a, c)
}

/// Clamped 1-D Newton for the intercept at a fixed slope.
fn best_intercept<R: Real>(
    nodes: &[R],
    nbar: &[R],
    rbar: &[R],
    a: R,
    c_lo: R,
    c_hi: R,
    c_init: R,
) -> R {
    let mut c = c_init.max(c_lo).min(c_hi);
    let move_tol: R = real(1e-12);
    for _ in 0..100 {
        let mut g = R::zero();
        let mut h = R::zero();
        for (k, &x) in nodes.iter().enumerate() {
            let p = sigmoid(a * x + c);
            g += rbar[k] - nbar[k] * p;
            h -= nbar[k] * p * (R::one() - p);
        }
        if !h.is_finite() || h.abs() < R::min_positive_value() {
            break;
        }
        let target = c - g / h;
        let f0 = q_objective(nodes, nbar, rbar, a, c);
        let mut t = R::one();
        let mut accepted = false;
        let mut trial = c;
        for _ in 0..60 {
            trial = (c + t * (target - c)).max(c_lo).min(c_hi);
            if q_objective(nodes, nbar, rbar, a, trial) >= f0 {
                accepted = true;
                break;
            }
            t /= real(2.0);
        }
        if !accepted {
            break;
        }
        let moved = (trial - c).abs();
        c = trial;
        if moved < move_tol {
            break;
        }
    }
    c
}

/// Maximizes the item objective over one wedge of the feasible box:
/// slope sign fixed, |a| in (0, bound], |c| <= bound * |a| (so |b| <= bound).
/// Ternary search over |a| works because the partial maximum of a concave
/// function over a convex slice is concave.
fn wedge_maximum<R: Real>(
    nodes: &[R],
    nbar: &[R],
    rbar: &[R],
    sign: R,
    bound: R,
    c_seed: R,
) -> (R, R, R) {
    let third = R::one() / real(3.0);
    let eval = |magnitude: R| -> (R, R) {
        let a = sign * magnitude;
        let c_hi = bound * magnitude;
        let c = best_intercept(nodes, nbar, rbar, a, -c_hi, c_hi, c_seed);
        (q_objective(nodes, nbar, rbar, a, c), c)
    };

    let mut lo: R = real(1e-8);
    let mut hi = bound;
    for _ in 0..200 {
        let span = hi - lo;
        if span < real(1e-10) {
            break;
        }
        let m1 = lo + span * third;
        let m2 = hi - span * third;
        if eval(m1).0 < eval(m2).0 {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let magnitude = (lo + hi) / real(2.0);
    let (q, c) = eval(magnitude);
    (q, sign * magnitude, c)
}

/// One 2PL M-step. Fast path: unconstrained Newton, accepted when the
/// optimum respects the box. Otherwise the best feasible wedge maximum is
/// taken, falling back to the incoming parameters if nothing improves;
/// the fallback keeps the marginal likelihood monotone.
fn mstep_item<R: Real>(nodes: &[R], nbar: &[R], rbar: &[R], a0: R, b0: R, bound: R) -> (R, R) {
    let c0 = -a0 * b0;
    let (a1, c1) = newton_slope_intercept(nodes, nbar, rbar, a0, c0);
    if a1.abs() > real(1e-12) {
        let b1 = -c1 / a1;
        if a1.abs() <= bound && b1.abs() <= bound {
            return (a1, b1);
        }
    }

    let (q_pos, a_pos, c_pos) = wedge_maximum(nodes, nbar, rbar, R::one(), bound, c0);
    let (q_neg, a_neg, c_neg) = wedge_maximum(nodes, nbar, rbar, -R::one(), bound, c0);
    let (q_best, a_best, c_best) = if q_pos >= q_neg {
        (q_pos, a_pos, c_pos)
    } else {
        (q_neg, a_neg, c_neg)
    };

    let q_incoming = q_objective(nodes, nbar, rbar, a0, c0);
    if q_best < q_incoming {
        return (a0, b0);
    }
    (a_best, -c_best / a_best)
}

/// Rasch M-step: slope pinned to 1, difficulty boxed directly.
fn mstep_rasch<R: Real>(nodes: &[R], nbar: &[R], rbar: &[R], b0: R, bound: R) -> R {
    let c = best_intercept(nodes, nbar, rbar, R::one(), -bound, bound, -b0);
    -c
}
