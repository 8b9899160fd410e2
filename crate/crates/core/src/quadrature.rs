//! Gauss-Hermite quadrature against the standard-normal weight.
//!
//! Nodes and weights are already transformed for N(0, 1): a rule of `n`
//! points satisfies sum(w) = 1 and integrates polynomial moments of the
//! normal density exactly up to degree 2n - 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{real, Real};

/// Gauss-Hermite rule rescaled to integrate f against the N(0, 1) density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussHermite<R> {
    nodes: Vec<R>,
    weights: Vec<R>,
}

impl<R: Real> GaussHermite<R> {
    /// Builds an `n`-point rule. Construction is deterministic: the same `n`
    /// always yields bit-identical tables.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid_argument(
                "quadrature rule needs at least one node",
            ));
        }
        let (mut x, mut w) = physicists_rule::<R>(n)?;
        // rescale for the standard-normal weight: theta = sqrt(2) x, w /= sqrt(pi)
        let sqrt2 = real::<R>(2.0).sqrt();
        let inv_sqrt_pi = R::one() / R::PI().sqrt();
        for node in x.iter_mut() {
            *node *= sqrt2;
        }
        for weight in w.iter_mut() {
            *weight *= inv_sqrt_pi;
        }
        Ok(Self {
            nodes: x,
            weights: w,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[R] {
        &self.nodes
    }

    pub fn weights(&self) -> &[R] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (R, R)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// Integrates `f` against the N(0, 1) density.
    pub fn integrate<F: Fn(R) -> R>(&self, f: F) -> R {
        self.iter().map(|(x, w)| f(x) * w).sum()
    }
}

/// Evaluates the orthonormal Hermite recurrence at `z`, returning the
/// polynomial value and its derivative factor used by the Newton update.
fn hermite_eval<R: Real>(n: usize, z: R) -> (R, R) {
    // pi^(-1/4)
    let mut p1: R = real(0.751_125_544_464_942_5);
    let mut p2 = R::zero();
    for j in 1..=n {
        let p3 = p2;
        p2 = p1;
        let jr = real::<R>(j as f64);
        p1 = z * (real::<R>(2.0) / jr).sqrt() * p2 - ((jr - R::one()) / jr).sqrt() * p3;
    }
    let pp = (real::<R>(2.0) * real::<R>(n as f64)).sqrt() * p2;
    (p1, pp)
}

/// Physicists' Gauss-Hermite nodes/weights (weight e^{-x^2}) by Newton
/// iteration on the orthonormal recurrence, largest root first.
fn physicists_rule<R: Real>(n: usize) -> Result<(Vec<R>, Vec<R>)> {
    let mut x = vec![R::zero(); n];
    let mut w = vec![R::zero(); n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut z = R::zero();

    for i in 0..m {
        z = match i {
            0 => real::<R>((2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0)),
            1 => z - real::<R>(1.14 * nf.powf(0.426)) / z,
            2 => real::<R>(1.86) * z - real::<R>(0.86) * x[0],
            3 => real::<R>(1.91) * z - real::<R>(0.91) * x[1],
            _ => real::<R>(2.0) * z - x[i - 2],
        };
        if n == 1 {
            z = R::zero();
        }
        let tol = R::epsilon() * real::<R>(64.0);
        let mut converged = false;
        let mut pp = R::zero();
        for _ in 0..200 {
            let (p1, pp_new) = hermite_eval(n, z);
            pp = pp_new;
            if pp == R::zero() {
                break;
            }
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= tol * z.abs().max(R::one()) {
                converged = true;
                break;
            }
        }
        if !converged && n > 1 {
            return Err(Error::numerical(format!(
                "Gauss-Hermite iteration failed to converge for {n} nodes"
            )));
        }
        // odd rule: the central root is exactly zero
        if n % 2 == 1 && i == m - 1 {
            z = R::zero();
            let (_, pp0) = hermite_eval(n, z);
            pp = pp0;
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        let wi = real::<R>(2.0) / (pp * pp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    // ascending node order
    x.reverse();
    w.reverse();
    Ok((x, w))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_point_rule_matches_published_table() {
        let rule = GaussHermite::<f64>::new(5).unwrap();
        // physicists' nodes 0, ±0.9585724646138185, ±2.0201828704560856
        // scaled by sqrt(2) for the normal weight
        let expected = [
            -2.0201828704560856_f64 * 2.0_f64.sqrt(),
            -0.9585724646138185 * 2.0_f64.sqrt(),
            0.0,
            0.9585724646138185 * 2.0_f64.sqrt(),
            2.0201828704560856 * 2.0_f64.sqrt(),
        ];
        for (got, want) in rule.nodes().iter().zip(expected) {
            assert!((got - want).abs() < 1e-12, "node {got} vs {want}");
        }
        let weight_sum: f64 = rule.weights().iter().sum();
        assert!((weight_sum - 1.0).abs() < 1e-14);
    }

    #[test]
    fn normal_moments_are_exact() {
        for n in [2, 7, 21, 40] {
            let rule = GaussHermite::<f64>::new(n).unwrap();
            let m0 = rule.integrate(|_| 1.0);
            let m1 = rule.integrate(|x| x);
            let m2 = rule.integrate(|x| x * x);
            let m4 = rule.integrate(|x| x.powi(4));
            assert!((m0 - 1.0).abs() < 1e-13, "n={n} m0={m0}");
            assert!(m1.abs() < 1e-13, "n={n} m1={m1}");
            assert!((m2 - 1.0).abs() < 1e-12, "n={n} m2={m2}");
            if n >= 3 {
                assert!((m4 - 3.0).abs() < 1e-11, "n={n} m4={m4}");
            }
        }
    }

    #[test]
    fn single_node_rule_is_the_mean() {
        let rule = GaussHermite::<f64>::new(1).unwrap();
        assert_eq!(rule.nodes(), &[0.0]);
        assert!((rule.weights()[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_nodes_rejected() {
        assert!(GaussHermite::<f64>::new(0).is_err());
    }

    #[test]
    fn deterministic_construction() {
        let a = GaussHermite::<f64>::new(21).unwrap();
        let b = GaussHermite::<f64>::new(21).unwrap();
        assert_eq!(a, b);
        for (x, y) in a.nodes().iter().zip(b.nodes()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn works_in_f32() {
        let rule = GaussHermite::<f32>::new(9).unwrap();
        let m2 = rule.integrate(|x| x * x);
        assert!((m2 - 1.0).abs() < 1e-5);
    }
}
