//! Scalar abstraction and numeric helpers shared by the model code.
//!
//! All latent-trait math is generic over [`Real`] so the library works with
//! `f32` or `f64`; the crate root exports `f64` aliases for everyday use.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + NumAssign
        + Sum
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Shorthand for lifting an `f64` constant into the working scalar type.
#[inline]
pub(crate) fn real<R: Real>(x: f64) -> R {
    R::from_f64(x).expect("finite f64 constant converts to any Real")
}

/// Logistic sigmoid, stable for large |z|.
#[inline]
pub fn sigmoid<R: Real>(z: R) -> R {
    if z >= R::zero() {
        R::one() / (R::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (R::one() + e)
    }
}

/// ln(sigmoid(z)), stable for large |z|.
#[inline]
pub fn log_sigmoid<R: Real>(z: R) -> R {
    if z >= R::zero() {
        -(-z).exp().ln_1p()
    } else {
        z - z.exp().ln_1p()
    }
}

/// Numerically stable log(sum(exp(xs))).
pub fn log_sum_exp<R: Real>(xs: &[R]) -> R {
    let max = xs.iter().copied().fold(R::neg_infinity(), R::max);
    if !max.is_finite() {
        return max;
    }
    let sum: R = xs.iter().map(|&x| (x - max).exp()).sum();
    max + sum.ln()
}

/// Inverse standard-normal CDF via Acklam's rational approximation
/// (relative error below 1.2e-9 over (0, 1)).
pub fn inverse_normal_cdf<R: Real>(p: R) -> R {
    assert!(
        p > R::zero() && p < R::one(),
        "inverse_normal_cdf requires p in (0, 1), got {p}"
    );

    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.38357751867269e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];

    let a: Vec<R> = A.iter().map(|&x| real(x)).collect();
    let b: Vec<R> = B.iter().map(|&x| real(x)).collect();
    let c: Vec<R> = C.iter().map(|&x| real(x)).collect();
    let d: Vec<R> = D.iter().map(|&x| real(x)).collect();

    let p_low: R = real(0.02425);
    let p_high = R::one() - p_low;
    let two: R = real(2.0);

    if p < p_low {
        let q = (-two * p.ln()).sqrt();
        (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
            / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + R::one())
    } else if p > p_high {
        let q = (-two * (R::one() - p).ln()).sqrt();
        -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
            / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + R::one())
    } else {
        let q = p - real(0.5);
        let r = q * q;
        (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q
            / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + R::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_midpoint_and_tails() {
        assert_eq!(sigmoid(0.0_f64), 0.5);
        assert!(sigmoid(40.0_f64) > 1.0 - 1e-15);
        assert!(sigmoid(-40.0_f64) < 1e-15);
        assert!(sigmoid(-800.0_f64) >= 0.0);
    }

    #[test]
    fn log_sigmoid_matches_direct_form() {
        for &z in &[-30.0, -2.5, 0.0, 1.0, 25.0_f64] {
            let direct = sigmoid(z).ln();
            assert!((log_sigmoid(z) - direct).abs() < 1e-12);
        }
        // far tail where the direct form underflows
        assert!((log_sigmoid(-745.0_f64) - (-745.0)).abs() < 1e-9);
    }

    #[test]
    fn log_sum_exp_shifts_correctly() {
        let xs = [-1000.0, -1000.0_f64];
        assert!((log_sum_exp(&xs) - (-1000.0 + 2.0_f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp::<f64>(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn inverse_normal_known_quantiles() {
        assert!((inverse_normal_cdf(0.5_f64)).abs() < 1e-12);
        assert!((inverse_normal_cdf(0.975_f64) - 1.959963984540054).abs() < 1e-8);
        assert!((inverse_normal_cdf(0.025_f64) + 1.959963984540054).abs() < 1e-8);
        assert!((inverse_normal_cdf(0.001_f64) + 3.090232306167813).abs() < 1e-8);
    }

    #[test]
    fn generic_over_f32() {
        let p = sigmoid(1.5_f32);
        assert!((p - 0.817_574_5).abs() < 1e-6);
    }
}
