//! Standard normal distribution helpers with log-scale tails.

use libm::erfc;
use std::f64::consts::{PI, SQRT_2};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

pub fn log_pdf(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI
}

pub fn cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// log Φ(x), accurate deep into both tails.
pub fn log_cdf(x: f64) -> f64 {
    if x > 5.0 {
        (-0.5 * erfc(x / SQRT_2)).ln_1p()
    } else if x > -37.0 {
        (0.5 * erfc(-x / SQRT_2)).ln()
    } else {
        // asymptotic Mills-ratio expansion
        let z = 1.0 / (x * x);
        let series = 1.0
            + z * (-1.0 + z * (3.0 + z * (-15.0 + z * (105.0 + z * (-945.0 + z * 10395.0)))));
        log_pdf(x) - (-x).ln() + series.ln()
    }
}

/// Inverse of the standard normal distribution function.
///
/// Rational approximation (Acklam) followed by two Halley corrections, which
/// brings the relative error to the level of the distribution function itself.
pub fn quantile(p: f64) -> f64 {
    if p.is_nan() || p <= 0.0 || p >= 1.0 {
        return if p == 0.0 {
            f64::NEG_INFINITY
        } else if p == 1.0 {
            f64::INFINITY
        } else {
            f64::NAN
        };
    }
    if p > 0.5 {
        return -quantile_lower(1.0 - p);
    }
    quantile_lower(p)
}

fn quantile_lower(p: f64) -> f64 {
    let mut x = acklam(p);
    for _ in 0..2 {
        let e = cdf(x) - p;
        let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
        if !u.is_finite() {
            break;
        }
        x -= u / (1.0 + 0.5 * x * u);
    }
    x
}

fn acklam(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383_577_518_672_69e2,
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
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_known_values() {
        assert!((quantile(0.975) - 1.959_963_984_540_054).abs() < 1e-12);
        assert!((quantile(0.5)).abs() < 1e-15);
        assert!((quantile(0.025) + 1.959_963_984_540_054).abs() < 1e-12);
        assert!((quantile(1e-10) + 6.361_340_902_404_056).abs() < 1e-9);
    }

    #[test]
    fn quantile_inverts_cdf() {
        for k in 1..200 {
            let p = k as f64 / 200.0;
            let x = quantile(p);
            assert!((cdf(x) - p).abs() <= 1e-14 * p.max(1e-3), "p={p}");
        }
        for e in [1e-20, 1e-50, 1e-100, 1e-250] {
            let x = quantile(e);
            assert!(((cdf(x) - e) / e).abs() < 1e-12, "p={e}");
        }
    }

    #[test]
    fn log_cdf_branches_join() {
        for x in [-36.9, -37.0, -37.1] {
            let direct = (0.5 * erfc(-x / SQRT_2)).ln();
            let z = 1.0 / (x * x);
            let series = 1.0
                + z * (-1.0
                    + z * (3.0 + z * (-15.0 + z * (105.0 + z * (-945.0 + z * 10395.0)))));
            let asym = log_pdf(x) - (-x).ln() + series.ln();
            assert!((direct - asym).abs() < 1e-10 * direct.abs(), "x={x}");
        }
        assert!((log_cdf(0.0) - 0.5f64.ln()).abs() < 1e-15);
        assert!(log_cdf(40.0) <= 0.0 && log_cdf(40.0) > -1e-300);
        assert!(log_cdf(-1e6).is_finite());
    }
}
