//! Link families for binomial-response models.
//!
//! Every link is an inverse distribution function `G: R -> (0, 1)` with
//! density `g` and density derivative `g'`. The unit working weight
//! `omega(eta) = g^2 / [G (1 - G)]` drives the expected information, and
//! `omega_bar(z) = omega(G^{-1}(z))` is the same weight on the probability
//! scale.
//!
//! All evaluations go through log-scale pieces (`log G`, `log(1 - G)`,
//! `log g`, `log |g'|`) so that the tails stay finite far beyond the point
//! where the textbook formulas overflow.

use crate::error::{Error, Result};
use crate::normal;
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;

/// Fitted probabilities are kept inside `[PROB_EPS, 1 - PROB_EPS]`.
pub const PROB_EPS: f64 = f64::EPSILON;

/// Smallest unit working weight. Keeps `w_i > 0` when `omega` underflows,
/// with enough headroom that `sqrt(w_i)` times a design entry stays normal.
pub const OMEGA_FLOOR: f64 = 1e-200;

// Exponential arguments beyond this are treated as saturated.
const EXP_CAP: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkFamily {
    Logit,
    Probit,
    Cloglog,
    Loglog,
    Cauchit,
}

impl LinkFamily {
    pub const ALL: [LinkFamily; 5] = [
        LinkFamily::Logit,
        LinkFamily::Probit,
        LinkFamily::Cloglog,
        LinkFamily::Loglog,
        LinkFamily::Cauchit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LinkFamily::Logit => "logit",
            LinkFamily::Probit => "probit",
            LinkFamily::Cloglog => "cloglog",
            LinkFamily::Loglog => "loglog",
            LinkFamily::Cauchit => "cauchit",
        }
    }

    /// True when `G(-eta) = 1 - G(eta)`.
    pub fn is_symmetric(self) -> bool {
        matches!(
            self,
            LinkFamily::Logit | LinkFamily::Probit | LinkFamily::Cauchit
        )
    }

    pub fn evaluate(self, eta: f64) -> LinkEval {
        evaluate(self, eta)
    }

    pub fn inverse(self, z: f64) -> Result<f64> {
        inverse(self, z)
    }

    pub fn omega_bar(self, z: f64) -> Result<f64> {
        omega_bar(self, z)
    }

    fn log_parts(self, eta: f64) -> LogParts {
        match self {
            LinkFamily::Logit => logit_parts(eta),
            LinkFamily::Probit => probit_parts(eta),
            LinkFamily::Cloglog => cloglog_parts(eta),
            LinkFamily::Loglog => cloglog_parts(-eta).mirror(),
            LinkFamily::Cauchit => cauchit_parts(eta),
        }
    }
}

impl fmt::Display for LinkFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LinkFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LinkFamily::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| {
                Error::Invalid(format!(
                    "unknown link `{s}` (expected one of logit, probit, cloglog, loglog, cauchit)"
                ))
            })
    }
}

/// Per-eta bundle of link quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkEval {
    /// `G(eta)`, clamped to `[PROB_EPS, 1 - PROB_EPS]`.
    pub pi: f64,
    /// `g(eta)`.
    pub g: f64,
    /// `g'(eta)`.
    pub gprime: f64,
    /// `g^2 / [G (1 - G)]`, floored at [`OMEGA_FLOOR`].
    pub omega: f64,
    /// Unclamped `log G(eta)`.
    pub log_pi: f64,
    /// Unclamped `log(1 - G(eta))`.
    pub log_1m_pi: f64,
    /// `g' / omega`, so that `q = g'/omega + pi`.
    pub gprime_over_omega: f64,
    /// `omega / g = g / [G (1 - G)]`, the factor `w/d` in the score.
    pub omega_over_g: f64,
    /// `g / G`, the derivative of `log G`.
    pub g_over_pi: f64,
    /// `g / (1 - G)`, minus the derivative of `log(1 - G)`.
    pub g_over_1m_pi: f64,
}

#[derive(Debug, Clone, Copy)]
struct LogParts {
    log_cdf: f64,
    log_ccdf: f64,
    log_g: f64,
    gprime_sign: f64,
    log_abs_gprime: f64,
}

impl LogParts {
    /// Parts of the link `1 - G(-eta)` given parts of `G` at `-eta`.
    fn mirror(self) -> Self {
        LogParts {
            log_cdf: self.log_ccdf,
            log_ccdf: self.log_cdf,
            log_g: self.log_g,
            gprime_sign: -self.gprime_sign,
            log_abs_gprime: self.log_abs_gprime,
        }
    }
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn logit_parts(eta: f64) -> LogParts {
    let log_cdf = -softplus(-eta);
    let log_ccdf = -softplus(eta);
    let log_g = log_cdf + log_ccdf;
    // g' = g (1 - 2G) = -g tanh(eta / 2)
    LogParts {
        log_cdf,
        log_ccdf,
        log_g,
        gprime_sign: -eta.signum(),
        log_abs_gprime: log_g + (0.5 * eta).tanh().abs().ln(),
    }
}

fn probit_parts(eta: f64) -> LogParts {
    let log_g = normal::log_pdf(eta);
    LogParts {
        log_cdf: normal::log_cdf(eta),
        log_ccdf: normal::log_cdf(-eta),
        log_g,
        gprime_sign: -eta.signum(),
        log_abs_gprime: eta.abs().ln() + log_g,
    }
}

fn cloglog_parts(eta: f64) -> LogParts {
    let eta = eta.min(EXP_CAP);
    let t = eta.exp();
    // log(1 - exp(-t)) with a series for small t
    let log_cdf = if t < 1e-5 {
        eta - 0.5 * t + t * t / 24.0
    } else {
        (-(-t).exp_m1()).ln()
    };
    let log_g = eta - t;
    // g' = g (1 - e^eta)
    LogParts {
        log_cdf,
        log_ccdf: -t,
        log_g,
        gprime_sign: if eta < 0.0 {
            1.0
        } else if eta > 0.0 {
            -1.0
        } else {
            0.0
        },
        log_abs_gprime: log_g + eta.exp_m1().abs().ln(),
    }
}

/// Cauchy distribution function for `eta <= 0`, free of cancellation.
fn cauchy_lower(eta: f64) -> f64 {
    1.0_f64.atan2(-eta) / PI
}

fn cauchit_parts(eta: f64) -> LogParts {
    let log_cdf_at = |e: f64| {
        if e <= 0.0 {
            cauchy_lower(e).ln()
        } else {
            (-cauchy_lower(-e)).ln_1p()
        }
    };
    let abs = eta.abs();
    // log(1 + eta^2)
    let log_1p_sq = if abs > 1e150 {
        2.0 * abs.ln()
    } else {
        (eta * eta).ln_1p()
    };
    let log_g = -PI.ln() - log_1p_sq;
    LogParts {
        log_cdf: log_cdf_at(eta),
        log_ccdf: log_cdf_at(-eta),
        log_g,
        gprime_sign: -eta.signum(),
        log_abs_gprime: LN_2 + abs.ln() + log_g - log_1p_sq,
    }
}

fn signed(sign: f64, log_abs: f64) -> f64 {
    if sign == 0.0 {
        0.0
    } else {
        sign * log_abs.min(EXP_CAP).exp()
    }
}

/// `G`, `g`, `g'` and `omega` at `eta`.
pub fn evaluate(link: LinkFamily, eta: f64) -> LinkEval {
    let parts = link.log_parts(eta);
    let LogParts {
        log_cdf,
        log_ccdf,
        log_g,
        gprime_sign,
        log_abs_gprime,
    } = parts;

    let pi = if log_cdf < -LN_2 {
        log_cdf.exp()
    } else {
        -log_ccdf.exp_m1()
    };
    let pi = pi.clamp(PROB_EPS, 1.0 - PROB_EPS);

    let log_var = log_cdf + log_ccdf;
    let omega = (2.0 * log_g - log_var).min(EXP_CAP).exp().max(OMEGA_FLOOR);
    let omega_over_g = (log_g - log_var).min(EXP_CAP).exp();
    let gprime_over_omega = signed(gprime_sign, log_abs_gprime - 2.0 * log_g + log_var);

    LinkEval {
        pi,
        g: log_g.exp(),
        gprime: signed(gprime_sign, log_abs_gprime),
        omega,
        log_pi: log_cdf,
        log_1m_pi: log_ccdf,
        gprime_over_omega,
        omega_over_g,
        g_over_pi: (log_g - log_cdf).min(EXP_CAP).exp(),
        g_over_1m_pi: (log_g - log_ccdf).min(EXP_CAP).exp(),
    }
}

fn check_open_unit(z: f64) -> Result<()> {
    if z > 0.0 && z < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain { value: z })
    }
}

/// `G^{-1}(z)` for `z` in `(0, 1)`.
pub fn inverse(link: LinkFamily, z: f64) -> Result<f64> {
    check_open_unit(z)?;
    Ok(match link {
        LinkFamily::Logit => z.ln() - (-z).ln_1p(),
        LinkFamily::Probit => normal::quantile(z),
        LinkFamily::Cloglog => (-(-z).ln_1p()).ln(),
        LinkFamily::Loglog => -(-z.ln()).ln(),
        LinkFamily::Cauchit => {
            if z < 0.5 {
                -1.0 / (PI * z).tan()
            } else if z > 0.5 {
                1.0 / (PI * (1.0 - z)).tan()
            } else {
                0.0
            }
        }
    })
}

/// `omega_bar(z) = g(G^{-1}(z))^2 / [z (1 - z)]`.
pub fn omega_bar(link: LinkFamily, z: f64) -> Result<f64> {
    let eta = inverse(link, z)?;
    let log_g = link.log_parts(eta).log_g;
    Ok((2.0 * log_g - z.ln() - (-z).ln_1p()).exp())
}

// d/dz log omega_bar(z) = 2 g'(eta) / g(eta)^2 - (1 - 2z) / [z (1 - z)], eta = G^{-1}(z)
fn log_omega_bar_slope(link: LinkFamily, z: f64) -> f64 {
    let eta = match inverse(link, z) {
        Ok(e) => e,
        Err(_) => return f64::NAN,
    };
    let p = link.log_parts(eta);
    2.0 * signed(p.gprime_sign, p.log_abs_gprime - 2.0 * p.log_g) - (1.0 - 2.0 * z) / (z * (1.0 - z))
}

const Z0_GRID: usize = 1024;

/// Maximizer `z0` of `omega_bar` over `(0, 1)`.
///
/// A 1024-point scan brackets the global maximum, golden-section search
/// narrows the bracket, and bisection on the analytic slope of
/// `log omega_bar` pins the final digits where function values alone are
/// too flat to resolve.
pub fn find_z0(link: LinkFamily) -> f64 {
    let f = |z: f64| omega_bar(link, z).unwrap_or(f64::NEG_INFINITY);
    let node = |k: usize| (k as f64 + 0.5) / Z0_GRID as f64;

    let best = (0..Z0_GRID)
        .max_by(|&i, &j| f(node(i)).total_cmp(&f(node(j))))
        .unwrap_or(Z0_GRID / 2);
    let mut lo = if best == 0 { node(0) * 0.5 } else { node(best - 1) };
    let mut hi = if best + 1 == Z0_GRID {
        (1.0 + node(best)) * 0.5
    } else {
        node(best + 1)
    };

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > 1e-7 {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }

    // widen slightly so the slope changes sign inside the bracket
    let mut lo = (lo - 1e-7).max(f64::MIN_POSITIVE);
    let mut hi = (hi + 1e-7).min(1.0 - f64::EPSILON);
    let slope_lo = log_omega_bar_slope(link, lo);
    let slope_hi = log_omega_bar_slope(link, hi);
    if !(slope_lo > 0.0 && slope_hi < 0.0) {
        return 0.5 * (lo + hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let s = log_omega_bar_slope(link, mid);
        if s > 0.0 {
            lo = mid;
        } else if s < 0.0 {
            hi = mid;
        } else {
            return mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // Closed-form G from the textbook expressions, used as an independent check
    // of the log-scale evaluation in the central range.
    fn naive_cdf(link: LinkFamily, eta: f64) -> f64 {
        match link {
            LinkFamily::Logit => eta.exp() / (1.0 + eta.exp()),
            LinkFamily::Probit => normal::cdf(eta),
            LinkFamily::Cloglog => 1.0 - (-eta.exp()).exp(),
            LinkFamily::Loglog => (-(-eta).exp()).exp(),
            LinkFamily::Cauchit => 0.5 + eta.atan() / PI,
        }
    }

    fn naive_omega(link: LinkFamily, eta: f64) -> f64 {
        match link {
            LinkFamily::Logit => eta.exp() / (1.0 + eta.exp()).powi(2),
            LinkFamily::Probit => {
                normal::pdf(eta).powi(2) / (normal::cdf(eta) * normal::cdf(-eta))
            }
            LinkFamily::Cloglog => (2.0 * eta).exp() / (eta.exp().exp() - 1.0),
            LinkFamily::Loglog => (-2.0 * eta).exp() / ((-eta).exp().exp() - 1.0),
            LinkFamily::Cauchit => {
                1.0 / ((1.0 + eta * eta).powi(2) * (PI * PI / 4.0 - eta.atan().powi(2)))
            }
        }
    }

    fn grid() -> impl Iterator<Item = f64> {
        (-600..=600).map(|k| k as f64 * 0.05)
    }

    #[test]
    #[allow(clippy::approx_constant)] // 2/pi written out as a known value
    fn evaluate_at_zero() {
        let e = evaluate(LinkFamily::Logit, 0.0);
        assert_eq!(e.pi, 0.5);
        assert_relative_eq!(e.omega, 0.25, epsilon = 1e-15);

        let e = evaluate(LinkFamily::Probit, 0.0);
        assert_relative_eq!(e.pi, 0.5, epsilon = 1e-15);
        assert_relative_eq!(e.omega, 2.0 / PI, epsilon = 1e-14);
        assert_relative_eq!(e.omega, 0.636_619_8, epsilon = 1e-7);

        let e = evaluate(LinkFamily::Cloglog, 0.0);
        assert_relative_eq!(e.pi, 1.0 - (-1.0f64).exp(), epsilon = 1e-15);
        assert_relative_eq!(e.pi, 0.632_120_6, epsilon = 1e-7);
        assert_relative_eq!(e.omega, 1.0 / (std::f64::consts::E - 1.0), epsilon = 1e-14);
        assert_relative_eq!(e.omega, 0.581_976_7, epsilon = 1e-7);
    }

    #[test]
    fn matches_table_formulas_in_central_range() {
        for link in LinkFamily::ALL {
            for k in -120..=120 {
                let eta = k as f64 * 0.1;
                let e = evaluate(link, eta);
                assert_relative_eq!(e.pi, naive_cdf(link, eta), max_relative = 1e-12);
                let naive = naive_omega(link, eta);
                if naive > 1e-200 {
                    assert!((e.omega - naive).abs() <= 1e-10 * naive, "{link} eta={eta}");
                }
                if e.omega < 1e-190 {
                    continue;
                }
                let ratio = e.gprime / e.omega;
                assert!(
                    (ratio - e.gprime_over_omega).abs() <= 1e-10 * (1.0 + ratio.abs()),
                    "{link} eta={eta}"
                );
                assert_relative_eq!(e.omega / e.g, e.omega_over_g, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn cauchit_derivatives_closed_form() {
        for eta in [-3.0, -0.4, 0.0, 0.7, 12.0] {
            let e = evaluate(LinkFamily::Cauchit, eta);
            let g = 1.0 / (PI * (1.0 + eta * eta));
            let gp = -2.0 * eta / (PI * (1.0 + eta * eta).powi(2));
            assert_relative_eq!(e.g, g, max_relative = 1e-13);
            assert!((e.gprime - gp).abs() < 1e-14);
        }
    }

    #[test]
    fn finite_difference_derivatives() {
        let h = 1e-5;
        for link in LinkFamily::ALL {
            for eta in grid().step_by(4).filter(|e| e.abs() <= 8.0) {
                let up = link.log_parts(eta + h);
                let dn = link.log_parts(eta - h);
                let fd_g = (up.log_cdf.exp() - dn.log_cdf.exp()) / (2.0 * h);
                let e = evaluate(link, eta);
                assert!((e.g - fd_g).abs() <= 1e-6, "{link} g at {eta}");
                let fd_gp = (up.log_g.exp() - dn.log_g.exp()) / (2.0 * h);
                assert!((e.gprime - fd_gp).abs() <= 1e-6, "{link} g' at {eta}");
            }
        }
    }

    #[test]
    fn logit_q_identity() {
        for eta in grid() {
            let e = evaluate(LinkFamily::Logit, eta);
            let q = e.gprime_over_omega + e.pi;
            assert!((q - (1.0 - e.pi)).abs() < 1e-12, "eta={eta}");
        }
    }

    #[test]
    fn tails_stay_finite() {
        for link in LinkFamily::ALL {
            for eta in [-1e8, -5e3, -750.0, -40.0, 40.0, 750.0, 5e3, 1e8] {
                let e = evaluate(link, eta);
                assert!(e.pi >= PROB_EPS && e.pi <= 1.0 - PROB_EPS);
                assert!(e.omega >= OMEGA_FLOOR && e.omega.is_finite(), "{link} {eta}");
                assert!(e.gprime_over_omega.is_finite(), "{link} {eta}");
                assert!(e.omega_over_g.is_finite(), "{link} {eta}");
                assert!(e.log_pi <= 0.0 && e.log_1m_pi <= 0.0);
                assert!(!e.log_pi.is_nan() && !e.log_1m_pi.is_nan());
            }
        }
    }

    #[test]
    fn omega_vanishes_in_tails() {
        for link in LinkFamily::ALL {
            let vals: Vec<(f64, f64)> = grid().map(|eta| (eta, evaluate(link, eta).omega)).collect();
            assert!(vals.iter().all(|&(_, w)| w >= 0.0));
            let (mode_idx, _) = vals
                .iter()
                .enumerate()
                .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
                .unwrap();
            // strictly decreasing away from the mode on both sides
            for k in mode_idx..vals.len() - 1 {
                assert!(vals[k + 1].1 <= vals[k].1, "{link} right tail at {}", vals[k].0);
            }
            for k in (1..=mode_idx).rev() {
                assert!(vals[k - 1].1 <= vals[k].1, "{link} left tail at {}", vals[k].0);
            }
            assert!(vals[0].1 < 0.01 * vals[mode_idx].1);
            assert!(vals[vals.len() - 1].1 < 0.01 * vals[mode_idx].1);
        }
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(inverse(LinkFamily::Logit, 0.5).unwrap(), 0.0);
        assert_relative_eq!(inverse(LinkFamily::Logit, 0.75).unwrap(), 3f64.ln(), epsilon = 1e-15);
        assert_relative_eq!(inverse(LinkFamily::Logit, 0.75).unwrap(), 1.098_612_3, epsilon = 1e-7);
        assert_eq!(inverse(LinkFamily::Cauchit, 0.5).unwrap(), 0.0);
        for link in LinkFamily::ALL {
            assert!(matches!(inverse(link, 0.0), Err(Error::Domain { .. })));
            assert!(matches!(inverse(link, 1.0), Err(Error::Domain { .. })));
            assert!(inverse(link, -0.2).is_err());
            assert!(omega_bar(link, 1.5).is_err());
        }
    }

    #[test]
    fn inverse_round_trip() {
        for link in LinkFamily::ALL {
            for k in 1..1000 {
                let z = k as f64 / 1000.0;
                let eta = inverse(link, z).unwrap();
                let back = naive_cdf(link, eta);
                assert!(((back - z) / z).abs() < 1e-12, "{link} z={z} back={back}");
            }
        }
    }

    #[test]
    fn omega_bar_examples() {
        assert_relative_eq!(omega_bar(LinkFamily::Logit, 0.5).unwrap(), 0.25, epsilon = 1e-15);
        assert_relative_eq!(omega_bar(LinkFamily::Probit, 0.5).unwrap(), 2.0 / PI, epsilon = 1e-14);
        for k in 1..100 {
            let z = k as f64 / 100.0;
            assert_relative_eq!(
                omega_bar(LinkFamily::Logit, z).unwrap(),
                omega_bar(LinkFamily::Logit, 1.0 - z).unwrap(),
                max_relative = 1e-12
            );
            assert_relative_eq!(
                omega_bar(LinkFamily::Logit, z).unwrap(),
                z * (1.0 - z),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn omega_bar_is_omega_on_probability_scale() {
        for link in LinkFamily::ALL {
            for k in -80..=80 {
                let eta = k as f64 * 0.1;
                let e = evaluate(link, eta);
                let z = naive_cdf(link, eta);
                if z <= 0.0 || z >= 1.0 {
                    continue;
                }
                let wb = omega_bar(link, z).unwrap();
                assert!((wb - e.omega).abs() <= 1e-10, "{link} eta={eta}: {wb} vs {}", e.omega);
            }
        }
    }

    // Brute force: dense scan of omega_bar on (0, 1).
    fn scan_argmax(link: LinkFamily, points: usize) -> f64 {
        (1..points)
            .map(|k| k as f64 / points as f64)
            .max_by(|&a, &b| omega_bar(link, a).unwrap().total_cmp(&omega_bar(link, b).unwrap()))
            .unwrap()
    }

    #[test]
    fn z0_values() {
        assert!((find_z0(LinkFamily::Logit) - 0.5).abs() <= 1e-8);
        assert!((find_z0(LinkFamily::Probit) - 0.5).abs() <= 1e-8);
        assert!((find_z0(LinkFamily::Cauchit) - 0.5).abs() <= 1e-8);
        let cl = find_z0(LinkFamily::Cloglog);
        let ll = find_z0(LinkFamily::Loglog);
        assert!(cl > 0.0 && cl < 1.0);
        assert!((cl + ll - 1.0).abs() <= 1e-8, "cloglog {cl}, loglog {ll}");
        for link in LinkFamily::ALL {
            let z0 = find_z0(link);
            assert!((z0 - scan_argmax(link, 100_000)).abs() < 2e-5, "{link}");
        }
    }

    #[test]
    fn parse_names() {
        for link in LinkFamily::ALL {
            assert_eq!(link.name().parse::<LinkFamily>().unwrap(), link);
        }
        assert!("identity".parse::<LinkFamily>().is_err());
    }
}
