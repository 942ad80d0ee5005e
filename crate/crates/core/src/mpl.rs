//! Maximum penalized likelihood as repeated maximum likelihood.
//!
//! The penalized log-likelihood `l(beta) + a log |X^T W(beta) X|` has the
//! same derivatives as the ordinary binomial log-likelihood once the
//! responses and totals are replaced by
//!
//! ```text
//! y~ = y + 2 a h (q - 1/2 + pi c),    m~ = m + 2 a h c,
//! c  = 1 + (q - 1/2) {pi - I(q <= 1/2)} / {pi (1 - pi)},
//! ```
//!
//! with this choice of `c` guaranteeing `0 <= y~ <= m~`. The basic map
//! recomputes the pseudo-data at the current estimate and then takes a
//! maximum likelihood step (or a full fit) on them. Its fixed point is the
//! penalized estimate; each iteration of [`fit_mpl`] applies it twice and
//! extrapolates (SQUAREM), since the map alone can converge very slowly.

use crate::design::Dataset;
use crate::error::{Error, Result};
use crate::link::LinkFamily;
use crate::mle::{self, FitConfig, FitResult, InnerPolicy, TraceRecord};
use crate::model::{build_state, ModelState};
use nalgebra::DVector;
use serde::Serialize;
use std::sync::atomic::{AtomicUsize, Ordering};

/// Constant added to the responses (and twice to the totals) for the
/// starting maximum likelihood fit.
pub const START_OFFSET: f64 = 0.01;

const INNER_GRAD_TOL: f64 = 1e-6;
const MAX_HALVINGS: usize = 50;

/// Adjusted responses and totals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PseudoData {
    pub ytilde: Vec<f64>,
    pub mtilde: Vec<f64>,
    /// `m~ - y~`, accumulated directly rather than subtracted. It can sit
    /// far below the rounding unit of `m~`.
    pub failures: Vec<f64>,
    pub c: Vec<f64>,
}

impl PseudoData {
    /// `0 <= y~_i <= m~_i` for every observation.
    pub fn within_bounds(&self) -> bool {
        (0..self.ytilde.len()).all(|i| {
            let (y, m, f) = (self.ytilde[i], self.mtilde[i], self.failures[i]);
            0.0 <= y && y <= m && f >= 0.0
        })
    }

    /// `0 < y~_i < m~_i` for every observation, the upper gap judged on
    /// `failures`.
    pub fn strictly_within(&self) -> bool {
        self.ytilde
            .iter()
            .zip(&self.failures)
            .all(|(&y, &f)| 0.0 < y && 0.0 < f)
    }
}

/// Pseudo-data at `state` (penalty exponent `state.a`).
///
/// The indicator branch of `c` is resolved algebraically so that the
/// adjustment to `y` and the gap `m~ - y~` are both sums of nonnegative
/// terms; the bounds then survive floating point exactly.
pub fn pseudo_data(state: &ModelState, data: &Dataset) -> PseudoData {
    let n = state.n();
    let mut ytilde = Vec::with_capacity(n);
    let mut mtilde = Vec::with_capacity(n);
    let mut failures = Vec::with_capacity(n);
    let mut c = Vec::with_capacity(n);
    for i in 0..n {
        let (y, f) = (data.y()[i], data.failures()[i]);
        let (pi, q) = (state.pi[i], state.q[i]);
        let scale = 2.0 * state.a * state.h[i];
        // r = q - 1/2 + pi c, s = c - r
        let (ci, r, s) = if q <= 0.5 {
            let excess = (0.5 - q) / pi;
            (1.0 + excess, pi, (1.0 - pi) + excess)
        } else {
            let excess = (q - 0.5) / (1.0 - pi);
            (1.0 + excess, pi + excess, 1.0 - pi)
        };
        let yt = y + scale * r;
        let ft = f + scale * s;
        ytilde.push(yt);
        mtilde.push(yt + ft);
        failures.push(ft);
        c.push(ci);
    }
    PseudoData {
        ytilde,
        mtilde,
        failures,
        c,
    }
}

static BOUND_CHECKS: AtomicUsize = AtomicUsize::new(0);
static BOUND_VIOLATIONS: AtomicUsize = AtomicUsize::new(0);
static STRICT_VIOLATIONS: AtomicUsize = AtomicUsize::new(0);

/// Process-wide tally of pseudo-data bound checks made inside [`fit_mpl`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundAudit {
    /// Iterations checked.
    pub checks: usize,
    /// Iterations with some `y~ < 0` or `y~ > m~`.
    pub violations: usize,
    /// Iterations of fits with an intercept column where some
    /// `y~ <= 0` or `m~ - y~ <= 0`.
    pub strict_violations: usize,
}

pub fn bound_audit() -> BoundAudit {
    BoundAudit {
        checks: BOUND_CHECKS.load(Ordering::Relaxed),
        violations: BOUND_VIOLATIONS.load(Ordering::Relaxed),
        strict_violations: STRICT_VIOLATIONS.load(Ordering::Relaxed),
    }
}

fn audit(pd: &PseudoData, has_intercept: bool) {
    BOUND_CHECKS.fetch_add(1, Ordering::Relaxed);
    if !pd.within_bounds() {
        BOUND_VIOLATIONS.fetch_add(1, Ordering::Relaxed);
    }
    if has_intercept && !pd.strictly_within() {
        STRICT_VIOLATIONS.fetch_add(1, Ordering::Relaxed);
    }
    debug_assert!(pd.within_bounds(), "pseudo-data outside [0, m~]");
}

/// Maximum likelihood estimates after adding `START_OFFSET` to each
/// response and twice that to each total.
pub fn default_start(data: &Dataset, link: LinkFamily) -> DVector<f64> {
    let y = data.y().iter().map(|v| v + START_OFFSET).collect();
    let m = data.m().iter().map(|v| v + 2.0 * START_OFFSET).collect();
    let shifted = match data.with_responses(y, m) {
        Ok(d) => d,
        Err(_) => return DVector::zeros(data.p()),
    };
    match mle::fit_ml(&shifted, link, &FitConfig::default(), None) {
        Ok(fit) if !fit.diverged && fit.beta.iter().all(|b| b.is_finite()) => fit.beta,
        _ => DVector::zeros(data.p()),
    }
}

/// Maximizes `l(beta) + a log |X^T W X|` for `a > 0`.
///
/// Converges when the max-abs adjusted score is below `config.grad_tol`
/// and the last step is below `config.beta_tol`. Exhausting
/// `config.max_iter` yields `converged = false` with the last iterate.
pub fn fit_mpl(
    data: &Dataset,
    link: LinkFamily,
    a: f64,
    config: &FitConfig,
    start: Option<&DVector<f64>>,
) -> Result<FitResult> {
    config.validate()?;
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Invalid(format!(
            "penalty exponent must be positive, got {a}"
        )));
    }
    let mut beta = match start {
        Some(b) if b.len() == data.p() && b.iter().all(|v| v.is_finite()) => b.clone(),
        Some(_) => {
            return Err(Error::Invalid(format!(
                "start must hold {} finite values",
                data.p()
            )))
        }
        None => default_start(data, link),
    };
    let inner_config = FitConfig {
        grad_tol: INNER_GRAD_TOL,
        keep_trace: false,
        ..config.clone()
    };
    let step = Step {
        data,
        link,
        inner: &inner_config,
        has_intercept: data.has_intercept(),
        keep_trace: config.keep_trace,
    };

    let mut state = build_state(data, link, &beta, a).map_err(|e| e.at_iteration(0))?;
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut last_step = f64::INFINITY;
    let mut decreases = 0;
    let mut converged = false;
    let mut diverged = false;
    let mut grad_norm;

    loop {
        grad_norm = state.adjusted_score(data).amax();
        if grad_norm < config.grad_tol && last_step < config.beta_tol {
            converged = true;
            if config.keep_trace {
                trace.push(TraceRecord {
                    iteration: iterations,
                    beta: beta.as_slice().to_vec(),
                    objective: state.penalized_loglik(),
                    pseudo: None,
                });
            }
            break;
        }
        if iterations >= config.max_iter {
            break;
        }
        iterations += 1;
        let at = |e: Error| e.at_iteration(iterations);

        // Two plain steps, then a squared extrapolation along them. The
        // pseudo-data map alone converges linearly, sometimes very slowly,
        // and can settle into a two-cycle; the extrapolation stretches the
        // first case and lands on the midpoint in the second.
        let b1 = step.apply(&state, Some((iterations - 1, &mut trace))).map_err(at)?;
        let s1 = build_state(data, link, &b1, a).map_err(at)?;
        let b2 = step.apply(&s1, None).map_err(at)?;
        let mut next_state = build_state(data, link, &b2, a).map_err(at)?;
        let r = &b1 - &beta;
        let v = &b2 - &b1 - &r;
        let ratio = r.norm() / v.norm();
        if ratio.is_finite() && ratio != 1.0 {
            let cand = &beta + &r * (2.0 * ratio) + &v * (ratio * ratio);
            let stabilized = build_state(data, link, &cand, a)
                .and_then(|sc| step.apply(&sc, None))
                .and_then(|b3| build_state(data, link, &b3, a));
            if let Ok(s3) = stabilized {
                let floor = next_state.penalized_loglik() - slack(next_state.penalized_loglik());
                if s3.penalized_loglik() >= floor {
                    next_state = s3;
                }
            }
        }

        // Never lose ground, and when the plain step overshoots compare
        // with that step halved until the objective does not drop; it
        // points uphill, so this always succeeds away from the maximum.
        let floor = state.penalized_loglik() - slack(state.penalized_loglik());
        if s1.penalized_loglik() < floor {
            let dir = &b1 - &beta;
            let mut fallback = s1;
            let mut t = 1.0;
            for _ in 0..MAX_HALVINGS {
                if fallback.penalized_loglik() >= floor {
                    break;
                }
                t *= 0.5;
                fallback = build_state(data, link, &(&beta + &dir * t), a).map_err(at)?;
            }
            if !(next_state.penalized_loglik() >= fallback.penalized_loglik()) {
                next_state = fallback;
            }
        } else if !(next_state.penalized_loglik() >= floor) {
            next_state = s1;
        }

        // two successive decreases of the objective: average with the previous iterate
        if next_state.penalized_loglik() < state.penalized_loglik() {
            decreases += 1;
        } else {
            decreases = 0;
        }
        if decreases >= 2 {
            let mid = (&next_state.beta + &beta) * 0.5;
            next_state = build_state(data, link, &mid, a).map_err(at)?;
            decreases = 0;
        }

        last_step = (&next_state.beta - &beta).amax();
        beta = next_state.beta.clone();
        state = next_state;
        if beta.norm() > config.divergence_norm {
            diverged = true;
            grad_norm = state.adjusted_score(data).amax();
            break;
        }
    }

    let mut fit = FitResult::from_state(data, link, &state, beta, grad_norm);
    fit.converged = converged;
    fit.diverged = diverged;
    fit.iterations = iterations;
    fit.trace = trace;
    Ok(fit)
}

// Objective changes this small are rounding.
fn slack(v: f64) -> f64 {
    1e-12 * (1.0 + v.abs())
}

/// One pass of the pseudo-data map: pseudo-data at a state, then the inner
/// maximum likelihood update on them.
struct Step<'a> {
    data: &'a Dataset,
    link: LinkFamily,
    inner: &'a FitConfig,
    has_intercept: bool,
    keep_trace: bool,
}

impl Step<'_> {
    fn apply(
        &self,
        state: &ModelState,
        trace: Option<(usize, &mut Vec<TraceRecord>)>,
    ) -> Result<DVector<f64>> {
        let (data, link) = (self.data, self.link);
        let pd = pseudo_data(state, data);
        audit(&pd, self.has_intercept);
        let pseudo = data.with_counts(pd.ytilde.clone(), pd.failures.clone())?;
        if let (true, Some((iteration, trace))) = (self.keep_trace, trace) {
            trace.push(TraceRecord {
                iteration,
                beta: state.beta.as_slice().to_vec(),
                objective: state.penalized_loglik(),
                pseudo: Some(pd),
            });
        }
        Ok(match self.inner.inner {
            InnerPolicy::SingleIrlsStep => {
                let pstate = build_state(&pseudo, link, &state.beta, 0.0)?;
                let step = mle::irls_step(&pstate, &pseudo)
                    .ok_or(Error::SingularInformation { iteration: None })?;
                mle::halving_step(&pseudo, link, &pstate, &step)
            }
            InnerPolicy::FullInnerMl => {
                mle::iterate(&pseudo, link, self.inner, Some(&state.beta), 1)?.beta
            }
        })
    }
}
