//! Maximum likelihood by iteratively reweighted least squares.
//!
//! Each iteration takes the Fisher-scoring step `(X^T W X)^{-1} U(beta)`,
//! halving it while it lowers the log-likelihood. When successive steps
//! keep pointing the same way without shrinking, the iterate is drifting
//! along a direction of recession of the likelihood (the signature of
//! separated data); the step is then extended by doubling for as long as
//! the log-likelihood does not decrease. Separated fits therefore cross
//! `divergence_norm` in a handful of iterations instead of creeping
//! outwards one unit of `eta` at a time.

use crate::design::Dataset;
use crate::error::{Error, Result};
use crate::link::LinkFamily;
use crate::model::{self, build_state, ModelState};
use crate::mpl::PseudoData;
use crate::separation::detect_separation;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

const MAX_HALVINGS: usize = 10;
const MAX_DOUBLINGS: usize = 60;
/// Relative size of the scoring step below which a small score counts as
/// convergence.
const STEP_TOL: f64 = 1e-6;

/// How the penalized fit performs its maximum likelihood step on the
/// adjusted responses and totals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerPolicy {
    /// Iterate to convergence (max-abs score below `1e-6`).
    FullInnerMl,
    /// One (possibly halved) IRLS step.
    SingleIrlsStep,
}

#[derive(Debug, Clone)]
pub struct FitConfig {
    pub max_iter: usize,
    /// Convergence threshold on the max-abs (adjusted) score.
    pub grad_tol: f64,
    /// Convergence threshold on the max-abs step.
    pub beta_tol: f64,
    /// Euclidean norm beyond which iterates are declared divergent.
    pub divergence_norm: f64,
    pub inner: InnerPolicy,
    /// Record every iterate (and pseudo-data, for penalized fits).
    pub keep_trace: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            max_iter: 100,
            grad_tol: 1e-8,
            beta_tol: 1e-10,
            divergence_norm: 1e4,
            inner: InnerPolicy::SingleIrlsStep,
            keep_trace: false,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Invalid(format!("{name} must be positive, got {v}")))
            }
        };
        positive("grad_tol", self.grad_tol)?;
        positive("beta_tol", self.beta_tol)?;
        positive("divergence_norm", self.divergence_norm)?;
        if self.max_iter == 0 {
            return Err(Error::Invalid("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub beta: Vec<f64>,
    /// Log-likelihood, or penalized log-likelihood for penalized fits.
    pub objective: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pseudo: Option<PseudoData>,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub link: LinkFamily,
    /// Penalty exponent; zero for maximum likelihood.
    pub a: f64,
    pub coef_names: Vec<String>,
    pub beta: DVector<f64>,
    pub vcov: DMatrix<f64>,
    pub converged: bool,
    pub diverged: bool,
    pub iterations: usize,
    pub final_grad_norm: f64,
    pub loglik: f64,
    pub logdet: f64,
    pub trace: Vec<TraceRecord>,
}

impl FitResult {
    pub fn penalized_loglik(&self) -> f64 {
        self.loglik + self.a * self.logdet
    }

    pub fn std_errors(&self) -> DVector<f64> {
        self.vcov.diagonal().map(f64::sqrt)
    }

    pub(crate) fn from_state(
        data: &Dataset,
        link: LinkFamily,
        state: &ModelState,
        beta: DVector<f64>,
        grad_norm: f64,
    ) -> Self {
        FitResult {
            link,
            a: state.a,
            coef_names: data.coef_names().to_vec(),
            beta,
            vcov: state.vcov(),
            converged: false,
            diverged: false,
            iterations: 0,
            final_grad_norm: grad_norm,
            loglik: state.loglik,
            logdet: state.logdet,
            trace: Vec::new(),
        }
    }
}

/// One Fisher-scoring step `(X^T W X)^{-1} U(beta)` for the unpenalized
/// likelihood of `data` at `state`.
pub fn irls_step(state: &ModelState, data: &Dataset) -> Option<DVector<f64>> {
    state.solve_information(&state.score(data))
}

/// Zero when the design has an intercept column; otherwise weighted least
/// squares of `G^{-1}((y + 1/2) / (m + 1))` on `X`.
pub fn default_start(data: &Dataset, link: LinkFamily) -> DVector<f64> {
    let p = data.p();
    if data.has_intercept() {
        return DVector::zeros(p);
    }
    let n = data.n();
    let mut sx = data.x().clone();
    let mut sz = DVector::zeros(n);
    for i in 0..n {
        let prop = (data.y()[i] + 0.5) / (data.m()[i] + 1.0);
        let z = link.inverse(prop).unwrap_or(0.0);
        let sw = (data.m()[i] * link.evaluate(z).omega).sqrt();
        sz[i] = sw * z;
        let mut row = sx.row_mut(i);
        row *= sw;
    }
    let qr = sx.qr();
    let qtz = qr.q().tr_mul(&sz);
    qr.r()
        .solve_upper_triangular(&qtz)
        .filter(|b| b.iter().all(|v| v.is_finite()))
        .unwrap_or_else(|| DVector::zeros(p))
}

/// Maximum likelihood fit.
///
/// Converges when the max-abs score is below `config.grad_tol` and the
/// scoring step is negligible. Returns `diverged = true` with the last
/// iterate when the iterates leave the ball of radius
/// `config.divergence_norm`, or when they stop (converged or not) with
/// fitted probabilities pinned at 0 or 1 on data the separation check
/// finds separated. Either way some estimates are infinite.
pub fn fit_ml(
    data: &Dataset,
    link: LinkFamily,
    config: &FitConfig,
    start: Option<&DVector<f64>>,
) -> Result<FitResult> {
    config.validate()?;
    let mut fit = iterate(data, link, config, start, 0)?;
    if !fit.diverged && saturated(data, link, &fit.beta) && detect_separation(data)?.is_separated() {
        // stalled or crawling on the way out once the weights underflow;
        // the estimates are infinite either way
        fit.converged = false;
        fit.diverged = true;
    }
    Ok(fit)
}

/// Fitted probabilities within this of 0 or 1 count as saturated.
const SATURATION: f64 = 1e-10;

fn saturated(data: &Dataset, link: LinkFamily, beta: &DVector<f64>) -> bool {
    (data.x() * beta).iter().any(|&e| {
        !(SATURATION..=1.0 - SATURATION).contains(&link.evaluate(e).pi)
    })
}

/// Iterations of IRLS taking at least `min_steps` steps even when the start
/// already satisfies the gradient tolerance.
pub(crate) fn iterate(
    data: &Dataset,
    link: LinkFamily,
    config: &FitConfig,
    start: Option<&DVector<f64>>,
    min_steps: usize,
) -> Result<FitResult> {
    let mut beta = match start {
        Some(b) if b.len() == data.p() => b.clone(),
        Some(b) => {
            return Err(Error::Invalid(format!(
                "start has {} entries, model has {} coefficients",
                b.len(),
                data.p()
            )))
        }
        None => default_start(data, link),
    };
    let mut state = build_state(data, link, &beta, 0.0).map_err(|e| e.at_iteration(0))?;
    let mut prev_step: Option<DVector<f64>> = None;
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let mut diverged = false;
    let mut grad_norm;

    loop {
        let score = state.score(data);
        grad_norm = score.amax();
        if config.keep_trace {
            trace.push(TraceRecord {
                iteration: iterations,
                beta: beta.as_slice().to_vec(),
                objective: state.loglik,
                pseudo: None,
            });
        }
        let step = state
            .solve_information(&score)
            .ok_or(Error::SingularInformation {
                iteration: Some(iterations),
            })?;
        // Under separation the score vanishes while the step does not.
        if grad_norm < config.grad_tol
            && step.amax() < STEP_TOL * (1.0 + beta.amax())
            && iterations >= min_steps
        {
            converged = true;
            break;
        }
        if iterations >= config.max_iter {
            break;
        }
        iterations += 1;

        let (next, escaped) = line_search(data, link, config, &state, &step, prev_step.as_ref());
        prev_step = Some(&next - &beta);
        beta = next;
        if escaped || beta.norm() > config.divergence_norm {
            diverged = true;
            break;
        }
        state = build_state(data, link, &beta, 0.0).map_err(|e| e.at_iteration(iterations))?;
    }

    // the state at a divergent iterate may not be computable; keep the last good one
    if diverged {
        if let Ok(s) = build_state(data, link, &beta, 0.0) {
            grad_norm = s.score(data).amax();
            state = s;
        }
    }
    let mut fit = FitResult::from_state(data, link, &state, beta, grad_norm);
    fit.converged = converged;
    fit.diverged = diverged;
    fit.iterations = iterations;
    fit.trace = trace;
    Ok(fit)
}

/// `state.beta + t * step` with `t` halved until the log-likelihood of
/// `data` does not decrease.
pub(crate) fn halving_step(
    data: &Dataset,
    link: LinkFamily,
    state: &ModelState,
    step: &DVector<f64>,
) -> DVector<f64> {
    line_search(data, link, &FitConfig::default(), state, step, None).0
}

// Relative slack so that steps at the rounding floor are not rejected.
fn slack(ll: f64) -> f64 {
    1e-12 * (1.0 + ll.abs())
}

fn is_drifting(prev: Option<&DVector<f64>>, step: &DVector<f64>) -> bool {
    let Some(prev) = prev else { return false };
    let (np, ns) = (prev.norm(), step.norm());
    if np == 0.0 || ns == 0.0 || step.amax() < 1e-3 || ns < 0.5 * np {
        return false;
    }
    prev.dot(step) / (np * ns) > 0.99
}

/// Returns the accepted iterate and whether the search left the
/// divergence ball.
fn line_search(
    data: &Dataset,
    link: LinkFamily,
    config: &FitConfig,
    state: &ModelState,
    step: &DVector<f64>,
    prev_step: Option<&DVector<f64>>,
) -> (DVector<f64>, bool) {
    let beta = &state.beta;
    let current = state.loglik;
    let mut t = 1.0;
    let mut cand = beta + step;
    let mut cand_ll = model::loglik(data, link, &cand);
    let mut halvings = 0;
    while !(cand_ll >= current - slack(current)) && halvings < MAX_HALVINGS {
        t *= 0.5;
        cand = beta + step * t;
        cand_ll = model::loglik(data, link, &cand);
        halvings += 1;
    }

    if halvings == 0 && is_drifting(prev_step, step) {
        for _ in 0..MAX_DOUBLINGS {
            let trial = beta + step * (2.0 * t);
            if trial.norm() > config.divergence_norm {
                return (trial, true);
            }
            let ll = model::loglik(data, link, &trial);
            if ll >= cand_ll {
                t *= 2.0;
                cand = trial;
                cand_ll = ll;
            } else {
                break;
            }
        }
    }
    (cand, false)
}
