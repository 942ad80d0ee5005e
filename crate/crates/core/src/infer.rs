//! Wald intervals and the generalized variance.

use crate::error::{Error, Result};
use crate::mle::FitResult;
use crate::normal;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct WaldSummary {
    pub coef_names: Vec<String>,
    pub estimates: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub level: f64,
    /// `det vcov`.
    pub gen_variance: f64,
}

/// `z_{1 - (1 - level)/2}`.
pub fn critical_value(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Invalid(format!("level must lie in (0, 1), got {level}")));
    }
    Ok(normal::quantile(1.0 - (1.0 - level) / 2.0))
}

fn usable(fit: &FitResult) -> Result<()> {
    if fit.diverged {
        return Err(Error::Invalid(
            "estimates diverged (the data may be separated); Wald intervals would be meaningless"
                .into(),
        ));
    }
    if !fit.converged {
        return Err(Error::Invalid(format!(
            "fit did not converge in {} iterations",
            fit.iterations
        )));
    }
    Ok(())
}

/// `beta_t -/+ z s_t` with `s_t` the square roots of the diagonal of `vcov`.
pub fn wald(fit: &FitResult, level: f64) -> Result<WaldSummary> {
    usable(fit)?;
    let z = critical_value(level)?;
    let se = fit.std_errors();
    let estimates = fit.beta.as_slice().to_vec();
    Ok(WaldSummary {
        coef_names: fit.coef_names.clone(),
        lower: estimates.iter().zip(se.iter()).map(|(b, s)| b - z * s).collect(),
        upper: estimates.iter().zip(se.iter()).map(|(b, s)| b + z * s).collect(),
        estimates,
        std_errors: se.as_slice().to_vec(),
        level,
        gen_variance: gen_variance_of(fit),
    })
}

/// `det vcov = exp(-log |X^T W X|)`.
pub fn generalized_variance(fit: &FitResult) -> Result<f64> {
    usable(fit)?;
    Ok(gen_variance_of(fit))
}

fn gen_variance_of(fit: &FitResult) -> f64 {
    (-fit.logdet).exp()
}
