//! Coefficient paths over a grid of penalty exponents.
//!
//! The first grid point is fitted from the default start; every later point
//! starts at the estimate of the previous one.

use crate::design::Dataset;
use crate::error::{Error, Result};
use crate::link::LinkFamily;
use crate::mle::FitConfig;
use crate::mpl::fit_mpl;
use nalgebra::DVector;
use serde::Serialize;

pub const DEFAULT_GRID_LO: f64 = 0.01;
pub const DEFAULT_GRID_HI: f64 = 5.0;
pub const DEFAULT_GRID_LEN: usize = 50;

#[derive(Debug, Clone, Serialize)]
pub struct PathPoint {
    pub a: f64,
    pub beta: Vec<f64>,
    pub logdet: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Why the fit at this point failed outright, if it did.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PathResult {
    pub link: LinkFamily,
    pub coef_names: Vec<String>,
    pub points: Vec<PathPoint>,
}

impl PathResult {
    pub fn grid(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.a).collect()
    }

    pub fn logdets(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.logdet).collect()
    }

    pub fn all_converged(&self) -> bool {
        self.points.iter().all(|p| p.converged)
    }

    /// Coefficient `j` along the grid.
    pub fn coefficient(&self, j: usize) -> Vec<f64> {
        self.points.iter().map(|p| p.beta[j]).collect()
    }
}

/// `k` points spaced evenly on the log scale from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, k: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || k == 0 {
        return Err(Error::Invalid(format!(
            "log grid needs 0 < lo < hi and k >= 1, got {lo}:{hi}:{k}"
        )));
    }
    if k == 1 {
        return Ok(vec![lo]);
    }
    let (l0, l1) = (lo.ln(), hi.ln());
    let step = (l1 - l0) / (k - 1) as f64;
    let mut grid: Vec<f64> = (0..k).map(|j| (l0 + step * j as f64).exp()).collect();
    grid[0] = lo;
    grid[k - 1] = hi;
    Ok(grid)
}

pub fn default_grid() -> Vec<f64> {
    log_grid(DEFAULT_GRID_LO, DEFAULT_GRID_HI, DEFAULT_GRID_LEN).expect("valid default grid")
}

pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Invalid("grid is empty".into()));
    }
    if let Some(a) = grid.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
        return Err(Error::Invalid(format!("grid values must be positive, got {a}")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid("grid must be strictly ascending".into()));
    }
    Ok(())
}

/// Penalized fits at every grid value, warm-started.
///
/// Failures at individual points are recorded in the point and never stop
/// the path; the next point then starts from the last successful estimate.
pub fn fit_path(
    data: &Dataset,
    link: LinkFamily,
    grid: &[f64],
    config: &FitConfig,
) -> Result<PathResult> {
    fit_path_from(data, link, grid, config, None)
}

/// [`fit_path`] with the first point started at `start` instead of the
/// default start.
pub fn fit_path_from(
    data: &Dataset,
    link: LinkFamily,
    grid: &[f64],
    config: &FitConfig,
    start: Option<&DVector<f64>>,
) -> Result<PathResult> {
    validate_grid(grid)?;
    config.validate()?;
    if let Some(b) = start {
        if b.len() != data.p() {
            return Err(Error::Invalid(format!(
                "start has {} entries, model has {} coefficients",
                b.len(),
                data.p()
            )));
        }
    }
    let mut points = Vec::with_capacity(grid.len());
    let mut warm: Option<DVector<f64>> = start.cloned();
    for &a in grid {
        match fit_mpl(data, link, a, config, warm.as_ref()) {
            Ok(fit) => {
                if fit.converged {
                    warm = Some(fit.beta.clone());
                }
                points.push(PathPoint {
                    a,
                    beta: fit.beta.as_slice().to_vec(),
                    logdet: fit.logdet,
                    converged: fit.converged,
                    iterations: fit.iterations,
                    error: None,
                });
            }
            Err(e) => points.push(PathPoint {
                a,
                beta: vec![f64::NAN; data.p()],
                logdet: f64::NAN,
                converged: false,
                iterations: 0,
                error: Some(e.to_string()),
            }),
        }
    }
    Ok(PathResult {
        link,
        coef_names: data.coef_names().to_vec(),
        points,
    })
}
