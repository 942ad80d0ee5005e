//! Complete enumeration of the two-observation saturated model
//! `pi_i = G(b1 + b2 x_i)`, `i = 1, 2`.
//!
//! For every response pair the table holds the maximum likelihood fitted
//! probabilities (the sample proportions) and the penalized ones, along with
//! `log |X^T Wbar(pi) X|` at both. A grid of that same surface over the unit
//! square is included for contour plots.

use crate::design::Dataset;
use crate::error::{Error, Result};
use crate::link::{find_z0, LinkFamily};
use crate::mle::FitConfig;
use crate::model::prob_scale_logdet;
use crate::mpl::fit_mpl;
use nalgebra::DMatrix;
use serde::Serialize;

pub const CONTOUR_SIZE: usize = 201;

/// Where the maximum likelihood linear predictor of one observation lies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MlLimit {
    Finite,
    /// `y = 0`: the estimate of `eta` is minus infinity.
    NegInfinity,
    /// `y = m`: the estimate of `eta` is plus infinity.
    PosInfinity,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnumerationRow {
    pub y1: u32,
    pub y2: u32,
    /// Sample proportions; exactly 0 or 1 on the boundary.
    pub pi_ml: [f64; 2],
    pub ml_limit: [MlLimit; 2],
    pub pi_mpl: [f64; 2],
    /// Minus infinity when some `pi_ml` is 0 or 1.
    pub logdet_ml: f64,
    pub logdet_mpl: f64,
}

impl EnumerationRow {
    pub fn is_interior(&self) -> bool {
        self.ml_limit.iter().all(|l| *l == MlLimit::Finite)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Contours {
    /// Probabilities `(k + 1/2) / CONTOUR_SIZE`.
    pub grid: Vec<f64>,
    /// `values[i][j]` is the log-determinant at `(grid[i], grid[j])`.
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnumerationTable {
    pub link: LinkFamily,
    pub m1: u32,
    pub m2: u32,
    pub a: f64,
    pub x1: f64,
    pub x2: f64,
    /// Maximizer of `omega_bar`; penalized fits are drawn towards `(z0, z0)`.
    pub z0: f64,
    pub rows: Vec<EnumerationRow>,
    pub contours: Contours,
}

impl EnumerationTable {
    pub fn row(&self, y1: u32, y2: u32) -> Option<&EnumerationRow> {
        self.rows.iter().find(|r| r.y1 == y1 && r.y2 == y2)
    }
}

/// Enumeration at the covariate values `x1 = -1`, `x2 = 1`.
pub fn enumerate_saturated(link: LinkFamily, m1: u32, m2: u32, a: f64) -> Result<EnumerationTable> {
    enumerate_saturated_at(link, m1, m2, a, -1.0, 1.0)
}

/// Fitted probabilities do not depend on `(x1, x2)` as long as `x1 != x2`.
pub fn enumerate_saturated_at(
    link: LinkFamily,
    m1: u32,
    m2: u32,
    a: f64,
    x1: f64,
    x2: f64,
) -> Result<EnumerationTable> {
    if m1 == 0 || m2 == 0 {
        return Err(Error::Invalid("totals must be at least 1".into()));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Invalid(format!("penalty exponent must be positive, got {a}")));
    }
    if !(x1.is_finite() && x2.is_finite()) || x1 == x2 {
        return Err(Error::Invalid("covariate values must be finite and distinct".into()));
    }
    let x = DMatrix::from_row_slice(2, 2, &[1.0, x1, 1.0, x2]);
    let m = [f64::from(m1), f64::from(m2)];
    let config = FitConfig::default();
    let names = vec!["b1".to_string(), "b2".to_string()];

    let mut rows = Vec::with_capacity(((m1 + 1) * (m2 + 1)) as usize);
    for y1 in 0..=m1 {
        for y2 in 0..=m2 {
            let y = [f64::from(y1), f64::from(y2)];
            let data = Dataset::new(y.to_vec(), m.to_vec(), x.clone(), names.clone())?;
            let fit = fit_mpl(&data, link, a, &config, None)?;
            if !fit.converged {
                return Err(Error::NotConverged {
                    iterations: fit.iterations,
                    grad_norm: fit.final_grad_norm,
                });
            }
            let pi_mpl = [0, 1].map(|i| {
                let eta = fit.beta[0] + fit.beta[1] * x[(i, 1)];
                link.evaluate(eta).pi
            });
            let pi_ml = [y[0] / m[0], y[1] / m[1]];
            let ml_limit = [0, 1].map(|i| {
                if y[i] == 0.0 {
                    MlLimit::NegInfinity
                } else if y[i] == m[i] {
                    MlLimit::PosInfinity
                } else {
                    MlLimit::Finite
                }
            });
            rows.push(EnumerationRow {
                y1,
                y2,
                pi_ml,
                ml_limit,
                pi_mpl,
                logdet_ml: prob_scale_logdet(&x, &m, &pi_ml, link),
                logdet_mpl: prob_scale_logdet(&x, &m, &pi_mpl, link),
            });
        }
    }

    Ok(EnumerationTable {
        link,
        m1,
        m2,
        a,
        x1,
        x2,
        z0: find_z0(link),
        rows,
        contours: contours(link, &x, &m),
    })
}

fn contours(link: LinkFamily, x: &DMatrix<f64>, m: &[f64; 2]) -> Contours {
    let k = CONTOUR_SIZE;
    let grid: Vec<f64> = (0..k).map(|i| (i as f64 + 0.5) / k as f64).collect();
    let values = grid
        .iter()
        .map(|&p1| {
            grid.iter()
                .map(|&p2| prob_scale_logdet(x, m, &[p1, p2], link))
                .collect()
        })
        .collect();
    Contours { grid, values }
}
