//! Complete separation, quasi-complete separation and overlap.
//!
//! Every observation with `y > 0` is a success point and every one with
//! `y < m` a failure point, so a row with `0 < y < m` counts as both. With
//! `sigma = +1` for successes and `-1` for failures, the data are
//!
//! * completely separated if some `gamma` has `sigma gamma^T x > 0` on every point,
//! * quasi-completely separated if some `gamma` has `sigma gamma^T x >= 0`
//!   everywhere with strict inequality somewhere,
//! * overlapping otherwise, in which case maximum likelihood estimates are finite.
//!
//! Detection solves a short sequence of linear programs. Each round
//! maximizes `sum s_i` over points not yet known to be separable, subject to
//! `s_i <= sigma_i gamma^T x_i`, `0 <= s_i <= 1`, `|gamma_t| <= 1`, and keeps the
//! weak inequality on the points already found. Points with `s_i > 0` join
//! the separable set; the rounds stop when the objective is zero. The sum of
//! the round directions is the certificate.

pub mod simplex;

use crate::design::Dataset;
use crate::error::{Error, Result};
use serde::Serialize;
use simplex::Lp;

/// Relative threshold for `sigma gamma^T x > 0`.
pub const STRICT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeparationStatus {
    Complete,
    QuasiComplete,
    Overlap,
}

impl std::fmt::Display for SeparationStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SeparationStatus::Complete => "complete",
            SeparationStatus::QuasiComplete => "quasi_complete",
            SeparationStatus::Overlap => "overlap",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SeparationReport {
    pub status: SeparationStatus,
    /// Direction satisfying the sign conditions; absent under overlap.
    pub gamma: Option<Vec<f64>>,
    /// Observations (0-based) strictly on the correct side of `gamma`.
    pub separated_observations: Vec<usize>,
}

impl SeparationReport {
    pub fn is_separated(&self) -> bool {
        self.status != SeparationStatus::Overlap
    }
}

struct Point {
    obs: usize,
    /// `sigma_i x_i / |x_i|`; zero rows stay zero.
    z: Vec<f64>,
    norm: f64,
}

fn points(data: &Dataset) -> Vec<Point> {
    let x = data.x();
    let mut out = Vec::new();
    for i in 0..data.n() {
        let row: Vec<f64> = x.row(i).iter().copied().collect();
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        let unit: Vec<f64> = if norm > 0.0 {
            row.iter().map(|v| v / norm).collect()
        } else {
            row.clone()
        };
        if data.y()[i] > 0.0 {
            out.push(Point { obs: i, z: unit.clone(), norm });
        }
        if data.failures()[i] > 0.0 {
            out.push(Point { obs: i, z: unit.iter().map(|v| -v).collect(), norm });
        }
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn strictly_positive(gamma: &[f64], pt: &Point) -> bool {
    let g = dot(gamma, gamma).sqrt();
    dot(gamma, &pt.z) * pt.norm > STRICT_TOL * g * pt.norm
}

/// One round: the direction maximizing the number of newly strict points.
fn round(pts: &[Point], found: &[bool], p: usize) -> Result<(Vec<f64>, f64)> {
    let k = pts.len();
    // columns: gamma+ (p), gamma- (p), s (k)
    let cols = 2 * p + k;
    let mut a = Vec::with_capacity(k);
    for (i, pt) in pts.iter().enumerate() {
        let mut row = vec![0.0; cols];
        for t in 0..p {
            row[t] = -pt.z[t];
            row[p + t] = pt.z[t];
        }
        row[2 * p + i] = 1.0;
        a.push(row);
    }
    let mut c = vec![0.0; cols];
    let mut upper = vec![1.0; cols];
    for i in 0..k {
        if found[i] {
            upper[2 * p + i] = 0.0;
        } else {
            c[2 * p + i] = 1.0;
        }
    }
    let sol = Lp { a, b: vec![0.0; k], c, upper }.solve()?;
    let gamma = (0..p).map(|t| sol.x[t] - sol.x[p + t]).collect();
    Ok((gamma, sol.objective))
}

/// Classifies `data` and returns a verified certificate direction.
pub fn detect_separation(data: &Dataset) -> Result<SeparationReport> {
    let p = data.p();
    let pts = points(data);
    let mut found = vec![false; pts.len()];
    let mut certificate = vec![0.0; p];

    for _ in 0..=pts.len() {
        let (gamma, objective) = round(&pts, &found, p)?;
        if objective <= STRICT_TOL {
            break;
        }
        let mut added = false;
        for (i, pt) in pts.iter().enumerate() {
            if !found[i] && strictly_positive(&gamma, pt) {
                found[i] = true;
                added = true;
            }
        }
        if !added {
            return Err(Error::Solver(format!(
                "separation round with objective {objective} found no strictly separated point"
            )));
        }
        for (c, g) in certificate.iter_mut().zip(&gamma) {
            *c += g;
        }
    }

    let n_found = found.iter().filter(|f| **f).count();
    if n_found == 0 {
        return Ok(SeparationReport {
            status: SeparationStatus::Overlap,
            gamma: None,
            separated_observations: Vec::new(),
        });
    }
    let status = if n_found == pts.len() {
        SeparationStatus::Complete
    } else {
        SeparationStatus::QuasiComplete
    };

    // post hoc verification of the sign conditions
    let gnorm = dot(&certificate, &certificate).sqrt();
    for (i, pt) in pts.iter().enumerate() {
        let v = dot(&certificate, &pt.z) * pt.norm;
        let scale = STRICT_TOL * gnorm * pt.norm;
        let ok = if found[i] { v > scale } else { v >= -scale };
        if !ok {
            return Err(Error::Solver(format!(
                "certificate fails the sign condition on observation {}",
                pt.obs + 1
            )));
        }
    }

    // an observation is separated when all of its points are
    let mut separated_observations = Vec::new();
    for obs in 0..data.n() {
        let mut mine = pts.iter().zip(&found).filter(|(pt, _)| pt.obs == obs).peekable();
        if mine.peek().is_some() && mine.all(|(_, f)| *f) {
            separated_observations.push(obs);
        }
    }
    Ok(SeparationReport {
        status,
        gamma: Some(certificate),
        separated_observations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn dataset(x: &[f64], p: usize, y: &[f64], m: &[f64]) -> Dataset {
        let n = y.len();
        let names = (0..p).map(|j| format!("x{j}")).collect();
        Dataset::new(y.to_vec(), m.to_vec(), DMatrix::from_row_slice(n, p, x), names).unwrap()
    }

    #[test]
    fn complete_two_points() {
        let r = detect_separation(&dataset(&[-1.0, 1.0], 1, &[0.0, 1.0], &[1.0, 1.0])).unwrap();
        assert_eq!(r.status, SeparationStatus::Complete);
        assert!(r.gamma.unwrap()[0] > 0.0);
        assert_eq!(r.separated_observations, vec![0, 1]);
    }

    #[test]
    fn quasi_complete_pooled_boundary() {
        // intercept + slope; x = -1, 0, 0, 1 with both outcomes at x = 0
        let x = [1.0, -1.0, 1.0, 0.0, 1.0, 0.0, 1.0, 1.0];
        let r = detect_separation(&dataset(&x, 2, &[0.0, 0.0, 1.0, 1.0], &[1.0; 4])).unwrap();
        assert_eq!(r.status, SeparationStatus::QuasiComplete);
        let g = r.gamma.unwrap();
        assert!(g[0].abs() < 1e-12 && g[1] > 0.0);
        assert_eq!(r.separated_observations, vec![0, 3]);

        // the same data as binomial counts
        let x = [1.0, -1.0, 1.0, 0.0, 1.0, 1.0];
        let r = detect_separation(&dataset(&x, 2, &[0.0, 1.0, 1.0], &[1.0, 2.0, 1.0])).unwrap();
        assert_eq!(r.status, SeparationStatus::QuasiComplete);
    }

    #[test]
    fn overlap() {
        let x = [-1.0, -1.0, 1.0, 1.0];
        let r = detect_separation(&dataset(&x, 1, &[0.0, 1.0, 0.0, 1.0], &[1.0; 4])).unwrap();
        assert_eq!(r.status, SeparationStatus::Overlap);
        assert!(r.gamma.is_none());
    }

    #[test]
    fn interior_counts_never_separate_completely() {
        let x = [1.0, -2.0, 1.0, 3.0];
        let r = detect_separation(&dataset(&x, 2, &[1.0, 5.0], &[4.0, 5.0])).unwrap();
        assert_ne!(r.status, SeparationStatus::Complete);
    }

    #[test]
    fn complete_with_tiny_scale_covariates() {
        // the box |gamma| <= 1 must not hide separation at small scales
        let x = [1.0, -1e-6, 1.0, -2e-6, 1.0, 1e-6, 1.0, 3e-6];
        let r = detect_separation(&dataset(&x, 2, &[0.0, 0.0, 1.0, 1.0], &[1.0; 4])).unwrap();
        assert_eq!(r.status, SeparationStatus::Complete);
    }

    #[test]
    fn all_successes_are_complete_with_intercept() {
        let x = [1.0, 0.3, 1.0, -0.2, 1.0, 1.1];
        let r = detect_separation(&dataset(&x, 2, &[2.0, 3.0, 1.0], &[2.0, 3.0, 1.0])).unwrap();
        assert_eq!(r.status, SeparationStatus::Complete);
    }
}
