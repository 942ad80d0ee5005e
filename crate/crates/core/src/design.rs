//! Binomial datasets, CSV ingestion and Bradley-Terry designs.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use serde::Deserialize;
use std::collections::HashMap;
use std::path::Path;

/// Name given to a prepended column of ones.
pub const INTERCEPT: &str = "(Intercept)";

/// Successes `y` out of totals `m` with model matrix `x`.
///
/// Construction validates `0 <= y_i <= m_i`, `m_i > 0`, `n >= p >= 1` and
/// full column rank of `x`; there is no other way to obtain a `Dataset`.
/// Responses need not be integers.
#[derive(Debug, Clone)]
pub struct Dataset {
    y: Vec<f64>,
    m: Vec<f64>,
    /// `m - y`, kept separately so a gap far below the rounding unit of
    /// `m` survives.
    failures: Vec<f64>,
    x: DMatrix<f64>,
    labels: Option<Vec<String>>,
    coef_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        y: Vec<f64>,
        m: Vec<f64>,
        x: DMatrix<f64>,
        coef_names: Vec<String>,
    ) -> Result<Self> {
        let n = x.nrows();
        let p = x.ncols();
        if y.len() != n || m.len() != n {
            return Err(Error::Invalid(format!(
                "responses ({}), totals ({}) and design rows ({n}) differ in length",
                y.len(),
                m.len()
            )));
        }
        if coef_names.len() != p {
            return Err(Error::Invalid(format!(
                "{} coefficient names for {p} design columns",
                coef_names.len()
            )));
        }
        if p == 0 {
            return Err(Error::Invalid("design matrix has no columns".into()));
        }
        if n < p {
            return Err(Error::Invalid(format!(
                "{n} observations cannot identify {p} coefficients"
            )));
        }
        validate_responses(&y, &m)?;
        for i in 0..n {
            for j in 0..p {
                if !x[(i, j)].is_finite() {
                    return Err(Error::Validation {
                        row: i + 1,
                        message: format!("non-finite value in column `{}`", coef_names[j]),
                    });
                }
            }
        }
        if let Some(col) = first_dependent_column(&x) {
            return Err(Error::RankDeficient {
                column: coef_names[col].clone(),
            });
        }
        Ok(Dataset {
            failures: differences(&m, &y),
            y,
            m,
            x,
            labels: None,
            coef_names,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n() {
            return Err(Error::Invalid(format!(
                "{} labels for {} observations",
                labels.len(),
                self.n()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Same design with new responses and totals, e.g. adjusted pseudo-data.
    pub fn with_responses(&self, y: Vec<f64>, m: Vec<f64>) -> Result<Self> {
        if y.len() != self.n() || m.len() != self.n() {
            return Err(Error::Invalid("response length does not match design".into()));
        }
        validate_responses(&y, &m)?;
        Ok(Dataset {
            failures: differences(&m, &y),
            y,
            m,
            x: self.x.clone(),
            labels: self.labels.clone(),
            coef_names: self.coef_names.clone(),
        })
    }

    /// Same design with the given successes and failures; the totals are
    /// their sums, but the failure counts are kept as given.
    pub fn with_counts(&self, y: Vec<f64>, failures: Vec<f64>) -> Result<Self> {
        if y.len() != self.n() || failures.len() != self.n() {
            return Err(Error::Invalid("response length does not match design".into()));
        }
        for (i, &f) in failures.iter().enumerate() {
            if !(f >= 0.0 && f.is_finite()) {
                return Err(Error::Validation {
                    row: i + 1,
                    message: format!("failure count {f} must be finite and nonnegative"),
                });
            }
        }
        let m: Vec<f64> = y.iter().zip(&failures).map(|(a, b)| a + b).collect();
        validate_responses(&y, &m)?;
        Ok(Dataset {
            y,
            m,
            failures,
            x: self.x.clone(),
            labels: self.labels.clone(),
            coef_names: self.coef_names.clone(),
        })
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn m(&self) -> &[f64] {
        &self.m
    }

    /// `m - y` per observation.
    pub fn failures(&self) -> &[f64] {
        &self.failures
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn coef_names(&self) -> &[String] {
        &self.coef_names
    }

    /// True when some column of `x` is identically one.
    pub fn has_intercept(&self) -> bool {
        self.x
            .column_iter()
            .any(|col| col.iter().all(|&v| v == 1.0))
    }
}

fn differences(m: &[f64], y: &[f64]) -> Vec<f64> {
    m.iter().zip(y).map(|(a, b)| a - b).collect()
}

fn validate_responses(y: &[f64], m: &[f64]) -> Result<()> {
    for (i, (&yi, &mi)) in y.iter().zip(m).enumerate() {
        let row = i + 1;
        if !yi.is_finite() || !mi.is_finite() {
            return Err(Error::Validation {
                row,
                message: "non-finite response or total".into(),
            });
        }
        if mi <= 0.0 {
            return Err(Error::Validation {
                row,
                message: format!("binomial total {mi} must be positive"),
            });
        }
        if yi < 0.0 || yi > mi {
            return Err(Error::Validation {
                row,
                message: format!("response {yi} outside [0, {mi}]"),
            });
        }
    }
    Ok(())
}

fn rank_tolerance(x: &DMatrix<f64>, r11: f64) -> f64 {
    x.nrows().max(x.ncols()) as f64 * f64::EPSILON * r11.abs()
}

/// Numerical rank by QR with column pivoting.
pub fn rank_check(x: &DMatrix<f64>) -> usize {
    if x.nrows() == 0 || x.ncols() == 0 {
        return 0;
    }
    let r = x.clone().col_piv_qr().unpack_r();
    let r11 = r[(0, 0)];
    if r11 == 0.0 {
        return 0;
    }
    let tol = rank_tolerance(x, r11);
    (0..r.nrows().min(r.ncols()))
        .filter(|&k| r[(k, k)].abs() > tol)
        .count()
}

// Index of the first column that does not raise the rank of its prefix.
fn first_dependent_column(x: &DMatrix<f64>) -> Option<usize> {
    if rank_check(x) == x.ncols() {
        return None;
    }
    (0..x.ncols()).find(|&j| rank_check(&x.columns(0, j + 1).into_owned()) < j + 1)
}

/// Column selection for [`load_csv`].
#[derive(Debug, Clone)]
pub struct CsvColumns {
    pub response: String,
    /// Totals column; every total is one when absent.
    pub totals: Option<String>,
    pub covariates: Vec<String>,
    pub intercept: bool,
}

impl CsvColumns {
    /// `y` and `m` as response and totals, every other column a covariate.
    pub fn conventional(header: &csv::StringRecord, intercept: bool) -> Self {
        let has_m = header.iter().any(|h| h == "m");
        CsvColumns {
            response: "y".into(),
            totals: has_m.then(|| "m".into()),
            covariates: header
                .iter()
                .filter(|h| *h != "y" && *h != "m")
                .map(str::to_owned)
                .collect(),
            intercept,
        }
    }
}

/// Reads a comma-separated file with a header row.
pub fn load_csv(path: impl AsRef<Path>, columns: &CsvColumns) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path.as_ref())?;
    let header = reader.headers()?.clone();
    let index_of = |name: &str| -> Result<usize> {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Invalid(format!("column `{name}` not found in header")))
    };
    let y_col = index_of(&columns.response)?;
    let m_col = columns.totals.as_deref().map(index_of).transpose()?;
    let x_cols = columns
        .covariates
        .iter()
        .map(|c| index_of(c))
        .collect::<Result<Vec<_>>>()?;

    let mut y = Vec::new();
    let mut m = Vec::new();
    let mut rows: Vec<f64> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 1;
        let field = |col: usize| -> Result<f64> {
            let raw = record.get(col).unwrap_or("");
            raw.parse::<f64>().map_err(|_| Error::Parse {
                row,
                column: header.get(col).unwrap_or("?").to_owned(),
                message: format!("cannot parse `{raw}` as a number"),
            })
        };
        y.push(field(y_col)?);
        m.push(match m_col {
            Some(c) => field(c)?,
            None => 1.0,
        });
        if columns.intercept {
            rows.push(1.0);
        }
        for &c in &x_cols {
            rows.push(field(c)?);
        }
    }

    let mut names = Vec::new();
    if columns.intercept {
        names.push(INTERCEPT.to_owned());
    }
    names.extend(columns.covariates.iter().cloned());
    let x = DMatrix::from_row_slice(y.len(), names.len(), &rows);
    Dataset::new(y, m, x, names)
}

/// Loads a file whose response column is `y`, optional totals column is `m`,
/// and whose remaining columns are covariates.
pub fn load_csv_conventional(path: impl AsRef<Path>, intercept: bool) -> Result<Dataset> {
    let header = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path.as_ref())?
        .headers()?
        .clone();
    load_csv(path, &CsvColumns::conventional(&header, intercept))
}

/// One decided contest.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct ContestRecord {
    pub winner: String,
    pub loser: String,
}

impl ContestRecord {
    pub fn new(winner: impl Into<String>, loser: impl Into<String>) -> Self {
        ContestRecord {
            winner: winner.into(),
            loser: loser.into(),
        }
    }
}

/// Reads contests from a CSV with `winner,loser` columns.
pub fn load_contests_csv(path: impl AsRef<Path>) -> Result<Vec<ContestRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path.as_ref())?;
    reader
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

/// Teams in order of first appearance.
pub fn teams(contests: &[ContestRecord]) -> Vec<String> {
    let mut seen = HashMap::new();
    let mut order = Vec::new();
    for c in contests {
        for t in [&c.winner, &c.loser] {
            if !seen.contains_key(t) {
                seen.insert(t.clone(), order.len());
                order.push(t.clone());
            }
        }
    }
    order
}

/// Bradley-Terry model matrix: one row per contest with `+1` in the
/// winner's column and `-1` in the loser's, the reference team's column
/// dropped. Every response is a win out of one.
pub fn bt_design(contests: &[ContestRecord], reference: &str) -> Result<Dataset> {
    for (i, c) in contests.iter().enumerate() {
        if c.winner == c.loser {
            return Err(Error::Validation {
                row: i + 1,
                message: format!("team `{}` cannot play itself", c.winner),
            });
        }
    }
    let all = teams(contests);
    if all.len() < 2 {
        return Err(Error::Invalid(
            "a paired-comparison design needs at least two teams".into(),
        ));
    }
    if !all.iter().any(|t| t == reference) {
        return Err(Error::Invalid(format!(
            "reference team `{reference}` does not appear in any contest"
        )));
    }
    let names: Vec<String> = all.into_iter().filter(|t| t != reference).collect();
    let column: HashMap<&str, usize> = names
        .iter()
        .enumerate()
        .map(|(j, t)| (t.as_str(), j))
        .collect();

    let n = contests.len();
    let mut x = DMatrix::zeros(n, names.len());
    for (i, c) in contests.iter().enumerate() {
        if let Some(&j) = column.get(c.winner.as_str()) {
            x[(i, j)] = 1.0;
        }
        if let Some(&j) = column.get(c.loser.as_str()) {
            x[(i, j)] = -1.0;
        }
    }
    let labels = contests
        .iter()
        .map(|c| format!("{} beat {}", c.winner, c.loser))
        .collect();
    Dataset::new(vec![1.0; n], vec![1.0; n], x, names)?.with_labels(labels)
}
