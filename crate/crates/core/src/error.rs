use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("value {value} is outside the open unit interval")]
    Domain { value: f64 },

    #[error("row {row}, column `{column}`: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("row {row}: {message}")]
    Validation { row: usize, message: String },

    #[error("design matrix is rank deficient: column `{column}` is linearly dependent on the preceding columns")]
    RankDeficient { column: String },

    #[error("{0}")]
    Invalid(String),

    #[error("expected information matrix is singular{}", iteration_suffix(*.iteration))]
    SingularInformation { iteration: Option<usize> },

    #[error("maximum likelihood iterates diverged after {iterations} iterations; the data appear to be separated")]
    Diverged { iterations: usize },

    #[error("fit did not converge within {iterations} iterations (max |score| = {grad_norm:e})")]
    NotConverged { iterations: usize, grad_norm: f64 },

    #[error("linear program solver failed: {0}")]
    Solver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn iteration_suffix(iteration: Option<usize>) -> String {
    match iteration {
        Some(it) => format!(" at iteration {it}"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn at_iteration(self, it: usize) -> Self {
        match self {
            Error::SingularInformation { .. } => Error::SingularInformation {
                iteration: Some(it),
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
