//! Per-observation model quantities, likelihood, Jeffreys-type penalty and
//! adjusted scores at a given coefficient vector.

use crate::design::Dataset;
use crate::error::{Error, Result};
use crate::link::{self, LinkFamily};
use nalgebra::{DMatrix, DVector};

/// Everything the fitting algorithms need at one `beta`.
///
/// `h` and `logdet` come from a single thin QR decomposition of
/// `W^{1/2} X`; `r` is its triangular factor.
#[derive(Debug, Clone)]
pub struct ModelState {
    pub beta: DVector<f64>,
    pub eta: DVector<f64>,
    pub pi: DVector<f64>,
    /// Working weights `m_i omega(eta_i)`.
    pub w: DVector<f64>,
    /// `m_i g(eta_i)`.
    pub d: DVector<f64>,
    /// `m_i g'(eta_i)`.
    pub dprime: DVector<f64>,
    /// `d'_i / w_i + pi_i`.
    pub q: DVector<f64>,
    /// Diagonal of `X (X^T W X)^{-1} X^T W`.
    pub h: DVector<f64>,
    /// `w_i / d_i`, evaluated without forming the ratio of tiny numbers.
    pub w_over_d: DVector<f64>,
    /// `y_i g_i / pi_i - (m_i - y_i) g_i / (1 - pi_i)`, the score contribution
    /// per unit of `x_i`. Written this way because `y_i - m_i pi_i` loses
    /// everything once `pi_i` is clamped.
    pub resid: DVector<f64>,
    pub loglik: f64,
    /// `log |X^T W X|`.
    pub logdet: f64,
    /// Penalty exponent.
    pub a: f64,
    pub r: DMatrix<f64>,
}

/// Binomial log-likelihood without the binomial coefficients.
pub fn loglik(data: &Dataset, link: LinkFamily, beta: &DVector<f64>) -> f64 {
    let eta = data.x() * beta;
    loglik_at_eta(data, link, &eta)
}

fn loglik_at_eta(data: &Dataset, link: LinkFamily, eta: &DVector<f64>) -> f64 {
    data.y()
        .iter()
        .zip(data.failures())
        .zip(eta.iter())
        .map(|((&y, &f), &e)| {
            let ev = link.evaluate(e);
            xlogy(y, ev.log_pi) + xlogy(f, ev.log_1m_pi)
        })
        .sum()
}

/// `x * v`, zero when `x` is zero whatever `v` is.
fn xlogy_free(x: f64, v: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * v
    }
}

fn xlogy(x: f64, log_y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * log_y
    }
}

/// Builds the state at `beta` for penalty exponent `a`.
pub fn build_state(
    data: &Dataset,
    link: LinkFamily,
    beta: &DVector<f64>,
    a: f64,
) -> Result<ModelState> {
    if !(a >= 0.0 && a.is_finite()) {
        return Err(Error::Invalid(format!("penalty exponent {a} must be >= 0")));
    }
    if beta.len() != data.p() || beta.iter().any(|b| !b.is_finite()) {
        return Err(Error::Invalid(
            "coefficient vector must be finite with one entry per column".into(),
        ));
    }
    let n = data.n();
    let eta = data.x() * beta;

    let mut pi = DVector::zeros(n);
    let mut w = DVector::zeros(n);
    let mut d = DVector::zeros(n);
    let mut dprime = DVector::zeros(n);
    let mut q = DVector::zeros(n);
    let mut w_over_d = DVector::zeros(n);
    let mut resid = DVector::zeros(n);
    let mut loglik = 0.0;
    for i in 0..n {
        let ev = link.evaluate(eta[i]);
        let (y, m, f) = (data.y()[i], data.m()[i], data.failures()[i]);
        pi[i] = ev.pi;
        w[i] = m * ev.omega;
        d[i] = m * ev.g;
        dprime[i] = m * ev.gprime;
        q[i] = ev.gprime_over_omega + ev.pi;
        w_over_d[i] = ev.omega_over_g;
        resid[i] = xlogy_free(y, ev.g_over_pi) - xlogy_free(f, ev.g_over_1m_pi);
        loglik += xlogy(y, ev.log_pi) + xlogy(f, ev.log_1m_pi);
    }

    let (h, logdet, r) = weighted_qr(data.x(), &w)?;
    Ok(ModelState {
        beta: beta.clone(),
        eta,
        pi,
        w,
        d,
        dprime,
        q,
        h,
        w_over_d,
        resid,
        loglik,
        logdet,
        a,
        r,
    })
}

/// Hat diagonals, `log |X^T W X|` and the triangular factor of `W^{1/2} X`.
pub(crate) fn weighted_qr(
    x: &DMatrix<f64>,
    w: &DVector<f64>,
) -> Result<(DVector<f64>, f64, DMatrix<f64>)> {
    let mut sx = x.clone();
    for (i, mut row) in sx.row_iter_mut().enumerate() {
        row *= w[i].sqrt();
    }
    let qr = sx.qr();
    let q = qr.q();
    let r = qr.unpack_r();
    let mut logdet = 0.0;
    for k in 0..r.ncols() {
        let rkk = r[(k, k)].abs();
        if rkk == 0.0 || !rkk.is_finite() {
            return Err(Error::SingularInformation { iteration: None });
        }
        logdet += 2.0 * rkk.ln();
    }
    if !logdet.is_finite() {
        return Err(Error::SingularInformation { iteration: None });
    }
    let h = DVector::from_iterator(q.nrows(), q.row_iter().map(|row| row.norm_squared()));
    Ok((h, logdet, r))
}

impl ModelState {
    pub fn n(&self) -> usize {
        self.eta.len()
    }

    pub fn p(&self) -> usize {
        self.beta.len()
    }

    /// `l(beta) + a log |X^T W X|`.
    pub fn penalized_loglik(&self) -> f64 {
        self.loglik + self.a * self.logdet
    }

    /// Gradient of the penalized log-likelihood:
    /// `sum_i (w_i/d_i) [y_i + 2 a h_i (q_i - 1/2) - m_i pi_i] x_i`.
    pub fn adjusted_score(&self, data: &Dataset) -> DVector<f64> {
        let u = DVector::from_iterator(
            self.n(),
            (0..self.n()).map(|i| {
                let adj = 2.0 * self.a * self.h[i] * (self.q[i] - 0.5);
                self.resid[i] + self.w_over_d[i] * adj
            }),
        );
        data.x().tr_mul(&u)
    }

    /// Ordinary score, ignoring the penalty.
    pub fn score(&self, data: &Dataset) -> DVector<f64> {
        let u = DVector::from_iterator(
            self.n(),
            (0..self.n()).map(|i| self.resid[i]),
        );
        data.x().tr_mul(&u)
    }

    /// Solves `(X^T W X) s = v` through the stored triangular factor.
    pub fn solve_information(&self, v: &DVector<f64>) -> Option<DVector<f64>> {
        let z = self.r.tr_solve_upper_triangular(v)?;
        let s = self.r.solve_upper_triangular(&z)?;
        s.iter().all(|x| x.is_finite()).then_some(s)
    }

    /// `(R^T R)^{-1} = (X^T W X)^{-1}`.
    pub fn vcov(&self) -> DMatrix<f64> {
        let p = self.p();
        let rinv = self
            .r
            .solve_upper_triangular(&DMatrix::identity(p, p))
            .unwrap_or_else(|| DMatrix::from_element(p, p, f64::NAN));
        let v = &rinv * rinv.transpose();
        // exact symmetry
        (&v + v.transpose()) * 0.5
    }
}

/// `l(beta) + a log |X^T W X|` for a built state.
pub fn penalized_loglik(state: &ModelState) -> f64 {
    state.penalized_loglik()
}

/// Gradient of the penalized log-likelihood.
pub fn adjusted_score(state: &ModelState, data: &Dataset) -> DVector<f64> {
    state.adjusted_score(data)
}

/// `log |X^T Wbar(pi) X|` with probability-scale weights
/// `m_i omega_bar(pi_i)`; for the logit link these are `m_i pi_i (1 - pi_i)`.
///
/// Returns negative infinity when some `pi_i` sits on the boundary of
/// `[0, 1]` or the matrix is singular.
pub fn prob_scale_logdet(x: &DMatrix<f64>, m: &[f64], pi: &[f64], link: LinkFamily) -> f64 {
    let mut w = DVector::zeros(pi.len());
    for i in 0..pi.len() {
        match link::omega_bar(link, pi[i]) {
            Ok(v) if v > 0.0 => w[i] = m[i] * v,
            _ => return f64::NEG_INFINITY,
        }
    }
    match weighted_qr(x, &w) {
        Ok((_, logdet, _)) => logdet,
        Err(_) => f64::NEG_INFINITY,
    }
}
