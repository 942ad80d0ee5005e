#![allow(dead_code, clippy::neg_cmp_op_on_partial_ord)]

use jeffreys_glm::design::{self, Dataset, INTERCEPT};
use jeffreys_glm::link::LinkFamily;
use jeffreys_glm::separation::{detect_separation, SeparationStatus};
use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use std::path::PathBuf;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn normal(rng: &mut StdRng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data")
}

fn names(p: usize) -> Vec<String> {
    std::iter::once(INTERCEPT.to_string())
        .chain((1..p).map(|j| format!("x{j}")))
        .collect()
}

/// Intercept plus `p - 1` standard normal covariates.
pub fn design(rng: &mut StdRng, n: usize, p: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, p, |_, j| if j == 0 { 1.0 } else { normal(rng) })
}

pub fn binomial(rng: &mut StdRng, m: u32, pi: f64) -> f64 {
    (0..m).filter(|_| rng.random::<f64>() < pi).count() as f64
}

/// Responses drawn from the model with coefficients `N(0, scale^2)`.
pub fn random_dataset(rng: &mut StdRng, n: usize, p: usize, m_max: u32, scale: f64, link: LinkFamily) -> Dataset {
    loop {
        let x = design(rng, n, p);
        let beta = DVector::from_fn(p, |_, _| scale * normal(rng));
        let eta = &x * &beta;
        let m: Vec<f64> = (0..n).map(|_| rng.random_range(1..=m_max) as f64).collect();
        let y = (0..n)
            .map(|i| binomial(rng, m[i] as u32, link.evaluate(eta[i]).pi))
            .collect();
        if let Ok(d) = Dataset::new(y, m, x, names(p)) {
            return d;
        }
    }
}

/// Like [`random_dataset`], retried until the data overlap.
pub fn random_overlap(rng: &mut StdRng, n: usize, p: usize, m_max: u32, scale: f64, link: LinkFamily) -> Dataset {
    loop {
        let d = random_dataset(rng, n, p, m_max, scale, link);
        if detect_separation(&d).unwrap().status == SeparationStatus::Overlap {
            return d;
        }
    }
}

/// Binary responses on small integer covariates; many of these separate.
pub fn random_small_binary(rng: &mut StdRng) -> Dataset {
    loop {
        let n = rng.random_range(3..=10);
        let p = rng.random_range(1..=3usize).min(n);
        let integer = rng.random_bool(0.5);
        let x = DMatrix::from_fn(n, p, |_, j| {
            if j == 0 {
                1.0
            } else if integer {
                rng.random_range(-2..=2) as f64
            } else {
                normal(rng)
            }
        });
        let y = (0..n).map(|_| f64::from(rng.random_bool(0.5) as u8)).collect();
        if let Ok(d) = Dataset::new(y, vec![1.0; n], x, names(p)) {
            return d;
        }
    }
}

/// Completely separated: successes exactly where `gamma^T x > 0`.
pub fn random_complete(rng: &mut StdRng, n: usize, p: usize, m_max: u32) -> Dataset {
    assert!(p >= 2, "an intercept alone cannot separate");
    loop {
        let x = design(rng, n, p);
        let gamma = DVector::from_fn(p, |_, _| normal(rng));
        let eta = &x * &gamma;
        let m: Vec<f64> = (0..n).map(|_| rng.random_range(1..=m_max) as f64).collect();
        let y: Vec<f64> = (0..n).map(|i| if eta[i] > 0.0 { m[i] } else { 0.0 }).collect();
        let mixed = y.iter().any(|v| *v > 0.0) && y.contains(&0.0);
        if !mixed {
            continue;
        }
        if let Ok(d) = Dataset::new(y, m, x, names(p)) {
            return d;
        }
    }
}

/// Quasi-completely separated: integer covariates, outcome decided by the
/// sign of their sum, both outcomes where the sum is zero.
pub fn random_quasi(rng: &mut StdRng, n: usize, p: usize) -> Dataset {
    assert!(p >= 2);
    loop {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        let mut m = Vec::new();
        for i in 0..n {
            let mut row = vec![1.0];
            row.extend((1..p).map(|_| rng.random_range(-3..=3) as f64));
            let s: f64 = row[1..].iter().sum();
            let mi = rng.random_range(1..=3) as f64;
            let yi = if i < 2 {
                // force a tied observation with both outcomes
                row[1..].iter_mut().for_each(|v| *v = 0.0);
                if p > 2 {
                    row[1] = 1.0;
                    row[2] = -1.0;
                }
                if i == 0 { 0.0 } else { mi }
            } else if s > 0.0 {
                mi
            } else if s < 0.0 {
                0.0
            } else {
                (rng.random_range(0..=mi as u32)) as f64
            };
            rows.extend(row);
            y.push(yi);
            m.push(mi);
        }
        let x = DMatrix::from_row_slice(n, p, &rows);
        if let Ok(d) = Dataset::new(y, m, x, names(p)) {
            if detect_separation(&d).unwrap().status == SeparationStatus::QuasiComplete {
                return d;
            }
        }
    }
}

/// Every shipped data file as a dataset.
pub fn fixtures() -> Vec<(String, Dataset)> {
    let dir = data_dir();
    let mut out = Vec::new();
    for f in ["toy.csv", "separated.csv", "quasi.csv", "overlap.csv"] {
        out.push((f.to_string(), design::load_csv_conventional(dir.join(f), true).unwrap()));
    }
    for (f, reference) in [("tournament8.csv", "Team A"), ("league30.csv", "San Antonio Club")] {
        let contests = design::load_contests_csv(dir.join(f)).unwrap();
        out.push((f.to_string(), design::bt_design(&contests, reference).unwrap()));
    }
    out
}

/// Nelder-Mead maximization of `f` from `start`, restarted until a restart
/// no longer improves the value.
pub fn nelder_mead_max(f: &dyn Fn(&[f64]) -> f64, start: &[f64], step: f64) -> (Vec<f64>, f64) {
    let mut best = start.to_vec();
    let mut best_val = f(&best);
    let mut step = step;
    for _ in 0..50 {
        let (x, v) = nm_once(f, &best, step);
        let improved = v > best_val + 1e-15 * (1.0 + best_val.abs());
        let moved = x.iter().zip(&best).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if v >= best_val {
            best = x;
            best_val = v;
        }
        if !improved && moved < 1e-9 {
            break;
        }
        step = (moved * 2.0).clamp(1e-4, 0.5);
    }
    (best, best_val)
}

fn nm_once(f: &dyn Fn(&[f64]) -> f64, start: &[f64], step: f64) -> (Vec<f64>, f64) {
    let d = start.len();
    let neg = |x: &[f64]| -f(x);
    let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
    for j in 0..d {
        let mut v = start.to_vec();
        v[j] += step;
        simplex.push(v);
    }
    let mut vals: Vec<f64> = simplex.iter().map(|v| neg(v)).collect();
    for _ in 0..20_000 {
        let mut idx: Vec<usize> = (0..=d).collect();
        idx.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap_or(std::cmp::Ordering::Equal));
        simplex = idx.iter().map(|&i| simplex[i].clone()).collect();
        vals = idx.iter().map(|&i| vals[i]).collect();
        let size = simplex[1..]
            .iter()
            .map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if size < 1e-11 {
            break;
        }
        let centroid: Vec<f64> = (0..d)
            .map(|j| simplex[..d].iter().map(|v| v[j]).sum::<f64>() / d as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&simplex[d]).map(|(c, w)| c + t * (w - c)).collect()
        };
        let xr = along(-1.0);
        let fr = neg(&xr);
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = neg(&xe);
            if fe < fr {
                simplex[d] = xe;
                vals[d] = fe;
            } else {
                simplex[d] = xr;
                vals[d] = fr;
            }
        } else if fr < vals[d - 1] {
            simplex[d] = xr;
            vals[d] = fr;
        } else {
            let (xc, fc) = if fr < vals[d] {
                let xc = along(-0.5);
                let fc = neg(&xc);
                (xc, fc)
            } else {
                let xc = along(0.5);
                let fc = neg(&xc);
                (xc, fc)
            };
            if fc < vals[d].min(fr) {
                simplex[d] = xc;
                vals[d] = fc;
            } else {
                for i in 1..=d {
                    simplex[i] = simplex[i]
                        .iter()
                        .zip(&simplex[0])
                        .map(|(v, b)| b + 0.5 * (v - b))
                        .collect();
                    vals[i] = neg(&simplex[i]);
                }
            }
        }
    }
    let i = (0..=d)
        .min_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap_or(std::cmp::Ordering::Equal))
        .unwrap();
    (simplex[i].clone(), -vals[i])
}

/// `l(beta) + a log det(X^T W X)` computed from scratch with a dense
/// determinant; shares nothing with the fitting code beyond the link.
pub fn penalized_objective(data: &Dataset, link: LinkFamily, a: f64, beta: &[f64]) -> f64 {
    let x = data.x();
    let b = DVector::from_row_slice(beta);
    let eta = x * &b;
    let mut ll = 0.0;
    let mut info = DMatrix::<f64>::zeros(data.p(), data.p());
    for i in 0..data.n() {
        let e = link.evaluate(eta[i]);
        let (y, m) = (data.y()[i], data.m()[i]);
        if y > 0.0 {
            ll += y * e.log_pi;
        }
        if m - y > 0.0 {
            ll += (m - y) * e.log_1m_pi;
        }
        let xi = x.row(i).transpose();
        info += (m * e.omega) * &xi * xi.transpose();
    }
    let det = info.determinant();
    if !(det > 0.0) {
        return f64::NEG_INFINITY;
    }
    ll + a * det.ln()
}
