//! Dense bounded-variable primal simplex for small problems of the form
//!
//! ```text
//! maximize c^T x   subject to   A x <= b,   0 <= x <= u,
//! ```
//!
//! with `b >= 0`, so that the all-slack basis at `x = 0` is feasible.
//! Bland's rule keeps degenerate problems (all of ours are) from cycling.

use crate::error::{Error, Result};

const TOL: f64 = 1e-9;
const TIE: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Lp {
    /// Row-major, `rows x cols`.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    /// Upper bounds; `f64::INFINITY` for none.
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

impl Lp {
    pub fn solve(&self) -> Result<Solution> {
        let m = self.a.len();
        let n = self.c.len();
        if self.b.len() != m || self.upper.len() != n || self.a.iter().any(|r| r.len() != n) {
            return Err(Error::Solver("inconsistent problem dimensions".into()));
        }
        if self.b.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::Solver("right-hand side must be nonnegative".into()));
        }
        if self.upper.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::Solver("upper bounds must be nonnegative".into()));
        }

        // Columns 0..n are structural, n..n+m are slacks.
        let total = n + m;
        let mut t: Vec<Vec<f64>> = self
            .a
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut r = row.clone();
                r.resize(total, 0.0);
                r[n + i] = 1.0;
                r
            })
            .collect();
        let mut upper = self.upper.clone();
        upper.resize(total, f64::INFINITY);
        // reduced costs for maximization: c_j - c_B^T B^{-1} a_j
        let mut d: Vec<f64> = self.c.clone();
        d.resize(total, 0.0);
        let mut basis: Vec<usize> = (n..total).collect();
        let mut xb = self.b.clone();
        let mut at_upper = vec![false; total];
        let mut is_basic = vec![false; total];
        for &j in &basis {
            is_basic[j] = true;
        }

        let max_pivots = 50 * (total + 10) * (m + 10);
        let mut pivots = 0;
        loop {
            let entering = (0..total).find(|&j| {
                !is_basic[j]
                    && ((!at_upper[j] && d[j] > TOL && upper[j] > 0.0)
                        || (at_upper[j] && d[j] < -TOL))
            });
            let Some(j) = entering else { break };
            pivots += 1;
            if pivots > max_pivots {
                return Err(Error::Solver(format!("no optimum after {max_pivots} pivots")));
            }
            let dir = if at_upper[j] { -1.0 } else { 1.0 };

            // ratio test; ties broken by smallest basic index
            let mut theta = upper[j];
            let mut leave: Option<(usize, bool)> = None;
            for i in 0..m {
                let alpha = dir * t[i][j];
                let bi = basis[i];
                let (limit, to_upper) = if alpha > TOL {
                    (xb[i].max(0.0) / alpha, false)
                } else if alpha < -TOL && upper[bi].is_finite() {
                    ((upper[bi] - xb[i]).max(0.0) / -alpha, true)
                } else {
                    continue;
                };
                let better = if limit < theta - TIE {
                    true
                } else if limit <= theta + TIE {
                    leave.is_some_and(|(r, _)| bi < basis[r])
                } else {
                    false
                };
                if better {
                    theta = limit;
                    leave = Some((i, to_upper));
                }
            }
            if !theta.is_finite() {
                return Err(Error::Solver("problem is unbounded".into()));
            }

            for i in 0..m {
                xb[i] -= dir * theta * t[i][j];
            }
            match leave {
                None => {
                    // bound flip
                    at_upper[j] = !at_upper[j];
                }
                Some((r, to_upper)) => {
                    let entering_value = if at_upper[j] { upper[j] - theta } else { theta };
                    let old = basis[r];
                    is_basic[old] = false;
                    at_upper[old] = to_upper;
                    is_basic[j] = true;
                    at_upper[j] = false;
                    basis[r] = j;
                    xb[r] = entering_value;

                    let piv = t[r][j];
                    for v in t[r].iter_mut() {
                        *v /= piv;
                    }
                    let prow = t[r].clone();
                    for (i, row) in t.iter_mut().enumerate() {
                        if i != r {
                            let f = row[j];
                            if f != 0.0 {
                                for (v, p) in row.iter_mut().zip(&prow) {
                                    *v -= f * p;
                                }
                            }
                        }
                    }
                    let f = d[j];
                    for (v, p) in d.iter_mut().zip(&prow) {
                        *v -= f * p;
                    }
                }
            }
        }

        let mut x = vec![0.0; total];
        for j in 0..total {
            if !is_basic[j] && at_upper[j] {
                x[j] = upper[j];
            }
        }
        for (i, &bj) in basis.iter().enumerate() {
            x[bj] = xb[i];
        }
        x.truncate(n);
        for (v, u) in x.iter_mut().zip(&self.upper) {
            *v = v.clamp(0.0, *u);
        }
        let objective = x.iter().zip(&self.c).map(|(a, b)| a * b).sum();
        Ok(Solution { x, objective, pivots })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn textbook_problem() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let lp = Lp {
            a: vec![vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 2.0]],
            b: vec![4.0, 12.0, 18.0],
            c: vec![3.0, 5.0],
            upper: vec![f64::INFINITY; 2],
        };
        let s = lp.solve().unwrap();
        assert_relative_eq!(s.objective, 36.0, epsilon = 1e-9);
        assert_relative_eq!(s.x[0], 2.0, epsilon = 1e-9);
        assert_relative_eq!(s.x[1], 6.0, epsilon = 1e-9);
    }

    #[test]
    fn upper_bounds_bind() {
        // max x + y, x + y <= 10, x <= 3, y <= 4
        let lp = Lp {
            a: vec![vec![1.0, 1.0]],
            b: vec![10.0],
            c: vec![1.0, 1.0],
            upper: vec![3.0, 4.0],
        };
        let s = lp.solve().unwrap();
        assert_relative_eq!(s.objective, 7.0, epsilon = 1e-12);
        assert_eq!(s.x, vec![3.0, 4.0]);
    }

    #[test]
    fn bound_flip_then_pivot() {
        // max 2x + y, x - y <= 0.5, x <= 1, y <= 1 -> x=1, y=1 (x - y = 0)
        let lp = Lp {
            a: vec![vec![1.0, -1.0], vec![1.0, 1.0]],
            b: vec![0.5, 1.5],
            c: vec![2.0, 1.0],
            upper: vec![1.0, 1.0],
        };
        let s = lp.solve().unwrap();
        assert_relative_eq!(s.objective, 2.5, epsilon = 1e-9);
        assert_relative_eq!(s.x[0], 1.0, epsilon = 1e-9);
        assert_relative_eq!(s.x[1], 0.5, epsilon = 1e-9);
    }

    #[test]
    fn degenerate_zero_rhs() {
        // max s, s - g <= 0, s + g <= 0, bounds [0, 1]: only s = 0
        let lp = Lp {
            a: vec![vec![1.0, -1.0], vec![1.0, 1.0]],
            b: vec![0.0, 0.0],
            c: vec![1.0, 0.0],
            upper: vec![1.0, 1.0],
        };
        assert_eq!(lp.solve().unwrap().objective, 0.0);
    }

    #[test]
    fn unbounded_is_an_error() {
        let lp = Lp {
            a: vec![vec![1.0, -1.0]],
            b: vec![1.0],
            c: vec![0.0, 1.0],
            upper: vec![f64::INFINITY; 2],
        };
        assert!(lp.solve().is_err());
    }

    #[test]
    fn rejects_negative_rhs() {
        let lp = Lp { a: vec![vec![1.0]], b: vec![-1.0], c: vec![1.0], upper: vec![1.0] };
        assert!(lp.solve().is_err());
    }
}
