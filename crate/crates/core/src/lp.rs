//! Dense bounded-variable primal simplex for small linear programs.
//!
//! Every row `a_i^T x  (<=, =, >=)  b_i` is turned into a bounded row
//! variable `s_i = a_i^T x`, so the working system is `A x - s = 0` with
//! bounds on both `x` and `s`. Phase one drives artificial variables to
//! zero; phase two optimizes the real objective with the artificials fixed
//! at zero. Dantzig pricing, falling back to Bland's rule while the solver
//! is stalling on degenerate pivots.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-10;
const FEAS_TOL: f64 = 1e-9;
const DEGENERATE_STEPS_BEFORE_BLAND: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `minimize c^T x` subject to linear rows and box bounds (infinite bounds
/// allowed).
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    pub fn new(n_vars: usize) -> Self {
        Self {
            objective: vec![0.0; n_vars],
            constraints: Vec::new(),
            lower: vec![0.0; n_vars],
            upper: vec![f64::INFINITY; n_vars],
        }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        assert_eq!(coeffs.len(), self.n_vars(), "constraint width");
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(self) -> Option<LpSolution> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

struct Tableau {
    rows: usize,
    cols: usize,
    t: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    basis: Vec<usize>,
    basic_row: Vec<Option<usize>>,
}

enum Step {
    Optimal,
    Unbounded,
    Moved,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * self.cols + c]
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for r in 0..self.rows {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                let row = &self.t[r * self.cols..(r + 1) * self.cols];
                for (dj, &a) in d.iter_mut().zip(row) {
                    *dj -= cb * a;
                }
            }
        }
        for &b in &self.basis {
            d[b] = 0.0;
        }
        d
    }

    /// Direction (+1 increase, -1 decrease) in which moving `j` improves the
    /// objective, if any.
    fn improving_direction(&self, j: usize, dj: f64) -> Option<f64> {
        if self.basic_row[j].is_some() || self.lower[j] == self.upper[j] {
            return None;
        }
        let at_lower = self.x[j] <= self.lower[j];
        let at_upper = self.x[j] >= self.upper[j];
        if dj < -COST_TOL && !at_upper {
            Some(1.0)
        } else if dj > COST_TOL && !at_lower {
            Some(-1.0)
        } else {
            None
        }
    }

    fn step(&mut self, cost: &[f64], bland: bool) -> (Step, f64) {
        let d = self.reduced_costs(cost);
        let mut entering: Option<(usize, f64)> = None;
        let mut best = 0.0;
        for (j, &dj) in d.iter().enumerate() {
            if let Some(dir) = self.improving_direction(j, dj) {
                if bland {
                    entering = Some((j, dir));
                    break;
                }
                if dj.abs() > best {
                    best = dj.abs();
                    entering = Some((j, dir));
                }
            }
        }
        let Some((q, dir)) = entering else {
            return (Step::Optimal, 0.0);
        };

        // Ratio test. Row variables can start nonbasic strictly inside
        // their bounds, so the entering limit is measured from x, not from
        // the opposite bound.
        let mut theta = if dir > 0.0 {
            self.upper[q] - self.x[q]
        } else {
            self.x[q] - self.lower[q]
        };
        let mut leaving: Option<(usize, f64)> = None;
        for r in 0..self.rows {
            let alpha = dir * self.at(r, q);
            let b = self.basis[r];
            let limit = if alpha > PIVOT_TOL && self.lower[b].is_finite() {
                (self.x[b] - self.lower[b]) / alpha
            } else if alpha < -PIVOT_TOL && self.upper[b].is_finite() {
                (self.upper[b] - self.x[b]) / -alpha
            } else {
                continue;
            };
            let limit = limit.max(0.0);
            let better = match leaving {
                None => limit < theta,
                Some((lr, _)) => {
                    limit < theta - 1e-12
                        || (limit <= theta + 1e-12
                            && if bland {
                                b < self.basis[lr]
                            } else {
                                alpha.abs() > (dir * self.at(lr, q)).abs()
                            })
                }
            };
            if better {
                theta = limit.min(theta);
                leaving = Some((
                    r,
                    if alpha > 0.0 {
                        self.lower[b]
                    } else {
                        self.upper[b]
                    },
                ));
            }
        }
        if theta.is_infinite() {
            return (Step::Unbounded, 0.0);
        }

        for r in 0..self.rows {
            let b = self.basis[r];
            self.x[b] -= dir * theta * self.at(r, q);
        }
        self.x[q] += dir * theta;

        match leaving {
            None => {
                // Bound flip.
                self.x[q] = if dir > 0.0 {
                    self.upper[q]
                } else {
                    self.lower[q]
                };
            }
            Some((r, bound)) => {
                let old = self.basis[r];
                self.x[old] = bound;
                self.pivot(r, q);
            }
        }
        (Step::Moved, theta)
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let cols = self.cols;
        let p = self.at(r, q);
        for c in 0..cols {
            self.t[r * cols + c] /= p;
        }
        let pivot_row: Vec<f64> = self.t[r * cols..(r + 1) * cols].to_vec();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.at(i, q);
            if f != 0.0 {
                let row = &mut self.t[i * cols..(i + 1) * cols];
                for (a, &pr) in row.iter_mut().zip(&pivot_row) {
                    *a -= f * pr;
                }
            }
        }
        let old = self.basis[r];
        self.basic_row[old] = None;
        self.basic_row[q] = Some(r);
        self.basis[r] = q;
    }

    fn optimize(&mut self, cost: &[f64]) -> Result<bool> {
        let max_iter = 100 * (self.rows + self.cols) + 1000;
        let mut degenerate = 0usize;
        for _ in 0..max_iter {
            let bland = degenerate >= DEGENERATE_STEPS_BEFORE_BLAND;
            match self.step(cost, bland) {
                (Step::Optimal, _) => return Ok(true),
                (Step::Unbounded, _) => return Ok(false),
                (Step::Moved, theta) => {
                    if theta <= 1e-12 {
                        degenerate += 1;
                    } else {
                        degenerate = 0;
                    }
                }
            }
        }
        Err(Error::Numeric("simplex iteration limit reached".into()))
    }
}

pub fn solve(lp: &LinearProgram) -> Result<LpOutcome> {
    let n = lp.n_vars();
    let m = lp.constraints.len();
    let cols = n + 2 * m;
    for j in 0..n {
        if lp.lower[j] > lp.upper[j] || lp.lower[j].is_nan() || lp.upper[j].is_nan() {
            return Ok(LpOutcome::Infeasible);
        }
    }

    let mut lower = Vec::with_capacity(cols);
    let mut upper = Vec::with_capacity(cols);
    let mut x = Vec::with_capacity(cols);
    lower.extend_from_slice(&lp.lower);
    upper.extend_from_slice(&lp.upper);
    for j in 0..n {
        x.push(if lp.lower[j].is_finite() {
            lp.lower[j]
        } else if lp.upper[j].is_finite() {
            lp.upper[j]
        } else {
            0.0
        });
    }

    let mut residual_sign = Vec::with_capacity(m);
    let mut residual = Vec::with_capacity(m);
    for c in &lp.constraints {
        let (lo, hi) = match c.relation {
            Relation::Le => (f64::NEG_INFINITY, c.rhs),
            Relation::Ge => (c.rhs, f64::INFINITY),
            Relation::Eq => (c.rhs, c.rhs),
        };
        let activity: f64 = c.coeffs.iter().zip(&x).map(|(a, v)| a * v).sum();
        let s = activity.clamp(lo, hi);
        lower.push(lo);
        upper.push(hi);
        x.push(s);
        let r = activity - s;
        residual_sign.push(if r >= 0.0 { 1.0 } else { -1.0 });
        residual.push(r.abs());
    }
    for r in residual {
        lower.push(0.0);
        upper.push(f64::INFINITY);
        x.push(r);
    }

    // Row i: a_i x - s_i - sign_i * art_i = 0, scaled by -sign_i so the
    // artificial column is the identity.
    let mut t = vec![0.0; m * cols];
    for (i, c) in lp.constraints.iter().enumerate() {
        let f = -residual_sign[i];
        let row = &mut t[i * cols..(i + 1) * cols];
        for (dst, &a) in row.iter_mut().zip(&c.coeffs) {
            *dst = f * a;
        }
        row[n + i] = -f;
        row[n + m + i] = 1.0;
    }
    let basis: Vec<usize> = (0..m).map(|i| n + m + i).collect();
    let mut basic_row = vec![None; cols];
    for (r, &b) in basis.iter().enumerate() {
        basic_row[b] = Some(r);
    }
    let mut tab = Tableau {
        rows: m,
        cols,
        t,
        lower,
        upper,
        x,
        basis,
        basic_row,
    };

    let mut phase_one = vec![0.0; cols];
    phase_one[n + m..].iter_mut().for_each(|c| *c = 1.0);
    tab.optimize(&phase_one)?;
    let infeasibility: f64 = tab.x[n + m..].iter().sum();
    let scale = 1.0
        + lp.constraints
            .iter()
            .map(|c| c.rhs.abs())
            .fold(0.0, f64::max);
    if infeasibility > FEAS_TOL * scale {
        return Ok(LpOutcome::Infeasible);
    }
    for a in n + m..cols {
        tab.upper[a] = 0.0;
        if tab.basic_row[a].is_none() {
            tab.x[a] = 0.0;
        }
    }

    let mut phase_two = vec![0.0; cols];
    phase_two[..n].copy_from_slice(&lp.objective);
    if !tab.optimize(&phase_two)? {
        return Ok(LpOutcome::Unbounded);
    }
    let x: Vec<f64> = tab.x[..n].to_vec();
    let objective = x.iter().zip(&lp.objective).map(|(a, b)| a * b).sum();
    Ok(LpOutcome::Optimal(LpSolution { x, objective }))
}
