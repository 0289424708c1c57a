//! Exact max-min illumination solver.
//!
//! Two stages:
//!
//! 1. Find the optimal objective `t*`. Upper bounds come from the LP
//!    relaxation (continuous `psi`, free `t`) and, for rows whose supplies
//!    are integer multiples of a common quantum, from a counting bound on
//!    how many quanta the window can deliver. If a lexicographic dive at
//!    the root bound succeeds, the bound is attained and we are done;
//!    otherwise depth-first branch-and-bound on the most fractional count
//!    closes the gap.
//! 2. Among all count vectors attaining `t*`, return the lexicographically
//!    smallest, fixing `psi_0, psi_1, ...` in turn to the smallest value
//!    that keeps the LP (and counting bound) feasible, backtracking when an
//!    integer completion does not exist.

use log::{debug, warn};

use super::{
    ensure_snapshots, strictly_better, uniform_counts, HoppingPlan, IlpInstance, SolverStatus,
};
use crate::error::Result;
use crate::lp::{self, LinearProgram, LpOutcome, Relation};

const INTEGRALITY_TOL: f64 = 1e-7;
const PRUNE_REL_TOL: f64 = 1e-9;
const TARGET_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy)]
pub struct IlpOptions {
    /// Branch-and-bound nodes before giving up on proving optimality.
    pub node_limit: usize,
    /// LP solves allowed for the lexicographic dive at a known optimum.
    pub dive_limit: usize,
    /// LP solves allowed for the speculative dive at the root bound.
    pub speculative_dive_limit: usize,
    /// Search objective levels directly when every row is quantized.
    pub level_search: bool,
}

impl Default for IlpOptions {
    fn default() -> Self {
        Self {
            node_limit: 2_000_000,
            dive_limit: 200_000,
            speculative_dive_limit: 20_000,
            level_search: true,
        }
    }
}

pub fn solve_illumination(instance: &IlpInstance) -> Result<HoppingPlan> {
    solve_illumination_with(instance, IlpOptions::default())
}

pub fn solve_illumination_with(instance: &IlpInstance, options: IlpOptions) -> Result<HoppingPlan> {
    ensure_snapshots(instance)?;
    if instance.demanded().next().is_none() {
        let psi = uniform_counts(instance.n_snapshots(), instance.n_slot());
        return Ok(HoppingPlan::from_counts(
            instance,
            psi,
            SolverStatus::Heuristic,
        ));
    }
    let model = Model::new(instance);
    let full = Bounds::root(model.n, instance.n_slot());

    let Some(root) = model.relaxation(&full)? else {
        unreachable!("relaxation with sum(psi) = N_slot and t >= 0 is always feasible");
    };
    let root_bound = root.t.min(model.cover_bound(&full));
    debug!(
        "root LP bound {:.6e}, counting bound {:.6e}",
        root.t * model.scale,
        model.cover_bound(&full) * model.scale
    );

    if let Some(levels) = model.levels(root_bound).filter(|_| options.level_search) {
        match model.descend_levels(&levels, options.dive_limit)? {
            Some(psi) => {
                return Ok(HoppingPlan::from_counts(
                    instance,
                    psi,
                    SolverStatus::Optimal,
                ))
            }
            None => debug!("level search hit its limit, branching"),
        }
    } else {
        let mut budget = options.speculative_dive_limit;
        match model.lex_min(root_bound, &mut budget)? {
            Dive::Found(psi) => {
                return Ok(HoppingPlan::from_counts(
                    instance,
                    psi,
                    SolverStatus::Optimal,
                ))
            }
            Dive::Exhausted => debug!("root bound not attainable, branching"),
            Dive::LimitHit => debug!("speculative dive hit its limit, branching"),
        }
    }

    let (incumbent, proven) = model.branch_and_bound(instance, options.node_limit)?;
    let t_star = instance.objective_of(&incumbent);
    if !proven {
        warn!("branch-and-bound node limit reached; plan may be sub-optimal");
        return Ok(HoppingPlan::from_counts(
            instance,
            incumbent,
            SolverStatus::Heuristic,
        ));
    }
    let mut budget = options.dive_limit;
    let psi = match model.lex_min(t_star / model.scale, &mut budget)? {
        Dive::Found(psi)
            if !strictly_better(t_star, instance.objective_of(&psi) * (1.0 + 1e-9)) =>
        {
            psi
        }
        _ => {
            warn!("lexicographic tie-break did not complete; returning the first optimum found");
            incumbent
        }
    };
    Ok(HoppingPlan::from_counts(
        instance,
        psi,
        SolverStatus::Optimal,
    ))
}

/// Optimal objective of the LP relaxation (continuous counts).
pub fn lp_relaxation_bound(instance: &IlpInstance) -> Result<f64> {
    ensure_snapshots(instance)?;
    if instance.demanded().next().is_none() {
        return Ok(f64::INFINITY);
    }
    let model = Model::new(instance);
    let root = model
        .relaxation(&Bounds::root(model.n, instance.n_slot()))?
        .expect("root relaxation is feasible");
    Ok(root.t * model.scale)
}

#[derive(Debug, Clone)]
struct Bounds {
    lo: Vec<usize>,
    hi: Vec<usize>,
}

impl Bounds {
    fn root(n: usize, n_slot: usize) -> Self {
        Self {
            lo: vec![0; n],
            hi: vec![n_slot; n],
        }
    }
}

struct Relaxation {
    psi: Vec<f64>,
    t: f64,
}

/// A demanded row whose supplies are integer multiples of a quantum.
struct QuantizedRow {
    /// Supplies in quanta.
    quanta: Vec<f64>,
    /// Quanta needed per unit of normalized objective.
    per_unit: f64,
}

impl QuantizedRow {
    /// Whole quanta needed to reach `target`.
    fn need(&self, target: f64) -> f64 {
        let x = target * self.per_unit;
        (x - 1e-9 * x.max(1.0)).ceil().max(0.0)
    }
}

/// Counting bound data over the quantized rows.
struct Cover {
    per_unit: Vec<f64>,
    /// Quanta delivered per slot of each snapshot, summed over those rows.
    column_quanta: Vec<f64>,
}

/// Most objective levels the level search will enumerate.
const MAX_LEVELS: usize = 200_000;

enum Dive {
    Found(Vec<usize>),
    Exhausted,
    LimitHit,
}

struct Model {
    n: usize,
    n_slot: usize,
    /// Demanded rows `L_j / (m_j * scale)`.
    rows: Vec<Vec<f64>>,
    /// Quantized form of each row, when it has one.
    quantized: Vec<Option<QuantizedRow>>,
    /// Objective units: real ratio = normalized ratio * scale.
    scale: f64,
    cover: Option<Cover>,
}

impl Model {
    fn new(instance: &IlpInstance) -> Self {
        let n = instance.n_snapshots();
        let n_slot = instance.n_slot();
        let l = instance.supply();
        let m = instance.demand();
        let demanded: Vec<usize> = instance.demanded().collect();

        // Upper bound on t from the best single snapshot per row. Rows no
        // snapshot serves pin t at 0 whatever the scale, so they are left
        // out; otherwise the other rows would go unnormalized.
        let reach = demanded
            .iter()
            .map(|&j| n_slot as f64 * (0..n).map(|i| l[(j, i)]).fold(0.0, f64::max) / m[j])
            .filter(|&r| r > 0.0)
            .fold(f64::INFINITY, f64::min);
        let scale = if reach.is_finite() && reach > 0.0 {
            reach
        } else {
            1.0
        };

        let rows = demanded
            .iter()
            .map(|&j| (0..n).map(|i| l[(j, i)] / (m[j] * scale)).collect())
            .collect();

        let quantized: Vec<Option<QuantizedRow>> = demanded
            .iter()
            .map(|&j| {
                let entries: Vec<f64> = (0..n).map(|i| l[(j, i)]).collect();
                row_quantum(&entries).map(|q| QuantizedRow {
                    quanta: entries.iter().map(|e| (e / q).round()).collect(),
                    per_unit: scale * m[j] / q,
                })
            })
            .collect();
        let mut per_unit = Vec::new();
        let mut column_quanta = vec![0.0; n];
        for row in quantized.iter().flatten() {
            per_unit.push(row.per_unit);
            for (c, k) in column_quanta.iter_mut().zip(&row.quanta) {
                *c += k;
            }
        }
        let cover = (!per_unit.is_empty()).then_some(Cover {
            per_unit,
            column_quanta,
        });
        Self {
            n,
            n_slot,
            rows,
            quantized,
            scale,
            cover,
        }
    }

    fn relaxation(&self, b: &Bounds) -> Result<Option<Relaxation>> {
        let n = self.n;
        let mut lp = LinearProgram::new(n + 1);
        lp.objective[n] = -1.0;
        for i in 0..n {
            lp.lower[i] = b.lo[i] as f64;
            lp.upper[i] = b.hi[i] as f64;
        }
        for row in &self.rows {
            let mut coeffs = row.clone();
            coeffs.push(-1.0);
            lp.add(coeffs, Relation::Ge, 0.0);
        }
        let mut sum = vec![1.0; n];
        sum.push(0.0);
        lp.add(sum, Relation::Eq, self.n_slot as f64);
        Ok(match lp::solve(&lp)? {
            LpOutcome::Optimal(s) => Some(Relaxation {
                t: s.x[n],
                psi: s.x[..n].to_vec(),
            }),
            LpOutcome::Infeasible => None,
            LpOutcome::Unbounded => unreachable!("t is bounded by the demanded rows"),
        })
    }

    /// Minimizes (`sign = 1`) or maximizes (`sign = -1`) `psi_k` subject to
    /// every demanded row reaching `target`.
    fn extreme_count(&self, b: &Bounds, target: f64, k: usize, sign: f64) -> Result<Option<f64>> {
        let n = self.n;
        let mut lp = LinearProgram::new(n);
        lp.objective[k] = sign;
        for i in 0..n {
            lp.lower[i] = b.lo[i] as f64;
            lp.upper[i] = b.hi[i] as f64;
        }
        for (coeffs, rhs) in self.target_rows(target) {
            lp.add(coeffs, Relation::Ge, rhs);
        }
        lp.add(vec![1.0; n], Relation::Eq, self.n_slot as f64);
        Ok(lp::solve(&lp)?.optimal().map(|s| s.x[k]))
    }

    /// Rows stating that `target` is reached. Quantized rows ask for whole
    /// quanta, which every integer `psi` satisfies whenever it satisfies
    /// the plain row.
    fn target_rows(&self, target: f64) -> Vec<(Vec<f64>, f64)> {
        self.rows
            .iter()
            .zip(&self.quantized)
            .map(|(row, q)| match q {
                Some(q) => (q.quanta.clone(), q.need(target)),
                None => (row.clone(), target - TARGET_REL_TOL * target.abs()),
            })
            .collect()
    }

    /// Whether the LP with rounded-up quantized rows admits `target`.
    fn level_feasible(&self, target: f64) -> Result<bool> {
        let b = Bounds::root(self.n, self.n_slot);
        Ok(self.extreme_count(&b, target, 0, 0.0)?.is_some())
    }

    /// Every value the objective can take up to `bound`, ascending, when all
    /// demanded rows are quantized and the count is manageable.
    fn levels(&self, bound: f64) -> Option<Vec<f64>> {
        let rows: Vec<&QuantizedRow> = self
            .quantized
            .iter()
            .map(Option::as_ref)
            .collect::<Option<_>>()?;
        let total: f64 = rows
            .iter()
            .map(|q| (bound * q.per_unit).floor() + 1.0)
            .sum();
        if !(total.is_finite() && total <= MAX_LEVELS as f64) {
            return None;
        }
        let mut levels = vec![0.0];
        for q in rows {
            let top = (bound * q.per_unit + 1e-9 * (bound * q.per_unit).max(1.0)).floor() as u64;
            levels.extend((1..=top).map(|k| k as f64 / q.per_unit));
        }
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        Some(levels)
    }

    /// Walks the objective levels from the highest LP-admissible one down,
    /// returning the lexicographically smallest `psi` of the first level an
    /// integer plan reaches. `None` when the solve budget runs out.
    fn descend_levels(&self, levels: &[f64], limit: usize) -> Result<Option<Vec<usize>>> {
        // Feasibility only shrinks as the level rises; levels[0] = 0 always holds.
        let (mut lo, mut hi) = (0usize, levels.len());
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.level_feasible(levels[mid])? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut budget = limit;
        for idx in (0..=lo).rev() {
            match self.lex_min(levels[idx], &mut budget)? {
                Dive::Found(psi) => return Ok(Some(psi)),
                Dive::Exhausted => debug!("level {:.9e} unreachable", levels[idx] * self.scale),
                Dive::LimitHit => return Ok(None),
            }
        }
        unreachable!("level 0 is always reachable")
    }

    /// Largest normalized objective the counting argument allows inside `b`.
    fn cover_bound(&self, b: &Bounds) -> f64 {
        let Some(cover) = &self.cover else {
            return f64::INFINITY;
        };
        // Most quanta any feasible psi in the box can deliver.
        let mut budget: f64 = (0..self.n)
            .map(|i| cover.column_quanta[i] * b.lo[i] as f64)
            .sum();
        let mut free = self.n_slot as i64 - b.lo.iter().sum::<usize>() as i64;
        if free < 0 {
            return f64::NEG_INFINITY;
        }
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by(|&a, &c| {
            cover.column_quanta[c]
                .total_cmp(&cover.column_quanta[a])
                .then(a.cmp(&c))
        });
        for i in order {
            if free == 0 {
                break;
            }
            let take = free.min((b.hi[i] - b.lo[i].min(b.hi[i])) as i64);
            budget += take as f64 * cover.column_quanta[i];
            free -= take;
        }
        let budget = budget.round() as i64;

        // Water-fill integer quanta over rows to maximize min_j k_j / w_j.
        let w = &cover.per_unit;
        let total_w: f64 = w.iter().sum();
        let start = ((budget - w.len() as i64) as f64 / total_w).max(0.0);
        let mut k: Vec<i64> = w
            .iter()
            .map(|wj| (start * wj - 1e-9).ceil().max(0.0) as i64)
            .collect();
        let mut used: i64 = k.iter().sum();
        if used > budget {
            k.iter_mut().for_each(|x| *x = 0);
            used = 0;
        }
        loop {
            let (j, level) = k
                .iter()
                .zip(w)
                .map(|(&kj, wj)| kj as f64 / wj)
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("non-empty cover");
            if used >= budget {
                return level;
            }
            k[j] += 1;
            used += 1;
        }
    }

    fn exact_ok(&self, psi: &[usize], target: f64) -> bool {
        self.target_rows(target).iter().all(|(row, rhs)| {
            let s: f64 = row.iter().zip(psi).map(|(a, &k)| a * k as f64).sum();
            s >= *rhs
        })
    }

    /// Lexicographically smallest integer `psi` whose normalized objective
    /// reaches `target`.
    fn lex_min(&self, target: f64, budget: &mut usize) -> Result<Dive> {
        let n = self.n;
        let mut b = Bounds::root(n, self.n_slot);
        // (chosen value, highest LP-feasible value once known)
        let mut frames: Vec<(usize, Option<usize>)> = Vec::with_capacity(n);
        let mut descend = true;

        loop {
            if *budget == 0 {
                return Ok(Dive::LimitHit);
            }
            if descend {
                let k = frames.len();
                let fixed: usize = frames.iter().map(|f| f.0).sum();
                if k == n - 1 {
                    if fixed <= self.n_slot {
                        let mut psi: Vec<usize> = frames.iter().map(|f| f.0).collect();
                        psi.push(self.n_slot - fixed);
                        if self.exact_ok(&psi, target) {
                            return Ok(Dive::Found(psi));
                        }
                    }
                    descend = false;
                    continue;
                }
                if self.cover_bound(&b) < target * (1.0 - PRUNE_REL_TOL) {
                    descend = false;
                    continue;
                }
                *budget -= 1;
                match self.extreme_count(&b, target, k, 1.0)? {
                    None => descend = false,
                    Some(min) => {
                        let v = (min - INTEGRALITY_TOL).ceil().max(0.0) as usize;
                        frames.push((v, None));
                        b.lo[k] = v;
                        b.hi[k] = v;
                    }
                }
            } else {
                // Backtrack: advance the deepest frame that still has room.
                let Some(&(v, hi)) = frames.last() else {
                    return Ok(Dive::Exhausted);
                };
                let k = frames.len() - 1;
                let hi = match hi {
                    Some(h) => h,
                    None => {
                        b.lo[k] = 0;
                        b.hi[k] = self.n_slot;
                        *budget -= 1;
                        let h = self
                            .extreme_count(&b, target, k, -1.0)?
                            .map_or(0, |max| (max + INTEGRALITY_TOL).floor().max(0.0) as usize);
                        frames[k].1 = Some(h);
                        h
                    }
                };
                if v < hi {
                    frames[k].0 = v + 1;
                    b.lo[k] = v + 1;
                    b.hi[k] = v + 1;
                    descend = true;
                } else {
                    frames.pop();
                    b.lo[k] = 0;
                    b.hi[k] = self.n_slot;
                }
            }
        }
    }

    /// Returns the best count vector found and whether optimality was proven.
    fn branch_and_bound(
        &self,
        instance: &IlpInstance,
        node_limit: usize,
    ) -> Result<(Vec<usize>, bool)> {
        let mut best = super::greedy_plan(instance)?.psi;
        let mut best_t = instance.objective_of(&best);

        let mut stack = vec![Bounds::root(self.n, self.n_slot)];
        let mut nodes = 0usize;
        while let Some(node) = stack.pop() {
            nodes += 1;
            if nodes > node_limit {
                return Ok((best, false));
            }
            let cutoff = best_t / self.scale * (1.0 + PRUNE_REL_TOL);
            if self.cover_bound(&node) <= cutoff {
                continue;
            }
            let Some(relax) = self.relaxation(&node)? else {
                continue;
            };
            if relax.t <= cutoff {
                continue;
            }

            let rounded = self.round_and_complete(instance, &relax.psi, &node);
            let t = instance.objective_of(&rounded);
            if strictly_better(t, best_t) {
                best = rounded;
                best_t = t;
            }

            let branch = relax
                .psi
                .iter()
                .enumerate()
                .map(|(i, &x)| (i, x, (x - x.floor()).min(x.ceil() - x)))
                .filter(|&(_, _, f)| f > INTEGRALITY_TOL)
                .fold(None::<(usize, f64, f64)>, |acc, c| match acc {
                    Some(a) if a.2 >= c.2 => Some(a),
                    _ => Some(c),
                });
            let Some((i, x, _)) = branch else {
                // Relaxation is integral; the rounded vector is its solution.
                continue;
            };
            let mut down = node.clone();
            down.hi[i] = x.floor() as usize;
            let mut up = node;
            up.lo[i] = x.ceil() as usize;
            // Explore the side nearer the relaxation first.
            if x - x.floor() >= 0.5 {
                stack.push(down);
                stack.push(up);
            } else {
                stack.push(up);
                stack.push(down);
            }
        }
        debug!("branch-and-bound closed after {nodes} nodes");
        Ok((best, true))
    }

    /// Floors the relaxation and hands the leftover slots out greedily,
    /// staying inside the node's bounds.
    fn round_and_complete(&self, instance: &IlpInstance, x: &[f64], b: &Bounds) -> Vec<usize> {
        let mut psi: Vec<usize> = x
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                ((v + INTEGRALITY_TOL).floor().max(0.0) as usize).clamp(b.lo[i], b.hi[i])
            })
            .collect();
        let mut offered = instance.offered(&psi);
        let l = instance.supply();
        let mut assigned: usize = psi.iter().sum();
        while assigned < self.n_slot {
            let pick = (0..self.n)
                .filter(|&i| psi[i] < b.hi[i])
                .map(|i| {
                    let t = instance
                        .demanded()
                        .map(|j| (offered[j] + l[(j, i)]) / instance.demand()[j])
                        .fold(f64::INFINITY, f64::min);
                    (i, t)
                })
                .fold(None::<(usize, f64)>, |acc, c| match acc {
                    Some(a) if a.1 >= c.1 => Some(a),
                    _ => Some(c),
                });
            let Some((i, _)) = pick else { break };
            psi[i] += 1;
            for (j, o) in offered.iter_mut().enumerate() {
                *o += l[(j, i)];
            }
            assigned += 1;
        }
        while assigned > self.n_slot {
            // Only reachable when bounds force more than N_slot; trim from the end.
            let i = (0..self.n)
                .rev()
                .find(|&i| psi[i] > 0)
                .expect("positive count");
            psi[i] -= 1;
            assigned -= 1;
        }
        psi
    }
}

/// Common quantum of a row's supplies, if every non-zero entry is an
/// integer multiple of it.
fn row_quantum(entries: &[f64]) -> Option<f64> {
    let nonzero: Vec<f64> = entries.iter().copied().filter(|&e| e > 0.0).collect();
    if nonzero.is_empty() {
        return None;
    }
    const EXACT: f64 = 9_007_199_254_740_992.0; // 2^53
    if nonzero.iter().all(|&e| e.fract() == 0.0 && e < EXACT) {
        let g = nonzero.iter().fold(0u64, |g, &e| gcd(g, e as u64));
        return Some(g as f64);
    }
    let q = nonzero.iter().copied().fold(f64::INFINITY, f64::min);
    nonzero
        .iter()
        .all(|&e| {
            let r = e / q;
            (r - r.round()).abs() <= 1e-9 * r
        })
        .then_some(q)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
