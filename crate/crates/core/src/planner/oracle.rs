//! Exhaustive reference solvers.

use super::{
    ensure_snapshots, strictly_better, uniform_counts, HoppingPlan, IlpInstance, SolverStatus,
};
use crate::error::{Error, Result};
use crate::snapshots::binomial;

/// Default limit on the number of count vectors (or sequences) visited.
pub const DEFAULT_ORACLE_CAP: u128 = 10_000_000;

/// Enumerates every count vector with `sum(psi) = N_slot` in increasing
/// lexicographic order and keeps the first one attaining the best objective,
/// i.e. the lexicographically smallest optimum.
pub fn brute_force_plan(instance: &IlpInstance, cap: u128) -> Result<HoppingPlan> {
    ensure_snapshots(instance)?;
    let n = instance.n_snapshots();
    let total = instance.n_slot();
    let count = binomial(total + n - 1, n - 1);
    if count > cap {
        return Err(Error::CapExceeded(format!(
            "{count} count vectors exceed the oracle cap of {cap}"
        )));
    }
    if instance.demanded().next().is_none() {
        return Ok(HoppingPlan::from_counts(
            instance,
            uniform_counts(n, total),
            SolverStatus::Heuristic,
        ));
    }
    let mut search = CountSearch {
        instance,
        psi: vec![0; n],
        offered: vec![0.0; instance.n_clusters()],
        best: None,
    };
    search.visit(0, total);
    let (psi, _) = search.best.expect("at least one composition");
    Ok(HoppingPlan::from_counts(
        instance,
        psi,
        SolverStatus::Optimal,
    ))
}

struct CountSearch<'a> {
    instance: &'a IlpInstance,
    psi: Vec<usize>,
    offered: Vec<f64>,
    best: Option<(Vec<usize>, f64)>,
}

impl CountSearch<'_> {
    fn add(&mut self, i: usize, k: f64) {
        let l = self.instance.supply();
        for (j, o) in self.offered.iter_mut().enumerate() {
            *o += k * l[(j, i)];
        }
    }

    fn visit(&mut self, i: usize, remaining: usize) {
        let n = self.psi.len();
        if i == n - 1 {
            self.psi[i] = remaining;
            self.add(i, remaining as f64);
            let t = self.instance.objective(&self.offered);
            if self
                .best
                .as_ref()
                .is_none_or(|(_, b)| strictly_better(t, *b))
            {
                self.best = Some((self.psi.clone(), t));
            }
            self.add(i, -(remaining as f64));
            self.psi[i] = 0;
            return;
        }
        for k in 0..=remaining {
            self.psi[i] = k;
            self.add(i, k as f64);
            self.visit(i + 1, remaining - k);
            self.add(i, -(k as f64));
        }
        self.psi[i] = 0;
    }
}

/// Exhaustive search over ordered slot sequences `(u_1, ..., u_N)`, each
/// slot picking one snapshot. Returns the best objective and the counts of
/// the first sequence attaining it.
pub fn sequence_search(instance: &IlpInstance, cap: u128) -> Result<(f64, Vec<usize>)> {
    ensure_snapshots(instance)?;
    let n = instance.n_snapshots();
    let total = instance.n_slot();
    let count = (n as u128).checked_pow(total as u32).unwrap_or(u128::MAX);
    if count > cap {
        return Err(Error::CapExceeded(format!(
            "{count} slot sequences exceed the oracle cap of {cap}"
        )));
    }
    let mut seq = vec![0usize; total];
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        let mut psi = vec![0usize; n];
        for &u in &seq {
            psi[u] += 1;
        }
        let t = instance.objective_of(&psi);
        if best.as_ref().is_none_or(|(b, _)| strictly_better(t, *b)) {
            best = Some((t, psi));
        }
        // Odometer increment, last slot fastest.
        let mut pos = total;
        loop {
            if pos == 0 {
                return Ok(best.expect("at least one sequence"));
            }
            pos -= 1;
            seq[pos] += 1;
            if seq[pos] < n {
                break;
            }
            seq[pos] = 0;
        }
    }
}
