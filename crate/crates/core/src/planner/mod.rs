//! Illumination planning: how many slots of the hopping window each valid
//! snapshot receives.
//!
//! Given supplies `L` (bits per slot, clusters by snapshots), demands `m`
//! (bits per window) and a slot budget `N_slot`, find integer counts `psi`
//! with `sum(psi) = N_slot` maximizing `t = min_j s_j / m_j`, where
//! `s = L psi`. Clusters with zero demand are left out of the minimum.

mod greedy;
mod ilp;
mod oracle;
mod schedule;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

pub use greedy::greedy_plan;
pub use ilp::{lp_relaxation_bound, solve_illumination, solve_illumination_with, IlpOptions};
pub use oracle::{brute_force_plan, sequence_search, DEFAULT_ORACLE_CAP};
pub use schedule::expand_schedule;

/// Relative tolerance used when deciding that one objective value beats
/// another.
pub(crate) const OBJECTIVE_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct IlpInstance {
    supply: DMatrix<f64>,
    demand: Vec<f64>,
    n_slot: usize,
}

impl IlpInstance {
    pub fn new(supply: DMatrix<f64>, demand: Vec<f64>, n_slot: usize) -> Result<Self> {
        if supply.nrows() != demand.len() {
            return Err(Error::validation(format!(
                "supply matrix has {} rows but there are {} demands",
                supply.nrows(),
                demand.len()
            )));
        }
        if n_slot == 0 {
            return Err(Error::validation("N_slot must be >= 1"));
        }
        if supply.iter().any(|&x| !(x.is_finite() && x >= 0.0)) {
            return Err(Error::validation("supply entries must be finite and >= 0"));
        }
        if demand.iter().any(|&x| !(x.is_finite() && x >= 0.0)) {
            return Err(Error::validation("demands must be finite and >= 0"));
        }
        Ok(Self {
            supply,
            demand,
            n_slot,
        })
    }

    pub fn supply(&self) -> &DMatrix<f64> {
        &self.supply
    }

    pub fn demand(&self) -> &[f64] {
        &self.demand
    }

    pub fn n_slot(&self) -> usize {
        self.n_slot
    }

    pub fn n_snapshots(&self) -> usize {
        self.supply.ncols()
    }

    pub fn n_clusters(&self) -> usize {
        self.supply.nrows()
    }

    /// Clusters that take part in the min-ratio objective.
    pub fn demanded(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.demand.len()).filter(move |&j| self.demand[j] > 0.0)
    }

    /// `s = L psi`.
    pub fn offered(&self, psi: &[usize]) -> Vec<f64> {
        (0..self.n_clusters())
            .map(|j| {
                psi.iter()
                    .enumerate()
                    .map(|(i, &k)| self.supply[(j, i)] * k as f64)
                    .sum()
            })
            .collect()
    }

    /// `min_j s_j / m_j` over demanded clusters; `+inf` when none is demanded.
    pub fn objective(&self, offered: &[f64]) -> f64 {
        self.demanded()
            .map(|j| offered[j] / self.demand[j])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn objective_of(&self, psi: &[usize]) -> f64 {
        self.objective(&self.offered(psi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverStatus {
    Optimal,
    Heuristic,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HoppingPlan {
    /// Slots per snapshot.
    pub psi: Vec<usize>,
    /// Achieved `min_j s_j / m_j`.
    pub t: f64,
    /// Offered bits per window per cluster.
    pub offered_bits: Vec<f64>,
    /// Snapshot index illuminated in each slot.
    pub schedule: Vec<usize>,
    pub status: SolverStatus,
}

impl HoppingPlan {
    pub fn from_counts(instance: &IlpInstance, psi: Vec<usize>, status: SolverStatus) -> Self {
        let offered_bits = instance.offered(&psi);
        let t = instance.objective(&offered_bits);
        let schedule = expand_schedule(&psi);
        Self {
            psi,
            t,
            offered_bits,
            schedule,
            status,
        }
    }

    /// Placeholder plan for an instance without any valid snapshot.
    pub fn infeasible(n_clusters: usize) -> Self {
        Self {
            psi: Vec::new(),
            t: 0.0,
            offered_bits: vec![0.0; n_clusters],
            schedule: Vec::new(),
            status: SolverStatus::Infeasible,
        }
    }

    /// Indices of snapshots that receive at least one slot.
    pub fn active_snapshots(&self) -> Vec<usize> {
        (0..self.psi.len()).filter(|&i| self.psi[i] > 0).collect()
    }
}

/// `a` beats `b` by more than the relative objective tolerance.
pub(crate) fn strictly_better(a: f64, b: f64) -> bool {
    if b == f64::NEG_INFINITY {
        return a > b;
    }
    if a == f64::INFINITY {
        return b < f64::INFINITY;
    }
    a > b + OBJECTIVE_REL_TOL * b.abs().max(1e-300)
}

/// `psi` spread as evenly as possible, used when no cluster is demanded.
pub(crate) fn uniform_counts(n: usize, total: usize) -> Vec<usize> {
    (0..n)
        .map(|i| total / n + usize::from(i < total % n))
        .collect()
}

pub(crate) fn ensure_snapshots(instance: &IlpInstance) -> Result<()> {
    if instance.n_snapshots() == 0 {
        Err(Error::Infeasible("no valid snapshot exists".into()))
    } else {
        Ok(())
    }
}
