use std::cmp::Ordering;

use super::{ensure_snapshots, uniform_counts, HoppingPlan, IlpInstance, SolverStatus};
use crate::error::Result;

/// Slot-by-slot heuristic: every slot goes to the snapshot whose addition
/// gives the best sorted vector of demanded ratios `s_j / m_j` (compared
/// lexicographically, so the minimum ratio is maximized first). Ties go to
/// the lowest snapshot index.
pub fn greedy_plan(instance: &IlpInstance) -> Result<HoppingPlan> {
    ensure_snapshots(instance)?;
    let n = instance.n_snapshots();
    let demanded: Vec<usize> = instance.demanded().collect();
    if demanded.is_empty() {
        let psi = uniform_counts(n, instance.n_slot());
        return Ok(HoppingPlan::from_counts(
            instance,
            psi,
            SolverStatus::Heuristic,
        ));
    }
    let l = instance.supply();
    let m = instance.demand();

    let mut offered = vec![0.0; instance.n_clusters()];
    let mut psi = vec![0usize; n];
    let mut scratch = Vec::with_capacity(demanded.len());
    for _ in 0..instance.n_slot() {
        let mut best: Option<(usize, Vec<f64>)> = None;
        for i in 0..n {
            scratch.clear();
            scratch.extend(demanded.iter().map(|&j| (offered[j] + l[(j, i)]) / m[j]));
            scratch.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
            let better = match &best {
                None => true,
                Some((_, key)) => leximin_cmp(&scratch, key) == Ordering::Greater,
            };
            if better {
                best = Some((i, scratch.clone()));
            }
        }
        let (pick, _) = best.expect("at least one snapshot");
        psi[pick] += 1;
        for (j, o) in offered.iter_mut().enumerate() {
            *o += l[(j, pick)];
        }
    }
    Ok(HoppingPlan::from_counts(
        instance,
        psi,
        SolverStatus::Heuristic,
    ))
}

fn leximin_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    Ordering::Equal
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn identity_supply_matches_optimum() {
        let inst = IlpInstance::new(DMatrix::identity(2, 2), vec![2.0, 2.0], 4).unwrap();
        let plan = greedy_plan(&inst).unwrap();
        assert_eq!(plan.psi, vec![2, 2]);
        assert_eq!(plan.t, 1.0);
        assert_eq!(plan.status, SolverStatus::Heuristic);
    }

    #[test]
    fn dominant_snapshot_takes_every_slot() {
        let l = DMatrix::from_row_slice(2, 3, &[1.0, 5.0, 0.0, 1.0, 5.0, 2.0]);
        let inst = IlpInstance::new(l, vec![1.0, 1.0], 6).unwrap();
        assert_eq!(greedy_plan(&inst).unwrap().psi, vec![0, 6, 0]);
    }

    #[test]
    fn no_demand_spreads_uniformly() {
        let inst = IlpInstance::new(DMatrix::identity(2, 3), vec![0.0, 0.0], 7).unwrap();
        let plan = greedy_plan(&inst).unwrap();
        assert_eq!(plan.psi, vec![3, 2, 2]);
        assert_eq!(plan.t, f64::INFINITY);
    }

    #[test]
    fn no_snapshots_is_infeasible() {
        let inst = IlpInstance::new(DMatrix::zeros(2, 0), vec![1.0, 1.0], 2).unwrap();
        assert_eq!(greedy_plan(&inst).unwrap_err().class(), "infeasible");
    }
}
