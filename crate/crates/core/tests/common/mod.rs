#![allow(dead_code)]

use clusterhop::cli::Pipeline;
use clusterhop::dvbs2::Dvbs2Table;
use clusterhop::planner::IlpInstance;
use clusterhop::scenario::{ClusterAdjacency, Scenario};
use nalgebra::DMatrix;
use rand::Rng;

pub const PAPER71: &str = include_str!("../../data/paper71.json");

pub fn paper71() -> Scenario {
    Scenario::from_json_str(PAPER71).expect("bundled scenario is valid")
}

pub fn paper71_pipeline() -> Pipeline {
    Pipeline::new(paper71(), Dvbs2Table::bundled()).expect("pipeline")
}

/// Every `k`-subset of `0..n` (bitmask walk) with no adjacent pair, sorted.
pub fn brute_force_snapshots(adj: &ClusterAdjacency, k: usize) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let clash = members
            .iter()
            .any(|&a| members.iter().any(|&b| a != b && adj.get(a, b)));
        if !clash {
            out.push(members);
        }
    }
    out.sort();
    out
}

/// Random instance with small non-negative integer supplies and demands.
pub fn integer_instance(
    rng: &mut impl Rng,
    max_rows: usize,
    max_cols: usize,
    max_slots: usize,
) -> (Vec<Vec<u64>>, Vec<u64>, usize, IlpInstance) {
    let rows = rng.gen_range(1..=max_rows);
    let cols = rng.gen_range(1..=max_cols);
    let l: Vec<Vec<u64>> = (0..rows)
        .map(|_| (0..cols).map(|_| rng.gen_range(0..=5)).collect())
        .collect();
    let m: Vec<u64> = (0..rows).map(|_| rng.gen_range(0..=12)).collect();
    let n_slot = rng.gen_range(1..=max_slots);
    let inst = IlpInstance::new(
        DMatrix::from_fn(rows, cols, |r, c| l[r][c] as f64),
        m.iter().map(|&x| x as f64).collect(),
        n_slot,
    )
    .expect("valid instance");
    (l, m, n_slot, inst)
}

/// Exact objective as a reduced-free fraction `(num, den)`; `None` when no
/// cluster is demanded.
pub fn rational_objective(l: &[Vec<u64>], m: &[u64], psi: &[usize]) -> Option<(u128, u128)> {
    let mut best: Option<(u128, u128)> = None;
    for (row, &mj) in l.iter().zip(m) {
        if mj == 0 {
            continue;
        }
        let s: u128 = row
            .iter()
            .zip(psi)
            .map(|(&a, &k)| a as u128 * k as u128)
            .sum();
        let cand = (s, mj as u128);
        best = match best {
            Some(b) if b.0 * cand.1 <= cand.0 * b.1 => Some(b),
            _ => Some(cand),
        };
    }
    best
}

pub fn same_fraction(a: (u128, u128), b: (u128, u128)) -> bool {
    a.0 * b.1 == b.0 * a.1
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}
