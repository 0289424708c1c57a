//! Valid snapshots: sets of exactly `N_P` pairwise non-adjacent clusters.
//!
//! Snapshots are produced in lexicographic order of their (sorted) member
//! indices, the same order as filtering every `N_P`-combination, but
//! prefixes that already contain an adjacent pair are cut early.

use std::io::Write;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scenario::ClusterAdjacency;

/// Maximum number of candidate subsets `C(N_C, N_P)` accepted by default.
pub const DEFAULT_CANDIDATE_CAP: u128 = 1_000_000;

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u128;
    for i in 0..k {
        // acc = C(n, i); divide out the common factor first so the product
        // is exact and overflows only when C(n, i + 1) itself does.
        let d = (i + 1) as u128;
        let g = gcd(acc, d);
        match (acc / g).checked_mul((n - i) as u128 / (d / g)) {
            Some(v) => acc = v,
            None => return u128::MAX,
        }
    }
    acc
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn enumerate_valid_snapshots(
    adj: &ClusterAdjacency,
    n_active: usize,
) -> Result<Vec<Vec<usize>>> {
    enumerate_valid_snapshots_capped(adj, n_active, DEFAULT_CANDIDATE_CAP)
}

pub fn enumerate_valid_snapshots_capped(
    adj: &ClusterAdjacency,
    n_active: usize,
    cap: u128,
) -> Result<Vec<Vec<usize>>> {
    if n_active == 0 {
        return Err(Error::validation("N_P must be >= 1"));
    }
    let n = adj.len();
    let candidates = binomial(n, n_active);
    if candidates > cap {
        return Err(Error::CapExceeded(format!(
            "C({n}, {n_active}) = {candidates} candidate snapshots exceeds the cap of {cap}"
        )));
    }
    let mut out = Vec::new();
    if n_active > n {
        return Ok(out);
    }
    let mut chosen = Vec::with_capacity(n_active);
    extend(adj, n_active, 0, &mut chosen, &mut out);
    Ok(out)
}

fn extend(
    adj: &ClusterAdjacency,
    n_active: usize,
    start: usize,
    chosen: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if chosen.len() == n_active {
        out.push(chosen.clone());
        return;
    }
    let needed = n_active - chosen.len();
    for c in start..=(adj.len() - needed) {
        if chosen.iter().any(|&x| adj.get(x, c)) {
            continue;
        }
        chosen.push(c);
        extend(adj, n_active, c + 1, chosen, out);
        chosen.pop();
    }
}

/// `L[j, n] = V[j, n] * p_j`.
pub fn supply_matrix(snapshots: &[Vec<usize>], slot_bits: &[f64]) -> DMatrix<f64> {
    let mut l = DMatrix::zeros(slot_bits.len(), snapshots.len());
    for (n, members) in snapshots.iter().enumerate() {
        for &j in members {
            l[(j, n)] = slot_bits[j];
        }
    }
    l
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSet {
    n_clusters: usize,
    snapshots: Vec<Vec<usize>>,
    supply: DMatrix<f64>,
}

impl SnapshotSet {
    pub fn build(adj: &ClusterAdjacency, n_active: usize, slot_bits: &[f64]) -> Result<Self> {
        if slot_bits.len() != adj.len() {
            return Err(Error::validation(format!(
                "{} per-slot supplies for {} clusters",
                slot_bits.len(),
                adj.len()
            )));
        }
        let snapshots = enumerate_valid_snapshots(adj, n_active)?;
        let supply = supply_matrix(&snapshots, slot_bits);
        Ok(Self {
            n_clusters: adj.len(),
            snapshots,
            supply,
        })
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    /// Sorted cluster indices of snapshot `n`.
    pub fn members(&self, n: usize) -> &[usize] {
        &self.snapshots[n]
    }

    pub fn all(&self) -> &[Vec<usize>] {
        &self.snapshots
    }

    /// Binary column `v_n`.
    pub fn column(&self, n: usize) -> Vec<u8> {
        let mut v = vec![0u8; self.n_clusters];
        for &j in &self.snapshots[n] {
            v[j] = 1;
        }
        v
    }

    /// Supply matrix `L`, clusters by snapshots, bits per slot.
    pub fn supply(&self) -> &DMatrix<f64> {
        &self.supply
    }

    /// Writes `V` as CSV: one row per cluster (1-based id), one 0/1 column
    /// per snapshot (0-based index).
    pub fn write_csv<W: Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["cluster_id".to_string()];
        header.extend((0..self.len()).map(|n| n.to_string()));
        w.write_record(&header)?;
        let columns: Vec<Vec<u8>> = (0..self.len()).map(|n| self.column(n)).collect();
        for j in 0..self.n_clusters {
            let mut row = vec![(j + 1).to_string()];
            row.extend(columns.iter().map(|c| c[j].to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}
