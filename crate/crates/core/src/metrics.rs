//! Demand-matching reports and the cross-cluster leakage diagnostic.

use std::collections::BTreeMap;
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::channel::{channel_block, ClusterChannel};
use crate::error::Result;
use crate::precoding::mmse_precoder;
use crate::scenario::Scenario;
use crate::snapshots::SnapshotSet;

/// Splits each cluster's offered capacity over its beams in proportion to
/// their demands, or equally when the cluster has no demand.
pub fn redistribute(cluster_offered: &[f64], scenario: &Scenario) -> Vec<f64> {
    let mut out = vec![0.0; scenario.n_beams()];
    for (j, members) in scenario.clusters().all_members().iter().enumerate() {
        let demand: f64 = members
            .iter()
            .map(|&b| scenario.beams()[b].demand_bps)
            .sum();
        for &b in members {
            out[b] = if demand > 0.0 {
                cluster_offered[j] * scenario.beams()[b].demand_bps / demand
            } else {
                cluster_offered[j] / members.len() as f64
            };
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeamRow {
    pub beam_id: usize,
    pub demand_bps: f64,
    pub offered_bps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterRow {
    pub cluster_id: usize,
    pub demand_bps: f64,
    pub offered_bps: f64,
    /// `offered / demand`; `None` for clusters without demand.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityReport {
    pub scheme: String,
    pub beams: Vec<BeamRow>,
    pub clusters: Vec<ClusterRow>,
    /// `sum_i max(d_i - o_i, 0)`.
    pub unmet_bps: f64,
    /// `sum_i max(o_i - d_i, 0)`.
    pub unused_bps: f64,
    /// `sum_i (o_i - d_i)`.
    pub net_bps: f64,
    /// Smallest cluster ratio; `None` when no cluster has demand.
    pub min_ratio: Option<f64>,
    /// Beam indices ordered by increasing demand, ties by index.
    pub beams_by_demand: Vec<usize>,
}

impl CapacityReport {
    /// Checks `unused - unmet = sum(o - d)` up to floating-point rounding.
    pub fn accounting_holds(&self) -> bool {
        let scale: f64 = self
            .beams
            .iter()
            .map(|b| (b.offered_bps - b.demand_bps).abs())
            .sum();
        let gap = (self.unused_bps - self.unmet_bps - self.net_bps).abs();
        gap <= 1e-12 * scale.max(f64::MIN_POSITIVE)
    }

    pub fn write_beam_csv<W: Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["beam_id", "demand_bps", "offered_bps", "scheme"])?;
        for b in &self.beams {
            w.write_record([
                b.beam_id.to_string(),
                b.demand_bps.to_string(),
                b.offered_bps.to_string(),
                self.scheme.clone(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_cluster_csv<W: Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["cluster_id", "demand_bps", "offered_bps", "ratio", "scheme"])?;
        for c in &self.clusters {
            w.write_record([
                c.cluster_id.to_string(),
                c.demand_bps.to_string(),
                c.offered_bps.to_string(),
                c.ratio.map_or_else(String::new, |r| r.to_string()),
                self.scheme.clone(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Builds the report for a per-beam offered vector. Cluster offered
/// capacity is the sum over member beams.
pub fn score(beam_offered: &[f64], scenario: &Scenario, scheme: &str) -> CapacityReport {
    assert_eq!(
        beam_offered.len(),
        scenario.n_beams(),
        "offered vector length"
    );
    let beams: Vec<BeamRow> = scenario
        .beams()
        .iter()
        .zip(beam_offered)
        .map(|(b, &o)| BeamRow {
            beam_id: b.id,
            demand_bps: b.demand_bps,
            offered_bps: o,
        })
        .collect();

    let mut unmet = 0.0;
    let mut unused = 0.0;
    let mut net = 0.0;
    for b in &beams {
        let e = b.offered_bps - b.demand_bps;
        net += e;
        if e > 0.0 {
            unused += e;
        } else {
            unmet -= e;
        }
    }

    let clusters: Vec<ClusterRow> = scenario
        .clusters()
        .all_members()
        .iter()
        .enumerate()
        .map(|(j, members)| {
            let demand: f64 = members.iter().map(|&b| beams[b].demand_bps).sum();
            let offered: f64 = members.iter().map(|&b| beams[b].offered_bps).sum();
            ClusterRow {
                cluster_id: j + 1,
                demand_bps: demand,
                offered_bps: offered,
                ratio: (demand > 0.0).then(|| offered / demand),
            }
        })
        .collect();
    let min_ratio = clusters.iter().filter_map(|c| c.ratio).reduce(f64::min);

    let mut beams_by_demand: Vec<usize> = (0..beams.len()).collect();
    beams_by_demand.sort_by(|&a, &b| {
        beams[a]
            .demand_bps
            .total_cmp(&beams[b].demand_bps)
            .then(a.cmp(&b))
    });

    CapacityReport {
        scheme: scheme.to_string(),
        beams,
        clusters,
        unmet_bps: unmet,
        unused_bps: unused,
        net_bps: net,
        min_ratio,
        beams_by_demand,
    }
}

/// Worst received-power ratio of co-active clusters' signals to a beam's
/// own precoded signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Leakage {
    pub ratio: f64,
    /// 1-based id of the beam where the worst ratio occurs, if any beam is
    /// exposed to another cluster.
    pub beam_id: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlotLeakage {
    pub slot: usize,
    pub snapshot: usize,
    pub ratio: f64,
    pub beam_id: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeakageReport {
    pub slots: Vec<SlotLeakage>,
    pub worst_ratio: f64,
}

/// MMSE precoders keyed by cluster index.
fn precoders(scenario: &Scenario, channels: &[ClusterChannel]) -> Result<Vec<DMatrix<Complex64>>> {
    let power = scenario.system().power_per_beam_w(scenario.n_beams());
    channels
        .iter()
        .map(|c| mmse_precoder(c, power).map(|p| p.w))
        .collect()
}

fn leakage_with(
    scenario: &Scenario,
    channels: &[ClusterChannel],
    w: &[DMatrix<Complex64>],
    active: &[usize],
) -> Leakage {
    let mut worst = Leakage {
        ratio: 0.0,
        beam_id: None,
    };
    for &j in active {
        let own = &channels[j].h * &w[j];
        let members = scenario.clusters().members(j);
        for (r, &beam) in members.iter().enumerate() {
            let signal = own[(r, r)].norm_sqr();
            let mut leak = 0.0;
            for &l in active.iter().filter(|&&l| l != j) {
                let h = channel_block(scenario, &[beam], scenario.clusters().members(l));
                leak += (h * &w[l]).iter().map(|z| z.norm_sqr()).sum::<f64>();
            }
            if active.len() < 2 {
                continue;
            }
            let ratio = if signal > 0.0 {
                leak / signal
            } else {
                f64::INFINITY
            };
            if worst.beam_id.is_none() || ratio > worst.ratio {
                worst = Leakage {
                    ratio,
                    beam_id: Some(scenario.beams()[beam].id),
                };
            }
        }
    }
    worst
}

/// Leakage when the given clusters (0-based) are illuminated together.
pub fn snapshot_leakage(
    scenario: &Scenario,
    channels: &[ClusterChannel],
    active: &[usize],
) -> Result<Leakage> {
    let w = precoders(scenario, channels)?;
    Ok(leakage_with(scenario, channels, &w, active))
}

/// Per-slot leakage of a schedule (snapshot index per slot).
pub fn cross_cluster_leakage(
    scenario: &Scenario,
    channels: &[ClusterChannel],
    snapshots: &SnapshotSet,
    schedule: &[usize],
) -> Result<LeakageReport> {
    let w = precoders(scenario, channels)?;
    let mut cache: BTreeMap<usize, Leakage> = BTreeMap::new();
    let mut slots = Vec::with_capacity(schedule.len());
    for (slot, &n) in schedule.iter().enumerate() {
        let leak = *cache
            .entry(n)
            .or_insert_with(|| leakage_with(scenario, channels, &w, snapshots.members(n)));
        slots.push(SlotLeakage {
            slot,
            snapshot: n,
            ratio: leak.ratio,
            beam_id: leak.beam_id,
        });
    }
    let worst_ratio = slots.iter().map(|s| s.ratio).fold(0.0, f64::max);
    Ok(LeakageReport { slots, worst_ratio })
}

impl LeakageReport {
    pub fn write_csv<W: Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["slot", "snapshot", "leakage_ratio", "worst_beam_id"])?;
        for s in &self.slots {
            w.write_record([
                s.slot.to_string(),
                s.snapshot.to_string(),
                s.ratio.to_string(),
                s.beam_id.map_or_else(String::new, |b| b.to_string()),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::tests::toy_system;
    use crate::scenario::Beam;

    fn two_clusters(demands: [f64; 4]) -> Scenario {
        let beams = (0..4)
            .map(|i| Beam {
                id: i + 1,
                center: [i as f64 * 0.45, 0.0],
                demand_bps: demands[i],
            })
            .collect();
        Scenario::new(beams, vec![vec![1, 2], vec![3, 4]], None, toy_system()).unwrap()
    }

    #[test]
    fn redistribution_examples() {
        let sc = two_clusters([1.0, 1.0, 1.0, 3.0]);
        assert_eq!(redistribute(&[10.0, 8.0], &sc), vec![5.0, 5.0, 2.0, 6.0]);
        let sc = two_clusters([0.0, 0.0, 2.0, 2.0]);
        assert_eq!(redistribute(&[6.0, 0.0], &sc), vec![3.0, 3.0, 0.0, 0.0]);
    }

    #[test]
    fn perfect_match_and_outage() {
        let d = [1e8, 2e8, 3e7, 0.0];
        let sc = two_clusters(d);
        let r = score(&d, &sc, "x");
        assert_eq!((r.unmet_bps, r.unused_bps), (0.0, 0.0));
        assert!(r.clusters.iter().all(|c| c.ratio == Some(1.0)));
        assert_eq!(r.min_ratio, Some(1.0));

        let r = score(&[0.0; 4], &sc, "x");
        assert_eq!(r.unmet_bps, d.iter().sum::<f64>());
        assert_eq!(r.unused_bps, 0.0);
        assert_eq!(r.min_ratio, Some(0.0));
        assert!(r.accounting_holds());
    }

    #[test]
    fn beams_sorted_by_demand() {
        let sc = two_clusters([3.0, 1.0, 2.0, 1.0]);
        let r = score(&[0.0; 4], &sc, "x");
        assert_eq!(r.beams_by_demand, vec![1, 3, 2, 0]);
    }

    #[test]
    fn csv_layout() {
        let sc = two_clusters([1.0, 1.0, 0.0, 0.0]);
        let r = score(&[2.0, 0.5, 1.0, 0.0], &sc, "ch");
        let mut buf = Vec::new();
        r.write_cluster_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "cluster_id,demand_bps,offered_bps,ratio,scheme\n1,2,2.5,1.25,ch\n2,0,1,,ch\n"
        );
        let mut buf = Vec::new();
        r.write_beam_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .starts_with("beam_id,demand_bps,offered_bps,scheme\n1,1,2,ch\n"));
    }

    #[test]
    fn single_active_cluster_has_no_leakage() {
        let sc = two_clusters([1.0; 4]);
        let ch = crate::channel::build_all_channels(&sc);
        let l = snapshot_leakage(&sc, &ch, &[0]).unwrap();
        assert_eq!(l.ratio, 0.0);
        assert_eq!(l.beam_id, None);
    }
}
