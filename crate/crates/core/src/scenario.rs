//! Scenario description: beam grid, per-beam demands, cluster partition,
//! cluster adjacency and system constants.
//!
//! The on-disk format is a single JSON document:
//!
//! ```json
//! {
//!   "beams":    [{"id": 1, "u": 0.0, "v": 0.0, "demand_bps": 1.0e8}, ...],
//!   "clusters": [[1, 2, 3], [4, 5, 6], ...],
//!   "adjacency": [[0, 1], [1, 0]],
//!   "system":   {"P_T_W": 6000, "B_W_Hz": 5e8, ...}
//! }
//! ```
//!
//! Beam ids are 1-based and contiguous. `adjacency` is optional; when it is
//! absent the cluster adjacency is derived from beam-center distances.
//! Internally every beam and cluster is addressed by a 0-based index.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Multiplier applied to the nominal beam pitch when deriving adjacency.
pub const DEFAULT_ADJACENCY_FACTOR: f64 = 1.1;

const DEFAULT_GAIN_RX_DBI: f64 = 41.8;
const DEFAULT_SLANT_RANGE_M: f64 = 38_000.0e3;

#[derive(Debug, Clone, PartialEq)]
pub struct Beam {
    /// 1-based beam id as it appears in the scenario file.
    pub id: usize,
    /// Beam-center position on the coverage plane, in degrees as seen from
    /// the satellite.
    pub center: [f64; 2],
    pub demand_bps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    #[serde(rename = "P_T_W")]
    pub total_power_w: f64,
    #[serde(rename = "B_W_Hz")]
    pub bandwidth_hz: f64,
    pub carrier_hz: f64,
    pub rolloff: f64,
    #[serde(rename = "T_slot_s")]
    pub slot_s: f64,
    #[serde(rename = "N_slot")]
    pub slots_per_window: usize,
    #[serde(rename = "N_P")]
    pub clusters_per_slot: usize,
    pub dual_polarization: bool,
    #[serde(rename = "gain_peak_dBi")]
    pub gain_peak_dbi: f64,
    #[serde(rename = "beamwidth_3dB_deg")]
    pub beamwidth_3db_deg: f64,
    #[serde(rename = "T_sys_K")]
    pub system_temp_k: f64,
    pub seed: u64,
    #[serde(rename = "gain_rx_dBi", default = "default_gain_rx")]
    pub gain_rx_dbi: f64,
    #[serde(default = "default_slant_range")]
    pub slant_range_m: f64,
    /// Beam-center distance (degrees) under which two beams count as
    /// adjacent. Defaults to 1.1 times the nominal beam pitch.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjacency_threshold_deg: Option<f64>,
}

fn default_gain_rx() -> f64 {
    DEFAULT_GAIN_RX_DBI
}

fn default_slant_range() -> f64 {
    DEFAULT_SLANT_RANGE_M
}

impl SystemConfig {
    /// Hopping window duration `T_H = N_slot * T_slot`.
    pub fn hopping_window_s(&self) -> f64 {
        self.slots_per_window as f64 * self.slot_s
    }

    /// Transmit power available to each feed, `P_T / N_B`.
    pub fn power_per_beam_w(&self, n_beams: usize) -> f64 {
        self.total_power_w / n_beams as f64
    }

    pub fn symbol_rate(&self) -> f64 {
        self.bandwidth_hz / (1.0 + self.rolloff)
    }

    pub fn polarization_factor(&self) -> f64 {
        if self.dual_polarization {
            2.0
        } else {
            1.0
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            ("P_T_W", self.total_power_w),
            ("B_W_Hz", self.bandwidth_hz),
            ("carrier_Hz", self.carrier_hz),
            ("T_slot_s", self.slot_s),
            ("beamwidth_3dB_deg", self.beamwidth_3db_deg),
            ("T_sys_K", self.system_temp_k),
            ("slant_range_m", self.slant_range_m),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::validation(format!(
                    "system.{name} must be > 0, got {value}"
                )));
            }
        }
        if !(self.rolloff.is_finite() && self.rolloff >= 0.0) {
            return Err(Error::validation(format!(
                "system.rolloff must be >= 0, got {}",
                self.rolloff
            )));
        }
        if !self.gain_peak_dbi.is_finite() || !self.gain_rx_dbi.is_finite() {
            return Err(Error::validation("antenna gains must be finite"));
        }
        if self.slots_per_window == 0 {
            return Err(Error::validation("system.N_slot must be >= 1"));
        }
        if self.clusters_per_slot == 0 {
            return Err(Error::validation("system.N_P must be >= 1"));
        }
        if let Some(th) = self.adjacency_threshold_deg {
            if !(th.is_finite() && th > 0.0) {
                return Err(Error::validation(
                    "system.adjacency_threshold_deg must be > 0",
                ));
            }
        }
        Ok(())
    }
}

/// Partition of beams into clusters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterMap {
    assignment: Vec<usize>,
    members: Vec<Vec<usize>>,
}

impl ClusterMap {
    /// Builds a partition from per-cluster lists of 0-based beam indices.
    pub fn new(n_beams: usize, members: Vec<Vec<usize>>) -> Result<Self> {
        let mut assignment = vec![usize::MAX; n_beams];
        for (j, cluster) in members.iter().enumerate() {
            if cluster.is_empty() {
                return Err(Error::validation(format!("cluster {} is empty", j + 1)));
            }
            for &b in cluster {
                if b >= n_beams {
                    return Err(Error::validation(format!(
                        "cluster {} references unknown beam id {}",
                        j + 1,
                        b + 1
                    )));
                }
                if assignment[b] != usize::MAX {
                    return Err(Error::validation(format!(
                        "beam {} is assigned to clusters {} and {}",
                        b + 1,
                        assignment[b] + 1,
                        j + 1
                    )));
                }
                assignment[b] = j;
            }
        }
        if let Some(b) = assignment.iter().position(|&c| c == usize::MAX) {
            return Err(Error::validation(format!(
                "beam {} is not in any cluster",
                b + 1
            )));
        }
        Ok(Self {
            assignment,
            members,
        })
    }

    pub fn n_clusters(&self) -> usize {
        self.members.len()
    }

    /// Cluster index of a beam.
    pub fn cluster_of(&self, beam: usize) -> usize {
        self.assignment[beam]
    }

    /// Ordered beam indices of cluster `j`.
    pub fn members(&self, j: usize) -> &[usize] {
        &self.members[j]
    }

    pub fn all_members(&self) -> &[Vec<usize>] {
        &self.members
    }

    /// Cluster cardinality.
    pub fn size(&self, j: usize) -> usize {
        self.members[j].len()
    }
}

/// Symmetric 0/1 cluster adjacency matrix with a zero diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAdjacency {
    n: usize,
    bits: Vec<bool>,
}

impl ClusterAdjacency {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            bits: vec![false; n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let n = rows.len();
        let mut adj = Self::empty(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::validation(format!(
                    "adjacency row {} has {} entries, expected {n}",
                    i + 1,
                    row.len()
                )));
            }
            for (j, &a) in row.iter().enumerate() {
                match a {
                    0 => {}
                    1 if i == j => {
                        return Err(Error::validation(format!(
                            "adjacency diagonal entry ({0},{0}) must be 0",
                            i + 1
                        )))
                    }
                    1 => adj.bits[i * n + j] = true,
                    other => {
                        return Err(Error::validation(format!(
                            "adjacency entry ({},{}) = {other} is not 0/1",
                            i + 1,
                            j + 1
                        )))
                    }
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if adj.get(i, j) != adj.get(j, i) {
                    return Err(Error::validation(format!(
                        "adjacency is asymmetric at ({},{})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(adj)
    }

    /// Marks `i` and `j` adjacent (both orientations). Self-loops are ignored.
    pub fn connect(&mut self, i: usize, j: usize) {
        if i != j {
            self.bits[i * self.n + j] = true;
            self.bits[j * self.n + i] = true;
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.n + j]
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) as u8).collect())
            .collect()
    }

    /// `v^T A v` for a 0/1 membership vector given as a member list.
    pub fn quadratic_form(&self, members: &[usize]) -> usize {
        members
            .iter()
            .flat_map(|&i| members.iter().map(move |&j| (i, j)))
            .filter(|&(i, j)| self.get(i, j))
            .count()
    }
}

/// A fully validated scenario. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Scenario {
    beams: Vec<Beam>,
    clusters: ClusterMap,
    adjacency: ClusterAdjacency,
    adjacency_derived: bool,
    system: SystemConfig,
}

#[derive(Debug, Serialize, Deserialize)]
struct BeamRecord {
    id: usize,
    u: f64,
    v: f64,
    demand_bps: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct ScenarioFile {
    beams: Vec<BeamRecord>,
    clusters: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    adjacency: Option<Vec<Vec<i64>>>,
    system: SystemConfig,
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Scenario::from_json_str(&text)
}

impl Scenario {
    /// Builds a scenario from beams, per-cluster beam-id lists (1-based ids),
    /// an optional explicit adjacency and the system constants.
    pub fn new(
        mut beams: Vec<Beam>,
        clusters: Vec<Vec<usize>>,
        adjacency: Option<ClusterAdjacency>,
        system: SystemConfig,
    ) -> Result<Self> {
        system.validate()?;
        if beams.is_empty() {
            return Err(Error::validation("scenario has no beams"));
        }
        beams.sort_by_key(|b| b.id);
        for (idx, b) in beams.iter().enumerate() {
            if b.id != idx + 1 {
                return Err(Error::validation(format!(
                    "beam ids must be unique and contiguous 1..{}; found id {} at position {}",
                    beams.len(),
                    b.id,
                    idx + 1
                )));
            }
            if !(b.demand_bps.is_finite() && b.demand_bps >= 0.0) {
                return Err(Error::validation(format!(
                    "beam {} has invalid demand {}",
                    b.id, b.demand_bps
                )));
            }
            if !(b.center[0].is_finite() && b.center[1].is_finite()) {
                return Err(Error::validation(format!(
                    "beam {} has a non-finite center",
                    b.id
                )));
            }
        }
        let members = clusters
            .into_iter()
            .enumerate()
            .map(|(j, ids)| {
                ids.into_iter()
                    .map(|id| {
                        if id == 0 {
                            Err(Error::validation(format!(
                                "cluster {} references beam id 0 (ids are 1-based)",
                                j + 1
                            )))
                        } else {
                            Ok(id - 1)
                        }
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let map = ClusterMap::new(beams.len(), members)?;
        let (adjacency, adjacency_derived) = match adjacency {
            Some(a) => {
                if a.len() != map.n_clusters() {
                    return Err(Error::validation(format!(
                        "adjacency is {0}x{0} but there are {1} clusters",
                        a.len(),
                        map.n_clusters()
                    )));
                }
                (a, false)
            }
            None => {
                let threshold = system
                    .adjacency_threshold_deg
                    .unwrap_or_else(|| DEFAULT_ADJACENCY_FACTOR * nominal_pitch(&beams));
                (derive_adjacency(&beams, &map, threshold), true)
            }
        };
        Ok(Self {
            beams,
            clusters: map,
            adjacency,
            adjacency_derived,
            system,
        })
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            what: "scenario".into(),
            message: e.to_string(),
        })?;
        let beams = file
            .beams
            .into_iter()
            .map(|b| Beam {
                id: b.id,
                center: [b.u, b.v],
                demand_bps: b.demand_bps,
            })
            .collect();
        let adjacency = file
            .adjacency
            .as_deref()
            .map(ClusterAdjacency::from_rows)
            .transpose()?;
        Self::new(beams, file.clusters, adjacency, file.system)
    }

    /// Serializes back to the scenario file format. Derived adjacency is
    /// omitted so it is re-derived on load.
    pub fn to_json_string(&self) -> String {
        let file = ScenarioFile {
            beams: self
                .beams
                .iter()
                .map(|b| BeamRecord {
                    id: b.id,
                    u: b.center[0],
                    v: b.center[1],
                    demand_bps: b.demand_bps,
                })
                .collect(),
            clusters: self
                .clusters
                .all_members()
                .iter()
                .map(|m| m.iter().map(|&b| b + 1).collect())
                .collect(),
            adjacency: (!self.adjacency_derived).then(|| {
                self.adjacency
                    .to_rows()
                    .into_iter()
                    .map(|r| r.into_iter().map(i64::from).collect())
                    .collect()
            }),
            system: self.system,
        };
        serde_json::to_string_pretty(&file).expect("scenario serializes")
    }

    /// Same scenario with a different per-beam demand vector (indexed by
    /// 0-based beam index).
    pub fn with_demands(&self, demands: &[f64]) -> Result<Self> {
        if demands.len() != self.beams.len() {
            return Err(Error::validation(format!(
                "expected {} demands, got {}",
                self.beams.len(),
                demands.len()
            )));
        }
        let mut out = self.clone();
        for (b, &d) in out.beams.iter_mut().zip(demands) {
            if !(d.is_finite() && d >= 0.0) {
                return Err(Error::validation(format!(
                    "beam {} has invalid demand {d}",
                    b.id
                )));
            }
            b.demand_bps = d;
        }
        Ok(out)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        let mut out = self.clone();
        out.system.seed = seed;
        out
    }

    pub fn beams(&self) -> &[Beam] {
        &self.beams
    }

    pub fn clusters(&self) -> &ClusterMap {
        &self.clusters
    }

    pub fn adjacency(&self) -> &ClusterAdjacency {
        &self.adjacency
    }

    pub fn adjacency_derived(&self) -> bool {
        self.adjacency_derived
    }

    pub fn system(&self) -> &SystemConfig {
        &self.system
    }

    pub fn n_beams(&self) -> usize {
        self.beams.len()
    }

    pub fn n_clusters(&self) -> usize {
        self.clusters.n_clusters()
    }

    pub fn demands(&self) -> Vec<f64> {
        self.beams.iter().map(|b| b.demand_bps).collect()
    }

    /// Beam adjacency threshold in effect (degrees).
    pub fn adjacency_threshold_deg(&self) -> f64 {
        self.system
            .adjacency_threshold_deg
            .unwrap_or_else(|| DEFAULT_ADJACENCY_FACTOR * nominal_pitch(&self.beams))
    }

    /// For every beam, the indices of beams within the adjacency threshold.
    pub fn beam_neighbors(&self) -> Vec<Vec<usize>> {
        beam_neighbors(&self.beams, self.adjacency_threshold_deg())
    }
}

fn distance(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Smallest nearest-neighbour distance between beam centers. Zero for a
/// single beam.
pub fn nominal_pitch(beams: &[Beam]) -> f64 {
    let mut pitch = f64::INFINITY;
    for (i, a) in beams.iter().enumerate() {
        for b in &beams[i + 1..] {
            pitch = pitch.min(distance(&a.center, &b.center));
        }
    }
    if pitch.is_finite() {
        pitch
    } else {
        0.0
    }
}

pub fn beam_neighbors(beams: &[Beam], threshold: f64) -> Vec<Vec<usize>> {
    (0..beams.len())
        .map(|i| {
            (0..beams.len())
                .filter(|&k| k != i && distance(&beams[i].center, &beams[k].center) <= threshold)
                .collect()
        })
        .collect()
}

/// Clusters are adjacent when any beam of one lies within `threshold` of
/// any beam of the other.
pub fn derive_adjacency(beams: &[Beam], map: &ClusterMap, threshold: f64) -> ClusterAdjacency {
    let mut adj = ClusterAdjacency::empty(map.n_clusters());
    for (i, a) in beams.iter().enumerate() {
        for (k, b) in beams.iter().enumerate().skip(i + 1) {
            let (ci, ck) = (map.cluster_of(i), map.cluster_of(k));
            if ci != ck && distance(&a.center, &b.center) <= threshold {
                adj.connect(ci, ck);
            }
        }
    }
    adj
}

/// Per-cluster aggregated demand.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterDemand {
    /// `d_j`, bits per second.
    pub bps: Vec<f64>,
    /// `m_j = T_H * d_j`, bits per hopping window.
    pub bits_per_window: Vec<f64>,
}

pub fn aggregate_and_scale_demands(scenario: &Scenario) -> ClusterDemand {
    let window = scenario.system.hopping_window_s();
    let bps: Vec<f64> = scenario
        .clusters
        .all_members()
        .iter()
        .map(|m| m.iter().map(|&b| scenario.beams[b].demand_bps).sum())
        .collect();
    let bits_per_window = bps.iter().map(|d| window * d).collect();
    ClusterDemand {
        bps,
        bits_per_window,
    }
}
