//! Regenerates `data/paper71.json`: 71 beams on an offset hexagonal grid,
//! twelve clusters of 2 x 3 beams (one with 5) and a heterogeneous demand
//! profile.
//!
//! The profile starts from hand-set cluster weights with per-beam jitter.
//! Because every slot lights exactly three clusters, an arbitrary profile
//! forces surplus slots onto some clusters. The cluster totals are therefore
//! replaced by what the optimal plan for the raw profile delivers, keeping
//! the within-cluster split, so the bundled profile can be matched.
//!
//! ```text
//! cargo run --release --example gen_paper71 > crates/core/data/paper71.json
//! ```

use clusterhop::cli::{Pipeline, SolverChoice};
use clusterhop::dvbs2::Dvbs2Table;
use clusterhop::planner::lp_relaxation_bound;
use clusterhop::scenario::{Beam, Scenario, SystemConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ROWS: usize = 8;
const COLS: usize = 9;
const PITCH_DEG: f64 = 0.45;

/// Relative demand of each cluster, laid out as 4 row-pairs by 3 column
/// blocks.
const CLUSTER_WEIGHT: [[f64; 3]; 4] = [
    [1.0, 3.2, 1.4],
    [2.6, 0.8, 2.2],
    [1.2, 3.6, 1.0],
    [2.0, 0.9, 2.8],
];

fn main() {
    let system = SystemConfig {
        total_power_w: 6000.0,
        bandwidth_hz: 500e6,
        carrier_hz: 19.5e9,
        rolloff: 0.2,
        slot_s: 1.3e-3,
        slots_per_window: 256,
        clusters_per_slot: 3,
        dual_polarization: true,
        gain_peak_dbi: 50.5,
        beamwidth_3db_deg: 0.52,
        system_temp_k: 260.0,
        seed: 2024,
        gain_rx_dbi: 41.8,
        slant_range_m: 38_000e3,
        adjacency_threshold_deg: None,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let mut beams = Vec::new();
    let mut clusters: Vec<Vec<usize>> = vec![Vec::new(); 12];
    let x0 = (COLS as f64 - 0.5) * PITCH_DEG / 2.0;
    let y0 = (ROWS - 1) as f64 * PITCH_DEG * 3f64.sqrt() / 4.0;
    for r in 0..ROWS {
        for c in 0..COLS {
            if r == ROWS - 1 && c == COLS - 1 {
                continue;
            }
            let shift = if r % 2 == 1 { 0.5 } else { 0.0 };
            let u = (c as f64 + shift) * PITCH_DEG - x0;
            let v = y0 - r as f64 * PITCH_DEG * 3f64.sqrt() / 2.0;
            let weight = CLUSTER_WEIGHT[r / 2][c / 3];
            let jitter: f64 = rng.gen_range(0.6..1.4);
            let id = beams.len() + 1;
            beams.push(Beam {
                id,
                center: [round(u, 6), round(v, 6)],
                demand_bps: weight * jitter,
            });
            clusters[(r / 2) * 3 + c / 3].push(id);
        }
    }

    let table = Dvbs2Table::bundled();
    let shape = Scenario::new(beams.clone(), clusters.clone(), None, system).expect("valid layout");
    let pipe = Pipeline::new(shape.clone(), table.clone()).expect("pipeline");
    let snaps = pipe.snapshots().expect("snapshots");
    let bound = lp_relaxation_bound(&pipe.instance(&snaps).expect("instance")).expect("bound");

    // Scale so the LP bound lands at 1.0 and plan the raw profile.
    let raw = shape
        .with_demands(
            &shape
                .demands()
                .iter()
                .map(|d| d * bound)
                .collect::<Vec<_>>(),
        )
        .expect("demands");
    let raw_pipe = Pipeline::new(raw.clone(), table.clone()).expect("pipeline");
    let raw_plan = raw_pipe.plan(&snaps, SolverChoice::Ilp).expect("plan");
    let delivered = raw_pipe.cluster_offered_bps(&raw_plan);

    let mut demands = raw.demands();
    for (j, members) in raw.clusters().all_members().iter().enumerate() {
        let total: f64 = members.iter().map(|&b| demands[b]).sum();
        for &b in members {
            demands[b] = (delivered[j] * demands[b] / total / 1e3).round() * 1e3;
        }
    }
    let scenario = raw.with_demands(&demands).expect("demands");
    println!("{}", scenario.to_json_string());

    let pipe = Pipeline::new(scenario, table).expect("pipeline");
    let plan = pipe.plan(&snaps, SolverChoice::Ilp).expect("plan");
    eprintln!(
        "snapshots={} t={} status={:?}",
        snaps.len(),
        plan.t,
        plan.status
    );
    eprintln!("active={:?}", plan.active_snapshots());
    eprintln!(
        "cluster capacity (Mbps): {:?}",
        pipe.capacity
            .cluster_bps
            .iter()
            .map(|c| (c / 1e6).round())
            .collect::<Vec<_>>()
    );
    eprintln!(
        "beam SNIR dB range: {:.2}..{:.2}",
        pipe.capacity
            .beam_snir
            .iter()
            .map(|s| 10.0 * s.log10())
            .fold(f64::INFINITY, f64::min),
        pipe.capacity
            .beam_snir
            .iter()
            .map(|s| 10.0 * s.log10())
            .fold(f64::NEG_INFINITY, f64::max)
    );
    let ratios: Vec<f64> = plan
        .offered_bits
        .iter()
        .zip(&pipe.demand.bits_per_window)
        .map(|(s, m)| s / m)
        .collect();
    let spread = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let p_max = pipe.capacity.slot_bits.iter().cloned().fold(0.0, f64::max);
    let m_min = pipe
        .demand
        .bits_per_window
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    eprintln!("ratios={ratios:?}");
    eprintln!("spread={spread} quantum={}", p_max / m_min);
    let spread_of = |v: &[f64]| {
        let nz = v.iter().cloned().filter(|&x| x > 0.0);
        nz.clone().fold(0.0, f64::max) / nz.fold(f64::INFINITY, f64::min)
    };
    eprintln!(
        "beam demand spread={:.2} cluster demand spread={:.2}",
        spread_of(&demands),
        spread_of(&pipe.demand.bps)
    );
}

fn round(x: f64, digits: i32) -> f64 {
    let f = 10f64.powi(digits);
    (x * f).round() / f
}
