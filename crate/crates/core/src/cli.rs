//! Command-line front end: scenario in, plan / capacity / comparison
//! artifacts out.
//!
//! Every subcommand except `validate` writes into `--out` and finishes by
//! writing `knobs.json`, which records the modelling choices in effect and
//! the files emitted. Outputs depend only on the scenario file and flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::benchmarks::{bh_evaluate, four_color_evaluate, Scheme, BH_GROUPS};
use crate::channel::{build_all_channels, noise_power, ClusterChannel};
use crate::dvbs2::Dvbs2Table;
use crate::error::{Error, Result};
use crate::metrics::{cross_cluster_leakage, redistribute, score, CapacityReport};
use crate::planner::{
    brute_force_plan, greedy_plan, lp_relaxation_bound, solve_illumination, HoppingPlan,
    IlpInstance, DEFAULT_ORACLE_CAP,
};
use crate::precoding::{cluster_capacities, CapacityVector};
use crate::scenario::{aggregate_and_scale_demands, load_scenario, ClusterDemand, Scenario};
use crate::snapshots::{SnapshotSet, DEFAULT_CANDIDATE_CAP};

#[derive(Debug, Parser)]
#[command(
    name = "clusterhop",
    version,
    about = "Precoded cluster-hopping planner for multi-beam satellites"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load and validate a scenario.
    Validate(CommonArgs),
    /// Per-beam and per-cluster precoded capacities.
    Capacity(CommonArgs),
    /// Valid snapshot matrix V.
    Snapshots(CommonArgs),
    /// Solve the illumination plan.
    Plan(CommonArgs),
    /// Plan and compare against the 4C FR and 1C FFR BH benchmarks.
    Compare(CommonArgs),
    /// Per-slot cross-cluster leakage of the plan.
    Leakage(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Scenario JSON file.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = SolverChoice::Ilp)]
    pub solver: SolverChoice,
    /// Overrides the scenario's channel-phase seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// CSV of `threshold_db,se_bits_per_symbol` replacing the bundled table.
    #[arg(long)]
    pub dvbs2_table: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    Ilp,
    Greedy,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Validate,
    Capacity,
    Snapshots,
    Plan,
    Compare,
    Leakage,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub action: Action,
    pub scenario: PathBuf,
    pub out: PathBuf,
    pub solver: SolverChoice,
    pub schemes: Vec<Scheme>,
    pub seed: Option<u64>,
    pub dvbs2_table: Option<PathBuf>,
}

impl From<Cli> for RunManifest {
    fn from(cli: Cli) -> Self {
        let (action, args) = match cli.command {
            Command::Validate(a) => (Action::Validate, a),
            Command::Capacity(a) => (Action::Capacity, a),
            Command::Snapshots(a) => (Action::Snapshots, a),
            Command::Plan(a) => (Action::Plan, a),
            Command::Compare(a) => (Action::Compare, a),
            Command::Leakage(a) => (Action::Leakage, a),
        };
        let schemes = if action == Action::Compare {
            Scheme::ALL.to_vec()
        } else {
            vec![Scheme::ClusterHopping]
        };
        Self {
            action,
            scenario: args.scenario,
            out: args.out,
            solver: args.solver,
            schemes,
            seed: args.seed,
            dvbs2_table: args.dvbs2_table,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    /// One-line human summary for stdout.
    pub summary: String,
    /// Files written, in emission order.
    pub files: Vec<PathBuf>,
}

/// Everything derived from a scenario before planning.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub scenario: Scenario,
    pub table: Dvbs2Table,
    pub channels: Vec<ClusterChannel>,
    pub capacity: CapacityVector,
    pub demand: ClusterDemand,
}

impl Pipeline {
    pub fn new(scenario: Scenario, table: Dvbs2Table) -> Result<Self> {
        let channels = build_all_channels(&scenario);
        let capacity = cluster_capacities(&scenario, &channels, &table)?;
        let demand = aggregate_and_scale_demands(&scenario);
        Ok(Self {
            scenario,
            table,
            channels,
            capacity,
            demand,
        })
    }

    pub fn snapshots(&self) -> Result<SnapshotSet> {
        SnapshotSet::build(
            self.scenario.adjacency(),
            self.scenario.system().clusters_per_slot,
            &self.capacity.slot_bits,
        )
    }

    pub fn instance(&self, snapshots: &SnapshotSet) -> Result<IlpInstance> {
        IlpInstance::new(
            snapshots.supply().clone(),
            self.demand.bits_per_window.clone(),
            self.scenario.system().slots_per_window,
        )
    }

    pub fn plan(&self, snapshots: &SnapshotSet, solver: SolverChoice) -> Result<HoppingPlan> {
        let instance = self.instance(snapshots)?;
        match solver {
            SolverChoice::Ilp => solve_illumination(&instance),
            SolverChoice::Greedy => greedy_plan(&instance),
            SolverChoice::Oracle => brute_force_plan(&instance, DEFAULT_ORACLE_CAP),
        }
    }

    /// Offered capacity per cluster in bits per second for a plan.
    pub fn cluster_offered_bps(&self, plan: &HoppingPlan) -> Vec<f64> {
        let window = self.scenario.system().hopping_window_s();
        plan.offered_bits.iter().map(|b| b / window).collect()
    }

    /// Demand-matching report of the cluster-hopping plan.
    pub fn ch_report(&self, plan: &HoppingPlan) -> CapacityReport {
        let beams = redistribute(&self.cluster_offered_bps(plan), &self.scenario);
        score(&beams, &self.scenario, Scheme::ClusterHopping.id())
    }
}

pub fn load_pipeline(manifest: &RunManifest) -> Result<Pipeline> {
    let mut scenario = load_scenario(&manifest.scenario)?;
    if let Some(seed) = manifest.seed {
        scenario = scenario.with_seed(seed);
    }
    let table = match &manifest.dvbs2_table {
        Some(path) => Dvbs2Table::from_path(path)?,
        None => Dvbs2Table::bundled(),
    };
    Pipeline::new(scenario, table)
}

struct Emitter {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Emitter {
    fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.files.push(path);
        Ok(())
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).expect("output serializes");
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    fn csv(
        &mut self,
        name: &str,
        fill: impl FnOnce(&mut Vec<u8>) -> csv::Result<()>,
    ) -> Result<()> {
        let mut buf = Vec::new();
        fill(&mut buf).expect("in-memory CSV write");
        self.write(name, &buf)
    }
}

pub fn run(manifest: &RunManifest) -> Result<RunOutput> {
    if manifest.action == Action::Validate {
        let scenario = load_scenario(&manifest.scenario)?;
        return Ok(RunOutput {
            summary: format!(
                "valid beams={} clusters={} adjacency={}",
                scenario.n_beams(),
                scenario.n_clusters(),
                if scenario.adjacency_derived() {
                    "derived"
                } else {
                    "explicit"
                }
            ),
            files: Vec::new(),
        });
    }

    let pipe = load_pipeline(manifest)?;
    let mut out = Emitter::new(&manifest.out)?;
    let summary = match manifest.action {
        Action::Validate => unreachable!(),
        Action::Capacity => emit_capacity(&pipe, &mut out)?,
        Action::Snapshots => {
            let snaps = pipe.snapshots()?;
            out.csv("snapshots.csv", |w| snaps.write_csv(w))?;
            format!("snapshots={}", snaps.len())
        }
        Action::Plan => {
            let snaps = pipe.snapshots()?;
            let plan = pipe.plan(&snaps, manifest.solver)?;
            emit_plan(&pipe, &snaps, &plan, manifest.solver, &mut out)?
        }
        Action::Compare => {
            let snaps = pipe.snapshots()?;
            let plan = pipe.plan(&snaps, manifest.solver)?;
            emit_plan(&pipe, &snaps, &plan, manifest.solver, &mut out)?;
            emit_compare(&pipe, &plan, &mut out)?
        }
        Action::Leakage => {
            let snaps = pipe.snapshots()?;
            let plan = pipe.plan(&snaps, manifest.solver)?;
            let report =
                cross_cluster_leakage(&pipe.scenario, &pipe.channels, &snaps, &plan.schedule)?;
            out.csv("leakage.csv", |w| report.write_csv(w))?;
            format!(
                "slots={} worst_leakage_ratio={}",
                report.slots.len(),
                report.worst_ratio
            )
        }
    };
    let mut listing: Vec<String> = out.files.iter().map(|p| file_name(p)).collect();
    listing.push("knobs.json".into());
    out.json("knobs.json", &knobs(manifest, &pipe, &listing))?;
    Ok(RunOutput {
        summary,
        files: out.files,
    })
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn emit_capacity(pipe: &Pipeline, out: &mut Emitter) -> Result<String> {
    let sc = &pipe.scenario;
    let cap = &pipe.capacity;
    out.csv("capacity_beams.csv", |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record([
            "beam_id",
            "cluster_id",
            "snir_db",
            "offered_bps",
            "demand_bps",
        ])?;
        for (b, beam) in sc.beams().iter().enumerate() {
            w.write_record([
                beam.id.to_string(),
                (sc.clusters().cluster_of(b) + 1).to_string(),
                (10.0 * cap.beam_snir[b].log10()).to_string(),
                cap.beam_bps[b].to_string(),
                beam.demand_bps.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    })?;
    out.csv("capacity_clusters.csv", |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record([
            "cluster_id",
            "n_beams",
            "capacity_bps",
            "slot_bits",
            "demand_bps",
            "demand_bits_per_window",
        ])?;
        for j in 0..sc.n_clusters() {
            w.write_record([
                (j + 1).to_string(),
                sc.clusters().size(j).to_string(),
                cap.cluster_bps[j].to_string(),
                cap.slot_bits[j].to_string(),
                pipe.demand.bps[j].to_string(),
                pipe.demand.bits_per_window[j].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    })?;
    let channels: Vec<serde_json::Value> =
        pipe.channels.iter().map(ClusterChannel::to_json).collect();
    out.json("channels.json", &channels)?;
    Ok(format!(
        "clusters={} total_capacity_bps={}",
        sc.n_clusters(),
        cap.cluster_bps.iter().sum::<f64>()
    ))
}

fn emit_plan(
    pipe: &Pipeline,
    snaps: &SnapshotSet,
    plan: &HoppingPlan,
    solver: SolverChoice,
    out: &mut Emitter,
) -> Result<String> {
    let psi: BTreeMap<usize, usize> = plan
        .psi
        .iter()
        .enumerate()
        .filter(|(_, &k)| k > 0)
        .map(|(i, &k)| (i, k))
        .collect();
    let active: Vec<serde_json::Value> = plan
        .active_snapshots()
        .into_iter()
        .map(|i| {
            json!({
                "index": i,
                "cluster_ids": snaps.members(i).iter().map(|j| j + 1).collect::<Vec<_>>(),
                "v": snaps.column(i),
                "slots": plan.psi[i],
            })
        })
        .collect();
    let demand = &pipe.demand.bits_per_window;
    let ratios: Vec<Option<f64>> = plan
        .offered_bits
        .iter()
        .zip(demand)
        .map(|(s, m)| (*m > 0.0).then(|| s / m))
        .collect();
    let lp_bound = lp_relaxation_bound(&pipe.instance(snaps)?)?;
    let doc = json!({
        "solver": solver,
        "status": plan.status,
        "n_slot": pipe.scenario.system().slots_per_window,
        "n_snapshots": snaps.len(),
        "t": finite_or_null(plan.t),
        "lp_bound": finite_or_null(lp_bound),
        "psi": psi,
        "active_snapshots": active,
        "s_bits": plan.offered_bits,
        "demand_bits_per_window": demand,
        "ratios": ratios,
        "schedule": plan.schedule,
    });
    out.json("plan.json", &doc)?;
    Ok(format!(
        "status={} t={} active_snapshots={}",
        serde_json::to_value(plan.status)
            .expect("status")
            .as_str()
            .unwrap_or_default(),
        plan.t,
        psi.len()
    ))
}

fn finite_or_null(x: f64) -> serde_json::Value {
    if x.is_finite() {
        json!(x)
    } else {
        serde_json::Value::Null
    }
}

fn emit_compare(pipe: &Pipeline, plan: &HoppingPlan, out: &mut Emitter) -> Result<String> {
    let fr = four_color_evaluate(&pipe.scenario, &pipe.table);
    let bh = bh_evaluate(&pipe.scenario, &pipe.table);
    let reports = [
        pipe.ch_report(plan),
        score(&fr.offered_bps, &pipe.scenario, Scheme::FourColor.id()),
        score(&bh.offered_bps, &pipe.scenario, Scheme::BeamHopping.id()),
    ];
    let mut summary = serde_json::Map::new();
    for r in &reports {
        out.csv(&format!("report_{}_beams.csv", r.scheme), |w| {
            r.write_beam_csv(w)
        })?;
        out.csv(&format!("report_{}_clusters.csv", r.scheme), |w| {
            r.write_cluster_csv(w)
        })?;
        summary.insert(
            r.scheme.clone(),
            json!({
                "unmet_bps": r.unmet_bps,
                "unused_bps": r.unused_bps,
                "min_ratio": r.min_ratio,
                "offered_total_bps": r.beams.iter().map(|b| b.offered_bps).sum::<f64>(),
                "demand_total_bps": r.beams.iter().map(|b| b.demand_bps).sum::<f64>(),
            }),
        );
    }
    summary.insert(
        "benchmark_config".into(),
        json!({"4c_fr": fr.config, "1c_ffr_bh": bh.config}),
    );
    out.json("summary.json", &summary)?;
    Ok(reports
        .iter()
        .map(|r| {
            format!(
                "{}: unmet={:.4e} unused={:.4e}",
                r.scheme, r.unmet_bps, r.unused_bps
            )
        })
        .collect::<Vec<_>>()
        .join("; "))
}

fn knobs(manifest: &RunManifest, pipe: &Pipeline, files: &[String]) -> serde_json::Value {
    let sc = &pipe.scenario;
    let sys = sc.system();
    json!({
        "manifest": manifest,
        "seed": sys.seed,
        "dvbs2_table": manifest
            .dvbs2_table
            .as_ref()
            .map_or_else(|| "bundled".to_string(), |p| p.display().to_string()),
        "adjacency": if sc.adjacency_derived() { "derived" } else { "explicit" },
        "adjacency_threshold_deg": sc.adjacency_threshold_deg(),
        "gain_model": "gaussian_taper",
        "gain_rx_dBi": sys.gain_rx_dbi,
        "slant_range_m": sys.slant_range_m,
        "noise_power_w": noise_power(sys),
        "power_per_beam_w": sys.power_per_beam_w(sc.n_beams()),
        "precoder": "mmse_diag_tau_over_p",
        "precoder_scaling": "sqrt_per_feed_max",
        "polarization_factor": sys.polarization_factor(),
        "snapshot_candidate_cap": DEFAULT_CANDIDATE_CAP.to_string(),
        "oracle_cap": DEFAULT_ORACLE_CAP.to_string(),
        "ilp_tie_break": "lexicographic_min_psi",
        "greedy_tie_break": "leximin_then_lowest_index",
        "schedule_order": "largest_deficit_then_lowest_index",
        "redistribution": "proportional_equal_if_zero_demand",
        "benchmark_4c_fr": "2_freq_halves_x_2_pol_greedy_coloring",
        "benchmark_bh_target_groups": BH_GROUPS,
        "benchmark_power": "p_t_over_n_b_per_active_beam",
        "files": files,
    })
}
