//! Non-precoded comparison schemes: 4-color frequency reuse (4C FR) and
//! 1-color full-frequency-reuse beam hopping (1C FFR BH).
//!
//! Both are evaluated at beam level with the same gain model as the
//! precoded channel, every active feed radiating `P_T / N_B`. Neither
//! looks at demands, so their offered vectors depend only on geometry and
//! link budget.

use log::warn;
use serde::Serialize;

use crate::channel::{link_power_gain, noise_power};
use crate::dvbs2::Dvbs2Table;
use crate::scenario::Scenario;

/// Colors of the 4C FR scheme: frequency half `c / 2`, polarization `c % 2`.
pub const FOUR_COLORS: usize = 4;
/// Target number of beam-hopping groups (illumination ratio 1/4).
pub const BH_GROUPS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Scheme {
    #[serde(rename = "ch")]
    ClusterHopping,
    #[serde(rename = "4c_fr")]
    FourColor,
    #[serde(rename = "1c_ffr_bh")]
    BeamHopping,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [
        Scheme::ClusterHopping,
        Scheme::FourColor,
        Scheme::BeamHopping,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Scheme::ClusterHopping => "ch",
            Scheme::FourColor => "4c_fr",
            Scheme::BeamHopping => "1c_ffr_bh",
        }
    }
}

/// How a benchmark was configured, echoed into reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BenchmarkConfig {
    FourColor {
        /// Color of each beam, in beam order.
        colors: Vec<usize>,
        /// Adjacent beam pairs sharing a color (0 when coloring succeeded).
        conflicts: usize,
        bandwidth_fraction: f64,
        polarizations_per_beam: usize,
        power_per_beam_w: f64,
    },
    BeamHopping {
        /// 1-based beam ids of each group.
        groups: Vec<Vec<usize>>,
        dwell_fraction: f64,
        bandwidth_fraction: f64,
        polarizations_per_beam: usize,
        power_per_beam_w: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkResult {
    pub scheme: Scheme,
    /// Offered capacity per beam, bits per second.
    pub offered_bps: Vec<f64>,
    /// SNIR of each beam while it is active (linear).
    pub beam_snir: Vec<f64>,
    pub config: BenchmarkConfig,
}

/// Greedy coloring in beam order with the smallest color unused by already
/// colored neighbours. When every color is taken, the color with the fewest
/// clashes is used and the clash is counted.
pub fn four_coloring(neighbors: &[Vec<usize>]) -> (Vec<usize>, usize) {
    let n = neighbors.len();
    let mut colors: Vec<Option<usize>> = vec![None; n];
    for b in 0..n {
        let mut clashes = [0usize; FOUR_COLORS];
        for &k in &neighbors[b] {
            if let Some(c) = colors[k] {
                clashes[c] += 1;
            }
        }
        let best = (0..FOUR_COLORS)
            .min_by_key(|&c| (clashes[c], c))
            .expect("four colors");
        colors[b] = Some(best);
    }
    let colors: Vec<usize> = colors.into_iter().map(|c| c.expect("colored")).collect();
    let conflicts = (0..n)
        .flat_map(|b| neighbors[b].iter().map(move |&k| (b, k)))
        .filter(|&(b, k)| b < k && colors[b] == colors[k])
        .count();
    (colors, conflicts)
}

pub fn four_color_evaluate(scenario: &Scenario, table: &Dvbs2Table) -> BenchmarkResult {
    let n = scenario.n_beams();
    let sys = scenario.system();
    let (colors, conflicts) = four_coloring(&scenario.beam_neighbors());
    if conflicts > 0 {
        warn!("4-color reuse: {conflicts} adjacent beam pairs share a color");
    }
    let power = sys.power_per_beam_w(n);
    let tau = noise_power(sys) / 2.0;
    let rate_per_se = sys.symbol_rate() / 2.0;

    let beam_snir: Vec<f64> = (0..n)
        .map(|k| {
            let signal = power * link_power_gain(scenario, k, k);
            let interference: f64 = (0..n)
                .filter(|&i| i != k && colors[i] == colors[k])
                .map(|i| power * link_power_gain(scenario, k, i))
                .sum();
            signal / (interference + tau)
        })
        .collect();
    let offered_bps = beam_snir
        .iter()
        .map(|&s| table.efficiency(s) * rate_per_se)
        .collect();
    BenchmarkResult {
        scheme: Scheme::FourColor,
        offered_bps,
        beam_snir,
        config: BenchmarkConfig::FourColor {
            colors,
            conflicts,
            bandwidth_fraction: 0.5,
            polarizations_per_beam: 1,
            power_per_beam_w: power,
        },
    }
}

/// Splits beams into groups of pairwise non-adjacent beams. Beams are placed
/// in index order into the admissible group whose nearest member is
/// farthest away (empty groups first), ties going to the smaller group and
/// then the lower index. A new group is opened only when no admissible
/// group exists.
pub fn hopping_groups(scenario: &Scenario, target: usize) -> Vec<Vec<usize>> {
    let neighbors = scenario.beam_neighbors();
    let beams = scenario.beams();
    let dist = |a: usize, b: usize| {
        let (p, q) = (beams[a].center, beams[b].center);
        (p[0] - q[0]).hypot(p[1] - q[1])
    };
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); target.max(1)];
    for (b, near) in neighbors.iter().enumerate() {
        let best = groups
            .iter()
            .enumerate()
            .filter(|(_, g)| g.iter().all(|k| !near.contains(k)))
            .map(|(gi, g)| {
                let spread = g.iter().map(|&k| dist(b, k)).fold(f64::INFINITY, f64::min);
                (gi, spread, g.len())
            })
            .fold(None::<(usize, f64, usize)>, |acc, c| match acc {
                Some(a) if a.1 > c.1 || (a.1 == c.1 && a.2 <= c.2) => Some(a),
                _ => Some(c),
            });
        match best {
            Some((gi, _, _)) => groups[gi].push(b),
            None => groups.push(vec![b]),
        }
    }
    groups.retain(|g| !g.is_empty());
    groups
}

pub fn bh_evaluate(scenario: &Scenario, table: &Dvbs2Table) -> BenchmarkResult {
    let n = scenario.n_beams();
    let sys = scenario.system();
    let groups = hopping_groups(scenario, BH_GROUPS);
    if groups.len() > BH_GROUPS {
        warn!(
            "beam hopping: adjacency forced {} groups instead of {BH_GROUPS}; dwell is 1/{}",
            groups.len(),
            groups.len()
        );
    }
    let dwell = 1.0 / groups.len() as f64;
    let power = sys.power_per_beam_w(n);
    let tau = noise_power(sys);
    let rate_per_se = sys.symbol_rate() * sys.polarization_factor();

    let mut beam_snir = vec![0.0; n];
    let mut offered_bps = vec![0.0; n];
    for group in &groups {
        for &k in group {
            let signal = power * link_power_gain(scenario, k, k);
            let interference: f64 = group
                .iter()
                .filter(|&&i| i != k)
                .map(|&i| power * link_power_gain(scenario, k, i))
                .sum();
            let s = signal / (interference + tau);
            beam_snir[k] = s;
            offered_bps[k] = dwell * table.efficiency(s) * rate_per_se;
        }
    }
    let ids = groups
        .iter()
        .map(|g| g.iter().map(|&b| scenario.beams()[b].id).collect())
        .collect();
    BenchmarkResult {
        scheme: Scheme::BeamHopping,
        offered_bps,
        beam_snir,
        config: BenchmarkConfig::BeamHopping {
            groups: ids,
            dwell_fraction: dwell,
            bandwidth_fraction: 1.0,
            polarizations_per_beam: sys.polarization_factor() as usize,
            power_per_beam_w: power,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::tests::toy_system;
    use crate::scenario::Beam;

    fn row_of_beams(n: usize, pitch: f64) -> Scenario {
        let beams = (0..n)
            .map(|i| Beam {
                id: i + 1,
                center: [i as f64 * pitch, 0.0],
                demand_bps: 1e8,
            })
            .collect();
        Scenario::new(beams, vec![(1..=n).collect()], None, toy_system()).unwrap()
    }

    #[test]
    fn isolated_beam_sees_only_noise() {
        let sc = row_of_beams(1, 0.45);
        let table = Dvbs2Table::bundled();
        let sys = sc.system();
        let snr = sys.power_per_beam_w(1) * link_power_gain(&sc, 0, 0) / (noise_power(sys) / 2.0);
        let fr = four_color_evaluate(&sc, &table);
        assert!((fr.beam_snir[0] - snr).abs() <= 1e-12 * snr);
        let expected = table.efficiency(snr) * sys.bandwidth_hz / 2.0 / (1.0 + sys.rolloff);
        assert!((fr.offered_bps[0] - expected).abs() <= 1e-9 * expected);

        let bh = bh_evaluate(&sc, &table);
        let snr = sys.power_per_beam_w(1) * link_power_gain(&sc, 0, 0) / noise_power(sys);
        let expected = table.efficiency(snr) * 2.0 * sys.bandwidth_hz / (1.0 + sys.rolloff);
        assert!((bh.offered_bps[0] - expected).abs() <= 1e-9 * expected);
    }

    #[test]
    fn coloring_a_path_never_clashes() {
        let neighbors: Vec<Vec<usize>> = (0..6)
            .map(|i: usize| {
                [i.wrapping_sub(1), i + 1]
                    .into_iter()
                    .filter(|&k| k < 6)
                    .collect()
            })
            .collect();
        let (colors, conflicts) = four_coloring(&neighbors);
        assert_eq!(conflicts, 0);
        assert_eq!(colors, vec![0, 1, 0, 1, 0, 1]);
    }

    #[test]
    fn five_clique_needs_one_clash() {
        let neighbors: Vec<Vec<usize>> = (0..5)
            .map(|i| (0..5).filter(|&k| k != i).collect())
            .collect();
        let (_, conflicts) = four_coloring(&neighbors);
        assert_eq!(conflicts, 1);
    }

    #[test]
    fn groups_on_a_line_are_non_adjacent() {
        let sc = row_of_beams(9, 0.45);
        let groups = hopping_groups(&sc, 4);
        assert_eq!(groups.len(), 4);
        let neighbors = sc.beam_neighbors();
        for g in &groups {
            for &a in g {
                assert!(g.iter().all(|b| !neighbors[a].contains(b)));
            }
        }
        let sizes: Vec<usize> = groups.iter().map(Vec::len).collect();
        assert_eq!(sizes.iter().sum::<usize>(), 9);
    }

    #[test]
    fn offered_ignores_demands() {
        let sc = row_of_beams(5, 0.45);
        let other = sc.with_demands(&[5e8, 0.0, 1e6, 3e7, 2e8]).unwrap();
        let table = Dvbs2Table::bundled();
        assert_eq!(
            four_color_evaluate(&sc, &table),
            four_color_evaluate(&other, &table)
        );
        assert_eq!(bh_evaluate(&sc, &table), bh_evaluate(&other, &table));
    }
}
