//! Parametric forward-link channel between feeds and beam-center users.
//!
//! `H[k, i]` is the complex amplitude gain from the feed of beam `i` to the
//! user at the center of beam `k`, normalized so that a feed radiating `P`
//! watts delivers `|H[k, i]|^2 * P` watts. Noise powers `tau` are carried
//! explicitly in watts.
//!
//! Magnitudes follow a Gaussian beam taper, a fixed receive gain and the
//! free-space loss at the configured slant range. Phases are uniform on
//! `[0, 2pi)` and drawn from a ChaCha stream keyed by `(seed, rx beam,
//! tx beam)`, so any block of the matrix can be built independently and
//! still agree with the full system matrix.

use std::f64::consts::{LN_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scenario::{Scenario, SystemConfig};

pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Transmit power gain at `offaxis` radians from boresight:
/// `G_peak * exp(-4 ln2 (theta / theta_3dB)^2)` with `theta_3dB` the full
/// half-power width.
pub fn beam_gain(offaxis: f64, config: &SystemConfig) -> f64 {
    let width = config.beamwidth_3db_deg.to_radians();
    let x = offaxis / width;
    db_to_linear(config.gain_peak_dbi) * (-4.0 * LN_2 * x * x).exp()
}

/// Free-space path loss (linear, > 1).
pub fn free_space_loss(distance_m: f64, carrier_hz: f64) -> f64 {
    let x = 4.0 * PI * distance_m * carrier_hz / SPEED_OF_LIGHT;
    x * x
}

/// Thermal noise power `k_B * T_sys * B_W` in watts.
pub fn noise_power(config: &SystemConfig) -> f64 {
    BOLTZMANN * config.system_temp_k * config.bandwidth_hz
}

/// Deterministic phase for the link from beam `tx_id` to the user of beam
/// `rx_id` (1-based ids).
pub fn link_phase(seed: u64, rx_id: usize, tx_id: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((rx_id as u64) << 32) | tx_id as u64);
    rng.gen::<f64>() * 2.0 * PI
}

fn offaxis_rad(scenario: &Scenario, rx: usize, tx: usize) -> f64 {
    let a = scenario.beams()[rx].center;
    let b = scenario.beams()[tx].center;
    (a[0] - b[0]).hypot(a[1] - b[1]).to_radians()
}

/// Power gain `|H[rx, tx]|^2` for two beam indices.
pub fn link_power_gain(scenario: &Scenario, rx: usize, tx: usize) -> f64 {
    let sys = scenario.system();
    beam_gain(offaxis_rad(scenario, rx, tx), sys) * db_to_linear(sys.gain_rx_dbi)
        / free_space_loss(sys.slant_range_m, sys.carrier_hz)
}

fn link_gain(scenario: &Scenario, rx: usize, tx: usize) -> Complex64 {
    let magnitude = link_power_gain(scenario, rx, tx).sqrt();
    let beams = scenario.beams();
    let phase = link_phase(scenario.system().seed, beams[rx].id, beams[tx].id);
    Complex64::from_polar(magnitude, phase)
}

/// Channel block between the users of `rx` and the feeds of `tx` (beam
/// indices).
pub fn channel_block(scenario: &Scenario, rx: &[usize], tx: &[usize]) -> DMatrix<Complex64> {
    DMatrix::from_fn(rx.len(), tx.len(), |r, c| link_gain(scenario, rx[r], tx[c]))
}

/// Channel of one cluster: users and feeds are the cluster's own beams.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterChannel {
    pub cluster_id: usize,
    pub h: DMatrix<Complex64>,
    pub tau: Vec<f64>,
}

impl ClusterChannel {
    pub fn size(&self) -> usize {
        self.tau.len()
    }

    /// Debug dump with complex entries as `[re, im]` pairs, row-major.
    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Dump<'a> {
            cluster_id: usize,
            h: Vec<Vec<[f64; 2]>>,
            tau: &'a [f64],
        }
        let h = (0..self.h.nrows())
            .map(|r| {
                (0..self.h.ncols())
                    .map(|c| [self.h[(r, c)].re, self.h[(r, c)].im])
                    .collect()
            })
            .collect();
        serde_json::to_value(Dump {
            cluster_id: self.cluster_id + 1,
            h,
            tau: &self.tau,
        })
        .expect("channel dump serializes")
    }
}

pub fn build_cluster_channel(scenario: &Scenario, cluster_id: usize) -> Result<ClusterChannel> {
    if cluster_id >= scenario.n_clusters() {
        return Err(Error::validation(format!(
            "unknown cluster {} (scenario has {})",
            cluster_id + 1,
            scenario.n_clusters()
        )));
    }
    let members = scenario.clusters().members(cluster_id);
    let h = channel_block(scenario, members, members);
    let tau = vec![noise_power(scenario.system()); members.len()];
    Ok(ClusterChannel { cluster_id, h, tau })
}

/// Channels of every cluster, in cluster order.
pub fn build_all_channels(scenario: &Scenario) -> Vec<ClusterChannel> {
    (0..scenario.n_clusters())
        .map(|j| build_cluster_channel(scenario, j).expect("cluster index in range"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::tests::toy_system;
    use crate::scenario::Beam;

    fn hex_cluster() -> Scenario {
        let pitch = 0.45;
        let mut centers = vec![[0.0, 0.0]];
        for k in 0..5 {
            let a = k as f64 * PI / 3.0;
            centers.push([pitch * a.cos(), pitch * a.sin()]);
        }
        let beams = centers
            .iter()
            .enumerate()
            .map(|(i, c)| Beam {
                id: i + 1,
                center: *c,
                demand_bps: 1e8,
            })
            .collect();
        Scenario::new(beams, vec![(1..=6).collect()], None, toy_system()).unwrap()
    }

    #[test]
    fn boresight_gain_is_peak() {
        let sys = toy_system();
        let peak = db_to_linear(sys.gain_peak_dbi);
        assert_eq!(beam_gain(0.0, &sys), peak);
        let width = sys.beamwidth_3db_deg.to_radians();
        assert!((beam_gain(width / 2.0, &sys) / peak - 0.5).abs() < 1e-12);
        assert!((beam_gain(width, &sys) / peak - 1.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn gain_is_monotone() {
        let sys = toy_system();
        let mut prev = f64::INFINITY;
        for k in 0..200 {
            let g = beam_gain(k as f64 * 1e-4, &sys);
            assert!(g <= prev);
            prev = g;
        }
    }

    #[test]
    fn channel_is_deterministic() {
        let sc = hex_cluster();
        let a = build_cluster_channel(&sc, 0).unwrap();
        let b = build_cluster_channel(&sc, 0).unwrap();
        assert_eq!(a, b);
        let c = build_cluster_channel(&sc.with_seed(8), 0).unwrap();
        assert_ne!(a.h, c.h);
    }

    #[test]
    fn single_beam_cluster_has_peak_magnitude() {
        let sys = toy_system();
        let sc = Scenario::new(
            vec![Beam {
                id: 1,
                center: [0.0, 0.0],
                demand_bps: 1.0,
            }],
            vec![vec![1]],
            None,
            sys,
        )
        .unwrap();
        let ch = build_cluster_channel(&sc, 0).unwrap();
        assert_eq!(ch.h.shape(), (1, 1));
        let expected = (db_to_linear(sys.gain_peak_dbi) * db_to_linear(sys.gain_rx_dbi)
            / free_space_loss(sys.slant_range_m, sys.carrier_hz))
        .sqrt();
        assert!((ch.h[(0, 0)].norm() - expected).abs() <= 1e-12 * expected);
        assert!(ch.tau[0] > 0.0);
    }

    #[test]
    fn hex_cluster_is_diagonally_dominant() {
        let sc = hex_cluster();
        let ch = build_cluster_channel(&sc, 0).unwrap();
        assert_eq!(ch.h.shape(), (6, 6));
        for k in 0..6 {
            for i in 0..6 {
                if i != k {
                    assert!(ch.h[(k, k)].norm() > ch.h[(k, i)].norm());
                }
            }
        }
        assert!(ch.tau.iter().all(|&t| t == ch.tau[0] && t > 0.0));
        assert!(ch.h.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
    }

    #[test]
    fn unknown_cluster_is_an_error() {
        assert!(build_cluster_channel(&hex_cluster(), 3).is_err());
    }

    #[test]
    fn block_matches_cluster_channel() {
        let sc = hex_cluster();
        let all: Vec<usize> = (0..6).collect();
        let full = channel_block(&sc, &all, &all);
        let sub = channel_block(&sc, &[2, 4], &[4, 1]);
        assert_eq!(sub[(0, 0)], full[(2, 4)]);
        assert_eq!(sub[(1, 1)], full[(4, 1)]);
    }

    #[test]
    fn dump_uses_re_im_pairs() {
        let ch = build_cluster_channel(&hex_cluster(), 0).unwrap();
        let v = ch.to_json();
        assert_eq!(v["h"][0][1][0].as_f64().unwrap(), ch.h[(0, 1)].re);
        assert_eq!(v["h"][0][1][1].as_f64().unwrap(), ch.h[(0, 1)].im);
    }
}
