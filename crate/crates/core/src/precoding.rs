//! MMSE precoding, per-beam SNIR and cluster capacities.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::channel::ClusterChannel;
use crate::dvbs2::Dvbs2Table;
use crate::error::{Error, Result};
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderResult {
    /// Precoding matrix, rows indexed by feed and columns by stream.
    pub w: DMatrix<Complex64>,
    pub beta: f64,
    /// `{W W^H}_{i,i}` for unit-power symbols, in watts.
    pub per_feed_power: Vec<f64>,
}

fn row_powers(w: &DMatrix<Complex64>) -> Vec<f64> {
    w.row_iter()
        .map(|r| r.iter().map(|z| z.norm_sqr()).sum())
        .collect()
}

/// Regularized inverse precoder `H^H (H H^H + diag(tau) / P)^-1`, scaled by
/// `beta = sqrt(P / max_i {W W^H}_{i,i})` so the strongest feed radiates
/// exactly `P` watts and no feed exceeds it.
pub fn mmse_precoder(channel: &ClusterChannel, power_per_beam: f64) -> Result<PrecoderResult> {
    let n = channel.size();
    if channel.h.shape() != (n, n) {
        return Err(Error::Numeric(format!(
            "cluster {} channel is {:?}, expected {n}x{n}",
            channel.cluster_id + 1,
            channel.h.shape()
        )));
    }
    if !(power_per_beam.is_finite() && power_per_beam > 0.0) {
        return Err(Error::Numeric(format!(
            "per-beam power {power_per_beam} must be > 0"
        )));
    }
    if channel
        .h
        .iter()
        .any(|z| !(z.re.is_finite() && z.im.is_finite()))
    {
        return Err(Error::Numeric(format!(
            "cluster {} channel has non-finite entries",
            channel.cluster_id + 1
        )));
    }
    if channel.tau.iter().any(|&t| !(t.is_finite() && t > 0.0)) {
        return Err(Error::Numeric("noise powers must be > 0".into()));
    }

    let h_adj = channel.h.adjoint();
    let regularizer = DMatrix::from_fn(n, n, |r, c| {
        if r == c {
            Complex64::new(channel.tau[r] / power_per_beam, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let gram = &channel.h * &h_adj + regularizer;
    let inverse = gram.try_inverse().ok_or_else(|| {
        Error::Numeric(format!(
            "regularized Gram matrix of cluster {} is singular",
            channel.cluster_id + 1
        ))
    })?;
    let unscaled = h_adj * inverse;

    let max_row = row_powers(&unscaled).into_iter().fold(0.0, f64::max);
    if !(max_row.is_finite() && max_row > 0.0) {
        return Err(Error::Numeric(format!(
            "cluster {} precoder has no usable feed power",
            channel.cluster_id + 1
        )));
    }
    let beta = (power_per_beam / max_row).sqrt();
    let w = unscaled * Complex64::new(beta, 0.0);
    let per_feed_power = row_powers(&w);
    Ok(PrecoderResult {
        w,
        beta,
        per_feed_power,
    })
}

/// Unprecoded transmission: each feed radiates `power` on its own beam.
pub fn scaled_identity_precoder(n: usize, power: f64) -> DMatrix<Complex64> {
    DMatrix::from_diagonal_element(n, n, Complex64::new(power.sqrt(), 0.0))
}

/// Linear SNIR of each beam-center user:
/// `|(HW)_kk|^2 / (sum_{i != k} |(HW)_ki|^2 + tau_k)`.
pub fn snir(channel: &ClusterChannel, w: &DMatrix<Complex64>) -> Vec<f64> {
    let hw = &channel.h * w;
    (0..channel.size())
        .map(|k| {
            let signal = hw[(k, k)].norm_sqr();
            let interference: f64 = (0..hw.ncols())
                .filter(|&i| i != k)
                .map(|i| hw[(k, i)].norm_sqr())
                .sum();
            signal / (interference + channel.tau[k])
        })
        .collect()
}

/// Offered capacity of every beam and cluster when each cluster is
/// illuminated with MMSE precoding.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityVector {
    /// `r_i` per beam index, bits per second (both polarizations if enabled).
    pub beam_bps: Vec<f64>,
    pub beam_snir: Vec<f64>,
    /// `c_j`, bits per second.
    pub cluster_bps: Vec<f64>,
    /// `p_j = T_slot * c_j`, bits per slot.
    pub slot_bits: Vec<f64>,
}

pub fn cluster_capacities(
    scenario: &Scenario,
    channels: &[ClusterChannel],
    table: &Dvbs2Table,
) -> Result<CapacityVector> {
    let sys = scenario.system();
    let power = sys.power_per_beam_w(scenario.n_beams());
    let rate_per_se = sys.symbol_rate() * sys.polarization_factor();

    let mut beam_bps = vec![0.0; scenario.n_beams()];
    let mut beam_snir = vec![0.0; scenario.n_beams()];
    let mut cluster_bps = Vec::with_capacity(channels.len());
    for channel in channels {
        let precoder = mmse_precoder(channel, power)?;
        let members = scenario.clusters().members(channel.cluster_id);
        let mut total = 0.0;
        for (k, s) in snir(channel, &precoder.w).into_iter().enumerate() {
            let r = table.efficiency(s) * rate_per_se;
            beam_bps[members[k]] = r;
            beam_snir[members[k]] = s;
            total += r;
        }
        cluster_bps.push(total);
    }
    let slot_bits = cluster_bps.iter().map(|c| sys.slot_s * c).collect();
    Ok(CapacityVector {
        beam_bps,
        beam_snir,
        cluster_bps,
        slot_bits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_channel(h: f64, tau: f64) -> ClusterChannel {
        ClusterChannel {
            cluster_id: 0,
            h: DMatrix::from_element(1, 1, Complex64::new(h, 0.0)),
            tau: vec![tau],
        }
    }

    #[test]
    fn scalar_precoder_by_hand() {
        // W_hat = 2 / (4 + 1) = 0.4; beta = sqrt(1 / 0.16) = 2.5; W = 1.0
        let p = mmse_precoder(&scalar_channel(2.0, 1.0), 1.0).unwrap();
        assert!((p.beta - 2.5).abs() < 1e-12);
        assert!((p.w[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!(p.w[(0, 0)].im.abs() < 1e-15);
        assert!((p.per_feed_power[0] - 1.0).abs() < 1e-12);
        let s = snir(&scalar_channel(2.0, 1.0), &p.w);
        assert!((s[0] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_channel_gives_diagonal_precoder() {
        let ch = ClusterChannel {
            cluster_id: 0,
            h: DMatrix::from_diagonal_element(3, 3, Complex64::new(0.7, 0.0)),
            tau: vec![0.1; 3],
        };
        let p = mmse_precoder(&ch, 2.0).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                if r != c {
                    assert_eq!(p.w[(r, c)].norm(), 0.0);
                }
            }
        }
        let hw = &ch.h * &p.w;
        for r in 0..3 {
            for c in 0..3 {
                if r != c {
                    assert_eq!(hw[(r, c)].norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn diagonal_channel_snir_is_signal_over_noise() {
        let ch = ClusterChannel {
            cluster_id: 0,
            h: DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                Complex64::new(1.5, 0.5),
                Complex64::new(0.2, -0.1),
            ])),
            tau: vec![0.3, 0.05],
        };
        let w = scaled_identity_precoder(2, 4.0);
        let s = snir(&ch, &w);
        for k in 0..2 {
            let g = (ch.h[(k, k)] * w[(k, k)]).norm_sqr();
            assert!((s[k] - g / ch.tau[k]).abs() <= 1e-12 * s[k]);
        }
    }

    #[test]
    fn zero_precoder_gives_zero_snir() {
        let ch = scalar_channel(1.0, 1.0);
        let w = DMatrix::from_element(1, 1, Complex64::new(0.0, 0.0));
        assert_eq!(snir(&ch, &w), vec![0.0]);
    }

    #[test]
    fn non_finite_channel_is_rejected() {
        let ch = scalar_channel(f64::NAN, 1.0);
        assert!(matches!(mmse_precoder(&ch, 1.0), Err(Error::Numeric(_))));
    }
}
