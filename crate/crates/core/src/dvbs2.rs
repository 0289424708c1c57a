//! SNIR to spectral-efficiency mapping.
//!
//! The bundled table holds the DVB-S2 normal-frame MODCODs (ideal Es/N0 on
//! AWGN) reduced to their efficiency frontier: any MODCOD needing more SNIR
//! than another for less efficiency is dropped, so both columns increase
//! strictly.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

const BUNDLED: &str = include_str!("../data/dvbs2.csv");

/// Slack (dB) when comparing an SNIR against a threshold, so values that
/// land on a threshold after a linear/dB round trip stay on it.
const THRESHOLD_SLACK_DB: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct Dvbs2Row {
    pub threshold_db: f64,
    pub se_bits_per_symbol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dvbs2Table {
    rows: Vec<Dvbs2Row>,
}

impl Dvbs2Table {
    pub fn new(rows: Vec<Dvbs2Row>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::validation("DVB-S2 table is empty"));
        }
        for r in &rows {
            if !r.threshold_db.is_finite()
                || !(r.se_bits_per_symbol.is_finite() && r.se_bits_per_symbol > 0.0)
            {
                return Err(Error::validation(format!(
                    "DVB-S2 table row {r:?} is invalid"
                )));
            }
        }
        for w in rows.windows(2) {
            if w[1].threshold_db <= w[0].threshold_db
                || w[1].se_bits_per_symbol <= w[0].se_bits_per_symbol
            {
                return Err(Error::validation(format!(
                    "DVB-S2 table must increase strictly in both columns: {:?} then {:?}",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self { rows })
    }

    pub fn bundled() -> Self {
        Self::from_csv_str(BUNDLED).expect("bundled DVB-S2 table is valid")
    }

    /// Parses CSV with header `threshold_db,se_bits_per_symbol`.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| parse_err(e.to_string()))?
            .clone();
        if headers.iter().collect::<Vec<_>>() != ["threshold_db", "se_bits_per_symbol"] {
            return Err(parse_err(format!("unexpected header {headers:?}")));
        }
        let rows = reader
            .deserialize()
            .collect::<std::result::Result<Vec<Dvbs2Row>, _>>()
            .map_err(|e| parse_err(e.to_string()))?;
        Self::new(rows)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_str(&text)
    }

    pub fn rows(&self) -> &[Dvbs2Row] {
        &self.rows
    }

    /// Efficiency of the highest row whose threshold is at or below
    /// `snir_db`; zero below the first row.
    pub fn efficiency_db(&self, snir_db: f64) -> f64 {
        let n = self
            .rows
            .partition_point(|r| r.threshold_db <= snir_db + THRESHOLD_SLACK_DB);
        if n == 0 {
            0.0
        } else {
            self.rows[n - 1].se_bits_per_symbol
        }
    }

    /// Same as [`efficiency_db`](Self::efficiency_db) for a linear SNIR.
    pub fn efficiency(&self, snir: f64) -> f64 {
        if snir > 0.0 {
            self.efficiency_db(10.0 * snir.log10())
        } else {
            0.0
        }
    }
}

pub fn dvbs2_efficiency(snir: f64, table: &Dvbs2Table) -> f64 {
    table.efficiency(snir)
}

fn parse_err(message: String) -> Error {
    Error::Parse {
        what: "DVB-S2 table".into(),
        message,
    }
}
