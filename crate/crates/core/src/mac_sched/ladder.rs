//! MCS ladder and SINR-threshold link adaptation.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const BUNDLED_TABLE: &str = include_str!("../../data/mcs_table3.txt");

#[derive(Debug, Error)]
pub enum LadderError {
    #[error("ladder line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("ladder is empty")]
    Empty,
    #[error("ladder line {line}: spectral efficiency and threshold must increase strictly")]
    NotIncreasing { line: usize },
    #[error("cannot read ladder file {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McsEntry {
    pub index: u8,
    pub modulation_order: u8,
    pub code_rate_x1024: f64,
    /// bit/s/Hz
    pub se: f64,
    pub sinr_threshold_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McsLadder {
    entries: Vec<McsEntry>,
}

/// SINR at which `efficiency * log2(1 + sinr)` equals `se`.
pub fn attenuated_shannon_threshold_db(se: f64, efficiency: f64) -> f64 {
    10.0 * ((se / efficiency).exp2() - 1.0).log10()
}

impl McsLadder {
    pub fn new(entries: Vec<McsEntry>) -> Result<Self, LadderError> {
        if entries.is_empty() {
            return Err(LadderError::Empty);
        }
        for (i, w) in entries.windows(2).enumerate() {
            if !(w[1].se > w[0].se && w[1].sinr_threshold_db > w[0].sinr_threshold_db) {
                return Err(LadderError::NotIncreasing { line: i + 2 });
            }
        }
        Ok(Self { entries })
    }

    /// Parses the whitespace-separated ladder table; missing thresholds are
    /// derived from `efficiency`.
    pub fn parse(text: &str, efficiency: f64) -> Result<Self, LadderError> {
        let mut entries = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let cols: Vec<&str> = content.split_whitespace().collect();
            if cols.len() != 4 && cols.len() != 5 {
                return Err(LadderError::Parse { line, msg: format!("expected 4 or 5 columns, got {}", cols.len()) });
            }
            let num = |i: usize| -> Result<f64, LadderError> {
                cols[i]
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| LadderError::Parse { line, msg: format!("bad number '{}'", cols[i]) })
            };
            let int = |i: usize| -> Result<u8, LadderError> {
                cols[i].parse::<u8>().map_err(|_| LadderError::Parse { line, msg: format!("bad integer '{}'", cols[i]) })
            };
            let se = num(3)?;
            if se <= 0.0 {
                return Err(LadderError::Parse { line, msg: "spectral efficiency must be positive".into() });
            }
            let sinr_threshold_db = if cols.len() == 5 { num(4)? } else { attenuated_shannon_threshold_db(se, efficiency) };
            if let Some(prev) = entries.last() {
                let prev: &McsEntry = prev;
                if !(se > prev.se && sinr_threshold_db > prev.sinr_threshold_db) {
                    return Err(LadderError::NotIncreasing { line });
                }
            }
            entries.push(McsEntry { index: int(0)?, modulation_order: int(1)?, code_rate_x1024: num(2)?, se, sinr_threshold_db });
        }
        Self::new(entries)
    }

    pub fn load(path: &Path, efficiency: f64) -> Result<Self, LadderError> {
        let text = std::fs::read_to_string(path).map_err(|source| LadderError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text, efficiency)
    }

    /// The bundled 64QAM low-SE table.
    pub fn bundled(efficiency: f64) -> Self {
        Self::parse(BUNDLED_TABLE, efficiency).expect("bundled ladder is valid")
    }

    pub fn entries(&self) -> &[McsEntry] {
        &self.entries
    }

    pub fn max_se(&self) -> f64 {
        self.entries.last().map_or(0.0, |e| e.se)
    }
}

/// Outcome of link adaptation; `mcs` is the ladder position, `None` in outage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkChoice {
    pub mcs: Option<usize>,
    pub se: f64,
}

impl LinkChoice {
    pub fn threshold_db(&self, ladder: &McsLadder) -> Option<f64> {
        self.mcs.map(|i| ladder.entries[i].sinr_threshold_db)
    }
}

/// Highest entry whose threshold does not exceed `sinr_db`.
pub fn link_adapt(sinr_db: f64, ladder: &McsLadder) -> LinkChoice {
    let n = ladder.entries.partition_point(|e| e.sinr_threshold_db <= sinr_db);
    match n {
        0 => LinkChoice { mcs: None, se: 0.0 },
        n => LinkChoice { mcs: Some(n - 1), se: ladder.entries[n - 1].se },
    }
}
