//! Simplified stop-and-wait HARQ with ideal Chase combining.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// First-attempt block error rate as a function of the SINR margin over the
/// selected MCS threshold: `target` at zero margin, one decade per `slope_db`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlerModel {
    pub target: f64,
    pub slope_db: f64,
}

impl BlerModel {
    pub fn bler(&self, margin_db: f64) -> f64 {
        if self.target <= 0.0 {
            return 0.0;
        }
        (self.target * 10f64.powf(-margin_db / self.slope_db)).min(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarqConfig {
    pub bler: BlerModel,
    pub max_attempts: u8,
    /// SINR gain added by each retransmission, dB.
    pub combining_gain_db: f64,
}

/// One transport block in flight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarqProcess {
    /// 1-based attempt about to be made.
    pub attempt: u8,
    pub accumulated_sinr_gain_db: f64,
    pub tb_bits: f64,
    /// Threshold of the MCS the block was encoded with.
    pub mcs_threshold_db: f64,
}

impl HarqProcess {
    pub fn new(tb_bits: f64, mcs_threshold_db: f64) -> Self {
        Self { attempt: 1, accumulated_sinr_gain_db: 0.0, tb_bits, mcs_threshold_db }
    }

    pub fn effective_sinr_db(&self, sinr_db: f64) -> f64 {
        sinr_db + self.accumulated_sinr_gain_db
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HarqOutcome {
    Delivered,
    Retransmit,
    Failed,
}

/// Makes the current attempt at `sinr_db`. On a non-final failure the process
/// advances to the next attempt with the combining gain accumulated.
pub fn harq_step<R: Rng + ?Sized>(process: &mut HarqProcess, sinr_db: f64, cfg: &HarqConfig, rng: &mut R) -> HarqOutcome {
    let margin = process.effective_sinr_db(sinr_db) - process.mcs_threshold_db;
    let p_fail = cfg.bler.bler(margin);
    if p_fail <= 0.0 || rng.gen::<f64>() >= p_fail {
        return HarqOutcome::Delivered;
    }
    if process.attempt >= cfg.max_attempts {
        return HarqOutcome::Failed;
    }
    process.attempt += 1;
    process.accumulated_sinr_gain_db += cfg.combining_gain_db;
    HarqOutcome::Retransmit
}
