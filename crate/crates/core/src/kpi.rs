//! KPIs: user spectral efficiency, 5th-percentile user rate, average cell
//! spectral efficiency and area traffic capacity, multi-seed pooling and
//! requirement verdicts.
//!
//! All spectral efficiencies are normalized by the full channel bandwidth `W`
//! regardless of the reuse factor, so an FRF3 beam using a third of the band
//! at 1.2 bit/s/Hz reports 0.4 bit/s/Hz.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::config::ScenarioConfig;
use crate::mac_sched::DropResult;
use crate::phy_link::Direction;

/// Samples needed before a 5th percentile is meaningful.
pub const MIN_PERCENTILE_SAMPLES: usize = 20;

#[derive(Debug, Error, PartialEq)]
pub enum KpiError {
    #[error("{0} samples are too few for a 5th percentile (need {MIN_PERCENTILE_SAMPLES})")]
    TooFewSamples(usize),
    #[error("no seed reports to pool")]
    NoReports,
    #[error("seed reports come from different configurations ({0} vs {1})")]
    MismatchedConfigs(String, String),
}

/// User spectral efficiency, bit/s/Hz over the full channel bandwidth.
pub fn user_se(delivered_bits: f64, duration_s: f64, bandwidth_hz: f64) -> f64 {
    if duration_s <= 0.0 {
        return 0.0;
    }
    delivered_bits / duration_s / bandwidth_hz
}

/// Linear-interpolated percentile at rank `p (N - 1) + 1`.
pub fn percentile(samples: &[f64], p: f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn percentile_5(samples: &[f64]) -> Result<f64, KpiError> {
    if samples.len() < MIN_PERCENTILE_SAMPLES {
        return Err(KpiError::TooFewSamples(samples.len()));
    }
    Ok(percentile(samples, 0.05))
}

/// KPI inputs extracted from one seed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedReport {
    pub config: String,
    pub direction: Direction,
    pub seed: u64,
    pub bandwidth_hz: f64,
    pub trxp_density_per_km2: f64,
    pub user_se: Vec<f64>,
    /// Mean over statistics cells of the cell spectral efficiency.
    pub se_avg: f64,
}

impl SeedReport {
    pub fn from_drop(cfg: &ScenarioConfig, drop: &DropResult) -> Self {
        let w = cfg.bandwidth_hz();
        let samples: Vec<f64> = drop.ues.iter().map(|u| user_se(u.delivered_bits, drop.duration_s, w)).collect();
        let se_avg = if drop.cells.is_empty() {
            0.0
        } else {
            drop.cells.iter().map(|c| user_se(c.delivered_bits, drop.duration_s, w)).sum::<f64>() / drop.cells.len() as f64
        };
        Self {
            config: cfg.name.clone(),
            direction: cfg.direction,
            seed: drop.seed,
            bandwidth_hz: w,
            trxp_density_per_km2: cfg.trxp_density_per_km2(),
            user_se: samples,
            se_avg,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    fn from_check(value: f64, threshold: f64) -> Self {
        if value >= threshold {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub user_rate_mbps: f64,
    pub se_5pct: f64,
    pub se_avg: f64,
    pub area_capacity_kbps_per_km2: f64,
}

/// Minimum eMBB satellite requirements per direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RequirementSet {
    pub dl: Thresholds,
    pub ul: Thresholds,
}

impl Default for RequirementSet {
    fn default() -> Self {
        Self {
            dl: Thresholds { user_rate_mbps: 1.0, se_5pct: 0.03, se_avg: 0.5, area_capacity_kbps_per_km2: 8.0 },
            ul: Thresholds { user_rate_mbps: 0.1, se_5pct: 0.003, se_avg: 0.1, area_capacity_kbps_per_km2: 1.5 },
        }
    }
}

impl RequirementSet {
    pub fn for_direction(&self, direction: Direction) -> &Thresholds {
        match direction {
            Direction::Dl => &self.dl,
            Direction::Ul => &self.ul,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Verdicts {
    pub user_rate: Verdict,
    pub se_5pct: Verdict,
    pub se_avg: Verdict,
    pub area_capacity: Verdict,
}

impl Verdicts {
    pub fn all(&self) -> [Verdict; 4] {
        [self.user_rate, self.se_5pct, self.se_avg, self.area_capacity]
    }
}

/// Pooled KPIs of one configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KpiReport {
    pub config: String,
    pub direction: Direction,
    pub seeds: Vec<u64>,
    pub bandwidth_hz: f64,
    pub trxp_density_per_km2: f64,
    #[serde(skip)]
    pub user_se_samples: Vec<f64>,
    pub sample_count: usize,
    pub user_rate_5pct_mbps: f64,
    pub se_5pct: f64,
    pub se_avg: f64,
    pub se_avg_min: f64,
    pub se_avg_max: f64,
    pub area_capacity_kbps_per_km2: f64,
    pub verdicts: Option<Verdicts>,
}

impl KpiReport {
    /// The four reported KPIs: user rate (Mbit/s), 5th-pct SE, average SE, area capacity (kbit/s/km^2).
    pub fn values(&self) -> [f64; 4] {
        [self.user_rate_5pct_mbps, self.se_5pct, self.se_avg, self.area_capacity_kbps_per_km2]
    }
}

/// Distribution samples are concatenated across seeds; scalar KPIs are averaged.
pub fn pool_seeds(reports: &[SeedReport]) -> Result<KpiReport, KpiError> {
    let first = reports.first().ok_or(KpiError::NoReports)?;
    for r in reports {
        if r.config != first.config
            || r.direction != first.direction
            || r.bandwidth_hz != first.bandwidth_hz
            || r.trxp_density_per_km2 != first.trxp_density_per_km2
        {
            return Err(KpiError::MismatchedConfigs(first.config.clone(), r.config.clone()));
        }
    }
    let samples: Vec<f64> = reports.iter().flat_map(|r| r.user_se.iter().copied()).collect();
    let se_5pct = percentile_5(&samples)?;
    let se_avg = reports.iter().map(|r| r.se_avg).sum::<f64>() / reports.len() as f64;
    let w = first.bandwidth_hz;
    Ok(KpiReport {
        config: first.config.clone(),
        direction: first.direction,
        seeds: reports.iter().map(|r| r.seed).collect(),
        bandwidth_hz: w,
        trxp_density_per_km2: first.trxp_density_per_km2,
        sample_count: samples.len(),
        user_se_samples: samples,
        user_rate_5pct_mbps: w * se_5pct / 1e6,
        se_5pct,
        se_avg,
        se_avg_min: reports.iter().map(|r| r.se_avg).fold(f64::INFINITY, f64::min),
        se_avg_max: reports.iter().map(|r| r.se_avg).fold(f64::NEG_INFINITY, f64::max),
        area_capacity_kbps_per_km2: first.trxp_density_per_km2 * w * se_avg / 1e3,
        verdicts: None,
    })
}

/// Pass iff each KPI meets its threshold.
pub fn evaluate(report: &KpiReport, reqs: &RequirementSet) -> Verdicts {
    let t = reqs.for_direction(report.direction);
    Verdicts {
        user_rate: Verdict::from_check(report.user_rate_5pct_mbps, t.user_rate_mbps),
        se_5pct: Verdict::from_check(report.se_5pct, t.se_5pct),
        se_avg: Verdict::from_check(report.se_avg, t.se_avg),
        area_capacity: Verdict::from_check(report.area_capacity_kbps_per_km2, t.area_capacity_kbps_per_km2),
    }
}

/// Empirical CDF as `value,cumulative_probability` rows, values scaled by `scale`.
pub fn cdf_csv(samples: &[f64], scale: f64) -> String {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut out = String::from("value,cumulative_probability\n");
    for (i, v) in sorted.iter().enumerate() {
        let _ = writeln!(out, "{},{}", v * scale, (i + 1) as f64 / n as f64);
    }
    out
}

fn mark(v: Option<Verdict>) -> &'static str {
    match v {
        Some(Verdict::Pass) => "",
        Some(Verdict::Fail) => " X",
        None => "",
    }
}

/// One text row per report, failures marked with `X`, then the requirement rows.
pub fn verdict_table(rows: &[(String, &KpiReport)], reqs: &RequirementSet) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<40} {:>16} {:>16} {:>16} {:>20}",
        "configuration", "user rate Mbit/s", "5th-pct SE", "avg SE", "area kbit/s/km2"
    );
    let cell = |v: f64, d: usize, m: Option<Verdict>| format!("{:.*}{}", d, v, mark(m));
    for (label, r) in rows {
        let v = r.verdicts;
        let _ = writeln!(
            s,
            "{:<40} {:>16} {:>16} {:>16} {:>20}",
            label,
            cell(r.user_rate_5pct_mbps, 2, v.map(|v| v.user_rate)),
            cell(r.se_5pct, 4, v.map(|v| v.se_5pct)),
            cell(r.se_avg, 2, v.map(|v| v.se_avg)),
            cell(r.area_capacity_kbps_per_km2, 1, v.map(|v| v.area_capacity)),
        );
    }
    let mut directions: Vec<Direction> = rows.iter().map(|(_, r)| r.direction).collect();
    directions.dedup();
    for d in directions {
        let t = reqs.for_direction(d);
        let _ = writeln!(
            s,
            "{:<40} {:>16} {:>16} {:>16} {:>20}",
            format!("{d} required"),
            format!("{:.2}", t.user_rate_mbps),
            format!("{:.4}", t.se_5pct),
            format!("{:.2}", t.se_avg),
            format!("{:.1}", t.area_capacity_kbps_per_km2),
        );
    }
    s
}
