//! Campaign orchestration: the reference configuration matrix, parallel
//! (config, seed) execution, pooling and the on-disk result layout.
//!
//! Layout under the output directory:
//!
//! ```text
//! <out>/<config>/summary.json
//! <out>/<config>/cdf_user_se.csv
//! <out>/<config>/cdf_user_rate.csv
//! <out>/<config>/verdicts.txt
//! <out>/summary.json      (array of all per-config summaries)
//! <out>/verdicts.txt      (combined table)
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::channel::ScintillationMode;
use crate::config::{ConfigError, ScenarioConfig};
use crate::geometry::Frf;
use crate::kpi::{cdf_csv, evaluate, pool_seeds, verdict_table, KpiError, KpiReport, RequirementSet, SeedReport};
use crate::mac_sched::run_drop;
use crate::phy_link::{Direction, RxConfig, UlPolVariant};

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("config {config}: {source}")]
    Config { config: String, source: ConfigError },
    #[error("config {config}, seed {seed}: {source}")]
    Run { config: String, seed: u64, source: ConfigError },
    #[error("config {config}: {source}")]
    Kpi { config: String, source: KpiError },
    #[error("writing {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl CampaignError {
    /// Configuration problems are reported separately from run failures.
    pub fn is_config_error(&self) -> bool {
        matches!(self, CampaignError::Config { .. })
    }
}

/// The ten result rows of the reference evaluation, derived from `base`.
pub fn reference_matrix(base: &ScenarioConfig) -> Vec<ScenarioConfig> {
    let dl = |rx: RxConfig, frf: Frf, scint: ScintillationMode| {
        let mut c = base.clone();
        c.direction = Direction::Dl;
        c.rx_config = rx;
        c.frf = frf;
        c.scintillation = scint;
        c.name = config_name(&c);
        c
    };
    let ul = |pol: UlPolVariant, frf: Frf| {
        let mut c = base.clone();
        c.direction = Direction::Ul;
        c.ul_pol = pol;
        c.frf = frf;
        c.name = config_name(&c);
        c
    };
    use ScintillationMode::{Negligible, Significant};
    vec![
        dl(RxConfig::ONE_ANTENNA, Frf::One, Significant),
        dl(RxConfig::ONE_ANTENNA, Frf::Three, Significant),
        dl(RxConfig::TWO_ANTENNAS, Frf::One, Significant),
        dl(RxConfig::TWO_ANTENNAS, Frf::Three, Significant),
        dl(RxConfig::ONE_ANTENNA, Frf::One, Negligible),
        dl(RxConfig::ONE_ANTENNA, Frf::Three, Negligible),
        ul(UlPolVariant::A, Frf::One),
        ul(UlPolVariant::A, Frf::Three),
        ul(UlPolVariant::B, Frf::One),
        ul(UlPolVariant::B, Frf::Three),
    ]
}

fn frf_digit(frf: Frf) -> u8 {
    match frf {
        Frf::One => 1,
        Frf::Three => 3,
    }
}

/// Directory-safe name such as `dl_2ant_frf1_scint_s` or `ul_cfg_b_frf3`.
pub fn config_name(c: &ScenarioConfig) -> String {
    match c.direction {
        Direction::Dl => {
            let scint = match c.scintillation {
                ScintillationMode::Significant => 's',
                ScintillationMode::Negligible => 'n',
            };
            format!("dl_{}ant_frf{}_scint_{scint}", c.rx_config.n, frf_digit(c.frf))
        }
        Direction::Ul => {
            let pol = match c.ul_pol {
                UlPolVariant::A => 'a',
                UlPolVariant::B => 'b',
            };
            format!("ul_cfg_{pol}_frf{}", frf_digit(c.frf))
        }
    }
}

/// Human-readable row label for result tables.
pub fn row_label(c: &ScenarioConfig) -> String {
    match c.direction {
        Direction::Dl => {
            let scint = match c.scintillation {
                ScintillationMode::Significant => "significant",
                ScintillationMode::Negligible => "negligible",
            };
            format!("DL {} FRF{} scint {scint}", c.rx_config, frf_digit(c.frf))
        }
        Direction::Ul => format!("UL config {:?} FRF{}", c.ul_pol, frf_digit(c.frf)),
    }
}

/// Runs every seed of every config on `jobs` workers and pools per config.
pub fn run_campaign(configs: &[ScenarioConfig], jobs: usize) -> Result<Vec<KpiReport>, CampaignError> {
    for c in configs {
        c.validate().map_err(|source| CampaignError::Config { config: c.name.clone(), source })?;
    }
    let runs: Vec<(usize, u64)> =
        configs.iter().enumerate().flat_map(|(i, c)| c.seeds.iter().map(move |&s| (i, s))).collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    let seed_reports: Vec<Result<(usize, SeedReport), CampaignError>> = pool.install(|| {
        runs.par_iter()
            .map(|&(i, seed)| {
                let cfg = &configs[i];
                let drop = run_drop(cfg, seed).map_err(|source| CampaignError::Run {
                    config: cfg.name.clone(),
                    seed,
                    source,
                })?;
                Ok((i, SeedReport::from_drop(cfg, &drop)))
            })
            .collect()
    });

    let mut grouped: Vec<Vec<SeedReport>> = vec![Vec::new(); configs.len()];
    for r in seed_reports {
        let (i, report) = r?;
        grouped[i].push(report);
    }
    let reqs = RequirementSet::default();
    configs
        .iter()
        .zip(grouped)
        .map(|(cfg, seeds)| {
            let mut report =
                pool_seeds(&seeds).map_err(|source| CampaignError::Kpi { config: cfg.name.clone(), source })?;
            report.verdicts = Some(evaluate(&report, &reqs));
            Ok(report)
        })
        .collect()
}

#[derive(Serialize)]
struct Summary<'a> {
    label: String,
    scenario: &'a ScenarioConfig,
    requirements: &'a crate::kpi::Thresholds,
    #[serde(flatten)]
    report: &'a KpiReport,
}

fn write(path: PathBuf, contents: &str) -> Result<(), CampaignError> {
    fs::write(&path, contents).map_err(|source| CampaignError::Io { path, source })
}

fn summary_value(cfg: &ScenarioConfig, report: &KpiReport, reqs: &RequirementSet) -> serde_json::Value {
    let summary = Summary {
        label: row_label(cfg),
        scenario: cfg,
        requirements: reqs.for_direction(report.direction),
        report,
    };
    serde_json::to_value(summary).expect("summary is plain data")
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}

/// Writes the per-config files for one report.
pub fn write_report(dir: &Path, cfg: &ScenarioConfig, report: &KpiReport) -> Result<(), CampaignError> {
    let reqs = RequirementSet::default();
    fs::create_dir_all(dir).map_err(|source| CampaignError::Io { path: dir.to_path_buf(), source })?;
    write(dir.join("summary.json"), &pretty(&summary_value(cfg, report, &reqs)))?;
    write(dir.join("cdf_user_se.csv"), &cdf_csv(&report.user_se_samples, 1.0))?;
    write(dir.join("cdf_user_rate.csv"), &cdf_csv(&report.user_se_samples, report.bandwidth_hz / 1e6))?;
    write(dir.join("verdicts.txt"), &verdict_table(&[(row_label(cfg), report)], &reqs))?;
    Ok(())
}

/// Writes every per-config directory plus the combined summary and table.
/// Returns the combined table text.
pub fn write_campaign(out: &Path, configs: &[ScenarioConfig], reports: &[KpiReport]) -> Result<String, CampaignError> {
    let reqs = RequirementSet::default();
    fs::create_dir_all(out).map_err(|source| CampaignError::Io { path: out.to_path_buf(), source })?;
    for (cfg, report) in configs.iter().zip(reports) {
        write_report(&out.join(&cfg.name), cfg, report)?;
    }
    let all: Vec<serde_json::Value> =
        configs.iter().zip(reports).map(|(c, r)| summary_value(c, r, &reqs)).collect();
    write(out.join("summary.json"), &pretty(&serde_json::Value::Array(all)))?;
    let rows: Vec<(String, &KpiReport)> = configs.iter().zip(reports).map(|(c, r)| (row_label(c), r)).collect();
    let table = verdict_table(&rows, &reqs);
    write(out.join("verdicts.txt"), &table)?;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_matrix_rows() {
        let m = reference_matrix(&ScenarioConfig::default());
        assert_eq!(m.len(), 10);
        assert_eq!(m.iter().filter(|c| c.direction == Direction::Dl).count(), 6);
        let mut names: Vec<_> = m.iter().map(|c| c.name.clone()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 10);
        assert_eq!(m[3].name, "dl_2ant_frf3_scint_s");
        assert_eq!(m[8].name, "ul_cfg_b_frf1");
        assert!(m.iter().all(|c| c.seeds == vec![1, 2, 3, 4, 5]));
    }

    #[test]
    fn invalid_config_is_a_config_error() {
        let mut c = ScenarioConfig::default();
        c.seeds.clear();
        let err = run_campaign(&[c], 1).unwrap_err();
        assert!(err.is_config_error());
    }

    #[test]
    fn short_campaign_writes_layout() {
        let c = ScenarioConfig {
            slots: 40,
            warmup_slots: 5,
            seeds: vec![1, 2],
            name: "tiny".into(),
            ..ScenarioConfig::default()
        };
        let reports = run_campaign(std::slice::from_ref(&c), 2).unwrap();
        assert_eq!(reports[0].sample_count, 2 * 19 * c.ues_per_beam);
        let dir = tempfile::tempdir().unwrap();
        write_campaign(dir.path(), std::slice::from_ref(&c), &reports).unwrap();
        for f in ["summary.json", "cdf_user_se.csv", "cdf_user_rate.csv", "verdicts.txt"] {
            assert!(dir.path().join("tiny").join(f).is_file(), "{f}");
        }
        let csv = fs::read_to_string(dir.path().join("tiny/cdf_user_rate.csv")).unwrap();
        assert_eq!(csv.lines().count() - 1, reports[0].sample_count);
    }
}
