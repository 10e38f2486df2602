//! Scenario configuration: every link-budget parameter, model switch and run
//! control of one simulation campaign entry.
//!
//! The file format is flat `key = value` lines grouped under `[section]`
//! headers; `#` starts a comment. Keys left out keep their defaults, which
//! reproduce the reference NR NTN S-band evaluation parameters.
//!
//! ```text
//! [scenario]
//! direction = dl
//! frf = 3
//!
//! [ue]
//! rx_config = 1,1,2
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::channel::{ChannelConfig, FadingMode, ScintillationMode};
use crate::geometry::Frf;
use crate::mac_sched::{BlerModel, CsiMode, HarqConfig};
use crate::phy_link::{Direction, RadioParams, RxConfig, UlPolConfig, UlPolVariant};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { key: String, line: usize },
    #[error("{}'{key}' {msg}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Range { key: String, line: Option<usize>, msg: String },
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Ladder(#[from] crate::mac_sched::LadderError),
    #[error(transparent)]
    Antenna(#[from] crate::channel::ChannelError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub direction: Direction,
    pub frf: Frf,

    pub altitude_km: f64,
    pub freq_ghz: f64,
    pub bandwidth_mhz: f64,
    pub eirp_density_dbw_per_mhz: f64,
    pub sat_gain_dbi: f64,
    pub hpbw_deg: f64,
    pub g_over_t_db_per_k: f64,
    pub icd_km: f64,
    /// Area served per TRxP, km^2 (inverse of the TRxP density).
    pub trxp_area_km2: f64,

    pub ues_per_beam: usize,
    pub ue_gain_dbi: f64,
    pub ue_antenna_temp_k: f64,
    pub noise_figure_db: f64,
    pub ue_tx_power_dbm: f64,
    pub rx_config: RxConfig,
    pub ul_pol: UlPolVariant,
    pub depolarization_db: f64,

    pub scintillation: ScintillationMode,
    pub scintillation_loss_db: f64,
    pub fading: FadingMode,
    pub shadowing_std_db: f64,
    pub sidelobe_floor_db: f64,

    pub seeds: Vec<u64>,
    pub slots: u32,
    pub warmup_slots: u32,
    pub slot_ms: f64,
    pub subbands: usize,
    pub pf_alpha: f64,
    pub bler_target: f64,
    pub bler_slope_db: f64,
    pub harq_max_attempts: u8,
    pub harq_gain_db: f64,
    pub csi: CsiMode,
    pub ladder: Option<PathBuf>,
    pub ladder_efficiency: f64,
    /// Fraction of resources spent on reference signals and control.
    pub overhead: f64,
    pub output_dir: PathBuf,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            name: "default".into(),
            direction: Direction::Dl,
            frf: Frf::One,
            altitude_km: 600.0,
            freq_ghz: 2.0,
            bandwidth_mhz: 30.0,
            eirp_density_dbw_per_mhz: 34.0,
            sat_gain_dbi: 30.0,
            hpbw_deg: 4.41,
            g_over_t_db_per_k: 1.1,
            icd_km: 43.3,
            trxp_area_km2: 1415.0,
            ues_per_beam: 10,
            ue_gain_dbi: 0.0,
            ue_antenna_temp_k: 290.0,
            noise_figure_db: 7.0,
            ue_tx_power_dbm: 23.0,
            rx_config: RxConfig::TWO_ANTENNAS,
            ul_pol: UlPolVariant::A,
            depolarization_db: 3.0,
            scintillation: ScintillationMode::Significant,
            scintillation_loss_db: 2.2,
            fading: FadingMode::Rician { k_db: 10.0 },
            shadowing_std_db: 1.79,
            sidelobe_floor_db: -30.0,
            seeds: vec![1, 2, 3, 4, 5],
            slots: 2000,
            warmup_slots: 100,
            slot_ms: 1.0,
            subbands: 6,
            pf_alpha: 0.01,
            bler_target: 0.1,
            bler_slope_db: 1.0,
            harq_max_attempts: 4,
            harq_gain_db: 3.0,
            csi: CsiMode::LargeScale,
            ladder: None,
            ladder_efficiency: 0.75,
            overhead: 0.2,
            output_dir: PathBuf::from("results"),
        }
    }
}

enum Failure {
    Unknown,
    Parse(String),
    Range(String),
}

fn num(v: &str) -> Result<f64, Failure> {
    v.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| Failure::Parse(format!("'{v}' is not a number")))
}

fn int<T: std::str::FromStr>(v: &str) -> Result<T, Failure> {
    v.parse::<T>().map_err(|_| Failure::Parse(format!("'{v}' is not a non-negative integer")))
}

fn in_range(v: f64, lo: f64, hi: f64) -> Result<f64, Failure> {
    if v >= lo && v <= hi {
        Ok(v)
    } else {
        Err(Failure::Range(format!("= {v} outside [{lo}, {hi}]")))
    }
}

fn positive(v: f64, hi: f64) -> Result<f64, Failure> {
    if v > 0.0 && v <= hi {
        Ok(v)
    } else {
        Err(Failure::Range(format!("= {v} outside (0, {hi}]")))
    }
}

fn parse_rx(v: &str) -> Result<RxConfig, Failure> {
    let parts: Vec<&str> = v.trim_matches(|c| c == '(' || c == ')').split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(Failure::Parse(format!("'{v}' is not an (m,n,p) triple")));
    }
    let rx = RxConfig { m: int(parts[0])?, n: int(parts[1])?, p: int(parts[2])? };
    if rx.is_supported() {
        Ok(rx)
    } else {
        Err(Failure::Range(format!("= {rx} not one of (1,1,2), (1,2,2)")))
    }
}

/// Accepts `1415` (km^2 per TRxP) or `1/1415` (TRxP per km^2).
fn parse_trxp_area(v: &str) -> Result<f64, Failure> {
    match v.split_once('/') {
        Some((a, b)) => {
            let (a, b) = (num(a.trim())?, num(b.trim())?);
            if a <= 0.0 {
                return Err(Failure::Range("density must be positive".into()));
            }
            positive(b / a, 1e7)
        }
        None => positive(num(v)?, 1e7),
    }
}

impl ScenarioConfig {
    fn apply(&mut self, section: &str, key: &str, v: &str) -> Result<(), Failure> {
        let lower = v.to_ascii_lowercase();
        match (section, key) {
            ("scenario", "name") => self.name = v.to_string(),
            ("scenario", "direction") => {
                self.direction = match lower.as_str() {
                    "dl" => Direction::Dl,
                    "ul" => Direction::Ul,
                    _ => return Err(Failure::Range(format!("= {v} not one of dl, ul"))),
                }
            }
            ("scenario", "frf") => {
                self.frf = match int::<u32>(v)? {
                    1 => Frf::One,
                    3 => Frf::Three,
                    other => return Err(Failure::Range(format!("= {other} not one of 1, 3"))),
                }
            }
            ("scenario", "trxp_density") => self.trxp_area_km2 = parse_trxp_area(v)?,
            ("satellite", "altitude_km") => self.altitude_km = in_range(num(v)?, 300.0, 2000.0)?,
            ("satellite", "frequency_ghz") => self.freq_ghz = positive(num(v)?, 100.0)?,
            ("satellite", "bandwidth_mhz") => self.bandwidth_mhz = positive(num(v)?, 1000.0)?,
            ("satellite", "eirp_density_dbw_per_mhz") => self.eirp_density_dbw_per_mhz = in_range(num(v)?, -20.0, 80.0)?,
            ("satellite", "antenna_gain_dbi") => self.sat_gain_dbi = in_range(num(v)?, 0.0, 70.0)?,
            ("satellite", "hpbw_deg") => {
                let x = num(v)?;
                if !(x > 0.0 && x < 90.0) {
                    return Err(Failure::Range(format!("= {x} outside (0, 90)")));
                }
                self.hpbw_deg = x
            }
            ("satellite", "g_over_t_db_per_k") => self.g_over_t_db_per_k = in_range(num(v)?, -40.0, 40.0)?,
            ("satellite", "icd_km") => self.icd_km = positive(num(v)?, 100.0)?,
            ("ue", "per_beam") => {
                let n: usize = int(v)?;
                if !(1..=1000).contains(&n) {
                    return Err(Failure::Range(format!("= {n} outside [1, 1000]")));
                }
                self.ues_per_beam = n
            }
            ("ue", "antenna_gain_dbi") => self.ue_gain_dbi = in_range(num(v)?, -20.0, 40.0)?,
            ("ue", "antenna_temp_k") => self.ue_antenna_temp_k = in_range(num(v)?, 0.0, 5000.0)?,
            ("ue", "noise_figure_db") => self.noise_figure_db = in_range(num(v)?, 0.0, 20.0)?,
            ("ue", "tx_power_dbm") => self.ue_tx_power_dbm = in_range(num(v)?, -10.0, 40.0)?,
            ("ue", "rx_config") => self.rx_config = parse_rx(v)?,
            ("ue", "ul_pol") => {
                self.ul_pol = match lower.as_str() {
                    "a" => UlPolVariant::A,
                    "b" => UlPolVariant::B,
                    _ => return Err(Failure::Range(format!("= {v} not one of A, B"))),
                }
            }
            ("ue", "depolarization_db") => self.depolarization_db = in_range(num(v)?, 0.0, 10.0)?,
            ("channel", "scintillation") => {
                self.scintillation = match lower.as_str() {
                    "significant" => ScintillationMode::Significant,
                    "negligible" => ScintillationMode::Negligible,
                    _ => return Err(Failure::Range(format!("= {v} not one of significant, negligible"))),
                }
            }
            ("channel", "scintillation_loss_db") => self.scintillation_loss_db = in_range(num(v)?, 0.0, 20.0)?,
            ("channel", "fading") => {
                self.fading = match lower.as_str() {
                    "none" => FadingMode::None,
                    "rician" => match self.fading {
                        FadingMode::Rician { k_db } => FadingMode::Rician { k_db },
                        FadingMode::None => FadingMode::Rician { k_db: 10.0 },
                    },
                    _ => return Err(Failure::Range(format!("= {v} not one of none, rician"))),
                }
            }
            ("channel", "rician_k_db") => {
                let k_db = in_range(num(v)?, -20.0, 100.0)?;
                if let FadingMode::Rician { .. } = self.fading {
                    self.fading = FadingMode::Rician { k_db };
                }
            }
            ("channel", "shadowing_std_db") => self.shadowing_std_db = in_range(num(v)?, 0.0, 20.0)?,
            ("channel", "sidelobe_floor_db") => self.sidelobe_floor_db = in_range(num(v)?, -100.0, -3.0)?,
            ("run", "seeds") => {
                let seeds: Result<Vec<u64>, Failure> = v.split(',').map(|s| int(s.trim())).collect();
                let seeds = seeds?;
                if seeds.is_empty() {
                    return Err(Failure::Range("needs at least one seed".into()));
                }
                self.seeds = seeds
            }
            ("run", "slots") => self.slots = int(v)?,
            ("run", "warmup_slots") => self.warmup_slots = int(v)?,
            ("run", "slot_ms") => self.slot_ms = positive(num(v)?, 10.0)?,
            ("run", "subbands") => {
                let n: usize = int(v)?;
                if !(1..=275).contains(&n) {
                    return Err(Failure::Range(format!("= {n} outside [1, 275]")));
                }
                self.subbands = n
            }
            ("run", "pf_alpha") => {
                let a = num(v)?;
                if !(a > 0.0 && a < 1.0) {
                    return Err(Failure::Range(format!("= {a} outside (0, 1)")));
                }
                self.pf_alpha = a
            }
            ("run", "bler_target") => self.bler_target = in_range(num(v)?, 0.0, 1.0)?,
            ("run", "bler_slope_db") => self.bler_slope_db = positive(num(v)?, 100.0)?,
            ("run", "harq_max_attempts") => {
                let n: u8 = int(v)?;
                if !(1..=4).contains(&n) {
                    return Err(Failure::Range(format!("= {n} outside [1, 4]")));
                }
                self.harq_max_attempts = n
            }
            ("run", "harq_gain_db") => self.harq_gain_db = in_range(num(v)?, 0.0, 10.0)?,
            ("run", "csi") => {
                self.csi = match lower.as_str() {
                    "ideal" => CsiMode::Ideal,
                    "large_scale" => CsiMode::LargeScale,
                    _ => return Err(Failure::Range(format!("= {v} not one of ideal, large_scale"))),
                }
            }
            ("run", "ladder") => self.ladder = Some(PathBuf::from(v)),
            ("run", "ladder_efficiency") => {
                let e = num(v)?;
                if !(e > 0.0 && e <= 1.0) {
                    return Err(Failure::Range(format!("= {e} outside (0, 1]")));
                }
                self.ladder_efficiency = e
            }
            ("run", "overhead") => {
                let o = num(v)?;
                if !(0.0..1.0).contains(&o) {
                    return Err(Failure::Range(format!("= {o} outside [0, 1)")));
                }
                self.overhead = o
            }
            ("run", "output_dir") => self.output_dir = PathBuf::from(v),
            _ => return Err(Failure::Unknown),
        }
        Ok(())
    }

    /// Parses config text; keys not present keep their defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut section = String::new();
        let mut fading_key: Option<(String, usize)> = None;
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Parse { line, msg: "unterminated section header".into() })?;
                let name = name.trim();
                if !["scenario", "satellite", "ue", "channel", "run"].contains(&name) {
                    return Err(ConfigError::Parse { line, msg: format!("unknown section [{name}]") });
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| ConfigError::Parse { line, msg: format!("expected 'key = value', got '{content}'") })?;
            let (key, value) = (key.trim(), value.trim());
            if section.is_empty() {
                return Err(ConfigError::Parse { line, msg: format!("key '{key}' appears before any [section]") });
            }
            // the K factor applies to whichever fading mode ends up selected
            if section == "channel" && key == "rician_k_db" {
                fading_key = Some((value.to_string(), line));
                continue;
            }
            cfg.apply(&section, key, value).map_err(|f| match f {
                Failure::Unknown => ConfigError::UnknownKey { key: format!("{section}.{key}"), line },
                Failure::Parse(msg) => ConfigError::Parse { line, msg: format!("{key}: {msg}") },
                Failure::Range(msg) => ConfigError::Range { key: key.to_string(), line: Some(line), msg },
            })?;
        }
        if let Some((value, line)) = fading_key {
            cfg.apply("channel", "rician_k_db", &value).map_err(|f| match f {
                Failure::Parse(msg) => ConfigError::Parse { line, msg: format!("rician_k_db: {msg}") },
                Failure::Range(msg) => ConfigError::Range { key: "rician_k_db".into(), line: Some(line), msg },
                Failure::Unknown => ConfigError::UnknownKey { key: "channel.rician_k_db".into(), line },
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        let mut cfg = Self::parse(&text)?;
        if cfg.name == "default" {
            if let Some(stem) = path.file_stem() {
                cfg.name = stem.to_string_lossy().into_owned();
            }
        }
        // relative ladder paths resolve against the config file
        if let (Some(ladder), Some(dir)) = (&cfg.ladder, path.parent()) {
            if ladder.is_relative() {
                cfg.ladder = Some(dir.join(ladder));
            }
        }
        Ok(cfg)
    }

    /// Cross-field checks, also applied to programmatically built configs.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let range = |key: &str, msg: String| Err(ConfigError::Range { key: key.into(), line: None, msg });
        if self.warmup_slots > self.slots && self.slots > 0 {
            return range("warmup_slots", format!("= {} exceeds slots = {}", self.warmup_slots, self.slots));
        }
        if !self.rx_config.is_supported() {
            return range("rx_config", format!("= {} not supported", self.rx_config));
        }
        if self.seeds.is_empty() {
            return range("seeds", "needs at least one seed".into());
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return range("name", format!("= '{}' is not a valid directory name", self.name));
        }
        Ok(())
    }

    pub fn radio(&self) -> RadioParams {
        RadioParams {
            eirp_density_dbw_per_mhz: self.eirp_density_dbw_per_mhz,
            sat_gain_dbi: self.sat_gain_dbi,
            g_over_t_db_per_k: self.g_over_t_db_per_k,
            ue_gain_dbi: self.ue_gain_dbi,
            ue_antenna_temp_k: self.ue_antenna_temp_k,
            noise_figure_db: self.noise_figure_db,
            ue_tx_power_dbm: self.ue_tx_power_dbm,
            depolarization_db: self.depolarization_db,
        }
    }

    pub fn channel(&self) -> ChannelConfig {
        ChannelConfig {
            freq_ghz: self.freq_ghz,
            shadowing_std_db: self.shadowing_std_db,
            fading: self.fading,
            scintillation: self.scintillation,
            scintillation_loss_db: self.scintillation_loss_db,
        }
    }

    pub fn ul_pol_config(&self) -> UlPolConfig {
        UlPolConfig::new(self.ul_pol)
    }

    pub fn harq(&self) -> HarqConfig {
        HarqConfig {
            bler: BlerModel { target: self.bler_target, slope_db: self.bler_slope_db },
            max_attempts: self.harq_max_attempts,
            combining_gain_db: self.harq_gain_db,
        }
    }

    pub fn bandwidth_hz(&self) -> f64 {
        self.bandwidth_mhz * 1e6
    }

    pub fn trxp_density_per_km2(&self) -> f64 {
        1.0 / self.trxp_area_km2
    }

    /// Renders the config in the file format; `parse(render())` reproduces it.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let frf = match self.frf {
            Frf::One => 1,
            Frf::Three => 3,
        };
        let dir = match self.direction {
            Direction::Dl => "dl",
            Direction::Ul => "ul",
        };
        let pol = match self.ul_pol {
            UlPolVariant::A => "A",
            UlPolVariant::B => "B",
        };
        let scint = match self.scintillation {
            ScintillationMode::Significant => "significant",
            ScintillationMode::Negligible => "negligible",
        };
        let _ = writeln!(s, "[scenario]\nname = {}\ndirection = {dir}\nfrf = {frf}\ntrxp_density = 1/{}", self.name, self.trxp_area_km2);
        let _ = writeln!(
            s,
            "\n[satellite]\naltitude_km = {}\nfrequency_ghz = {}\nbandwidth_mhz = {}\neirp_density_dbw_per_mhz = {}\nantenna_gain_dbi = {}\nhpbw_deg = {}\ng_over_t_db_per_k = {}\nicd_km = {}",
            self.altitude_km, self.freq_ghz, self.bandwidth_mhz, self.eirp_density_dbw_per_mhz, self.sat_gain_dbi, self.hpbw_deg, self.g_over_t_db_per_k, self.icd_km
        );
        let rx = self.rx_config;
        let _ = writeln!(
            s,
            "\n[ue]\nper_beam = {}\nantenna_gain_dbi = {}\nantenna_temp_k = {}\nnoise_figure_db = {}\ntx_power_dbm = {}\nrx_config = {},{},{}\nul_pol = {pol}\ndepolarization_db = {}",
            self.ues_per_beam, self.ue_gain_dbi, self.ue_antenna_temp_k, self.noise_figure_db, self.ue_tx_power_dbm, rx.m, rx.n, rx.p, self.depolarization_db
        );
        let _ = writeln!(s, "\n[channel]\nscintillation = {scint}\nscintillation_loss_db = {}", self.scintillation_loss_db);
        match self.fading {
            FadingMode::None => {
                let _ = writeln!(s, "fading = none");
            }
            FadingMode::Rician { k_db } => {
                let _ = writeln!(s, "fading = rician\nrician_k_db = {k_db}");
            }
        }
        let _ = writeln!(s, "shadowing_std_db = {}\nsidelobe_floor_db = {}", self.shadowing_std_db, self.sidelobe_floor_db);
        let seeds: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        let _ = writeln!(
            s,
            "\n[run]\nseeds = {}\nslots = {}\nwarmup_slots = {}\nslot_ms = {}\nsubbands = {}\npf_alpha = {}\nbler_target = {}\nbler_slope_db = {}\nharq_max_attempts = {}\nharq_gain_db = {}\ncsi = {}\nladder_efficiency = {}\noverhead = {}\noutput_dir = {}",
            seeds.join(","),
            self.slots,
            self.warmup_slots,
            self.slot_ms,
            self.subbands,
            self.pf_alpha,
            self.bler_target,
            self.bler_slope_db,
            self.harq_max_attempts,
            self.harq_gain_db,
            match self.csi {
                CsiMode::Ideal => "ideal",
                CsiMode::LargeScale => "large_scale",
            },
            self.ladder_efficiency,
            self.overhead,
            self.output_dir.display()
        );
        if let Some(ladder) = &self.ladder {
            let _ = writeln!(s, "ladder = {}", ladder.display());
        }
        s
    }
}
