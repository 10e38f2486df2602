//! Per-link gains and losses: Bessel aperture beam pattern, free-space path
//! loss, log-normal shadowing, Rician fast fading and scintillation.

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::LinkGeometry;
use crate::rng::{self, Purpose};

const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// First zero of J1.
pub const J1_FIRST_ZERO: f64 = 3.831_705_970_207_512;

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("3 dB beam width {0} deg outside (0, 90)")]
    BeamWidth(f64),
    #[error("aperture calibration did not converge for beam width {0} deg")]
    NoConvergence(f64),
}

/// Normalized aperture pattern `(2 J1(u) / u)^2`, with the `u -> 0` limit.
pub fn aperture_pattern(u: f64) -> f64 {
    if u.abs() < 1e-8 {
        // 2 J1(u)/u = 1 - u^2/8 + O(u^4)
        let v = 1.0 - u * u / 8.0;
        return v * v;
    }
    let v = 2.0 * libm::j1(u) / u;
    v * v
}

/// Pattern level at the beam edge: exactly -3 dB.
pub const BEAM_EDGE_LEVEL: f64 = 0.501_187_233_627_272_2;

/// Solves for the aperture parameter `ka` that puts the -3 dB point at `hpbw / 2`.
pub fn calibrate_ka(hpbw_deg: f64) -> Result<f64, ChannelError> {
    if !(hpbw_deg > 0.0 && hpbw_deg < 90.0) {
        return Err(ChannelError::BeamWidth(hpbw_deg));
    }
    // the main lobe is monotone on (0, first zero); bisect there
    let (mut lo, mut hi) = (1e-6, J1_FIRST_ZERO);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if aperture_pattern(mid) > BEAM_EDGE_LEVEL {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    let u_half = 0.5 * (lo + hi);
    if (aperture_pattern(u_half) - BEAM_EDGE_LEVEL).abs() > 1e-6 {
        return Err(ChannelError::NoConvergence(hpbw_deg));
    }
    Ok(u_half / (hpbw_deg / 2.0).to_radians().sin())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntennaPattern {
    pub g_max_dbi: f64,
    pub ka: f64,
    pub hpbw_deg: f64,
    /// Floor relative to peak, dB (negative).
    pub floor_db: f64,
}

impl AntennaPattern {
    pub fn new(g_max_dbi: f64, hpbw_deg: f64, floor_db: f64) -> Result<Self, ChannelError> {
        Ok(Self { g_max_dbi, ka: calibrate_ka(hpbw_deg)?, hpbw_deg, floor_db })
    }

    /// Gain relative to peak as a linear power ratio, floored.
    pub fn relative_gain(&self, off_boresight_deg: f64) -> f64 {
        let u = self.ka * off_boresight_deg.to_radians().sin();
        aperture_pattern(u).max(10f64.powf(self.floor_db / 10.0))
    }

    /// Gain relative to peak, dB.
    pub fn relative_gain_db(&self, off_boresight_deg: f64) -> f64 {
        10.0 * self.relative_gain(off_boresight_deg).log10()
    }
}

/// Absolute satellite antenna gain toward `off_boresight_deg`, dBi.
pub fn antenna_gain(pattern: &AntennaPattern, off_boresight_deg: f64) -> f64 {
    pattern.g_max_dbi + pattern.relative_gain_db(off_boresight_deg)
}

pub fn free_space_path_loss(slant_range_km: f64, freq_ghz: f64) -> f64 {
    let d = slant_range_km * 1e3;
    let f = freq_ghz * 1e9;
    20.0 * (4.0 * std::f64::consts::PI * d * f / SPEED_OF_LIGHT).log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScintillationMode {
    Significant,
    Negligible,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum FadingMode {
    None,
    Rician { k_db: f64 },
}

impl FadingMode {
    /// Draws one linear power gain with unit mean.
    pub fn sample_power<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            FadingMode::None => 1.0,
            FadingMode::Rician { k_db } => {
                if k_db.is_infinite() && k_db > 0.0 {
                    return 1.0;
                }
                let k = 10f64.powf(k_db / 10.0);
                let los = (k / (k + 1.0)).sqrt();
                let sigma = (0.5 / (k + 1.0)).sqrt();
                let z_re: f64 = StandardNormal.sample(rng);
                let z_im: f64 = StandardNormal.sample(rng);
                let re = los + sigma * z_re;
                let im = sigma * z_im;
                re * re + im * im
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub freq_ghz: f64,
    pub shadowing_std_db: f64,
    pub fading: FadingMode,
    pub scintillation: ScintillationMode,
    /// Attenuation applied to every space link in significant mode, dB.
    pub scintillation_loss_db: f64,
}

impl ChannelConfig {
    pub fn scintillation_db(&self) -> f64 {
        match self.scintillation {
            ScintillationMode::Significant => self.scintillation_loss_db,
            ScintillationMode::Negligible => 0.0,
        }
    }
}

/// One UE's channel toward the satellite, all quantities as losses in dB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    pub path_loss_db: f64,
    pub shadowing_db: f64,
    /// Per receive element, as a power gain in dB (positive = constructive).
    pub fast_fading_db: Vec<f64>,
    pub scintillation_db: f64,
}

impl ChannelRealization {
    /// Large-scale loss: path loss + shadowing + scintillation.
    pub fn mean_loss_db(&self) -> f64 {
        self.path_loss_db + self.shadowing_db + self.scintillation_db
    }
}

/// Shadowing for the single UE-satellite pair of `ue`, frozen for the drop.
pub fn shadowing_db(cfg: &ChannelConfig, seed: u64, ue: usize) -> f64 {
    if cfg.shadowing_std_db <= 0.0 {
        return 0.0;
    }
    let normal = Normal::new(0.0, cfg.shadowing_std_db).expect("finite std");
    normal.sample(&mut rng::stream(seed, Purpose::Shadowing, ue as u64))
}

/// Draws a channel for `ue` on `link`; `fading_rng` is the UE's per-slot fading stream.
pub fn draw_channel<R: Rng + ?Sized>(
    link: &LinkGeometry,
    cfg: &ChannelConfig,
    seed: u64,
    ue: usize,
    elements: usize,
    fading_rng: &mut R,
) -> ChannelRealization {
    ChannelRealization {
        path_loss_db: free_space_path_loss(link.slant_range_km, cfg.freq_ghz),
        shadowing_db: shadowing_db(cfg, seed, ue),
        fast_fading_db: (0..elements).map(|_| 10.0 * cfg.fading.sample_power(fading_rng).log10()).collect(),
        scintillation_db: cfg.scintillation_db(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// J1 by the integral representation (1/pi) int_0^pi cos(t - x sin t) dt.
    fn j1_quadrature(x: f64) -> f64 {
        let n = 20_000;
        let h = std::f64::consts::PI / n as f64;
        let f = |t: f64| (t - x * t.sin()).cos();
        let mut s = f(0.0) + f(std::f64::consts::PI);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(i as f64 * h);
        }
        s * h / 3.0 / std::f64::consts::PI
    }

    fn table_pattern() -> AntennaPattern {
        AntennaPattern::new(30.0, 4.41, -30.0).unwrap()
    }

    #[test]
    fn bessel_matches_quadrature() {
        for x in [0.1, 0.5, 1.0, 1.6163, 3.0, 3.8317, 5.1356, 10.0] {
            assert_abs_diff_eq!(libm::j1(x), j1_quadrature(x), epsilon = 1e-10);
        }
    }

    #[test]
    fn ka_for_table_beamwidth() {
        let ka = calibrate_ka(4.41).unwrap();
        // half-power argument from the quadrature oracle
        let u = ka * 2.205f64.to_radians().sin();
        let v = 2.0 * j1_quadrature(u) / u;
        assert_abs_diff_eq!(10.0 * (v * v).log10(), -3.0, epsilon = 1e-6);
        assert_abs_diff_eq!(u, 1.6163, epsilon = 5e-3);
        assert_abs_diff_eq!(ka, 42.0, epsilon = 0.1);
    }

    #[test]
    fn halving_beamwidth_doubles_ka() {
        let a = calibrate_ka(4.41).unwrap();
        let b = calibrate_ka(2.205).unwrap();
        assert_abs_diff_eq!(b / a, 2.0, epsilon = 1e-3);
    }

    #[test]
    fn calibration_rejects_bad_width() {
        assert_eq!(calibrate_ka(0.0), Err(ChannelError::BeamWidth(0.0)));
        assert_eq!(calibrate_ka(95.0), Err(ChannelError::BeamWidth(95.0)));
    }

    #[test]
    fn gain_points() {
        let p = table_pattern();
        assert_eq!(antenna_gain(&p, 0.0), 30.0);
        assert_abs_diff_eq!(antenna_gain(&p, 2.205), 27.0, epsilon = 0.01);
        assert_abs_diff_eq!(p.relative_gain_db(2.205), -3.0, epsilon = 1e-3);
        assert_abs_diff_eq!(p.relative_gain_db(0.0), 0.0, epsilon = 1e-15);
        let null = (J1_FIRST_ZERO / p.ka).asin().to_degrees();
        assert_abs_diff_eq!(antenna_gain(&p, null), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn main_lobe_monotone() {
        let p = table_pattern();
        let null = (J1_FIRST_ZERO / p.ka).asin().to_degrees();
        let mut prev = f64::INFINITY;
        for i in 0..=1000 {
            let g = antenna_gain(&p, null * i as f64 / 1000.0);
            assert!(g <= prev + 1e-12);
            prev = g;
        }
    }

    #[test]
    fn fspl_values() {
        assert_abs_diff_eq!(free_space_path_loss(600.0, 2.0), 154.03, epsilon = 0.01);
        assert_abs_diff_eq!(
            free_space_path_loss(1200.0, 2.0) - free_space_path_loss(600.0, 2.0),
            20.0 * 2f64.log10(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(free_space_path_loss(848.5, 2.0), 157.04, epsilon = 0.02);
    }

    fn cfg(fading: FadingMode, scint: ScintillationMode, std: f64) -> ChannelConfig {
        ChannelConfig {
            freq_ghz: 2.0,
            shadowing_std_db: std,
            fading,
            scintillation: scint,
            scintillation_loss_db: 2.2,
        }
    }

    #[test]
    fn degenerate_channel() {
        let link = LinkGeometry { slant_range_km: 600.0, off_boresight_deg: 0.0, elevation_deg: 90.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = cfg(FadingMode::None, ScintillationMode::Negligible, 0.0);
        let r = draw_channel(&link, &c, 1, 0, 2, &mut rng);
        assert_eq!(r.scintillation_db, 0.0);
        assert_eq!(r.fast_fading_db, vec![0.0, 0.0]);
        assert_eq!(r.mean_loss_db(), free_space_path_loss(600.0, 2.0));
        let c = cfg(FadingMode::None, ScintillationMode::Significant, 0.0);
        let r = draw_channel(&link, &c, 1, 0, 1, &mut rng);
        assert_eq!(r.mean_loss_db(), free_space_path_loss(600.0, 2.0) + 2.2);
    }

    #[test]
    fn rician_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let inf = FadingMode::Rician { k_db: f64::INFINITY };
        assert_eq!(inf.sample_power(&mut rng), 1.0);
        let strong = FadingMode::Rician { k_db: 60.0 };
        for _ in 0..100 {
            assert!((10.0 * strong.sample_power(&mut rng).log10()).abs() < 0.1);
        }
        let k10 = FadingMode::Rician { k_db: 10.0 };
        let n = 100_000;
        let mean: f64 = (0..n).map(|_| k10.sample_power(&mut rng)).sum::<f64>() / n as f64;
        assert_abs_diff_eq!(mean, 1.0, epsilon = 0.01);
    }

    #[test]
    fn shadowing_statistics() {
        let c = cfg(FadingMode::None, ScintillationMode::Negligible, 1.79);
        let n = 20_000;
        let draws: Vec<f64> = (0..n).map(|ue| shadowing_db(&c, 11, ue)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 0.05 * 1.79);
        assert!((var.sqrt() - 1.79).abs() < 0.05 * 1.79);
        assert_eq!(shadowing_db(&c, 11, 5), shadowing_db(&c, 11, 5));
    }
}
