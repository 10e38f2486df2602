//! Browser bindings: antenna pattern cuts, beam layouts and downlink SINR maps.

use ntn_core::channel::{antenna_gain, AntennaPattern, FadingMode, ScintillationMode};
use ntn_core::geometry::{build_beam_layout, Frf, GroundPoint, UePosition};
use ntn_core::phy_link::{FrequencyPlan, LinkState, RxConfig};
use ntn_core::ScenarioConfig;
use wasm_bindgen::prelude::*;

fn frf(reuse: u8) -> Result<Frf, JsError> {
    match reuse {
        1 => Ok(Frf::One),
        3 => Ok(Frf::Three),
        _ => Err(JsError::new("frequency reuse must be 1 or 3")),
    }
}

/// Satellite antenna gain in dBi at `points` angles evenly spaced over `[0, max_deg]`.
#[wasm_bindgen]
pub fn antenna_curve(hpbw_deg: f64, floor_db: f64, max_deg: f64, points: usize) -> Result<Vec<f64>, JsError> {
    let cfg = ScenarioConfig::default();
    let pattern = AntennaPattern::new(cfg.sat_gain_dbi, hpbw_deg, floor_db).map_err(|e| JsError::new(&e.to_string()))?;
    let step = if points > 1 { max_deg / (points - 1) as f64 } else { 0.0 };
    Ok((0..points).map(|i| antenna_gain(&pattern, step * i as f64)).collect())
}

/// Beam centres as flat `[x_km, y_km, color, statistics]` quadruples.
#[wasm_bindgen]
pub fn beam_layout(reuse: u8) -> Result<Vec<f64>, JsError> {
    let cfg = ScenarioConfig::default();
    let layout = build_beam_layout(frf(reuse)?, cfg.icd_km, cfg.altitude_km);
    Ok(layout
        .beams
        .iter()
        .flat_map(|b| [b.center.x, b.center.y, f64::from(b.freq_color), f64::from(u8::from(b.is_statistics()))])
        .collect())
}

/// Fading-free downlink SINR in dB on a `grid` x `grid` raster spanning
/// `[-half_km, half_km]` in both axes, row-major from the north-west corner.
#[wasm_bindgen]
pub fn dl_sinr_map(reuse: u8, two_antennas: bool, scintillation: bool, half_km: f64, grid: usize) -> Result<Vec<f64>, JsError> {
    let frf = frf(reuse)?;
    let cfg = ScenarioConfig {
        frf,
        rx_config: if two_antennas { RxConfig::TWO_ANTENNAS } else { RxConfig::ONE_ANTENNA },
        scintillation: if scintillation { ScintillationMode::Significant } else { ScintillationMode::Negligible },
        fading: FadingMode::None,
        shadowing_std_db: 0.0,
        ..ScenarioConfig::default()
    };
    let pattern = AntennaPattern::new(cfg.sat_gain_dbi, cfg.hpbw_deg, cfg.sidelobe_floor_db)
        .map_err(|e| JsError::new(&e.to_string()))?;
    let step = if grid > 1 { 2.0 * half_km / (grid - 1) as f64 } else { 0.0 };
    let ues: Vec<UePosition> = (0..grid * grid)
        .map(|i| {
            let (row, col) = (i / grid, i % grid);
            let pos = GroundPoint::new(-half_km + step * col as f64, half_km - step * row as f64);
            UePosition { id: i, dropped_beam: 0, pos }
        })
        .collect();
    let state = LinkState::new(
        build_beam_layout(frf, cfg.icd_km, cfg.altitude_km),
        FrequencyPlan::new(cfg.bandwidth_mhz, frf, 1),
        cfg.radio(),
        &pattern,
        &cfg.channel(),
        cfg.rx_config,
        cfg.ul_pol_config(),
        &ues,
        1,
    );
    Ok((0..ues.len()).map(|u| state.dl_sinr(u, 0, |_, _| 1.0).sinr).collect())
}
