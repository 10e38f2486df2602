//! SINR engine: frequency and polarization plan, RSRP attachment, and
//! per-subband downlink/uplink SINR with MRC combining.
//!
//! All link computations go through a precomputed UE x beam coupling table
//! holding the large-scale power gain `G_rel(theta) / (FSPL * shadowing *
//! scintillation)`. With a single satellite the path loss, shadowing and
//! scintillation of a UE are common to every beam, so they scale desired
//! and co-channel terms of that UE alike.

use serde::{Deserialize, Serialize};

use crate::channel::{free_space_path_loss, shadowing_db, AntennaPattern, ChannelConfig};
use crate::geometry::{link_geometry, BeamLayout, Frf, GroundPoint, Polarization, UePosition};

/// Boltzmann constant, dBW/K/Hz.
pub const BOLTZMANN_DB: f64 = -228.6;
const REFERENCE_TEMP_K: f64 = 290.0;

pub fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn lin_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyPlan {
    pub channel_bw_mhz: f64,
    pub beam_bw_mhz: f64,
    pub colors: u8,
    pub subbands: usize,
}

impl FrequencyPlan {
    pub fn new(channel_bw_mhz: f64, frf: Frf, subbands: usize) -> Self {
        let colors = frf.colors();
        Self { channel_bw_mhz, beam_bw_mhz: channel_bw_mhz / f64::from(colors), colors, subbands }
    }

    pub fn channel_bw_hz(&self) -> f64 {
        self.channel_bw_mhz * 1e6
    }

    pub fn beam_bw_hz(&self) -> f64 {
        self.beam_bw_mhz * 1e6
    }

    pub fn subband_bw_hz(&self) -> f64 {
        self.beam_bw_hz() / self.subbands as f64
    }
}

/// UE receive antenna configuration `(m, n, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RxConfig {
    pub m: u8,
    pub n: u8,
    pub p: u8,
}

impl RxConfig {
    pub const ONE_ANTENNA: RxConfig = RxConfig { m: 1, n: 1, p: 2 };
    pub const TWO_ANTENNAS: RxConfig = RxConfig { m: 1, n: 2, p: 2 };

    pub fn is_supported(&self) -> bool {
        *self == Self::ONE_ANTENNA || *self == Self::TWO_ANTENNAS
    }

    /// Elements combined by MRC: the horizontal ones.
    pub fn combined_elements(&self) -> usize {
        usize::from(self.n)
    }

    /// Dual-polarized reception removes the circular-to-linear mismatch.
    pub fn dl_depolarization_db(&self, mismatch_db: f64) -> f64 {
        if self.p >= 2 {
            0.0
        } else {
            mismatch_db
        }
    }
}

impl std::fmt::Display for RxConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.m, self.n, self.p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UlPolVariant {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UlPolConfig {
    pub variant: UlPolVariant,
    pub pol_loss_db: f64,
    /// One circular polarization per beam on the satellite side.
    pub pol_reuse: bool,
}

impl UlPolConfig {
    pub fn new(variant: UlPolVariant) -> Self {
        match variant {
            UlPolVariant::A => Self { variant, pol_loss_db: 3.0, pol_reuse: true },
            UlPolVariant::B => Self { variant, pol_loss_db: 0.0, pol_reuse: false },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "DL")]
    Dl,
    #[serde(rename = "UL")]
    Ul,
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Direction::Dl => "DL",
            Direction::Ul => "UL",
        })
    }
}

/// SINR decomposition of one link evaluation. Powers in dBW over the
/// evaluated bandwidth; `signal` is the post-combining equivalent power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSample {
    pub signal: f64,
    pub interference: f64,
    pub noise: f64,
    pub sinr: f64,
    pub subband: usize,
    pub ue: usize,
    pub direction: Direction,
}

impl LinkSample {
    /// SINR recomputed from the stored powers.
    pub fn recomputed_sinr(&self) -> f64 {
        self.signal - lin_to_db(db_to_lin(self.interference) + db_to_lin(self.noise))
    }
}

/// FRF3 gets a proper lattice 3-coloring, FRF1 one color; polarization
/// alternates by lattice row, which makes 4 of the 6 neighbours cross-polar.
pub fn assign_colors(mut layout: BeamLayout) -> BeamLayout {
    let frf = layout.frf;
    for beam in &mut layout.beams {
        let (q, r) = beam.axial;
        beam.freq_color = match frf {
            Frf::One => 0,
            Frf::Three => (q - r).rem_euclid(3) as u8,
        };
        beam.pol_color = if r.rem_euclid(2) == 0 { Polarization::Rhcp } else { Polarization::Lhcp };
    }
    layout
}

/// Link-budget constants shared by every link of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioParams {
    pub eirp_density_dbw_per_mhz: f64,
    pub sat_gain_dbi: f64,
    pub g_over_t_db_per_k: f64,
    pub ue_gain_dbi: f64,
    pub ue_antenna_temp_k: f64,
    pub noise_figure_db: f64,
    pub ue_tx_power_dbm: f64,
    /// Circular-to-linear mismatch, dB.
    pub depolarization_db: f64,
}

impl RadioParams {
    /// UE receiver noise PSD, W/Hz.
    pub fn ue_noise_psd(&self) -> f64 {
        let t_sys = self.ue_antenna_temp_k + REFERENCE_TEMP_K * (db_to_lin(self.noise_figure_db) - 1.0);
        db_to_lin(BOLTZMANN_DB) * t_sys
    }

    /// Satellite receiver noise PSD, W/Hz, from G/T referenced to peak gain.
    pub fn sat_noise_psd(&self) -> f64 {
        db_to_lin(BOLTZMANN_DB + self.sat_gain_dbi - self.g_over_t_db_per_k)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UeContext {
    pub id: usize,
    pub pos: GroundPoint,
    pub dropped_beam: usize,
    pub serving_beam: usize,
    pub shadowing_db: f64,
    pub path_loss_db: f64,
}

/// Read-only link state of one drop.
#[derive(Debug, Clone)]
pub struct LinkState {
    pub layout: BeamLayout,
    pub plan: FrequencyPlan,
    pub radio: RadioParams,
    pub rx: RxConfig,
    pub ul_pol: UlPolConfig,
    pub ues: Vec<UeContext>,
    /// Beams that radiate (DL) or listen (UL). Muted beams neither transmit nor interfere.
    pub active: Vec<bool>,
    coupling: Vec<f64>,
    /// Co-frequency beams of each beam.
    co_channel: Vec<Vec<usize>>,
}

/// RSRP attachment: strongest average received power, ties to the lowest beam id.
pub fn attach_ues(ues: &[UePosition], layout: &BeamLayout, pattern: &AntennaPattern, freq_ghz: f64) -> Vec<usize> {
    ues.iter()
        .map(|ue| {
            let mut best = (0usize, f64::NEG_INFINITY);
            for beam in &layout.beams {
                let g = link_geometry(&ue.pos, beam, layout);
                let rsrp = pattern.relative_gain_db(g.off_boresight_deg) - free_space_path_loss(g.slant_range_km, freq_ghz);
                if rsrp > best.1 + 1e-9 {
                    best = (beam.id, rsrp);
                }
            }
            best.0
        })
        .collect()
}

impl LinkState {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        layout: BeamLayout,
        plan: FrequencyPlan,
        radio: RadioParams,
        pattern: &AntennaPattern,
        channel: &ChannelConfig,
        rx: RxConfig,
        ul_pol: UlPolConfig,
        drop: &[UePosition],
        seed: u64,
    ) -> Self {
        let serving = attach_ues(drop, &layout, pattern, channel.freq_ghz);
        let n_beams = layout.beams.len();
        let mut coupling = Vec::with_capacity(drop.len() * n_beams);
        let mut ues = Vec::with_capacity(drop.len());
        for (ue, &serving_beam) in drop.iter().zip(&serving) {
            let shadowing = shadowing_db(channel, seed, ue.id);
            let slant = link_geometry(&ue.pos, &layout.beams[0], &layout).slant_range_km;
            let path_loss = free_space_path_loss(slant, channel.freq_ghz);
            let common = db_to_lin(-(path_loss + shadowing + channel.scintillation_db()));
            for beam in &layout.beams {
                let g = link_geometry(&ue.pos, beam, &layout);
                coupling.push(pattern.relative_gain(g.off_boresight_deg) * common);
            }
            ues.push(UeContext {
                id: ue.id,
                pos: ue.pos,
                dropped_beam: ue.dropped_beam,
                serving_beam,
                shadowing_db: shadowing,
                path_loss_db: path_loss,
            });
        }
        let co_channel = layout
            .beams
            .iter()
            .map(|b| {
                layout
                    .beams
                    .iter()
                    .filter(|o| o.id != b.id && o.freq_color == b.freq_color)
                    .map(|o| o.id)
                    .collect()
            })
            .collect();
        let active = vec![true; n_beams];
        Self { layout, plan, radio, rx, ul_pol, ues, active, coupling, co_channel }
    }

    pub fn n_beams(&self) -> usize {
        self.layout.beams.len()
    }

    /// Large-scale linear power gain between `ue` and `beam`, excluding fast fading.
    pub fn coupling(&self, ue: usize, beam: usize) -> f64 {
        self.coupling[ue * self.n_beams() + beam]
    }

    pub fn co_channel_beams(&self, beam: usize) -> &[usize] {
        &self.co_channel[beam]
    }

    /// Silences every beam except `keep`.
    pub fn mute_all_except(&mut self, keep: &[usize]) {
        for (i, a) in self.active.iter_mut().enumerate() {
            *a = keep.contains(&i);
        }
    }

    /// Whether a UE served by `tx_beam` interferes with the UL receiver of `rx_beam`.
    pub fn ul_interferes(&self, tx_beam: usize, rx_beam: usize) -> bool {
        if tx_beam == rx_beam || !self.active[tx_beam] {
            return false;
        }
        let (a, b) = (&self.layout.beams[tx_beam], &self.layout.beams[rx_beam]);
        a.freq_color == b.freq_color && (!self.ul_pol.pol_reuse || a.pol_color == b.pol_color)
    }

    fn dl_psd_scale(&self) -> f64 {
        db_to_lin(self.radio.eirp_density_dbw_per_mhz - 60.0 + self.radio.ue_gain_dbi - self.rx.dl_depolarization_db(self.radio.depolarization_db))
    }

    /// Per-element linear DL SINRs for `ue` given fading gains `fading(beam, element)`.
    pub fn dl_element_sinrs(&self, ue: usize, mut fading: impl FnMut(usize, usize) -> f64) -> Vec<(f64, f64, f64)> {
        let serving = self.ues[ue].serving_beam;
        let bw = self.plan.subband_bw_hz();
        let scale = self.dl_psd_scale() * bw;
        let noise = self.radio.ue_noise_psd() * bw;
        (0..self.rx.combined_elements())
            .map(|e| {
                let signal = scale * self.coupling(ue, serving) * fading(serving, e);
                let interference: f64 = self.co_channel[serving]
                    .iter()
                    .filter(|&&b| self.active[b])
                    .map(|&b| scale * self.coupling(ue, b) * fading(b, e))
                    .sum();
                (signal, interference, noise)
            })
            .collect()
    }

    /// Combined DL SINR of `ue` on `subband`.
    pub fn dl_sinr(&self, ue: usize, subband: usize, fading: impl FnMut(usize, usize) -> f64) -> LinkSample {
        assert!(subband < self.plan.subbands, "subband {subband} outside the beam allocation");
        let elements = self.dl_element_sinrs(ue, fading);
        let per_element: Vec<f64> = elements.iter().map(|(s, i, n)| s / (i + n)).collect();
        let gamma = mrc_combine(&per_element);
        let noise = elements[0].2;
        let interference = elements.iter().map(|e| e.1).sum::<f64>() / elements.len() as f64;
        LinkSample {
            signal: lin_to_db(gamma * (interference + noise)),
            interference: lin_to_db(interference),
            noise: lin_to_db(noise),
            sinr: lin_to_db(gamma),
            subband,
            ue,
            direction: Direction::Dl,
        }
    }

    /// UL SINR of `ue` spreading its power over `alloc_bw_hz`, evaluated on one
    /// subband. `interferers` are `(ue, allocated bandwidth)` pairs scheduled on
    /// that subband elsewhere; ineligible ones are skipped. `fading(tx_ue, rx_beam)`.
    pub fn ul_sinr(
        &self,
        ue: usize,
        alloc_bw_hz: f64,
        subband: usize,
        interferers: &[(usize, f64)],
        mut fading: impl FnMut(usize, usize) -> f64,
    ) -> LinkSample {
        assert!(alloc_bw_hz > 0.0, "empty UL allocation");
        let rx_beam = self.ues[ue].serving_beam;
        let tx_power = db_to_lin(self.radio.ue_tx_power_dbm - 30.0);
        let per_link = db_to_lin(self.radio.ue_gain_dbi + self.radio.sat_gain_dbi - self.ul_pol.pol_loss_db);
        let signal_psd = tx_power / alloc_bw_hz * per_link * self.coupling(ue, rx_beam) * fading(ue, rx_beam);
        let interference_psd: f64 = interferers
            .iter()
            .filter(|(j, _)| *j != ue && self.ul_interferes(self.ues[*j].serving_beam, rx_beam))
            .map(|&(j, bw)| tx_power / bw * per_link * self.coupling(j, rx_beam) * fading(j, rx_beam))
            .sum();
        let noise_psd = self.radio.sat_noise_psd();
        LinkSample {
            signal: lin_to_db(signal_psd * alloc_bw_hz),
            interference: lin_to_db(interference_psd * alloc_bw_hz),
            noise: lin_to_db(noise_psd * alloc_bw_hz),
            sinr: lin_to_db(signal_psd / (interference_psd + noise_psd)),
            subband,
            ue,
            direction: Direction::Ul,
        }
    }
}

/// Idealized MRC: element count times the mean per-element linear SINR.
pub fn mrc_combine(per_element: &[f64]) -> f64 {
    let n = per_element.len() as f64;
    n * per_element.iter().sum::<f64>() / n
}
