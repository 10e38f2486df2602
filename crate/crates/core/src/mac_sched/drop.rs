//! One Monte-Carlo drop: geometry, attachment and the slot loop.

use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::harq::{harq_step, HarqConfig, HarqOutcome, HarqProcess};
use super::ladder::{link_adapt, McsLadder};
use super::pf::{pf_schedule, PfState};
use crate::channel::AntennaPattern;
use crate::config::{ConfigError, ScenarioConfig};
use crate::geometry::{build_beam_layout, drop_ues};
use crate::phy_link::{db_to_lin, lin_to_db, Direction, FrequencyPlan, LinkState};
use crate::rng::{self, Purpose};

/// Smoothing of the per-beam UL interference estimate used for scheduling.
const UL_INTERFERENCE_SMOOTHING: f64 = 0.1;

/// Channel knowledge available to scheduling and link adaptation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CsiMode {
    /// The faded SINR of the current slot.
    Ideal,
    /// The fading-free SINR; fast fading only shows up in HARQ outcomes.
    LargeScale,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UeStats {
    pub ue: usize,
    pub serving_beam: usize,
    pub delivered_bits: f64,
    /// Mean linear SINR over measured evaluations, in dB.
    pub mean_sinr_db: f64,
    pub scheduled_slots: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellStats {
    pub beam: usize,
    pub ues: usize,
    pub delivered_bits: f64,
}

/// Statistics-beam results of one drop.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DropResult {
    pub seed: u64,
    pub measured_slots: u32,
    pub duration_s: f64,
    pub ues: Vec<UeStats>,
    pub cells: Vec<CellStats>,
}

/// Everything a drop needs that does not depend on the seed.
#[derive(Debug, Clone)]
pub struct ScenarioModels {
    pub pattern: AntennaPattern,
    pub ladder: McsLadder,
    pub harq: HarqConfig,
    /// Share of allocated resources that carries data.
    pub payload_fraction: f64,
}

impl ScenarioModels {
    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self, ConfigError> {
        let pattern = AntennaPattern::new(cfg.sat_gain_dbi, cfg.hpbw_deg, cfg.sidelobe_floor_db)?;
        let ladder = match &cfg.ladder {
            Some(path) => McsLadder::load(path, cfg.ladder_efficiency)?,
            None => McsLadder::bundled(cfg.ladder_efficiency),
        };
        Ok(Self { pattern, ladder, harq: cfg.harq(), payload_fraction: 1.0 - cfg.overhead })
    }
}

/// Builds the layout, drops and attaches UEs, and freezes large-scale channels.
pub fn build_link_state(cfg: &ScenarioConfig, models: &ScenarioModels, seed: u64) -> LinkState {
    let layout = build_beam_layout(cfg.frf, cfg.icd_km, cfg.altitude_km);
    let drop = drop_ues(&layout, cfg.ues_per_beam, seed);
    LinkState::new(
        layout,
        FrequencyPlan::new(cfg.bandwidth_mhz, cfg.frf, cfg.subbands),
        cfg.radio(),
        &models.pattern,
        &cfg.channel(),
        cfg.rx_config,
        cfg.ul_pol_config(),
        &drop,
        seed,
    )
}

/// UEs served by each beam, in id order.
fn cells_of(state: &LinkState) -> Vec<Vec<usize>> {
    let mut cells = vec![Vec::new(); state.n_beams()];
    for ue in &state.ues {
        cells[ue.serving_beam].push(ue.id);
    }
    cells
}

struct UeAccount {
    harq: Option<HarqProcess>,
    delivered_bits: f64,
    sinr_sum: f64,
    sinr_count: u32,
    scheduled_slots: u32,
}

impl UeAccount {
    fn new() -> Self {
        Self { harq: None, delivered_bits: 0.0, sinr_sum: 0.0, sinr_count: 0, scheduled_slots: 0 }
    }

    /// Transmits on an allocation of `alloc_hz`, choosing the MCS from
    /// `la_sinr_db` and decoding at `sinr_db`; returns transmitted bits.
    #[allow(clippy::too_many_arguments)]
    fn transmit(
        &mut self,
        la_sinr_db: f64,
        sinr_db: f64,
        alloc_hz: f64,
        slot_s: f64,
        models: &ScenarioModels,
        rng: &mut ChaCha8Rng,
        measure: bool,
    ) -> f64 {
        let ladder = &models.ladder;
        let mut process = match self.harq.take() {
            Some(p) => p,
            None => {
                let choice = link_adapt(la_sinr_db, ladder);
                let Some(threshold) = choice.threshold_db(ladder) else { return 0.0 };
                HarqProcess::new(choice.se * alloc_hz * slot_s * models.payload_fraction, threshold)
            }
        };
        let tb = process.tb_bits;
        match harq_step(&mut process, sinr_db, &models.harq, rng) {
            HarqOutcome::Delivered => {
                if measure {
                    self.delivered_bits += tb;
                }
            }
            HarqOutcome::Retransmit => self.harq = Some(process),
            HarqOutcome::Failed => {}
        }
        tb
    }
}

/// Runs one drop of `cfg` with `seed` and returns the statistics-beam results.
pub fn run_drop(cfg: &ScenarioConfig, seed: u64) -> Result<DropResult, ConfigError> {
    cfg.validate()?;
    let models = ScenarioModels::from_config(cfg)?;
    let state = build_link_state(cfg, &models, seed);
    Ok(run_drop_on(cfg, &models, &state, seed))
}

/// Slot loop over a prepared link state.
pub fn run_drop_on(cfg: &ScenarioConfig, models: &ScenarioModels, state: &LinkState, seed: u64) -> DropResult {
    let cells = cells_of(state);
    let mut accounts: Vec<UeAccount> = state.ues.iter().map(|_| UeAccount::new()).collect();
    match cfg.direction {
        Direction::Dl => dl_loop(cfg, models, state, &cells, &mut accounts, seed),
        Direction::Ul => ul_loop(cfg, models, state, &cells, &mut accounts, seed),
    }
    let measured_slots = cfg.slots.saturating_sub(cfg.warmup_slots);
    let duration_s = f64::from(measured_slots) * cfg.slot_ms * 1e-3;
    let stats_beams: Vec<usize> = state.layout.statistics_beams().map(|b| b.id).collect();
    let ues = stats_beams
        .iter()
        .flat_map(|&b| cells[b].iter())
        .map(|&u| {
            let a = &accounts[u];
            UeStats {
                ue: u,
                serving_beam: state.ues[u].serving_beam,
                delivered_bits: a.delivered_bits,
                mean_sinr_db: if a.sinr_count > 0 { lin_to_db(a.sinr_sum / f64::from(a.sinr_count)) } else { f64::NAN },
                scheduled_slots: a.scheduled_slots,
            }
        })
        .collect();
    let cells_out = stats_beams
        .iter()
        .map(|&b| CellStats { beam: b, ues: cells[b].len(), delivered_bits: cells[b].iter().map(|&u| accounts[u].delivered_bits).sum() })
        .collect();
    DropResult { seed, measured_slots, duration_s, ues, cells: cells_out }
}

fn dl_loop(cfg: &ScenarioConfig, models: &ScenarioModels, state: &LinkState, cells: &[Vec<usize>], accounts: &mut [UeAccount], seed: u64) {
    let slot_s = cfg.slot_ms * 1e-3;
    let sb_hz = state.plan.subband_bw_hz();
    let fading = cfg.fading;
    let stats_beams: Vec<usize> = state.layout.statistics_beams().map(|b| b.id).filter(|&b| state.active[b]).collect();
    let mut fading_rngs: Vec<ChaCha8Rng> = state.ues.iter().map(|u| rng::stream(seed, Purpose::DlFading, u.id as u64)).collect();
    let mut harq_rngs: Vec<ChaCha8Rng> = state.ues.iter().map(|u| rng::stream(seed, Purpose::Harq, u.id as u64)).collect();
    let mut pf: Vec<PfState> = cells.iter().map(|c| PfState::new(c.len(), cfg.pf_alpha)).collect();
    let large_scale: Vec<f64> = state.ues.iter().map(|u| state.dl_sinr(u.id, 0, |_, _| 1.0).sinr).collect();

    for slot in 0..cfg.slots {
        let measure = slot >= cfg.warmup_slots;
        for &beam in &stats_beams {
            let members = &cells[beam];
            if members.is_empty() {
                continue;
            }
            let sinrs: Vec<f64> = members
                .iter()
                .map(|&u| {
                    let rng = &mut fading_rngs[u];
                    state.dl_sinr(u, 0, |_, _| fading.sample_power(rng)).sinr
                })
                .collect();
            let known: Vec<f64> = match cfg.csi {
                CsiMode::Ideal => sinrs.clone(),
                CsiMode::LargeScale => members.iter().map(|&u| large_scale[u]).collect(),
            };
            let rates: Vec<f64> = known.iter().map(|&s| link_adapt(s, &models.ladder).se * sb_hz).collect();
            let alloc = pf_schedule(state.plan.subbands, &pf[beam], |i, _, _| rates[i]);
            let mut counts = vec![0usize; members.len()];
            alloc.iter().for_each(|&i| counts[i] += 1);
            let mut served = vec![0.0; members.len()];
            for (i, &u) in members.iter().enumerate() {
                let acc = &mut accounts[u];
                if measure {
                    acc.sinr_sum += db_to_lin(sinrs[i]);
                    acc.sinr_count += 1;
                }
                if counts[i] == 0 {
                    continue;
                }
                if measure {
                    acc.scheduled_slots += 1;
                }
                let bits = acc.transmit(known[i], sinrs[i], counts[i] as f64 * sb_hz, slot_s, models, &mut harq_rngs[u], measure);
                served[i] = bits / slot_s;
            }
            pf[beam].update(&served);
        }
    }
}

/// Rate of a UE spreading its power over `k` subbands, given its estimated
/// single-subband SINR (linear).
fn spread_rate(gamma_one: f64, k: usize, sb_hz: f64, ladder: &McsLadder) -> f64 {
    if k == 0 {
        return 0.0;
    }
    k as f64 * sb_hz * link_adapt(lin_to_db(gamma_one / k as f64), ladder).se
}

fn ul_loop(cfg: &ScenarioConfig, models: &ScenarioModels, state: &LinkState, cells: &[Vec<usize>], accounts: &mut [UeAccount], seed: u64) {
    let slot_s = cfg.slot_ms * 1e-3;
    let plan = state.plan;
    let sb_hz = plan.subband_bw_hz();
    let fading = cfg.fading;
    let n_beams = state.n_beams();
    let n_ues = state.ues.len();
    let radio = state.radio;
    let tx_power = db_to_lin(radio.ue_tx_power_dbm - 30.0);
    let per_link = db_to_lin(radio.ue_gain_dbi + radio.sat_gain_dbi - state.ul_pol.pol_loss_db);
    let noise_psd = radio.sat_noise_psd();

    let is_stats: Vec<bool> = state.layout.beams.iter().map(|b| b.is_statistics() && state.active[b.id]).collect();
    let mut fading_rngs: Vec<ChaCha8Rng> = (0..n_beams).map(|b| rng::stream(seed, Purpose::UlFading, b as u64)).collect();
    let mut harq_rngs: Vec<ChaCha8Rng> = state.ues.iter().map(|u| rng::stream(seed, Purpose::Harq, u.id as u64)).collect();
    let mut pf: Vec<PfState> = cells.iter().map(|c| PfState::new(c.len(), cfg.pf_alpha)).collect();
    let mut interference_est = vec![0.0f64; n_beams];
    let mut fade_cache = vec![f64::NAN; n_ues];
    let mut touched: Vec<usize> = Vec::new();

    for slot in 0..cfg.slots {
        let measure = slot >= cfg.warmup_slots;
        // 1. every listening beam schedules on its estimate
        let mut alloc_count = vec![0usize; n_ues];
        let mut on_subband: Vec<Vec<(usize, f64)>> = vec![Vec::new(); plan.subbands];
        let mut beam_alloc: Vec<Vec<usize>> = vec![Vec::new(); n_beams];
        for beam in 0..n_beams {
            let members = &cells[beam];
            if members.is_empty() || !state.active[beam] {
                continue;
            }
            let gamma_one: Vec<f64> = members
                .iter()
                .map(|&u| tx_power / sb_hz * per_link * state.coupling(u, beam) / (noise_psd + interference_est[beam]))
                .collect();
            let alloc = pf_schedule(plan.subbands, &pf[beam], |i, _, k| {
                spread_rate(gamma_one[i], k + 1, sb_hz, &models.ladder) - spread_rate(gamma_one[i], k, sb_hz, &models.ladder)
            });
            for &i in &alloc {
                alloc_count[members[i]] += 1;
            }
            beam_alloc[beam] = alloc;
        }
        for beam in 0..n_beams {
            for (sb, &i) in beam_alloc[beam].iter().enumerate() {
                let u = cells[beam][i];
                on_subband[sb].push((u, alloc_count[u] as f64 * sb_hz));
            }
        }

        // 2. interference measurement for next slot's estimates
        for beam in 0..n_beams {
            if cells[beam].is_empty() {
                continue;
            }
            let mut total = 0.0;
            for list in &on_subband {
                for &(j, bw) in list {
                    if state.ul_interferes(state.ues[j].serving_beam, beam) {
                        total += tx_power / bw * per_link * state.coupling(j, beam);
                    }
                }
            }
            let measured = total / plan.subbands as f64;
            interference_est[beam] = (1.0 - UL_INTERFERENCE_SMOOTHING) * interference_est[beam] + UL_INTERFERENCE_SMOOTHING * measured;
        }

        // 3. actual SINR, link adaptation and HARQ in statistics beams
        for beam in 0..n_beams {
            let members = &cells[beam];
            if members.is_empty() || !state.active[beam] {
                continue;
            }
            let mut served = vec![0.0; members.len()];
            if is_stats[beam] {
                for &u in &touched {
                    fade_cache[u] = f64::NAN;
                }
                touched.clear();
                let rng = &mut fading_rngs[beam];
                let mut fade = |j: usize, _rx: usize| {
                    if fade_cache[j].is_nan() {
                        fade_cache[j] = fading.sample_power(rng);
                        touched.push(j);
                    }
                    fade_cache[j]
                };
                for (i, &u) in members.iter().enumerate() {
                    let k = alloc_count[u];
                    if k == 0 {
                        continue;
                    }
                    let alloc_hz = k as f64 * sb_hz;
                    let mut capacity = 0.0;
                    for (sb, &owner) in beam_alloc[beam].iter().enumerate() {
                        if owner == i {
                            let sample = state.ul_sinr(u, alloc_hz, sb, &on_subband[sb], &mut fade);
                            capacity += (1.0 + db_to_lin(sample.sinr)).log2();
                        }
                    }
                    let effective = lin_to_db((capacity / k as f64).exp2() - 1.0);
                    let known = match cfg.csi {
                        CsiMode::Ideal => effective,
                        CsiMode::LargeScale => lin_to_db(
                            tx_power / alloc_hz * per_link * state.coupling(u, beam) / (noise_psd + interference_est[beam]),
                        ),
                    };
                    let acc = &mut accounts[u];
                    if measure {
                        acc.sinr_sum += db_to_lin(effective);
                        acc.sinr_count += 1;
                        acc.scheduled_slots += 1;
                    }
                    let bits = acc.transmit(known, effective, alloc_hz, slot_s, models, &mut harq_rngs[u], measure);
                    served[i] = bits / slot_s;
                }
            } else {
                let est = interference_est[beam];
                for (i, &u) in members.iter().enumerate() {
                    let k = alloc_count[u];
                    let gamma_one = tx_power / sb_hz * per_link * state.coupling(u, beam) / (noise_psd + est);
                    served[i] = spread_rate(gamma_one, k, sb_hz, &models.ladder) * models.payload_fraction;
                }
            }
            pf[beam].update(&served);
        }
    }
}
