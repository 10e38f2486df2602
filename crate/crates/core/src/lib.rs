//! System-level Monte-Carlo simulator for a single LEO satellite serving
//! handheld UEs over NR in S-band.
//!
//! The pipeline for one drop is [`geometry`] (beam grid, UE drop) ->
//! [`channel`] (pattern, path loss, fading) -> [`phy_link`] (attachment and
//! SINR) -> [`mac_sched`] (PF scheduling, link adaptation, HARQ). [`kpi`]
//! turns delivered bits into spectral-efficiency and capacity KPIs and checks
//! them against the satellite eMBB requirements; [`campaign`] runs
//! configuration matrices over seeds and writes reports.

pub mod campaign;
pub mod channel;
pub mod config;
pub mod geometry;
pub mod kpi;
pub mod mac_sched;
pub mod phy_link;
pub mod rng;

pub use config::{ConfigError, ScenarioConfig};
