//! Slot-driven MAC: proportional-fair scheduling over subbands, link
//! adaptation on an MCS ladder, simplified HARQ and full-buffer throughput
//! accounting.

mod drop;
mod harq;
mod ladder;
mod pf;

pub use drop::{build_link_state, run_drop, CsiMode, run_drop_on, CellStats, DropResult, ScenarioModels, UeStats};
pub use harq::{harq_step, BlerModel, HarqConfig, HarqOutcome, HarqProcess};
pub use ladder::{attenuated_shannon_threshold_db, link_adapt, LadderError, LinkChoice, McsEntry, McsLadder};
pub use pf::{pf_schedule, PfState};
