//! Cognitive eNodeB: TD-LTE frame schedule with sensing windows, spectrum
//! decisions, CogCCH / PCogCH messages, handover, X2 cooperative fusion and
//! ASM global allocation.

mod asm;
mod decision;
mod frame;

pub use asm::{asm_allocate, AsmAssignment, AsmRequest};
pub use decision::{
    execute_handover, fuse_cooperative, select_bandwidth, spectrum_decision, FusionRule, HandoverEvent,
};
pub use frame::{build_frame_schedule, FrameConfig, FrameSchedule, SpecialSplit, Subframe, FRAME_MS, MAX_SENSING_MS};

use std::collections::VecDeque;
use std::fmt;

use crate::geodb::Region;
use crate::radio_env::{FrequencyBand, Point};
use crate::sensing::SensingReport;

#[derive(Debug, thiserror::Error)]
pub enum CenbError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("stale sensing: no report for grey channel {channel}")]
    StaleSensing { channel: usize },
    #[error("message for {got} delivered to {expected}")]
    Addressing { expected: String, got: String },
    #[error("handover target channel {channel} is no longer vacant")]
    TargetOccupied { channel: usize },
    #[error("cannot aggregate reports: {0}")]
    Aggregation(String),
}

/// LTE carrier bandwidth the CeNB can run on TV white space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bandwidth {
    Mhz5,
    Mhz15,
    Mhz20,
}

impl Bandwidth {
    pub fn mhz(self) -> u32 {
        match self {
            Bandwidth::Mhz5 => 5,
            Bandwidth::Mhz15 => 15,
            Bandwidth::Mhz20 => 20,
        }
    }

    /// TV channels occupied by a carrier of this bandwidth.
    pub fn channels(self) -> usize {
        match self {
            Bandwidth::Mhz5 => 1,
            Bandwidth::Mhz15 => 2,
            Bandwidth::Mhz20 => 3,
        }
    }
}

impl fmt::Display for Bandwidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} MHz", self.mhz())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MessageKind {
    /// CogCCH logical-channel RRC message.
    CogCchRrc,
    /// Spectrum decision broadcast on the physical PCogCH.
    PCogChDecision,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CogMessage {
    pub kind: MessageKind,
    /// New TV channel block; empty means fall back to the dedicated band.
    pub target_block: Vec<usize>,
    pub bandwidth: Option<Bandwidth>,
    pub activation_frame: u64,
    pub origin: String,
    pub frame_no: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CenbState {
    pub id: String,
    pub location: Point,
    pub tx_power_dbm: f64,
    /// Licensed band that always carries control signalling.
    pub dedicated_band: FrequencyBand,
    pub active_block: Option<Vec<usize>>,
    pub bandwidth: Option<Bandwidth>,
    pub region_cache: Vec<Region>,
    pub pending_handover: Option<CogMessage>,
    pub last_reports: VecDeque<SensingReport>,
    /// Data resumes at this instant after a retune.
    pub retune_until_ms: Option<u64>,
    pub retune_ms: u64,
}

impl CenbState {
    pub const REPORT_RING: usize = 64;

    pub fn new(id: impl Into<String>, location: Point, dedicated_band: FrequencyBand) -> Self {
        Self {
            id: id.into(),
            location,
            tx_power_dbm: 20.0,
            dedicated_band,
            active_block: None,
            bandwidth: None,
            region_cache: Vec::new(),
            pending_handover: None,
            last_reports: VecDeque::new(),
            retune_until_ms: None,
            retune_ms: 10,
        }
    }

    /// Starts on `block`, with the bandwidth its size supports.
    pub fn with_block(mut self, block: Vec<usize>) -> Self {
        self.bandwidth = select_bandwidth(block.len());
        self.active_block = if block.is_empty() { None } else { Some(block) };
        self
    }

    pub fn record_report(&mut self, report: SensingReport) {
        if self.last_reports.len() == Self::REPORT_RING {
            self.last_reports.pop_front();
        }
        self.last_reports.push_back(report);
    }

    pub fn is_retuning(&self, t_ms: u64) -> bool {
        self.retune_until_ms.is_some_and(|end| t_ms < end)
    }

    pub fn active_channels(&self) -> &[usize] {
        self.active_block.as_deref().unwrap_or(&[])
    }
}
