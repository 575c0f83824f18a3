use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{HarnessError, ScenarioConfig};
use crate::cenb::{
    asm_allocate, build_frame_schedule, execute_handover, fuse_cooperative, select_bandwidth, spectrum_decision,
    AsmRequest, Bandwidth, CenbError, CenbState, CogMessage, FrameSchedule, MessageKind, FRAME_MS,
};
use crate::exec::{substream, Execution};
use crate::geodb::{query_vacant_channels, Region};
use crate::interference::{acir_sweep, AcirCurve};
use crate::radio_env::{PathLoss, RadioEnv};
use crate::sensing::{detect_tv, observe, Occupancy, SensingReport};
use crate::units::thermal_noise_dbm;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlrSample {
    pub index: usize,
    /// Window start.
    pub t_ms: u64,
    pub offered: u64,
    pub lost: u64,
    pub delivered: u64,
    pub plr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HandoverRecord {
    pub cenb_id: String,
    /// First lost subframe on the vacated block, or the decision instant
    /// when nothing was lost.
    pub t_detect_ms: u64,
    pub t_restore_ms: u64,
    pub latency_ms: u64,
    pub from_block: Vec<usize>,
    pub to_block: Vec<usize>,
    pub bandwidth: Option<Bandwidth>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    TvOn,
    TvOff,
    Asm,
    Sense,
    Decide,
    Broadcast,
    RetuneStart,
    RetuneEnd,
    Abort,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            EventKind::TvOn => "TV_ON",
            EventKind::TvOff => "TV_OFF",
            EventKind::Asm => "ASM",
            EventKind::Sense => "SENSE",
            EventKind::Decide => "DECIDE",
            EventKind::Broadcast => "BROADCAST",
            EventKind::RetuneStart => "RETUNE_START",
            EventKind::RetuneEnd => "RETUNE_END",
            EventKind::Abort => "ABORT",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub t_ms: u64,
    /// CeNB or TV transmitter id.
    pub source: String,
    pub kind: EventKind,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricsSeries {
    pub plr: Vec<PlrSample>,
    pub handovers: Vec<HandoverRecord>,
    /// Fused, confirmed reports in the order they were produced.
    pub sensing_log: Vec<SensingReport>,
    /// `bandwidth[frame][cenb]` at the start of each frame.
    pub bandwidth: Vec<Vec<Option<Bandwidth>>>,
}

impl MetricsSeries {
    pub fn mean_latency_ms(&self) -> Option<f64> {
        (!self.handovers.is_empty())
            .then(|| self.handovers.iter().map(|h| h.latency_ms as f64).sum::<f64>() / self.handovers.len() as f64)
    }

    pub fn max_latency_ms(&self) -> Option<u64> {
        self.handovers.iter().map(|h| h.latency_ms).max()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimOutput {
    pub metrics: MetricsSeries,
    pub events: Vec<Event>,
    pub acir_curve: Option<AcirCurve>,
}

fn fmt_block(b: &[usize]) -> String {
    match b {
        [] => "none".into(),
        [c] => c.to_string(),
        [first, .., last] => format!("{first}-{last}"),
    }
}

fn fmt_bw(bw: Option<Bandwidth>) -> String {
    bw.map_or("none".into(), |b| format!("{}MHz", b.mhz()))
}

struct Node {
    state: CenbState,
    /// Database regions at the CeNB location.
    regions: Vec<Region>,
    path_loss: PathLoss,
    sense_rng: ChaCha8Rng,
    traffic_rng: ChaCha8Rng,
    /// Consecutive occupied fused decisions per channel.
    streak: Vec<u32>,
    confirmed: Vec<Occupancy>,
    /// Co-channel INR per transmitter, in dB.
    tv_inr_db: Vec<f64>,
    disrupted_since: Option<u64>,
    restore_at: Option<(u64, String)>,
}

struct Sim<'a> {
    cfg: &'a ScenarioConfig,
    env: RadioEnv,
    schedule: FrameSchedule,
    nodes: Vec<Node>,
    out: SimOutput,
}

impl<'a> Sim<'a> {
    fn log(&mut self, t_ms: u64, source: &str, kind: EventKind, detail: String) {
        self.out.events.push(Event { t_ms, source: source.to_string(), kind, detail });
    }

    /// Regions as seen by node `i`: channels held by a CeNB within the
    /// reuse distance are treated as black.
    fn view(&self, i: usize) -> Vec<Region> {
        let mut regions = self.nodes[i].regions.clone();
        let here = self.nodes[i].state.location;
        for (j, other) in self.nodes.iter().enumerate() {
            if j != i && other.state.location.distance(&here) < self.cfg.asm.reuse_distance_m {
                for &ch in other.state.active_channels() {
                    regions[ch] = Region::Black;
                }
            }
        }
        regions
    }

    fn usable_now(&self, i: usize) -> BTreeSet<usize> {
        let view = self.view(i);
        let node = &self.nodes[i];
        (0..view.len())
            .filter(|&c| match view[c] {
                Region::White => true,
                Region::Grey => node.confirmed[c] == Occupancy::Vacant && node.streak[c] == 0 && self.sensed(i, c),
                Region::Black => false,
            })
            .collect()
    }

    fn sensed(&self, i: usize, ch: usize) -> bool {
        self.nodes[i].state.last_reports.iter().any(|r| r.channel_index == ch)
    }

    /// ASM allocation for idle CeNBs; `initial` applies blocks directly.
    fn run_asm(&mut self, t: u64, frame: u64, initial: bool) -> Result<(), HarnessError> {
        let idle: Vec<usize> = (0..self.nodes.len())
            .filter(|&i| {
                let s = &self.nodes[i].state;
                s.active_block.is_none() && s.pending_handover.is_none()
            })
            .collect();
        if idle.is_empty() {
            return Ok(());
        }
        let requests: Vec<AsmRequest> = idle
            .iter()
            .map(|&i| AsmRequest {
                cenb_id: self.nodes[i].state.id.clone(),
                location: self.nodes[i].state.location,
                demand: Bandwidth::Mhz20.channels(),
                available: self.usable_now(i),
            })
            .collect();
        let assignment = asm_allocate(&requests, &self.cfg.grid, self.cfg.asm.reuse_distance_m, frame);
        for (&i, (id, block)) in idle.iter().zip(assignment.blocks) {
            self.log(t, &id, EventKind::Asm, format!("epoch={} block={}", assignment.epoch, fmt_block(&block)));
            if block.is_empty() {
                continue;
            }
            let state = &mut self.nodes[i].state;
            if initial {
                *state = state.clone().with_block(block);
            } else {
                state.pending_handover = Some(CogMessage {
                    kind: MessageKind::CogCchRrc,
                    bandwidth: select_bandwidth(block.len()),
                    target_block: block,
                    activation_frame: frame + 1,
                    origin: id,
                    frame_no: frame,
                });
            }
        }
        Ok(())
    }

    fn execute(&mut self, i: usize, t: u64, frame: u64) -> Result<(), HarnessError> {
        let due = self.nodes[i].state.pending_handover.as_ref().is_some_and(|m| m.activation_frame == frame);
        if !due {
            return Ok(());
        }
        let msg = self.nodes[i].state.pending_handover.clone().expect("due message");
        let view = self.view(i);
        let id = self.nodes[i].state.id.clone();
        match execute_handover(&mut self.nodes[i].state, &msg, t, &view, &self.cfg.grid) {
            Ok(ev) => {
                let node = &mut self.nodes[i];
                let decided = ev.decided_frame * FRAME_MS;
                let t_detect = node.disrupted_since.map_or(decided, |d| d.min(decided));
                node.disrupted_since = None;
                let detail = format!("block={} bw={}", fmt_block(&ev.to_block), fmt_bw(ev.bandwidth));
                node.restore_at = Some((ev.restored_ms, detail.clone()));
                self.out.metrics.handovers.push(HandoverRecord {
                    cenb_id: id.clone(),
                    t_detect_ms: t_detect,
                    t_restore_ms: ev.restored_ms,
                    latency_ms: ev.restored_ms - t_detect,
                    from_block: ev.from_block,
                    to_block: ev.to_block,
                    bandwidth: ev.bandwidth,
                });
                self.log(t, &id, EventKind::RetuneStart, detail);
            }
            Err(CenbError::TargetOccupied { channel }) => {
                self.log(t, &id, EventKind::Abort, format!("target channel {channel} occupied"));
            }
            Err(e) => return Err(HarnessError::Runtime(format!("{id}: {e}"))),
        }
        Ok(())
    }

    fn decide(&mut self, i: usize, t: u64, frame: u64) -> Result<(), HarnessError> {
        let view = self.view(i);
        let node = &self.nodes[i];
        let reports: Vec<SensingReport> = node.state.last_reports.iter().cloned().collect();
        let msg = spectrum_decision(&node.state, &reports, &view, &self.cfg.grid, frame)
            .map_err(|e| HarnessError::Runtime(format!("{}: {e}", node.state.id)))?;
        if let Some(msg) = msg {
            let id = node.state.id.clone();
            let detail = format!(
                "from={} to={} bw={} activate_frame={}",
                fmt_block(node.state.active_channels()),
                fmt_block(&msg.target_block),
                fmt_bw(msg.bandwidth),
                msg.activation_frame
            );
            self.nodes[i].state.pending_handover = Some(msg);
            self.log(t, &id, EventKind::Decide, detail);
        }
        Ok(())
    }

    fn sense(&mut self, t: u64, frame: u64) -> Result<(), HarnessError> {
        let t_obs = frame * FRAME_MS + 1;
        let snapshots = self.cfg.detector.snapshot_count();
        let mut raw: Vec<BTreeMap<usize, SensingReport>> = Vec::with_capacity(self.nodes.len());
        for node in &mut self.nodes {
            let mut mine = BTreeMap::new();
            for ch in (0..node.regions.len()).filter(|&c| node.regions[c] == Region::Grey) {
                let mean = self
                    .env
                    .received_channel_spectrum(
                        node.state.location,
                        &self.cfg.transmitters,
                        t_obs,
                        ch,
                        &mut node.path_loss,
                    )
                    .map_err(|e| HarnessError::Runtime(e.to_string()))?;
                let obs = observe(&mean, snapshots, &mut node.sense_rng);
                let rep = detect_tv(&self.cfg.detector, &obs, ch, &self.cfg.grid)
                    .map_err(|e| HarnessError::Runtime(e.to_string()))?
                    .stamped(node.state.id.clone(), t);
                mine.insert(ch, rep);
            }
            raw.push(mine);
        }
        for i in 0..self.nodes.len() {
            for (ch, own) in &raw[i] {
                let neighbors: Vec<SensingReport> =
                    (0..raw.len()).filter(|&j| j != i).filter_map(|j| raw[j].get(ch).cloned()).collect();
                let fused = fuse_cooperative(own, &neighbors, self.cfg.handover.fusion)
                    .map_err(|e| HarnessError::Runtime(e.to_string()))?;
                let node = &mut self.nodes[i];
                node.streak[*ch] = if fused.is_occupied() { node.streak[*ch] + 1 } else { 0 };
                let decision = if node.streak[*ch] >= self.cfg.handover.confirm_frames {
                    Occupancy::Occupied
                } else {
                    Occupancy::Vacant
                };
                let report = SensingReport { decision, ..fused };
                let changed = node.confirmed[*ch] != decision;
                node.confirmed[*ch] = decision;
                node.state.record_report(report.clone());
                self.out.metrics.sensing_log.push(report);
                if changed {
                    let id = node.state.id.clone();
                    self.log(t, &id, EventKind::Sense, format!("ch={ch} {decision}"));
                }
            }
        }
        Ok(())
    }

    /// Downlink traffic of one data subframe; returns (offered, lost).
    fn traffic(&mut self, i: usize, t: u64) -> (u64, u64) {
        let pps = self.cfg.traffic.packets_per_subframe as u64;
        let node = &mut self.nodes[i];
        let block = node.state.active_channels();
        let interfered = self.cfg.transmitters.iter().zip(&node.tv_inr_db).any(|(tx, &inr)| {
            block.contains(&tx.channel_index) && inr >= self.cfg.traffic.inr_threshold_db && tx.is_active(t)
        });
        if interfered && node.disrupted_since.is_none() {
            node.disrupted_since = Some(t);
        }
        if block.is_empty() || interfered || node.state.is_retuning(t) {
            return (pps, pps);
        }
        let p = self.cfg.traffic.random_loss;
        let lost = if p > 0.0 { (0..pps).filter(|_| node.traffic_rng.random::<f64>() < p).count() as u64 } else { 0 };
        (pps, lost)
    }

    fn tv_transitions(&mut self, t: u64) {
        if t == 0 {
            return;
        }
        let changes: Vec<(String, bool)> = self
            .cfg
            .transmitters
            .iter()
            .filter(|tx| tx.is_active(t) != tx.is_active(t - 1))
            .map(|tx| (tx.id.clone(), tx.is_active(t)))
            .collect();
        for (id, on) in changes {
            let ch = self.cfg.transmitters.iter().find(|tx| tx.id == id).map_or(0, |tx| tx.channel_index);
            self.log(t, &id, if on { EventKind::TvOn } else { EventKind::TvOff }, format!("ch={ch}"));
        }
    }

    fn run(mut self) -> Result<SimOutput, HarnessError> {
        self.run_asm(0, 0, true)?;
        let broadcast = self.schedule.broadcast_offset_ms();
        let sensing_done = self.schedule.sensing_done_offset_ms();
        let (mut offered, mut lost) = (0u64, 0u64);
        for t in 0..self.cfg.duration_ms {
            let frame = t / FRAME_MS;
            let off = t % FRAME_MS;
            self.tv_transitions(t);
            if off == 0 {
                for i in 0..self.nodes.len() {
                    self.execute(i, t, frame)?;
                }
                if frame > 0 && frame.is_multiple_of(self.cfg.asm.epoch_frames) {
                    self.run_asm(t, frame, false)?;
                }
                if frame > 0 {
                    for i in 0..self.nodes.len() {
                        self.decide(i, t, frame)?;
                    }
                }
                let bw = self.nodes.iter().map(|n| n.state.bandwidth).collect();
                self.out.metrics.bandwidth.push(bw);
            }
            for i in 0..self.nodes.len() {
                if let Some((at, detail)) = self.nodes[i].restore_at.clone() {
                    if at == t {
                        self.nodes[i].restore_at = None;
                        let id = self.nodes[i].state.id.clone();
                        self.log(t, &id, EventKind::RetuneEnd, detail);
                    }
                }
                if off == broadcast {
                    let msg = self.nodes[i].state.pending_handover.clone();
                    if let Some(m) = msg.filter(|m| m.frame_no == frame) {
                        let detail =
                            format!("block={} activate_frame={}", fmt_block(&m.target_block), m.activation_frame);
                        self.log(t, &m.origin, EventKind::Broadcast, detail);
                    }
                }
            }
            if off == sensing_done {
                self.sense(t, frame)?;
            }
            if self.schedule.is_data_subframe(off as usize) {
                for i in 0..self.nodes.len() {
                    let (o, l) = self.traffic(i, t);
                    offered += o;
                    lost += l;
                }
            }
            if off == FRAME_MS - 1 {
                let plr = if offered == 0 { 0.0 } else { lost as f64 / offered as f64 };
                self.out.metrics.plr.push(PlrSample {
                    index: frame as usize,
                    t_ms: frame * FRAME_MS,
                    offered,
                    lost,
                    delivered: offered - lost,
                    plr,
                });
                (offered, lost) = (0, 0);
            }
        }
        Ok(self.out)
    }
}

/// Runs the scenario for `duration_ms` in 1 ms ticks. The event loop is
/// single-threaded; only the optional interference study fans out.
pub fn run_simulation(cfg: &ScenarioConfig) -> Result<SimOutput, HarnessError> {
    let schedule = build_frame_schedule(&cfg.frame).map_err(|e| HarnessError::Config(format!("`frame`: {e}")))?;
    let mut env = RadioEnv::new(cfg.grid.clone());
    env.noise_figure_db = cfg.detector.noise_figure_db;
    let channel_noise_dbm = thermal_noise_dbm(cfg.grid.channel_width_mhz * 1e6, env.noise_figure_db);
    let mut nodes = Vec::with_capacity(cfg.cenbs.len());
    for (i, spec) in cfg.cenbs.iter().enumerate() {
        let regions: Vec<Region> =
            query_vacant_channels(&cfg.geodb, spec.location, spec.power_dbm, &cfg.prop, &cfg.grid)
                .into_iter()
                .map(|(_, r)| r)
                .collect();
        let mut state = CenbState::new(spec.id.clone(), spec.location, spec.dedicated_band);
        state.tx_power_dbm = spec.power_dbm;
        state.retune_ms = cfg.handover.retune_ms;
        state.region_cache = regions.clone();
        if let Some(block) = &spec.initial_block {
            if let Some(&ch) = block.iter().find(|&&c| regions[c] == Region::Black) {
                return Err(HarnessError::Config(format!(
                    "`cenb.{}.initial_block`: channel {ch} is in a black region",
                    spec.id
                )));
            }
            state = state.with_block(block.clone());
        }
        let mut tv_inr_db = Vec::with_capacity(cfg.transmitters.len());
        for tx in &cfg.transmitters {
            let ch = cfg.grid.channel(tx.channel_index).expect("validated channel");
            let d = spec.location.distance(&tx.location).max(cfg.prop.ref_distance_m);
            let loss = cfg.prop.median_loss_db(d, ch.center_mhz()).map_err(|e| HarnessError::Runtime(e.to_string()))?;
            tv_inr_db.push(tx.eirp_dbm - loss - channel_noise_dbm);
        }
        let prop = crate::radio_env::PropagationConfig { seed: cfg.seed.wrapping_add(i as u64), ..cfg.prop.clone() };
        nodes.push(Node {
            state,
            path_loss: PathLoss::new(prop).map_err(|e| HarnessError::Config(e.to_string()))?,
            sense_rng: substream(cfg.seed, 2 * i as u64),
            traffic_rng: substream(cfg.seed, 2 * i as u64 + 1),
            streak: vec![0; regions.len()],
            confirmed: vec![Occupancy::Vacant; regions.len()],
            regions,
            tv_inr_db,
            disrupted_since: None,
            restore_at: None,
        });
    }
    let sim = Sim { cfg, env, schedule, nodes, out: SimOutput::default() };
    let mut out = sim.run()?;
    if let Some(study) = &cfg.interference {
        let curve =
            acir_sweep(&study.topology(), study, &study.acir_db, study.snapshots, study.seed, Execution::Parallel)
                .map_err(|e| HarnessError::Runtime(e.to_string()))?;
        out.acir_curve = Some(curve);
    }
    Ok(out)
}
