use std::collections::BTreeMap;

use super::{Bandwidth, CenbError, CenbState, CogMessage, MessageKind, FRAME_MS};
use crate::geodb::Region;
use crate::radio_env::ChannelGrid;
use crate::sensing::{Occupancy, SensingReport};

/// Carrier bandwidth for a run of contiguous vacant channels; `None` means
/// no TV channel is usable and traffic falls back to the dedicated band.
pub fn select_bandwidth(vacant_run_length: usize) -> Option<Bandwidth> {
    match vacant_run_length {
        0 => None,
        1 => Some(Bandwidth::Mhz5),
        2 => Some(Bandwidth::Mhz15),
        _ => Some(Bandwidth::Mhz20),
    }
}

/// Latest report per channel among those strictly before `before_ms`.
fn latest_by_channel<'a>(
    reports: impl IntoIterator<Item = &'a SensingReport>,
    before_ms: u64,
) -> BTreeMap<usize, &'a SensingReport> {
    let mut out: BTreeMap<usize, &SensingReport> = BTreeMap::new();
    for r in reports.into_iter().filter(|r| r.t_ms < before_ms) {
        match out.get(&r.channel_index) {
            Some(prev) if prev.t_ms > r.t_ms => {}
            _ => {
                out.insert(r.channel_index, r);
            }
        }
    }
    out
}

/// Channel usable as a handover target: not black, not reported occupied,
/// and either white or grey with a vacant report.
fn usable(ch: usize, regions: &[Region], latest: &BTreeMap<usize, &SensingReport>) -> bool {
    let region = regions.get(ch).copied().unwrap_or(Region::Black);
    match (region, latest.get(&ch).map(|r| r.decision)) {
        (Region::Black, _) | (_, Some(Occupancy::Occupied)) => false,
        (Region::White, _) => true,
        (Region::Grey, Some(Occupancy::Vacant)) => true,
        (Region::Grey, None) => false,
    }
}

/// Longest usable contiguous run, lowest index on ties, truncated to the
/// widest carrier.
fn best_block(grid: &ChannelGrid, pred: impl FnMut(usize) -> bool) -> Vec<usize> {
    let mut best: Vec<usize> = Vec::new();
    for run in grid.runs_where(pred) {
        if run.len() > best.len() {
            best = run;
        }
    }
    best.truncate(Bandwidth::Mhz20.channels());
    best
}

/// Once-per-frame spectrum decision at the boundary of `frame_no`, using
/// only reports stamped before that boundary.
pub fn spectrum_decision(
    state: &CenbState,
    reports: &[SensingReport],
    regions: &[Region],
    grid: &ChannelGrid,
    frame_no: u64,
) -> Result<Option<CogMessage>, CenbError> {
    if state.pending_handover.is_some() {
        return Ok(None);
    }
    let latest = latest_by_channel(reports, frame_no * FRAME_MS);
    let mut vacate = false;
    for &ch in state.active_channels() {
        let region = regions.get(ch).copied().unwrap_or(Region::Black);
        let report = latest.get(&ch).map(|r| r.decision);
        if region == Region::Grey && report.is_none() {
            return Err(CenbError::StaleSensing { channel: ch });
        }
        vacate |= region == Region::Black || report == Some(Occupancy::Occupied);
    }
    let block = best_block(grid, |ch| usable(ch, regions, &latest));
    // A CeNB on the dedicated band only re-enters white space when a block opens.
    let recover = state.active_block.is_none() && !block.is_empty();
    if !vacate && !recover {
        return Ok(None);
    }
    Ok(Some(CogMessage {
        kind: MessageKind::PCogChDecision,
        bandwidth: select_bandwidth(block.len()),
        target_block: block,
        activation_frame: frame_no + 1,
        origin: state.id.clone(),
        frame_no,
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HandoverEvent {
    pub cenb_id: String,
    pub decided_frame: u64,
    pub from_block: Vec<usize>,
    pub to_block: Vec<usize>,
    pub bandwidth: Option<Bandwidth>,
    pub retune_start_ms: u64,
    /// First instant at which data flows again.
    pub restored_ms: u64,
}

impl HandoverEvent {
    /// Decision to data restoration.
    pub fn latency_ms(&self) -> u64 {
        self.restored_ms - self.decided_frame * FRAME_MS
    }
}

/// Applies `msg` at `now_ms`. If the latest reports show the target taken,
/// the handover aborts and a fresh decision becomes pending.
pub fn execute_handover(
    state: &mut CenbState,
    msg: &CogMessage,
    now_ms: u64,
    regions: &[Region],
    grid: &ChannelGrid,
) -> Result<HandoverEvent, CenbError> {
    if msg.origin != state.id {
        return Err(CenbError::Addressing { expected: state.id.clone(), got: msg.origin.clone() });
    }
    let reports: Vec<SensingReport> = state.last_reports.iter().cloned().collect();
    let latest = latest_by_channel(&reports, now_ms + 1);
    if let Some(&ch) = msg.target_block.iter().find(|&&ch| !usable(ch, regions, &latest)) {
        state.pending_handover = None;
        let frame_no = now_ms / FRAME_MS;
        state.pending_handover = spectrum_decision(state, &reports, regions, grid, frame_no)?;
        return Err(CenbError::TargetOccupied { channel: ch });
    }
    let from_block = state.active_block.take().unwrap_or_default();
    state.active_block = if msg.target_block.is_empty() { None } else { Some(msg.target_block.clone()) };
    state.bandwidth = msg.bandwidth;
    state.pending_handover = None;
    let restored_ms = now_ms + state.retune_ms;
    state.retune_until_ms = Some(restored_ms);
    Ok(HandoverEvent {
        cenb_id: state.id.clone(),
        decided_frame: msg.frame_no,
        from_block,
        to_block: msg.target_block.clone(),
        bandwidth: msg.bandwidth,
        retune_start_ms: now_ms,
        restored_ms,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FusionRule {
    #[default]
    Or,
    Majority,
}

impl std::str::FromStr for FusionRule {
    type Err = CenbError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "or" => Ok(FusionRule::Or),
            "majority" => Ok(FusionRule::Majority),
            other => Err(CenbError::Config(format!("unknown fusion rule `{other}`"))),
        }
    }
}

/// Combines the local report with X2 neighbour reports for one channel.
pub fn fuse_cooperative(
    own: &SensingReport,
    neighbors: &[SensingReport],
    rule: FusionRule,
) -> Result<SensingReport, CenbError> {
    for n in neighbors {
        if n.channel_index != own.channel_index {
            return Err(CenbError::Aggregation(format!(
                "channel {} mixed with channel {}",
                n.channel_index, own.channel_index
            )));
        }
        if n.t_ms.abs_diff(own.t_ms) >= FRAME_MS {
            return Err(CenbError::Aggregation(format!(
                "report from {} at {} ms is not within the frame of {} ms",
                n.cenb_id, n.t_ms, own.t_ms
            )));
        }
    }
    let total = 1 + neighbors.len();
    let occupied = std::iter::once(own).chain(neighbors).filter(|r| r.is_occupied()).count();
    let fused = match rule {
        FusionRule::Or => occupied > 0,
        FusionRule::Majority => 2 * occupied > total,
    };
    let mut out = own.clone();
    out.decision = if fused { Occupancy::Occupied } else { Occupancy::Vacant };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radio_env::{china_tv_grid, FrequencyBand, Point};

    fn report(ch: usize, occ: bool, t: u64) -> SensingReport {
        SensingReport {
            cenb_id: "c".into(),
            channel_index: ch,
            decision: if occ { Occupancy::Occupied } else { Occupancy::Vacant },
            carrier_stats_dbm: vec![],
            t_ms: t,
        }
    }

    fn state(block: Vec<usize>) -> CenbState {
        CenbState::new("c", Point::default(), FrequencyBand::new(2570.0, 2590.0).unwrap()).with_block(block)
    }

    /// Grey everywhere, vacant reports except where listed as occupied,
    /// and Black on channels that should not form runs.
    fn scene(occupied: &[usize], black: &[usize]) -> (Vec<Region>, Vec<SensingReport>) {
        let grid = china_tv_grid();
        let regions = (0..grid.len()).map(|c| if black.contains(&c) { Region::Black } else { Region::Grey }).collect();
        let reports = (0..grid.len()).map(|c| report(c, occupied.contains(&c), 1003)).collect();
        (regions, reports)
    }

    #[test]
    fn bandwidth_map() {
        assert_eq!(select_bandwidth(0), None);
        assert_eq!(select_bandwidth(1).unwrap().mhz(), 5);
        assert_eq!(select_bandwidth(2).unwrap().mhz(), 15);
        assert_eq!(select_bandwidth(3).unwrap().mhz(), 20);
        assert_eq!(select_bandwidth(9).unwrap().mhz(), 20);
    }

    #[test]
    fn moves_to_longest_run() {
        let grid = china_tv_grid();
        // Vacant runs {5}, {7}, {12,13,14} and {20}; everything else black.
        let black: Vec<usize> = (0..37).filter(|c| ![5, 6, 7, 12, 13, 14, 20].contains(c)).collect();
        let (regions, reports) = scene(&[6], &black);
        let msg = spectrum_decision(&state(vec![5, 6, 7]), &reports, &regions, &grid, 101).unwrap().unwrap();
        assert_eq!(msg.target_block, vec![12, 13, 14]);
        assert_eq!(msg.bandwidth, Some(Bandwidth::Mhz20));
        assert_eq!(msg.activation_frame, 102);
        assert_eq!(msg.kind, MessageKind::PCogChDecision);
    }

    #[test]
    fn steady_state_is_silent() {
        let grid = china_tv_grid();
        let (regions, reports) = scene(&[], &[]);
        assert_eq!(spectrum_decision(&state(vec![5, 6, 7]), &reports, &regions, &grid, 101).unwrap(), None);
    }

    #[test]
    fn tie_breaks_to_lowest_index() {
        let grid = china_tv_grid();
        let black: Vec<usize> = (0..37).filter(|c| ![8, 9, 10, 30, 31, 32, 2].contains(c)).collect();
        let (regions, reports) = scene(&[2], &black);
        let msg = spectrum_decision(&state(vec![2]), &reports, &regions, &grid, 101).unwrap().unwrap();
        assert_eq!(msg.target_block, vec![8, 9, 10]);
    }

    #[test]
    fn grey_without_report_is_stale() {
        let grid = china_tv_grid();
        let (regions, _) = scene(&[], &[]);
        let err = spectrum_decision(&state(vec![5, 6, 7]), &[], &regions, &grid, 101).unwrap_err();
        assert!(matches!(err, CenbError::StaleSensing { channel: 5 }));
    }

    #[test]
    fn reports_from_the_future_are_ignored() {
        let grid = china_tv_grid();
        let (regions, mut reports) = scene(&[], &[]);
        reports.push(report(6, true, 1010));
        assert_eq!(spectrum_decision(&state(vec![5, 6, 7]), &reports, &regions, &grid, 101).unwrap(), None);
        assert!(spectrum_decision(&state(vec![5, 6, 7]), &reports, &regions, &grid, 102).unwrap().is_some());
    }

    #[test]
    fn black_active_channel_forces_move() {
        let grid = china_tv_grid();
        let (regions, reports) = scene(&[], &[6]);
        let msg = spectrum_decision(&state(vec![5, 6, 7]), &reports, &regions, &grid, 101).unwrap().unwrap();
        assert!(!msg.target_block.contains(&6));
    }

    #[test]
    fn handover_timeline() {
        let grid = china_tv_grid();
        let black: Vec<usize> = (0..37).filter(|c| ![5, 6, 7, 12, 13, 14].contains(c)).collect();
        let (regions, reports) = scene(&[6], &black);
        let mut st = state(vec![5, 6, 7]);
        reports.iter().cloned().for_each(|r| st.record_report(r));
        let msg = spectrum_decision(&st, &reports, &regions, &grid, 101).unwrap().unwrap();
        let ev = execute_handover(&mut st, &msg, 1020, &regions, &grid).unwrap();
        assert_eq!(ev.restored_ms, 1030);
        assert_eq!(ev.latency_ms(), 20);
        assert_eq!(st.active_block, Some(vec![12, 13, 14]));
        assert!(st.is_retuning(1029) && !st.is_retuning(1030));
    }

    #[test]
    fn foreign_message_rejected() {
        let grid = china_tv_grid();
        let (regions, _) = scene(&[], &[]);
        let mut st = state(vec![1]);
        let msg = CogMessage {
            kind: MessageKind::PCogChDecision,
            target_block: vec![2],
            bandwidth: Some(Bandwidth::Mhz5),
            activation_frame: 5,
            origin: "other".into(),
            frame_no: 4,
        };
        let before = st.clone();
        assert!(matches!(execute_handover(&mut st, &msg, 50, &regions, &grid), Err(CenbError::Addressing { .. })));
        assert_eq!(st, before);
    }

    #[test]
    fn abort_when_target_taken() {
        let grid = china_tv_grid();
        let black: Vec<usize> = (0..37).filter(|c| ![1, 12, 13, 14, 20, 21].contains(c)).collect();
        let (regions, reports) = scene(&[1], &black);
        let mut st = state(vec![1]);
        reports.iter().cloned().for_each(|r| st.record_report(r));
        let msg = spectrum_decision(&st, &reports, &regions, &grid, 101).unwrap().unwrap();
        assert_eq!(msg.target_block, vec![12, 13, 14]);
        st.record_report(report(13, true, 1015));
        let before = st.clone();
        let err = execute_handover(&mut st, &msg, 1020, &regions, &grid).unwrap_err();
        assert!(matches!(err, CenbError::TargetOccupied { channel: 13 }));
        let pending = st.pending_handover.clone().unwrap();
        assert_eq!(pending.target_block, vec![20, 21]);
        assert_eq!(pending.bandwidth, Some(Bandwidth::Mhz15));
        st.pending_handover = None;
        assert_eq!(st, before);
    }

    #[test]
    fn fusion_rules() {
        let v = report(3, false, 1003);
        let o = report(3, true, 1003);
        assert!(fuse_cooperative(&v, std::slice::from_ref(&o), FusionRule::Or).unwrap().is_occupied());
        assert!(!fuse_cooperative(&v, &[], FusionRule::Or).unwrap().is_occupied());
        let five = [o.clone(), v.clone(), v.clone(), o.clone()];
        assert!(!fuse_cooperative(&v, &five, FusionRule::Majority).unwrap().is_occupied());
        assert!(matches!(
            fuse_cooperative(&v, &[report(4, true, 1003)], FusionRule::Or),
            Err(CenbError::Aggregation(_))
        ));
        assert!(fuse_cooperative(&v, &[report(3, true, 1020)], FusionRule::Or).is_err());
    }
}
