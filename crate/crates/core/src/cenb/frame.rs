use std::fmt;

use super::CenbError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subframe {
    Downlink,
    Special,
    Uplink,
}

impl fmt::Display for Subframe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Subframe::Downlink => "D",
            Subframe::Special => "S",
            Subframe::Uplink => "U",
        })
    }
}

/// DwPTS / GP / UpPTS durations of a special subframe, in ms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecialSplit {
    pub dwpts_ms: f64,
    pub gp_ms: f64,
    pub uppts_ms: f64,
}

impl Default for SpecialSplit {
    fn default() -> Self {
        Self { dwpts_ms: 0.2, gp_ms: 0.7, uppts_ms: 0.1 }
    }
}

impl SpecialSplit {
    pub fn validate(&self, require_uppts: bool) -> Result<(), CenbError> {
        let parts = [self.dwpts_ms, self.gp_ms, self.uppts_ms];
        if parts.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(CenbError::Config("special subframe parts must be non-negative".into()));
        }
        if (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(CenbError::Config(format!(
                "special subframe split {}/{}/{} does not sum to 1 ms",
                self.dwpts_ms, self.gp_ms, self.uppts_ms
            )));
        }
        if require_uppts && self.uppts_ms <= 0.0 {
            return Err(CenbError::Config("UpPTS must be non-empty".into()));
        }
        if self.gp_ms <= 0.0 {
            return Err(CenbError::Config("guard period must be non-empty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameConfig {
    /// TD-LTE uplink/downlink configuration 0..=6.
    pub config_id: u8,
    pub split: SpecialSplit,
    /// Also sense during uplink subframe 2 when it carries no traffic.
    pub wide_scan: bool,
    pub require_uppts: bool,
}

impl Default for FrameConfig {
    fn default() -> Self {
        Self { config_id: 2, split: SpecialSplit::default(), wide_scan: true, require_uppts: true }
    }
}

pub const FRAME_MS: u64 = 10;
pub const MAX_SENSING_MS: f64 = 2.0;

fn tdd_pattern(config_id: u8) -> Option<&'static str> {
    Some(match config_id {
        0 => "DSUUUDSUUU",
        1 => "DSUUDDSUUD",
        2 => "DSUDDDSUDD",
        3 => "DSUUUDDDDD",
        4 => "DSUUDDDDDD",
        5 => "DSUDDDDDDD",
        6 => "DSUUUDSUUD",
        _ => return None,
    })
}

/// One 10 ms radio frame with its sensing windows.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSchedule {
    pub pattern: [Subframe; 10],
    pub split: SpecialSplit,
    /// Subframes hosting sensing: the first special subframe (its GP) and,
    /// with wide scan, uplink subframe 2.
    pub sensing_subframes: Vec<usize>,
}

pub fn build_frame_schedule(cfg: &FrameConfig) -> Result<FrameSchedule, CenbError> {
    let text = tdd_pattern(cfg.config_id)
        .ok_or_else(|| CenbError::Config(format!("unknown TDD configuration {}", cfg.config_id)))?;
    let mut pattern = [Subframe::Downlink; 10];
    for (slot, c) in pattern.iter_mut().zip(text.chars()) {
        *slot = match c {
            'D' => Subframe::Downlink,
            'S' => Subframe::Special,
            _ => Subframe::Uplink,
        };
    }
    FrameSchedule::from_pattern(pattern, cfg.split, cfg.wide_scan, cfg.require_uppts)
}

impl FrameSchedule {
    pub fn from_pattern(
        pattern: [Subframe; 10],
        split: SpecialSplit,
        wide_scan: bool,
        require_uppts: bool,
    ) -> Result<Self, CenbError> {
        split.validate(require_uppts)?;
        if pattern[1] != Subframe::Special {
            return Err(CenbError::Config("subframe 1 must be a special subframe".into()));
        }
        let mut sensing_subframes = vec![1];
        if wide_scan {
            if pattern[2] != Subframe::Uplink {
                return Err(CenbError::Config("wide scan needs subframe 2 to be uplink".into()));
            }
            sensing_subframes.push(2);
        }
        let s = Self { pattern, split, sensing_subframes };
        if s.sensing_budget_ms() > MAX_SENSING_MS + 1e-12 {
            return Err(CenbError::Config(format!("sensing budget {} ms exceeds 2 ms", s.sensing_budget_ms())));
        }
        Ok(s)
    }

    /// Sensing time per frame: the guard period plus every full uplink
    /// subframe used for sensing.
    pub fn sensing_budget_ms(&self) -> f64 {
        let full = self.sensing_subframes.iter().filter(|&&i| self.pattern[i] == Subframe::Uplink).count();
        self.split.gp_ms + full as f64
    }

    /// Sensing windows as `[start, end)` offsets within the frame, in ms.
    pub fn sensing_windows(&self) -> Vec<(f64, f64)> {
        self.sensing_subframes
            .iter()
            .map(|&i| match self.pattern[i] {
                Subframe::Special => {
                    let start = i as f64 + self.split.dwpts_ms;
                    (start, start + self.split.gp_ms)
                }
                _ => (i as f64, i as f64 + 1.0),
            })
            .collect()
    }

    /// Whole-ms offset at which this frame's sensing is complete.
    pub fn sensing_done_offset_ms(&self) -> u64 {
        self.sensing_windows().iter().map(|w| w.1).fold(0.0, f64::max).ceil() as u64
    }

    /// Offset of the first DwPTS, where decisions are broadcast.
    pub fn broadcast_offset_ms(&self) -> u64 {
        self.pattern.iter().position(|s| *s == Subframe::Special).unwrap_or(1) as u64
    }

    /// Subframes that carry downlink data.
    pub fn is_data_subframe(&self, i: usize) -> bool {
        self.pattern[i % 10] == Subframe::Downlink && !self.sensing_subframes.contains(&(i % 10))
    }

    pub fn data_subframes(&self) -> usize {
        (0..10).filter(|&i| self.is_data_subframe(i)).count()
    }

    /// True when `t_ms` falls inside a DwPTS of a special subframe.
    pub fn is_dwpts_instant(&self, t_ms: u64) -> bool {
        self.pattern[(t_ms % FRAME_MS) as usize] == Subframe::Special
    }
}

impl fmt::Display for FrameSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.pattern {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}
