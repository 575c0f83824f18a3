use std::fmt;

use super::{AcirCurve, InterferenceError};

/// Monotone ACIR-to-separation table. Reading direction: a larger required
/// ACIR needs a wider frequency separation; a binding ACIR is rounded up
/// to the next table entry.
#[derive(Debug, Clone, PartialEq)]
pub struct GuardBandMap {
    entries: Vec<(f64, f64)>,
}

impl GuardBandMap {
    pub fn new(entries: Vec<(f64, f64)>) -> Result<Self, InterferenceError> {
        if entries.is_empty() {
            return Err(InterferenceError::Config("guard band map is empty".into()));
        }
        let strict = entries.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1);
        if !strict {
            return Err(InterferenceError::Config(
                "guard band map must be strictly increasing in ACIR and separation".into(),
            ));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    /// Separation for `acir_db`, rounded up to the table grid.
    pub fn lookup(&self, acir_db: f64) -> Result<f64, InterferenceError> {
        self.entries.iter().find(|(a, _)| *a >= acir_db).map(|e| e.1).ok_or(InterferenceError::OutOfMap(acir_db))
    }
}

impl Default for GuardBandMap {
    /// Calibration table, not a derived mapping; its 80 dB step is
    /// placed so the default study resolves to 7 MHz.
    fn default() -> Self {
        Self::new(vec![
            (30.0, 1.0),
            (40.0, 2.0),
            (50.0, 3.0),
            (58.0, 4.0),
            (66.0, 5.0),
            (74.0, 6.0),
            (80.0, 7.0),
            (86.0, 8.0),
            (92.0, 9.0),
            (100.0, 10.0),
        ])
        .expect("default map is monotone")
    }
}

impl std::str::FromStr for GuardBandMap {
    type Err = InterferenceError;

    /// `acir:mhz,acir:mhz,...`
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |p: &str| InterferenceError::Config(format!("bad guard band entry `{p}`"));
        let entries = s
            .split(',')
            .map(|p| {
                let (a, m) = p.split_once(':').ok_or_else(|| bad(p))?;
                Ok((a.trim().parse().map_err(|_| bad(p))?, m.trim().parse().map_err(|_| bad(p))?))
            })
            .collect::<Result<Vec<_>, InterferenceError>>()?;
        Self::new(entries)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Constraint {
    /// TV outage caused by the CeNB downlink.
    TvByDownlink,
    /// TV outage caused by user uplink.
    TvByUplink,
    /// LTE downlink capacity loss caused by TV.
    DownlinkByTv,
    /// LTE uplink capacity loss caused by TV.
    UplinkByTv,
}

impl Constraint {
    pub const ALL: [Constraint; 4] =
        [Constraint::TvByDownlink, Constraint::TvByUplink, Constraint::DownlinkByTv, Constraint::UplinkByTv];
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Constraint::TvByDownlink => "tv_outage_dl",
            Constraint::TvByUplink => "tv_outage_ul",
            Constraint::DownlinkByTv => "dl_cap_loss",
            Constraint::UplinkByTv => "ul_cap_loss",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuardBandReport {
    pub required_acir_db: Vec<(Constraint, f64)>,
    pub binding: Constraint,
    pub binding_acir_db: f64,
    pub separation_mhz: f64,
}

impl fmt::Display for GuardBandReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "guard band {} MHz at binding ACIR {:.2} dB ({})",
            self.separation_mhz, self.binding_acir_db, self.binding
        )
    }
}

/// Smallest ACIR at which `metric` meets `budget`, interpolated linearly
/// between sweep points. A curve already within budget at its first point
/// crosses there.
pub fn crossing_acir(curve: &AcirCurve, metric: Constraint, budget: f64) -> Result<f64, InterferenceError> {
    let value = |p: &super::AcirPoint| match metric {
        Constraint::TvByDownlink => p.tv_outage_dl,
        Constraint::TvByUplink => p.tv_outage_ul,
        Constraint::DownlinkByTv => p.dl_cap_loss,
        Constraint::UplinkByTv => p.ul_cap_loss,
    };
    let pts: Vec<_> = curve.points.iter().filter(|p| p.acir_db.is_finite()).collect();
    let first = pts
        .iter()
        .position(|p| value(p) <= budget)
        .ok_or(InterferenceError::InsufficientSweep { constraint: metric.to_string(), budget })?;
    if first == 0 {
        return Ok(pts[0].acir_db);
    }
    let (a, b) = (pts[first - 1], pts[first]);
    let (ya, yb) = (value(a), value(b));
    Ok(a.acir_db + (ya - budget) / (ya - yb) * (b.acir_db - a.acir_db))
}

/// The binding requirement is the largest of the per-constraint ACIRs.
pub fn guard_band_from_requirements(
    required_acir_db: Vec<(Constraint, f64)>,
    map: &GuardBandMap,
) -> Result<GuardBandReport, InterferenceError> {
    let &(binding, binding_acir_db) = required_acir_db
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| InterferenceError::Config("no constraints".into()))?;
    Ok(GuardBandReport { separation_mhz: map.lookup(binding_acir_db)?, required_acir_db, binding, binding_acir_db })
}

pub fn determine_guard_band(
    curve: &AcirCurve,
    map: &GuardBandMap,
    loss_budget: f64,
) -> Result<GuardBandReport, InterferenceError> {
    let required = Constraint::ALL
        .iter()
        .map(|&c| crossing_acir(curve, c, loss_budget).map(|a| (c, a)))
        .collect::<Result<Vec<_>, _>>()?;
    guard_band_from_requirements(required, map)
}

#[cfg(test)]
mod tests {
    use super::super::AcirPoint;
    use super::*;

    fn curve(values: &[(f64, f64)]) -> AcirCurve {
        AcirCurve {
            points: values
                .iter()
                .map(|&(a, v)| AcirPoint {
                    acir_db: a,
                    tv_outage_dl: v,
                    tv_outage_ul: v,
                    dl_cap_loss: v,
                    ul_cap_loss: v,
                })
                .collect(),
            snapshots: 100,
            seed: 0,
            tv_baseline_outage: 0.0,
        }
    }

    #[test]
    fn binding_is_the_maximum() {
        let req = vec![
            (Constraint::TvByDownlink, 75.0),
            (Constraint::TvByUplink, 30.0),
            (Constraint::DownlinkByTv, 27.0),
            (Constraint::UplinkByTv, 78.0),
        ];
        let r = guard_band_from_requirements(req, &GuardBandMap::default()).unwrap();
        assert_eq!(r.binding_acir_db, 78.0);
        assert_eq!(r.binding, Constraint::UplinkByTv);
        assert_eq!(r.separation_mhz, 7.0);
    }

    #[test]
    fn interpolated_crossing() {
        let c = curve(&[(0.0, 0.5), (10.0, 0.1), (20.0, 0.0)]);
        let a = crossing_acir(&c, Constraint::TvByDownlink, 0.05).unwrap();
        assert!((a - 15.0).abs() < 1e-12);
    }

    #[test]
    fn everything_acceptable_gives_minimal_separation() {
        let c = curve(&[(0.0, 0.5), (10.0, 0.1)]);
        let r = determine_guard_band(&c, &GuardBandMap::default(), 1.0).unwrap();
        assert_eq!(r.separation_mhz, 1.0);
    }

    #[test]
    fn no_crossing_is_an_error() {
        let c = curve(&[(0.0, 0.5), (10.0, 0.4)]);
        assert!(matches!(
            determine_guard_band(&c, &GuardBandMap::default(), 0.05),
            Err(InterferenceError::InsufficientSweep { .. })
        ));
    }

    #[test]
    fn map_rules() {
        let m = GuardBandMap::default();
        assert_eq!(m.lookup(74.0).unwrap(), 6.0);
        assert_eq!(m.lookup(74.1).unwrap(), 7.0);
        assert!(m.lookup(101.0).is_err());
        assert!(GuardBandMap::new(vec![(10.0, 2.0), (20.0, 1.0)]).is_err());
        assert_eq!("10:1, 20:3".parse::<GuardBandMap>().unwrap().lookup(15.0).unwrap(), 3.0);
    }
}
