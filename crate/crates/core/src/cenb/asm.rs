use std::collections::BTreeSet;

use super::Bandwidth;
use crate::radio_env::{ChannelGrid, Point};

#[derive(Debug, Clone, PartialEq)]
pub struct AsmRequest {
    pub cenb_id: String,
    pub location: Point,
    /// Channels wanted; capped at the widest carrier.
    pub demand: usize,
    /// Channels this CeNB may use according to the database and sensing.
    pub available: BTreeSet<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsmAssignment {
    pub epoch: u64,
    /// `(cenb_id, block)` in request order; a block may be empty.
    pub blocks: Vec<(String, Vec<usize>)>,
}

impl AsmAssignment {
    pub fn block(&self, cenb_id: &str) -> Option<&[usize]> {
        self.blocks.iter().find(|(id, _)| id == cenb_id).map(|(_, b)| b.as_slice())
    }
}

/// Greedy allocation in descending demand order: each CeNB takes the
/// longest run of its available channels not already held by a CeNB closer
/// than `reuse_distance_m`.
pub fn asm_allocate(requests: &[AsmRequest], grid: &ChannelGrid, reuse_distance_m: f64, epoch: u64) -> AsmAssignment {
    let mut order: Vec<usize> = (0..requests.len()).collect();
    order.sort_by(|&a, &b| requests[b].demand.cmp(&requests[a].demand).then(a.cmp(&b)));
    let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); requests.len()];
    for &i in &order {
        let req = &requests[i];
        let taken: BTreeSet<usize> = requests
            .iter()
            .enumerate()
            .filter(|&(j, other)| j != i && other.location.distance(&req.location) < reuse_distance_m)
            .flat_map(|(j, _)| blocks[j].iter().copied())
            .collect();
        let mut best: Vec<usize> = Vec::new();
        for run in grid.runs_where(|c| req.available.contains(&c) && !taken.contains(&c)) {
            if run.len() > best.len() {
                best = run;
            }
        }
        best.truncate(req.demand.min(Bandwidth::Mhz20.channels()));
        blocks[i] = best;
    }
    AsmAssignment { epoch, blocks: requests.iter().map(|r| r.cenb_id.clone()).zip(blocks).collect() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radio_env::china_tv_grid;

    fn req(id: &str, x: f64, avail: impl IntoIterator<Item = usize>) -> AsmRequest {
        AsmRequest {
            cenb_id: id.into(),
            location: Point::new(x, 0.0),
            demand: 3,
            available: avail.into_iter().collect(),
        }
    }

    #[test]
    fn single_cenb_takes_lowest_longest_run() {
        let a = asm_allocate(&[req("a", 0.0, 0..37)], &china_tv_grid(), 1000.0, 0);
        // Channels 12..37 form the longest run above the excluded band.
        assert_eq!(a.block("a").unwrap(), &[12, 13, 14]);
        let a = asm_allocate(&[req("a", 0.0, (0..4).chain(6..10))], &china_tv_grid(), 1000.0, 0);
        assert_eq!(a.block("a").unwrap(), &[0, 1, 2]);
    }

    #[test]
    fn close_neighbours_split_six_channels() {
        let reqs = [req("a", 0.0, 4..10), req("b", 300.0, 4..10)];
        let a = asm_allocate(&reqs, &china_tv_grid(), 1000.0, 1);
        assert_eq!(a.block("a").unwrap(), &[4, 5, 6]);
        assert_eq!(a.block("b").unwrap(), &[7, 8, 9]);
    }

    #[test]
    fn distant_cenbs_reuse() {
        let reqs = [req("a", 0.0, 4..10), req("b", 5000.0, 4..10)];
        let a = asm_allocate(&reqs, &china_tv_grid(), 1000.0, 1);
        assert_eq!(a.block("a"), a.block("b"));
    }

    #[test]
    fn higher_demand_goes_first() {
        let mut small = req("small", 0.0, 4..7);
        small.demand = 1;
        let big = req("big", 10.0, 4..7);
        let a = asm_allocate(&[small, big], &china_tv_grid(), 1000.0, 0);
        assert_eq!(a.block("big").unwrap(), &[4, 5, 6]);
        assert!(a.block("small").unwrap().is_empty());
    }
}
