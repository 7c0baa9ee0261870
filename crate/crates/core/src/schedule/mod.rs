//! Per-period chunk scheduling.
//!
//! Every strategy takes the node's missing chunks `M(i)` and a snapshot of
//! its neighbors and returns a [`ScheduleDecision`]: which neighbor to ask
//! for which chunk this period. All of them respect the same two
//! constraints: a chunk is requested from at most one neighbor, and a
//! neighbor is never asked for more than its estimated download capacity.

mod assched;
mod baseline;
mod nassched;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::peer::BufferMap;
use crate::priority::{chunk_priority, ChunkMeta, PriorityError, PriorityParams};
use crate::solvers::{canonical_sum, SolverError, WeightMatrix};
use crate::{NodeId, Seq, Tick};

pub use assched::{assched, assched_with};
pub use baseline::{baseline_schedule, BaselineKind};
pub use nassched::{
    expanded_matrix, nassched, square_assignment_matrix, ExpandedMatrix, SquareMatrix,
    VIRTUAL_WEIGHT,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScheduleError {
    #[error(transparent)]
    Priority(#[from] PriorityError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("chunk {seq} has size {size}; this scheduler needs unit-size chunks")]
    NonUnitSize { seq: Seq, size: u32 },
    #[error("unknown strategy `{0}` (expected assched, nassched, rnd, lrf or rr)")]
    UnknownStrategy(String),
}

/// What a node knows about one neighbor when it schedules.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborView {
    pub neighbor_id: NodeId,
    pub buffer_map: BufferMap,
    /// Estimated chunks per tick this neighbor can deliver to us.
    pub est_download: u32,
    /// Recent fraction of requests the neighbor honored.
    pub reliability: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ScheduleDecision {
    /// Chunk seq -> neighbor asked for it.
    pub requests: BTreeMap<Seq, NodeId>,
    /// Missing chunks not requested this period.
    pub unassigned: BTreeSet<Seq>,
    /// Priority sum of the requested chunks.
    pub objective: f64,
}

impl ScheduleDecision {
    /// Builds a decision from the chosen requests; everything else in
    /// `missing` is unassigned. The objective is the canonical sum of their priorities.
    pub fn from_requests(
        missing: &[ChunkMeta],
        priorities: &BTreeMap<Seq, f64>,
        requests: BTreeMap<Seq, NodeId>,
    ) -> Self {
        let unassigned = missing
            .iter()
            .map(|c| c.seq)
            .filter(|s| !requests.contains_key(s))
            .collect();
        let objective = canonical_sum(requests.keys().map(|s| priorities[s]));
        ScheduleDecision {
            requests,
            unassigned,
            objective,
        }
    }

    pub fn requested(&self) -> usize {
        self.requests.len()
    }

    /// Checks the decision against the inputs it was computed from.
    pub fn validate(
        &self,
        missing: &[ChunkMeta],
        neighbors: &[NeighborView],
    ) -> Result<(), Violation> {
        let by_seq: BTreeMap<Seq, &ChunkMeta> = missing.iter().map(|c| (c.seq, c)).collect();
        let by_id: BTreeMap<NodeId, &NeighborView> =
            neighbors.iter().map(|n| (n.neighbor_id, n)).collect();
        let mut load: BTreeMap<NodeId, u64> = BTreeMap::new();
        for (&seq, &nb) in &self.requests {
            let chunk = by_seq.get(&seq).ok_or(Violation::NotMissing { seq })?;
            let view = by_id
                .get(&nb)
                .ok_or(Violation::UnknownNeighbor { seq, neighbor: nb })?;
            if !view.buffer_map.holds(seq) {
                return Err(Violation::NotHeld { seq, neighbor: nb });
            }
            *load.entry(nb).or_default() += u64::from(chunk.size);
        }
        for (&nb, &used) in &load {
            let cap = u64::from(by_id[&nb].est_download);
            if used > cap {
                return Err(Violation::OverCapacity {
                    neighbor: nb,
                    load: used,
                    capacity: cap,
                });
            }
        }
        if let Some(&seq) = self
            .unassigned
            .iter()
            .find(|s| self.requests.contains_key(s))
        {
            return Err(Violation::BothRequestedAndUnassigned { seq });
        }
        Ok(())
    }
}

/// A broken scheduling constraint.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("chunk {seq} requested but not missing")]
    NotMissing { seq: Seq },
    #[error("chunk {seq} requested from unknown neighbor {neighbor}")]
    UnknownNeighbor { seq: Seq, neighbor: NodeId },
    #[error("chunk {seq} requested from neighbor {neighbor}, which does not hold it")]
    NotHeld { seq: Seq, neighbor: NodeId },
    #[error("neighbor {neighbor} asked for {load} units, capacity {capacity}")]
    OverCapacity {
        neighbor: NodeId,
        load: u64,
        capacity: u64,
    },
    #[error("chunk {seq} is both requested and unassigned")]
    BothRequestedAndUnassigned { seq: Seq },
}

/// Priority matrix of one scheduling round.
#[derive(Debug, Clone)]
pub struct ScheduleMatrix {
    /// Rows are neighbors, columns missing chunks.
    pub matrix: WeightMatrix,
    /// Index into the `neighbors` slice for each row.
    pub row_neighbors: Vec<usize>,
    /// Chunk for each column, ascending by seq.
    pub columns: Vec<ChunkMeta>,
    /// Priority of each column's chunk.
    pub priorities: Vec<f64>,
}

impl ScheduleMatrix {
    pub fn priority_map(&self) -> BTreeMap<Seq, f64> {
        self.columns
            .iter()
            .zip(&self.priorities)
            .map(|(c, p)| (c.seq, *p))
            .collect()
    }
}

/// Builds the neighbors x missing-chunks priority matrix.
///
/// `cell(k, j)` is chunk `j`'s priority if neighbor `k` holds it and
/// forbidden otherwise. Rows go by descending reliability (ties: lower
/// neighbor id), columns by ascending seq.
pub fn build_matrix(
    missing: &[ChunkMeta],
    neighbors: &[NeighborView],
    now: Tick,
    params: &PriorityParams,
) -> Result<ScheduleMatrix, ScheduleError> {
    let mut columns = missing.to_vec();
    columns.sort_by_key(|c| c.seq);
    let priorities = columns
        .iter()
        .map(|c| chunk_priority(c, now, params))
        .collect::<Result<Vec<_>, _>>()?;

    let mut row_neighbors: Vec<usize> = (0..neighbors.len()).collect();
    row_neighbors.sort_by(|&a, &b| {
        let (na, nb) = (&neighbors[a], &neighbors[b]);
        nb.reliability
            .total_cmp(&na.reliability)
            .then(na.neighbor_id.cmp(&nb.neighbor_id))
    });

    let mut matrix = WeightMatrix::forbidden(row_neighbors.len(), columns.len());
    for (r, &k) in row_neighbors.iter().enumerate() {
        let map = &neighbors[k].buffer_map;
        for (c, chunk) in columns.iter().enumerate() {
            if map.holds(chunk.seq) {
                matrix.set(r, c, priorities[c])?;
            }
        }
    }
    Ok(ScheduleMatrix {
        matrix,
        row_neighbors,
        columns,
        priorities,
    })
}

/// Scheduling strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    AsSched,
    NAsSched,
    Rnd,
    Lrf,
    Rr,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::AsSched,
        Strategy::NAsSched,
        Strategy::Rnd,
        Strategy::Lrf,
        Strategy::Rr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::AsSched => "assched",
            Strategy::NAsSched => "nassched",
            Strategy::Rnd => "rnd",
            Strategy::Lrf => "lrf",
            Strategy::Rr => "rr",
        }
    }

    pub fn baseline(self) -> Option<BaselineKind> {
        match self {
            Strategy::Rnd => Some(BaselineKind::Rnd),
            Strategy::Lrf => Some(BaselineKind::Lrf),
            Strategy::Rr => Some(BaselineKind::Rr),
            Strategy::AsSched | Strategy::NAsSched => None,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = ScheduleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| ScheduleError::UnknownStrategy(s.to_string()))
    }
}

/// Runs `strategy` on one node's scheduling round.
pub fn schedule<R: Rng + ?Sized>(
    strategy: Strategy,
    missing: &[ChunkMeta],
    neighbors: &[NeighborView],
    now: Tick,
    params: &PriorityParams,
    rng: &mut R,
) -> Result<ScheduleDecision, ScheduleError> {
    match strategy {
        Strategy::AsSched => assched(missing, neighbors, now, params),
        Strategy::NAsSched => nassched(missing, neighbors, now, params),
        Strategy::Rnd | Strategy::Lrf | Strategy::Rr => {
            let kind = strategy.baseline().expect("baseline strategy");
            baseline_schedule(kind, missing, neighbors, now, params, rng)
        }
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// The five-chunk, three-neighbor example: neighbor 2 holds
    /// {1,2,3,5} and can send 2, neighbor 3 holds {4,5} and can send 2,
    /// neighbor 4 holds {1,4} and can send 1. All chunks share a deadline.
    pub fn worked_example() -> (Vec<ChunkMeta>, Vec<NeighborView>) {
        let missing: Vec<ChunkMeta> = (1..=5).map(|s| ChunkMeta::new(s, 1, 10)).collect();
        let view = |id, held: &[Seq], cap| NeighborView {
            neighbor_id: id,
            buffer_map: BufferMap::from_held(1, 5, held.iter().copied()),
            est_download: cap,
            reliability: 1.0,
        };
        let neighbors = vec![
            view(2, &[1, 2, 3, 5], 2),
            view(3, &[4, 5], 2),
            view(4, &[1, 4], 1),
        ];
        (missing, neighbors)
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::worked_example;
    use super::*;

    #[test]
    fn nobody_holds_anything() {
        let missing = vec![ChunkMeta::new(0, 1, 3), ChunkMeta::new(1, 1, 3)];
        let nb = NeighborView {
            neighbor_id: 1,
            buffer_map: BufferMap::from_held(0, 2, []),
            est_download: 4,
            reliability: 1.0,
        };
        let sm = build_matrix(&missing, &[nb], 0, &PriorityParams::single_layer()).unwrap();
        assert_eq!(sm.matrix.allowed_count(), 0);
    }

    #[test]
    fn single_holder_row_has_equal_weights() {
        let missing: Vec<_> = (0..3).map(|s| ChunkMeta::new(s, 1, 5)).collect();
        let nb = NeighborView {
            neighbor_id: 1,
            buffer_map: BufferMap::from_held(0, 3, [0, 1, 2]),
            est_download: 4,
            reliability: 1.0,
        };
        let sm = build_matrix(&missing, &[nb], 5, &PriorityParams::single_layer()).unwrap();
        assert_eq!(sm.matrix.rows(), 1);
        assert_eq!(
            (0..3).map(|c| sm.matrix.get(0, c)).collect::<Vec<_>>(),
            vec![Some(1.0); 3]
        );
    }

    #[test]
    fn worked_example_matrix_pattern() {
        let (missing, neighbors) = worked_example();
        let sm = build_matrix(&missing, &neighbors, 10, &PriorityParams::single_layer()).unwrap();
        assert_eq!((sm.matrix.rows(), sm.matrix.cols()), (3, 5));
        assert_eq!(sm.matrix.allowed_count(), 8);
        let pattern: Vec<Vec<u8>> = (0..3)
            .map(|r| {
                (0..5)
                    .map(|c| u8::from(!sm.matrix.is_forbidden(r, c)))
                    .collect()
            })
            .collect();
        assert_eq!(
            pattern,
            vec![
                vec![1, 1, 1, 0, 1],
                vec![0, 0, 0, 1, 1],
                vec![1, 0, 0, 1, 0]
            ]
        );
    }

    #[test]
    fn rows_follow_reliability_then_id() {
        let (missing, mut neighbors) = worked_example();
        neighbors[0].reliability = 0.5;
        neighbors[2].reliability = 0.9;
        let sm = build_matrix(&missing, &neighbors, 10, &PriorityParams::single_layer()).unwrap();
        let ids: Vec<_> = sm
            .row_neighbors
            .iter()
            .map(|&k| neighbors[k].neighbor_id)
            .collect();
        assert_eq!(ids, vec![3, 4, 2]);
    }

    #[test]
    fn expired_chunk_is_rejected() {
        let missing = vec![ChunkMeta::new(0, 1, 3)];
        assert!(matches!(
            build_matrix(&missing, &[], 4, &PriorityParams::single_layer()),
            Err(ScheduleError::Priority(_))
        ));
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
        }
        assert_eq!("NAsSched".parse::<Strategy>().unwrap(), Strategy::NAsSched);
        assert!(matches!(
            "fifo".parse::<Strategy>(),
            Err(ScheduleError::UnknownStrategy(_))
        ));
    }

    #[test]
    fn validate_catches_each_violation() {
        let (missing, neighbors) = worked_example();
        let prio: BTreeMap<Seq, f64> = missing.iter().map(|c| (c.seq, 1.0)).collect();
        let ok = ScheduleDecision::from_requests(
            &missing,
            &prio,
            BTreeMap::from([(1, 4), (2, 2), (3, 2), (4, 3), (5, 3)]),
        );
        assert_eq!(ok.validate(&missing, &neighbors), Ok(()));
        assert_eq!(ok.objective, 5.0);

        let not_held = ScheduleDecision::from_requests(&missing, &prio, BTreeMap::from([(2, 3)]));
        assert!(matches!(
            not_held.validate(&missing, &neighbors),
            Err(Violation::NotHeld { .. })
        ));
        let over =
            ScheduleDecision::from_requests(&missing, &prio, BTreeMap::from([(1, 4), (4, 4)]));
        assert!(matches!(
            over.validate(&missing, &neighbors),
            Err(Violation::OverCapacity { .. })
        ));
        let mut stray = ScheduleDecision::default();
        stray.requests.insert(99, 2);
        assert!(matches!(
            stray.validate(&missing, &neighbors),
            Err(Violation::NotMissing { seq: 99 })
        ));
    }
}
