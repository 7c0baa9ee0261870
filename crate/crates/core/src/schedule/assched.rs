//! AsSched: row-by-row knapsack heuristic for the layered (GAP) case.
//!
//! Neighbors are visited from most to least reliable. Each one gets a
//! knapsack over the chunks it holds that nobody earlier took, with its
//! estimated bandwidth as capacity and chunk sizes as weights. Whatever it
//! picks is masked out for the rows that follow.

use std::collections::BTreeMap;

use super::{build_matrix, NeighborView, ScheduleDecision, ScheduleError};
use crate::priority::{ChunkMeta, PriorityParams};
use crate::solvers::{ExactDp, KnapsackSolver};
use crate::Tick;

pub fn assched(
    missing: &[ChunkMeta],
    neighbors: &[NeighborView],
    now: Tick,
    params: &PriorityParams,
) -> Result<ScheduleDecision, ScheduleError> {
    assched_with(missing, neighbors, now, params, &ExactDp)
}

/// AsSched with a caller-supplied knapsack solver.
pub fn assched_with<K: KnapsackSolver + ?Sized>(
    missing: &[ChunkMeta],
    neighbors: &[NeighborView],
    now: Tick,
    params: &PriorityParams,
    solver: &K,
) -> Result<ScheduleDecision, ScheduleError> {
    let sm = build_matrix(missing, neighbors, now, params)?;
    let mut taken = vec![false; sm.columns.len()];
    let mut requests = BTreeMap::new();

    let mut cols = Vec::new();
    let mut values = Vec::new();
    let mut weights = Vec::new();
    for (row, &k) in sm.row_neighbors.iter().enumerate() {
        let view = &neighbors[k];
        cols.clear();
        values.clear();
        weights.clear();
        for (c, chunk) in sm.columns.iter().enumerate() {
            if taken[c] {
                continue;
            }
            if let Some(p) = sm.matrix.get(row, c) {
                cols.push(c);
                values.push(p);
                weights.push(chunk.size);
            }
        }
        if cols.is_empty() {
            continue;
        }
        let picked = solver.solve(&values, &weights, u64::from(view.est_download))?;
        for i in picked.selected {
            let c = cols[i];
            taken[c] = true;
            requests.insert(sm.columns[c].seq, view.neighbor_id);
        }
    }
    Ok(ScheduleDecision::from_requests(
        missing,
        &sm.priority_map(),
        requests,
    ))
}
