//! NAsSched: optimal scheduling of equal-size chunks.
//!
//! Each neighbor `k` becomes `b_k` unit-capacity rows, which turns the
//! capacitated problem into an m-cardinality assignment (m rows, l chunk
//! columns). Squaring that matrix with constant-weight padding (virtual
//! rows when `l > m`, dummy columns when `m > l`) makes it a plain
//! assignment problem: every perfect matching uses all padding cells, so
//! the padding adds the same constant to every candidate and the optimum
//! over the real cells is the m-cardinality optimum. The solver works on
//! the unpadded rectangle, which has the same optimum.
//!
//! Two reductions keep the matrix small without changing that optimum:
//! a neighbor never gets more rows than chunks it can actually serve, and
//! chunks no neighbor holds are left out (they can only be unassigned).

use std::collections::BTreeMap;

use super::{build_matrix, NeighborView, ScheduleDecision, ScheduleError, ScheduleMatrix};
use crate::priority::{ChunkMeta, PriorityParams};
use crate::solvers::{hungarian_max_rect, WeightMatrix};
use crate::Tick;

/// Weight of every padding cell.
pub const VIRTUAL_WEIGHT: f64 = 1.0;

/// The m x l matrix of unit-capacity rows against servable chunks.
#[derive(Debug, Clone)]
pub struct ExpandedMatrix {
    pub matrix: WeightMatrix,
    /// Index into `neighbors` for each row.
    pub row_owner: Vec<usize>,
    /// Index into the schedule matrix columns for each column.
    pub col_chunk: Vec<usize>,
}

/// Applies the row expansion and the two reductions.
pub fn expanded_matrix(sm: &ScheduleMatrix, neighbors: &[NeighborView]) -> ExpandedMatrix {
    let col_chunk: Vec<usize> = (0..sm.columns.len())
        .filter(|&c| (0..sm.matrix.rows()).any(|r| !sm.matrix.is_forbidden(r, c)))
        .collect();

    // (schedule-matrix row, neighbor index) per expanded row
    let mut expanded = Vec::new();
    for (r, &k) in sm.row_neighbors.iter().enumerate() {
        let held = col_chunk
            .iter()
            .filter(|&&c| !sm.matrix.is_forbidden(r, c))
            .count();
        let rows = (neighbors[k].est_download as usize).min(held);
        expanded.extend(std::iter::repeat_n((r, k), rows));
    }

    let mut matrix = WeightMatrix::forbidden(expanded.len(), col_chunk.len());
    for (i, &(r, _)) in expanded.iter().enumerate() {
        for (j, &c) in col_chunk.iter().enumerate() {
            if let Some(w) = sm.matrix.get(r, c) {
                matrix.set(i, j, w).expect("finite weight");
            }
        }
    }
    ExpandedMatrix {
        matrix,
        row_owner: expanded.into_iter().map(|(_, k)| k).collect(),
        col_chunk,
    }
}

/// The squared m-cardinality matrix and what each row and column stands
/// for.
#[derive(Debug, Clone)]
pub struct SquareMatrix {
    pub matrix: WeightMatrix,
    /// Index into `neighbors` for real rows, `None` for virtual rows.
    pub row_owner: Vec<Option<usize>>,
    /// Index into the schedule matrix columns for real columns, `None` for
    /// dummy columns.
    pub col_chunk: Vec<Option<usize>>,
    /// Number of real rows (m).
    pub real_rows: usize,
    /// Number of real columns (l).
    pub real_cols: usize,
}

/// Pads the expanded matrix square with [`VIRTUAL_WEIGHT`] cells.
pub fn square_assignment_matrix(sm: &ScheduleMatrix, neighbors: &[NeighborView]) -> SquareMatrix {
    let ex = expanded_matrix(sm, neighbors);
    let (m, l) = (ex.matrix.rows(), ex.matrix.cols());
    let n = m.max(l);
    let mut matrix = WeightMatrix::forbidden(n, n);
    for i in 0..n {
        for j in 0..n {
            let cell = if i < m && j < l {
                ex.matrix.get(i, j)
            } else {
                Some(VIRTUAL_WEIGHT)
            };
            if let Some(w) = cell {
                matrix.set(i, j, w).expect("finite weight");
            }
        }
    }
    SquareMatrix {
        matrix,
        row_owner: (0..n).map(|i| ex.row_owner.get(i).copied()).collect(),
        col_chunk: (0..n).map(|j| ex.col_chunk.get(j).copied()).collect(),
        real_rows: m,
        real_cols: l,
    }
}

pub fn nassched(
    missing: &[ChunkMeta],
    neighbors: &[NeighborView],
    now: Tick,
    params: &PriorityParams,
) -> Result<ScheduleDecision, ScheduleError> {
    if let Some(c) = missing.iter().find(|c| c.size != 1) {
        return Err(ScheduleError::NonUnitSize {
            seq: c.seq,
            size: c.size,
        });
    }
    let sm = build_matrix(missing, neighbors, now, params)?;
    let ex = expanded_matrix(&sm, neighbors);
    let matching = hungarian_max_rect(&ex.matrix);
    // forbidden picks come back as None, so every pick is a real holder
    let requests: BTreeMap<_, _> = matching
        .assignment
        .iter()
        .enumerate()
        .filter_map(|(i, col)| {
            col.map(|j| {
                (
                    sm.columns[ex.col_chunk[j]].seq,
                    neighbors[ex.row_owner[i]].neighbor_id,
                )
            })
        })
        .collect();
    Ok(ScheduleDecision::from_requests(
        missing,
        &sm.priority_map(),
        requests,
    ))
}
