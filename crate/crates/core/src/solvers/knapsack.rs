//! 0/1 knapsack.

use super::SolverError;

#[derive(Debug, Clone, PartialEq)]
pub struct KnapsackSolution {
    /// Selected item indices, ascending.
    pub selected: Vec<usize>,
    pub value: f64,
}

/// Anything that can pick a subset of items under an integer capacity.
/// AsSched calls this once per neighbor row.
pub trait KnapsackSolver {
    fn solve(
        &self,
        values: &[f64],
        weights: &[u32],
        capacity: u64,
    ) -> Result<KnapsackSolution, SolverError>;
}

/// Exact dynamic program over integer capacity.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactDp;

impl KnapsackSolver for ExactDp {
    fn solve(
        &self,
        values: &[f64],
        weights: &[u32],
        capacity: u64,
    ) -> Result<KnapsackSolution, SolverError> {
        knapsack_max(values, weights, capacity)
    }
}

/// Maximizes total value subject to total weight `<= capacity`.
///
/// Among optimal subsets the lexicographically smallest index set wins:
/// the table is built over suffixes and reconstruction walks items in
/// index order, taking an item whenever taking it is still optimal.
/// (Zero-value items are taken when they fit.)
pub fn knapsack_max(
    values: &[f64],
    weights: &[u32],
    capacity: u64,
) -> Result<KnapsackSolution, SolverError> {
    if values.len() != weights.len() {
        return Err(SolverError::LengthMismatch {
            values: values.len(),
            weights: weights.len(),
        });
    }
    for (i, (&v, &w)) in values.iter().zip(weights).enumerate() {
        if w == 0 {
            return Err(SolverError::ZeroWeight { item: i });
        }
        if !v.is_finite() || v < 0.0 {
            return Err(SolverError::BadValue { item: i });
        }
    }

    if weights.iter().all(|&w| w == 1) {
        return Ok(unit_weights(values, capacity));
    }
    Ok(table(values, weights, capacity))
}

/// With unit weights the optimum is the `capacity` largest values; ties go
/// to lower indices, which is the same set the table reconstruction picks.
fn unit_weights(values: &[f64], capacity: u64) -> KnapsackSolution {
    let mut selected: Vec<usize> = (0..values.len()).collect();
    if (capacity as usize) < values.len() {
        selected.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
        selected.truncate(capacity as usize);
        selected.sort_unstable();
    }
    let value = selected.iter().map(|&i| values[i]).sum();
    KnapsackSolution { selected, value }
}

fn table(values: &[f64], weights: &[u32], capacity: u64) -> KnapsackSolution {
    let total_weight: u64 = weights.iter().map(|&w| u64::from(w)).sum();
    let cap = capacity.min(total_weight) as usize;
    let n = values.len();
    let width = cap + 1;

    // best[i * width + c]: best value using items i.. with capacity c.
    let mut best = vec![0.0f64; (n + 1) * width];
    for i in (0..n).rev() {
        let w = weights[i] as usize;
        let (head, tail) = best.split_at_mut((i + 1) * width);
        let row = &mut head[i * width..];
        let next = &tail[..width];
        for c in 0..width {
            let skip = next[c];
            row[c] = if w <= c {
                let take = values[i] + next[c - w];
                if take >= skip {
                    take
                } else {
                    skip
                }
            } else {
                skip
            };
        }
    }

    let mut selected = Vec::new();
    let mut c = cap;
    for i in 0..n {
        let w = weights[i] as usize;
        if w <= c {
            let next = &best[(i + 1) * width..(i + 2) * width];
            if values[i] + next[c - w] >= next[c] {
                selected.push(i);
                c -= w;
            }
        }
    }
    let value = selected.iter().map(|&i| values[i]).sum();
    KnapsackSolution { selected, value }
}
