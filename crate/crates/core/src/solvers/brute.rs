//! Exhaustive oracles. Small instances only; every entry point refuses
//! work beyond a fixed enumeration budget.

use super::{canonical_sum, Matching, SolverError, WeightMatrix};

/// Upper bound on search nodes visited by any single enumeration.
pub const ENUMERATION_BUDGET: u64 = 50_000_000;

/// Best perfect matching of a square matrix by trying every permutation.
///
/// Fewer forbidden cells wins first, then larger weight sum. Returns the
/// column per row and the weight sum (forbidden cells count as 0).
pub fn best_permutation(matrix: &WeightMatrix) -> Result<(Vec<usize>, f64), SolverError> {
    if !matrix.is_square() {
        return Err(SolverError::NotSquare {
            rows: matrix.rows(),
            cols: matrix.cols(),
        });
    }
    let n = matrix.rows();
    if n > 10 {
        return Err(SolverError::EnumerationBudget {
            what: "permutations",
            size: n,
        });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best: Option<(usize, f64, Vec<usize>)> = None;
    permute(&mut perm, 0, &mut |p| {
        let mut forbidden = 0usize;
        let mut total = 0.0;
        for (r, &c) in p.iter().enumerate() {
            match matrix.get(r, c) {
                Some(w) => total += w,
                None => forbidden += 1,
            }
        }
        let better = match &best {
            None => true,
            Some((bf, bt, _)) => forbidden < *bf || (forbidden == *bf && total > *bt),
        };
        if better {
            best = Some((forbidden, total, p.to_vec()));
        }
    });
    let (_, total, p) = best.expect("at least one permutation");
    Ok((p, total))
}

fn permute(items: &mut [usize], k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

/// Best 0/1 knapsack subset by enumerating every subset.
///
/// Ties go to the subset that includes the lowest index where the two
/// differ. Returns selected indices (ascending) and the total value.
pub fn best_subset(
    values: &[f64],
    weights: &[u32],
    capacity: u64,
) -> Result<(Vec<usize>, f64), SolverError> {
    if values.len() != weights.len() {
        return Err(SolverError::LengthMismatch {
            values: values.len(),
            weights: weights.len(),
        });
    }
    let n = values.len();
    if n > 24 {
        return Err(SolverError::EnumerationBudget {
            what: "subsets",
            size: n,
        });
    }
    let mut best_mask = 0u32;
    let mut best_value = 0.0f64;
    for mask in 0u32..(1u32 << n) {
        let mut weight = 0u64;
        let mut value = 0.0;
        for i in 0..n {
            if mask & (1 << i) != 0 {
                weight += u64::from(weights[i]);
                value += values[i];
            }
        }
        if weight > capacity {
            continue;
        }
        let better =
            value > best_value || (value == best_value && prefers_inclusion(mask, best_mask));
        if better {
            best_mask = mask;
            best_value = value;
        }
    }
    let selected: Vec<usize> = (0..n).filter(|i| best_mask & (1 << i) != 0).collect();
    let value = selected.iter().map(|&i| values[i]).sum();
    Ok((selected, value))
}

/// True if `a` contains the lowest index at which `a` and `b` differ.
fn prefers_inclusion(a: u32, b: u32) -> bool {
    let diff = a ^ b;
    diff != 0 && a & (diff & diff.wrapping_neg()) != 0
}

/// Maximum-weight injective partial assignment of rows to columns using
/// allowed cells only. Any row may stay unassigned and then contributes 0.
pub fn brute_force_mcap(matrix: &WeightMatrix) -> Result<Matching, SolverError> {
    let rows = matrix.rows();
    let cols = matrix.cols();
    let mut search = McapSearch {
        matrix,
        used: vec![false; cols],
        current: vec![None; rows],
        best: vec![None; rows],
        best_value: 0.0,
        visited: 0,
    };
    search.dfs(0, 0.0)?;
    let objective = matrix.objective_of(&search.best);
    Ok(Matching {
        assignment: search.best,
        objective,
    })
}

struct McapSearch<'a> {
    matrix: &'a WeightMatrix,
    used: Vec<bool>,
    current: Vec<Option<usize>>,
    best: Vec<Option<usize>>,
    best_value: f64,
    visited: u64,
}

impl McapSearch<'_> {
    fn dfs(&mut self, row: usize, value: f64) -> Result<(), SolverError> {
        self.visited += 1;
        if self.visited > ENUMERATION_BUDGET {
            return Err(SolverError::EnumerationBudget {
                what: "m-cardinality assignments",
                size: self.matrix.rows() * self.matrix.cols(),
            });
        }
        if row == self.matrix.rows() {
            // recompute in row order so the sum matches objective_of exactly
            let total = self.matrix.objective_of(&self.current);
            debug_assert!((total - value).abs() <= 1e-9 * (1.0 + value.abs()));
            if total > self.best_value {
                self.best_value = total;
                self.best.clone_from(&self.current);
            }
            return Ok(());
        }
        for col in 0..self.matrix.cols() {
            if self.used[col] {
                continue;
            }
            if let Some(w) = self.matrix.get(row, col) {
                self.used[col] = true;
                self.current[row] = Some(col);
                self.dfs(row + 1, value + w)?;
                self.current[row] = None;
                self.used[col] = false;
            }
        }
        self.dfs(row + 1, value)
    }
}

/// Exact optimum of the capacitated chunk assignment:
/// maximize the priority sum of assigned chunks such that each chunk goes
/// to at most one row holding it and each row's assigned sizes fit its
/// capacity.
#[derive(Debug, Clone, PartialEq)]
pub struct GapSolution {
    /// Row serving each column (chunk), if any.
    pub assignment: Vec<Option<usize>>,
    pub objective: f64,
}

pub fn brute_force_gap(
    priorities: &WeightMatrix,
    capacities: &[u64],
    sizes: &[u32],
) -> Result<GapSolution, SolverError> {
    let rows = priorities.rows();
    let cols = priorities.cols();
    if capacities.len() != rows {
        return Err(SolverError::LengthMismatch {
            values: rows,
            weights: capacities.len(),
        });
    }
    if sizes.len() != cols {
        return Err(SolverError::LengthMismatch {
            values: cols,
            weights: sizes.len(),
        });
    }
    let space = (rows as f64 + 1.0).powi(cols as i32);
    if space > ENUMERATION_BUDGET as f64 {
        return Err(SolverError::EnumerationBudget {
            what: "GAP assignments",
            size: rows * cols,
        });
    }
    let mut search = GapSearch {
        priorities,
        sizes,
        residual: capacities.to_vec(),
        current: vec![None; cols],
        best: vec![None; cols],
        best_value: 0.0,
    };
    search.dfs(0);
    let objective = gap_objective(priorities, &search.best);
    Ok(GapSolution {
        assignment: search.best,
        objective,
    })
}

/// Priority sum of a column -> row assignment, summed canonically.
pub fn gap_objective(priorities: &WeightMatrix, assignment: &[Option<usize>]) -> f64 {
    canonical_sum(
        assignment
            .iter()
            .enumerate()
            .filter_map(|(c, r)| r.and_then(|r| priorities.get(r, c))),
    )
}

struct GapSearch<'a> {
    priorities: &'a WeightMatrix,
    sizes: &'a [u32],
    residual: Vec<u64>,
    current: Vec<Option<usize>>,
    best: Vec<Option<usize>>,
    best_value: f64,
}

impl GapSearch<'_> {
    fn dfs(&mut self, col: usize) {
        if col == self.priorities.cols() {
            let total = gap_objective(self.priorities, &self.current);
            if total > self.best_value {
                self.best_value = total;
                self.best.clone_from(&self.current);
            }
            return;
        }
        let size = u64::from(self.sizes[col]);
        for row in 0..self.priorities.rows() {
            if self.priorities.is_forbidden(row, col) || self.residual[row] < size {
                continue;
            }
            self.residual[row] -= size;
            self.current[col] = Some(row);
            self.dfs(col + 1);
            self.current[col] = None;
            self.residual[row] += size;
        }
        self.dfs(col + 1);
    }
}
