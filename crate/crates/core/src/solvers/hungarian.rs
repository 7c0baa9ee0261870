//! Maximum-weight perfect assignment (Hungarian method, O(n^3)).
//!
//! Shortest-augmenting-path formulation with row/column potentials. Rows are
//! inserted in index order and, among equally cheap columns, the lowest
//! index is taken first, so the result is a deterministic function of the
//! input.

use super::{Matching, SolverError, WeightMatrix};

/// Solves the square assignment problem, maximizing the weight sum.
///
/// Forbidden cells are priced at a finite penalty large enough that the
/// returned matching uses as few of them as possible; rows that still land
/// on a forbidden cell are reported as `None`.
pub fn hungarian_max(matrix: &WeightMatrix) -> Result<Matching, SolverError> {
    if !matrix.is_square() {
        return Err(SolverError::NotSquare {
            rows: matrix.rows(),
            cols: matrix.cols(),
        });
    }
    let n = matrix.rows();
    if n == 0 {
        return Ok(Matching {
            assignment: Vec::new(),
            objective: 0.0,
        });
    }
    let penalty = forbidden_penalty(matrix);
    let mut cost = Vec::with_capacity(n * n);
    for r in 0..n {
        for c in 0..n {
            cost.push(match matrix.get(r, c) {
                Some(w) => -w,
                None => penalty,
            });
        }
    }
    let cols_for_rows = min_cost_assignment(n, n, &cost);
    let assignment: Vec<Option<usize>> = cols_for_rows
        .into_iter()
        .enumerate()
        .map(|(r, c)| (!matrix.is_forbidden(r, c)).then_some(c))
        .collect();
    let objective = matrix.objective_of(&assignment);
    Ok(Matching {
        assignment,
        objective,
    })
}

/// Solves the rectangular assignment problem, maximizing the weight sum:
/// every row of the smaller side is matched to a distinct row or column of
/// the larger side. Equal to padding the matrix square with constant-weight
/// cells and calling [`hungarian_max`], without the padding's cost.
pub fn hungarian_max_rect(matrix: &WeightMatrix) -> Matching {
    let (rows, cols) = (matrix.rows(), matrix.cols());
    if rows == 0 || cols == 0 {
        return Matching {
            assignment: vec![None; rows],
            objective: 0.0,
        };
    }
    let penalty = forbidden_penalty(matrix);
    let transposed = rows > cols;
    let (short, long) = if transposed {
        (cols, rows)
    } else {
        (rows, cols)
    };
    let mut cost = Vec::with_capacity(short * long);
    for a in 0..short {
        for b in 0..long {
            let (r, c) = if transposed { (b, a) } else { (a, b) };
            cost.push(match matrix.get(r, c) {
                Some(w) => -w,
                None => penalty,
            });
        }
    }
    let picks = min_cost_assignment(short, long, &cost);
    let mut assignment = vec![None; rows];
    for (a, b) in picks.into_iter().enumerate() {
        let (r, c) = if transposed { (b, a) } else { (a, b) };
        if !matrix.is_forbidden(r, c) {
            assignment[r] = Some(c);
        }
    }
    let objective = matrix.objective_of(&assignment);
    Matching {
        assignment,
        objective,
    }
}

/// Penalty charged for a forbidden cell: a power of two at least
/// `2 n (max|w| + 1)`, so it is exact in binary floating point and exceeds
/// any difference between two feasible objectives.
pub(crate) fn forbidden_penalty(matrix: &WeightMatrix) -> f64 {
    let n = matrix.rows().max(matrix.cols()).max(1) as f64;
    let bound = 2.0 * n * (matrix.max_abs() + 1.0);
    2f64.powi(bound.log2().ceil() as i32)
}

/// Minimum-cost assignment of every row to a distinct column
/// (`rows <= cols`), with `cost` laid out row-major. Returns the column of
/// each row.
pub(crate) fn min_cost_assignment(rows: usize, cols: usize, cost: &[f64]) -> Vec<usize> {
    assert!(rows <= cols, "need rows <= cols, got {rows}x{cols}");
    assert_eq!(cost.len(), rows * cols);

    // 1-based indices; column 0 is the virtual source of each augmentation.
    let mut u = vec![0.0f64; rows + 1];
    let mut v = vec![0.0f64; cols + 1];
    let mut owner = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];
    let mut minv = vec![f64::INFINITY; cols + 1];
    let mut used = vec![false; cols + 1];

    for row in 1..=rows {
        owner[0] = row;
        let mut j0 = 0usize;
        minv.fill(f64::INFINITY);
        used.fill(false);

        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let base = (i0 - 1) * cols;
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=cols {
                if used[j] {
                    continue;
                }
                let reduced = cost[base + j - 1] - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=cols {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }

        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut out = vec![usize::MAX; rows];
    for j in 1..=cols {
        if owner[j] > 0 {
            out[owner[j] - 1] = j - 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::brute::{best_permutation, brute_force_mcap};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diagonal_dominance() {
        let m = WeightMatrix::from_rows(&[vec![10.0, 0.0], vec![0.0, 10.0]]).unwrap();
        let r = hungarian_max(&m).unwrap();
        assert_eq!(r.assignment, vec![Some(0), Some(1)]);
        assert_eq!(r.objective, 20.0);
    }

    #[test]
    fn two_by_two_prefers_larger_diagonal() {
        // 1 + 5 = 6 beats 2 + 3 = 5
        let m = WeightMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 5.0]]).unwrap();
        let r = hungarian_max(&m).unwrap();
        assert_eq!(r.assignment, vec![Some(0), Some(1)]);
        assert_eq!(r.objective, 6.0);
    }

    #[test]
    fn singleton() {
        let m = WeightMatrix::from_rows(&[vec![-4.25]]).unwrap();
        let r = hungarian_max(&m).unwrap();
        assert_eq!(r.assignment, vec![Some(0)]);
        assert_eq!(r.objective, -4.25);
    }

    #[test]
    fn rejects_non_square() {
        let m = WeightMatrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        assert_eq!(
            hungarian_max(&m),
            Err(SolverError::NotSquare { rows: 1, cols: 2 })
        );
    }

    #[test]
    fn avoids_forbidden_cells_when_possible() {
        // The only perfect matching free of forbidden cells is the
        // anti-diagonal, even though it is lighter.
        let m = WeightMatrix::from_options(&[vec![Some(100.0), Some(1.0)], vec![Some(1.0), None]])
            .unwrap();
        let r = hungarian_max(&m).unwrap();
        assert_eq!(r.assignment, vec![Some(1), Some(0)]);
        assert_eq!(r.objective, 2.0);
    }

    #[test]
    fn all_forbidden_leaves_everything_unassigned() {
        let m = WeightMatrix::forbidden(3, 3);
        let r = hungarian_max(&m).unwrap();
        assert_eq!(r.assigned(), 0);
        assert_eq!(r.objective, 0.0);
    }

    #[test]
    fn penalty_is_exact_power_of_two_and_dominates() {
        let m = WeightMatrix::from_rows(&[vec![7.5, -3.0], vec![1.0, 0.0]]).unwrap();
        let p = forbidden_penalty(&m);
        assert_eq!(p.log2().fract(), 0.0);
        assert!(p > 2.0 * 2.0 * 7.5);
    }

    #[test]
    fn rectangular_core_matches_mcap_on_full_rows() {
        // With every cell allowed and rows <= cols, the min-cost core solves
        // the rectangular problem directly.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let rows = rng.gen_range(1..=3);
            let cols = rng.gen_range(rows..=5);
            let grid: Vec<Vec<f64>> = (0..rows)
                .map(|_| {
                    (0..cols)
                        .map(|_| rng.gen_range(1..=40) as f64 / 4.0)
                        .collect()
                })
                .collect();
            let m = WeightMatrix::from_rows(&grid).unwrap();
            let cost: Vec<f64> = grid.iter().flatten().map(|w| -w).collect();
            let picks = min_cost_assignment(rows, cols, &cost);
            let total: f64 = picks.iter().enumerate().map(|(r, &c)| grid[r][c]).sum();
            assert_eq!(total, brute_force_mcap(&m).unwrap().objective);
        }
    }

    fn dyadic_matrix(n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
        proptest::collection::vec(
            proptest::collection::vec((-160i32..=160).prop_map(|k| k as f64 / 16.0), n),
            n,
        )
    }

    proptest! {
        #[test]
        fn matches_permutation_brute_force(grid in (1usize..=6).prop_flat_map(dyadic_matrix)) {
            let m = WeightMatrix::from_rows(&grid).unwrap();
            let fast = hungarian_max(&m).unwrap();
            let (_, best) = best_permutation(&m).unwrap();
            prop_assert!(fast.is_injective());
            prop_assert_eq!(fast.assigned(), grid.len());
            prop_assert_eq!(fast.objective, best);
        }

        #[test]
        fn scaling_preserves_optimality(
            grid in (1usize..=5).prop_flat_map(dyadic_matrix),
            k in 1u32..=4,
        ) {
            let factor = f64::from(1u32 << k);
            let m = WeightMatrix::from_rows(&grid).unwrap();
            let scaled = m.scaled(factor);
            let base = hungarian_max(&m).unwrap();
            let up = hungarian_max(&scaled).unwrap();
            prop_assert_eq!(up.objective, base.objective * factor);
            // the scaled answer is still optimal for the original weights
            prop_assert_eq!(m.objective_of(&up.assignment), base.objective);
        }
    }
}
