use std::fmt;

use super::SolverError;

/// Sum in ascending order, so the result depends only on the multiset of
/// values and not on the order they come in.
pub fn canonical_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.into_iter().collect();
    v.sort_by(f64::total_cmp);
    v.into_iter().sum()
}

/// Dense rectangular weight grid with a per-cell "forbidden" mask.
///
/// Forbidden cells stand for the `-M` sentinel of the assignment models.
/// They are never stored as a literal large number; each solver picks its
/// own finite penalty.
#[derive(Clone, PartialEq)]
pub struct WeightMatrix {
    rows: usize,
    cols: usize,
    cells: Vec<f64>,
    forbidden: Vec<bool>,
}

impl WeightMatrix {
    /// A matrix with every cell forbidden.
    pub fn forbidden(rows: usize, cols: usize) -> Self {
        WeightMatrix {
            rows,
            cols,
            cells: vec![0.0; rows * cols],
            forbidden: vec![true; rows * cols],
        }
    }

    /// Builds a matrix from rows of `Some(weight)` / `None` (forbidden).
    pub fn from_options(rows: &[Vec<Option<f64>>]) -> Result<Self, SolverError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = WeightMatrix::forbidden(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(SolverError::Ragged {
                    row: r,
                    expected: cols,
                    got: row.len(),
                });
            }
            for (c, cell) in row.iter().enumerate() {
                if let Some(w) = *cell {
                    m.set(r, c, w)?;
                }
            }
        }
        Ok(m)
    }

    /// Builds a fully allowed matrix.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, SolverError> {
        let opts: Vec<Vec<Option<f64>>> = rows
            .iter()
            .map(|r| r.iter().copied().map(Some).collect())
            .collect();
        WeightMatrix::from_options(&opts)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Weight of an allowed cell, `None` if forbidden.
    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        let i = self.index(row, col);
        if self.forbidden[i] {
            None
        } else {
            Some(self.cells[i])
        }
    }

    pub fn is_forbidden(&self, row: usize, col: usize) -> bool {
        self.forbidden[self.index(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, weight: f64) -> Result<(), SolverError> {
        if !weight.is_finite() {
            return Err(SolverError::NonFinite { row, col });
        }
        let i = self.index(row, col);
        self.cells[i] = weight;
        self.forbidden[i] = false;
        Ok(())
    }

    pub fn forbid(&mut self, row: usize, col: usize) {
        let i = self.index(row, col);
        self.forbidden[i] = true;
        self.cells[i] = 0.0;
    }

    /// Largest absolute allowed weight (0 for an all-forbidden matrix).
    pub fn max_abs(&self) -> f64 {
        self.cells
            .iter()
            .zip(&self.forbidden)
            .filter(|(_, f)| !**f)
            .fold(0.0f64, |acc, (w, _)| acc.max(w.abs()))
    }

    pub fn allowed_count(&self) -> usize {
        self.forbidden.iter().filter(|f| !**f).count()
    }

    /// Copy with every allowed weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> WeightMatrix {
        let mut out = self.clone();
        for (w, f) in out.cells.iter_mut().zip(&out.forbidden) {
            if !*f {
                *w *= factor;
            }
        }
        out
    }

    /// Sum of allowed weights picked by `assignment` (row -> column).
    /// Forbidden picks contribute nothing. Summed by [`canonical_sum`], so
    /// assignments picking the same weights agree bit for bit.
    pub fn objective_of(&self, assignment: &[Option<usize>]) -> f64 {
        canonical_sum(
            assignment
                .iter()
                .enumerate()
                .filter_map(|(r, c)| c.and_then(|c| self.get(r, c))),
        )
    }

    fn index(&self, row: usize, col: usize) -> usize {
        assert!(
            row < self.rows && col < self.cols,
            "cell ({row}, {col}) outside {}x{}",
            self.rows,
            self.cols
        );
        row * self.cols + col
    }
}

impl fmt::Debug for WeightMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "WeightMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                match self.get(r, c) {
                    Some(w) => write!(f, "{w:>10.4} ")?,
                    None => write!(f, "{:>10} ", "-M")?,
                }
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Result of an assignment solver.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    /// Column picked for each row; `None` when the row is unassigned (or,
    /// for perfect-matching solvers, parked on a forbidden cell).
    pub assignment: Vec<Option<usize>>,
    /// Sum of the allowed weights picked, summed in row order.
    pub objective: f64,
}

impl Matching {
    pub fn assigned(&self) -> usize {
        self.assignment.iter().filter(|a| a.is_some()).count()
    }

    /// True if no column is used twice.
    pub fn is_injective(&self) -> bool {
        let mut seen = std::collections::BTreeSet::new();
        self.assignment.iter().flatten().all(|c| seen.insert(*c))
    }
}
