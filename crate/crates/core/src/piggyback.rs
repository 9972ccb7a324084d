//! Assignment of source cells (first s columns) to piggyback functions.

use crate::grid::Cell;

/// For every source cell its piggyback index, and for every piggyback
/// index its contributor list and the row of column s + 1 that stores it.
///
/// Piggyback indices are 1-based. In design 1 they run over 1..=h+r-1,
/// in design 2 over 1..=n with index m stored in row m.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiggybackMap {
    s: usize,
    source_to_tau: Vec<usize>,
    contributors: Vec<Vec<Cell>>,
    target_rows: Vec<usize>,
}

impl PiggybackMap {
    /// `assign(i, j)` returns the piggyback index of cell (row j, column i);
    /// `target_row(tau)` the row holding piggyback `tau`.
    pub(crate) fn build(
        n: usize,
        s: usize,
        functions: usize,
        assign: impl Fn(usize, usize) -> usize,
        target_row: impl Fn(usize) -> usize,
    ) -> Self {
        let mut source_to_tau = vec![0; n * s];
        let mut contributors = vec![Vec::new(); functions];
        // row-major over (j, i) so contributor lists come out sorted by node
        for j in 1..=n {
            for i in 1..=s {
                let tau = assign(i, j);
                debug_assert!(tau >= 1 && tau <= functions);
                source_to_tau[(j - 1) * s + i - 1] = tau;
                contributors[tau - 1].push(Cell::new(j, i));
            }
        }
        let target_rows = (1..=functions).map(target_row).collect();
        PiggybackMap { s, source_to_tau, contributors, target_rows }
    }

    /// Number of piggyback functions.
    pub fn functions(&self) -> usize {
        self.contributors.len()
    }

    pub fn tau_of(&self, cell: Cell) -> usize {
        self.source_to_tau[(cell.node - 1) * self.s + cell.column - 1]
    }

    pub fn contributors(&self, tau: usize) -> &[Cell] {
        &self.contributors[tau - 1]
    }

    pub fn target_row(&self, tau: usize) -> usize {
        self.target_rows[tau - 1]
    }

    /// n_tau for tau = 1..=functions.
    pub fn counts(&self) -> Vec<usize> {
        self.contributors.iter().map(Vec::len).collect()
    }

    pub fn count(&self, tau: usize) -> usize {
        self.contributors[tau - 1].len()
    }
}
