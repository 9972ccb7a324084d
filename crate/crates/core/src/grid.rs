//! Stripe storage, cell addressing and the read interface used by repair.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{param_err, Error, Result};
use crate::field::GfElement;
use crate::params::CodeParams;

/// A (node, column) coordinate, both 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub node: usize,
    pub column: usize,
}

impl Cell {
    pub const fn new(node: usize, column: usize) -> Self {
        Cell { node, column }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(node {}, column {})", self.node, self.column)
    }
}

/// One stripe: n rows (nodes) by s + 1 columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolGrid {
    params: CodeParams,
    cells: Vec<GfElement>,
}

impl SymbolGrid {
    pub fn zeros(params: CodeParams) -> Self {
        SymbolGrid { params, cells: vec![GfElement::ZERO; params.stored_symbols()] }
    }

    /// Build from rows in node order.
    pub fn from_rows(params: CodeParams, rows: &[Vec<GfElement>]) -> Result<Self> {
        if rows.len() != params.n || rows.iter().any(|r| r.len() != params.columns()) {
            return param_err(format!("grid must be {} x {}", params.n, params.columns()));
        }
        Ok(SymbolGrid { params, cells: rows.concat() })
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn get(&self, cell: Cell) -> GfElement {
        self.cells[self.index(cell)]
    }

    pub fn set(&mut self, cell: Cell, value: GfElement) {
        let i = self.index(cell);
        self.cells[i] = value;
    }

    pub fn row(&self, node: usize) -> &[GfElement] {
        let w = self.params.columns();
        &self.cells[(node - 1) * w..node * w]
    }

    pub fn set_row(&mut self, node: usize, values: &[GfElement]) {
        let w = self.params.columns();
        self.cells[(node - 1) * w..node * w].copy_from_slice(values);
    }

    /// Column `column` as a codeword vector over nodes 1..=n.
    pub fn column(&self, column: usize) -> Vec<GfElement> {
        (1..=self.params.n).map(|node| self.get(Cell::new(node, column))).collect()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[GfElement]> {
        self.cells.chunks(self.params.columns())
    }

    fn index(&self, cell: Cell) -> usize {
        assert!(
            cell.node >= 1 && cell.node <= self.params.n && cell.column >= 1 && cell.column <= self.params.columns(),
            "cell {cell} outside {} x {} grid",
            self.params.n,
            self.params.columns()
        );
        (cell.node - 1) * self.params.columns() + cell.column - 1
    }
}

/// Source of surviving symbols during repair or recovery.
pub trait SymbolSource {
    fn read(&mut self, cell: Cell) -> std::result::Result<GfElement, String>;
}

impl<F> SymbolSource for F
where
    F: FnMut(Cell) -> std::result::Result<GfElement, String>,
{
    fn read(&mut self, cell: Cell) -> std::result::Result<GfElement, String> {
        self(cell)
    }
}

/// A grid with some nodes marked as failed; reads of failed nodes error.
#[derive(Debug)]
pub struct ErasedGrid<'a> {
    grid: &'a SymbolGrid,
    failed: BTreeSet<usize>,
}

impl<'a> ErasedGrid<'a> {
    pub fn new(grid: &'a SymbolGrid, failed: impl IntoIterator<Item = usize>) -> Self {
        ErasedGrid { grid, failed: failed.into_iter().collect() }
    }
}

impl SymbolSource for ErasedGrid<'_> {
    fn read(&mut self, cell: Cell) -> std::result::Result<GfElement, String> {
        if self.failed.contains(&cell.node) {
            Err(format!("node {} has failed", cell.node))
        } else {
            Ok(self.grid.get(cell))
        }
    }
}

/// Outcome of a single-node repair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairReport {
    pub node: usize,
    /// Recovered symbols of the failed node, columns 1..=s+1.
    pub recovered: Vec<GfElement>,
    /// Distinct cells downloaded, in first-read order.
    pub reads: Vec<Cell>,
    pub bandwidth: usize,
}

/// Outcome of a multi-node recovery.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecoveryReport {
    /// Restored rows in increasing node order.
    pub rows: Vec<(usize, Vec<GfElement>)>,
    pub reads: Vec<Cell>,
}

/// Deduplicating reader wrapper. Every distinct cell is fetched once.
pub(crate) struct ReadSession<'s> {
    source: &'s mut dyn SymbolSource,
    cache: HashMap<Cell, GfElement>,
    order: Vec<Cell>,
}

impl<'s> ReadSession<'s> {
    pub(crate) fn new(source: &'s mut dyn SymbolSource) -> Self {
        ReadSession { source, cache: HashMap::new(), order: Vec::new() }
    }

    pub(crate) fn read(&mut self, cell: Cell) -> Result<GfElement> {
        if let Some(&v) = self.cache.get(&cell) {
            return Ok(v);
        }
        let v = self
            .source
            .read(cell)
            .map_err(|reason| Error::Repair { cell, reason })?;
        self.cache.insert(cell, v);
        self.order.push(cell);
        Ok(v)
    }

    pub(crate) fn into_reads(self) -> Vec<Cell> {
        self.order
    }
}
