//! Second piggybacking design C(n, k, s, k' = 0).
//!
//! Columns 1..=s are (n, k) codewords. Column s + 1 holds no data: row m
//! stores p_m, the sum of a_{i, wrap(m - i)} for i = 1..=s, where parity
//! P_j^T a_i is addressed as a_{i, k + j}.

use crate::error::{param_err, Error, Result};
use crate::field::{GaloisField, GfElement};
use crate::grid::{Cell, ReadSession, RecoveryReport, RepairReport, SymbolGrid, SymbolSource};
use crate::mds::{GeneratorFamily, MdsInstance};
use crate::params::{CodeParams, Variant};
use crate::piggyback::PiggybackMap;

/// Cyclic row index: x in [-s + 1, n + s] mapped onto [1, n].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WrapIndex {
    pub x: isize,
    pub normalized: usize,
}

impl WrapIndex {
    pub fn new(x: isize, n: usize, s: usize) -> Result<Self> {
        let (n_i, s_i) = (n as isize, s as isize);
        if x < 1 - s_i || x > n_i + s_i {
            return param_err(format!("wrap index {x} outside [{}, {}]", 1 - s_i, n_i + s_i));
        }
        let normalized = if x <= 0 {
            x + n_i
        } else if x <= n_i {
            x
        } else {
            x - n_i
        } as usize;
        Ok(WrapIndex { x, normalized })
    }
}

fn wrap(x: isize, n: usize) -> usize {
    x.rem_euclid(n as isize) as usize + if x.rem_euclid(n as isize) == 0 { n } else { 0 }
}

/// Row of column s + 1 receiving the source cell (row `j`, column `i`).
pub fn piggyback_row2(i: usize, j: usize, params: &CodeParams) -> Result<usize> {
    if params.variant != Variant::Design2 {
        return param_err(format!("{params} is not a design-2 code"));
    }
    if i < 1 || i > params.s {
        return param_err(format!("column {i} outside 1..={}", params.s));
    }
    if j < 1 || j > params.n {
        return param_err(format!("row {j} outside 1..={}", params.n));
    }
    Ok(if i + j <= params.n { i + j } else { i + j - params.n })
}

pub fn build_map2(params: &CodeParams) -> Result<PiggybackMap> {
    piggyback_row2(1, 1, params)?;
    Ok(PiggybackMap::build(
        params.n,
        params.s,
        params.n,
        |i, j| piggyback_row2(i, j, params).expect("indices in range"),
        |m| m,
    ))
}

/// Sorted failed rows and the cyclic counts of survivors between them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FailurePattern {
    pub failed: Vec<usize>,
    /// gaps[i] survivors strictly between failed[i] and the next failure, cyclically.
    pub gaps: Vec<usize>,
}

impl FailurePattern {
    pub fn new(failed: &[usize], n: usize) -> Result<Self> {
        let mut f = failed.to_vec();
        f.sort_unstable();
        if f.windows(2).any(|w| w[0] == w[1]) {
            return param_err("failed nodes must be distinct");
        }
        if f.iter().any(|&x| x < 1 || x > n) {
            return param_err(format!("failed nodes must lie in 1..={n}"));
        }
        let m = f.len();
        let gaps = (0..m)
            .map(|i| if i + 1 < m { f[i + 1] - f[i] - 1 } else { n - f[m - 1] + f[0] - 1 })
            .collect();
        Ok(FailurePattern { failed: f, gaps })
    }

    /// Index of the largest gap, smallest node among ties.
    pub fn max_gap_index(&self) -> Option<usize> {
        let max = *self.gaps.iter().max()?;
        self.gaps.iter().position(|&g| g == max)
    }
}

/// Cells read to repair `node`: the s contributors of p_node, then for
/// each column j the piggyback p_{node + j} and its other s - 1 contributors.
pub fn repair_cells_for(params: &CodeParams, map: &PiggybackMap, node: usize) -> Result<Vec<Cell>> {
    let p = params;
    if node < 1 || node > p.n {
        return param_err(format!("failed node {node} outside 1..={}", p.n));
    }
    let last = p.columns();
    let mut cells = map.contributors(node).to_vec();
    for j in 1..=p.s {
        let me = Cell::new(node, j);
        let m = map.tau_of(me);
        cells.push(Cell::new(m, last));
        cells.extend(map.contributors(m).iter().copied().filter(|&c| c != me));
    }
    Ok(cells)
}

#[derive(Debug, Clone)]
pub struct Design2Code {
    params: CodeParams,
    field: &'static GaloisField,
    column_code: MdsInstance,
    map: PiggybackMap,
}

impl Design2Code {
    pub fn new(params: CodeParams, family: GeneratorFamily) -> Result<Self> {
        if params.variant != Variant::Design2 {
            return param_err(format!("{params} is not a design-2 code"));
        }
        let field = GaloisField::for_width(params.field.width)?;
        let column_code = MdsInstance::new(params.n, params.k, family, field)?;
        let map = build_map2(&params)?;
        Ok(Design2Code { params, field, column_code, map })
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn field(&self) -> &'static GaloisField {
        self.field
    }

    pub fn map(&self) -> &PiggybackMap {
        &self.map
    }

    pub fn column_code(&self) -> &MdsInstance {
        &self.column_code
    }

    /// Whether any r + 1 failures are recoverable: k > (s - 1)(r + 1) + 1.
    pub fn tolerates_r_plus_one(&self) -> bool {
        let p = &self.params;
        p.k > (p.s - 1) * (p.r() + 1) + 1
    }

    pub fn encode_stripe(&self, data: &[GfElement]) -> Result<SymbolGrid> {
        let p = &self.params;
        if data.len() != p.data_symbols() {
            return param_err(format!("stripe expects {} data symbols, got {}", p.data_symbols(), data.len()));
        }
        let mut grid = SymbolGrid::zeros(*p);
        for i in 1..=p.s {
            let word = self.column_code.encode(&data[(i - 1) * p.k..i * p.k])?;
            for (row, v) in word.into_iter().enumerate() {
                grid.set(Cell::new(row + 1, i), v);
            }
        }
        self.fill_piggybacks(&mut grid, 1..=p.n);
        Ok(grid)
    }

    fn fill_piggybacks(&self, grid: &mut SymbolGrid, rows: impl IntoIterator<Item = usize>) {
        let last = self.params.columns();
        for m in rows {
            let v = self.map.contributors(m).iter().map(|&c| grid.get(c)).sum();
            grid.set(Cell::new(m, last), v);
        }
    }

    pub fn repair_plan(&self, node: usize) -> Result<Vec<Cell>> {
        repair_cells_for(&self.params, &self.map, node)
    }

    pub fn repair_node(&self, node: usize, source: &mut dyn SymbolSource) -> Result<RepairReport> {
        let p = &self.params;
        self.repair_plan(node)?;
        let last = p.columns();
        let mut session = ReadSession::new(source);
        let mut recovered = vec![GfElement::ZERO; last];
        let mut own = GfElement::ZERO;
        for &c in self.map.contributors(node) {
            own += session.read(c)?;
        }
        recovered[last - 1] = own;
        for j in 1..=p.s {
            let me = Cell::new(node, j);
            let m = self.map.tau_of(me);
            let mut v = session.read(Cell::new(m, last))?;
            for &c in self.map.contributors(m) {
                if c != me {
                    v -= session.read(c)?;
                }
            }
            recovered[j - 1] = v;
        }
        let reads = session.into_reads();
        Ok(RepairReport { node, recovered, bandwidth: reads.len(), reads })
    }

    /// Recover all s k data symbols from at least k full rows.
    pub fn decode_from_k(&self, rows: &[(usize, Vec<GfElement>)]) -> Result<Vec<GfElement>> {
        let p = &self.params;
        if rows.iter().any(|(_, r)| r.len() != p.columns()) {
            return param_err(format!("each row needs {} symbols", p.columns()));
        }
        let positions: Vec<usize> = rows.iter().map(|&(node, _)| node).collect();
        let decoder = self.column_code.decoder(&positions)?;
        let mut data = Vec::with_capacity(p.data_symbols());
        for i in 1..=p.s {
            let vals: Vec<GfElement> = rows.iter().map(|(_, r)| r[i - 1]).collect();
            data.extend(decoder.decode(&vals));
        }
        let check = self.encode_stripe(&data)?;
        for (node, r) in rows {
            if check.row(*node) != r.as_slice() {
                return Err(Error::Inconsistent { position: *node });
            }
        }
        Ok(data)
    }

    /// Restore up to r + 1 failed nodes.
    ///
    /// Up to r failures: every column is erasure-decoded directly. Exactly
    /// r + 1 failures: requires k > (s - 1)(r + 1) + 1, and proceeds from
    /// column s down to column 1, each time first freeing one symbol of the
    /// failed node after the largest survivor gap through a piggyback.
    pub fn recover_failures(&self, failed: &[usize], source: &mut dyn SymbolSource) -> Result<RecoveryReport> {
        let p = &self.params;
        let pattern = FailurePattern::new(failed, p.n)?;
        let m = pattern.failed.len();
        let r = p.r();
        if m > r + 1 {
            return Err(Error::UnsupportedPattern(format!(
                "{m} failures exceed r + 1 = {} for {p}",
                r + 1
            )));
        }
        if m == r + 1 && !self.tolerates_r_plus_one() {
            return Err(Error::UnsupportedPattern(format!(
                "{m} failures need k > (s - 1)(r + 1) + 1 = {}, but k = {}",
                (p.s - 1) * (r + 1) + 1,
                p.k
            )));
        }
        let mut session = ReadSession::new(source);
        let mut grid = SymbolGrid::zeros(*p);
        let is_failed = |node: usize| pattern.failed.binary_search(&node).is_ok();
        let survivors: Vec<usize> = (1..=p.n).filter(|&x| !is_failed(x)).collect();

        if m <= r {
            let helpers = &survivors[..p.k];
            let decoder = self.column_code.decoder(helpers)?;
            for i in 1..=p.s {
                let vals = helpers
                    .iter()
                    .map(|&node| session.read(Cell::new(node, i)))
                    .collect::<Result<Vec<_>>>()?;
                self.fill_column(&mut grid, i, &decoder.decode(&vals))?;
            }
        } else {
            let j = pattern.max_gap_index().expect("r + 1 >= 1 failures");
            let pivot = pattern.failed[j];
            assert!(
                pattern.gaps[j] >= p.s,
                "largest survivor gap {} < s = {} despite k > (s - 1)(r + 1) + 1",
                pattern.gaps[j],
                p.s
            );
            let last = p.columns();
            let mut positions = survivors.clone();
            positions.push(pivot);
            let decoder = self.column_code.decoder(&positions)?;
            for col in (1..=p.s).rev() {
                // p_{pivot + col} contains a_{col, pivot}; its other contributors
                // are survivors (columns < col) or already decoded (columns > col).
                let target = wrap(pivot as isize + col as isize, p.n);
                let me = Cell::new(pivot, col);
                let mut v = session.read(Cell::new(target, last))?;
                for &c in self.map.contributors(target) {
                    if c == me {
                        continue;
                    }
                    v -= if c.column > col {
                        grid.get(c)
                    } else {
                        debug_assert!(!is_failed(c.node));
                        session.read(c)?
                    };
                }
                let mut vals = survivors
                    .iter()
                    .map(|&node| session.read(Cell::new(node, col)))
                    .collect::<Result<Vec<_>>>()?;
                vals.push(v);
                self.fill_column(&mut grid, col, &decoder.decode(&vals))?;
            }
        }
        self.fill_piggybacks(&mut grid, pattern.failed.iter().copied());
        Ok(RecoveryReport {
            rows: pattern.failed.iter().map(|&f| (f, grid.row(f).to_vec())).collect(),
            reads: session.into_reads(),
        })
    }

    fn fill_column(&self, grid: &mut SymbolGrid, col: usize, data: &[GfElement]) -> Result<()> {
        for (row, v) in self.column_code.encode(data)?.into_iter().enumerate() {
            grid.set(Cell::new(row + 1, col), v);
        }
        Ok(())
    }
}
