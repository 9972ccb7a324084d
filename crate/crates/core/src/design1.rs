//! First piggybacking design C(n, k, s, k') with k' > 0.
//!
//! Columns 1..=s are codewords of an (n, k) MDS code; column s + 1 is a
//! codeword of an (n, k') code whose parity rows k'+2..=n carry the
//! piggyback functions p_1, ..., p_{h+r-1}. Piggyback p_tau lives in row
//! k' + 1 + tau.

use crate::error::{param_err, Error, Result};
use crate::field::{GaloisField, GfElement};
use crate::grid::{Cell, ReadSession, RecoveryReport, RepairReport, SymbolGrid, SymbolSource};
use crate::mds::{GeneratorFamily, MdsInstance};
use crate::params::CodeParams;
use crate::piggyback::PiggybackMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Placement {
    pub tau: usize,
    pub target_row: usize,
}

/// Piggyback index and target row for the source cell in column `i`, row `j`.
pub fn piggyback_index(i: usize, j: usize, params: &CodeParams) -> Result<Placement> {
    if !params.variant.is_design1() {
        return param_err(format!("{} is not a design-1 code", params));
    }
    let CodeParams { n, s, kprime, .. } = *params;
    if i < 1 || i > s {
        return param_err(format!("column {i} outside 1..={s}"));
    }
    if j < 1 || j > n {
        return param_err(format!("row {j} outside 1..={n}"));
    }
    let functions = params.piggyback_count();
    let tau = if j <= kprime + 1 {
        1 + ((j - 1) * s + i - 1) % functions
    } else {
        // t_{i,j} - 1, where i + j - k + h = i + j - k'
        let t = if i + j <= n { i + j - kprime } else { i + j - n + 1 };
        t - 1
    };
    Ok(Placement { tau, target_row: kprime + 1 + tau })
}

pub fn build_map(params: &CodeParams) -> Result<PiggybackMap> {
    piggyback_index(1, 1, params)?;
    let kprime = params.kprime;
    Ok(PiggybackMap::build(
        params.n,
        params.s,
        params.piggyback_count(),
        |i, j| piggyback_index(i, j, params).expect("indices in range").tau,
        |tau| kprime + 1 + tau,
    ))
}

/// Cells read to repair one node, grouped by what they rebuild.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Design1RepairPlan {
    pub node: usize,
    /// Last-column rows used to decode b.
    pub last_column_helpers: Vec<usize>,
    /// For nodes past k' + 1: contributors of the piggyback stored in the node.
    pub own_piggyback: Option<(usize, Vec<Cell>)>,
    /// For each lost source symbol: (column, tau, other contributors of p_tau).
    pub per_column: Vec<(usize, usize, Vec<Cell>)>,
}

impl Design1RepairPlan {
    /// Every cell the plan reads, in execution order.
    pub fn cells(&self, params: &CodeParams) -> Vec<Cell> {
        let last = params.columns();
        let mut out: Vec<Cell> = self.last_column_helpers.iter().map(|&r| Cell::new(r, last)).collect();
        if let Some((_, cells)) = &self.own_piggyback {
            out.extend_from_slice(cells);
        }
        for (_, tau, others) in &self.per_column {
            out.push(Cell::new(params.kprime + 1 + tau, last));
            out.extend_from_slice(others);
        }
        out
    }
}

/// Repair plan from the placement alone; no field arithmetic involved.
pub fn repair_plan_for(params: &CodeParams, map: &PiggybackMap, node: usize) -> Result<Design1RepairPlan> {
    let p = params;
    if node < 1 || node > p.n {
        return param_err(format!("failed node {node} outside 1..={}", p.n));
    }
    let kp = p.kprime;
    let last_column_helpers: Vec<usize> = if node <= kp + 1 {
        (1..=kp + 1).filter(|&r| r != node).collect()
    } else {
        (1..=kp).collect()
    };
    let own_piggyback = (node >= kp + 2).then(|| {
        let tau = node - kp - 1;
        (tau, map.contributors(tau).to_vec())
    });
    let per_column = (1..=p.s)
        .map(|i| {
            let me = Cell::new(node, i);
            let tau = map.tau_of(me);
            let others = map.contributors(tau).iter().copied().filter(|&c| c != me).collect();
            (i, tau, others)
        })
        .collect();
    Ok(Design1RepairPlan { node, last_column_helpers, own_piggyback, per_column })
}

#[derive(Debug, Clone)]
pub struct Design1Code {
    params: CodeParams,
    field: &'static GaloisField,
    column_code: MdsInstance,
    last_code: MdsInstance,
    map: PiggybackMap,
}

impl Design1Code {
    pub fn new(params: CodeParams, family: GeneratorFamily) -> Result<Self> {
        if !params.variant.is_design1() {
            return param_err(format!("{params} is not a design-1 code"));
        }
        let field = GaloisField::for_width(params.field.width)?;
        let column_code = MdsInstance::new(params.n, params.k, family, field)?;
        let last_code = MdsInstance::new(params.n, params.kprime, family, field)?;
        let map = build_map(&params)?;
        Ok(Design1Code { params, field, column_code, last_code, map })
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

    pub fn last_code(&self) -> &MdsInstance {
        &self.last_code
    }

    /// Data layout: a_1 (k symbols), ..., a_s, then b (k' symbols).
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
        let last = self.last_code.encode(&data[p.s * p.k..])?;
        for (row, v) in last.into_iter().enumerate() {
            grid.set(Cell::new(row + 1, p.columns()), v);
        }
        self.add_piggybacks(&mut grid);
        Ok(grid)
    }

    fn piggyback_value(&self, grid: &SymbolGrid, tau: usize) -> GfElement {
        self.map.contributors(tau).iter().map(|&c| grid.get(c)).sum()
    }

    fn add_piggybacks(&self, grid: &mut SymbolGrid) {
        let last = self.params.columns();
        for tau in 1..=self.map.functions() {
            let cell = Cell::new(self.map.target_row(tau), last);
            let v = grid.get(cell) + self.piggyback_value(grid, tau);
            grid.set(cell, v);
        }
    }

    /// Bandwidth of repairing `node` from the placement counts alone.
    pub fn closed_form_bandwidth(&self, node: usize) -> usize {
        let p = &self.params;
        let mut bw = p.kprime;
        for i in 1..=p.s {
            bw += self.map.count(self.map.tau_of(Cell::new(node, i)));
        }
        if node >= p.kprime + 2 {
            bw += self.map.count(node - p.kprime - 1);
        }
        bw
    }

    pub fn repair_plan(&self, node: usize) -> Result<Design1RepairPlan> {
        repair_plan_for(&self.params, &self.map, node)
    }

    /// Rebuild `node` from surviving cells.
    pub fn repair_node(&self, node: usize, source: &mut dyn SymbolSource) -> Result<RepairReport> {
        let plan = self.repair_plan(node)?;
        let p = &self.params;
        let last = p.columns();
        let mut session = ReadSession::new(source);

        let helper_vals = plan
            .last_column_helpers
            .iter()
            .map(|&r| session.read(Cell::new(r, last)))
            .collect::<Result<Vec<_>>>()?;
        let b = self.last_code.decoder(&plan.last_column_helpers)?.decode(&helper_vals);

        let mut recovered = vec![GfElement::ZERO; last];
        recovered[last - 1] = match &plan.own_piggyback {
            None => self.last_code.symbol_at(node, &b),
            Some((_, cells)) => {
                let mut acc = self.last_code.symbol_at(node, &b);
                for &c in cells {
                    acc += session.read(c)?;
                }
                acc
            }
        };
        for (i, tau, others) in &plan.per_column {
            let row = p.kprime + 1 + tau;
            let mut v = session.read(Cell::new(row, last))? - self.last_code.symbol_at(row, &b);
            for &c in others {
                v -= session.read(c)?;
            }
            recovered[i - 1] = v;
        }
        let reads = session.into_reads();
        Ok(RepairReport { node, recovered, bandwidth: reads.len(), reads })
    }

    /// Recover all s k + k' data symbols from at least k full rows.
    pub fn decode_from_k(&self, rows: &[(usize, Vec<GfElement>)]) -> Result<Vec<GfElement>> {
        let p = &self.params;
        if rows.iter().any(|(_, r)| r.len() != p.columns()) {
            return param_err(format!("each row needs {} symbols", p.columns()));
        }
        let positions: Vec<usize> = rows.iter().map(|&(node, _)| node).collect();
        let decoder = self.column_code.decoder(&positions)?;
        let mut data = Vec::with_capacity(p.data_symbols());
        let mut grid = SymbolGrid::zeros(*p);
        for i in 1..=p.s {
            let vals: Vec<GfElement> = rows.iter().map(|(_, r)| r[i - 1]).collect();
            let a = decoder.decode(&vals);
            for (row, v) in self.column_code.encode(&a)?.into_iter().enumerate() {
                grid.set(Cell::new(row + 1, i), v);
            }
            data.extend(a);
        }
        // strip piggybacks from the supplied last-column symbols
        let last = p.columns();
        let raw: Vec<GfElement> = rows
            .iter()
            .map(|&(node, ref r)| {
                if node >= p.kprime + 2 {
                    r[last - 1] - self.piggyback_value(&grid, node - p.kprime - 1)
                } else {
                    r[last - 1]
                }
            })
            .collect();
        let b = self.last_code.decoder(&positions)?.decode(&raw);
        data.extend(b);

        let check = self.encode_stripe(&data)?;
        for (node, r) in rows {
            if check.row(*node) != r.as_slice() {
                return Err(Error::Inconsistent { position: *node });
            }
        }
        Ok(data)
    }

    /// Rebuild up to r failed nodes by decoding from k survivors.
    pub fn recover_failures(&self, failed: &[usize], source: &mut dyn SymbolSource) -> Result<RecoveryReport> {
        let p = &self.params;
        let mut failed = failed.to_vec();
        failed.sort_unstable();
        failed.dedup();
        if failed.iter().any(|&f| f < 1 || f > p.n) {
            return param_err(format!("failed nodes must lie in 1..={}", p.n));
        }
        if failed.len() > p.r() {
            return Err(Error::UnsupportedPattern(format!(
                "{} failures exceed the r = {} tolerated by {}",
                failed.len(),
                p.r(),
                p
            )));
        }
        let mut session = ReadSession::new(source);
        let survivors: Vec<usize> = (1..=p.n).filter(|r| !failed.contains(r)).take(p.k).collect();
        let mut rows = Vec::with_capacity(p.k);
        for &node in &survivors {
            let row = (1..=p.columns())
                .map(|c| session.read(Cell::new(node, c)))
                .collect::<Result<Vec<_>>>()?;
            rows.push((node, row));
        }
        let grid = self.encode_stripe(&self.decode_from_k(&rows)?)?;
        Ok(RecoveryReport {
            rows: failed.iter().map(|&f| (f, grid.row(f).to_vec())).collect(),
            reads: session.into_reads(),
        })
    }
}
