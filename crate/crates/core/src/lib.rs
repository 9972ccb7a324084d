//! Piggybacked array codes over GF(2^w) with low repair bandwidth.
//!
//! A stripe is an n x (s + 1) grid. Row j lives on node j. The first s
//! columns are codewords of a systematic (n, k) MDS code; some of their
//! symbols are added into the last column so a single failed node can be
//! rebuilt from far fewer than s k + k' symbols.

pub mod analysis;
pub mod design1;
pub mod design2;
pub mod error;
pub mod field;
pub mod grid;
pub mod mds;
pub mod params;
pub mod piggyback;
pub mod subsets;

pub use design1::Design1Code;
pub use design2::Design2Code;
pub use error::{Error, Result};
pub use field::{FieldSpec, GaloisField, GfElement};
pub use grid::{Cell, ErasedGrid, RecoveryReport, RepairReport, SymbolGrid, SymbolSource};
pub use mds::{GeneratorFamily, MdsInstance, MdsVerdict, VerifyMode};
pub use params::{CodeParams, Variant};

/// Either design behind one interface.
#[derive(Debug, Clone)]
pub enum PiggybackCode {
    Design1(Design1Code),
    Design2(Design2Code),
}

impl PiggybackCode {
    pub fn new(params: CodeParams, family: GeneratorFamily) -> Result<Self> {
        Ok(if params.variant == Variant::Design2 {
            PiggybackCode::Design2(Design2Code::new(params, family)?)
        } else {
            PiggybackCode::Design1(Design1Code::new(params, family)?)
        })
    }

    pub fn params(&self) -> &CodeParams {
        match self {
            PiggybackCode::Design1(c) => c.params(),
            PiggybackCode::Design2(c) => c.params(),
        }
    }

    pub fn encode_stripe(&self, data: &[GfElement]) -> Result<SymbolGrid> {
        match self {
            PiggybackCode::Design1(c) => c.encode_stripe(data),
            PiggybackCode::Design2(c) => c.encode_stripe(data),
        }
    }

    pub fn decode_from_k(&self, rows: &[(usize, Vec<GfElement>)]) -> Result<Vec<GfElement>> {
        match self {
            PiggybackCode::Design1(c) => c.decode_from_k(rows),
            PiggybackCode::Design2(c) => c.decode_from_k(rows),
        }
    }

    /// Distinct cells a single-node repair of `node` downloads.
    pub fn repair_cells(&self, node: usize) -> Result<Vec<Cell>> {
        match self {
            PiggybackCode::Design1(c) => Ok(c.repair_plan(node)?.cells(c.params())),
            PiggybackCode::Design2(c) => c.repair_plan(node),
        }
    }

    pub fn repair_node(&self, node: usize, source: &mut dyn SymbolSource) -> Result<RepairReport> {
        match self {
            PiggybackCode::Design1(c) => c.repair_node(node, source),
            PiggybackCode::Design2(c) => c.repair_node(node, source),
        }
    }

    pub fn recover_failures(&self, failed: &[usize], source: &mut dyn SymbolSource) -> Result<RecoveryReport> {
        match self {
            PiggybackCode::Design1(c) => c.recover_failures(failed, source),
            PiggybackCode::Design2(c) => c.recover_failures(failed, source),
        }
    }
}
