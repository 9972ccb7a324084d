use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use piggyback::{Cell, CodeParams, GaloisField, GeneratorFamily, GfElement, PiggybackCode, Variant};
use serde::Serialize;
use tempfile::NamedTempFile;

use crate::error::{io_err, CliError, CliResult};
use crate::shard::{bytes_to_symbols, symbols_to_bytes, Geometry, PendingShard, SeekSource, ShardHeader, ShardSet};

fn code_for(params: CodeParams) -> CliResult<PiggybackCode> {
    Ok(PiggybackCode::new(params, GeneratorFamily::GuaranteedRs)?)
}

pub fn encode(params: CodeParams, input: &Path, out_dir: &Path) -> CliResult<EncodeSummary> {
    let code = code_for(params)?;
    let field = GaloisField::for_width(params.field.width)?;
    let geometry = Geometry::of(&params);
    let len = fs::metadata(input).map_err(io_err(format!("reading {}", input.display())))?.len();
    fs::create_dir_all(out_dir).map_err(io_err(format!("creating {}", out_dir.display())))?;

    let mut shards = (1..=params.n)
        .map(|node| PendingShard::create(out_dir, &ShardHeader::for_params(&params, node, len)?))
        .collect::<CliResult<Vec<_>>>()?;
    let stripes = ShardHeader::for_params(&params, 1, len)?.stripe_count;
    let mut reader = BufReader::new(File::open(input).map_err(io_err(format!("opening {}", input.display())))?);
    let mut chunk = vec![0u8; geometry.stripe_data_bytes()];
    let mut row = Vec::with_capacity(geometry.row_bytes());
    for _ in 0..stripes {
        chunk.fill(0);
        read_fill(&mut reader, &mut chunk).map_err(io_err(format!("reading {}", input.display())))?;
        let grid = code.encode_stripe(&bytes_to_symbols(&chunk, field))?;
        for (node, shard) in shards.iter_mut().enumerate() {
            row.clear();
            symbols_to_bytes(grid.row(node + 1), params.field.width, &mut row);
            shard.write(&row)?;
        }
    }
    for shard in shards {
        shard.commit()?;
    }
    Ok(EncodeSummary { params: params.to_string(), shards: params.n, stripes, original_length: len })
}

#[derive(Debug, Serialize)]
pub struct EncodeSummary {
    pub params: String,
    pub shards: usize,
    pub stripes: u64,
    pub original_length: u64,
}

/// Reject an unsupported failure pattern before touching any file.
fn dry_run(code: &PiggybackCode, failed: &[usize]) -> CliResult<()> {
    let mut zeros = |_: Cell| -> Result<GfElement, String> { Ok(GfElement::ZERO) };
    code.recover_failures(failed, &mut zeros)?;
    Ok(())
}

fn read_fill(r: &mut impl Read, buf: &mut [u8]) -> std::io::Result<usize> {
    let mut got = 0;
    while got < buf.len() {
        match r.read(&mut buf[got..])? {
            0 => break,
            m => got += m,
        }
    }
    Ok(got)
}

/// Sequential whole-row reader over the present shards.
struct RowReader {
    readers: Vec<(usize, BufReader<File>)>,
    buf: Vec<u8>,
    field: &'static GaloisField,
}

impl RowReader {
    fn open(set: &ShardSet) -> CliResult<Self> {
        let mut readers = Vec::new();
        for (&node, path) in &set.files {
            let mut f = BufReader::new(File::open(path).map_err(io_err(format!("opening {}", path.display())))?);
            let mut skip = [0u8; crate::shard::HEADER_LEN];
            f.read_exact(&mut skip).map_err(io_err(format!("reading {}", path.display())))?;
            readers.push((node, f));
        }
        Ok(RowReader {
            readers,
            buf: vec![0u8; set.geometry.row_bytes()],
            field: GaloisField::for_width(set.params.field.width)?,
        })
    }

    fn next_rows(&mut self) -> CliResult<Vec<(usize, Vec<GfElement>)>> {
        let mut rows = Vec::with_capacity(self.readers.len());
        for (node, r) in &mut self.readers {
            r.read_exact(&mut self.buf).map_err(io_err(format!("reading shard {node}")))?;
            rows.push((*node, bytes_to_symbols(&self.buf, self.field)));
        }
        Ok(rows)
    }
}

pub fn decode(in_dir: &Path, out: &Path) -> CliResult<DecodeSummary> {
    let set = ShardSet::open(in_dir, &[])?;
    let params = set.params;
    let code = code_for(params)?;
    let missing = set.missing();
    let via_recovery = set.files.len() < params.k;
    if via_recovery && !(params.variant == Variant::Design2 && missing.len() == params.r() + 1) {
        return Err(CliError::Unsupported(format!(
            "{} of {} shards present; {params} needs at least {}{}",
            set.files.len(),
            params.n,
            params.k,
            if params.variant == Variant::Design2 { " or exactly r + 1 missing" } else { "" }
        )));
    }

    let dir = out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let tmp = NamedTempFile::new_in(dir).map_err(io_err(format!("creating temp file in {}", dir.display())))?;
    let mut w = BufWriter::new(tmp);
    let mut remaining = set.header.original_length;
    let mut reader = RowReader::open(&set)?;
    if via_recovery {
        dry_run(&code, &missing)?;
    }
    let mut source = if via_recovery { Some(SeekSource::open(&set, &[])?) } else { None };
    let mut bytes = Vec::new();
    for stripe in 0..set.header.stripe_count {
        let mut rows = reader.next_rows()?;
        if let Some(src) = source.as_mut() {
            src.stripe = stripe;
            rows.extend(code.recover_failures(&missing, src)?.rows);
            rows.sort_by_key(|(node, _)| *node);
        }
        let data = code.decode_from_k(&rows)?;
        bytes.clear();
        symbols_to_bytes(&data, params.field.width, &mut bytes);
        let take = remaining.min(bytes.len() as u64) as usize;
        w.write_all(&bytes[..take]).map_err(io_err(format!("writing {}", out.display())))?;
        remaining -= take as u64;
    }
    let tmp = w.into_inner().map_err(|e| CliError::Data(format!("flushing {}: {e}", out.display())))?;
    tmp.persist(out).map_err(|e| CliError::Data(format!("renaming onto {}: {e}", out.display())))?;
    Ok(DecodeSummary {
        params: params.to_string(),
        shards_used: set.files.len(),
        recovered_first: via_recovery.then_some(missing),
        bytes: set.header.original_length,
    })
}

#[derive(Debug, Serialize)]
pub struct DecodeSummary {
    pub params: String,
    pub shards_used: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recovered_first: Option<Vec<usize>>,
    pub bytes: u64,
}

#[derive(Debug, Serialize)]
pub struct ReadCell {
    pub node: usize,
    pub column: usize,
}

#[derive(Debug, Serialize)]
pub struct RepairJson {
    pub node: usize,
    pub bandwidth_symbols: usize,
    pub reads: Vec<ReadCell>,
}

pub fn repair(node: usize, in_dir: &Path) -> CliResult<RepairJson> {
    let set = ShardSet::open(in_dir, &[node])?;
    let params = set.params;
    if node < 1 || node > params.n {
        return Err(CliError::Parameter(format!("node {node} outside 1..={}", params.n)));
    }
    let code = code_for(params)?;
    let bandwidth = code.repair_cells(node)?.into_iter().collect::<BTreeSet<_>>().len();
    let mut source = SeekSource::open(&set, &[node])?;
    let mut shard = PendingShard::create(in_dir, &set.header_for(node))?;
    let mut reads = Vec::new();
    let mut bytes = Vec::new();
    for stripe in 0..set.header.stripe_count {
        source.stripe = stripe;
        let rep = code.repair_node(node, &mut source)?;
        debug_assert_eq!(rep.bandwidth, bandwidth);
        reads.extend(rep.reads.iter().map(|c| ReadCell { node: c.node, column: c.column }));
        bytes.clear();
        symbols_to_bytes(&rep.recovered, params.field.width, &mut bytes);
        shard.write(&bytes)?;
    }
    shard.commit()?;
    Ok(RepairJson { node, bandwidth_symbols: bandwidth, reads })
}

#[derive(Debug, Serialize)]
pub struct RecoverSummary {
    pub nodes: Vec<usize>,
    pub stripes: u64,
    pub symbols_read: usize,
}

pub fn recover(nodes: &[usize], in_dir: &Path) -> CliResult<RecoverSummary> {
    let set = ShardSet::open(in_dir, nodes)?;
    let params = set.params;
    if let Some(bad) = nodes.iter().find(|&&x| x < 1 || x > params.n) {
        return Err(CliError::Parameter(format!("node {bad} outside 1..={}", params.n)));
    }
    let mut failed = nodes.to_vec();
    failed.sort_unstable();
    failed.dedup();
    let absent: Vec<usize> = set.missing().into_iter().filter(|x| !failed.contains(x)).collect();
    if !absent.is_empty() {
        return Err(CliError::Unsupported(format!("shards {absent:?} are also missing; list them in --nodes")));
    }
    let code = code_for(params)?;
    dry_run(&code, &failed)?;
    let mut source = SeekSource::open(&set, &failed)?;
    let mut shards = failed
        .iter()
        .map(|&f| PendingShard::create(in_dir, &set.header_for(f)))
        .collect::<CliResult<Vec<_>>>()?;
    let mut symbols_read = 0;
    let mut bytes = Vec::new();
    for stripe in 0..set.header.stripe_count {
        source.stripe = stripe;
        let rec = code.recover_failures(&failed, &mut source)?;
        symbols_read += rec.reads.len();
        for ((_, row), shard) in rec.rows.iter().zip(shards.iter_mut()) {
            bytes.clear();
            symbols_to_bytes(row, params.field.width, &mut bytes);
            shard.write(&bytes)?;
        }
    }
    for shard in shards {
        shard.commit()?;
    }
    Ok(RecoverSummary { nodes: failed, stripes: set.header.stripe_count, symbols_read })
}
