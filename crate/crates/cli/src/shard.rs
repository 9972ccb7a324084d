//! On-disk shard format: a 33-byte header followed by s + 1 symbols per
//! stripe for one node, each symbol w/8 bytes little-endian.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use piggyback::{Cell, CodeParams, GaloisField, GfElement, SymbolSource, Variant};
use tempfile::NamedTempFile;

use crate::error::{io_err, CliError, CliResult};

pub const MAGIC: &[u8; 4] = b"PGB1";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 33;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShardHeader {
    pub design: u8,
    pub n: u16,
    pub k: u16,
    pub s: u16,
    pub kprime: u16,
    pub w: u8,
    pub node_index: u16,
    pub original_length: u64,
    pub stripe_count: u64,
}

impl ShardHeader {
    pub fn for_params(params: &CodeParams, node_index: usize, original_length: u64) -> CliResult<Self> {
        let narrow = |x: usize, what: &str| {
            u16::try_from(x).map_err(|_| CliError::Parameter(format!("{what} = {x} does not fit the shard header")))
        };
        let geometry = Geometry::of(params);
        let stripe_count = original_length.div_ceil(geometry.stripe_data_bytes() as u64);
        Ok(ShardHeader {
            design: if params.variant == Variant::Design2 { 2 } else { 1 },
            n: narrow(params.n, "n")?,
            k: narrow(params.k, "k")?,
            s: narrow(params.s, "s")?,
            kprime: narrow(params.kprime, "k'")?,
            w: params.field.width,
            node_index: narrow(node_index, "node index")?,
            original_length,
            stripe_count,
        })
    }

    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut b = [0u8; HEADER_LEN];
        b[0..4].copy_from_slice(MAGIC);
        b[4] = VERSION;
        b[5] = self.design;
        b[6..8].copy_from_slice(&self.n.to_le_bytes());
        b[8..10].copy_from_slice(&self.k.to_le_bytes());
        b[10..12].copy_from_slice(&self.s.to_le_bytes());
        b[12..14].copy_from_slice(&self.kprime.to_le_bytes());
        b[14] = self.w;
        b[15..17].copy_from_slice(&self.node_index.to_le_bytes());
        b[17..25].copy_from_slice(&self.original_length.to_le_bytes());
        b[25..33].copy_from_slice(&self.stripe_count.to_le_bytes());
        b
    }

    /// Parse and validate everything the header alone can vouch for.
    pub fn from_bytes(b: &[u8]) -> CliResult<Self> {
        let corrupt = |why: String| Err(CliError::Data(format!("corrupt header: {why}")));
        if b.len() < HEADER_LEN {
            return corrupt(format!("{} bytes, expected {HEADER_LEN}", b.len()));
        }
        if &b[0..4] != MAGIC {
            return corrupt("bad magic".into());
        }
        if b[4] != VERSION {
            return corrupt(format!("unknown version {}", b[4]));
        }
        let u16_at = |i: usize| u16::from_le_bytes([b[i], b[i + 1]]);
        let u64_at = |i: usize| u64::from_le_bytes(b[i..i + 8].try_into().expect("8 bytes"));
        let h = ShardHeader {
            design: b[5],
            n: u16_at(6),
            k: u16_at(8),
            s: u16_at(10),
            kprime: u16_at(12),
            w: b[14],
            node_index: u16_at(15),
            original_length: u64_at(17),
            stripe_count: u64_at(25),
        };
        let params = match h.params() {
            Ok(p) => p,
            Err(e) => return corrupt(e.message().to_string()),
        };
        if h.node_index < 1 || h.node_index > h.n {
            return corrupt(format!("node index {} outside 1..={}", h.node_index, h.n));
        }
        let capacity = h.stripe_count.checked_mul(Geometry::of(&params).stripe_data_bytes() as u64);
        if capacity.is_none_or(|c| h.original_length > c) {
            return corrupt(format!(
                "original length {} exceeds {} stripes",
                h.original_length, h.stripe_count
            ));
        }
        Ok(h)
    }

    pub fn params(&self) -> CliResult<CodeParams> {
        let p = CodeParams::new(self.n as usize, self.k as usize, self.s as usize, self.kprime as usize, self.w)?;
        let design = if p.variant == Variant::Design2 { 2 } else { 1 };
        if design != self.design {
            return Err(CliError::Parameter(format!("design byte {} does not match k' = {}", self.design, self.kprime)));
        }
        Ok(p)
    }

    /// Same shard set: equal in every field but the node index.
    pub fn same_set(&self, other: &ShardHeader) -> bool {
        ShardHeader { node_index: 0, ..*self } == ShardHeader { node_index: 0, ..*other }
    }
}

/// Byte layout of one node's shard body.
#[derive(Debug, Clone, Copy)]
pub struct Geometry {
    pub columns: usize,
    pub symbol_bytes: usize,
    pub data_symbols: usize,
}

impl Geometry {
    pub fn of(params: &CodeParams) -> Self {
        Geometry {
            columns: params.columns(),
            symbol_bytes: params.field.width as usize / 8,
            data_symbols: params.data_symbols(),
        }
    }

    pub fn stripe_data_bytes(&self) -> usize {
        self.data_symbols * self.symbol_bytes
    }

    pub fn row_bytes(&self) -> usize {
        self.columns * self.symbol_bytes
    }

    pub fn cell_offset(&self, stripe: u64, column: usize) -> u64 {
        HEADER_LEN as u64 + (stripe * self.columns as u64 + column as u64 - 1) * self.symbol_bytes as u64
    }

    pub fn file_len(&self, stripes: u64) -> u64 {
        HEADER_LEN as u64 + stripes * self.row_bytes() as u64
    }
}

pub fn bytes_to_symbols(bytes: &[u8], field: &GaloisField) -> Vec<GfElement> {
    match field.width() {
        8 => bytes.iter().map(|&b| field.element(b as u32).expect("byte fits")).collect(),
        _ => bytes
            .chunks(2)
            .map(|c| field.element(u16::from_le_bytes([c[0], *c.get(1).unwrap_or(&0)]) as u32).expect("fits"))
            .collect(),
    }
}

pub fn symbols_to_bytes(symbols: &[GfElement], width: u8, out: &mut Vec<u8>) {
    for s in symbols {
        if width == 8 {
            out.push(s.value() as u8);
        } else {
            out.extend_from_slice(&s.value().to_le_bytes());
        }
    }
}

pub fn shard_name(node: usize) -> String {
    format!("shard-{node:05}.pgb")
}

pub fn shard_path(dir: &Path, node: usize) -> PathBuf {
    dir.join(shard_name(node))
}

/// A shard file being written; becomes visible under its final name on commit.
pub struct PendingShard {
    file: std::io::BufWriter<NamedTempFile>,
    target: PathBuf,
}

impl PendingShard {
    pub fn create(dir: &Path, header: &ShardHeader) -> CliResult<Self> {
        let tmp = NamedTempFile::new_in(dir).map_err(io_err(format!("creating temp file in {}", dir.display())))?;
        let mut file = std::io::BufWriter::new(tmp);
        file.write_all(&header.to_bytes()).map_err(io_err("writing header"))?;
        Ok(PendingShard { file, target: shard_path(dir, header.node_index as usize) })
    }

    pub fn write(&mut self, bytes: &[u8]) -> CliResult<()> {
        self.file.write_all(bytes).map_err(io_err(format!("writing {}", self.target.display())))
    }

    pub fn commit(self) -> CliResult<()> {
        let target = self.target;
        let tmp = self.file.into_inner().map_err(|e| CliError::Data(format!("flushing {}: {e}", target.display())))?;
        tmp.persist(&target).map_err(|e| CliError::Data(format!("renaming onto {}: {e}", target.display())))?;
        Ok(())
    }
}

/// Every readable shard in a directory, keyed by node index.
#[derive(Debug)]
pub struct ShardSet {
    pub header: ShardHeader,
    pub params: CodeParams,
    pub geometry: Geometry,
    pub files: BTreeMap<usize, PathBuf>,
}

impl ShardSet {
    /// Scan `dir` for `*.pgb` files, ignoring the nodes in `skip`. Mismatched
    /// headers, duplicate node indices or wrong file lengths are errors.
    pub fn open(dir: &Path, skip: &[usize]) -> CliResult<Self> {
        let entries = fs::read_dir(dir).map_err(io_err(format!("reading {}", dir.display())))?;
        let mut paths: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "pgb"))
            .collect();
        paths.sort();
        let mut header: Option<ShardHeader> = None;
        let mut files = BTreeMap::new();
        for path in paths {
            if let Some(node) = node_from_name(&path) {
                if skip.contains(&node) {
                    continue;
                }
            }
            let mut buf = [0u8; HEADER_LEN];
            let mut f = File::open(&path).map_err(io_err(format!("opening {}", path.display())))?;
            let got = read_up_to(&mut f, &mut buf).map_err(io_err(format!("reading {}", path.display())))?;
            let h = ShardHeader::from_bytes(&buf[..got])
                .map_err(|e| CliError::Data(format!("{}: {}", path.display(), e.message())))?;
            let node = h.node_index as usize;
            if skip.contains(&node) {
                continue;
            }
            match &header {
                Some(first) if !first.same_set(&h) => {
                    return Err(CliError::Data(format!("inconsistent shard set: {} differs from its peers", path.display())));
                }
                None => header = Some(h),
                _ => {}
            }
            let geometry = Geometry::of(&h.params()?);
            let len = f.metadata().map_err(io_err(format!("stat {}", path.display())))?.len();
            if len != geometry.file_len(h.stripe_count) {
                return Err(CliError::Data(format!(
                    "{}: {} bytes, expected {}",
                    path.display(),
                    len,
                    geometry.file_len(h.stripe_count)
                )));
            }
            if files.insert(node, path.clone()).is_some() {
                return Err(CliError::Data(format!("inconsistent shard set: node {node} appears twice")));
            }
        }
        let header = header.ok_or_else(|| CliError::Data(format!("no usable shards in {}", dir.display())))?;
        let params = header.params()?;
        Ok(ShardSet { header, params, geometry: Geometry::of(&params), files })
    }

    pub fn header_for(&self, node: usize) -> ShardHeader {
        ShardHeader { node_index: node as u16, ..self.header }
    }

    pub fn missing(&self) -> Vec<usize> {
        (1..=self.params.n).filter(|x| !self.files.contains_key(x)).collect()
    }
}

fn node_from_name(path: &Path) -> Option<usize> {
    path.file_stem()?.to_str()?.strip_prefix("shard-")?.parse().ok()
}

fn read_up_to(f: &mut File, buf: &mut [u8]) -> std::io::Result<usize> {
    let mut got = 0;
    while got < buf.len() {
        match f.read(&mut buf[got..])? {
            0 => break,
            m => got += m,
        }
    }
    Ok(got)
}

/// Reads individual cells of the current stripe straight from shard files.
pub struct SeekSource {
    files: BTreeMap<usize, File>,
    geometry: Geometry,
    field: &'static GaloisField,
    pub stripe: u64,
}

impl SeekSource {
    pub fn open(set: &ShardSet, exclude: &[usize]) -> CliResult<Self> {
        let mut files = BTreeMap::new();
        for (&node, path) in &set.files {
            if !exclude.contains(&node) {
                files.insert(node, File::open(path).map_err(io_err(format!("opening {}", path.display())))?);
            }
        }
        Ok(SeekSource { files, geometry: set.geometry, field: GaloisField::for_width(set.params.field.width)?, stripe: 0 })
    }
}

impl SymbolSource for SeekSource {
    fn read(&mut self, cell: Cell) -> Result<GfElement, String> {
        let g = self.geometry;
        let f = self.files.get_mut(&cell.node).ok_or_else(|| format!("no shard for node {}", cell.node))?;
        f.seek(SeekFrom::Start(g.cell_offset(self.stripe, cell.column))).map_err(|e| e.to_string())?;
        let mut b = [0u8; 2];
        f.read_exact(&mut b[..g.symbol_bytes]).map_err(|e| e.to_string())?;
        Ok(bytes_to_symbols(&b[..g.symbol_bytes], self.field)[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_round_trip() {
        let params = CodeParams::new(8, 6, 1, 3, 8).unwrap();
        let h = ShardHeader::for_params(&params, 3, 100).unwrap();
        assert_eq!(h.stripe_count, 12);
        let b = h.to_bytes();
        assert_eq!(&b[..6], b"PGB1\x01\x01");
        assert_eq!(ShardHeader::from_bytes(&b).unwrap(), h);
    }

    #[test]
    fn header_rejections() {
        let params = CodeParams::new(7, 5, 2, 0, 16).unwrap();
        let good = ShardHeader::for_params(&params, 1, 0).unwrap().to_bytes();
        assert_eq!(good[5], 2);
        let mut bad = good;
        bad[0] = b'X';
        assert!(ShardHeader::from_bytes(&bad).is_err());
        let mut bad = good;
        bad[5] = 1;
        assert!(ShardHeader::from_bytes(&bad).is_err());
        let mut bad = good;
        bad[15] = 9;
        assert!(ShardHeader::from_bytes(&bad).is_err());
        let mut bad = good;
        bad[17] = 1;
        assert!(ShardHeader::from_bytes(&bad).is_err());
        assert!(ShardHeader::from_bytes(&good[..20]).is_err());
    }

    #[test]
    fn symbol_packing() {
        let f16 = GaloisField::for_width(16).unwrap();
        let syms = bytes_to_symbols(&[0x34, 0x12, 0xff], f16);
        assert_eq!(syms.iter().map(|s| s.value()).collect::<Vec<_>>(), vec![0x1234, 0x00ff]);
        let mut out = Vec::new();
        symbols_to_bytes(&syms, 16, &mut out);
        assert_eq!(out, vec![0x34, 0x12, 0xff, 0x00]);
    }
}
