//! On-disk cache of bridge tables.
//!
//! Layout, all little-endian: the 8 magic bytes `RLDPKTB\0`, a `u32` format
//! version, a `u32` dimension count `d`, `d` `u64` dimensions, then the
//! doubles in row-major order. A bridge table has dimensions
//! `(2, K + 1, L, L)`: the kernel rows `p_k(0, .)` followed by the
//! first-passage rows `f_k(.)`.

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use super::{BridgeTable, SkeletonError};
use crate::kernels::TorusConfig;
use crate::step_models::StepDistribution;

pub const CACHE_MAGIC: [u8; 8] = *b"RLDPKTB\0";
pub const CACHE_VERSION: u32 = 1;

/// Directory of cached tables keyed by `(n, N, eps, law fingerprint)`.
#[derive(Debug, Clone)]
pub struct KernelCache {
    dir: PathBuf,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> SkeletonError {
    SkeletonError::Cache(format!("{}: {e}", path.display()))
}

impl KernelCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn path_for(&self, dist: &StepDistribution, cfg: &TorusConfig, eps: f64) -> PathBuf {
        self.dir.join(format!(
            "bridge-n{}-N{:016x}-e{:016x}-law{:016x}.bin",
            cfg.n(),
            cfg.side().to_bits(),
            eps.to_bits(),
            dist.fingerprint()
        ))
    }

    /// Load the table for `(dist, cfg, eps)`, building and storing it on a miss.
    pub fn load_or_build(&self, dist: &StepDistribution, cfg: &TorusConfig, eps: f64) -> Result<BridgeTable, SkeletonError> {
        let path = self.path_for(dist, cfg, eps);
        if path.exists() {
            return read_table(&path, cfg);
        }
        let table = BridgeTable::build(dist, cfg, eps)?;
        fs::create_dir_all(&self.dir).map_err(|e| io_err(&self.dir, e))?;
        // write under a temporary name so a crash never leaves a torn file
        let tmp = path.with_extension("tmp");
        write_table(&tmp, &table)?;
        fs::rename(&tmp, &path).map_err(|e| io_err(&path, e))?;
        Ok(table)
    }
}

pub fn write_table(path: &Path, table: &BridgeTable) -> Result<(), SkeletonError> {
    let file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    let l = table.cfg.sites() as u64;
    let dims = [2, table.block + 1, l, l];
    let mut put = |bytes: &[u8]| w.write_all(bytes).map_err(|e| io_err(path, e));
    put(&CACHE_MAGIC)?;
    put(&CACHE_VERSION.to_le_bytes())?;
    put(&(dims.len() as u32).to_le_bytes())?;
    for d in dims {
        put(&d.to_le_bytes())?;
    }
    for v in table.kernel.iter().chain(&table.first) {
        put(&v.to_le_bytes())?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn read_table(path: &Path, cfg: &TorusConfig) -> Result<BridgeTable, SkeletonError> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut r = BufReader::new(file);
    let mut take = |buf: &mut [u8]| r.read_exact(buf).map_err(|e| io_err(path, e));
    let mut magic = [0u8; 8];
    take(&mut magic)?;
    if magic != CACHE_MAGIC {
        return Err(io_err(path, "bad magic"));
    }
    let mut word = [0u8; 4];
    take(&mut word)?;
    let version = u32::from_le_bytes(word);
    if version != CACHE_VERSION {
        return Err(io_err(path, format!("unsupported version {version}")));
    }
    take(&mut word)?;
    if u32::from_le_bytes(word) != 4 {
        return Err(io_err(path, "expected 4 dimensions"));
    }
    let mut dims = [0u64; 4];
    let mut long = [0u8; 8];
    for d in &mut dims {
        take(&mut long)?;
        *d = u64::from_le_bytes(long);
    }
    let l = cfg.sites() as u64;
    if dims[0] != 2 || dims[2] != l || dims[3] != l || dims[1] == 0 {
        return Err(io_err(path, format!("dimensions {dims:?} do not fit an L = {l} grid")));
    }
    let half = (dims[1] * l * l) as usize;
    let mut values = vec![0.0; 2 * half];
    for v in &mut values {
        take(&mut long)?;
        *v = f64::from_le_bytes(long);
    }
    if r.read(&mut long).map_err(|e| io_err(path, e))? != 0 {
        return Err(io_err(path, "trailing bytes"));
    }
    let first = values.split_off(half);
    Ok(BridgeTable {
        cfg: *cfg,
        block: dims[1] - 1,
        kernel: values,
        first,
    })
}
