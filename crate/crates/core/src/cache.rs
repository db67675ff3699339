//! Persistent cache of determinant samples keyed by
//! `(potential hash, grid hash, sheet, lambda)`.
//!
//! The file format is JSON lines, one record per sample. Floating-point
//! values are written in shortest round-trip form, so a warm cache returns
//! bitwise the values a cold run computes.

use crate::error::Result;
use crate::linalg::LogDet;
use crate::spectral::Sheet;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Key {
    potential: u64,
    grid: u64,
    sheet: bool,
    re: u64,
    im: u64,
}

#[derive(Serialize, Deserialize)]
struct Record {
    potential: u64,
    grid: u64,
    sheet: Sheet,
    re: f64,
    im: f64,
    log_abs: f64,
    arg: f64,
}

/// In-memory determinant cache with optional file backing.
#[derive(Debug, Default)]
pub struct DetCache {
    map: Mutex<BTreeMap<Key, LogDet>>,
    path: Option<PathBuf>,
}

impl DetCache {
    /// An empty cache that is never written to disk.
    pub fn in_memory() -> Self {
        DetCache::default()
    }

    /// Load the cache at `path` if it exists; [`DetCache::save`] writes back there.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut map = BTreeMap::new();
        if path.exists() {
            let f = std::fs::File::open(&path)?;
            for line in BufReader::new(f).lines() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let r: Record = serde_json::from_str(&line)?;
                map.insert(key(r.potential, r.grid, r.sheet, Complex64::new(r.re, r.im)), LogDet { log_abs: r.log_abs, arg: r.arg });
            }
        }
        Ok(DetCache { map: Mutex::new(map), path: Some(path) })
    }

    pub fn get(&self, potential: u64, grid: u64, sheet: Sheet, lambda: Complex64) -> Option<LogDet> {
        self.map.lock().unwrap().get(&key(potential, grid, sheet, lambda)).copied()
    }

    pub fn insert(&self, potential: u64, grid: u64, sheet: Sheet, lambda: Complex64, value: LogDet) {
        self.map.lock().unwrap().insert(key(potential, grid, sheet, lambda), value);
    }

    pub fn len(&self) -> usize {
        self.map.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Write all records (sorted by key) to the backing file, if any.
    pub fn save(&self) -> Result<()> {
        let Some(path) = &self.path else {
            return Ok(());
        };
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir)?;
            }
        }
        let tmp = path.with_extension("tmp");
        {
            let mut w = BufWriter::new(std::fs::File::create(&tmp)?);
            for (k, v) in self.map.lock().unwrap().iter() {
                let r = Record {
                    potential: k.potential,
                    grid: k.grid,
                    sheet: if k.sheet { Sheet::Second } else { Sheet::Physical },
                    re: f64::from_bits(k.re),
                    im: f64::from_bits(k.im),
                    log_abs: v.log_abs,
                    arg: v.arg,
                };
                serde_json::to_writer(&mut w, &r)?;
                w.write_all(b"\n")?;
            }
            w.flush()?;
        }
        std::fs::rename(&tmp, path)?;
        Ok(())
    }
}

fn key(potential: u64, grid: u64, sheet: Sheet, lambda: Complex64) -> Key {
    Key { potential, grid, sheet: sheet == Sheet::Second, re: lambda.re.to_bits(), im: lambda.im.to_bits() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_through_file() {
        let dir = std::env::temp_dir().join(format!("diracres-cache-{}", std::process::id()));
        let path = dir.join("det.jsonl");
        let c = DetCache::open(&path).unwrap();
        let z = Complex64::new(0.1 + 0.2, -1.0 / 3.0);
        let v = LogDet { log_abs: -12.345678901234567, arg: 1.0 / 7.0 };
        c.insert(1, 2, Sheet::Second, z, v);
        c.save().unwrap();
        let d = DetCache::open(&path).unwrap();
        assert_eq!(d.get(1, 2, Sheet::Second, z), Some(v));
        assert_eq!(d.get(1, 2, Sheet::Physical, z), None);
        std::fs::remove_dir_all(dir).unwrap();
    }
}
