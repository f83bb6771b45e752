//! VSF1 field snapshots.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! "VSF1" | dim: u32 | points_per_axis: u32 | components: u32 | "f64<"
//! component 0 samples (row-major, f64 LE) | component 1 | ...
//! ```
//!
//! A checkpoint pairs the binary file with a `key = value` text sidecar.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::field::SpectralField;
use super::grid::Grid;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"VSF1";
const DTYPE: &[u8; 4] = b"f64<";

pub fn write_snapshot<W: Write>(mut w: W, comps: &[&SpectralField]) -> Result<()> {
    let first = comps
        .first()
        .ok_or_else(|| Error::Snapshot("no components to write".into()))?;
    let grid = first.grid();
    w.write_all(MAGIC)?;
    w.write_u32::<LittleEndian>(grid.dim() as u32)?;
    w.write_u32::<LittleEndian>(grid.points_per_axis() as u32)?;
    w.write_u32::<LittleEndian>(comps.len() as u32)?;
    w.write_all(DTYPE)?;
    for c in comps {
        first.check_same_grid(c)?;
        for x in c.to_real() {
            w.write_f64::<LittleEndian>(x)?;
        }
    }
    Ok(())
}

/// Reads a snapshot and returns the grid plus the transformed components.
pub fn read_snapshot<R: Read>(mut r: R) -> Result<(Grid, Vec<SpectralField>)> {
    let mut tag = [0u8; 4];
    r.read_exact(&mut tag)?;
    if &tag != MAGIC {
        return Err(Error::Snapshot(format!("bad magic {tag:?}")));
    }
    let dim = r.read_u32::<LittleEndian>()? as usize;
    let n = r.read_u32::<LittleEndian>()? as usize;
    let count = r.read_u32::<LittleEndian>()? as usize;
    r.read_exact(&mut tag)?;
    if &tag != DTYPE {
        return Err(Error::Snapshot(format!("unsupported element type {tag:?}")));
    }
    let grid = Grid::new(dim, n)?;
    let mut comps = Vec::with_capacity(count);
    let mut buf = vec![0.0; grid.len()];
    for _ in 0..count {
        r.read_f64_into::<LittleEndian>(&mut buf)?;
        comps.push(SpectralField::from_real(&grid, &buf)?);
    }
    Ok((grid, comps))
}

pub fn save_snapshot(path: &Path, comps: &[&SpectralField]) -> Result<()> {
    let file = fs::File::create(path)?;
    write_snapshot(std::io::BufWriter::new(file), comps)
}

pub fn load_snapshot(path: &Path) -> Result<(Grid, Vec<SpectralField>)> {
    let file = fs::File::open(path)?;
    read_snapshot(std::io::BufReader::new(file))
}

pub fn write_sidecar(path: &Path, entries: &BTreeMap<String, String>) -> Result<()> {
    let mut s = String::new();
    for (k, v) in entries {
        s.push_str(&format!("{k} = {v}\n"));
    }
    fs::write(path, s)?;
    Ok(())
}

pub fn read_sidecar(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path)?;
    let mut out = BTreeMap::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Snapshot(format!("sidecar line without '=': {line}")))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_in_memory() {
        let g = Grid::new(2, 16).unwrap();
        let a = SpectralField::from_real(&g, &g.sample(|x| x[0].sin() + 0.25)).unwrap();
        let b = SpectralField::from_real(&g, &g.sample(|x| (2.0 * x[1]).cos())).unwrap();
        let mut bytes = Vec::new();
        write_snapshot(&mut bytes, &[&a, &b]).unwrap();
        assert_eq!(&bytes[..4], b"VSF1");
        assert_eq!(bytes.len(), 20 + 2 * 8 * g.len());
        let (g2, comps) = read_snapshot(&bytes[..]).unwrap();
        assert_eq!(g2, g);
        assert_eq!(comps[0].to_real(), a.to_real());
        assert!(read_snapshot(&b"VSF2"[..]).is_err());
    }
}
