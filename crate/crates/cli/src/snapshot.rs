//! Field snapshots: magic `CHF1`, version, grid size, step, tau, nu, then
//! the nodal values as little-endian IEEE-754 binary64, row-major. The
//! write/read round trip is bit-identical.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use chsplit_core::field::RealField;
use chsplit_core::grid::Grid2D;

pub const MAGIC: [u8; 4] = *b"CHF1";
pub const VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SnapshotHeader {
    pub n: u32,
    pub step: u64,
    pub tau: f64,
    pub nu: f64,
}

fn io_err(path: &Path, what: impl std::fmt::Display) -> String {
    format!("snapshot {}: {what}", path.display())
}

pub fn write_snapshot(
    path: &Path,
    header: SnapshotHeader,
    field: &RealField,
) -> Result<(), String> {
    if field.grid().n() as u32 != header.n {
        return Err(io_err(path, "header n does not match the field"));
    }
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    let mut emit = |bytes: &[u8]| w.write_all(bytes).map_err(|e| io_err(path, e));
    emit(&MAGIC)?;
    emit(&VERSION.to_le_bytes())?;
    emit(&header.n.to_le_bytes())?;
    emit(&header.step.to_le_bytes())?;
    emit(&header.tau.to_le_bytes())?;
    emit(&header.nu.to_le_bytes())?;
    for v in field.values() {
        emit(&v.to_le_bytes())?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn read_snapshot(path: &Path) -> Result<(SnapshotHeader, RealField), String> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut r = BufReader::new(file);

    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4).map_err(|e| io_err(path, e))?;
    if b4 != MAGIC {
        return Err(io_err(path, "bad magic, not a CHF1 snapshot"));
    }
    r.read_exact(&mut b4).map_err(|e| io_err(path, e))?;
    let version = u32::from_le_bytes(b4);
    if version != VERSION {
        return Err(io_err(path, format!("unsupported version {version}")));
    }
    r.read_exact(&mut b4).map_err(|e| io_err(path, e))?;
    let n = u32::from_le_bytes(b4);
    r.read_exact(&mut b8).map_err(|e| io_err(path, e))?;
    let step = u64::from_le_bytes(b8);
    r.read_exact(&mut b8).map_err(|e| io_err(path, e))?;
    let tau = f64::from_le_bytes(b8);
    r.read_exact(&mut b8).map_err(|e| io_err(path, e))?;
    let nu = f64::from_le_bytes(b8);

    let grid = Grid2D::new(n as usize).map_err(|e| io_err(path, e))?;
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        r.read_exact(&mut b8).map_err(|e| io_err(path, e))?;
        values.push(f64::from_le_bytes(b8));
    }
    // exactly the payload, nothing more
    let mut probe = [0u8; 1];
    match r.read(&mut probe) {
        Ok(0) => {}
        Ok(_) => return Err(io_err(path, "trailing bytes after payload")),
        Err(e) => return Err(io_err(path, e)),
    }
    let field = RealField::from_values(grid, values).map_err(|e| io_err(path, e))?;
    Ok((SnapshotHeader { n, step, tau, nu }, field))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_identical() {
        let grid = Grid2D::new(16).unwrap();
        let f = RealField::from_fn(grid, |x, y| (x + 0.3 * y).sin() * 1.234e-7 + x);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.chf");
        let header = SnapshotHeader {
            n: 16,
            step: 42,
            tau: 1e-3,
            nu: 0.25,
        };
        write_snapshot(&path, header, &f).unwrap();
        let (h2, g) = read_snapshot(&path).unwrap();
        assert_eq!(header, h2);
        for (a, b) in f.values().iter().zip(g.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn bad_magic_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.chf");
        std::fs::write(&path, b"NOPE").unwrap();
        let e = read_snapshot(&path).unwrap_err();
        assert!(e.contains("bad magic"), "{e}");
    }
}
