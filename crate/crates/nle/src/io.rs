//! NLGF grid-function files and CSV tables.
//!
//! NLGF layout (little endian): magic `NLGF`, `u32` version (1), `u32` d,
//! `u64` N, `f64` L, `u8` domain (0 space, 1 frequency), then `N^d` pairs of
//! `f64` (re, im) in row-major order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nle_core::grid::{Domain, GridFunction, SpectralGrid};
use nle_core::Complex64;

const MAGIC: &[u8; 4] = b"NLGF";
const VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("not an NLGF file")]
    Magic,
    #[error("unsupported NLGF version {0}")]
    Version(u32),
    #[error("bad NLGF header: {0}")]
    Header(String),
}

pub fn write_nlgf(f: &GridFunction, mut w: impl Write) -> Result<(), IoError> {
    let g = f.grid();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(g.dim() as u32).to_le_bytes())?;
    w.write_all(&(g.n() as u64).to_le_bytes())?;
    w.write_all(&g.length().to_le_bytes())?;
    w.write_all(&[match f.domain() {
        Domain::Space => 0u8,
        Domain::Frequency => 1u8,
    }])?;
    for z in f.values() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_nlgf(mut r: impl Read) -> Result<GridFunction, IoError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(IoError::Magic);
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != VERSION {
        return Err(IoError::Version(version));
    }
    r.read_exact(&mut b4)?;
    let dim = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b8)?;
    let n = usize::try_from(u64::from_le_bytes(b8)).map_err(|e| IoError::Header(e.to_string()))?;
    r.read_exact(&mut b8)?;
    let length = f64::from_le_bytes(b8);
    let mut tag = [0u8; 1];
    r.read_exact(&mut tag)?;
    let domain = match tag[0] {
        0 => Domain::Space,
        1 => Domain::Frequency,
        t => return Err(IoError::Header(format!("domain tag {t}"))),
    };
    let grid = SpectralGrid::new(dim, n, length).map_err(|e| IoError::Header(e.to_string()))?;
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        r.read_exact(&mut b8)?;
        let re = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        values.push(Complex64::new(re, f64::from_le_bytes(b8)));
    }
    GridFunction::new(grid, domain, values).map_err(|e| IoError::Header(e.to_string()))
}

pub fn save_nlgf(f: &GridFunction, path: &Path) -> Result<(), IoError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_nlgf(f, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_nlgf(path: &Path) -> Result<GridFunction, IoError> {
    read_nlgf(BufReader::new(File::open(path)?))
}

/// Writes a header row and numeric rows.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<(), IoError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|v| format!("{v:e}")))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a numeric CSV written by [`write_csv`]; returns header and rows.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), IoError> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| IoError::Header(format!("{s}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nlgf_round_trip_is_exact() {
        let grid = SpectralGrid::new(2, 8, 3.5).unwrap();
        let f = GridFunction::from_fn(grid, |x| Complex64::new(x[0].sin(), x[1] * 0.1));
        let mut buf = Vec::new();
        write_nlgf(&f, &mut buf).unwrap();
        assert_eq!(buf.len(), 4 + 4 + 4 + 8 + 8 + 1 + 64 * 16);
        let g = read_nlgf(buf.as_slice()).unwrap();
        assert_eq!(g.values(), f.values());
        assert_eq!(g.domain(), Domain::Space);
        assert_eq!(g.grid(), f.grid());
        let fr = f.to_frequency().unwrap();
        let mut buf = Vec::new();
        write_nlgf(&fr, &mut buf).unwrap();
        assert_eq!(read_nlgf(buf.as_slice()).unwrap().domain(), Domain::Frequency);
    }

    #[test]
    fn nlgf_rejects_garbage() {
        assert!(matches!(read_nlgf(&b"NOPE0000"[..]), Err(IoError::Magic)));
        let mut buf = Vec::new();
        buf.extend_from_slice(b"NLGF");
        buf.extend_from_slice(&7u32.to_le_bytes());
        assert!(matches!(read_nlgf(buf.as_slice()), Err(IoError::Version(7))));
    }
}
