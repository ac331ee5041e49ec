//! Binary dump of an influence matrix.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic    [u8; 4]  "ZQMX"
//! version  u32      1
//! rows     u64
//! cols     u64
//! degree   u64
//! seed     u64
//! offsets  (rows + 1) x u64
//! indices  (rows * degree) x u32
//! values   (rows * degree) x f64
//! fan_in   rows x u32
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::InfluenceMatrix;
use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"ZQMX";
pub const VERSION: u32 = 1;

impl InfluenceMatrix {
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        for x in [self.rows, self.cols, self.degree] {
            w.write_all(&(x as u64).to_le_bytes())?;
        }
        w.write_all(&self.seed.to_le_bytes())?;
        for &o in &self.row_offsets {
            w.write_all(&(o as u64).to_le_bytes())?;
        }
        for &j in &self.col_indices {
            w.write_all(&j.to_le_bytes())?;
        }
        for &v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        for &f in &self.fan_in {
            w.write_all(&f.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if magic != MAGIC {
            return Err(Error::Format(format!("influence matrix magic {magic:?}")));
        }
        let version = read_u32(&mut r)?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported influence matrix version {version}")));
        }
        let rows = read_u64(&mut r)? as usize;
        let cols = read_u64(&mut r)? as usize;
        let degree = read_u64(&mut r)? as usize;
        let seed = read_u64(&mut r)?;
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyShape { rows, cols });
        }
        if degree == 0 || degree > cols {
            return Err(Error::InvalidDegree { degree, cols });
        }
        let nnz = rows
            .checked_mul(degree)
            .ok_or_else(|| Error::Format("entry count overflows".into()))?;

        let row_offsets = (0..=rows)
            .map(|_| read_u64(&mut r).map(|x| x as usize))
            .collect::<Result<Vec<_>>>()?;
        if row_offsets.iter().enumerate().any(|(i, &o)| o != i * degree) {
            return Err(Error::Format("row offsets are not a fixed-degree layout".into()));
        }
        let col_indices = (0..nnz).map(|_| read_u32(&mut r)).collect::<Result<Vec<_>>>()?;
        for row in col_indices.chunks(degree) {
            if row.iter().any(|&j| j as usize >= cols) || row.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Format(
                    "row column indices not sorted, distinct and in range".into(),
                ));
            }
        }
        let values = (0..nnz)
            .map(|_| read_u64(&mut r).map(f64::from_bits))
            .collect::<Result<Vec<_>>>()?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("influence matrix values"));
        }
        let fan_in = (0..rows).map(|_| read_u32(&mut r)).collect::<Result<Vec<_>>>()?;

        Ok(Self::assemble(
            rows,
            cols,
            degree,
            seed,
            row_offsets,
            col_indices,
            values,
            fan_in,
        ))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_to(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
            _ => Error::Io(e),
        })?;
        Self::read_from(BufReader::new(file))
    }
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}
