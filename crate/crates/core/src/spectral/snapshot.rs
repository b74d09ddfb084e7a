//! Binary field snapshots.
//!
//! Layout, all little-endian:
//!
//! | bytes        | content                                  |
//! |--------------|------------------------------------------|
//! | 0..12        | magic `b"BAROTROPICSN"`                  |
//! | 12..16       | format version (`u32`)                   |
//! | 16..40       | dim, points per axis, components (`u64`) |
//! | 40..40+8*dim | period per axis (`f64`)                  |
//! | rest         | samples (`f64`), component-major, row-major |

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use super::field::Field;
use super::grid::Grid;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 12] = b"BAROTROPICSN";
pub const VERSION: u32 = 1;

pub fn encode(field: &Field) -> Vec<u8> {
    let grid = field.grid();
    let mut out = Vec::with_capacity(40 + 8 * grid.dim() + 8 * field.values().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(grid.dim() as u64).to_le_bytes());
    out.extend_from_slice(&(grid.n() as u64).to_le_bytes());
    out.extend_from_slice(&(field.components() as u64).to_le_bytes());
    for p in grid.period() {
        out.extend_from_slice(&p.to_le_bytes());
    }
    for v in field.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<Field> {
    let mut r = bytes;
    let mut magic = [0u8; 12];
    r.read_exact(&mut magic).map_err(|_| Error::Format("truncated header".into()))?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(take(&mut r)?);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dim = u64::from_le_bytes(take(&mut r)?) as usize;
    let n = u64::from_le_bytes(take(&mut r)?) as usize;
    let components = u64::from_le_bytes(take(&mut r)?) as usize;
    if !(2..=3).contains(&dim) || components == 0 {
        return Err(Error::Format(format!("bad shape: dim {dim}, components {components}")));
    }
    let mut period = Vec::with_capacity(dim);
    for _ in 0..dim {
        period.push(f64::from_le_bytes(take(&mut r)?));
    }
    let grid = Grid::new(dim, n, &period)?;
    let count = grid.len() * components;
    if r.len() != 8 * count {
        return Err(Error::Format(format!("expected {} payload bytes, found {}", 8 * count, r.len())));
    }
    let values = r.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Field::from_values(&grid, components, values)
}

fn take<const N: usize>(r: &mut &[u8]) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf).map_err(|_| Error::Format("truncated header".into()))?;
    Ok(buf)
}

pub fn save(field: &Field, path: impl AsRef<Path>) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode(field))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<Field> {
    decode(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let g = Grid::new(3, 8, &[1.0, 2.0, 3.0]).unwrap();
        let f = Field::from_fn(&g, 3, |x, c| x[0].sin() + c as f64 * x[2] + 1e-300);
        let back = decode(&encode(&f)).unwrap();
        assert_eq!(back.grid(), f.grid());
        assert_eq!(back.values(), f.values());
    }

    #[test]
    fn header_layout_is_fixed() {
        let g = Grid::periodic(2, 8).unwrap();
        let bytes = encode(&Field::zeros(&g, 1));
        assert_eq!(&bytes[..12], MAGIC);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 1);
        assert_eq!(u64::from_le_bytes(bytes[16..24].try_into().unwrap()), 2);
        assert_eq!(u64::from_le_bytes(bytes[24..32].try_into().unwrap()), 8);
        assert_eq!(bytes.len(), 40 + 16 + 8 * 64);
    }

    #[test]
    fn rejects_corruption() {
        let g = Grid::periodic(2, 8).unwrap();
        let mut bytes = encode(&Field::zeros(&g, 1));
        bytes.pop();
        assert!(decode(&bytes).is_err());
        bytes[0] = b'X';
        assert!(decode(&bytes).is_err());
    }
}
