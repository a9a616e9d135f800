use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Geometry, ScalarField, SpectralGrid};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"KGDU";
const VERSION_CARTESIAN: u32 = 1;
const VERSION_RADIAL: u32 = 2;

/// Contents of a binary field file.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub grid: SpectralGrid,
    pub fields: Vec<ScalarField>,
}

pub fn write_snapshot(path: &Path, fields: &[&ScalarField]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_to(&mut w, fields)?;
    w.flush()?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    read_from(&mut BufReader::new(File::open(path)?))
}

pub(crate) fn write_to(w: &mut impl Write, fields: &[&ScalarField]) -> Result<()> {
    let grid = fields
        .first()
        .ok_or_else(|| Error::InvalidArgument("snapshot needs at least one field".into()))?
        .grid();
    if fields.iter().any(|f| f.grid() != grid) {
        return Err(Error::GridMismatch);
    }
    let version = match grid.geometry() {
        Geometry::Cartesian => VERSION_CARTESIAN,
        Geometry::Radial => VERSION_RADIAL,
    };
    w.write_all(MAGIC)?;
    w.write_all(&version.to_le_bytes())?;
    w.write_all(&(grid.dim() as u32).to_le_bytes())?;
    w.write_all(&(grid.points_per_axis() as u32).to_le_bytes())?;
    w.write_all(&grid.half_length().to_le_bytes())?;
    w.write_all(&(fields.len() as u32).to_le_bytes())?;
    for f in fields {
        for v in f.values() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub(crate) fn read_from(r: &mut impl Read) -> Result<Snapshot> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Snapshot("bad magic".into()));
    }
    let version = read_u32(r)?;
    let dim = read_u32(r)? as usize;
    let points = read_u32(r)? as usize;
    let half_length = read_f64(r)?;
    let count = read_u32(r)? as usize;
    let grid = match version {
        VERSION_CARTESIAN => SpectralGrid::new(dim, points, half_length)?,
        VERSION_RADIAL if dim == 1 => SpectralGrid::radial(points, half_length)?,
        _ => {
            return Err(Error::Snapshot(format!(
                "unsupported version {version} (dim {dim})"
            )))
        }
    };
    let mut fields = Vec::with_capacity(count);
    let mut buf = vec![0u8; grid.len() * 8];
    for _ in 0..count {
        r.read_exact(&mut buf)?;
        let vals = buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        fields.push(ScalarField::from_values(&grid, vals)?);
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Snapshot("trailing bytes".into()));
    }
    Ok(Snapshot { grid, fields })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let g = SpectralGrid::new(2, 8, 1.5).unwrap();
        let f = ScalarField::from_fn(&g, |x| x[0] - x[1]);
        let mut buf = Vec::new();
        write_to(&mut buf, &[&f, &f]).unwrap();
        assert_eq!(&buf[0..4], b"KGDU");
        assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(buf[8..12].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(buf[12..16].try_into().unwrap()), 8);
        assert_eq!(f64::from_le_bytes(buf[16..24].try_into().unwrap()), 1.5);
        assert_eq!(u32::from_le_bytes(buf[24..28].try_into().unwrap()), 2);
        assert_eq!(buf.len(), 28 + 2 * 64 * 8);
        let snap = read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(snap.fields.len(), 2);
        assert_eq!(snap.fields[1].values(), f.values());
    }

    #[test]
    fn rejects_truncated_and_garbage() {
        let g = SpectralGrid::radial(16, 4.0).unwrap();
        let f = ScalarField::from_fn(&g, |r| 1.0 / (1.0 + r[0]));
        let mut buf = Vec::new();
        write_to(&mut buf, &[&f]).unwrap();
        let snap = read_from(&mut buf.as_slice()).unwrap();
        assert!(snap.grid.is_radial());
        assert!(read_from(&mut &buf[..buf.len() - 3]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_from(&mut bad.as_slice()).is_err());
        buf.push(0);
        assert!(read_from(&mut buf.as_slice()).is_err());
    }
}
