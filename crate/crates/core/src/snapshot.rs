//! Binary field snapshots.
//!
//! Layout (little-endian): 8-byte magic `QBGKFLD\0`, `u32` version, `u32` n,
//! `f64` p_max, `f64` mass, `i32` τ, then `n³` `f64` occupancies x-fastest.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::distributions::{DistributionField, MomentumGrid};
use crate::error::{Error, Result};
use crate::quantum_integrals::Statistics;

pub const MAGIC: [u8; 8] = *b"QBGKFLD\0";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 36;

pub fn encode(field: &DistributionField, grid: &MomentumGrid) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * field.values.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(grid.n as u32).to_le_bytes());
    out.extend_from_slice(&grid.p_max.to_le_bytes());
    out.extend_from_slice(&field.m.to_le_bytes());
    out.extend_from_slice(&field.stats.tau_int().to_le_bytes());
    for v in &field.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn take<const N: usize>(bytes: &[u8], at: usize) -> [u8; N] {
    bytes[at..at + N].try_into().expect("length checked by caller")
}

pub fn decode(bytes: &[u8]) -> Result<(MomentumGrid, DistributionField)> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Snapshot(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if take::<8>(bytes, 0) != MAGIC {
        return Err(Error::Snapshot("bad magic".into()));
    }
    let version = u32::from_le_bytes(take(bytes, 8));
    if version != VERSION {
        return Err(Error::Snapshot(format!("unsupported version {version}")));
    }
    let n = u32::from_le_bytes(take(bytes, 12)) as usize;
    let p_max = f64::from_le_bytes(take(bytes, 16));
    let m = f64::from_le_bytes(take(bytes, 24));
    let tau = i32::from_le_bytes(take(bytes, 32));
    let grid = MomentumGrid::new(p_max, n).map_err(|e| Error::Snapshot(e.to_string()))?;
    let stats = Statistics::from_tau(tau).map_err(|e| Error::Snapshot(e.to_string()))?;
    if !(m > 0.0) {
        return Err(Error::Snapshot(format!("nonpositive mass {m}")));
    }
    let expected = HEADER_LEN + 8 * grid.num_nodes();
    if bytes.len() != expected {
        return Err(Error::Snapshot(format!("expected {expected} bytes, found {}", bytes.len())));
    }
    let values = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunks of 8")))
        .collect();
    Ok((grid, DistributionField { values, stats, m }))
}

/// Writes `bytes` to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp_name = path.file_name().unwrap_or_default().to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write(path: &Path, field: &DistributionField, grid: &MomentumGrid) -> Result<()> {
    write_atomic(path, &encode(field, grid))
}

pub fn read(path: &Path) -> Result<(MomentumGrid, DistributionField)> {
    decode(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::eval_equilibrium;

    #[test]
    fn roundtrip_is_bit_exact() {
        let g = MomentumGrid::new(2.5, 6).unwrap();
        let f = eval_equilibrium(1.3, [0.1, 0.0, -0.2], 0.4, 2.0, Statistics::Boson, &g).unwrap();
        let bytes = encode(&f, &g);
        assert_eq!(bytes.len(), HEADER_LEN + 8 * 216);
        let (g2, f2) = decode(&bytes).unwrap();
        assert_eq!(g2, g);
        assert_eq!(f2, f);
    }

    #[test]
    fn rejects_corruption() {
        let g = MomentumGrid::new(1.0, 4).unwrap();
        let f = DistributionField::zeros(&g, Statistics::Fermion, 1.0);
        let mut bytes = encode(&f, &g);
        assert!(decode(&bytes[..HEADER_LEN + 8]).is_err());
        bytes[0] = b'X';
        assert!(decode(&bytes).is_err());
    }
}
