//! Binary field cache: `SDF1`, dims as 3×u32, origin and spacing as 4×f64,
//! then one f32 per node with `x` varying fastest. All little-endian.

use std::io::{Read, Write};

use crate::Vec3;

use super::{DistanceField, DistfieldError};

pub const FIELD_MAGIC: &[u8; 4] = b"SDF1";

pub fn write_field(df: &DistanceField, mut w: impl Write) -> Result<(), DistfieldError> {
    w.write_all(FIELD_MAGIC)?;
    for &d in &df.dims {
        w.write_all(&(d as u32).to_le_bytes())?;
    }
    for x in [df.origin.x, df.origin.y, df.origin.z, df.spacing] {
        w.write_all(&x.to_le_bytes())?;
    }
    let mut buf = Vec::with_capacity(df.values.len() * 4);
    for &v in &df.values {
        buf.extend_from_slice(&(v as f32).to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Reads a cache. Values come back widened from f32.
pub fn read_field(mut r: impl Read) -> Result<DistanceField, DistfieldError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != FIELD_MAGIC {
        return Err(DistfieldError::BadCache("wrong magic bytes".into()));
    }
    let mut dims = [0usize; 3];
    for d in &mut dims {
        let mut b = [0u8; 4];
        r.read_exact(&mut b)?;
        *d = u32::from_le_bytes(b) as usize;
    }
    if dims.iter().any(|&d| d < 2) {
        return Err(DistfieldError::BadCache(format!("dims {dims:?}")));
    }
    let mut f = [0f64; 4];
    for x in &mut f {
        let mut b = [0u8; 8];
        r.read_exact(&mut b)?;
        *x = f64::from_le_bytes(b);
    }
    if !(f[3].is_finite() && f[3] > 0.0) {
        return Err(DistfieldError::BadCache(format!("spacing {}", f[3])));
    }
    let n = dims[0]
        .checked_mul(dims[1])
        .and_then(|x| x.checked_mul(dims[2]))
        .ok_or_else(|| DistfieldError::BadCache("dims overflow".into()))?;
    let mut raw = vec![0u8; n * 4];
    r.read_exact(&mut raw)
        .map_err(|_| DistfieldError::BadCache("truncated values".into()))?;
    let values = raw
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    Ok(DistanceField {
        dims,
        origin: Vec3::new(f[0], f[1], f[2]),
        spacing: f[3],
        values,
    })
}
