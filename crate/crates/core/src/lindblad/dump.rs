//! Binary dump of full-register operators.
//!
//! Layout, all little-endian:
//!
//! | bytes | content                                  |
//! |-------|------------------------------------------|
//! | 8     | magic `RQRHO\0\0\x01`                    |
//! | 4     | number of atoms `n` (u32)                |
//! | 8     | dimension `d = 3^n` (u64)                |
//! | 16 d² | entries row-major as `(re, im)` f64 pairs |

use std::io::{Read, Write};

use nalgebra::DMatrix;
use num_complex::Complex64 as C;

use super::{space::pow3, DensityOperator, LindbladError};

const MAGIC: [u8; 8] = *b"RQRHO\0\0\x01";

pub fn write_density(rho: &DensityOperator, mut w: impl Write) -> Result<(), LindbladError> {
    let d = rho.dim();
    w.write_all(&MAGIC)?;
    w.write_all(&(rho.atoms as u32).to_le_bytes())?;
    w.write_all(&(d as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(16 * d * d);
    for i in 0..d {
        for j in 0..d {
            let x = rho.matrix[(i, j)];
            buf.extend_from_slice(&x.re.to_le_bytes());
            buf.extend_from_slice(&x.im.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_density(mut r: impl Read) -> Result<DensityOperator, LindbladError> {
    let bad = |m: &str| LindbladError::Io(std::io::Error::new(std::io::ErrorKind::InvalidData, m.to_string()));
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if magic != MAGIC {
        return Err(bad("not a density dump"));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let atoms = u32::from_le_bytes(b4) as usize;
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let d = u64::from_le_bytes(b8) as usize;
    if atoms > 8 || d != pow3(atoms) {
        return Err(bad("dimension does not match the atom count"));
    }
    let mut raw = vec![0u8; 16 * d * d];
    r.read_exact(&mut raw)?;
    let f = |k: usize| f64::from_le_bytes(raw[8 * k..8 * k + 8].try_into().unwrap());
    let matrix = DMatrix::from_fn(d, d, |i, j| {
        let k = 2 * (i * d + j);
        C::new(f(k), f(k + 1))
    });
    Ok(DensityOperator { atoms, matrix })
}
