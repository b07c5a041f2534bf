//! Tensor file formats.
//!
//! JSON: `{"shape": [d1, ..., dk], "data": [row-major values]}`.
//! Binary: magic `TNSR`, order as `u32`, each dimension as `u64`, then the
//! row-major values as `f64`, all little-endian.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::DenseTensor;

pub const MAGIC: &[u8; 4] = b"TNSR";

pub fn to_json(t: &DenseTensor) -> String {
    serde_json::to_string(t).expect("finite tensor serializes")
}

pub fn from_json(s: &str) -> Result<DenseTensor> {
    serde_json::from_str(s).map_err(|e| Error::Format(format!("tensor JSON: {e}")))
}

pub fn write_binary<W: Write>(t: &DenseTensor, mut w: W) -> Result<()> {
    let io = |e: std::io::Error| Error::Format(e.to_string());
    w.write_all(MAGIC).map_err(io)?;
    w.write_all(&(t.order() as u32).to_le_bytes()).map_err(io)?;
    for &d in t.shape() {
        w.write_all(&(d as u64).to_le_bytes()).map_err(io)?;
    }
    for v in t.values() {
        w.write_all(&v.to_le_bytes()).map_err(io)?;
    }
    Ok(())
}

pub fn to_binary(t: &DenseTensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + 8 * (t.order() + t.len()));
    write_binary(t, &mut out).expect("writing to memory");
    out
}

fn read_exact<R: Read, const N: usize>(r: &mut R, what: &str) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)
        .map_err(|_| Error::Format(format!("truncated binary tensor while reading {what}")))?;
    Ok(buf)
}

pub fn read_binary<R: Read>(mut r: R) -> Result<DenseTensor> {
    let magic: [u8; 4] = read_exact(&mut r, "magic")?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}, expected TNSR")));
    }
    let order = u32::from_le_bytes(read_exact(&mut r, "order")?) as usize;
    let mut shape = Vec::with_capacity(order);
    for k in 0..order {
        let d = u64::from_le_bytes(read_exact(&mut r, &format!("dimension {k}"))?);
        shape.push(
            usize::try_from(d).map_err(|_| Error::Format(format!("dimension {d} too large")))?,
        );
    }
    let len = shape
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::Format(format!("shape {shape:?} overflows")))?;
    let mut values = Vec::with_capacity(len);
    for i in 0..len {
        values.push(f64::from_le_bytes(read_exact(
            &mut r,
            &format!("value {i}"),
        )?));
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)
        .map_err(|e| Error::Format(e.to_string()))?
        != 0
    {
        return Err(Error::Format("trailing bytes after tensor data".into()));
    }
    DenseTensor::new(shape, values)
}

pub fn from_binary(bytes: &[u8]) -> Result<DenseTensor> {
    read_binary(bytes)
}

/// Reads either format, detected by the magic bytes.
pub fn read_tensor(path: &Path) -> Result<DenseTensor> {
    let bytes = fs::read(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    if bytes.starts_with(MAGIC) {
        from_binary(&bytes)
    } else {
        let text = String::from_utf8(bytes).map_err(|_| {
            Error::Format(format!(
                "{}: neither TNSR binary nor UTF-8 JSON",
                path.display()
            ))
        })?;
        from_json(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }
}

/// Binary for `.tnsr`/`.bin` extensions, JSON otherwise.
pub fn write_tensor(path: &Path, t: &DenseTensor) -> Result<()> {
    let binary = matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("tnsr") | Some("bin")
    );
    let bytes = if binary {
        to_binary(t)
    } else {
        to_json(t).into_bytes()
    };
    fs::write(path, bytes).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}
