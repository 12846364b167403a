//! Binary state snapshots.
//!
//! Layout, all little-endian: `b"PKSN"`, `u32` version, 32-byte config hash,
//! `f64` time, `u64` step, three `u32` dimensions `(nx, ny, nm)`, `u32` field
//! count, then per field a `u32` name length, the UTF-8 name, a `u64` value
//! count and the `f64` values in row-major order.

use std::path::Path;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"PKSN";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub config_hash: [u8; 32],
    pub t: f64,
    pub step: u64,
    /// `(nx, ny, nm)`; `nm` is 0 without a kinetic density.
    pub dims: [u32; 3],
    pub fields: Vec<(String, Vec<f64>)>,
}

impl Snapshot {
    pub fn field(&self, name: &str) -> Option<&[f64]> {
        self.fields.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    /// Equality of every stored bit, so NaN payloads compare equal to themselves.
    pub fn bit_identical(&self, other: &Self) -> bool {
        self.to_bytes() == other.to_bytes()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let payload: usize = self.fields.iter().map(|(n, v)| 12 + n.len() + 8 * v.len()).sum();
        let mut out = Vec::with_capacity(68 + payload);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&self.config_hash);
        out.extend_from_slice(&self.t.to_le_bytes());
        out.extend_from_slice(&self.step.to_le_bytes());
        for d in self.dims {
            out.extend_from_slice(&d.to_le_bytes());
        }
        out.extend_from_slice(&(self.fields.len() as u32).to_le_bytes());
        for (name, values) in &self.fields {
            out.extend_from_slice(&(name.len() as u32).to_le_bytes());
            out.extend_from_slice(name.as_bytes());
            out.extend_from_slice(&(values.len() as u64).to_le_bytes());
            for v in values {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Snapshot("bad magic bytes".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Snapshot(format!("unsupported version {version}")));
        }
        let config_hash: [u8; 32] = r.take(32)?.try_into().expect("32 bytes");
        let t = f64::from_le_bytes(r.array()?);
        let step = u64::from_le_bytes(r.array()?);
        let dims = [r.u32()?, r.u32()?, r.u32()?];
        let count = r.u32()? as usize;
        let mut fields = Vec::with_capacity(count);
        for _ in 0..count {
            let len = r.u32()? as usize;
            let name = String::from_utf8(r.take(len)?.to_vec())
                .map_err(|_| Error::Snapshot("field name is not UTF-8".into()))?;
            let n = u64::from_le_bytes(r.array()?) as usize;
            let raw = r.take(n.checked_mul(8).ok_or_else(|| Error::Snapshot("field too large".into()))?)?;
            let values = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
            fields.push((name, values));
        }
        if r.pos != bytes.len() {
            return Err(Error::Snapshot(format!("{} trailing bytes", bytes.len() - r.pos)));
        }
        Ok(Self { config_hash, t, step, dims, fields })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Snapshot("truncated file".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("exact length"))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Snapshot {
        Snapshot {
            config_hash: [7; 32],
            t: 0.1 + 0.2,
            step: 42,
            dims: [4, 4, 0],
            fields: vec![
                ("omega".into(), vec![1.0, -0.0, f64::MIN_POSITIVE, f64::NAN]),
                ("rho".into(), vec![]),
            ],
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let s = sample();
        let back = Snapshot::from_bytes(&s.to_bytes()).unwrap();
        assert!(s.bit_identical(&back));
        assert_eq!(back.t.to_bits(), s.t.to_bits());
        assert_eq!(back.field("omega").unwrap()[1].to_bits(), (-0.0f64).to_bits());
    }

    #[test]
    fn corrupt_input_is_rejected() {
        let bytes = sample().to_bytes();
        assert!(Snapshot::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(Snapshot::from_bytes(&bad).unwrap_err().to_string().contains("magic"));
        let mut bad = bytes;
        bad[4] = 2;
        assert!(Snapshot::from_bytes(&bad).unwrap_err().to_string().contains("version"));
    }
}
