//! `BWF1` binary field files: magic, `u16` version, `u16` n, `u64 N[n]`,
//! `f64 L[n]`, `f64 c[n]`, `f64 p`, then row-major `f64` data, little-endian.

use std::path::Path;

use crate::error::{Error, Result};
use crate::spectral::{make_grid, Field};

pub const MAGIC: &[u8; 4] = b"BWF1";
pub const VERSION: u16 = 1;

/// A field together with the speed and exponent it belongs to.
#[derive(Clone, Debug)]
pub struct FieldFile {
    pub field: Field<f64>,
    pub c: Vec<f64>,
    pub p: f64,
}

/// Header values a reader may insist on.
#[derive(Clone, Debug, Default)]
pub struct Expect {
    pub sizes: Option<Vec<usize>>,
    pub half_widths: Option<Vec<f64>>,
    pub c: Option<Vec<f64>>,
    pub p: Option<f64>,
}

pub fn encode(file: &FieldFile) -> Result<Vec<u8>> {
    let g = file.field.grid();
    let n = g.n();
    if file.c.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: file.c.len() });
    }
    let mut out = Vec::with_capacity(8 + 24 * n + 8 + 8 * g.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(n as u16).to_le_bytes());
    for &s in g.sizes() {
        out.extend_from_slice(&(s as u64).to_le_bytes());
    }
    for &l in g.half_widths() {
        out.extend_from_slice(&l.to_le_bytes());
    }
    for &c in &file.c {
        out.extend_from_slice(&c.to_le_bytes());
    }
    out.extend_from_slice(&file.p.to_le_bytes());
    for &v in file.field.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, k: usize, expected_total: usize) -> Result<&'a [u8]> {
        if self.pos + k > self.bytes.len() {
            return Err(Error::TruncatedPayload { expected: expected_total.max(self.pos + k), found: self.bytes.len() });
        }
        let s = &self.bytes[self.pos..self.pos + k];
        self.pos += k;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, 0)?.try_into().unwrap()))
    }

    fn u64(&mut self, total: usize) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, total)?.try_into().unwrap()))
    }

    fn f64(&mut self, total: usize) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, total)?.try_into().unwrap()))
    }
}

pub fn decode(bytes: &[u8], expect: Option<&Expect>) -> Result<FieldFile> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(Error::BadMagic);
    }
    let mut cur = Cursor { bytes, pos: 4 };
    let version = cur.u16()?;
    if version != VERSION {
        return Err(Error::VersionMismatch(version));
    }
    let n = cur.u16()? as usize;
    let header = 8 + 24 * n + 8;
    let mut sizes = Vec::with_capacity(n);
    for _ in 0..n {
        let s = cur.u64(header)?;
        sizes.push(usize::try_from(s).map_err(|_| Error::HeaderMismatch(format!("axis size {s} too large")))?);
    }
    let half_widths = (0..n).map(|_| cur.f64(header)).collect::<Result<Vec<_>>>()?;
    let c = (0..n).map(|_| cur.f64(header)).collect::<Result<Vec<_>>>()?;
    let p = cur.f64(header)?;
    let count = sizes.iter().try_fold(1usize, |a, &s| a.checked_mul(s)).ok_or_else(|| Error::HeaderMismatch("grid too large".into()))?;
    let total = header + 8 * count;
    if bytes.len() < total {
        return Err(Error::TruncatedPayload { expected: total, found: bytes.len() });
    }
    if bytes.len() > total {
        return Err(Error::TrailingBytes(bytes.len() - total));
    }
    if let Some(e) = expect {
        check(e, &sizes, &half_widths, &c, p)?;
    }
    let values = bytes[header..].chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap())).collect();
    let grid = make_grid(n, &sizes, &half_widths)?;
    Ok(FieldFile { field: Field::new(grid, values)?, c, p })
}

fn check(e: &Expect, sizes: &[usize], half_widths: &[f64], c: &[f64], p: f64) -> Result<()> {
    let bits = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits());
    if e.sizes.as_deref().is_some_and(|s| s != sizes) {
        return Err(Error::HeaderMismatch(format!("sizes {:?}, expected {:?}", sizes, e.sizes.as_ref().unwrap())));
    }
    if e.half_widths.as_deref().is_some_and(|l| !bits(l, half_widths)) {
        return Err(Error::HeaderMismatch(format!("half widths {:?}", half_widths)));
    }
    if e.c.as_deref().is_some_and(|x| !bits(x, c)) {
        return Err(Error::HeaderMismatch(format!("speed {:?}", c)));
    }
    if e.p.is_some_and(|x| x.to_bits() != p.to_bits()) {
        return Err(Error::HeaderMismatch(format!("exponent {}", p)));
    }
    Ok(())
}

pub fn write_field(path: &Path, file: &FieldFile) -> Result<()> {
    std::fs::write(path, encode(file)?)?;
    Ok(())
}

pub fn read_field(path: &Path, expect: Option<&Expect>) -> Result<FieldFile> {
    decode(&std::fs::read(path)?, expect)
}
