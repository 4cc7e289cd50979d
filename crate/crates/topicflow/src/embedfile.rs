//! Binary embedding matrix files.
//!
//! Layout, all integers little-endian: the 8-byte magic `EMBMAT01`, `u32`
//! row count, `u32` dimension, one `u32`-length-prefixed UTF-8 id per row,
//! the row-major `f32` values, and a CRC-32 of every preceding byte.

use std::path::Path;

use topicflow_core::EmbeddingMatrix;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"EMBMAT01";

pub fn encode(m: &EmbeddingMatrix) -> Vec<u8> {
    let ids_len: usize = m.doc_ids().iter().map(|s| 4 + s.len()).sum();
    let mut out = Vec::with_capacity(16 + ids_len + 4 * m.as_slice().len() + 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(m.len() as u32).to_le_bytes());
    out.extend_from_slice(&(m.dim() as u32).to_le_bytes());
    for id in m.doc_ids() {
        out.extend_from_slice(&(id.len() as u32).to_le_bytes());
        out.extend_from_slice(id.as_bytes());
    }
    for v in m.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> std::result::Result<&'a [u8], String> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or_else(|| {
            format!("truncated: needed {n} bytes at offset {}, file has {}", self.pos, self.buf.len())
        })?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> std::result::Result<u32, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

pub fn decode(bytes: &[u8]) -> std::result::Result<EmbeddingMatrix, String> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err("bad magic".into());
    }
    let n = r.u32()? as usize;
    let dim = r.u32()? as usize;
    let mut ids = Vec::with_capacity(n.min(1 << 20));
    for i in 0..n {
        let len = r.u32()? as usize;
        let raw = r.take(len)?;
        ids.push(String::from_utf8(raw.to_vec()).map_err(|_| format!("id {i} is not UTF-8"))?);
    }
    let values = n.checked_mul(dim).ok_or("row count overflow")?;
    let raw = r.take(values.checked_mul(4).ok_or("row count overflow")?)?;
    let data: Vec<f32> = raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
    let body_end = r.pos;
    let stored = r.u32()?;
    if r.pos != bytes.len() {
        return Err(format!("{} trailing bytes", bytes.len() - r.pos));
    }
    let actual = crc32fast::hash(&bytes[..body_end]);
    if stored != actual {
        return Err(format!("checksum mismatch: stored {stored:08x}, computed {actual:08x}"));
    }
    EmbeddingMatrix::new(dim, ids, data).map_err(|e| e.to_string())
}

/// Writes through a temporary sibling file so a crash never leaves a
/// half-written matrix under the final name.
pub fn save(path: &Path, m: &EmbeddingMatrix) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, encode(m)).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<EmbeddingMatrix> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes).map_err(|reason| Error::CorruptEmbeddings { path: path.to_path_buf(), reason })
}
