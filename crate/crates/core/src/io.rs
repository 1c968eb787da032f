//! Shared binary-container and atomic-write helpers.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Writes `magic`, `version` (u16 LE), header length (u32 LE) and the header.
pub fn write_preamble<W: Write>(
    w: &mut W,
    magic: &[u8; 4],
    version: u16,
    header: &[u8],
) -> std::io::Result<()> {
    w.write_all(magic)?;
    w.write_all(&version.to_le_bytes())?;
    w.write_all(&(header.len() as u32).to_le_bytes())?;
    w.write_all(header)
}

/// Reads and checks the preamble written by [`write_preamble`], returning the header bytes.
pub fn read_preamble<R: Read>(
    r: &mut R,
    magic: &[u8; 4],
    version: u16,
    kind: &'static str,
) -> Result<Vec<u8>> {
    let fmt = |msg: String| Error::Format { kind, msg };
    let mut head = [0u8; 10];
    r.read_exact(&mut head)
        .map_err(|e| fmt(format!("truncated preamble: {e}")))?;
    if &head[..4] != magic {
        return Err(fmt(format!("bad magic {:?}", &head[..4])));
    }
    let got = u16::from_le_bytes([head[4], head[5]]);
    if got != version {
        return Err(fmt(format!("unsupported version {got}")));
    }
    let len = u32::from_le_bytes(head[6..10].try_into().unwrap()) as usize;
    let mut header = vec![0u8; len];
    r.read_exact(&mut header)
        .map_err(|e| fmt(format!("truncated header: {e}")))?;
    Ok(header)
}

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let name = path
        .file_name()
        .ok_or_else(|| Error::param(format!("{} has no file name", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.partial", name.to_string_lossy()));
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub(crate) fn f32_block(values: impl IntoIterator<Item = f64>) -> Vec<u8> {
    values
        .into_iter()
        .flat_map(|v| (v as f32).to_le_bytes())
        .collect()
}

pub(crate) fn read_f32_block<R: Read>(r: &mut R, count: usize, kind: &'static str) -> Result<Vec<f64>> {
    let mut raw = vec![0u8; count * 4];
    r.read_exact(&mut raw).map_err(|e| Error::Format {
        kind,
        msg: format!("truncated data block: {e}"),
    })?;
    Ok(raw
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect())
}
