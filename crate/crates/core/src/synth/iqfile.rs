//! `JSIQ` capture files: magic, `u16` version, `u32` header length, a UTF-8
//! JSON header, then interleaved little-endian `f32` (I, Q) pairs.

use std::io::{Read, Write};
use std::path::Path;

use super::waveform::{CaptureHeader, IqCapture};
use crate::error::{Error, Result};
use crate::io::{read_preamble, write_atomic, write_preamble};

pub const MAGIC: &[u8; 4] = b"JSIQ";
pub const VERSION: u16 = 1;

pub fn write_capture<W: Write>(mut w: W, cap: &IqCapture) -> Result<()> {
    let header = serde_json::to_vec(&cap.header())?;
    write_preamble(&mut w, MAGIC, VERSION, &header).map_err(|e| Error::io("<stream>", e))?;
    let mut body = Vec::with_capacity(cap.len() * 8);
    for (re, im) in cap.i.iter().zip(&cap.q) {
        body.extend_from_slice(&(*re as f32).to_le_bytes());
        body.extend_from_slice(&(*im as f32).to_le_bytes());
    }
    w.write_all(&body).map_err(|e| Error::io("<stream>", e))
}

pub fn read_capture<R: Read>(mut r: R) -> Result<IqCapture> {
    let header_bytes = read_preamble(&mut r, MAGIC, VERSION, "JSIQ")?;
    let header: CaptureHeader = serde_json::from_slice(&header_bytes)?;
    let mut body = vec![0u8; header.n_raw * 8];
    r.read_exact(&mut body).map_err(|e| Error::Format {
        kind: "JSIQ",
        msg: format!("truncated sample block: {e}"),
    })?;
    let mut i = Vec::with_capacity(header.n_raw);
    let mut q = Vec::with_capacity(header.n_raw);
    for pair in body.chunks_exact(8) {
        i.push(f32::from_le_bytes(pair[0..4].try_into().unwrap()) as f64);
        q.push(f32::from_le_bytes(pair[4..8].try_into().unwrap()) as f64);
    }
    Ok(IqCapture {
        i,
        q,
        fs: header.fs,
        class_id: header.class_id,
        jnr_db: header.jnr_db,
        sample_seed: header.sample_seed,
    })
}

pub fn save_capture(path: &Path, cap: &IqCapture) -> Result<()> {
    let mut buf = Vec::new();
    write_capture(&mut buf, cap)?;
    write_atomic(path, &buf)
}

pub fn load_capture(path: &Path) -> Result<IqCapture> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_capture(std::io::BufReader::new(f))
}
