//! `JSPC` spectrum datasets: preamble and JSON header, then `count × L2`
//! row-major `f32` dB values, `count` `u32` class ids and `count` `f32` JNRs
//! (NaN for generator output).

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::norm::NormStats;
use super::psd::{SpectrumVector, SPECTRUM_LEN};
use crate::error::{Error, Result};
use crate::io::{f32_block, read_f32_block, read_preamble, write_atomic, write_preamble};
use crate::synth::JammingClass;

pub const MAGIC: &[u8; 4] = b"JSPC";
pub const VERSION: u16 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumFileHeader {
    pub l2: usize,
    pub count: usize,
    pub classes: Vec<String>,
    pub norm_stats: Option<NormStats>,
}

pub fn write_spectra<W: Write>(
    mut w: W,
    spectra: &[SpectrumVector],
    stats: Option<NormStats>,
) -> Result<()> {
    let io = |e| Error::io("<stream>", e);
    for s in spectra {
        if s.bins.len() != SPECTRUM_LEN {
            return Err(Error::param(format!(
                "spectrum has {} bins, expected {SPECTRUM_LEN}",
                s.bins.len()
            )));
        }
    }
    let header = SpectrumFileHeader {
        l2: SPECTRUM_LEN,
        count: spectra.len(),
        classes: JammingClass::ALL.iter().map(|c| c.name().to_string()).collect(),
        norm_stats: stats,
    };
    write_preamble(&mut w, MAGIC, VERSION, &serde_json::to_vec(&header)?).map_err(io)?;
    w.write_all(&f32_block(spectra.iter().flat_map(|s| s.bins.iter().copied())))
        .map_err(io)?;
    let ids: Vec<u8> = spectra
        .iter()
        .flat_map(|s| (s.class_id as u32).to_le_bytes())
        .collect();
    w.write_all(&ids).map_err(io)?;
    w.write_all(&f32_block(spectra.iter().map(|s| s.jnr_db.unwrap_or(f64::NAN))))
        .map_err(io)
}

pub fn read_spectra<R: Read>(mut r: R) -> Result<(SpectrumFileHeader, Vec<SpectrumVector>)> {
    let header: SpectrumFileHeader =
        serde_json::from_slice(&read_preamble(&mut r, MAGIC, VERSION, "JSPC")?)?;
    if header.l2 != SPECTRUM_LEN {
        return Err(Error::Format {
            kind: "JSPC",
            msg: format!("unsupported spectrum length {}", header.l2),
        });
    }
    let values = read_f32_block(&mut r, header.count * header.l2, "JSPC")?;
    let mut raw_ids = vec![0u8; header.count * 4];
    r.read_exact(&mut raw_ids).map_err(|e| Error::Format {
        kind: "JSPC",
        msg: format!("truncated label block: {e}"),
    })?;
    let jnrs = read_f32_block(&mut r, header.count, "JSPC")?;
    let spectra = values
        .chunks_exact(header.l2)
        .zip(raw_ids.chunks_exact(4))
        .zip(jnrs)
        .map(|((bins, id), jnr)| SpectrumVector {
            bins: bins.to_vec(),
            class_id: u32::from_le_bytes(id.try_into().unwrap()) as usize,
            jnr_db: (!jnr.is_nan()).then_some(jnr),
        })
        .collect();
    Ok((header, spectra))
}

pub fn save_spectra(path: &Path, spectra: &[SpectrumVector], stats: Option<NormStats>) -> Result<()> {
    let mut buf = Vec::new();
    write_spectra(&mut buf, spectra, stats)?;
    write_atomic(path, &buf)
}

pub fn load_spectra(path: &Path) -> Result<(SpectrumFileHeader, Vec<SpectrumVector>)> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_spectra(std::io::BufReader::new(f))
}
