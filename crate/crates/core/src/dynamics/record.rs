//! Append-only binary trajectory records.
//!
//! Layout, little-endian: a 16-byte header `b"QMKT"`, `u16` version (1),
//! `u16` observable count `m`, `u64` seed; then fixed-width records of one
//! `f64` time followed by `m` signed bytes.

use std::fs::{File, OpenOptions};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::Trajectory;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"QMKT";
const VERSION: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RecordHeader {
    pub n_observables: u16,
    pub seed: u64,
}

fn encode_header(h: RecordHeader) -> [u8; 16] {
    let mut out = [0u8; 16];
    out[..4].copy_from_slice(MAGIC);
    out[4..6].copy_from_slice(&VERSION.to_le_bytes());
    out[6..8].copy_from_slice(&h.n_observables.to_le_bytes());
    out[8..].copy_from_slice(&h.seed.to_le_bytes());
    out
}

fn decode_header(b: &[u8; 16]) -> Result<RecordHeader> {
    if &b[..4] != MAGIC {
        return Err(Error::Precondition("not a trajectory record file".into()));
    }
    let version = u16::from_le_bytes([b[4], b[5]]);
    if version != VERSION {
        return Err(Error::Precondition(format!("unsupported record version {version}")));
    }
    Ok(RecordHeader {
        n_observables: u16::from_le_bytes([b[6], b[7]]),
        seed: u64::from_le_bytes(b[8..].try_into().unwrap()),
    })
}

pub struct RecordWriter {
    out: BufWriter<File>,
    header: RecordHeader,
}

impl RecordWriter {
    pub fn create(path: impl AsRef<Path>, header: RecordHeader) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        out.write_all(&encode_header(header))?;
        Ok(Self { out, header })
    }

    /// Reopens an existing file for appending after checking its header.
    pub fn append(path: impl AsRef<Path>) -> Result<Self> {
        let mut b = [0u8; 16];
        File::open(path.as_ref())?.read_exact(&mut b)?;
        let header = decode_header(&b)?;
        let out = BufWriter::new(OpenOptions::new().append(true).open(path)?);
        Ok(Self { out, header })
    }

    pub fn header(&self) -> RecordHeader {
        self.header
    }

    pub fn write(&mut self, time: f64, values: &[i8]) -> Result<()> {
        if values.len() != self.header.n_observables as usize {
            return Err(Error::domain("record", format!("{} values for {} observables", values.len(), self.header.n_observables)));
        }
        self.out.write_all(&time.to_le_bytes())?;
        let bytes: Vec<u8> = values.iter().map(|&v| v as u8).collect();
        self.out.write_all(&bytes)?;
        Ok(())
    }

    pub fn write_trajectory(&mut self, t: &Trajectory) -> Result<()> {
        let mut row = vec![0i8; t.series.len()];
        for (k, &time) in t.times.iter().enumerate() {
            for (r, s) in row.iter_mut().zip(&t.series) {
                *r = s[k];
            }
            self.write(time, &row)?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

/// Reads a whole record file.
pub fn read_records(path: impl AsRef<Path>) -> Result<(RecordHeader, Vec<(f64, Vec<i8>)>)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut b = [0u8; 16];
    r.read_exact(&mut b)?;
    let header = decode_header(&b)?;
    let width = 8 + header.n_observables as usize;
    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    if rest.len() % width != 0 {
        return Err(Error::Precondition(format!("truncated record: {} trailing bytes", rest.len() % width)));
    }
    let records = rest
        .chunks_exact(width)
        .map(|c| (f64::from_le_bytes(c[..8].try_into().unwrap()), c[8..].iter().map(|&x| x as i8).collect()))
        .collect();
    Ok((header, records))
}

/// CSV with a `time` column and one column per observable.
pub fn write_trajectory_csv<W: Write>(t: &Trajectory, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut head = vec!["time".to_string()];
    head.extend(t.names.iter().cloned());
    out.write_record(&head)?;
    for (k, time) in t.times.iter().enumerate() {
        let mut row = vec![format!("{time}")];
        row.extend(t.series.iter().map(|s| s[k].to_string()));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}
