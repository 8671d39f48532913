//! `WSSL1` dataset container.
//!
//! Layout: the magic line `WSSL1\n`, a little-endian `u64` header length,
//! a TOML header (seed, row and column counts, descriptor), then `X` as
//! little-endian `f64` in row-major order, then `Y` with each row packed
//! most-significant-bit first and padded to a whole byte.

use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{Dataset, SubspaceDescriptor};
use crate::error::{Error, Result};

pub const DATASET_MAGIC: &[u8; 6] = b"WSSL1\n";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    seed: u64,
    rows: u64,
    x_cols: u64,
    y_cols: u64,
    descriptor: SubspaceDescriptor,
}

fn packed_row_len(bits: usize) -> usize {
    bits.div_ceil(8)
}

pub fn write_dataset(mut w: impl Write, d: &Dataset) -> Result<()> {
    let header = Header {
        seed: d.seed,
        rows: d.rows() as u64,
        x_cols: d.x_cols() as u64,
        y_cols: d.y_cols() as u64,
        descriptor: d.descriptor.clone(),
    };
    let text = toml::to_string(&header).map_err(|e| Error::format("WSSL1", e.to_string()))?;
    w.write_all(DATASET_MAGIC)?;
    w.write_all(&(text.len() as u64).to_le_bytes())?;
    w.write_all(text.as_bytes())?;

    let mut body = Vec::with_capacity(d.x.len() * 8 + d.rows() * packed_row_len(d.y_cols()));
    for v in &d.x {
        body.extend_from_slice(&v.to_le_bytes());
    }
    for i in 0..d.rows() {
        let mut packed = vec![0u8; packed_row_len(d.y_cols())];
        for (b, bit) in d.y_row(i).iter().enumerate() {
            if *bit {
                packed[b / 8] |= 0x80 >> (b % 8);
            }
        }
        body.extend_from_slice(&packed);
    }
    w.write_all(&body)?;
    Ok(())
}

pub fn read_dataset(mut r: impl Read) -> Result<Dataset> {
    let mut magic = [0u8; 6];
    r.read_exact(&mut magic)
        .map_err(|_| Error::format("WSSL1", "file too short for magic"))?;
    if &magic != DATASET_MAGIC {
        return Err(Error::format("WSSL1", "bad magic"));
    }
    let mut len = [0u8; 8];
    r.read_exact(&mut len)
        .map_err(|_| Error::format("WSSL1", "truncated header length"))?;
    let len = u64::from_le_bytes(len) as usize;
    let mut text = vec![0u8; len];
    r.read_exact(&mut text)
        .map_err(|_| Error::format("WSSL1", "truncated header"))?;
    let text =
        String::from_utf8(text).map_err(|_| Error::format("WSSL1", "header is not UTF-8"))?;
    let header: Header =
        toml::from_str(&text).map_err(|e| Error::format("WSSL1", e.to_string()))?;
    header.descriptor.validate()?;

    let rows = header.rows as usize;
    let (xc, yc) = (header.x_cols as usize, header.y_cols as usize);
    if xc != header.descriptor.input_dim() || yc != header.descriptor.output_dim() {
        return Err(Error::format(
            "WSSL1",
            "column counts disagree with the descriptor",
        ));
    }

    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    let row_bytes = packed_row_len(yc);
    let expected = rows * xc * 8 + rows * row_bytes;
    if body.len() != expected {
        return Err(Error::format(
            "WSSL1",
            format!("body has {} bytes, expected {expected}", body.len()),
        ));
    }
    let (xb, yb) = body.split_at(rows * xc * 8);
    let x = xb
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    let mut y = Vec::with_capacity(rows * yc);
    for row in yb.chunks_exact(row_bytes.max(1)).take(rows) {
        y.extend((0..yc).map(|b| row[b / 8] & (0x80 >> (b % 8)) != 0));
    }
    Dataset::new(header.descriptor, header.seed, x, y)
}

/// CSV with header `x_0,..,x_k,y_0,..,y_m`.
pub fn to_csv(d: &Dataset) -> String {
    let mut out = String::new();
    let names: Vec<String> = (0..d.x_cols())
        .map(|i| format!("x_{i}"))
        .chain((0..d.y_cols()).map(|i| format!("y_{i}")))
        .collect();
    out.push_str(&names.join(","));
    out.push('\n');
    for i in 0..d.rows() {
        let fields: Vec<String> = d
            .x_row(i)
            .iter()
            .map(|v| v.to_string())
            .chain(d.y_row(i).iter().map(|b| (*b as u8).to_string()))
            .collect();
        let _ = writeln!(out, "{}", fields.join(","));
    }
    out
}
