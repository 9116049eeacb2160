//! Heightfield and cap-log file formats.
//!
//! Binary grid layout (little-endian):
//!
//! | offset | size | field                       |
//! |--------|------|-----------------------------|
//! | 0      | 4    | magic `PHF1`                |
//! | 4      | 4    | nx (u32)                    |
//! | 8      | 4    | ny (u32)                    |
//! | 12     | 8    | dx (f64)                    |
//! | 20     | 8    | dy (f64)                    |
//! | 28     | 4    | unit code (u32, 1 = μm)     |
//! | 32     | 8·nx·ny | depths (f64), row-major, rows along y |

use std::fmt::Write as _;

use super::field::HeightField;
use super::generate::CapRecord;
use crate::error::{Error, Result};

pub const GRID_MAGIC: &[u8; 4] = b"PHF1";
pub const UNIT_MICROMETRE: u32 = 1;
pub const GRID_HEADER_LEN: usize = 32;

pub fn field_to_bytes(field: &HeightField) -> Vec<u8> {
    let mut out = Vec::with_capacity(GRID_HEADER_LEN + 8 * field.depths().len());
    out.extend_from_slice(GRID_MAGIC);
    out.extend_from_slice(&(field.nx() as u32).to_le_bytes());
    out.extend_from_slice(&(field.ny() as u32).to_le_bytes());
    out.extend_from_slice(&field.dx().to_le_bytes());
    out.extend_from_slice(&field.dy().to_le_bytes());
    out.extend_from_slice(&UNIT_MICROMETRE.to_le_bytes());
    for d in field.depths() {
        out.extend_from_slice(&d.to_le_bytes());
    }
    out
}

pub fn field_from_bytes(bytes: &[u8]) -> Result<HeightField> {
    if bytes.len() < GRID_HEADER_LEN {
        return Err(Error::Format(format!("grid file too short: {} bytes", bytes.len())));
    }
    if &bytes[0..4] != GRID_MAGIC {
        return Err(Error::Format("bad grid magic".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let (nx, ny) = (u32_at(4) as usize, u32_at(8) as usize);
    let (dx, dy) = (f64_at(12), f64_at(20));
    let unit = u32_at(28);
    if unit != UNIT_MICROMETRE {
        return Err(Error::Format(format!("unsupported unit code {unit}")));
    }
    let expected = nx
        .checked_mul(ny)
        .and_then(|n| n.checked_mul(8))
        .and_then(|n| n.checked_add(GRID_HEADER_LEN))
        .ok_or_else(|| Error::Format("grid dimensions overflow".into()))?;
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "grid payload size mismatch: expected {expected} bytes, got {}",
            bytes.len()
        )));
    }
    let depth = bytes[GRID_HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    HeightField::from_depths(nx, ny, dx, dy, depth)
}

/// CSV matrix: `ny` lines of `nx` comma-separated depths (μm). Carries no
/// spacing, so the reader takes it explicitly.
pub fn field_to_csv(field: &HeightField) -> String {
    let mut s = String::new();
    for j in 0..field.ny() {
        for i in 0..field.nx() {
            if i > 0 {
                s.push(',');
            }
            // `{}` on f64 is the shortest round-tripping representation.
            write!(s, "{}", field.at(i, j)).unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn field_from_csv(text: &str, dx: f64, dy: f64) -> Result<HeightField> {
    let mut depth = Vec::new();
    let mut nx = None;
    let mut ny = 0;
    for (row, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let vals = line
            .split(',')
            .map(|c| {
                c.trim().parse::<f64>().map_err(|_| Error::Parse {
                    row: row + 1,
                    message: format!("non-numeric cell {c:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        match nx {
            None => nx = Some(vals.len()),
            Some(n) if n != vals.len() => {
                return Err(Error::Parse {
                    row: row + 1,
                    message: format!("expected {n} columns, got {}", vals.len()),
                })
            }
            _ => {}
        }
        depth.extend(vals);
        ny += 1;
    }
    HeightField::from_depths(nx.unwrap_or(0), ny, dx, dy, depth)
}

pub fn caps_to_csv(caps: &[CapRecord]) -> String {
    let mut s = String::from("level,cx,cy,cz,r\n");
    for c in caps {
        writeln!(s, "{},{},{},{},{}", c.level, c.cap.cx, c.cap.cy, c.cap.cz, c.cap.r).unwrap();
    }
    s
}
