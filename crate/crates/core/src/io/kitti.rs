//! Velodyne scans (`.bin`, float32 x/y/z/intensity) and SemanticKITTI
//! labels (`.label`, uint32 with the class in the lower 16 bits).

use std::path::Path;

use super::{read_bytes, write_bytes};
use crate::error::{Error, Result};
use crate::grid::Label;
use crate::sensor::LabeledPoint;
use crate::Vec3;

const POINT_BYTES: usize = 16;

pub fn parse_scan_bin(bytes: &[u8], what: &str) -> Result<Vec<Vec3>> {
    let whole = bytes.len() - bytes.len() % POINT_BYTES;
    if whole != bytes.len() {
        return Err(Error::format(
            what,
            whole as u64,
            format!("truncated point record ({} trailing bytes)", bytes.len() - whole),
        ));
    }
    let mut out = Vec::with_capacity(bytes.len() / POINT_BYTES);
    for (k, rec) in bytes.chunks_exact(POINT_BYTES).enumerate() {
        let f = |i: usize| f32::from_le_bytes(rec[4 * i..4 * i + 4].try_into().expect("4 bytes"));
        let p = Vec3::new(f(0) as f64, f(1) as f64, f(2) as f64);
        if !p.iter().all(|v| v.is_finite()) {
            return Err(Error::format(what, (k * POINT_BYTES) as u64, "non-finite coordinate"));
        }
        out.push(p);
    }
    Ok(out)
}

pub fn read_scan_bin(path: &Path) -> Result<Vec<Vec3>> {
    parse_scan_bin(&read_bytes(path)?, &path.display().to_string())
}

/// Writes points with zero intensity. Coordinates are narrowed to `f32`.
pub fn write_scan_bin(path: &Path, points: &[Vec3]) -> Result<()> {
    let mut buf = Vec::with_capacity(points.len() * POINT_BYTES);
    for p in points {
        for v in [p.x as f32, p.y as f32, p.z as f32, 0.0] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    write_bytes(path, &buf)
}

pub fn parse_labels(bytes: &[u8], what: &str) -> Result<Vec<u32>> {
    let whole = bytes.len() - bytes.len() % 4;
    if whole != bytes.len() {
        return Err(Error::format(what, whole as u64, "truncated label record"));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().expect("4 bytes")))
        .collect())
}

pub fn read_labels(path: &Path) -> Result<Vec<u32>> {
    parse_labels(&read_bytes(path)?, &path.display().to_string())
}

pub fn write_labels(path: &Path, raw: &[u32]) -> Result<()> {
    let buf: Vec<u8> = raw.iter().flat_map(|v| v.to_le_bytes()).collect();
    write_bytes(path, &buf)
}

pub fn semantic_class(raw: u32) -> Label {
    Label((raw & 0xFFFF) as u16)
}

pub fn instance_id(raw: u32) -> u16 {
    (raw >> 16) as u16
}

/// Reads a scan and its label file and pairs them, in the sensor frame.
pub fn read_labeled_scan(scan: &Path, labels: &Path) -> Result<Vec<LabeledPoint>> {
    let points = read_scan_bin(scan)?;
    let raw = read_labels(labels)?;
    if points.len() != raw.len() {
        return Err(Error::Input(format!(
            "{} has {} labels but {} has {} points",
            labels.display(),
            raw.len(),
            scan.display(),
            points.len()
        )));
    }
    Ok(points
        .into_iter()
        .zip(raw)
        .map(|(position, r)| LabeledPoint {
            position,
            label: semantic_class(r),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_arithmetic() {
        assert_eq!(parse_scan_bin(&[0u8; 32], "t").unwrap().len(), 2);
        assert!(parse_scan_bin(&[], "t").unwrap().is_empty());
        match parse_scan_bin(&[0u8; 37], "t") {
            Err(Error::Format { offset, .. }) => assert_eq!(offset, 32),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn label_bits() {
        assert_eq!(semantic_class(0x0000_0103), Label(259));
        assert_eq!(semantic_class(0x0007_00FC), Label(252));
        assert_eq!(instance_id(0x0007_00FC), 7);
        match parse_labels(&[1, 2, 3, 4, 5], "l") {
            Err(Error::Format { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn nan_is_rejected_with_offset() {
        let mut b = vec![0u8; 32];
        b[20..24].copy_from_slice(&f32::NAN.to_le_bytes());
        match parse_scan_bin(&b, "t") {
            Err(Error::Format { offset, .. }) => assert_eq!(offset, 16),
            other => panic!("{other:?}"),
        }
    }
}
