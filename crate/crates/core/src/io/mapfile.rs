//! Binary map container plus JSON metadata sidecar.
//! The layout is documented in `docs/map-format.md`.

use std::path::{Path, PathBuf};

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use super::{read_bytes, write_bytes};
use crate::error::{Error, Result};
use crate::grid::{CellIndex, ClusterId, GaussianStats, Label, LabelHistogram, MapConfig, MapStack, NdtCell, SubMap};
use crate::Vec3;

pub const MAGIC: [u8; 8] = *b"CNDTMAP\0";
pub const FORMAT_VERSION: u32 = 1;
const NO_CLUSTER: u32 = u32::MAX;
// index + mean + cov + N + l + label count + cluster + δ + o + e
const MIN_CELL_BYTES: usize = 12 + 24 + 48 + 8 + 8 + 4 + 4 + 8 + 8 + 8;

/// A decoded map file.
#[derive(Clone, Debug)]
pub struct LoadedMap {
    pub map: MapStack,
    pub scans_integrated: u64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SubmapMeta {
    pub origin: [f64; 3],
    pub extents: [f64; 3],
    pub cells: usize,
    pub occupied: usize,
}

/// Contents of the JSON sidecar.
#[derive(Debug, Serialize, Deserialize)]
pub struct MapMeta {
    pub format_version: u32,
    pub voxel_size: f64,
    pub extents: [f64; 3],
    pub lattice_shift: [f64; 3],
    pub active_submap: usize,
    pub scans_integrated: u64,
    pub submaps: Vec<SubmapMeta>,
    /// Run manifest that produced the file, relative to it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<String>,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

struct Writer(Vec<u8>);

impl Writer {
    fn u16(&mut self, v: u16) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn i32(&mut self, v: i32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn vec3(&mut self, v: &Vec3) {
        v.iter().for_each(|&x| self.f64(x));
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
    what: &'a str,
}

impl<'a> Reader<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::format(self.what, self.pos as u64, msg)
    }

    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos.checked_add(N).filter(|&e| e <= self.buf.len());
        let Some(end) = end else {
            return Err(self.err(format!("unexpected end of file (need {N} bytes)")));
        };
        let out = self.buf[self.pos..end].try_into().expect("length checked");
        self.pos = end;
        Ok(out)
    }

    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take()?))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take()?))
    }
    fn i32(&mut self) -> Result<i32> {
        Ok(i32::from_le_bytes(self.take()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }
    fn finite(&mut self, name: &str) -> Result<f64> {
        let at = self.pos;
        let v = self.f64()?;
        if !v.is_finite() {
            return Err(Error::format(self.what, at as u64, format!("non-finite {name}")));
        }
        Ok(v)
    }
    fn vec3(&mut self, name: &str) -> Result<Vec3> {
        Ok(Vec3::new(self.finite(name)?, self.finite(name)?, self.finite(name)?))
    }
}

pub fn encode_map(map: &MapStack, scans_integrated: u64) -> Vec<u8> {
    let cfg = map.config();
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(&MAGIC);
    w.u32(FORMAT_VERSION);
    w.f64(cfg.voxel_size);
    cfg.extents.iter().for_each(|&v| w.f64(v));
    cfg.lattice_shift.iter().for_each(|&v| w.f64(v));
    w.u32(map.submaps().len() as u32);
    w.u32(map.active_index() as u32);
    w.u64(scans_integrated);
    for s in map.submaps() {
        w.vec3(s.origin());
        w.vec3(s.extents());
        w.f64(s.voxel_size());
        let indices = s.sorted_indices();
        w.u64(indices.len() as u64);
        for idx in indices {
            let c = s.get(idx).expect("listed");
            w.i32(idx.ix);
            w.i32(idx.iy);
            w.i32(idx.iz);
            let g = c.gaussian();
            w.vec3(&g.mean);
            let cov = &g.covariance;
            for (i, j) in [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)] {
                w.f64(cov[(i, j)]);
            }
            w.u64(g.count);
            w.f64(c.logodds);
            let entries = c.labels.entries();
            w.u32(entries.len() as u32);
            for &(l, n) in entries {
                w.u16(l.0);
                w.u32(n);
            }
            w.u32(c.cluster.map_or(NO_CLUSTER, |id| id.0));
            w.f64(c.membership);
            w.f64(c.evidence_occ);
            w.f64(c.evidence_emp);
        }
    }
    w.0
}

pub fn decode_map(bytes: &[u8], what: &str) -> Result<LoadedMap> {
    let mut r = Reader {
        buf: bytes,
        pos: 0,
        what,
    };
    if r.take::<8>()? != MAGIC {
        return Err(Error::format(what, 0, "not a map file (bad magic)"));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::Version {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let config = MapConfig {
        voxel_size: r.finite("voxel size")?,
        extents: [r.finite("extent")?, r.finite("extent")?, r.finite("extent")?],
        lattice_shift: [r.finite("shift")?, r.finite("shift")?, r.finite("shift")?],
    };
    config.validate().map_err(|e| Error::format(what, 12, e.to_string()))?;
    let n_submaps = r.u32()? as usize;
    let active = r.u32()? as usize;
    let scans_integrated = r.u64()?;
    let mut submaps = Vec::new();
    for _ in 0..n_submaps {
        let at = r.pos;
        let origin = r.vec3("origin")?;
        let extents = r.vec3("extents")?;
        let voxel = r.finite("voxel size")?;
        if voxel != config.voxel_size || extents.iter().any(|&e| e < voxel) {
            return Err(Error::format(what, at as u64, "submap geometry disagrees with header"));
        }
        let mut grid = SubMap::new(origin, extents, voxel);
        let floor = grid.cov_floor();
        let n_cells = r.u64()?;
        if n_cells > (r.remaining() / MIN_CELL_BYTES) as u64 {
            return Err(r.err(format!("cell count {n_cells} exceeds file size")));
        }
        let mut prev: Option<CellIndex> = None;
        for _ in 0..n_cells {
            let at = r.pos as u64;
            let idx = CellIndex::new(r.i32()?, r.i32()?, r.i32()?);
            if prev.is_some_and(|p| p >= idx) {
                return Err(Error::format(what, at, "cells not strictly sorted by index"));
            }
            prev = Some(idx);
            let mean = r.vec3("mean")?;
            let mut u = [0.0; 6];
            for v in &mut u {
                *v = r.finite("covariance")?;
            }
            let covariance = Matrix3::new(u[0], u[1], u[2], u[1], u[3], u[4], u[2], u[4], u[5]);
            let count = r.u64()?;
            let logodds = r.finite("log-odds")?;
            let n_labels = r.u32()? as usize;
            if n_labels > r.remaining() / 6 {
                return Err(r.err("label count exceeds file size"));
            }
            let mut counts = Vec::with_capacity(n_labels);
            for _ in 0..n_labels {
                counts.push((Label(r.u16()?), r.u32()?));
            }
            let cluster = r.u32()?;
            let at_m = r.pos as u64;
            let membership = r.finite("membership")?;
            if !(0.0..=1.0).contains(&membership) {
                return Err(Error::format(what, at_m, "membership outside [0, 1]"));
            }
            let evidence_occ = r.finite("evidence")?;
            let evidence_emp = r.finite("evidence")?;
            let mut cell = NdtCell::from_parts(
                GaussianStats {
                    count,
                    mean,
                    covariance,
                },
                floor,
            );
            cell.logodds = logodds;
            cell.labels = LabelHistogram::from_counts(counts);
            cell.cluster = (cluster != NO_CLUSTER).then_some(ClusterId(cluster));
            cell.membership = membership;
            cell.evidence_occ = evidence_occ;
            cell.evidence_emp = evidence_emp;
            grid.insert(idx, cell);
        }
        submaps.push(grid);
    }
    if r.remaining() != 0 {
        return Err(r.err(format!("{} trailing bytes", r.remaining())));
    }
    let map = MapStack::from_parts(config, submaps, active).map_err(|e| Error::format(what, 0, e.to_string()))?;
    Ok(LoadedMap { map, scans_integrated })
}

pub fn map_meta(map: &MapStack, scans_integrated: u64) -> MapMeta {
    let cfg = map.config();
    MapMeta {
        format_version: FORMAT_VERSION,
        voxel_size: cfg.voxel_size,
        extents: cfg.extents,
        lattice_shift: cfg.lattice_shift,
        active_submap: map.active_index(),
        scans_integrated,
        submaps: map
            .submaps()
            .iter()
            .map(|s| SubmapMeta {
                origin: [s.origin().x, s.origin().y, s.origin().z],
                extents: [s.extents().x, s.extents().y, s.extents().z],
                cells: s.len(),
                occupied: s.iter().filter(|(_, c)| c.is_occupied()).count(),
            })
            .collect(),
        manifest: None,
    }
}

/// Writes the binary map to `path` and its metadata to `path` + `.json`.
pub fn write_map(path: &Path, map: &MapStack, scans_integrated: u64) -> Result<()> {
    write_map_with_manifest(path, map, scans_integrated, None)
}

/// [`write_map`] with the sidecar pointing at a run manifest.
pub fn write_map_with_manifest(
    path: &Path,
    map: &MapStack,
    scans_integrated: u64,
    manifest: Option<&str>,
) -> Result<()> {
    write_bytes(path, &encode_map(map, scans_integrated))?;
    let mut meta = map_meta(map, scans_integrated);
    meta.manifest = manifest.map(str::to_string);
    let meta = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    write_bytes(&sidecar_path(path), meta.as_bytes())
}

/// Reads a binary map. The sidecar is informational and not required.
pub fn read_map(path: &Path) -> Result<LoadedMap> {
    decode_map(&read_bytes(path)?, &path.display().to_string())
}
