//! Cell-by-cell comparison of two maps on the world lattice.

use std::collections::BTreeMap;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::grid::{Label, MapStack, NdtCell};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LabelDiff {
    pub label: u16,
    pub occupied_a: usize,
    pub occupied_b: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MapDiff {
    pub cells_a: usize,
    pub cells_b: usize,
    pub only_a: usize,
    pub only_b: usize,
    pub common: usize,
    pub occupied_a: usize,
    pub occupied_b: usize,
    /// Common cells occupied in A and free in B.
    pub became_free: usize,
    /// Common cells free in A and occupied in B.
    pub became_occupied: usize,
    pub label_changed: usize,
    pub mean_abs_posterior_change: f64,
    pub max_abs_posterior_change: f64,
    /// Occupied cell counts per majority label, sorted by label.
    pub per_label: Vec<LabelDiff>,
}

/// Cells keyed by the world voxel of their center. Where submaps overlap the
/// cell with more points wins.
fn world_cells(map: &MapStack) -> FxHashMap<[i64; 3], &NdtCell> {
    let voxel = map.config().voxel_size;
    let mut out: FxHashMap<[i64; 3], &NdtCell> = FxHashMap::default();
    for s in map.submaps() {
        for (idx, cell) in s.iter() {
            let c = s.cell_center(*idx);
            let key = [c.x, c.y, c.z].map(|v| (v / voxel).floor() as i64);
            out.entry(key)
                .and_modify(|e| {
                    if cell.point_count() > e.point_count() {
                        *e = cell;
                    }
                })
                .or_insert(cell);
        }
    }
    out
}

pub fn diff_maps(a: &MapStack, b: &MapStack) -> MapDiff {
    let ca = world_cells(a);
    let cb = world_cells(b);
    let mut d = MapDiff {
        cells_a: ca.len(),
        cells_b: cb.len(),
        ..MapDiff::default()
    };
    let mut labels: BTreeMap<Label, (usize, usize)> = BTreeMap::new();
    for c in ca.values().filter(|c| c.is_occupied()) {
        d.occupied_a += 1;
        if let Some(l) = c.majority_label() {
            labels.entry(l).or_default().0 += 1;
        }
    }
    for c in cb.values().filter(|c| c.is_occupied()) {
        d.occupied_b += 1;
        if let Some(l) = c.majority_label() {
            labels.entry(l).or_default().1 += 1;
        }
    }
    let mut sum = 0.0;
    for (k, x) in &ca {
        let Some(y) = cb.get(k) else {
            d.only_a += 1;
            continue;
        };
        d.common += 1;
        match (x.is_occupied(), y.is_occupied()) {
            (true, false) => d.became_free += 1,
            (false, true) => d.became_occupied += 1,
            _ => {}
        }
        if x.majority_label() != y.majority_label() {
            d.label_changed += 1;
        }
        let delta = (x.occupancy() - y.occupancy()).abs();
        sum += delta;
        d.max_abs_posterior_change = d.max_abs_posterior_change.max(delta);
    }
    d.only_b = d.cells_b - d.common;
    if d.common > 0 {
        d.mean_abs_posterior_change = sum / d.common as f64;
    }
    d.per_label = labels
        .into_iter()
        .map(|(l, (x, y))| LabelDiff {
            label: l.0,
            occupied_a: x,
            occupied_b: y,
        })
        .collect();
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{CellIndex, MapConfig};
    use crate::Vec3;

    fn map_with(cells: &[(CellIndex, f64, u16)]) -> MapStack {
        let mut m = MapStack::new(MapConfig::default());
        m.activate_for(&Vec3::zeros());
        let s = m.active_mut().unwrap();
        for &(i, l, label) in cells {
            let c = s.get_or_insert(i);
            c.logodds = l;
            c.add_labels([Label(label)]);
        }
        m
    }

    #[test]
    fn identical_maps_have_no_changes() {
        let m = map_with(&[(CellIndex::new(1, 2, 3), 2.0, 10), (CellIndex::new(0, 0, 0), -1.0, 40)]);
        let d = diff_maps(&m, &m);
        assert_eq!((d.common, d.only_a, d.only_b), (2, 0, 0));
        assert_eq!((d.became_free, d.became_occupied, d.label_changed), (0, 0, 0));
        assert_eq!(d.max_abs_posterior_change, 0.0);
        assert_eq!(
            d.per_label,
            vec![LabelDiff {
                label: 10,
                occupied_a: 1,
                occupied_b: 1
            }]
        );
    }

    #[test]
    fn flips_and_exclusive_cells() {
        let a = map_with(&[(CellIndex::new(1, 2, 3), 2.0, 10), (CellIndex::new(5, 5, 5), 1.0, 10)]);
        let b = map_with(&[(CellIndex::new(1, 2, 3), -2.0, 10), (CellIndex::new(0, 0, 0), 1.0, 40)]);
        let d = diff_maps(&a, &b);
        assert_eq!((d.common, d.only_a, d.only_b), (1, 1, 1));
        assert_eq!(d.became_free, 1);
        assert!(d.max_abs_posterior_change > 0.7);
    }
}
