//! Latent-variable estimation: region growing over semantic labels and
//! per-cell cluster membership from Pearson's χ² test.

use std::collections::{BTreeMap, BTreeSet};

use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::grid::{CellIndex, ClusterId, Label, NdtCell, SubMap};
use crate::occupancy::LatentWeights;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MembershipMode {
    /// Raw cell counts against whole-cluster totals.
    Literal,
    /// Standard expected-count form: the cell's counts against the cluster's
    /// occupied/empty proportions scaled to the cell's total.
    #[default]
    Normalized,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterConfig {
    pub membership_mode: MembershipMode,
    /// Scans between growth passes.
    pub growth_interval: u32,
    pub max_growth_iters: u32,
    /// 6, 18 or 26.
    pub connectivity: u8,
    /// Factor applied to every cell's evidence counts at each growth pass.
    pub evidence_decay: f64,
    /// Added to all four counts when an expected count is zero.
    pub smoothing: f64,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self {
            membership_mode: MembershipMode::Normalized,
            growth_interval: 1,
            max_growth_iters: 32,
            connectivity: 26,
            evidence_decay: 0.9,
            smoothing: 0.5,
        }
    }
}

impl ClusterConfig {
    pub fn validate(&self) -> Result<()> {
        if ![6, 18, 26].contains(&self.connectivity) {
            return Err(Error::Config(format!(
                "connectivity must be 6, 18 or 26, got {}",
                self.connectivity
            )));
        }
        if self.growth_interval == 0 {
            return Err(Error::Config("growth_interval must be >= 1".into()));
        }
        if !(self.evidence_decay > 0.0 && self.evidence_decay <= 1.0) {
            return Err(Error::Config(format!(
                "evidence_decay must be in (0, 1], got {}",
                self.evidence_decay
            )));
        }
        if !(self.smoothing > 0.0) {
            return Err(Error::Config("smoothing must be > 0".into()));
        }
        Ok(())
    }
}

/// Neighbor offsets for the given connectivity.
pub fn neighbor_offsets(connectivity: u8) -> Vec<(i32, i32, i32)> {
    let mut v = Vec::with_capacity(26);
    for dx in -1..=1i32 {
        for dy in -1..=1i32 {
            for dz in -1..=1i32 {
                let l1 = dx.abs() + dy.abs() + dz.abs();
                let keep = match connectivity {
                    6 => l1 == 1,
                    18 => l1 == 1 || l1 == 2,
                    _ => l1 > 0,
                };
                if keep {
                    v.push((dx, dy, dz));
                }
            }
        }
    }
    v
}

/// Survival function of χ² with one degree of freedom.
pub fn chi2_sf_1dof(s: f64) -> f64 {
    if s <= 0.0 {
        return 1.0;
    }
    if !s.is_finite() {
        return 0.0;
    }
    ChiSquared::new(1.0)
        .expect("one degree of freedom")
        .sf(s)
        .clamp(0.0, 1.0)
}

/// Pearson statistic comparing a cell's (occupied, empty) evidence with its
/// cluster's.
pub fn chi2_statistic(cell: (f64, f64), cluster: (f64, f64), mode: MembershipMode, smoothing: f64) -> f64 {
    let (o, e) = cell;
    let (oc, ec) = cluster;
    match mode {
        MembershipMode::Literal => {
            let (o, e, oc, ec) = if oc <= 0.0 || ec <= 0.0 {
                (o + smoothing, e + smoothing, oc + smoothing, ec + smoothing)
            } else {
                (o, e, oc, ec)
            };
            (o - oc).powi(2) / oc + (e - ec).powi(2) / ec
        }
        MembershipMode::Normalized => {
            if oc + ec <= 0.0 || o + e <= 0.0 {
                return 0.0;
            }
            let expected = |o: f64, e: f64, oc: f64, ec: f64| {
                let n = o + e;
                (n * oc / (oc + ec), n * ec / (oc + ec))
            };
            let (mut o, mut e, mut oc, mut ec) = (o, e, oc, ec);
            let (mut eo, mut ee) = expected(o, e, oc, ec);
            if eo <= 0.0 || ee <= 0.0 {
                o += smoothing;
                e += smoothing;
                oc += smoothing;
                ec += smoothing;
                (eo, ee) = expected(o, e, oc, ec);
            }
            (o - eo).powi(2) / eo + (e - ee).powi(2) / ee
        }
    }
}

/// Membership δ ∈ [0, 1]: the χ² survival value of the evidence mismatch.
pub fn membership_from_counts(cell: (f64, f64), cluster: (f64, f64), mode: MembershipMode, smoothing: f64) -> f64 {
    chi2_sf_1dof(chi2_statistic(cell, cluster, mode, smoothing))
}

pub fn membership(cell: &NdtCell, cluster_stats: (f64, f64), mode: MembershipMode) -> f64 {
    membership_from_counts(
        (cell.evidence_occ, cell.evidence_emp),
        cluster_stats,
        mode,
        ClusterConfig::default().smoothing,
    )
}

/// Cells hypothesized to belong to one object.
#[derive(Clone, Debug)]
pub struct Cluster {
    pub id: ClusterId,
    members: FxHashSet<CellIndex>,
    /// Mode of the members' majority labels.
    pub label: Label,
    label_tally: BTreeMap<Label, u32>,
    /// Membership-weighted occupied evidence `Σ δ_j o_j`.
    pub agg_occ: f64,
    /// Membership-weighted empty evidence `Σ δ_j e_j`.
    pub agg_emp: f64,
}

impl Cluster {
    fn singleton(id: ClusterId, idx: CellIndex, label: Label) -> Self {
        let mut members = FxHashSet::default();
        members.insert(idx);
        Self {
            id,
            members,
            label,
            label_tally: BTreeMap::from([(label, 1)]),
            agg_occ: 0.0,
            agg_emp: 0.0,
        }
    }

    pub fn members(&self) -> impl Iterator<Item = CellIndex> + '_ {
        self.members.iter().copied()
    }

    pub fn sorted_members(&self) -> Vec<CellIndex> {
        let mut v: Vec<_> = self.members().collect();
        v.sort_unstable();
        v
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, idx: CellIndex) -> bool {
        self.members.contains(&idx)
    }

    fn mode_label(&self) -> Label {
        let mut best = (self.label, 0u32);
        for (&l, &c) in &self.label_tally {
            if c > best.1 {
                best = (l, c);
            }
        }
        best.0
    }

    fn tally_add(&mut self, label: Label) {
        *self.label_tally.entry(label).or_insert(0) += 1;
    }

    fn tally_remove(&mut self, label: Label) {
        if let Some(c) = self.label_tally.get_mut(&label) {
            *c -= 1;
            if *c == 0 {
                self.label_tally.remove(&label);
            }
        }
    }
}

/// Membership-weighted `(o^c, e^c)` of a cluster.
pub fn cluster_evidence(cluster: &Cluster, grid: &SubMap) -> (f64, f64) {
    let mut members = cluster.sorted_members();
    members.retain(|m| grid.get(*m).is_some());
    members.iter().fold((0.0, 0.0), |(o, e), m| {
        let c = grid.get(*m).expect("retained");
        (o + c.membership * c.evidence_occ, e + c.membership * c.evidence_emp)
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GrowthReport {
    pub iterations: u32,
    pub merges: usize,
    pub splits: usize,
}

/// Partition of a submap's occupied cells into clusters.
#[derive(Clone, Debug)]
pub struct ClusterRegistry {
    config: ClusterConfig,
    offsets: Vec<(i32, i32, i32)>,
    clusters: BTreeMap<ClusterId, Cluster>,
    /// Cluster of each member and the member label it was tallied under.
    cell_to_cluster: FxHashMap<CellIndex, (ClusterId, Label)>,
    next_id: u32,
    dirty: BTreeSet<CellIndex>,
    pending_split: BTreeSet<ClusterId>,
}

impl ClusterRegistry {
    pub fn new(config: ClusterConfig) -> Self {
        Self {
            offsets: neighbor_offsets(config.connectivity),
            config,
            clusters: BTreeMap::new(),
            cell_to_cluster: FxHashMap::default(),
            next_id: 0,
            dirty: BTreeSet::new(),
            pending_split: BTreeSet::new(),
        }
    }

    /// Rebuilds the registry from the cluster ids stored in the cells.
    pub fn rebuild(config: ClusterConfig, grid: &SubMap) -> Self {
        let mut reg = Self::new(config);
        for idx in grid.sorted_indices() {
            let cell = grid.get(idx).expect("listed");
            let Some(id) = cell.cluster else { continue };
            let label = cell.majority_label().unwrap_or(Label::UNLABELED);
            reg.cell_to_cluster.insert(idx, (id, label));
            match reg.clusters.get_mut(&id) {
                Some(cl) => {
                    cl.members.insert(idx);
                    cl.tally_add(label);
                }
                None => {
                    reg.clusters.insert(id, Cluster::singleton(id, idx, label));
                }
            }
            reg.next_id = reg.next_id.max(id.0 + 1);
        }
        for cl in reg.clusters.values_mut() {
            cl.label = cl.mode_label();
            (cl.agg_occ, cl.agg_emp) = cluster_evidence(cl, grid);
        }
        reg
    }

    pub fn config(&self) -> &ClusterConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn clusters(&self) -> impl Iterator<Item = &Cluster> {
        self.clusters.values()
    }

    pub fn cluster(&self, id: ClusterId) -> Option<&Cluster> {
        self.clusters.get(&id)
    }

    pub fn cluster_of(&self, idx: CellIndex) -> Option<ClusterId> {
        self.cell_to_cluster.get(&idx).map(|&(c, _)| c)
    }

    pub fn assigned_cells(&self) -> usize {
        self.cell_to_cluster.len()
    }

    fn fresh_id(&mut self) -> ClusterId {
        let id = ClusterId(self.next_id);
        self.next_id += 1;
        id
    }

    /// Turns every unassigned cell of `cells` into its own cluster with
    /// membership 1. Already assigned or missing cells are skipped.
    pub fn seed_clusters(&mut self, grid: &mut SubMap, cells: &[CellIndex]) -> usize {
        let mut seeded = 0;
        for &idx in cells {
            if self.cell_to_cluster.contains_key(&idx) {
                continue;
            }
            let Some(cell) = grid.get_mut(idx) else { continue };
            let id = self.fresh_id();
            let label = cell.majority_label().unwrap_or(Label::UNLABELED);
            cell.cluster = Some(id);
            cell.membership = 1.0;
            let mut cl = Cluster::singleton(id, idx, label);
            cl.agg_occ = cell.evidence_occ;
            cl.agg_emp = cell.evidence_emp;
            self.clusters.insert(id, cl);
            self.cell_to_cluster.insert(idx, (id, label));
            self.dirty.insert(idx);
            seeded += 1;
        }
        seeded
    }

    /// Removes cells from their clusters. The clusters they leave are split
    /// into connected pieces at the next growth pass.
    pub fn evict(&mut self, grid: &mut SubMap, cells: &[CellIndex]) {
        for &idx in cells {
            let Some((id, label)) = self.cell_to_cluster.remove(&idx) else {
                continue;
            };
            if let Some(cell) = grid.get_mut(idx) {
                cell.cluster = None;
            }
            self.dirty.remove(&idx);
            let cl = self.clusters.get_mut(&id).expect("registered cluster");
            cl.members.remove(&idx);
            cl.tally_remove(label);
            if cl.members.is_empty() {
                self.clusters.remove(&id);
                self.pending_split.remove(&id);
            } else {
                cl.label = cl.mode_label();
                self.pending_split.insert(id);
            }
        }
    }

    /// Re-tallies member labels after label histograms changed.
    pub fn refresh_labels(&mut self, grid: &SubMap, cells: impl IntoIterator<Item = CellIndex>) {
        for idx in cells {
            let Some(&(id, old)) = self.cell_to_cluster.get(&idx) else {
                continue;
            };
            let Some(new) = grid.get(idx).and_then(NdtCell::majority_label) else {
                continue;
            };
            if new == old {
                continue;
            }
            self.cell_to_cluster.insert(idx, (id, new));
            let cl = self.clusters.get_mut(&id).expect("registered cluster");
            cl.tally_remove(old);
            cl.tally_add(new);
            let label = cl.mode_label();
            if label != cl.label {
                cl.label = label;
                self.dirty.extend(cl.members.iter().copied());
            }
        }
    }

    fn split_pending(&mut self, grid: &mut SubMap) -> usize {
        let pending = std::mem::take(&mut self.pending_split);
        let mut splits = 0;
        for id in pending {
            let Some(cl) = self.clusters.remove(&id) else { continue };
            splits += 1;
            for (k, idx) in cl.sorted_members().into_iter().enumerate() {
                // the first member keeps the old id so the regrown piece
                // containing it is recognisable
                let new_id = if k == 0 { id } else { self.fresh_id() };
                let label = self.cell_to_cluster[&idx].1;
                self.cell_to_cluster.insert(idx, (new_id, label));
                let mut single = Cluster::singleton(new_id, idx, label);
                if let Some(cell) = grid.get_mut(idx) {
                    cell.cluster = Some(new_id);
                    single.agg_occ = cell.membership * cell.evidence_occ;
                    single.agg_emp = cell.membership * cell.evidence_emp;
                }
                self.clusters.insert(new_id, single);
                self.dirty.insert(idx);
            }
        }
        splits
    }

    fn merge(&mut self, grid: &mut SubMap, a: ClusterId, b: ClusterId) -> ClusterId {
        let (keep, gone) = if a < b { (a, b) } else { (b, a) };
        let gone_cl = self.clusters.remove(&gone).expect("live cluster");
        for &idx in &gone_cl.members {
            self.cell_to_cluster.get_mut(&idx).expect("member").0 = keep;
            if let Some(cell) = grid.get_mut(idx) {
                cell.cluster = Some(keep);
            }
        }
        let keep_cl = self.clusters.get_mut(&keep).expect("live cluster");
        keep_cl.members.extend(gone_cl.members);
        for (l, c) in gone_cl.label_tally {
            *keep_cl.label_tally.entry(l).or_insert(0) += c;
        }
        keep_cl.agg_occ += gone_cl.agg_occ;
        keep_cl.agg_emp += gone_cl.agg_emp;
        let label = keep_cl.mode_label();
        if label != keep_cl.label {
            keep_cl.label = label;
            self.dirty.extend(keep_cl.members.iter().copied());
        }
        if self.pending_split.remove(&gone) {
            self.pending_split.insert(keep);
        }
        keep
    }

    /// Joins adjacent clusters with equal labels until no pair can be joined
    /// or the iteration cap is reached.
    ///
    /// Only cells marked dirty (new seeds, split pieces, members of clusters
    /// whose label changed) can create new joins, so each iteration sweeps
    /// those cells and their neighborhoods.
    pub fn region_grow(&mut self, grid: &mut SubMap) -> GrowthReport {
        let mut report = GrowthReport {
            splits: self.split_pending(grid),
            ..GrowthReport::default()
        };
        let offsets = self.offsets.clone();
        while report.iterations < self.config.max_growth_iters && !self.dirty.is_empty() {
            report.iterations += 1;
            let sweep = std::mem::take(&mut self.dirty);
            for idx in sweep {
                for &(dx, dy, dz) in &offsets {
                    let Some(&(mut here, _)) = self.cell_to_cluster.get(&idx) else {
                        break;
                    };
                    let n = idx.offset(dx, dy, dz);
                    let Some(&(there, _)) = self.cell_to_cluster.get(&n) else {
                        continue;
                    };
                    if there == here {
                        continue;
                    }
                    if self.clusters[&here].label == self.clusters[&there].label {
                        here = self.merge(grid, here, there);
                        report.merges += 1;
                        let _ = here;
                    }
                }
            }
        }
        report
    }

    /// Recomputes δ for every member of every cluster that owns one of
    /// `touched`, then refreshes the affected cluster aggregates.
    pub fn update_memberships(&mut self, grid: &mut SubMap, touched: impl IntoIterator<Item = CellIndex>) -> usize {
        let ids: BTreeSet<ClusterId> = touched.into_iter().filter_map(|idx| self.cluster_of(idx)).collect();
        let mode = self.config.membership_mode;
        let smoothing = self.config.smoothing;
        let mut updated = 0;
        for id in ids {
            let cl = self.clusters.get_mut(&id).expect("live cluster");
            let stats = cluster_evidence(cl, grid);
            for m in cl.sorted_members() {
                if let Some(cell) = grid.get_mut(m) {
                    cell.membership =
                        membership_from_counts((cell.evidence_occ, cell.evidence_emp), stats, mode, smoothing);
                    updated += 1;
                }
            }
            (cl.agg_occ, cl.agg_emp) = cluster_evidence(cl, grid);
        }
        updated
    }

    /// Latent weights implied by the current clusters and memberships.
    pub fn recover_latents<'a>(&'a self, grid: &'a SubMap) -> LatentWeights<'a> {
        LatentWeights::clustered(self, grid)
    }

    /// Checks the partition invariants; returns a description of the first
    /// violation.
    pub fn check_invariants(&self, grid: &SubMap) -> std::result::Result<(), String> {
        let mut seen = 0;
        for (id, cl) in &self.clusters {
            if cl.members.is_empty() {
                return Err(format!("cluster {id} is empty"));
            }
            for m in cl.members() {
                seen += 1;
                match self.cell_to_cluster.get(&m) {
                    Some(&(c, _)) if c == *id => {}
                    other => return Err(format!("cell {m} in {id} maps to {other:?}")),
                }
                match grid.get(m) {
                    Some(cell) if cell.cluster == Some(*id) => {
                        if !(0.0..=1.0).contains(&cell.membership) {
                            return Err(format!("cell {m} has membership {}", cell.membership));
                        }
                    }
                    _ => return Err(format!("grid cell {m} does not point to {id}")),
                }
            }
        }
        if seen != self.cell_to_cluster.len() {
            return Err("cell_to_cluster has entries outside any cluster".into());
        }
        for (idx, cell) in grid.iter() {
            if cell.is_occupied() && !self.cell_to_cluster.contains_key(idx) {
                return Err(format!("occupied cell {idx} is unclustered"));
            }
            if cell.cluster.is_some() != self.cell_to_cluster.contains_key(idx) {
                return Err(format!("cell {idx} cluster field disagrees with registry"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Vec3;

    fn grid() -> SubMap {
        SubMap::new(Vec3::zeros(), Vec3::repeat(30.0), 0.6)
    }

    fn put(grid: &mut SubMap, idx: CellIndex, label: Label) {
        let cell = grid.get_or_insert(idx);
        cell.add_labels([label]);
        cell.logodds = 2.0;
    }

    #[test]
    fn seeding_creates_singletons() {
        let mut g = grid();
        let cells: Vec<_> = (0..5).map(|i| CellIndex::new(2 * i, 0, 0)).collect();
        for &c in &cells {
            put(&mut g, c, Label::CAR);
        }
        let mut reg = ClusterRegistry::new(ClusterConfig::default());
        assert_eq!(reg.seed_clusters(&mut g, &cells), 5);
        assert_eq!(reg.len(), 5);
        assert_eq!(reg.seed_clusters(&mut g, &cells[..2]), 0);
        assert_eq!(reg.len(), 5);
        reg.check_invariants(&g).unwrap();
    }

    #[test]
    fn adjacent_same_label_merge() {
        let mut g = grid();
        let a = CellIndex::new(1, 1, 1);
        let b = CellIndex::new(2, 2, 2);
        put(&mut g, a, Label::CAR);
        put(&mut g, b, Label::CAR);
        let mut reg = ClusterRegistry::new(ClusterConfig::default());
        reg.seed_clusters(&mut g, &[a, b]);
        let rep = reg.region_grow(&mut g);
        assert_eq!(rep.merges, 1);
        assert_eq!(reg.len(), 1);
        assert_eq!(reg.cluster_of(a), Some(ClusterId(0)));
        assert_eq!(reg.cluster_of(b), Some(ClusterId(0)));
        // fixpoint
        let again = reg.region_grow(&mut g);
        assert_eq!(again.merges, 0);
    }

    #[test]
    fn different_labels_stay_apart() {
        let mut g = grid();
        let a = CellIndex::new(1, 1, 1);
        let b = CellIndex::new(2, 1, 1);
        put(&mut g, a, Label::CAR);
        put(&mut g, b, Label::ROAD);
        let mut reg = ClusterRegistry::new(ClusterConfig::default());
        reg.seed_clusters(&mut g, &[a, b]);
        reg.region_grow(&mut g);
        assert_eq!(reg.len(), 2);
    }

    #[test]
    fn face_connectivity_ignores_diagonals() {
        let mut g = grid();
        let a = CellIndex::new(1, 1, 1);
        let b = CellIndex::new(2, 2, 1);
        put(&mut g, a, Label::CAR);
        put(&mut g, b, Label::CAR);
        let cfg = ClusterConfig {
            connectivity: 6,
            ..ClusterConfig::default()
        };
        let mut reg = ClusterRegistry::new(cfg);
        reg.seed_clusters(&mut g, &[a, b]);
        reg.region_grow(&mut g);
        assert_eq!(reg.len(), 2);
    }

    #[test]
    fn evidence_is_membership_weighted() {
        let mut g = grid();
        let a = CellIndex::new(1, 1, 1);
        let b = CellIndex::new(2, 1, 1);
        put(&mut g, a, Label::CAR);
        put(&mut g, b, Label::CAR);
        let mut reg = ClusterRegistry::new(ClusterConfig::default());
        reg.seed_clusters(&mut g, &[a]);
        {
            let c = g.get_mut(a).unwrap();
            c.evidence_occ = 4.0;
            c.evidence_emp = 2.0;
        }
        let cl = reg.cluster(reg.cluster_of(a).unwrap()).unwrap();
        assert_eq!(cluster_evidence(cl, &g), (4.0, 2.0));

        reg.seed_clusters(&mut g, &[b]);
        reg.region_grow(&mut g);
        g.get_mut(a).unwrap().evidence_emp = 0.0;
        let cb = g.get_mut(b).unwrap();
        cb.evidence_occ = 4.0;
        cb.membership = 0.5;
        let cl = reg.cluster(reg.cluster_of(a).unwrap()).unwrap();
        assert_eq!(cluster_evidence(cl, &g), (6.0, 0.0));

        g.get_mut(a).unwrap().membership = 0.0;
        g.get_mut(b).unwrap().membership = 0.0;
        let cl = reg.cluster(reg.cluster_of(a).unwrap()).unwrap();
        assert_eq!(cluster_evidence(cl, &g), (0.0, 0.0));
    }

    #[test]
    fn perfect_agreement_is_full_membership() {
        let d = membership_from_counts((9.0, 1.0), (90.0, 10.0), MembershipMode::Normalized, 0.5);
        assert_eq!(d, 1.0);
        assert_eq!(
            chi2_statistic((3.0, 1.0), (30.0, 10.0), MembershipMode::Normalized, 0.5),
            0.0
        );
    }

    #[test]
    fn contradiction_statistic_is_ninety() {
        let s = chi2_statistic((0.0, 10.0), (9.0, 1.0), MembershipMode::Normalized, 0.5);
        assert!((s - 90.0).abs() < 1e-12);
        assert!(membership_from_counts((0.0, 10.0), (9.0, 1.0), MembershipMode::Normalized, 0.5) < 1e-15);
    }

    #[test]
    fn literal_mode_is_the_printed_formula() {
        let s = chi2_statistic((4.0, 1.0), (40.0, 6.0), MembershipMode::Literal, 0.5);
        let printed = (4.0f64 - 40.0).powi(2) / 40.0 + (1.0f64 - 6.0).powi(2) / 6.0;
        assert_eq!(s, printed);
    }

    #[test]
    fn zero_expected_counts_are_smoothed() {
        let s = chi2_statistic((0.0, 5.0), (10.0, 0.0), MembershipMode::Normalized, 0.5);
        let (o, e, oc, ec) = (0.5f64, 5.5f64, 10.5f64, 0.5f64);
        let eo = (o + e) * oc / (oc + ec);
        let ee = (o + e) * ec / (oc + ec);
        assert!((s - ((o - eo).powi(2) / eo + (e - ee).powi(2) / ee)).abs() < 1e-12);
        assert!(s.is_finite());
    }

    #[test]
    fn eviction_splits_on_next_growth() {
        let mut g = grid();
        let cells: Vec<_> = (0..5).map(|i| CellIndex::new(i, 0, 0)).collect();
        for &c in &cells {
            put(&mut g, c, Label::CAR);
        }
        let mut reg = ClusterRegistry::new(ClusterConfig::default());
        reg.seed_clusters(&mut g, &cells);
        reg.region_grow(&mut g);
        assert_eq!(reg.len(), 1);
        g.get_mut(cells[2]).unwrap().logodds = -5.0;
        reg.evict(&mut g, &[cells[2]]);
        let rep = reg.region_grow(&mut g);
        assert_eq!(rep.splits, 1);
        assert_eq!(reg.len(), 2);
        assert_eq!(reg.cluster_of(cells[0]), Some(ClusterId(0)));
        assert_ne!(reg.cluster_of(cells[0]), reg.cluster_of(cells[4]));
        assert_eq!(reg.cluster_of(cells[3]), reg.cluster_of(cells[4]));
        reg.check_invariants(&g).unwrap();
    }

    #[test]
    fn recovered_weights_follow_membership() {
        let mut g = grid();
        let cells: Vec<_> = (0..3).map(|i| CellIndex::new(i, 0, 0)).collect();
        for &c in &cells {
            put(&mut g, c, Label::CAR);
        }
        let lone = CellIndex::new(10, 10, 10);
        put(&mut g, lone, Label::CAR);
        let mut reg = ClusterRegistry::new(ClusterConfig::default());
        reg.seed_clusters(&mut g, &cells);
        reg.seed_clusters(&mut g, &[lone]);
        reg.region_grow(&mut g);
        g.get_mut(cells[2]).unwrap().membership = 0.0;
        let w = reg.recover_latents(&g);
        assert_eq!(w.weight(cells[0], cells[2]), 0.0);
        assert_eq!(w.weight(cells[1], cells[2]), 0.0);
        assert_eq!(w.weight(cells[2], cells[0]), 1.0);
        assert_eq!(w.weight(cells[2], cells[1]), 1.0);
        assert_eq!(w.weight(cells[2], cells[2]), 0.0);
        assert_eq!(w.weight(lone, lone), 1.0);
        assert_eq!(w.weight(lone, cells[0]), 0.0);
        assert_eq!(w.weight(cells[0], lone), 0.0);
    }
}
