//! The per-scan mapping loop.

use crate::clustering::{ClusterRegistry, GrowthReport};
use crate::config::Config;
use crate::error::Result;
use crate::grid::{MapStack, SubMap};
use crate::occupancy::{commit_occupancy, LatentWeights, UpdateMode};
use crate::sensor::{integrate_scan, EvidenceDelta, LabeledScan, ScanStats};

/// What one call to [`Mapper::insert_scan`] did.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScanReport {
    pub submap: usize,
    pub stats: ScanStats,
    /// Cells whose log-odds changed.
    pub cells_updated: usize,
    pub evicted: usize,
    pub seeded: usize,
    /// Present on growth passes.
    pub growth: Option<GrowthReport>,
    pub memberships_updated: usize,
}

/// Owns a map stack and one cluster registry per submap.
///
/// Each scan is processed as: evidence collection (which also updates cell
/// Gaussians and labels), latent-weighted fusion with the memberships of the
/// previous growth pass, occupancy commit, eviction of freed cells, evidence
/// bookkeeping, seeding of newly occupied cells, and every
/// `growth_interval` scans a region-growing and membership pass.
#[derive(Clone, Debug)]
pub struct Mapper {
    config: Config,
    map: MapStack,
    registries: Vec<ClusterRegistry>,
    scans: u64,
}

impl Mapper {
    pub fn new(config: Config) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            map: MapStack::new(config.map.clone()),
            config,
            registries: Vec::new(),
            scans: 0,
        })
    }

    /// Resumes mapping on a loaded map. Registries are rebuilt from the
    /// cluster ids stored in the cells.
    pub fn from_parts(config: Config, map: MapStack, scans_integrated: u64) -> Result<Self> {
        config.validate()?;
        let registries = map
            .submaps()
            .iter()
            .map(|s| ClusterRegistry::rebuild(config.clustering.clone(), s))
            .collect();
        Ok(Self {
            config,
            map,
            registries,
            scans: scans_integrated,
        })
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn map(&self) -> &MapStack {
        &self.map
    }

    pub fn into_map(self) -> MapStack {
        self.map
    }

    pub fn registry(&self, submap: usize) -> Option<&ClusterRegistry> {
        self.registries.get(submap)
    }

    pub fn scans_integrated(&self) -> u64 {
        self.scans
    }

    fn clustering_enabled(&self) -> bool {
        self.config.occupancy.update_mode == UpdateMode::Clustered
    }

    pub fn insert_scan(&mut self, scan: &LabeledScan) -> ScanReport {
        let delta = integrate_scan(&mut self.map, scan, &self.config.sensor);
        let k = delta.submap;
        while self.registries.len() < self.map.submaps().len() {
            self.registries
                .push(ClusterRegistry::new(self.config.clustering.clone()));
        }
        self.scans += 1;

        let sensor = &self.config.sensor;
        let occ = &self.config.occupancy;
        let clustered = self.clustering_enabled();
        let deltas = {
            let grid = self.map.submap(k);
            let weights = if clustered && !occ.force_identity_latents {
                self.registries[k].recover_latents(grid)
            } else {
                LatentWeights::identity()
            };
            weights.logodds_deltas(&delta, sensor, occ)
        };
        let grid = self.map.submap_mut(k);
        let outcome = commit_occupancy(grid, &deltas, occ);

        let mut report = ScanReport {
            submap: k,
            stats: delta.stats,
            cells_updated: deltas.len(),
            ..ScanReport::default()
        };

        let growth_pass = clustered
            && self
                .scans
                .is_multiple_of(u64::from(self.config.clustering.growth_interval));
        if growth_pass {
            decay_evidence(grid, self.config.clustering.evidence_decay);
        }
        add_evidence(grid, &delta);
        if !clustered {
            return report;
        }

        let registry = &mut self.registries[k];
        registry.evict(grid, &outcome.evicted);
        report.evicted = outcome.evicted.len();
        report.seeded = registry.seed_clusters(grid, &outcome.occupied_unassigned);
        let labelled = delta
            .cells
            .iter()
            .filter(|(_, ev)| !ev.labels.is_empty())
            .map(|(idx, _)| *idx);
        registry.refresh_labels(grid, labelled);

        if growth_pass {
            report.growth = Some(registry.region_grow(grid));
            report.memberships_updated = registry.update_memberships(grid, delta.cells.keys().copied());
        }
        report
    }
}

fn decay_evidence(grid: &mut SubMap, factor: f64) {
    for (_, cell) in grid.iter_mut() {
        cell.evidence_occ *= factor;
        cell.evidence_emp *= factor;
    }
}

fn add_evidence(grid: &mut SubMap, delta: &EvidenceDelta) {
    for (idx, ev) in &delta.cells {
        if let Some(cell) = grid.get_mut(*idx) {
            cell.evidence_occ += ev.occ;
            cell.evidence_emp += ev.emp;
        }
    }
}
