//! Latent-weighted log-odds fusion.
//!
//! The per-scan update of cell `i` is `Σ_j d(i,j) · η · (Δo_j·L_hit + Δe_j·L_miss)`
//! where `d(i,j)` is the latent weight of cell `j`'s evidence on cell `i`.
//! With identity weights this is the independent-cell NDT-OM filter. With
//! cluster-recovered weights every member of a cluster receives the
//! membership-weighted evidence of all members.

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::clustering::ClusterRegistry;
use crate::error::{Error, Result};
use crate::grid::{CellIndex, ClusterId, SubMap};
use crate::sensor::{CellEvidence, EvidenceDelta, SensorConfig};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UpdateMode {
    /// Independent cells (plain NDT-OM).
    Baseline,
    /// Evidence shared through semantic clusters.
    #[default]
    Clustered,
}

impl std::fmt::Display for UpdateMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            UpdateMode::Baseline => "baseline",
            UpdateMode::Clustered => "clustered",
        })
    }
}

impl std::str::FromStr for UpdateMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(UpdateMode::Baseline),
            "clustered" => Ok(UpdateMode::Clustered),
            other => Err(Error::Config(format!("unknown update mode {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OccupancyConfig {
    /// Inverse-model probability of an occupied observation.
    pub p_hit: f64,
    /// Inverse-model probability of an empty observation.
    pub p_miss: f64,
    /// Log-odds are clamped to `[-l_max, l_max]`.
    pub l_max: f64,
    /// Clustered cells whose posterior drops below this leave their cluster.
    pub p_free: f64,
    pub update_mode: UpdateMode,
    /// Run clustering but fuse with identity weights (degenerate case).
    pub force_identity_latents: bool,
}

impl Default for OccupancyConfig {
    fn default() -> Self {
        Self {
            p_hit: 0.7,
            p_miss: 0.4,
            l_max: 10.0,
            p_free: 0.12,
            update_mode: UpdateMode::Clustered,
            force_identity_latents: false,
        }
    }
}

impl OccupancyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p_hit > 0.5 && self.p_hit < 1.0) {
            return Err(Error::Config(format!("p_hit must be in (0.5, 1), got {}", self.p_hit)));
        }
        if !(self.p_miss > 0.0 && self.p_miss < 0.5) {
            return Err(Error::Config(format!(
                "p_miss must be in (0, 0.5), got {}",
                self.p_miss
            )));
        }
        if !(self.l_max > 0.0 && self.l_max.is_finite()) {
            return Err(Error::Config(format!("l_max must be > 0, got {}", self.l_max)));
        }
        if !(self.p_free > 0.0 && self.p_free < 0.5) {
            return Err(Error::Config(format!(
                "p_free must be in (0, 0.5), got {}",
                self.p_free
            )));
        }
        Ok(())
    }

    pub fn hit_logodds(&self) -> f64 {
        logodds(self.p_hit)
    }

    pub fn miss_logodds(&self) -> f64 {
        logodds(self.p_miss)
    }
}

pub fn logodds(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Occupancy probability `1 - 1/(1 + exp l)`.
pub fn posterior(l: f64) -> f64 {
    if l >= 0.0 {
        1.0 / (1.0 + (-l).exp())
    } else {
        let e = l.exp();
        e / (1.0 + e)
    }
}

/// Log-odds contribution of one cell's evidence at unit latent weight.
pub fn evidence_logodds(ev: &CellEvidence, sensor: &SensorConfig, occ: &OccupancyConfig) -> f64 {
    sensor.eta * (ev.occ * occ.hit_logodds() + ev.emp * occ.miss_logodds())
}

/// Latent weights `d(i,j)`.
///
/// Clustered weights are not materialized pairwise: `d(i,j) = δ_j` when `i`
/// and `j` share a cluster, `0` across clusters, identity for unclustered
/// cells.
#[derive(Clone, Copy)]
pub struct LatentWeights<'a> {
    clusters: Option<(&'a ClusterRegistry, &'a SubMap)>,
}

impl<'a> LatentWeights<'a> {
    pub fn identity() -> Self {
        Self { clusters: None }
    }

    pub(crate) fn clustered(registry: &'a ClusterRegistry, grid: &'a SubMap) -> Self {
        Self {
            clusters: Some((registry, grid)),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.clusters.is_none()
    }

    fn cluster_of(&self, idx: CellIndex) -> Option<ClusterId> {
        self.clusters.and_then(|(reg, _)| reg.cluster_of(idx))
    }

    fn membership(&self, idx: CellIndex) -> f64 {
        self.clusters
            .and_then(|(_, grid)| grid.get(idx))
            .map_or(1.0, |c| c.membership)
    }

    /// Weight of cell `j`'s evidence on cell `i`.
    pub fn weight(&self, i: CellIndex, j: CellIndex) -> f64 {
        match self.cluster_of(i) {
            Some(c) if self.cluster_of(j) == Some(c) => self.membership(j),
            Some(_) => 0.0,
            None if i == j => 1.0,
            None => 0.0,
        }
    }

    /// Every `(j, d(i,j))` with a possibly nonzero weight.
    pub fn contributors(&self, i: CellIndex) -> Vec<(CellIndex, f64)> {
        match (self.cluster_of(i), self.clusters) {
            (Some(c), Some((reg, _))) => {
                let mut v: Vec<_> = reg
                    .cluster(c)
                    .map(|cl| cl.members().map(|j| (j, self.membership(j))).collect())
                    .unwrap_or_default();
                v.sort_unstable_by_key(|&(j, _)| j);
                v
            }
            _ => vec![(i, 1.0)],
        }
    }

    /// Log-odds increment of every affected cell, aggregating per cluster
    /// instead of summing over contributor lists.
    pub fn logodds_deltas(
        &self,
        delta: &EvidenceDelta,
        sensor: &SensorConfig,
        occ: &OccupancyConfig,
    ) -> FxHashMap<CellIndex, f64> {
        let mut out = FxHashMap::default();
        out.reserve(delta.len());
        let mut sums: FxHashMap<ClusterId, f64> = FxHashMap::default();
        for (&j, ev) in &delta.cells {
            let term = evidence_logodds(ev, sensor, occ);
            match self.cluster_of(j) {
                Some(c) => *sums.entry(c).or_insert(0.0) += self.membership(j) * term,
                None => {
                    out.insert(j, term);
                }
            }
        }
        if let Some((reg, _)) = self.clusters {
            for (c, s) in sums {
                if let Some(cl) = reg.cluster(c) {
                    for m in cl.members() {
                        out.insert(m, s);
                    }
                }
            }
        }
        out
    }
}

/// Log-odds increment of one cell from explicit contributor weights.
pub fn latent_logodds_delta(
    cell: CellIndex,
    weights: &LatentWeights<'_>,
    delta: &EvidenceDelta,
    sensor: &SensorConfig,
    occ: &OccupancyConfig,
) -> f64 {
    weights
        .contributors(cell)
        .into_iter()
        .filter_map(|(j, w)| delta.get(j).map(|ev| w * evidence_logodds(ev, sensor, occ)))
        .sum()
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CommitOutcome {
    /// Clustered cells that fell below `p_free`, sorted.
    pub evicted: Vec<CellIndex>,
    /// Unclustered cells that are now occupied, sorted.
    pub occupied_unassigned: Vec<CellIndex>,
}

/// Adds the increments to the cell log-odds with clamping.
///
/// The cluster registry is not touched; callers pass `evicted` to
/// [`ClusterRegistry::evict`] and `occupied_unassigned` to
/// [`ClusterRegistry::seed_clusters`].
pub fn commit_occupancy(
    grid: &mut SubMap,
    deltas: &FxHashMap<CellIndex, f64>,
    config: &OccupancyConfig,
) -> CommitOutcome {
    let mut out = CommitOutcome::default();
    for (&idx, &dl) in deltas {
        let Some(cell) = grid.get_mut(idx) else {
            continue;
        };
        cell.logodds = (cell.logodds + dl).clamp(-config.l_max, config.l_max);
        let p = posterior(cell.logodds);
        if cell.cluster.is_some() {
            if p < config.p_free {
                out.evicted.push(idx);
            }
        } else if p > 0.5 {
            out.occupied_unassigned.push(idx);
        }
    }
    out.evicted.sort_unstable();
    out.occupied_unassigned.sort_unstable();
    out
}
