//! Dynamic cell density: occupied cells with a dynamic majority label per
//! scan of the sequence.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::grid::{Label, MapStack};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DynamicLabelSet {
    labels: BTreeSet<Label>,
}

impl Default for DynamicLabelSet {
    /// The moving-object classes 252..=259.
    fn default() -> Self {
        Self {
            labels: (252..=259).map(Label).collect(),
        }
    }
}

impl DynamicLabelSet {
    pub fn new(labels: impl IntoIterator<Item = Label>) -> Result<Self> {
        let labels: BTreeSet<_> = labels.into_iter().collect();
        if labels.is_empty() {
            return Err(Error::Config("dynamic label set is empty".into()));
        }
        Ok(Self { labels })
    }

    /// Parses `"252-259"` or `"252,254,255"` (both forms may be mixed).
    pub fn parse(s: &str) -> Result<Self> {
        let mut labels = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let num = |t: &str| {
                t.trim()
                    .parse::<u16>()
                    .map_err(|_| Error::Config(format!("bad label {t:?} in {s:?}")))
            };
            match part.split_once('-') {
                Some((a, b)) => {
                    let (a, b) = (num(a)?, num(b)?);
                    if a > b {
                        return Err(Error::Config(format!("empty label range {part:?}")));
                    }
                    labels.extend((a..=b).map(Label));
                }
                None => labels.push(Label(num(part)?)),
            }
        }
        Self::new(labels)
    }

    pub fn contains(&self, label: Label) -> bool {
        self.labels.contains(&label)
    }

    pub fn iter(&self) -> impl Iterator<Item = Label> + '_ {
        self.labels.iter().copied()
    }
}

impl std::fmt::Display for DynamicLabelSet {
    /// Comma-separated runs such as `252-259`, accepted by [`DynamicLabelSet::parse`].
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut runs: Vec<(u16, u16)> = Vec::new();
        for l in self.iter() {
            match runs.last_mut() {
                Some(r) if r.1.checked_add(1) == Some(l.0) => r.1 = l.0,
                _ => runs.push((l.0, l.0)),
            }
        }
        let parts: Vec<String> = runs
            .iter()
            .map(|&(a, b)| if a == b { a.to_string() } else { format!("{a}-{b}") })
            .collect();
        f.write_str(&parts.join(","))
    }
}

/// Counts cells over all submaps with posterior > 0.5 and a majority label
/// in `dynamic`.
pub fn dynamic_cell_count(map: &MapStack, dynamic: &DynamicLabelSet) -> usize {
    map.submaps()
        .iter()
        .flat_map(|s| s.iter())
        .filter(|(_, c)| c.is_occupied() && c.majority_label().is_some_and(|l| dynamic.contains(l)))
        .count()
}

pub fn dynamic_cell_density(map: &MapStack, sequence_length: u64, dynamic: &DynamicLabelSet) -> Result<f64> {
    if sequence_length == 0 {
        return Err(Error::Input("sequence length must be > 0".into()));
    }
    Ok(dynamic_cell_count(map, dynamic) as f64 / sequence_length as f64)
}
