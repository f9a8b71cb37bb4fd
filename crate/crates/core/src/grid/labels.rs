use super::Label;

/// Cumulative per-label point counts of one cell, kept sorted by label id.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LabelHistogram {
    counts: Vec<(Label, u32)>,
}

impl LabelHistogram {
    pub fn from_counts(mut counts: Vec<(Label, u32)>) -> Self {
        counts.retain(|&(_, c)| c > 0);
        counts.sort_by_key(|&(l, _)| l);
        counts.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 = a.1.saturating_add(b.1);
                true
            } else {
                false
            }
        });
        Self { counts }
    }

    pub fn add(&mut self, label: Label) {
        self.add_count(label, 1);
    }

    pub fn add_count(&mut self, label: Label, n: u32) {
        if n == 0 {
            return;
        }
        match self.counts.binary_search_by_key(&label, |&(l, _)| l) {
            Ok(i) => self.counts[i].1 += n,
            Err(i) => self.counts.insert(i, (label, n)),
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&(_, c)| c as u64).sum()
    }

    pub fn count(&self, label: Label) -> u32 {
        self.counts
            .binary_search_by_key(&label, |&(l, _)| l)
            .map(|i| self.counts[i].1)
            .unwrap_or(0)
    }

    pub fn probability(&self, label: Label) -> f64 {
        let total = self.total();
        if total == 0 {
            0.0
        } else {
            self.count(label) as f64 / total as f64
        }
    }

    /// Normalized categorical distribution, one entry per observed label.
    pub fn distribution(&self) -> Vec<(Label, f64)> {
        let total = self.total() as f64;
        self.counts.iter().map(|&(l, c)| (l, c as f64 / total)).collect()
    }

    /// Most frequent label; ties go to the smallest id.
    pub fn majority(&self) -> Option<Label> {
        let mut best: Option<(Label, u32)> = None;
        for &(l, c) in &self.counts {
            if best.is_none_or(|(_, bc)| c > bc) {
                best = Some((l, c));
            }
        }
        best.map(|(l, _)| l)
    }

    pub fn entries(&self) -> &[(Label, u32)] {
        &self.counts
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}
