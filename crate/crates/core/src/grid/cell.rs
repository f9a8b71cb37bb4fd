use nalgebra::Matrix3;

use super::gaussian::{regularize_covariance, GaussianStats};
use super::{ClusterId, Label, LabelHistogram};
use crate::Vec3;

/// One voxel of the clustered NDT occupancy map.
#[derive(Clone, Debug)]
pub struct NdtCell {
    gaussian: GaussianStats,
    regularized: Matrix3<f64>,
    inverse: Matrix3<f64>,
    /// Occupancy log-odds.
    pub logodds: f64,
    pub labels: LabelHistogram,
    pub cluster: Option<ClusterId>,
    /// Membership in `cluster`, in [0, 1].
    pub membership: f64,
    /// Occupied observations (decayed lifetime count).
    pub evidence_occ: f64,
    /// Empty observations (decayed lifetime count).
    pub evidence_emp: f64,
}

impl NdtCell {
    pub fn new(cov_floor: f64) -> Self {
        let regularized = Matrix3::identity() * cov_floor;
        Self {
            gaussian: GaussianStats::default(),
            regularized,
            inverse: Matrix3::identity() / cov_floor,
            logodds: 0.0,
            labels: LabelHistogram::default(),
            cluster: None,
            membership: 1.0,
            evidence_occ: 0.0,
            evidence_emp: 0.0,
        }
    }

    /// Rebuilds a cell from stored moments; the regularized covariance and
    /// its inverse are derived again from `gaussian`.
    pub fn from_parts(gaussian: GaussianStats, cov_floor: f64) -> Self {
        let mut cell = Self::new(cov_floor);
        cell.gaussian = gaussian;
        cell.refresh(cov_floor);
        cell
    }

    pub fn add_points(&mut self, points: &[Vec3], cov_floor: f64) {
        if points.is_empty() {
            return;
        }
        self.gaussian.add_points(points);
        self.refresh(cov_floor);
    }

    pub fn add_labels(&mut self, labels: impl IntoIterator<Item = Label>) {
        for l in labels {
            self.labels.add(l);
        }
    }

    fn refresh(&mut self, cov_floor: f64) {
        self.regularized = regularize_covariance(&self.gaussian.covariance, cov_floor);
        // eigenvalues are floored, so the inverse exists
        self.inverse = self
            .regularized
            .try_inverse()
            .unwrap_or_else(|| Matrix3::identity() / cov_floor);
    }

    pub fn point_count(&self) -> u64 {
        self.gaussian.count
    }

    pub fn mean(&self) -> &Vec3 {
        &self.gaussian.mean
    }

    /// Regularized covariance used for likelihoods.
    pub fn covariance(&self) -> &Matrix3<f64> {
        &self.regularized
    }

    pub fn inverse_covariance(&self) -> &Matrix3<f64> {
        &self.inverse
    }

    /// Raw sample covariance as accumulated from the points.
    pub fn sample_covariance(&self) -> &Matrix3<f64> {
        &self.gaussian.covariance
    }

    pub fn gaussian(&self) -> &GaussianStats {
        &self.gaussian
    }

    /// A Gaussian can be evaluated once three points have been seen.
    pub fn is_fitted(&self) -> bool {
        self.gaussian.count >= 3
    }

    pub fn occupancy(&self) -> f64 {
        crate::occupancy::posterior(self.logodds)
    }

    pub fn is_occupied(&self) -> bool {
        self.occupancy() > 0.5
    }

    pub fn majority_label(&self) -> Option<Label> {
        self.labels.majority()
    }

    /// Unnormalized Gaussian likelihood `exp(-d²/2)` of a point.
    pub fn likelihood(&self, p: &Vec3) -> f64 {
        let d = p - self.gaussian.mean;
        (-0.5 * d.dot(&(self.inverse * d))).exp()
    }
}
