use nalgebra::{Matrix3, SymmetricEigen};

use crate::Vec3;

/// Running sample mean and covariance of a point set.
///
/// Batches are merged with the pairwise (Chan et al.) update so feeding
/// points one batch at a time gives the same moments as one pass over all of
/// them. `covariance` uses the `N - 1` denominator and is zero below two
/// samples.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianStats {
    pub count: u64,
    pub mean: Vec3,
    pub covariance: Matrix3<f64>,
}

impl Default for GaussianStats {
    fn default() -> Self {
        Self {
            count: 0,
            mean: Vec3::zeros(),
            covariance: Matrix3::zeros(),
        }
    }
}

impl GaussianStats {
    pub fn from_points(points: &[Vec3]) -> Self {
        let mut stats = Self::default();
        stats.add_points(points);
        stats
    }

    pub fn add_points(&mut self, points: &[Vec3]) {
        if points.is_empty() {
            return;
        }
        let nb = points.len() as f64;
        let mean_b = points.iter().sum::<Vec3>() / nb;
        let mut scatter_b = Matrix3::zeros();
        for p in points {
            let d = p - mean_b;
            scatter_b += d * d.transpose();
        }

        if self.count == 0 {
            self.count = points.len() as u64;
            self.mean = mean_b;
            self.set_scatter(scatter_b);
            return;
        }

        let na = self.count as f64;
        let n = na + nb;
        let scatter_a = self.scatter();
        let delta = mean_b - self.mean;
        self.mean += delta * (nb / n);
        self.count += points.len() as u64;
        self.set_scatter(scatter_a + scatter_b + delta * delta.transpose() * (na * nb / n));
    }

    fn scatter(&self) -> Matrix3<f64> {
        if self.count < 2 {
            Matrix3::zeros()
        } else {
            self.covariance * (self.count - 1) as f64
        }
    }

    fn set_scatter(&mut self, scatter: Matrix3<f64>) {
        self.covariance = if self.count < 2 {
            Matrix3::zeros()
        } else {
            let c = scatter / (self.count - 1) as f64;
            // keep exact symmetry against rounding in the outer products
            (c + c.transpose()) * 0.5
        };
    }
}

/// Floors the eigenvalues of a symmetric matrix at `floor`.
pub fn regularize_covariance(cov: &Matrix3<f64>, floor: f64) -> Matrix3<f64> {
    let eig = SymmetricEigen::new(*cov);
    let vals = eig.eigenvalues.map(|v| v.max(floor));
    let reg = eig.eigenvectors * Matrix3::from_diagonal(&vals) * eig.eigenvectors.transpose();
    (reg + reg.transpose()) * 0.5
}
