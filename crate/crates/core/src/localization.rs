//! Planar Monte Carlo localization against an NDT map, and absolute
//! trajectory error.

use std::f64::consts::{PI, TAU};

use nalgebra::{Isometry3, Matrix2, Matrix3, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::MapStack;
use crate::io::TrajectoryEstimate;
use crate::Vec3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocalizationConfig {
    pub n_particles: usize,
    /// Odometry noise: rotation from rotation, rotation from translation,
    /// translation from translation, translation from rotation.
    pub alphas: [f64; 4],
    /// Extra per-step diffusion (m, rad) so a converged cloud keeps some spread.
    pub jitter_xy: f64,
    pub jitter_yaw: f64,
    /// Resample when the effective sample size falls below this fraction of n.
    pub ess_threshold: f64,
    /// Half-width of the initial xy box (m).
    pub init_half_extent: f64,
    /// Per-point likelihood for points that do not fall into an occupied cell.
    pub likelihood_floor: f64,
    /// Pose uncertainty (m) added isotropically to every cell covariance when
    /// scoring points.
    pub likelihood_sigma: f64,
    /// Wider pose uncertainty (m) used while the particle cloud is spread out;
    /// 0 disables the coarse stage.
    pub coarse_sigma: f64,
    /// Cloud xy spread (m) above which the coarse stage is used.
    pub coarse_spread: f64,
    /// Scan log-likelihoods are divided by this before weighting.
    pub temperature: f64,
    /// Lower bound on the post-update effective sample size as a fraction of
    /// n; the likelihood is flattened further when a scan would drop below it.
    pub min_ess_fraction: f64,
    /// Points used per scan; scans are strided down to this many.
    pub max_points: usize,
    /// Sensor height above the planar pose (m).
    pub sensor_height: f64,
}

impl Default for LocalizationConfig {
    fn default() -> Self {
        Self {
            n_particles: 5000,
            alphas: [0.05, 0.01, 0.05, 0.01],
            jitter_xy: 0.02,
            jitter_yaw: 0.005,
            ess_threshold: 0.5,
            init_half_extent: 20.0,
            likelihood_floor: 0.05,
            likelihood_sigma: 0.3,
            coarse_sigma: 2.0,
            coarse_spread: 1.0,
            temperature: 1.0,
            min_ess_fraction: 0.1,
            max_points: 150,
            sensor_height: 2.0,
        }
    }
}

impl LocalizationConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.n_particles == 0 {
            return bad("n_particles must be > 0");
        }
        if self.alphas.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return bad("motion noise alphas must be >= 0");
        }
        if !(self.jitter_xy >= 0.0 && self.jitter_yaw >= 0.0) {
            return bad("jitter must be >= 0");
        }
        if !(0.0..=1.0).contains(&self.ess_threshold) {
            return bad("ess_threshold must be in [0, 1]");
        }
        if !(self.likelihood_floor > 0.0 && self.likelihood_floor < 1.0) {
            return bad("likelihood_floor must be in (0, 1)");
        }
        if !(self.likelihood_sigma >= 0.0 && self.likelihood_sigma.is_finite()) {
            return bad("likelihood_sigma must be >= 0");
        }
        if !(self.coarse_sigma >= 0.0 && self.coarse_sigma.is_finite() && self.coarse_spread >= 0.0) {
            return bad("coarse_sigma and coarse_spread must be >= 0");
        }
        if !(0.0..=1.0).contains(&self.min_ess_fraction) {
            return bad("min_ess_fraction must be in [0, 1]");
        }
        if !(self.temperature > 0.0) {
            return bad("temperature must be > 0");
        }
        if self.max_points == 0 {
            return bad("max_points must be > 0");
        }
        Ok(())
    }
}

/// Planar pose.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
}

pub fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(TAU) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

impl Pose2 {
    pub fn new(x: f64, y: f64, yaw: f64) -> Self {
        Self { x, y, yaw }
    }

    /// `self ⊕ d` with `d` expressed in the frame of `self`.
    pub fn compose(&self, d: &Pose2) -> Pose2 {
        let (s, c) = self.yaw.sin_cos();
        Pose2::new(
            self.x + c * d.x - s * d.y,
            self.y + s * d.x + c * d.y,
            wrap_angle(self.yaw + d.yaw),
        )
    }

    /// The relative motion `d` with `self ⊕ d = to`.
    pub fn between(&self, to: &Pose2) -> Pose2 {
        let (s, c) = self.yaw.sin_cos();
        let (dx, dy) = (to.x - self.x, to.y - self.y);
        Pose2::new(c * dx + s * dy, -s * dx + c * dy, wrap_angle(to.yaw - self.yaw))
    }

    /// Maps a sensor-frame point into the world for a sensor mounted `height`
    /// above the pose.
    pub fn transform(&self, p: &Vec3, height: f64) -> Vec3 {
        let (s, c) = self.yaw.sin_cos();
        Vec3::new(self.x + c * p.x - s * p.y, self.y + s * p.x + c * p.y, p.z + height)
    }

    pub fn to_isometry(&self, z: f64) -> Isometry3<f64> {
        Isometry3::new(Vec3::new(self.x, self.y, z), Vec3::z() * self.yaw)
    }

    pub fn from_isometry(iso: &Isometry3<f64>) -> Pose2 {
        let t = iso.translation.vector;
        let x_axis = iso.rotation * Vec3::x();
        Pose2::new(t.x, t.y, x_axis.y.atan2(x_axis.x))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Particle {
    pub pose: Pose2,
    pub weight: f64,
}

#[derive(Clone, Debug)]
pub struct ParticleSet {
    pub particles: Vec<Particle>,
    rng: ChaCha8Rng,
}

/// Uniform particles in `x0 ± half_extent` on x and y and yaw in `[0, 2π)`,
/// with equal weights.
pub fn init_particles(x0: &Pose2, n: usize, half_extent: f64, seed: u64) -> ParticleSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = 1.0 / n as f64;
    let particles = (0..n)
        .map(|_| Particle {
            pose: Pose2::new(
                x0.x + rng.random_range(-half_extent..=half_extent),
                x0.y + rng.random_range(-half_extent..=half_extent),
                rng.random_range(0.0..TAU),
            ),
            weight: w,
        })
        .collect();
    ParticleSet { particles, rng }
}

impl ParticleSet {
    /// Particles at `pose`, all with equal weight.
    pub fn at(pose: &Pose2, n: usize, seed: u64) -> ParticleSet {
        ParticleSet {
            particles: vec![
                Particle {
                    pose: *pose,
                    weight: 1.0 / n as f64,
                };
                n
            ],
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.particles.iter().map(|p| p.weight).sum()
    }

    pub fn effective_sample_size(&self) -> f64 {
        1.0 / self.particles.iter().map(|p| p.weight * p.weight).sum::<f64>()
    }

    /// Weighted mean with a circular mean for yaw.
    pub fn estimate(&self) -> Pose2 {
        let (mut x, mut y, mut s, mut c) = (0.0, 0.0, 0.0, 0.0);
        for p in &self.particles {
            x += p.weight * p.pose.x;
            y += p.weight * p.pose.y;
            s += p.weight * p.pose.yaw.sin();
            c += p.weight * p.pose.yaw.cos();
        }
        Pose2::new(x, y, s.atan2(c))
    }

    /// Weighted xy standard deviation, `sqrt(var x + var y)`.
    pub fn spread(&self) -> f64 {
        let total = self.weight_sum();
        let (mx, my) = self.particles.iter().fold((0.0, 0.0), |(x, y), p| {
            (x + p.weight * p.pose.x, y + p.weight * p.pose.y)
        });
        let (mx, my) = (mx / total, my / total);
        let v: f64 = self
            .particles
            .iter()
            .map(|p| p.weight * ((p.pose.x - mx).powi(2) + (p.pose.y - my).powi(2)))
            .sum();
        (v / total).sqrt()
    }

    /// Samples the odometry motion model.
    pub fn propagate(&mut self, odometry: &Pose2, cfg: &LocalizationConfig) {
        let [a1, a2, a3, a4] = cfg.alphas;
        let trans = odometry.x.hypot(odometry.y);
        let rot1 = if trans > 1e-9 {
            odometry.y.atan2(odometry.x)
        } else {
            0.0
        };
        let rot2 = wrap_angle(odometry.yaw - rot1);
        let sd_rot1 = (a1 * rot1 * rot1 + a2 * trans * trans).sqrt();
        let sd_trans = (a3 * trans * trans + a4 * (rot1 * rot1 + rot2 * rot2)).sqrt();
        let sd_rot2 = (a1 * rot2 * rot2 + a2 * trans * trans).sqrt();
        let rng = &mut self.rng;
        let mut gauss = |sd: f64| {
            if sd > 0.0 {
                Normal::new(0.0, sd).expect("finite sd").sample(rng)
            } else {
                0.0
            }
        };
        for p in &mut self.particles {
            let r1 = rot1 + gauss(sd_rot1);
            let t = trans + gauss(sd_trans);
            let r2 = rot2 + gauss(sd_rot2);
            let heading = p.pose.yaw + r1;
            p.pose = Pose2::new(
                p.pose.x + t * heading.cos() + gauss(cfg.jitter_xy),
                p.pose.y + t * heading.sin() + gauss(cfg.jitter_xy),
                wrap_angle(heading + r2 + gauss(cfg.jitter_yaw)),
            );
        }
    }

    /// Systematic resampling to equal weights.
    pub fn resample(&mut self) {
        let n = self.particles.len();
        let step = 1.0 / n as f64;
        let mut u = self.rng.random_range(0.0..step);
        let mut out = Vec::with_capacity(n);
        let mut cum = self.particles[0].weight;
        let mut i = 0;
        for _ in 0..n {
            while u > cum && i + 1 < n {
                i += 1;
                cum += self.particles[i].weight;
            }
            out.push(Particle {
                pose: self.particles[i].pose,
                weight: step,
            });
            u += step;
        }
        self.particles = out;
    }
}

/// Occupied cell Gaussians bucketed on a world lattice for point scoring.
/// Each Gaussian is registered in the voxel of its mean and the 26 around it,
/// so a query sees every cell whose mean is within one voxel.
#[derive(Clone, Debug)]
pub struct LikelihoodField {
    voxel: f64,
    gaussians: Vec<(Vec3, Matrix3<f64>)>,
    buckets: FxHashMap<[i32; 3], Vec<u32>>,
}

impl LikelihoodField {
    pub fn new(map: &MapStack, sigma: f64) -> Self {
        let voxel = map.config().voxel_size;
        let mut gaussians = Vec::new();
        let mut buckets: FxHashMap<[i32; 3], Vec<u32>> = FxHashMap::default();
        for s in map.submaps() {
            for idx in s.sorted_indices() {
                let c = s.get(idx).expect("sorted index exists");
                if !(c.is_fitted() && c.is_occupied()) {
                    continue;
                }
                let cov = c.covariance() + Matrix3::identity() * (sigma * sigma);
                let Some(inv) = cov.try_inverse() else { continue };
                let id = gaussians.len() as u32;
                gaussians.push((*c.mean(), inv));
                let k = Self::key(voxel, c.mean());
                for dx in -1..=1 {
                    for dy in -1..=1 {
                        for dz in -1..=1 {
                            buckets.entry([k[0] + dx, k[1] + dy, k[2] + dz]).or_default().push(id);
                        }
                    }
                }
            }
        }
        Self {
            voxel,
            gaussians,
            buckets,
        }
    }

    fn key(voxel: f64, p: &Vec3) -> [i32; 3] {
        [
            (p.x / voxel).floor() as i32,
            (p.y / voxel).floor() as i32,
            (p.z / voxel).floor() as i32,
        ]
    }

    pub fn len(&self) -> usize {
        self.gaussians.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaussians.is_empty()
    }

    /// Best unnormalized Gaussian response among nearby cells, 0 if none.
    pub fn response(&self, p: &Vec3) -> f64 {
        let Some(ids) = self.buckets.get(&Self::key(self.voxel, p)) else {
            return 0.0;
        };
        let best = ids
            .iter()
            .map(|&i| {
                let (m, inv) = &self.gaussians[i as usize];
                let d = p - m;
                d.dot(&(inv * d))
            })
            .fold(f64::INFINITY, f64::min);
        (-0.5 * best).exp()
    }

    /// Point likelihood mixed with a uniform floor.
    pub fn point_likelihood(&self, p: &Vec3, floor: f64) -> f64 {
        floor + (1.0 - floor) * self.response(p)
    }
}

/// Fine and optional coarse likelihood fields of one map.
#[derive(Clone, Debug)]
pub struct MclMap {
    pub fine: LikelihoodField,
    pub coarse: Option<LikelihoodField>,
}

impl MclMap {
    pub fn new(map: &MapStack, cfg: &LocalizationConfig) -> Self {
        Self {
            fine: LikelihoodField::new(map, cfg.likelihood_sigma),
            coarse: (cfg.coarse_sigma > 0.0).then(|| LikelihoodField::new(map, cfg.coarse_sigma)),
        }
    }
}

/// Log-likelihood of a sensor-frame scan seen from `pose`.
pub fn scan_log_likelihood(field: &LikelihoodField, pose: &Pose2, points: &[Vec3], cfg: &LocalizationConfig) -> f64 {
    points
        .iter()
        .map(|p| {
            field
                .point_likelihood(&pose.transform(p, cfg.sensor_height), cfg.likelihood_floor)
                .ln()
        })
        .sum()
}

fn subsample(points: &[Vec3], max: usize) -> Vec<Vec3> {
    if points.len() <= max {
        return points.to_vec();
    }
    let stride = points.len() as f64 / max as f64;
    (0..max).map(|k| points[(k as f64 * stride) as usize]).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOutcome {
    pub estimate: Pose2,
    pub ess: f64,
    pub resampled: bool,
    /// All weights vanished, or no particle explained any return; the set was
    /// reinitialized around the previous estimate.
    pub diverged: bool,
}

/// One predict-weight-resample cycle. `scan` is in the sensor frame.
pub fn mcl_step(
    set: &mut ParticleSet,
    odometry: &Pose2,
    scan: &[Vec3],
    map: &MclMap,
    cfg: &LocalizationConfig,
) -> StepOutcome {
    let previous = set.estimate();
    set.propagate(odometry, cfg);
    let field = match &map.coarse {
        Some(c) if set.spread() > cfg.coarse_spread => c,
        _ => &map.fine,
    };
    let points = subsample(scan, cfg.max_points);
    let logl: Vec<f64> = set
        .particles
        .par_iter()
        .map(|p| scan_log_likelihood(field, &p.pose, &points, cfg))
        .collect();
    let max = logl.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // no particle places a single return near the map
    let floor_only = points.len() as f64 * cfg.likelihood_floor.ln();
    if !max.is_finite() || (!points.is_empty() && max <= floor_only + 1e-9) {
        return reinitialize(set, &previous, odometry, cfg);
    }
    let prior: Vec<f64> = set.particles.iter().map(|p| p.weight).collect();
    let beta = tempered_exponent(&prior, &logl, max, 1.0 / cfg.temperature, cfg.min_ess_fraction);
    let mut total = 0.0;
    for ((p, l), w) in set.particles.iter_mut().zip(&logl).zip(&prior) {
        p.weight = w * (beta * (l - max)).exp();
        total += p.weight;
    }
    if !(total.is_finite() && total > 0.0) {
        return reinitialize(set, &previous, odometry, cfg);
    }
    for p in &mut set.particles {
        p.weight /= total;
    }
    let ess = set.effective_sample_size();
    let estimate = set.estimate();
    let resampled = ess < cfg.ess_threshold * set.len() as f64;
    if resampled {
        set.resample();
    }
    StepOutcome {
        estimate,
        ess,
        resampled,
        diverged: false,
    }
}

fn reinitialize(set: &mut ParticleSet, previous: &Pose2, odometry: &Pose2, cfg: &LocalizationConfig) -> StepOutcome {
    let seed = set.rng.random();
    let n = set.len();
    *set = init_particles(previous, n, cfg.init_half_extent, seed);
    set.propagate(odometry, cfg);
    StepOutcome {
        estimate: set.estimate(),
        ess: n as f64,
        resampled: false,
        diverged: true,
    }
}

fn ess_of(prior: &[f64], logl: &[f64], max: f64, beta: f64) -> f64 {
    let (mut s, mut s2) = (0.0, 0.0);
    for (w, l) in prior.iter().zip(logl) {
        let v = w * (beta * (l - max)).exp();
        s += v;
        s2 += v * v;
    }
    if s2 > 0.0 {
        s * s / s2
    } else {
        0.0
    }
}

/// Largest exponent `<= beta` whose update keeps the effective sample size
/// at `min_fraction · n`, by bisection.
fn tempered_exponent(prior: &[f64], logl: &[f64], max: f64, beta: f64, min_fraction: f64) -> f64 {
    let target = min_fraction * prior.len() as f64;
    if ess_of(prior, logl, max, beta) >= target {
        return beta;
    }
    let (mut lo, mut hi) = (0.0, beta);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if ess_of(prior, logl, max, mid) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Runs MCL over a scan sequence from the standard init box around `x0`.
/// `odometry[k]` is the motion from scan `k - 1` to scan `k`; the first entry
/// is applied before the first scan.
pub fn localize_sequence(
    map: &MapStack,
    scans: &[Vec<Vec3>],
    odometry: &[Pose2],
    x0: &Pose2,
    cfg: &LocalizationConfig,
    seed: u64,
) -> Result<Vec<StepOutcome>> {
    cfg.validate()?;
    if scans.len() != odometry.len() {
        return Err(Error::Input(format!(
            "{} scans but {} odometry steps",
            scans.len(),
            odometry.len()
        )));
    }
    let field = MclMap::new(map, cfg);
    let mut set = init_particles(x0, cfg.n_particles, cfg.init_half_extent, seed);
    Ok(scans
        .iter()
        .zip(odometry)
        .map(|(scan, odo)| mcl_step(&mut set, odo, scan, &field, cfg))
        .collect())
}

/// Planar poses to a trajectory with the given timestamps.
pub fn trajectory(times: &[f64], poses: &[Pose2], z: f64) -> Result<TrajectoryEstimate> {
    TrajectoryEstimate::new(times.iter().zip(poses).map(|(t, p)| (*t, p.to_isometry(z))).collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AteOptions {
    /// Maximum timestamp difference for association.
    pub tolerance: f64,
    /// Rigidly align the estimate to the ground truth in the plane first.
    pub align: bool,
}

impl Default for AteOptions {
    fn default() -> Self {
        Self {
            tolerance: 0.02,
            align: true,
        }
    }
}

/// Closed-form planar rigid alignment: `(R, t)` minimizing `Σ |R a + t - b|²`.
fn align_se2(a: &[Vec3], b: &[Vec3]) -> (Matrix2<f64>, Vector2<f64>) {
    let n = a.len() as f64;
    let ca = a.iter().fold(Vector2::zeros(), |s, p| s + p.xy()) / n;
    let cb = b.iter().fold(Vector2::zeros(), |s, p| s + p.xy()) / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (p, q) in a.iter().zip(b) {
        let (u, v) = (p.xy() - ca, q.xy() - cb);
        sxx += u.dot(&v);
        sxy += u.x * v.y - u.y * v.x;
    }
    let th = sxy.atan2(sxx);
    let r = Matrix2::new(th.cos(), -th.sin(), th.sin(), th.cos());
    (r, cb - r * ca)
}

/// Translational RMSE between associated poses.
pub fn ate(estimate: &TrajectoryEstimate, truth: &TrajectoryEstimate, opts: &AteOptions) -> Result<f64> {
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for (t, p) in estimate.poses() {
        if let Some(q) = truth.nearest(*t, opts.tolerance) {
            a.push(p.translation.vector);
            b.push(q.translation.vector);
        }
    }
    if a.is_empty() {
        return Err(Error::Input("no poses could be associated by timestamp".into()));
    }
    if opts.align {
        let (r, t) = align_se2(&a, &b);
        for p in &mut a {
            let xy = r * p.xy() + t;
            p.x = xy.x;
            p.y = xy.y;
        }
    }
    let sse: f64 = a.iter().zip(&b).map(|(p, q)| (p - q).norm_squared()).sum();
    Ok((sse / a.len() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pose_algebra() {
        let a = Pose2::new(1.0, 2.0, 0.7);
        let b = Pose2::new(-3.0, 0.5, -2.9);
        let d = a.between(&b);
        let c = a.compose(&d);
        assert!((c.x - b.x).abs() < 1e-12 && (c.y - b.y).abs() < 1e-12);
        assert!(wrap_angle(c.yaw - b.yaw).abs() < 1e-12);
        let back = Pose2::from_isometry(&a.to_isometry(0.0));
        assert!((back.yaw - a.yaw).abs() < 1e-12);
    }

    #[test]
    fn init_bounds() {
        let x0 = Pose2::new(5.0, -3.0, 0.0);
        let set = init_particles(&x0, 2000, 20.0, 3);
        assert!((set.weight_sum() - 1.0).abs() < 1e-9);
        for p in &set.particles {
            assert!((p.pose.x - 5.0).abs() <= 20.0 && (p.pose.y + 3.0).abs() <= 20.0);
            assert!((0.0..TAU).contains(&p.pose.yaw));
        }
        let again = init_particles(&x0, 2000, 20.0, 3);
        assert_eq!(set.particles, again.particles);
    }

    #[test]
    fn resampling_keeps_mass_and_favours_heavy_particles() {
        let mut set = init_particles(&Pose2::default(), 1000, 1.0, 1);
        for (i, p) in set.particles.iter_mut().enumerate() {
            p.weight = if i == 7 { 0.5 } else { 0.5 / 999.0 };
        }
        let heavy = set.particles[7].pose;
        set.resample();
        assert!((set.weight_sum() - 1.0).abs() < 1e-9);
        let copies = set.particles.iter().filter(|p| p.pose == heavy).count();
        assert!((499..=501).contains(&copies), "{copies}");
    }

    #[test]
    fn ate_basics() {
        let poses: Vec<_> = (0..20)
            .map(|i| Pose2::new(i as f64, (i as f64 * 0.3).sin(), 0.1 * i as f64).to_isometry(0.0))
            .collect();
        let truth = TrajectoryEstimate::from_sequence(poses.clone());
        assert_eq!(ate(&truth, &truth, &AteOptions::default()).unwrap(), 0.0);
        let shifted = TrajectoryEstimate::from_sequence(
            poses
                .iter()
                .map(|p| Isometry3::translation(1.0, 0.0, 0.0) * p)
                .collect(),
        );
        let raw = AteOptions {
            align: false,
            ..AteOptions::default()
        };
        assert!((ate(&shifted, &truth, &raw).unwrap() - 1.0).abs() < 1e-12);
        assert!(ate(&shifted, &truth, &AteOptions::default()).unwrap() < 1e-9);
        let rotated = TrajectoryEstimate::from_sequence(
            poses
                .iter()
                .map(|p| Pose2::new(2.0, -1.0, 0.8).to_isometry(0.0) * p)
                .collect(),
        );
        assert!(ate(&rotated, &truth, &AteOptions::default()).unwrap() < 1e-9);
    }
}
