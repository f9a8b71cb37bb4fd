use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Label;
use crate::Vec3;

/// Axis-aligned box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Aabb {
    pub fn new(min: [f64; 3], max: [f64; 3]) -> Self {
        Self { min, max }
    }

    pub fn is_valid(&self) -> bool {
        (0..3).all(|i| self.min[i].is_finite() && self.max[i].is_finite() && self.min[i] < self.max[i])
    }

    pub fn translated(&self, d: &Vec3) -> Aabb {
        Aabb {
            min: [self.min[0] + d.x, self.min[1] + d.y, self.min[2] + d.z],
            max: [self.max[0] + d.x, self.max[1] + d.y, self.max[2] + d.z],
        }
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }

    /// True when the boxes share positive volume.
    pub fn overlaps(&self, other: &Aabb) -> bool {
        (0..3).all(|i| self.min[i] < other.max[i] && other.min[i] < self.max[i])
    }

    /// Entry distance of the ray `origin + s·dir`, `s ≥ 0`, if it hits.
    pub fn ray_entry(&self, origin: &Vec3, dir: &Vec3) -> Option<f64> {
        let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
        for i in 0..3 {
            if dir[i].abs() < 1e-15 {
                if origin[i] < self.min[i] || origin[i] > self.max[i] {
                    return None;
                }
                continue;
            }
            let inv = 1.0 / dir[i];
            let (mut a, mut b) = ((self.min[i] - origin[i]) * inv, (self.max[i] - origin[i]) * inv);
            if a > b {
                std::mem::swap(&mut a, &mut b);
            }
            lo = lo.max(a);
            hi = hi.min(b);
            if lo > hi {
                return None;
            }
        }
        Some(lo)
    }
}

/// Piecewise-constant object motion, sampled at integer scan times.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Trajectory {
    #[default]
    Static,
    /// Offset of the last keyframe at or before `t`; before the first
    /// keyframe the first offset applies.
    Keyframes { keyframes: Vec<(u64, [f64; 3])> },
    /// Offset `velocity · (t − start)`, per scan, frozen from `until` on.
    Linear {
        start: u64,
        velocity: [f64; 3],
        #[serde(default)]
        until: Option<u64>,
    },
}

impl Trajectory {
    pub fn offset(&self, t: u64) -> Vec3 {
        match self {
            Trajectory::Static => Vec3::zeros(),
            Trajectory::Keyframes { keyframes } => {
                let k = keyframes.partition_point(|(kt, _)| *kt <= t);
                let i = k.saturating_sub(1);
                keyframes.get(i).map_or(Vec3::zeros(), |(_, o)| Vec3::from(*o))
            }
            Trajectory::Linear { start, velocity, until } => {
                let t = until.map_or(t, |u| t.min(u));
                Vec3::from(*velocity) * (t as f64 - *start as f64)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneObject {
    pub id: u32,
    pub label: Label,
    /// Shape as a union of boxes in the object frame.
    pub boxes: Vec<Aabb>,
    #[serde(default)]
    pub trajectory: Trajectory,
    /// Present for scan times in `[start, end)`; always present when absent.
    #[serde(default)]
    pub present: Option<(u64, u64)>,
}

impl SceneObject {
    pub fn is_present(&self, t: u64) -> bool {
        self.present.is_none_or(|(a, b)| (a..b).contains(&t))
    }

    /// World-frame boxes at time `t` (empty when absent).
    pub fn boxes_at(&self, t: u64) -> Vec<Aabb> {
        if !self.is_present(t) {
            return Vec::new();
        }
        let d = self.trajectory.offset(t);
        self.boxes.iter().map(|b| b.translated(&d)).collect()
    }
}

/// Infinite horizontal plane, clipped to the scene bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ground {
    pub z: f64,
    pub label: Label,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    /// Rays leaving this box hit nothing.
    pub bounds: Aabb,
    #[serde(default)]
    pub ground: Option<Ground>,
    #[serde(default)]
    pub objects: Vec<SceneObject>,
}

impl Scene {
    pub fn validate(&self) -> Result<()> {
        if !self.bounds.is_valid() {
            return Err(Error::Input("scene bounds are degenerate".into()));
        }
        for o in &self.objects {
            if o.boxes.is_empty() || o.boxes.iter().any(|b| !b.is_valid()) {
                return Err(Error::Input(format!("object {} has a degenerate shape", o.id)));
            }
            if let Trajectory::Keyframes { keyframes } = &o.trajectory {
                if keyframes.is_empty() || keyframes.windows(2).any(|w| w[0].0 >= w[1].0) {
                    return Err(Error::Input(format!(
                        "object {} keyframes must be nonempty and strictly increasing",
                        o.id
                    )));
                }
            }
            if o.present.is_some_and(|(a, b)| a >= b) {
                return Err(Error::Input(format!("object {} has an empty presence interval", o.id)));
            }
        }
        Ok(())
    }

    pub fn object(&self, id: u32) -> Option<&SceneObject> {
        self.objects.iter().find(|o| o.id == id)
    }

    /// Distinct labels that can appear in scans, sorted.
    pub fn palette(&self) -> Vec<Label> {
        let mut v: Vec<Label> = self.objects.iter().map(|o| o.label).collect();
        v.extend(self.ground.map(|g| g.label));
        v.sort_unstable();
        v.dedup();
        v
    }

    /// First hit of a ray with unit direction `dir`: distance and label.
    pub fn cast(&self, origin: &Vec3, dir: &Vec3, t: u64, max_range: f64) -> Option<(f64, Label)> {
        let limit = self.bounds.ray_entry(origin, dir).map(|_| {
            // distance to where the ray leaves the bounds
            let mut hi = f64::INFINITY;
            for i in 0..3 {
                if dir[i].abs() > 1e-15 {
                    let far = if dir[i] > 0.0 {
                        self.bounds.max[i]
                    } else {
                        self.bounds.min[i]
                    };
                    hi = hi.min((far - origin[i]) / dir[i]);
                }
            }
            hi
        })?;
        let mut best: Option<(f64, Label)> = None;
        let mut consider = |s: f64, l: Label| {
            if s <= limit && s <= max_range && best.is_none_or(|(b, _)| s < b) {
                best = Some((s, l));
            }
        };
        if let Some(g) = self.ground {
            if dir.z < -1e-12 && origin.z > g.z {
                consider((g.z - origin.z) / dir.z, g.label);
            }
        }
        for o in &self.objects {
            for b in o.boxes_at(t) {
                if let Some(s) = b.ray_entry(origin, dir) {
                    consider(s, o.label);
                }
            }
        }
        best
    }

    /// Label of the present object containing `p`, if any (ground excluded).
    pub fn label_at(&self, p: &Vec3, t: u64) -> Option<Label> {
        self.objects
            .iter()
            .find(|o| o.boxes_at(t).iter().any(|b| b.contains(p)))
            .map(|o| o.label)
    }

    /// Ground-truth occupancy of the cube `[min, min + size)`: the label of
    /// the lowest-id object overlapping it, else the ground label when the
    /// ground plane crosses it.
    pub fn voxel_truth(&self, min: &Vec3, size: f64, t: u64) -> Option<Label> {
        let cube = Aabb::new([min.x, min.y, min.z], [min.x + size, min.y + size, min.z + size]);
        let obj = self
            .objects
            .iter()
            .filter(|o| o.boxes_at(t).iter().any(|b| b.overlaps(&cube)))
            .min_by_key(|o| o.id)
            .map(|o| o.label);
        obj.or_else(|| {
            self.ground
                .filter(|g| g.z >= min.z && g.z < min.z + size)
                .map(|g| g.label)
        })
    }

    /// True when some present object overlaps the cube at any time in
    /// `times`.
    pub fn voxel_ever_occupied(&self, min: &Vec3, size: f64, times: impl IntoIterator<Item = u64>) -> bool {
        times.into_iter().any(|t| self.voxel_truth(min, size, t).is_some())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trajectory_is_piecewise_constant() {
        let k = Trajectory::Keyframes {
            keyframes: vec![(5, [1.0, 0.0, 0.0]), (10, [2.0, 0.0, 0.0])],
        };
        assert_eq!(k.offset(0).x, 1.0);
        assert_eq!(k.offset(9).x, 1.0);
        assert_eq!(k.offset(10).x, 2.0);
        let l = Trajectory::Linear {
            start: 2,
            velocity: [0.5, 0.0, 0.0],
            until: Some(4),
        };
        assert_eq!(l.offset(3).x, 0.5);
        assert_eq!(l.offset(6).x, 1.0);
    }

    #[test]
    fn ray_box_against_marching_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let b = Aabb::new([-1.0, -0.5, 0.2], [1.5, 0.7, 1.4]);
        let step = 1e-3;
        for _ in 0..200 {
            let o = Vec3::new(
                rng.random_range(-4.0..4.0),
                rng.random_range(-4.0..4.0),
                rng.random_range(-2.0..3.0),
            );
            if b.contains(&o) {
                continue;
            }
            let target = Vec3::new(
                rng.random_range(-1.5..2.0),
                rng.random_range(-1.0..1.2),
                rng.random_range(0.0..1.6),
            );
            let d = (target - o).normalize();
            let mut march = None;
            let mut s = 0.0;
            while s < 12.0 {
                if b.contains(&(o + d * s)) {
                    march = Some(s);
                    break;
                }
                s += step;
            }
            match (b.ray_entry(&o, &d), march) {
                (Some(a), Some(m)) => assert!(m >= a - 1e-12 && m - a <= step + 1e-12, "{a} vs {m}"),
                (None, None) => {}
                // grazing rays may step over a sliver thinner than the step
                (Some(a), None) => {
                    let inside = (0..1000)
                        .filter(|k| b.contains(&(o + d * (a + *k as f64 * step / 1000.0))))
                        .count();
                    assert!(inside < 1000, "missed hit at {a}");
                }
                (None, Some(m)) => panic!("oracle hit at {m} but slab test missed"),
            }
        }
    }

    #[test]
    fn occlusion_and_presence() {
        let scene = Scene {
            bounds: Aabb::new([-50.0; 3], [50.0; 3]),
            ground: Some(Ground {
                z: 0.0,
                label: Label::ROAD,
            }),
            objects: vec![
                SceneObject {
                    id: 1,
                    label: Label::BUILDING,
                    boxes: vec![Aabb::new([4.0, -1.0, 0.0], [4.3, 1.0, 3.0])],
                    trajectory: Trajectory::Static,
                    present: None,
                },
                SceneObject {
                    id: 2,
                    label: Label::CAR,
                    boxes: vec![Aabb::new([8.0, -1.0, 0.3], [12.0, 1.0, 1.8])],
                    trajectory: Trajectory::Static,
                    present: Some((0, 5)),
                },
            ],
        };
        let o = Vec3::new(0.0, 0.0, 1.0);
        let (s, l) = scene.cast(&o, &Vec3::x(), 0, 100.0).unwrap();
        assert_eq!((s, l), (4.0, Label::BUILDING));
        let mut noocc = scene.clone();
        noocc.objects.remove(0);
        assert_eq!(noocc.cast(&o, &Vec3::x(), 0, 100.0).unwrap(), (8.0, Label::CAR));
        assert!(noocc.cast(&o, &Vec3::x(), 5, 100.0).is_none());
        let down = Vec3::new(1.0, 0.0, -1.0).normalize();
        let (s, l) = noocc.cast(&o, &down, 0, 100.0).unwrap();
        assert_eq!(l, Label::ROAD);
        assert!((s - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(scene.label_at(&Vec3::new(10.0, 0.0, 1.0), 3), Some(Label::CAR));
        assert_eq!(scene.label_at(&Vec3::new(10.0, 0.0, 1.0), 7), None);
        assert_eq!(scene.voxel_truth(&Vec3::new(9.7, 0.0, 1.5), 0.6, 0), Some(Label::CAR));
        assert_eq!(scene.voxel_truth(&Vec3::new(9.7, 0.0, 1.8), 0.6, 0), None);
        assert_eq!(
            scene.voxel_truth(&Vec3::new(20.0, 0.0, -0.3), 0.6, 0),
            Some(Label::ROAD)
        );
    }
}
