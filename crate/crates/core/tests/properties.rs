use std::collections::BTreeSet;
use std::f64::consts::TAU;
use std::sync::OnceLock;

use clustered_ndt::clustering::{membership_from_counts, ClusterConfig, ClusterRegistry, MembershipMode};
use clustered_ndt::grid::{CellIndex, GaussianStats, Label, MapConfig, NdtCell, SubMap};
use clustered_ndt::io::{
    decode_map, encode_map, parse_csv_trajectory, parse_kitti_poses, parse_labels, parse_scan_bin,
};
use clustered_ndt::io::{Sequence, SequenceWriter};
use clustered_ndt::localization::{
    init_particles, mcl_step, scan_log_likelihood, LikelihoodField, LocalizationConfig, MclMap, ParticleSet, Pose2,
};
use clustered_ndt::occupancy::{evidence_logodds, latent_logodds_delta, posterior, OccupancyConfig, UpdateMode};
use clustered_ndt::sensor::{
    collect_evidence, pass_through_likelihood, traverse_ray, EvidenceDelta, LabeledPoint, LabeledScan, SensorConfig,
};
use clustered_ndt::sim::eval::{planar, run_scans};
use clustered_ndt::sim::scenario::scenario_vacated_vehicle;
use clustered_ndt::sim::sensor::to_sensor_frame;
use clustered_ndt::{Config, MapStack, Mapper, Vec3};
use nalgebra::{Isometry3, Translation3, UnitQuaternion};
use proptest::prelude::*;

fn grid() -> SubMap {
    SubMap::new(Vec3::zeros(), Vec3::new(12.0, 12.0, 12.0), 0.6)
}

fn inner_point() -> impl Strategy<Value = Vec3> {
    (0.05..11.95f64, 0.05..11.95f64, 0.05..11.95f64).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

/// Does the segment pass within `eps` of the voxel box?
fn segment_touches(g: &SubMap, idx: CellIndex, a: &Vec3, b: &Vec3, eps: f64) -> bool {
    let lo = g.cell_min_corner(idx).add_scalar(-eps);
    let hi = lo.add_scalar(g.voxel_size() + 2.0 * eps);
    let d = b - a;
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for k in 0..3 {
        if d[k].abs() < 1e-15 {
            if a[k] < lo[k] || a[k] > hi[k] {
                return false;
            }
            continue;
        }
        let (mut u, mut v) = ((lo[k] - a[k]) / d[k], (hi[k] - a[k]) / d[k]);
        if u > v {
            std::mem::swap(&mut u, &mut v);
        }
        t0 = t0.max(u);
        t1 = t1.min(v);
    }
    t0 <= t1
}

fn scan_from(origin: Vec3, ends: &[Vec3]) -> LabeledScan {
    LabeledScan {
        origin,
        points: ends
            .iter()
            .map(|&position| LabeledPoint {
                position,
                label: Label(40),
            })
            .collect(),
        timestamp: 0,
    }
}

/// A grid with some fitted cells so that pass-throughs are classified.
fn populated_grid(points: &[Vec3]) -> SubMap {
    let mut g = grid();
    let floor = g.cov_floor();
    let mut by_cell: std::collections::BTreeMap<CellIndex, Vec<Vec3>> = Default::default();
    for p in points {
        by_cell.entry(g.cell_index(p)).or_default().push(*p);
    }
    for (idx, pts) in by_cell {
        g.get_or_insert(idx).add_points(&pts, floor);
    }
    g
}

fn labeled_grid(cells: &[(CellIndex, u16)]) -> SubMap {
    let mut g = SubMap::new(Vec3::zeros(), Vec3::new(10.0, 10.0, 10.0), 1.0);
    for &(i, l) in cells {
        let c = g.get_or_insert(i);
        c.add_labels([Label(l)]);
        c.logodds = 2.0;
    }
    g
}

fn label_cells() -> impl Strategy<Value = Vec<(CellIndex, u16)>> {
    prop::collection::btree_map((0..10i32, 0..10i32, 0..10i32), 1..3u16, 1..300).prop_map(|m| {
        m.into_iter()
            .map(|((x, y, z), l)| (CellIndex::new(x, y, z), l))
            .collect()
    })
}

fn partition(reg: &ClusterRegistry, cells: &[(CellIndex, u16)]) -> BTreeSet<Vec<CellIndex>> {
    let mut groups: std::collections::BTreeMap<_, Vec<CellIndex>> = Default::default();
    for &(i, _) in cells {
        if let Some(c) = reg.cluster_of(i) {
            groups.entry(c).or_default().push(i);
        }
    }
    groups.into_values().collect()
}

struct Mapped {
    map: MapStack,
    field: LikelihoodField,
    scans: Vec<(Pose2, Vec<Vec3>)>,
}

fn mapped() -> &'static Mapped {
    static M: OnceLock<Mapped> = OnceLock::new();
    M.get_or_init(|| {
        let scenario = scenario_vacated_vehicle();
        let mut m = Mapper::new(Config::default()).unwrap();
        run_scans(&mut m, &scenario, 0..36);
        let map = m.map().clone();
        let field = LikelihoodField::new(&map, LocalizationConfig::default().likelihood_sigma);
        let scans = (0..36)
            .map(|t| {
                let pose = scenario.pose(t);
                (planar(&pose), to_sensor_frame(&scenario.scan(t), &pose))
            })
            .collect();
        Mapped { map, field, scans }
    })
}

fn subsample(points: &[Vec3], n: usize) -> Vec<Vec3> {
    let stride = (points.len() / n).max(1);
    points.iter().step_by(stride).copied().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn traversal_matches_dense_sampling(a in inner_point(), b in inner_point()) {
        let g = grid();
        let cells = traverse_ray(&g, &a, &b);
        prop_assert_eq!(cells.first().copied(), Some(g.cell_index(&a)));
        prop_assert_eq!(cells.last().copied(), Some(g.cell_index(&b)));
        for w in cells.windows(2) {
            let d = (w[0].ix - w[1].ix).abs() + (w[0].iy - w[1].iy).abs() + (w[0].iz - w[1].iz).abs();
            prop_assert_eq!(d, 1, "{:?} -> {:?} is not a face step", w[0], w[1]);
        }
        let set: BTreeSet<_> = cells.iter().copied().collect();
        prop_assert_eq!(set.len(), cells.len(), "a voxel was visited twice");
        let n = ((b - a).norm() / (g.voxel_size() / 100.0)).ceil() as usize;
        for k in 0..=n {
            let p = a + (b - a) * (k as f64 / n.max(1) as f64);
            let idx = g.cell_index(&p);
            // samples within rounding of a face may land either side
            let near_face = (0..3).any(|ax| {
                let f = (p[ax] / g.voxel_size()).fract();
                !(1e-9..=1.0 - 1e-9).contains(&f)
            });
            prop_assert!(set.contains(&idx) || near_face, "sample {:?} in {:?} missed", p, idx);
        }
        for &idx in &cells {
            prop_assert!(segment_touches(&g, idx, &a, &b, 1e-9), "{:?} is off the segment", idx);
        }
        let mut back = traverse_ray(&g, &b, &a);
        back.reverse();
        prop_assert_eq!(back, cells);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn evidence_is_conserved(
        origin in inner_point(),
        ends in prop::collection::vec(inner_point(), 1..80),
        map_points in prop::collection::vec(inner_point(), 0..400),
        far in prop::collection::vec((20.0..40.0f64, 0.0..TAU), 0..10),
    ) {
        let g = populated_grid(&map_points);
        let mut all = ends.clone();
        all.extend(far.iter().map(|&(r, a)| origin + Vec3::new(r * a.cos(), r * a.sin(), 0.0)));
        let scan = scan_from(origin, &all);
        let cfg = SensorConfig::default();
        let mut delta = EvidenceDelta::default();
        collect_evidence(&g, &scan, &cfg, &mut delta);
        let s = delta.stats;
        prop_assert_eq!(s.points_total, all.len());
        prop_assert_eq!(s.points_used + s.out_of_range + s.out_of_bounds, s.points_total);
        prop_assert_eq!(delta.total_occ(), s.points_used as f64);
        prop_assert!(delta.total_emp() + delta.total_occ() <= s.cells_traversed as f64);
        prop_assert_eq!(delta.cells.values().map(|e| e.points.len()).sum::<usize>(), s.points_used);
    }

    #[test]
    fn evidence_is_linear_in_repetition(
        origin in inner_point(),
        ends in prop::collection::vec(inner_point(), 1..60),
        map_points in prop::collection::vec(inner_point(), 0..400),
    ) {
        let g = populated_grid(&map_points);
        let scan = scan_from(origin, &ends);
        let cfg = SensorConfig::default();
        let mut once = EvidenceDelta::default();
        collect_evidence(&g, &scan, &cfg, &mut once);
        let mut twice = EvidenceDelta::default();
        collect_evidence(&g, &scan, &cfg, &mut twice);
        collect_evidence(&g, &scan, &cfg, &mut twice);
        prop_assert_eq!(once.len(), twice.len());
        let occ = OccupancyConfig::default();
        for (idx, e) in &once.cells {
            let e2 = &twice.cells[idx];
            prop_assert_eq!(2.0 * e.occ, e2.occ);
            prop_assert_eq!(2.0 * e.emp, e2.emp);
            let (l1, l2) = (evidence_logodds(e, &cfg, &occ), evidence_logodds(e2, &cfg, &occ));
            prop_assert!((2.0 * l1 - l2).abs() <= 1e-12 * l2.abs().max(1.0));
        }
    }

    #[test]
    fn pass_through_ignores_direction_scale(
        pts in prop::collection::vec((-0.3..0.3f64, -0.3..0.3f64, -0.3..0.3f64), 3..30),
        origin in (-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64),
        dir in (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64),
        scale in 0.01..100.0f64,
        t_max in 0.1..2.0f64,
    ) {
        let d = Vec3::new(dir.0, dir.1, dir.2);
        prop_assume!(d.norm() > 1e-3);
        let mut cell = NdtCell::new(1e-3 * 0.36);
        let pts: Vec<Vec3> = pts.into_iter().map(|(x, y, z)| Vec3::new(x, y, z)).collect();
        cell.add_points(&pts, 1e-3 * 0.36);
        let o = Vec3::new(origin.0, origin.1, origin.2);
        let a = pass_through_likelihood(&cell, &o, &d, t_max);
        let b = pass_through_likelihood(&cell, &o, &(d * scale), t_max / scale);
        prop_assert!((a - b).abs() <= 1e-9, "{} vs {}", a, b);
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn zero_eta_gives_zero_weight(occ_n in 0.0..100.0f64, emp_n in 0.0..100.0f64) {
        let sensor = SensorConfig { eta: 0.0, ..SensorConfig::default() };
        let ev = clustered_ndt::sensor::CellEvidence { occ: occ_n, emp: emp_n, ..Default::default() };
        prop_assert_eq!(evidence_logodds(&ev, &sensor, &OccupancyConfig::default()), 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn posterior_is_monotone(a in -50.0..50.0f64, b in -50.0..50.0f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(posterior(lo) <= posterior(hi));
        prop_assert!((0.0..=1.0).contains(&posterior(a)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn growth_keeps_a_partition_and_is_idempotent(cells in label_cells(), order in any::<u64>(), batches in 1usize..5) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut g = labeled_grid(&cells);
        let mut reg = ClusterRegistry::new(ClusterConfig::default());
        let mut seed_cells: Vec<CellIndex> = cells.iter().map(|c| c.0).collect();
        seed_cells.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(order));
        let chunk = seed_cells.len().div_ceil(batches);
        for part in seed_cells.chunks(chunk) {
            reg.seed_clusters(&mut g, part);
            reg.region_grow(&mut g);
        }
        prop_assert!(reg.check_invariants(&g).is_ok(), "{:?}", reg.check_invariants(&g));
        let first = partition(&reg, &cells);
        prop_assert_eq!(first.iter().map(Vec::len).sum::<usize>(), cells.len());
        prop_assert_eq!(reg.assigned_cells(), cells.len());
        let again = reg.region_grow(&mut g);
        prop_assert_eq!(again.merges, 0);
        prop_assert_eq!(again.splits, 0);
        prop_assert_eq!(partition(&reg, &cells), first);
    }

    #[test]
    fn cluster_aggregation_equals_pairwise_sum(
        cells in label_cells(),
        counts in prop::collection::vec((0.0..30.0f64, 0.0..30.0f64), 300),
        hits in prop::collection::vec(((0..12i32, 0..12i32, 0..12i32), 0.0..5.0f64, 0.0..5.0f64), 1..80),
    ) {
        let mut g = labeled_grid(&cells);
        for ((i, _), (o, e)) in cells.iter().zip(&counts) {
            let c = g.get_mut(*i).unwrap();
            c.evidence_occ = *o;
            c.evidence_emp = *e;
        }
        let mut reg = ClusterRegistry::new(ClusterConfig::default());
        let all: Vec<CellIndex> = cells.iter().map(|c| c.0).collect();
        reg.seed_clusters(&mut g, &all);
        reg.region_grow(&mut g);
        reg.update_memberships(&mut g, all.iter().copied());
        let mut delta = EvidenceDelta::default();
        for ((x, y, z), o, e) in hits {
            let ev = delta.cells.entry(CellIndex::new(x, y, z)).or_default();
            ev.occ += o;
            ev.emp += e;
        }
        let (sensor, occ) = (SensorConfig::default(), OccupancyConfig::default());
        let w = reg.recover_latents(&g);
        let agg = w.logodds_deltas(&delta, &sensor, &occ);
        let mut targets: BTreeSet<CellIndex> = delta.cells.keys().copied().collect();
        targets.extend(agg.keys().copied());
        for i in targets {
            let pairwise = latent_logodds_delta(i, &w, &delta, &sensor, &occ);
            let got = agg.get(&i).copied().unwrap_or(0.0);
            prop_assert!((got - pairwise).abs() <= 1e-9, "{:?}: {} vs {}", i, got, pairwise);
        }
    }

    #[test]
    fn membership_falls_with_contradicting_evidence(o in 0.0..50.0f64, e in 0.0..20.0f64, co in 1.0..200.0f64, ce in 0.0..50.0f64) {
        // raw-count statistics also grow with the sample size, so only the
        // normalized mode is monotone in the contradicting count
        let n = MembershipMode::Normalized;
        let a = membership_from_counts((o, e), (co, ce), n, 0.5);
        let b = membership_from_counts((o, e + 1.0), (co, ce), n, 0.5);
        prop_assert!((0.0..=1.0).contains(&a));
        if o / (o + e).max(f64::MIN_POSITIVE) <= co / (co + ce) {
            prop_assert!(b <= a + 1e-12, "δ rose from {} to {}", a, b);
        }
        let lit = membership_from_counts((o, e), (co, ce), MembershipMode::Literal, 0.5);
        prop_assert!((0.0..=1.0).contains(&lit));
    }

    #[test]
    fn incremental_gaussian_matches_batch(
        pts in prop::collection::vec((-100.0..100.0f64, -100.0..100.0f64, -10.0..10.0f64), 2..120),
        cuts in prop::collection::vec(1usize..20, 1..10),
    ) {
        let pts: Vec<Vec3> = pts.into_iter().map(|(x, y, z)| Vec3::new(x, y, z)).collect();
        let batch = GaussianStats::from_points(&pts);
        let mut inc = GaussianStats::default();
        let mut rest = &pts[..];
        for c in cuts.iter().cycle() {
            if rest.is_empty() {
                break;
            }
            let k = (*c).min(rest.len());
            inc.add_points(&rest[..k]);
            rest = &rest[k..];
        }
        prop_assert!((batch.mean - inc.mean).abs().max() <= 1e-9);
        prop_assert!((batch.covariance - inc.covariance).abs().max() <= 1e-9 * batch.covariance.abs().max().max(1.0));
    }
}

#[test]
fn membership_sweep_over_empty_count() {
    let mut prev = f64::INFINITY;
    for e in 0..=20 {
        let d = membership_from_counts((0.0, e as f64), (90.0, 10.0), MembershipMode::Normalized, 0.5);
        assert!(d <= prev);
        prev = d;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn large_map_round_trips_bit_exact(seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut map = MapStack::new(MapConfig::default());
        map.activate_for(&Vec3::zeros());
        let g = map.submap_mut(0);
        let floor = g.cov_floor();
        while g.len() < 5000 {
            let idx = CellIndex::new(rng.random_range(-150..150), rng.random_range(-150..150), rng.random_range(-15..15));
            let c = g.cell_center(idx);
            let pts: Vec<Vec3> = (0..rng.random_range(1..6))
                .map(|_| c + Vec3::new(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3)))
                .collect();
            let cell = g.get_or_insert(idx);
            cell.add_points(&pts, floor);
            cell.add_labels([Label(rng.random_range(0..300))]);
            cell.logodds = rng.random_range(-10.0..10.0);
            cell.evidence_occ = rng.random_range(0.0..50.0);
            cell.evidence_emp = rng.random_range(0.0..50.0);
        }
        let bytes = encode_map(&map, 17);
        let back = decode_map(&bytes, "map").unwrap();
        prop_assert_eq!(back.scans_integrated, 17);
        prop_assert_eq!(back.map.cell_count(), 5000);
        prop_assert!(encode_map(&back.map, 17) == bytes);
        for (idx, c) in map.submap(0).iter() {
            let d = back.map.submap(0).get(*idx).unwrap();
            prop_assert_eq!(c.logodds.to_bits(), d.logodds.to_bits());
            prop_assert_eq!(c.mean(), d.mean());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn readers_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..512)) {
        let text = String::from_utf8_lossy(&bytes);
        let _ = decode_map(&bytes, "fuzz");
        let _ = parse_scan_bin(&bytes, "fuzz");
        let _ = parse_labels(&bytes, "fuzz");
        let _ = parse_kitti_poses(&text, "fuzz");
        let _ = parse_csv_trajectory(&text, "fuzz");
    }

    #[test]
    fn corrupted_maps_never_panic(flips in prop::collection::vec((any::<prop::sample::Index>(), any::<u8>()), 1..10), cut in any::<prop::sample::Index>()) {
        static BYTES: OnceLock<Vec<u8>> = OnceLock::new();
        let bytes = BYTES.get_or_init(|| {
            let scenario = scenario_vacated_vehicle();
            let mut m = Mapper::new(Config::default()).unwrap();
            run_scans(&mut m, &scenario, 0..3);
            encode_map(m.map(), 3)
        });
        let mut b = bytes.clone();
        for (i, v) in flips {
            let k = i.index(b.len());
            b[k] = v;
        }
        b.truncate(cut.index(b.len() + 1));
        let _ = decode_map(&b, "fuzz");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn weights_stay_normalized(k in 0usize..36, seed in any::<u64>(), dx in -1.0..1.0f64, dy in -1.0..1.0f64) {
        let m = mapped();
        let (truth, scan) = &m.scans[k];
        let cfg = LocalizationConfig { n_particles: 400, ..LocalizationConfig::default() };
        let mcl = MclMap::new(&m.map, &cfg);
        let mut set = init_particles(&Pose2::new(truth.x + dx, truth.y + dy, truth.yaw), cfg.n_particles, 2.0, seed);
        for _ in 0..3 {
            let out = mcl_step(&mut set, &Pose2::default(), scan, &mcl, &cfg);
            prop_assert!((set.weight_sum() - 1.0).abs() <= 1e-9, "sum {}", set.weight_sum());
            prop_assert!(out.ess >= 1.0 - 1e-9 && out.ess <= cfg.n_particles as f64 + 1e-6);
        }
    }

    #[test]
    fn truth_beats_a_two_meter_offset(k in 0usize..36, angle in 0.0..TAU) {
        let m = mapped();
        let (truth, scan) = &m.scans[k];
        let cfg = LocalizationConfig::default();
        let pts = subsample(scan, 300);
        let off = Pose2::new(truth.x + 2.0 * angle.cos(), truth.y + 2.0 * angle.sin(), truth.yaw);
        let at = scan_log_likelihood(&m.field, truth, &pts, &cfg);
        let away = scan_log_likelihood(&m.field, &off, &pts, &cfg);
        prop_assert!(at >= away, "truth {} vs offset {}", at, away);
    }
}

#[test]
fn zero_noise_filter_stays_at_truth() {
    let m = mapped();
    let cfg = LocalizationConfig {
        n_particles: 64,
        alphas: [0.0; 4],
        jitter_xy: 0.0,
        jitter_yaw: 0.0,
        ..LocalizationConfig::default()
    };
    let mcl = MclMap::new(&m.map, &cfg);
    let mut set = ParticleSet::at(&m.scans[0].0, cfg.n_particles, 1);
    for w in m.scans.windows(2) {
        let odo = w[0].0.between(&w[1].0);
        let out = mcl_step(&mut set, &odo, &w[1].1, &mcl, &cfg);
        let t = w[1].0;
        assert!(!out.diverged);
        assert!((out.estimate.x - t.x).abs() < 1e-9 && (out.estimate.y - t.y).abs() < 1e-9);
        assert!(clustered_ndt::localization::wrap_angle(out.estimate.yaw - t.yaw).abs() < 1e-9);
        assert!((out.ess - cfg.n_particles as f64).abs() < 1e-6);
    }
}

#[test]
fn initial_yaw_is_uniform() {
    // Kolmogorov-Smirnov against U[0, 2π); 1.63/√n is the 1% critical value
    for seed in 0..5 {
        let set = init_particles(&Pose2::default(), 10_000, 20.0, seed);
        let mut yaw: Vec<f64> = set.particles.iter().map(|p| p.pose.yaw / TAU).collect();
        yaw.sort_by(f64::total_cmp);
        let n = yaw.len() as f64;
        let d = yaw
            .iter()
            .enumerate()
            .map(|(i, &u)| (u - i as f64 / n).max((i + 1) as f64 / n - u))
            .fold(0.0, f64::max);
        assert!(d < 1.63 / n.sqrt(), "seed {seed}: D = {d}");
        assert!(set
            .particles
            .iter()
            .all(|p| p.pose.x.abs() <= 20.0 && p.pose.y.abs() <= 20.0));
        assert!((set.weight_sum() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn sequence_pairs_labels_with_points() {
    use rand::{Rng, SeedableRng};
    let dir = tempfile::tempdir().unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(10);
    let mut w = SequenceWriter::create(dir.path()).unwrap();
    let mut written = Vec::new();
    for k in 0..10 {
        let n = rng.random_range(1..200);
        let pts: Vec<Vec3> = (0..n)
            .map(|_| {
                Vec3::new(
                    rng.random_range(-30.0..30.0),
                    rng.random_range(-30.0..30.0),
                    rng.random_range(-2.0..5.0),
                )
            })
            .collect();
        let labels: Vec<u32> = (0..n)
            .map(|_| (rng.random_range(0..50u32) << 16) | rng.random_range(0..260u32))
            .collect();
        let pose = Isometry3::from_parts(
            Translation3::new(k as f64, 0.5 * k as f64, 0.0),
            UnitQuaternion::from_euler_angles(0.0, 0.0, 0.1 * k as f64),
        );
        w.push(pose, &pts, &labels).unwrap();
        written.push((pose, pts, labels));
    }
    w.finish().unwrap();
    let seq = Sequence::open(dir.path()).unwrap();
    assert_eq!(seq.len(), 10);
    for (k, (pose, pts, labels)) in written.iter().enumerate() {
        let got = seq.labeled_points(k).unwrap();
        assert_eq!(got.len(), pts.len());
        for ((g, p), raw) in got.iter().zip(pts).zip(labels) {
            // points are stored as f32
            assert!((g.position - p).abs().max() < 1e-4);
            assert_eq!(g.label, Label((raw & 0xffff) as u16));
        }
        let world = seq.world_scan(k, &Isometry3::identity()).unwrap();
        assert!((world.origin - pose.translation.vector).norm() < 1e-6);
        assert!((world.points[0].position - pose.transform_point(&pts[0].into()).coords).norm() < 1e-3);
    }
}

#[test]
fn update_modes_agree_without_latents() {
    let scenario = scenario_vacated_vehicle();
    let mut cfg = Config::default();
    cfg.occupancy.update_mode = UpdateMode::Baseline;
    let mut a = Mapper::new(cfg.clone()).unwrap();
    cfg.occupancy.update_mode = UpdateMode::Clustered;
    cfg.occupancy.force_identity_latents = true;
    let mut b = Mapper::new(cfg).unwrap();
    run_scans(&mut a, &scenario, 0..10);
    run_scans(&mut b, &scenario, 0..10);
    for (x, y) in a.map().submaps().iter().zip(b.map().submaps()) {
        assert_eq!(x.sorted_indices(), y.sorted_indices());
        for (i, c) in x.iter() {
            assert_eq!(c.logodds, y.get(*i).unwrap().logodds);
        }
    }
}
