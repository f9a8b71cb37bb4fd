//! Writes a few simulated scans as a KITTI-style sequence, reads them back
//! and counts points per semantic class.

use std::collections::BTreeMap;

use clustered_ndt::io::{instance_id, read_labels, semantic_class, DynamicLabelSet, Sequence, SequenceWriter};
use clustered_ndt::sim::scenario::scenario_high_dynamics;
use clustered_ndt::sim::to_sensor_frame;

fn main() -> clustered_ndt::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join("clustered-ndt-kitti-io"));
    let scenario = scenario_high_dynamics();
    let mut w = SequenceWriter::create(&dir)?;
    for t in 20..25 {
        let pose = scenario.pose(t);
        let scan = scenario.scan(t);
        // instance ids in the upper 16 bits survive the round trip
        let raw: Vec<u32> = scan.points.iter().map(|p| (7 << 16) | u32::from(p.label.0)).collect();
        w.push(pose.to_isometry(), &to_sensor_frame(&scan, &pose), &raw)?;
    }
    w.finish()?;

    let seq = Sequence::open(&dir)?;
    println!("{}: {} scans", dir.display(), seq.len());
    let raw = read_labels(&seq.label_path(0))?;
    println!(
        "scan 0: first raw label {:#010x} -> class {}, instance {}",
        raw[0],
        semantic_class(raw[0]).0,
        instance_id(raw[0])
    );

    let dynamic = DynamicLabelSet::default();
    let calib = nalgebra::Isometry3::identity();
    for k in 0..seq.len() {
        let scan = seq.world_scan(k, &calib)?;
        let mut per_class: BTreeMap<u16, usize> = BTreeMap::new();
        for p in &scan.points {
            *per_class.entry(p.label.0).or_default() += 1;
        }
        let moving: usize = per_class
            .iter()
            .filter(|(l, _)| dynamic.contains(clustered_ndt::Label(**l)))
            .map(|(_, n)| n)
            .sum();
        println!(
            "scan {k}: {} points, {moving} on moving objects, classes {per_class:?}",
            scan.points.len()
        );
    }
    Ok(())
}
