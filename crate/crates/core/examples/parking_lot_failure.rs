//! Three cars parked closer than a voxel apart form one cluster. When the
//! middle one leaves, its empty evidence is shared with its neighbors and
//! removes cells of cars that are still there.

use clustered_ndt::occupancy::UpdateMode;
use clustered_ndt::sim::eval::{occupied_cells, posterior, run_scans, CellRef};
use clustered_ndt::sim::scenario::scenario_parking_lot;
use clustered_ndt::{Config, Label, Mapper};

fn main() -> clustered_ndt::Result<()> {
    let scenario = scenario_parking_lot();
    let mapping = scenario.phase("mapping")?;
    let update = scenario.phase("update")?;
    for mode in [UpdateMode::Baseline, UpdateMode::Clustered] {
        let mut config = Config::default();
        config.occupancy.update_mode = mode;
        let mut mapper = Mapper::new(config)?;
        run_scans(&mut mapper, &scenario, mapping.clone());
        // cells overlapping a car that stays
        let staying: Vec<CellRef> = occupied_cells(mapper.map(), |l| l == Label::CAR)
            .into_iter()
            .filter(|c| {
                let s = mapper.map().submap(c.submap);
                let min = s.cell_min_corner(c.index);
                scenario
                    .scene
                    .voxel_truth(&min, s.voxel_size(), update.end - 1)
                    .is_some()
            })
            .collect();
        let mut removed = std::collections::BTreeSet::<CellRef>::new();
        for t in update.clone() {
            mapper.insert_scan(&scenario.scan(t));
            removed.extend(staying.iter().filter(|&&c| posterior(mapper.map(), c) < 0.5));
        }
        println!(
            "{mode:>9}: {} cells of still-parked cars, {} wrongly cleared during the update",
            staying.len(),
            removed.len()
        );
    }
    Ok(())
}
