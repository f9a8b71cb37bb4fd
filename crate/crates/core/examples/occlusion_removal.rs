//! A car is mapped, then leaves while a wall hides part of its former spot
//! from the sensor. Counts former car cells that were never re-observed and
//! are still occupied at the end.

use clustered_ndt::occupancy::UpdateMode;
use clustered_ndt::sim::eval::{free_in_truth, observed_cells, occupied_cells, posterior, run_scans};
use clustered_ndt::sim::scenario::scenario_occluded_vacated;
use clustered_ndt::{Config, Label, Mapper};

fn main() -> clustered_ndt::Result<()> {
    let scenario = scenario_occluded_vacated();
    let mapping = scenario.phase("mapping")?;
    let update = scenario.phase("update")?;
    for mode in [UpdateMode::Baseline, UpdateMode::Clustered] {
        let mut config = Config::default();
        config.occupancy.update_mode = mode;
        let mut mapper = Mapper::new(config)?;
        run_scans(&mut mapper, &scenario, mapping.clone());
        let seen = observed_cells(mapper.map(), &scenario, update.clone());
        let former: Vec<_> = occupied_cells(mapper.map(), |l| l == Label::CAR)
            .into_iter()
            .filter(|&c| free_in_truth(mapper.map(), &scenario, c, update.clone()))
            .collect();
        let hidden: Vec<_> = former.iter().copied().filter(|c| !seen.contains(c)).collect();
        run_scans(&mut mapper, &scenario, update.clone());
        let kept = hidden.iter().filter(|&&c| posterior(mapper.map(), c) > 0.5).count();
        let kept_all = former.iter().filter(|&&c| posterior(mapper.map(), c) > 0.5).count();
        println!(
            "{mode:>9}: {} former car cells, {} never re-observed; occupied at end: {kept_all} total, {kept} hidden",
            former.len(),
            hidden.len()
        );
    }
    Ok(())
}
