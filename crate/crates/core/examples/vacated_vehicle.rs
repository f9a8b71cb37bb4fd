//! A parked car is mapped, then drives away. Compares how many update scans
//! each mode needs until every former car cell reads free.

use clustered_ndt::occupancy::UpdateMode;
use clustered_ndt::sim::eval::{free_in_truth, occupied_cells, run_scans, scans_until_cleared};
use clustered_ndt::sim::scenario::scenario_vacated_vehicle;
use clustered_ndt::{Config, Label, Mapper};

fn main() -> clustered_ndt::Result<()> {
    let scenario = scenario_vacated_vehicle();
    let mapping = scenario.phase("mapping")?;
    let update = scenario.phase("update")?;
    for eta in [0.2, 0.5] {
        for mode in [UpdateMode::Baseline, UpdateMode::Clustered] {
            let mut config = Config::default();
            config.sensor.eta = eta;
            config.occupancy.update_mode = mode;
            let mut mapper = Mapper::new(config)?;
            run_scans(&mut mapper, &scenario, mapping.clone());
            let car: Vec<_> = occupied_cells(mapper.map(), |l| l == Label::CAR)
                .into_iter()
                .filter(|&c| free_in_truth(mapper.map(), &scenario, c, update.clone()))
                .collect();
            let n = car.len();
            let cleared = scans_until_cleared(&mut mapper, &scenario, update.clone(), &car);
            let left = car
                .iter()
                .filter(|&&c| clustered_ndt::sim::eval::posterior(mapper.map(), c) >= 0.5)
                .count();
            match cleared {
                Some(k) => println!("eta={eta} {mode:>9}: {n} car cells, all free after {k} scans"),
                None => println!(
                    "eta={eta} {mode:>9}: {n} car cells, {left} still occupied after {} scans",
                    update.end - update.start
                ),
            }
        }
    }
    Ok(())
}
