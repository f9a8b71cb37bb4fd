//! Maps a corridor, then localizes a new drive through it from a ±20 m,
//! any-heading initial cloud. Also compares baseline and clustered maps of
//! the same corridor with carts driving through during mapping.

use clustered_ndt::localization::LocalizationConfig;
use clustered_ndt::occupancy::UpdateMode;
use clustered_ndt::sim::eval::{localize_scenario, run_scans};
use clustered_ndt::sim::scenario::{scenario_corridor, scenario_dynamic_corridor};
use clustered_ndt::{Config, Mapper};

fn main() -> clustered_ndt::Result<()> {
    let cfg = LocalizationConfig::default();

    let scenario = scenario_corridor();
    let phase = scenario.phase("localization")?;
    let mut mapper = Mapper::new(Config::default())?;
    run_scans(&mut mapper, &scenario, scenario.phase("mapping")?);
    println!("static corridor map: {} cells", mapper.map().cell_count());
    for seed in 0..5 {
        let run = localize_scenario(mapper.map(), &scenario, phase.start..phase.start + 50, &cfg, seed)?;
        let err = run.errors();
        let settled = (0..err.len()).find(|&k| err[k..].iter().all(|&e| e < 0.6));
        println!(
            "  seed {seed}: error {:.2} m at step 1, {:.2} m at step 50, below 0.6 m from step {}",
            err[0],
            err[49],
            settled.map_or("never".to_string(), |k| (k + 1).to_string())
        );
    }

    let scenario = scenario_dynamic_corridor();
    let phase = scenario.phase("localization")?;
    for mode in [UpdateMode::Baseline, UpdateMode::Clustered] {
        let mut config = Config::default();
        config.occupancy.update_mode = mode;
        let mut mapper = Mapper::new(config)?;
        run_scans(&mut mapper, &scenario, scenario.phase("mapping")?);
        let mut sum = 0.0;
        for seed in 0..3 {
            let run = localize_scenario(mapper.map(), &scenario, phase.start..phase.start + 50, &cfg, seed)?;
            sum += run.ate(25..50)?;
        }
        println!(
            "dynamic corridor, {mode} map: mean ATE over steps 26-50 {:.3} m",
            sum / 3.0
        );
    }
    Ok(())
}
