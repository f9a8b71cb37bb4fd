//! Dynamic cell density on a busy and a quiet street: occupied cells with a
//! moving-object majority label per scan.

use clustered_ndt::io::{dynamic_cell_density, DynamicLabelSet};
use clustered_ndt::occupancy::UpdateMode;
use clustered_ndt::sim::eval::run_scans;
use clustered_ndt::sim::scenario::{scenario_high_dynamics, scenario_low_dynamics};
use clustered_ndt::{Config, Mapper};

fn main() -> clustered_ndt::Result<()> {
    let dynamic = DynamicLabelSet::default();
    for scenario in [scenario_high_dynamics(), scenario_low_dynamics()] {
        let phase = scenario.phase("mapping")?;
        let mut densities = Vec::new();
        for mode in [UpdateMode::Baseline, UpdateMode::Clustered] {
            let mut config = Config::default();
            config.occupancy.update_mode = mode;
            let mut mapper = Mapper::new(config)?;
            run_scans(&mut mapper, &scenario, phase.clone());
            let d = dynamic_cell_density(mapper.map(), phase.end - phase.start, &dynamic)?;
            densities.push(d);
            println!("{:>14} {mode:>9}: density {d:.3}", scenario.name);
        }
        let change = (densities[1] - densities[0]) / densities[0].max(f64::MIN_POSITIVE);
        println!("{:>14}: clustered vs baseline {:+.1}%", scenario.name, 100.0 * change);
    }
    Ok(())
}
