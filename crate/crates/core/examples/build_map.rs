//! The file-based workflow: simulate a mapping and an update sequence, build
//! a map, update it, then report dynamics and the per-cell difference.

use clustered_ndt::commands::{
    cmd_build_map, cmd_compare, cmd_eval_dynamics, cmd_simulate, cmd_update_map, SceneSource,
};
use clustered_ndt::io::DynamicLabelSet;
use clustered_ndt::Config;

fn main() -> clustered_ndt::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join("clustered-ndt-build-map"));
    std::fs::create_dir_all(&dir).map_err(|e| clustered_ndt::Error::Input(e.to_string()))?;
    let config = Config::default();
    let scene = SceneSource::Builtin("vacated_vehicle".into());

    cmd_simulate(&config, &scene, Some("mapping"), None, &dir.join("mapping"))?;
    cmd_simulate(&config, &scene, Some("update"), None, &dir.join("update"))?;
    let built = cmd_build_map(&config, &dir.join("mapping"), None, &dir.join("before.cndt"))?;
    println!("build-map: {}", built.summary);
    let updated = cmd_update_map(
        &config,
        &dir.join("before.cndt"),
        &dir.join("update"),
        Some(0..10),
        &dir.join("after.cndt"),
    )?;
    println!("update-map: {}", updated.summary);
    let eval = cmd_eval_dynamics(
        &config,
        &dir.join("after.cndt"),
        None,
        &DynamicLabelSet::default(),
        &dir.join("density.csv"),
    )?;
    println!("eval-dynamics: {}", eval.summary);
    let diff = cmd_compare(
        &config,
        &dir.join("before.cndt"),
        &dir.join("after.cndt"),
        &dir.join("diff.json"),
    )?;
    let s = &diff.summary;
    println!(
        "compare: {} common cells, {} became free, {} became occupied",
        s["common"], s["became_free"], s["became_occupied"]
    );
    println!("artifacts in {}", dir.display());
    Ok(())
}
