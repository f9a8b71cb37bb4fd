//! Experiment commands behind the command-line front end. Each command writes
//! its artifacts plus a [`RunManifest`] at `<out>.manifest.json` (or
//! `<out>/manifest.json` for directory outputs).

use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::io::{
    diff_maps, dynamic_cell_count, read_csv_trajectory, read_map, write_csv_trajectory, write_map_with_manifest,
    DynamicLabelSet, Sequence, SequenceWriter, TrajectoryEstimate,
};
use crate::localization::{ate, localize_sequence, trajectory, AteOptions, Pose2};
use crate::occupancy::UpdateMode;
use crate::pipeline::Mapper;
use crate::sim::scenario::Scenario;
use crate::sim::to_sensor_frame;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    /// The command ran but flagged its result, for example a diverged filter.
    Failed {
        reason: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub mode: UpdateMode,
    pub seed: u64,
    pub config: Config,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    #[serde(flatten)]
    pub status: RunStatus,
    /// Command-specific figures.
    pub summary: serde_json::Value,
}

impl RunManifest {
    fn new(command: &str, config: &Config) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            mode: config.occupancy.update_mode,
            seed: config.seed,
            config: config.clone(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            status: RunStatus::Ok,
            summary: serde_json::Value::Null,
        }
    }

    /// Where the manifest for an artifact at `out` lives.
    pub fn path_for(out: &Path) -> PathBuf {
        if out.is_dir() {
            return out.join("manifest.json");
        }
        let mut s = out.as_os_str().to_owned();
        s.push(".manifest.json");
        PathBuf::from(s)
    }

    pub fn failed(&self) -> bool {
        matches!(self.status, RunStatus::Failed { .. })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::format(path.display().to_string(), 0, e.to_string()))
    }

    fn finish(mut self, out: &Path, summary: impl Serialize) -> Result<Self> {
        self.summary = serde_json::to_value(summary).expect("summary serializes");
        self.write(&Self::path_for(out))?;
        Ok(self)
    }
}

fn manifest_name(out: &Path) -> String {
    RunManifest::path_for(out)
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn frames(seq: &Sequence, range: Option<Range<usize>>) -> Result<Range<usize>> {
    let r = range.unwrap_or(0..seq.len());
    if r.start > r.end || r.end > seq.len() {
        return Err(Error::Input(format!(
            "frames {}..{} out of range for a {}-scan sequence",
            r.start,
            r.end,
            seq.len()
        )));
    }
    Ok(r)
}

fn integrate(mapper: &mut Mapper, seq: &Sequence, range: Range<usize>, config: &Config) -> Result<()> {
    let calib = config.calibration.to_isometry()?;
    for k in range {
        mapper.insert_scan(&seq.world_scan(k, &calib)?);
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct MapSummary {
    scans: usize,
    scans_integrated: u64,
    cells: usize,
    occupied_cells: usize,
    submaps: usize,
}

fn map_summary(mapper: &Mapper, scans: usize) -> MapSummary {
    let map = mapper.map();
    MapSummary {
        scans,
        scans_integrated: mapper.scans_integrated(),
        cells: map.cell_count(),
        occupied_cells: map
            .submaps()
            .iter()
            .flat_map(|s| s.iter())
            .filter(|(_, c)| c.is_occupied())
            .count(),
        submaps: map.submaps().len(),
    }
}

/// Builds a map from a sequence directory.
pub fn cmd_build_map(config: &Config, scans: &Path, range: Option<Range<usize>>, out: &Path) -> Result<RunManifest> {
    config.validate()?;
    let seq = Sequence::open(scans)?;
    let range = frames(&seq, range)?;
    let n = range.len();
    let mut mapper = Mapper::new(config.clone())?;
    integrate(&mut mapper, &seq, range, config)?;
    write_map_with_manifest(out, mapper.map(), mapper.scans_integrated(), Some(&manifest_name(out)))?;
    let mut m = RunManifest::new("build-map", config);
    m.inputs.push(scans.to_path_buf());
    m.outputs = vec![out.to_path_buf(), crate::io::sidecar_path(out)];
    m.finish(out, map_summary(&mapper, n))
}

/// Continues a map with a later sequence. The map's own lattice settings
/// replace `config.map`.
pub fn cmd_update_map(
    config: &Config,
    map: &Path,
    scans: &Path,
    range: Option<Range<usize>>,
    out: &Path,
) -> Result<RunManifest> {
    let loaded = read_map(map)?;
    let mut config = config.clone();
    config.map = loaded.map.config().clone();
    config.validate()?;
    let seq = Sequence::open(scans)?;
    let range = frames(&seq, range)?;
    let n = range.len();
    let mut mapper = Mapper::from_parts(config.clone(), loaded.map, loaded.scans_integrated)?;
    integrate(&mut mapper, &seq, range, &config)?;
    write_map_with_manifest(out, mapper.map(), mapper.scans_integrated(), Some(&manifest_name(out)))?;
    let mut m = RunManifest::new("update-map", &config);
    m.inputs = vec![map.to_path_buf(), scans.to_path_buf()];
    m.outputs = vec![out.to_path_buf(), crate::io::sidecar_path(out)];
    m.finish(out, map_summary(&mapper, n))
}

/// One row of the dynamics report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub map: String,
    pub seq_len: u64,
    pub dynamic_labels: String,
    pub dynamic_cells: usize,
    pub occupied_cells: usize,
    pub cells: usize,
    pub density: f64,
}

/// Dynamic cell density of a map file. `seq_len` defaults to the number of
/// scans the map integrated.
pub fn cmd_eval_dynamics(
    config: &Config,
    map: &Path,
    seq_len: Option<u64>,
    labels: &DynamicLabelSet,
    out: &Path,
) -> Result<RunManifest> {
    let loaded = read_map(map)?;
    let seq_len = seq_len.unwrap_or(loaded.scans_integrated);
    if seq_len == 0 {
        return Err(Error::Input("sequence length must be > 0".into()));
    }
    let m = &loaded.map;
    let dynamic_cells = dynamic_cell_count(m, labels);
    let row = DensityRow {
        map: map
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        seq_len,
        dynamic_labels: labels.to_string(),
        dynamic_cells,
        occupied_cells: m
            .submaps()
            .iter()
            .flat_map(|s| s.iter())
            .filter(|(_, c)| c.is_occupied())
            .count(),
        cells: m.cell_count(),
        density: dynamic_cells as f64 / seq_len as f64,
    };
    let mut w = csv::Writer::from_path(out).map_err(|e| csv_error(out, e))?;
    w.serialize(&row).map_err(|e| csv_error(out, e))?;
    w.flush().map_err(|e| Error::io(out, e))?;
    let mut man = RunManifest::new("eval-dynamics", config);
    man.inputs.push(map.to_path_buf());
    man.outputs.push(out.to_path_buf());
    man.finish(out, row)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::format(path.display().to_string(), 0, format!("{other:?}")),
    }
}

/// Where `cmd_simulate` reads its scene from.
#[derive(Clone, Debug, PartialEq)]
pub enum SceneSource {
    Builtin(String),
    File(PathBuf),
}

impl SceneSource {
    /// A path that exists is a file; anything else names a shipped scenario.
    pub fn parse(s: &str) -> Self {
        if Path::new(s).exists() {
            SceneSource::File(PathBuf::from(s))
        } else {
            SceneSource::Builtin(s.to_string())
        }
    }

    pub fn load(&self) -> Result<Scenario> {
        match self {
            SceneSource::Builtin(name) => Scenario::builtin(name),
            SceneSource::File(p) => Scenario::load(p),
        }
    }
}

#[derive(Debug, Serialize)]
struct SimSummary {
    scenario: String,
    frames: Range<u64>,
    rays_per_scan: usize,
    points: usize,
}

/// Renders a scenario into a sequence directory with ground truth. `phase`
/// restricts the output to one named phase; `seed` replaces the scenario's
/// noise seed.
pub fn cmd_simulate(
    config: &Config,
    scene: &SceneSource,
    phase: Option<&str>,
    seed: Option<u64>,
    out: &Path,
) -> Result<RunManifest> {
    let mut scenario = scene.load()?;
    if let Some(s) = seed {
        scenario.sim.seed = s;
    }
    let range = match phase {
        Some(p) => scenario.phase(p)?,
        None => 0..scenario.duration(),
    };
    let mut w = SequenceWriter::create(out)?;
    let mut points = 0;
    for t in range.clone() {
        let pose = scenario.pose(t);
        let scan = scenario.scan(t);
        let local = to_sensor_frame(&scan, &pose);
        let labels: Vec<u32> = scan.points.iter().map(|p| u32::from(p.label.0)).collect();
        points += local.len();
        w.push(pose.to_isometry(), &local, &labels)?;
    }
    let mut outputs = vec![out.join("velodyne"), out.join("labels")];
    outputs.extend(w.finish()?);
    let scenario_copy = out.join("scenario.json");
    let text = serde_json::to_string_pretty(&scenario).expect("scenario serializes");
    std::fs::write(&scenario_copy, text).map_err(|e| Error::io(&scenario_copy, e))?;
    outputs.push(scenario_copy);
    let mut config = config.clone();
    config.seed = scenario.sim.seed;
    let mut m = RunManifest::new("simulate", &config);
    if let SceneSource::File(p) = scene {
        m.inputs.push(p.clone());
    }
    m.outputs = outputs;
    let summary = SimSummary {
        scenario: scenario.name.clone(),
        frames: range,
        rays_per_scan: scenario.sim.rays_per_scan(),
        points,
    };
    m.finish(out, summary)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub manifest: String,
    pub steps: usize,
    pub ate: f64,
    pub ate_aligned: f64,
    pub final_error: f64,
    pub diverged_steps: Vec<usize>,
    pub trajectory: String,
}

/// Localizes a sequence against a map. Odometry is taken from consecutive
/// ground-truth poses; particles start in the init box around the first one.
/// The report goes to `out`, the estimated trajectory to
/// `<out stem>.trajectory.csv`.
pub fn cmd_localize(
    config: &Config,
    map: &Path,
    scans: &Path,
    truth: Option<&Path>,
    steps: Option<usize>,
    out: &Path,
) -> Result<RunManifest> {
    config.validate()?;
    let loaded = read_map(map)?;
    let seq = Sequence::open(scans)?;
    let gt = match truth {
        Some(p) => read_csv_trajectory(p)?,
        None => seq.ground_truth()?,
    };
    let n = steps.unwrap_or(seq.len()).min(seq.len());
    if gt.len() < n || n == 0 {
        return Err(Error::Input(format!("need {n} ground-truth poses, have {}", gt.len())));
    }
    let calib = config.calibration.to_isometry()?;
    let truth_planar: Vec<Pose2> = gt.poses()[..n].iter().map(|(_, p)| Pose2::from_isometry(p)).collect();
    let times: Vec<f64> = gt.poses()[..n].iter().map(|(t, _)| *t).collect();
    let odometry: Vec<Pose2> = std::iter::once(Pose2::default())
        .chain(truth_planar.windows(2).map(|w| w[0].between(&w[1])))
        .collect();
    let points = (0..n).map(|k| seq.body_points(k, &calib)).collect::<Result<Vec<_>>>()?;
    let outcomes = localize_sequence(
        &loaded.map,
        &points,
        &odometry,
        &truth_planar[0],
        &config.localization,
        config.seed,
    )?;
    let estimates: Vec<Pose2> = outcomes.iter().map(|o| o.estimate).collect();
    let est = trajectory(&times, &estimates, 0.0)?;
    let truth_traj = TrajectoryEstimate::new(
        times
            .iter()
            .copied()
            .zip(truth_planar.iter().map(|p| p.to_isometry(0.0)))
            .collect(),
    )?;
    let unaligned = AteOptions {
        align: false,
        ..AteOptions::default()
    };
    let traj_path = out.with_extension("trajectory.csv");
    write_csv_trajectory(&traj_path, &est)?;
    let last = n - 1;
    let report = LocalizationReport {
        manifest: manifest_name(out),
        steps: n,
        ate: ate(&est, &truth_traj, &unaligned)?,
        ate_aligned: ate(&est, &truth_traj, &AteOptions::default())?,
        final_error: (estimates[last].x - truth_planar[last].x).hypot(estimates[last].y - truth_planar[last].y),
        diverged_steps: outcomes
            .iter()
            .enumerate()
            .filter(|(_, o)| o.diverged)
            .map(|(k, _)| k)
            .collect(),
        trajectory: traj_path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
    };
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    std::fs::write(out, text).map_err(|e| Error::io(out, e))?;
    let mut m = RunManifest::new("localize", config);
    m.inputs = vec![map.to_path_buf(), scans.to_path_buf()];
    m.inputs.extend(truth.map(Path::to_path_buf));
    m.outputs = vec![out.to_path_buf(), traj_path];
    if !report.diverged_steps.is_empty() {
        m.status = RunStatus::Failed {
            reason: format!("filter diverged at steps {:?}", report.diverged_steps),
        };
    }
    m.finish(out, report)
}

/// Per-cell comparison of two map files, written as JSON.
pub fn cmd_compare(config: &Config, a: &Path, b: &Path, out: &Path) -> Result<RunManifest> {
    let ma = read_map(a)?;
    let mb = read_map(b)?;
    if ma.map.config().voxel_size != mb.map.config().voxel_size {
        return Err(Error::Input(format!(
            "voxel sizes differ: {} vs {}",
            ma.map.config().voxel_size,
            mb.map.config().voxel_size
        )));
    }
    let diff = diff_maps(&ma.map, &mb.map);
    let mut body = serde_json::to_value(&diff).expect("diff serializes");
    body["manifest"] = manifest_name(out).into();
    let text = serde_json::to_string_pretty(&body).expect("diff serializes");
    std::fs::write(out, text).map_err(|e| Error::io(out, e))?;
    let mut m = RunManifest::new("compare", config);
    m.inputs = vec![a.to_path_buf(), b.to_path_buf()];
    m.outputs.push(out.to_path_buf());
    m.finish(out, diff)
}
