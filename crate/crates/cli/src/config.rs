//! TOML config files for the simulator and the probe.
//!
//! ```toml
//! # sim.toml
//! [sim]
//! initiation_range = 12.0
//! default_altitude = 50.0
//! avoid_delta = 10.0
//! key_bits = 1024
//!
//! [[drones]]
//! id = "amzn-17"
//! speed = 2.0
//! points = [[0, 0], [20, 0], [40, 0]]
//!
//! [[drones]]
//! id = "ups-04"
//! speed = 2.5
//! path_file = "routes/ups-04.route"
//! ```
//!
//! ```toml
//! # probe.toml
//! [probe]
//! x_min = 0
//! x_max = 100
//! y_min = 0
//! y_max = 100
//! spacing = 5
//! seg_len = 10
//! key_bits = 2048
//!
//! [victim]
//! points = [[10, 0], [60, 80]]
//! ```

use std::path::{Path as StdPath, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use privpath_core::{DroneSpec, FlightConfig, Path, Point, ProbeConfig};

use crate::pathfile::load_path;

#[derive(Debug, Deserialize)]
struct SimFile {
    sim: SimSection,
    drones: Vec<DroneSection>,
}

#[derive(Debug, Deserialize)]
struct SimSection {
    initiation_range: f64,
    default_altitude: f64,
    avoid_delta: f64,
    key_bits: Option<u64>,
}

#[derive(Debug, Deserialize)]
struct DroneSection {
    id: String,
    speed: f64,
    points: Option<Vec<[i64; 2]>>,
    path_file: Option<PathBuf>,
}

fn points_to_path(points: &[[i64; 2]]) -> Result<Path> {
    let pts = points
        .iter()
        .map(|&[x, y]| Ok(Point::new(x, y)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(Path::new(pts)?)
}

pub fn load_sim_config(file: &StdPath) -> Result<(Vec<DroneSpec>, FlightConfig)> {
    let text = std::fs::read_to_string(file)
        .with_context(|| format!("reading sim config {}", file.display()))?;
    let parsed: SimFile = toml::from_str(&text).context("parsing sim config")?;

    let base = file.parent().unwrap_or_else(|| StdPath::new("."));
    let mut drones = Vec::new();
    for d in &parsed.drones {
        let path = match (&d.points, &d.path_file) {
            (Some(points), None) => points_to_path(points)?,
            (None, Some(rel)) => load_path(&base.join(rel))?,
            _ => bail!("drone {}: set exactly one of `points` or `path_file`", d.id),
        };
        drones.push(DroneSpec {
            id: d.id.clone(),
            path,
            speed: d.speed,
        });
    }
    let cfg = FlightConfig {
        initiation_range: parsed.sim.initiation_range,
        default_altitude: parsed.sim.default_altitude,
        avoid_delta: parsed.sim.avoid_delta,
        key_bits: parsed.sim.key_bits.unwrap_or(1024),
    };
    Ok((drones, cfg))
}

#[derive(Debug, Deserialize)]
struct ProbeFile {
    probe: ProbeSection,
    victim: VictimSection,
}

#[derive(Debug, Deserialize)]
struct ProbeSection {
    x_min: i64,
    x_max: i64,
    y_min: i64,
    y_max: i64,
    spacing: i64,
    seg_len: i64,
    key_bits: Option<u64>,
}

#[derive(Debug, Deserialize)]
struct VictimSection {
    points: Option<Vec<[i64; 2]>>,
    path_file: Option<PathBuf>,
}

pub fn load_probe_config(file: &StdPath) -> Result<(ProbeConfig, Path)> {
    let text = std::fs::read_to_string(file)
        .with_context(|| format!("reading probe config {}", file.display()))?;
    let parsed: ProbeFile = toml::from_str(&text).context("parsing probe config")?;
    let base = file.parent().unwrap_or_else(|| StdPath::new("."));
    let victim = match (&parsed.victim.points, &parsed.victim.path_file) {
        (Some(points), None) => points_to_path(points)?,
        (None, Some(rel)) => load_path(&base.join(rel))?,
        _ => bail!("victim: set exactly one of `points` or `path_file`"),
    };
    let cfg = ProbeConfig {
        x_min: parsed.probe.x_min,
        x_max: parsed.probe.x_max,
        y_min: parsed.probe.y_min,
        y_max: parsed.probe.y_max,
        spacing: parsed.probe.spacing,
        seg_len: parsed.probe.seg_len,
        key_bits: parsed.probe.key_bits.unwrap_or(2048),
    };
    Ok((cfg, victim))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sim_config_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_path = dir.path().join("sim.toml");
        std::fs::write(
            &cfg_path,
            r#"
[sim]
initiation_range = 9.0
default_altitude = 40.0
avoid_delta = 5.0

[[drones]]
id = "a"
speed = 2.0
points = [[0, 0], [10, 10]]

[[drones]]
id = "b"
speed = 1.0
path_file = "b.route"
"#,
        )
        .unwrap();
        std::fs::write(dir.path().join("b.route"), "0,10\n10,0\n").unwrap();
        let (drones, cfg) = load_sim_config(&cfg_path).unwrap();
        assert_eq!(drones.len(), 2);
        assert_eq!(drones[1].path.points().len(), 2);
        assert_eq!(cfg.key_bits, 1024);
        assert_eq!(cfg.initiation_range, 9.0);
    }

    #[test]
    fn probe_config_rejects_double_path_source() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_path = dir.path().join("probe.toml");
        std::fs::write(
            &cfg_path,
            r#"
[probe]
x_min = 0
x_max = 10
y_min = 0
y_max = 10
spacing = 2
seg_len = 5

[victim]
points = [[0, 0], [10, 10]]
path_file = "also.route"
"#,
        )
        .unwrap();
        assert!(load_probe_config(&cfg_path).is_err());
    }
}
