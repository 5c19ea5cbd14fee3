//! Flat `key = value` text format for [`ScenarioConfig`].
//!
//! ```text
//! # comments start with '#'
//! scenario_id = 1
//! rsu_position = 0, 0, 10          # or `none`
//! vehicle_start = 1.6, -70, 1.5
//! vehicle_end = 1.6, 70, 1.5
//! bicycle_start = -70, -7, 1
//! bicycle_end = 70, -7, 1
//! vehicle_speed = 14
//! bicycle_speed = 4
//! measurement_interval = 0.1
//! ground_reflection_coeff = -0.5, 0  # re, im
//! wall_reflection_coeff = -0.6, 0
//! building = 45, 45, 15, 25, 25, 15  # center xyz, half extents xyz (repeatable)
//! ```
//!
//! `scenario_id` is required; every other key overrides the corresponding built-in
//! scenario value. If any `building` line is present the building list is replaced.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::geometry::{Pose, Vec3};
use crate::propagation::{build_scenario, BuildingBox, ScenarioConfig};
use crate::{Error, Result};

fn vec3(v: Vec3) -> String {
    format!("{}, {}, {}", v.x, v.y, v.z)
}

fn complex(c: Complex64) -> String {
    format!("{}, {}", c.re, c.im)
}

/// Serializes a scenario; `from_kv_str(to_kv_string(c))` reproduces `c`.
pub fn to_kv_string(config: &ScenarioConfig) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    kv("scenario_id", config.scenario_id.to_string());
    kv(
        "rsu_position",
        config
            .rsu
            .map(|p| vec3(p.position))
            .unwrap_or_else(|| "none".into()),
    );
    kv("vehicle_start", vec3(config.vehicle_start));
    kv("vehicle_end", vec3(config.vehicle_end));
    kv("bicycle_start", vec3(config.bicycle_start));
    kv("bicycle_end", vec3(config.bicycle_end));
    kv("vehicle_speed", config.vehicle_speed.to_string());
    kv("bicycle_speed", config.bicycle_speed.to_string());
    kv(
        "measurement_interval",
        config.measurement_interval.to_string(),
    );
    kv(
        "ground_reflection_coeff",
        complex(config.ground_reflection_coeff),
    );
    kv(
        "wall_reflection_coeff",
        complex(config.wall_reflection_coeff),
    );
    for b in &config.buildings {
        kv(
            "building",
            format!("{}, {}", vec3(b.center), vec3(b.half_extents)),
        );
    }
    out
}

fn floats(value: &str, n: usize, line: usize) -> Result<Vec<f64>> {
    let parts: Vec<f64> = value
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Parse {
            line,
            msg: format!("bad number in `{value}`: {e}"),
        })?;
    if parts.len() != n {
        return Err(Error::Parse {
            line,
            msg: format!("expected {n} comma-separated values, got {}", parts.len()),
        });
    }
    Ok(parts)
}

/// Parses the text format, validating the result.
pub fn from_kv_str(text: &str) -> Result<ScenarioConfig> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (k, v) = content.split_once('=').ok_or(Error::Parse {
            line,
            msg: format!("expected `key = value`, got `{content}`"),
        })?;
        entries.push((line, k.trim().to_string(), v.trim().to_string()));
    }

    let (id_line, _, id) =
        entries
            .iter()
            .find(|(_, k, _)| k == "scenario_id")
            .ok_or(Error::Parse {
                line: 0,
                msg: "missing scenario_id".into(),
            })?;
    let id: u8 = id.parse().map_err(|_| Error::Parse {
        line: *id_line,
        msg: format!("bad scenario_id `{id}`"),
    })?;
    let mut cfg = build_scenario(id)?;
    let mut buildings = Vec::new();

    for (line, key, value) in &entries {
        let line = *line;
        let v3 = || floats(value, 3, line).map(|p| Vec3::new(p[0], p[1], p[2]));
        let f1 = || floats(value, 1, line).map(|p| p[0]);
        let c2 = || floats(value, 2, line).map(|p| Complex64::new(p[0], p[1]));
        match key.as_str() {
            "scenario_id" => {}
            "rsu_position" if value.eq_ignore_ascii_case("none") => cfg.rsu = None,
            "rsu_position" => cfg.rsu = Some(Pose::fixed(v3()?)),
            "vehicle_start" => cfg.vehicle_start = v3()?,
            "vehicle_end" => cfg.vehicle_end = v3()?,
            "bicycle_start" => cfg.bicycle_start = v3()?,
            "bicycle_end" => cfg.bicycle_end = v3()?,
            "vehicle_speed" => cfg.vehicle_speed = f1()?,
            "bicycle_speed" => cfg.bicycle_speed = f1()?,
            "measurement_interval" => cfg.measurement_interval = f1()?,
            "ground_reflection_coeff" => cfg.ground_reflection_coeff = c2()?,
            "wall_reflection_coeff" => cfg.wall_reflection_coeff = c2()?,
            "building" => {
                let p = floats(value, 6, line)?;
                buildings.push(BuildingBox::new(
                    Vec3::new(p[0], p[1], p[2]),
                    Vec3::new(p[3], p[4], p[5]),
                )?);
            }
            other => {
                return Err(Error::Parse {
                    line,
                    msg: format!("unknown key `{other}`"),
                })
            }
        }
    }
    if !buildings.is_empty() {
        cfg.buildings = buildings;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn read_scenario_file(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_kv_str(&text)
}

pub fn write_scenario_file(config: &ScenarioConfig, path: &Path) -> Result<()> {
    std::fs::write(path, to_kv_string(config)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_scenarios_round_trip() {
        for id in [1, 2] {
            let cfg = build_scenario(id).unwrap();
            assert_eq!(from_kv_str(&to_kv_string(&cfg)).unwrap(), cfg);
        }
    }

    #[test]
    fn overrides_apply() {
        let text = "scenario_id = 1\n# quieter ground\nground_reflection_coeff = -0.3, 0.1\nvehicle_speed = 10 # slower\n";
        let cfg = from_kv_str(text).unwrap();
        assert_eq!(cfg.ground_reflection_coeff, Complex64::new(-0.3, 0.1));
        assert_eq!(cfg.vehicle_speed, 10.0);
        assert_eq!(cfg.buildings.len(), 4);
    }

    #[test]
    fn building_lines_replace_list() {
        let text = "scenario_id = 2\nbuilding = 0, 50, 10, 5, 5, 10\n";
        let cfg = from_kv_str(text).unwrap();
        assert_eq!(cfg.buildings.len(), 1);
        assert_eq!(cfg.buildings[0].center, Vec3::new(0.0, 50.0, 10.0));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = from_kv_str("scenario_id = 1\nvehicle_start = 1, 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = from_kv_str("scenario_id = 1\nfoo = 3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(from_kv_str("vehicle_speed = 3\n").is_err());
        // scenario 1 requires an RSU
        assert!(matches!(
            from_kv_str("scenario_id = 1\nrsu_position = none\n"),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            from_kv_str("scenario_id = 1\nwall_reflection_coeff = 1.5, 0\n"),
            Err(Error::InvalidConfig(_))
        ));
    }
}
