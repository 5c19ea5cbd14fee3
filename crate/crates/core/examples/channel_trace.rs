//! Image-method paths between the road-side unit and the vehicle along its lane.
//!
//! ```bash
//! cargo run --example channel_trace
//! ```

use slpos::propagation::{build_scenario, sample_device, trace_paths, Device};
use slpos::signal::default_config;
use slpos::SPEED_OF_LIGHT;

fn main() -> slpos::Result<()> {
    let scenario = build_scenario(1)?;
    let rsu = scenario.rsu.expect("scenario 1 has a road-side unit");
    let lambda = default_config().wavelength();

    for t in [0.0, 2.0, 4.0, 5.0] {
        let vehicle = sample_device(&scenario, Device::Vehicle, t)?;
        let snap = trace_paths(&rsu, &vehicle, &scenario, lambda)?;
        let los = snap.los().map(|p| p.delay).unwrap_or(f64::NAN);
        println!(
            "vehicle at {} ({} paths)",
            vehicle.position,
            snap.paths.len()
        );
        for p in &snap.paths {
            println!(
                "  {:<32} length {:>7.2} m  excess {:>6.2} m  |gain| {:.3e}  radial {:>6.2} m/s",
                format!("{:?}", p.kind),
                p.delay * SPEED_OF_LIGHT,
                (p.delay - los) * SPEED_OF_LIGHT,
                p.gain.norm(),
                p.radial_velocity
            );
        }
    }
    Ok(())
}
