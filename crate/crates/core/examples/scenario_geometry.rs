//! Built-in intersection scenarios, trajectories and the scenario-2 collision point.
//!
//! ```bash
//! cargo run --example scenario_geometry
//! ```

use slpos::propagation::{build_scenario, sample_device, sample_trajectory, Device};
use slpos::scenario_file::to_kv_string;

fn main() -> slpos::Result<()> {
    let s1 = build_scenario(1)?;
    println!("scenario 1 as a config file:\n{}", to_kv_string(&s1));
    println!(
        "vehicle horizon {:.1} s, bicycle horizon {:.1} s",
        s1.device_horizon(Device::Vehicle),
        s1.device_horizon(Device::Bicycle)
    );
    for t in [0.0, 2.5, 5.0, 7.5, 10.0] {
        let v = sample_device(&s1, Device::Vehicle, t)?;
        println!("t = {t:>4.1} s  vehicle at {}", v.position);
    }

    let s2 = build_scenario(2)?;
    for t in [0.0, 3.0, 4.5, 6.0] {
        let (v, b) = sample_trajectory(&s2, t)?;
        let gap = v.position.distance(b.position);
        println!(
            "scenario 2, t = {t:.1} s: vehicle {:.2} bicycle {:.2} (3-D gap {gap:.2} m)",
            v.position, b.position
        );
    }
    Ok(())
}
