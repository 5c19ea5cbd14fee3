//! Is the 12-symbol pilot burst short enough for a given speed, and how fast must a fix arrive?
//!
//! ```bash
//! cargo run --example coherence_check
//! ```

use slpos::harness::coherence_and_latency_check;
use slpos::signal::default_config;

fn main() -> slpos::Result<()> {
    let cfg = default_config();
    for (label, v, accuracy) in [
        ("parked", 0.0, 1.0),
        ("bicycle", 4.0, 1.0),
        ("urban car", 14.0, 3.0),
        ("highway", 70.0, 3.0),
    ] {
        let r = coherence_and_latency_check(&cfg, v, accuracy)?;
        println!("{label} ({v} m/s, {accuracy} m):\n{r}\n");
    }
    Ok(())
}
