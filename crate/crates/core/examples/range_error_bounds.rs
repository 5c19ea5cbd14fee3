//! The three range-error bounds for traced channels, plus a hand-sized two-path case.
//!
//! ```bash
//! cargo run --example range_error_bounds
//! ```

use num_complex::Complex64;
use slpos::bounds::{reb_waa, resolution_cell_halfwidth, BoundOptions};
use slpos::propagation::{
    build_scenario, sample_device, trace_paths, Device, PathComponent, PathKind,
};
use slpos::signal::{default_config, make_pilots, PhaseMode};
use slpos::SPEED_OF_LIGHT;

fn main() -> slpos::Result<()> {
    let cfg = default_config();
    let pilots = make_pilots(&cfg, PhaseMode::AllOnes, 0);
    let opts = BoundOptions::default();
    println!(
        "resolution cell half-width: {:.2} m",
        SPEED_OF_LIGHT * resolution_cell_halfwidth(opts.beta, &cfg)
    );

    // two equal-phase paths 10 ns apart, second at half amplitude
    let toy = [
        PathComponent::new(100e-9, Complex64::new(1.0, 0.0), PathKind::LineOfSight),
        PathComponent::new(110e-9, Complex64::new(0.5, 0.0), PathKind::Ground),
    ];
    let r = reb_waa(&toy, &pilots, &cfg, &opts)?;
    println!(
        "two-path toy: weights {:?}, bias {:.4} m, merged gain {}",
        r.weights, r.waa_bias, r.merged_gain
    );

    let scenario = build_scenario(1)?;
    let rsu = scenario.rsu.expect("scenario 1 has a road-side unit");
    println!(
        "\n{:>8} {:>10} {:>10} {:>10} {:>10}",
        "y [m]", "LoS", "all", "WAA", "bias"
    );
    for t in (0..=10).map(f64::from) {
        let v = sample_device(&scenario, Device::Vehicle, t)?;
        let snap = trace_paths(&rsu, &v, &scenario, cfg.wavelength())?;
        let r = reb_waa(&snap.paths, &pilots, &cfg, &opts)?;
        println!(
            "{:>8.1} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            v.position.y, r.reb_los_only, r.reb_all_paths, r.reb_waa, r.waa_bias
        );
    }
    Ok(())
}
