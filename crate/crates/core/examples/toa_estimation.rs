//! Delay spectrum and peak interpolation for a noisy two-path observation.
//!
//! ```bash
//! cargo run --example toa_estimation
//! ```

use num_complex::Complex64;
use slpos::estimation::{delay_spectrum, estimate_toa, PeakPolicy, WindowKind, DEFAULT_OVERSAMPLE};
use slpos::propagation::{PathComponent, PathKind};
use slpos::signal::{default_config, make_pilots, synthesize_rx, PhaseMode, SynthesisOptions};
use slpos::SPEED_OF_LIGHT;

fn main() -> slpos::Result<()> {
    let cfg = default_config();
    let pilots = make_pilots(&cfg, PhaseMode::SeededRandom, 1);
    let tau0 = 150e-9;
    let paths = [
        PathComponent::new(tau0, Complex64::new(2e-4, 0.0), PathKind::LineOfSight),
        PathComponent::new(tau0 + 120e-9, Complex64::new(0.0, 1.2e-4), PathKind::Ground),
    ];
    let rx = synthesize_rx(
        &paths,
        &pilots,
        &cfg,
        SynthesisOptions {
            noise_seed: Some(5),
            ..Default::default()
        },
    )?;

    for window in [WindowKind::Rectangular, WindowKind::Hamming] {
        let w = window.weights(cfg.num_subcarriers)?;
        let spec = delay_spectrum(&rx, &pilots, &cfg, &w, DEFAULT_OVERSAMPLE)?;
        println!(
            "{window:?}: {} bins of {:.3} ns, peak-to-median {:.1} dB",
            spec.len(),
            spec.bin_spacing * 1e9,
            spec.peak_to_median_db()
        );
        for policy in [
            PeakPolicy::GlobalPeak,
            PeakPolicy::FirstPeak { threshold_db: 10.0 },
        ] {
            let est = estimate_toa(&spec, policy)?;
            println!(
                "  {policy:?}: ToA {:.3} ns, range error {:+.3} m",
                est.toa * 1e9,
                (est.toa - tau0) * SPEED_OF_LIGHT
            );
        }
    }
    Ok(())
}
