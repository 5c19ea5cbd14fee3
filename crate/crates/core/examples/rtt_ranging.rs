//! Round-trip ranging: the clock offset cancels, the noise variance doubles.
//!
//! ```bash
//! cargo run --release --example rtt_ranging
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use slpos::estimation::{
    delay_spectrum, estimate_toa, rtt_range, unwrap_reverse_toa, PeakPolicy, WindowKind,
};
use slpos::propagation::{friis_gain, PathComponent, PathKind};
use slpos::signal::{default_config, make_pilots, synthesize_rx, PhaseMode, SynthesisOptions};
use slpos::{Vec3, SPEED_OF_LIGHT};

fn main() -> slpos::Result<()> {
    let cfg = default_config();
    let pilots = make_pilots(&cfg, PhaseMode::AllOnes, 0);
    let window = WindowKind::Hamming.weights(cfg.num_subcarriers)?;
    let (a, b) = (Vec3::new(0.0, 0.0, 10.0), Vec3::new(1.6, -45.0, 1.5));
    let truth = a.distance(b);
    let path = PathComponent::new(
        truth / SPEED_OF_LIGHT,
        friis_gain(a, b, cfg.wavelength())?,
        PathKind::LineOfSight,
    );
    let toa = |clock_bias: f64, seed: u64| -> slpos::Result<f64> {
        let opts = SynthesisOptions {
            noise_seed: Some(seed),
            clock_bias,
            ..Default::default()
        };
        let rx = synthesize_rx(&[path], &pilots, &cfg, opts)?;
        let spec = delay_spectrum(&rx, &pilots, &cfg, &window, 16)?;
        Ok(estimate_toa(&spec, PeakPolicy::GlobalPeak)?.toa)
    };

    let period = 1.0 / cfg.subcarrier_spacing;
    let clock = Normal::new(0.0, 2e-6).expect("valid spread");
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    println!("true range {truth:.4} m");
    for k in 0..5u64 {
        let bias = clock.sample(&mut rng);
        let fwd = toa(bias, 2 * k)?;
        let rev = unwrap_reverse_toa(fwd, toa(-bias, 2 * k + 1)?, period);
        let m = rtt_range(fwd, rev, 0.0, 1e-4)?;
        // the spectra only see the offset modulo one delay period
        let recovered = m.clock_bias_model - period * (m.clock_bias_model / period).round();
        println!(
            "B = {:+8.3} us  one-way naive {:>9.2} m  RTT {:.4} m (recovered B {:+.3} us)",
            bias * 1e6,
            fwd * SPEED_OF_LIGHT,
            m.distance,
            recovered * 1e6
        );
    }
    Ok(())
}
