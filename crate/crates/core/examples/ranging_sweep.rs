//! Monte Carlo RTT ranging along the vehicle lane, with the bound curves, written as CSV.
//!
//! ```bash
//! cargo run --release --example ranging_sweep -- [trials] [out.csv]
//! ```

use slpos::harness::{run_ranging_sweep, Link, RunConfig};

fn main() -> slpos::Result<()> {
    let mut args = std::env::args().skip(1);
    let mut cfg = RunConfig::new(1, Link::RsuVehicle)?;
    cfg.trials = args.next().and_then(|s| s.parse().ok()).unwrap_or(20);
    cfg.output_path = args.next().map(Into::into);

    let points = run_ranging_sweep(&cfg)?;
    println!(
        "{:>7} {:>8} {:>8} {:>8} {:>9} {:>8} {:>5}",
        "y", "range", "rmse", "LoS", "all", "WAA", "cell"
    );
    for p in points.iter().step_by(5) {
        println!(
            "{:>7.1} {:>8.2} {:>8.3} {:>8.4} {:>9.3} {:>8.3} {:>2}/{:<2}",
            p.sweep_coord,
            p.true_range,
            p.rmse,
            p.reb_los,
            p.reb_all,
            p.reb_waa,
            p.n_cell_paths,
            p.n_paths
        );
    }
    if let Some(path) = &cfg.output_path {
        println!("wrote {}", path.display());
    }
    Ok(())
}
