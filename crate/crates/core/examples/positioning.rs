//! Multilateration: closed-form start, weighted Gauss-Newton, CRB and requirement sets.
//!
//! ```bash
//! cargo run --release --example positioning
//! ```

use slpos::estimation::RangeMeasurement;
use slpos::harness::run_positioning_demo;
use slpos::positioning::{
    inverse_variance_weights, linear_init, ml_position, position_crb, Anchor, Dim, SolverOptions,
};
use slpos::Vec3;

fn main() -> slpos::Result<()> {
    let anchors = vec![
        Anchor::new("rsu-north", Vec3::new(0.0, 40.0, 10.0)),
        Anchor::new("rsu-east", Vec3::new(40.0, 0.0, 10.0)),
        Anchor::new("rsu-south", Vec3::new(0.0, -40.0, 10.0)),
        Anchor::new("car", Vec3::new(-15.0, 5.0, 1.5)),
    ];
    let truth = Vec3::new(6.0, -9.0, 1.0);
    let dim = Dim::Planar { height: truth.z };

    // one hand-made fix with unequal range quality
    let sigmas = [0.3, 0.3, 0.8, 2.0];
    let offsets = [0.2, -0.1, 0.6, -1.5];
    let meas: Vec<_> = anchors
        .iter()
        .zip(sigmas.iter().zip(&offsets))
        .map(|(a, (&sigma, &e))| {
            let m = RangeMeasurement {
                distance: truth.distance(a.position) + e,
                sigma,
                clock_bias_model: 0.0,
            };
            (m, a.clone())
        })
        .collect();
    let init = linear_init(&meas, dim)?;
    let weights = inverse_variance_weights(&meas);
    let est = ml_position(
        &meas,
        &weights,
        init,
        &SolverOptions {
            dim,
            ..Default::default()
        },
    )?;
    println!("closed form: {init}");
    println!(
        "refined:     {} after {} iterations (error {:.3} m, CRB {:.3} m)",
        est.position,
        est.iterations,
        est.position.distance(truth),
        position_crb(&anchors, &sigmas, truth, dim)
    );

    for sigma in [0.1, 1.0, 5.0] {
        let s = run_positioning_demo(&anchors, truth, sigma, 2000, 3, dim)?;
        println!(
            "\nsigma {sigma} m: RMSE {:.3} m, CRB {:.3} m, p95 {:.3} m",
            s.rmse, s.crb, s.p95_error
        );
        for o in &s.sets {
            println!(
                "  {} ({}-{} m, {:.0}%): {:.1}% -> {}",
                o.set.name,
                o.set.accuracy.0,
                o.set.accuracy.1,
                100.0 * o.set.confidence.0,
                100.0 * o.fraction_within,
                if o.passed { "met" } else { "missed" }
            );
        }
    }
    Ok(())
}
