use num_complex::Complex64;
use proptest::prelude::*;

use slpos::bounds::{crb_delay, fim, reb_los_only, reb_waa, BoundOptions};
use slpos::estimation::{
    delay_spectrum, estimate_toa, rtt_range, PeakPolicy, RangeMeasurement, WindowKind,
};
use slpos::positioning::{linear_init, ml_position, Anchor, Dim, SolverOptions};
use slpos::propagation::{
    build_scenario, trace_paths, BuildingBox, PathComponent, PathKind, ScenarioConfig,
};
use slpos::signal::{
    default_config, make_pilots, synthesize_rx, OfdmConfig, PhaseMode, PilotGrid, SynthesisOptions,
};
use slpos::{Pose, Vec3, SPEED_OF_LIGHT};

fn setup(mode: PhaseMode, seed: u64) -> (OfdmConfig, PilotGrid) {
    let cfg = default_config();
    let pilots = make_pilots(&cfg, mode, seed);
    (cfg, pilots)
}

fn gain() -> impl Strategy<Value = Complex64> {
    (-6.0..-3.0f64, 0.0..std::f64::consts::TAU)
        .prop_map(|(lg, ph)| Complex64::from_polar(10f64.powf(lg), ph))
}

/// A point on the road cross between the buildings.
fn street_point() -> impl Strategy<Value = Vec3> {
    (any::<bool>(), -19.0..19.0f64, -68.0..68.0f64, 0.5..12.0f64).prop_map(|(ns, a, b, z)| {
        if ns {
            Vec3::new(a, b, z)
        } else {
            Vec3::new(b, a, z)
        }
    })
}

fn scenario() -> ScenarioConfig {
    build_scenario(1).unwrap()
}

fn lambda() -> f64 {
    default_config().wavelength()
}

fn signature(paths: &[PathComponent]) -> Vec<(PathKind, f64, f64)> {
    let mut v: Vec<_> = paths
        .iter()
        .map(|p| (p.kind, p.delay, p.gain.norm()))
        .collect();
    v.sort_by(|a, b| a.1.total_cmp(&b.1));
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reciprocity(a in street_point(), b in street_point()) {
        prop_assume!(a.distance(b) > 0.5);
        let cfg = scenario();
        let fwd = trace_paths(&Pose::fixed(a), &Pose::fixed(b), &cfg, lambda()).unwrap();
        let rev = trace_paths(&Pose::fixed(b), &Pose::fixed(a), &cfg, lambda()).unwrap();
        let (f, r) = (signature(&fwd.paths), signature(&rev.paths));
        prop_assert_eq!(f.len(), r.len());
        let mut fk: Vec<_> = f.iter().map(|p| format!("{:?}", p.0)).collect();
        let mut rk: Vec<_> = r.iter().map(|p| format!("{:?}", p.0)).collect();
        fk.sort();
        rk.sort();
        prop_assert_eq!(fk, rk);
        for (x, y) in f.iter().zip(&r) {
            prop_assert!((x.1 - y.1).abs() <= 1e-12 * x.1);
            prop_assert!((x.2 - y.2).abs() <= 1e-9 * x.2);
        }
    }

    #[test]
    fn reflection_points_lie_on_facades(a in street_point(), b in street_point()) {
        prop_assume!(a.distance(b) > 0.5);
        let cfg = scenario();
        let snap = trace_paths(&Pose::fixed(a), &Pose::fixed(b), &cfg, lambda()).unwrap();
        for p in &snap.paths {
            match p.kind {
                PathKind::Wall { building, side } => {
                    let facade = cfg.buildings[building]
                        .facades()
                        .into_iter()
                        .find(|f| f.side == side)
                        .unwrap();
                    let q = p.bounce_point.expect("wall paths carry a bounce point");
                    prop_assert!(facade.distance_to(q) <= 1e-9);
                }
                PathKind::Ground => prop_assert!(p.bounce_point.unwrap().z.abs() < 1e-12),
                PathKind::LineOfSight => {
                    let d = a.distance(b) / SPEED_OF_LIGHT;
                    prop_assert!((p.delay - d).abs() <= 1e-15 * d);
                }
            }
        }
    }

    /// Existing paths can only disappear when a building is added; the only new
    /// paths allowed are reflections off the added building itself.
    #[test]
    fn adding_a_building_only_blocks(
        a in street_point(),
        b in street_point(),
        cx in -15.0..15.0f64,
        cy in -60.0..60.0f64,
        hx in 0.5..4.0f64,
        hz in 1.0..10.0f64,
        swap in any::<bool>(),
    ) {
        prop_assume!(a.distance(b) > 0.5);
        let center = if swap { Vec3::new(cy, cx, hz) } else { Vec3::new(cx, cy, hz) };
        let extra = BuildingBox::new(center, Vec3::new(hx, hx, hz)).unwrap();
        let inside = |p: Vec3| {
            (0..3).all(|k| p[k] >= extra.min()[k] - 1e-6 && p[k] <= extra.max()[k] + 1e-6)
        };
        prop_assume!(!inside(a) && !inside(b));
        let cfg = scenario();
        let mut bigger = cfg.clone();
        bigger.buildings.push(extra);
        let new_index = bigger.buildings.len() - 1;
        let before = trace_paths(&Pose::fixed(a), &Pose::fixed(b), &cfg, lambda()).unwrap();
        let after = trace_paths(&Pose::fixed(a), &Pose::fixed(b), &bigger, lambda()).unwrap();
        let old_kinds: Vec<_> = after
            .paths
            .iter()
            .filter(|p| !matches!(p.kind, PathKind::Wall { building, .. } if building == new_index))
            .map(|p| p.kind)
            .collect();
        prop_assert!(old_kinds.len() <= before.paths.len());
        for k in old_kinds {
            prop_assert!(before.paths.iter().any(|p| p.kind == k));
        }
    }

    #[test]
    fn synthesis_is_linear(
        d1 in 1e-8..1e-6f64, g1 in gain(),
        d2 in 1e-8..1e-6f64, g2 in gain(),
        doppler in any::<bool>(),
    ) {
        let (cfg, pilots) = setup(PhaseMode::SeededRandom, 9);
        let mut p1 = PathComponent::new(d1, g1, PathKind::LineOfSight);
        p1.radial_velocity = 12.0;
        let mut p2 = PathComponent::new(d2, g2, PathKind::Ground);
        p2.radial_velocity = -3.0;
        let opts = SynthesisOptions { doppler_enabled: doppler, ..Default::default() };
        let a = synthesize_rx(&[p1], &pilots, &cfg, opts).unwrap();
        let b = synthesize_rx(&[p2], &pilots, &cfg, opts).unwrap();
        let both = synthesize_rx(&[p1, p2], &pilots, &cfg, opts).unwrap();
        let scale = g1.norm() + g2.norm();
        for ((x, y), z) in a.symbols.iter().zip(b.symbols.iter()).zip(both.symbols.iter()) {
            prop_assert!((x + y - z).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn clock_bias_is_a_delay_shift(d in 1e-8..1e-6f64, g in gain(), bias in -2e-6..2e-6f64) {
        let (cfg, pilots) = setup(PhaseMode::AllOnes, 0);
        let p = PathComponent::new(d, g, PathKind::LineOfSight);
        let biased = synthesize_rx(
            &[p], &pilots, &cfg,
            SynthesisOptions { clock_bias: bias, ..Default::default() },
        ).unwrap();
        // the shifted delay may leave [0, 1/Δf); compare through the phase ramp directly
        let period = 1.0 / cfg.subcarrier_spacing;
        let shifted = PathComponent::new((d + bias).rem_euclid(period), g, PathKind::LineOfSight);
        let reference = synthesize_rx(&[shifted], &pilots, &cfg, SynthesisOptions::default()).unwrap();
        for (x, y) in biased.symbols.iter().zip(reference.symbols.iter()) {
            prop_assert!((x - y).norm() <= 1e-9 * g.norm());
        }
    }

    #[test]
    fn waa_weights_are_normalised(
        g0 in gain(), gs in prop::collection::vec((1e-9..70e-9f64, gain()), 0..4),
    ) {
        let (cfg, pilots) = setup(PhaseMode::AllOnes, 0);
        let mut paths = vec![PathComponent::new(100e-9, g0, PathKind::LineOfSight)];
        paths.extend(gs.iter().map(|&(dt, g)| PathComponent::new(100e-9 + dt, g, PathKind::Ground)));
        let r = reb_waa(&paths, &pilots, &cfg, &BoundOptions::default()).unwrap();
        prop_assert!((r.weights.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(r.weights.iter().all(|&w| w > 0.0 && w <= 1.0));
        prop_assert!(r.reb_waa >= r.waa_bias);
        prop_assert_eq!(r.cell_indices[0], 0);
    }

    #[test]
    fn waa_scale_equivariance(
        g0 in gain(), g1 in gain(), dt in 1e-9..70e-9f64, k in 0.1..10.0f64,
    ) {
        let (cfg, pilots) = setup(PhaseMode::AllOnes, 0);
        let paths = |s: f64| vec![
            PathComponent::new(200e-9, g0 * s, PathKind::LineOfSight),
            PathComponent::new(200e-9 + dt, g1 * s, PathKind::Ground),
        ];
        let opts = BoundOptions::default();
        let a = reb_waa(&paths(1.0), &pilots, &cfg, &opts).unwrap();
        let b = reb_waa(&paths(k), &pilots, &cfg, &opts).unwrap();
        prop_assert!((a.merged_toa - b.merged_toa).abs() <= 1e-12 * a.merged_toa);
        prop_assert!((a.waa_bias - b.waa_bias).abs() <= 1e-9 * a.waa_bias.max(1e-12));
        let var = |r: &slpos::bounds::BoundReport| {
            let eff = PathComponent::new(r.merged_toa, r.merged_gain, PathKind::LineOfSight);
            crb_delay(&fim(&[eff], &pilots, &cfg).unwrap())
        };
        let ratio = var(&a) / var(&b);
        prop_assert!((ratio / (k * k) - 1.0).abs() < 1e-8, "ratio {}", ratio);
        let la = reb_los_only(&paths(1.0), &pilots, &cfg).unwrap();
        let lb = reb_los_only(&paths(k), &pilots, &cfg).unwrap();
        prop_assert!((la / lb / k - 1.0).abs() < 1e-8);
    }

    #[test]
    fn waa_bias_grows_linearly(g0 in gain(), g1 in gain(), dt in 1e-9..30e-9f64, f in 1.1..2.0f64) {
        let (cfg, pilots) = setup(PhaseMode::AllOnes, 0);
        let bias = |delta: f64| {
            let paths = [
                PathComponent::new(150e-9, g0, PathKind::LineOfSight),
                PathComponent::new(150e-9 + delta, g1, PathKind::Ground),
            ];
            reb_waa(&paths, &pilots, &cfg, &BoundOptions::default()).unwrap().waa_bias
        };
        let (b1, b2) = (bias(dt), bias(dt * f));
        prop_assert!(b2 > b1);
        prop_assert!((b2 / b1 / f - 1.0).abs() < 1e-6);
    }

    #[test]
    fn toa_follows_delay_shift(d in 10e-9..0.9e-6f64, shift in 0.0..5e-6f64) {
        let (cfg, pilots) = setup(PhaseMode::AllOnes, 0);
        let window = WindowKind::Hamming.weights(cfg.num_subcarriers).unwrap();
        let toa = |tau: f64| {
            let p = PathComponent::new(tau, Complex64::new(1e-4, 0.0), PathKind::LineOfSight);
            let rx = synthesize_rx(&[p], &pilots, &cfg, SynthesisOptions::default()).unwrap();
            let spec = delay_spectrum(&rx, &pilots, &cfg, &window, 16).unwrap();
            estimate_toa(&spec, PeakPolicy::GlobalPeak).unwrap().toa
        };
        let moved = toa(d + shift) - toa(d);
        prop_assert!(SPEED_OF_LIGHT * (moved - shift).abs() < 0.05, "moved {:e} vs {:e}", moved, shift);
    }

    #[test]
    fn spectrum_does_not_depend_on_pilot_phases(d in 10e-9..1e-6f64, g in gain(), seed in any::<u64>()) {
        let cfg = default_config();
        let window = WindowKind::Hamming.weights(cfg.num_subcarriers).unwrap();
        let p = PathComponent::new(d, g, PathKind::LineOfSight);
        let spec = |pilots: &PilotGrid| {
            let rx = synthesize_rx(&[p], pilots, &cfg, SynthesisOptions::default()).unwrap();
            delay_spectrum(&rx, pilots, &cfg, &window, 16).unwrap().power
        };
        let a = spec(&make_pilots(&cfg, PhaseMode::AllOnes, 0));
        let b = spec(&make_pilots(&cfg, PhaseMode::SeededRandom, seed));
        let peak = a.iter().cloned().fold(0.0, f64::max);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-10 * peak);
        }
    }

    #[test]
    fn rtt_cancels_clock_bias(tau in 1e-9..1e-6f64, bias in -1e-5..1e-5f64, proc_time in 0.0..1e-3f64) {
        let m = rtt_range(tau + bias, tau - bias + proc_time, proc_time, 1e-4).unwrap();
        prop_assert!((m.distance - SPEED_OF_LIGHT * tau).abs() < 1e-9);
        prop_assert!((m.clock_bias_model - bias).abs() < 1e-15);
    }

    #[test]
    fn positioning_is_translation_equivariant(
        noise in prop::collection::vec(-0.5..0.5f64, 4),
        vx in -100.0..100.0f64, vy in -100.0..100.0f64, vz in -5.0..5.0f64,
        px in 5.0..45.0f64, py in 5.0..45.0f64,
    ) {
        let base = [(0.0, 0.0, 0.0), (50.0, 0.0, 1.0), (50.0, 50.0, 0.0), (0.0, 50.0, 2.0)];
        let truth = Vec3::new(px, py, 1.0);
        let solve = |offset: Vec3| {
            let meas: Vec<_> = base
                .iter()
                .zip(&noise)
                .enumerate()
                .map(|(i, (&(x, y, z), w))| {
                    let a = Anchor::new(format!("a{i}"), Vec3::new(x, y, z) + offset);
                    let m = RangeMeasurement {
                        distance: (truth + offset).distance(a.position) + w,
                        sigma: 1.0,
                        clock_bias_model: 0.0,
                    };
                    (m, a)
                })
                .collect();
            let dim = Dim::Planar { height: 1.0 + offset.z };
            let init = linear_init(&meas, dim).unwrap();
            let opts = SolverOptions { dim, ..Default::default() };
            ml_position(&meas, &[1.0; 4], init, &opts).unwrap().position
        };
        let v = Vec3::new(vx, vy, vz);
        let moved = solve(v) - v;
        prop_assert!(moved.distance(solve(Vec3::ZERO)) < 1e-6);
    }

    #[test]
    fn refinement_never_increases_cost(
        noise in prop::collection::vec(-2.0..2.0f64, 5),
        px in -30.0..30.0f64, py in -30.0..30.0f64, pz in 0.0..10.0f64,
        jitter in prop::collection::vec(-5.0..5.0f64, 3),
    ) {
        let anchors = [
            Vec3::new(-40.0, -40.0, 0.0), Vec3::new(40.0, -40.0, 12.0),
            Vec3::new(40.0, 40.0, 3.0), Vec3::new(-40.0, 40.0, 20.0), Vec3::new(0.0, 0.0, 30.0),
        ];
        let truth = Vec3::new(px, py, pz);
        let meas: Vec<_> = anchors
            .iter()
            .zip(&noise)
            .enumerate()
            .map(|(i, (&a, w))| {
                let m = RangeMeasurement { distance: truth.distance(a) + w, sigma: 1.0, clock_bias_model: 0.0 };
                (m, Anchor::new(format!("a{i}"), a))
            })
            .collect();
        let weights = [1.0, 2.0, 0.5, 1.0, 3.0];
        let init = truth + Vec3::new(jitter[0], jitter[1], jitter[2]);
        let cost = |x: Vec3| -> f64 {
            meas.iter()
                .zip(&weights)
                .map(|((m, a), w)| w * (m.distance - x.distance(a.position)).powi(2))
                .sum()
        };
        let est = ml_position(&meas, &weights, init, &SolverOptions::default()).unwrap();
        prop_assert!(est.cost <= cost(init) * (1.0 + 1e-12));
        prop_assert!((est.cost - cost(est.position)).abs() <= 1e-9 * est.cost.max(1.0));
    }

    #[test]
    fn exact_ranges_converge_fast(px in -30.0..30.0f64, py in -30.0..30.0f64, pz in 0.0..10.0f64) {
        let anchors = [
            Vec3::new(-40.0, -40.0, 0.0), Vec3::new(40.0, -40.0, 12.0),
            Vec3::new(40.0, 40.0, 3.0), Vec3::new(-40.0, 40.0, 20.0),
        ];
        let truth = Vec3::new(px, py, pz);
        let meas: Vec<_> = anchors
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                let m = RangeMeasurement { distance: truth.distance(a), sigma: 1.0, clock_bias_model: 0.0 };
                (m, Anchor::new(format!("a{i}"), a))
            })
            .collect();
        let init = linear_init(&meas, Dim::Spatial).unwrap();
        let est = ml_position(&meas, &[1.0; 4], init, &SolverOptions::default()).unwrap();
        prop_assert!(est.iterations <= 10, "iterations {}", est.iterations);
        prop_assert!(est.position.distance(truth) < 1e-6);
    }
}
