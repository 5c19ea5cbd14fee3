//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use slpos::propagation::{PathComponent, PathKind};
use slpos::signal::{noise_variance, OfdmConfig, PilotGrid};

/// Noiseless mean of the observation for parameters `[τ, Re α, Im α]` per path,
/// written directly from the model: `Σ_l α_l s[t][n] exp(−j2π n τ_l Δf)`.
pub fn model_mean(params: &[f64], pilots: &PilotGrid, cfg: &OfdmConfig) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(cfg.num_symbols * cfg.num_subcarriers);
    for t in 0..cfg.num_symbols {
        for n in 0..cfg.num_subcarriers {
            let s = pilots.symbols.get(t, n);
            let mut acc = Complex64::new(0.0, 0.0);
            for p in params.chunks(3) {
                let alpha = Complex64::new(p[1], p[2]);
                let phase = -2.0 * PI * n as f64 * p[0] * cfg.subcarrier_spacing;
                acc += alpha * s * Complex64::from_polar(1.0, phase);
            }
            out.push(acc);
        }
    }
    out
}

/// FIM from a central finite-difference Jacobian of [`model_mean`].
pub fn finite_difference_fim(
    paths: &[PathComponent],
    pilots: &PilotGrid,
    cfg: &OfdmConfig,
) -> DMatrix<f64> {
    let theta: Vec<f64> = paths
        .iter()
        .flat_map(|p| [p.delay, p.gain.re, p.gain.im])
        .collect();
    let dim = theta.len();
    let amp = paths.iter().map(|p| p.gain.norm()).fold(0.0, f64::max);
    let columns: Vec<Vec<Complex64>> = (0..dim)
        .map(|k| {
            let h = if k % 3 == 0 { 1e-13 } else { 1e-3 * amp };
            let mut plus = theta.clone();
            let mut minus = theta.clone();
            plus[k] += h;
            minus[k] -= h;
            let (mp, mm) = (
                model_mean(&plus, pilots, cfg),
                model_mean(&minus, pilots, cfg),
            );
            mp.iter()
                .zip(&mm)
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect()
        })
        .collect();
    let scale = 2.0 / noise_variance(cfg);
    DMatrix::from_fn(dim, dim, |i, j| {
        scale
            * columns[i]
                .iter()
                .zip(&columns[j])
                .map(|(a, b)| (a.conj() * b).re)
                .sum::<f64>()
    })
}

pub fn relative_frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm()
}

/// Random channel: LoS first, then `extra` later paths; delays in `[10 ns, 1 µs]`,
/// amplitudes log-uniform in `[1e-6, 1e-3]` with uniform phase.
pub fn random_channel<R: Rng>(rng: &mut R, extra: usize) -> Vec<PathComponent> {
    let gain = |rng: &mut R| {
        let mag = 10f64.powf(rng.random_range(-6.0..-3.0));
        Complex64::from_polar(mag, rng.random_range(0.0..2.0 * PI))
    };
    let tau0 = rng.random_range(10e-9..0.5e-6);
    let mut paths = vec![PathComponent::new(tau0, gain(rng), PathKind::LineOfSight)];
    for _ in 0..extra {
        let tau = tau0 + rng.random_range(0.5e-9..0.5e-6);
        paths.push(PathComponent::new(tau, gain(rng), PathKind::Ground));
    }
    paths
}
