//! Fisher information and range-error bounds for the multipath OFDM model.
//!
//! Parameters are real: each path contributes `(τ_l, Re α_l, Im α_l)` in that order and
//! the delay of interest sits at index 0. The FIM for complex white noise of variance
//! `N_0` is `J = (2/N_0)·Re{Gᴴ G}`, where `G` stacks the derivatives of the noiseless
//! received pilots over all symbols and subcarriers.
//!
//! Three ranging error bounds (REBs, in meters) are derived from it:
//!
//! - LoS-only: the FIM of the direct path alone.
//! - All-paths: the FIM over every path inside the LoS resolution cell
//!   `|τ_l − τ_0| ≤ β/(N_s Δf)`. Unresolvable paths make it (nearly) singular, in which
//!   case the bound is reported as infinite.
//! - Weighted-average approximation (WAA): in-cell paths are merged into one effective
//!   path with amplitude-weighted delay `τ̄_0` and summed gain `ᾱ_0`; the REB combines the
//!   effective path's CRB with the squared bias `(τ_0 − τ̄_0)²`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::propagation::{PathComponent, PathKind};
use crate::signal::{check_pilot_shape, noise_variance, OfdmConfig, PilotGrid};
use crate::{Error, Result, SPEED_OF_LIGHT};

pub const DEFAULT_BETA: f64 = 1.5;
/// Scaled condition number above which a FIM is treated as singular.
pub const DEFAULT_CONDITION_CUTOFF: f64 = 1e12;
/// Relative merged-gain magnitude below which in-cell paths are considered to cancel.
pub const DESTRUCTIVE_INTERFERENCE_RATIO: f64 = 1e-12;

/// Real parameter layout of a path subset: `[τ, Re α, Im α]` per path.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    pub path_params: Vec<[f64; 3]>,
}

impl ParamVector {
    pub fn from_paths(paths: &[PathComponent]) -> Self {
        Self {
            path_params: paths
                .iter()
                .map(|p| [p.delay, p.gain.re, p.gain.im])
                .collect(),
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.path_params.iter().flatten().copied().collect()
    }

    pub fn len(&self) -> usize {
        3 * self.path_params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.path_params.is_empty()
    }
}

/// Symmetric positive semi-definite Fisher information matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FimMatrix(pub DMatrix<f64>);

impl FimMatrix {
    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// Tuning knobs shared by the bound computations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundOptions {
    /// Resolution-cell width factor, `1 < β < 2`.
    pub beta: f64,
    pub condition_cutoff: f64,
}

impl Default for BoundOptions {
    fn default() -> Self {
        Self {
            beta: DEFAULT_BETA,
            condition_cutoff: DEFAULT_CONDITION_CUTOFF,
        }
    }
}

/// Analytic FIM of the path parameters. Doppler phases are treated as known and
/// do not enter the parameterisation.
pub fn fim(paths: &[PathComponent], pilots: &PilotGrid, config: &OfdmConfig) -> Result<FimMatrix> {
    if paths.is_empty() {
        return Err(Error::EmptyPaths);
    }
    check_pilot_shape(pilots, config)?;
    let n0 = noise_variance(config);
    let df = config.subcarrier_spacing;
    let np = paths.len();
    let dim = 3 * np;

    let mut acc = DMatrix::<f64>::zeros(dim, dim);
    let mut grad = vec![Complex64::new(0.0, 0.0); dim];
    for row in pilots.symbols.iter_rows() {
        for (n, &s) in row.iter().enumerate() {
            let nf = n as f64;
            for (l, p) in paths.iter().enumerate() {
                let e = s * Complex64::from_polar(1.0, -2.0 * PI * nf * p.delay * df);
                grad[3 * l] = p.gain * Complex64::new(0.0, -2.0 * PI * nf * df) * e;
                grad[3 * l + 1] = e;
                grad[3 * l + 2] = Complex64::new(0.0, 1.0) * e;
            }
            for i in 0..dim {
                for j in i..dim {
                    acc[(i, j)] += (grad[i].conj() * grad[j]).re;
                }
            }
        }
    }
    for i in 0..dim {
        for j in 0..i {
            acc[(i, j)] = acc[(j, i)];
        }
    }
    Ok(FimMatrix(acc * (2.0 / n0)))
}

/// `[J⁻¹]₁₁` with the default condition cutoff.
pub fn crb_delay(j: &FimMatrix) -> f64 {
    crb_delay_with_cutoff(j, DEFAULT_CONDITION_CUTOFF)
}

/// `[J⁻¹]₁₁`, or `+∞` when the FIM is singular or its condition number (after
/// symmetric diagonal scaling to unit diagonal) exceeds `cutoff`.
///
/// Parameters mix seconds and linear amplitudes, so the raw matrix spans many orders
/// of magnitude; conditioning is judged on the scaled matrix.
pub fn crb_delay_with_cutoff(j: &FimMatrix, cutoff: f64) -> f64 {
    let m = &j.0;
    let n = m.nrows();
    if n == 0 || m.ncols() != n {
        return f64::INFINITY;
    }
    let scale: Vec<f64> = (0..n).map(|i| m[(i, i)].sqrt()).collect();
    if scale.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
        return f64::INFINITY;
    }
    let scaled = DMatrix::from_fn(n, n, |r, c| m[(r, c)] / (scale[r] * scale[c]));
    let eig = SymmetricEigen::new(scaled);
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if !(min > 0.0) || max / min > cutoff {
        return f64::INFINITY;
    }
    let inv00: f64 = (0..n)
        .map(|k| eig.eigenvectors[(0, k)].powi(2) / eig.eigenvalues[k])
        .sum();
    inv00 / (scale[0] * scale[0])
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 1.0 && beta < 2.0) {
        return Err(Error::InvalidBeta(beta));
    }
    Ok(())
}

fn los_path(paths: &[PathComponent]) -> Result<&PathComponent> {
    paths
        .first()
        .filter(|p| p.kind == PathKind::LineOfSight)
        .ok_or(Error::NoLineOfSight)
}

/// Half-width of the LoS resolution cell in seconds, `β/(N_s Δf)`.
pub fn resolution_cell_halfwidth(beta: f64, config: &OfdmConfig) -> f64 {
    beta / config.bandwidth()
}

/// Indices of the paths whose delay lies within the LoS resolution cell (always includes 0).
pub fn resolution_cell(
    paths: &[PathComponent],
    beta: f64,
    config: &OfdmConfig,
) -> Result<Vec<usize>> {
    check_beta(beta)?;
    let los = los_path(paths)?;
    let half = resolution_cell_halfwidth(beta, config);
    Ok(paths
        .iter()
        .enumerate()
        .filter(|(i, p)| *i == 0 || (p.delay - los.delay).abs() <= half)
        .map(|(i, _)| i)
        .collect())
}

/// Range error bound assuming the NLoS paths are perfectly known.
pub fn reb_los_only(
    paths: &[PathComponent],
    pilots: &PilotGrid,
    config: &OfdmConfig,
) -> Result<f64> {
    reb_los_only_with(paths, pilots, config, &BoundOptions::default())
}

fn reb_los_only_with(
    paths: &[PathComponent],
    pilots: &PilotGrid,
    config: &OfdmConfig,
    opts: &BoundOptions,
) -> Result<f64> {
    let los = los_path(paths)?;
    let j = fim(std::slice::from_ref(los), pilots, config)?;
    Ok(SPEED_OF_LIGHT * crb_delay_with_cutoff(&j, opts.condition_cutoff).sqrt())
}

/// Range error bound estimating every in-cell path jointly; `+∞` when they are unresolvable.
pub fn reb_all_paths(
    paths: &[PathComponent],
    pilots: &PilotGrid,
    config: &OfdmConfig,
    opts: &BoundOptions,
) -> Result<f64> {
    let cell = resolution_cell(paths, opts.beta, config)?;
    let subset: Vec<PathComponent> = cell.iter().map(|&i| paths[i]).collect();
    let j = fim(&subset, pilots, config)?;
    Ok(SPEED_OF_LIGHT * crb_delay_with_cutoff(&j, opts.condition_cutoff).sqrt())
}

/// All three bounds together with the intermediate quantities of the WAA.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub reb_los_only: f64,
    pub reb_all_paths: f64,
    pub reb_waa: f64,
    /// Amplitude-weighted delay of the in-cell paths, seconds.
    pub merged_toa: f64,
    /// `c·|τ_0 − τ̄_0|`, meters.
    pub waa_bias: f64,
    pub cell_indices: Vec<usize>,
    /// Weights aligned with `cell_indices`.
    pub weights: Vec<f64>,
    pub merged_gain: Complex64,
    pub beta: f64,
    /// Set when the in-cell gains cancel and the WAA is reported as infinite.
    pub destructive_interference: bool,
}

/// Weighted-average approximation plus the LoS-only and all-paths bounds.
pub fn reb_waa(
    paths: &[PathComponent],
    pilots: &PilotGrid,
    config: &OfdmConfig,
    opts: &BoundOptions,
) -> Result<BoundReport> {
    let los = *los_path(paths)?;
    let cell = resolution_cell(paths, opts.beta, config)?;
    let total: f64 = cell.iter().map(|&i| paths[i].gain.norm()).sum();
    let weights: Vec<f64> = cell.iter().map(|&i| paths[i].gain.norm() / total).collect();
    let merged_toa: f64 = cell
        .iter()
        .zip(&weights)
        .map(|(&i, w)| w * paths[i].delay)
        .sum();
    let merged_gain: Complex64 = cell.iter().map(|&i| paths[i].gain).sum();
    let bias = los.delay - merged_toa;
    let waa_bias = SPEED_OF_LIGHT * bias.abs();

    let max_gain = cell
        .iter()
        .map(|&i| paths[i].gain.norm())
        .fold(0.0, f64::max);
    let destructive = merged_gain.norm() < DESTRUCTIVE_INTERFERENCE_RATIO * max_gain;
    let reb_waa = if destructive {
        f64::INFINITY
    } else {
        let effective = PathComponent::new(merged_toa, merged_gain, PathKind::LineOfSight);
        let j = fim(&[effective], pilots, config)?;
        let var = crb_delay_with_cutoff(&j, opts.condition_cutoff);
        SPEED_OF_LIGHT * (var + bias * bias).sqrt()
    };

    Ok(BoundReport {
        reb_los_only: reb_los_only_with(paths, pilots, config, opts)?,
        reb_all_paths: reb_all_paths(paths, pilots, config, opts)?,
        reb_waa,
        merged_toa,
        waa_bias,
        cell_indices: cell,
        weights,
        merged_gain,
        beta: opts.beta,
        destructive_interference: destructive,
    })
}
