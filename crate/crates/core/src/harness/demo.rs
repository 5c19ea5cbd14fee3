use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::requirements::{RequirementSet, REQUIREMENT_SETS};
use crate::estimation::RangeMeasurement;
use crate::positioning::{linear_init, ml_position, position_crb, Anchor, Dim, SolverOptions};
use crate::{Error, Result, Vec3};

/// Score against one requirement set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SetOutcome {
    pub set: RequirementSet,
    /// Fraction of trials whose error is within the loosest accuracy of the set.
    pub fraction_within: f64,
    pub passed: bool,
}

/// Monte Carlo positioning results.
#[derive(Debug, Clone, PartialEq)]
pub struct PositioningSummary {
    pub rmse: f64,
    /// `√tr(J⁻¹)` at the true position.
    pub crb: f64,
    pub p95_error: f64,
    pub converged_fraction: f64,
    pub sets: Vec<SetOutcome>,
}

/// Parses anchors, one `id x y [z]` per line (`z` defaults to 0, `#` starts a comment).
pub fn parse_anchors(text: &str) -> Result<Vec<Anchor>> {
    let mut anchors = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        if !(3..=4).contains(&fields.len()) {
            return Err(Error::Parse {
                line,
                msg: format!("expected `id x y [z]`, got `{content}`"),
            });
        }
        let num = |s: &str| {
            s.parse::<f64>().map_err(|e| Error::Parse {
                line,
                msg: format!("bad coordinate `{s}`: {e}"),
            })
        };
        let z = fields.get(3).map_or(Ok(0.0), |s| num(s))?;
        anchors.push(Anchor::new(
            fields[0],
            Vec3::new(num(fields[1])?, num(fields[2])?, z),
        ));
    }
    Ok(anchors)
}

pub fn read_anchors_file(path: &Path) -> Result<Vec<Anchor>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_anchors(&text)
}

/// Empirical `p`-quantile (nearest rank) of unsorted data.
pub fn empirical_quantile(values: &[f64], p: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = (p.clamp(0.0, 1.0) * v.len() as f64).ceil() as usize;
    v[rank.saturating_sub(1).min(v.len() - 1)]
}

/// Positions `truth` from noisy ranges to `anchors` with i.i.d. errors of std `sigma`,
/// `trials` times. With `sigma = 0` the ranges are exact and weights are uniform.
pub fn run_positioning_demo(
    anchors: &[Anchor],
    truth: Vec3,
    sigma: f64,
    trials: usize,
    seed: u64,
    dim: Dim,
) -> Result<PositioningSummary> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "sigma must be >= 0, got {sigma}"
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    if let Dim::Planar { height } = dim {
        if (truth.z - height).abs() > 1e-9 {
            return Err(Error::InvalidConfig(
                "planar truth must lie at the fixed height".into(),
            ));
        }
    }
    let noise = Normal::new(0.0, sigma).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights = vec![1.0; anchors.len()];
    let opts = SolverOptions {
        dim,
        ..Default::default()
    };

    let mut errors = Vec::with_capacity(trials);
    let mut converged = 0usize;
    for _ in 0..trials {
        let meas: Vec<(RangeMeasurement, Anchor)> = anchors
            .iter()
            .map(|a| {
                let m = RangeMeasurement {
                    distance: truth.distance(a.position) + noise.sample(&mut rng),
                    sigma: if sigma > 0.0 { sigma } else { 1.0 },
                    clock_bias_model: 0.0,
                };
                (m, a.clone())
            })
            .collect();
        let init = linear_init(&meas, dim)?;
        let est = ml_position(&meas, &weights, init, &opts)?;
        converged += est.converged as usize;
        errors.push(est.position.distance(truth));
    }

    let rmse = (errors.iter().map(|e| e * e).sum::<f64>() / trials as f64).sqrt();
    let sigmas = vec![sigma; anchors.len()];
    let crb = if sigma > 0.0 {
        position_crb(anchors, &sigmas, truth, dim)
    } else {
        0.0
    };
    let sets = REQUIREMENT_SETS
        .iter()
        .map(|set| {
            let within = errors.iter().filter(|&&e| e <= set.accuracy.1).count();
            let fraction_within = within as f64 / trials as f64;
            SetOutcome {
                set: *set,
                fraction_within,
                passed: set.is_met(fraction_within),
            }
        })
        .collect();
    Ok(PositioningSummary {
        rmse,
        crb,
        p95_error: empirical_quantile(&errors, 0.95),
        converged_fraction: converged as f64 / trials as f64,
        sets,
    })
}
