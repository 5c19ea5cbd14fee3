use std::fmt;

use crate::signal::OfdmConfig;
use crate::{Error, Result};

/// Channel-coherence and latency feasibility for a given maximum speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceReport {
    /// Coherence time in OFDM symbols, `λΔf/v`. `None` means unbounded (v = 0).
    pub coherence_symbols: Option<f64>,
    pub num_symbols: usize,
    /// `coherence_symbols / num_symbols`.
    pub margin: Option<f64>,
    /// Time for the device to move 10% of the accuracy target, seconds.
    pub latency_budget: Option<f64>,
}

impl CoherenceReport {
    /// True when the pilot burst fits inside the coherence time.
    pub fn is_coherent(&self) -> bool {
        self.margin.is_none_or(|m| m >= 1.0)
    }
}

impl fmt::Display for CoherenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: Option<f64>, unit: &str, scale: f64| match v {
            Some(x) => format!("{:.3}{unit}", x * scale),
            None => "unbounded".to_string(),
        };
        writeln!(
            f,
            "coherence: {}",
            opt(self.coherence_symbols, " symbols", 1.0)
        )?;
        writeln!(f, "burst: {} symbols", self.num_symbols)?;
        writeln!(f, "margin: {}", opt(self.margin, "x", 1.0))?;
        write!(
            f,
            "latency budget: {}",
            opt(self.latency_budget, " ms", 1e3)
        )
    }
}

/// Checks the coherence assumption and the latency budget at speed `v_max` (m/s) for
/// an accuracy target in meters.
pub fn coherence_and_latency_check(
    cfg: &OfdmConfig,
    v_max: f64,
    accuracy: f64,
) -> Result<CoherenceReport> {
    cfg.validate()?;
    if !(v_max >= 0.0) || !v_max.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "v_max must be >= 0, got {v_max}"
        )));
    }
    if !(accuracy > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "accuracy must be positive, got {accuracy}"
        )));
    }
    let (coherence, latency) = if v_max > 0.0 {
        (
            Some(cfg.wavelength() * cfg.subcarrier_spacing / v_max),
            Some(0.1 * accuracy / v_max),
        )
    } else {
        (None, None)
    };
    Ok(CoherenceReport {
        coherence_symbols: coherence,
        num_symbols: cfg.num_symbols,
        margin: coherence.map(|c| c / cfg.num_symbols as f64),
        latency_budget: latency,
    })
}
