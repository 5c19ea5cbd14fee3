//! Delay-spectrum ToA estimation and round-trip ranging.
//!
//! The pilots are stripped from each received symbol, the per-subcarrier channel
//! estimates are windowed and summed over symbols, zero-padded and inverse-transformed.
//! The squared magnitude is a delay power profile whose peaks mark path delays.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::signal::{check_pilot_shape, OfdmConfig, PilotGrid, RxSymbols};
use crate::{Error, Result, SPEED_OF_LIGHT};

pub const DEFAULT_OVERSAMPLE: usize = 16;
/// Peaks less than this many dB above the median bin are low confidence.
pub const LOW_CONFIDENCE_DB: f64 = 10.0;

/// Symmetric Hamming window `0.54 − 0.46·cos(2πk/(n−1))`.
pub fn hamming_window(n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::WindowTooShort(n));
    }
    let m = (n - 1) as f64;
    Ok((0..n)
        .map(|k| 0.54 - 0.46 * (2.0 * PI * k as f64 / m).cos())
        .collect())
}

/// Subcarrier weighting applied before the IDFT.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WindowKind {
    #[default]
    Hamming,
    Rectangular,
}

impl WindowKind {
    pub fn weights(self, n: usize) -> Result<Vec<f64>> {
        match self {
            WindowKind::Hamming => hamming_window(n),
            WindowKind::Rectangular if n < 2 => Err(Error::WindowTooShort(n)),
            WindowKind::Rectangular => Ok(vec![1.0; n]),
        }
    }
}

/// Oversampled delay power profile.
#[derive(Debug, Clone, PartialEq)]
pub struct DelaySpectrum {
    pub power: Vec<f64>,
    /// Delay step between bins, seconds.
    pub bin_spacing: f64,
    pub window: Vec<f64>,
}

impl DelaySpectrum {
    pub fn len(&self) -> usize {
        self.power.len()
    }

    pub fn is_empty(&self) -> bool {
        self.power.is_empty()
    }

    /// Unambiguous delay span, `K · bin_spacing = 1/Δf`.
    pub fn period(&self) -> f64 {
        self.bin_spacing * self.power.len() as f64
    }

    pub fn delay_of_bin(&self, bin: f64) -> f64 {
        bin * self.bin_spacing
    }

    /// Global peak power over the median bin, in dB.
    pub fn peak_to_median_db(&self) -> f64 {
        let mut sorted = self.power.clone();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[sorted.len() / 2];
        let peak = *sorted.last().unwrap_or(&0.0);
        10.0 * (peak / median).log10()
    }

    pub fn is_low_confidence(&self) -> bool {
        !(self.peak_to_median_db() >= LOW_CONFIDENCE_DB)
    }
}

/// Computes `|IDFT_K(Σ_t w ⊙ (y_t ⊘ s_t))|²` with `K = oversample · N_s` and a unitary
/// transform normalisation.
pub fn delay_spectrum(
    rx: &RxSymbols,
    pilots: &PilotGrid,
    config: &OfdmConfig,
    window: &[f64],
    oversample: usize,
) -> Result<DelaySpectrum> {
    check_pilot_shape(pilots, config)?;
    let ns = config.num_subcarriers;
    if rx.symbols.rows() != config.num_symbols || rx.symbols.cols() != ns {
        return Err(Error::DimensionMismatch(format!(
            "received grid is {}x{}, config expects {}x{}",
            rx.symbols.rows(),
            rx.symbols.cols(),
            config.num_symbols,
            ns
        )));
    }
    if window.len() != ns {
        return Err(Error::DimensionMismatch(format!(
            "window length {} != {} subcarriers",
            window.len(),
            ns
        )));
    }
    if oversample < 1 {
        return Err(Error::InvalidConfig("oversample must be at least 1".into()));
    }

    let k = oversample * ns;
    let mut buf = vec![Complex64::new(0.0, 0.0); k];
    for (t, (y, s)) in rx
        .symbols
        .iter_rows()
        .zip(pilots.symbols.iter_rows())
        .enumerate()
    {
        for n in 0..ns {
            if s[n].norm_sqr() == 0.0 {
                return Err(Error::ZeroPilot {
                    symbol: t,
                    subcarrier: n,
                });
            }
            buf[n] += window[n] * (y[n] / s[n]);
        }
    }
    FftPlanner::<f64>::new()
        .plan_fft_inverse(k)
        .process(&mut buf);
    let norm = 1.0 / k as f64;
    Ok(DelaySpectrum {
        power: buf.iter().map(|v| v.norm_sqr() * norm).collect(),
        bin_spacing: 1.0 / (k as f64 * config.subcarrier_spacing),
        window: window.to_vec(),
    })
}

/// How the LoS bin is chosen from the spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum PeakPolicy {
    #[default]
    GlobalPeak,
    /// Earliest local maximum within `threshold_db` of the global maximum.
    FirstPeak { threshold_db: f64 },
}

/// Time-of-arrival estimate extracted from a delay spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToaEstimate {
    /// Seconds in `[0, 1/Δf)`.
    pub toa: f64,
    pub peak_power: f64,
    pub peak_index: usize,
    pub interpolated: bool,
}

/// Picks a peak per `policy` and refines it by a parabola through the log-power of the
/// peak bin and its two circular neighbours.
pub fn estimate_toa(spec: &DelaySpectrum, policy: PeakPolicy) -> Result<ToaEstimate> {
    let z = &spec.power;
    let k = z.len();
    let (gmax_idx, gmax) = z
        .iter()
        .copied()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or(Error::ZeroSpectrum)?;
    if !(gmax > 0.0) {
        return Err(Error::ZeroSpectrum);
    }
    let at = |i: isize| z[i.rem_euclid(k as isize) as usize];

    let peak = match policy {
        PeakPolicy::GlobalPeak => gmax_idx,
        PeakPolicy::FirstPeak { threshold_db } => {
            let floor = gmax * 10f64.powf(-threshold_db.abs() / 10.0);
            (0..k)
                .find(|&i| {
                    let v = z[i];
                    v >= floor && v >= at(i as isize - 1) && v >= at(i as isize + 1)
                })
                .unwrap_or(gmax_idx)
        }
    };

    let (left, mid, right) = (at(peak as isize - 1), z[peak], at(peak as isize + 1));
    let mut offset = 0.0;
    let mut interpolated = false;
    if k >= 3 && left > 0.0 && right > 0.0 {
        let (l, m, r) = (left.ln(), mid.ln(), right.ln());
        let denom = l - 2.0 * m + r;
        if denom < 0.0 {
            offset = (0.5 * (l - r) / denom).clamp(-0.5, 0.5);
            interpolated = true;
        }
    }
    let bin = (peak as f64 + offset).rem_euclid(k as f64);
    Ok(ToaEstimate {
        toa: spec.delay_of_bin(bin),
        peak_power: mid,
        peak_index: peak,
        interpolated,
    })
}

/// Distance obtained from a two-way exchange.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeMeasurement {
    /// Meters.
    pub distance: f64,
    /// Standard deviation of `distance`, meters.
    pub sigma: f64,
    /// Clock offset used when simulating the exchange (seconds); cancels in `distance`.
    pub clock_bias_model: f64,
}

/// Combines forward and reverse ToAs into a distance, `c·(τ_fwd + τ_rev − t_proc)/2`.
///
/// A clock bias entering `+B` forward and `−B` in reverse cancels exactly.
/// `one_way_variance` is one link's contribution to the variance of the half round trip
/// distance, `c²·var(τ)/4` (m²); the returned sigma is `√(2·one_way_variance)`.
pub fn rtt_range(
    toa_fwd: f64,
    toa_rev: f64,
    processing_time: f64,
    one_way_variance: f64,
) -> Result<RangeMeasurement> {
    let distance = SPEED_OF_LIGHT * (toa_fwd + toa_rev - processing_time) / 2.0;
    if distance < 0.0 {
        return Err(Error::NegativeRange(distance));
    }
    if !(one_way_variance > 0.0) {
        return Err(Error::InvalidConfig(
            "one-way variance must be positive".into(),
        ));
    }
    Ok(RangeMeasurement {
        distance,
        sigma: (2.0 * one_way_variance).sqrt(),
        clock_bias_model: (toa_fwd - (toa_rev - processing_time)) / 2.0,
    })
}

/// Shifts the reverse ToA by a whole number of delay periods so that the round-trip sum
/// lies in `[−period/2, period/2)`. Undoes the spectrum wrap of a large clock offset.
pub fn unwrap_reverse_toa(toa_fwd: f64, toa_rev: f64, period: f64) -> f64 {
    let sum = toa_fwd + toa_rev;
    toa_rev - period * (sum / period).round()
}
