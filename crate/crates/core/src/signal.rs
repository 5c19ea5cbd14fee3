//! OFDM pilots and frequency-domain received-signal synthesis.
//!
//! Received symbols follow the post-FFT multipath model
//!
//! ```text
//! y[t][n] = Σ_l α_l · s[t][n] · exp(−j2π n (τ_l + B) Δf) · exp(j2π t v_l T_s / λ) + noise
//! ```
//!
//! with subcarrier index `n = 0..N_s` and symbol index `t = 0..T`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::propagation::PathComponent;
use crate::{Error, Result, SPEED_OF_LIGHT};

/// Waveform and radio budget of one sidelink pilot transmission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OfdmConfig {
    pub num_subcarriers: usize,
    /// Hz
    pub subcarrier_spacing: f64,
    pub num_symbols: usize,
    /// Seconds, cyclic prefix included.
    pub symbol_duration: f64,
    /// Hz
    pub carrier_freq: f64,
    /// Watts
    pub tx_power: f64,
    /// W/Hz before the receiver noise figure.
    pub noise_psd: f64,
    /// dB
    pub noise_figure: f64,
}

impl Default for OfdmConfig {
    fn default() -> Self {
        default_config()
    }
}

impl OfdmConfig {
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_freq
    }

    pub fn bandwidth(&self) -> f64 {
        self.num_subcarriers as f64 * self.subcarrier_spacing
    }

    /// Largest delay representable without aliasing, `1/Δf`.
    pub fn max_delay(&self) -> f64 {
        1.0 / self.subcarrier_spacing
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.num_subcarriers < 2 {
            return bad("num_subcarriers must be at least 2");
        }
        if !(self.subcarrier_spacing > 0.0) {
            return bad("subcarrier_spacing must be positive");
        }
        if self.num_symbols < 1 {
            return bad("num_symbols must be at least 1");
        }
        if !(self.symbol_duration >= 1.0 / self.subcarrier_spacing * (1.0 - 1e-12)) {
            return bad("symbol_duration must be at least 1/subcarrier_spacing");
        }
        if !(self.carrier_freq > 0.0 && self.tx_power > 0.0 && self.noise_psd > 0.0) {
            return bad("carrier frequency and powers must be positive");
        }
        if !self.noise_figure.is_finite() {
            return bad("noise_figure must be finite");
        }
        Ok(())
    }
}

/// Converts dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

/// 5.9 GHz carrier, 167 subcarriers at 120 kHz, 12 pilot symbols over 100.2 µs,
/// 10 dBm transmit power, −174 dBm/Hz noise and an 8 dB noise figure.
pub fn default_config() -> OfdmConfig {
    OfdmConfig {
        num_subcarriers: 167,
        subcarrier_spacing: 120e3,
        num_symbols: 12,
        symbol_duration: 100.2e-6 / 12.0,
        carrier_freq: 5.9e9,
        tx_power: dbm_to_watts(10.0),
        noise_psd: dbm_to_watts(-174.0),
        noise_figure: 8.0,
    }
}

/// Effective noise spectral density `N_0 = noise_psd · 10^(NF/10)`, which is also the
/// variance of each complex frequency-domain noise sample.
pub fn noise_variance(config: &OfdmConfig) -> f64 {
    config.noise_psd * 10f64.powf(config.noise_figure / 10.0)
}

/// Row-major `rows × cols` complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGrid {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexGrid {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [Complex64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Complex64> {
        self.data.iter()
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[Complex64]> {
        self.data.chunks(self.cols)
    }
}

/// Pilot phase pattern. All modes have constant amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseMode {
    #[default]
    AllOnes,
    SeededRandom,
}

/// Known pilot symbols, one row per OFDM symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotGrid {
    pub symbols: ComplexGrid,
}

/// Constant-amplitude pilots with per-symbol energy `P_tx/Δf`.
pub fn make_pilots(config: &OfdmConfig, mode: PhaseMode, seed: u64) -> PilotGrid {
    let amplitude =
        (config.tx_power / (config.subcarrier_spacing * config.num_subcarriers as f64)).sqrt();
    let mut grid = ComplexGrid::zeros(config.num_symbols, config.num_subcarriers);
    match mode {
        PhaseMode::AllOnes => grid
            .data
            .iter_mut()
            .for_each(|s| *s = Complex64::new(amplitude, 0.0)),
        PhaseMode::SeededRandom => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for s in grid.data.iter_mut() {
                let phase: f64 = rng.random_range(0.0..2.0 * PI);
                *s = Complex64::from_polar(amplitude, phase);
            }
        }
    }
    PilotGrid { symbols: grid }
}

/// Received frequency-domain symbols, one row per OFDM symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct RxSymbols {
    pub symbols: ComplexGrid,
    pub noise_variance_per_sample: f64,
}

/// Options that shape a single received-signal realisation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SynthesisOptions {
    /// Seed for the additive noise, or `None` for a noiseless observation.
    pub noise_seed: Option<u64>,
    pub doppler_enabled: bool,
    /// Transmitter-receiver clock offset in seconds.
    pub clock_bias: f64,
}

/// Synthesizes the received pilots for the given paths.
pub fn synthesize_rx(
    paths: &[PathComponent],
    pilots: &PilotGrid,
    config: &OfdmConfig,
    opts: SynthesisOptions,
) -> Result<RxSymbols> {
    let (nt, ns) = (config.num_symbols, config.num_subcarriers);
    check_pilot_shape(pilots, config)?;
    let max_delay = config.max_delay();
    if let Some(p) = paths.iter().find(|p| !(p.delay < max_delay)) {
        return Err(Error::DelayOutOfRange {
            delay: p.delay,
            max: max_delay,
        });
    }

    let df = config.subcarrier_spacing;
    let lambda = config.wavelength();
    // frequency response per subcarrier for each symbol: Σ α_l e^{jφ_l t} e^{−j2πn(τ_l+B)Δf}
    let mut out = ComplexGrid::zeros(nt, ns);
    for p in paths {
        let ramp = Complex64::from_polar(1.0, -2.0 * PI * (p.delay + opts.clock_bias) * df);
        let doppler_step = if opts.doppler_enabled {
            2.0 * PI * p.radial_velocity * config.symbol_duration / lambda
        } else {
            0.0
        };
        for t in 0..nt {
            let coeff = p.gain * Complex64::from_polar(1.0, doppler_step * t as f64);
            let pilot_row = pilots.symbols.row(t);
            let row = out.row_mut(t);
            let mut steer = Complex64::new(1.0, 0.0);
            for n in 0..ns {
                row[n] += coeff * pilot_row[n] * steer;
                steer *= ramp;
            }
        }
    }

    let variance = noise_variance(config);
    if let Some(seed) = opts.noise_seed {
        add_noise(&mut out, variance, seed);
    }
    Ok(RxSymbols {
        symbols: out,
        noise_variance_per_sample: variance,
    })
}

pub(crate) fn check_pilot_shape(pilots: &PilotGrid, config: &OfdmConfig) -> Result<()> {
    let g = &pilots.symbols;
    if g.rows() != config.num_symbols || g.cols() != config.num_subcarriers {
        return Err(Error::DimensionMismatch(format!(
            "pilot grid is {}x{}, config expects {}x{}",
            g.rows(),
            g.cols(),
            config.num_symbols,
            config.num_subcarriers
        )));
    }
    Ok(())
}

/// Adds i.i.d. circular complex Gaussian noise of total variance `variance`.
fn add_noise(grid: &mut ComplexGrid, variance: f64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, (variance / 2.0).sqrt()).expect("finite noise variance");
    for s in grid.data.iter_mut() {
        *s += Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng));
    }
}
