//! Monte Carlo orchestration: trajectory sweeps, RMSE-versus-bound curves, positioning
//! demos and requirement-set scoring.

mod check;
mod csv;
mod demo;
mod requirements;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use std::path::PathBuf;

use crate::bounds::{reb_waa, BoundOptions, DEFAULT_BETA, DEFAULT_CONDITION_CUTOFF};
use crate::estimation::{
    delay_spectrum, estimate_toa, unwrap_reverse_toa, PeakPolicy, WindowKind, DEFAULT_OVERSAMPLE,
};
use crate::geometry::Pose;
use crate::propagation::{
    build_scenario, sample_device, sample_trajectory, trace_paths, ChannelSnapshot, Device,
    ScenarioConfig,
};
use crate::signal::{
    default_config, make_pilots, synthesize_rx, OfdmConfig, PhaseMode, PilotGrid, SynthesisOptions,
};
use crate::{Error, Result, SPEED_OF_LIGHT};

pub use check::{coherence_and_latency_check, CoherenceReport};
pub use csv::{export_csv, export_spectra_csv, parse_csv, write_csv, CSV_HEADER};
pub use demo::{
    empirical_quantile, parse_anchors, read_anchors_file, run_positioning_demo, PositioningSummary,
    SetOutcome,
};
pub use requirements::{RequirementSet, REQUIREMENT_SETS};

/// Which pair of devices exchanges the round trip.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Link {
    RsuVehicle,
    RsuBicycle,
    VehicleBicycle,
}

impl std::str::FromStr for Link {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rsu-vehicle" => Ok(Link::RsuVehicle),
            "rsu-bicycle" => Ok(Link::RsuBicycle),
            "vehicle-bicycle" => Ok(Link::VehicleBicycle),
            other => Err(Error::InvalidConfig(format!("unknown link `{other}`"))),
        }
    }
}

impl std::fmt::Display for Link {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Link::RsuVehicle => "rsu-vehicle",
            Link::RsuBicycle => "rsu-bicycle",
            Link::VehicleBicycle => "vehicle-bicycle",
        })
    }
}

/// Everything that defines one ranging sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub link: Link,
    pub trials: usize,
    pub seed: u64,
    pub beta: f64,
    pub condition_cutoff: f64,
    pub oversample: usize,
    pub peak_policy: PeakPolicy,
    pub window: WindowKind,
    pub doppler_enabled: bool,
    /// Standard deviation of the per-exchange clock bias, seconds.
    pub clock_bias_std: f64,
    pub ofdm: OfdmConfig,
    pub pilot_mode: PhaseMode,
    pub output_path: Option<PathBuf>,
}

impl RunConfig {
    /// Defaults: 100 trials, β = 1.5, 16× oversampling, Hamming window, global peak,
    /// Doppler on and a 1 µs clock-bias spread.
    pub fn new(scenario_id: u8, link: Link) -> Result<Self> {
        Ok(Self {
            scenario: build_scenario(scenario_id)?,
            link,
            trials: 100,
            seed: 42,
            beta: DEFAULT_BETA,
            condition_cutoff: DEFAULT_CONDITION_CUTOFF,
            oversample: DEFAULT_OVERSAMPLE,
            peak_policy: PeakPolicy::GlobalPeak,
            window: WindowKind::Hamming,
            doppler_enabled: true,
            clock_bias_std: 1e-6,
            ofdm: default_config(),
            pilot_mode: PhaseMode::AllOnes,
            output_path: None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.ofdm.validate()?;
        if self.trials < 1 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if !(self.clock_bias_std >= 0.0) {
            return Err(Error::InvalidConfig("clock_bias_std must be >= 0".into()));
        }
        if !(self.beta > 1.0 && self.beta < 2.0) {
            return Err(Error::InvalidBeta(self.beta));
        }
        let has_rsu = self.scenario.rsu.is_some();
        let ok = match self.link {
            Link::RsuVehicle | Link::RsuBicycle => has_rsu && self.scenario.scenario_id == 1,
            Link::VehicleBicycle => !has_rsu && self.scenario.scenario_id == 2,
        };
        if !ok {
            return Err(Error::InvalidConfig(format!(
                "link {} is not available in scenario {}",
                self.link, self.scenario.scenario_id
            )));
        }
        Ok(())
    }

    fn bound_options(&self) -> BoundOptions {
        BoundOptions {
            beta: self.beta,
            condition_cutoff: self.condition_cutoff,
        }
    }
}

/// One trajectory sample of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSample {
    pub index: usize,
    pub time: f64,
    /// Signed lane coordinate (vehicle y or bicycle x), meters.
    pub sweep_coord: f64,
    pub tx: Pose,
    pub rx: Pose,
}

/// Trajectory samples at the scenario's measurement interval.
pub fn sweep_samples(cfg: &RunConfig) -> Result<Vec<SweepSample>> {
    let scenario = &cfg.scenario;
    let horizon = match cfg.link {
        Link::RsuVehicle => scenario.device_horizon(Device::Vehicle),
        Link::RsuBicycle => scenario.device_horizon(Device::Bicycle),
        Link::VehicleBicycle => scenario.horizon(),
    };
    let count = (horizon / scenario.measurement_interval + 1e-9).floor() as usize + 1;
    (0..count)
        .map(|index| {
            let time = (index as f64 * scenario.measurement_interval).min(horizon);
            let (tx, rx, sweep_coord) = match cfg.link {
                Link::RsuVehicle | Link::RsuBicycle => {
                    let rsu = scenario.rsu.ok_or_else(|| {
                        Error::InvalidConfig("scenario has no road-side unit".into())
                    })?;
                    if cfg.link == Link::RsuVehicle {
                        let v = sample_device(scenario, Device::Vehicle, time)?;
                        (rsu, v, v.position.y)
                    } else {
                        let b = sample_device(scenario, Device::Bicycle, time)?;
                        (rsu, b, b.position.x)
                    }
                }
                Link::VehicleBicycle => {
                    let (v, b) = sample_trajectory(scenario, time)?;
                    (v, b, v.position.y)
                }
            };
            Ok(SweepSample {
                index,
                time,
                sweep_coord,
                tx,
                rx,
            })
        })
        .collect()
}

/// One row of the RMSE-versus-bounds curve. Bound fields are NaN when the LoS is
/// blocked; `rmse` is NaN for bounds-only sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub sweep_coord: f64,
    pub true_range: f64,
    pub rmse: f64,
    pub reb_los: f64,
    pub reb_all: f64,
    pub reb_waa: f64,
    pub waa_bias: f64,
    pub n_paths: usize,
    pub n_cell_paths: usize,
    pub los_present: bool,
    /// Trials whose spectrum peak was under 10 dB above the median bin (not exported).
    pub low_confidence_trials: usize,
}

/// Deterministic per-stream seed from `(seed, sample, trial)` via SplitMix64 mixing.
pub fn stream_seed(seed: u64, sample: u64, trial: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(mix(mix(seed) ^ sample) ^ trial)
}

struct SampleChannels {
    forward: ChannelSnapshot,
    reverse: ChannelSnapshot,
    point: CurvePoint,
}

fn trace_sample(cfg: &RunConfig, s: &SweepSample, pilots: &PilotGrid) -> Result<SampleChannels> {
    let lambda = cfg.ofdm.wavelength();
    let mut forward = trace_paths(&s.tx, &s.rx, &cfg.scenario, lambda)?;
    let mut reverse = trace_paths(&s.rx, &s.tx, &cfg.scenario, lambda)?;
    forward.time = s.time;
    reverse.time = s.time;

    let true_range = s.tx.position.distance(s.rx.position);
    let mut point = CurvePoint {
        sweep_coord: s.sweep_coord,
        true_range,
        rmse: f64::NAN,
        reb_los: f64::NAN,
        reb_all: f64::NAN,
        reb_waa: f64::NAN,
        waa_bias: f64::NAN,
        n_paths: forward.paths.len(),
        n_cell_paths: 0,
        los_present: forward.has_los(),
        low_confidence_trials: 0,
    };
    if point.los_present {
        let report = reb_waa(&forward.paths, pilots, &cfg.ofdm, &cfg.bound_options())?;
        point.reb_los = report.reb_los_only;
        point.reb_all = report.reb_all_paths;
        point.reb_waa = report.reb_waa;
        point.waa_bias = report.waa_bias;
        point.n_cell_paths = report.cell_indices.len();
    }
    Ok(SampleChannels {
        forward,
        reverse,
        point,
    })
}

/// Estimated RTT distance for one trial, and whether either spectrum was low confidence.
fn rtt_trial(
    cfg: &RunConfig,
    ch: &SampleChannels,
    pilots: &PilotGrid,
    window: &[f64],
    rng_seed: u64,
) -> Result<(f64, bool)> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let bias = if cfg.clock_bias_std > 0.0 {
        Normal::new(0.0, cfg.clock_bias_std)
            .expect("finite clock-bias spread")
            .sample(&mut rng)
    } else {
        0.0
    };
    let mut one_way = |paths, clock_bias| -> Result<_> {
        let opts = SynthesisOptions {
            noise_seed: Some(rng.next_u64()),
            doppler_enabled: cfg.doppler_enabled,
            clock_bias,
        };
        let rx = synthesize_rx(paths, pilots, &cfg.ofdm, opts)?;
        let spec = delay_spectrum(&rx, pilots, &cfg.ofdm, window, cfg.oversample)?;
        let toa = estimate_toa(&spec, cfg.peak_policy)?;
        Ok((toa.toa, spec.is_low_confidence(), spec.period()))
    };
    let (fwd, low_f, period) = one_way(&ch.forward.paths, bias)?;
    let (rev, low_r, _) = one_way(&ch.reverse.paths, -bias)?;
    let rev = unwrap_reverse_toa(fwd, rev, period);
    // processing time is known and already removed
    let distance = SPEED_OF_LIGHT * (fwd + rev) / 2.0;
    Ok((distance, low_f || low_r))
}

/// Runs the Monte Carlo ranging sweep along the link's trajectory and, when
/// `output_path` is set, writes the curve as CSV.
pub fn run_ranging_sweep(cfg: &RunConfig) -> Result<Vec<CurvePoint>> {
    cfg.validate()?;
    let pilots = make_pilots(&cfg.ofdm, cfg.pilot_mode, cfg.seed);
    let window = cfg.window.weights(cfg.ofdm.num_subcarriers)?;
    let samples = sweep_samples(cfg)?;

    let points = samples
        .par_iter()
        .map(|s| {
            let ch = trace_sample(cfg, s, &pilots)?;
            let mut sq = 0.0;
            let mut low = 0;
            for trial in 0..cfg.trials {
                let seed = stream_seed(cfg.seed, s.index as u64, trial as u64);
                let (d, low_conf) = rtt_trial(cfg, &ch, &pilots, &window, seed)?;
                sq += (d - ch.point.true_range).powi(2);
                low += low_conf as usize;
            }
            Ok(CurvePoint {
                rmse: (sq / cfg.trials as f64).sqrt(),
                low_confidence_trials: low,
                ..ch.point
            })
        })
        .collect::<Result<Vec<_>>>()?;

    if let Some(path) = &cfg.output_path {
        export_csv(&points, path)?;
    }
    Ok(points)
}

/// Bounds along the trajectory without Monte Carlo (`rmse` is NaN).
pub fn run_bounds_sweep(cfg: &RunConfig) -> Result<Vec<CurvePoint>> {
    cfg.validate()?;
    let pilots = make_pilots(&cfg.ofdm, cfg.pilot_mode, cfg.seed);
    let points = sweep_samples(cfg)?
        .par_iter()
        .map(|s| trace_sample(cfg, s, &pilots).map(|ch| ch.point))
        .collect::<Result<Vec<_>>>()?;
    if let Some(path) = &cfg.output_path {
        export_csv(&points, path)?;
    }
    Ok(points)
}

/// Noiseless delay spectrum at one sweep sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSlice {
    pub sweep_coord: f64,
    /// Bin delays, seconds.
    pub delays: Vec<f64>,
    pub power: Vec<f64>,
}

/// Noiseless forward-link delay spectra along the sweep.
pub fn sweep_spectra(cfg: &RunConfig) -> Result<Vec<SpectrumSlice>> {
    cfg.validate()?;
    let pilots = make_pilots(&cfg.ofdm, cfg.pilot_mode, cfg.seed);
    let window = cfg.window.weights(cfg.ofdm.num_subcarriers)?;
    sweep_samples(cfg)?
        .par_iter()
        .map(|s| {
            let lambda = cfg.ofdm.wavelength();
            let ch = trace_paths(&s.tx, &s.rx, &cfg.scenario, lambda)?;
            let opts = SynthesisOptions {
                doppler_enabled: cfg.doppler_enabled,
                ..Default::default()
            };
            let rx = synthesize_rx(&ch.paths, &pilots, &cfg.ofdm, opts)?;
            let spec = delay_spectrum(&rx, &pilots, &cfg.ofdm, &window, cfg.oversample)?;
            let delays = (0..spec.len())
                .map(|k| spec.delay_of_bin(k as f64))
                .collect();
            Ok(SpectrumSlice {
                sweep_coord: s.sweep_coord,
                delays,
                power: spec.power,
            })
        })
        .collect()
}
