//! Scenario files.
//!
//! A scenario is JSON. Physical quantities are strings with a unit suffix
//! (`"20 dBm"`, `"0.1 W"`, `"-174 dBm/Hz"`, `"0.5 MHz"`, `"1500 J"`); they are
//! written back in SI units with enough digits to re-read bit-exactly.
//! Every section and field is optional and defaults to the reference
//! deployment.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::channel::DeviceProfile;
use crate::cost::{SystemParams, DEFAULT_MODEL_BITS};
use crate::error::{Error, Result};
use crate::schedule::{BoundParams, ScheduleScheme};
use crate::sensing::{default_scene, ChirpParams, PrimitiveSet, QualityOptions, DEFAULT_CLUTTER_PSD};
use crate::sim::SurrogateLossModel;
use crate::units::{self, dbm_to_w};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(with = "units::frequency")]
    pub subcarrier_bandwidth: f64,
    #[serde(with = "units::psd")]
    pub noise_psd: f64,
    pub model_bits: f64,
    #[serde(with = "units::time")]
    pub unit_sensing_time: f64,
    pub cycles_per_sample: f64,
    pub local_steps: u32,
    #[serde(with = "units::frequency")]
    pub cpu_frequency: f64,
    pub capacitance: f64,
    pub rounds: usize,
    #[serde(with = "units::time")]
    pub t_max: f64,
    #[serde(with = "units::energy")]
    pub e_max: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        let s = SystemParams::reference();
        Self {
            subcarrier_bandwidth: s.b0_hz,
            noise_psd: s.n0_w_per_hz,
            model_bits: DEFAULT_MODEL_BITS,
            unit_sensing_time: s.t0_s,
            cycles_per_sample: s.nu,
            local_steps: s.tau,
            cpu_frequency: s.f_cpu,
            capacitance: s.theta,
            rounds: s.rounds,
            t_max: s.t_max_s,
            e_max: s.e_max_j,
        }
    }
}

/// Seed of the default device layout.
pub const DEFAULT_LAYOUT_SEED: u64 = 7;

/// Devices dropped uniformly over a disk around the server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorSpec {
    pub count: usize,
    #[serde(with = "units::distance")]
    pub radius: f64,
    #[serde(with = "units::distance")]
    pub min_distance: f64,
    pub seed: u64,
    /// Draw log-normal shadowing per device; off means 0 dB everywhere.
    pub shadowing: bool,
    #[serde(with = "units::decibel")]
    pub shadowing_std: f64,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        Self {
            count: 6,
            radius: 500.0,
            min_distance: 10.0,
            seed: DEFAULT_LAYOUT_SEED,
            shadowing: true,
            shadowing_std: 8f64.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceSpec {
    #[serde(with = "units::distance")]
    pub distance: f64,
    #[serde(default, with = "units::decibel")]
    pub shadowing: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DevicesConfig {
    #[serde(with = "units::power")]
    pub p_c_max: f64,
    #[serde(with = "units::power")]
    pub p_s_min: f64,
    #[serde(with = "units::power")]
    pub p_s_max: f64,
    /// Used when `list` is absent.
    pub generator: GeneratorSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub list: Option<Vec<DeviceSpec>>,
}

impl Default for DevicesConfig {
    fn default() -> Self {
        Self {
            p_c_max: dbm_to_w(20.0),
            p_s_min: dbm_to_w(20.0),
            p_s_max: dbm_to_w(30.0),
            generator: GeneratorSpec::default(),
            list: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleConfig {
    pub scheme: ScheduleScheme,
    /// Initial batch as a fraction of the average batch `b_sum/R`.
    pub b0_frac: f64,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            scheme: ScheduleScheme::AdaptiveSqrt,
            b0_frac: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensingConfig {
    #[serde(with = "units::psd")]
    pub clutter_psd: f64,
    pub trials: usize,
    pub seed: u64,
    pub epsilon: f64,
    /// Powers swept by `sense-quality` when none are given on the command line.
    pub powers_dbm: Vec<f64>,
    pub scene: PrimitiveSet,
}

impl Default for SensingConfig {
    fn default() -> Self {
        let q = QualityOptions::default();
        Self {
            clutter_psd: DEFAULT_CLUTTER_PSD,
            trials: q.trials,
            seed: q.seed,
            epsilon: q.epsilon,
            powers_dbm: (0..=15).map(|i| 2.0 * i as f64).collect(),
            scene: default_scene(),
        }
    }
}

impl SensingConfig {
    pub fn quality_options(&self) -> QualityOptions {
        QualityOptions {
            epsilon: self.epsilon,
            trials: self.trials,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub system: SystemConfig,
    pub devices: DevicesConfig,
    pub bound: BoundParams,
    pub model: SurrogateLossModel,
    pub chirp: ChirpParams,
    pub schedule: ScheduleConfig,
    pub sensing: SensingConfig,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("scenario: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn device_count(&self) -> usize {
        self.devices.list.as_ref().map_or(self.devices.generator.count, Vec::len)
    }

    pub fn system_params(&self) -> SystemParams {
        let s = &self.system;
        SystemParams {
            k: self.device_count(),
            b0_hz: s.subcarrier_bandwidth,
            n0_w_per_hz: s.noise_psd,
            d_bits: s.model_bits,
            t0_s: s.unit_sensing_time,
            nu: s.cycles_per_sample,
            tau: s.local_steps,
            f_cpu: s.cpu_frequency,
            theta: s.capacitance,
            rounds: s.rounds,
            t_max_s: s.t_max,
            e_max_j: s.e_max,
        }
    }

    pub fn device_profiles(&self) -> Result<Vec<DeviceProfile>> {
        let d = &self.devices;
        match &d.list {
            Some(list) => list
                .iter()
                .enumerate()
                .map(|(i, spec)| {
                    DeviceProfile::new(i, spec.distance / 1000.0, spec.shadowing, d.p_c_max, d.p_s_min, d.p_s_max)
                })
                .collect(),
            None => generate_devices(&d.generator, d.p_c_max, d.p_s_min, d.p_s_max),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.system_params().validate()?;
        let g = &self.devices.generator;
        if self.devices.list.is_none() {
            if g.count == 0 {
                return Err(Error::InvalidParameter("generator count must be >= 1".into()));
            }
            if !(g.min_distance > 0.0 && g.min_distance < g.radius) {
                return Err(Error::InvalidParameter(format!(
                    "need 0 < min_distance < radius, got {} m and {} m",
                    g.min_distance, g.radius
                )));
            }
            if !(g.shadowing_std >= 0.0) {
                return Err(Error::InvalidParameter("shadowing_std must be >= 0".into()));
            }
        }
        self.device_profiles()?;
        self.bound.validate()?;
        self.model.validate()?;
        self.chirp.validate()?;
        self.sensing.scene.validate()?;
        if !(self.schedule.b0_frac > 0.0) {
            return Err(Error::InvalidParameter("b0_frac must be > 0".into()));
        }
        if !(self.sensing.clutter_psd >= 0.0) || self.sensing.trials == 0 {
            return Err(Error::InvalidParameter(
                "clutter_psd must be >= 0 and trials >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Uniform placement over the annulus `[min_distance, radius]` (uniform in
/// area) with optional Gaussian shadowing in dB. Deterministic in the seed.
pub fn generate_devices(
    spec: &GeneratorSpec,
    p_c_max: f64,
    p_s_min: f64,
    p_s_max: f64,
) -> Result<Vec<DeviceProfile>> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let shadow = Normal::new(0.0, spec.shadowing_std)
        .map_err(|e| Error::InvalidParameter(format!("shadowing: {e}")))?;
    let (r2, m2) = (spec.radius.powi(2), spec.min_distance.powi(2));
    (0..spec.count)
        .map(|id| {
            let u: f64 = rng.random();
            let dist_m = (m2 + u * (r2 - m2)).sqrt();
            let s: f64 = shadow.sample(&mut rng);
            let shadowing_db = if spec.shadowing { s } else { 0.0 };
            DeviceProfile::new(id, dist_m / 1000.0, shadowing_db, p_c_max, p_s_min, p_s_max)
        })
        .collect()
}
