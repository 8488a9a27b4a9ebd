//! File-driven run configuration.
//!
//! Config files are TOML and speak interface units (GHz, MHz, µs, ns,
//! volts); every section is optional and falls back to the reference-device
//! defaults, so an empty file reproduces [`DeviceParams::default`]. Zero in
//! a coherence-time slot disables that decay channel.

use crate::device::{DeviceParams, FluxMap};
use crate::error::{Error, Result};
use crate::units;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Device parameters in interface units (arrays ordered Q1, C, Q2).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceSection {
    pub omega_max_ghz: [f64; 3],
    pub omega_idle_ghz: [f64; 3],
    pub alpha_ghz: [f64; 3],
    pub g_1c_mhz: f64,
    pub g_2c_mhz: f64,
    pub g_12_mhz: f64,
    /// Relaxation times in µs; 0 = lossless.
    pub t1_us: [f64; 3],
    /// Pure-dephasing times in µs; 0 = none.
    pub t_phi_us: [f64; 3],
    pub dims: [usize; 3],
}

impl Default for DeviceSection {
    fn default() -> Self {
        DeviceSection {
            omega_max_ghz: [4.508, 5.419, 4.701],
            omega_idle_ghz: [4.283, 5.419, 4.679],
            alpha_ghz: [-0.290, -0.124, -0.306],
            g_1c_mhz: 100.0,
            g_2c_mhz: 100.0,
            g_12_mhz: 5.0,
            t1_us: [20.9, 0.0, 28.8],
            // T_φ = 2·T1 (T2 = T1); spelled as products so the conversion
            // reproduces the reference parameters bit-for-bit.
            t_phi_us: [2.0 * 20.9, 0.0, 2.0 * 28.8],
            dims: [3, 3, 3],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FluxSection {
    pub v_period: f64,
    pub v_offset: f64,
    pub tunable: [bool; 3],
}

impl Default for FluxSection {
    fn default() -> Self {
        let f = FluxMap::default();
        FluxSection {
            v_period: f.v_period,
            v_offset: f.v_offset,
            tunable: f.tunable,
        }
    }
}

/// Uniform 1D sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Sweep {
    pub fn new(start: f64, stop: f64, points: usize) -> Self {
        Sweep {
            start,
            stop,
            points,
        }
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        if self.points < 1 {
            return Err(Error::Config("sweep needs at least one point".into()));
        }
        if self.points == 1 {
            return Ok(vec![self.start]);
        }
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        Ok((0..self.points)
            .map(|k| self.start + step * k as f64)
            .collect())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectroscopySection {
    pub coupler_bias: Sweep,
}

impl Default for SpectroscopySection {
    fn default() -> Self {
        SpectroscopySection {
            coupler_bias: Sweep::new(0.0, 0.35, 71),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChevronSection {
    pub coupler_bias: Sweep,
    /// Hold time in ns (start fixed at 0).
    pub tau_stop_ns: f64,
    pub tau_points: usize,
    /// Common qubit park frequency during the chevron, GHz.
    pub resonance_ghz: f64,
}

impl Default for ChevronSection {
    fn default() -> Self {
        ChevronSection {
            coupler_bias: Sweep::new(0.0, 0.32, 33),
            tau_stop_ns: 500.0,
            tau_points: 251,
            resonance_ghz: 4.110,
        }
    }
}

impl ChevronSection {
    pub fn tau_values(&self) -> Result<Vec<f64>> {
        Sweep::new(0.0, self.tau_stop_ns, self.tau_points).values()
    }
}

/// The CZ working point used by phase/Ramsey/RB commands before (or instead
/// of) running a tune-up. Defaults to the tuned adiabatic gate of the
/// reference device.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CzSection {
    pub v_b: f64,
    pub duration_ns: f64,
}

impl Default for CzSection {
    fn default() -> Self {
        CzSection {
            v_b: 0.232047,
            duration_ns: 104.692,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseScanSection {
    pub coupler_bias: Sweep,
    pub duration_ns: f64,
}

impl Default for PhaseScanSection {
    fn default() -> Self {
        PhaseScanSection {
            coupler_bias: Sweep::new(0.18, 0.28, 21),
            duration_ns: 30.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LeakageSection {
    pub coupler_bias: Sweep,
    pub qubit_bias: Sweep,
    pub duration_ns: f64,
    pub rise_ns: f64,
}

impl Default for LeakageSection {
    fn default() -> Self {
        LeakageSection {
            coupler_bias: Sweep::new(0.18, 0.28, 21),
            qubit_bias: Sweep::new(0.06, 0.14, 21),
            duration_ns: 18.0,
            rise_ns: 2.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RamseySection {
    pub alpha_points: usize,
}

impl Default for RamseySection {
    fn default() -> Self {
        RamseySection { alpha_points: 41 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TuneupSection {
    pub max_evals: usize,
    /// Adiabatic pre-scan / starting duration, ns.
    pub adiabatic_scan_duration_ns: f64,
    pub diabatic_rise_ns: f64,
    pub diabatic_max_duration_ns: f64,
}

impl Default for TuneupSection {
    fn default() -> Self {
        TuneupSection {
            max_evals: 100,
            adiabatic_scan_duration_ns: 30.0,
            diabatic_rise_ns: 2.0,
            diabatic_max_duration_ns: 20.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RbSection {
    pub lengths: Vec<usize>,
    pub samples: usize,
    /// Interleave the tuned CZ after each reference Clifford.
    pub interleave_cz: bool,
}

impl Default for RbSection {
    fn default() -> Self {
        RbSection {
            lengths: vec![1, 3, 6, 10, 15, 25, 40],
            samples: 20,
            interleave_cz: false,
        }
    }
}

/// Full run configuration.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub device: DeviceSection,
    pub flux: FluxSection,
    pub spectroscopy: SpectroscopySection,
    pub chevron: ChevronSection,
    pub cz: CzSection,
    pub phase_scan: PhaseScanSection,
    pub leakage: LeakageSection,
    pub ramsey: RamseySection,
    pub tuneup: TuneupSection,
    pub rb: RbSection,
}

fn time_us(value: f64) -> f64 {
    if value > 0.0 {
        units::us(value)
    } else {
        f64::INFINITY
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))
    }

    /// Device parameters in internal units, validated.
    pub fn device_params(&self) -> Result<DeviceParams> {
        let d = &self.device;
        let params = DeviceParams {
            omega_max: d.omega_max_ghz.map(units::ghz),
            omega_idle: d.omega_idle_ghz.map(units::ghz),
            alpha: d.alpha_ghz.map(units::ghz),
            g_1c: units::mhz(d.g_1c_mhz),
            g_2c: units::mhz(d.g_2c_mhz),
            g_12: units::mhz(d.g_12_mhz),
            t1: d.t1_us.map(time_us),
            t_phi: d.t_phi_us.map(time_us),
            dims: d.dims,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn flux_map(&self) -> Result<FluxMap> {
        if !(self.flux.v_period > 0.0) {
            return Err(Error::Config(format!(
                "flux period must be positive, got {}",
                self.flux.v_period
            )));
        }
        Ok(FluxMap {
            v_period: self.flux.v_period,
            v_offset: self.flux.v_offset,
            tunable: self.flux.tunable,
        })
    }

    /// SHA-256 of the canonical (re-serialized, defaults filled in) TOML
    /// form: identical effective configs hash identically regardless of
    /// which keys the file spelled out.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let canonical = toml::to_string(self).expect("config serializes");
        let mut h = Sha256::new();
        h.update(canonical.as_bytes());
        let digest = h.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
