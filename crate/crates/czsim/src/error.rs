//! Crate-wide error type.

use thiserror::Error;

/// Everything that can go wrong across the simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// Fock-space truncation below the physical minimum.
    #[error("invalid mode dimension {0}: need at least 2 levels")]
    InvalidDimension(usize),

    /// Product-space dimension beyond the configured cap.
    #[error("product space dimension {0} exceeds cap {1}")]
    DimensionOverflow(usize, usize),

    /// Effective-coupling formula evaluated at a resonant denominator.
    #[error("effective coupling singular: qubit resonant with coupler (detuning {0:.3e} rad/ns)")]
    ResonantDenominator(f64),

    /// Flux control requested on a fixed-frequency element.
    #[error("element {0} is not flux-tunable")]
    NotTunable(&'static str),

    /// Frequency outside the reachable band of the tuning curve.
    #[error("frequency {0:.6} GHz outside tunable range [{1:.6}, {2:.6}] GHz")]
    FrequencyOutOfRange(f64, f64, f64),

    /// Eigenstate labeling by bare overlap was ambiguous.
    #[error("degenerate labeling: best overlap {0:.3} < 0.5 for bare state {1}")]
    DegenerateLabeling(f64, String),

    /// Ill-formed pulse segment.
    #[error("invalid pulse shape: {0}")]
    InvalidShape(String),

    /// Overlapping segments on one schedule channel.
    #[error("schedule error: {0}")]
    Schedule(String),

    /// Line-distortion inverse would be unstable.
    #[error("distortion filter unstable: amplitude fraction {0} ≤ -1")]
    UnstableFilter(f64),

    /// Controls not sampled on a single uniform grid.
    #[error("sampling error: {0}")]
    Sampling(String),

    /// Density-matrix integration lost the trace.
    #[error("integration error: trace drift {0:.3e} exceeds 1e-6")]
    TraceDrift(f64),

    /// Bad probability or other out-of-range setting.
    #[error("config error: {0}")]
    Config(String),

    /// Ramsey fringe too flat to fit a phase.
    #[error("low contrast: fringe contrast {0:.3} < 0.1")]
    LowContrast(f64),

    /// Fourier column had no peak above the resolution floor.
    #[error("no spectral peak above resolution floor")]
    BelowResolution,

    /// Interleaved gate is not a Clifford-group element.
    #[error("interleaved gate is not in the two-qubit Clifford group")]
    InvalidInterleave,

    /// Backend cannot provide what the benchmark needs.
    #[error("unsupported backend operation: {0}")]
    Unsupported(String),

    /// Decay-curve fit did not converge or is degenerate.
    #[error("fit error: {0}")]
    Fit(String),

    /// Optimizer hit a non-finite objective value.
    #[error("optimizer abort: non-finite objective at evaluation {0}")]
    NonFiniteObjective(usize),

    /// Calibration preconditions not met (e.g. no φc = π crossing in range).
    #[error("calibration error: {0}")]
    Calibration(String),

    /// I/O failure while reading config or writing artifacts.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed device/run configuration file.
    #[error("config parse error: {0}")]
    ConfigParse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
