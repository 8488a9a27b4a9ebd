//! Device parameters, truncated-Fock-space Hamiltonian, and derived
//! quantities: effective qubit–qubit coupling, residual ZZ rate, and the
//! flux-to-frequency tuning curve.
//!
//! Tensor ordering is fixed as `Q1 ⊗ C ⊗ Q2`; state labels `|n1, nc, n2⟩`
//! follow the same order. All frequencies are angular (rad/ns), times ns.

use crate::error::{Error, Result};
use crate::linalg::eigh;
use crate::units;
use crate::{C64, CMat};
use serde::{Deserialize, Serialize};

/// Cap on the product-space dimension; protects against accidental
/// `dims` typos blowing up dense linear algebra.
pub const MAX_PRODUCT_DIM: usize = 4096;

/// The three modes of the device, in tensor order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Element {
    Q1,
    C,
    Q2,
}

impl Element {
    pub const ALL: [Element; 3] = [Element::Q1, Element::C, Element::Q2];

    /// Index into per-element arrays (tensor order Q1, C, Q2).
    pub fn index(self) -> usize {
        match self {
            Element::Q1 => 0,
            Element::C => 1,
            Element::Q2 => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Element::Q1 => "Q1",
            Element::C => "C",
            Element::Q2 => "Q2",
        }
    }
}

/// Physical parameters of the two-qubit + coupler device.
///
/// Arrays are indexed `[Q1, C, Q2]`. Frequencies/couplings in rad/ns
/// (angular), times in ns; `f64::INFINITY` disables a decay channel.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceParams {
    /// Sweet-spot (zero-flux) frequencies.
    pub omega_max: [f64; 3],
    /// Idle-point operating frequencies.
    pub omega_idle: [f64; 3],
    /// Anharmonicities (negative).
    pub alpha: [f64; 3],
    /// Qubit–coupler couplings and direct qubit–qubit coupling.
    pub g_1c: f64,
    pub g_2c: f64,
    pub g_12: f64,
    /// Relaxation times.
    pub t1: [f64; 3],
    /// Pure-dephasing times (derived as 1/T_φ = 1/T2 − 1/(2·T1)).
    pub t_phi: [f64; 3],
    /// Fock truncation per mode.
    pub dims: [usize; 3],
}

impl Default for DeviceParams {
    /// Reference device: transmon pair at 4.508 / 4.701 GHz maxima with a
    /// 5.419 GHz coupler, g_1c = g_2c = 2π·100 MHz, g_12 = 2π·5 MHz,
    /// T1 = 20.9 / 28.8 µs and T2 = T1 (so T_φ = 2·T1).
    fn default() -> Self {
        let t1 = [units::us(20.9), f64::INFINITY, units::us(28.8)];
        DeviceParams {
            omega_max: [units::ghz(4.508), units::ghz(5.419), units::ghz(4.701)],
            omega_idle: [units::ghz(4.283), units::ghz(5.419), units::ghz(4.679)],
            alpha: [units::ghz(-0.290), units::ghz(-0.124), units::ghz(-0.306)],
            g_1c: units::mhz(100.0),
            g_2c: units::mhz(100.0),
            g_12: units::mhz(5.0),
            t1,
            t_phi: [2.0 * t1[0], f64::INFINITY, 2.0 * t1[2]],
            dims: [3, 3, 3],
        }
    }
}

impl DeviceParams {
    /// Product-space dimension.
    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Flattened index of the bare state `|n1, nc, n2⟩`.
    pub fn state_index(&self, n1: usize, nc: usize, n2: usize) -> usize {
        (n1 * self.dims[1] + nc) * self.dims[2] + n2
    }

    /// Bare label `(n1, nc, n2)` of a flattened index.
    pub fn state_label(&self, i: usize) -> (usize, usize, usize) {
        let n2 = i % self.dims[2];
        let r = i / self.dims[2];
        (r / self.dims[1], r % self.dims[1], n2)
    }

    /// Check structural invariants.
    pub fn validate(&self) -> Result<()> {
        for i in 0..3 {
            if self.dims[i] < 2 {
                return Err(Error::InvalidDimension(self.dims[i]));
            }
            if !(self.omega_max[i] > 0.0) || !(self.alpha[i] < 0.0) {
                return Err(Error::Config(format!(
                    "element {} needs omega_max > 0 and alpha < 0",
                    Element::ALL[i].name()
                )));
            }
            if !(self.t1[i] > 0.0) || !(self.t_phi[i] > 0.0) {
                return Err(Error::Config("coherence times must be positive".into()));
            }
        }
        if !(self.g_1c > self.g_12.abs() && self.g_2c > self.g_12.abs() && self.g_12.abs() > 0.0) {
            return Err(Error::Config(
                "couplings must satisfy g_1c, g_2c > |g_12| > 0".into(),
            ));
        }
        if self.dim() > MAX_PRODUCT_DIM {
            return Err(Error::DimensionOverflow(self.dim(), MAX_PRODUCT_DIM));
        }
        Ok(())
    }
}

/// Flux-bias → frequency mapping shared by all tunable elements.
///
/// The tuning law is the symmetric-transmon curve
/// `ω(V) = (ω_max − α)·√|cos(πV/v_period + π·v_offset/v_period)| + α`,
/// so `V = 0` with zero offset sits at the sweet spot. Bias axes are
/// self-consistent simulator units, not calibrated lab volts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxMap {
    /// Flux period in volts.
    pub v_period: f64,
    /// Bias offset in volts.
    pub v_offset: f64,
    /// Which elements respond to flux (order Q1, C, Q2).
    pub tunable: [bool; 3],
}

impl Default for FluxMap {
    fn default() -> Self {
        FluxMap {
            v_period: 1.0,
            v_offset: 0.0,
            tunable: [true, true, true],
        }
    }
}

/// Annihilation operator on a `dim`-level truncated oscillator:
/// entries √n on the first superdiagonal.
pub fn annihilation_operator(dim: usize) -> Result<CMat> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    let mut a = CMat::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Ok(a)
}

/// Embed a single-mode operator into the product space at `element`
/// (identity on the other modes), honoring the Q1 ⊗ C ⊗ Q2 order.
pub fn embed(op: &CMat, element: Element, dims: [usize; 3]) -> CMat {
    let eye = |d: usize| CMat::identity(d, d);
    let i = element.index();
    let left = if i == 0 { op.clone() } else { eye(dims[0]) };
    let mid = if i == 1 { op.clone() } else { eye(dims[1]) };
    let right = if i == 2 { op.clone() } else { eye(dims[2]) };
    left.kronecker(&mid).kronecker(&right)
}

/// Build the static three-mode Hamiltonian at the given frequencies
/// (`omega` in tensor order `[ω1, ωc, ω2]`):
///
/// `H = Σᵢ ωᵢ aᵢ†aᵢ + (αᵢ/2) aᵢ†aᵢ†aᵢaᵢ + Σ_{i<j} g_ij (aᵢ†aⱼ + aᵢaⱼ†)`.
pub fn build_static_hamiltonian(params: &DeviceParams, omega: [f64; 3]) -> Result<CMat> {
    let d = params.dim();
    if d > MAX_PRODUCT_DIM {
        return Err(Error::DimensionOverflow(d, MAX_PRODUCT_DIM));
    }
    let mut h = CMat::zeros(d, d);
    // Diagonal part: ω n + (α/2) n (n − 1), assembled directly since both
    // terms are diagonal in the bare basis.
    for i in 0..d {
        let (n1, nc, n2) = params.state_label(i);
        let ns = [n1 as f64, nc as f64, n2 as f64];
        let mut e = 0.0;
        for m in 0..3 {
            e += omega[m] * ns[m] + 0.5 * params.alpha[m] * ns[m] * (ns[m] - 1.0);
        }
        h[(i, i)] = C64::new(e, 0.0);
    }
    // Exchange couplings g (a†b + ab†), each pair once.
    let ops: Vec<CMat> = Element::ALL
        .iter()
        .map(|&el| {
            annihilation_operator(params.dims[el.index()]).map(|a| embed(&a, el, params.dims))
        })
        .collect::<Result<_>>()?;
    let (a1, ac, a2) = (&ops[0], &ops[1], &ops[2]);
    let couple = |g: f64, a: &CMat, b: &CMat| (a.adjoint() * b + a * b.adjoint()).scale(g);
    h += couple(params.g_1c, a1, ac);
    h += couple(params.g_2c, a2, ac);
    h += couple(params.g_12, a1, a2);
    Ok(h)
}

/// Dispersive-regime effective qubit–qubit coupling
/// `g̃ = (g_1c·g_2c/2)(1/Δ_1c + 1/Δ_2c) + g_12`, with `Δ_ic = ω_i − ω_c`.
pub fn effective_coupling(params: &DeviceParams, w1: f64, w2: f64, wc: f64) -> Result<f64> {
    let d1 = w1 - wc;
    let d2 = w2 - wc;
    let floor = 1e-9;
    if d1.abs() < floor || d2.abs() < floor {
        return Err(Error::ResonantDenominator(d1.abs().min(d2.abs())));
    }
    Ok(params.g_1c * params.g_2c / 2.0 * (1.0 / d1 + 1.0 / d2) + params.g_12)
}

/// Frequency of a tunable element at bias `v` (symmetric-transmon curve).
pub fn flux_to_frequency(
    map: &FluxMap,
    params: &DeviceParams,
    element: Element,
    v: f64,
) -> Result<f64> {
    let i = element.index();
    if !map.tunable[i] {
        return Err(Error::NotTunable(element.name()));
    }
    let phase = std::f64::consts::PI * (v + map.v_offset) / map.v_period;
    let (wm, al) = (params.omega_max[i], params.alpha[i]);
    Ok((wm - al) * phase.cos().abs().sqrt() + al)
}

/// Inverse tuning-curve lookup on the monotone branch `V ∈ [0, v_period/2]`
/// (offset subtracted). Errors if `w` is outside `(α, ω_max]`.
pub fn frequency_to_flux(
    map: &FluxMap,
    params: &DeviceParams,
    element: Element,
    w: f64,
) -> Result<f64> {
    let i = element.index();
    if !map.tunable[i] {
        return Err(Error::NotTunable(element.name()));
    }
    let (wm, al) = (params.omega_max[i], params.alpha[i]);
    let x = (w - al) / (wm - al);
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::FrequencyOutOfRange(
            units::to_ghz(w),
            units::to_ghz(al),
            units::to_ghz(wm),
        ));
    }
    Ok(map.v_period * (x * x).acos() / std::f64::consts::PI - map.v_offset)
}

/// Idle bias of an element: the bias reproducing its idle frequency.
pub fn idle_bias(map: &FluxMap, params: &DeviceParams, element: Element) -> Result<f64> {
    frequency_to_flux(map, params, element, params.omega_idle[element.index()])
}

/// Idle values for all five control channels (volts on Z, zero on XY),
/// indexed by `pulse::Channel`.
pub fn idle_channel_values(map: &FluxMap, params: &DeviceParams) -> Result<[f64; 5]> {
    let mut idle = [0.0; 5];
    for el in Element::ALL {
        if map.tunable[el.index()] {
            idle[el.index()] = idle_bias(map, params, el)?;
        }
    }
    Ok(idle)
}

/// Residual ZZ rate `ζ = E(|101⟩) + E(|000⟩) − E(|100⟩) − E(|001⟩)` from the
/// full spectrum, eigenstates identified by maximal bare overlap.
pub fn compute_zz(params: &DeviceParams, omega: [f64; 3]) -> Result<f64> {
    if params.dims.iter().any(|&d| d < 3) {
        return Err(Error::InvalidDimension(*params.dims.iter().min().unwrap()));
    }
    let h = build_static_hamiltonian(params, omega)?;
    let (evals, evecs) = eigh(&h);
    let energy_of = |label: (usize, usize, usize)| -> Result<f64> {
        let row = params.state_index(label.0, label.1, label.2);
        let mut best = (0usize, -1.0f64);
        for j in 0..evecs.ncols() {
            let p = evecs[(row, j)].norm_sqr();
            if p > best.1 {
                best = (j, p);
            }
        }
        if best.1 < 0.5 {
            return Err(Error::DegenerateLabeling(
                best.1,
                format!("|{}{}{}>", label.0, label.1, label.2),
            ));
        }
        Ok(evals[best.0])
    };
    Ok(energy_of((1, 0, 1))? + energy_of((0, 0, 0))? - energy_of((1, 0, 0))? - energy_of((0, 0, 1))?)
}

/// Single-excitation block of the Hamiltonian in the basis
/// `{|100⟩, |010⟩, |001⟩}`; exact for the excitation-conserving coupling.
pub fn single_excitation_block(params: &DeviceParams, omega: [f64; 3]) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_row_slice(
        3,
        3,
        &[
            omega[0],
            params.g_1c,
            params.g_12,
            params.g_1c,
            omega[1],
            params.g_2c,
            params.g_12,
            params.g_2c,
            omega[2],
        ],
    )
}

/// Sorted eigenfrequencies of the single-excitation block together with the
/// dominant bare label of each branch (0 = Q1, 1 = C, 2 = Q2).
pub fn single_excitation_branches(
    params: &DeviceParams,
    omega: [f64; 3],
) -> (Vec<f64>, Vec<usize>) {
    let se = single_excitation_block(params, omega).symmetric_eigen();
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let mut freqs = Vec::with_capacity(3);
    let mut labels = Vec::with_capacity(3);
    for &j in &order {
        freqs.push(se.eigenvalues[j]);
        let col = se.eigenvectors.column(j);
        let mut best = 0;
        for r in 1..3 {
            if col[r].abs() > col[best].abs() {
                best = r;
            }
        }
        labels.push(best);
    }
    (freqs, labels)
}
