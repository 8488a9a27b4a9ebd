//! Time evolution under sampled flux controls: exact piecewise-constant
//! unitary propagators, Lindblad density-matrix evolution, projection onto
//! the dressed computational subspace, virtual-Z compensation, and projective
//! measurement.
//!
//! # Computational basis
//!
//! The computational states are the *dressed* eigenstates of the idle-point
//! Hamiltonian labeled by their dominant bare component — not the bare kets.
//! With g/Δ ≈ 0.1 the static dressing admixes percent-level populations
//! (e.g. |101⟩ ↔ |002⟩ sit only ~90 MHz apart), and projecting onto bare
//! states would show a spurious infidelity/leakage floor near 1e-2 for a
//! gate that is perfect in the physical (adiabatically connected) basis.
//!
//! # Frames
//!
//! The Hamiltonian conserves total excitation number `N`, so the rotating
//! frame is implemented as the exact transformation `H → H − ω_ref·N` with
//! `ω_ref` the idle Q1 frequency. This commutes with the dynamics, leaves
//! every population and conditional phase unchanged, and removes the fast
//! common-mode phase so that dt = 0.1 ns resolves all remaining scales.

use crate::device::{self, DeviceParams, Element, FluxMap};
use crate::error::{Error, Result};
use crate::linalg::{eigh, expm_from_eigh};
use crate::pulse::SampledControl;
use crate::units::wrap_phase;
use crate::{C64, CMat, CVec};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use crate::linalg::{expm_i_h, unitarity_defect};
use std::collections::BTreeMap;

/// Evolution frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Frame {
    /// Bare lab frame.
    Lab,
    /// Frame rotating at the idle Q1 frequency (subtracts `ω_ref·N`).
    RotatingAtIdle,
}

impl Frame {
    fn omega_ref(self, params: &DeviceParams) -> f64 {
        match self {
            Frame::Lab => 0.0,
            Frame::RotatingAtIdle => params.omega_idle[0],
        }
    }
}

/// State vector or density matrix over the truncated product space.
#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState {
    Vector(CVec),
    Density(CMat),
}

impl QuantumState {
    /// Bare basis state `|n1, nc, n2⟩` as a vector.
    pub fn bare(params: &DeviceParams, n1: usize, nc: usize, n2: usize) -> Self {
        let mut v = CVec::zeros(params.dim());
        v[params.state_index(n1, nc, n2)] = C64::new(1.0, 0.0);
        QuantumState::Vector(v)
    }

    pub fn to_density(&self) -> CMat {
        match self {
            QuantumState::Vector(v) => v * v.adjoint(),
            QuantumState::Density(r) => r.clone(),
        }
    }

    /// Bare-basis populations (diagonal).
    pub fn populations(&self) -> Vec<f64> {
        match self {
            QuantumState::Vector(v) => v.iter().map(|z| z.norm_sqr()).collect(),
            QuantumState::Density(r) => (0..r.nrows()).map(|i| r[(i, i)].re).collect(),
        }
    }

    /// Validate norm / hermiticity / trace within 1e-9.
    pub fn validate(&self) -> Result<()> {
        match self {
            QuantumState::Vector(v) => {
                if (v.norm() - 1.0).abs() > 1e-9 {
                    return Err(Error::Config(format!("state norm {} != 1", v.norm())));
                }
            }
            QuantumState::Density(r) => {
                let tr: f64 = (0..r.nrows()).map(|i| r[(i, i)].re).sum();
                if (tr - 1.0).abs() > 1e-9 {
                    return Err(Error::Config(format!("density trace {tr} != 1")));
                }
                let herm = (r - r.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
                if herm > 1e-9 {
                    return Err(Error::Config(format!("density not Hermitian ({herm:.2e})")));
                }
            }
        }
        Ok(())
    }
}

/// Dressed computational basis |00⟩, |01⟩, |10⟩, |11⟩ (|q1 q2⟩, coupler
/// ground): columns of eigenvectors of a reference Hamiltonian labeled by
/// dominant bare overlap, phase fixed so the dominant component is real
/// positive.
#[derive(Debug, Clone)]
pub struct ComputationalBasis {
    /// d×4 matrix of dressed basis columns.
    pub w: CMat,
    dims: [usize; 3],
}

/// Bare labels of the computational states in block order.
pub const COMPUTATIONAL_LABELS: [(usize, usize, usize); 4] =
    [(0, 0, 0), (0, 0, 1), (1, 0, 0), (1, 0, 1)];

impl ComputationalBasis {
    /// Build from an explicit (static) Hamiltonian.
    pub fn from_hamiltonian(params: &DeviceParams, h: &CMat) -> Result<Self> {
        let (_, evecs) = eigh(h);
        let d = params.dim();
        let mut w = CMat::zeros(d, 4);
        for (b, &(n1, nc, n2)) in COMPUTATIONAL_LABELS.iter().enumerate() {
            let row = params.state_index(n1, nc, n2);
            let mut best = (0usize, -1.0f64);
            for j in 0..d {
                let p = evecs[(row, j)].norm_sqr();
                if p > best.1 {
                    best = (j, p);
                }
            }
            if best.1 < 0.5 {
                return Err(Error::DegenerateLabeling(
                    best.1,
                    format!("|{n1}{nc}{n2}>"),
                ));
            }
            let col = evecs.column(best.0);
            let phase = col[row] / C64::new(col[row].norm(), 0.0);
            for i in 0..d {
                w[(i, b)] = col[i] * phase.conj();
            }
        }
        Ok(ComputationalBasis {
            w,
            dims: params.dims,
        })
    }

    /// Dressed basis at the idle point.
    pub fn at_idle(params: &DeviceParams) -> Result<Self> {
        let h = device::build_static_hamiltonian(params, params.omega_idle)?;
        Self::from_hamiltonian(params, &h)
    }

    /// Dressed computational state |q1 q2⟩ as a full-space vector.
    pub fn state(&self, q1: usize, q2: usize) -> CVec {
        CVec::from(self.w.column(2 * q1 + q2))
    }

    /// Embed an ideal 4×4 computational-subspace unitary into the full space
    /// (identity on the orthogonal complement): `W U W† + (1 − W W†)`.
    pub fn embed_gate(&self, u4: &CMat) -> CMat {
        let d = self.w.nrows();
        let p = &self.w * self.w.adjoint();
        CMat::identity(d, d) - p + &self.w * u4 * self.w.adjoint()
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }
}

/// Per-sample Hamiltonian from flux biases (tensor order [V_Q1, V_C, V_Q2]);
/// non-tunable elements stay at their idle frequency.
pub fn hamiltonian_at_bias(
    params: &DeviceParams,
    flux: &FluxMap,
    v: [f64; 3],
    frame: Frame,
) -> Result<CMat> {
    let mut omega = params.omega_idle;
    for el in Element::ALL {
        let i = el.index();
        if flux.tunable[i] {
            omega[i] = device::flux_to_frequency(flux, params, el, v[i])?;
        }
    }
    let mut h = device::build_static_hamiltonian(params, omega)?;
    let wref = frame.omega_ref(params);
    if wref != 0.0 {
        for i in 0..params.dim() {
            let (n1, nc, n2) = params.state_label(i);
            h[(i, i)] -= C64::new(wref * (n1 + nc + n2) as f64, 0.0);
        }
    }
    Ok(h)
}

/// Group consecutive identical flux samples into (bias, hold time) runs so
/// constant-bias stretches cost a single eigendecomposition.
fn bias_runs(controls: &SampledControl) -> Vec<([f64; 3], f64)> {
    let n = controls.len();
    let mut runs: Vec<([f64; 3], f64)> = Vec::new();
    for k in 0..n {
        let v = [
            controls.flux[0][k],
            controls.flux[1][k],
            controls.flux[2][k],
        ];
        match runs.last_mut() {
            Some((v0, t)) if *v0 == v => *t += controls.dt,
            _ => runs.push((v, controls.dt)),
        }
    }
    runs
}

/// Unitary propagator: ordered product of exact exponentials of the
/// piecewise-constant Hamiltonian over the sample grid.
///
/// Microwave (XY) envelopes are not propagated here — single-qubit drives
/// are applied as ideal unitaries at the circuit level.
pub fn propagator(
    controls: &SampledControl,
    params: &DeviceParams,
    flux: &FluxMap,
    frame: Frame,
) -> Result<CMat> {
    let d = params.dim();
    // Per-run step unitaries are independent; compute them in parallel and
    // fold the ordered product sequentially (deterministic).
    let steps: Vec<CMat> = bias_runs(controls)
        .into_par_iter()
        .map(|(v, t)| -> Result<CMat> {
            let h = hamiltonian_at_bias(params, flux, v, frame)?;
            let (evals, evecs) = eigh(&h);
            Ok(expm_from_eigh(&evals, &evecs, t))
        })
        .collect::<Result<_>>()?;
    let mut u = CMat::identity(d, d);
    for step in steps {
        u = step * u;
    }
    Ok(u)
}

/// Collapse operators for the Lindblad dissipator.
///
/// Every collapse operator here (embedded annihilation for T1, embedded
/// number operator for dephasing) has at most one nonzero per row, so the
/// dissipator is stored in that sparse form and applied in O(d²) instead of
/// through dense matrix products: the gain term is
/// `(LρL†)[i,j] = v_i v_j ρ[c_i, c_j]`, and since every `L†L` is diagonal
/// the anticommutator is a precomputed elementwise damping.
struct Dissipator {
    /// Per collapse operator: row → (column, real value) of its one entry.
    gains: Vec<Vec<Option<(usize, f64)>>>,
    /// Elementwise `−½ Σ_k (d_k[i] + d_k[j])` with `L_k†L_k = diag(d_k)`.
    damp: nalgebra::DMatrix<f64>,
}

impl Dissipator {
    fn new(params: &DeviceParams) -> Result<Self> {
        let d = params.dim();
        let mut gains = Vec::new();
        let mut diag_sum = vec![0.0f64; d];
        let push = |l: CMat, gains: &mut Vec<Vec<Option<(usize, f64)>>>,
                        diag_sum: &mut Vec<f64>|
         -> Result<()> {
            let mut rows: Vec<Option<(usize, f64)>> = vec![None; d];
            for i in 0..d {
                for j in 0..d {
                    let z = l[(i, j)];
                    if z.norm() > 0.0 {
                        debug_assert!(z.im == 0.0 && rows[i].is_none());
                        rows[i] = Some((j, z.re));
                        diag_sum[j] += z.re * z.re;
                    }
                }
            }
            gains.push(rows);
            Ok(())
        };
        for el in Element::ALL {
            let i = el.index();
            let a = device::annihilation_operator(params.dims[i])?;
            if params.t1[i].is_finite() {
                let l = device::embed(&a, el, params.dims).scale((1.0 / params.t1[i]).sqrt());
                push(l, &mut gains, &mut diag_sum)?;
            }
            if params.t_phi[i].is_finite() {
                let n = a.adjoint() * &a;
                let l = device::embed(&n, el, params.dims).scale((2.0 / params.t_phi[i]).sqrt());
                push(l, &mut gains, &mut diag_sum)?;
            }
        }
        let damp = nalgebra::DMatrix::from_fn(d, d, |i, j| -0.5 * (diag_sum[i] + diag_sum[j]));
        Ok(Dissipator { gains, damp })
    }

    /// `D(ρ) = Σ_k L_k ρ L_k† − ½{L_k†L_k, ρ}`.
    fn apply(&self, rho: &CMat) -> CMat {
        let d = rho.nrows();
        let mut out = CMat::from_fn(d, d, |i, j| rho[(i, j)] * self.damp[(i, j)]);
        for rows in &self.gains {
            for i in 0..d {
                let Some((ci, vi)) = rows[i] else { continue };
                for j in 0..d {
                    if let Some((cj, vj)) = rows[j] {
                        out[(i, j)] += rho[(ci, cj)] * (vi * vj);
                    }
                }
            }
        }
        out
    }
}

/// Lindblad evolution of a density matrix under the sampled controls.
///
/// Integrator: per sample step the exact unitary conjugation of the
/// piecewise-constant Hamiltonian, followed by an explicit dissipator step
/// `ρ += dt·D(ρ)`. The splitting error is O(γ·ω·dt²) with γ·dt ≲ 1e-5 at
/// the device's coherence times, far below the 1e-6 trace-drift guard; a
/// higher-order explicit scheme would instead be stability-limited by the
/// fast unitary part. With all rates zero this reduces exactly to the
/// unitary path.
pub fn evolve_density(
    rho0: &QuantumState,
    controls: &SampledControl,
    params: &DeviceParams,
    flux: &FluxMap,
    frame: Frame,
    include_decoherence: bool,
) -> Result<QuantumState> {
    rho0.validate()?;
    let mut rho = rho0.to_density();
    let diss = if include_decoherence {
        Some(Dissipator::new(params)?)
    } else {
        None
    };
    for (v, t) in bias_runs(controls) {
        let h = hamiltonian_at_bias(params, flux, v, frame)?;
        let (evals, evecs) = eigh(&h);
        match &diss {
            None => {
                let u = expm_from_eigh(&evals, &evecs, t);
                rho = &u * rho * u.adjoint();
            }
            Some(diss) => {
                let u = expm_from_eigh(&evals, &evecs, controls.dt);
                let steps = (t / controls.dt).round() as usize;
                for _ in 0..steps.max(1) {
                    rho = &u * rho * u.adjoint();
                    rho += diss.apply(&rho).scale(controls.dt);
                }
            }
        }
    }
    let tr: f64 = (0..rho.nrows()).map(|i| rho[(i, i)].re).sum();
    if (tr - 1.0).abs() > 1e-6 {
        return Err(Error::TraceDrift((tr - 1.0).abs()));
    }
    Ok(QuantumState::Density(rho))
}

/// Quantum channel of a full schedule as a d²×d² superoperator acting on
/// column-stacked density matrices (`vec(ρ)[i + d·j] = ρ[i, j]`).
///
/// The piecewise-constant unitaries are merged into chunk propagators of at
/// most `max_chunk_dt` (exact products), and the dissipator is applied once
/// per chunk. Each basis-matrix evolution then costs two matrix products per
/// chunk instead of per sample, which keeps building channels of long pulses
/// tractable; agreement with the per-sample integrator is covered by tests.
pub fn lindblad_superoperator(
    controls: &SampledControl,
    params: &DeviceParams,
    flux: &FluxMap,
    frame: Frame,
    include_decoherence: bool,
    max_chunk_dt: f64,
) -> Result<CMat> {
    if !(max_chunk_dt > 0.0) {
        return Err(Error::Sampling(format!(
            "chunk duration must be positive, got {max_chunk_dt}"
        )));
    }
    let d = params.dim();
    // Exact unitaries per constant-bias run, long runs split to the chunk
    // target; consecutive short runs merged up to it.
    let mut chunks: Vec<(CMat, f64)> = Vec::new();
    let mut acc: Option<(CMat, f64)> = None;
    for (v, t) in bias_runs(controls) {
        let h = hamiltonian_at_bias(params, flux, v, frame)?;
        let (evals, evecs) = eigh(&h);
        let pieces = (t / max_chunk_dt).ceil().max(1.0) as usize;
        let tp = t / pieces as f64;
        let u = expm_from_eigh(&evals, &evecs, tp);
        for _ in 0..pieces {
            acc = Some(match acc.take() {
                None => (u.clone(), tp),
                Some((ua, ta)) => (&u * ua, ta + tp),
            });
            if acc.as_ref().is_some_and(|(_, ta)| *ta >= max_chunk_dt - 1e-12) {
                chunks.push(acc.take().unwrap());
            }
        }
    }
    if let Some(last) = acc {
        chunks.push(last);
    }
    let diss = if include_decoherence {
        Some(Dissipator::new(params)?)
    } else {
        None
    };
    let n2 = d * d;
    let cols: Vec<Vec<C64>> = (0..n2)
        .into_par_iter()
        .map(|k| {
            let mut rho = CMat::zeros(d, d);
            rho[(k % d, k / d)] = C64::new(1.0, 0.0);
            for (u, t) in &chunks {
                rho = u * rho * u.adjoint();
                if let Some(ds) = &diss {
                    rho += ds.apply(&rho).scale(*t);
                }
            }
            (0..n2).map(|m| rho[(m % d, m / d)]).collect()
        })
        .collect();
    let mut s = CMat::zeros(n2, n2);
    for (k, col) in cols.iter().enumerate() {
        for (m, &z) in col.iter().enumerate() {
            s[(m, k)] = z;
        }
    }
    Ok(s)
}

/// Apply a superoperator from [`lindblad_superoperator`] to a density matrix.
pub fn apply_superoperator(s: &CMat, rho: &CMat) -> CMat {
    let d = rho.nrows();
    let v = CVec::from_fn(d * d, |k, _| rho[(k % d, k / d)]);
    let w = s * v;
    CMat::from_fn(d, d, |i, j| w[i + d * j])
}

/// Gate-level summary of a full-space unitary projected on the computational
/// block.
#[derive(Debug, Clone)]
pub struct GateResult {
    /// 4×4 computational block `W† U W` (basis |00⟩,|01⟩,|10⟩,|11⟩).
    pub block: CMat,
    /// 1 − min over computational input states of the norm² kept inside the
    /// block (the operational leakage of the gate).
    pub leakage: f64,
    /// Companion estimator: worst-case bare population on qubit levels ≥ 2
    /// (coupler traced over). Carries a static dressing floor of a few 1e-3
    /// at these device parameters; reported for comparison with
    /// ground-state-population measurements.
    pub leakage_population: f64,
    /// Conditional phase arg U₁₁ − φ₁ − φ₂ + arg U₀₀, wrapped to (−π, π].
    pub phi_c: f64,
    /// Single-qubit phases from the |10⟩ / |01⟩ diagonal entries.
    pub phi_1: f64,
    pub phi_2: f64,
}

/// Project a full-space unitary onto the dressed computational block and
/// extract phases and leakage.
pub fn computational_projection(u: &CMat, basis: &ComputationalBasis) -> GateResult {
    let b = basis.w.adjoint() * u * &basis.w;
    let ph: Vec<f64> = (0..4).map(|i| b[(i, i)].arg()).collect();
    let phi_1 = wrap_phase(ph[2] - ph[0]);
    let phi_2 = wrap_phase(ph[1] - ph[0]);
    let phi_c = wrap_phase(ph[3] - ph[2] - ph[1] + ph[0]);

    let mut min_keep = f64::INFINITY;
    for j in 0..4 {
        let keep: f64 = (0..4).map(|i| b[(i, j)].norm_sqr()).sum();
        min_keep = min_keep.min(keep);
    }

    // Bare qubit-level ≥ 2 population, coupler summed over.
    let dims = basis.dims();
    let mut worst = 0.0f64;
    for j in 0..4 {
        let out = u * basis.w.column(j);
        let mut pop = 0.0;
        for (i, z) in out.iter().enumerate() {
            let n2 = i % dims[2];
            let n1 = i / (dims[1] * dims[2]);
            if n1 >= 2 || n2 >= 2 {
                pop += z.norm_sqr();
            }
        }
        worst = worst.max(pop);
    }

    GateResult {
        block: b,
        leakage: (1.0 - min_keep).max(0.0),
        leakage_population: worst,
        phi_c,
        phi_1,
        phi_2,
    }
}

/// Remove the single-qubit (and global) phases with virtual Z rotations,
/// leaving the conditional phase untouched: returns
/// `diag(e^{−i(φ₀ + [0, φ₂, φ₁, φ₁+φ₂])}) · block`.
pub fn virtual_z_compensation(result: &GateResult) -> CMat {
    let phi0 = result.block[(0, 0)].arg();
    let corr = [
        phi0,
        phi0 + result.phi_2,
        phi0 + result.phi_1,
        phi0 + result.phi_1 + result.phi_2,
    ];
    let mut m = result.block.clone();
    for i in 0..4 {
        let f = C64::from_polar(1.0, -corr[i]);
        for j in 0..4 {
            m[(i, j)] *= f;
        }
    }
    m
}

/// Average gate fidelity of a (possibly trace-decreasing) 4×4 block against
/// a target unitary: `F = (|Tr(V†M)|² + Tr(M†M)) / (d(d+1))`, d = 4.
pub fn average_gate_fidelity(m: &CMat, target: &CMat) -> f64 {
    let tr_overlap = (target.adjoint() * m).trace().norm_sqr();
    let tr_mm = (m.adjoint() * m).trace().re;
    (tr_overlap + tr_mm) / 20.0
}

/// Ideal CZ on the computational block.
pub fn cz_target() -> CMat {
    CMat::from_diagonal(&CVec::from_vec(vec![
        C64::new(1.0, 0.0),
        C64::new(1.0, 0.0),
        C64::new(1.0, 0.0),
        C64::new(-1.0, 0.0),
    ]))
}

/// Sample projective-measurement outcomes from the bare populations.
///
/// Outcomes are labeled by the two qubit levels (`"00"`, `"01"`, …, with
/// `2` marking leakage levels); the coupler is traced over. A symmetric
/// per-qubit assignment error flips 0 ↔ 1 readings. Deterministic given the
/// seed.
pub fn measure(
    state: &QuantumState,
    params: &DeviceParams,
    shots: u64,
    assignment_error: f64,
    rng_seed: u64,
) -> Result<BTreeMap<String, u64>> {
    if shots < 1 {
        return Err(Error::Config("shots must be ≥ 1".into()));
    }
    if !(0.0..0.5).contains(&assignment_error) {
        return Err(Error::Config(format!(
            "assignment error must be in [0, 0.5), got {assignment_error}"
        )));
    }
    state.validate()?;
    // Aggregate bare populations into (n1, n2) outcomes.
    let pops = state.populations();
    let mut probs: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (i, p) in pops.iter().enumerate() {
        let (n1, _, n2) = params.state_label(i);
        *probs.entry((n1, n2)).or_insert(0.0) += p.max(0.0);
    }
    let total: f64 = probs.values().sum();
    let outcomes: Vec<((usize, usize), f64)> =
        probs.into_iter().map(|(k, p)| (k, p / total)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for _ in 0..shots {
        let x: f64 = rng.gen();
        let mut acc = 0.0;
        let mut drawn = outcomes[outcomes.len() - 1].0;
        for (k, p) in &outcomes {
            acc += p;
            if x < acc {
                drawn = *k;
                break;
            }
        }
        let mut read = [drawn.0, drawn.1];
        for r in &mut read {
            if *r <= 1 && assignment_error > 0.0 && rng.gen::<f64>() < assignment_error {
                *r = 1 - *r;
            }
        }
        *counts.entry(format!("{}{}", read[0], read[1])).or_insert(0) += 1;
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::{constant_segment, half_cosine_segment, sample_schedule, Channel, Schedule};
    use crate::units;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn idle_schedule(params: &DeviceParams, flux: &FluxMap, duration: f64) -> Schedule {
        let mut idle = [0.0; 5];
        for el in Element::ALL {
            idle[el.index()] = device::idle_bias(flux, params, el).unwrap();
        }
        let mut s = Schedule::new(idle);
        s.pad_to(duration);
        s
    }

    #[test]
    fn zero_duration_is_identity() {
        let p = DeviceParams::default();
        let f = FluxMap::default();
        let s = sample_schedule(&idle_schedule(&p, &f, 0.0), 0.1).unwrap();
        let u = propagator(&s, &p, &f, Frame::RotatingAtIdle).unwrap();
        assert!(crate::linalg::unitarity_defect(&u) < 1e-12);
        assert!((&u - CMat::identity(p.dim(), p.dim()))
            .iter()
            .all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn decoupled_constant_gives_analytic_phases() {
        let mut p = DeviceParams::default();
        p.g_1c = 0.0;
        p.g_2c = 0.0;
        p.g_12 = 0.0;
        let f = FluxMap::default();
        let t = 13.7;
        let s = sample_schedule(&idle_schedule(&p, &f, t), 0.1).unwrap();
        let u = propagator(&s, &p, &f, Frame::Lab).unwrap();
        for i in 0..p.dim() {
            let (n1, nc, n2) = p.state_label(i);
            let ns = [n1 as f64, nc as f64, n2 as f64];
            let mut e = 0.0;
            for m in 0..3 {
                e += p.omega_idle[m] * ns[m] + 0.5 * p.alpha[m] * ns[m] * (ns[m] - 1.0);
            }
            let expect = C64::from_polar(1.0, -e * t);
            assert!((u[(i, i)] - expect).norm() < 1e-7, "state {i}");
        }
    }

    /// Two-level Rabi oracle: qubits parked on resonance swap |100⟩ ↔ |001⟩
    /// in π/(2|g̃|).
    #[test]
    fn resonant_swap() {
        let p = DeviceParams::default();
        let f = FluxMap::default();
        let wq = units::ghz(4.110);
        let g = device::effective_coupling(&p, wq, wq, p.omega_idle[1]).unwrap();
        let t_swap = std::f64::consts::PI / (2.0 * g.abs());

        let v1 = device::frequency_to_flux(&f, &p, Element::Q1, wq).unwrap();
        let v2 = device::frequency_to_flux(&f, &p, Element::Q2, wq).unwrap();
        let mut sched = idle_schedule(&p, &f, 0.0);
        let d1 = v1 - sched.idle[0];
        let d2 = v2 - sched.idle[2];
        sched
            .add(0.0, constant_segment(Channel::ZQ1, d1, t_swap).unwrap())
            .unwrap();
        sched
            .add(0.0, constant_segment(Channel::ZQ2, d2, t_swap).unwrap())
            .unwrap();
        let s = sample_schedule(&sched, 0.1).unwrap();
        let u = propagator(&s, &p, &f, Frame::RotatingAtIdle).unwrap();

        // Full swap: less than 1% of the excitation is left on Q1. (The
        // transferred excitation carries ~2% static coupler dressing with
        // it, so the bare |001⟩ amplitude alone is not the right check.)
        let from = p.state_index(1, 0, 0);
        let residual = u[(from, from)].norm_sqr();
        assert!(residual < 0.01, "residual source population {residual}");
        let transferred: f64 = (0..p.dim())
            .filter(|&i| p.state_label(i).2 >= 1)
            .map(|i| u[(i, from)].norm_sqr())
            .sum();
        assert!(transferred > 0.97, "transferred population {transferred}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        /// Propagator unitarity stays below 1e-9 over randomized half-cosine
        /// excursions.
        #[test]
        fn propagator_unitarity(amp in -0.2f64..0.25, dur in 5.0f64..60.0) {
            let p = DeviceParams::default();
            let f = FluxMap::default();
            let mut sched = idle_schedule(&p, &f, 0.0);
            sched.add(0.0, half_cosine_segment(Channel::ZC, amp, dur).unwrap()).unwrap();
            let s = sample_schedule(&sched, 0.1).unwrap();
            let u = propagator(&s, &p, &f, Frame::RotatingAtIdle).unwrap();
            prop_assert!(crate::linalg::unitarity_defect(&u) < 1e-9);
        }
    }

    fn cz_like_schedule(p: &DeviceParams, f: &FluxMap) -> Schedule {
        let mut sched = idle_schedule(p, f, 0.0);
        sched
            .add(0.0, half_cosine_segment(Channel::ZC, 0.24, 30.0).unwrap())
            .unwrap();
        sched
    }

    #[test]
    fn frames_agree_on_observables() {
        let p = DeviceParams::default();
        let f = FluxMap::default();
        let s = sample_schedule(&cz_like_schedule(&p, &f), 0.1).unwrap();
        let basis = ComputationalBasis::at_idle(&p).unwrap();
        let u_lab = propagator(&s, &p, &f, Frame::Lab).unwrap();
        let u_rot = propagator(&s, &p, &f, Frame::RotatingAtIdle).unwrap();
        let r_lab = computational_projection(&u_lab, &basis);
        let r_rot = computational_projection(&u_rot, &basis);
        assert!((r_lab.phi_c - r_rot.phi_c).abs() < 1e-6);
        assert!((r_lab.leakage - r_rot.leakage).abs() < 1e-9);
        // Populations of an evolved state agree entry by entry.
        let psi = basis.state(1, 1);
        let pop_lab: Vec<f64> = (&u_lab * &psi).iter().map(|z| z.norm_sqr()).collect();
        let pop_rot: Vec<f64> = (&u_rot * &psi).iter().map(|z| z.norm_sqr()).collect();
        for (a, b) in pop_lab.iter().zip(&pop_rot) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn halving_dt_converged() {
        let p = DeviceParams::default();
        let f = FluxMap::default();
        let sched = cz_like_schedule(&p, &f);
        let basis = ComputationalBasis::at_idle(&p).unwrap();
        let psi = basis.state(1, 1);
        let u1 = propagator(&sample_schedule(&sched, 0.1).unwrap(), &p, &f, Frame::RotatingAtIdle)
            .unwrap();
        let u2 = propagator(&sample_schedule(&sched, 0.05).unwrap(), &p, &f, Frame::RotatingAtIdle)
            .unwrap();
        let overlap = ((&u2 * &psi).adjoint() * (&u1 * &psi))[(0, 0)].norm_sqr();
        assert!(1.0 - overlap < 1e-6, "fidelity change {}", 1.0 - overlap);
    }

    #[test]
    fn lindblad_zero_rates_matches_unitary() {
        let mut p = DeviceParams::default();
        p.t1 = [f64::INFINITY; 3];
        p.t_phi = [f64::INFINITY; 3];
        let f = FluxMap::default();
        let s = sample_schedule(&cz_like_schedule(&p, &f), 0.1).unwrap();
        let basis = ComputationalBasis::at_idle(&p).unwrap();
        let psi = basis.state(1, 1);
        let rho0 = QuantumState::Vector(psi.clone());
        let rho = match evolve_density(&rho0, &s, &p, &f, Frame::RotatingAtIdle, true).unwrap() {
            QuantumState::Density(r) => r,
            _ => unreachable!(),
        };
        let u = propagator(&s, &p, &f, Frame::RotatingAtIdle).unwrap();
        let psi_u = &u * &psi;
        let expect = &psi_u * psi_u.adjoint();
        let dev = (&rho - &expect).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(dev < 1e-8, "trace-distance proxy {dev}");
    }

    #[test]
    fn t1_decay_matches_analytic() {
        // Decoupled oracle: with couplings on, the excitation's ~0.8%
        // static coupler dressing (coupler lossless) shifts the effective
        // rate away from 1/T1 by more than the 1e-4 tolerance.
        let mut p = DeviceParams::default();
        p.g_1c = 0.0;
        p.g_2c = 0.0;
        p.g_12 = 0.0;
        let f = FluxMap::default();
        let t = 1000.0;
        let mut sched = idle_schedule(&p, &f, t);
        sched.pad_to(t);
        let s = sample_schedule(&sched, 1.0).unwrap();
        let rho0 = QuantumState::bare(&p, 1, 0, 0);
        let rho = evolve_density(&rho0, &s, &p, &f, Frame::RotatingAtIdle, true).unwrap();
        // Total excited population decays as e^{−t/T1(Q1)} (the excitation
        // hops between Q1/C/Q2 but only Q1/Q2 decay; dressing keeps it
        // almost entirely on Q1).
        let pops = rho.populations();
        let mut excited = 0.0;
        for (i, pop) in pops.iter().enumerate() {
            let (n1, nc, n2) = p.state_label(i);
            if n1 + nc + n2 > 0 {
                excited += pop;
            }
        }
        let expect = (-t / p.t1[0]).exp();
        assert!(
            (excited - expect).abs() < 1e-4,
            "excited {excited} vs {expect}"
        );
    }

    #[test]
    fn trace_preserved_through_cz_pulse() {
        let p = DeviceParams::default();
        let f = FluxMap::default();
        let s = sample_schedule(&cz_like_schedule(&p, &f), 0.1).unwrap();
        let basis = ComputationalBasis::at_idle(&p).unwrap();
        let psi = basis.state(1, 1);
        let rho = evolve_density(
            &QuantumState::Vector(psi),
            &s,
            &p,
            &f,
            Frame::RotatingAtIdle,
            true,
        )
        .unwrap();
        let tr: f64 = rho.populations().iter().sum();
        assert!((tr - 1.0).abs() < 1e-8, "trace {tr}");
    }

    #[test]
    fn projection_examples() {
        let p = DeviceParams::default();
        let basis = ComputationalBasis::at_idle(&p).unwrap();
        // Identity: no leakage, no phases.
        let r = computational_projection(&CMat::identity(p.dim(), p.dim()), &basis);
        assert!(r.leakage < 1e-12);
        assert!(r.phi_c.abs() < 1e-12 && r.phi_1.abs() < 1e-12 && r.phi_2.abs() < 1e-12);
        // Ideal CZ embedded in the full space: φ_c = π, no leakage.
        let u = basis.embed_gate(&cz_target());
        let r = computational_projection(&u, &basis);
        assert!((r.phi_c.abs() - std::f64::consts::PI).abs() < 1e-10);
        assert!(r.leakage < 1e-12);
        assert_relative_eq!(
            average_gate_fidelity(&virtual_z_compensation(&r), &cz_target()),
            1.0,
            epsilon = 1e-10
        );
    }

    #[test]
    fn virtual_z_phase_algebra() {
        // diag(1, e^{ib}, e^{ia}, e^{i(a+b+π)}) compensates to CZ.
        let (a, b) = (0.87, -1.31);
        let m = CMat::from_diagonal(&CVec::from_vec(vec![
            C64::new(1.0, 0.0),
            C64::from_polar(1.0, b),
            C64::from_polar(1.0, a),
            C64::from_polar(1.0, a + b + std::f64::consts::PI),
        ]));
        let p = DeviceParams::default();
        let basis = ComputationalBasis::at_idle(&p).unwrap();
        let u = basis.embed_gate(&m);
        let r = computational_projection(&u, &basis);
        let comp = virtual_z_compensation(&r);
        let cz = cz_target();
        assert!((&comp - &cz).iter().all(|z| z.norm() < 1e-10));

        // Random diagonal phases: compensated single-qubit phases vanish.
        let m2 = CMat::from_diagonal(&CVec::from_vec(vec![
            C64::from_polar(1.0, 0.4),
            C64::from_polar(1.0, -2.2),
            C64::from_polar(1.0, 1.9),
            C64::from_polar(1.0, 0.3),
        ]));
        let r2 = computational_projection(&basis.embed_gate(&m2), &basis);
        let comp2 = virtual_z_compensation(&r2);
        assert!(comp2[(1, 1)].arg().abs() < 1e-12);
        assert!(comp2[(2, 2)].arg().abs() < 1e-12);
    }

    #[test]
    fn measurement_sampling() {
        let p = DeviceParams::default();
        // Pure |000⟩, zero error: all counts on "00".
        let c = measure(&QuantumState::bare(&p, 0, 0, 0), &p, 1000, 0.0, 7).unwrap();
        assert_eq!(c.get("00"), Some(&1000));

        // Equal superposition of |000⟩ and |001⟩: each ≈ 1/2 within 5σ.
        let mut v = CVec::zeros(p.dim());
        v[p.state_index(0, 0, 0)] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        v[p.state_index(0, 0, 1)] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let shots = 100_000u64;
        let c = measure(&QuantumState::Vector(v), &p, shots, 0.0, 11).unwrap();
        let sigma = (shots as f64 * 0.25).sqrt();
        for key in ["00", "01"] {
            let n = *c.get(key).unwrap() as f64;
            assert!((n - shots as f64 / 2.0).abs() < 5.0 * sigma, "{key}: {n}");
        }

        // Deterministic given seed.
        let s = QuantumState::bare(&p, 1, 0, 0);
        assert_eq!(
            measure(&s, &p, 500, 0.1, 42).unwrap(),
            measure(&s, &p, 500, 0.1, 42).unwrap()
        );
        // Invalid assignment error rejected.
        assert!(measure(&s, &p, 10, 0.5, 1).is_err());
    }

    #[test]
    fn superoperator_matches_direct_evolution() {
        let p = DeviceParams::default();
        let f = FluxMap::default();
        let mut sched = idle_schedule(&p, &f, 0.0);
        sched
            .add(0.0, half_cosine_segment(Channel::ZC, 0.2, 12.0).unwrap())
            .unwrap();
        let s = sample_schedule(&sched, 0.1).unwrap();
        let rho0 = QuantumState::bare(&p, 1, 0, 1);

        // Without decoherence the channel is exactly the propagator
        // conjugation.
        let sup = lindblad_superoperator(&s, &p, &f, Frame::RotatingAtIdle, false, 1.0).unwrap();
        let u = propagator(&s, &p, &f, Frame::RotatingAtIdle).unwrap();
        let direct = &u * rho0.to_density() * u.adjoint();
        let via_sup = apply_superoperator(&sup, &rho0.to_density());
        assert!((&via_sup - &direct).iter().all(|z| z.norm() < 1e-10));

        // With decoherence it matches the per-sample integrator to the
        // splitting error of the coarser dissipator stride (1 ns vs 0.1 ns
        // at γ ~ 5e-5/ns gives a few 1e-6 over this pulse).
        let supd = lindblad_superoperator(&s, &p, &f, Frame::RotatingAtIdle, true, 1.0).unwrap();
        let fine = match evolve_density(&rho0, &s, &p, &f, Frame::RotatingAtIdle, true).unwrap() {
            QuantumState::Density(r) => r,
            _ => unreachable!(),
        };
        let coarse = apply_superoperator(&supd, &rho0.to_density());
        let diff = (&coarse - &fine).map(|z| z.norm()).max();
        assert!(diff < 2e-5, "integrator mismatch {diff}");
        let tr: f64 = (0..p.dim()).map(|i| coarse[(i, i)].re).sum();
        assert!((tr - 1.0).abs() < 1e-8, "trace {tr}");
    }
}
