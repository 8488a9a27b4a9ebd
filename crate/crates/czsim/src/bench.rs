//! Two-qubit Clifford randomized benchmarking (RB), interleaved RB, and
//! purity benchmarking (PB).
//!
//! The 11,520-element two-qubit Clifford group is generated from the four
//! standard classes (single-qubit, CNOT-like, iSWAP-like, SWAP-like), each
//! element decomposed into single-qubit Clifford layers and 0–3 CZ gates.
//! Sequences are run through pluggable backends: exact 4×4 state-vector or
//! density-matrix models with synthetic noise, or the full Lindblad device
//! simulation where every CZ is the tuned flux pulse applied as a
//! precomputed quantum channel.
//!
//! Elements are identified up to global phase by a canonical key: the matrix
//! is rescaled so its first non-negligible entry is real positive, then the
//! entries are rounded to 1e−6 — coarse enough to absorb round-off, fine
//! enough to separate distinct Cliffords (whose entries differ at O(1)).

use crate::device::{DeviceParams, FluxMap};
use crate::error::{Error, Result};
use crate::evolve::{
    apply_superoperator, cz_target, lindblad_superoperator, ComputationalBasis, Frame,
};
use crate::experiments::{gate_result_for_schedule, DEFAULT_DT};
use crate::pulse::sample_schedule;
use crate::tuneup::CalibrationRecord;
use crate::{C64, CMat, CVec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;

/// Phase-insensitive fingerprint of a unitary: rescale so the first entry
/// with |z| > 1e−6 (row-major scan) is real positive, then round to 1e−6.
type Key = Vec<(i64, i64)>;

fn canonical_key(u: &CMat) -> Key {
    let mut phase = C64::new(1.0, 0.0);
    'scan: for i in 0..u.nrows() {
        for j in 0..u.ncols() {
            let z = u[(i, j)];
            if z.norm() > 1e-6 {
                phase = z.conj() / C64::new(z.norm(), 0.0);
                break 'scan;
            }
        }
    }
    let mut key = Vec::with_capacity(u.nrows() * u.ncols());
    for i in 0..u.nrows() {
        for j in 0..u.ncols() {
            let z = u[(i, j)] * phase;
            key.push(((z.re * 1e6).round() as i64, (z.im * 1e6).round() as i64));
        }
    }
    key
}

fn mat2(entries: [[C64; 2]; 2]) -> CMat {
    CMat::from_row_slice(
        2,
        2,
        &[entries[0][0], entries[0][1], entries[1][0], entries[1][1]],
    )
}

fn hadamard() -> CMat {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    mat2([
        [C64::new(h, 0.0), C64::new(h, 0.0)],
        [C64::new(h, 0.0), C64::new(-h, 0.0)],
    ])
}

fn s_gate() -> CMat {
    mat2([
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        [C64::new(0.0, 0.0), C64::new(0.0, 1.0)],
    ])
}

/// The axial rotation E = ½·[I − i(X + Y + Z)], of order 3; {I, E, E²} is
/// the S1 coset set used by the CNOT-like and iSWAP-like classes.
fn e_gate() -> CMat {
    mat2([
        [C64::new(0.5, -0.5), C64::new(-0.5, -0.5)],
        [C64::new(0.5, -0.5), C64::new(0.5, 0.5)],
    ])
}

/// Decomposition class of a two-qubit Clifford (by CZ count 0–3).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CliffordClass {
    Single,
    CnotLike,
    IswapLike,
    SwapLike,
}

/// One native-gate layer of a Clifford circuit, in time order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layer {
    /// Simultaneous single-qubit Cliffords (indices into the 24-element
    /// single-qubit group) on Q1 and Q2.
    Singles(usize, usize),
    /// The native CZ.
    Cz,
}

/// A two-qubit Clifford: its class, native-gate layers (time order), and the
/// ideal 4×4 unitary (exactly the product of the layers).
#[derive(Debug, Clone)]
pub struct Clifford {
    pub class: CliffordClass,
    pub layers: Vec<Layer>,
    pub u: CMat,
}

impl Clifford {
    /// Number of CZ gates in the decomposition.
    pub fn cz_count(&self) -> usize {
        self.layers.iter().filter(|l| matches!(l, Layer::Cz)).count()
    }
}

/// The full two-qubit Clifford group with phase-insensitive index.
pub struct CliffordGroup {
    /// The 24 single-qubit Cliffords (2×2), index 0 = identity.
    pub c1: Vec<CMat>,
    pub elements: Vec<Clifford>,
    index: HashMap<Key, usize>,
}

/// Kronecker product a ⊗ b with Q1 as the high bit (basis |q1 q2⟩).
pub fn kron2(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

fn c1_group() -> Vec<CMat> {
    // Closure of {H, S} up to phase, breadth-first from the identity.
    let gens = [hadamard(), s_gate()];
    let mut seen: HashMap<Key, usize> = HashMap::new();
    let mut out = vec![CMat::identity(2, 2)];
    seen.insert(canonical_key(&out[0]), 0);
    let mut head = 0;
    while head < out.len() {
        let cur = out[head].clone();
        head += 1;
        for g in &gens {
            let next = g * &cur;
            let key = canonical_key(&next);
            if !seen.contains_key(&key) {
                seen.insert(key, out.len());
                out.push(next);
            }
        }
    }
    assert_eq!(out.len(), 24, "single-qubit Clifford group size");
    out
}

impl CliffordGroup {
    /// Enumerate all 11,520 elements via the four-class construction.
    pub fn generate() -> Self {
        let c1 = c1_group();
        let c1_index: HashMap<Key, usize> = c1
            .iter()
            .enumerate()
            .map(|(i, u)| (canonical_key(u), i))
            .collect();
        let find1 = |u: &CMat| -> usize {
            *c1_index
                .get(&canonical_key(u))
                .expect("single-qubit Clifford closure")
        };
        let i_h = find1(&hadamard());
        let e = e_gate();
        let s1 = [0, find1(&e), find1(&(&e * &e))];
        // B·H stays in the group (up to phase); used by the SWAP-like layer.
        let bh: Vec<usize> = c1.iter().map(|b| find1(&(b * hadamard()))).collect();

        let cz = cz_target();
        let layer_u = |l: &Layer| -> CMat {
            match l {
                Layer::Singles(i, j) => kron2(&c1[*i], &c1[*j]),
                Layer::Cz => cz.clone(),
            }
        };
        let mut elements: Vec<Clifford> = Vec::with_capacity(11_520);
        let mut push = |class: CliffordClass, layers: Vec<Layer>| {
            let mut u = CMat::identity(4, 4);
            for l in &layers {
                u = layer_u(l) * u;
            }
            elements.push(Clifford { class, layers, u });
        };
        for a in 0..24 {
            for b in 0..24 {
                push(CliffordClass::Single, vec![Layer::Singles(a, b)]);
                for &sa in &s1 {
                    for &sb in &s1 {
                        push(
                            CliffordClass::CnotLike,
                            vec![Layer::Singles(sa, sb), Layer::Cz, Layer::Singles(a, b)],
                        );
                        push(
                            CliffordClass::IswapLike,
                            vec![
                                Layer::Singles(sa, sb),
                                Layer::Cz,
                                Layer::Singles(s1[1], s1[1]),
                                Layer::Cz,
                                Layer::Singles(a, b),
                            ],
                        );
                    }
                }
                // (A ⊗ B)·SWAP with SWAP realized natively as
                // (I⊗H)·CZ·(H⊗H)·CZ·(H⊗H)·CZ·(I⊗H).
                push(
                    CliffordClass::SwapLike,
                    vec![
                        Layer::Singles(0, i_h),
                        Layer::Cz,
                        Layer::Singles(i_h, i_h),
                        Layer::Cz,
                        Layer::Singles(i_h, i_h),
                        Layer::Cz,
                        Layer::Singles(a, bh[b]),
                    ],
                );
            }
        }
        let index: HashMap<Key, usize> = elements
            .iter()
            .enumerate()
            .map(|(i, c)| (canonical_key(&c.u), i))
            .collect();
        assert_eq!(elements.len(), 11_520, "class census");
        assert_eq!(index.len(), 11_520, "elements distinct up to phase");
        CliffordGroup {
            c1,
            elements,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Look a 4×4 unitary up in the group (up to global phase).
    pub fn find(&self, u: &CMat) -> Option<usize> {
        self.index.get(&canonical_key(u)).copied()
    }

    /// Group index of the inverse of element `i`.
    pub fn inverse_of(&self, i: usize) -> usize {
        self.find(&self.elements[i].u.adjoint())
            .expect("group closed under inversion")
    }

    /// Index of the identity element.
    pub fn identity_index(&self) -> usize {
        self.find(&CMat::identity(4, 4)).expect("identity in group")
    }
}

/// A randomized-benchmarking sequence: `m` uniformly random Cliffords (each
/// followed by the interleaved element if set) and the recovery element that
/// inverts the whole ideal product.
#[derive(Debug, Clone)]
pub struct RbSequence {
    pub m: usize,
    pub cliffords: Vec<usize>,
    pub interleaved: Option<usize>,
    pub recovery: usize,
}

impl RbSequence {
    /// Gates in time order, recovery included.
    pub fn gate_indices(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(2 * self.m + 1);
        for &c in &self.cliffords {
            out.push(c);
            if let Some(g) = self.interleaved {
                out.push(g);
            }
        }
        out.push(self.recovery);
        out
    }
}

/// Draw an RB sequence. Deterministic given the seed; the interleaved gate is
/// given by group index (resolve a unitary first with [`CliffordGroup::find`]).
pub fn rb_sequence(
    group: &CliffordGroup,
    m: usize,
    interleaved: Option<usize>,
    seed: u64,
) -> Result<RbSequence> {
    if m < 1 {
        return Err(Error::Config(format!("sequence length m = {m} < 1")));
    }
    if let Some(g) = interleaved {
        if g >= group.len() {
            return Err(Error::InvalidInterleave);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cliffords: Vec<usize> = (0..m).map(|_| rng.gen_range(0..group.len())).collect();
    let mut total = CMat::identity(4, 4);
    for &c in &cliffords {
        total = &group.elements[c].u * total;
        if let Some(g) = interleaved {
            total = &group.elements[g].u * total;
        }
    }
    let recovery = group
        .find(&total.adjoint())
        .expect("group closed under composition and inversion");
    Ok(RbSequence {
        m,
        cliffords,
        interleaved,
        recovery,
    })
}

/// What one sequence run yields: the |00⟩ survival after the recovery gate
/// and, for density-matrix backends, the purity of the two-qubit reduced
/// computational state before the recovery gate.
#[derive(Debug, Clone, Copy)]
pub struct RbOutcome {
    pub survival: f64,
    pub purity: Option<f64>,
}

/// Sequence executor. Implementations must be deterministic given the
/// sequence (all randomness lives in sequence generation).
pub trait RbBackend: Sync {
    fn run(&self, group: &CliffordGroup, seq: &RbSequence) -> Result<RbOutcome>;
}

/// Noiseless state-vector backend (no purity — exercises the PB
/// unsupported-backend path).
pub struct IdealBackend;

impl RbBackend for IdealBackend {
    fn run(&self, group: &CliffordGroup, seq: &RbSequence) -> Result<RbOutcome> {
        let mut v = CVec::zeros(4);
        v[0] = C64::new(1.0, 0.0);
        for g in seq.gate_indices() {
            v = &group.elements[g].u * v;
        }
        Ok(RbOutcome {
            survival: v[0].norm_sqr(),
            purity: None,
        })
    }
}

/// 4×4 density-matrix backend with synthetic per-Clifford noise: a coherent
/// ZZ over-rotation by `overrotation` radians plus two-qubit depolarizing of
/// strength `clifford_depolarizing`. The interleaved gate carries its own
/// depolarizing strength (zero = ideal interleaved gate).
pub struct SyntheticBackend {
    pub clifford_depolarizing: f64,
    pub interleave_depolarizing: f64,
    pub overrotation: f64,
}

impl SyntheticBackend {
    pub fn depolarizing(d: f64) -> Self {
        SyntheticBackend {
            clifford_depolarizing: d,
            interleave_depolarizing: d,
            overrotation: 0.0,
        }
    }

    pub fn coherent(angle: f64) -> Self {
        SyntheticBackend {
            clifford_depolarizing: 0.0,
            interleave_depolarizing: 0.0,
            overrotation: angle,
        }
    }

    fn error_unitary(&self) -> CMat {
        // exp(−i θ/2 · Z⊗Z): a purely coherent conditional-phase error.
        let t = 0.5 * self.overrotation;
        CMat::from_diagonal(&CVec::from_vec(vec![
            C64::from_polar(1.0, -t),
            C64::from_polar(1.0, t),
            C64::from_polar(1.0, t),
            C64::from_polar(1.0, -t),
        ]))
    }
}

fn depolarize(rho: &mut CMat, d: f64) {
    if d == 0.0 {
        return;
    }
    let dim = rho.nrows() as f64;
    let tr: f64 = (0..rho.nrows()).map(|i| rho[(i, i)].re).sum();
    *rho *= C64::new(1.0 - d, 0.0);
    for i in 0..rho.nrows() {
        rho[(i, i)] += C64::new(d * tr / dim, 0.0);
    }
}

fn purity_of(rho: &CMat) -> f64 {
    (rho * rho).trace().re
}

impl RbBackend for SyntheticBackend {
    fn run(&self, group: &CliffordGroup, seq: &RbSequence) -> Result<RbOutcome> {
        let err = self.error_unitary();
        let mut rho = CMat::zeros(4, 4);
        rho[(0, 0)] = C64::new(1.0, 0.0);
        let clifford = |rho: &mut CMat, idx: usize| {
            let u = &group.elements[idx].u;
            *rho = u * &*rho * u.adjoint();
            *rho = &err * &*rho * err.adjoint();
            depolarize(rho, self.clifford_depolarizing);
        };
        for &c in &seq.cliffords {
            clifford(&mut rho, c);
            if let Some(g) = seq.interleaved {
                let u = &group.elements[g].u;
                rho = u * rho * u.adjoint();
                depolarize(&mut rho, self.interleave_depolarizing);
            }
        }
        let purity = purity_of(&rho);
        clifford(&mut rho, seq.recovery);
        Ok(RbOutcome {
            survival: rho[(0, 0)].re,
            purity: Some(purity),
        })
    }
}

/// Full-device backend: every CZ layer applies the tuned flux pulse as a
/// precomputed Lindblad channel (plus its virtual-Z compensation), while
/// single-qubit layers are ideal unitaries embedded in the dressed
/// computational subspace.
pub struct LindbladBackend {
    params: DeviceParams,
    basis: ComputationalBasis,
    /// Embedded singles-layer unitaries, indexed `[i·24 + j]`.
    layer_ops: Vec<CMat>,
    cz_super: CMat,
    vz: CMat,
}

impl LindbladBackend {
    pub fn new(
        group: &CliffordGroup,
        params: &DeviceParams,
        flux: &FluxMap,
        basis: &ComputationalBasis,
        record: &CalibrationRecord,
        include_decoherence: bool,
    ) -> Result<Self> {
        let sched = record.pulse.schedule(params, flux, record.v_b, record.v_q)?;
        let controls = sample_schedule(&sched, DEFAULT_DT)?;
        let cz_super = lindblad_superoperator(
            &controls,
            params,
            flux,
            Frame::RotatingAtIdle,
            include_decoherence,
            1.0,
        )?;
        // Virtual-Z compensation of the tuned pulse's single-qubit phases,
        // applied after every CZ channel.
        let r = gate_result_for_schedule(params, flux, basis, &sched)?;
        let phi0 = r.block[(0, 0)].arg();
        let corr = [
            phi0,
            phi0 + r.phi_2,
            phi0 + r.phi_1,
            phi0 + r.phi_1 + r.phi_2,
        ];
        let vz4 = CMat::from_diagonal(&CVec::from_iterator(
            4,
            corr.iter().map(|&c| C64::from_polar(1.0, -c)),
        ));
        let vz = basis.embed_gate(&vz4);
        let layer_ops: Vec<CMat> = (0..24 * 24)
            .map(|k| basis.embed_gate(&kron2(&group.c1[k / 24], &group.c1[k % 24])))
            .collect();
        Ok(LindbladBackend {
            params: params.clone(),
            basis: basis.clone(),
            layer_ops,
            cz_super,
            vz,
        })
    }

    fn apply_gate(&self, group: &CliffordGroup, idx: usize, rho: &mut CMat) {
        for layer in &group.elements[idx].layers {
            match layer {
                Layer::Singles(i, j) => {
                    let u = &self.layer_ops[i * 24 + j];
                    *rho = u * &*rho * u.adjoint();
                }
                Layer::Cz => {
                    *rho = apply_superoperator(&self.cz_super, rho);
                    *rho = &self.vz * &*rho * self.vz.adjoint();
                }
            }
        }
    }

    /// Two-qubit reduced computational density matrix: coupler traced out,
    /// qubit levels ≥ 2 dropped.
    fn reduced_computational(&self, rho: &CMat) -> CMat {
        let dims = self.basis.dims();
        let mut out = CMat::zeros(4, 4);
        for a1 in 0..2 {
            for a2 in 0..2 {
                for b1 in 0..2 {
                    for b2 in 0..2 {
                        let mut z = C64::new(0.0, 0.0);
                        for nc in 0..dims[1] {
                            z += rho[(
                                self.params.state_index(a1, nc, a2),
                                self.params.state_index(b1, nc, b2),
                            )];
                        }
                        out[(2 * a1 + a2, 2 * b1 + b2)] = z;
                    }
                }
            }
        }
        out
    }
}

impl RbBackend for LindbladBackend {
    fn run(&self, group: &CliffordGroup, seq: &RbSequence) -> Result<RbOutcome> {
        let psi0 = self.basis.state(0, 0);
        let mut rho = &psi0 * psi0.adjoint();
        for &c in &seq.cliffords {
            self.apply_gate(group, c, &mut rho);
            if let Some(g) = seq.interleaved {
                self.apply_gate(group, g, &mut rho);
            }
        }
        let purity = purity_of(&self.reduced_computational(&rho));
        self.apply_gate(group, seq.recovery, &mut rho);
        // Both-qubits-ground population, coupler traced out.
        let dims = self.basis.dims();
        let survival: f64 = (0..dims[1])
            .map(|nc| {
                let i = self.params.state_index(0, nc, 0);
                rho[(i, i)].re
            })
            .sum();
        Ok(RbOutcome {
            survival,
            purity: Some(purity),
        })
    }
}

/// One row of an RB/PB decay table.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RbPoint {
    pub m: usize,
    pub mean: f64,
    pub std: f64,
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn sequence_seed(master: u64, m: usize, sample: usize) -> u64 {
    splitmix64(splitmix64(master ^ m as u64).wrapping_add(sample as u64))
}

fn run_sequences<B: RbBackend>(
    group: &CliffordGroup,
    backend: &B,
    ms: &[usize],
    samples: usize,
    interleave: Option<&CMat>,
    seed: u64,
) -> Result<Vec<(usize, Vec<RbOutcome>)>> {
    if samples < 1 {
        return Err(Error::Config("samples must be ≥ 1".into()));
    }
    if ms.is_empty() {
        return Err(Error::Config("at least one sequence length required".into()));
    }
    let interleaved = match interleave {
        None => None,
        Some(u) => Some(group.find(u).ok_or(Error::InvalidInterleave)?),
    };
    // Work items keyed by (m, sample): parallel map, order-preserving
    // collect, so results are independent of thread count.
    ms.iter()
        .map(|&m| {
            let outcomes: Vec<RbOutcome> = (0..samples)
                .into_par_iter()
                .map(|s| {
                    let seq = rb_sequence(group, m, interleaved, sequence_seed(seed, m, s))?;
                    backend.run(group, &seq)
                })
                .collect::<Result<_>>()?;
            Ok((m, outcomes))
        })
        .collect()
}

fn summarize(m: usize, values: &[f64]) -> RbPoint {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    RbPoint {
        m,
        mean,
        std: var.sqrt(),
    }
}

/// Randomized benchmarking: mean and std of the sequence fidelity (|00⟩
/// survival after recovery) per sequence length.
pub fn run_rb<B: RbBackend>(
    group: &CliffordGroup,
    backend: &B,
    ms: &[usize],
    samples: usize,
    interleave: Option<&CMat>,
    seed: u64,
) -> Result<Vec<RbPoint>> {
    let raw = run_sequences(group, backend, ms, samples, interleave, seed)?;
    Ok(raw
        .iter()
        .map(|(m, outs)| {
            let v: Vec<f64> = outs.iter().map(|o| o.survival).collect();
            summarize(*m, &v)
        })
        .collect())
}

/// Purity benchmarking: mean and std of Tr(ρ²) of the two-qubit reduced
/// computational state before the recovery gate.
pub fn run_pb<B: RbBackend>(
    group: &CliffordGroup,
    backend: &B,
    ms: &[usize],
    samples: usize,
    seed: u64,
) -> Result<Vec<RbPoint>> {
    let raw = run_sequences(group, backend, ms, samples, None, seed)?;
    raw.iter()
        .map(|(m, outs)| {
            let v: Vec<f64> = outs
                .iter()
                .map(|o| {
                    o.purity.ok_or_else(|| {
                        Error::Unsupported(
                            "purity benchmarking needs a density-matrix backend".into(),
                        )
                    })
                })
                .collect::<Result<_>>()?;
            Ok(summarize(*m, &v))
        })
        .collect()
}

/// Which decay law to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayModel {
    /// Sequence fidelity `F = A·p^m + B`.
    Fidelity,
    /// Sequence purity `F = A′·u^(m−1) + B′`.
    Purity,
}

/// Fitted exponential decay with 1σ uncertainties from the unweighted
/// least-squares covariance.
#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    pub a: f64,
    pub p: f64,
    pub b: f64,
    pub a_err: f64,
    pub p_err: f64,
    pub b_err: f64,
    /// Root-mean-square residual.
    pub residual: f64,
}

/// Fit `A·p^k + B` (k = m for fidelity, m − 1 for purity) by
/// Levenberg–Marquardt with an analytic Jacobian, p bounded to (0, 1].
/// Initial guess from log-linear regression of (F − B₀) with B₀ = 0.25, the
/// two-qubit depolarizing asymptote.
pub fn fit_decay(points: &[RbPoint], model: DecayModel) -> Result<DecayFit> {
    let mut distinct: Vec<usize> = points.iter().map(|p| p.m).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::Fit(format!(
            "need ≥ 3 distinct sequence lengths, got {}",
            distinct.len()
        )));
    }
    let k: Vec<f64> = points
        .iter()
        .map(|p| match model {
            DecayModel::Fidelity => p.m as f64,
            DecayModel::Purity => p.m as f64 - 1.0,
        })
        .collect();
    let f: Vec<f64> = points.iter().map(|p| p.mean).collect();
    let spread = f.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
        - f.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    if spread < 1e-9 {
        return Err(Error::Fit(
            "constant sequence data: decay rate unidentifiable".into(),
        ));
    }

    // Log-linear seed on F − B₀.
    let b0 = 0.25;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (ki, fi) in k.iter().zip(&f) {
        if fi - b0 > 1e-12 {
            xs.push(*ki);
            ys.push((fi - b0).ln());
        }
    }
    if xs.len() < 2 {
        return Err(Error::Fit(
            "data below the B₀ = 0.25 asymptote: no decay to fit".into(),
        ));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let mut p = slope.exp().clamp(1e-6, 1.0);
    let mut a = (my - slope * mx).exp().min(1.0);
    let mut b = b0;

    let ssr_of = |a: f64, p: f64, b: f64| -> f64 {
        k.iter()
            .zip(&f)
            .map(|(ki, fi)| (a * p.powf(*ki) + b - fi).powi(2))
            .sum()
    };
    let mut ssr = ssr_of(a, p, b);
    let mut lambda = 1e-3;
    for _ in 0..200 {
        // Normal equations with analytic Jacobian.
        let mut jtj = nalgebra::Matrix3::<f64>::zeros();
        let mut jtr = nalgebra::Vector3::<f64>::zeros();
        for (ki, fi) in k.iter().zip(&f) {
            let pk = p.powf(*ki);
            let j = nalgebra::Vector3::new(pk, a * ki * p.powf(ki - 1.0), 1.0);
            let r = a * pk + b - fi;
            jtj += j * j.transpose();
            jtr += j * r;
        }
        let mut damped = jtj;
        for i in 0..3 {
            damped[(i, i)] *= 1.0 + lambda;
        }
        let Some(delta) = damped.lu().solve(&(-jtr)) else {
            return Err(Error::Fit("singular normal equations".into()));
        };
        let cand = (
            a + delta[0],
            (p + delta[1]).clamp(1e-9, 1.0),
            b + delta[2],
        );
        let cand_ssr = ssr_of(cand.0, cand.1, cand.2);
        if cand_ssr.is_finite() && cand_ssr <= ssr {
            let step = delta.norm();
            (a, p, b) = cand;
            ssr = cand_ssr;
            lambda = (lambda / 3.0).max(1e-12);
            if step < 1e-12 {
                break;
            }
        } else {
            lambda *= 3.0;
            if lambda > 1e12 {
                break;
            }
        }
    }
    if !ssr.is_finite() {
        return Err(Error::Fit("non-finite residual".into()));
    }

    // Covariance from the residual-scaled unweighted normal matrix.
    let mut jtj = nalgebra::Matrix3::<f64>::zeros();
    for ki in &k {
        let pk = p.powf(*ki);
        let j = nalgebra::Vector3::new(pk, a * ki * p.powf(ki - 1.0), 1.0);
        jtj += j * j.transpose();
    }
    let dof = (points.len() as f64 - 3.0).max(1.0);
    let s2 = ssr / dof;
    let (a_err, p_err, b_err) = match jtj.try_inverse() {
        Some(cov) => (
            (cov[(0, 0)] * s2).max(0.0).sqrt(),
            (cov[(1, 1)] * s2).max(0.0).sqrt(),
            (cov[(2, 2)] * s2).max(0.0).sqrt(),
        ),
        None => (f64::NAN, f64::NAN, f64::NAN),
    };
    Ok(DecayFit {
        a,
        p,
        b,
        a_err,
        p_err,
        b_err,
        residual: (ssr / points.len() as f64).sqrt(),
    })
}

/// Fit `A·p^k + floor` with the asymptote pinned. The Clifford twirl drives
/// any trace-preserving noise toward the depolarizing fixed point, so the
/// two-qubit floor is 1/4; pinning it removes the A/B degeneracy that makes
/// the free three-parameter fit ill-conditioned on shallow decays.
pub fn fit_decay_fixed_floor(
    points: &[RbPoint],
    model: DecayModel,
    floor: f64,
) -> Result<DecayFit> {
    let mut distinct: Vec<usize> = points.iter().map(|p| p.m).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::Fit(format!(
            "need ≥ 2 distinct sequence lengths, got {}",
            distinct.len()
        )));
    }
    let k: Vec<f64> = points
        .iter()
        .map(|p| match model {
            DecayModel::Fidelity => p.m as f64,
            DecayModel::Purity => p.m as f64 - 1.0,
        })
        .collect();
    let f: Vec<f64> = points.iter().map(|p| p.mean).collect();

    // Log-linear seed on F − floor.
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (ki, fi) in k.iter().zip(&f) {
        if fi - floor > 1e-12 {
            xs.push(*ki);
            ys.push((fi - floor).ln());
        }
    }
    if xs.len() < 2 {
        return Err(Error::Fit(format!(
            "data below the floor {floor}: no decay to fit"
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let mut p = slope.exp().clamp(1e-6, 1.0);
    let mut a = (my - slope * mx).exp().min(1.0);

    let ssr_of = |a: f64, p: f64| -> f64 {
        k.iter()
            .zip(&f)
            .map(|(ki, fi)| (a * p.powf(*ki) + floor - fi).powi(2))
            .sum()
    };
    let mut ssr = ssr_of(a, p);
    let mut lambda = 1e-3;
    for _ in 0..200 {
        let mut jtj = nalgebra::Matrix2::<f64>::zeros();
        let mut jtr = nalgebra::Vector2::<f64>::zeros();
        for (ki, fi) in k.iter().zip(&f) {
            let pk = p.powf(*ki);
            let j = nalgebra::Vector2::new(pk, a * ki * p.powf(ki - 1.0));
            let r = a * pk + floor - fi;
            jtj += j * j.transpose();
            jtr += j * r;
        }
        let mut damped = jtj;
        for i in 0..2 {
            damped[(i, i)] *= 1.0 + lambda;
        }
        let Some(delta) = damped.lu().solve(&(-jtr)) else {
            return Err(Error::Fit("singular normal equations".into()));
        };
        let cand = (a + delta[0], (p + delta[1]).clamp(1e-9, 1.0));
        let cand_ssr = ssr_of(cand.0, cand.1);
        if cand_ssr.is_finite() && cand_ssr <= ssr {
            let step = delta.norm();
            (a, p) = cand;
            ssr = cand_ssr;
            lambda = (lambda / 3.0).max(1e-12);
            if step < 1e-12 {
                break;
            }
        } else {
            lambda *= 3.0;
            if lambda > 1e12 {
                break;
            }
        }
    }
    if !ssr.is_finite() {
        return Err(Error::Fit("non-finite residual".into()));
    }

    let mut jtj = nalgebra::Matrix2::<f64>::zeros();
    for ki in &k {
        let pk = p.powf(*ki);
        let j = nalgebra::Vector2::new(pk, a * ki * p.powf(ki - 1.0));
        jtj += j * j.transpose();
    }
    let dof = (points.len() as f64 - 2.0).max(1.0);
    let s2 = ssr / dof;
    let (a_err, p_err) = match jtj.try_inverse() {
        Some(cov) => (
            (cov[(0, 0)] * s2).max(0.0).sqrt(),
            (cov[(1, 1)] * s2).max(0.0).sqrt(),
        ),
        None => (f64::NAN, f64::NAN),
    };
    Ok(DecayFit {
        a,
        p,
        b: floor,
        a_err,
        p_err,
        b_err: 0.0,
        residual: (ssr / points.len() as f64).sqrt(),
    })
}

/// Error rates from RB/PB decay constants.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    /// Reference error per Clifford `r = 3/4·(1 − p_ref)`.
    pub r_ref: f64,
    /// Interleaved error per Clifford (if an interleaved fit was given).
    pub r_int: Option<f64>,
    /// Interleaved-gate error `r_gate = 3/4·(1 − p_int/p_ref)`.
    pub r_gate: Option<f64>,
    /// Interleaved-gate fidelity `1 − r_gate`.
    pub f_gate: Option<f64>,
    /// Incoherent error `r_incoherent = 3/4·(1 − √u)`.
    pub r_incoherent: Option<f64>,
    /// Incoherent fraction `r_incoherent / r_ref`.
    pub incoherent_fraction: Option<f64>,
}

/// Combine decay constants into the standard RB error rates.
pub fn error_rates(p_ref: f64, p_int: Option<f64>, u_ref: Option<f64>) -> Result<ErrorReport> {
    if !(p_ref > 0.0 && p_ref <= 1.0) {
        return Err(Error::Config(format!(
            "reference decay p_ref = {p_ref} outside (0, 1]"
        )));
    }
    let r_ref = 0.75 * (1.0 - p_ref);
    let r_int = p_int.map(|p| 0.75 * (1.0 - p));
    let r_gate = p_int.map(|p| 0.75 * (1.0 - p / p_ref));
    let f_gate = r_gate.map(|r| 1.0 - r);
    let r_incoherent = u_ref.map(|u| 0.75 * (1.0 - u.max(0.0).sqrt()));
    let incoherent_fraction = r_incoherent.map(|ri| ri / r_ref);
    Ok(ErrorReport {
        r_ref,
        r_int,
        r_gate,
        f_gate,
        r_incoherent,
        incoherent_fraction,
    })
}
