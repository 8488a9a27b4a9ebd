//! Virtual gate tune-up: a deterministic Nelder–Mead optimizer over pulse
//! parameters, with coarse pre-scans supplying the starting point, and a
//! JSON calibration record for the tuned gate.

use crate::device::{DeviceParams, FluxMap};
use crate::error::{Error, Result};
use crate::evolve::{
    average_gate_fidelity, cz_target, virtual_z_compensation, ComputationalBasis,
};
use crate::experiments::{conditional_phase_scan, gate_result_for_schedule, CzPulse};
use crate::units;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Nelder–Mead settings. The simplex starts at `x0` plus one vertex per
/// coordinate displaced by `scales[i]`; standard reflection/expansion/
/// contraction/shrink coefficients (1, 2, ½, ½).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NmConfig {
    /// Initial simplex edge per coordinate.
    pub scales: Vec<f64>,
    /// Hard cap on objective evaluations.
    pub max_evals: usize,
    /// Stop when the value spread across the simplex falls below this.
    pub tolerance: f64,
}

impl NmConfig {
    pub fn new(scales: Vec<f64>, max_evals: usize) -> Self {
        NmConfig {
            scales,
            max_evals,
            tolerance: 0.0,
        }
    }
}

/// Optimizer output: best point, best value, and the full evaluation trace
/// in call order.
#[derive(Debug, Clone, Serialize)]
pub struct NmResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub trace: Vec<(Vec<f64>, f64)>,
}

/// Derivative-free simplex minimization. Fully deterministic: ties are
/// broken by vertex order, and the trace records every evaluation.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], cfg: &NmConfig) -> Result<NmResult>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let n = x0.len();
    if n == 0 || cfg.scales.len() != n {
        return Err(Error::Config(
            "scale count must match parameter count".into(),
        ));
    }
    let mut trace: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], trace: &mut Vec<(Vec<f64>, f64)>, evals: &mut usize| -> Result<f64> {
        let v = f(x)?;
        if !v.is_finite() {
            return Err(Error::NonFiniteObjective(*evals));
        }
        *evals += 1;
        trace.push((x.to_vec(), v));
        Ok(v)
    };

    // Initial simplex: n + 1 vertices.
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = eval(x0, &mut trace, &mut evals)?;
    simplex.push((x0.to_vec(), v0));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += cfg.scales[i];
        let v = eval(&x, &mut trace, &mut evals)?;
        simplex.push((x, v));
    }

    while evals < cfg.max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[n].1 - simplex[0].1;
        if spread <= cfg.tolerance {
            break;
        }
        // Centroid of all vertices but the worst.
        let mut c = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (ci, xi) in c.iter_mut().zip(x) {
                *ci += xi / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let at = |t: f64| -> Vec<f64> {
            c.iter()
                .zip(&worst.0)
                .map(|(&ci, &wi)| ci + t * (ci - wi))
                .collect()
        };

        let xr = at(1.0);
        let vr = eval(&xr, &mut trace, &mut evals)?;
        if vr < simplex[0].1 {
            // Try to expand past the reflection.
            let xe = at(2.0);
            let ve = eval(&xe, &mut trace, &mut evals)?;
            simplex[n] = if ve < vr { (xe, ve) } else { (xr, vr) };
        } else if vr < simplex[n - 1].1 {
            simplex[n] = (xr, vr);
        } else {
            // Contract toward the better of the worst vertex and the
            // reflection.
            let (xc, side_value) = if vr < worst.1 {
                (at(0.5), vr)
            } else {
                (at(-0.5), worst.1)
            };
            let vc = eval(&xc, &mut trace, &mut evals)?;
            if vc < side_value {
                simplex[n] = (xc, vc);
            } else {
                // Shrink everything toward the best vertex.
                let best = simplex[0].0.clone();
                for vert in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = best
                        .iter()
                        .zip(&vert.0)
                        .map(|(&b, &x)| b + 0.5 * (x - b))
                        .collect();
                    let v = eval(&x, &mut trace, &mut evals)?;
                    *vert = (x, v);
                }
            }
        }
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(NmResult {
        x: simplex[0].0.clone(),
        value: simplex[0].1,
        evaluations: evals,
        trace,
    })
}

/// Tuned-gate summary persisted after calibration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationRecord {
    pub pulse: CzPulse,
    /// Coupler peak bias, V.
    pub v_b: f64,
    /// Q2 peak bias for the diabatic pulse, V.
    pub v_q: Option<f64>,
    /// 1 − average gate fidelity after virtual-Z compensation.
    pub infidelity: f64,
    pub phi_c: f64,
    pub phi_1: f64,
    pub phi_2: f64,
    /// Population lost from the computational block.
    pub leakage: f64,
    pub evaluations: usize,
}

impl CalibrationRecord {
    pub fn save(&self, path: &Path) -> Result<()> {
        let s = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("serialize calibration: {e}")))?;
        std::fs::write(path, s)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)?;
        serde_json::from_str(&s).map_err(|e| Error::Config(format!("parse calibration: {e}")))
    }
}

/// Coherent infidelity of a pulse: 1 − F_avg of the virtual-Z-compensated
/// computational block against CZ.
pub fn cz_infidelity(
    params: &DeviceParams,
    flux: &FluxMap,
    basis: &ComputationalBasis,
    pulse: CzPulse,
    v_b: f64,
    v_q: Option<f64>,
) -> Result<f64> {
    let sched = pulse.schedule(params, flux, v_b, v_q)?;
    let r = gate_result_for_schedule(params, flux, basis, &sched)?;
    Ok(1.0 - average_gate_fidelity(&virtual_z_compensation(&r), &cz_target()))
}

fn record_for(
    params: &DeviceParams,
    flux: &FluxMap,
    basis: &ComputationalBasis,
    pulse: CzPulse,
    v_b: f64,
    v_q: Option<f64>,
    evaluations: usize,
) -> Result<CalibrationRecord> {
    let sched = pulse.schedule(params, flux, v_b, v_q)?;
    let r = gate_result_for_schedule(params, flux, basis, &sched)?;
    Ok(CalibrationRecord {
        pulse,
        v_b,
        v_q,
        infidelity: 1.0 - average_gate_fidelity(&virtual_z_compensation(&r), &cz_target()),
        phi_c: r.phi_c,
        phi_1: r.phi_1,
        phi_2: r.phi_2,
        leakage: r.leakage,
        evaluations,
    })
}

/// Tune the adiabatic (half-cosine coupler) CZ.
///
/// A conditional-phase scan at the scan duration locates the bias where
/// φ_c ≈ π; Nelder–Mead then minimizes the compensated infidelity over
/// (peak bias, duration). The optimum trades pulse depth against duration
/// and settles at a longer, shallower pulse than the scan point.
pub fn tune_adiabatic_cz(
    params: &DeviceParams,
    flux: &FluxMap,
    basis: &ComputationalBasis,
    scan_duration: f64,
    nm: &NmConfig,
) -> Result<(CalibrationRecord, NmResult)> {
    // Pre-scan: walk the bias up at fixed duration until φ_c crosses π.
    let vbs: Vec<f64> = (0..17).map(|k| 0.20 + 0.005 * k as f64).collect();
    let scan = conditional_phase_scan(
        params,
        flux,
        basis,
        CzPulse::Adiabatic {
            duration: scan_duration,
        },
        &vbs,
        None,
    )?;
    let mut v_start = vbs[0];
    let mut best = f64::INFINITY;
    for (i, &vb) in vbs.iter().enumerate() {
        let miss = units::wrap_phase(scan.values[i][0] - std::f64::consts::PI).abs();
        if miss < best {
            best = miss;
            v_start = vb;
        }
    }

    let min_duration = 5.0;
    let obj = |x: &[f64]| -> Result<f64> {
        let duration = x[1].max(min_duration);
        let penalty = (x[1] - duration).powi(2);
        Ok(cz_infidelity(
            params,
            flux,
            basis,
            CzPulse::Adiabatic { duration },
            x[0],
            None,
        )? + penalty)
    };
    let nm_result = nelder_mead(obj, &[v_start, scan_duration], nm)?;
    let duration = nm_result.x[1].max(min_duration);
    let record = record_for(
        params,
        flux,
        basis,
        CzPulse::Adiabatic { duration },
        nm_result.x[0],
        None,
        nm_result.evaluations,
    )?;
    Ok((record, nm_result))
}

/// Tune the diabatic (square-pulse) CZ at a fixed ramp width.
///
/// A coarse grid over the two peak biases at the maximum duration seeds
/// Nelder–Mead over (coupler bias, Q2 bias, duration ≤ `max_duration`).
/// The objective adds the block leakage to the compensated infidelity so
/// the optimizer steers along the leakage valley.
pub fn tune_diabatic_cz(
    params: &DeviceParams,
    flux: &FluxMap,
    basis: &ComputationalBasis,
    rise: f64,
    max_duration: f64,
    nm: &NmConfig,
) -> Result<(CalibrationRecord, NmResult)> {
    let combined = |vb: f64, vq: f64, duration: f64| -> Result<f64> {
        let pulse = CzPulse::Diabatic { duration, rise };
        let sched = pulse.schedule(params, flux, vb, Some(vq))?;
        let r = gate_result_for_schedule(params, flux, basis, &sched)?;
        let infid = 1.0 - average_gate_fidelity(&virtual_z_compensation(&r), &cz_target());
        Ok(infid + r.leakage)
    };

    // Coarse seed grid at full duration.
    let mut start = (0.23, 0.10);
    let mut best = f64::INFINITY;
    for i in 0..5 {
        let vb = 0.20 + 0.015 * i as f64;
        for j in 0..5 {
            let vq = 0.08 + 0.01 * j as f64;
            let v = combined(vb, vq, max_duration)?;
            if v < best {
                best = v;
                start = (vb, vq);
            }
        }
    }

    let min_duration = 2.0 * rise;
    let clamp = |t: f64| t.clamp(min_duration, max_duration);
    let obj = |x: &[f64]| -> Result<f64> {
        let duration = clamp(x[2]);
        let penalty = (x[2] - duration).powi(2);
        Ok(combined(x[0], x[1], duration)? + penalty)
    };
    let nm_result = nelder_mead(obj, &[start.0, start.1, max_duration], nm)?;
    let duration = clamp(nm_result.x[2]);
    let record = record_for(
        params,
        flux,
        basis,
        CzPulse::Diabatic { duration, rise },
        nm_result.x[0],
        Some(nm_result.x[1]),
        nm_result.evaluations,
    )?;
    Ok((record, nm_result))
}
