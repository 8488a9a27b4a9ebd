//! Conditional phase two ways: a Ramsey experiment on Q2 with the control
//! qubit ground vs excited, cross-checked against the computational-block
//! projection of the same pulse, plus a φ_c(V_b) scan.

use czsim::device::{DeviceParams, FluxMap};
use czsim::evolve::ComputationalBasis;
use czsim::experiments::{
    conditional_phase_scan, gate_result_for_schedule, ramsey_phi_c, CzPulse,
};
use czsim::units;

fn main() -> czsim::Result<()> {
    let params = DeviceParams::default();
    let flux = FluxMap::default();
    let basis = ComputationalBasis::at_idle(&params)?;

    let pulse = CzPulse::Adiabatic { duration: 104.692 };
    let v_b = 0.232047;
    let sched = pulse.schedule(&params, &flux, v_b, None)?;
    let alphas: Vec<f64> = (0..41).map(|k| units::TWO_PI * k as f64 / 40.0).collect();

    let ramsey = ramsey_phi_c(&params, &flux, &basis, &sched, &alphas, None)?;
    let projected = gate_result_for_schedule(&params, &flux, &basis, &sched)?.phi_c;
    println!("tuned adiabatic pulse at V_b = {v_b} V:");
    println!("  φ_c (Ramsey)     : {ramsey:+.5} rad");
    println!("  φ_c (projection) : {projected:+.5} rad");

    let vbs: Vec<f64> = (0..11).map(|k| 0.20 + 0.006 * k as f64).collect();
    let scan = conditional_phase_scan(
        &params,
        &flux,
        &basis,
        CzPulse::Adiabatic { duration: 30.0 },
        &vbs,
        None,
    )?;
    println!("φ_c scan at 30 ns:");
    for (v, col) in scan.x.iter().zip(&scan.values) {
        println!("  V_b = {v:.3} V  →  φ_c = {:+.4} rad", col[0]);
    }
    Ok(())
}
