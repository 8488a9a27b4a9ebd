//! Tune the diabatic CZ gate: coarse (V_b, V_q) grid seed at the maximum
//! duration, then Nelder–Mead over (V_b, V_q, duration ≤ 20 ns) on the
//! combined infidelity + leakage objective.

use czsim::device::{DeviceParams, FluxMap};
use czsim::evolve::ComputationalBasis;
use czsim::tuneup::{tune_diabatic_cz, NmConfig};

fn main() -> czsim::Result<()> {
    let params = DeviceParams::default();
    let flux = FluxMap::default();
    let basis = ComputationalBasis::at_idle(&params)?;

    let nm = NmConfig::new(vec![0.01, 0.01, 2.0], 150);
    let (record, opt) = tune_diabatic_cz(&params, &flux, &basis, 2.0, 20.0, &nm)?;

    println!("tuned diabatic CZ ({} objective evaluations)", opt.evaluations);
    println!("  coupler bias  : {:.6} V", record.v_b);
    println!("  qubit bias    : {:.6} V", record.v_q.unwrap_or(f64::NAN));
    println!("  duration      : {:.3} ns", record.pulse.duration());
    println!("  infidelity    : {:.3e}", record.infidelity);
    println!("  phi_c         : {:+.4} rad", record.phi_c);
    println!("  leakage       : {:.3e}", record.leakage);
    println!("  best objective: {:.3e}", opt.value);
    Ok(())
}
