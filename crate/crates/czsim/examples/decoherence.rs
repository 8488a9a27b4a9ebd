//! Lindblad evolution at the idle point: excite Q1, let the device sit, and
//! compare the simulated population decay against the configured T1.

use czsim::device::{idle_channel_values, DeviceParams, FluxMap};
use czsim::evolve::{evolve_density, Frame, QuantumState};
use czsim::pulse::{sample_schedule, Schedule};

fn main() -> czsim::Result<()> {
    let params = DeviceParams::default();
    let flux = FluxMap::default();
    let idle = idle_channel_values(&flux, &params)?;

    let t1_ns = params.t1[0];
    println!("Q1 T1 = {:.1} ns; idle decay of the bare |100⟩ excitation:", t1_ns);
    println!("t (ns)   simulated   exp(−t/T1)");

    let rho0 = QuantumState::Density(QuantumState::bare(&params, 1, 0, 0).to_density());
    for &t in &[0.0_f64, 2000.0, 5000.0, 10000.0, 20000.0] {
        let pop = if t == 0.0 {
            1.0
        } else {
            let mut sched = Schedule::new(idle);
            sched.pad_to(t);
            let s = sample_schedule(&sched, 1.0)?;
            let rho = evolve_density(&rho0, &s, &params, &flux, Frame::RotatingAtIdle, true)?;
            let idx = params.state_index(1, 0, 0);
            rho.to_density()[(idx, idx)].re
        };
        println!("{:7.0}   {:.5}     {:.5}", t, pop, (-t / t1_ns).exp());
    }
    println!("(residual differences come from the small dressing of |100⟩ at idle)");
    Ok(())
}
