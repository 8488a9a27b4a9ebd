//! Leakage map of the diabatic square pulse: prepare |11⟩, pulse over a
//! (V_b, V_q) grid, and report where population leaves the computational
//! subspace.

use czsim::device::{DeviceParams, FluxMap};
use czsim::evolve::ComputationalBasis;
use czsim::experiments::{leakage_map, CzPulse};

fn main() -> czsim::Result<()> {
    let params = DeviceParams::default();
    let flux = FluxMap::default();
    let basis = ComputationalBasis::at_idle(&params)?;

    let vbs: Vec<f64> = (0..9).map(|k| 0.20 + 0.0075 * k as f64).collect();
    let vqs: Vec<f64> = (0..9).map(|k| 0.08 + 0.005 * k as f64).collect();
    let pulse = CzPulse::Diabatic {
        duration: 18.0,
        rise: 2.0,
    };
    let (_, noncomp) = leakage_map(&params, &flux, &basis, pulse, &vbs, &vqs)?;

    println!("non-computational population after an 18 ns square pulse:");
    print!("V_b \\ V_q ");
    for vq in &vqs {
        print!(" {vq:6.3}");
    }
    println!();
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for (i, vb) in vbs.iter().enumerate() {
        print!("  {vb:6.3}  ");
        for (j, vq) in vqs.iter().enumerate() {
            let l = noncomp.values[i][j];
            print!(" {l:6.4}");
            if l < best.0 {
                best = (l, *vb, *vq);
            }
        }
        println!();
    }
    println!(
        "lowest leakage {:.2e} at V_b = {:.3} V, V_q = {:.3} V",
        best.0, best.1, best.2
    );
    Ok(())
}
