//! Measures the normal-mode frequencies of a periodic mass-spring chain and
//! compares them with `2 (c/dx) |sin(pi q / N)|`, then checks energy
//! conservation and the long-wavelength sound speed.

use microlim::oscillator::{
    energy_report, measure_dispersion, ChainBoundary, ChainParams, ChainState,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = ChainParams::new(1.0, 0.1, 1.0, 256, ChainBoundary::Periodic)?;
    let dt = 0.1 * params.step_limit();
    println!("mode  omega_measured  omega_theory  rel_err   speed/c");
    for q in [1, 2, 4, 8] {
        let row = measure_dispersion(&params, q, dt, 4.0)?;
        let speed = row.omega_measured / params.wavenumber(q)?;
        println!(
            "{:4}  {:14.8}  {:12.8}  {:.2e}  {:.6}",
            q,
            row.omega_measured,
            row.omega_theory,
            row.rel_err,
            speed / params.c()
        );
    }
    let start = ChainState::at_rest(params.mode_shape(3)?);
    let report = energy_report(&start, &params, dt, 10_000)?;
    println!(
        "energy over 10^4 steps: staggered drift {:.2e}, plain energy oscillation {:.2e}",
        report.drift, report.oscillation
    );
    Ok(())
}
