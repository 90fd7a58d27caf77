//! Iterates a reduced walk in exact rational arithmetic and checks
//! positivity, mass conservation and the binomial delta response; then runs
//! the same walk in f64 against the heat kernel.

use microlim::models::{self, ModelId, ModelParams};
use microlim::rational::rat;
use microlim::simulate::{reference_heat, step_sizes, Boundary, GridField, WalkRun, Weights};
use num_rational::BigRational;
use num_traits::{One, Zero};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let form = models::derive(ModelId::StandardHeatDff, None).into_form()?;

    let weights = Weights::<BigRational>::from_form(&form)?;
    let field = GridField::delta(21, 10, BigRational::one(), 1.0, Boundary::Periodic)?;
    let mut exact = WalkRun::new(weights, field, 1.0)?;
    exact.run(10);
    let values = exact.field().values();
    println!("exact delta response after 10 steps:");
    for (site, v) in values.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
        println!("  site {site:2}: {v}");
    }
    let mass: BigRational = values.iter().sum();
    println!("mass = {mass}, min = {}", exact.field().min());

    let params = ModelParams::new(rat(1, 1), None);
    let sizes = step_sizes(&form, &params, Some(0.05))?;
    let n = 401;
    let centre = n / 2;
    let weights = Weights::<f64>::from_form(&form)?;
    let field = GridField::delta(n, centre, 1.0 / sizes.dx, sizes.dx, Boundary::Periodic)?
        .with_origin(-(centre as f64) * sizes.dx);
    let mut run = WalkRun::new(weights, field, sizes.dt)?;
    let steps = (0.5 / sizes.dt).round() as u64;
    run.run(steps);
    // Every other site is empty; average neighbouring pairs before comparing.
    let f = run.field();
    let mut err = 0.0;
    for m in 1..n - 1 {
        let smooth = 0.25 * f.values()[m - 1] + 0.5 * f.values()[m] + 0.25 * f.values()[m + 1];
        err += (smooth - reference_heat(f.x(m), run.time(), 1.0)).abs() * sizes.dx;
    }
    println!(
        "f64 walk: dx = {}, dt = {}, t = {:.3}, L1 error vs heat kernel = {err:.2e}",
        sizes.dx,
        sizes.dt,
        run.time()
    );
    Ok(())
}
