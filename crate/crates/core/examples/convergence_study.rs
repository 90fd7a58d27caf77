//! Refines each model towards its continuum limit and prints the L1 error
//! against the heat kernel per level.

use microlim::rational::rat;
use microlim::simulate::{convergence_study, SimError};
use microlim::{ModelId, ModelParams};

fn main() {
    let cases = [
        (ModelId::StandardHeat, None, Some(rat(1, 2))),
        (ModelId::StandardHeat, None, Some(rat(1, 4))),
        (ModelId::StandardHeatDff, None, None),
        (ModelId::MaxwellCattaneo, Some(rat(1, 100)), None),
        (ModelId::Symmetry, Some(rat(1, 100)), None),
    ];
    for (model, tau, p) in cases {
        let params = ModelParams::new(rat(1, 1), tau);
        let label = match &p {
            Some(p) => format!("{model} (p = {p})"),
            None => model.to_string(),
        };
        println!("{label}");
        let table = match convergence_study(model, &params, p, 4) {
            Ok(t) => t,
            Err(SimError::NonConvergent { table, level, .. }) => {
                println!("  not convergent at level {level}");
                *table
            }
            Err(e) => {
                println!("  failed: {e}");
                continue;
            }
        };
        println!(
            "  refinement {:?}, T = {}",
            table.refinement, table.target_time
        );
        for r in &table.rows {
            let ratio = r.ratio.map(|x| format!("{x:.3}")).unwrap_or_default();
            println!(
                "  level {} dx {:.5} dt {:.3e} sites {:5} steps {:6} L1 {:.4e} {}",
                r.level, r.dx, r.dt, r.sites, r.steps, r.l1_error, ratio
            );
        }
    }
}
