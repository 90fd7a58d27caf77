//! Reduces every built-in discretization to its random-walk form and prints
//! the step-size bindings, the weights and the derivation trace.

use microlim::models::{self, ModelId};
use microlim::rational::rat;

fn main() {
    for model in ModelId::ALL {
        println!("== {model}: {}", model.pde());
        let report = models::derive(model, models::golden_parameter(model));
        print!("{}", report.trace());
        println!();
    }

    // The plain explicit scheme has a one-parameter family of walks.
    for p in [rat(1, 2), rat(1, 4), rat(1, 6)] {
        let form = models::derive(ModelId::StandardHeat, Some(p.clone()))
            .into_form()
            .expect("p lies in the positivity band");
        let [plus, zero, minus] = form.weights();
        println!("standard-heat at p = {p}: weights ({plus}, {zero}, {minus})");
    }

    // Outside the band the walk would need a negative weight.
    let report = models::derive(ModelId::StandardHeat, Some(rat(3, 5)));
    if let Err(e) = report.form() {
        println!("standard-heat at p = 3/5: {e}");
    }
}
