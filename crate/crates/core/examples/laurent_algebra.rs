//! Exact Laurent-polynomial arithmetic: parsing, products, inverses of
//! monomials, substitution of step-size bindings, and evaluation.

use microlim::laurent::{Bindings, LaurentPoly, SymbolId, Valuation, Var};
use microlim::rational::rat;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a: LaurentPoly = "1 - 2*D*dt*dx^-2".parse()?;
    let b: LaurentPoly = "D*dt*dx^-2".parse()?;
    println!("a       = {a}");
    println!("b       = {b}");
    println!("a + 2b  = {}", &a + &(&b * &LaurentPoly::integer(2)));
    println!("a * b   = {}", &a * &b);
    println!("1 / b   = {}", b.inverse().expect("b is a monomial"));

    // Bind dt = dx^2 / (2D) and watch the weights become constants.
    let dt: LaurentPoly = "1/2*D^-1*dx^2".parse()?;
    let bindings = Bindings::from([(Var::Symbol(SymbolId::TimeStep), dt)]);
    println!("a | dt  = {}", a.substitute(&bindings)?);
    println!("b | dt  = {}", b.substitute(&bindings)?);

    // Square bindings replace even powers of dx.
    let dx2: LaurentPoly = "4*D*tau".parse()?;
    let bindings = Bindings::from([(Var::Square(SymbolId::SpaceStep), dx2)]);
    println!("b | dx2 = {}", b.substitute(&bindings)?);

    let at = Valuation::new(rat(1, 1), rat(1, 100), rat(1, 200), rat(1, 10));
    println!("a at D=1, dt=1/200, dx=1/10: {}", a.eval(&at));
    Ok(())
}
