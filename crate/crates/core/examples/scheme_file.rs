//! Writes a discretization in the `.scheme` language, reduces it, and shows
//! the positioned diagnostics produced for malformed input.

use microlim::dsl::{parse_scheme, render_scheme};
use microlim::reduction::reduce;
use microlim::stencil::assemble;

const EXPLICIT: &str = "\
params D;
# Forward difference in time, second difference in space.
template fwd for ut { (1,0): 1/dt; (0,0): -1/dt; }
template lap for uxx { (0,1): 1/dx^2; (0,0): -2/dx^2; (0,-1): 1/dx^2; }
scheme { fwd - D * lap = 0 }
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let file = parse_scheme(EXPLICIT)?;
    let stencil = assemble(file.scheme());
    println!("stencil:");
    for (offset, c) in stencil.entries() {
        println!("  {offset}: {c}");
    }
    let report = reduce(&stencil, Some("1/4".parse()?));
    print!("{}", report.trace());

    println!("\ncanonical form:\n{}", render_scheme(&file));

    for bad in [
        "scheme { forward_euler_t - K * central_xx = 0 }",
        "scheme { forward_euler_t - D * central_xx = 1 }",
        "template t for uq { (0,0): 1; }\nscheme { t = 0 }",
        "params D;\nscheme { central_second_t + tau * forward_euler_t = 0 }",
    ] {
        match parse_scheme(bad) {
            Ok(_) => println!("accepted: {bad}"),
            Err(d) => println!("{}:{}: {}", d.line, d.col, d.kind),
        }
    }
    Ok(())
}
