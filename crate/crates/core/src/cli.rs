//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 reduction failure,
//! 3 numeric failure (non-convergence, unstable step, failed check).

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde_json::{json, Value};

use crate::golden::run_checks;
use crate::laurent::{Bindings, LaurentPoly, SymbolId, Var};
use crate::models::{self, ModelId, ModelParams};
use crate::oscillator::{self, ChainBoundary, ChainParams, ChainState, DispersionRow};
use crate::rational::{parse_rational, rat};
use crate::reduction::{reduce, RandomWalkForm, ReductionError, ReductionReport, Unknown};
use crate::simulate::{self, Boundary, GridField, Sample, SimError, StepSizes, WalkRun, Weights};
use crate::stencil::{assemble, Stencil};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_REDUCTION: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Environment variable that forces exact rational arithmetic in `simulate`.
pub const RATIONAL_ENV: &str = "MICROLIM_RATIONAL";

#[derive(Parser, Debug)]
#[command(
    name = "microlim",
    version,
    about = "Reduce heat-conduction schemes to random-walk micro-models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Reduce a model or scheme file to a random walk.
    Derive(DeriveArgs),
    /// Iterate the reduced walk from a delta initial condition; writes CSV.
    Simulate(SimulateArgs),
    /// Continuum-limit convergence table against the heat kernel; writes CSV.
    Converge(ConvergeArgs),
    /// Mass-spring chain dispersion measurement; writes CSV.
    Chain(ChainArgs),
    /// List the built-in models.
    ListModels {
        #[arg(long)]
        json: bool,
    },
    /// Run the golden derivations and exact-arithmetic invariant checks.
    Check {
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args, Debug)]
struct SourceArgs {
    /// Built-in model: standard-heat, maxwell-cattaneo, standard-heat-dff, symmetry.
    #[arg(
        required_unless_present = "scheme_file",
        conflicts_with = "scheme_file"
    )]
    model: Option<ModelId>,
    /// Read the scheme from a `.scheme` file instead of a built-in model.
    #[arg(long, value_name = "PATH")]
    scheme_file: Option<PathBuf>,
    /// Thermal diffusivity D (rational or decimal).
    #[arg(long = "D", value_name = "D", default_value = "1", value_parser = parse_rational)]
    diffusivity: BigRational,
    /// Relaxation time tau; defaults to 1 for models that use it.
    #[arg(long, value_parser = parse_rational)]
    tau: Option<BigRational>,
    /// Free parameter p in (0, 1/2].
    #[arg(long, value_parser = parse_rational)]
    p: Option<BigRational>,
}

#[derive(Args, Debug)]
struct DeriveArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Emit the report as JSON.
    #[arg(long)]
    json: bool,
    /// Show each eliminated coefficient and solved binding.
    #[arg(long)]
    trace: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum WalkBoundary {
    Periodic,
    Dirichlet,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, default_value_t = 201)]
    sites: usize,
    #[arg(long, default_value_t = 100)]
    steps: u64,
    /// Space step, for models whose reduction links dt to dx (default: 0.1).
    #[arg(long)]
    dx: Option<f64>,
    /// Write a snapshot every this many steps (default: initial and final only).
    #[arg(long)]
    every: Option<u64>,
    #[arg(long, value_enum, default_value = "periodic")]
    boundary: WalkBoundary,
    /// Exact rational arithmetic (also enabled by MICROLIM_RATIONAL=1).
    #[arg(long)]
    exact: bool,
    /// Output CSV path (default: stdout); run metadata goes to PATH.meta.json.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ConvergeArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Refinement levels (at least 2).
    #[arg(long, default_value_t = 4)]
    levels: usize,
    /// Output CSV path (default: stdout); run metadata goes to PATH.meta.json.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ChainEnds {
    Periodic,
    Fixed,
}

#[derive(Args, Debug)]
struct ChainArgs {
    /// Wave speed.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 0.1)]
    dx: f64,
    /// Number of sites.
    #[arg(long = "N", default_value_t = 256)]
    sites: usize,
    /// Particle mass.
    #[arg(long = "M", default_value_t = 1.0)]
    mass: f64,
    /// Normal modes to measure (repeatable).
    #[arg(long = "mode", default_values_t = [1usize])]
    modes: Vec<usize>,
    #[arg(long, value_enum, default_value = "periodic")]
    boundary: ChainEnds,
    /// Time step (default: 0.1 dx/c).
    #[arg(long)]
    dt: Option<f64>,
    /// Periods of each mode to integrate over.
    #[arg(long, default_value_t = 4.0)]
    periods: f64,
    /// Also write the trajectory of the first mode (`step,time,site,u,v`).
    #[arg(long, value_name = "PATH")]
    trajectory: Option<PathBuf>,
    /// Steps of trajectory to record.
    #[arg(long, default_value_t = 100)]
    steps: u64,
    /// Output CSV path (default: stdout); run metadata goes to PATH.meta.json.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn numeric(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_NUMERIC,
            message: message.into(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Failure {
        Failure::usage(format!("i/o error: {e}"))
    }
}

fn reduction_failure(e: &ReductionError) -> Failure {
    use ReductionError::*;
    match e {
        FreeParameterRequired | FreeParameterForbidden | FreeParameterOutOfRange(_) => Failure::usage(e.to_string()),
        UnsolvableConstraint { .. } | PositivityViolation { .. } | OddSpaceExponent { .. } => Failure {
            code: EXIT_REDUCTION,
            message: format!("{e}\nhint: the constraints cannot be met by this discretization; construct another one"),
        },
        _ => Failure {
            code: EXIT_REDUCTION,
            message: e.to_string(),
        },
    }
}

fn sim_failure(e: SimError) -> Failure {
    match e {
        SimError::Reduction(r) => reduction_failure(&r),
        SimError::NonConvergent { .. } | SimError::LatticeTooLarge(_) => {
            Failure::numeric(e.to_string())
        }
        other => Failure::usage(other.to_string()),
    }
}

/// A model or scheme file with validated parameters.
struct Resolved {
    label: String,
    model: Option<ModelId>,
    stencil: Stencil,
    params: ModelParams,
    p: Option<BigRational>,
}

impl Resolved {
    fn reduce(&self) -> ReductionReport {
        match self.model {
            Some(m) => models::derive(m, self.p.clone()),
            None => reduce(&self.stencil, self.p.clone()),
        }
    }

    fn form(&self) -> Result<RandomWalkForm, Failure> {
        self.reduce().into_form().map_err(|e| reduction_failure(&e))
    }
}

fn stencil_uses_tau(st: &Stencil) -> bool {
    st.entries().any(|(_, c)| c.contains(SymbolId::RelaxTime))
}

fn resolve(src: &SourceArgs) -> Result<Resolved, Failure> {
    if let Some(p) = &src.p {
        if !p.is_positive() || *p > rat(1, 2) {
            return Err(Failure::usage(format!("p must lie in (0, 1/2], got {p}")));
        }
    }
    let (label, model, stencil, uses_tau) = match (&src.model, &src.scheme_file) {
        (Some(m), _) => (
            m.name().to_string(),
            Some(*m),
            models::stencil_for(*m),
            m.uses_tau(),
        ),
        (None, Some(path)) => {
            let bytes =
                fs::read(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            let file = crate::dsl::parse_scheme_bytes(&bytes)
                .map_err(|d| Failure::usage(format!("{}:{d}", path.display())))?;
            let st = assemble(file.scheme());
            let uses = stencil_uses_tau(&st);
            (path.display().to_string(), None, st, uses)
        }
        (None, None) => return Err(Failure::usage("a model or --scheme-file is required")),
    };
    let tau = match (&src.tau, uses_tau) {
        (None, true) => Some(BigRational::one()),
        (t, _) => t.clone(),
    };
    let params = ModelParams::new(src.diffusivity.clone(), tau);
    match model {
        Some(m) => params
            .validate(m)
            .map_err(|e| Failure::usage(e.to_string()))?,
        None => {
            if !params.diffusivity.is_positive()
                || params.tau.as_ref().is_some_and(|t| !t.is_positive())
            {
                return Err(Failure::usage("D and tau must be positive"));
            }
        }
    }
    Ok(Resolved {
        label,
        model,
        stencil,
        params,
        p: src.p.clone(),
    })
}

/// Substitutes the numeric `D` and `tau` into a binding.
fn evaluate(value: &LaurentPoly, params: &ModelParams) -> LaurentPoly {
    let mut b = Bindings::new();
    b.insert(
        Var::Symbol(SymbolId::Diffusivity),
        LaurentPoly::constant(params.diffusivity.clone()),
    );
    if let Some(t) = &params.tau {
        b.insert(
            Var::Symbol(SymbolId::RelaxTime),
            LaurentPoly::constant(t.clone()),
        );
    }
    value.substitute(&b).unwrap_or_else(|_| value.clone())
}

fn cmd_derive(args: &DeriveArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let r = resolve(&args.source)?;
    let report = r.reduce();
    let values: Vec<(String, String)> = match &report.outcome {
        Ok(form) => form
            .constraints
            .iter()
            .map(|b| {
                (
                    b.unknown.to_string(),
                    evaluate(&b.value, &r.params).to_string(),
                )
            })
            .collect(),
        Err(_) => Vec::new(),
    };
    if args.json {
        let mut doc = report.to_json(&r.label);
        doc["params"] = json!({
            "D": r.params.diffusivity.to_string(),
            "tau": r.params.tau.as_ref().map(|t| t.to_string()),
        });
        if let Ok(form) = &report.outcome {
            doc["values"] = form
                .constraints
                .iter()
                .map(|b| {
                    let key = serde_json::to_value(b.unknown).expect("json");
                    let key = key.as_str().unwrap_or_default().to_string();
                    (
                        key,
                        Value::String(evaluate(&b.value, &r.params).to_string()),
                    )
                })
                .collect();
        }
        if args.trace {
            doc["trace"] = Value::String(report.trace());
        }
        writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json"))?;
    } else {
        writeln!(out, "model: {}", r.label)?;
        if args.trace {
            write!(out, "{}", report.trace())?;
        } else if let Ok(form) = &report.outcome {
            for b in &form.constraints {
                writeln!(out, "binding: {b}")?;
            }
            if let Some(n) = &report.normalizer {
                writeln!(out, "normalizer: {n}")?;
            }
        }
        if let Ok(form) = &report.outcome {
            writeln!(
                out,
                "weights: p_plus = {}, p_zero = {}, p_minus = {}",
                form.p_plus, form.p_zero, form.p_minus
            )?;
            let tau = r
                .params
                .tau
                .as_ref()
                .map(|t| format!(", tau = {t}"))
                .unwrap_or_default();
            for (k, v) in &values {
                writeln!(out, "at D = {}{tau}: {k} = {v}", r.params.diffusivity)?;
            }
            if let Some(l2) = &form.length_scale_sq {
                writeln!(
                    out,
                    "length scale: L^2 = {l2} = {}",
                    evaluate(l2, &r.params)
                )?;
            }
        }
    }
    match &report.outcome {
        Ok(_) => Ok(()),
        Err(e) => Err(reduction_failure(e)),
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn write_sidecar(
    path: Option<&Path>,
    command: &str,
    meta: Value,
    started: Instant,
) -> Result<(), Failure> {
    let Some(path) = path else { return Ok(()) };
    let mut name = path.as_os_str().to_owned();
    name.push(".meta.json");
    let unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let doc = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "output": path.display().to_string(),
        "finished_unix": unix,
        "elapsed_seconds": started.elapsed().as_secs_f64(),
        "run": meta,
    });
    fs::write(
        PathBuf::from(name),
        serde_json::to_string_pretty(&doc).expect("json") + "\n",
    )?;
    Ok(())
}

fn simulate_in<T: Sample>(
    args: &SimulateArgs,
    weights: Weights<T>,
    sizes: StepSizes,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let n = args.sites;
    let centre = n / 2;
    let boundary = match args.boundary {
        WalkBoundary::Periodic => Boundary::Periodic,
        WalkBoundary::Dirichlet => Boundary::Dirichlet {
            left: T::zero(),
            right: T::zero(),
        },
    };
    let field = GridField::delta(n, centre, T::one(), sizes.dx, boundary)
        .map_err(sim_failure)?
        .with_origin(-(centre as f64) * sizes.dx);
    let mut run = WalkRun::new(weights, field, sizes.dt).map_err(sim_failure)?;
    let every = args.every.unwrap_or(args.steps.max(1)).max(1);
    let mut w = csv::Writer::from_writer(out);
    run.write_rows(&mut w).map_err(sim_failure)?;
    while run.steps_taken() < args.steps {
        let chunk = every.min(args.steps - run.steps_taken());
        run.run(chunk);
        if run.field().values().iter().any(|v| *v < T::zero()) {
            return Err(Failure::numeric(format!(
                "negative value after step {}",
                run.steps_taken()
            )));
        }
        run.write_rows(&mut w).map_err(sim_failure)?;
    }
    w.flush()?;
    Ok(())
}

fn exact_mode(flag: bool) -> bool {
    flag || std::env::var(RATIONAL_ENV).is_ok_and(|v| v == "1")
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), Failure> {
    let started = Instant::now();
    let r = resolve(&args.source)?;
    let form = r.form()?;
    let dx = match form.binding(Unknown::SpaceStepSquared) {
        Some(_) => args.dx,
        None => Some(args.dx.unwrap_or(0.1)),
    };
    let sizes = simulate::step_sizes(&form, &r.params, dx).map_err(sim_failure)?;
    let exact = exact_mode(args.exact);
    let mut out = open_output(args.out.as_deref())?;
    if exact {
        simulate_in(
            args,
            Weights::<BigRational>::from_form(&form).map_err(sim_failure)?,
            sizes,
            &mut out,
        )?;
    } else {
        simulate_in(
            args,
            Weights::<f64>::from_form(&form).map_err(sim_failure)?,
            sizes,
            &mut out,
        )?;
    }
    out.flush()?;
    let meta = json!({
        "model": r.label,
        "D": r.params.diffusivity.to_string(),
        "tau": r.params.tau.as_ref().map(|t| t.to_string()),
        "weights": form.weights().iter().map(|w| w.to_string()).collect::<Vec<_>>(),
        "dx": sizes.dx,
        "dt": sizes.dt,
        "sites": args.sites,
        "steps": args.steps,
        "arithmetic": if exact { "rational" } else { "f64" },
    });
    write_sidecar(args.out.as_deref(), "simulate", meta, started)
}

fn cmd_converge(args: &ConvergeArgs) -> Result<(), Failure> {
    let started = Instant::now();
    let r = resolve(&args.source)?;
    let form = r.form()?;
    let (table, failure) =
        match simulate::convergence_study_form(&r.label, &form, &r.params, args.levels) {
            Ok(t) => (t, None),
            Err(SimError::NonConvergent {
                table,
                level,
                previous,
                current,
            }) => {
                let msg = format!(
                    "L1 error did not decrease at level {level}: {previous:.3e} -> {current:.3e}"
                );
                (*table, Some(Failure::numeric(msg)))
            }
            Err(e) => return Err(sim_failure(e)),
        };
    let mut out = open_output(args.out.as_deref())?;
    table.write_csv(&mut out).map_err(sim_failure)?;
    out.flush()?;
    let meta = serde_json::to_value(&table).expect("json");
    write_sidecar(args.out.as_deref(), "converge", meta, started)?;
    failure.map_or(Ok(()), Err)
}

fn osc_failure(e: oscillator::OscillatorError) -> Failure {
    match e {
        oscillator::OscillatorError::UnstableStep { .. }
        | oscillator::OscillatorError::NoOscillation => Failure::numeric(e.to_string()),
        other => Failure::usage(other.to_string()),
    }
}

fn cmd_chain(args: &ChainArgs) -> Result<(), Failure> {
    let started = Instant::now();
    let boundary = match args.boundary {
        ChainEnds::Periodic => ChainBoundary::Periodic,
        ChainEnds::Fixed => ChainBoundary::FixedEnds,
    };
    let params =
        ChainParams::new(args.c, args.dx, args.mass, args.sites, boundary).map_err(osc_failure)?;
    let dt = args.dt.unwrap_or(0.1 * params.step_limit());
    let rows: Vec<DispersionRow> = args
        .modes
        .iter()
        .map(|q| oscillator::measure_dispersion(&params, *q, dt, args.periods))
        .collect::<Result<_, _>>()
        .map_err(osc_failure)?;
    let mut out = open_output(args.out.as_deref())?;
    oscillator::write_dispersion_csv(&rows, &mut out).map_err(osc_failure)?;
    out.flush()?;
    if let Some(path) = &args.trajectory {
        let q = args.modes[0];
        let mut state = ChainState::at_rest(params.mode_shape(q).map_err(osc_failure)?);
        let file =
            File::create(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        let mut w = csv::Writer::from_writer(BufWriter::new(file));
        state.write_rows(0, &mut w).map_err(osc_failure)?;
        let mut result = Ok(());
        oscillator::integrate_with(&mut state, &params, dt, args.steps, |step, st| {
            if result.is_ok() {
                result = st.write_rows(step, &mut w);
            }
        })
        .map_err(osc_failure)?;
        result.map_err(osc_failure)?;
        w.flush()?;
    }
    let meta = json!({
        "params": params,
        "dt": dt,
        "periods": args.periods,
        "modes": rows,
    });
    write_sidecar(args.out.as_deref(), "chain", meta, started)
}

fn cmd_list_models(json_out: bool, out: &mut dyn Write) -> Result<(), Failure> {
    let entries: Vec<Value> = ModelId::ALL
        .iter()
        .map(|m| {
            let f = models::expected_reduction(*m);
            json!({
                "id": m.name(),
                "pde": m.pde(),
                "templates": m.template_names(),
                "weights": { "plus": f.p_plus.to_string(), "zero": f.p_zero.to_string(), "minus": f.p_minus.to_string() },
                "bindings": f.constraints,
            })
        })
        .collect();
    if json_out {
        writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&entries).expect("json")
        )?;
        return Ok(());
    }
    for m in ModelId::ALL {
        let f = models::expected_reduction(m);
        writeln!(out, "{}", m.name())?;
        writeln!(out, "  pde:       {}", m.pde())?;
        writeln!(out, "  templates: {}", m.template_names().join(", "))?;
        writeln!(
            out,
            "  weights:   ({}, {}, {})",
            f.p_plus, f.p_zero, f.p_minus
        )?;
        for b in &f.constraints {
            writeln!(out, "  binding:   {b}")?;
        }
    }
    Ok(())
}

fn cmd_check(json_out: bool, out: &mut dyn Write) -> Result<(), Failure> {
    let outcomes = run_checks();
    if json_out {
        writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&outcomes).expect("json")
        )?;
    } else {
        for o in &outcomes {
            let status = if o.passed { "PASS" } else { "FAIL" };
            writeln!(out, "[{status}] {}. {}: {}", o.criterion, o.name, o.detail)?;
        }
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::numeric(format!("{failed} check(s) failed")))
    }
}

/// Parses `args` (including the program name), runs the command, and
/// returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Derive(a) => cmd_derive(a, out),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Converge(a) => cmd_converge(a),
        Command::Chain(a) => cmd_chain(a),
        Command::ListModels { json } => cmd_list_models(*json, out),
        Command::Check { json } => cmd_check(*json, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

/// Entry point for the `microlim` binary.
pub fn main() -> i32 {
    let mut out = io::stdout();
    let mut err = io::stderr();
    run(std::env::args_os(), &mut out, &mut err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("microlim").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn derive_maxwell_cattaneo_json() {
        let (code, out, _) = run_str(&[
            "derive",
            "maxwell-cattaneo",
            "--D",
            "1",
            "--tau",
            "1",
            "--json",
        ]);
        assert_eq!(code, 0);
        let doc: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(
            doc["weights"],
            json!({"plus": "1/2", "zero": "0", "minus": "1/2"})
        );
        assert_eq!(doc["values"], json!({"dx2": "4", "dt": "2"}));
        assert_eq!(doc["normalizer"], json!("2"));
    }

    #[test]
    fn derive_rejects_p_outside_band() {
        let (code, _, err) = run_str(&["derive", "standard-heat", "--p", "0.6"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("p must lie in (0, 1/2]"), "{err}");
    }

    #[test]
    fn derive_symmetry_text() {
        let (code, out, _) = run_str(&["derive", "symmetry", "--D", "1", "--tau", "1"]);
        assert_eq!(code, 0);
        assert!(
            out.contains("p_plus = 1/3, p_zero = 1/3, p_minus = 1/3"),
            "{out}"
        );
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run_str(&["derive"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["derive", "no-such-model"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(
            run_str(&["derive", "standard-heat", "--tau", "1", "--p", "1/2"]).0,
            EXIT_USAGE
        );
        assert_eq!(run_str(&["derive", "standard-heat"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn unsolvable_scheme_exits_two() {
        let dir = std::env::temp_dir().join(format!("microlim-cli-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.scheme");
        fs::write(
            &path,
            "template lag for ut { (0,0): 1; (-1,0): -1; }\nscheme { forward_euler_t + lag = 0 }\n",
        )
        .unwrap();
        let (code, _, err) = run_str(&["derive", "--scheme-file", path.to_str().unwrap()]);
        assert_eq!(code, EXIT_REDUCTION, "{err}");
        assert!(err.contains("another"), "{err}");
        fs::write(&path, "scheme { forward_euler_t - D * central_xx = 0 ").unwrap();
        let (code, _, err) = run_str(&["derive", "--scheme-file", path.to_str().unwrap()]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains(":1:"), "{err}");
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn list_models_names_all() {
        let (code, out, _) = run_str(&["list-models"]);
        assert_eq!(code, 0);
        for m in ModelId::ALL {
            assert!(out.contains(m.name()));
        }
    }
}
