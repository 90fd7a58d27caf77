//! Self-check suite: the published derivations, the exact-arithmetic walk
//! invariants, and the `.scheme` encodings of the built-in models.

use std::time::Instant;

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dsl::{parse_scheme, render_scheme, SchemeFile};
use crate::laurent::{LaurentPoly, Monomial, SymbolId};
use crate::models::{self, ModelId};
use crate::rational::rat;
use crate::reduction::{derived_scales, verify_report, Unknown};
use crate::simulate::{Boundary, GridField, WalkRun, Weights};
use crate::stencil::{
    assemble, builtin_template, DerivativeKind, DerivativeTemplate, GridOffset, SchemeSpec,
    SchemeTerm, Stencil, BUILTIN_TEMPLATES,
};

/// Outcome of one check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckOutcome {
    pub criterion: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type CheckResult = Result<String, String>;
type Check = (u8, &'static str, fn() -> CheckResult);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn poly(s: &str) -> LaurentPoly {
    s.parse().expect("fixture polynomial")
}

pub fn golden_derivations() -> CheckResult {
    let start = Instant::now();
    for model in ModelId::ALL {
        let report = models::derive(model, models::golden_parameter(model));
        let form = report.form().map_err(|e| format!("{model}: {e}"))?;
        ensure(*form == models::expected_reduction(model), || {
            format!("{model}: reduction differs from the published result")
        })?;
        ensure(verify_report(&report), || {
            format!("{model}: report does not replay")
        })?;
    }
    let mc = models::derive(ModelId::MaxwellCattaneo, None);
    ensure(mc.normalizer == Some(LaurentPoly::integer(2)), || {
        format!(
            "Maxwell-Cattaneo normalizer is {:?}",
            mc.normalizer.as_ref().map(|n| n.to_string())
        )
    })?;
    let quarter = models::derive(ModelId::StandardHeat, Some(rat(1, 4)));
    let form = quarter
        .form()
        .map_err(|e| format!("standard-heat at p = 1/4: {e}"))?;
    ensure(form.weights() == [rat(1, 4), rat(1, 2), rat(1, 4)], || {
        "standard-heat at p = 1/4: weights differ from (1/4, 1/2, 1/4)".into()
    })?;
    let dt = form
        .binding(Unknown::TimeStep)
        .ok_or("standard-heat at p = 1/4: dt unbound")?;
    ensure(dt * &poly("D*dx^-2") == LaurentPoly::ratio(1, 4), || {
        format!(
            "standard-heat at p = 1/4: dt*D/dx^2 = {}",
            dt * &poly("D*dx^-2")
        )
    })?;
    let elapsed = start.elapsed().as_secs_f64();
    ensure(elapsed < 1.0, || format!("took {elapsed:.3} s"))?;
    Ok(format!("4 models match exactly in {:.1} ms", elapsed * 1e3))
}

/// The symmetry scheme times `3 dt`, as the five collected coefficients.
pub fn symmetry_collected_form() -> CheckResult {
    let scaled = models::stencil_for(ModelId::Symmetry).scaled(&poly("3*dt"));
    let expected = [
        ((1, 1), "1 - 3*tau*D*dx^-2"),
        ((1, -1), "1 - 3*tau*D*dx^-2"),
        ((1, 0), "1 + 6*tau*D*dx^-2"),
        ((0, 1), "-3*dt*D*dx^-2 + 3*tau*D*dx^-2"),
        ((0, -1), "-3*dt*D*dx^-2 + 3*tau*D*dx^-2"),
        ((0, 0), "-3 + 6*dt*D*dx^-2 - 6*tau*D*dx^-2"),
    ];
    let expected = Stencil::from_entries(
        expected
            .iter()
            .map(|((t, x), c)| (GridOffset::new(*t, *x), poly(c))),
    );
    ensure(scaled == expected, || {
        format!("collected form differs:\n{scaled}")
    })?;
    Ok("five coefficient groups match".into())
}

pub fn scale_identities() -> CheckResult {
    let form = models::expected_reduction(ModelId::MaxwellCattaneo);
    let scales = derived_scales(&form).map_err(|e| e.to_string())?;
    ensure(scales.diffusivity_check == poly("D"), || {
        format!("dx^2/(2 dt) = {}", scales.diffusivity_check)
    })?;
    ensure(scales.length_scale_sq == Some(poly("D*tau")), || {
        "L^2 differs from tau*D".into()
    })?;
    let sym = derived_scales(&models::expected_reduction(ModelId::Symmetry))
        .map_err(|e| e.to_string())?;
    ensure(sym.dx_sq_binding == poly("3*tau*D"), || {
        format!("symmetry dx^2 = {}", sym.dx_sq_binding)
    })?;
    Ok("dx^2/(2 dt) = D, L^2 = tau*D".into())
}

fn random_rational<R: Rng>(rng: &mut R, max_numer: i64) -> BigRational {
    rat(rng.gen_range(0..=max_numer), rng.gen_range(1..=12))
}

fn random_field<R: Rng>(rng: &mut R, len: usize) -> GridField<BigRational> {
    let values = (0..len).map(|_| random_rational(rng, 20)).collect();
    GridField::new(values, 1.0, Boundary::Periodic).expect("nonnegative field")
}

/// `p` in `(0, 1/2]`.
pub fn random_p<R: Rng>(rng: &mut R) -> BigRational {
    let denom = rng.gen_range(2..=40i64);
    rat(rng.gen_range(1..=denom / 2), denom)
}

pub fn positivity(cases: usize, seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zero = BigRational::zero();
    for case in 0..cases {
        let p = random_p(&mut rng);
        let w = Weights::symmetric(p.clone()).map_err(|e| e.to_string())?;
        let len = rng.gen_range(3..=24);
        let field = random_field(&mut rng, len);
        let out = field.step(&w);
        ensure(out.values().iter().all(|v| *v >= zero), || {
            format!("case {case}: negative value at p = {p}")
        })?;
    }
    Ok(format!("{cases} randomized cases nonnegative"))
}

pub fn conservation(steps: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let forms = [rat(1, 2), rat(1, 3), rat(1, 4), rat(2, 7)];
    for p in forms {
        let w = Weights::symmetric(p.clone()).map_err(|e| e.to_string())?;
        let mut run =
            WalkRun::new(w, random_field(&mut rng, 16), 1.0).map_err(|e| e.to_string())?;
        run.run(steps);
        let trace = run.mass_trace();
        ensure(
            trace.len() as u64 == steps + 1 && trace.iter().all(|m| *m == trace[0]),
            || format!("mass changed at p = {p}"),
        )?;
    }
    Ok(format!("mass exactly invariant over {steps} steps"))
}

/// The `n`-step response of a unit delta under `p = 1/2`: `C(n, j) / 2^n`
/// at offset `2j - n`, zero elsewhere.
pub fn binomial_response(steps: u32) -> CheckResult {
    let n = steps as usize;
    let sites = 2 * n + 3;
    let centre = n + 1;
    let w = Weights::symmetric(rat(1, 2)).map_err(|e| e.to_string())?;
    let field = GridField::delta(sites, centre, BigRational::one(), 1.0, Boundary::Periodic)
        .map_err(|e| e.to_string())?;
    let mut run = WalkRun::new(w, field, 1.0).map_err(|e| e.to_string())?;
    run.run(steps as u64);
    let scale = BigRational::from_integer(BigInt::from(2).pow(steps));
    for (site, v) in run.field().values().iter().enumerate() {
        let offset = site as i64 - centre as i64;
        let expected = if offset.abs() <= n as i64 && (offset + n as i64) % 2 == 0 {
            let j = ((offset + n as i64) / 2) as u64;
            BigRational::from_integer(binomial(BigInt::from(steps), BigInt::from(j))) / &scale
        } else {
            BigRational::zero()
        };
        ensure(*v == expected, || {
            format!("site offset {offset}: {v} != {expected}")
        })?;
    }
    Ok(format!(
        "{steps}-step response equals C({steps}, j)/2^{steps}"
    ))
}

fn random_poly<R: Rng>(rng: &mut R, symbols: &[SymbolId]) -> LaurentPoly {
    loop {
        let mut p = LaurentPoly::zero();
        for _ in 0..rng.gen_range(1..=3) {
            let mut m = Monomial::ONE;
            for s in symbols {
                if rng.gen_bool(0.4) {
                    m = m.with_exponent(*s, rng.gen_range(-3..=3));
                }
            }
            let mut c = rat(rng.gen_range(1..=9), rng.gen_range(1..=6));
            if rng.gen_bool(0.5) {
                c = -c;
            }
            p = &p + &LaurentPoly::term(c, m);
        }
        if !p.is_zero() {
            return p;
        }
    }
}

fn random_template<R: Rng>(
    rng: &mut R,
    name: String,
    symbols: &[SymbolId],
    kind: DerivativeKind,
) -> DerivativeTemplate {
    let mut offsets: Vec<GridOffset> = (-2..=2)
        .flat_map(|t| (-2..=2).map(move |x| GridOffset::new(t, x)))
        .collect();
    offsets.shuffle(rng);
    let count = rng.gen_range(1..=4);
    let mut st = Stencil::new();
    for o in &offsets[..count] {
        st.add_at(*o, random_poly(rng, symbols));
    }
    let sum = st.coefficient_sum();
    st.add_at(offsets[count], -sum);
    if st.is_empty() {
        st.add_at(offsets[0], LaurentPoly::one());
        st.add_at(offsets[1], -LaurentPoly::one());
    }
    DerivativeTemplate::new(name, kind, st).expect("entries sum to zero")
}

/// A random valid scheme file. Coefficients use only the declared
/// parameters (or both when none are declared) plus `dt` and `dx`.
pub fn random_scheme_file<R: Rng>(rng: &mut R) -> SchemeFile {
    let declared = match rng.gen_range(0..4) {
        0 => None,
        1 => Some(vec![SymbolId::Diffusivity]),
        2 => Some(vec![SymbolId::RelaxTime]),
        _ => Some(vec![SymbolId::RelaxTime, SymbolId::Diffusivity]),
    };
    let mut symbols = declared
        .clone()
        .unwrap_or_else(|| vec![SymbolId::Diffusivity, SymbolId::RelaxTime]);
    symbols.extend([SymbolId::TimeStep, SymbolId::SpaceStep]);
    let kinds = [
        DerivativeKind::Ut,
        DerivativeKind::Utt,
        DerivativeKind::Uxx,
        DerivativeKind::Utxx,
    ];
    let templates: Vec<DerivativeTemplate> = (0..rng.gen_range(0..=3))
        .map(|i| {
            let kind = *kinds.choose(rng).expect("nonempty");
            random_template(rng, format!("t{i}_{}", kind.tag()), &symbols, kind)
        })
        .collect();
    let mut terms = Vec::new();
    for _ in 0..rng.gen_range(1..=4) {
        let template = if !templates.is_empty() && rng.gen_bool(0.6) {
            templates.choose(rng).expect("nonempty").clone()
        } else {
            builtin_template(BUILTIN_TEMPLATES.choose(rng).expect("nonempty")).expect("built-in")
        };
        terms.push(SchemeTerm {
            coefficient: random_poly(rng, &symbols),
            template,
        });
    }
    if !terms.iter().any(|t| t.template.target().involves_time()) {
        terms.push(SchemeTerm {
            coefficient: random_poly(rng, &symbols),
            template: builtin_template("forward_euler_t").expect("built-in"),
        });
    }
    let scheme = SchemeSpec::new(terms).expect("has a time derivative");
    SchemeFile::new(declared, templates, scheme).expect("generated file is valid")
}

pub fn dsl_equivalence(round_trips: usize, seed: u64) -> CheckResult {
    for model in ModelId::ALL {
        let file =
            parse_scheme(models::scheme_text(model)).map_err(|d| format!("{model}.scheme: {d}"))?;
        ensure(
            assemble(file.scheme()) == models::stencil_for(model),
            || format!("{model}.scheme assembles to a different stencil"),
        )?;
        let built_in =
            SchemeFile::from_scheme(models::scheme_for(model)).map_err(|e| e.to_string())?;
        ensure(
            parse_scheme(&render_scheme(&built_in)).as_ref() == Ok(&built_in),
            || format!("{model}: built-in scheme does not round-trip"),
        )?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..round_trips {
        let file = random_scheme_file(&mut rng);
        let text = render_scheme(&file);
        match parse_scheme(&text) {
            Ok(back) if back == file => {}
            Ok(_) => {
                return Err(format!(
                    "case {case} round-trips to a different file:\n{text}"
                ))
            }
            Err(d) => return Err(format!("case {case} fails to parse: {d}\n{text}")),
        }
    }
    Ok(format!(
        "4 scheme files match; {round_trips} generated files round-trip"
    ))
}

/// Runs every check; criterion numbers follow the project README.
pub fn run_checks() -> Vec<CheckOutcome> {
    let checks: [Check; 7] = [
        (1, "golden derivations", golden_derivations),
        (2, "symmetry scheme collected form", symmetry_collected_form),
        (3, "scale identities", scale_identities),
        (4, "positivity (exact)", || positivity(1000, 4)),
        (5, "mass conservation (exact)", || conservation(100)),
        (6, "binomial oracle (exact)", || binomial_response(10)),
        (9, "scheme files and round-trip", || dsl_equivalence(500, 9)),
    ];
    checks
        .iter()
        .map(|(criterion, name, f)| {
            let (passed, detail) = match f() {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            CheckOutcome {
                criterion: *criterion,
                name,
                passed,
                detail,
            }
        })
        .collect()
}
