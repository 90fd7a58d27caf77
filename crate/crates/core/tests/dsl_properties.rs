use std::collections::BTreeMap;

use microlim::dsl::{parse_scheme, parse_scheme_bytes, render_scheme, DiagnosticKind, SchemeFile};
use microlim::laurent::{LaurentPoly, Monomial, SymbolId};
use microlim::models::{self, ModelId};
use microlim::rational::rat;
use microlim::stencil::{
    assemble, builtin_template, DerivativeKind, DerivativeTemplate, GridOffset, SchemeSpec,
    SchemeTerm, Stencil, BUILTIN_TEMPLATES,
};
use proptest::prelude::*;

const KINDS: [DerivativeKind; 4] = [
    DerivativeKind::Ut,
    DerivativeKind::Utt,
    DerivativeKind::Uxx,
    DerivativeKind::Utxx,
];

type RawPoly = Vec<([i32; 4], i64, i64)>;

fn raw_poly() -> impl Strategy<Value = RawPoly> {
    prop::collection::vec(
        (prop::array::uniform4(-2i32..=2), -9i64..=9, 1i64..=5),
        1..4,
    )
}

/// Builds a polynomial using only `allowed` symbols.
fn build(raw: &RawPoly, allowed: &[SymbolId]) -> LaurentPoly {
    LaurentPoly::from_terms(raw.iter().map(|(e, n, d)| {
        let m = SymbolId::ALL
            .iter()
            .zip(e)
            .fold(Monomial::ONE, |m, (s, x)| {
                if allowed.contains(s) {
                    m.with_exponent(*s, *x)
                } else {
                    m
                }
            });
        (m, rat(*n, *d))
    }))
}

#[derive(Debug, Clone)]
struct RawTemplate {
    kind: usize,
    entries: Vec<((i32, i32), RawPoly)>,
}

fn raw_template() -> impl Strategy<Value = RawTemplate> {
    (
        0..4usize,
        prop::collection::vec(((-2i32..=2, -2i32..=2), raw_poly()), 1..4),
    )
        .prop_map(|(kind, entries)| RawTemplate { kind, entries })
}

fn scheme_file() -> impl Strategy<Value = SchemeFile> {
    (
        0..4usize,
        prop::collection::vec(raw_template(), 0..3),
        prop::collection::vec((0..20usize, raw_poly()), 1..5),
    )
        .prop_filter_map("invalid file", |(params, templates, terms)| {
            let declared = match params {
                0 => None,
                1 => Some(vec![SymbolId::Diffusivity]),
                2 => Some(vec![SymbolId::RelaxTime]),
                _ => Some(vec![SymbolId::Diffusivity, SymbolId::RelaxTime]),
            };
            let mut allowed = declared
                .clone()
                .unwrap_or(vec![SymbolId::Diffusivity, SymbolId::RelaxTime]);
            allowed.extend([SymbolId::TimeStep, SymbolId::SpaceStep]);
            let mut local = Vec::new();
            for (i, t) in templates.iter().enumerate() {
                let mut map: BTreeMap<GridOffset, LaurentPoly> = BTreeMap::new();
                for ((dt, dx), raw) in &t.entries {
                    map.insert(GridOffset::new(*dt, *dx), build(raw, &allowed));
                }
                let mut st = Stencil::from_entries(map);
                let sum = st.coefficient_sum();
                st.add_at(GridOffset::new(3, 3), -sum);
                local.push(DerivativeTemplate::new(format!("tpl{i}"), KINDS[t.kind], st).ok()?);
            }
            let scheme_terms: Vec<SchemeTerm> = terms
                .iter()
                .map(|(pick, raw)| {
                    let template = if *pick < local.len() * 3 {
                        local[pick % local.len()].clone()
                    } else {
                        builtin_template(BUILTIN_TEMPLATES[pick % BUILTIN_TEMPLATES.len()]).unwrap()
                    };
                    SchemeTerm {
                        coefficient: build(raw, &allowed),
                        template,
                    }
                })
                .filter(|t| !t.coefficient.is_zero())
                .collect();
            let scheme = SchemeSpec::new(scheme_terms).ok()?;
            SchemeFile::new(declared, local, scheme).ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn render_then_parse_is_identity(file in scheme_file()) {
        let text = render_scheme(&file);
        let back = parse_scheme(&text);
        prop_assert_eq!(back.as_ref(), Ok(&file), "text:\n{}", text);
        prop_assert_eq!(render_scheme(&back.unwrap()), text);
    }

    #[test]
    fn arbitrary_bytes_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..256)) {
        if let Err(d) = parse_scheme_bytes(&bytes) {
            prop_assert!(d.line >= 1 && d.col >= 1);
        }
    }

    #[test]
    fn mutated_files_give_positioned_errors(file in scheme_file(), cut in 0usize..10_000, len in 1usize..8) {
        let text = render_scheme(&file);
        let chars: Vec<char> = text.chars().collect();
        let at = cut % chars.len();
        let mutated: String = chars[..at].iter().chain(chars[(at + len).min(chars.len())..].iter()).collect();
        if let Err(d) = parse_scheme(&mutated) {
            let lines = mutated.lines().count().max(1);
            prop_assert!(d.line >= 1 && d.line <= lines + 1, "{d} for\n{mutated}");
        }
    }

    #[test]
    fn token_soup_never_panics(tokens in prop::collection::vec(
        prop::sample::select(vec![
            "template", "scheme", "params", "for", "ut", "uxx", "{", "}", "(", ")", ",", ";", ":", "=", "0",
            "1", "2/3", "-", "+", "*", "/", "^", "D", "tau", "dt", "dx", "foo", "#c\n", "\n", "1.5", "x",
        ]),
        0..40,
    )) {
        let text = tokens.join(" ");
        let _ = parse_scheme(&text);
    }
}

#[test]
fn scheme_files_assemble_to_builtin_stencils() {
    for m in ModelId::ALL {
        let file = parse_scheme(models::scheme_text(m)).unwrap_or_else(|d| panic!("{m}: {d}"));
        assert_eq!(assemble(file.scheme()), models::stencil_for(m), "{m}");
    }
}

#[test]
fn builtin_schemes_round_trip() {
    for m in ModelId::ALL {
        let file = SchemeFile::from_scheme(models::scheme_for(m)).unwrap();
        assert_eq!(parse_scheme(&render_scheme(&file)), Ok(file), "{m}");
    }
}

#[test]
fn nonstandard_template_in_text() {
    let text = "template avg for ut {\n  (1, 1): 1/(3*dt);\n  (1, 0): 1/(3*dt);\n  (1, -1): 1/(3*dt);\n  (0, 0): -1/dt;\n}\nscheme { avg - D*central_xx = 0 }";
    let file = parse_scheme(text).unwrap();
    assert_eq!(
        file.templates()[0].entries(),
        builtin_template("nonstandard_t").unwrap().entries()
    );
}

#[test]
fn diagnostics_from_the_spec() {
    let d = parse_scheme("").unwrap_err();
    assert_eq!((d.line, d.col), (1, 1));
    assert!(matches!(d.kind, DiagnosticKind::SyntaxError { .. }));
    let text = "template a for ut { (1,0): (1/2)*dx^(3/2); (0,0): -1; }\nscheme { a = 0 }";
    assert_eq!(
        parse_scheme(text).unwrap_err().kind,
        DiagnosticKind::NonIntegerExponent
    );
    let d = parse_scheme("scheme {\n  forward_euler_t - D * nowhere = 0\n}").unwrap_err();
    assert_eq!(d.kind, DiagnosticKind::UnresolvedTemplate("nowhere".into()));
    assert_eq!(d.line, 2);
    let d = parse_scheme("scheme { forward_euler_t - K * central_xx = 0 }").unwrap_err();
    assert_eq!(d.kind, DiagnosticKind::UnknownSymbol("K".into()));
    let d = parse_scheme("scheme { forward_euler_t - 0.5 * central_xx = 0 }").unwrap_err();
    assert_eq!(d.kind, DiagnosticKind::FloatLiteral);
    assert_eq!(
        parse_scheme_bytes(&[0xff, 0xfe]).unwrap_err().kind,
        DiagnosticKind::InvalidUtf8
    );
}
