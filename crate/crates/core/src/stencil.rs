//! Discretizations as coefficient maps over grid offsets.
//!
//! A [`DerivativeTemplate`] is the difference operator replacing one
//! derivative (its entries already carry the `1/dt`, `1/dx^2` factors). A
//! [`SchemeSpec`] is a linear combination of templates with the whole PDE
//! moved to one side, and [`assemble`] collects it into a single
//! [`Stencil`] that is implicitly equated to zero.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::One;
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::laurent::{Bindings, LaurentPoly, Monomial, SubstitutionError, SymbolId};

/// Offset `(k, m)` relative to the point `u_m^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GridOffset {
    /// Time offset in steps.
    pub time: i32,
    /// Space offset in steps.
    pub space: i32,
}

impl GridOffset {
    pub const fn new(time: i32, space: i32) -> GridOffset {
        GridOffset { time, space }
    }
}

impl fmt::Display for GridOffset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.time, self.space)
    }
}

/// The derivative a template stands in for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DerivativeKind {
    Ut,
    Utt,
    Uxx,
    Utxx,
}

impl DerivativeKind {
    pub fn tag(self) -> &'static str {
        match self {
            DerivativeKind::Ut => "ut",
            DerivativeKind::Utt => "utt",
            DerivativeKind::Uxx => "uxx",
            DerivativeKind::Utxx => "utxx",
        }
    }

    pub fn from_tag(tag: &str) -> Option<DerivativeKind> {
        [
            DerivativeKind::Ut,
            DerivativeKind::Utt,
            DerivativeKind::Uxx,
            DerivativeKind::Utxx,
        ]
        .into_iter()
        .find(|k| k.tag() == tag)
    }

    pub fn involves_time(self) -> bool {
        !matches!(self, DerivativeKind::Uxx)
    }
}

impl fmt::Display for DerivativeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StencilError {
    #[error("unknown template `{0}`")]
    UnknownTemplate(String),
    #[error("template `{name}` does not annihilate constants (entries sum to {sum})")]
    InconsistentTemplate { name: String, sum: LaurentPoly },
    #[error("template `{0}` has no entries")]
    EmptyTemplate(String),
    #[error("scheme has no terms")]
    EmptyScheme,
    #[error("scheme has no time-derivative term")]
    NoTimeDerivative,
}

/// Normalized map from offsets to nonzero coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stencil {
    entries: BTreeMap<GridOffset, LaurentPoly>,
}

impl Stencil {
    pub fn new() -> Stencil {
        Stencil::default()
    }

    pub fn from_entries<I>(entries: I) -> Stencil
    where
        I: IntoIterator<Item = (GridOffset, LaurentPoly)>,
    {
        let mut st = Stencil::new();
        for (o, c) in entries {
            st.add_at(o, c);
        }
        st
    }

    pub fn add_at(&mut self, offset: GridOffset, c: LaurentPoly) {
        let slot = self.entries.entry(offset).or_default();
        *slot += c;
        if slot.is_zero() {
            self.entries.remove(&offset);
        }
    }

    /// Coefficient at `offset` (zero when absent).
    pub fn get(&self, offset: GridOffset) -> LaurentPoly {
        self.entries.get(&offset).cloned().unwrap_or_default()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&GridOffset, &LaurentPoly)> {
        self.entries.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = GridOffset> + '_ {
        self.entries.keys().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Multiplies every entry by `factor`.
    pub fn scaled(&self, factor: &LaurentPoly) -> Stencil {
        Stencil::from_entries(self.entries.iter().map(|(o, c)| (*o, c * factor)))
    }

    pub fn substitute(&self, bindings: &Bindings) -> Result<Stencil, SubstitutionError> {
        let mut out = Stencil::new();
        for (o, c) in &self.entries {
            out.add_at(*o, c.substitute(bindings)?);
        }
        Ok(out)
    }

    /// Sum of all entries; zero for a stencil that annihilates constant fields.
    pub fn coefficient_sum(&self) -> LaurentPoly {
        self.entries
            .values()
            .fold(LaurentPoly::zero(), |acc, c| &acc + c)
    }
}

impl std::ops::Add<&Stencil> for &Stencil {
    type Output = Stencil;
    fn add(self, rhs: &Stencil) -> Stencil {
        let mut out = self.clone();
        for (o, c) in &rhs.entries {
            out.add_at(*o, c.clone());
        }
        out
    }
}

impl fmt::Display for Stencil {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (o, c) in &self.entries {
            writeln!(f, "{o}: {c}")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct StencilRecord {
    dt: i32,
    dx: i32,
    coeff: LaurentPoly,
}

impl Serialize for Stencil {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.entries.len()))?;
        for (o, c) in &self.entries {
            seq.serialize_element(&StencilRecord {
                dt: o.time,
                dx: o.space,
                coeff: c.clone(),
            })?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Stencil {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Stencil, D::Error> {
        let records = Vec::<StencilRecord>::deserialize(deserializer)?;
        Ok(Stencil::from_entries(
            records
                .into_iter()
                .map(|r| (GridOffset::new(r.dt, r.dx), r.coeff)),
        ))
    }
}

/// Difference operator replacing one derivative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivativeTemplate {
    name: String,
    target: DerivativeKind,
    entries: Stencil,
}

impl DerivativeTemplate {
    /// Checks that the entries annihilate constant fields.
    pub fn new(
        name: impl Into<String>,
        target: DerivativeKind,
        entries: Stencil,
    ) -> Result<DerivativeTemplate, StencilError> {
        let name = name.into();
        if entries.is_empty() {
            return Err(StencilError::EmptyTemplate(name));
        }
        let sum = entries.coefficient_sum();
        if !sum.is_zero() {
            return Err(StencilError::InconsistentTemplate { name, sum });
        }
        Ok(DerivativeTemplate {
            name,
            target,
            entries,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn target(&self) -> DerivativeKind {
        self.target
    }

    pub fn entries(&self) -> &Stencil {
        &self.entries
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemeTerm {
    pub coefficient: LaurentPoly,
    pub template: DerivativeTemplate,
}

/// `sum_i coefficient_i * template_i = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemeSpec {
    terms: Vec<SchemeTerm>,
}

impl SchemeSpec {
    pub fn new(terms: Vec<SchemeTerm>) -> Result<SchemeSpec, StencilError> {
        if terms.is_empty() {
            return Err(StencilError::EmptyScheme);
        }
        if !terms.iter().any(|t| t.template.target().involves_time()) {
            return Err(StencilError::NoTimeDerivative);
        }
        Ok(SchemeSpec { terms })
    }

    pub fn terms(&self) -> &[SchemeTerm] {
        &self.terms
    }
}

/// Collects `sum_i c_i * T_i` into one normalized stencil.
pub fn assemble(spec: &SchemeSpec) -> Stencil {
    let mut st = Stencil::new();
    for term in &spec.terms {
        for (o, c) in term.template.entries().entries() {
            st.add_at(*o, &term.coefficient * c);
        }
    }
    st
}

pub const BUILTIN_TEMPLATES: [&str; 8] = [
    "forward_euler_t",
    "backward_euler_t",
    "central_t",
    "central_second_t",
    "central_xx",
    "dufort_frankel_xx",
    "nonstandard_t",
    "forward_central_txx",
];

/// `c * dt^a * dx^b`
fn coeff(numer: i64, denom: i64, dt_exp: i32, dx_exp: i32) -> LaurentPoly {
    LaurentPoly::term(
        BigRational::new(numer.into(), denom.into()),
        Monomial::ONE
            .with_exponent(SymbolId::TimeStep, dt_exp)
            .with_exponent(SymbolId::SpaceStep, dx_exp),
    )
}

pub fn builtin_template(name: &str) -> Result<DerivativeTemplate, StencilError> {
    use DerivativeKind::*;
    let o = GridOffset::new;
    let (kind, entries) = match name {
        "forward_euler_t" => (
            Ut,
            vec![
                (o(1, 0), coeff(1, 1, -1, 0)),
                (o(0, 0), coeff(-1, 1, -1, 0)),
            ],
        ),
        "backward_euler_t" => (
            Ut,
            vec![
                (o(0, 0), coeff(1, 1, -1, 0)),
                (o(-1, 0), coeff(-1, 1, -1, 0)),
            ],
        ),
        "central_t" => (
            Ut,
            vec![
                (o(1, 0), coeff(1, 2, -1, 0)),
                (o(-1, 0), coeff(-1, 2, -1, 0)),
            ],
        ),
        "central_second_t" => (
            Utt,
            vec![
                (o(1, 0), coeff(1, 1, -2, 0)),
                (o(0, 0), coeff(-2, 1, -2, 0)),
                (o(-1, 0), coeff(1, 1, -2, 0)),
            ],
        ),
        "central_xx" => (
            Uxx,
            vec![
                (o(0, 1), coeff(1, 1, 0, -2)),
                (o(0, 0), coeff(-2, 1, 0, -2)),
                (o(0, -1), coeff(1, 1, 0, -2)),
            ],
        ),
        "dufort_frankel_xx" => (
            Uxx,
            vec![
                (o(0, 1), coeff(1, 1, 0, -2)),
                (o(1, 0), coeff(-1, 1, 0, -2)),
                (o(-1, 0), coeff(-1, 1, 0, -2)),
                (o(0, -1), coeff(1, 1, 0, -2)),
            ],
        ),
        // spatial average at the new level minus the old centre value
        "nonstandard_t" => (
            Ut,
            vec![
                (o(1, 1), coeff(1, 3, -1, 0)),
                (o(1, 0), coeff(1, 3, -1, 0)),
                (o(1, -1), coeff(1, 3, -1, 0)),
                (o(0, 0), coeff(-1, 1, -1, 0)),
            ],
        ),
        // forward difference in time of the central second difference in space
        "forward_central_txx" => (
            Utxx,
            vec![
                (o(1, 1), coeff(1, 1, -1, -2)),
                (o(1, 0), coeff(-2, 1, -1, -2)),
                (o(1, -1), coeff(1, 1, -1, -2)),
                (o(0, 1), coeff(-1, 1, -1, -2)),
                (o(0, 0), coeff(2, 1, -1, -2)),
                (o(0, -1), coeff(-1, 1, -1, -2)),
            ],
        ),
        other => return Err(StencilError::UnknownTemplate(other.to_string())),
    };
    DerivativeTemplate::new(name, kind, Stencil::from_entries(entries))
}

/// Convenience for `SchemeTerm { coefficient, template: builtin_template(name) }`.
pub fn builtin_term(coefficient: LaurentPoly, name: &str) -> Result<SchemeTerm, StencilError> {
    Ok(SchemeTerm {
        coefficient,
        template: builtin_template(name)?,
    })
}

/// `coefficient = 1`
pub fn unit_term(name: &str) -> Result<SchemeTerm, StencilError> {
    builtin_term(LaurentPoly::constant(BigRational::one()), name)
}
