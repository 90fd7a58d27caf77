//! Reduction of an assembled stencil to a random-walk micro-model.
//!
//! Every coefficient outside the support `{(1,0), (0,-1), (0,0), (0,1)}` is
//! set to zero and the resulting constraints are solved for the time step
//! `dt` and the squared space step `dx^2`. The surviving scheme is divided
//! by its `u_m^{k+1}` coefficient (the normalizer), which must leave exact
//! rational weights
//!
//! ```text
//! u_m^{k+1} = p (u_{m+1}^k + u_{m-1}^k) + (1 - 2p) u_m^k,   0 < p <= 1/2.
//! ```
//!
//! Constraints are only ever solved by isolation: the equation must read
//! `u^e * (A + u * B) = 0` in the unknown `u`, with `A` and `B` free of `u`
//! and `B` a single monomial, giving `u = -A / B`. When the out-of-band
//! constraints leave the weights undetermined, the caller's free parameter
//! `p` closes the system through the extra equation `p_plus = p`.
//!
//! Before solving, the stencil is rescaled so that the `dx`-free part of its
//! `u_m^{k+1}` coefficient is one. Scaling by a monomial does not change any
//! solution; it only makes the reported normalizer match the usual
//! hand-collected form (e.g. `2` for the DuFort-Frankel relaxation scheme).

use std::fmt::{self, Write as _};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::laurent::{Bindings, LaurentPoly, Monomial, SubstitutionError, SymbolId, Var};
use crate::stencil::{GridOffset, Stencil};

/// Offsets kept by the random-walk form.
pub const KEPT_SUPPORT: [GridOffset; 4] = [
    GridOffset::new(1, 0),
    GridOffset::new(0, -1),
    GridOffset::new(0, 0),
    GridOffset::new(0, 1),
];

/// Offsets that must be eliminated, in elimination order.
pub const ELIMINATED_SUPPORT: [GridOffset; 3] = [
    GridOffset::new(-1, 0),
    GridOffset::new(1, 1),
    GridOffset::new(1, -1),
];

const NEXT: GridOffset = GridOffset::new(1, 0);
const PLUS: GridOffset = GridOffset::new(0, 1);
const CENTRE: GridOffset = GridOffset::new(0, 0);
const MINUS: GridOffset = GridOffset::new(0, -1);

/// Quantity a constraint can be solved for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Unknown {
    #[serde(rename = "dt")]
    TimeStep,
    #[serde(rename = "dx2")]
    SpaceStepSquared,
}

impl Unknown {
    pub fn var(self) -> Var {
        match self {
            Unknown::TimeStep => Var::Symbol(SymbolId::TimeStep),
            Unknown::SpaceStepSquared => Var::Square(SymbolId::SpaceStep),
        }
    }

    /// Exponent of the unknown in `m`; `None` for an odd power of `dx`.
    fn exponent_in(self, m: &Monomial) -> Option<i32> {
        match self {
            Unknown::TimeStep => Some(m.exponent(SymbolId::TimeStep)),
            Unknown::SpaceStepSquared => {
                let e = m.exponent(SymbolId::SpaceStep);
                (e % 2 == 0).then_some(e / 2)
            }
        }
    }

    fn strip(self, m: &Monomial) -> Monomial {
        match self {
            Unknown::TimeStep => m.with_exponent(SymbolId::TimeStep, 0),
            Unknown::SpaceStepSquared => m.with_exponent(SymbolId::SpaceStep, 0),
        }
    }

    pub fn as_poly(self) -> LaurentPoly {
        match self {
            Unknown::TimeStep => LaurentPoly::symbol(SymbolId::TimeStep),
            Unknown::SpaceStepSquared => LaurentPoly::symbol(SymbolId::SpaceStep)
                .pow(2)
                .expect("positive power"),
        }
    }
}

impl fmt::Display for Unknown {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Unknown::TimeStep => "dt",
            Unknown::SpaceStepSquared => "dx^2",
        })
    }
}

/// `unknown = value`
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Binding {
    pub unknown: Unknown,
    pub value: LaurentPoly,
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.unknown, self.value)
    }
}

/// Where a constraint came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstraintSource {
    /// Coefficient at an out-of-band offset set to zero.
    Offset { dt: i32, dx: i32 },
    /// `p_plus = p` supplied by the caller.
    FreeParameter {
        #[serde(serialize_with = "ser_rational")]
        p: BigRational,
    },
}

impl ConstraintSource {
    fn offset(o: GridOffset) -> ConstraintSource {
        ConstraintSource::Offset {
            dt: o.time,
            dx: o.space,
        }
    }
}

impl fmt::Display for ConstraintSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintSource::Offset { dt, dx } => write!(f, "coefficient at ({dt}, {dx})"),
            ConstraintSource::FreeParameter { p } => write!(f, "p_plus = {p}"),
        }
    }
}

/// One processed constraint `equation = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Elimination {
    pub source: ConstraintSource,
    /// The constraint as it stood when it was processed (earlier bindings applied).
    pub equation: LaurentPoly,
    /// `None` when earlier bindings had already made the equation vanish.
    pub solved: Option<Binding>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("offset {0} lies outside the supported stencil support")]
    UnsupportedSupport(GridOffset),
    #[error("the coefficient of u_m^(k+1) vanishes")]
    MissingLeadingTerm,
    #[error("cannot solve {origin}: `{equation} = 0` (choose another discretization)")]
    UnsolvableConstraint {
        origin: ConstraintSource,
        equation: LaurentPoly,
    },
    #[error("weights violate 0 < p <= 1/2 with 1 - 2p >= 0: p_plus = {p_plus}, p_zero = {p_zero} (choose another discretization)")]
    PositivityViolation {
        p_plus: BigRational,
        p_zero: BigRational,
    },
    #[error("weights are not symmetric: p_plus = {p_plus}, p_minus = {p_minus}")]
    AsymmetricWeights {
        p_plus: BigRational,
        p_minus: BigRational,
    },
    #[error("weights sum to {0}, not 1: the scheme does not preserve constants")]
    WeightSumMismatch(BigRational),
    #[error("{origin} requires an odd power of dx")]
    OddSpaceExponent { origin: ConstraintSource },
    #[error("the weights still depend on the step sizes; a free parameter p is required")]
    FreeParameterRequired,
    #[error("the weights are fully determined; a free parameter p is not allowed")]
    FreeParameterForbidden,
    #[error("p must lie in (0, 1/2], got {0}")]
    FreeParameterOutOfRange(BigRational),
}

/// The reduced micro-model `u_m^{k+1} = p_plus u_{m+1}^k + p_zero u_m^k + p_minus u_{m-1}^k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RandomWalkForm {
    pub p_plus: BigRational,
    pub p_zero: BigRational,
    pub p_minus: BigRational,
    /// Solved step-size bindings, fully back-substituted, in solving order.
    pub constraints: Vec<Binding>,
    /// `tau * D` when both step sizes are fixed by the model parameters.
    pub length_scale_sq: Option<LaurentPoly>,
}

impl RandomWalkForm {
    pub fn binding(&self, unknown: Unknown) -> Option<&LaurentPoly> {
        self.constraints
            .iter()
            .find(|b| b.unknown == unknown)
            .map(|b| &b.value)
    }

    pub fn bindings(&self) -> Bindings {
        self.constraints
            .iter()
            .map(|b| (b.unknown.var(), b.value.clone()))
            .collect()
    }

    pub fn weights(&self) -> [BigRational; 3] {
        [
            self.p_plus.clone(),
            self.p_zero.clone(),
            self.p_minus.clone(),
        ]
    }

    /// Checks the three structural invariants of a random-walk form.
    pub fn check_invariants(&self) -> Result<(), ReductionError> {
        check_weights(&self.p_plus, &self.p_zero, &self.p_minus)
    }
}

fn check_weights(
    p_plus: &BigRational,
    p_zero: &BigRational,
    p_minus: &BigRational,
) -> Result<(), ReductionError> {
    let sum = p_plus + p_zero + p_minus;
    if !sum.is_one() {
        return Err(ReductionError::WeightSumMismatch(sum));
    }
    if p_plus != p_minus {
        return Err(ReductionError::AsymmetricWeights {
            p_plus: p_plus.clone(),
            p_minus: p_minus.clone(),
        });
    }
    let half = BigRational::new(1.into(), 2.into());
    if !p_plus.is_positive() || *p_plus > half || p_zero.is_negative() {
        return Err(ReductionError::PositivityViolation {
            p_plus: p_plus.clone(),
            p_zero: p_zero.clone(),
        });
    }
    Ok(())
}

/// Full record of a reduction attempt.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionReport {
    pub input: Stencil,
    /// Monomial the input was multiplied by before solving.
    pub scale: LaurentPoly,
    pub free_parameter: Option<BigRational>,
    pub eliminated: Vec<Elimination>,
    /// Bindings after back-substitution, in solving order.
    pub bindings: Vec<Binding>,
    /// Coefficient of `u_m^{k+1}` after substitution (scaled stencil).
    pub normalizer: Option<LaurentPoly>,
    pub outcome: Result<RandomWalkForm, ReductionError>,
}

impl ReductionReport {
    pub fn is_success(&self) -> bool {
        self.outcome.is_ok()
    }

    pub fn form(&self) -> Result<&RandomWalkForm, &ReductionError> {
        self.outcome.as_ref()
    }

    pub fn into_form(self) -> Result<RandomWalkForm, ReductionError> {
        self.outcome
    }

    /// Human-readable derivation trace.
    pub fn trace(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scheme (scaled by {}):", self.scale);
        for (o, c) in self.input.scaled(&self.scale).entries() {
            let _ = writeln!(out, "  {o}: {c}");
        }
        if let Some(p) = &self.free_parameter {
            let _ = writeln!(out, "free parameter p = {p}");
        }
        for (i, e) in self.eliminated.iter().enumerate() {
            let _ = write!(out, "step {}: {}: {} = 0", i + 1, e.source, e.equation);
            match &e.solved {
                Some(b) => {
                    let _ = writeln!(out, "  =>  {b}");
                }
                None => {
                    let _ = writeln!(out, "  (already satisfied)");
                }
            }
        }
        for b in &self.bindings {
            let _ = writeln!(out, "binding: {b}");
        }
        if let Some(n) = &self.normalizer {
            let _ = writeln!(out, "normalizer: {n}");
        }
        match &self.outcome {
            Ok(f) => {
                let _ = writeln!(
                    out,
                    "u_m^(k+1) = {} u_(m+1)^k + {} u_m^k + {} u_(m-1)^k",
                    f.p_plus, f.p_zero, f.p_minus
                );
            }
            Err(e) => {
                let _ = writeln!(out, "failed: {e}");
            }
        }
        out
    }

    /// JSON document `{model, eliminated, bindings, normalizer, weights, scales}`.
    pub fn to_json(&self, model: &str) -> Value {
        let weights = match &self.outcome {
            Ok(f) => json!({
                "plus": f.p_plus.to_string(),
                "zero": f.p_zero.to_string(),
                "minus": f.p_minus.to_string(),
            }),
            Err(_) => Value::Null,
        };
        let scales = match self.outcome.as_ref().map(derived_scales) {
            Ok(Ok(s)) => serde_json::to_value(s).unwrap_or(Value::Null),
            _ => json!({}),
        };
        let mut doc = json!({
            "model": model,
            "input": self.input,
            "scale": self.scale,
            "free_parameter": self.free_parameter.as_ref().map(|p| p.to_string()),
            "eliminated": self.eliminated,
            "bindings": self.bindings,
            "normalizer": self.normalizer,
            "weights": weights,
            "scales": scales,
            "status": if self.is_success() { "ok" } else { "failed" },
        });
        if let Err(e) = &self.outcome {
            doc["error"] = Value::String(e.to_string());
        }
        doc
    }
}

fn ser_rational<S: serde::Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(r)
}

/// Reduces `st`, solving each constraint for `dt` before `dx^2`.
pub fn reduce(st: &Stencil, free_parameter: Option<BigRational>) -> ReductionReport {
    reduce_with_order(
        st,
        free_parameter,
        [Unknown::TimeStep, Unknown::SpaceStepSquared],
    )
}

/// [`reduce`] with an explicit preference order for the unknowns.
pub fn reduce_with_order(
    st: &Stencil,
    free_parameter: Option<BigRational>,
    order: [Unknown; 2],
) -> ReductionReport {
    let mut solver = Solver {
        order,
        eliminated: Vec::new(),
        bindings: Vec::new(),
    };
    let scale = time_scale(st);
    let outcome = solver.run(st, &scale, free_parameter.as_ref());
    let (normalizer, outcome) = match outcome {
        Ok((n, form)) => (Some(n), Ok(form)),
        Err((n, e)) => (n, Err(e)),
    };
    ReductionReport {
        input: st.clone(),
        scale,
        free_parameter,
        eliminated: solver.eliminated,
        bindings: solver.bindings,
        normalizer,
        outcome,
    }
}

/// Inverse of the `dx`-free part of the `u_m^{k+1}` coefficient when that
/// part is a single monomial; otherwise the inverse of the whole coefficient
/// when it is a monomial; otherwise one.
fn time_scale(st: &Stencil) -> LaurentPoly {
    let lead = st.get(NEXT);
    let time_part = LaurentPoly::from_terms(
        lead.terms()
            .filter(|(m, _)| m.exponent(SymbolId::SpaceStep) == 0)
            .map(|(m, c)| (*m, c.clone())),
    );
    time_part
        .inverse()
        .or_else(|| lead.inverse())
        .unwrap_or_else(LaurentPoly::one)
}

/// `Some(w)` when `a == w * n` for a rational `w`.
fn constant_ratio(a: &LaurentPoly, n: &LaurentPoly) -> Option<BigRational> {
    if a.is_zero() {
        return Some(BigRational::zero());
    }
    let (m, cn) = n.terms().next()?;
    let ca = a.terms().find(|(ma, _)| *ma == m).map(|(_, c)| c.clone())?;
    let w = ca / cn;
    (n.scale(&w) == *a).then_some(w)
}

enum Pass {
    Done,
    Stuck(usize),
}

type Failure = (Option<LaurentPoly>, ReductionError);

struct Solver {
    order: [Unknown; 2],
    eliminated: Vec<Elimination>,
    bindings: Vec<Binding>,
}

impl Solver {
    fn map(&self) -> Bindings {
        self.bindings
            .iter()
            .map(|b| (b.unknown.var(), b.value.clone()))
            .collect()
    }

    fn apply(
        &self,
        p: &LaurentPoly,
        source: &ConstraintSource,
    ) -> Result<LaurentPoly, ReductionError> {
        p.substitute(&self.map()).map_err(|e| match e {
            SubstitutionError::OddExponent { .. } => ReductionError::OddSpaceExponent {
                origin: source.clone(),
            },
            _ => ReductionError::UnsolvableConstraint {
                origin: source.clone(),
                equation: p.clone(),
            },
        })
    }

    fn run(
        &mut self,
        st: &Stencil,
        scale: &LaurentPoly,
        p: Option<&BigRational>,
    ) -> Result<(LaurentPoly, RandomWalkForm), Failure> {
        if let Some(o) = st
            .support()
            .find(|o| !KEPT_SUPPORT.contains(o) && !ELIMINATED_SUPPORT.contains(o))
        {
            return Err((None, ReductionError::UnsupportedSupport(o)));
        }
        if st.get(NEXT).is_zero() {
            return Err((None, ReductionError::MissingLeadingTerm));
        }
        if let Some(p) = p {
            let half = BigRational::new(1.into(), 2.into());
            if !p.is_positive() || *p > half {
                return Err((None, ReductionError::FreeParameterOutOfRange(p.clone())));
            }
        }
        let work = st.scaled(scale);

        let mut pending: Vec<(ConstraintSource, LaurentPoly)> = ELIMINATED_SUPPORT
            .iter()
            .filter(|o| !work.get(**o).is_zero())
            .map(|o| (ConstraintSource::offset(*o), work.get(*o)))
            .collect();
        let first = self.solve_all(&mut pending).map_err(|e| (None, e))?;
        let determined =
            matches!(first, Pass::Done) && self.weights(&work).map_err(|e| (None, e))?.is_some();

        match (determined, p) {
            (true, Some(_)) => return Err((None, ReductionError::FreeParameterForbidden)),
            (true, None) => {}
            (false, None) => {
                let unbound = 2 - self.bindings.len();
                return Err((
                    None,
                    match first {
                        Pass::Stuck(n) if n >= unbound => {
                            let (source, eq) = pending.swap_remove(0);
                            let equation = self.apply(&eq, &source).unwrap_or(eq);
                            ReductionError::UnsolvableConstraint {
                                origin: source,
                                equation,
                            }
                        }
                        _ => ReductionError::FreeParameterRequired,
                    },
                ));
            }
            (false, Some(p)) => {
                let pin = &(-&work.get(PLUS)) - &work.get(NEXT).scale(p);
                pending.push((ConstraintSource::FreeParameter { p: p.clone() }, pin));
                if let Pass::Stuck(_) = self.solve_all(&mut pending).map_err(|e| (None, e))? {
                    let (source, eq) = pending.swap_remove(0);
                    let equation = self.apply(&eq, &source).unwrap_or(eq);
                    return Err((
                        None,
                        ReductionError::UnsolvableConstraint {
                            origin: source,
                            equation,
                        },
                    ));
                }
            }
        }

        let Some((normalizer, [p_plus, p_zero, p_minus])) =
            self.weights(&work).map_err(|e| (None, e))?
        else {
            let equation = self
                .apply(&work.get(PLUS), &ConstraintSource::offset(PLUS))
                .unwrap_or_default();
            return Err((
                None,
                ReductionError::UnsolvableConstraint {
                    origin: ConstraintSource::FreeParameter {
                        p: p.cloned().unwrap_or_default(),
                    },
                    equation,
                },
            ));
        };
        check_weights(&p_plus, &p_zero, &p_minus).map_err(|e| (Some(normalizer.clone()), e))?;
        for b in &self.bindings {
            if !b.value.is_manifestly_positive() {
                return Err((
                    Some(normalizer),
                    ReductionError::UnsolvableConstraint {
                        origin: ConstraintSource::offset(NEXT),
                        equation: &b.unknown.as_poly() - &b.value,
                    },
                ));
            }
        }
        let fully_fixed = self.bindings.len() == 2
            && self.bindings.iter().all(|b| {
                !b.value.contains(SymbolId::TimeStep) && !b.value.contains(SymbolId::SpaceStep)
            });
        let has_tau = self
            .bindings
            .iter()
            .any(|b| b.value.contains(SymbolId::RelaxTime));
        let length_scale_sq = (fully_fixed && has_tau).then(|| {
            &LaurentPoly::symbol(SymbolId::RelaxTime) * &LaurentPoly::symbol(SymbolId::Diffusivity)
        });
        Ok((
            normalizer,
            RandomWalkForm {
                p_plus,
                p_zero,
                p_minus,
                constraints: self.bindings.clone(),
                length_scale_sq,
            },
        ))
    }

    /// Normalizer and weights if all three weights are rational constants.
    #[allow(clippy::type_complexity)]
    fn weights(
        &self,
        work: &Stencil,
    ) -> Result<Option<(LaurentPoly, [BigRational; 3])>, ReductionError> {
        let src = ConstraintSource::offset(NEXT);
        let n = self.apply(&work.get(NEXT), &src)?;
        if n.is_zero() {
            return Err(ReductionError::MissingLeadingTerm);
        }
        let mut w = Vec::with_capacity(3);
        for o in [PLUS, CENTRE, MINUS] {
            let c = self.apply(&work.get(o), &ConstraintSource::offset(o))?;
            match constant_ratio(&-c, &n) {
                Some(v) => w.push(v),
                None => return Ok(None),
            }
        }
        let [a, b, c]: [BigRational; 3] = w.try_into().expect("three weights");
        Ok(Some((n, [a, b, c])))
    }

    /// Solves pending constraints until none is left or none can be solved.
    fn solve_all(
        &mut self,
        pending: &mut Vec<(ConstraintSource, LaurentPoly)>,
    ) -> Result<Pass, ReductionError> {
        'outer: loop {
            if pending.is_empty() {
                return Ok(Pass::Done);
            }
            for i in 0..pending.len() {
                let (source, raw) = pending[i].clone();
                let eq = self.apply(&raw, &source)?;
                if eq.is_zero() {
                    pending.remove(i);
                    self.eliminated.push(Elimination {
                        source,
                        equation: eq,
                        solved: None,
                    });
                    continue 'outer;
                }
                // a single monomial never vanishes for positive symbols
                let free = !eq.contains(SymbolId::TimeStep) && !eq.contains(SymbolId::SpaceStep);
                if free || eq.len() == 1 {
                    return Err(ReductionError::UnsolvableConstraint {
                        origin: source,
                        equation: eq,
                    });
                }
                let mut odd = false;
                for unknown in self.order {
                    if self.bindings.iter().any(|b| b.unknown == unknown) {
                        continue;
                    }
                    match isolate(&eq, unknown) {
                        Isolation::Solved(value) => {
                            pending.remove(i);
                            self.bind(unknown, value.clone(), &source)?;
                            self.eliminated.push(Elimination {
                                source,
                                equation: eq,
                                solved: Some(Binding { unknown, value }),
                            });
                            continue 'outer;
                        }
                        Isolation::OddPower => odd = true,
                        Isolation::NotIsolatable => {}
                    }
                }
                if odd {
                    return Err(ReductionError::OddSpaceExponent { origin: source });
                }
            }
            return Ok(Pass::Stuck(pending.len()));
        }
    }

    fn bind(
        &mut self,
        unknown: Unknown,
        value: LaurentPoly,
        source: &ConstraintSource,
    ) -> Result<(), ReductionError> {
        let single = Bindings::from([(unknown.var(), value.clone())]);
        for b in &mut self.bindings {
            b.value = b.value.substitute(&single).map_err(|e| match e {
                SubstitutionError::OddExponent { .. } => ReductionError::OddSpaceExponent {
                    origin: source.clone(),
                },
                _ => ReductionError::UnsolvableConstraint {
                    origin: source.clone(),
                    equation: b.value.clone(),
                },
            })?;
        }
        self.bindings.push(Binding { unknown, value });
        Ok(())
    }
}

enum Isolation {
    Solved(LaurentPoly),
    NotIsolatable,
    OddPower,
}

/// Solves `eq = 0` for `unknown` when it has the shape `u^e (A + u B)` with
/// `B` a monomial and the solution `-A/B` manifestly positive.
fn isolate(eq: &LaurentPoly, unknown: Unknown) -> Isolation {
    let mut groups: std::collections::BTreeMap<i32, LaurentPoly> = Default::default();
    for (m, c) in eq.terms() {
        let Some(e) = unknown.exponent_in(m) else {
            return Isolation::OddPower;
        };
        *groups.entry(e).or_default() += LaurentPoly::term(c.clone(), unknown.strip(m));
    }
    if groups.len() != 2 {
        return Isolation::NotIsolatable;
    }
    let mut it = groups.into_iter();
    let (e1, a) = it.next().expect("two groups");
    let (e2, b) = it.next().expect("two groups");
    if e2 - e1 != 1 {
        return Isolation::NotIsolatable;
    }
    let Some(b_inv) = b.inverse() else {
        return Isolation::NotIsolatable;
    };
    let value = -(&a * &b_inv);
    if value.is_manifestly_positive() {
        Isolation::Solved(value)
    } else {
        Isolation::NotIsolatable
    }
}

/// Scales implied by a fully constrained reduction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DerivedScales {
    pub dt_binding: LaurentPoly,
    pub dx_sq_binding: LaurentPoly,
    /// `dx^2 / (2 dt)` after substitution.
    pub diffusivity_check: LaurentPoly,
    pub length_scale_sq: Option<LaurentPoly>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalesError {
    #[error("dt and dx are linked but not individually fixed by the model parameters")]
    UnderConstrained,
}

pub fn derived_scales(form: &RandomWalkForm) -> Result<DerivedScales, ScalesError> {
    let dt = form.binding(Unknown::TimeStep);
    let dx2 = form.binding(Unknown::SpaceStepSquared);
    let (Some(dt), Some(dx2)) = (dt, dx2) else {
        return Err(ScalesError::UnderConstrained);
    };
    if [dt, dx2]
        .iter()
        .any(|v| v.contains(SymbolId::TimeStep) || v.contains(SymbolId::SpaceStep))
    {
        return Err(ScalesError::UnderConstrained);
    }
    let dt_inv = dt.inverse().ok_or(ScalesError::UnderConstrained)?;
    let diffusivity_check = (dx2 * &dt_inv).scale(&BigRational::new(1.into(), 2.into()));
    Ok(DerivedScales {
        dt_binding: dt.clone(),
        dx_sq_binding: dx2.clone(),
        diffusivity_check,
        length_scale_sq: form.length_scale_sq.clone(),
    })
}

/// Replays the report's bindings against its input stencil.
pub fn verify_report(rep: &ReductionReport) -> bool {
    let Ok(form) = &rep.outcome else {
        return false;
    };
    let Ok(sub) = rep.input.scaled(&rep.scale).substitute(&form.bindings()) else {
        return false;
    };
    let n = sub.get(NEXT);
    if n.is_zero() || rep.normalizer.as_ref() != Some(&n) {
        return false;
    }
    let expected = |o: GridOffset| -> Option<&BigRational> {
        match o {
            PLUS => Some(&form.p_plus),
            CENTRE => Some(&form.p_zero),
            MINUS => Some(&form.p_minus),
            _ => None,
        }
    };
    for o in KEPT_SUPPORT.iter().chain(ELIMINATED_SUPPORT.iter()) {
        if *o == NEXT {
            continue;
        }
        let c = sub.get(*o);
        let ok = match expected(*o) {
            Some(w) => -c == n.scale(w),
            None => c.is_zero(),
        };
        if !ok {
            return false;
        }
    }
    form.check_invariants().is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn p(s: &str) -> LaurentPoly {
        s.parse().unwrap()
    }

    fn stencil(entries: &[((i32, i32), &str)]) -> Stencil {
        Stencil::from_entries(
            entries
                .iter()
                .map(|((t, x), c)| (GridOffset::new(*t, *x), p(c))),
        )
    }

    fn heat() -> Stencil {
        stencil(&[
            ((1, 0), "dt^-1"),
            ((0, 0), "-dt^-1 + 2*D*dx^-2"),
            ((0, 1), "-D*dx^-2"),
            ((0, -1), "-D*dx^-2"),
        ])
    }

    #[test]
    fn constant_lag_coefficient_is_unsolvable() {
        let mut st = heat();
        st.add_at(GridOffset::new(-1, 0), LaurentPoly::one());
        let rep = reduce(&st, None);
        assert!(matches!(
            rep.outcome,
            Err(ReductionError::UnsolvableConstraint { .. })
        ));
        assert!(!verify_report(&rep));
    }

    #[test]
    fn heat_requires_free_parameter() {
        assert_eq!(
            reduce(&heat(), None).outcome,
            Err(ReductionError::FreeParameterRequired)
        );
        assert_eq!(
            reduce(&heat(), Some(rat(3, 5))).outcome,
            Err(ReductionError::FreeParameterOutOfRange(rat(3, 5)))
        );
        assert_eq!(
            reduce(&heat(), Some(rat(0, 1))).outcome,
            Err(ReductionError::FreeParameterOutOfRange(rat(0, 1)))
        );
    }

    #[test]
    fn heat_with_quarter() {
        let rep = reduce(&heat(), Some(rat(1, 4)));
        let f = rep.form().unwrap();
        assert_eq!(f.weights(), [rat(1, 4), rat(1, 2), rat(1, 4)]);
        assert_eq!(f.binding(Unknown::TimeStep), Some(&p("1/4*D^-1*dx^2")));
        assert!(verify_report(&rep));
    }

    #[test]
    fn unsupported_offset() {
        let mut st = heat();
        st.add_at(GridOffset::new(0, 2), p("dx^-2"));
        assert_eq!(
            reduce(&st, Some(rat(1, 2))).outcome,
            Err(ReductionError::UnsupportedSupport(GridOffset::new(0, 2)))
        );
    }

    #[test]
    fn missing_leading_term() {
        let st = stencil(&[((0, 0), "dt^-1"), ((-1, 0), "-dt^-1")]);
        assert_eq!(
            reduce(&st, None).outcome,
            Err(ReductionError::MissingLeadingTerm)
        );
    }

    #[test]
    fn negative_centre_weight_violates_positivity() {
        // u^{k+1} = 2 u_{m+1} - 3 u_m + 2 u_{m-1}
        let st = stencil(&[
            ((1, 0), "1"),
            ((0, 1), "-2"),
            ((0, -1), "-2"),
            ((0, 0), "3"),
        ]);
        assert!(matches!(
            reduce(&st, None).outcome,
            Err(ReductionError::PositivityViolation { .. })
        ));
    }

    #[test]
    fn asymmetric_weights_rejected() {
        let st = stencil(&[
            ((1, 0), "1"),
            ((0, 1), "-1/2"),
            ((0, -1), "-1/4"),
            ((0, 0), "-1/4"),
        ]);
        assert!(matches!(
            reduce(&st, None).outcome,
            Err(ReductionError::AsymmetricWeights { .. })
        ));
    }

    #[test]
    fn non_conservative_scheme_rejected() {
        let st = stencil(&[((1, 0), "1"), ((0, 1), "-1/4"), ((0, -1), "-1/4")]);
        assert_eq!(
            reduce(&st, None).outcome,
            Err(ReductionError::WeightSumMismatch(rat(1, 2)))
        );
    }

    #[test]
    fn odd_space_exponent_detected() {
        // the lag coefficient involves dx itself, not dx^2
        let st = stencil(&[
            ((1, 0), "1"),
            ((0, 0), "-1"),
            ((-1, 0), "tau*dx^-1 - D"),
            ((0, 1), "-1"),
            ((0, -1), "1"),
        ]);
        let rep = reduce_with_order(&st, None, [Unknown::SpaceStepSquared, Unknown::TimeStep]);
        assert!(matches!(
            rep.outcome,
            Err(ReductionError::OddSpaceExponent { .. })
        ));
    }

    #[test]
    fn determined_scheme_forbids_parameter() {
        let st = stencil(&[((1, 0), "1"), ((0, 1), "-1/2"), ((0, -1), "-1/2")]);
        assert!(reduce(&st, None).is_success());
        assert_eq!(
            reduce(&st, Some(rat(1, 2))).outcome,
            Err(ReductionError::FreeParameterForbidden)
        );
    }

    #[test]
    fn tampered_report_fails_verification() {
        let mut rep = reduce(&heat(), Some(rat(1, 2)));
        assert!(verify_report(&rep));
        if let Ok(f) = &mut rep.outcome {
            f.p_plus += rat(1, 1000);
        }
        assert!(!verify_report(&rep));
    }

    #[test]
    fn trace_mentions_every_step() {
        let rep = reduce(&heat(), Some(rat(1, 2)));
        let t = rep.trace();
        assert!(t.contains("p_plus = 1/2"), "{t}");
        assert!(t.contains("dt = 1/2*D^-1*dx^2"), "{t}");
    }
}
