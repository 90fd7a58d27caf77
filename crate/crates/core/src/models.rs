//! Built-in heat-conduction models and the discretizations used to reduce them.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::Signed;
use serde::Serialize;
use thiserror::Error;

use crate::laurent::{LaurentPoly, SymbolId};
use crate::rational::rat;
use crate::reduction::{reduce, Binding, RandomWalkForm, ReductionReport, Unknown};
use crate::stencil::{assemble, builtin_term, unit_term, SchemeSpec, SchemeTerm, Stencil};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelId {
    /// `u_t = D u_xx`, forward Euler in time, central in space.
    StandardHeat,
    /// `tau u_tt + u_t = D u_xx`, DuFort-Frankel in space.
    MaxwellCattaneo,
    /// `u_t = D u_xx`, central in time, DuFort-Frankel in space.
    StandardHeatDff,
    /// `u_t = D u_xx + tau D u_txx`, nonstandard time difference.
    Symmetry,
}

impl ModelId {
    pub const ALL: [ModelId; 4] = [
        ModelId::StandardHeat,
        ModelId::MaxwellCattaneo,
        ModelId::StandardHeatDff,
        ModelId::Symmetry,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelId::StandardHeat => "standard-heat",
            ModelId::MaxwellCattaneo => "maxwell-cattaneo",
            ModelId::StandardHeatDff => "standard-heat-dff",
            ModelId::Symmetry => "symmetry",
        }
    }

    pub fn pde(self) -> &'static str {
        match self {
            ModelId::StandardHeat | ModelId::StandardHeatDff => "u_t = D u_xx",
            ModelId::MaxwellCattaneo => "tau u_tt + u_t = D u_xx",
            ModelId::Symmetry => "u_t = D u_xx + (tau D) u_txx",
        }
    }

    pub fn uses_tau(self) -> bool {
        matches!(self, ModelId::MaxwellCattaneo | ModelId::Symmetry)
    }

    /// Template names in the order they appear in [`scheme_for`].
    pub fn template_names(self) -> &'static [&'static str] {
        match self {
            ModelId::StandardHeat => &["forward_euler_t", "central_xx"],
            ModelId::MaxwellCattaneo => {
                &["central_second_t", "backward_euler_t", "dufort_frankel_xx"]
            }
            ModelId::StandardHeatDff => &["central_t", "dufort_frankel_xx"],
            ModelId::Symmetry => &["nonstandard_t", "central_xx", "forward_central_txx"],
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown model `{0}` (expected one of standard-heat, maxwell-cattaneo, standard-heat-dff, symmetry)")]
pub struct UnknownModel(pub String);

impl FromStr for ModelId {
    type Err = UnknownModel;
    fn from_str(s: &str) -> Result<ModelId, UnknownModel> {
        ModelId::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| UnknownModel(s.to_string()))
    }
}

/// Physical parameters of a model. Each model owns its own `tau`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelParams {
    pub diffusivity: BigRational,
    pub tau: Option<BigRational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamsError {
    #[error("D must be positive, got {0}")]
    NonPositiveDiffusivity(BigRational),
    #[error("tau must be positive, got {0}")]
    NonPositiveTau(BigRational),
    #[error("model `{0}` requires tau")]
    MissingTau(ModelId),
    #[error("model `{0}` has no tau parameter")]
    UnexpectedTau(ModelId),
    #[error("the scheme depends on tau, but no tau was given")]
    TauRequired,
}

impl ModelParams {
    pub fn new(diffusivity: BigRational, tau: Option<BigRational>) -> ModelParams {
        ModelParams { diffusivity, tau }
    }

    pub fn validate(&self, model: ModelId) -> Result<(), ParamsError> {
        if !self.diffusivity.is_positive() {
            return Err(ParamsError::NonPositiveDiffusivity(
                self.diffusivity.clone(),
            ));
        }
        match (&self.tau, model.uses_tau()) {
            (Some(t), true) if !t.is_positive() => Err(ParamsError::NonPositiveTau(t.clone())),
            (None, true) => Err(ParamsError::MissingTau(model)),
            (Some(_), false) => Err(ParamsError::UnexpectedTau(model)),
            _ => Ok(()),
        }
    }
}

fn sym(s: SymbolId) -> LaurentPoly {
    LaurentPoly::symbol(s)
}

fn terms(parts: Vec<SchemeTerm>) -> SchemeSpec {
    SchemeSpec::new(parts).expect("built-in schemes are valid")
}

pub fn scheme_for(model: ModelId) -> SchemeSpec {
    let d = sym(SymbolId::Diffusivity);
    let tau = sym(SymbolId::RelaxTime);
    let t = |c: LaurentPoly, n: &str| builtin_term(c, n).expect("built-in template");
    let u = |n: &str| unit_term(n).expect("built-in template");
    match model {
        ModelId::StandardHeat => terms(vec![u("forward_euler_t"), t(-&d, "central_xx")]),
        ModelId::MaxwellCattaneo => terms(vec![
            t(tau, "central_second_t"),
            u("backward_euler_t"),
            t(-&d, "dufort_frankel_xx"),
        ]),
        ModelId::StandardHeatDff => terms(vec![u("central_t"), t(-&d, "dufort_frankel_xx")]),
        ModelId::Symmetry => terms(vec![
            u("nonstandard_t"),
            t(-&d, "central_xx"),
            t(-(&tau * &d), "forward_central_txx"),
        ]),
    }
}

/// The model's scheme as a `.scheme` file with locally declared templates.
pub fn scheme_text(model: ModelId) -> &'static str {
    match model {
        ModelId::StandardHeat => include_str!("../schemes/standard-heat.scheme"),
        ModelId::MaxwellCattaneo => include_str!("../schemes/maxwell-cattaneo.scheme"),
        ModelId::StandardHeatDff => include_str!("../schemes/standard-heat-dff.scheme"),
        ModelId::Symmetry => include_str!("../schemes/symmetry.scheme"),
    }
}

pub fn stencil_for(model: ModelId) -> Stencil {
    assemble(&scheme_for(model))
}

/// Value of `p` that closes the reduction the way the published derivation
/// does: `p = 1/2` (`dt = 2 tau`) for Maxwell-Cattaneo and `p = 1/3`
/// (`dt = 2 tau`) for the symmetry model. The standard forward-Euler scheme
/// has no preferred value and the DuFort-Frankel heat scheme needs none.
pub fn default_parameter(model: ModelId) -> Option<BigRational> {
    match model {
        ModelId::MaxwellCattaneo => Some(rat(1, 2)),
        ModelId::Symmetry => Some(rat(1, 3)),
        ModelId::StandardHeat | ModelId::StandardHeatDff => None,
    }
}

/// Reduces a built-in model; `p` overrides [`default_parameter`].
pub fn derive(model: ModelId, p: Option<BigRational>) -> ReductionReport {
    reduce(&stencil_for(model), p.or_else(|| default_parameter(model)))
}

/// Parameter used for the golden fixtures: the classical walk `p = 1/2` for
/// the forward-Euler scheme, [`default_parameter`] otherwise.
pub fn golden_parameter(model: ModelId) -> Option<BigRational> {
    match model {
        ModelId::StandardHeat => Some(rat(1, 2)),
        m => default_parameter(m),
    }
}

fn binding(unknown: Unknown, value: &str) -> Binding {
    Binding {
        unknown,
        value: value.parse().expect("fixture"),
    }
}

/// Published weights and step-size relations, used as golden fixtures.
pub fn expected_reduction(model: ModelId) -> RandomWalkForm {
    let half = rat(1, 2);
    let third = rat(1, 3);
    let zero = rat(0, 1);
    match model {
        ModelId::StandardHeat => RandomWalkForm {
            p_plus: half.clone(),
            p_zero: zero,
            p_minus: half,
            constraints: vec![binding(Unknown::TimeStep, "1/2*D^-1*dx^2")],
            length_scale_sq: None,
        },
        ModelId::MaxwellCattaneo => RandomWalkForm {
            p_plus: half.clone(),
            p_zero: zero,
            p_minus: half,
            constraints: vec![
                binding(Unknown::SpaceStepSquared, "4*D*tau"),
                binding(Unknown::TimeStep, "2*tau"),
            ],
            length_scale_sq: Some("D*tau".parse().expect("fixture")),
        },
        ModelId::StandardHeatDff => RandomWalkForm {
            p_plus: half.clone(),
            p_zero: zero,
            p_minus: half,
            constraints: vec![binding(Unknown::TimeStep, "1/2*D^-1*dx^2")],
            length_scale_sq: None,
        },
        ModelId::Symmetry => RandomWalkForm {
            p_plus: third.clone(),
            p_zero: third.clone(),
            p_minus: third,
            constraints: vec![
                binding(Unknown::SpaceStepSquared, "3*D*tau"),
                binding(Unknown::TimeStep, "2*tau"),
            ],
            length_scale_sq: Some("D*tau".parse().expect("fixture")),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::{derived_scales, verify_report, ReductionError, ScalesError};
    use crate::stencil::GridOffset;

    fn p(s: &str) -> LaurentPoly {
        s.parse().unwrap()
    }

    #[test]
    fn every_model_matches_golden_form() {
        for m in ModelId::ALL {
            let rep = reduce(&stencil_for(m), golden_parameter(m));
            assert_eq!(
                rep.form(),
                Ok(&expected_reduction(m)),
                "{m}\n{}",
                rep.trace()
            );
            assert!(verify_report(&rep), "{m}");
        }
    }

    #[test]
    fn relaxation_model_normalizer_is_two() {
        let rep = derive(ModelId::MaxwellCattaneo, None);
        assert_eq!(rep.normalizer, Some(LaurentPoly::integer(2)));
        assert_eq!(rep.scale, p("tau^-1*dt^2"));
    }

    #[test]
    fn relaxation_stencil_matches_collected_form() {
        // multiplied through by dt^2/tau
        let st = stencil_for(ModelId::MaxwellCattaneo).scaled(&p("dt^2*tau^-1"));
        assert_eq!(st.get(GridOffset::new(1, 0)), p("1 + D*tau^-1*dt^2*dx^-2"));
        assert_eq!(st.get(GridOffset::new(0, 0)), p("-(2 - dt/tau)"));
        assert_eq!(st.get(GridOffset::new(0, 1)), p("-D*tau^-1*dt^2*dx^-2"));
        assert_eq!(
            st.get(GridOffset::new(-1, 0)),
            p("-(-1 + dt/tau - D*tau^-1*dt^2*dx^-2)")
        );
    }

    #[test]
    fn relaxation_scales() {
        let f = derive(ModelId::MaxwellCattaneo, None).into_form().unwrap();
        let s = derived_scales(&f).unwrap();
        assert_eq!(s.diffusivity_check, p("D"));
        assert_eq!(s.length_scale_sq, Some(p("tau*D")));
    }

    #[test]
    fn symmetry_scales() {
        let f = derive(ModelId::Symmetry, None).into_form().unwrap();
        assert_eq!(derived_scales(&f).unwrap().dx_sq_binding, p("3*tau*D"));
    }

    #[test]
    fn heat_scales_underconstrained() {
        let f = derive(ModelId::StandardHeat, Some(rat(1, 2)))
            .into_form()
            .unwrap();
        assert_eq!(derived_scales(&f), Err(ScalesError::UnderConstrained));
        let f = derive(ModelId::StandardHeatDff, None).into_form().unwrap();
        assert_eq!(derived_scales(&f), Err(ScalesError::UnderConstrained));
    }

    #[test]
    fn heat_needs_p_and_dff_refuses_it() {
        assert_eq!(
            derive(ModelId::StandardHeat, None).outcome,
            Err(ReductionError::FreeParameterRequired)
        );
        assert_eq!(
            derive(ModelId::StandardHeatDff, Some(rat(1, 2))).outcome,
            Err(ReductionError::FreeParameterForbidden)
        );
    }

    #[test]
    fn relaxation_family_under_other_p() {
        // p_plus = 1 - tau/dt, so p = 1/4 gives dt = 4 tau / 3
        let f = derive(ModelId::MaxwellCattaneo, Some(rat(1, 4)))
            .into_form()
            .unwrap();
        assert_eq!(f.weights(), [rat(1, 4), rat(1, 2), rat(1, 4)]);
        assert_eq!(f.binding(Unknown::TimeStep), Some(&p("4/3*tau")));
    }

    #[test]
    fn params_validation() {
        let d = rat(1, 1);
        assert!(ModelParams::new(d.clone(), None)
            .validate(ModelId::StandardHeat)
            .is_ok());
        assert_eq!(
            ModelParams::new(d.clone(), None).validate(ModelId::Symmetry),
            Err(ParamsError::MissingTau(ModelId::Symmetry))
        );
        assert_eq!(
            ModelParams::new(d.clone(), Some(rat(1, 1))).validate(ModelId::StandardHeatDff),
            Err(ParamsError::UnexpectedTau(ModelId::StandardHeatDff))
        );
        assert!(ModelParams::new(rat(-1, 1), None)
            .validate(ModelId::StandardHeat)
            .is_err());
        assert!(ModelParams::new(d, Some(rat(0, 1)))
            .validate(ModelId::MaxwellCattaneo)
            .is_err());
    }

    #[test]
    fn model_names_round_trip() {
        for m in ModelId::ALL {
            assert_eq!(m.name().parse::<ModelId>(), Ok(m));
        }
        assert!("telegraph".parse::<ModelId>().is_err());
    }
}
