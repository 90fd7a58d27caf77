use microlim::laurent::{LaurentPoly, SymbolId};
use microlim::models::{self, ModelId};
use microlim::rational::rat;
use microlim::reduction::{
    derived_scales, reduce, reduce_with_order, verify_report, ReductionError, ScalesError, Unknown,
};
use microlim::stencil::{assemble, builtin_term, GridOffset, SchemeSpec, Stencil};
use num_rational::BigRational;
use proptest::prelude::*;
use serde_json::Value;

fn poly(s: &str) -> LaurentPoly {
    s.parse().unwrap()
}

fn golden_report(m: ModelId) -> microlim::ReductionReport {
    models::derive(m, models::golden_parameter(m))
}

#[test]
fn every_model_replays_and_matches() {
    for m in ModelId::ALL {
        let rep = golden_report(m);
        assert!(verify_report(&rep), "{m}");
        assert_eq!(rep.form().unwrap(), &models::expected_reduction(m), "{m}");
        let form = rep.form().unwrap();
        let sum = &form.p_plus + &form.p_zero + &form.p_minus;
        assert_eq!(sum, rat(1, 1));
        assert!(form.p_plus > rat(0, 1) && form.p_plus <= rat(1, 2));
    }
}

#[test]
fn reduction_is_deterministic() {
    for m in ModelId::ALL {
        assert_eq!(golden_report(m), golden_report(m));
        assert_eq!(
            golden_report(m).to_json(m.name()),
            golden_report(m).to_json(m.name())
        );
    }
}

/// Solving for `dx^2` before `dt` must give equivalent bindings (or an
/// explicit unsolvable constraint) for every built-in model.
#[test]
fn reversed_elimination_order_is_equivalent() {
    for m in ModelId::ALL {
        let p = models::golden_parameter(m);
        let st = models::stencil_for(m);
        let forward = reduce(&st, p.clone());
        let reversed = reduce_with_order(&st, p, [Unknown::SpaceStepSquared, Unknown::TimeStep]);
        match reversed.form() {
            Err(ReductionError::UnsolvableConstraint { .. }) => continue,
            Err(e) => panic!("{m}: unexpected failure {e}"),
            Ok(rf) => {
                let ff = forward.form().unwrap();
                assert_eq!(rf.weights(), ff.weights(), "{m}");
                assert!(verify_report(&reversed), "{m}");
                // each order's bindings satisfy the other's relations
                for b in &ff.constraints {
                    let lhs = b.unknown.as_poly().substitute(&rf.bindings()).unwrap();
                    let rhs = b.value.substitute(&rf.bindings()).unwrap();
                    assert_eq!(lhs, rhs, "{m}: {b}");
                }
            }
        }
    }
}

#[test]
fn dff_reversed_order_binds_space_step() {
    let st = models::stencil_for(ModelId::StandardHeatDff);
    let rep = reduce_with_order(&st, None, [Unknown::SpaceStepSquared, Unknown::TimeStep]);
    let form = rep.form().unwrap();
    assert_eq!(
        form.binding(Unknown::SpaceStepSquared),
        Some(&poly("2*D*dt"))
    );
}

#[test]
fn maxwell_cattaneo_trace_and_scales() {
    let rep = models::derive(ModelId::MaxwellCattaneo, None);
    assert_eq!(rep.normalizer, Some(LaurentPoly::integer(2)));
    let form = rep.form().unwrap();
    assert_eq!(form.binding(Unknown::TimeStep), Some(&poly("2*tau")));
    assert_eq!(
        form.binding(Unknown::SpaceStepSquared),
        Some(&poly("4*D*tau"))
    );
    let s = derived_scales(form).unwrap();
    assert_eq!(s.diffusivity_check, poly("D"));
    assert_eq!(s.length_scale_sq, Some(poly("tau*D")));
}

#[test]
fn symmetry_scales() {
    let form = models::expected_reduction(ModelId::Symmetry);
    let s = derived_scales(&form).unwrap();
    assert_eq!(s.dx_sq_binding, poly("3*tau*D"));
    assert_eq!(s.dt_binding, poly("2*tau"));
    // 3 tau D / dx^2 = 1
    let ratio = &poly("3*tau*D") * &s.dx_sq_binding.inverse().unwrap();
    assert_eq!(ratio, LaurentPoly::one());
}

#[test]
fn heat_scales_are_underconstrained() {
    let form = models::expected_reduction(ModelId::StandardHeat);
    assert_eq!(derived_scales(&form), Err(ScalesError::UnderConstrained));
    let dff = models::expected_reduction(ModelId::StandardHeatDff);
    assert_eq!(derived_scales(&dff), Err(ScalesError::UnderConstrained));
}

#[test]
fn json_document_shape() {
    let rep = models::derive(ModelId::MaxwellCattaneo, None);
    let doc = rep.to_json("maxwell-cattaneo");
    for key in [
        "model",
        "eliminated",
        "bindings",
        "normalizer",
        "weights",
        "scales",
    ] {
        assert!(doc.get(key).is_some(), "missing {key}");
    }
    assert_eq!(doc["normalizer"], Value::String("2".into()));
    assert_eq!(doc["weights"]["plus"], Value::String("1/2".into()));
    let failed = reduce(&models::stencil_for(ModelId::StandardHeat), None).to_json("standard-heat");
    assert_eq!(failed["status"], Value::String("failed".into()));
    assert!(failed["error"].is_string());
}

#[test]
fn tampered_weights_fail_replay() {
    for m in [ModelId::MaxwellCattaneo, ModelId::Symmetry] {
        let mut rep = golden_report(m);
        if let Ok(f) = rep.outcome.as_mut() {
            f.p_zero += rat(1, 1000);
        }
        assert!(!verify_report(&rep), "{m}");
    }
}

#[test]
fn unsolvable_constant_lag() {
    let mut st = models::stencil_for(ModelId::StandardHeat);
    st.add_at(GridOffset::new(-1, 0), LaurentPoly::one());
    st.add_at(GridOffset::new(0, 0), -LaurentPoly::one());
    let rep = reduce(&st, Some(rat(1, 2)));
    assert!(matches!(
        rep.form(),
        Err(ReductionError::UnsolvableConstraint { .. })
    ));
}

/// Explicit heat scheme with an extra `theta`-weighted implicit part never
/// reduces: the new-level neighbours cannot be removed by choosing steps.
#[test]
fn implicit_neighbours_are_unsolvable() {
    let d = LaurentPoly::symbol(SymbolId::Diffusivity);
    let mut st: Stencil = assemble(
        &SchemeSpec::new(vec![
            builtin_term(LaurentPoly::one(), "forward_euler_t").unwrap(),
            builtin_term(-&d, "central_xx").unwrap(),
        ])
        .unwrap(),
    );
    st.add_at(GridOffset::new(1, 1), poly("D*dx^-2"));
    st.add_at(GridOffset::new(1, -1), poly("D*dx^-2"));
    st.add_at(GridOffset::new(1, 0), poly("-2*D*dx^-2"));
    let rep = reduce(&st, Some(rat(1, 4)));
    assert!(rep.form().is_err());
}

proptest! {
    /// The forward-Euler heat scheme gives the (p, 1 - 2p, p) walk with
    /// dt D / dx^2 = p for every p in the positivity band.
    #[test]
    fn heat_family_over_band(denom in 2i64..=60, k in 1i64..=30) {
        let numer = 1 + (k - 1) % (denom / 2);
        let p = rat(numer, denom);
        let rep = models::derive(ModelId::StandardHeat, Some(p.clone()));
        let form = rep.form().unwrap();
        let one = BigRational::from_integer(1.into());
        prop_assert_eq!(form.weights(), [p.clone(), one - &p * rat(2, 1), p.clone()]);
        let dt = form.binding(Unknown::TimeStep).unwrap();
        prop_assert_eq!(dt * &poly("D*dx^-2"), LaurentPoly::constant(p));
        prop_assert!(verify_report(&rep));
    }

    /// Maxwell-Cattaneo under any closure p: dt = tau / (1 - p), and the
    /// walk's effective diffusivity p dx^2 / dt stays D.
    #[test]
    fn relaxation_family_keeps_diffusivity(denom in 3i64..=40, k in 1i64..=20) {
        let numer = 1 + (k - 1) % (denom / 2);
        let p = rat(numer, denom);
        let rep = models::derive(ModelId::MaxwellCattaneo, Some(p.clone()));
        let form = rep.form().unwrap();
        let dt = form.binding(Unknown::TimeStep).unwrap();
        let dx2 = form.binding(Unknown::SpaceStepSquared).unwrap();
        let expected_dt = poly("tau").scale(&(BigRational::from_integer(1.into()) / (BigRational::from_integer(1.into()) - &p)));
        prop_assert_eq!(dt, &expected_dt);
        let d_eff = (dx2 * &dt.inverse().unwrap()).scale(&p);
        prop_assert_eq!(d_eff, poly("D"));
    }
}
