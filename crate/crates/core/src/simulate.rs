//! Iteration of the reduced random walk
//! `u_m^{k+1} = p_plus u_{m+1}^k + p_zero u_m^k + p_minus u_{m-1}^k`
//! on a finite lattice, in floating point or exact rational arithmetic, and
//! a continuum-limit convergence study against the heat kernel.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;
use std::io::Write;

use num_rational::BigRational;
use num_traits::{Num, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::models::{self, ModelId, ModelParams, ParamsError};
use crate::rational::{rat, to_f64};
use crate::reduction::{RandomWalkForm, ReductionError, Unknown};

/// Largest lattice the convergence study will allocate.
pub const MAX_SITES: usize = 1 << 16;

/// Scalar type a lattice can be iterated in.
pub trait Sample: Num + Clone + PartialOrd + fmt::Debug + fmt::Display + Send + Sync {
    fn from_rational(r: &BigRational) -> Self;
    fn to_f64(&self) -> f64;
}

impl Sample for f64 {
    fn from_rational(r: &BigRational) -> f64 {
        to_f64(r)
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Sample for BigRational {
    fn from_rational(r: &BigRational) -> BigRational {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("lattice needs at least 3 sites, got {0}")]
    TooFewSites(usize),
    #[error("lattice of {0} sites exceeds the limit of {MAX_SITES}")]
    LatticeTooLarge(usize),
    #[error("value at site {site} is negative or not finite: {value}")]
    InvalidValue { site: usize, value: String },
    #[error("Dirichlet boundary values must be nonnegative")]
    NegativeBoundary,
    #[error("{name} must be positive and finite, got {value}")]
    NonPositiveStep { name: &'static str, value: f64 },
    #[error("invalid walk weights: {0}")]
    InvalidWeights(ReductionError),
    #[error("reduction failed: {0}")]
    Reduction(ReductionError),
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error("the reduced form leaves dt unbound")]
    UnboundTimeStep,
    #[error("the model fixes dx itself; a space step may not be supplied")]
    SpaceStepFixed,
    #[error("the model links dt to dx; a space step must be supplied")]
    SpaceStepRequired,
    #[error("convergence study needs at least 2 levels, got {0}")]
    TooFewLevels(usize),
    #[error("L1 error did not decrease at level {level}: {previous:.3e} -> {current:.3e}")]
    NonConvergent {
        level: usize,
        previous: f64,
        current: f64,
        table: Box<ConvergenceTable>,
    },
    #[error("csv output failed: {0}")]
    Csv(String),
}

impl From<csv::Error> for SimError {
    fn from(e: csv::Error) -> SimError {
        SimError::Csv(e.to_string())
    }
}

/// Walk weights, validated exactly and converted to the sample type.
#[derive(Clone, Debug, PartialEq)]
pub struct Weights<T> {
    pub plus: T,
    pub zero: T,
    pub minus: T,
    exact: [BigRational; 3],
}

impl<T: Sample> Weights<T> {
    pub fn from_form(form: &RandomWalkForm) -> Result<Weights<T>, SimError> {
        form.check_invariants().map_err(SimError::InvalidWeights)?;
        Ok(Weights {
            plus: T::from_rational(&form.p_plus),
            zero: T::from_rational(&form.p_zero),
            minus: T::from_rational(&form.p_minus),
            exact: form.weights(),
        })
    }

    /// The symmetric walk `(p, 1 - 2p, p)`.
    pub fn symmetric(p: BigRational) -> Result<Weights<T>, SimError> {
        let zero = BigRational::from_integer(1.into()) - &p * rat(2, 1);
        Weights::from_form(&RandomWalkForm {
            p_plus: p.clone(),
            p_zero: zero,
            p_minus: p,
            constraints: Vec::new(),
            length_scale_sq: None,
        })
    }

    pub fn exact(&self) -> &[BigRational; 3] {
        &self.exact
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Boundary<T> {
    Periodic,
    /// End sites are held at fixed nonnegative values.
    Dirichlet {
        left: T,
        right: T,
    },
}

/// Nonnegative lattice values with spacing and boundary policy.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField<T> {
    values: Vec<T>,
    dx: f64,
    origin: f64,
    boundary: Boundary<T>,
}

impl<T: Sample> GridField<T> {
    /// Under a Dirichlet boundary the end sites are overwritten with the
    /// boundary values.
    pub fn new(
        mut values: Vec<T>,
        dx: f64,
        boundary: Boundary<T>,
    ) -> Result<GridField<T>, SimError> {
        if values.len() < 3 {
            return Err(SimError::TooFewSites(values.len()));
        }
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(SimError::NonPositiveStep {
                name: "dx",
                value: dx,
            });
        }
        let zero = T::zero();
        for (site, v) in values.iter().enumerate() {
            if v.partial_cmp(&zero).is_none_or(Ordering::is_lt) || !v.to_f64().is_finite() {
                return Err(SimError::InvalidValue {
                    site,
                    value: v.to_string(),
                });
            }
        }
        if let Boundary::Dirichlet { left, right } = &boundary {
            if !(*left >= zero && *right >= zero) {
                return Err(SimError::NegativeBoundary);
            }
            let n = values.len();
            values[0] = left.clone();
            values[n - 1] = right.clone();
        }
        Ok(GridField {
            values,
            dx,
            origin: 0.0,
            boundary,
        })
    }

    /// A single site holding `height` on an otherwise zero lattice.
    pub fn delta(
        sites: usize,
        centre: usize,
        height: T,
        dx: f64,
        boundary: Boundary<T>,
    ) -> Result<GridField<T>, SimError> {
        let mut values = vec![T::zero(); sites];
        if let Some(v) = values.get_mut(centre) {
            *v = height;
        }
        GridField::new(values, dx, boundary)
    }

    /// Sets the coordinate of site 0; site `m` sits at `origin + m * dx`.
    pub fn with_origin(mut self, origin: f64) -> GridField<T> {
        self.origin = origin;
        self
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn x(&self, site: usize) -> f64 {
        self.origin + site as f64 * self.dx
    }

    pub fn boundary(&self) -> &Boundary<T> {
        &self.boundary
    }

    pub fn sum(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, v| acc + v.clone())
    }

    pub fn max(&self) -> T {
        self.values.iter().skip(1).fold(
            self.values[0].clone(),
            |m, v| if *v > m { v.clone() } else { m },
        )
    }

    pub fn min(&self) -> T {
        self.values.iter().skip(1).fold(
            self.values[0].clone(),
            |m, v| if *v < m { v.clone() } else { m },
        )
    }

    /// One synchronous update of every site.
    pub fn step(&self, w: &Weights<T>) -> GridField<T> {
        let v = &self.values;
        let n = v.len();
        let update = |l: usize, m: usize, r: usize| {
            w.plus.clone() * v[r].clone()
                + w.zero.clone() * v[m].clone()
                + w.minus.clone() * v[l].clone()
        };
        let values = match &self.boundary {
            Boundary::Periodic => (0..n)
                .map(|m| update((m + n - 1) % n, m, (m + 1) % n))
                .collect(),
            Boundary::Dirichlet { left, right } => {
                let mut out = Vec::with_capacity(n);
                out.push(left.clone());
                out.extend((1..n - 1).map(|m| update(m - 1, m, m + 1)));
                out.push(right.clone());
                out
            }
        };
        GridField {
            values,
            dx: self.dx,
            origin: self.origin,
            boundary: self.boundary.clone(),
        }
    }
}

/// A lattice field being advanced by a validated walk.
#[derive(Clone, Debug)]
pub struct WalkRun<T> {
    weights: Weights<T>,
    field: GridField<T>,
    dt: f64,
    steps_taken: u64,
    mass_trace: Vec<T>,
}

impl<T: Sample> WalkRun<T> {
    pub fn new(weights: Weights<T>, field: GridField<T>, dt: f64) -> Result<WalkRun<T>, SimError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(SimError::NonPositiveStep {
                name: "dt",
                value: dt,
            });
        }
        let mut run = WalkRun {
            weights,
            field,
            dt,
            steps_taken: 0,
            mass_trace: Vec::new(),
        };
        run.record_mass();
        Ok(run)
    }

    fn record_mass(&mut self) {
        if self.field.boundary == Boundary::Periodic {
            self.mass_trace.push(self.field.sum());
        }
    }

    pub fn step(&mut self) {
        self.field = self.field.step(&self.weights);
        self.steps_taken += 1;
        self.record_mass();
    }

    pub fn run(&mut self, n: u64) {
        for _ in 0..n {
            self.step();
        }
    }

    pub fn weights(&self) -> &Weights<T> {
        &self.weights
    }

    pub fn field(&self) -> &GridField<T> {
        &self.field
    }

    pub fn into_field(self) -> GridField<T> {
        self.field
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps_taken(&self) -> u64 {
        self.steps_taken
    }

    pub fn time(&self) -> f64 {
        self.steps_taken as f64 * self.dt
    }

    /// Total mass after each step, starting with the initial field; empty
    /// unless the boundary is periodic.
    pub fn mass_trace(&self) -> &[T] {
        &self.mass_trace
    }

    /// Appends `step,site,x,value` rows for the current field.
    pub fn write_rows<W: Write>(&self, out: &mut csv::Writer<W>) -> Result<(), SimError> {
        for (site, v) in self.field.values.iter().enumerate() {
            out.serialize(FieldRow {
                step: self.steps_taken,
                site,
                x: self.field.x(site),
                value: v.to_string(),
            })?;
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct FieldRow {
    step: u64,
    site: usize,
    x: f64,
    value: String,
}

/// Fundamental solution of `u_t = D u_xx` with unit mass.
pub fn reference_heat(x: f64, t: f64, diffusivity: f64) -> f64 {
    let s = 4.0 * diffusivity * t;
    (-x * x / s).exp() / (PI * s).sqrt()
}

/// Numeric step sizes of a reduced walk.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StepSizes {
    pub dx: f64,
    pub dt: f64,
}

/// Evaluates the form's step-size bindings. `dx` must be given exactly when
/// the form links `dt` to `dx` without fixing `dx`.
pub fn step_sizes(
    form: &RandomWalkForm,
    params: &ModelParams,
    dx: Option<f64>,
) -> Result<StepSizes, SimError> {
    let d = to_f64(&params.diffusivity);
    let tau = params.tau.as_ref().map(to_f64).unwrap_or(f64::NAN);
    let dx = match (form.binding(Unknown::SpaceStepSquared), dx) {
        (Some(_), Some(_)) => return Err(SimError::SpaceStepFixed),
        (Some(dx2), None) => dx2.eval_f64([d, tau, f64::NAN, f64::NAN]).sqrt(),
        (None, Some(dx)) => dx,
        (None, None) => return Err(SimError::SpaceStepRequired),
    };
    let dt_binding = form
        .binding(Unknown::TimeStep)
        .ok_or(SimError::UnboundTimeStep)?;
    let dt = dt_binding.eval_f64([d, tau, f64::NAN, dx]);
    for (name, value) in [("dx", dx), ("dt", dt)] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(SimError::NonPositiveStep { name, value });
        }
    }
    Ok(StepSizes { dx, dt })
}

/// What is refined between convergence levels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Refinement {
    /// `dx` halves; `dt` follows from the model's `dt(dx)` binding.
    SpaceStep,
    /// `tau` halves; both step sizes follow from it.
    RelaxTime,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub level: usize,
    pub dx: f64,
    pub dt: f64,
    pub steps: u64,
    pub sites: usize,
    pub time: f64,
    pub l1_error: f64,
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub label: String,
    pub refinement: Refinement,
    pub target_time: f64,
    pub rows: Vec<ConvergenceRow>,
}

#[derive(Serialize)]
struct ConvergenceCsvRow {
    level: usize,
    dx: f64,
    dt: f64,
    l1_error: f64,
    ratio: Option<f64>,
}

impl ConvergenceTable {
    /// Writes `level,dx,dt,l1_error,ratio`; the first ratio is empty.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), SimError> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(ConvergenceCsvRow {
                level: r.level,
                dx: r.dx,
                dt: r.dt,
                l1_error: r.l1_error,
                ratio: r.ratio,
            })?;
        }
        w.flush().map_err(|e| SimError::Csv(e.to_string()))?;
        Ok(())
    }
}

/// L1 distance between a unit-mass delta walked for `n` steps and the heat
/// kernel at `t = n dt`.
///
/// The lattice spans twelve kernel widths each side. When `p_zero = 0` the
/// walk only populates one parity sublattice, so the field is smoothed with
/// the `(1, 2, 1)/4` filter before comparison.
fn level_error(
    weights: &Weights<f64>,
    sizes: StepSizes,
    target: f64,
    d: f64,
) -> Result<ConvergenceRow, SimError> {
    let StepSizes { dx, dt } = sizes;
    let steps = (target / dt).round().max(1.0) as u64;
    let time = steps as f64 * dt;
    let half = ((12.0 * (2.0 * d * time).sqrt() / dx).ceil() as usize).max(2);
    let sites = 2 * half + 1;
    if sites > MAX_SITES {
        return Err(SimError::LatticeTooLarge(sites));
    }
    let field = GridField::delta(sites, half, 1.0 / dx, dx, Boundary::Periodic)?
        .with_origin(-(half as f64) * dx);
    let mut run = WalkRun::new(weights.clone(), field, dt)?;
    run.run(steps);
    let field = run.into_field();
    let u = field.values();
    let smooth = weights.exact()[1].is_zero();
    let n = u.len();
    let l1_error = (0..n)
        .map(|m| {
            let v = if smooth {
                (u[(m + n - 1) % n] + 2.0 * u[m] + u[(m + 1) % n]) / 4.0
            } else {
                u[m]
            };
            (v - reference_heat(field.x(m), time, d)).abs() * dx
        })
        .sum();
    Ok(ConvergenceRow {
        level: 0,
        dx,
        dt,
        steps,
        sites,
        time,
        l1_error,
        ratio: None,
    })
}

/// Refines a model towards its continuum limit and measures the L1 error
/// against [`reference_heat`] at a fixed time. `p` overrides the model's
/// default closure.
pub fn convergence_study(
    model: ModelId,
    params: &ModelParams,
    p: Option<BigRational>,
    levels: usize,
) -> Result<ConvergenceTable, SimError> {
    params.validate(model)?;
    let form = models::derive(model, p)
        .into_form()
        .map_err(SimError::Reduction)?;
    convergence_study_form(model.name(), &form, params, levels)
}

/// [`convergence_study`] for an already reduced walk.
///
/// Forms whose `dt` binding depends on `dx` are refined by halving `dx`
/// from `sqrt(D)/10` and compared at `T = 1`. Forms that fix both step
/// sizes in terms of `tau` are refined by halving `tau`, compared at
/// `T = max(100 dt_0, 25 dx_0^2 / D)`.
pub fn convergence_study_form(
    label: &str,
    form: &RandomWalkForm,
    params: &ModelParams,
    levels: usize,
) -> Result<ConvergenceTable, SimError> {
    if levels < 2 {
        return Err(SimError::TooFewLevels(levels));
    }
    let weights = Weights::<f64>::from_form(form)?;
    let d = to_f64(&params.diffusivity);
    let fixed = form.binding(Unknown::SpaceStepSquared).is_some();
    let (refinement, target) = if fixed {
        let s0 = step_sizes(form, params, None)?;
        (
            Refinement::RelaxTime,
            (100.0 * s0.dt).max(25.0 * s0.dx * s0.dx / d),
        )
    } else {
        (Refinement::SpaceStep, 1.0)
    };
    let table = |rows| ConvergenceTable {
        label: label.to_string(),
        refinement,
        target_time: target,
        rows,
    };
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(levels);
    for level in 0..levels {
        let factor = 0.5f64.powi(level as i32);
        let sizes = match (refinement, &params.tau) {
            (Refinement::SpaceStep, _) => step_sizes(form, params, Some(d.sqrt() / 10.0 * factor))?,
            (Refinement::RelaxTime, Some(tau)) => {
                let tau = tau * rat(1, 1 << level);
                step_sizes(
                    form,
                    &ModelParams::new(params.diffusivity.clone(), Some(tau)),
                    None,
                )?
            }
            (Refinement::RelaxTime, None) => {
                return Err(SimError::Params(ParamsError::TauRequired))
            }
        };
        let mut row = level_error(&weights, sizes, target, d)?;
        row.level = level;
        if let Some(prev) = rows.last() {
            row.ratio = Some(prev.l1_error / row.l1_error);
            if row.l1_error.partial_cmp(&prev.l1_error) != Some(Ordering::Less) {
                let (previous, current) = (prev.l1_error, row.l1_error);
                rows.push(row);
                return Err(SimError::NonConvergent {
                    level,
                    previous,
                    current,
                    table: Box::new(table(rows)),
                });
            }
        }
        rows.push(row);
    }
    Ok(table(rows))
}

/// Effective diffusivity `p_plus dx^2 / dt` of a walk.
pub fn effective_diffusivity(weights: &Weights<f64>, sizes: StepSizes) -> f64 {
    weights.plus * sizes.dx * sizes.dx / sizes.dt
}
