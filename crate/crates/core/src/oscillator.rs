//! The wave equation `u_tt = c^2 u_xx` discretized in space: a chain of
//! masses `M` joined by springs `k = M c^2 / dx^2`, integrated with a
//! kick-drift-kick leapfrog.

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainBoundary {
    Periodic,
    /// `u_0 = u_{N-1} = 0`.
    FixedEnds,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OscillatorError {
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("chain needs at least 3 sites, got {0}")]
    TooFewSites(usize),
    #[error("state has {got} sites, chain has {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("fixed-end chain has a displaced or moving end site")]
    UnclampedEnds,
    #[error("dt = {dt} is not below the stability limit dx/c = {limit}")]
    UnstableStep { dt: f64, limit: f64 },
    #[error("mode {0} is not a valid nonzero mode of this chain")]
    InvalidMode(usize),
    #[error("mode projection crossed zero fewer than twice")]
    NoOscillation,
    #[error("csv output failed: {0}")]
    Csv(String),
}

impl From<csv::Error> for OscillatorError {
    fn from(e: csv::Error) -> OscillatorError {
        OscillatorError::Csv(e.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChainParams {
    c: f64,
    dx: f64,
    mass: f64,
    sites: usize,
    boundary: ChainBoundary,
}

impl ChainParams {
    pub fn new(
        c: f64,
        dx: f64,
        mass: f64,
        sites: usize,
        boundary: ChainBoundary,
    ) -> Result<ChainParams, OscillatorError> {
        for (name, value) in [("c", c), ("dx", dx), ("M", mass)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(OscillatorError::NonPositive { name, value });
            }
        }
        if sites < 3 {
            return Err(OscillatorError::TooFewSites(sites));
        }
        Ok(ChainParams {
            c,
            dx,
            mass,
            sites,
            boundary,
        })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn boundary(&self) -> ChainBoundary {
        self.boundary
    }

    /// `k = M c^2 / dx^2`.
    pub fn spring(&self) -> f64 {
        self.mass * self.c * self.c / (self.dx * self.dx)
    }

    /// Largest stable leapfrog step, `dx / c`.
    pub fn step_limit(&self) -> f64 {
        self.dx / self.c
    }

    /// Number of spring bonds.
    fn bonds(&self) -> usize {
        match self.boundary {
            ChainBoundary::Periodic => self.sites,
            ChainBoundary::FixedEnds => self.sites - 1,
        }
    }

    /// Normal-mode shape `q`: `sin(2 pi q m / N)` when periodic,
    /// `sin(pi q m / (N - 1))` with fixed ends.
    pub fn mode_shape(&self, q: usize) -> Result<Vec<f64>, OscillatorError> {
        let n = self.sites;
        let k = match self.boundary {
            ChainBoundary::Periodic if q >= 1 && 2 * q < n => 2.0 * PI * q as f64 / n as f64,
            ChainBoundary::FixedEnds if q >= 1 && q < n - 1 => PI * q as f64 / (n - 1) as f64,
            _ => return Err(OscillatorError::InvalidMode(q)),
        };
        let mut shape: Vec<f64> = (0..n).map(|m| (k * m as f64).sin()).collect();
        if self.boundary == ChainBoundary::FixedEnds {
            shape[n - 1] = 0.0;
        }
        Ok(shape)
    }

    /// Exact angular frequency of mode `q` of the semi-discrete chain.
    pub fn omega(&self, q: usize) -> Result<f64, OscillatorError> {
        self.mode_shape(q)?;
        let half_k = match self.boundary {
            ChainBoundary::Periodic => PI * q as f64 / self.sites as f64,
            ChainBoundary::FixedEnds => PI * q as f64 / (2 * (self.sites - 1)) as f64,
        };
        Ok(2.0 * self.c / self.dx * half_k.sin().abs())
    }

    /// Continuum wavenumber of mode `q`.
    pub fn wavenumber(&self, q: usize) -> Result<f64, OscillatorError> {
        self.mode_shape(q)?;
        let length = match self.boundary {
            ChainBoundary::Periodic => self.sites as f64 * self.dx,
            ChainBoundary::FixedEnds => 2.0 * (self.sites - 1) as f64 * self.dx,
        };
        Ok(2.0 * PI * q as f64 / length)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainState {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub time: f64,
}

impl ChainState {
    pub fn new(u: Vec<f64>, v: Vec<f64>) -> Result<ChainState, OscillatorError> {
        if u.len() != v.len() {
            return Err(OscillatorError::LengthMismatch {
                expected: u.len(),
                got: v.len(),
            });
        }
        Ok(ChainState { u, v, time: 0.0 })
    }

    pub fn at_rest(u: Vec<f64>) -> ChainState {
        let v = vec![0.0; u.len()];
        ChainState { u, v, time: 0.0 }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// Velocities negated; integrating the result forward retraces the path.
    pub fn reversed(&self) -> ChainState {
        ChainState {
            u: self.u.clone(),
            v: self.v.iter().map(|v| -v).collect(),
            time: self.time,
        }
    }

    /// Appends `step,time,site,u,v` rows.
    pub fn write_rows<W: Write>(
        &self,
        step: u64,
        out: &mut csv::Writer<W>,
    ) -> Result<(), OscillatorError> {
        for (site, (u, v)) in self.u.iter().zip(&self.v).enumerate() {
            out.serialize(TrajectoryRow {
                step,
                time: self.time,
                site,
                u: *u,
                v: *v,
            })?;
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct TrajectoryRow {
    step: u64,
    time: f64,
    site: usize,
    u: f64,
    v: f64,
}

fn check_state(state: &ChainState, params: &ChainParams) -> Result<(), OscillatorError> {
    let n = params.sites;
    if state.u.len() != n || state.v.len() != n {
        return Err(OscillatorError::LengthMismatch {
            expected: n,
            got: state.u.len().min(state.v.len()),
        });
    }
    if params.boundary == ChainBoundary::FixedEnds
        && [state.u[0], state.u[n - 1], state.v[0], state.v[n - 1]]
            .iter()
            .any(|x| *x != 0.0)
    {
        return Err(OscillatorError::UnclampedEnds);
    }
    Ok(())
}

fn accelerations_into(u: &[f64], params: &ChainParams, out: &mut [f64]) {
    let n = u.len();
    let w2 = params.c * params.c / (params.dx * params.dx);
    match params.boundary {
        ChainBoundary::Periodic => {
            for m in 0..n {
                out[m] = w2 * (u[(m + 1) % n] - 2.0 * u[m] + u[(m + n - 1) % n]);
            }
        }
        ChainBoundary::FixedEnds => {
            out[0] = 0.0;
            out[n - 1] = 0.0;
            for m in 1..n - 1 {
                out[m] = w2 * (u[m + 1] - 2.0 * u[m] + u[m - 1]);
            }
        }
    }
}

/// `a_m = (c^2/dx^2)(u_{m+1} - 2u_m + u_{m-1})`; clamped ends do not move.
pub fn accelerations(state: &ChainState, params: &ChainParams) -> Vec<f64> {
    let mut out = vec![0.0; state.u.len()];
    accelerations_into(&state.u, params, &mut out);
    out
}

/// Advances `steps` kick-drift-kick leapfrog steps of size `dt`.
pub fn integrate(
    state: &ChainState,
    params: &ChainParams,
    dt: f64,
    steps: u64,
) -> Result<ChainState, OscillatorError> {
    let mut s = state.clone();
    integrate_with(&mut s, params, dt, steps, |_, _| {})?;
    Ok(s)
}

/// [`integrate`] in place, calling `observe(step, state)` after every step.
pub fn integrate_with<F>(
    state: &mut ChainState,
    params: &ChainParams,
    dt: f64,
    steps: u64,
    mut observe: F,
) -> Result<(), OscillatorError>
where
    F: FnMut(u64, &ChainState),
{
    check_state(state, params)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(OscillatorError::NonPositive {
            name: "dt",
            value: dt,
        });
    }
    if dt >= params.step_limit() {
        return Err(OscillatorError::UnstableStep {
            dt,
            limit: params.step_limit(),
        });
    }
    let n = state.u.len();
    let h = 0.5 * dt;
    let start = state.time;
    let mut a = vec![0.0; n];
    accelerations_into(&state.u, params, &mut a);
    for step in 1..=steps {
        for ((u, v), a) in state.u.iter_mut().zip(&mut state.v).zip(&a) {
            *v += h * a;
            *u += dt * *v;
        }
        accelerations_into(&state.u, params, &mut a);
        for (v, a) in state.v.iter_mut().zip(&a) {
            *v += h * a;
        }
        state.time = start + step as f64 * dt;
        observe(step, state);
    }
    Ok(())
}

fn kinetic(state: &ChainState, params: &ChainParams) -> f64 {
    0.5 * params.mass * state.v.iter().map(|v| v * v).sum::<f64>()
}

fn potential(state: &ChainState, params: &ChainParams) -> f64 {
    let n = state.u.len();
    let k = params.spring();
    (0..params.bonds())
        .map(|m| {
            let d = state.u[(m + 1) % n] - state.u[m];
            0.5 * k * d * d
        })
        .sum()
}

/// `sum M v^2 / 2 + sum k (u_{m+1} - u_m)^2 / 2`.
pub fn energy(state: &ChainState, params: &ChainParams) -> f64 {
    kinetic(state, params) + potential(state, params)
}

/// Energy with the leapfrog's velocity correction,
/// `sum M (v^2 - (dt/2)^2 a^2) / 2 + sum k (u_{m+1} - u_m)^2 / 2`.
/// The kick-drift-kick update conserves it exactly for a linear chain, so
/// any drift is round-off.
pub fn staggered_energy(state: &ChainState, params: &ChainParams, dt: f64) -> f64 {
    let a = accelerations(state, params);
    let h2 = 0.25 * dt * dt;
    let k: f64 = state
        .v
        .iter()
        .zip(&a)
        .map(|(v, a)| v * v - h2 * a * a)
        .sum();
    0.5 * params.mass * k + potential(state, params)
}

pub fn momentum(state: &ChainState, params: &ChainParams) -> f64 {
    params.mass * state.v.iter().sum::<f64>()
}

/// Relative energy behaviour over an integration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyReport {
    pub initial: f64,
    /// Largest `|E_s(t) - E_s(0)| / E_s(0)` of [`staggered_energy`].
    pub drift: f64,
    /// Largest `|E(t) - E(0)| / E(0)` of [`energy`].
    pub oscillation: f64,
}

pub fn energy_report(
    state: &ChainState,
    params: &ChainParams,
    dt: f64,
    steps: u64,
) -> Result<EnergyReport, OscillatorError> {
    let e0 = energy(state, params);
    let s0 = staggered_energy(state, params, dt);
    let mut drift: f64 = 0.0;
    let mut oscillation: f64 = 0.0;
    let mut s = state.clone();
    integrate_with(&mut s, params, dt, steps, |_, st| {
        drift = drift.max(((staggered_energy(st, params, dt) - s0) / s0).abs());
        oscillation = oscillation.max(((energy(st, params) - e0) / e0).abs());
    })?;
    Ok(EnergyReport {
        initial: e0,
        drift,
        oscillation,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DispersionRow {
    pub mode: usize,
    pub omega_measured: f64,
    pub omega_theory: f64,
    pub rel_err: f64,
}

/// Releases mode `q` from rest and measures its angular frequency from the
/// zero crossings of its modal amplitude over `periods` periods.
pub fn measure_dispersion(
    params: &ChainParams,
    q: usize,
    dt: f64,
    periods: f64,
) -> Result<DispersionRow, OscillatorError> {
    let shape = params.mode_shape(q)?;
    let omega_theory = params.omega(q)?;
    let steps = (periods * 2.0 * PI / omega_theory / dt).ceil() as u64;
    let norm: f64 = shape.iter().map(|s| s * s).sum();
    let project = |u: &[f64]| u.iter().zip(&shape).map(|(a, b)| a * b).sum::<f64>() / norm;
    let mut state = ChainState::at_rest(shape.clone());
    let mut prev = (state.time, project(&state.u));
    let mut crossings = Vec::new();
    integrate_with(&mut state, params, dt, steps, |_, st| {
        let cur = (st.time, project(&st.u));
        if prev.1.signum() != cur.1.signum() && cur.1 != 0.0 {
            crossings.push(prev.0 + (cur.0 - prev.0) * prev.1 / (prev.1 - cur.1));
        }
        prev = cur;
    })?;
    if crossings.len() < 2 {
        return Err(OscillatorError::NoOscillation);
    }
    let span = crossings[crossings.len() - 1] - crossings[0];
    let omega_measured = PI * (crossings.len() - 1) as f64 / span;
    Ok(DispersionRow {
        mode: q,
        omega_measured,
        omega_theory,
        rel_err: ((omega_measured - omega_theory) / omega_theory).abs(),
    })
}

pub fn write_dispersion_csv<W: Write>(
    rows: &[DispersionRow],
    out: W,
) -> Result<(), OscillatorError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| OscillatorError::Csv(e.to_string()))?;
    Ok(())
}
