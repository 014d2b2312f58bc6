//! Strang split-step integration with conservation monitoring.

mod orbit;
mod symmetry;
mod virial;

pub use orbit::{orbit_distance, OrbitFit};
pub use symmetry::{snap_velocity, symmetry_transform, Symmetry, Transformed};
pub use virial::{virial_diagnostics, VirialReport, Weight};

use num_complex::Complex64 as C;

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::model::Model;
use crate::par;
use crate::spectral::h1_norm;

#[derive(Clone, Debug)]
pub struct EvolutionState {
    pub t: f64,
    pub field: ComplexField,
}

impl EvolutionState {
    pub fn new(field: ComplexField) -> Self {
        Self { t: 0.0, field }
    }
    pub fn at(t: f64, field: ComplexField) -> Self {
        Self { t, field }
    }
}

/// Precomputed half-step kinetic phases for a fixed `dt`.
pub struct Propagator {
    model: Model,
    dt: f64,
    half: Vec<C>,
}

impl Propagator {
    pub fn new(model: &Model, dt: f64) -> Result<Self> {
        if !(dt != 0.0 && dt.is_finite()) {
            return Err(Error::Domain(format!("time step {dt} must be finite and nonzero")));
        }
        let k2 = model.spectral().k2_full();
        let half = k2.iter().map(|k| C::from_polar(1.0, -0.5 * k * dt)).collect();
        Ok(Self { model: model.clone(), dt, half })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn model(&self) -> &Model {
        &self.model
    }

    fn kinetic(&self, u: &mut ComplexField) {
        let grid = u.grid().clone();
        let mut spec = u.spectrum();
        par::for_each_mut(&mut spec, |k, c| *c *= self.half[k]);
        *u = ComplexField::from_spectrum(&grid, spec);
    }

    /// Half kinetic, full nonlinear phase rotation, half kinetic.
    pub fn step(&self, u: &mut ComplexField) {
        self.kinetic(u);
        let v = self.model.potential(u);
        let dt = self.dt;
        par::for_each_mut(u.values_mut(), |k, c| *c *= C::from_polar(1.0, dt * v[k]));
        self.kinetic(u);
    }
}

/// One Strang step; a non-finite result is reported as blow-up.
pub fn step_strang(model: &Model, state: &EvolutionState, dt: f64) -> Result<EvolutionState> {
    model.check_grid(&state.field)?;
    let prop = Propagator::new(model, dt)?;
    let mut u = state.field.clone();
    prop.step(&mut u);
    let t = state.t + dt;
    if !u.is_finite() {
        return Err(Error::BlowUp { t, max_amplitude: f64::INFINITY });
    }
    Ok(EvolutionState { t, field: u })
}

#[derive(Clone, Copy, Debug)]
pub struct ConservationRow {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub momentum: [f64; 2],
    pub h1_norm: f64,
}

#[derive(Clone, Debug, Default)]
pub struct ConservationLog {
    pub rows: Vec<ConservationRow>,
}

impl ConservationLog {
    pub fn record(&mut self, model: &Model, state: &EvolutionState) -> Result<ConservationRow> {
        let f = model.functionals(&state.field)?;
        let row = ConservationRow {
            t: state.t,
            mass: f.mass,
            energy: f.energy,
            momentum: f.momentum,
            h1_norm: h1_norm(&state.field),
        };
        self.rows.push(row);
        Ok(row)
    }

    pub fn baseline(&self) -> Option<&ConservationRow> {
        self.rows.first()
    }

    fn max_drift(&self, f: impl Fn(&ConservationRow) -> f64, floor: f64) -> f64 {
        let Some(b) = self.baseline() else { return 0.0 };
        let scale = f(b).abs().max(floor);
        if scale == 0.0 {
            return 0.0;
        }
        self.rows.iter().map(|r| (f(r) - f(b)).abs() / scale).fold(0.0, f64::max)
    }

    /// Largest `|M(t) - M_0| / M_0`.
    pub fn mass_drift(&self) -> f64 {
        self.max_drift(|r| r.mass, 0.0)
    }
    /// Largest `|E(t) - E_0| / |E_0|`; the scale is floored at `1e-12 M_0`.
    pub fn energy_drift(&self) -> f64 {
        let floor = self.baseline().map(|b| 1e-12 * b.mass).unwrap_or(0.0);
        self.max_drift(|r| r.energy, floor)
    }
    /// Largest `|P(t) - P_0|` relative to `max(|P_0|, M_0)`.
    pub fn momentum_drift(&self) -> f64 {
        let Some(b) = self.baseline() else { return 0.0 };
        let scale = b.momentum[0].hypot(b.momentum[1]).max(b.mass);
        if scale == 0.0 {
            return 0.0;
        }
        self.rows
            .iter()
            .map(|r| (r.momentum[0] - b.momentum[0]).hypot(r.momentum[1] - b.momentum[1]) / scale)
            .fold(0.0, f64::max)
    }
    pub fn max_h1(&self) -> f64 {
        self.rows.iter().map(|r| r.h1_norm).fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EvolveOptions {
    /// Log a conservation row every this many steps.
    pub monitor_every: usize,
    /// Keep a snapshot every this many steps.
    pub snapshot_every: Option<usize>,
    /// Halt when `max |phi|` exceeds this multiple of its initial value.
    pub blowup_factor: f64,
    /// Relative mass drift treated as an integrator failure.
    pub mass_health: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { monitor_every: 10, snapshot_every: None, blowup_factor: 10.0, mass_health: 1e-8 }
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub state: EvolutionState,
    pub log: ConservationLog,
    pub snapshots: Vec<EvolutionState>,
}

/// Number of steps of size `|dt|` covering `duration`.
pub fn step_count(duration: f64, dt: f64) -> Result<usize> {
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(Error::Domain(format!("duration {duration} must be nonnegative")));
    }
    if !(dt != 0.0 && dt.is_finite()) {
        return Err(Error::Domain(format!("time step {dt} must be finite and nonzero")));
    }
    let n = (duration / dt.abs()).round();
    if (n * dt.abs() - duration).abs() > 1e-9 * duration.max(1.0) {
        return Err(Error::Domain(format!("duration {duration} is not a multiple of |dt| = {}", dt.abs())));
    }
    Ok(n as usize)
}

/// Integrate for `duration` with signed step `dt`, calling `observe` at the
/// start and after every `monitor_every` steps.
pub fn evolve_observed(
    model: &Model,
    state: EvolutionState,
    duration: f64,
    dt: f64,
    opts: &EvolveOptions,
    mut observe: impl FnMut(&EvolutionState) -> Result<()>,
) -> Result<Trajectory> {
    model.check_grid(&state.field)?;
    if opts.monitor_every == 0 {
        return Err(Error::Domain("monitor_every must be at least 1".into()));
    }
    let n = step_count(duration, dt)?;
    let prop = Propagator::new(model, dt)?;
    let t0 = state.t;
    let amp0 = state.field.max_abs();
    let mut log = ConservationLog::default();
    let mut snapshots = Vec::new();
    log.record(model, &state)?;
    observe(&state)?;
    if opts.snapshot_every.is_some() {
        snapshots.push(state.clone());
    }
    let mut u = state.field;
    for s in 1..=n {
        prop.step(&mut u);
        let t = t0 + s as f64 * dt;
        let amp = u.max_abs();
        if !amp.is_finite() || (amp0 > 0.0 && amp > opts.blowup_factor * amp0) {
            return Err(Error::BlowUp { t, max_amplitude: amp });
        }
        if s % opts.monitor_every == 0 || s == n {
            let st = EvolutionState { t, field: u };
            let row = log.record(model, &st)?;
            let m0 = log.rows[0].mass;
            if m0 > 0.0 && (row.mass - m0).abs() / m0 > opts.mass_health {
                return Err(Error::IntegratorHealth { t, drift: (row.mass - m0).abs() / m0 });
            }
            observe(&st)?;
            u = st.field;
        }
        if let Some(every) = opts.snapshot_every {
            if every > 0 && (s % every == 0 || s == n) {
                snapshots.push(EvolutionState { t, field: u.clone() });
            }
        }
    }
    let state = EvolutionState { t: t0 + n as f64 * dt, field: u };
    Ok(Trajectory { state, log, snapshots })
}

pub fn evolve(model: &Model, state: EvolutionState, duration: f64, dt: f64, opts: &EvolveOptions) -> Result<Trajectory> {
    evolve_observed(model, state, duration, dt, opts, |_| Ok(()))
}

/// Self-convergence ratio `||u_dt - u_{dt/2}|| / ||u_{dt/2} - u_{dt/4}||`
/// at time `duration`; close to 4 for a second-order scheme.
pub fn richardson_ratio(model: &Model, u0: &ComplexField, duration: f64, dt: f64) -> Result<f64> {
    let opts = EvolveOptions { monitor_every: usize::MAX, ..Default::default() };
    let run = |h: f64| -> Result<ComplexField> {
        Ok(evolve(model, EvolutionState::new(u0.clone()), duration, h, &opts)?.state.field)
    };
    let (a, b, c) = (run(dt)?, run(0.5 * dt)?, run(0.25 * dt)?);
    Ok(a.sub(&b).mass().sqrt() / b.sub(&c).mass().sqrt())
}
