//! Multi-soliton ansatz, backward construction from a late anchor time, and
//! the modulation and localized diagnostics along the way.

mod ansatz;
mod construct;
mod cutoff;

pub use ansatz::{localized_quantities, quadratic_form_p, Ansatz, Localized, Modulation, ModulationFit, SolitonProfile};
pub use construct::{backward_construct, fit_decay_rate, LocalRow, TubeReport, TubeRow};
pub use cutoff::{Cutoff, Partition};

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::evolution::snap_velocity;
use crate::grid::Grid2D;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolitonParams {
    pub omega: f64,
    pub x0: [f64; 2],
    pub v: [f64; 2],
    pub gamma: f64,
}

#[derive(Clone, Debug)]
pub struct MultiSolitonConfig {
    pub solitons: Vec<SolitonParams>,
    /// Anchor time `T_n`.
    pub tn: f64,
    /// Cutoff width `L`; `None` takes a quarter of the smallest distance
    /// between adjacent centers at `t = 0`.
    pub l_cutoff: Option<f64>,
    pub p: f64,
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub dt: f64,
    /// Steps between logged rows of the backward run.
    pub monitor_every: usize,
    /// Largest `H^1` distance to the ansatz accepted by the modulation fit.
    pub alpha1: f64,
}

impl MultiSolitonConfig {
    /// Two solitons at `omega = 0.2` leaving `(-+4, 0)` with `v = -+(1, 0)`
    /// on a `40 pi x 64` box, anchored at `T_n = 30`.
    pub fn reference() -> Self {
        let s = |x: f64, v: f64| SolitonParams { omega: 0.2, x0: [x, 0.0], v: [v, 0.0], gamma: 0.0 };
        Self {
            solitons: vec![s(-4.0, -1.0), s(4.0, 1.0)],
            tn: 30.0,
            l_cutoff: None,
            p: 2.0,
            nx: 512,
            ny: 256,
            lx: 40.0 * PI,
            ly: 64.0,
            dt: 1e-2,
            monitor_every: 50,
            alpha1: 0.5,
        }
    }

    pub fn grid(&self) -> Result<Grid2D> {
        Grid2D::new(self.nx, self.ny, self.lx, self.ly)
    }

    pub fn k(&self) -> usize {
        self.solitons.len()
    }

    /// First velocity components in soliton order.
    pub fn v1(&self) -> Vec<f64> {
        self.solitons.iter().map(|s| s.v[0]).collect()
    }

    /// Distinct velocities, strictly increasing first components, valid
    /// frequencies and times.
    pub fn validate(&self) -> Result<()> {
        if self.k() < 2 {
            return Err(Error::Config("a multi-soliton needs at least two solitons".into()));
        }
        for s in &self.solitons {
            if !(s.omega > 0.0 && s.omega.is_finite()) {
                return Err(Error::Config(format!("omega = {} must be positive", s.omega)));
            }
        }
        for (i, a) in self.solitons.iter().enumerate() {
            for b in &self.solitons[i + 1..] {
                if a.v == b.v {
                    return Err(Error::Config(format!("solitons share the velocity {:?}", a.v)));
                }
            }
        }
        if self.v1().windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Ordering("first velocity components must increase strictly".into()));
        }
        if !(self.tn > 0.0) || !(self.dt > 0.0) || self.monitor_every == 0 {
            return Err(Error::Config("T_n, dt and monitor_every must be positive".into()));
        }
        crate::evolution::step_count(self.tn, self.dt)?;
        Ok(())
    }

    /// Rotate positions and velocities into the frame at angle `alpha`,
    /// order by first velocity component and snap velocities to the lattice.
    /// Returns the new config and the snapped velocities that moved.
    pub fn in_frame(&self, alpha: f64) -> Result<(Self, Vec<String>)> {
        let grid = self.grid()?;
        let (c, s) = (alpha.cos(), alpha.sin());
        let rot = |a: [f64; 2]| [c * a[0] + s * a[1], -s * a[0] + c * a[1]];
        let mut notes = Vec::new();
        let mut solitons: Vec<SolitonParams> = self
            .solitons
            .iter()
            .map(|p| {
                let (v, moved) = snap_velocity(&grid, rot(p.v));
                if moved {
                    notes.push(format!("velocity {:?} snapped to {v:?}", rot(p.v)));
                }
                SolitonParams { x0: rot(p.x0), v, ..*p }
            })
            .collect();
        solitons.sort_by(|a, b| a.v[0].partial_cmp(&b.v[0]).unwrap());
        Ok((Self { solitons, ..self.clone() }, notes))
    }

    /// `L` for the partition: configured, or a quarter of the smallest
    /// adjacent center distance at `t = 0`.
    pub fn cutoff_length(&self) -> f64 {
        self.l_cutoff.unwrap_or_else(|| {
            let d = self
                .solitons
                .windows(2)
                .map(|w| (w[1].x0[0] - w[0].x0[0]).hypot(w[1].x0[1] - w[0].x0[1]))
                .fold(f64::INFINITY, f64::min);
            0.25 * d
        })
    }

    pub fn partition(&self) -> Partition {
        Partition::new(&self.v1(), self.cutoff_length())
    }
}

/// Smallest gap between sorted first components of `v` rotated by `alpha`.
fn min_gap(v: &[[f64; 2]], alpha: f64) -> f64 {
    let mut c: Vec<f64> = v.iter().map(|u| alpha.cos() * u[0] + alpha.sin() * u[1]).collect();
    c.sort_by(|a, b| a.partial_cmp(b).unwrap());
    c.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}

/// Frame angle making the first velocity components pairwise distinct:
/// zero when they already are, otherwise the angle in `{j pi / 180}`
/// maximizing the smallest gap.
pub fn choose_frame(velocities: &[[f64; 2]]) -> Result<f64> {
    for (i, a) in velocities.iter().enumerate() {
        if velocities[i + 1..].contains(a) {
            return Err(Error::Config(format!("repeated velocity {a:?}")));
        }
    }
    if velocities.len() < 2 || min_gap(velocities, 0.0) > 1e-12 {
        return Ok(0.0);
    }
    let best = (0..180)
        .map(|j| j as f64 * PI / 180.0)
        .max_by(|&a, &b| min_gap(velocities, a).partial_cmp(&min_gap(velocities, b)).unwrap())
        .unwrap();
    Ok(best)
}

/// `theta_0` with `sqrt(theta_0) = min(v_{k+1,1} - v_{k,1}, sqrt(omega_k)) / 16`.
pub fn theta0(config: &MultiSolitonConfig) -> Result<f64> {
    let v1 = config.v1();
    if v1.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Ordering("first velocity components must increase strictly".into()));
    }
    // squares compared directly so omega enters without a rounded root
    let gaps = v1.windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0]));
    let omegas = config.solitons.iter().map(|s| s.omega);
    Ok(gaps.chain(omegas).fold(f64::INFINITY, f64::min) / 256.0)
}
