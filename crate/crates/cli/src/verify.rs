use std::f64::consts::PI;

use num_complex::Complex64 as C;

use ds2d_core::evolution::{evolve, EvolutionState, EvolveOptions};
use ds2d_core::ground_state::{solve_fixed_omega, verify};
use ds2d_core::io::{ExperimentConfig, Manifest, Table};
use ds2d_core::nonlocal::Nonlocal;
use ds2d_core::random::{rng, smooth_field, SmoothNoise};
use ds2d_core::{apply_e1_poisson, apply_multiplier_ej, functionals, scaling_check, ComplexField, Grid2D, NonlocalKind, Result};

use crate::run::{exponent, settings, sharp_constant};

struct Check {
    name: &'static str,
    value: f64,
    tol: f64,
}

impl Check {
    fn pass(&self) -> bool {
        self.value <= self.tol
    }
}

fn symbols() -> Result<f64> {
    let g = Grid2D::square(32, 2.0 * PI)?;
    let mut err: f64 = 0.0;
    for (k, s) in [((3.0, 0.0), 1.0), ((0.0, 5.0), 0.0), ((2.0, 2.0), 0.5)] {
        let f = ComplexField::from_fn(&g, |x, y| C::new((k.0 * x + k.1 * y).cos(), 0.0));
        let e = apply_multiplier_ej(1, &f)?;
        for (a, b) in e.values().iter().zip(f.values()) {
            err = err.max((a - b * s).norm());
        }
    }
    Ok(err)
}

fn poisson(seed: u64) -> Result<f64> {
    let g = Grid2D::new(64, 128, 12.0, 20.0)?;
    let f = smooth_field(&g, &mut rng(seed), &SmoothNoise { window: None, complex: false, ..Default::default() });
    let (a, b) = (apply_multiplier_ej(1, &f)?, apply_e1_poisson(&f)?);
    let d = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    Ok(d / f.max_abs())
}

fn radial(points: usize) -> Result<f64> {
    let g = Grid2D::square(points, 20.0)?;
    let u = ComplexField::from_fn(&g, |x, y| C::new((-(x * x + y * y) / 2.0).exp(), 0.0));
    let q = functionals(&u, 2.0, NonlocalKind::Isolated)?.quartic;
    let half: f64 = 0.5 * u.density().iter().map(|r| r * r).sum::<f64>() * g.cell_area();
    Ok((q - half).abs() / half)
}

/// Most negative `int E_1(f) f / int f^2` over random nonnegative `f`.
fn positivity(seed: u64) -> Result<f64> {
    let g = Grid2D::square(64, 20.0)?;
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for kind in [NonlocalKind::Periodic, NonlocalKind::Isolated] {
        let op = Nonlocal::get(&g, kind);
        for _ in 0..50 {
            let f = smooth_field(&g, &mut r, &SmoothNoise::default()).density();
            let l2: f64 = f.iter().map(|v| v * v).sum::<f64>() * g.cell_area();
            worst = worst.max(-op.pairing(&f, &f) / l2);
        }
    }
    Ok(worst)
}

fn scaling(points: usize) -> Result<(f64, f64)> {
    let g = Grid2D::square(points, 40.0)?;
    let fields = [
        ComplexField::from_fn(&g, |x, y| C::new((-(x * x + y * y) / 2.0).exp(), 0.0)),
        ComplexField::from_fn(&g, |x, y| C::new((-(x * x / 3.0 + y * y) / 1.5).exp(), 0.4 * x * (-(x * x + y * y) / 2.0).exp())),
        ComplexField::from_fn(&g, |x, y| C::from_polar((-((x - 1.0).powi(2) + y * y) / 2.5).exp(), 0.3 * x)),
    ];
    let (mut fd, mut mass): (f64, f64) = (0.0, 0.0);
    for f in &fields {
        for l in [0.5, 2.0] {
            let s = scaling_check(f, 2.0, NonlocalKind::Isolated, 0.3, l, 1e-3 * l)?;
            fd = fd.max(s.mismatch());
            mass = mass.max(s.mass_change);
        }
    }
    Ok((fd, mass))
}

pub fn run(mut cfg: ExperimentConfig) -> Result<bool> {
    let s = settings(&mut cfg)?;
    let p = exponent(&mut cfg)?;
    let seed: u64 = cfg.get_or("seed", 1)?;
    let mut checks = vec![
        Check { name: "symbols", value: symbols()?, tol: 1e-12 },
        Check { name: "poisson_route", value: poisson(seed)?, tol: 1e-10 },
        Check { name: "radial_identity", value: radial(s.points)?, tol: 1e-8 },
        Check { name: "positivity", value: positivity(seed)?, tol: 1e-12 },
    ];
    let (fd, mass) = scaling(s.points)?;
    checks.push(Check { name: "scaling_identity", value: fd, tol: 1e-4 });
    checks.push(Check { name: "scaling_mass", value: mass, tol: 1e-10 });

    let dj = sharp_constant(&mut cfg, &s)?;
    let gs = solve_fixed_omega(0.3, p, dj, &s)?;
    let c = verify(&gs)?;
    checks.push(Check { name: "ground_state_residual", value: gs.residual, tol: 1e-8 });
    checks.push(Check { name: "pohozaev", value: c.pohozaev, tol: 1e-6 });
    checks.push(Check { name: "nehari", value: c.nehari, tol: 1e-6 });

    let model = s.model(gs.grid(), p)?;
    let opts = EvolveOptions { monitor_every: 20, ..Default::default() };
    let traj = evolve(&model, EvolutionState::new(gs.profile.clone()), 0.2, 1e-3, &opts)?;
    checks.push(Check { name: "mass_drift", value: traj.log.mass_drift(), tol: 1e-10 });
    checks.push(Check { name: "energy_drift", value: traj.log.energy_drift(), tol: 1e-7 });

    let mut t = Table::new(&["check", "value", "tolerance", "pass"]);
    for ch in &checks {
        println!("{} {} {:.3e} (tol {:.0e})", if ch.pass() { "PASS" } else { "FAIL" }, ch.name, ch.value, ch.tol);
        t.push(vec![ch.name.into(), format!("{:.6e}", ch.value), format!("{:.0e}", ch.tol), ch.pass().to_string()])?;
    }
    let mut m = Manifest::create(cfg.out_dir())?;
    t.write(m.path("verify.csv"), &[format!("config: {cfg}"), format!("seed: {seed}")])?;
    m.record("verify.csv")?;
    m.finish()?;
    Ok(checks.iter().all(Check::pass))
}
