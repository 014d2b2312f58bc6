//! Acceptance battery at the reference resolution (256^2, p = 2).
//!
//! Prints one `PASS`/`FAIL` line per criterion and exits nonzero if any
//! fails. Criterion numbers given as arguments select a subset:
//! `cargo test --test acceptance -- 7 8`.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::Instant;

use ds2d_core::evolution::{
    evolve, evolve_observed, orbit_distance, richardson_ratio, symmetry_transform, virial_diagnostics,
    EvolutionState, EvolveOptions, Symmetry, Weight,
};
use ds2d_core::ground_state::{minimize_j, solve_fixed_omega, verify, GroundState, SharpConstant, SolverSettings};
use ds2d_core::multisoliton::{backward_construct, choose_frame, theta0, Ansatz, MultiSolitonConfig, SolitonParams};
use ds2d_core::nonlocal::Nonlocal;
use ds2d_core::random::{rng, smooth_field, SmoothNoise};
use ds2d_core::stability::{
    build_curve_with_states, coercivity_probe, linearized_spectrum, rayleigh_lambda_minus, Linearization,
    StabilityCurve,
};
use ds2d_core::{
    apply_e1_poisson, apply_multiplier_ej, functionals, h1_norm, scaling_check, ComplexField, Grid2D, Model,
    NonlocalKind, Result,
};
use num_complex::Complex64 as C;

const P: f64 = 2.0;
const N: usize = 256;
const BOX: f64 = 40.0;
const OMEGAS: [f64; 3] = [0.1, 0.3, 0.6];

/// Sub-checks of one criterion.
#[derive(Default)]
struct Checks {
    failed: Vec<String>,
    notes: Vec<String>,
}

impl Checks {
    fn le(&mut self, name: &str, value: f64, tol: f64) {
        // NaN fails
        if value <= tol {
            self.notes.push(format!("{name}={value:.2e}"));
        } else {
            self.failed.push(format!("{name}={value:.3e} > {tol:.0e}"));
        }
    }

    fn that(&mut self, name: &str, ok: bool, detail: String) {
        let line = if detail.is_empty() { name.to_string() } else { format!("{name} {detail}") };
        if ok {
            self.notes.push(line);
        } else {
            self.failed.push(line);
        }
    }
}

fn settings() -> SolverSettings {
    SolverSettings { points: N, ..Default::default() }
}

fn reference_grid(points: usize) -> Grid2D {
    Grid2D::square(points, BOX).unwrap()
}

fn sharp() -> &'static SharpConstant {
    static S: OnceLock<SharpConstant> = OnceLock::new();
    S.get_or_init(|| minimize_j(&reference_grid(N), &settings()).expect("sharp constant at 256^2"))
}

fn ground(omega: f64) -> &'static GroundState {
    static G: OnceLock<Vec<GroundState>> = OnceLock::new();
    let all = G.get_or_init(|| {
        OMEGAS.iter().map(|&w| solve_fixed_omega(w, P, sharp().dj, &settings()).expect("ground state")).collect()
    });
    &all[OMEGAS.iter().position(|&w| w == omega).expect("fixture frequency")]
}

fn max_diff(a: &ComplexField, b: &ComplexField) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn sci(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join(" ")
}

fn gaussian(g: &Grid2D) -> ComplexField {
    ComplexField::from_fn(g, |x, y| C::new((-(x * x + y * y) / 2.0).exp(), 0.0))
}

fn criterion_1(c: &mut Checks) -> Result<()> {
    // single modes with sigma_1 = k1^2 / |k|^2 = 1, 0, 1/2
    let g = Grid2D::square(32, 2.0 * PI)?;
    let mut err: f64 = 0.0;
    for (k, s) in [((3.0, 0.0), 1.0), ((0.0, 5.0), 0.0), ((2.0, 2.0), 0.5)] {
        let f = ComplexField::from_fn(&g, |x, y| C::new((k.0 * x + k.1 * y).cos(), 0.0));
        err = err.max(max_diff(&apply_multiplier_ej(1, &f)?, &f.scale(s)));
    }
    c.le("symbols", err, 1e-12);

    let g = reference_grid(N);
    let noise = SmoothNoise { window: None, complex: false, ..Default::default() };
    let mut worst: f64 = 0.0;
    for seed in 0..3 {
        let f = smooth_field(&g, &mut rng(seed), &noise);
        worst = worst.max(max_diff(&apply_multiplier_ej(1, &f)?, &apply_e1_poisson(&f)?) / f.max_abs());
    }
    c.le("poisson", worst, 1e-10);

    let u = gaussian(&g);
    let q = functionals(&u, P, NonlocalKind::Isolated)?.quartic;
    let half = 0.5 * u.density().iter().map(|r| r * r).sum::<f64>() * g.cell_area();
    c.le("radial", (q - half).abs() / half, 1e-8);

    // <E_1 f, f> >= 0 for nonnegative f, on both realizations
    let mut r = rng(12);
    let mut neg: f64 = 0.0;
    for i in 0..100 {
        let noise = SmoothNoise { bandwidth: 0.5 + 0.03 * i as f64, window: Some(2.0 + 0.1 * i as f64), ..Default::default() };
        let f = smooth_field(&g, &mut r, &noise).density();
        let l2: f64 = f.iter().map(|v| v * v).sum::<f64>() * g.cell_area();
        for kind in [NonlocalKind::Periodic, NonlocalKind::Isolated] {
            neg = neg.max(-Nonlocal::get(&g, kind).pairing(&f, &f) / l2);
        }
    }
    c.le("positivity", neg, 1e-12);
    Ok(())
}

fn criterion_2(c: &mut Checks) -> Result<()> {
    for w in OMEGAS {
        let gs = ground(w);
        let v = verify(gs)?;
        c.le(&format!("residual({w})"), gs.residual, 1e-8);
        c.le(&format!("pohozaev({w})"), v.pohozaev, 1e-6);
        c.le(&format!("nehari({w})"), v.nehari, 1e-6);
        c.le(&format!("negativity({w})"), v.negativity, 1e-8);
        let slopes = [v.decay_q, v.decay_e1, v.decay_e2];
        c.that(&format!("decay({w})"), slopes.iter().all(|s| *s < 0.0), format!("{slopes:.3?}"));
    }
    Ok(())
}

fn criterion_3(c: &mut Checks) -> Result<()> {
    let coarse = sharp();
    let fine = minimize_j(&reference_grid(2 * N), &SolverSettings { points: 2 * N, ..Default::default() })?;
    c.that("positive", coarse.dj > 0.0, format!("dj={:.12}", coarse.dj));
    c.le("refinement", (fine.dj - coarse.dj).abs() / coarse.dj, 1e-4);

    // J(u) = M G / Q4 >= d_J, i.e. Q4 <= M G / d_J
    let g = coarse.profile.grid();
    let model = Model::new(g, P, NonlocalKind::Isolated)?;
    let mut r = rng(3);
    let mut worst = f64::INFINITY;
    for i in 0..50 {
        let noise = SmoothNoise {
            bandwidth: 0.3 + 0.06 * i as f64,
            window: Some(1.0 + 0.1 * i as f64),
            center: [0.0, 0.0],
            complex: i % 2 == 0,
        };
        let u = if i < 45 {
            smooth_field(g, &mut r, &noise)
        } else {
            // near the optimizer
            coarse.profile.add(&smooth_field(g, &mut r, &noise).scale(0.1 * (i - 44) as f64))
        };
        let j = model.functionals(&u)?.gn_ratio.expect("nonzero field");
        worst = worst.min(j / coarse.dj - 1.0);
    }
    c.that("inequality", worst >= -1e-10, format!("min J/dj-1={worst:.2e}"));
    Ok(())
}

fn criterion_4(c: &mut Checks) -> Result<()> {
    let g = reference_grid(N);
    let fields = [
        gaussian(&g),
        ComplexField::from_fn(&g, |x, y| C::new((-(x * x / 3.0 + y * y) / 1.5).exp(), 0.4 * x * (-(x * x + y * y) / 2.0).exp())),
        ComplexField::from_fn(&g, |x, y| C::from_polar((-((x - 1.0).powi(2) + y * y) / 2.5).exp(), 0.3 * x)),
    ];
    let (mut fd, mut mass): (f64, f64) = (0.0, 0.0);
    for f in &fields {
        for l in [0.5, 2.0] {
            let s = scaling_check(f, P, NonlocalKind::Isolated, 0.3, l, 1e-3 * l)?;
            fd = fd.max(s.mismatch());
            mass = mass.max(s.mass_change);
        }
    }
    c.le("identity", fd, 1e-4);
    c.le("mass", mass, 1e-10);
    Ok(())
}

type Criterion = fn(&mut Checks) -> Result<()>;

type Curve = (StabilityCurve, Vec<Option<GroundState>>);

fn curve() -> &'static Curve {
    static C: OnceLock<Curve> = OnceLock::new();
    C.get_or_init(|| {
        // step 0.025 keeps the three-point truncation error of dE/domega under 1%
        let omegas: Vec<f64> = (0..8).map(|i| 0.15 + 0.025 * i as f64).collect();
        build_curve_with_states(P, &omegas, sharp().dj, &settings()).expect("curve")
    })
}

fn criterion_5(c: &mut Checks) -> Result<()> {
    let (curve, _) = curve();
    let valid = curve.samples.iter().filter(|s| s.valid).count();
    c.that("samples", valid == 8, format!("{valid}/8 valid"));
    let below = curve.samples.iter().all(|s| s.mass < 2.0 * curve.dj);
    c.that("below_omega_j", below, format!("{:?}", curve.omega_j));
    let slopes: Vec<f64> = curve.interior().map(|s| s.dm_domega.unwrap_or(f64::NAN)).collect();
    c.that("dm/domega", slopes.len() == 6 && slopes.iter().all(|d| *d > 0.0), format!("min={:.3}", slopes.iter().cloned().fold(f64::INFINITY, f64::min)));
    let gap = curve.samples.iter().map(|s| StabilityCurve::relation_gap(s).unwrap_or(f64::NAN)).fold(0.0, f64::max);
    c.le("relation", gap, 1e-2);
    let same = curve.samples.iter().all(|s| s.d_second == s.dm_domega && s.d_second.is_some());
    c.that("D''", same, "equals dm/domega".into());
    Ok(())
}

fn criterion_6(c: &mut Checks) -> Result<()> {
    let (_, states) = curve();
    let (mut gap, mut lmq, mut lpdq, mut lmax): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, f64::NEG_INFINITY);
    for gs in states.iter().map(|s| s.as_ref().expect("curve sample solved")).chain(OMEGAS.iter().map(|&w| ground(w))) {
        let l = rayleigh_lambda_minus(gs)?;
        lmax = lmax.max(l.formula);
        gap = gap.max(l.relative_gap());
        let k = Linearization::new(gs)?.kernel_check();
        lmq = lmq.max(k.l_minus_q);
        lpdq = lpdq.max(k.l_plus_dq[0].max(k.l_plus_dq[1]));
    }
    c.that("lambda_minus", lmax < 0.0, format!("max={lmax:.4}"));
    c.le("routes", gap, 1e-8);
    c.le("L-Q", lmq, 1e-8);
    c.le("L+dQ", lpdq, 1e-6);
    let gs = ground(0.3);
    let spec = linearized_spectrum(gs, 6)?;
    c.that("converged", spec.converged, String::new());
    c.that("negative", spec.negative_plus() == 1, format!("{} of 6", spec.negative_plus()));
    let co = coercivity_probe(gs, 200, 5)?;
    c.that("coercivity", co.min_quotient > 0.0, format!("min={:.4}", co.min_quotient));
    Ok(())
}

fn criterion_7(c: &mut Checks) -> Result<()> {
    // plane wave with lattice wavenumber on the periodic realization
    let g = reference_grid(N);
    let model = Model::new(&g, P, NonlocalKind::Periodic)?;
    let (a, k) = (0.8, [6.0 * PI / BOX, -4.0 * PI / BOX]);
    let wave = |t: f64| {
        ComplexField::from_fn(&g, |x, y| C::from_polar(a, k[0] * x + k[1] * y - (k[0] * k[0] + k[1] * k[1]) * t + a * t))
    };
    let opts = EvolveOptions { monitor_every: 100, ..Default::default() };
    let run = evolve(&model, EvolutionState::new(wave(0.0)), 1.0, 1e-3, &opts)?;
    c.le("plane_wave", max_diff(&run.state.field, &wave(1.0)), 1e-8);

    let gs = ground(0.3);
    let model = gs.model()?;
    let mut orbit: f64 = 0.0;
    let opts = EvolveOptions { monitor_every: 50, ..Default::default() };
    let run = evolve_observed(&model, EvolutionState::new(gs.profile.clone()), 20.0, 5e-3, &opts, |s| {
        orbit = orbit.max(orbit_distance(&s.field, &gs.profile)?.distance);
        Ok(())
    })?;
    c.le("orbit", orbit, 1e-3);
    c.le("mass_drift", run.log.mass_drift(), 1e-10);
    c.le("energy_drift", run.log.energy_drift(), 1e-7);

    let moving = symmetry_transform(&gs.profile, Symmetry::Galilean([4.0 * PI / gs.grid().lx(), 0.0])).field;
    let r = richardson_ratio(&model, &moving, 1.0, 0.05)?;
    c.that("richardson", (3.5..=4.5).contains(&r), format!("{r:.3}"));

    let w = Weight::from_fn(gs.grid(), |x| {
        let t = ((x - 1.0) / 3.0).tanh();
        let s = 1.0 - t * t;
        [t, s / 3.0, -2.0 * s * (1.0 - 3.0 * t * t) / 27.0]
    });
    let v = virial_diagnostics(&model, &moving, &w, 1e-3)?;
    c.le("virial", v.mass_mismatch(1e-12), 1e-4);
    Ok(())
}

/// `sup_t` orbit distance to `Q_0.3` from `Q + delta * noise`.
fn perturbed_orbit(delta: f64) -> Result<f64> {
    let gs = ground(0.3);
    let noise = smooth_field(gs.grid(), &mut rng(8), &SmoothNoise { window: Some(4.0), ..Default::default() });
    let u0 = gs.profile.add(&noise.scale(delta / h1_norm(&noise)));
    let mut sup: f64 = 0.0;
    let opts = EvolveOptions { monitor_every: 50, ..Default::default() };
    evolve_observed(&gs.model()?, EvolutionState::new(u0), 50.0, 1e-2, &opts, |s| {
        sup = sup.max(orbit_distance(&s.field, &gs.profile)?.distance);
        Ok(())
    })?;
    Ok(sup)
}

fn criterion_8(c: &mut Checks) -> Result<()> {
    c.le("delta", perturbed_orbit(1e-2)?, 5e-2);
    c.le("4delta", perturbed_orbit(4e-2)?, 4.0 * 5e-2);
    Ok(())
}

fn criterion_9(c: &mut Checks) -> Result<()> {
    let g = reference_grid(N);
    let dj = sharp().dj;
    let b = ComplexField::from_fn(&g, |x, y| C::new((-(x * x / 2.0 + y * y / 8.0)).exp(), 0.3 * (-(x * x + y * y) / 3.0).exp()));
    let u0 = b.scale((dj / b.mass()).sqrt());
    let model = Model::new(&g, P, NonlocalKind::Isolated)?;
    let opts = EvolveOptions { monitor_every: 50, ..Default::default() };
    match evolve(&model, EvolutionState::new(u0.clone()), 50.0, 1e-2, &opts) {
        Ok(run) => {
            c.that("mass", u0.mass() < 2.0 * dj, format!("M/2dj={:.3}", u0.mass() / (2.0 * dj)));
            c.le("h1_growth", run.log.max_h1() / h1_norm(&u0), 2.0);
        }
        Err(e) => c.that("no_blowup", false, e.to_string()),
    }
    Ok(())
}

fn criterion_10(c: &mut Checks) -> Result<()> {
    let dj = sharp().dj;
    let mc = MultiSolitonConfig::reference();
    let alpha = choose_frame(&mc.solitons.iter().map(|s| s.v).collect::<Vec<_>>())?;
    let (mc, _) = mc.in_frame(alpha)?;
    mc.validate()?;
    let ansatz = Ansatz::new(&mc, dj, &settings())?;
    let l = mc.cutoff_length();
    let rep = backward_construct(&ansatz, &[2.0 * l])?;

    c.that("theta_fit", rep.theta_fit > 0.0, format!("{:.4}", rep.theta_fit));
    let (a, b) = (rep.at(mc.tn * 2.0 / 3.0).h1_error, rep.at(mc.tn / 3.0).h1_error);
    c.that("tube", a < b, format!("{a:.2e}<{b:.2e}"));
    let sum = rep
        .rows
        .iter()
        .flat_map(|r| r.local.iter().map(move |lr| (lr.values.mass.iter().sum::<f64>() - r.mass).abs() / r.mass))
        .fold(0.0, f64::max);
    c.le("sum_I", sum, 1e-12);
    let (v1, v2) = (rep.local_mass_variation(0, 0.0), rep.local_mass_variation(1, 0.0));
    let trend = v1.iter().zip(&v2).all(|(x, y)| y < x);
    c.that("L_doubling", trend, format!("L [{}] 2L [{}]", sci(&v1), sci(&v2)));
    let mmax = rep.rows.iter().map(|r| r.mass).fold(0.0, f64::max);
    c.that("below_2dj", mmax < 2.0 * dj, format!("M={mmax:.6}"));

    let s = |x: f64, v: f64| SolitonParams { omega: 0.5, x0: [x, 0.0], v: [v, 0.0], gamma: 0.0 };
    let example = MultiSolitonConfig { solitons: vec![s(-5.0, -0.5), s(5.0, 0.5)], ..MultiSolitonConfig::reference() };
    let t0 = theta0(&example)?;
    c.that("theta0", t0 == 0.001953125, format!("{t0}"));
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 10] = [
        ("operator exactness", criterion_1),
        ("ground states", criterion_2),
        ("sharp constant", criterion_3),
        ("scaling identity", criterion_4),
        ("stability curve", criterion_5),
        ("linearization", criterion_6),
        ("evolution", criterion_7),
        ("orbital stability", criterion_8),
        ("small-mass existence", criterion_9),
        ("multi-soliton", criterion_10),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut all = true;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.contains(&(i + 1)) {
            continue;
        }
        let start = Instant::now();
        let mut c = Checks::default();
        if let Err(e) = run(&mut c) {
            c.failed.push(format!("error: {e}"));
        }
        let pass = c.failed.is_empty();
        all &= pass;
        let detail = if pass {
            c.notes.join(", ")
        } else {
            format!("failed: {}; passed: {}", c.failed.join(", "), c.notes.join(", "))
        };
        println!(
            "{} criterion {} ({name}) [{:.0}s]: {detail}",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
