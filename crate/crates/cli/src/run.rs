use std::fs;

use num_complex::Complex64 as C;

use ds2d_core::evolution::{evolve_observed, orbit_distance, EvolutionState, EvolveOptions};
use ds2d_core::ground_state::{minimize_j, solve_fixed_omega, solve_mass_constrained, verify, GroundState, SolverSettings};
use ds2d_core::io::{plot_script, write_field, Command, ExperimentConfig, Manifest, Table};
use ds2d_core::multisoliton::{backward_construct, choose_frame, Ansatz, MultiSolitonConfig, SolitonParams};
use ds2d_core::random::{rng, smooth_field, SmoothNoise};
use ds2d_core::stability::{build_curve_with_states, coercivity_probe, linearized_spectrum, rayleigh_lambda_minus};
use ds2d_core::{h1_norm, ComplexField, Error, Grid2D, NonlocalKind, Result};

/// Default box side for `dj` and for bumps.
const DEFAULT_BOX: f64 = 40.0;

/// Run one command. `Ok(false)` means it finished but some check failed.
pub fn dispatch(mut cfg: ExperimentConfig) -> Result<bool> {
    let seed: u64 = cfg.get_or("seed", 1)?;
    cfg.resolve("seed", seed)?;
    match cfg.command {
        Command::Dj => dj(cfg),
        Command::GroundState => groundstate(cfg),
        Command::Curve => curve(cfg),
        Command::Evolve => evolve(cfg),
        Command::MultiSoliton => multisoliton(cfg),
        Command::Verify => crate::verify::run(cfg),
    }
}

pub fn settings(cfg: &mut ExperimentConfig) -> Result<SolverSettings> {
    let mut s = SolverSettings::default();
    s.points = cfg.get_or("points", s.points)?;
    s.box_side = cfg.get("box")?;
    s.tol = cfg.get_or("tol", s.tol)?;
    s.nonlocal = cfg.get_or("nonlocal", NonlocalKind::Isolated)?;
    if !(s.points >= 8 && s.points % 2 == 0) {
        return Err(Error::Config(format!("points = {} must be even and at least 8", s.points)));
    }
    if let Some(l) = s.box_side {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::Config(format!("box = {l} must be positive")));
        }
    }
    if !(s.tol > 0.0) {
        return Err(Error::Config("tol must be positive".into()));
    }
    cfg.resolve("points", s.points)?;
    cfg.resolve("tol", s.tol)?;
    cfg.resolve("nonlocal", s.nonlocal)?;
    Ok(s)
}

pub fn exponent(cfg: &mut ExperimentConfig) -> Result<f64> {
    let p: f64 = cfg.get_or("p", 2.0)?;
    if !(p > 1.0 && p < 3.0) {
        return Err(Error::Config(format!("p = {p} must lie in (1, 3)")));
    }
    cfg.resolve("p", p)?;
    Ok(p)
}

/// `d_J` from the config, or computed on the default box and recorded.
pub fn sharp_constant(cfg: &mut ExperimentConfig, s: &SolverSettings) -> Result<f64> {
    if let Some(dj) = cfg.get::<f64>("dj")? {
        if !(dj > 0.0) {
            return Err(Error::Config(format!("dj = {dj} must be positive")));
        }
        return Ok(dj);
    }
    let grid = Grid2D::square(s.points, s.box_side.unwrap_or(DEFAULT_BOX))?;
    let dj = minimize_j(&grid, s)?.dj;
    cfg.resolve("dj", format!("{dj:.15e}"))?;
    Ok(dj)
}

fn header(cfg: &ExperimentConfig) -> Vec<String> {
    vec![format!("config: {cfg}"), format!("seed: {}", cfg.raw("seed").unwrap_or("1"))]
}

struct Out {
    manifest: Manifest,
    comments: Vec<String>,
}

impl Out {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        Ok(Self { manifest: Manifest::create(cfg.out_dir())?, comments: header(cfg) })
    }

    fn table(&mut self, name: &str, t: &Table, extra: &[String]) -> Result<()> {
        let mut c = self.comments.clone();
        c.extend_from_slice(extra);
        t.write(self.manifest.path(name), &c)?;
        self.manifest.record(name)
    }

    fn field(&mut self, name: &str, u: &ComplexField) -> Result<()> {
        write_field(self.manifest.path(name), u)?;
        self.manifest.record(name)
    }

    fn script(&mut self, name: &str, text: &str) -> Result<()> {
        fs::write(self.manifest.path(name), text)?;
        self.manifest.record(name)
    }

    fn finish(self) -> Result<()> {
        self.manifest.finish()
    }
}

/// Values along the `x` axis through the center.
fn slice(u: &ComplexField) -> Table {
    let g = u.grid();
    let j = g.ny() / 2;
    let mut t = Table::new(&["x", "re", "im", "abs"]);
    for i in 0..g.nx() {
        let v = u.values()[g.index(i, j)];
        t.push_numbers(&[g.x(i), v.re, v.im, v.norm()]).expect("row width");
    }
    t
}

fn dj(mut cfg: ExperimentConfig) -> Result<bool> {
    let s = settings(&mut cfg)?;
    let side = s.box_side.unwrap_or(DEFAULT_BOX);
    cfg.resolve("box", side)?;
    let grid = Grid2D::square(s.points, side)?;
    let sc = minimize_j(&grid, &s)?;
    let mut out = Out::new(&cfg)?;
    let mut t = Table::new(&["dj", "identity_gap", "residual", "flow_iterations", "shift"]);
    t.push_numbers(&[sc.dj, sc.identity_gap, sc.residual, sc.flow_iterations as f64, sc.shift])?;
    out.table("dj.csv", &t, &[])?;
    out.field("optimizer.fld", &sc.profile)?;
    out.table("optimizer_slice.csv", &slice(&sc.profile), &[])?;
    out.script("optimizer_slice.gp", &plot_script("d_J optimizer", "optimizer_slice.csv", "x", &["re"], false))?;
    out.finish()?;
    println!("dj = {:.12}", sc.dj);
    Ok(true)
}

fn ground_state_row(t: &mut Table, gs: &GroundState) -> Result<()> {
    let c = verify(gs)?;
    let lm = rayleigh_lambda_minus(gs)?;
    t.push_numbers(&[
        gs.omega,
        gs.mass,
        gs.energy,
        gs.residual,
        c.pohozaev,
        c.nehari,
        c.boundary,
        c.negativity,
        c.decay_q,
        c.decay_e1,
        c.decay_e2,
        lm.formula,
        lm.operator,
    ])
}

const GS_COLUMNS: &[&str] = &[
    "omega",
    "mass",
    "energy",
    "residual_l2",
    "pohozaev",
    "nehari",
    "boundary",
    "negativity",
    "decay_q",
    "decay_e1",
    "decay_e2",
    "lambda_minus_formula",
    "lambda_minus_operator",
];

fn groundstate(mut cfg: ExperimentConfig) -> Result<bool> {
    let s = settings(&mut cfg)?;
    let p = exponent(&mut cfg)?;
    let omega: Option<f64> = cfg.get("omega")?;
    let mass: Option<f64> = cfg.get("mass")?;
    let gs = match (omega, mass) {
        (Some(w), None) => {
            let dj = sharp_constant(&mut cfg, &s)?;
            solve_fixed_omega(w, p, dj, &s)?
        }
        (None, Some(m)) => {
            let dj = sharp_constant(&mut cfg, &s)?;
            solve_mass_constrained(m, p, dj, &s)?
        }
        _ => return Err(Error::Config("give exactly one of omega and mass".into())),
    };
    cfg.resolve("box", gs.grid().lx())?;
    let mut out = Out::new(&cfg)?;
    let mut t = Table::new(GS_COLUMNS);
    ground_state_row(&mut t, &gs)?;
    out.table("groundstate.csv", &t, &[])?;
    out.field("groundstate.fld", &gs.profile)?;
    out.table("groundstate_slice.csv", &slice(&gs.profile), &[])?;
    out.script("groundstate_slice.gp", &plot_script("Q along x", "groundstate_slice.csv", "x", &["re"], false))?;
    out.finish()?;
    println!("omega = {:.12} mass = {:.12} residual = {:.3e}", gs.omega, gs.mass, gs.residual);
    Ok(true)
}

fn curve(mut cfg: ExperimentConfig) -> Result<bool> {
    let s = settings(&mut cfg)?;
    let p = exponent(&mut cfg)?;
    let lo: f64 = cfg.get_or("omega_min", 0.05)?;
    let hi: f64 = cfg.get_or("omega_max", 0.8)?;
    let steps: usize = cfg.get_or("steps", 8)?;
    let eigs: usize = cfg.get_or("eigs", 0)?;
    let coerc: usize = cfg.get_or("coercivity_samples", 0)?;
    if !(lo > 0.0 && hi > lo) || steps < 2 {
        return Err(Error::Config("need 0 < omega_min < omega_max and steps >= 2".into()));
    }
    if eigs > 8 {
        return Err(Error::Config("eigs must be at most 8".into()));
    }
    for (k, v) in [("omega_min", lo), ("omega_max", hi)] {
        cfg.resolve(k, v)?;
    }
    cfg.resolve("steps", steps)?;
    let dj = sharp_constant(&mut cfg, &s)?;
    let omegas: Vec<f64> = (0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect();
    let (curve, states) = build_curve_with_states(p, &omegas, dj, &s)?;

    let mut out = Out::new(&cfg)?;
    let mut t = Table::new(&[
        "omega",
        "mass",
        "energy",
        "dE_domega",
        "Dsecond",
        "dm_domega",
        "lambda_minus",
        "residual_l2",
        "valid",
    ]);
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.17e}")).unwrap_or_default();
    for smp in &curve.samples {
        t.push(vec![
            format!("{:.17e}", smp.omega),
            format!("{:.17e}", smp.mass),
            format!("{:.17e}", smp.energy),
            opt(smp.de_domega),
            opt(smp.d_second),
            opt(smp.dm_domega),
            format!("{:.17e}", smp.lambda_minus),
            format!("{:.17e}", smp.residual_l2),
            (smp.valid as u8).to_string(),
        ])?;
    }
    let oj = format!("omega_J: {:?}", curve.omega_j);
    out.table("curve.csv", &t, &[format!("dj: {dj:.15e}"), oj])?;
    out.script("curve.gp", &plot_script("mass and D''", "curve.csv", "omega", &["mass", "Dsecond"], false))?;

    let mut ok = curve.interior().all(|s| s.d_second.is_some_and(|d| d > 0.0));
    if eigs > 0 || coerc > 0 {
        let mut sp = Table::new(&[
            "omega",
            "negative_plus",
            "near_zero_plus",
            "lowest_plus",
            "min_minus",
            "l_minus_q",
            "coercivity_min",
        ]);
        for gs in states.iter().flatten() {
            let (neg, zero, low, minm, kq) = if eigs > 0 {
                let pair = linearized_spectrum(gs, eigs)?;
                let low = pair.eigs_plus.first().map(|e| e.value).unwrap_or(f64::NAN);
                (
                    pair.negative_plus() as f64,
                    pair.near_zero_plus() as f64,
                    low,
                    pair.min_minus(),
                    pair.kernel.l_minus_q,
                )
            } else {
                (f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN)
            };
            let c = if coerc > 0 { coercivity_probe(gs, coerc, cfg.get_or("seed", 1)?)?.min_quotient } else { f64::NAN };
            ok &= eigs == 0 || neg == 1.0;
            ok &= coerc == 0 || c > 0.0;
            sp.push_numbers(&[gs.omega, neg, zero, low, minm, kq, c])?;
        }
        out.table("spectrum.csv", &sp, &[])?;
    }
    out.finish()?;
    for smp in &curve.samples {
        println!("omega = {:.4} mass = {:.8} Dsecond = {}", smp.omega, smp.mass, opt(smp.d_second));
    }
    Ok(ok)
}

fn evolve(mut cfg: ExperimentConfig) -> Result<bool> {
    let s = settings(&mut cfg)?;
    let p = exponent(&mut cfg)?;
    let init: String = cfg.get_or("init", "soliton".to_string())?;
    let duration: f64 = cfg.get_or("t", 1.0)?;
    let dt: f64 = cfg.get_or("dt", 1e-3)?;
    let monitor: usize = cfg.get_or("monitor_every", 10)?;
    let snap: Option<usize> = cfg.get("snapshot_every")?;
    let delta: f64 = cfg.get_or("perturbation", 0.0)?;
    let v = [cfg.get_or("vx", 0.0)?, cfg.get_or("vy", 0.0)?];
    let seed: u64 = cfg.get_or("seed", 1)?;
    if !(dt > 0.0) || monitor == 0 {
        return Err(Error::Config("dt and monitor_every must be positive".into()));
    }
    ds2d_core::evolution::step_count(duration, dt)?;
    for (k, x) in [("t", duration), ("dt", dt)] {
        cfg.resolve(k, x)?;
    }
    cfg.resolve("init", &init)?;

    let (u0, reference) = match init.as_str() {
        "soliton" => {
            let w: f64 = cfg.get_or("omega", 0.3)?;
            cfg.resolve("omega", w)?;
            let dj = sharp_constant(&mut cfg, &s)?;
            let gs = solve_fixed_omega(w, p, dj, &s)?;
            (gs.profile.clone(), Some(gs.profile))
        }
        "bump" => {
            let dj = sharp_constant(&mut cfg, &s)?;
            let m: f64 = cfg.get_or("bump_mass", dj)?;
            if !(m > 0.0) {
                return Err(Error::Config("bump_mass must be positive".into()));
            }
            cfg.resolve("bump_mass", m)?;
            let grid = Grid2D::square(s.points, s.box_side.unwrap_or(DEFAULT_BOX))?;
            let b = ComplexField::from_fn(&grid, |x, y| C::new((-(x * x / 2.0 + y * y / 8.0)).exp(), 0.0));
            (b.scale((m / b.mass()).sqrt()), None)
        }
        other => return Err(Error::Config(format!("init must be soliton or bump, got {other:?}"))),
    };
    let mut u0 = u0;
    if delta > 0.0 {
        let mut r = rng(seed);
        let noise = smooth_field(u0.grid(), &mut r, &SmoothNoise { window: Some(4.0), ..Default::default() });
        u0 = u0.add(&noise.scale(delta / h1_norm(&noise)));
    }
    if v != [0.0, 0.0] {
        let t = ds2d_core::evolution::symmetry_transform(&u0, ds2d_core::evolution::Symmetry::Galilean(v));
        if let Some(w) = &t.warning {
            eprintln!("warning: {w}");
        }
        u0 = t.field;
    }
    let model = s.model(u0.grid(), p)?;
    let opts = EvolveOptions { monitor_every: monitor, snapshot_every: snap, ..Default::default() };
    let mut orbit = Vec::new();
    let traj = evolve_observed(&model, EvolutionState::new(u0.clone()), duration, dt, &opts, |st| {
        if let (Some(q), true) = (&reference, v == [0.0, 0.0]) {
            orbit.push(orbit_distance(&st.field, q)?.distance);
        }
        Ok(())
    })?;

    let mut out = Out::new(&cfg)?;
    let mut cols = vec!["t", "mass", "energy", "momentum_1", "momentum_2", "h1_norm"];
    if !orbit.is_empty() {
        cols.push("orbit_distance");
    }
    let mut t = Table::new(&cols);
    for (i, r) in traj.log.rows.iter().enumerate() {
        let mut row = vec![r.t, r.mass, r.energy, r.momentum[0], r.momentum[1], r.h1_norm];
        if let Some(d) = orbit.get(i) {
            row.push(*d);
        }
        t.push_numbers(&row)?;
    }
    let drifts = vec![
        format!("mass_drift: {:.3e}", traj.log.mass_drift()),
        format!("energy_drift: {:.3e}", traj.log.energy_drift()),
        format!("momentum_drift: {:.3e}", traj.log.momentum_drift()),
    ];
    out.table("conservation.csv", &t, &drifts)?;
    let ys: &[&str] = if orbit.is_empty() { &["h1_norm"] } else { &["h1_norm", "orbit_distance"] };
    out.script("conservation.gp", &plot_script("evolution", "conservation.csv", "t", ys, false))?;
    out.field("initial.fld", &u0)?;
    out.field("final.fld", &traj.state.field)?;
    for (i, st) in traj.snapshots.iter().enumerate() {
        out.field(&format!("snapshot_{i:04}.fld"), &st.field)?;
    }
    out.finish()?;
    for d in &drifts {
        println!("{d}");
    }
    Ok(true)
}

/// `omega,x,y,vx,vy` records separated by `;`.
fn parse_solitons(text: &str) -> Result<Vec<SolitonParams>> {
    text.split(';')
        .filter(|r| !r.trim().is_empty())
        .map(|r| {
            let v: Vec<f64> = r
                .split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad soliton record {r:?}"))))
                .collect::<Result<_>>()?;
            if v.len() != 5 {
                return Err(Error::Config(format!("soliton record {r:?} needs omega,x,y,vx,vy")));
            }
            Ok(SolitonParams { omega: v[0], x0: [v[1], v[2]], v: [v[3], v[4]], gamma: 0.0 })
        })
        .collect()
}

fn multisoliton(mut cfg: ExperimentConfig) -> Result<bool> {
    let mut s = settings(&mut cfg)?;
    s.box_side = None;
    let p = exponent(&mut cfg)?;
    let mut mc = MultiSolitonConfig { p, ..MultiSolitonConfig::reference() };
    if let Some(text) = cfg.raw("solitons") {
        mc.solitons = parse_solitons(text)?;
    }
    mc.tn = cfg.get_or("tn", mc.tn)?;
    mc.dt = cfg.get_or("dt", mc.dt)?;
    mc.l_cutoff = cfg.get("l_cutoff")?;
    mc.nx = cfg.get_or("nx", mc.nx)?;
    mc.ny = cfg.get_or("ny", mc.ny)?;
    mc.lx = cfg.get_or("lx", mc.lx)?;
    mc.ly = cfg.get_or("ly", mc.ly)?;
    mc.monitor_every = cfg.get_or("monitor_every", mc.monitor_every)?;
    mc.alpha1 = cfg.get_or("alpha1", mc.alpha1)?;
    let alpha = choose_frame(&mc.solitons.iter().map(|s| s.v).collect::<Vec<_>>())?;
    let (mc, notes) = mc.in_frame(alpha)?;
    for n in &notes {
        eprintln!("warning: {n}");
    }
    mc.validate()?;
    let records: Vec<String> = mc
        .solitons
        .iter()
        .map(|s| format!("{},{},{},{},{}", s.omega, s.x0[0], s.x0[1], s.v[0], s.v[1]))
        .collect();
    cfg.resolve("solitons", records.join(";"))?;
    for (k, v) in [("tn", mc.tn), ("dt", mc.dt), ("lx", mc.lx), ("ly", mc.ly), ("alpha1", mc.alpha1)] {
        cfg.resolve(k, v)?;
    }
    cfg.resolve("l_cutoff", mc.cutoff_length())?;
    cfg.resolve("nx", mc.nx)?;
    cfg.resolve("ny", mc.ny)?;
    let dj = sharp_constant(&mut cfg, &s)?;
    let ansatz = Ansatz::new(&mc, dj, &s)?;
    let l = mc.cutoff_length();
    let report = backward_construct(&ansatz, &[2.0 * l])?;

    let mut out = Out::new(&cfg)?;
    let k = mc.k();
    let mut cols: Vec<String> =
        ["t", "h1_error", "mass", "energy", "orthogonality", "coercivity"].iter().map(|s| s.to_string()).collect();
    for j in 0..k {
        cols.push(format!("I_{j}"));
        cols.push(format!("I_{j}_2L"));
        cols.push(format!("omega_{j}"));
        cols.push(format!("x1_{j}"));
        cols.push(format!("x2_{j}"));
        cols.push(format!("gamma_{j}"));
    }
    let names: Vec<&str> = cols.iter().map(|s| s.as_str()).collect();
    let mut t = Table::new(&names);
    for r in &report.rows {
        let mut row = vec![
            r.t,
            r.h1_error,
            r.mass,
            r.energy,
            r.orthogonality.unwrap_or(f64::NAN),
            r.coercivity.unwrap_or(f64::NAN),
        ];
        for j in 0..k {
            row.push(r.local[0].values.mass[j]);
            row.push(r.local[1].values.mass[j]);
            match &r.modulation {
                Some(m) => row.extend([m[j].omega, m[j].x[0], m[j].x[1], m[j].gamma]),
                None => row.extend([f64::NAN; 4]),
            }
        }
        t.push_numbers(&row)?;
    }
    let extra = vec![
        format!("theta_fit: {:.6e}", report.theta_fit),
        format!("theta0: {:.15e}", report.theta0),
        format!("frame_angle: {alpha}"),
        format!("variation_L: {:?}", report.local_mass_variation(0, 0.0)),
        format!("variation_2L: {:?}", report.local_mass_variation(1, 0.0)),
    ];
    out.table("tube.csv", &t, &extra)?;
    out.script("tube.gp", &plot_script("distance to the ansatz", "tube.csv", "t", &["h1_error"], true))?;
    out.field("phi0.fld", &report.phi0)?;
    out.finish()?;
    for e in &extra {
        println!("{e}");
    }
    Ok(report.theta_fit > 0.0 && report.rows.iter().all(|r| r.mass < 2.0 * dj))
}
