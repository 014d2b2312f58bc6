use std::sync::OnceLock;

use ds2d_core::ground_state::{
    canonicalize, decay_slope, interpolate, minimize_j, solve_fixed_omega, solve_mass_constrained, transfer, verify,
    GroundState, SharpConstant, SolverSettings,
};
use ds2d_core::random::{rng, smooth_field, SmoothNoise};
use ds2d_core::{ComplexField, Error, Grid2D, Model, NonlocalKind};
use num_complex::Complex64 as C;
use proptest::prelude::*;

fn settings() -> SolverSettings {
    SolverSettings { points: 128, ..Default::default() }
}

fn sharp() -> &'static SharpConstant {
    static S: OnceLock<SharpConstant> = OnceLock::new();
    S.get_or_init(|| minimize_j(&Grid2D::square(256, 40.0).unwrap(), &SolverSettings::default()).unwrap())
}

fn ground() -> &'static GroundState {
    static G: OnceLock<GroundState> = OnceLock::new();
    G.get_or_init(|| solve_fixed_omega(0.3, 2.0, sharp().dj, &settings()).unwrap())
}

#[test]
fn fixed_omega_solution_satisfies_identities() {
    let gs = ground();
    assert_eq!(gs.omega, 0.3);
    let c = verify(gs).unwrap();
    assert!(c.residual <= 1e-8, "{c:?}");
    assert!(c.passes(1e-6, 1e-6), "{c:?}");
    assert!(gs.mass > 0.0 && gs.mass < 2.0 * sharp().dj);
    assert!(gs.decay_rate > 0.0);
}

#[test]
fn mass_constrained_agrees_with_fixed_omega() {
    let gs = ground();
    let s = SolverSettings { box_side: Some(gs.grid().lx()), ..settings() };
    let m = solve_mass_constrained(gs.mass, 2.0, sharp().dj, &s).unwrap();
    assert!((m.omega - gs.omega).abs() < 1e-7, "omega {}", m.omega);
    assert!((m.mass - gs.mass).abs() < 1e-12 * gs.mass);
    let d = m.q().iter().zip(gs.q()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(d < 1e-6, "profiles differ by {d}");
}

#[test]
fn transfer_to_a_finer_grid() {
    let gs = ground();
    let fine = Grid2D::square(256, gs.grid().lx()).unwrap();
    let t = transfer(gs, &fine, &settings()).unwrap();
    assert_eq!(t.omega, gs.omega);
    assert!(t.residual <= 1e-8);
    assert!((t.mass - gs.mass).abs() < 1e-8 * gs.mass);
}

#[test]
fn interpolation_is_spectral() {
    let coarse = Grid2D::square(64, 20.0).unwrap();
    let fine = Grid2D::square(128, 20.0).unwrap();
    let f = |x: f64, y: f64| C::new((-(x * x + 2.0 * y * y) / 2.0).exp(), 0.5 * x * (-(x * x + y * y) / 3.0).exp());
    let u = interpolate(&ComplexField::from_fn(&coarse, f), &fine);
    let exact = ComplexField::from_fn(&fine, f);
    let d = u.values().iter().zip(exact.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(d < 1e-10, "{d}");
}

#[test]
fn sharp_constant_optimizer() {
    let s = sharp();
    assert!(s.residual <= 1e-8);
    assert!(s.identity_gap < 1e-8, "{}", s.identity_gap);
    assert!(s.dj > 0.0 && s.shift > 0.0);
}

#[test]
fn decay_slope_of_exponential() {
    let g = Grid2D::square(128, 40.0).unwrap();
    let f: Vec<f64> = ComplexField::from_fn(&g, |x, y| C::new((-0.7 * x.hypot(y)).exp(), 0.0)).re();
    assert!((decay_slope(&g, &f) + 0.7).abs() < 1e-10);
    assert!(decay_slope(&g, &vec![0.0; g.len()]).is_nan());
}

#[test]
fn canonical_form_is_real_and_centered() {
    let gs = ground();
    let g = gs.grid();
    let moved = gs.profile.shift_lattice(5, -3).scale_complex(C::from_polar(1.0, 2.1));
    let c = canonicalize(&moved);
    let d = c.values().iter().zip(gs.profile.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(d < 1e-12 * gs.profile.max_abs(), "{d}");
    assert_eq!(c.argmax(), g.index(g.nx() / 2, g.ny() / 2));
}

#[test]
fn invalid_arguments() {
    let s = settings();
    let dj = sharp().dj;
    assert!(matches!(solve_fixed_omega(0.0, 2.0, dj, &s), Err(Error::Domain(_))));
    assert!(matches!(solve_fixed_omega(f64::NAN, 2.0, dj, &s), Err(Error::Domain(_))));
    assert!(matches!(solve_fixed_omega(0.3, 1.0, dj, &s), Err(Error::Domain(_))));
    assert!(matches!(solve_mass_constrained(2.0 * dj, 2.0, dj, &s), Err(Error::Domain(_))));
    assert!(matches!(solve_mass_constrained(-1.0, 2.0, dj, &s), Err(Error::Domain(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]
    // J(u) >= d_J for every field on the grid of the optimizer
    #[test]
    fn sharp_inequality(seed in any::<u64>(), bw in 0.5f64..3.0, win in 1.0f64..6.0, complex in any::<bool>()) {
        let s = sharp();
        let g = s.profile.grid();
        let model = Model::new(g, 2.0, NonlocalKind::Isolated).unwrap();
        let noise = SmoothNoise { bandwidth: bw, window: Some(win), center: [0.0, 0.0], complex };
        let u = smooth_field(g, &mut rng(seed), &noise);
        let j = model.functionals(&u).unwrap().gn_ratio.unwrap();
        prop_assert!(j >= s.dj * (1.0 - 1e-9), "J = {j} below d_J = {}", s.dj);
    }
}
