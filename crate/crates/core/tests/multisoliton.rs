use std::f64::consts::PI;
use std::sync::OnceLock;

use ds2d_core::ground_state::{minimize_j, SolverSettings};
use ds2d_core::multisoliton::{
    backward_construct, choose_frame, localized_quantities, theta0, Ansatz, Cutoff, Modulation, MultiSolitonConfig,
    Partition, SolitonParams,
};
use ds2d_core::{ComplexField, Error, Grid2D};
use proptest::prelude::*;

fn soliton(omega: f64, x: f64, v: f64) -> SolitonParams {
    SolitonParams { omega, x0: [x, 0.0], v: [v, 0.0], gamma: 0.0 }
}

fn small_config() -> MultiSolitonConfig {
    MultiSolitonConfig {
        solitons: vec![soliton(0.2, -5.0, -1.0), soliton(0.2, 5.0, 1.0)],
        tn: 2.0,
        l_cutoff: None,
        p: 2.0,
        nx: 256,
        ny: 256,
        lx: 20.0 * PI,
        ly: 64.0,
        dt: 1e-2,
        monitor_every: 50,
        alpha1: 0.5,
    }
}

fn dj() -> f64 {
    static DJ: OnceLock<f64> = OnceLock::new();
    *DJ.get_or_init(|| minimize_j(&Grid2D::square(256, 40.0).unwrap(), &SolverSettings::default()).unwrap().dj)
}

fn ansatz() -> &'static Ansatz {
    static A: OnceLock<Ansatz> = OnceLock::new();
    A.get_or_init(|| {
        let s = SolverSettings::default();
        Ansatz::new(&small_config(), dj(), &s).unwrap()
    })
}

proptest! {
    #[test]
    fn cutoff_is_a_monotone_symmetric_ramp(s in -1.5f64..1.5) {
        let c = Cutoff::new();
        let [y, d1, _, _] = c.eval(s);
        prop_assert!((0.0..=1.0).contains(&y));
        prop_assert!(d1 >= -1e-14);
        prop_assert!((y + c.value(-s) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn partition_sums_to_one(x in -60.0f64..60.0, t in 0.0f64..20.0, l in 0.5f64..8.0) {
        let p = Partition::new(&[-1.0, 0.25, 1.0], l);
        let w: Vec<f64> = (0..p.count()).map(|k| p.weight(k, x, t)[0]).collect();
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-13);
        prop_assert!(w.iter().all(|v| (-1e-14..=1.0 + 1e-14).contains(v)));
        let d: f64 = (0..p.count()).map(|k| p.weight(k, x, t)[1]).sum();
        prop_assert!(d.abs() < 1e-12);
    }

    #[test]
    fn frame_separates_first_components(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0) {
        prop_assume!((a - b).abs() > 0.1 && (b - c).abs() > 0.1 && (a - c).abs() > 0.1);
        // all three share the first component
        let v = [[0.5, a], [0.5, b], [0.5, c]];
        let alpha = choose_frame(&v).unwrap();
        let mut first: Vec<f64> = v.iter().map(|u| alpha.cos() * u[0] + alpha.sin() * u[1]).collect();
        first.sort_by(|x, y| x.partial_cmp(y).unwrap());
        prop_assert!(first.windows(2).all(|w| w[1] - w[0] > 1e-3));
    }
}

#[test]
fn cutoff_is_c3_at_the_joins() {
    let c = Cutoff::new();
    for s in [-0.5, 0.5] {
        let (a, b) = (c.eval(s - 1e-9), c.eval(s + 1e-9));
        for j in 0..4 {
            assert!((a[j] - b[j]).abs() < 1e-6, "derivative {j} at {s}");
        }
    }
    assert!(c.constant(4000).is_finite());
    assert!(c.min_slope(4000) >= 0.0);
}

#[test]
fn theta0_of_documented_example() {
    let cfg = MultiSolitonConfig {
        solitons: vec![soliton(0.5, -5.0, -0.5), soliton(0.5, 5.0, 0.5)],
        ..MultiSolitonConfig::reference()
    };
    assert_eq!(theta0(&cfg).unwrap(), 0.001953125);
    // a small velocity gap takes over from sqrt(omega)
    let close = MultiSolitonConfig {
        solitons: vec![soliton(0.5, -5.0, 0.0), soliton(0.5, 5.0, 0.25)],
        ..MultiSolitonConfig::reference()
    };
    assert_eq!(theta0(&close).unwrap(), (0.25f64 / 16.0).powi(2));
}

#[test]
fn ordering_and_validation_errors() {
    let mut cfg = MultiSolitonConfig::reference();
    cfg.solitons.reverse();
    assert!(matches!(theta0(&cfg), Err(Error::Ordering(_))));
    assert!(matches!(cfg.validate(), Err(Error::Ordering(_))));
    let (sorted, notes) = cfg.in_frame(0.0).unwrap();
    assert!(notes.is_empty());
    assert!(sorted.validate().is_ok());

    let mut one = MultiSolitonConfig::reference();
    one.solitons.truncate(1);
    assert!(matches!(one.validate(), Err(Error::Config(_))));
    let mut same = MultiSolitonConfig::reference();
    same.solitons[1].v = same.solitons[0].v;
    assert!(matches!(same.validate(), Err(Error::Config(_))));
    assert!(matches!(choose_frame(&[[1.0, 0.0], [1.0, 0.0]]), Err(Error::Config(_))));
    assert_eq!(choose_frame(&[[-1.0, 0.0], [1.0, 0.0]]).unwrap(), 0.0);
}

#[test]
fn default_cutoff_is_a_quarter_separation() {
    let cfg = MultiSolitonConfig::reference();
    assert_eq!(cfg.cutoff_length(), 2.0);
    let p = cfg.partition();
    assert_eq!(p.sigma, vec![0.0]);
}

#[test]
fn in_frame_snaps_velocities() {
    let mut cfg = MultiSolitonConfig::reference();
    cfg.solitons[1].v = [1.03, 0.0];
    let (moved, notes) = cfg.in_frame(0.0).unwrap();
    assert_eq!(notes.len(), 1);
    assert!((moved.solitons[1].v[0] - 1.0).abs() < 1e-12);
}

#[test]
fn localized_masses_sum_to_total() {
    let a = ansatz();
    let u = a.build_profile(1.0).unwrap();
    let p = a.config.partition();
    let loc = localized_quantities(&u, &p, 1.0);
    let total: f64 = loc.mass.iter().sum();
    assert!((total - u.mass()).abs() <= 1e-12 * u.mass());
    // each soliton sits in its own channel
    for (k, m) in loc.mass.iter().enumerate() {
        assert!((m - a.profiles[k].mass).abs() < 1e-3 * m, "channel {k}: {m}");
    }
}

#[test]
fn fit_recovers_modulation() {
    let a = ansatz();
    let t = 0.5;
    let truth = vec![
        Modulation { omega: 0.202, x: [0.05, -0.03], gamma: 0.03 },
        Modulation { omega: 0.199, x: [-0.02, 0.04], gamma: -0.05 },
    ];
    let phi = a.sum(t, &truth);
    let fit = a.fit_modulation(&phi, t, None).unwrap();
    for (f, g) in fit.params.iter().zip(&truth) {
        assert!((f.omega - g.omega).abs() < 1e-8);
        assert!((f.x[0] - g.x[0]).abs() < 1e-8 && (f.x[1] - g.x[1]).abs() < 1e-8);
        assert!((f.gamma - g.gamma).abs() < 1e-8);
    }
    assert!(fit.max_orthogonality() <= 1e-4);
}

#[test]
fn fit_refuses_far_fields() {
    let a = ansatz();
    let zero = ComplexField::zeros(&a.grid);
    assert!(matches!(a.fit_modulation(&zero, 0.0, None), Err(Error::TubeExit { .. })));
}

#[test]
fn placement_and_mass_checks() {
    let a = ansatz();
    assert!(matches!(a.build_profile(40.0), Err(Error::Placement(_))));
    let s = SolverSettings { points: 128, ..Default::default() };
    assert!(matches!(Ansatz::new(&small_config(), 1.0, &s), Err(Error::Config(_))));
}

#[test]
fn short_backward_run() {
    let a = ansatz();
    let r = backward_construct(a, &[4.0]).unwrap();
    assert!(r.rows.windows(2).all(|w| w[0].t < w[1].t));
    assert_eq!(r.rows[0].t, 0.0);
    let last = r.rows.last().unwrap();
    assert!((last.t - 2.0).abs() < 1e-12);
    assert_eq!(last.h1_error, 0.0);
    let m0 = r.rows[0].mass;
    assert!(r.rows.iter().all(|row| (row.mass - m0).abs() < 1e-10 * m0 && row.mass < 2.0 * dj()));
    assert!(r.rows.iter().all(|row| row.local.len() == 2 && row.local[1].length == 4.0));
    assert!(r.rows.iter().all(|row| row.orthogonality.is_some_and(|o| o <= 1e-4)));
    assert_eq!(r.phi0.grid().nx(), 256);
}
