use ds2d_core::io::{
    plot_script, read_field, read_field_file, read_table, write_field, Command, ExperimentConfig, FieldFile, Manifest,
    Table, MAGIC,
};
use ds2d_core::random::{rng, smooth_field, SmoothNoise};
use ds2d_core::{ComplexField, Error, Grid2D};
use num_complex::Complex64 as C;
use proptest::prelude::*;

fn sample(seed: u64) -> ComplexField {
    let g = Grid2D::new(16, 32, 7.5, 3.25).unwrap();
    smooth_field(&g, &mut rng(seed), &SmoothNoise { window: None, ..Default::default() })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn round_trip_is_bit_exact(seed in any::<u64>()) {
        let u = sample(seed);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.fld");
        write_field(&path, &u).unwrap();
        let v = read_field(&path).unwrap();
        prop_assert!(u.grid().same_as(v.grid()));
        for (a, b) in u.values().iter().zip(v.values()) {
            prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
            prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
        let bytes = std::fs::read(&path).unwrap();
        prop_assert_eq!(FieldFile::from_field(&v).to_bytes(), bytes);
    }

    #[test]
    fn every_truncation_is_rejected(cut in 0usize..(32 + 16 * 16 * 32)) {
        let bytes = FieldFile::from_field(&sample(3)).to_bytes();
        prop_assert!(matches!(FieldFile::from_bytes(&bytes[..cut]), Err(Error::Format(_))));
    }
}

#[test]
fn layout_matches_the_format() {
    let g = Grid2D::new(16, 16, 2.0, 4.0).unwrap();
    let u = ComplexField::from_fn(&g, C::new);
    let b = FieldFile::from_field(&u).to_bytes();
    assert_eq!(b.len(), 8 + 4 + 4 + 8 + 8 + 16 * 256);
    assert_eq!(&b[..8], MAGIC);
    assert_eq!(u32::from_le_bytes(b[8..12].try_into().unwrap()), 16);
    assert_eq!(f64::from_le_bytes(b[24..32].try_into().unwrap()), 4.0);
    // second payload entry is x-fastest: node (1, 0)
    let re = f64::from_le_bytes(b[48..56].try_into().unwrap());
    assert_eq!(re, g.x(1));
}

#[test]
fn bad_magic_and_trailing_bytes() {
    let mut b = FieldFile::from_field(&sample(1)).to_bytes();
    b.push(0);
    assert!(matches!(FieldFile::from_bytes(&b), Err(Error::Format(_))));
    b.pop();
    b[0] = b'X';
    assert!(matches!(FieldFile::from_bytes(&b), Err(Error::Format(_))));
}

#[test]
fn huge_header_is_rejected_before_allocation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("big.fld");
    let f = FieldFile { nx: u32::MAX, ny: u32::MAX, lx: 1.0, ly: 1.0, values: vec![] };
    std::fs::write(&path, f.to_bytes()).unwrap();
    assert!(matches!(read_field_file(&path), Err(Error::Format(_))));
}

#[test]
fn odd_sizes_read_but_not_spectral() {
    let f = FieldFile { nx: 3, ny: 5, lx: 1.0, ly: 1.0, values: vec![C::new(1.0, -1.0); 15] };
    let back = FieldFile::from_bytes(&f.to_bytes()).unwrap();
    assert_eq!(back, f);
    assert!(!back.spectral_ready());
    assert!(matches!(back.into_field(), Err(Error::Grid(_))));
}

#[test]
fn config_parse_and_overrides() {
    let text = "# ground state\nomega = 0.3\np=2 # exponent\n\npoints = 128\n";
    let mut cfg = ExperimentConfig::parse(Command::GroundState, text).unwrap();
    assert_eq!(cfg.get::<f64>("omega").unwrap(), Some(0.3));
    cfg.set("points", "64").unwrap();
    assert_eq!(cfg.get::<usize>("points").unwrap(), Some(64));
    cfg.resolve("tol", 1e-9).unwrap();
    cfg.resolve("omega", 9.0).unwrap();
    assert_eq!(cfg.raw("omega"), Some("0.3"));
    assert_eq!(cfg.to_string(), "groundstate omega=0.3 p=2 points=64 tol=0.000000001");
}

#[test]
fn config_rejects_unknown_and_malformed() {
    assert!(matches!(ExperimentConfig::parse(Command::Dj, "omega = 1"), Err(Error::Config(_))));
    assert!(matches!(ExperimentConfig::parse(Command::Curve, "steps 8"), Err(Error::Config(_))));
    assert!(matches!(ExperimentConfig::parse(Command::Curve, "steps ="), Err(Error::Config(_))));
    let cfg = ExperimentConfig::parse(Command::Curve, "steps = eight").unwrap();
    assert!(matches!(cfg.get::<usize>("steps"), Err(Error::Config(_))));
    let mut cfg = ExperimentConfig::new(Command::Curve);
    cfg.set("omega-min", "0.1").unwrap();
    assert_eq!(cfg.raw("omega_min"), Some("0.1"));
    assert!("nope".parse::<Command>().is_err());
}

#[test]
fn out_dir_appends_command() {
    let mut cfg = ExperimentConfig::new(Command::Curve);
    cfg.set("out_dir", "/tmp/somewhere").unwrap();
    assert_eq!(cfg.out_dir(), std::path::PathBuf::from("/tmp/somewhere/curve"));
}

#[test]
fn table_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let mut m = Manifest::create(dir.path()).unwrap();
    let status = || std::fs::read_to_string(dir.path().join("MANIFEST")).unwrap();
    assert!(status().starts_with("status: partial"));
    let mut t = Table::new(&["t", "mass"]);
    t.push_numbers(&[0.0, 1.5]).unwrap();
    t.push_numbers(&[0.1, 1.25]).unwrap();
    assert!(t.push_numbers(&[1.0]).is_err());
    t.write(m.path("log.csv"), &["config: x".into(), "seed: 4".into()]).unwrap();
    m.record("log.csv").unwrap();
    assert!(status().contains("log.csv"));
    m.finish().unwrap();
    assert!(status().starts_with("status: complete"));
    let (comments, back) = read_table(m.path("log.csv")).unwrap();
    assert_eq!(comments, vec!["config: x", "seed: 4"]);
    assert_eq!(back.columns, vec!["t", "mass"]);
    assert_eq!(back.column("mass").unwrap(), vec![1.5, 1.25]);
}

#[test]
fn plot_script_names_columns() {
    let s = plot_script("curve", "curve.csv", "omega", &["mass", "Dsecond"], true);
    assert!(s.contains("column('Dsecond')"));
    assert!(s.contains("set logscale y"));
    assert!(s.contains("'curve.csv'"));
}
