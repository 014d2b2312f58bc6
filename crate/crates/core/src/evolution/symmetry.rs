use std::f64::consts::PI;

use num_complex::Complex64 as C;

use crate::field::ComplexField;
use crate::grid::Grid2D;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Symmetry {
    /// `phi(x - x0)`
    Translate([f64; 2]),
    /// `phi e^{i gamma}`
    Phase(f64),
    /// `phi e^{i v.x / 2}`
    Galilean([f64; 2]),
}

#[derive(Clone, Debug)]
pub struct Transformed {
    pub field: ComplexField,
    /// The symmetry actually applied (a Galilean velocity may be snapped).
    pub applied: Symmetry,
    pub warning: Option<String>,
}

/// Nearest velocity with `v_j L_j / (4 pi)` integral, so `e^{i v.x/2}` is
/// periodic on the box. Returns whether snapping changed `v`.
pub fn snap_velocity(grid: &Grid2D, v: [f64; 2]) -> ([f64; 2], bool) {
    let unit = [4.0 * PI / grid.lx(), 4.0 * PI / grid.ly()];
    let s = [(v[0] / unit[0]).round() * unit[0], (v[1] / unit[1]).round() * unit[1]];
    let changed = (s[0] - v[0]).abs() > 1e-12 * unit[0] || (s[1] - v[1]).abs() > 1e-12 * unit[1];
    (s, changed)
}

fn lattice_steps(x: f64, h: f64) -> Option<isize> {
    let n = (x / h).round();
    ((x - n * h).abs() <= 1e-12 * h.max(x.abs())).then_some(n as isize)
}

pub fn symmetry_transform(field: &ComplexField, sym: Symmetry) -> Transformed {
    let grid = field.grid();
    match sym {
        Symmetry::Translate(s) => {
            let out = match (lattice_steps(s[0], grid.dx()), lattice_steps(s[1], grid.dy())) {
                (Some(i), Some(j)) => field.shift_lattice(i, j),
                _ => field.translate(s),
            };
            Transformed { field: out, applied: sym, warning: None }
        }
        Symmetry::Phase(g) => Transformed { field: field.scale_complex(C::from_polar(1.0, g)), applied: sym, warning: None },
        Symmetry::Galilean(v) => {
            let (s, changed) = snap_velocity(grid, v);
            let warning = changed.then(|| format!("velocity {v:?} snapped to {s:?}"));
            Transformed { field: field.boost(s), applied: Symmetry::Galilean(s), warning }
        }
    }
}
