use nalgebra::{Matrix4, Vector4};

/// `C^3` ramp with `Y = 0` for `s <= -1`, `Y = 1` for `s >= 1`,
/// `Y = (1 + s)^4 / 16` on `[-1, -1/2]`, `Y = 1 - (1 - s)^4 / 16` on
/// `[1/2, 1]`, and an odd septic about `1/2` in between matched to third
/// order at `s = +-1/2`.
#[derive(Clone, Copy, Debug)]
pub struct Cutoff {
    c: [f64; 4],
}

impl Default for Cutoff {
    fn default() -> Self {
        Self::new()
    }
}

impl Cutoff {
    pub fn new() -> Self {
        // rows: value, first, second, third derivative of c1 s + c3 s^3 + c5 s^5 + c7 s^7 at s = 1/2
        let s: f64 = 0.5;
        let m = Matrix4::new(
            s, s.powi(3), s.powi(5), s.powi(7),
            1.0, 3.0 * s * s, 5.0 * s.powi(4), 7.0 * s.powi(6),
            0.0, 6.0 * s, 20.0 * s.powi(3), 42.0 * s.powi(5),
            0.0, 6.0, 60.0 * s * s, 210.0 * s.powi(4),
        );
        let t = 1.0 - s;
        let rhs = Vector4::new(0.5 - t.powi(4) / 16.0, t.powi(3) / 4.0, -0.75 * t * t, 1.5 * t);
        let c = m.lu().solve(&rhs).expect("matching system is regular");
        Self { c: [c[0], c[1], c[2], c[3]] }
    }

    /// `[Y, Y', Y'', Y''']` at `s`.
    pub fn eval(&self, s: f64) -> [f64; 4] {
        if s <= -1.0 {
            return [0.0; 4];
        }
        if s >= 1.0 {
            return [1.0, 0.0, 0.0, 0.0];
        }
        if s <= -0.5 {
            let u = 1.0 + s;
            return [u.powi(4) / 16.0, u.powi(3) / 4.0, 0.75 * u * u, 1.5 * u];
        }
        if s >= 0.5 {
            let u = 1.0 - s;
            return [1.0 - u.powi(4) / 16.0, u.powi(3) / 4.0, -0.75 * u * u, 1.5 * u];
        }
        let [c1, c3, c5, c7] = self.c;
        [
            0.5 + c1 * s + c3 * s.powi(3) + c5 * s.powi(5) + c7 * s.powi(7),
            c1 + 3.0 * c3 * s * s + 5.0 * c5 * s.powi(4) + 7.0 * c7 * s.powi(6),
            6.0 * c3 * s + 20.0 * c5 * s.powi(3) + 42.0 * c7 * s.powi(5),
            6.0 * c3 + 60.0 * c5 * s * s + 210.0 * c7 * s.powi(4),
        ]
    }

    pub fn value(&self, s: f64) -> f64 {
        self.eval(s)[0]
    }

    /// Smallest `C` with `(Y')^2 <= C Y` and `(Y'')^2 <= C Y'` on a sample
    /// of `(-1, 1)`.
    pub fn constant(&self, samples: usize) -> f64 {
        (1..samples)
            .map(|i| -1.0 + 2.0 * i as f64 / samples as f64)
            .map(|s| {
                let [y, d1, d2, _] = self.eval(s);
                let a = if y > 0.0 { d1 * d1 / y } else { 0.0 };
                let b = if d1 > 0.0 { d2 * d2 / d1 } else if d2 == 0.0 { 0.0 } else { f64::INFINITY };
                a.max(b)
            })
            .fold(0.0, f64::max)
    }

    /// Smallest `Y'` on a sample of `[-1, 1]`.
    pub fn min_slope(&self, samples: usize) -> f64 {
        (0..=samples).map(|i| self.eval(-1.0 + 2.0 * i as f64 / samples as f64)[1]).fold(f64::INFINITY, f64::min)
    }
}

/// Partition `y_1, ..., y_K` in `x_1` built from `Y((x_1 - sigma_k t) / L)`.
#[derive(Clone, Debug)]
pub struct Partition {
    pub sigma: Vec<f64>,
    pub length: f64,
    pub cutoff: Cutoff,
}

impl Partition {
    /// `sigma_k = (v_{k-1,1} + v_{k,1}) / 2` for `k = 2..K` from the ordered
    /// first velocity components.
    pub fn new(v1: &[f64], length: f64) -> Self {
        let sigma = v1.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        Self { sigma, length, cutoff: Cutoff::new() }
    }

    pub fn count(&self) -> usize {
        self.sigma.len() + 1
    }

    fn ramp(&self, i: usize, x1: f64, t: f64) -> [f64; 4] {
        let l = self.length;
        let [y, d1, d2, d3] = self.cutoff.eval((x1 - self.sigma[i] * t) / l);
        [y, d1 / l, d2 / (l * l), d3 / (l * l * l)]
    }

    /// `[y_k, y_k', y_k''']` at `x_1` for `k = 0..K`.
    pub fn weight(&self, k: usize, x1: f64, t: f64) -> [f64; 3] {
        let kk = self.count();
        let lower = if k == 0 { [1.0, 0.0, 0.0, 0.0] } else { self.ramp(k - 1, x1, t) };
        let upper = if k + 1 == kk { [0.0; 4] } else { self.ramp(k, x1, t) };
        [lower[0] - upper[0], lower[1] - upper[1], lower[3] - upper[3]]
    }
}
