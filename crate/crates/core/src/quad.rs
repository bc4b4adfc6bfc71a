//! Composite Gauss–Legendre rules, including a logarithmic map of the half-line.

use gauss_quad::GaussLegendre;

/// Nodes and weights of a composite rule on a finite interval.
#[derive(Debug, Clone)]
pub(crate) struct Composite {
    pub points: Vec<(f64, f64)>,
}

impl Composite {
    /// `panels` equal panels on `[a, b]`, `deg` Gauss–Legendre nodes each.
    pub fn new(a: f64, b: f64, panels: usize, deg: usize) -> Self {
        let rule = GaussLegendre::new(deg).expect("degree >= 2");
        let h = (b - a) / panels as f64;
        let mut points = Vec::with_capacity(panels * deg);
        for p in 0..panels {
            let lo = a + p as f64 * h;
            for &(x, w) in rule.as_node_weight_pairs() {
                points.push((lo + 0.5 * h * (x + 1.0), 0.5 * h * w));
            }
        }
        Self { points }
    }

    /// Rule for `∫_0^∞ F(u) du` through `u = e^t`, `t ∈ [lo, hi]`; weights carry the factor `u`.
    pub fn half_line(lo: f64, hi: f64, deg: usize) -> Self {
        let panels = ((hi - lo) / PANEL_WIDTH).ceil().max(1.0) as usize;
        let mut r = Self::new(lo, hi, panels, deg);
        for (t, w) in r.points.iter_mut() {
            let u = t.exp();
            *w *= u;
            *t = u;
        }
        r
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.points.iter().map(|&(x, w)| w * f(x)).sum()
    }
}

const PANEL_WIDTH: f64 = 2.0;
pub(crate) const PANEL_DEGREE: usize = 20;

/// Log-range `[lo, hi]` so that `u^{small}` below and `u^{-large}` above fall under `1e-17`.
pub(crate) fn log_window(small: f64, large: f64) -> (f64, f64) {
    const DIGITS: f64 = 40.0;
    (-DIGITS / small, DIGITS / large + 2.0)
}
